"""Distance- and topology-preserving latent embeddings from dissimilarity data."""

__version__ = "0.1.0"
