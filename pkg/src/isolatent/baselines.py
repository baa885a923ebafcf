"""Classical MDS, epsilon-graph IsoMap, and the stress objective.

These serve both as comparison baselines and as the initializer for the
latent means of the probabilistic model.
"""

from __future__ import annotations

import numpy as np

from isolatent.dissimilarity import DissimilarityMatrix
from isolatent.errors import ValidationError
from isolatent.graph import all_pairs_shortest, build_eps_graph, connected_components


def classical_mds(d: DissimilarityMatrix, q: int) -> np.ndarray:
    """Classical scaling: eigendecompose the double-centered squared distances.

    Returns the N x q embedding whose columns are ordered by descending
    eigenvalue; negative eigenvalues (non-Euclidean input) are truncated to
    zero, giving zero coordinates in those directions.
    """
    v = d.values
    n = v.shape[0]
    if not 1 <= q <= n - 1:
        raise ValidationError(f"target dimension q={q} must be in [1, {n - 1}]")
    h = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * h @ (v**2) @ h
    b = 0.5 * (b + b.T)  # enforce exact symmetry for the solver
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:q]
    top = np.clip(evals[order], 0.0, None)
    return evecs[:, order] * np.sqrt(top)[None, :]


def isomap(d: DissimilarityMatrix, eps: float, q: int):
    """Epsilon-graph IsoMap: shortest-path distances fed to classical MDS.

    Operates on the largest connected component; returns the embedding and
    the indices of the vertices it covers (geodesics across components are
    infinite, so dropped vertices are reported rather than embedded).
    """
    g = build_eps_graph(d, eps)
    labels = connected_components(g)
    counts = np.bincount(labels)
    keep = np.flatnonzero(labels == int(np.argmax(counts)))
    if keep.size < q + 1:
        raise ValidationError(
            f"largest component has {keep.size} vertices, need at least {q + 1}"
        )
    sub = DissimilarityMatrix(d.values[np.ix_(keep, keep)])
    geo = all_pairs_shortest(build_eps_graph(sub, eps))
    # per-source runs sum path weights in different orders; mirror one triangle
    geo = np.triu(geo, 1)
    geo = geo + geo.T
    embedding = classical_mds(DissimilarityMatrix(geo), q)
    return embedding, keep


def stress(d: DissimilarityMatrix, z: np.ndarray) -> float:
    """Sum over pairs of squared residuals between d_ij and ||z_i - z_j||."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[0] != d.n:
        raise ValidationError(f"embedding shape {z.shape} does not match {d.n} points")
    diff = z[:, None, :] - z[None, :, :]
    emb = np.sqrt((diff**2).sum(-1))
    iu = np.triu_indices(d.n, 1)
    return float(((d.values[iu] - emb[iu]) ** 2).sum())
