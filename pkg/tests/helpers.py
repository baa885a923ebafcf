"""Independent oracles shared by the test suite.

Everything here is deliberately written without reference to the library
implementations it is used to check.
"""

import math

import numpy as np
from scipy.special import gammaln


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=60):
    """Adaptive Simpson quadrature of f over [a, b]."""

    def _simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def _rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(fa, flm, fm, a, m)
        right = _simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return _rec(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + _rec(
            m, b, fm, frm, fb, right, tol / 2.0, depth - 1
        )

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    return _rec(a, b, fa, fm, fb, _simpson(fa, fm, fb, a, b), tol, max_depth)


def reg_gamma_p_quadrature(a, x, tol=1e-13):
    """P(a, x) by quadrature after substituting t = u^2 (removes the a<1 singularity)."""
    if x == 0.0:
        return 0.0
    lg = gammaln(a)

    def integrand(u):
        if u == 0.0:
            return 2.0 / math.exp(lg) if a == 0.5 else 0.0
        return 2.0 * math.exp((2.0 * a - 1.0) * math.log(u) - u * u - lg)

    return adaptive_simpson(integrand, 0.0, math.sqrt(x), tol=tol)


def floyd_warshall(n, edges):
    """All-pairs shortest paths on an undirected weighted graph."""
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for i, j, w in edges:
        d[i, j] = min(d[i, j], w)
        d[j, i] = min(d[j, i], w)
    for k in range(n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def dyadic_random_graph(rng, n, p_edge):
    """Random graph with dyadic-rational weights so path sums are exact floats."""
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                w = float(rng.integers(1, 1 << 12)) / 256.0
                edges.append((i, j, w))
    return edges


def pairwise_distances(x):
    x = np.asarray(x, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff**2).sum(-1))


def similarity_stress_ratio(reference_coords, embedding):
    """Stress of the embedding against reference coordinates, allowing a global
    rescaling (rotations/translations do not change pairwise distances), as a
    fraction of the total squared reference distance mass."""
    d_ref = pairwise_distances(reference_coords)
    d_emb = pairwise_distances(embedding)
    iu = np.triu_indices(d_ref.shape[0], 1)
    r, e = d_ref[iu], d_emb[iu]
    scale = float(r @ e) / float(e @ e) if float(e @ e) > 0 else 0.0
    return float(((r - scale * e) ** 2).sum() / (r**2).sum())


def circular_order_violations(angles):
    """Count breaks in circular index order after sorting items by angle.

    Items are assumed to carry indices 0..n-1 in their true circular order;
    returns the smaller violation count over the two traversal directions.
    """
    order = np.argsort(angles)
    n = len(order)
    best = n
    for direction in (order, order[::-1]):
        hits = sum(1 for k in range(n) if (direction[(k + 1) % n] - direction[k]) % n == 1)
        best = min(best, n - hits)
    return best
