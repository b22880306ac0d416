"""Pure-numpy fallbacks for the compiled kernels.

Same signatures and same results as oneirotax.kernels._kernels; used when the
extension is not built. The MST kernel is the hot loop of density clustering:
Prim's algorithm over the implicit mutual-reachability graph, O(n^2) time and
O(n) memory (distances computed on the fly, never materialized).
"""

import numpy as np


def mst_prim(points, core):
    """Minimum spanning tree of the mutual-reachability graph.

    points: (n, d) float64; core: (n,) float64 core distances.
    Returns (n-1, 3) float64 rows [u, v, weight] in insertion order, where
    weight = max(core[u], core[v], euclidean(u, v)).
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    core = np.ascontiguousarray(core, dtype=np.float64)
    n = points.shape[0]
    edges = np.empty((n - 1, 3), dtype=np.float64)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best_from = np.zeros(n, dtype=np.int64)
    current = 0
    in_tree[0] = True
    for step in range(n - 1):
        diff = points - points[current]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        reach = np.maximum(np.maximum(dist, core), core[current])
        update = reach < best
        best[update] = reach[update]
        best_from[update] = current
        best[in_tree] = np.inf
        nxt = int(np.argmin(best))
        edges[step, 0] = best_from[nxt]
        edges[step, 1] = nxt
        edges[step, 2] = best[nxt]
        in_tree[nxt] = True
        best[nxt] = np.inf
        current = nxt
    return edges


def kmeans_assign(points, centers):
    """Assign each point to its nearest center (squared Euclidean).

    Returns (labels int64 (n,), inertia float). Ties go to the lower index.
    """
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    # ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2, computed exactly per pair to
    # keep parity with the compiled kernel under ties.
    d2 = (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centers.T
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    labels = np.argmin(d2, axis=1)
    # recompute exact distances for the chosen centers (d2 can go slightly
    # negative from cancellation)
    diff = points - centers[labels]
    inertia = float(np.einsum("ij,ij->", diff, diff))
    return labels.astype(np.int64), inertia
