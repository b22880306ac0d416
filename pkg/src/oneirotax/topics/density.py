"""Hierarchical density clustering over reduced sentence embeddings.

The classical pipeline: core distances -> minimum spanning tree of the
mutual-reachability graph (compiled kernel with numpy fallback) -> single
linkage dendrogram -> condensed tree at min_cluster_size -> excess-of-mass
cluster selection. Points outside every selected cluster get label -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from oneirotax import kernels

# Finite stand-in for lambda = 1/0 at zero-distance merges; keeps stability
# sums free of inf-inf.
LAMBDA_MAX = 1e15


def core_distances(X: np.ndarray, k: int, chunk: int = 512) -> np.ndarray:
    """Distance to the k-th nearest neighbor, counting the point itself.

    Computed in row chunks so memory stays O(chunk * n).
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    k = min(k, n)
    sq = np.einsum("ij,ij->i", X, X)
    out = np.empty(n)
    for start in range(0, n, chunk):
        rows = X[start:start + chunk]
        d2 = sq[start:start + chunk, None] - 2.0 * rows @ X.T + sq[None, :]
        np.maximum(d2, 0.0, out=d2)
        kth = np.partition(d2, k - 1, axis=1)[:, k - 1]
        out[start:start + chunk] = np.sqrt(kth)
    return out


def single_linkage(mst_edges: np.ndarray) -> np.ndarray:
    """Scipy-style linkage array from MST edges.

    Rows are (left_node, right_node, distance, size); node ids >= n refer to
    earlier merges. Edges are processed by ascending weight with a stable
    order, so the dendrogram is deterministic.
    """
    n = mst_edges.shape[0] + 1
    order = np.argsort(mst_edges[:, 2], kind="stable")
    parent = np.arange(2 * n - 1, dtype=np.int64)
    # current linkage node representing each union-find root
    label = np.arange(2 * n - 1, dtype=np.int64)
    size = np.ones(2 * n - 1, dtype=np.int64)
    linkage = np.empty((n - 1, 4))

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for t, idx in enumerate(order):
        u, v, w = int(mst_edges[idx, 0]), int(mst_edges[idx, 1]), mst_edges[idx, 2]
        ru, rv = find(u), find(v)
        new = n + t
        linkage[t] = (label[ru], label[rv], w, size[ru] + size[rv])
        parent[ru] = parent[rv] = new
        label[new] = new
        size[new] = size[ru] + size[rv]
    return linkage


def _leaves_under(linkage: np.ndarray, node: int, n: int) -> list[int]:
    stack = [node]
    leaves = []
    while stack:
        cur = stack.pop()
        if cur < n:
            leaves.append(cur)
        else:
            row = linkage[cur - n]
            stack.extend((int(row[0]), int(row[1])))
    return leaves


def condense_tree(linkage: np.ndarray, min_cluster_size: int) -> np.ndarray:
    """Condensed tree rows (parent, child, lambda, child_size).

    Children >= min_cluster_size survive splits as new clusters; smaller
    children spill their points out at the split's lambda. The root cluster
    has id n.
    """
    n = linkage.shape[0] + 1
    root = 2 * n - 2
    relabel = {root: n}
    next_label = n + 1
    rows: list[tuple[int, int, float, int]] = []
    # top-down over surviving subtrees; spilled subtrees never get pushed
    stack = [root]
    while stack:
        node = stack.pop()
        if node < n:
            continue
        left, right, dist, _ = linkage[node - n]
        left, right = int(left), int(right)
        lam = 1.0 / dist if dist > 0 else LAMBDA_MAX
        lam = min(lam, LAMBDA_MAX)
        lsize = 1 if left < n else int(linkage[left - n, 3])
        rsize = 1 if right < n else int(linkage[right - n, 3])
        cluster = relabel[node]
        if lsize >= min_cluster_size and rsize >= min_cluster_size:
            for child, csize in ((left, lsize), (right, rsize)):
                relabel[child] = next_label
                rows.append((cluster, next_label, lam, csize))
                next_label += 1
                stack.append(child)
        else:
            for child, csize in ((left, lsize), (right, rsize)):
                if csize >= min_cluster_size:
                    relabel[child] = cluster
                    stack.append(child)
                else:
                    for leaf in _leaves_under(linkage, child, n):
                        rows.append((cluster, leaf, lam, 1))
    return np.array(rows, dtype=np.float64)


def cluster_stability(tree: np.ndarray, n: int) -> dict[int, float]:
    births: dict[int, float] = {int(c): lam for _, c, lam, _ in tree if c >= n}
    births[n] = 0.0
    stability: dict[int, float] = {}
    for parent, _, lam, size in tree:
        parent = int(parent)
        stability[parent] = stability.get(parent, 0.0) + (lam - births[parent]) * size
    return stability


def select_clusters(tree: np.ndarray, n: int) -> list[int]:
    """Excess-of-mass selection; the root is never selected."""
    stability = cluster_stability(tree, n)
    children: dict[int, list[int]] = {}
    for parent, child, _, _ in tree:
        if child >= n:
            children.setdefault(int(parent), []).append(int(child))
    # the root never competes: it would absorb everything into one cluster
    clusters = sorted(c for c in stability if c != n)
    selected: dict[int, bool] = {}
    for c in reversed(clusters):
        kids = children.get(c, [])
        subtree = sum(stability[k] for k in kids)
        if not kids:
            selected[c] = True
        elif stability[c] >= subtree:
            selected[c] = True
            # deselect every descendant cluster
            stack = list(kids)
            while stack:
                k = stack.pop()
                selected[k] = False
                stack.extend(children.get(k, []))
        else:
            selected[c] = False
            stability[c] = subtree
    selected[n] = False
    return sorted(c for c, keep in selected.items() if keep)


def labels_from_tree(tree: np.ndarray, selected: list[int], n: int) -> np.ndarray:
    cluster_parent: dict[int, int] = {
        int(c): int(p) for p, c, _, _ in tree if c >= n
    }
    chosen = set(selected)
    cluster_index = {c: i for i, c in enumerate(selected)}
    labels = np.full(n, -1, dtype=np.int64)
    for parent, child, _, _ in tree:
        child = int(child)
        if child >= n:
            continue
        cur = int(parent)
        while cur is not None:
            if cur in chosen:
                labels[child] = cluster_index[cur]
                break
            cur = cluster_parent.get(cur)
    return labels


@dataclass
class DensityClustering:
    labels: np.ndarray            # (n,) int64, -1 for noise
    n_clusters: int
    condensed_tree: np.ndarray


def density_cluster(
    X: np.ndarray,
    min_cluster_size: int,
    min_samples: int | None = None,
) -> DensityClustering:
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    if n < min_cluster_size:
        raise ValueError(
            f"need at least min_cluster_size={min_cluster_size} rows, got {n}"
        )
    k = min_samples if min_samples is not None else min_cluster_size
    core = core_distances(X, k)
    mst = kernels.mst_prim(X, core)
    linkage = single_linkage(mst)
    tree = condense_tree(linkage, min_cluster_size)
    selected = select_clusters(tree, n)
    labels = labels_from_tree(tree, selected, n)
    return DensityClustering(
        labels=labels, n_clusters=len(selected), condensed_tree=tree
    )
