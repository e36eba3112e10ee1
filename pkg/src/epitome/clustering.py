"""Ward agglomerative clustering of compositions under the Aitchison distance.

The linkage works from a distance matrix: inputs are squared, merged with
the Lance-Williams recurrence using Ward coefficients, and merge heights are
reported back on the distance scale (square root of the merge
dissimilarity). That is the variant that implements Ward's minimum-variance
criterion when given unsquared distances.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .coda import Composition, DimensionMismatch, aitchison_distance, clr_inverse, clr_matrix, closure


class ClusteringError(ValueError):
    pass


class DegenerateMatrix(ClusteringError):
    pass


class InvalidK(ClusteringError):
    pass


class EmptyCluster(ClusteringError):
    pass


CENTROID_MODES = ("geometric", "arithmetic")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        n = len(self.labels)
        if v.shape != (n, n):
            raise DegenerateMatrix(f"matrix shape {v.shape} does not match {n} labels")
        if not np.array_equal(v, v.T):
            raise DegenerateMatrix("distance matrix is not symmetric")
        if np.any(np.diag(v) != 0) or np.any(v < 0):
            raise DegenerateMatrix("distance matrix needs a zero diagonal and nonnegative entries")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self):
        return len(self.labels)


def pairwise_distance_matrix(compositions: Mapping[Hashable, Composition] | Sequence) -> DistanceMatrix:
    """Aitchison distances between every pair; upper triangle computed, then mirrored."""
    items = list(compositions.items()) if isinstance(compositions, Mapping) else list(compositions)
    labels = [label for label, _ in items]
    comps = [c for _, c in items]
    if comps:
        D = comps[0].D
        for c in comps:
            if c.D != D:
                raise DimensionMismatch(f"D={D} vs D={c.D}")
    n = len(comps)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = aitchison_distance(comps[i], comps[j])
    return DistanceMatrix(tuple(labels), out)


@dataclass(frozen=True)
class Merge:
    a: int
    b: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge history. Leaves are clusters 0..N-1, merge i creates cluster N+i."""

    merges: tuple[Merge, ...]
    leaf_labels: tuple

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_labels)

    @property
    def heights(self) -> np.ndarray:
        return np.array([m.height for m in self.merges])

    def members(self, cluster: int) -> list[int]:
        """Leaf indices under a cluster id."""
        n = self.n_leaves
        stack, out = [cluster], []
        while stack:
            c = stack.pop()
            if c < n:
                out.append(c)
            else:
                m = self.merges[c - n]
                stack.extend((m.a, m.b))
        return sorted(out)

    def as_linkage_matrix(self) -> np.ndarray:
        """scipy-style (N-1) x 4 linkage matrix."""
        return np.array([[m.a, m.b, m.height, m.size] for m in self.merges], dtype=np.float64)

    def to_nested(self, names: Mapping | None = None) -> dict:
        """Nested dict for JSON; leaves carry their label (and name if given)."""
        n = self.n_leaves

        def node(c):
            if c < n:
                leaf = {"id": c, "label": self.leaf_labels[c]}
                if names is not None and self.leaf_labels[c] in names:
                    leaf["name"] = names[self.leaf_labels[c]]
                return leaf
            m = self.merges[c - n]
            return {"id": c, "height": m.height, "size": m.size, "children": [node(m.a), node(m.b)]}

        if n == 1:
            return node(0)
        return node(2 * n - 2)


def ward_linkage(m: DistanceMatrix) -> Dendrogram:
    n = len(m)
    if n < 2:
        raise DegenerateMatrix(f"need at least 2 items to cluster, got {n}")
    d2 = m.values.astype(np.float64) ** 2
    np.fill_diagonal(d2, np.inf)
    sizes = np.ones(n)
    label = np.arange(n)
    active = np.ones(n, dtype=bool)
    merges = []

    for step in range(n - 1):
        slots = np.flatnonzero(active)
        sub = d2[np.ix_(slots, slots)]
        best = sub.min()
        rows, cols = np.nonzero(sub == best)
        # tie-break on the (smaller, larger) current cluster label
        pairs = sorted(
            (min(label[slots[r]], label[slots[c]]), max(label[slots[r]], label[slots[c]]), slots[r], slots[c])
            for r, c in zip(rows, cols)
            if r < c
        )
        la, lb, i, j = pairs[0]
        ni, nj = sizes[i], sizes[j]
        dij = d2[i, j]
        merges.append(Merge(int(la), int(lb), float(np.sqrt(max(dij, 0.0))), int(ni + nj)))

        others = slots[(slots != i) & (slots != j)]
        nq = sizes[others]
        new = ((ni + nq) * d2[i, others] + (nj + nq) * d2[j, others] - nq * dij) / (ni + nj + nq)
        d2[i, others] = d2[others, i] = new
        d2[j, :] = d2[:, j] = np.inf
        active[j] = False
        sizes[i] = ni + nj
        label[i] = n + step

    return Dendrogram(tuple(merges), tuple(m.labels))


@dataclass(frozen=True)
class ClusterAssignment:
    labels: dict
    k: int

    def members(self, cluster: int) -> list:
        return [leaf for leaf, c in self.labels.items() if c == cluster]

    def sizes(self) -> list[int]:
        return [len(self.members(c)) for c in range(1, self.k + 1)]


def _components(d: Dendrogram, k: int) -> list[list[int]]:
    n = d.n_leaves
    parent = list(range(2 * n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step, m in enumerate(d.merges[: n - k]):
        parent[find(m.a)] = n + step
        parent[find(m.b)] = n + step
    groups: dict[int, list[int]] = {}
    for leaf in range(n):
        groups.setdefault(find(leaf), []).append(leaf)
    return sorted(groups.values(), key=lambda g: g[0])


def cut_tree(
    d: Dendrogram,
    k: int,
    compositions: Mapping[Hashable, Composition] | None = None,
    mode: str = "geometric",
) -> ClusterAssignment:
    """Undo the k-1 highest merges and label the resulting components 1..k.

    Without compositions, clusters are numbered by their smallest leaf
    index. With them, cluster 1 is the one whose centroid has the largest
    share in the first part (the youngest age group), and so on downwards.
    """
    n = d.n_leaves
    if not 1 <= k <= n:
        raise InvalidK(f"k must be in 1..{n}, got {k}")
    groups = _components(d, k)
    if compositions is not None:
        def youth(g):
            return -centroid([compositions[d.leaf_labels[i]] for i in g], mode).shares[0]
        groups = sorted(groups, key=lambda g: (youth(g), g[0]))
    labels = {}
    for cluster, g in enumerate(groups, start=1):
        for leaf in g:
            labels[d.leaf_labels[leaf]] = cluster
    return ClusterAssignment(labels, k)


def centroid(comps: Sequence[Composition], mode: str = "geometric", k: float = 100.0) -> Composition:
    """Center of a group of compositions.

    ``geometric``: inverse clr of the mean clr vector. ``arithmetic``: mean of
    the shares, re-closed.
    """
    if not comps:
        raise EmptyCluster("cannot take the centroid of an empty group")
    if mode == "geometric":
        mean = clr_matrix(comps).mean(axis=0)
        return clr_inverse(mean - mean.mean(), k)
    if mode == "arithmetic":
        return closure(np.mean([c.shares for c in comps], axis=0), k)
    raise ValueError(f"unknown centroid mode {mode!r}; expected one of {CENTROID_MODES}")


def cluster_centroids(
    assignment: ClusterAssignment,
    compositions: Mapping[Hashable, Composition],
    mode: str = "geometric",
) -> list[Composition]:
    """Percent centroids for clusters 1..k, in label order."""
    out = []
    for cluster in range(1, assignment.k + 1):
        members = [compositions[e] for e in assignment.members(cluster) if e in compositions]
        if not members:
            raise EmptyCluster(f"cluster {cluster} has no compositions")
        out.append(centroid(members, mode))
    return out
