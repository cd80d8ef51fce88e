"""Word Mover's Distance over an embedding store.

Documents reduce to normalized bag-of-words mass over resolvable keys;
the distance is the optimal value of the balanced transportation problem
with Euclidean ground costs, solved exactly by a transportation simplex.
Centroid and relaxed-transport lower bounds are provided as cheap sanity
checks on the solver.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .embeddings import EmbeddingStore


class EmptyDocumentError(Exception):
    """No token of the document resolves to a stored vector."""


@dataclass(frozen=True)
class Document:
    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class NbowWeights:
    entries: dict[str, float]


@dataclass(frozen=True)
class TransportPlan:
    flows: dict[tuple[str, str], float]
    objective: float


def resolve(token: str, store: EmbeddingStore) -> Optional[str]:
    """Sense-aware lookup: a ``lemma=sense_id`` token prefers its sense key,
    falls back to the bare lemma, else resolves like a plain token."""
    if "=" in token:
        if token in store:
            return token
        lemma = token.partition("=")[0]
        if lemma in store:
            return lemma
        return None
    return token if token in store else None


def nbow(doc: Document, store: EmbeddingStore) -> NbowWeights:
    """Count-normalized mass over resolved keys; unresolvable tokens drop."""
    counts: Counter[str] = Counter()
    for token in doc.tokens:
        key = resolve(token, store)
        if key is not None:
            counts[key] += 1
    total = sum(counts.values())
    if total == 0:
        raise EmptyDocumentError(
            f"no token resolvable in store: {list(doc.tokens)[:8]}"
        )
    return NbowWeights(entries={k: c / total for k, c in counts.items()})


def _euclidean_costs(keys_a: list[str], keys_b: list[str], store: EmbeddingStore) -> np.ndarray:
    va = np.stack([store.table[k] for k in keys_a])
    vb = np.stack([store.table[k] for k in keys_b])
    diff = va[:, None, :] - vb[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def solve_transport(
    supply: np.ndarray, demand: np.ndarray, cost: np.ndarray
) -> tuple[float, np.ndarray]:
    """Exact balanced transportation solve (primal transportation simplex).

    Northwest-corner start, u/v potentials, Bland's smallest-index rules
    for entering and leaving cells so the pivot sequence cannot cycle.
    Returns (optimal objective, flow matrix).
    """
    a = np.asarray(supply, dtype=np.float64)
    b = np.asarray(demand, dtype=np.float64)
    m, n = a.shape[0], b.shape[0]
    if cost.shape != (m, n):
        raise ValueError("cost shape does not match supply/demand")
    if abs(a.sum() - b.sum()) > 1e-9:
        raise ValueError("transportation problem must be balanced")

    flow = np.zeros((m, n))
    basis: list[tuple[int, int]] = []

    # Northwest-corner initial basic feasible solution: m+n-1 basic cells.
    a_rem = a.copy()
    b_rem = b.copy()
    i = j = 0
    while True:
        q = min(a_rem[i], b_rem[j])
        flow[i, j] = q
        basis.append((i, j))
        a_rem[i] -= q
        b_rem[j] -= q
        if i == m - 1 and j == n - 1:
            break
        if (a_rem[i] <= b_rem[j] and i < m - 1) or j == n - 1:
            i += 1
        else:
            j += 1

    tol = 1e-12
    max_pivots = 200 * (m + n) * max(m, n)
    for _ in range(max_pivots):
        u, v = _potentials(basis, cost, m, n)
        entering = _entering_cell(cost, u, v, basis, tol)
        if entering is None:
            break
        cycle = _pivot_cycle(basis, entering, m, n)
        # Odd positions in the cycle give up flow; theta is their minimum.
        minus_cells = cycle[1::2]
        theta = min(flow[c] for c in minus_cells)
        leaving = min(c for c in minus_cells if flow[c] == theta)
        for idx, cell in enumerate(cycle):
            flow[cell] += theta if idx % 2 == 0 else -theta
        flow[leaving] = 0.0
        basis.remove(leaving)
        basis.append(entering)
    else:
        raise RuntimeError("transportation simplex failed to converge")

    np.clip(flow, 0.0, None, out=flow)
    objective = float(np.sum(flow * cost))
    return objective, flow


def _potentials(
    basis: list[tuple[int, int]], cost: np.ndarray, m: int, n: int
) -> tuple[np.ndarray, np.ndarray]:
    # Basis edges span rows+columns as a tree; fix u[0]=0 and propagate
    # u[i] + v[j] = cost[i, j] across it.
    adj_row: dict[int, list[int]] = {i: [] for i in range(m)}
    adj_col: dict[int, list[int]] = {j: [] for j in range(n)}
    for (i, j) in basis:
        adj_row[i].append(j)
        adj_col[j].append(i)
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    stack: list[tuple[str, int]] = [("r", 0)]
    while stack:
        kind, idx = stack.pop()
        if kind == "r":
            for j in adj_row[idx]:
                if np.isnan(v[j]):
                    v[j] = cost[idx, j] - u[idx]
                    stack.append(("c", j))
        else:
            for i in adj_col[idx]:
                if np.isnan(u[i]):
                    u[i] = cost[i, idx] - v[idx]
                    stack.append(("r", i))
    return u, v


def _entering_cell(cost, u, v, basis, tol) -> Optional[tuple[int, int]]:
    reduced = cost - u[:, None] - v[None, :]
    for cell in basis:
        reduced[cell] = 0.0
    candidates = np.argwhere(reduced < -tol)
    if candidates.size == 0:
        return None
    i, j = min(map(tuple, candidates))
    return int(i), int(j)


def _pivot_cycle(
    basis: list[tuple[int, int]], entering: tuple[int, int], m: int, n: int
) -> list[tuple[int, int]]:
    """Cycle created by adding the entering cell to the basis tree, as a
    cell list starting at the entering cell with alternating +/- roles."""
    adj: dict[tuple[str, int], list[tuple[str, int]]] = {}
    for (i, j) in basis:
        adj.setdefault(("r", i), []).append(("c", j))
        adj.setdefault(("c", j), []).append(("r", i))
    start = ("r", entering[0])
    goal = ("c", entering[1])
    parent: dict[tuple[str, int], tuple[str, int]] = {start: start}
    queue = [start]
    while queue:
        node = queue.pop(0)
        if node == goal:
            break
        for nxt in adj.get(node, ()):
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    path.reverse()  # row_i ... col_j through the tree
    cycle = [entering]
    for left, right in zip(path, path[1:]):
        if left[0] == "r":
            cycle.append((left[1], right[1]))
        else:
            cycle.append((right[1], left[1]))
    return cycle


def _prepare(doc1: Document, doc2: Document, store: EmbeddingStore):
    w1 = nbow(doc1, store)
    w2 = nbow(doc2, store)
    keys_a = sorted(w1.entries)
    keys_b = sorted(w2.entries)
    a = np.array([w1.entries[k] for k in keys_a])
    b = np.array([w2.entries[k] for k in keys_b])
    cost = _euclidean_costs(keys_a, keys_b, store)
    return keys_a, keys_b, a, b, cost


def wmd(doc1: Document, doc2: Document, store: EmbeddingStore) -> tuple[float, TransportPlan]:
    """Exact WMD plus the optimal transport plan between the two nBOWs."""
    keys_a, keys_b, a, b, cost = _prepare(doc1, doc2, store)
    objective, flow = solve_transport(a, b, cost)
    flows = {
        (keys_a[i], keys_b[j]): float(flow[i, j])
        for i in range(len(keys_a))
        for j in range(len(keys_b))
        if flow[i, j] > 0.0
    }
    return objective, TransportPlan(flows=flows, objective=objective)


def wcd(doc1: Document, doc2: Document, store: EmbeddingStore) -> float:
    """Distance between the mass-weighted centroids; lower-bounds wmd."""
    keys_a, keys_b, a, b, _ = _prepare(doc1, doc2, store)
    ca = a @ np.stack([store.table[k] for k in keys_a])
    cb = b @ np.stack([store.table[k] for k in keys_b])
    return float(np.linalg.norm(ca - cb))


def rwmd(doc1: Document, doc2: Document, store: EmbeddingStore) -> float:
    """Max of the two one-sided relaxed transport costs; lower-bounds wmd."""
    _, _, a, b, cost = _prepare(doc1, doc2, store)
    one_sided_a = float(np.dot(a, cost.min(axis=1)))
    one_sided_b = float(np.dot(b, cost.min(axis=0)))
    return max(one_sided_a, one_sided_b)


def classify_pair(
    doc1: Document, doc2: Document, store: EmbeddingStore, threshold: float
) -> bool:
    """True (match) iff wmd(doc1, doc2) <= threshold."""
    if not np.isfinite(threshold):
        raise ValueError("threshold must be finite")
    distance, _ = wmd(doc1, doc2, store)
    return distance <= threshold
