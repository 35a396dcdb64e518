"""Variable co-occurrence networks and the three variable indices.

Nodes are normalized variable names.  Two variables are joined when
some dataset in scope has both as columns; the edge weight is the
Jaccard similarity of the sets of datasets containing each variable.

* universality: degree centrality in the same-field network
* rarity: 1 - fraction of same-field datasets containing the variable
* linkage: normalized betweenness in the cross-field network

Shortest paths ignore edge weights.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import AbstractSet, Iterable, Sequence

from qualimeta.ingest import Dataset

VARIABLE_INDICES = ("rarity", "universality", "linkage")


@dataclass(frozen=True)
class Scope:
    kind: str
    field_label: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("same_field", "cross_field"):
            raise ValueError(f"unknown scope kind {self.kind!r}")
        if self.kind == "same_field" and not self.field_label:
            raise ValueError("same_field scope needs a field label")

    def includes(self, dataset: Dataset) -> bool:
        return self.kind == "cross_field" or dataset.field_label == self.field_label

    def __str__(self) -> str:
        return "cross_field" if self.kind == "cross_field" else f"same_field({self.field_label})"


CROSS_FIELD = Scope("cross_field")


def same_field(label: str) -> Scope:
    return Scope("same_field", label)


@dataclass(frozen=True)
class NodeInfo:
    dataset_ids: frozenset[str]

    @property
    def occurrence_count(self) -> int:
        return len(self.dataset_ids)


@dataclass(frozen=True)
class VariableNetwork:
    scope: Scope
    dataset_ids: tuple[str, ...]
    nodes: dict[str, NodeInfo]
    edges: dict[tuple[str, str], float]

    @classmethod
    def from_edges(
        cls,
        nodes: Iterable[str],
        edges: Iterable[tuple[str, str]],
        weight: float = 1.0,
        scope: Scope = CROSS_FIELD,
    ) -> VariableNetwork:
        """Plain graph without dataset provenance (for analysis and testing)."""
        names = set(nodes)
        out = {}
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            names.update((u, v))
            out[(u, v) if u < v else (v, u)] = weight
        info = {n: NodeInfo(frozenset({"_"})) for n in sorted(names)}
        return cls(scope, (), info, dict(sorted(out.items())))

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in sorted(self.nodes)}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for nbrs in adj.values():
            nbrs.sort()
        return adj

    def weight(self, u: str, v: str) -> float:
        return self.edges.get((u, v) if u < v else (v, u), 0.0)


@dataclass(frozen=True)
class DegreeScore:
    degree_centrality: float
    weighted_degree: float


@dataclass(frozen=True)
class VariableScore:
    """Scores for one variable; same-field fields are None when not evaluable."""

    degree_centrality: float | None
    weighted_degree: float | None
    occurrence_fraction: float | None
    betweenness: float
    betweenness_normalized: float
    universality: float | None
    rarity: float | None
    linkage: float


@dataclass(frozen=True)
class CentralityTable:
    dataset_id: str
    field_label: str
    same_field_peers: int
    variables: dict[str, VariableScore]

    def mean(self, score: str) -> float | None:
        """Dataset-level value of a variable index (mean over its variables)."""
        values = [getattr(s, score) for s in self.variables.values()]
        values = [v for v in values if v is not None]
        return statistics.fmean(values) if values else None


def jaccard(a: AbstractSet, b: AbstractSet) -> float:
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def build_network(datasets: Sequence[Dataset], scope: Scope) -> VariableNetwork:
    in_scope = sorted((d for d in datasets if scope.includes(d)), key=lambda d: d.id)
    if not in_scope:
        raise ValueError(f"no datasets in scope {scope}")
    holders: dict[str, set[str]] = {}
    pairs: set[tuple[str, str]] = set()
    for ds in in_scope:
        names = sorted(ds.variables)
        for name in names:
            holders.setdefault(name, set()).add(ds.id)
        pairs.update(combinations(names, 2))
    nodes = {name: NodeInfo(frozenset(ids)) for name, ids in sorted(holders.items())}
    edges = {}
    for u, v in sorted(pairs):
        edges[(u, v)] = jaccard(nodes[u].dataset_ids, nodes[v].dataset_ids)
    return VariableNetwork(scope, tuple(d.id for d in in_scope), nodes, edges)


def betweenness_centrality(network: VariableNetwork, normalized: bool = False) -> dict[str, float]:
    """Brandes' algorithm on the unweighted, undirected graph.

    Each unordered pair {s, t} contributes sigma_st(v) / sigma_st to every
    interior vertex v.  With ``normalized`` the values are divided by
    (n-1)(n-2)/2, the number of pairs excluding v.
    """
    adj = network.adjacency()
    order = list(adj)
    bc = dict.fromkeys(order, 0.0)
    for s in order:
        stack = []
        preds: dict[str, list[str]] = {v: [] for v in order}
        sigma = dict.fromkeys(order, 0)
        dist = dict.fromkeys(order, -1)
        sigma[s] = 1
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = dict.fromkeys(order, 0.0)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    # every unordered pair was counted from both endpoints
    for v in order:
        bc[v] /= 2.0
    if normalized:
        n = len(order)
        scale = (n - 1) * (n - 2) / 2 if n >= 3 else 0.0
        for v in order:
            bc[v] = bc[v] / scale if scale else 0.0
    return bc


def degree_centrality(network: VariableNetwork) -> dict[str, DegreeScore]:
    n = len(network.nodes)
    degree = dict.fromkeys(sorted(network.nodes), 0)
    weighted = dict.fromkeys(sorted(network.nodes), 0.0)
    for (u, v), w in network.edges.items():
        degree[u] += 1
        degree[v] += 1
        weighted[u] += w
        weighted[v] += w
    return {
        v: DegreeScore(degree[v] / (n - 1) if n >= 2 else 0.0, weighted[v])
        for v in degree
    }


def variable_scores(
    datasets: Sequence[Dataset],
    evaluated_dataset_id: str,
    *,
    same_field_network: VariableNetwork | None = None,
    cross_field_network: VariableNetwork | None = None,
) -> CentralityTable:
    """Rarity, universality and linkage for each variable of one dataset.

    Prebuilt networks may be passed in to avoid rebuilding them for every
    evaluated dataset of a run.
    """
    by_id = {d.id: d for d in datasets}
    if evaluated_dataset_id not in by_id:
        raise KeyError(f"unknown dataset id {evaluated_dataset_id!r}")
    target = by_id[evaluated_dataset_id]
    same = same_field_network or build_network(datasets, same_field(target.field_label))
    cross = cross_field_network or build_network(datasets, CROSS_FIELD)
    peers = len(same.dataset_ids) - 1
    degrees = degree_centrality(same) if peers else {}
    raw_bc = betweenness_centrality(cross)
    norm_bc = betweenness_centrality(cross, normalized=True)
    n_same = len(same.dataset_ids)

    scores = {}
    for name in sorted(target.variables):
        deg = degrees.get(name)
        frac = same.nodes[name].occurrence_count / n_same if peers else None
        scores[name] = VariableScore(
            degree_centrality=deg.degree_centrality if deg else None,
            weighted_degree=deg.weighted_degree if deg else None,
            occurrence_fraction=frac,
            betweenness=raw_bc[name],
            betweenness_normalized=norm_bc[name],
            universality=deg.degree_centrality if deg else None,
            rarity=1.0 - frac if frac is not None else None,
            linkage=norm_bc[name],
        )
    return CentralityTable(target.id, target.field_label, peers, scores)


def networks_for(datasets: Iterable[Dataset]) -> dict[str, VariableNetwork]:
    """One same-field network per field label plus the cross-field network."""
    datasets = list(datasets)
    out = {}
    for label in sorted({d.field_label for d in datasets}):
        scope = same_field(label)
        out[str(scope)] = build_network(datasets, scope)
    out[str(CROSS_FIELD)] = build_network(datasets, CROSS_FIELD)
    return out
