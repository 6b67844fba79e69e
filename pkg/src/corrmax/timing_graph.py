"""Timing-graph ingestion and the shared-edge path covariance pipeline.

A timing graph is a DAG whose edges carry independent normal delays
(mu_e, sigma_e).  The accumulated delay of a source-to-sink path is normal
with mean sum(mu_e) and std sqrt(sum(sigma_e^2)); two paths correlate
through their shared edges:

    cov[i][j] = sum_{e in path_i & path_j} sigma_e^2 / (std_i * std_j)

which for a homogeneous (mu, sigma) graph reduces to
|shared edges| / sqrt(L_i * L_j).  The resulting unit-diagonal matrix feeds
the corrected maximum distributions, with a multivariate Monte Carlo run on
the true path delays as the accompanying oracle.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corrections import (
    EpsilonMatrix,
    ValidityReport,
    corrected_cdf,
    corrected_pdf,
    correlation_sum,
    validity_check,
)
from .errors import (
    CycleError,
    DomainError,
    DuplicateEdgeError,
    ParseError,
    PathExplosionError,
)
from .gumbel import GumbelParams, gumbel_moments, scaling_constants
from .montecarlo import McConfig, McResult, sample_multivariate_max
from .normal import std_normal_cdf, std_normal_pdf

__all__ = [
    "Edge",
    "TimingGraph",
    "PathSet",
    "PathCovariance",
    "GraphAnalysis",
    "parse_graph",
    "load_graph",
    "normalize_source_sink",
    "enumerate_paths",
    "accumulated_delay_params",
    "path_covariance",
    "graph_delay_analysis",
    "DEFAULT_PATH_CAP",
]

DEFAULT_PATH_CAP = 10_000


@dataclass(frozen=True)
class Edge:
    """Directed edge with a normal delay (mu, sigma)."""

    src: str
    dst: str
    mu: float
    sigma: float


@dataclass(frozen=True)
class TimingGraph:
    """Directed acyclic graph with delay-carrying edges.

    Nodes are kept in first-appearance order; construction rejects
    self-loops, duplicate (src, dst) pairs, negative delay parameters,
    and cycles.
    """

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise DomainError("node names must be unique")
        seen = set()
        for e in self.edges:
            if e.src not in known or e.dst not in known:
                raise DomainError(f"edge {e.src}->{e.dst} references unknown node")
            if e.src == e.dst:
                raise DomainError(f"self-loop on node {e.src!r} is not allowed")
            if (e.src, e.dst) in seen:
                raise DuplicateEdgeError(f"duplicate edge {e.src}->{e.dst}")
            seen.add((e.src, e.dst))
            if not (np.isfinite(e.mu) and np.isfinite(e.sigma)):
                raise DomainError(f"edge {e.src}->{e.dst} has non-finite delay")
            if e.mu < 0.0 or e.sigma < 0.0:
                raise DomainError(
                    f"edge {e.src}->{e.dst} has negative mu or sigma"
                )
        self._check_acyclic()

    @classmethod
    def from_edge_list(cls, edge_list) -> "TimingGraph":
        """Build from (src, dst, mu, sigma) tuples, nodes in file order."""
        nodes: list[str] = []
        seen_nodes = set()
        edges = []
        for src, dst, mu, sigma in edge_list:
            for name in (str(src), str(dst)):
                if name not in seen_nodes:
                    seen_nodes.add(name)
                    nodes.append(name)
            edges.append(Edge(str(src), str(dst), float(mu), float(sigma)))
        return cls(nodes=tuple(nodes), edges=tuple(edges))

    def _check_acyclic(self) -> None:
        indeg = {v: 0 for v in self.nodes}
        succs: dict[str, list[str]] = {v: [] for v in self.nodes}
        for e in self.edges:
            indeg[e.dst] += 1
            succs[e.src].append(e.dst)
        ready = [v for v in self.nodes if indeg[v] == 0]
        removed = 0
        while ready:
            v = ready.pop()
            removed += 1
            for w in succs[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        if removed != len(self.nodes):
            raise CycleError("edge set contains a directed cycle")

    def sources(self) -> list[str]:
        with_indeg = {e.dst for e in self.edges}
        return [v for v in self.nodes if v not in with_indeg]

    def sinks(self) -> list[str]:
        with_outdeg = {e.src for e in self.edges}
        return [v for v in self.nodes if v not in with_outdeg]


@dataclass(frozen=True)
class PathSet:
    """Enumerated source-to-sink paths as edge-index sequences."""

    paths: tuple[tuple[int, ...], ...]
    lengths: tuple[int, ...]

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def edge_sets(self) -> list[frozenset[int]]:
        return [frozenset(p) for p in self.paths]

    def node_sequence(self, i: int, graph: TimingGraph) -> list[str]:
        edges = [graph.edges[e] for e in self.paths[i]]
        return [edges[0].src] + [e.dst for e in edges]


@dataclass(frozen=True)
class PathCovariance:
    """Unit-diagonal covariance of standardized path delays."""

    matrix: np.ndarray


def parse_graph(text: str) -> TimingGraph:
    """Parse a timing graph from edge-list text or its JSON mirror.

    Text format: ``#`` comment lines, otherwise whitespace-separated
    ``FROM TO MU SIGMA`` with MU >= 0 and SIGMA >= 0.  JSON format:
    ``{"edges": [{"from":, "to":, "mu":, "sigma":}, ...]}``.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_graph_json(text)
    edge_list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 4:
            raise ParseError(
                f"line {lineno}: expected 'FROM TO MU SIGMA', got {line!r}"
            )
        src, dst = tokens[0], tokens[1]
        try:
            mu, sigma = float(tokens[2]), float(tokens[3])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad number in {line!r}") from exc
        if src == dst:
            raise ParseError(f"line {lineno}: self-loop on node {src!r}")
        if not (np.isfinite(mu) and np.isfinite(sigma)) or mu < 0 or sigma < 0:
            raise ParseError(
                f"line {lineno}: MU and SIGMA must be finite and >= 0"
            )
        edge_list.append((src, dst, mu, sigma))
    if not edge_list:
        raise ParseError("no edges found in graph input")
    return TimingGraph.from_edge_list(edge_list)


def _parse_graph_json(text: str) -> TimingGraph:
    try:
        doc = json.loads(text)
        raw_edges = doc["edges"]
        edge_list = [
            (str(e["from"]), str(e["to"]), float(e["mu"]), float(e["sigma"]))
            for e in raw_edges
        ]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed JSON graph document: {exc}") from exc
    if not edge_list:
        raise ParseError("no edges found in graph input")
    for src, dst, mu, sigma in edge_list:
        if src == dst:
            raise ParseError(f"self-loop on node {src!r}")
        if not (np.isfinite(mu) and np.isfinite(sigma)) or mu < 0 or sigma < 0:
            raise ParseError("mu and sigma must be finite and >= 0")
    return TimingGraph.from_edge_list(edge_list)


def load_graph(path) -> TimingGraph:
    """Read and parse a graph file."""
    with open(path, "r") as fh:
        return parse_graph(fh.read())


def _fresh_name(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "_"
    return name


def normalize_source_sink(g: TimingGraph) -> TimingGraph:
    """Ensure a single source and a single sink.

    Multiple zero-in-degree (zero-out-degree) nodes are joined to one
    virtual source (sink) through zero-delay edges.  Already-normalized
    graphs are returned unchanged, so the transform is idempotent.
    """
    sources = g.sources()
    sinks = g.sinks()
    if len(sources) == 1 and len(sinks) == 1:
        return g
    nodes = list(g.nodes)
    edges = list(g.edges)
    taken = set(nodes)
    if len(sources) > 1:
        virtual = _fresh_name("__source__", taken)
        taken.add(virtual)
        nodes.insert(0, virtual)
        edges = [Edge(virtual, s, 0.0, 0.0) for s in sources] + edges
    if len(sinks) > 1:
        virtual = _fresh_name("__sink__", taken)
        taken.add(virtual)
        nodes.append(virtual)
        edges = edges + [Edge(t, virtual, 0.0, 0.0) for t in sinks]
    return TimingGraph(nodes=tuple(nodes), edges=tuple(edges))


def enumerate_paths(g: TimingGraph, cap: int = DEFAULT_PATH_CAP) -> PathSet:
    """All source-to-sink paths, depth first with neighbors in identifier
    order, so the result is stable across runs and input orderings.

    Raises:
        PathExplosionError: once more than ``cap`` paths have been found.
    """
    if cap < 1:
        raise DomainError(f"cap must be >= 1 (got {cap})")
    sources = g.sources()
    sinks = g.sinks()
    if len(sources) != 1 or len(sinks) != 1:
        raise DomainError(
            "graph must have a single source and sink; "
            "apply normalize_source_sink first"
        )
    if not g.edges:
        raise DomainError("graph has no edges")
    source, sink = sources[0], sinks[0]

    succs: dict[str, list[tuple[str, int]]] = {v: [] for v in g.nodes}
    for idx, e in enumerate(g.edges):
        succs[e.src].append((e.dst, idx))
    for v in succs:
        succs[v].sort(key=lambda pair: pair[0])

    # Iterative DFS: timing graphs can be thousands of levels deep, which
    # would overflow the interpreter recursion limit.
    paths: list[tuple[int, ...]] = []
    edge_stack: list[int] = []
    iter_stack = [iter(succs[source])]
    while iter_stack:
        try:
            nxt, edge_idx = next(iter_stack[-1])
        except StopIteration:
            iter_stack.pop()
            if edge_stack:
                edge_stack.pop()
            continue
        edge_stack.append(edge_idx)
        if nxt == sink:
            if len(paths) >= cap:
                raise PathExplosionError(cap=cap, count=len(paths) + 1)
            paths.append(tuple(edge_stack))
            edge_stack.pop()
        else:
            iter_stack.append(iter(succs[nxt]))
    return PathSet(
        paths=tuple(paths), lengths=tuple(len(p) for p in paths)
    )


def accumulated_delay_params(g: TimingGraph, path) -> tuple[float, float]:
    """Mean and std of the accumulated delay along one path.

    Edge delays are independent, so the mean is the sum of edge means and
    the variance is the sum of edge variances.
    """
    edges = [g.edges[i] for i in path]
    if not edges:
        raise DomainError("path must contain at least one edge")
    mean = sum(e.mu for e in edges)
    var = sum(e.sigma * e.sigma for e in edges)
    return float(mean), float(np.sqrt(var))


def path_covariance(ps: PathSet, g: TimingGraph) -> PathCovariance:
    """Correlation matrix of standardized path delays via shared edges.

    Entry (i, j) is the shared edge variance over the product of path
    stds; a path with zero total variance correlates with nothing and
    keeps a unit diagonal by convention.
    """
    n = ps.n_paths
    n_edges = len(g.edges)
    weights = np.zeros((n, n_edges), dtype=float)
    sigmas = np.array([e.sigma for e in g.edges], dtype=float)
    for i, path in enumerate(ps.paths):
        weights[i, list(path)] = sigmas[list(path)]
    gram = weights @ weights.T
    stds = np.sqrt(np.diag(gram))
    denom = np.outer(stds, stds)
    with np.errstate(invalid="ignore", divide="ignore"):
        matrix = np.where(denom > 0.0, gram / np.where(denom > 0, denom, 1.0), 0.0)
    np.fill_diagonal(matrix, 1.0)
    return PathCovariance(matrix=matrix)


@dataclass(frozen=True)
class GraphAnalysis:
    """Full report of the path-based maximum-delay analysis."""

    n_paths: int
    lengths: tuple[int, ...]
    path_means: np.ndarray
    path_stds: np.ndarray
    covariance: PathCovariance
    epsilon: EpsilonMatrix | None
    s: float
    order: str
    nominal_mean: float
    nominal_std: float
    gumbel: GumbelParams | None
    z_grid: np.ndarray
    cdf: np.ndarray
    pdf: np.ndarray
    validity: ValidityReport | None
    analytic_mean: float
    mc: McResult

    @property
    def mc_mean_gap(self) -> float:
        return float(self.mc.mean - self.analytic_mean)


def _analytic_mean_std_units(params: GumbelParams, s: float, order: str) -> float:
    """Mean of the corrected law by trapezoid quadrature on a wide grid."""
    lo = params.alpha - 12.0 * params.beta
    hi = params.alpha + 40.0 * params.beta
    z = np.linspace(lo, hi, 20_001)
    return float(np.trapezoid(z * corrected_pdf(z, params, s, order), z))


def graph_delay_analysis(
    g: TimingGraph,
    cfg: McConfig,
    order: str = "second",
    cap: int = DEFAULT_PATH_CAP,
    z_steps: int = 501,
) -> GraphAnalysis:
    """Run the whole pipeline: paths, covariance, corrected law, MC oracle.

    The analytic distribution treats standardized path delays as an
    IID-with-weak-correlations set at the scale of the critical path
    (largest mean; ties broken by larger std).  The Monte Carlo result
    maximizes the actual correlated path delays with their true per-path
    means and stds, quantifying the approximation error.
    """
    norm = normalize_source_sink(g)
    ps = enumerate_paths(norm, cap=cap)
    stats = [accumulated_delay_params(norm, p) for p in ps.paths]
    means = np.array([m for m, _ in stats], dtype=float)
    stds = np.array([s_ for _, s_ in stats], dtype=float)
    pc = path_covariance(ps, norm)
    n_paths = ps.n_paths

    nominal_idx = max(range(n_paths), key=lambda i: (means[i], stds[i]))
    mu_star = float(means[nominal_idx])
    sigma_star = float(stds[nominal_idx])

    full_cov = np.outer(stds, stds) * pc.matrix
    mc = sample_multivariate_max(full_cov, cfg, mean=means)

    if n_paths == 1:
        z = np.linspace(mu_star - 8.0 * sigma_star, mu_star + 8.0 * sigma_star, z_steps) \
            if sigma_star > 0 else np.linspace(mu_star - 1.0, mu_star + 1.0, z_steps)
        if sigma_star > 0:
            zs = (z - mu_star) / sigma_star
            cdf = std_normal_cdf(zs)
            pdf = std_normal_pdf(zs) / sigma_star
        else:
            cdf = (z >= mu_star).astype(float)
            pdf = np.zeros_like(z)
        return GraphAnalysis(
            n_paths=1, lengths=ps.lengths, path_means=means, path_stds=stds,
            covariance=pc, epsilon=None, s=0.0, order=order,
            nominal_mean=mu_star, nominal_std=sigma_star, gumbel=None,
            z_grid=z, cdf=cdf, pdf=pdf, validity=None,
            analytic_mean=mu_star, mc=mc,
        )

    if sigma_star <= 0.0:
        raise DomainError("critical path has zero delay variance")

    eps = EpsilonMatrix.from_covariance(pc.matrix)
    s_val = correlation_sum(eps).s
    params = scaling_constants(n_paths)
    moments = gumbel_moments(params)
    z_std = np.linspace(
        moments.mean - 6.0 * moments.std, moments.mean + 8.0 * moments.std, z_steps
    )
    cdf = corrected_cdf(z_std, params, s_val, order)
    pdf = corrected_pdf(z_std, params, s_val, order) / sigma_star
    validity = validity_check(params, s_val, eps, z_std, order=order)
    analytic_mean = mu_star + sigma_star * _analytic_mean_std_units(
        params, s_val, order
    )
    return GraphAnalysis(
        n_paths=n_paths, lengths=ps.lengths, path_means=means, path_stds=stds,
        covariance=pc, epsilon=eps, s=s_val, order=order,
        nominal_mean=mu_star, nominal_std=sigma_star, gumbel=params,
        z_grid=mu_star + sigma_star * z_std, cdf=cdf, pdf=pdf,
        validity=validity, analytic_mean=analytic_mean, mc=mc,
    )
