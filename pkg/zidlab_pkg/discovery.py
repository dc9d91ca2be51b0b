# -*- coding: utf-8 -*-
"""
ZidLab — Subgoal discovery module.

Bottleneck discovery by repeated binary spectral clustering of a local
state graph built from random exploration. Every few episodes the largest
connected component is bisected with the Fiedler vector of its symmetric
normalised Laplacian; edges crossing the bisection gain one point, and
each state's score (sum of its incident edge scores) is projected onto
the grid cell of every agent in that state.
"""

import logging
import time
from collections import Counter
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import TooSmall, NoConvergence, ValidationError
from .gridworld import GridEnv

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 10_000
DEFAULT_CLUSTER_INTERVAL = 5
DEFAULT_EPISODE_HORIZON = 100
DENSE_LIMIT = 64
MIN_COMPONENT = 4

WEIGHT_UNIT = "unit"
WEIGHT_VISITS = "visits"
WEIGHTINGS = (WEIGHT_UNIT, WEIGHT_VISITS)

# cluster the whole graph explored so far, or only the last window of episodes
GRAPH_CUMULATIVE = "cumulative"
GRAPH_RECENT = "recent"
LOCAL_GRAPHS = (GRAPH_CUMULATIVE, GRAPH_RECENT)


def _edge(u, v):
    return (u, v) if u <= v else (v, u)


# ============================================================
# LOCAL GRAPH
# ============================================================


class LocalGraph:
    """Undirected graph of visited states, grown from exploration episodes.

    Nodes are state keys carrying their WorldState; edges carry a `visits`
    count. Self-transitions are not edges. `states` remembers every state
    ever inserted, across `clear()`.
    """

    def __init__(self):
        self.graph = nx.Graph()
        self.states = {}
        self.pending_episodes = 0

    @property
    def n_vertices(self):
        return self.graph.number_of_nodes()

    @property
    def n_edges(self):
        return self.graph.number_of_edges()

    def state(self, key):
        return self.states[key]

    def clear(self):
        """Drop nodes and edges, keeping the state registry."""
        self.graph = nx.Graph()
        self.pending_episodes = 0

    def largest_component(self):
        """Largest connected component as a subgraph view.

        Equal sizes are broken by the smallest vertex key.
        """
        return largest_component(self.graph)


def largest_component(g):
    if not g.number_of_nodes():
        return g.subgraph(())
    best = min(nx.connected_components(g), key=lambda c: (-len(c), min(c)))
    return g.subgraph(best)


def accumulate(graph, episode):
    """Insert an episode's (state, next_state) transitions; returns `graph`."""
    g = graph.graph
    for state, nxt in episode:
        u, v = state.key(), nxt.key()
        for key, s in ((u, state), (v, nxt)):
            if key not in g:
                g.add_node(key, state=graph.states.setdefault(key, s.with_step(0)))
        if u == v:
            continue
        if g.has_edge(u, v):
            g[u][v]["visits"] += 1
        else:
            g.add_edge(u, v, visits=1)
    graph.pending_episodes += 1
    return graph


# ============================================================
# SPECTRAL BISECTION
# ============================================================


@dataclass(frozen=True)
class Bisection:
    side_a: frozenset
    side_b: frozenset
    crossing: tuple
    lambda2: float
    residual: float
    fiedler: dict = field(repr=False, compare=False, default=None)


def normalized_laplacian(component, nodes, weighting=WEIGHT_UNIT):
    """I - D^-1/2 A D^-1/2 over `nodes` (sparse) and the sqrt degree vector."""
    if weighting not in WEIGHTINGS:
        raise ValidationError(f"unknown edge weighting {weighting!r}")
    weight = "visits" if weighting == WEIGHT_VISITS else None
    A = nx.to_scipy_sparse_array(component, nodelist=nodes, weight=weight, format="csr")
    degree = np.asarray(A.sum(axis=1)).ravel()
    inv_sqrt = sparse.diags(1.0 / np.sqrt(degree))
    L = sparse.identity(len(nodes), format="csr") - inv_sqrt @ A @ inv_sqrt
    return L.tocsr(), np.sqrt(degree)


def _fiedler_dense(L):
    vals, vecs = linalg.eigh(L.toarray())
    return float(vals[1]), vecs[:, 1]


def _fiedler_sparse(L, sqrt_degree, tolerance, max_iterations):
    # The smallest eigenvector of L is sqrt(degree); deflate it from
    # M = 2I - L so the top eigenpair of M gives lambda2 = 2 - mu.
    n = L.shape[0]
    u0 = sqrt_degree / np.linalg.norm(sqrt_degree)

    def matvec(x):
        x = np.ravel(x)
        return 2.0 * x - L @ x - 2.0 * u0 * (u0 @ x)

    M = LinearOperator((n, n), matvec=matvec, dtype=float)
    v0 = np.cos(np.arange(1, n + 1))
    v0 -= u0 * (u0 @ v0)
    try:
        vals, vecs = eigsh(M, k=1, which="LA", tol=tolerance, maxiter=max_iterations, v0=v0)
    except ArpackNoConvergence as exc:
        if len(exc.eigenvalues):
            v = exc.eigenvectors[:, 0]
            lam = 2.0 - exc.eigenvalues[0]
            residual = float(np.linalg.norm(L @ v - lam * v))
        else:
            residual = float("inf")
        raise NoConvergence(residual, max_iterations) from None
    return 2.0 - float(vals[0]), vecs[:, 0]


def spectral_bisect(graph, tolerance=DEFAULT_TOLERANCE, max_iterations=DEFAULT_MAX_ITERATIONS,
                    weighting=WEIGHT_UNIT):
    """Split the largest component of `graph` by the sign of its Fiedler vector.

    Accepts a LocalGraph or a plain networkx.Graph. Vertices are ordered by
    key and the vector is oriented so its first non-zero entry is positive,
    which makes the result reproducible. Falls back to a median split when
    the sign split leaves one side empty.
    """
    component = largest_component(graph.graph if isinstance(graph, LocalGraph) else graph)
    n = component.number_of_nodes()
    if n < MIN_COMPONENT:
        raise TooSmall(f"largest component has {n} vertices, need at least {MIN_COMPONENT}")

    nodes = sorted(component.nodes)
    L, sqrt_degree = normalized_laplacian(component, nodes, weighting)
    if n <= DENSE_LIMIT:
        lambda2, v = _fiedler_dense(L)
    else:
        lambda2, v = _fiedler_sparse(L, sqrt_degree, tolerance, max_iterations)

    residual = float(np.linalg.norm(L @ v - lambda2 * v))
    if residual > 10 * tolerance and n > DENSE_LIMIT:
        raise NoConvergence(residual, max_iterations)

    nonzero = np.flatnonzero(np.abs(v) > 1e-12)
    if nonzero.size and v[nonzero[0]] < 0:
        v = -v
    side = v > 0
    if side.all() or not side.any():
        side = v > np.median(v)
        if side.all() or not side.any():
            side = np.arange(n) < n // 2

    side_a = frozenset(nodes[i] for i in np.flatnonzero(side))
    side_b = frozenset(nodes) - side_a
    crossing = tuple(sorted(_edge(u, w) for u, w in component.edges
                            if (u in side_a) != (w in side_a)))
    return Bisection(side_a, side_b, crossing, lambda2, residual,
                     dict(zip(nodes, v.tolist())))


# ============================================================
# SCORING
# ============================================================


@dataclass
class BottleneckScores:
    """Edge hit counts plus their projection onto the grid.

    `vertex_scores` is indexed [x, y].
    """

    edge_scores: Counter
    vertex_scores: np.ndarray

    @classmethod
    def empty(cls, spec):
        return cls(Counter(), np.zeros((spec.width, spec.height)))

    def state_scores(self):
        scores = Counter()
        for (u, v), s in self.edge_scores.items():
            scores[u] += s
            scores[v] += s
        return scores

    def ranking(self):
        """Grid cells by descending score, ties in (x, y) order."""
        w, h = self.vertex_scores.shape
        cells = [(x, y) for x in range(w) for y in range(h)]
        return sorted(cells, key=lambda c: (-self.vertex_scores[c], c))

    def rank_of(self, cell):
        """Competition rank: 1 + number of cells scoring strictly higher."""
        return 1 + int(np.count_nonzero(self.vertex_scores > self.vertex_scores[tuple(cell)]))


def project(state_scores, states, shape):
    """Sum each state's score onto the cell of every agent in it."""
    grid = np.zeros(shape)
    for key, score in state_scores.items():
        for x, y in states[key].positions:
            grid[x, y] += score
    return grid


def score_and_project(bisection, graph, scores, spec):
    """Add one point per crossing edge and rebuild the vertex grid."""
    edge_scores = Counter(scores.edge_scores)
    for e in bisection.crossing:
        edge_scores[e] += 1
    updated = BottleneckScores(edge_scores, scores.vertex_scores.copy())
    if not bisection.crossing:
        return updated
    states = {key: graph.state(key) for key in updated.state_scores()}
    updated.vertex_scores = project(updated.state_scores(), states, (spec.width, spec.height))
    return updated


# ============================================================
# RUN
# ============================================================


@dataclass(frozen=True)
class TimingReport:
    n_agents: int
    seconds_per_cluster: tuple
    skipped: int

    @property
    def seconds_total(self):
        return float(sum(self.seconds_per_cluster))

    @property
    def rounds(self):
        return len(self.seconds_per_cluster)

    def to_row(self, run=0):
        mean = self.seconds_total / self.rounds if self.rounds else 0.0
        return {
            "n_agents": self.n_agents,
            "run": run,
            "seconds_total": self.seconds_total,
            "seconds_per_cluster": mean,
        }


def run_discovery(spec, total_steps, cluster_interval=DEFAULT_CLUSTER_INTERVAL, seed=0,
                  horizon=DEFAULT_EPISODE_HORIZON, tolerance=DEFAULT_TOLERANCE,
                  max_iterations=DEFAULT_MAX_ITERATIONS, weighting=WEIGHT_UNIT,
                  local_graph=GRAPH_CUMULATIVE):
    """Random exploration interleaved with clustering; returns (scores, timing).

    With `local_graph="recent"` the graph is cleared after every round, so
    each bisection sees only the last `cluster_interval` episodes.
    """
    if total_steps <= 0 or cluster_interval <= 0:
        raise ValidationError("total_steps and cluster_interval must be positive")
    if local_graph not in LOCAL_GRAPHS:
        raise ValidationError(f"local_graph must be one of {', '.join(LOCAL_GRAPHS)}")
    env = GridEnv(spec, horizon=horizon)
    graph = LocalGraph()
    scores = BottleneckScores.empty(spec)
    timings = []
    skipped = 0
    steps = 0
    episode = 0
    while steps < total_steps:
        rng = np.random.default_rng([seed, episode])
        episode += 1
        state = env.reset(rng)
        transitions = []
        while steps < total_steps:
            actions = env.actions(state)
            out = env.step(state, actions[int(rng.integers(len(actions)))])
            transitions.append((state, out.next_state))
            steps += 1
            if out.terminal or out.truncated:
                break
            state = out.next_state
        accumulate(graph, transitions)

        if graph.pending_episodes < cluster_interval:
            continue
        graph.pending_episodes = 0
        start = time.perf_counter()
        try:
            bisection = spectral_bisect(graph, tolerance, max_iterations, weighting)
        except TooSmall:
            skipped += 1
            bisection = None
        if bisection is not None:
            scores = score_and_project(bisection, graph, scores, spec)
            timings.append(time.perf_counter() - start)
            log.debug("cluster round %d: |V|=%d lambda2=%.3e crossing=%d", len(timings),
                      graph.n_vertices, bisection.lambda2, len(bisection.crossing))
        if local_graph == GRAPH_RECENT:
            graph.clear()

    timing = TimingReport(spec.n_agents, tuple(timings), skipped)
    log.info("discovery %s n=%d: %d rounds, %.3fs clustering", spec.name,
             spec.n_agents, timing.rounds, timing.seconds_total)
    return scores, timing
