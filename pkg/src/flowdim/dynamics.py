"""Z-systems, suspension flows, the Bowen-Walters metric, and the solenoid.

Suspension points are stored in canonical form: height in [0, f(x)),
with (x, f(x)) rewritten as (Tx, 0).  The Bowen-Walters distance is
computed on a finite graph of (state, height-level) nodes in roof-1
normalized coordinates; it is an upper bound of the true path infimum,
antitone as the segment budget grows and as the height grid refines
along nested (divisibility) chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import (
    InvariantViolationError,
    MetricInvariantError,
    UnsupportedDirectionError,
)
from .metric import MetricSample

CIRCLE_TOL = 1e-9
MAX_SUSPEND_STEPS = 10_000_000


class DynSystem:
    """A finite sample with a total step map, acting as a Z-system stand-in."""

    def __init__(self, base: MetricSample, step):
        self.base = base
        self.step = np.asarray(step, dtype=np.int64)
        n = len(base)
        if self.step.shape != (n,) or (n and (self.step.min() < 0 or self.step.max() >= n)):
            raise InvariantViolationError("step must map state indices to state indices")
        if n and len(np.unique(self.step)) == n:
            self.inverse = np.empty(n, dtype=np.int64)
            self.inverse[self.step] = np.arange(n)
        else:
            self.inverse = None

    def __len__(self):
        return len(self.base)

    @classmethod
    def from_maps(cls, states, step_fn, metric_fn):
        """Tabulate a system from explicit state values and callables."""
        states = list(states)
        index = {s: i for i, s in enumerate(states)}
        step = [index[step_fn(s)] for s in states]
        n = len(states)
        dist = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                dist[i, j] = dist[j, i] = metric_fn(states[i], states[j])
        return cls(MetricSample(states, dist), step)


class FlowSystem:
    """A finite sample of flow states with a time-t evolution and a metric.

    ``values`` are representative points (need not be closed under the
    flow at all times); ``evolve(value, t)`` returns the time-t image;
    ``metric(v, w)`` the distance.  ``metric_matrix`` may be overridden
    with a vectorized implementation.
    """

    def __init__(self, values, evolve, metric, metric_matrix=None, ids=None):
        self.values = list(values)
        self.evolve = evolve
        self.metric = metric
        self._metric_matrix = metric_matrix
        self._ids = list(ids) if ids is not None else list(range(len(self.values)))

    def point_ids(self):
        return list(self._ids)

    def metric_matrix(self, values):
        if self._metric_matrix is not None:
            return self._metric_matrix(values)
        n = len(values)
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = out[j, i] = self.metric(values[i], values[j])
        return out


class RoofFunction:
    """Positive return times over the base states."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != 1 or np.any(self.values <= 0):
            raise InvariantViolationError("roof values must be positive")
        self.f_min = float(self.values.min())

    @classmethod
    def constant(cls, value, n):
        return cls(np.full(n, float(value)))

    def __call__(self, state_idx):
        return float(self.values[state_idx])


@dataclass(frozen=True)
class SuspensionPoint:
    """A point (state, height) of the suspension space."""

    state: int
    height: float

    def canonical(self, sys: DynSystem, roof: RoofFunction) -> "SuspensionPoint":
        f = roof(self.state)
        if not (-CIRCLE_TOL <= self.height <= f + CIRCLE_TOL):
            raise InvariantViolationError(
                f"height {self.height} outside [0, {f}] for state {self.state}")
        if self.height >= f - CIRCLE_TOL:
            return SuspensionPoint(int(sys.step[self.state]), 0.0)
        return SuspensionPoint(self.state, max(self.height, 0.0))


def suspend(sys: DynSystem, roof: RoofFunction, p: SuspensionPoint, t: float) -> SuspensionPoint:
    """Flow the suspension point by time t.

    Returns (T^n x, s') in canonical form, where n and s' solve
    sum_{i<n} f(T^i x) + s' = t + s with 0 <= s' < f(T^n x).
    Backward flow requires an invertible system.
    """
    p = p.canonical(sys, roof)
    total = p.height + t
    state = p.state
    if t >= 0:
        for _ in range(MAX_SUSPEND_STEPS):
            f = roof(state)
            if total < f - CIRCLE_TOL:
                break
            total -= f
            state = int(sys.step[state])
        else:
            raise ArithmeticError("suspension flow exceeded step budget")
    else:
        if sys.inverse is None:
            raise UnsupportedDirectionError(
                "negative flow time requires an invertible system")
        for _ in range(MAX_SUSPEND_STEPS):
            if total >= -CIRCLE_TOL:
                break
            state = int(sys.inverse[state])
            total += roof(state)
        else:
            raise ArithmeticError("suspension flow exceeded step budget")
    return SuspensionPoint(state, max(total, 0.0)).canonical(sys, roof)


class BowenWaltersMetric:
    """Shortest chains of horizontal and vertical segments on a height grid.

    Heights live in roof-1 normalized coordinates (the suspension over
    f is carried to the roof-1 suspension by (x, s) -> (x, s/f(x))).
    Horizontal segments at height t cost (1-t) d(x,y) + t d(Tx,Ty);
    vertical segments cost flow time.  ``height_grid`` counts the
    uniform grid cells, so levels are {j/height_grid}.
    """

    def __init__(self, sys: DynSystem, roof: RoofFunction, height_grid: int = 16,
                 extra_heights=()):
        if height_grid < 1:
            raise ValueError("height_grid must be >= 1")
        self.sys = sys
        self.roof = roof
        levels = set(np.arange(height_grid + 1) / height_grid)
        for h in extra_heights:
            if not (0.0 <= h <= 1.0):
                raise InvariantViolationError("normalized heights must lie in [0, 1]")
            levels.add(float(h))
        self.levels = np.array(sorted(levels))
        self.n_states = len(sys)
        self.n_levels = len(self.levels)
        self._level_index = {h: i for i, h in enumerate(self.levels)}
        self._build()

    def _node(self, state, level_idx):
        return state * self.n_levels + level_idx

    def _build(self):
        d = self.sys.base.dist
        step = self.sys.step
        nL, nS = self.n_levels, self.n_states
        n_nodes = nS * nL
        h_rows, h_cols, h_costs = [], [], []
        v_rows, v_cols, v_costs = [], [], []

        # Horizontal edges at each level (complete graph per level).
        iu, ju = np.triu_indices(nS, k=1)
        d_now = d[iu, ju]
        d_next = d[step[iu], step[ju]]
        for li, t in enumerate(self.levels):
            h_rows.append(iu * nL + li)
            h_cols.append(ju * nL + li)
            h_costs.append((1.0 - t) * d_now + t * d_next)

        # Vertical edges within a fiber (adjacent levels).
        fiber = np.arange(nS) * nL
        for li, gap in enumerate(np.diff(self.levels)):
            v_rows.append(fiber + li)
            v_cols.append(fiber + li + 1)
            v_costs.append(np.full(nS, gap))

        # Gluing: (x, 1) is the same point as (Tx, 0).
        v_rows.append(fiber + nL - 1)
        v_cols.append(step * nL)
        v_costs.append(np.zeros(nS))

        def _sym(rows, cols, costs):
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
            costs = np.concatenate(costs)
            return coo_matrix(
                (np.concatenate([costs, costs]),
                 (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                shape=(n_nodes, n_nodes)).tocsr()

        self._vertical = _sym(v_rows, v_cols, v_costs)
        self._graph = _sym(h_rows + v_rows, h_cols + v_cols, h_costs + v_costs)
        self._closure = None
        self._vclosure = None

    def closure(self):
        """All-pairs chain infimum on the grid (unbounded segment count)."""
        if self._closure is None:
            self._closure = dijkstra(self._graph, directed=False)
        return self._closure

    def _vertical_closure(self):
        if self._vclosure is None:
            self._vclosure = dijkstra(self._vertical, directed=False)
        return self._vclosure

    def node_of(self, p: SuspensionPoint):
        """Graph node of a suspension point; its normalized height must be a level."""
        p = p.canonical(self.sys, self.roof)
        h = p.height / self.roof(p.state)
        key_candidates = np.flatnonzero(np.abs(self.levels - h) <= CIRCLE_TOL)
        if len(key_candidates) == 0:
            raise InvariantViolationError(
                f"normalized height {h} is not on the metric's level grid")
        return self._node(p.state, int(key_candidates[0]))

    def distance(self, p: SuspensionPoint, q: SuspensionPoint,
                 max_segments: int | None = None) -> float:
        """Chain-length upper bound of the Bowen-Walters distance.

        With ``max_segments=None`` the full graph closure is used.  A
        finite budget counts maximal horizontal or vertical runs, each
        realized as one move.
        """
        a, b = self.node_of(p), self.node_of(q)
        if max_segments is None:
            return float(self.closure()[a, b])
        if max_segments < 2:
            raise ValueError("max_segments must be at least 2")
        vert = self._vertical_closure()
        horiz = self._horizontal_moves()
        n = self._graph.shape[0]
        dist = np.full(n, np.inf)
        dist[a] = 0.0
        for _ in range(max_segments):
            through_v = (dist[:, None] + vert).min(axis=0)
            through_h = (dist[:, None] + horiz).min(axis=0)
            dist = np.minimum(dist, np.minimum(through_v, through_h))
        return float(dist[b])

    def _horizontal_moves(self):
        nL, nS = self.n_levels, self.n_states
        n = nS * nL
        moves = np.full((n, n), np.inf)
        d = self.sys.base.dist
        step = self.sys.step
        for li, t in enumerate(self.levels):
            w = (1.0 - t) * d + t * d[np.ix_(step, step)]
            idx = np.arange(nS) * nL + li
            moves[np.ix_(idx, idx)] = w
        return moves

    def matrix(self, points):
        """Distance matrix over a list of suspension points (closure chains)."""
        nodes = [self.node_of(p) for p in points]
        return self.closure()[np.ix_(nodes, nodes)]


def bw_distance(p: SuspensionPoint, q: SuspensionPoint, sys: DynSystem,
                roof: RoofFunction, max_segments: int = 16,
                height_grid: int = 16) -> float:
    """Bowen-Walters upper bound between two suspension points.

    Endpoint heights are added to the level grid, so arbitrary valid
    points are accepted.  Antitone in ``max_segments``, and in
    ``height_grid`` along nested grids (e.g. doubling counts).
    """
    if max_segments < 2:
        raise ValueError("max_segments must be at least 2")
    hp = p.canonical(sys, roof)
    hq = q.canonical(sys, roof)
    extra = (hp.height / roof(hp.state), hq.height / roof(hq.state))
    bw = BowenWaltersMetric(sys, roof, height_grid, extra_heights=extra)
    return bw.distance(p, q, max_segments=max_segments)


def mapping_torus(sys: DynSystem, height_grid: int = 16) -> FlowSystem:
    """Roof-1 suspension packaged as a FlowSystem under the BW metric.

    Sample values are the height-0 points; the time-1 map on them is T.
    """
    roof = RoofFunction.constant(1.0, len(sys))
    bw = BowenWaltersMetric(sys, roof, height_grid)

    def evolve(p, t):
        return suspend(sys, roof, p, t)

    def metric(p, q):
        # Snap heights onto the shared grid when possible, else rebuild.
        try:
            return bw.distance(p, q)
        except InvariantViolationError:
            return bw_distance(p, q, sys, roof, height_grid=height_grid)

    def metric_matrix(values):
        try:
            return bw.matrix(values)
        except InvariantViolationError:
            n = len(values)
            out = np.zeros((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    out[i, j] = out[j, i] = metric(values[i], values[j])
            return out

    values = [SuspensionPoint(i, 0.0) for i in range(len(sys))]
    return FlowSystem(values, evolve, metric, metric_matrix=metric_matrix,
                      ids=sys.base.points)


def _factorials(K):
    return [math.factorial(n) for n in range(1, K + 1)]


@dataclass(frozen=True)
class SolenoidPoint:
    """Truncated solenoid coordinates (x_1, ..., x_K), x_n in [0, n!)."""

    coords: tuple

    def __init__(self, coords, tol: float = CIRCLE_TOL):
        coords = tuple(float(c) for c in coords)
        object.__setattr__(self, "coords", coords)
        facts = _factorials(len(coords))
        for n, (c, f) in enumerate(zip(coords, facts), start=1):
            if not (0.0 <= c < f + CIRCLE_TOL):
                raise InvariantViolationError(
                    f"coordinate x_{n}={c} outside [0, {f})")
        for n in range(len(coords) - 1):
            f = facts[n]
            gap = (coords[n + 1] - coords[n]) % f
            if min(gap, f - gap) > tol:
                raise InvariantViolationError(
                    f"compatibility x_{n + 2} = x_{n + 1} (mod {f}) fails by {min(gap, f - gap):.3g}")

    @property
    def depth(self):
        return len(self.coords)


def solenoid_act(p: SolenoidPoint, r: float) -> SolenoidPoint:
    """Translate every coordinate by r modulo its circumference."""
    facts = _factorials(p.depth)
    return SolenoidPoint(tuple((c + r) % f for c, f in zip(p.coords, facts)))


def solenoid_from_time(tau: float, depth: int) -> SolenoidPoint:
    """The orbit point of 0 at time tau, truncated to the given depth."""
    facts = _factorials(depth)
    return SolenoidPoint(tuple(tau % f for f in facts))


def solenoid_distance(p: SolenoidPoint, q: SolenoidPoint) -> float:
    """Max over coordinates of the circle distance scaled by circumference."""
    if p.depth != q.depth:
        raise InvariantViolationError("solenoid points must share a depth")
    facts = _factorials(p.depth)
    worst = 0.0
    for c1, c2, f in zip(p.coords, q.coords, facts):
        gap = abs(c1 - c2) % f
        worst = max(worst, min(gap, f - gap) / f)
    return worst
