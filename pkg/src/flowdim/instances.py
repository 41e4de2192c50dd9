"""Ready-made desk-scale systems used by the demos, tests, and CLI.

These builders produce finite stand-ins whose estimator values are
known: cyclic rotations (isometric, zero mean dimension), cube-shift
truncations (mean dimension D in the grid regime), binary shifts
(zero), and a suspension sample with a factor map onto the truncated
solenoid for the end-to-end perturbation pipeline.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bandlimited import Band, Signal
from .dynamics import (
    BowenWaltersMetric,
    DynSystem,
    RoofFunction,
    SolenoidPoint,
    SuspensionPoint,
    suspend,
)
from .embedding import (
    EmbeddingRun,
    SolenoidEmbedding,
    epsilon_embedding_search,
    perturb_signal_map,
    real_rows,
    solenoid_embed,
    verify_delta_embedding,
)
from .errors import ConfigurationError
from .kernel import KernelSpec, certify_constants
from .metric import MetricSample, OrbitMetricSpec, orbit_metric_R

GRID_STEP = 0.1


def rotation_system(n_points: int) -> DynSystem:
    """Rotation by one step on a cycle of n points with arc metric."""
    pts = list(range(n_points))
    gaps = np.abs(np.subtract.outer(pts, pts))
    dist = np.minimum(gaps, n_points - gaps).astype(float)
    return DynSystem(MetricSample(pts, dist), [(i + 1) % n_points for i in pts])


def cube_shift_system(D: int, N: int, dense: bool | None = None) -> DynSystem:
    """Cyclic shift on length-N blocks of D-cube grid values.

    The base metric reads block 0 only (sup over its D coordinates), so
    the N-step window metric sees the first N blocks.  For D = 1 the
    state space is the full grid product; for D >= 2 a shift-invariant
    subset carrying the same greedy-cover structure keeps the sample
    size workable.  In the eps = 0.3 grid regime the width estimate of
    the k-window metric is exactly D*k.
    """
    h = GRID_STEP
    if dense is None:
        dense = D == 1
    if dense:
        blocks = list(itertools.product([0.0, h, 2 * h, 3 * h], repeat=D))
        states = set(itertools.product(blocks, repeat=N))
    else:
        inner = list(itertools.product([0.0, h], repeat=D))
        outer = list(itertools.product([0.0, 2 * h], repeat=D))
        states = set(itertools.product(inner, repeat=N))
        states |= set(itertools.product(outer, repeat=N))
        long_pt = ((3 * h,) + (0.0,) * (D - 1),) + (((0.0,) * D),) * (N - 1)
        for s in range(N):
            states.add(long_pt[s:] + long_pt[:s])
    states = sorted(states)
    index = {s: i for i, s in enumerate(states)}
    step = [index[s[1:] + s[:1]] for s in states]
    block0 = np.array([s[0] for s in states])
    dist = np.max(np.abs(block0[:, None, :] - block0[None, :, :]), axis=2)
    return DynSystem(MetricSample(states, dist, validate=False), step)


def binary_shift_system(length: int = 6) -> DynSystem:
    """Cyclic binary shift with exponentially weighted coordinate metric."""
    states = sorted(itertools.product([0, 1], repeat=length))
    index = {s: i for i, s in enumerate(states)}
    step = [index[s[1:] + s[:1]] for s in states]
    arr = np.array(states, dtype=float)
    weights = np.array([2.0 ** -min(i, length - i) for i in range(length)])
    diffs = np.abs(arr[:, None, :] - arr[None, :, :])
    dist = diffs @ weights
    return DynSystem(MetricSample(states, dist, validate=False), step)


@dataclass
class SuspensionInstance:
    """A roof-1 suspension sample with a factor map onto the solenoid.

    States are (base point, height) pairs over a cycle of length
    ``base_size`` (a multiple of 6) with heights on a 0.1 grid; the
    factor reads the total orbit coordinate modulo n!.
    """

    sys: DynSystem
    roof: RoofFunction
    points: list
    sample: MetricSample
    bw: BowenWaltersMetric
    depth: int
    base_size: int

    @classmethod
    def build(cls, base_size: int = 12, n_heights: int = 10, depth: int = 3):
        if base_size % 6 != 0:
            raise ConfigurationError("base size must be a multiple of 6")
        sys = rotation_system(base_size)
        roof = RoofFunction.constant(1.0, base_size)
        heights = np.arange(n_heights) / n_heights
        points = [SuspensionPoint(i, float(h))
                  for i in range(base_size) for h in heights]
        bw = BowenWaltersMetric(sys, roof, height_grid=n_heights)
        nodes = [bw.node_of(p) for p in points]
        dist = bw.closure()[np.ix_(nodes, nodes)]
        ids = [(p.state, round(p.height * n_heights)) for p in points]
        sample = MetricSample(ids, dist, validate=False)
        inst = cls(sys=sys, roof=roof, points=points, sample=sample, bw=bw,
                   depth=depth, base_size=base_size)
        inst._n_heights = n_heights
        inst._lookup = {(p.state, round(p.height * n_heights)): i
                        for i, p in enumerate(points)}
        return inst

    def total_time(self, idx: int) -> float:
        p = self.points[idx]
        return p.state + p.height

    def factor(self, idx: int) -> SolenoidPoint:
        tau = self.total_time(idx)
        return SolenoidPoint(tuple(tau % math.factorial(n)
                                   for n in range(1, self.depth + 1)))

    def advance(self, idx: int, t: float) -> int:
        """Index of the time-t image; the image must be a sample state.

        The roof is constant 1, so the flow adds t to the total orbit
        coordinate modulo the cycle length; the image height must land
        back on the height grid.
        """
        tau = (self.total_time(idx) + t) % self.base_size
        slot = round(tau * self._n_heights)
        if abs(slot / self._n_heights - tau) > 1e-9:
            raise ConfigurationError(
                f"time-{t} image of state {idx} leaves the height grid")
        slot %= self.base_size * self._n_heights
        state, height_slot = divmod(slot, self._n_heights)
        return self._lookup[(state, height_slot)]

    def flow_metric_sample(self, horizon: float, dt: float = 0.1) -> MetricSample:
        from .dynamics import FlowSystem

        flow = FlowSystem(
            self.points,
            lambda p, t: suspend(self.sys, self.roof, p, t),
            None,
            metric_matrix=lambda vals: self.bw.matrix(vals),
            ids=self.sample.points,
        )
        return orbit_metric_R(flow, OrbitMetricSpec("R-window", horizon, dt))


@dataclass
class PipelineResult:
    """Artifacts of the end-to-end delta-embedding run."""

    instance: SuspensionInstance
    run: EmbeddingRun
    constants: object
    eps: float
    search_report: object
    sup_change: float
    node_residual: float
    equivariance_residual: float
    verdict: object

    @property
    def passed(self):
        return (self.verdict.passed and self.sup_change < self.run.delta
                and self.node_residual < 1e-8
                and self.equivariance_residual < 1e-6)


def run_embedding_pipeline(delta: float = 0.2, rho=1, N: int = 2,
                           base_size: int = 12, n_heights: int = 10,
                           seed: int = 2024, window: float = 16.0,
                           tau: float = 0.5, band: Band = None,
                           node_margin: float = 200.0,
                           equiv_shifts=None) -> PipelineResult:
    """Assemble the desk instance and run the full perturbation pipeline.

    Steps: certify the kernel budget delta', sample the equivariant
    signal map on the period nodes, search for the corrected matrix G,
    build g = f + h, and verify the delta-embedding together with the
    node and equivariance identities.  Equivariance is checked at a
    sub-period shift near 0.3 (snapped onto the height grid) and at the
    full node period N!.
    """
    band = Band(0.0, 2.0) if band is None else band
    if equiv_shifts is None:
        h = 1.0 / n_heights
        equiv_shifts = (max(h, round(0.3 / h) * h), float(math.factorial(N)))
    inst = SuspensionInstance.build(base_size=base_size, n_heights=n_heights,
                                    depth=max(3, N))
    spec = KernelSpec(band, rho, tau, N=N, window=200.0)
    constants = certify_constants(spec, delta)
    delta_prime = constants.delta_prime

    emb = SolenoidEmbedding(c=min(1.0, band.b / 2.0), K=inst.depth,
                            window=window, grid_step=0.05)
    scale = 1.0 - delta

    signals = {}

    def f_map(idx):
        idx = int(idx)
        if idx not in signals:
            signals[idx] = solenoid_embed(inst.factor(idx), emb, scale=scale)
        return signals[idx]

    period = math.factorial(N)
    n_states = len(inst.points)
    phi_N = np.array([inst.total_time(i) % period for i in range(n_states)])

    # Sample f along the orbit at the period nodes k/rho.
    rho_count = spec.lattice.period_count
    nodes = spec.lattice.window_nodes()
    FC = np.zeros((n_states, rho_count), dtype=complex)
    coeff_cache = {}
    for i in range(n_states):
        tau_i = inst.total_time(i)
        key = round(tau_i * 20)
        if key not in coeff_cache:
            freqs = emb.frequencies()
            coeffs = scale * np.array(
                [2.0 ** -n * np.exp(2j * np.pi * (tau_i % math.factorial(n))
                                    / math.factorial(n))
                 for n in range(emb.m, emb.K + 1)])
            coeff_cache[key] = (freqs, coeffs)
        freqs, coeffs = coeff_cache[key]
        FC[i] = np.exp(2j * np.pi * np.outer(nodes, freqs)) @ coeffs
    F = real_rows(FC)

    # Orbit window metric over one node period, gridded at the height step.
    d_window = inst.flow_metric_sample(horizon=float(period), dt=1.0 / n_heights)

    # Pick eps below the measured continuity threshold of F.
    iu, ju = np.triu_indices(n_states, k=1)
    gaps = np.abs(F[iu] - F[ju]).max(axis=1)
    search_bound = delta_prime / 2.0
    tight = gaps >= search_bound
    dists = d_window.dist[iu, ju]
    eps_cap = float(dists[tight].min()) if tight.any() else float(dists.max())
    eps = min(0.9 * eps_cap, 0.9 * delta)
    if eps <= 0:
        raise ConfigurationError("could not find a positive eps for the search")

    G, report = epsilon_embedding_search(F, d_window, eps, search_bound, seed)

    run = EmbeddingRun(delta=delta, delta_prime=delta_prime, eps=eps,
                       kernel=spec, sample=d_window, phi_N=phi_N,
                       advance=inst.advance, F=F, G=G, seed=seed,
                       node_margin=node_margin)

    g_signals = {}

    def g_map(idx):
        idx = int(idx) if not isinstance(idx, tuple) else d_window.index(idx)
        if idx not in g_signals:
            g_signals[idx] = perturb_signal_map(run, f_map, idx)
        return g_signals[idx]

    sup_change = 0.0
    for i in range(n_states):
        sup_change = max(sup_change, float(
            np.abs(g_map(i).values - f_map(i).values).max()))

    # Node identities: g(x)(-Phi_N + k/rho) = G^C(T^{-Phi_N} x)(k).
    GC = G[:, :rho_count] + 1j * G[:, rho_count:]
    node_residual = 0.0
    for i in range(n_states):
        base_state = inst.advance(i, -phi_N[i])
        targets = -phi_N[i] + nodes
        got = g_map(i).evaluate(targets)
        node_residual = max(node_residual, float(np.abs(got - GC[base_state]).max()))

    # Equivariance: h(T^r x)(t) = h(x)(t + r) on the common window.
    equiv_residual = 0.0
    h_of = {i: g_map(i).values - f_map(i).values for i in range(n_states)}
    for r in equiv_shifts:
        steps = round(r * n_heights)
        if abs(steps / n_heights - r) > 1e-9:
            raise ConfigurationError("equivariance shifts must sit on the height grid")
        shift_idx = int(round(r / emb.grid_step))
        if abs(shift_idx * emb.grid_step - r) > 1e-9:
            raise ConfigurationError("equivariance shifts must sit on the signal grid")
        for i in range(n_states):
            j = inst.advance(i, r)
            lhs = h_of[j][:len(h_of[j]) - shift_idx]
            rhs = h_of[i][shift_idx:]
            equiv_residual = max(equiv_residual, float(np.abs(lhs - rhs).max()))

    verdict = verify_delta_embedding(
        lambda pid: g_map(d_window.index(pid)),
        lambda pid: inst.factor(d_window.index(pid)),
        d_window, delta, match_tol=1e-6)

    return PipelineResult(instance=inst, run=run, constants=constants, eps=eps,
                          search_report=report, sup_change=sup_change,
                          node_residual=node_residual,
                          equivariance_residual=equiv_residual, verdict=verdict)
