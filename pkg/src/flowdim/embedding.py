"""Solenoid embedding into band-limited signals and the delta-embedding pipeline.

The embedding sends a truncated solenoid point x to the exponential sum
f_x(t) = sum_{n >= m} 2^-n exp(2 pi i (t + x_n) / n!), a band-[0, c]
signal of sup norm at most 1.  Bohr means recover the coefficients, and
hence the point, from signal values alone.  The perturbation stage
corrects an equivariant signal map on a lattice of sample nodes using
the interpolation kernel, within a certified sup budget, so that the
pair (signal map, solenoid factor) separates sample states.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bandlimited import Band, Signal, signal_metric
from .dynamics import SolenoidPoint, solenoid_distance
from .errors import (
    ConfigurationError,
    NotEmbeddingImageError,
    PreconditionError,
    SearchBudgetError,
    TruncationDepthError,
)
from .kernel import KernelSpec, interpolation_kernel
from .metric import MetricSample, widim_upper

COLLISION_TOL = 1e-12


def minimal_start_index(c: float) -> int:
    """Smallest m with 1/m! <= c, so the sum's frequencies fit in [0, c]."""
    if c <= 0:
        raise ConfigurationError("band limit c must be positive")
    m = 1
    while 1.0 / math.factorial(m) > c:
        m += 1
    return m


@dataclass
class SolenoidEmbedding:
    """Parameters of the exponential-sum embedding into band [0, c]."""

    c: float
    K: int
    window: float
    grid_step: float | None = None
    m: int = field(init=False)

    def __post_init__(self):
        self.m = minimal_start_index(self.c)
        if self.K < self.m:
            raise ConfigurationError(f"need truncation depth K >= m = {self.m}")
        if self.grid_step is None:
            self.grid_step = 1.0 / (8.0 * max(self.c, 1.0))
        limit = 4.0 * max(self.c, 1.0)
        if 1.0 / self.grid_step < limit:
            raise ConfigurationError("grid step violates the oversampling bound")

    def frequencies(self):
        return np.array([1.0 / math.factorial(n) for n in range(self.m, self.K + 1)])

    def moduli(self):
        return np.array([2.0 ** -n for n in range(self.m, self.K + 1)])


def solenoid_coefficients(p: SolenoidPoint, emb: SolenoidEmbedding):
    """The complex coefficients 2^-n exp(2 pi i x_n / n!) of the embedding sum."""
    if p.depth < emb.K:
        raise TruncationDepthError(
            f"point depth {p.depth} below embedding truncation {emb.K}")
    out = []
    for n in range(emb.m, emb.K + 1):
        fact = math.factorial(n)
        out.append(2.0 ** -n * np.exp(2j * np.pi * p.coords[n - 1] / fact))
    return np.array(out)


def solenoid_embed(p: SolenoidPoint, emb: SolenoidEmbedding,
                   scale: float = 1.0) -> Signal:
    """Embed a solenoid point as a band-[0, c] signal on the window.

    Coefficient moduli sum to at most 1, so the sup bound holds; the
    action on the solenoid intertwines with the signal shift flow.
    ``scale`` multiplies the sum (used to keep |f| <= 1 - delta).
    """
    coeffs = solenoid_coefficients(p, emb) * scale
    freqs = emb.frequencies()

    def fn(t):
        return np.exp(2j * np.pi * np.outer(t, freqs)) @ coeffs

    return Signal.from_function(fn, Band(0.0, emb.c), emb.window, emb.grid_step,
                                sup_bound=True)


def bohr_coefficient(sig, lam: float, T: float) -> complex:
    """Time average (1/T) int_0^T f(t) exp(-i lam t) dt by composite trapezoid.

    ``sig`` is a callable t-array -> values, or a Signal whose grid
    covers [0, T] (used directly when fine enough, else interpolated).
    The quadrature step obeys step <= min(0.01, 1/(8 |lam| + 8)); the
    average converges to the coefficient at frequency lam at rate O(1/T)
    for absolutely summable exponential sums.
    """
    if T <= 0:
        raise ValueError("averaging length T must be positive")
    step_req = min(0.01, 1.0 / (8.0 * abs(lam) + 8.0))
    if isinstance(sig, Signal):
        if sig.grid_step <= step_req and -sig.window <= 0 and T <= sig.window:
            t = sig.times()
            mask = (t >= -1e-12) & (t <= T + 1e-12)
            tt = t[mask]
            vals = sig.values[mask]
        else:
            n = int(math.ceil(T / step_req))
            tt = np.linspace(0.0, T, n + 1)
            vals = sig.evaluate(tt)
    else:
        n = int(math.ceil(T / step_req))
        tt = np.linspace(0.0, T, n + 1)
        vals = np.asarray(sig(tt), dtype=complex)
    integrand = vals * np.exp(-1j * lam * tt)
    return complex(np.trapezoid(integrand, tt) / T)


def bohr_cross_term_bound(moduli, freqs, m_index: int, T: float) -> float:
    """Closed-form bound sum_{n != m} |a_n| 2/(T |lam_n - lam_m|)."""
    lam = np.asarray(freqs, dtype=float)
    a = np.asarray(moduli, dtype=float)
    gaps = np.abs(lam - lam[m_index])
    mask = np.arange(len(lam)) != m_index
    return float((a[mask] * 2.0 / (T * gaps[mask])).sum())


def solenoid_recover(sig, emb: SolenoidEmbedding, T: float,
                     scale: float = 1.0,
                     modulus_rel_tol: float = 0.25) -> SolenoidPoint:
    """Read the solenoid coordinates back from a signal via Bohr means.

    Coordinate n is the phase of the recovered coefficient at frequency
    2 pi / n!, scaled back to [0, n!); the round-trip error decays like
    n!/T.  A coefficient modulus off by more than 25% from 2^-n * scale
    means the signal is not an embedding image.
    """
    coords = []
    for n in range(emb.m, emb.K + 1):
        fact = math.factorial(n)
        lam = 2.0 * np.pi / fact
        coeff = bohr_coefficient(sig, lam, T)
        expected = 2.0 ** -n * scale
        if abs(abs(coeff) - expected) > modulus_rel_tol * expected:
            raise NotEmbeddingImageError(
                f"coefficient at frequency 1/{n}! has modulus {abs(coeff):.3g}, "
                f"expected {expected:.3g} within {modulus_rel_tol:.0%}")
        x_n = (fact / (2.0 * np.pi)) * np.angle(coeff)
        coords.append(x_n % fact)
    # Coordinates for n < m (not carried by the signal) are reduced from x_m.
    full = []
    for n in range(1, emb.m):
        full.append(coords[0] % math.factorial(n))
    full.extend(coords)
    return SolenoidPoint(tuple(full), tol=0.05)


def circle_gap(a: float, b: float, period: float) -> float:
    gap = abs(a - b) % period
    return min(gap, period - gap)


@dataclass
class SearchReport:
    """How the randomized embedding search ended."""

    tries: int
    sup_perturbation: float
    min_separation: float
    widim_advisory: int | None = None


def epsilon_embedding_search(F, sample: MetricSample, eps: float,
                             delta_prime: float, seed: int,
                             max_tries: int = 10_000,
                             check_widim: bool = True):
    """Perturb F into G so that equal G-rows force distance < eps.

    Precondition (checked): d(x, y) < eps implies ||F(x)-F(y)||_inf <
    delta_prime.  The returned G satisfies sup ||F-G||_inf < delta_prime
    and has no row pair within 1e-12 in sup norm at distance >= eps.
    Seeded uniform perturbations with rejection; the zero perturbation
    is tried first.  The half-dimension advisory is a warning only,
    because the nerve estimate is an upper bound.
    """
    F = np.asarray(F, dtype=float)
    n, M = F.shape
    if n != len(sample):
        raise PreconditionError("row count must match the sample")
    if np.any(np.abs(F) > 1.0 + 1e-12):
        raise PreconditionError("F must map into [-1, 1]^M")
    d = sample.dist
    iu, ju = np.triu_indices(n, k=1)
    row_gap = np.abs(F[iu] - F[ju]).max(axis=1) if n > 1 else np.array([])

    close = d[iu, ju] < eps
    bad = close & (row_gap >= delta_prime)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise PreconditionError(
            "continuity precondition fails: close pair with distant rows",
            witness=(sample.points[iu[k]], sample.points[ju[k]],
                     float(d[iu[k], ju[k]]), float(row_gap[k])))

    advisory = None
    if check_widim:
        advisory = widim_upper(sample, eps)
        if not advisory < M / 2:
            warnings.warn(
                f"width-dimension upper estimate {advisory} is not below M/2 = {M / 2}; "
                "the search may fail", RuntimeWarning, stacklevel=2)

    far = ~close
    rng = np.random.default_rng(seed)
    best_pair = None
    for attempt in range(max_tries):
        if attempt == 0:
            G = F.copy()
        else:
            G = np.clip(F + rng.uniform(-0.999 * delta_prime, 0.999 * delta_prime,
                                        size=F.shape), -1.0, 1.0)
        gap = np.abs(G[iu] - G[ju]).max(axis=1) if n > 1 else np.array([])
        collisions = far & (gap <= COLLISION_TOL)
        if not np.any(collisions):
            sep = float(gap[far].min()) if far.any() else math.inf
            report = SearchReport(tries=attempt + 1,
                                  sup_perturbation=float(np.abs(G - F).max()),
                                  min_separation=sep,
                                  widim_advisory=advisory)
            return G, report
        k = int(np.argmax(collisions))
        best_pair = (sample.points[iu[k]], sample.points[ju[k]])
    raise SearchBudgetError(
        f"no eps-embedding found in {max_tries} tries", best_pair=best_pair)


def complex_rows(F):
    """Pair the real matrix columns [Re | Im] into complex rows."""
    F = np.asarray(F, dtype=float)
    half = F.shape[1] // 2
    return F[:, :half] + 1j * F[:, half:]


def real_rows(FC):
    """Inverse of ``complex_rows``."""
    FC = np.asarray(FC, dtype=complex)
    return np.concatenate([FC.real, FC.imag], axis=1)


@dataclass
class EmbeddingRun:
    """Everything the perturbation stage needs about one pipeline run.

    ``advance(state_index, time)`` realizes the time-t map on sample
    states (exact for the times the node sums require), ``phi_N`` holds
    the N-th solenoid coordinate of each state, and F/G are the real
    sample matrices (columns Re then Im over the period nodes).
    """

    delta: float
    delta_prime: float
    eps: float
    kernel: KernelSpec
    sample: MetricSample
    phi_N: np.ndarray
    advance: object
    F: np.ndarray
    G: np.ndarray
    seed: int
    # The bump factor decays super-polynomially, so a couple hundred
    # time units of margin push the omitted node tail far below 1e-9.
    node_margin: float = 200.0

    def __post_init__(self):
        if not (0 < self.eps < self.delta):
            raise ConfigurationError("need 0 < eps < delta")
        sup = float(np.abs(self.G - self.F).max())
        if not sup < self.delta_prime:
            raise ConfigurationError(
                f"sup |F - G| = {sup:.3g} must stay below delta' = {self.delta_prime:.3g}")
        self._kernel_cache = {}

    def _kernel_lookup(self, quantized, kernel):
        """Kernel values at offsets quantized to 1e-9, cached across states."""
        cache = self._kernel_cache
        flat = quantized.ravel()
        uniq, inverse = np.unique(flat, return_inverse=True)
        missing = np.array([q for q in uniq if q not in cache], dtype=np.int64)
        if len(missing):
            vals = interpolation_kernel(missing * 1e-9, kernel)
            for q, v in zip(missing.tolist(), np.atleast_1d(vals)):
                cache[q] = v
        table = np.array([cache[q] for q in uniq.tolist()], dtype=complex)
        return table[inverse].reshape(quantized.shape)

    @property
    def period(self):
        """The node period N! of the lattice window."""
        return math.factorial(self.kernel.lattice.N)

    @property
    def nodes_per_period(self):
        return self.kernel.lattice.period_count

    def correction_rows(self):
        return complex_rows(self.G) - complex_rows(self.F)


def perturb_signal_map(run: EmbeddingRun, f_map, x, kernel: KernelSpec = None) -> Signal:
    """Build g(x) = f(x) + h(x) with node corrections and certified budget.

    h places kernel translates on the node set {k/rho + n N! - Phi(x)_N}
    weighted by the G-F corrections read along the orbit, truncated to
    nodes within the window plus a decay margin; the omitted tail is
    controlled by the certified K_dec envelope.  Requires
    sup_t |f(x)(t)| <= 1 - delta and certified kernel constants.
    """
    kernel = run.kernel if kernel is None else kernel
    constants = kernel.constants()
    if constants.delta != run.delta:
        raise ConfigurationError("kernel constants certified for a different delta")
    f_sig = f_map(x)
    if f_sig.sup_norm() > 1.0 - run.delta + 1e-9:
        raise PreconditionError("need sup |f(x)| <= 1 - delta")
    x_idx = run.sample.index(x) if not isinstance(x, (int, np.integer)) else int(x)
    phi = float(run.phi_N[x_idx])
    period = run.period
    rho_count = run.nodes_per_period
    rho = kernel.rho_float
    corrections = run.correction_rows()

    t = f_sig.times()
    lo = t[0] - run.node_margin
    hi = t[-1] + run.node_margin
    n_lo = int(math.floor((lo + phi) / period))
    n_hi = int(math.ceil((hi + phi) / period))
    nodes = []
    weights = []
    for n in range(n_lo, n_hi + 1):
        base_time = n * period - phi
        state = run.advance(x_idx, base_time)
        row = corrections[state]
        for k in range(rho_count):
            node = base_time + k / rho
            if lo <= node <= hi:
                nodes.append(node)
                weights.append(row[k])
    if nodes:
        nodes = np.array(nodes)
        weights = np.array(weights, dtype=complex)
        offsets = t[None, :] - nodes[:, None]
        quantized = np.round(offsets / 1e-9).astype(np.int64)
        kernel_vals = run._kernel_lookup(quantized, kernel)
        h_vals = weights @ kernel_vals
    else:
        h_vals = np.zeros(len(t), dtype=complex)
    g_vals = f_sig.values + h_vals
    sup_change = float(np.abs(h_vals).max())
    if not sup_change < run.delta:
        raise ConfigurationError(
            f"perturbation sup {sup_change:.3g} reached delta = {run.delta}")
    return Signal(kernel.band, f_sig.window, f_sig.grid_step, g_vals,
                  sup_bound=True)


@dataclass
class EmbeddingVerdict:
    """Outcome of the delta-embedding verification over all sample pairs."""

    passed: bool
    n_pairs: int
    n_matched: int
    worst_pair: tuple | None
    worst_distance: float
    min_image_separation: float

    def __bool__(self):
        return self.passed


def verify_delta_embedding(g_map, phi_map, sample: MetricSample, delta: float,
                           match_tol: float, n_max: int = 4) -> EmbeddingVerdict:
    """Check that matching images force sample distance below delta.

    A pair matches when both the signal metric of its g-images and the
    solenoid distance of its factor images fall within ``match_tol``.
    Every matching pair must satisfy d(x, y) < delta; the verdict also
    reports the smallest image separation among non-matching pairs.
    """
    if match_tol <= 0:
        raise ValueError("match_tol must be positive")
    points = sample.points
    signals = [g_map(p) for p in points]
    phis = [phi_map(p) for p in points]
    n = len(points)
    passed = True
    worst_pair = None
    worst_distance = -math.inf
    min_sep = math.inf
    n_matched = 0
    for i in range(n):
        for j in range(i + 1, n):
            sm = signal_metric(signals[i], signals[j], n_max)
            sd = solenoid_distance(phis[i], phis[j])
            if sm <= match_tol and sd <= match_tol:
                n_matched += 1
                d = sample.dist[i, j]
                if d >= delta:
                    passed = False
                if d > worst_distance:
                    worst_distance = float(d)
                    worst_pair = (points[i], points[j])
            else:
                min_sep = min(min_sep, max(sm, sd))
    return EmbeddingVerdict(passed=passed, n_pairs=n * (n - 1) // 2,
                            n_matched=n_matched, worst_pair=worst_pair,
                            worst_distance=worst_distance,
                            min_image_separation=min_sep)
