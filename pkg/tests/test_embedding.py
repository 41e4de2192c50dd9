import math

import numpy as np
import pytest

from flowdim.bandlimited import shift
from flowdim.dynamics import SolenoidPoint, solenoid_act, solenoid_from_time
from flowdim.embedding import (
    SolenoidEmbedding,
    bohr_coefficient,
    bohr_cross_term_bound,
    epsilon_embedding_search,
    solenoid_coefficients,
    solenoid_embed,
    solenoid_recover,
    verify_delta_embedding,
)
from flowdim.errors import (
    NotEmbeddingImageError,
    PreconditionError,
    SearchBudgetError,
    TruncationDepthError,
)
from flowdim.metric import MetricSample


@pytest.fixture(scope="module")
def emb():
    return SolenoidEmbedding(c=1.0, K=4, window=20.0)


class TestSolenoidEmbed:
    def test_origin_value_is_coefficient_sum(self, emb):
        sig = solenoid_embed(SolenoidPoint((0.0,) * 4), emb)
        mid = len(sig.values) // 2
        assert sig.values[mid] == pytest.approx(sum(2.0 ** -n for n in (1, 2, 3, 4)))

    def test_coefficient_moduli(self, emb):
        p = solenoid_from_time(3.7, 4)
        coeffs = solenoid_coefficients(p, emb)
        for n, c in zip(range(1, 5), coeffs):
            assert abs(c) == pytest.approx(2.0 ** -n)

    def test_band_and_sup_bound(self, emb):
        sig = solenoid_embed(solenoid_from_time(11.2, 4), emb)
        assert sig.band.a == 0.0 and sig.band.b == 1.0
        assert sig.sup_norm() <= 1.0 + 1e-9

    def test_too_shallow_point_rejected(self, emb):
        with pytest.raises(TruncationDepthError):
            solenoid_embed(SolenoidPoint((0.5,)), emb)

    def test_equivariance_fifty_random_pairs(self, emb):
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(50):
            p = solenoid_from_time(float(rng.uniform(0, 24)), 4)
            r = float(rng.uniform(-5, 5))
            moved = solenoid_embed(solenoid_act(p, r), emb)
            shifted = shift(solenoid_embed(p, emb), r)
            on_grid = moved.evaluate(shifted.times())
            worst = max(worst, float(np.abs(on_grid - shifted.values).max()))
        assert worst < 1e-9

    def test_start_index_matches_band(self):
        # 1/m! must fit under the band limit: c = 1 admits m = 1, while
        # c = 0.4 needs 1/3! = 0.1667.
        assert SolenoidEmbedding(c=1.0, K=3, window=10.0).m == 1
        assert SolenoidEmbedding(c=0.4, K=3, window=10.0).m == 3


class TestBohrCoefficient:
    def test_matching_frequency_is_exact(self):
        lam = 2.0
        val = bohr_coefficient(lambda t: np.exp(1j * lam * t), lam, 50.0)
        assert abs(val - 1.0) < 1e-10

    def test_mismatched_frequency_within_closed_form(self):
        lam, mu, T = 2.0, 3.0, 1000.0
        val = bohr_coefficient(lambda t: np.exp(1j * mu * t), lam, T)
        assert abs(val) <= 2.0 / (T * abs(mu - lam))

    def test_two_term_sum_recovers_leading_coefficient(self):
        f = lambda t: 0.5 * np.exp(2j * np.pi * t) + 0.25 * np.exp(1j * np.pi * t)
        val = bohr_coefficient(f, 2 * np.pi, 2e4)
        assert abs(val - 0.5) <= 1e-3

    def test_cross_term_bound_controls_measured_error(self):
        moduli = [0.5, 0.25, 0.125]
        freqs = [2 * np.pi, np.pi, 0.5 * np.pi]
        coeffs = [m * np.exp(2j * np.pi * p) for m, p in zip(moduli, (0.1, 0.4, 0.8))]

        def f(t):
            return sum(c * np.exp(1j * w * t) for c, w in zip(coeffs, freqs))

        for T in (500.0, 4000.0):
            for m_idx in range(3):
                got = bohr_coefficient(f, freqs[m_idx], T)
                bound = bohr_cross_term_bound(moduli, freqs, m_idx, T)
                assert abs(got - coeffs[m_idx]) <= bound + 1e-9


class TestSolenoidRecover:
    def test_round_trip_origin(self):
        emb = SolenoidEmbedding(c=1.0, K=3, window=600.0, grid_step=0.01)
        sig = solenoid_embed(SolenoidPoint((0.0, 0.0, 0.0)), emb)
        rec = solenoid_recover(sig, emb, 500.0)
        for n, x in enumerate(rec.coords, start=1):
            fact = math.factorial(n)
            gap = min(x % fact, fact - x % fact)
            assert gap <= 1e-2 * fact

    def test_round_trip_generic_point(self):
        emb = SolenoidEmbedding(c=1.0, K=3, window=2100.0, grid_step=0.01)
        p = solenoid_from_time(4.3, 3)
        sig = solenoid_embed(p, emb)
        rec = solenoid_recover(sig, emb, 2000.0)
        for n in range(1, 4):
            fact = math.factorial(n)
            gap = abs(rec.coords[n - 1] - p.coords[n - 1]) % fact
            assert min(gap, fact - gap) <= 1e-2 * fact

    def test_zero_signal_rejected(self):
        emb = SolenoidEmbedding(c=1.0, K=3, window=600.0, grid_step=0.01)
        with pytest.raises(NotEmbeddingImageError):
            solenoid_recover(lambda t: np.zeros_like(t, dtype=complex), emb, 500.0)


def three_point_sample():
    d = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.004], [1.0, 0.004, 0.0]])
    return MetricSample(["a", "b", "c"], d)


class TestEpsilonEmbeddingSearch:
    def test_zero_perturbation_accepted_first(self):
        sample = three_point_sample()
        F = np.array([[0.5, 0.5], [0.2, 0.2], [0.2, 0.2]])
        G, report = epsilon_embedding_search(F, sample, eps=0.01, delta_prime=0.1,
                                             seed=0, check_widim=False)
        assert report.tries == 1
        assert np.array_equal(G, F)

    def test_identical_far_rows_get_separated(self):
        sample = three_point_sample()
        F = np.array([[0.2, 0.2], [0.2, 0.2], [0.21, 0.21]])
        G, report = epsilon_embedding_search(F, sample, eps=0.01, delta_prime=0.1,
                                             seed=7, check_widim=False)
        assert np.abs(G - F).max() < 0.1
        assert np.abs(G[0] - G[1]).max() > 1e-12
        # Exhaustive pair check of the embedding contract.
        for i in range(3):
            for j in range(i + 1, 3):
                if np.abs(G[i] - G[j]).max() <= 1e-12:
                    assert sample.dist[i, j] < 0.01

    def test_precondition_violation_raises(self):
        sample = three_point_sample()
        F = np.array([[0.9, 0.9], [-0.9, -0.9], [0.2, 0.2]])
        with pytest.raises(PreconditionError) as err:
            epsilon_embedding_search(F, sample, eps=0.01, delta_prime=0.1,
                                     seed=1, check_widim=False)
        assert err.value.witness is not None

    def test_budget_exhaustion(self):
        # Force failure: rows clipped to the same corner collide forever.
        d = np.array([[0.0, 1.0], [1.0, 0.0]])
        sample = MetricSample([0, 1], d)
        F = np.array([[1.0], [1.0]])
        with pytest.raises(SearchBudgetError):
            epsilon_embedding_search(F, sample, eps=0.5, delta_prime=1e-30,
                                     seed=3, max_tries=5, check_widim=False)

    def test_widim_advisory_warns_but_proceeds(self):
        xs = np.linspace(0, 1, 21)
        d = np.abs(xs[:, None] - xs[None, :])
        sample = MetricSample(list(range(21)), d)
        F = np.stack([xs * 2 - 1, xs * 2 - 1], axis=1)
        with pytest.warns(RuntimeWarning):
            G, report = epsilon_embedding_search(F, sample, eps=0.3,
                                                 delta_prime=0.9, seed=5)
        assert report.widim_advisory == 1


class TestVerifyDeltaEmbedding:
    def test_separated_images_pass_vacuously(self, emb):
        pts = [solenoid_from_time(t, 4) for t in (0.0, 1.3, 3.1)]
        sigs = {i: solenoid_embed(p, emb) for i, p in enumerate(pts)}
        d = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
        sample = MetricSample([0, 1, 2], d)
        verdict = verify_delta_embedding(lambda i: sigs[i], lambda i: pts[i],
                                         sample, delta=0.5, match_tol=1e-6,
                                         n_max=4)
        assert verdict.passed
        assert verdict.n_matched == 0
        assert verdict.min_image_separation > 1e-6

    def test_constant_map_fails_with_witness(self, emb):
        p = solenoid_from_time(0.7, 4)
        sig = solenoid_embed(p, emb)
        d = np.array([[0.0, 1.0], [1.0, 0.0]])
        sample = MetricSample(["x", "y"], d)
        verdict = verify_delta_embedding(lambda i: sig, lambda i: p, sample,
                                         delta=0.5, match_tol=1e-6, n_max=4)
        assert not verdict.passed
        assert verdict.worst_pair == ("x", "y")
        assert verdict.worst_distance == pytest.approx(1.0)


@pytest.fixture(scope="module")
def small_pipeline():
    from flowdim.instances import run_embedding_pipeline
    return run_embedding_pipeline(base_size=6, n_heights=5, seed=11,
                                  window=12.0, node_margin=150.0,
                                  equiv_shifts=(0.4, 2.0))


class TestPerturbSignalMap:
    """Direct checks of the correction stage on a small instance."""

    def test_zero_correction_returns_f_exactly(self, small_pipeline):
        from dataclasses import replace
        from flowdim.embedding import perturb_signal_map
        from flowdim.instances import SuspensionInstance
        res = small_pipeline
        run0 = replace(res.run, G=res.run.F.copy())
        inst = res.instance
        emb = SolenoidEmbedding(c=1.0, K=inst.depth, window=12.0, grid_step=0.05)
        f_map = lambda i: solenoid_embed(inst.factor(int(i)), emb, scale=0.8)
        g = perturb_signal_map(run0, f_map, 3)
        f = f_map(3)
        assert np.array_equal(g.values, f.values)

    def test_no_new_out_of_band_energy(self, small_pipeline):
        from flowdim.bandlimited import band_support_check
        from flowdim.embedding import perturb_signal_map
        from flowdim.kernel import kernel_band_leakage
        res = small_pipeline
        inst = res.instance
        emb = SolenoidEmbedding(c=1.0, K=inst.depth, window=12.0, grid_step=0.05)
        f_map = lambda i: solenoid_embed(inst.factor(int(i)), emb, scale=0.8)
        kernel_leak = kernel_band_leakage(res.run.kernel)
        pad = 8.0 / 12.0
        for i in (0, 7):
            f = f_map(i)
            g = perturb_signal_map(res.run, f_map, i)
            leak_f = band_support_check(f, pad)
            leak_g = band_support_check(g, pad)
            assert leak_g < 2.0 * leak_f + kernel_leak + 1e-6

    def test_pipeline_verdict_on_small_instance(self, small_pipeline):
        assert small_pipeline.passed
