import numpy as np
import pytest

from flowdim.bandlimited import (
    Band,
    Signal,
    band_support_check,
    fold_real,
    periodic_subspace_dim,
    shift,
    signal_metric,
    signal_metric_tail,
)
from flowdim.errors import (
    BandError,
    IncompatibleSignalError,
    InvariantViolationError,
    WindowExhaustedError,
)


def tone(freq, band=None, window=20.0, step=1 / 8, sup_bound=True):
    band = band or Band(0.0, max(1.0, freq))
    return Signal.from_function(lambda t: np.exp(2j * np.pi * freq * t),
                                band, window, step, sup_bound=sup_bound)


class TestSignal:
    def test_oversampling_enforced(self):
        with pytest.raises(InvariantViolationError):
            Signal.from_function(lambda t: 0 * t, Band(0, 4), 10.0, 1 / 8)

    def test_sup_bound_enforced(self):
        with pytest.raises(InvariantViolationError):
            Signal.from_function(lambda t: 0 * t + 2.0, Band(0, 1), 10.0, 1 / 8,
                                 sup_bound=True)

    def test_grid_mismatch_rejected(self):
        f = tone(0.5)
        g = tone(0.5, window=10.0)
        with pytest.raises(IncompatibleSignalError):
            signal_metric(f, g, 4)


class TestSignalMetric:
    def test_identical_signals(self):
        f = tone(0.5)
        assert signal_metric(f, f, 10) == 0.0

    def test_constant_difference_sums_geometric(self):
        base = Band(0, 1)
        f = Signal.from_function(lambda t: 0 * t + 0.25, base, 20.0, 1 / 8)
        z = Signal.from_function(lambda t: 0 * t, base, 20.0, 1 / 8)
        n_max = 18
        expected = 0.25 * (1.0 - 2.0 ** -n_max)
        assert signal_metric(f, z, n_max) == pytest.approx(expected, abs=1e-12)
        assert signal_metric_tail(n_max) == 2.0 ** (1 - n_max)

    def test_bounded_by_two(self):
        f = tone(0.5)
        g = Signal(f.band, f.window, f.grid_step, -f.values, sup_bound=True)
        assert signal_metric(f, g, 12) <= 2.0

    def test_metric_axioms_random(self):
        rng = np.random.default_rng(1)
        band = Band(0, 1)
        sigs = []
        for _ in range(12):
            coeffs = rng.uniform(-0.4, 0.4, 3) + 1j * rng.uniform(-0.4, 0.4, 3)
            freqs = rng.uniform(0.05, 0.9, 3)
            sigs.append(Signal.from_function(
                lambda t, c=coeffs, fr=freqs: np.exp(2j * np.pi * np.outer(t, fr)) @ c,
                band, 12.0, 1 / 8))
        for _ in range(200):
            i, j, k = rng.integers(0, len(sigs), 3)
            dij = signal_metric(sigs[i], sigs[j], 8)
            dji = signal_metric(sigs[j], sigs[i], 8)
            dik = signal_metric(sigs[i], sigs[k], 8)
            dkj = signal_metric(sigs[k], sigs[j], 8)
            assert dij == pytest.approx(dji, abs=1e-12)
            assert dij <= dik + dkj + 1e-9


class TestShift:
    def test_zero_shift_identity(self):
        f = tone(0.7)
        g = shift(f, 0.0)
        t = g.times()
        ref = f.evaluate(t)
        assert np.abs(g.values - ref).max() < 1e-12

    def test_tone_picks_up_phase(self):
        c, r = 0.9, 0.7
        f = tone(c)
        g = shift(f, r)
        expected = np.exp(2j * np.pi * c * (g.times() + r))
        assert np.abs(g.values - expected).max() < 1e-6

    def test_group_law_on_common_window(self):
        c = 0.37
        f = tone(c, window=30.0)
        once = shift(f, 0.7)
        twice = shift(shift(f, 0.3), 0.4)
        offset = int(round((twice.times()[0] - once.times()[0]) / f.grid_step))
        overlap = len(twice.values)
        diff = np.abs(once.values[offset:offset + overlap] - twice.values)
        assert diff.max() < 1e-6

    def test_sup_norm_survives_resampling(self):
        # The resampled values must carry the same sup as the source
        # function at the corresponding continuum times.
        rng = np.random.default_rng(3)
        coeffs = rng.uniform(-0.3, 0.3, 4) + 1j * rng.uniform(-0.3, 0.3, 4)
        freqs = rng.uniform(0.1, 0.9, 4)
        f = Signal.from_function(
            lambda t: np.exp(2j * np.pi * np.outer(t, freqs)) @ coeffs,
            Band(0, 1), 40.0, 1 / 8)
        r = 3.3
        g = shift(f, r)
        reference = np.exp(2j * np.pi * np.outer(g.times() + r, freqs)) @ coeffs
        sup_g = np.abs(g.values).max()
        sup_ref = np.abs(reference).max()
        assert sup_g == pytest.approx(sup_ref, abs=1e-6)

    def test_window_budget(self):
        f = tone(0.5, window=10.0)
        with pytest.raises(WindowExhaustedError):
            shift(f, 6.0)

    def test_spectral_energy_translation_invariance(self):
        f = tone(1.0, band=Band(0, 2), window=50.0, step=1 / 8)
        leak_f = band_support_check(f, 4 / 50.0)
        g = shift(f, 2.0)
        leak_g = band_support_check(g, 4 / g.window)
        assert abs(leak_f - leak_g) < 1e-6


class TestBandSupportCheck:
    def test_mid_band_tone_clean(self):
        f = tone(1.0, band=Band(0, 2), window=50.0)
        assert band_support_check(f, 4 / 50.0) < 1e-3

    def test_off_band_tone_dirty(self):
        f = Signal.from_function(
            lambda t: np.exp(2j * np.pi * (2 + 10 / 50.0) * t),
            Band(0, 2), 50.0, 1 / 16)
        assert band_support_check(f, 1 / 50.0) > 0.9

    def test_zero_signal_zero_leakage(self):
        z = Signal.from_function(lambda t: 0 * t, Band(0, 2), 50.0, 1 / 8)
        assert band_support_check(z, 0.0) == 0.0

    def test_negative_pad_rejected(self):
        f = tone(0.5)
        with pytest.raises(ValueError):
            band_support_check(f, -0.1)


class TestFoldReal:
    def test_real_signal_unchanged(self):
        f = Signal.from_function(lambda t: np.cos(2 * np.pi * 0.4 * t) + 0j,
                                 Band(0, 1), 20.0, 1 / 8, sup_bound=True)
        g = fold_real(f)
        assert np.abs(g.values - f.values).max() == 0.0

    def test_tone_folds_to_cosine(self):
        f = tone(0.5, band=Band(0, 1))
        g = fold_real(f)
        t = g.times()
        assert np.abs(g.values - np.cos(2 * np.pi * 0.5 * t)).max() < 1e-12
        assert g.band == Band(-1.0, 1.0)

    def test_fold_contracts_sup(self):
        rng = np.random.default_rng(5)
        coeffs = rng.uniform(0, 0.3, 3) * np.exp(2j * np.pi * rng.uniform(0, 1, 3))
        freqs = rng.uniform(0.05, 0.95, 3)
        f = Signal.from_function(
            lambda t: np.exp(2j * np.pi * np.outer(t, freqs)) @ coeffs,
            Band(0, 1), 20.0, 1 / 8, sup_bound=True)
        g = fold_real(f)
        assert g.sup_norm() <= f.sup_norm() + 1e-12

    def test_negative_band_rejected(self):
        f = Signal.from_function(lambda t: 0 * t, Band(-1, 1), 20.0, 1 / 8)
        with pytest.raises(BandError):
            fold_real(f)


class TestPeriodicSubspaceDim:
    @pytest.mark.parametrize("a,r,expected", [(1, 2.5, 5), (1, 0.5, 1), (2, 3, 13)])
    def test_named_cases(self, a, r, expected):
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            dim, cert = periodic_subspace_dim(a, r)
        assert dim == expected
        assert cert.rank == expected
        assert cert.consistent

    def test_randomized_sweep_no_mismatch(self):
        rng = np.random.default_rng(17)
        done = 0
        while done < 20:
            a = float(rng.uniform(0.3, 3.0))
            r = float(rng.uniform(0.3, 4.0))
            if abs(a * r - round(a * r)) < 1e-6:
                continue
            dim, cert = periodic_subspace_dim(a, r)
            assert dim == 2 * int(np.floor(a * r)) + 1
            assert cert.rank == dim
            done += 1

    def test_band_edge_warns(self):
        with pytest.warns(RuntimeWarning):
            dim, cert = periodic_subspace_dim(2.0, 3.0)
        assert dim == 13

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            periodic_subspace_dim(-1.0, 2.0)
