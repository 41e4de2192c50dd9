# The band-limited signal space and its shift flow.
#
# Signals live on a finite window with declared band [a, b] and at
# least 4x oversampling.  The weighted local-sup metric, the shift
# flow, spectral support checking, real folding, and the dimension of
# the r-periodic subspace are all exercised below.

import numpy as np

from flowdim import (
    Band,
    Signal,
    band_support_check,
    fold_real,
    periodic_subspace_dim,
    shift,
    signal_metric,
    signal_metric_tail,
)

band = Band(0.0, 1.0)
W, dt = 24.0, 1 / 8

tone = Signal.from_function(lambda t: np.exp(2j * np.pi * 0.4 * t),
                            band, W, dt, sup_bound=True)
two = Signal.from_function(
    lambda t: 0.5 * np.exp(2j * np.pi * 0.4 * t) + 0.5 * np.exp(2j * np.pi * 0.9 * t),
    band, W, dt, sup_bound=True)

# ## The weighted local-sup metric and its certified tail

for n_max in (4, 8, 16):
    print(f"metric(tone, two-tone) with n_max={n_max:2d}:",
          f"{signal_metric(tone, two, n_max):.6f}",
          f"(+ tail bound {signal_metric_tail(n_max):.1e})")

# ## The shift flow re-phases tones

g = shift(tone, 0.7)
expected = np.exp(2j * np.pi * 0.4 * (g.times() + 0.7))
print("\nshift residual on a tone:", np.abs(g.values - expected).max())

# ## Spectral support: in-band tones are clean, off-band tones are not

wide = Band(0.0, 2.0)
clean = Signal.from_function(lambda t: np.exp(2j * np.pi * 1.0 * t),
                             wide, 50.0, 1 / 8, sup_bound=True)
dirty = Signal.from_function(lambda t: np.exp(2j * np.pi * 2.2 * t),
                             wide, 50.0, 1 / 16)
print("leakage, tone at mid-band:", band_support_check(clean, 4 / 50.0))
print("leakage, tone past the edge:", band_support_check(dirty, 1 / 50.0))

# ## Folding a band-[0, a] signal to a real band-[-a, a] signal

folded = fold_real(tone)
print("\nfold residual vs cos:",
      np.abs(folded.values - np.cos(2 * np.pi * 0.4 * folded.times())).max())
print("folded band:", folded.band)

# ## Dimension of the r-periodic subspace: 2 floor(a r) + 1

for a, r in ((1.0, 2.5), (1.0, 0.5), (2.0, 2.9)):
    dim, cert = periodic_subspace_dim(a, r)
    print(f"a={a}, r={r}: dimension {dim}, certified rank {cert.rank}")
