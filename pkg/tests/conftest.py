"""Shared helpers for the test suite."""

import math

import numpy as np

from gecmv import IndexWindow, MosaicSource, truncation_spectrum

TWOPI = 2.0 * math.pi


def certified_spectral_angles(params, n, tol=3e-4, theta_alt=0.317):
    """Truncation eigenvalue angles that persist under a change of phase offset.

    Boundary-localized truncation eigenvalues sit in spectral gaps and move
    with the phase offset theta; bulk eigenvalues approximate the (theta
    independent) spectrum and persist.  Keeping only angles with a partner
    within tol in a second truncation's spectrum filters the gap modes out.
    """
    w = IndexWindow(0, n - 1)
    a1 = truncation_spectrum(MosaicSource(params), w, 1.0 + 0.0j, 1.0 + 0.0j).angles
    alt = params.with_theta(params.theta + theta_alt)
    a2 = truncation_spectrum(MosaicSource(alt), w, 1.0 + 0.0j, 1.0 + 0.0j).angles
    d = np.abs(a1[:, None] - a2[None, :])
    d = np.minimum(d, TWOPI - d).min(axis=1)
    # z = +1 and z = -1 host symmetry-pinned boundary modes that do not move
    # with theta, so the cross-check cannot filter them; drop them explicitly
    sym = np.minimum(np.abs(np.cos(a1) - 1.0), np.abs(np.cos(a1) + 1.0))
    return a1[(d < tol) & (sym > 1e-6)]
