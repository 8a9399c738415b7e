"""Localization observables and mobility-edge scans.

The fractal dimension used throughout is the participation-ratio dimension
Gamma = -log(sum |u|^4) / log N, which is 1 for a perfectly spread profile
and 0 for a point mass.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import CocycleSpec
from .errors import (DuplicateNodes, FloorDominated, NoMobilityEdge,
                     PeakTooCloseToBoundary)
from .lyapunov import le_closed_form, le_estimate, spectral_arcs
from .model import MosaicSource, mobility_edge_t0
from .operators import BoundaryCondition, IndexWindow
from .spectral import eigenvector_shooting, truncation_spectrum

_TWOPI = 2.0 * math.pi


def _exp_it(t):
    return complex(math.cos(t), math.sin(t))


@dataclass(frozen=True)
class EdgeScanRow:
    t: float
    gamma_frac: float
    le_measured: float
    le_predicted: float
    region: str  # AC | PP | Edge
    theta: float
    beta: complex


def fractal_dimension(profile):
    """Participation-ratio dimension of a normalized eigenfunction profile."""
    u = np.asarray(profile.values)
    n = u.size
    if n < 16:
        raise ValueError("profile must cover at least 16 sites")
    p = np.abs(u) ** 2
    p = p / p.sum()
    return float(-math.log(float((p ** 2).sum())) / math.log(n))


def _cell_masses(profile):
    u = np.abs(np.asarray(profile.values)) ** 2
    a = profile.window.a
    # group sites into cells (2n, 2n+1); drop unpaired boundary sites
    lead = (-a) % 2
    u = u[lead:]
    if u.size % 2 == 1:
        u = u[:-1]
    return u[0::2] + u[1::2]


def _side_fit(x, ylog):
    if x.size < 5:
        raise FloorDominated("fewer than 5 cells above the numeric floor")
    coef, res = np.polyfit(x, ylog, 1, full=True)[:2]
    ss_tot = float(((ylog - ylog.mean()) ** 2).sum())
    ss_res = float(res[0]) if res.size else 0.0
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(coef[0]), r2


def decay_rate_fit(profile, floor_factor=1e3):
    """Least-squares log-slope of the cell masses on each side of the peak.

    Returns (rate_left, rate_right, r_squared): the raw per-cell slope of
    log(|u(2n)|^2 + |u(2n+1)|^2), fitted where masses exceed floor_factor
    times the numeric floor; r_squared is the weaker of the two side fits.
    """
    m = _cell_masses(profile)
    peak = int(np.argmax(m))
    if 2 * peak < 50 or 2 * (m.size - 1 - peak) < 50:
        raise PeakTooCloseToBoundary("peak must be at least 50 sites from both ends")
    floor = max(float(m.min()), 1e-300)
    thr = floor_factor * floor
    idx = np.arange(m.size, dtype=float)

    def side(sl):
        keep = m[sl] > thr
        return _side_fit(idx[sl][keep], np.log(m[sl][keep]))

    rate_left, r2l = side(slice(0, peak + 1))
    rate_right, r2r = side(slice(peak, m.size))
    return rate_left, rate_right, min(r2l, r2r)


def mobility_edge_scan(params, n, theta_samples=(0.0,), beta_samples=(1.0 + 0.0j,),
                       le_steps=20_000, threads=None):
    """Per-eigenvalue localization diagnostics across the truncation spectrum.

    For every eigenvalue angle of each (theta, beta) truncation: fractal
    dimension of the eigenvector, measured and predicted Lyapunov exponents,
    and the arc-region tag (AC/PP, with Edge inside a 10/N band of the edge).
    """
    mobility_edge_t0(params.lambda1, params.lambda2)  # NoMobilityEdge if absent
    if n < 512:
        raise ValueError("n must be at least 512")
    arcs = spectral_arcs(params.lambda1, params.lambda2)
    band = 10.0 / n
    window = IndexWindow(0, n - 1)
    rows = []
    for theta in theta_samples:
        source = MosaicSource(params.with_theta(theta))
        for beta in beta_samples:
            bc = (BoundaryCondition.phase(beta), BoundaryCondition.phase(beta))
            spec = truncation_spectrum(source, window, beta, beta)
            for t in spec.angles:
                prof = eigenvector_shooting(source, window, float(t), bc)
                gamma = fractal_dimension(prof)
                cspec = CocycleSpec("SzegoPP", source.params, _exp_it(float(t)))
                le_m = le_estimate(cspec, le_steps, n_phases=1, threads=threads).value
                le_p = le_closed_form(params.lambda1, params.lambda2, float(t))
                region = arcs.region_of(float(t), edge_band=band)
                rows.append(EdgeScanRow(float(t), gamma, le_m, le_p, region,
                                        float(theta), complex(beta)))
    rows.sort(key=lambda r: (r.t, r.theta))
    return rows


def write_scan_csv(rows, params, n, fh):
    """CSV with a leading comment line carrying all scan parameters."""
    fh.write(f"# lambda1={params.lambda1!r} lambda2={params.lambda2!r} "
             f"phi={params.phi!r} s={params.s} N={n}\n")
    fh.write("t,gamma,le_measured,le_predicted,region,theta,beta\n")
    for r in rows:
        fh.write(f"{r.t:.12g},{r.gamma_frac:.12g},{r.le_measured:.12g},"
                 f"{r.le_predicted:.12g},{r.region},{r.theta:.12g},"
                 f"{r.beta.real:.12g}{r.beta.imag:+.12g}j\n")


def eps_uniform_measure(angles, grid_points=1000):
    """Smallest epsilon certifying epsilon-uniformity of the nodes cos(2 pi theta_j).

    Evaluates (1/k) log max over x in [-1, 1] (Chebyshev grid) and i of
    prod_{j != i} |x - c_j| / |c_i - c_j|.
    """
    c = np.cos(_TWOPI * np.asarray(angles, dtype=float))
    kp1 = c.size
    if kp1 < 2:
        raise ValueError("need at least 2 angles")
    diff = np.abs(c[:, None] - c[None, :])
    np.fill_diagonal(diff, np.inf)
    if diff.min() < 1e-12:
        raise DuplicateNodes("two nodes share a cosine to 1e-12")
    k = kp1 - 1
    x = np.cos(math.pi * (np.arange(grid_points) + 0.5) / grid_points)
    logs = np.log(np.maximum(np.abs(x[:, None] - c[None, :]), 1e-300))  # (m, k+1)
    row_tot = logs.sum(axis=1)
    np.fill_diagonal(diff, 1.0)
    denom = np.log(diff).sum(axis=1)  # sum_{j != i} log |c_i - c_j|
    # numerator for node i at grid x: row_tot - log|x - c_i|
    worst = float((row_tot[:, None] - logs - denom[None, :]).max())
    return worst / k
