"""Lyapunov exponents: Birkhoff estimates, closed forms, and classification.

The model's exponent convention is per lattice cell: L(z) is half the rate of
the two-step transfer family (equivalently half the rate of the combined
four-step Szego family).  The closed form on the spectrum is
L(e^{it}) = max{0, F(lambda1, lambda2, t)} / 2.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cocycle import CocycleSpec, epsilon0, orbit_log_norm
from .errors import DegenerateCoupling, NoMobilityEdge
from .model import mobility_edge_t0

# raw per-step cocycle rate -> per-lattice-cell exponent
_VALUE_FACTOR = {"TransferA": 1.0, "TransferAPlus": 0.5, "Szego": 2.0,
                 "SzegoPP": 0.5, "Mz": 0.5}


def default_threads():
    try:
        return max(1, int(os.environ.get("CMV_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    raw_cocycle_rate: float
    n_steps: int
    n_phases: int
    spread: float


@dataclass(frozen=True)
class Classification:
    tag: str  # Subcritical | Critical | Supercritical | UniformlyHyperbolic | Inconclusive
    evidence: dict


def le_estimate(spec, n_steps, n_phases=1, seed=None, threads=None):
    """Phase-averaged Birkhoff estimate of the family's exponent.

    Starting phases are equidistributed (theta_k = theta + k/n_phases); the
    `seed` argument is accepted for API compatibility but unused since nothing
    is random.  The reduction order is fixed, so results are reproducible.
    """
    if n_steps < 1000:
        raise ValueError("n_steps must be >= 1000")
    if n_phases < 1:
        raise ValueError("n_phases must be >= 1")
    base = spec.params.theta
    phases = [(base + k / n_phases) % 1.0 for k in range(n_phases)]
    threads = threads or default_threads()
    if threads > 1 and n_phases > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rates = list(ex.map(lambda th: orbit_log_norm(spec, th, n_steps).rate, phases))
    else:
        rates = [orbit_log_norm(spec, th, n_steps).rate for th in phases]
    raw = float(np.mean(rates))
    spread = float(np.max(rates) - np.min(rates)) if n_phases > 1 else 0.0
    return LyapunovEstimate(_VALUE_FACTOR[spec.family] * raw, raw,
                            n_steps, n_phases, spread)


def f_value(lambda1, lambda2, t):
    """F(lambda1, lambda2, t); the exponent is positive exactly when F > 0."""
    if lambda1 <= 0.0 or lambda2 <= 0.0:
        raise DegenerateCoupling("require lambda1, lambda2 > 0")
    l1p = math.sqrt(max(0.0, 1.0 - lambda1 ** 2))
    l2p = math.sqrt(max(0.0, 1.0 - lambda2 ** 2))
    c = abs(math.cos(t))
    num = lambda2 * (2.0 * l1p * c + math.sqrt(lambda1 ** 4 + 4.0 * l1p ** 2 * c * c))
    return math.log(num / (lambda1 ** 2 * (1.0 + l2p)))


def le_closed_form(lambda1, lambda2, t):
    """Closed-form exponent max{0, F}/2 on the spectrum."""
    return 0.5 * max(0.0, f_value(lambda1, lambda2, t))


def gamma_tilde(lambda1, lambda2):
    """Mean log of the scalar rho factors over one four-step block."""
    if lambda1 <= 0.0:
        raise DegenerateCoupling("require lambda1 > 0")
    l2p = math.sqrt(max(0.0, 1.0 - lambda2 ** 2))
    return math.log(lambda1 ** 2 * (1.0 + l2p) / 2.0)


def jensen_integral(t, epsilon):
    """int_0^1 log|sqrt(1 - t^2 sin^2(2 pi(theta + i epsilon)))| d theta, closed form."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if t == 0.0:
        return 0.0
    tp = math.sqrt(1.0 - t * t)
    e0 = epsilon0(t)
    return math.log((1.0 + tp) / 2.0) + 2.0 * math.pi * max(0.0, abs(epsilon) - e0)


def acceleration(spec, delta, n_steps, n_phases=1, threads=None):
    """One-sided finite-difference acceleration (d/d epsilon of the rate) / (2 pi)."""
    if delta == 0.0:
        raise ValueError("delta must be nonzero")
    shifted = replace(spec, epsilon=spec.epsilon + delta)  # StripExceeded if outside
    r1 = le_estimate(spec, n_steps, n_phases, threads=threads).raw_cocycle_rate
    r2 = le_estimate(shifted, n_steps, n_phases, threads=threads).raw_cocycle_rate
    return (r2 - r1) / (2.0 * math.pi * delta)


DEFAULT_TOLERANCES = {
    "super": 0.02,   # L(0) above this declares Supercritical
    "sub": 0.005,    # |L| below this at all probes declares Subcritical
    "uh_rate": 0.02,  # uniform growth floor over the phase grid
    "uh_jump": 0.3,  # max chordal jump of the contracted direction
}


def _contracted_direction(frame):
    # right-singular vector of the smallest singular value of a 2x2
    _, _, vh = np.linalg.svd(frame)
    return vh[1].conj()


def classify(params, t, tolerances=None, n_steps=200_000, n_phases=4, threads=None):
    """Classify the spectral parameter e^{it} for the given couplings.

    Order of tests: exact analytic edge (Critical), uniform hyperbolicity
    (uniform growth over a phase grid plus continuity of the contracted
    direction -- a positive exponent with continuous splitting is equivalent
    to uniform hyperbolicity, so a discontinuous splitting falls through to
    the exponent-based tags), then measured-exponent thresholds with
    complexified probes at +- epsilon0(lambda2)/4 (a heuristic probe radius:
    the true subcritical radius is not known exactly).
    """
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    if not (0.0 < params.lambda1 < 1.0 and 0.0 < params.lambda2 < 1.0):
        raise DegenerateCoupling("couplings must lie strictly inside (0, 1)")

    fv = f_value(params.lambda1, params.lambda2, t)
    evidence = {"F": fv}
    try:
        t0 = mobility_edge_t0(params.lambda1, params.lambda2)
        evidence["t0"] = t0
        if abs(abs(math.cos(t)) - math.cos(t0)) < 1e-12:
            return Classification("Critical", evidence)
    except NoMobilityEdge:
        pass

    z = complex(math.cos(t), math.sin(t))
    spec = CocycleSpec("SzegoPP", params, z)

    # uniform hyperbolicity oracle
    grid = 64
    uh_n = 512
    rates, dirs = [], []
    for k in range(grid):
        orb = orbit_log_norm(spec, k / grid, uh_n)
        rates.append(orb.rate)
        dirs.append(_contracted_direction(orb.frame))
    min_rate = min(rates)
    evidence["uh_min_rate"] = min_rate
    if min_rate > tol["uh_rate"]:
        jumps = []
        for k in range(grid):
            v, w = dirs[k], dirs[(k + 1) % grid]
            ov = min(1.0, abs(np.vdot(v, w)))
            jumps.append(math.sqrt(max(0.0, 1.0 - ov * ov)))
        max_jump = max(jumps)
        evidence["uh_max_jump"] = max_jump
        min_rate2 = min(orbit_log_norm(spec, k / grid, 2 * uh_n).rate
                        for k in range(grid))
        evidence["uh_min_rate_2n"] = min_rate2
        stable = min_rate2 > 0.7 * min_rate
        if max_jump < tol["uh_jump"] and stable:
            return Classification("UniformlyHyperbolic", evidence)

    est0 = le_estimate(spec, n_steps, n_phases, threads=threads)
    evidence["L0"] = est0.value
    if est0.value > tol["super"]:
        return Classification("Supercritical", evidence)

    probe = epsilon0(params.lambda2) / 4.0
    probes = {}
    for eps in (probe, -probe):
        est = le_estimate(replace(spec, epsilon=eps), n_steps, n_phases, threads=threads)
        probes[eps] = est.value
    evidence["L_probes"] = probes
    if abs(est0.value) <= tol["sub"] and all(abs(v) <= tol["sub"] for v in probes.values()):
        return Classification("Subcritical", evidence)
    return Classification("Inconclusive", evidence)


@dataclass(frozen=True)
class ArcDecomposition:
    t0: float
    ac_intervals: tuple  # angle intervals (lo, hi)
    pp_intervals: tuple  # (lo, hi); lo may be negative for the arc through 0

    @property
    def endpoints(self):
        t0 = self.t0
        return (t0, math.pi - t0, math.pi + t0, 2.0 * math.pi - t0)

    def region_of(self, t, edge_band=0.0):
        cos_t0 = math.cos(self.t0)
        c = abs(math.cos(t))
        if abs(c - cos_t0) < edge_band:
            return "Edge"
        return "PP" if c > cos_t0 else "AC"


def spectral_arcs(lambda1, lambda2):
    """Localized (PP) and absolutely continuous (AC) spectral arcs.

    The exponent is positive exactly when |cos t| > cos t0, so the PP arcs
    have half-width t0 about t = 0 and t = pi, and the AC arcs are
    [t0, pi - t0] and [pi + t0, 2 pi - t0].
    """
    t0 = mobility_edge_t0(lambda1, lambda2)
    ac = ((t0, math.pi - t0), (math.pi + t0, 2.0 * math.pi - t0))
    pp = ((-t0, t0), (math.pi - t0, math.pi + t0))
    return ArcDecomposition(t0, ac, pp)
