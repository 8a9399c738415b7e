"""Coefficient sequences for five-diagonal unitary lattice operators.

A coefficient source maps a lattice index n to a pair (alpha_n, rho_n) with
|alpha|^2 + |rho|^2 = 1.  The mosaic family inserts a quasi-periodic pair at
every s-th odd index and a perfectly transmitting pair (0, -i) at the other
odd indices; even indices carry the constant shift pair (lambda1', lambda1).
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateCoupling, NoMobilityEdge, RationalInput

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

_TWOPI = 2.0 * math.pi


@dataclass(frozen=True)
class VerblunskyPair:
    alpha: complex
    rho: complex

    @property
    def norm2(self):
        return abs(self.alpha) ** 2 + abs(self.rho) ** 2

    def is_unit(self, tol=1e-12):
        return abs(self.norm2 - 1.0) <= tol


@dataclass(frozen=True)
class MosaicParams:
    lambda1: float
    lambda2: float
    phi: float = GOLDEN
    theta: float = 0.0
    s: int = 2

    def __post_init__(self):
        if not (0.0 <= self.lambda1 <= 1.0 and 0.0 <= self.lambda2 <= 1.0):
            raise ValueError("coupling constants must lie in [0, 1]")
        if self.s < 1 or int(self.s) != self.s:
            raise ValueError("s must be a positive integer")
        object.__setattr__(self, "phi", self.phi % 1.0)
        object.__setattr__(self, "theta", self.theta % 1.0)

    @property
    def lambda1p(self):
        return math.sqrt(max(0.0, 1.0 - self.lambda1 ** 2))

    @property
    def lambda2p(self):
        return math.sqrt(max(0.0, 1.0 - self.lambda2 ** 2))

    def with_theta(self, theta):
        return replace(self, theta=theta % 1.0)


@dataclass(frozen=True)
class Coin:
    entries: np.ndarray

    def is_unitary(self, tol=1e-12):
        e = self.entries
        return (np.abs(e @ e.conj().T - np.eye(2)).max() <= tol
                and abs(np.linalg.det(e) - 1.0) <= tol)


def mosaic_pair_at(params, n):
    """Pair at lattice index n of the mosaic model (general s)."""
    if n % 2 == 0:
        return VerblunskyPair(params.lambda1p, params.lambda1)
    m = (n + 1) // 2  # odd index n = 2m - 1
    if m % params.s == 0:
        x = _TWOPI * ((params.theta + m * params.phi) % 1.0)
        return VerblunskyPair(params.lambda2 * math.sin(x),
                              params.lambda2 * math.cos(x) - 1j * params.lambda2p)
    return VerblunskyPair(0.0, -1j)


def twin_pair_at(params, n):
    """Complexified twin of the s=2 mosaic model: even-index rho gains a factor i."""
    if params.s != 2:
        raise ValueError("the complexified twin is defined for s = 2")
    p = mosaic_pair_at(params, n)
    if n % 2 == 0:
        return VerblunskyPair(p.alpha, 1j * p.rho)
    return p


def coin_at(params, n):
    """Local 2x2 coin at cell n, built from the pair at lattice index 2n-1."""
    p = mosaic_pair_at(params, 2 * n - 1)
    q = np.array([[np.conj(p.rho), -p.alpha],
                  [np.conj(p.alpha), p.rho]], dtype=complex)
    return Coin(q)


class CoefficientSource:
    """Deterministic map n -> VerblunskyPair."""

    def pair(self, n):
        raise NotImplementedError

    def alpha(self, n):
        return self.pair(n).alpha

    def rho(self, n):
        return self.pair(n).rho

    def pairs(self, a, b):
        """Arrays (alpha, rho) for indices a..b inclusive."""
        ps = [self.pair(n) for n in range(a, b + 1)]
        return (np.array([p.alpha for p in ps], dtype=complex),
                np.array([p.rho for p in ps], dtype=complex))


class MosaicSource(CoefficientSource):
    def __init__(self, params):
        self.params = params

    def pair(self, n):
        return mosaic_pair_at(self.params, n)

    def with_theta(self, theta):
        return MosaicSource(self.params.with_theta(theta))


class TwinSource(CoefficientSource):
    def __init__(self, params):
        if params.s != 2:
            raise ValueError("the complexified twin is defined for s = 2")
        self.params = params

    def pair(self, n):
        return twin_pair_at(self.params, n)

    def with_theta(self, theta):
        return TwinSource(self.params.with_theta(theta))


class ConstantSource(CoefficientSource):
    def __init__(self, alpha, rho):
        self._pair = VerblunskyPair(alpha, rho)

    def pair(self, n):
        return self._pair


class FunctionSource(CoefficientSource):
    def __init__(self, fn):
        self.fn = fn

    def pair(self, n):
        a, r = self.fn(n)
        return VerblunskyPair(a, r)


class ExplicitSource(CoefficientSource):
    """Pairs from a dict {n: (alpha, rho)}; a default pair covers other indices."""

    def __init__(self, table, default=(0.0, 1.0)):
        self.table = dict(table)
        self.default = default

    def pair(self, n):
        a, r = self.table.get(n, self.default)
        return VerblunskyPair(a, r)


class RealifiedSource(CoefficientSource):
    """Same alphas, rho replaced by |rho|."""

    def __init__(self, base):
        self.base = base

    def pair(self, n):
        p = self.base.pair(n)
        return VerblunskyPair(p.alpha, abs(p.rho))


class PhasedSource(CoefficientSource):
    """Same alphas, rho_n = xi(n) * |rho_n| for a unimodular phase map xi."""

    def __init__(self, base, xi):
        self.base = base
        self.xi = xi

    def pair(self, n):
        p = self.base.pair(n)
        return VerblunskyPair(p.alpha, self.xi(n) * abs(p.rho))


def mobility_edge_t0(lambda1, lambda2):
    """Edge angle t0 in (0, pi/2) with cos(t0) = lambda1^2 lambda2' / (2 lambda1' lambda2)."""
    if lambda1 <= 0.0 or lambda1 >= 1.0 or lambda2 <= 0.0 or lambda2 >= 1.0:
        raise DegenerateCoupling("couplings must lie strictly inside (0, 1)")
    l1p = math.sqrt(1.0 - lambda1 ** 2)
    l2p = math.sqrt(1.0 - lambda2 ** 2)
    arg = lambda1 ** 2 * l2p / (2.0 * l1p * lambda2)
    if arg >= 1.0:
        raise NoMobilityEdge("lambda1^2/lambda1' >= 2*lambda2/lambda2'")
    return math.acos(arg)


@dataclass(frozen=True)
class ConvergentList:
    pairs: tuple  # ((p, q), ...)
    value: float


def convergents(phi, count):
    """First `count` continued-fraction convergents of phi in (0, 1).

    The trivial a0 = 0 convergent is dropped, so the denominators are
    strictly increasing.  Raises RationalInput when the expansion terminates
    (to double precision) before `count` convergents are produced.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    x = phi % 1.0
    value = x
    # p/q recurrences with a0 = 0; generate count+1 so the invariant
    # |phi - p_m/q_m| < 1/(q_m q_{m+1}) is checkable by the caller.
    pm1, qm1 = 1, 0  # p_{-1}, q_{-1}
    p0, q0 = 0, 1    # a0 = 0 convergent
    out = []
    for _ in range(count + 1):
        if x <= 0.0:
            break
        x = 1.0 / x
        a = math.floor(x)
        if a > 1e12:  # expansion exhausted double precision -> rational
            break
        p1 = a * p0 + pm1
        q1 = a * q0 + qm1
        out.append((p1, q1))
        pm1, qm1, p0, q0 = p0, q0, p1, q1
        x -= a
    if len(out) < count:
        raise RationalInput("continued-fraction expansion terminates before count")
    return ConvergentList(tuple(out[:count]), value)


def resonance_scan(theta, phi, tau, n_max):
    """Indices |n| <= n_max with |sin 2pi(theta + n phi)| < exp(-|n|^(1/(2 tau)))."""
    if tau <= 1.0:
        raise ValueError("tau must exceed 1")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(-n_max, n_max + 1)
    vals = np.abs(np.sin(_TWOPI * (theta + n * phi)))
    thr = np.exp(-np.abs(n) ** (1.0 / (2.0 * tau)))
    return [int(k) for k in n[vals < thr]]


def diophantine_check(phi, kappa, tau, n_max):
    """Whether ||n phi|| >= kappa/|n|^tau for all 0 < |n| <= n_max.

    Returns (ok, worst_index, worst_value) with worst_value = min ||n phi|| |n|^tau.
    """
    if kappa <= 0.0 or tau <= 1.0:
        raise ValueError("require kappa > 0 and tau > 1")
    if n_max < 1:
        return True, 0, math.inf
    n = np.arange(1, n_max + 1, dtype=float)
    frac = (n * phi) % 1.0
    dist = np.minimum(frac, 1.0 - frac)
    scaled = dist * n ** tau
    j = int(np.argmin(scaled))
    ok = bool(dist[j] >= kappa / n[j] ** tau)
    return ok, j + 1, float(scaled[j])
