"""Finite five-diagonal unitary matrices, boundary conditions, and gauges.

The full-line operator is E = L M where L (resp. M) is a direct sum of 2x2
blocks Theta(alpha_j, rho_j) acting on span{delta_j, delta_{j+1}} for even
(resp. odd) j.  A finite window [a, b] is cut out by projecting the product;
a unit-modulus boundary phase beta replaces alpha at the just-outside indices
a-1 and b (with rho set to 0 there), which makes the restriction unitary.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (AsymmetricWindow, MisalignedWindow, NonUnimodularInput,
                     NormConditionViolated, RecoveryIllConditioned, SingularRho,
                     WindowTooSmall)
from .model import CoefficientSource, ExplicitSource, VerblunskyPair, coin_at

_PAD = 4  # padding so cropped product entries are exact


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str  # 'phase' | 'open'
    beta: complex = None

    @staticmethod
    def phase(beta):
        if abs(abs(beta) - 1.0) > 1e-12:
            raise NonUnimodularInput("boundary phase must be unimodular")
        return BoundaryCondition("phase", complex(beta))

    @staticmethod
    def open():
        return BoundaryCondition("open")

    @property
    def is_phase(self):
        return self.kind == "phase"


@dataclass(frozen=True)
class IndexWindow:
    a: int
    b: int

    def __post_init__(self):
        if self.b < self.a:
            raise WindowTooSmall("window must satisfy a <= b")

    @property
    def size(self):
        return self.b - self.a + 1

    def indices(self):
        return range(self.a, self.b + 1)


@dataclass(frozen=True)
class FiniteOperator:
    window: IndexWindow
    entries: np.ndarray
    left_bc: BoundaryCondition
    right_bc: BoundaryCondition
    unitary_flag: bool


@dataclass(frozen=True)
class GaugeDiagonal:
    window: IndexWindow
    phases: np.ndarray  # d_n for n in window, all unimodular

    def matrix(self):
        return np.diag(self.phases)


def theta_block(pair):
    """[[conj(alpha), rho], [conj(rho), -alpha]]."""
    a, r = pair.alpha, pair.rho
    return np.array([[np.conj(a), r], [np.conj(r), -a]], dtype=complex)


class _BCSource(CoefficientSource):
    """Source with boundary overrides alpha_{a-1} -> beta1, alpha_b -> beta2 (rho -> 0)."""

    def __init__(self, base, window, left_bc, right_bc):
        self.base = base
        self.window = window
        self.left_bc = left_bc
        self.right_bc = right_bc

    def pair(self, n):
        if n == self.window.a - 1 and self.left_bc.is_phase:
            return VerblunskyPair(self.left_bc.beta, 0.0)
        if n == self.window.b and self.right_bc.is_phase:
            return VerblunskyPair(self.right_bc.beta, 0.0)
        return self.base.pair(n)


def _lm_dense(block_at, lo, hi):
    """Dense L and M over index range [lo, hi]; blocks straddling the range are cut."""
    n = hi - lo + 1
    L = np.zeros((n, n), dtype=complex)
    M = np.zeros((n, n), dtype=complex)
    for j in range(lo - 1, hi + 1):
        blk = block_at(j)
        tgt = L if j % 2 == 0 else M
        for (r, c) in ((0, 0), (0, 1), (1, 0), (1, 1)):
            i, k = j + r - lo, j + c - lo
            if 0 <= i < n and 0 <= k < n:
                tgt[i, k] = blk[r, c]
    return L, M


def _crop(mat, lo, a, b):
    return mat[a - lo:b - lo + 1, a - lo:b - lo + 1].copy()


def _assemble_product(block_at, window):
    lo, hi = window.a - _PAD, window.b + _PAD
    L, M = _lm_dense(block_at, lo, hi)
    return _crop(L @ M, lo, window.a, window.b)


def assemble_finite(source, window, left_bc, right_bc):
    """Finite restriction chi_W L M chi_W* with boundary alpha-overrides."""
    if window.size < 2:
        raise WindowTooSmall("window must contain at least 2 indices")
    src = _BCSource(source, window, left_bc, right_bc)
    entries = _assemble_product(lambda j: theta_block(src.pair(j)), window)
    unitary = left_bc.is_phase and right_bc.is_phase
    return FiniteOperator(window, entries, left_bc, right_bc, unitary)


def lm_truncations(source, window, left_bc, right_bc):
    """(chi L chi*, chi M chi*) with boundary overrides; cut blocks keep diagonals."""
    src = _BCSource(source, window, left_bc, right_bc)
    lo, hi = window.a - 2, window.b + 2
    L, M = _lm_dense(lambda j: theta_block(src.pair(j)), lo, hi)
    return _crop(L, lo, window.a, window.b), _crop(M, lo, window.a, window.b)


def b_tridiagonal(source, window, left_bc, right_bc, z):
    """Diagonals (sub, main, super) of z (chi L chi*)^* - chi M chi* (a tridiagonal matrix)."""
    src = _BCSource(source, window, left_bc, right_bc)
    a, b = window.a, window.b
    n = window.size
    alpha = np.array([src.pair(j).alpha for j in range(a - 1, b + 1)], dtype=complex)
    rho = np.array([src.pair(j).rho for j in range(a - 1, b + 1)], dtype=complex)

    def al(j):
        return alpha[j - (a - 1)]

    def rh(j):
        return rho[j - (a - 1)]

    main = np.empty(n, dtype=complex)
    sup = np.empty(n - 1, dtype=complex)
    sub = np.empty(n - 1, dtype=complex)
    for j in range(a, b + 1):
        i = j - a
        if j % 2 == 0:
            main[i] = z * al(j) + al(j - 1)
        else:
            main[i] = -z * np.conj(al(j - 1)) - np.conj(al(j))
        if j < b:
            if j % 2 == 0:
                sup[i] = z * rh(j)
                sub[i] = z * np.conj(rh(j))
            else:
                sup[i] = -rh(j)
                sub[i] = -np.conj(rh(j))
    return sub, main, sup


def walk_matrix(params, window):
    """Split-step walk W = S_{lambda1} Q on the window (cell-aligned: a even, b odd)."""
    if window.a % 2 != 0 or window.b % 2 != 1:
        raise MisalignedWindow("walk window must start at an even and end at an odd index")
    lo, hi = window.a - _PAD, window.b + _PAD
    n = hi - lo + 1
    l1 = params.lambda1
    l1p = params.lambda1p
    S = np.zeros((n, n), dtype=complex)
    Q = np.zeros((n, n), dtype=complex)
    # basis order ..., delta_0^+, delta_0^-, delta_1^+, ...:
    # index 2m-1 <-> cell m spin +, index 2m <-> cell m spin -
    for idx in range(lo, hi + 1):
        if idx % 2:  # delta_m^+ -> l1 delta_{m+1}^+ + l1' delta_m^-
            if idx + 2 <= hi:
                S[idx + 2 - lo, idx - lo] = l1
            if idx + 1 <= hi:
                S[idx + 1 - lo, idx - lo] = l1p
        else:  # delta_m^- -> l1 delta_{m-1}^- - l1' delta_m^+
            if idx - 2 >= lo:
                S[idx - 2 - lo, idx - lo] = l1
            if idx - 1 >= lo:
                S[idx - 1 - lo, idx - lo] = -l1p
    for m in range((lo + 1) // 2, hi // 2 + 1):
        q = coin_at(params, m).entries
        for (r, c) in ((0, 0), (0, 1), (1, 0), (1, 1)):
            i, k = 2 * m - 1 + r - lo, 2 * m - 1 + c - lo
            if 0 <= i < n and 0 <= k < n:
                Q[i, k] = q[r, c]
    W = _crop(S @ Q, lo, window.a, window.b)
    return FiniteOperator(window, W, BoundaryCondition.open(), BoundaryCondition.open(), False)


def _check_phase(x, what):
    if abs(abs(x) - 1.0) > 1e-12:
        raise NonUnimodularInput(f"{what} must be unimodular, got modulus {abs(x)}")
    return complex(x)


def gauge_diagonal(xi, zeta, window, d0=1.0, dm1=None):
    """Diagonal D with D* E^xi D = E^zeta on the window interior.

    xi, zeta: maps n -> unimodular phase of rho_n for the two gauges.  The
    even/odd recursions transport the seeds d_0, d_{-1}; the default d_{-1}
    makes the alphas invariant under the conjugation (unit-seed choice).
    """
    def mu(n):
        return _check_phase(xi(n), "xi") * np.conj(_check_phase(zeta(n), "zeta"))

    d0 = _check_phase(d0, "d0")
    if dm1 is None:
        dm1 = mu(-1) * d0
    dm1 = _check_phase(dm1, "d_{-1}")

    d = {0: d0, -1: dm1}
    lo, hi = window.a, window.b
    # even lattice: d_{2n+2} = d_{2n} / (mu_{2n+1} mu_{2n})
    k = 0
    while k + 2 <= hi:
        d[k + 2] = d[k] / (mu(k + 1) * mu(k))
        k += 2
    k = 0
    while k - 2 >= lo:
        d[k - 2] = d[k] * mu(k - 1) * mu(k - 2)
        k -= 2
    # odd lattice: d_{2n+1} = d_{2n-1} / (mu_{2n-1} mu_{2n})
    k = -1
    while k + 2 <= hi:
        d[k + 2] = d[k] / (mu(k) * mu(k + 1))
        k += 2
    k = -1
    while k - 2 >= lo:
        d[k - 2] = d[k] * mu(k - 2) * mu(k - 1)
        k -= 2
    phases = np.array([d[n] for n in window.indices()], dtype=complex)
    return GaugeDiagonal(window, phases)


class SGECMVSource:
    """Blocks e^{i phase(n)} Theta(alpha_n, rho_n) with unit pairs (alpha, rho).

    The scalar phase makes -det of each block the unimodular number
    e^{2i phase(n)} instead of 1; the block stays unitary.
    """

    def __init__(self, base, phase):
        self.base = base
        self.phase = phase

    def unit_pair(self, n):
        return self.base.pair(n)

    def block(self, n):
        p = self.base.pair(n)
        if abs(p.norm2 - 1.0) > 1e-10:
            raise NormConditionViolated("block determinant is not unimodular")
        return np.exp(1j * self.phase(n)) * theta_block(p)


def assemble_sgecmv(sg_source, window):
    """Plain cut chi L M chi* of a phase-scaled block operator (no overrides)."""
    if window.size < 2:
        raise WindowTooSmall("window must contain at least 2 indices")
    entries = _assemble_product(sg_source.block, window)
    return FiniteOperator(window, entries, BoundaryCondition.open(),
                          BoundaryCondition.open(), True)


def sgecmv_gauge(sg_source, window, d0=1.0, dm1=None):
    """Gauge removing block phases and rho phases at once.

    Writes E' = D* L M D = (D* L C)(C* M D) with an auxiliary diagonal C and
    requires every conjugated 2x2 block to be a standard Theta(alpha~, |rho|)
    block.  That forces two phase-transport chains

        x_{n+1} = x_n e^{-i phi_n} conj(xi_n)      (x_0 = d_0)
        y_{n+1} = y_n e^{+i phi_n} conj(xi_n)      (y_{-1} = d_{-1})

    with xi_n = rho_n / |rho_n|, where x carries d on even / c on odd indices
    and y the other way around, and the uniform coefficient law
    alpha~_n = x_n conj(y_n) e^{-i phi_n} alpha_n, rho~_n = |rho_n|.

    Returns (D, source of (alpha~, |rho|)) with D* E D equal to the standard
    matrix of the returned coefficients on the cut-window interior.  The
    default d_{-1} makes the alphas invariant when all block phases vanish.
    """
    def xi(n):
        r = sg_source.unit_pair(n).rho
        if abs(r) < 1e-14:
            raise SingularRho(f"rho vanishes at index {n}")
        return r / abs(r)

    def ph(n):
        return sg_source.phase(n)

    d0 = _check_phase(d0, "d0")
    if dm1 is None:
        dm1 = xi(-1) * d0  # x_0 conj(y_0) = 1 at phase 0: alphas invariant
    dm1 = _check_phase(dm1, "d_{-1}")

    lo, hi = window.a - 6, window.b + 6
    x, y = {0: d0}, {-1: dm1}
    for k in range(0, hi + 1):
        x[k + 1] = x[k] * np.exp(-1j * ph(k)) * np.conj(xi(k))
    for k in range(0, lo - 1, -1):
        x[k - 1] = x[k] * np.exp(1j * ph(k - 1)) * xi(k - 1)
    for k in range(-1, hi + 1):
        y[k + 1] = y[k] * np.exp(1j * ph(k)) * np.conj(xi(k))
    for k in range(-1, lo - 1, -1):
        y[k - 1] = y[k] * np.exp(-1j * ph(k - 1)) * xi(k - 1)

    table = {}
    for n in range(lo, hi + 1):
        p = sg_source.unit_pair(n)
        na = x[n] * np.conj(y[n]) * np.exp(-1j * ph(n)) * p.alpha
        table[n] = (na, abs(p.rho))
    phases = np.array([x[n] if n % 2 == 0 else y[n] for n in window.indices()],
                      dtype=complex)
    return GaugeDiagonal(window, phases), ExplicitSource(table)


def reflect(op, k):
    """R_k E R_k with R_k: delta_n -> delta_{-n+2k+1}; window must be symmetric."""
    w = op.window
    if w.a + w.b != 2 * k + 1:
        raise AsymmetricWindow("window must be symmetric about k + 1/2")
    perm = np.array([(-n + 2 * k + 1) - w.a for n in w.indices()])
    e = op.entries[np.ix_(perm, perm)]
    return FiniteOperator(w, e, op.right_bc, op.left_bc, op.unitary_flag)


def reflection_symmetry_check(source, c, theta_grid, n_range=None):
    """Max defect of alpha_{-n+2c}(th) = conj(alpha_{n+2c}(-th)) and
    rho_{-n+2c}(th) = -conj(rho_{n+2c}(-th)) over the grid."""
    if n_range is None:
        n_range = range(-8, 9)
    two_c = int(round(2 * c))
    worst = 0.0
    for th in theta_grid:
        sp = source.with_theta(th)
        sm = source.with_theta(-th)
        for n in n_range:
            p_ref = sp.pair(-n + two_c)
            p_fwd = sm.pair(n + two_c)
            worst = max(worst,
                        abs(p_ref.alpha - np.conj(p_fwd.alpha)),
                        abs(p_ref.rho + np.conj(p_fwd.rho)))
    return worst


def recover_coefficients(op, reference=None):
    """Recover interior (alpha, rho) pairs from a finite matrix.

    The entries determine pairs only up to one global phase psi
    (alpha -> e^{i psi} alpha, even rho -> e^{i psi} rho, odd rho -> e^{-i psi} rho);
    the freedom is fixed by making rho at the reference even index positive real,
    or by matching `reference=(index, value)` for rho.
    """
    w = op.window
    e = op.entries

    def ent(i, j):
        return e[i - w.a, j - w.a]

    lo = w.a + 2 if w.a % 2 == 0 else w.a + 1  # first even interior index with row above
    hi = w.b - 3
    evens = [n for n in range(lo, hi + 1) if n % 2 == 0]
    if len(evens) < 3:
        raise RecoveryIllConditioned("window too small for recovery")

    ratio = {}  # alpha_n / rho_n (even) and conj(alpha_n)/rho_n (odd)
    for n in evens:
        den = ent(n + 1, n - 1)  # conj(rho_n rho_{n-1})
        if abs(den) < 1e-13:
            raise RecoveryIllConditioned(f"vanishing rho product near index {n}")
        ratio[n] = np.conj(ent(n, n - 1) / den)
        den2 = ent(n, n + 2)  # rho_{n+1} rho_n
        if abs(den2) < 1e-13:
            raise RecoveryIllConditioned(f"vanishing rho product near index {n}")
        ratio[n + 1] = ent(n, n + 1) / den2 * 1.0  # conj(alpha_{n+1})/rho_{n+1}

    mods = {n: 1.0 / math.sqrt(1.0 + abs(v) ** 2) for n, v in ratio.items()}

    # phase chain from consecutive products rho_{n+1} rho_n
    phases = {}
    n0 = evens[0]
    phases[n0] = 1.0
    idx = sorted(ratio)
    for n in idx:
        if n + 1 not in ratio or n not in phases:
            continue
        if n % 2 == 0:
            prod = ent(n, n + 2)  # rho_{n+1} rho_n
        else:
            prod = np.conj(ent(n + 2, n))  # rho_{n+1} rho_n from conj entry
        u = prod / (mods[n] * mods[n + 1]) / phases[n]
        phases[n + 1] = u / abs(u)

    # fix the global psi freedom
    if reference is None:
        psi = np.conj(phases[n0])
    else:
        ref_n, ref_val = reference
        want = ref_val / abs(ref_val)
        have = phases[ref_n]
        psi = want / have
        if ref_n % 2 == 1:
            psi = np.conj(psi)
    pairs = {}
    for n in sorted(ratio):
        if n not in phases:
            continue
        sgn = psi if n % 2 == 0 else np.conj(psi)
        rho_n = mods[n] * phases[n] * sgn
        if n % 2 == 0:
            alpha_n = ratio[n] * rho_n * 1.0
        else:
            alpha_n = np.conj(ratio[n] * rho_n)
        # alphas transform with psi on both parities
        pairs[n] = VerblunskyPair(alpha_n, rho_n)
    return pairs


def dump_matrix(op, fh):
    """Textual dump: header 'GECMV v1 n=<size>' then 'row col re im' per nonzero."""
    fh.write(f"GECMV v1 n={op.window.size}\n")
    n = op.window.size
    for i in range(n):
        for j in range(n):
            v = op.entries[i, j]
            if v != 0:
                fh.write(f"{i} {j} {v.real:.17g} {v.imag:.17g}\n")
