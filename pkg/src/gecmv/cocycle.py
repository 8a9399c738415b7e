"""2x2 cocycle families of the mosaic model.

Families (all driven by the rotation theta -> theta + 2 phi per cycle):

* TransferA      -- one-step transfer matrices, cycle (A_{l1,l2,z}, A_{l1,0,z})
* TransferAPlus  -- the combined two-step map A_{l1,0,z} A_{l1,l2,z}
* Szego          -- normalized SU(1,1) maps, cycle of four lattice steps
* SzegoPP        -- the combined four-step Szego map (explicit closed form)
* Mz             -- the bracket matrix of SzegoPP without its scalar prefactor

The "realified" variant replaces every rho by |rho|; under phase
complexification the analytic continuation of |rho| at the quasi-periodic
index is w(zeta) = sqrt(1 - lambda2^2 sin^2(2 pi zeta)), not the continued
modulus.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import four_step_orbit
from .errors import SingularRho, StripExceeded
from .model import MosaicParams, RealifiedSource

FAMILIES = ("TransferA", "TransferAPlus", "Szego", "SzegoPP", "Mz")
_CYCLE = {"TransferA": 2, "TransferAPlus": 1, "Szego": 4, "SzegoPP": 1, "Mz": 1}

_TWOPI = 2.0 * math.pi


def epsilon0(t):
    """Analyticity radius of sqrt(1 - t^2 sin^2(2 pi .)): asinh(t'/t)/(2 pi)."""
    if t <= 0.0:
        return math.inf
    if t >= 1.0:
        return 0.0
    return math.asinh(math.sqrt(1.0 - t * t) / t) / _TWOPI


@dataclass(frozen=True)
class CocycleSpec:
    family: str
    params: MosaicParams
    z: complex
    epsilon: float = 0.0
    variant: str = "realified"  # 'realified' | 'complex' prefactor for TransferA(.Plus)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family}")
        if abs(abs(self.z) - 1.0) > 1e-12:
            raise ValueError("spectral parameter must lie on the unit circle")
        if self.variant not in ("realified", "complex"):
            raise ValueError("variant must be 'realified' or 'complex'")
        if self._needs_strip() and abs(self.epsilon) >= epsilon0(self.params.lambda2):
            raise StripExceeded("epsilon outside the analyticity strip of w")

    def _needs_strip(self):
        if self.epsilon == 0.0:
            return False
        if self.family == "Mz":
            return False
        if self.family in ("TransferA", "TransferAPlus") and self.variant == "complex":
            return False
        return True

    @property
    def cycle_length(self):
        return _CYCLE[self.family]


@dataclass
class OrbitProduct:
    log_norm: float
    frame: np.ndarray
    steps: int

    @property
    def rate(self):
        return self.log_norm / self.steps


def op2norm(m):
    """Operator 2-norm of a 2x2 from its singular values, in closed form."""
    fro = abs(m[0, 0]) ** 2 + abs(m[0, 1]) ** 2 + abs(m[1, 0]) ** 2 + abs(m[1, 1]) ** 2
    d2 = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) ** 2
    disc = max(fro * fro - 4.0 * d2, 0.0)
    return math.sqrt(0.5 * (fro + math.sqrt(disc)))


def _w(params, zeta):
    s = cmath.sin(_TWOPI * zeta)
    return cmath.sqrt(1.0 - params.lambda2 ** 2 * s * s)


def _zhalf_inv(z):
    # principal branch with t in [0, 2 pi)
    t = cmath.phase(z) % _TWOPI
    return cmath.exp(-0.5j * t)


def transfer_a(params, z, zeta, quasi=True, realified=True):
    """One-step transfer map; quasi=False gives the lambda2=0 (odd-index) map."""
    l1, l2 = params.lambda1, params.lambda2
    l1p = params.lambda1p
    if l1 < 1e-14:
        raise SingularRho("lambda1 vanishes")
    if quasi:
        s = cmath.sin(_TWOPI * zeta)
        if realified:
            denom = _w(params, zeta)
        else:
            denom = l2 * cmath.cos(_TWOPI * zeta) - 1j * params.lambda2p
        if abs(denom) < 1e-14:
            raise SingularRho("rho vanishes at the sampled phase")
        m = np.array([[z ** -1 / l1 + 2.0 * l1p * l2 * s / l1 + l1p ** 2 * z / l1,
                       -l2 * s - l1p * z],
                      [-l2 * s - l1p * z, l1 * z]], dtype=complex)
        return m / denom
    m = np.array([[z ** -1 / l1 + l1p ** 2 * z / l1, -l1p * z],
                  [-l1p * z, l1 * z]], dtype=complex)
    if realified:
        return m  # prefactor 1/|rho| with |rho_odd| = 1
    return 1j * m


def transfer_from_source(source, n, z):
    """Generic transfer matrix mapping (u_{2n-1}, u_{2n-2}) to (u_{2n+1}, u_{2n})."""
    a2n, a2n1, a2n2 = source.alpha(2 * n), source.alpha(2 * n - 1), source.alpha(2 * n - 2)
    r2n, r2n1, r2n2 = source.rho(2 * n), source.rho(2 * n - 1), source.rho(2 * n - 2)
    den = r2n * r2n1
    if abs(den) < 1e-14:
        raise SingularRho(f"rho product vanishes near index {2 * n}")
    m = np.array([
        [1.0 / z + a2n * np.conj(a2n1) + a2n1 * np.conj(a2n2) + a2n * np.conj(a2n2) * z,
         -np.conj(r2n2) * a2n1 - np.conj(r2n2) * a2n * z],
        [-r2n * np.conj(a2n1) - r2n * np.conj(a2n2) * z,
         r2n * np.conj(r2n2) * z]], dtype=complex)
    return m / den


def szego_step(pair, z, normalized=True):
    """Szego map z^{-1/2}/|rho| [[z, -conj(alpha)], [-alpha z, 1]] (real |rho|)."""
    r = abs(pair.rho)
    if r < 1e-14:
        raise SingularRho("rho vanishes")
    a = pair.alpha
    m = np.array([[z, -np.conj(a)], [-a * z, 1.0]], dtype=complex) / r
    if normalized:
        m = _zhalf_inv(z) * m
    return m


def _szego_cycle_pair(params, zeta, j):
    """(alpha, |rho| analytically continued) at cycle offset j in {0,1,2,3}.

    Offsets correspond to lattice indices 4n-1, 4n, 4n+1, 4n+2 at cycle phase
    zeta; all alphas of the mosaic model are real-valued, so their analytic
    continuations are the same expressions at complex zeta.
    """
    if j == 0:
        s = cmath.sin(_TWOPI * zeta)
        return params.lambda2 * s, _w(params, zeta)
    if j in (1, 3):
        return params.lambda1p, params.lambda1
    return 0.0, 1.0


def _szego_map(params, z, zeta, j):
    a, r = _szego_cycle_pair(params, zeta, j)
    if abs(r) < 1e-14:
        raise SingularRho("rho vanishes at the sampled phase")
    m = np.array([[z, -a], [-a * z, 1.0]], dtype=complex) / r
    return _zhalf_inv(z) * m


def mz_matrix(params, z, zeta):
    """The bracket matrix of the combined four-step map."""
    l1p = params.lambda1p
    l2 = params.lambda2
    s = cmath.sin(_TWOPI * zeta)
    zi = 1.0 / z
    return np.array([
        [l1p ** 2 + z * z + l1p * l2 * (z + zi) * s,
         -l1p * (1.0 + zi * zi) - l2 * s * (z + l1p ** 2 * zi)],
        [-l1p * (1.0 + z * z) - l2 * s * (zi + l1p ** 2 * z),
         l1p ** 2 + zi * zi + l1p * l2 * (z + zi) * s]], dtype=complex)


def szegopp_map(params, z, zeta):
    l1 = params.lambda1
    if l1 < 1e-14:
        raise SingularRho("lambda1 vanishes")
    w = _w(params, zeta)
    if abs(w) < 1e-14:
        raise SingularRho("w vanishes at the sampled phase")
    return mz_matrix(params, z, zeta) / (l1 * l1 * w)


def eval_map(spec, theta, step=0):
    """Matrix of the family at cycle phase theta + i epsilon, cycle offset `step`."""
    p = spec.params
    zeta = complex(theta % 1.0, spec.epsilon)
    realified = spec.variant == "realified"
    fam = spec.family
    if fam == "TransferA":
        return transfer_a(p, spec.z, zeta, quasi=(step % 2 == 0), realified=realified)
    if fam == "TransferAPlus":
        return transfer_a(p, spec.z, zeta, quasi=False, realified=realified) \
            @ transfer_a(p, spec.z, zeta, quasi=True, realified=realified)
    if fam == "Szego":
        return _szego_map(p, spec.z, zeta, step % 4)
    if fam == "SzegoPP":
        return szegopp_map(p, spec.z, zeta)
    return mz_matrix(p, spec.z, zeta)


def conjugation_defect(params, z, theta, n):
    """Max-entry defect of A_{n,z} = R_{2n}^{-1} J S+_{n,z} J R_{2n-2} (realified)."""
    from .model import MosaicSource

    src = RealifiedSource(MosaicSource(params))

    def rmat(k):
        p = src.pair(k)
        return np.array([[1.0, 0.0], [-np.conj(p.alpha), abs(p.rho)]], dtype=complex)

    J = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    s_plus = szego_step(src.pair(2 * n), z) @ szego_step(src.pair(2 * n - 1), z)
    a = transfer_from_source(src, n, z)
    rhs = np.linalg.inv(rmat(2 * n)) @ J @ s_plus @ J @ rmat(2 * n - 2)
    return float(np.abs(a - rhs).max())


def orbit_log_norm(spec, theta0, n_steps):
    """Renormalized product of n_steps elementary maps starting at theta0.

    The cycle phase advances by 2 phi after each completed cycle; the running
    frame is divided by its norm every step, so the frame norm is identically
    1 and the accumulated log is exact.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    p = spec.params
    rot = (2.0 * p.phi) % 1.0
    if spec.family in ("SzegoPP", "Mz") and n_steps >= 512:
        frame = np.empty((2, 2), dtype=complex)
        acc = four_step_orbit(p.lambda1, p.lambda2, complex(spec.z),
                              theta0 % 1.0, spec.epsilon, rot, n_steps,
                              spec.family == "SzegoPP", frame)
        return OrbitProduct(acc, frame, n_steps)
    frame = np.eye(2, dtype=complex)
    acc = 0.0
    th = theta0 % 1.0
    cyc = spec.cycle_length
    for k in range(n_steps):
        m = eval_map(spec, th, step=k % cyc)
        frame = m @ frame
        nrm = op2norm(frame)
        frame /= nrm
        acc += math.log(nrm)
        if k % cyc == cyc - 1:
            th = (th + rot) % 1.0
    return OrbitProduct(acc, frame, n_steps)
