"""Characteristic polynomials, truncation spectra, and Green's functions."""

import cmath
import math

import numpy as np
import pytest

from gecmv import (BoundaryCondition, ConstantSource, IndexWindow,
                   MosaicParams, MosaicSource, RealifiedSource, TwinSource,
                   assemble_finite, char_poly, char_poly_evenness,
                   eigenvector_shooting, greens_function, regularity_test,
                   rho_product_rate, truncation_spectrum)
from gecmv.lyapunov import gamma_tilde
from gecmv.spectral import spectrum_dense
from gecmv.errors import (NearEigenvalue, NonUnimodularInput, NotAnEigenvalue,
                          SingularRho, WindowTooSmall)

BC1 = BoundaryCondition.phase(1.0 + 0.0j)
P = MosaicParams(0.6, 0.8, theta=0.13)


def test_char_poly_matches_dense_determinant_all_boundaries():
    rng = np.random.default_rng(4)
    src = MosaicSource(P)
    kinds = (BC1, BoundaryCondition.phase(cmath.exp(0.7j)),
             BoundaryCondition.open())
    for lbc in kinds:
        for rbc in kinds:
            for _ in range(5):
                a = int(rng.integers(-6, 6))
                w = IndexWindow(a, a + int(rng.integers(2, 11)))
                z = cmath.exp(2j * math.pi * rng.random())
                cp = char_poly(src, w, lbc, rbc, z)
                op = assemble_finite(src, w, lbc, rbc)
                det = complex(np.linalg.det(z * np.eye(w.size) - op.entries))
                assert abs(cp.raw_det - det) < 1e-10 * max(abs(det), 1e-6)
                rho_prod = np.prod([abs(src.rho(j)) for j in w.indices()])
                assert cp.normalized * rho_prod == pytest.approx(cp.raw_det)


def test_char_poly_is_gauge_invariant():
    # sources differing only in rho phases share the normalized polynomial
    w = IndexWindow(0, 11)
    z = cmath.exp(1.7j)
    vals = [char_poly(src, w, BC1, BC1, z).normalized
            for src in (MosaicSource(P), TwinSource(P),
                        RealifiedSource(MosaicSource(P)))]
    assert abs(vals[0] - vals[1]) < 1e-10 * abs(vals[0])
    assert abs(vals[0] - vals[2]) < 1e-10 * abs(vals[0])


def test_char_poly_rejects_vanishing_rho():
    with pytest.raises(SingularRho):
        char_poly(ConstantSource(1.0, 0.0), IndexWindow(0, 3), BC1, BC1, 1.0)
    with pytest.raises(ValueError):
        char_poly(MosaicSource(P), IndexWindow(0, 3), BC1, BC1, 0.0)


def test_truncation_spectrum_matches_dense_oracle():
    for n, params in ((32, P), (64, MosaicParams(0.7, 0.7))):
        src = MosaicSource(params)
        w = IndexWindow(0, n - 1)
        res = truncation_spectrum(src, w, 1.0 + 0.0j, cmath.exp(0.4j))
        assert res.count == n and res.angles.size == n
        op = assemble_finite(src, w, BC1, BoundaryCondition.phase(cmath.exp(0.4j)))
        assert np.abs(res.angles - spectrum_dense(op)).max() < 1e-9
        assert res.residual < 1e-6


def test_truncation_spectrum_validation():
    with pytest.raises(NonUnimodularInput):
        truncation_spectrum(MosaicSource(P), IndexWindow(0, 15), 0.5 + 0.0j,
                            1.0 + 0.0j)
    with pytest.raises(WindowTooSmall):
        truncation_spectrum(MosaicSource(P), IndexWindow(0, 0), 1.0 + 0.0j,
                            1.0 + 0.0j)


def test_clustered_spectrum_dense_fallback():
    # strong localization splits eigenvalue clusters by sub-machine gaps;
    # the dense route must still return all angles
    src = MosaicSource(MosaicParams(0.5, 0.95))
    w = IndexWindow(0, 255)
    res = truncation_spectrum(src, w, 1.0 + 0.0j, 1.0 + 0.0j)
    assert res.count == 256
    op = assemble_finite(src, w, BC1, BC1)
    assert np.abs(res.angles - spectrum_dense(op)).max() < 1e-6


def test_greens_function_quotient_identity():
    src = MosaicSource(P)
    w = IndexWindow(0, 63)
    z = cmath.exp(0.9j)
    for (x, y) in ((10, 40), (40, 10), (5, 5), (0, 63)):
        g, defect = greens_function(src, w, 1.0 + 0.0j, 1.0 + 0.0j, z, x, y)
        assert defect < 1e-8
    with pytest.raises(ValueError):
        greens_function(src, w, 1.0 + 0.0j, 1.0 + 0.0j, z, -1, 10)


def test_greens_function_near_eigenvalue_guard():
    src = MosaicSource(P)
    w = IndexWindow(0, 63)
    ang = truncation_spectrum(src, w, 1.0 + 0.0j, 1.0 + 0.0j).angles[5]
    with pytest.raises(NearEigenvalue):
        greens_function(src, w, 1.0 + 0.0j, 1.0 + 0.0j, cmath.exp(1j * ang),
                        10, 40)


def test_eigenvector_shooting():
    src = MosaicSource(P)
    w = IndexWindow(0, 127)
    angles = truncation_spectrum(src, w, 1.0 + 0.0j, 1.0 + 0.0j).angles
    bc = (BC1, BC1)
    op = assemble_finite(src, w, BC1, BC1)
    for t in angles[::16]:
        prof = eigenvector_shooting(src, w, float(t), bc)
        assert prof.residual < 1e-6
        assert np.linalg.norm(prof.values) == pytest.approx(1.0)
        # genuine eigenvector of the truncation
        img = op.entries @ prof.values
        assert np.linalg.norm(img - cmath.exp(1j * float(t)) * prof.values) < 1e-5
    # midpoint between eigenvalues is not an eigenvalue
    bad = 0.5 * float(angles[3] + angles[4])
    with pytest.raises(NotAnEigenvalue):
        eigenvector_shooting(src, w, bad, bc)


def test_rho_product_rate_paths_agree():
    n = 4096
    fast = rho_product_rate(MosaicSource(P), n)
    generic = rho_product_rate(
        ConstantSourceLike(MosaicSource(P)), n)
    assert fast == pytest.approx(generic, abs=1e-12)
    assert rho_product_rate(MosaicSource(P), 100_000) == pytest.approx(
        gamma_tilde(P.lambda1, P.lambda2) / 4.0, abs=1e-3)
    with pytest.raises(ValueError):
        rho_product_rate(MosaicSource(P), 2)


class ConstantSourceLike:
    """Wrapper hiding the mosaic type to force the generic code path."""

    def __init__(self, base):
        self._base = base

    def pair(self, n):
        return self._base.pair(n)

    def rho(self, n):
        return self._base.rho(n)

    def alpha(self, n):
        return self._base.alpha(n)


def test_determinant_evenness_recentred():
    grid = [0.05 * k + 0.011 for k in range(8)]
    for k in (2, 3):
        assert char_poly_evenness(P, k, cmath.exp(0.7j), grid) < 1e-10


def test_determinant_evenness_symmetric_window():
    # quarter-shifted twin coefficients with conjugate boundary phases give a
    # determinant even in theta on windows symmetric about -1/2
    z = cmath.exp(0.9j)
    for n in (4, 8):
        w = IndexWindow(-n, n - 1)
        b1 = cmath.exp(0.3j)
        lbc = BoundaryCondition.phase(b1)
        rbc = BoundaryCondition.phase(b1.conjugate())
        for th in (0.013, 0.11, 0.27):
            d = [char_poly(TwinSource(P.with_theta(s + 0.25)), w, lbc, rbc,
                           z).raw_det for s in (th, -th)]
            assert abs(d[0] - d[1]) < 1e-10


def test_regularity_validation():
    bc = (BC1, BC1)
    with pytest.raises(ValueError):
        regularity_test(MosaicSource(P), cmath.exp(0.3j), 50, 0.1, 10, bc)
    # accepts raw boundary phases as well as BoundaryCondition values
    res = regularity_test(MosaicSource(P), cmath.exp(0.3j), 50, 0.05, 20,
                          (1.0 + 0.0j, 1.0 + 0.0j))
    assert res.interval is not None
