"""Finite matrix assembly, boundary conditions, gauges, and the walk form."""

import cmath
import io
import math

import numpy as np
import pytest

from gecmv import (BoundaryCondition, ConstantSource, FiniteOperator,
                   IndexWindow, MosaicParams, MosaicSource, PhasedSource,
                   RealifiedSource, SGECMVSource, TwinSource, assemble_finite,
                   assemble_sgecmv, b_tridiagonal, dump_matrix, gauge_diagonal,
                   lm_truncations, recover_coefficients, reflect,
                   reflection_symmetry_check, sgecmv_gauge, theta_block,
                   walk_matrix)
from gecmv.errors import (AsymmetricWindow, MisalignedWindow,
                          NonUnimodularInput, WindowTooSmall)

BC1 = BoundaryCondition.phase(1.0 + 0.0j)
P = MosaicParams(0.6, 0.8, theta=0.13)


def test_theta_block_unitary():
    assert np.allclose(theta_block(ConstantSource(0.0, 1.0).pair(0)),
                       [[0, 1], [1, 0]])
    assert np.allclose(theta_block(ConstantSource(1.0, 0.0).pair(0)),
                       [[1, 0], [0, -1]])
    blk = theta_block(MosaicSource(P).pair(3))
    assert np.abs(blk @ blk.conj().T - np.eye(2)).max() < 1e-14
    assert abs(np.linalg.det(blk) + 1.0) < 1e-14  # det = -(|a|^2 + |r|^2)


def test_phase_truncation_is_unitary_and_five_diagonal():
    for src in (MosaicSource(P), TwinSource(P), RealifiedSource(MosaicSource(P))):
        for (a, b) in ((0, 15), (-7, 8), (1, 12)):
            op = assemble_finite(src, IndexWindow(a, b), BC1,
                                 BoundaryCondition.phase(cmath.exp(0.4j)))
            e = op.entries
            assert op.unitary_flag
            assert np.abs(e @ e.conj().T - np.eye(b - a + 1)).max() < 1e-12
            assert np.abs(np.triu(e, 3)).max() == 0.0
            assert np.abs(np.tril(e, -3)).max() == 0.0


def test_open_truncation_is_contraction():
    op = assemble_finite(MosaicSource(P), IndexWindow(0, 5),
                         BoundaryCondition.open(), BoundaryCondition.open())
    assert not op.unitary_flag
    row_norms = (np.abs(op.entries) ** 2).sum(axis=1)
    assert np.all(row_norms <= 1.0 + 1e-12)
    assert row_norms.min() < 1.0 - 1e-6


def test_interior_entry_formula():
    src = MosaicSource(P)
    op = assemble_finite(src, IndexWindow(0, 15), BC1, BC1)
    for n in (2, 4, 6):  # diagonal at even interior index 2n
        want = -np.conj(src.alpha(2 * n)) * src.alpha(2 * n - 1)
        assert op.entries[2 * n, 2 * n] == pytest.approx(want)


def test_constant_transmission_spectrum():
    op = assemble_finite(ConstantSource(0.0, 1.0), IndexWindow(0, 3), BC1, BC1)
    ev = np.linalg.eigvals(op.entries)
    assert np.abs(np.abs(ev) - 1.0).max() < 1e-12
    assert ev.size == 4


def test_window_validation():
    with pytest.raises(WindowTooSmall):
        IndexWindow(3, 2)
    with pytest.raises(WindowTooSmall):
        assemble_finite(MosaicSource(P), IndexWindow(0, 0), BC1, BC1)
    with pytest.raises(NonUnimodularInput):
        BoundaryCondition.phase(0.5)


def test_b_tridiagonal_matches_dense_product():
    src = TwinSource(P)
    w = IndexWindow(-4, 11)
    z = cmath.exp(0.9j)
    L, M = lm_truncations(src, w, BC1, BoundaryCondition.phase(-1.0 + 0.0j))
    dense = z * L.conj().T - M
    sub, main, sup = b_tridiagonal(src, w, BC1,
                                   BoundaryCondition.phase(-1.0 + 0.0j), z)
    assert np.abs(np.diag(dense) - main).max() < 1e-14
    assert np.abs(np.diag(dense, 1) - sup).max() < 1e-14
    assert np.abs(np.diag(dense, -1) - sub).max() < 1e-14
    # off-tridiagonal part vanishes
    dense[np.arange(16), np.arange(16)] = 0
    dense[np.arange(15), np.arange(15) + 1] = 0
    dense[np.arange(15) + 1, np.arange(15)] = 0
    assert np.abs(dense).max() < 1e-14


def test_determinant_factorization():
    # det(z - E) = det(L_cut) det(z L_cut* - M_cut) for phase boundaries
    src = MosaicSource(P)
    w = IndexWindow(0, 11)
    z = cmath.exp(1.3j)
    op = assemble_finite(src, w, BC1, BC1)
    L, M = lm_truncations(src, w, BC1, BC1)
    lhs = np.linalg.det(z * np.eye(w.size) - op.entries)
    rhs = np.linalg.det(L) * np.linalg.det(z * L.conj().T - M)
    assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_walk_matches_cmv_interior():
    w = IndexWindow(0, 63)
    for theta in (0.0, 0.13, 0.71):
        p = MosaicParams(0.6, 0.8, theta=theta)
        W = walk_matrix(p, w).entries
        E = assemble_finite(MosaicSource(p), w, BC1, BC1).entries
        assert np.abs(W[2:-2, 2:-2] - E[2:-2, 2:-2]).max() == 0.0
    with pytest.raises(MisalignedWindow):
        walk_matrix(P, IndexWindow(1, 8))
    with pytest.raises(MisalignedWindow):
        walk_matrix(P, IndexWindow(0, 8))


def test_walk_degenerate_couplings():
    w = IndexWindow(0, 15)
    # full transmission: no spin-mixing terms from the shift
    W1 = walk_matrix(MosaicParams(1.0, 0.5, theta=0.2), w).entries
    assert np.abs(np.triu(W1, 3)).max() == 0.0
    assert np.abs(np.tril(W1, -3)).max() == 0.0
    # zero transmission: the walk acts within each two-site cell
    W0 = walk_matrix(MosaicParams(0.0, 0.5, theta=0.2), w).entries
    mask = np.zeros_like(W0, dtype=bool)
    mask[0, 0] = True  # half of the cut boundary cell
    for m in range(7):
        i = 2 * m + 1
        mask[i:i + 2, i:i + 2] = True
    mask[15, 15] = True
    assert np.abs(W0[~mask]).max() == 0.0


def test_gauge_conjugation_and_isospectrality():
    rng = np.random.default_rng(2)
    w = IndexWindow(0, 23)
    lo, hi = w.a - 6, w.b + 6
    t1 = np.exp(2j * math.pi * rng.random(hi - lo + 1))
    t2 = np.exp(2j * math.pi * rng.random(hi - lo + 1))
    xi = lambda n: t1[n - lo] if lo <= n <= hi else 1.0 + 0.0j
    zeta = lambda n: t2[n - lo] if lo <= n <= hi else 1.0 + 0.0j
    base = RealifiedSource(MosaicSource(P))
    op_xi = assemble_finite(PhasedSource(base, xi), w, BC1, BC1)
    op_zeta = assemble_finite(PhasedSource(base, zeta), w, BC1, BC1)
    d = gauge_diagonal(xi, zeta, w)
    assert np.abs(np.abs(d.phases) - 1.0).max() < 1e-12
    dm = d.matrix()
    defect = np.abs(dm.conj().T @ op_xi.entries @ dm - op_zeta.entries).max()
    assert defect < 1e-12
    s1 = np.sort(np.angle(np.linalg.eigvals(op_xi.entries)) % (2 * math.pi))
    s2 = np.sort(np.angle(np.linalg.eigvals(op_zeta.entries)) % (2 * math.pi))
    assert np.abs(s1 - s2).max() < 1e-10
    with pytest.raises(NonUnimodularInput):
        gauge_diagonal(lambda n: 0.5, zeta, w)


def test_gauge_to_real_fixes_alphas():
    # conjugating away the rho phases leaves the alphas untouched and the
    # recovered rhos positive real
    rng = np.random.default_rng(0)
    w = IndexWindow(0, 23)
    lo, hi = -8, 32
    tab = np.exp(2j * math.pi * rng.random(hi - lo + 1))
    xi = lambda n: tab[n - lo] if lo <= n <= hi else 1.0 + 0.0j
    base = RealifiedSource(MosaicSource(P))
    op_xi = assemble_finite(PhasedSource(base, xi), w, BC1, BC1)
    dm = gauge_diagonal(xi, lambda n: 1.0 + 0.0j, w).matrix()
    conj = dm.conj().T @ op_xi.entries @ dm
    pairs = recover_coefficients(FiniteOperator(w, conj, BC1, BC1, True))
    for n, pr in pairs.items():
        assert abs(pr.alpha - base.pair(n).alpha) < 1e-12
        assert abs(pr.rho - abs(base.pair(n).rho)) < 1e-12


def test_recover_coefficients_round_trip():
    w = IndexWindow(0, 63)
    for src in (MosaicSource(P), TwinSource(P)):
        op = assemble_finite(src, w, BC1, BC1)
        ref_n = 2
        pairs = recover_coefficients(op, reference=(ref_n, src.pair(ref_n).rho))
        assert len(pairs) >= 50
        for n, pr in pairs.items():
            assert abs(pr.alpha - src.pair(n).alpha) < 1e-12
            assert abs(pr.rho - src.pair(n).rho) < 1e-12


def test_sgecmv_gauge_standardizes_phase_scaled_blocks():
    rng = np.random.default_rng(5)
    w = IndexWindow(0, 9)
    for base in (MosaicSource(P), TwinSource(P)):
        phs = rng.normal(size=60) * 0.8
        ph = lambda n: float(phs[(n + 25) % 60])
        sg = SGECMVSource(base, ph)
        E = assemble_sgecmv(sg, w)
        D, newsrc = sgecmv_gauge(sg, w)
        dm = D.matrix()
        conj = dm.conj().T @ E.entries @ dm
        std = assemble_finite(newsrc, w, BoundaryCondition.open(),
                              BoundaryCondition.open()).entries
        assert np.abs(conj[2:-2, 2:-2] - std[2:-2, 2:-2]).max() < 1e-12
        for n in range(0, 10):
            pr = newsrc.pair(n)
            assert pr.rho == pytest.approx(abs(base.pair(n).rho))
            assert abs(pr.alpha) == pytest.approx(abs(base.pair(n).alpha))


def test_sgecmv_gauge_reduces_to_plain_gauge_at_zero_phase():
    sg = SGECMVSource(MosaicSource(P), lambda n: 0.0)
    _, newsrc = sgecmv_gauge(sg, IndexWindow(0, 9))
    src = MosaicSource(P)
    for n in range(-4, 14):
        assert newsrc.pair(n).alpha == pytest.approx(src.pair(n).alpha,
                                                     abs=1e-14)
        assert newsrc.pair(n).rho == pytest.approx(abs(src.pair(n).rho))


def test_reflect_involution_and_determinant():
    k = 3
    w = IndexWindow(2 * k + 1 - 9, 9)
    op = assemble_finite(MosaicSource(P), w, BC1,
                         BoundaryCondition.phase(-1.0 + 0.0j))
    r1 = reflect(op, k)
    assert np.abs(reflect(r1, k).entries - op.entries).max() == 0.0
    rng = np.random.default_rng(9)
    for _ in range(20):
        z = cmath.exp(2j * math.pi * rng.random())
        d1 = np.linalg.det(z * np.eye(w.size) - op.entries)
        d2 = np.linalg.det(z * np.eye(w.size) - r1.entries)
        assert abs(d1 - d2) < 1e-10 * max(abs(d1), 1.0)
    with pytest.raises(AsymmetricWindow):
        reflect(op, k + 1)


class _QuarterShifted:
    """Twin coefficients evaluated at theta + 1/4."""

    def __init__(self, params):
        self.params = params

    def with_theta(self, theta):
        return TwinSource(self.params.with_theta(theta + 0.25))


def test_reflection_symmetry_of_shifted_twin():
    grid = [0.05 * k + 0.013 for k in range(7)]
    assert reflection_symmetry_check(_QuarterShifted(P), -0.5, grid) < 1e-12
    # the un-twinned source lacks the symmetry
    assert reflection_symmetry_check(MosaicSource(P), -0.5, grid) > 0.1
    # constant coefficients: symmetric about any center of matching parity
    p0 = MosaicParams(0.6, 0.0)
    for c in (-1.5, -0.5, 0.5, 0.0, 1.0):
        class _Plain:
            def with_theta(self, theta, p=p0):
                return TwinSource(p.with_theta(theta))
        assert reflection_symmetry_check(_Plain(), c, grid) < 1e-12


def test_dump_matrix_format():
    op = assemble_finite(MosaicSource(P), IndexWindow(0, 5), BC1, BC1)
    buf = io.StringIO()
    dump_matrix(op, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "GECMV v1 n=6"
    rebuilt = np.zeros((6, 6), dtype=complex)
    for line in lines[1:]:
        i, j, re, im = line.split()
        rebuilt[int(i), int(j)] = float(re) + 1j * float(im)
    assert np.abs(rebuilt - op.entries).max() == 0.0
