"""Hot loops for long renormalized 2x2 cocycle products."""

import cmath
import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True, parallel=True)
def szego_charpoly_grid(alphas, rhos, rho_b, beta1, beta2, ts, vals, logs):
    """Characteristic polynomial P at z = e^{it} for each t, via Szego products.

    alphas[j], rhos[j] are the coefficients at window offsets j = 0..m-1
    (lattice a..b-1), rho_b the modulus at the right boundary index; beta1,
    beta2 are the boundary alpha-overrides at a-1 and b.  Writes the scaled
    value to vals and its log-magnitude correction to logs, so the true value
    is vals[k] * exp(logs[k]).
    """
    m = alphas.shape[0]
    b2c = beta2.conjugate()
    for k in numba.prange(ts.shape[0]):
        z = cmath.exp(1j * ts[k])
        t00 = 1.0 + 0.0j
        t01 = 0.0 + 0.0j
        t10 = 0.0 + 0.0j
        t11 = 1.0 + 0.0j
        acc = 0.0
        for j in range(m):
            a = alphas[j]
            inv_r = 1.0 / rhos[j]
            s00 = z * inv_r
            s01 = -a.conjugate() * inv_r
            s10 = -a * z * inv_r
            s11 = inv_r
            g00 = s00 * t00 + s01 * t10
            g01 = s00 * t01 + s01 * t11
            g10 = s10 * t00 + s11 * t10
            g11 = s10 * t01 + s11 * t11
            nrm = (abs(g00.real) + abs(g00.imag) + abs(g01.real) + abs(g01.imag)
                   + abs(g10.real) + abs(g10.imag) + abs(g11.real) + abs(g11.imag))
            if nrm <= 0.0:
                nrm = 1e-300
            inv = 1.0 / nrm
            t00 = g00 * inv
            t01 = g01 * inv
            t10 = g10 * inv
            t11 = g11 * inv
            acc += math.log(nrm)
        p = (z * (t00 - t01 * beta1) - b2c * (t10 - t11 * beta1)) / rho_b
        vals[k] = p
        logs[k] = acc


@numba.njit(cache=True, nogil=True)
def four_step_orbit(l1, l2, z, theta0, eps, rot, n_steps, include_w, frame_out):
    """Renormalized product of the four-step quasi-periodic family.

    include_w: divide each step by l1^2 * sqrt(1 - l2^2 sin^2(2 pi zeta))
    (the normalized family); otherwise iterate the bare bracket matrix.
    Returns the accumulated log of the product norm; the unit-norm running
    frame is written to frame_out.
    """
    zi = 1.0 / z
    l1p2 = max(0.0, 1.0 - l1 * l1)
    l1p = math.sqrt(l1p2)
    f00 = 1.0 + 0.0j
    f01 = 0.0 + 0.0j
    f10 = 0.0 + 0.0j
    f11 = 1.0 + 0.0j
    th = theta0
    acc = 0.0
    zz = z * z
    zizi = zi * zi
    zpzi = z + zi
    for _ in range(n_steps):
        zeta = complex(th, eps)
        s = cmath.sin(2.0 * math.pi * zeta)
        m00 = l1p2 + zz + l1p * l2 * zpzi * s
        m01 = -l1p * (1.0 + zizi) - l2 * s * (z + l1p2 * zi)
        m10 = -l1p * (1.0 + zz) - l2 * s * (zi + l1p2 * z)
        m11 = l1p2 + zizi + l1p * l2 * zpzi * s
        if include_w:
            w = cmath.sqrt(1.0 - l2 * l2 * s * s)
            sc = 1.0 / (l1 * l1 * w)
            m00 *= sc
            m01 *= sc
            m10 *= sc
            m11 *= sc
        g00 = m00 * f00 + m01 * f10
        g01 = m00 * f01 + m01 * f11
        g10 = m10 * f00 + m11 * f10
        g11 = m10 * f01 + m11 * f11
        # operator 2-norm of [[g00, g01], [g10, g11]] in closed form
        fro = (g00.real * g00.real + g00.imag * g00.imag
               + g01.real * g01.real + g01.imag * g01.imag
               + g10.real * g10.real + g10.imag * g10.imag
               + g11.real * g11.real + g11.imag * g11.imag)
        det = g00 * g11 - g01 * g10
        d2 = det.real * det.real + det.imag * det.imag
        disc = fro * fro - 4.0 * d2
        if disc < 0.0:
            disc = 0.0
        nrm = math.sqrt(0.5 * (fro + math.sqrt(disc)))
        if nrm <= 0.0:
            nrm = 1e-300
        inv = 1.0 / nrm
        f00 = g00 * inv
        f01 = g01 * inv
        f10 = g10 * inv
        f11 = g11 * inv
        acc += math.log(nrm)
        th = (th + rot) % 1.0
    frame_out[0, 0] = f00
    frame_out[0, 1] = f01
    frame_out[1, 0] = f10
    frame_out[1, 1] = f11
    return acc
