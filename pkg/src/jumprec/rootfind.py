"""Deterministic simultaneous polynomial root finding.

Aberth-Ehrlich iteration from a fixed initial circle (no randomness, so
repeated runs agree bitwise), followed by a short Newton polish and a
residual acceptance gate.  Coefficients are given in descending powers,
matching numpy.roots.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import RootFindError

__all__ = ["find_roots", "find_roots_mp"]

# fixed angular offset of the initial circle; breaks conjugate symmetry
# so symmetric polynomials cannot trap the iteration
_ANGLE_OFFSET = 0.7390851332151607

_RESIDUAL_FACTOR = 1e-11


def _eval_with_scale(coeffs: np.ndarray, z: complex):
    acc = coeffs[0]
    scale = abs(coeffs[0])
    az = abs(z)
    for c in coeffs[1:]:
        acc = acc * z + c
        scale = scale * az + abs(c)
    return acc, scale


def find_roots(
    coeffs,
    max_iter: int = 500,
    newton_steps: int = 3,
    residual_factor: float = _RESIDUAL_FACTOR,
) -> np.ndarray:
    """All complex roots of the polynomial with the given coefficients.

    Raises RootFindError for degenerate input (degree < 1 or vanishing
    leading coefficient) and when the residual gate fails after the
    iteration budget.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or c.size < 2:
        raise RootFindError(f"need a polynomial of degree >= 1, got {c.size} coefficients")
    cmax = float(np.max(np.abs(c)))
    if cmax == 0.0:
        raise RootFindError("zero polynomial")
    if abs(c[0]) < 1e-14 * cmax:
        raise RootFindError(
            f"vanishing leading coefficient ({abs(c[0]):.3e} vs scale {cmax:.3e})"
        )
    c = c / c[0]
    deg = c.size - 1
    if deg == 1:
        return np.array([-c[1]], dtype=np.complex128)

    dc = c[:-1] * np.arange(deg, 0, -1)

    radius = float(np.max(np.abs(c[1:]))) ** (1.0 / deg) if np.any(c[1:]) else 1.0
    radius = max(radius, 1e-8)
    angles = 2.0 * np.pi * np.arange(deg) / deg + _ANGLE_OFFSET
    z = radius * np.exp(1j * angles)

    for _ in range(max_iter):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        dp = np.where(np.abs(dp) < 1e-300, 1e-300, dp)
        w = p / dp
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        denom = 1.0 - w * inv.sum(axis=1)
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        corr = w / denom
        z = z - corr
        if np.max(np.abs(corr)) <= 1e-14 * (1.0 + np.max(np.abs(z))):
            break

    for _ in range(newton_steps):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        safe = np.abs(dp) > 1e-300
        step = np.zeros_like(z)
        step[safe] = p[safe] / dp[safe]
        # keep polish local: a Newton step that jumps far signals a
        # near-multiple root where polishing would hurt
        big = np.abs(step) > 1e-2 * (1.0 + np.abs(z))
        step[big] = 0.0
        z = z - step

    for zj in z:
        val, scale = _eval_with_scale(c, complex(zj))
        if abs(val) > residual_factor * max(scale, 1e-300):
            raise RootFindError(
                f"root finding did not converge: residual {abs(val):.3e} "
                f"at z={zj:.6g} exceeds gate {residual_factor:.1e} x scale {scale:.3e}"
            )
    order = np.lexsort((z.imag.round(10), z.real.round(10)))
    return z[order]


def find_roots_mp(coeffs, prec_dps: int, max_iter: int = 800):
    """Extended-precision variant of find_roots using mpmath numbers.

    coeffs is a sequence convertible to mpmath.mpc, descending powers;
    returns a list of mpmath.mpc roots in the same deterministic order.
    """
    import mpmath as mp

    with mp.workdps(prec_dps):
        c = [mp.mpc(x) for x in coeffs]
        if len(c) < 2:
            raise RootFindError("need a polynomial of degree >= 1")
        cmax = max(abs(x) for x in c)
        if cmax == 0:
            raise RootFindError("zero polynomial")
        if abs(c[0]) < mp.mpf(10) ** (-(prec_dps - 2)) * cmax:
            raise RootFindError("vanishing leading coefficient")
        lead = c[0]
        c = [x / lead for x in c]
        deg = len(c) - 1
        if deg == 1:
            return [-c[1]]
        dc = [c[i] * (deg - i) for i in range(deg)]

        radius = max(abs(x) for x in c[1:]) ** (mp.mpf(1) / deg)
        radius = max(radius, mp.mpf("1e-8"))
        z = [
            radius * mp.exp(1j * (2 * mp.pi * j / deg + _ANGLE_OFFSET))
            for j in range(deg)
        ]

        tol = mp.mpf(10) ** (-(prec_dps - 5))
        for _ in range(max_iter):
            moved = mp.mpf(0)
            for j in range(deg):
                p = mp.polyval(c, z[j])
                dp = mp.polyval(dc, z[j])
                if dp == 0:
                    dp = mp.mpf("1e-300")
                w = p / dp
                s = mp.mpc(0)
                for k in range(deg):
                    if k != j:
                        s += 1 / (z[j] - z[k])
                denom = 1 - w * s
                if denom == 0:
                    denom = mp.mpf("1e-300")
                corr = w / denom
                z[j] = z[j] - corr
                moved = max(moved, abs(corr))
            if moved <= tol * (1 + max(abs(x) for x in z)):
                break
        return z
