"""Coarse jump detection and spectral isolation of individual jumps.

Detection runs classical Prony on first-order moments of the top
coefficients and is accurate to O(1/M).  Isolation multiplies the
function by a smooth bump (in the Fourier domain: convolution of the
truncated sequences) so each jump can be treated as a one-jump problem.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import rootfind
from .errors import DetectionError, ModelError, NumericError
from .spectrum import FourierSpectrum, product_spectrum

__all__ = ["BumpSpec", "prony_order0", "make_bump", "localize_jump"]

# roots whose modulus strays this far from 1 do not represent jumps
_MODULUS_BAND = 0.5

_RANK_TOL = 1e-8


def prony_order0(
    spec: FourierSpectrum, K: int, tail: Optional[int] = None
) -> list:
    """Approximate all K jump locations from the top-index coefficients.

    Forms first-order moments 2 pi i k c_k on the `tail` highest indices
    (default max(2K+1, 4K)), solves the monic K-term annihilating
    polynomial in least squares over all Hankel rows, and reads jump
    locations off the root angles.  Locations return sorted ascending.
    """
    if K < 1:
        raise ModelError(f"detection needs K >= 1, got {K}")
    if tail is None:
        tail = max(2 * K + 1, 4 * K)
    if tail < 2 * K + 1:
        raise ModelError(f"tail={tail} below minimum 2K+1 = {2 * K + 1}")
    if tail > spec.M:
        raise ModelError(f"tail={tail} exceeds available top indices M={spec.M}")
    k0 = spec.M - tail + 1
    ks = np.arange(k0, spec.M + 1)
    y = 2.0 * np.pi * 1j * ks * spec.coeffs[k0 + spec.M : 2 * spec.M + 1]

    hankel = np.array([y[t : t + K + 1] for t in range(tail - K)])
    svals = np.linalg.svd(hankel, compute_uv=False)
    smax = float(svals[0]) if svals.size else 0.0
    rank = int(np.sum(svals > _RANK_TOL * max(smax, 1e-300)))
    if smax == 0.0 or rank < K:
        raise DetectionError(
            f"detection found numerical rank {min(rank, K)} < expected {K}",
            rank=min(rank, K),
            expected=K,
        )

    A = hankel[:, :K]
    b = -hankel[:, K]
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    coeffs = np.concatenate(([1.0 + 0.0j], p[::-1]))
    roots = rootfind.find_roots(coeffs)
    good = [r for r in roots if abs(abs(r) - 1.0) < _MODULUS_BAND]
    if len(good) < K:
        raise DetectionError(
            f"only {len(good)} of {K} detection roots sit near the unit circle",
            rank=len(good),
            expected=K,
        )
    # keep the K closest to the circle, then read angles
    good.sort(key=lambda r: abs(abs(r) - 1.0))
    locs = sorted(
        float(np.mod(-cmath.phase(r) + np.pi, 2.0 * np.pi) - np.pi) for r in good[:K]
    )
    return locs


@dataclass(frozen=True)
class BumpSpec:
    """Smooth window equal to 1 near its center and 0 away from it.

    Plateau [center - J/3, center + J/3], support [center - J, center + J]
    (circular), with a fixed 1/3 plateau fraction.  The window is a
    trigonometric polynomial, so profile and the truncated series are the
    same function; the plateau/support conditions hold up to the design
    sidelobe level reported by the constructor's gate.
    """

    center: float
    half_width: float
    spectrum: FourierSpectrum
    profile: Callable[[np.ndarray], np.ndarray]
    plateau_fraction: float = 1.0 / 3.0


def make_bump(
    center: float,
    J: float,
    M: int,
    plateau_tol: float = 1e-10,
    degree: Optional[int] = None,
) -> BumpSpec:
    """Build the window as a trigonometric polynomial (default degree M//4).

    The window is the indicator of half-width 2J/3 convolved with a
    concentrated kernel (Kaiser taper of the given degree) whose spatial
    mainlobe fits inside J/3.  Band-limiting means multiplying a
    length-M spectrum by this window is exact on indices up to
    M - degree, so no truncation leakage lands on the sample set; the
    plateau and support conditions hold to the kernel's sidelobe level,
    checked on a 4M-point grid against plateau_tol.  The default 1e-10
    needs enough degree budget (roughly M >= 150 at J = pi/2); pipeline
    callers working at small M or small degree pass a looser gate and
    absorb the defect into their own error budget.  Callers that sample
    low spectral indices keep the degree below the lowest sample so the
    window cannot fold the large low-index coefficients onto it.
    """
    if not 0.0 < J <= np.pi / 2.0:
        raise ModelError(f"bump half-width must be in (0, pi/2], got {J}")
    if M < 32:
        raise ModelError(f"bump synthesis needs M >= 32, got {M}")
    if plateau_tol <= 0:
        raise ModelError(f"plateau tolerance must be positive, got {plateau_tol}")

    inner = J / 3.0
    D = M // 4 if degree is None else int(degree)
    if not 1 <= D <= M:
        raise ModelError(f"window degree {D} must sit in [1, M={M}]")
    half_ind = 2.0 * J / 3.0
    # Kaiser shape parameter: put the kernel's first spatial null at the
    # transition half-width J/3; cap beta before I0 overflows (sidelobes
    # are far below machine precision by then)
    beta_sq = (inner * (D + 1)) ** 2 - np.pi**2
    beta = min(math.sqrt(beta_sq) if beta_sq > 0.0 else 0.0, 700.0)
    ks = np.arange(1, D + 1)
    taper = np.i0(beta * np.sqrt(1.0 - (ks / (D + 1)) ** 2)) / np.i0(beta)
    mag = np.sin(ks * half_ind) / (np.pi * ks) * taper

    coeffs = np.zeros(2 * M + 1, dtype=np.complex128)
    coeffs[M] = half_ind / np.pi
    phases = np.exp(-1j * ks * center)
    coeffs[M + 1 : M + D + 1] = mag * phases
    coeffs[M - D : M] = (mag * np.conj(phases))[::-1]
    spectrum = FourierSpectrum(M, coeffs, real_valued=True)

    def profile(xs, c=center, m=mag, kk=ks, c0=half_ind / np.pi):
        x = np.asarray(xs, dtype=float)
        scalar = x.ndim == 0
        vals = c0 + 2.0 * (np.cos(np.outer(np.atleast_1d(x) - c, kk)) @ m)
        return float(vals[0]) if scalar else vals

    P = 4 * M
    padded = np.zeros(P, dtype=np.complex128)
    ks = np.arange(-M, M + 1)
    padded[ks % P] = coeffs
    series = np.fft.ifft(padded) * P
    xs = 2.0 * np.pi * np.arange(P) / P
    u = np.abs(np.mod(xs - center + np.pi, 2.0 * np.pi) - np.pi)
    plateau = u <= inner
    outside = u >= J
    defect_in = float(np.max(np.abs(series[plateau] - 1.0))) if plateau.any() else 0.0
    defect_out = float(np.max(np.abs(series[outside]))) if outside.any() else 0.0
    if max(defect_in, defect_out) > plateau_tol:
        raise NumericError(
            f"window too narrow for M={M}: truncated series misses the "
            f"plateau/support conditions by {max(defect_in, defect_out):.3e}"
        )
    return BumpSpec(float(center), float(J), spectrum, profile)


def localize_jump(spec: FourierSpectrum, bump: BumpSpec) -> FourierSpectrum:
    """Coefficients of the windowed function, full index range -M..M.

    Exact convolution of the two truncated sequences; the top index band
    inherits truncation error from the input's unseen tail, which is why
    downstream sampling plans stay away from it.
    """
    return product_spectrum(spec, bump.spectrum, spec.M)
