"""Truncated Fourier data: containers, partial sums, weighted moments.

Conventions used throughout the package: coefficients c_k of a 2pi-periodic
function are indexed k = -M..M and stored in ascending order, so position
k + M holds c_k.  c_k = (1/2pi) * integral_0^{2pi} f(x) exp(-i k x) dx.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ModelError

__all__ = [
    "FourierSpectrum",
    "MomentSequence",
    "eval_partial_sum",
    "weight_moments",
    "product_spectrum",
    "coeffs_of_function",
    "load_spectrum",
    "save_spectrum",
]

# conjugate-symmetry certification tolerance for real_valued inputs
_SYMMETRY_TOL = 1e-14


@dataclass(frozen=True)
class FourierSpectrum:
    """Coefficients c_{-M}..c_M of a 2pi-periodic function.

    Parameters
    ----------
    M : int
        Truncation index, M >= 0.
    coeffs : numpy.ndarray
        Complex array of length 2M+1, ascending k.
    real_valued : bool
        Declares the underlying function real; enforced as conjugate
        symmetry c_{-k} == conj(c_k) up to 1e-14 relative to the scale.
    """

    M: int
    coeffs: np.ndarray
    real_valued: bool = False

    def __post_init__(self):
        if self.M < 0:
            raise ModelError(f"truncation index must be >= 0, got {self.M}")
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.ndim != 1 or arr.size != 2 * self.M + 1:
            raise ModelError(
                f"need 2M+1 = {2 * self.M + 1} coefficients, got shape {arr.shape}"
            )
        object.__setattr__(self, "coeffs", arr)
        if self.real_valued:
            scale = float(np.max(np.abs(arr))) or 1.0
            defect = float(np.max(np.abs(arr[::-1].conj() - arr)))
            if defect > _SYMMETRY_TOL * max(scale, 1.0):
                raise ModelError(
                    "real_valued spectrum breaks conjugate symmetry: "
                    f"defect {defect:.3e} at scale {scale:.3e}"
                )

    def coeff(self, k: int) -> complex:
        """Return c_k for -M <= k <= M."""
        if not -self.M <= k <= self.M:
            raise IndexError(f"coefficient index {k} outside [-{self.M}, {self.M}]")
        return complex(self.coeffs[k + self.M])

    def __getitem__(self, k: int) -> complex:
        return self.coeff(k)

    def truncated(self, M_new: int) -> "FourierSpectrum":
        """Restrict to |k| <= M_new (M_new <= M)."""
        if M_new > self.M:
            raise ModelError(f"cannot extend spectrum from M={self.M} to {M_new}")
        lo = self.M - M_new
        hi = self.M + M_new + 1
        return FourierSpectrum(M_new, self.coeffs[lo:hi].copy(), self.real_valued)

    def to_json_dict(self) -> dict:
        return {
            "M": self.M,
            "real_valued": self.real_valued,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "FourierSpectrum":
        try:
            M = int(data["M"])
            real_valued = bool(data["real_valued"])
            pairs = data["coeffs"]
            arr = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed spectrum record: {exc}") from exc
        return cls(M, arr, real_valued)


@dataclass(frozen=True)
class MomentSequence:
    """Weighted moments m_k at a strictly increasing set of positive indices."""

    order: int
    indices: tuple
    values: np.ndarray

    def __post_init__(self):
        if self.order < 0:
            raise ModelError(f"moment order must be >= 0, got {self.order}")
        idx = tuple(int(k) for k in self.indices)
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim != 1 or vals.size != len(idx):
            raise ModelError("moment indices and values disagree in length")
        if any(k <= 0 for k in idx):
            raise ModelError(f"moment indices must be positive, got {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ModelError(f"moment indices must be strictly increasing, got {idx}")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    def value_at(self, k: int) -> complex:
        try:
            pos = self.indices.index(k)
        except ValueError:
            raise ModelError(f"moment index {k} not in sequence {self.indices}")
        return complex(self.values[pos])


def eval_partial_sum(spectrum: FourierSpectrum, x) -> np.ndarray:
    """Evaluate sum_{|k|<=M} c_k exp(i k x) at the points x.

    Returns real values when the spectrum is declared real_valued, complex
    otherwise.  Accepts scalars or arrays.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ks = np.arange(-spectrum.M, spectrum.M + 1)
    # (npts, 2M+1) phase matrix; fine for the grid sizes used here
    out = np.exp(1j * np.outer(xs, ks)) @ spectrum.coeffs
    if spectrum.real_valued:
        out = out.real
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return out[0]
    return out


def weight_moments(
    spectrum: FourierSpectrum, order: int, indices: Iterable[int]
) -> MomentSequence:
    """Form m_k = 2pi (ik)^{order+1} c_k at the given positive indices."""
    idx = tuple(int(k) for k in indices)
    if order < 0:
        raise ModelError(f"moment order must be >= 0, got {order}")
    for k in idx:
        if k <= 0:
            raise ModelError(f"moment index {k} must be positive")
        if k > spectrum.M:
            raise ModelError(f"moment index {k} exceeds truncation M={spectrum.M}")
    vals = np.array(
        [2.0 * np.pi * (1j * k) ** (order + 1) * spectrum.coeff(k) for k in idx],
        dtype=np.complex128,
    )
    return MomentSequence(order, idx, vals)


def product_spectrum(
    a: FourierSpectrum, b: FourierSpectrum, out_M: int
) -> FourierSpectrum:
    """Coefficients of the pointwise product, truncated to |k| <= out_M.

    The discrete convolution c_k = sum_j a_j b_{k-j} is exact for the
    truncated sequences; out_M must not exceed a.M so every output index
    has its full set of contributing terms from the shorter factor.
    """
    if out_M > a.M:
        raise ModelError(f"requested out_M={out_M} exceeds first factor M={a.M}")
    if out_M < 0:
        raise ModelError(f"out_M must be >= 0, got {out_M}")
    full = np.convolve(a.coeffs, b.coeffs)
    center = a.M + b.M
    part = full[center - out_M : center + out_M + 1]
    return FourierSpectrum(out_M, part, a.real_valued and b.real_valued)


def coeffs_of_function(
    func: Callable[[np.ndarray], np.ndarray], M: int, oversample: int = 8
) -> np.ndarray:
    """Coefficients c_{-M}..c_M of a smooth 2pi-periodic function via FFT.

    Spectrally accurate for smooth integrands; oversample controls the
    alias guard (P = oversample * max(M,1) sample points, P > 2M required).
    """
    P = max(oversample * max(M, 1), 2 * M + 2)
    xs = 2.0 * np.pi * np.arange(P) / P
    samples = np.asarray(func(xs), dtype=np.complex128)
    hat = np.fft.fft(samples) / P
    out = np.empty(2 * M + 1, dtype=np.complex128)
    for k in range(-M, M + 1):
        out[k + M] = hat[k % P]
    return out


def load_spectrum(path) -> FourierSpectrum:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return FourierSpectrum.from_json_dict(data)


def save_spectrum(path, spectrum: FourierSpectrum) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spectrum.to_json_dict(), fh)
        fh.write("\n")
