"""Forward model: piecewise-polynomial singular part plus smooth remainder.

The singular basis V_n(x; xi) is a scaled, periodized Bernoulli polynomial
whose n-th derivative jumps by exactly 1 at xi while all lower derivatives
stay continuous.  A jump model is a finite sum of such terms; its Fourier
coefficients have the closed form implemented in phi_fourier_coeff.  Smooth
remainders come from a small named catalog and are synthesized by periodic
trapezoid quadrature (spectrally accurate).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ModelError, NumericError
from .spectrum import FourierSpectrum, coeffs_of_function

__all__ = [
    "bernoulli_coefficients",
    "bernoulli_poly",
    "vn_eval",
    "JumpModel",
    "SmoothPart",
    "AprioriBounds",
    "phi_eval",
    "phi_fourier_coeff",
    "phi_coeff_array",
    "synth_spectrum",
    "smooth_catalog",
    "fitted_decay_constant",
    "adversarial_pair",
    "shift_jumps",
    "load_model",
    "save_model",
]

_TABLE_MAX = 32

# circular proximity below which a point counts as sitting on a jump
_JUMP_TOL = 1e-12


def _build_bernoulli_tables(nmax: int):
    # numbers B_0..B_nmax by the defining recurrence, exact rationals
    numbers = [Fraction(1)]
    for n in range(1, nmax + 1):
        acc = Fraction(0)
        for j in range(n):
            acc += math.comb(n + 1, j) * numbers[j]
        numbers.append(-acc / (n + 1))
    # polynomial coefficients, ascending powers: B_n(x) = sum_k C(n,k) B_k x^{n-k}
    polys = []
    for n in range(nmax + 1):
        coeffs = [Fraction(0)] * (n + 1)
        for k in range(n + 1):
            coeffs[n - k] += math.comb(n, k) * numbers[k]
        polys.append(tuple(coeffs))
    return tuple(numbers), tuple(polys)


_BERNOULLI_NUMBERS, _BERNOULLI_POLYS = _build_bernoulli_tables(_TABLE_MAX)
_BERNOULLI_POLYS_FLOAT = tuple(
    tuple(float(c) for c in poly) for poly in _BERNOULLI_POLYS
)


def bernoulli_coefficients(n: int):
    """Exact rational coefficients of B_n, ascending powers."""
    if not 0 <= n <= _TABLE_MAX:
        raise ModelError(f"Bernoulli table covers 0..{_TABLE_MAX}, got n={n}")
    return _BERNOULLI_POLYS[n]


def bernoulli_poly(n: int, x):
    """Evaluate the Bernoulli polynomial B_n at x (scalar or array)."""
    if not 0 <= n <= _TABLE_MAX:
        raise ModelError(f"Bernoulli table covers 0..{_TABLE_MAX}, got n={n}")
    coeffs = _BERNOULLI_POLYS_FLOAT[n]
    xs = np.asarray(x, dtype=float)
    acc = np.full_like(xs, coeffs[-1], dtype=float)
    for c in coeffs[-2::-1]:
        acc = acc * xs + c
    if np.ndim(x) == 0:
        return float(acc)
    return acc


def _vn_from_t(n: int, t):
    """V_n as a function of the wrapped phase t = ((x - xi)/2pi) mod 1."""
    scale = -((2.0 * np.pi) ** n) / math.factorial(n + 1)
    return scale * bernoulli_poly(n + 1, t)


def vn_eval(n: int, x, xi: float):
    """Evaluate V_n(x; xi), the order-n unit-jump basis element.

    2pi-periodic; right-continuous at the jump (x = xi gives the limit
    from above).  Vectorized over x.
    """
    if n < 0:
        raise ModelError(f"basis order must be >= 0, got {n}")
    if n + 1 > _TABLE_MAX:
        raise ModelError(f"basis order {n} beyond coefficient table")
    t = np.mod((np.asarray(x, dtype=float) - xi) / (2.0 * np.pi), 1.0)
    val = _vn_from_t(n, t)
    if np.ndim(x) == 0:
        return float(val)
    return val


def _circular_distance(x: float, y: float) -> float:
    d = abs(x - y) % (2.0 * np.pi)
    return min(d, 2.0 * np.pi - d)


@dataclass(frozen=True)
class JumpModel:
    """Jump locations and per-order magnitudes of the singular part.

    order d >= 0; each jump carries magnitudes a_0..a_d with a_0 != 0.
    Locations live in [-pi, pi), strictly increasing.  Magnitudes may be
    complex at the library level; the CLI catalog sticks to real models.
    """

    order: int
    jumps: tuple  # tuple of (xi, magnitudes tuple)

    def __post_init__(self):
        if self.order < 0:
            raise ModelError(f"model order must be >= 0, got {self.order}")
        norm = []
        for entry in self.jumps:
            xi, mags = entry
            xi = float(xi)
            if not -np.pi <= xi < np.pi:
                raise ModelError(f"jump location {xi} outside [-pi, pi)")
            mags = tuple(complex(a) for a in mags)
            if len(mags) != self.order + 1:
                raise ModelError(
                    f"jump at {xi} carries {len(mags)} magnitudes, "
                    f"expected d+1 = {self.order + 1}"
                )
            if mags[0] == 0:
                raise ModelError(f"jump at {xi} has vanishing lowest-order magnitude")
            norm.append((xi, mags))
        locs = [xi for xi, _ in norm]
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise ModelError(f"jump locations must be strictly increasing: {locs}")
        for i in range(len(locs)):
            for j in range(i + 1, len(locs)):
                if _circular_distance(locs[i], locs[j]) < _JUMP_TOL:
                    raise ModelError(f"jumps {locs[i]} and {locs[j]} coincide mod 2pi")
        object.__setattr__(self, "jumps", tuple(norm))

    @property
    def K(self) -> int:
        return len(self.jumps)

    @property
    def locations(self):
        return tuple(xi for xi, _ in self.jumps)

    @property
    def is_real(self) -> bool:
        return all(all(a.imag == 0.0 for a in mags) for _, mags in self.jumps)

    def magnitude_sum(self) -> float:
        return float(sum(abs(a) for _, mags in self.jumps for a in mags))

    def to_json_dict(self) -> dict:
        out = []
        for xi, mags in self.jumps:
            if all(a.imag == 0.0 for a in mags):
                a_rec = [float(a.real) for a in mags]
            else:
                a_rec = [[float(a.real), float(a.imag)] for a in mags]
            out.append({"xi": float(xi), "a": a_rec})
        return {"d": self.order, "jumps": out}

    @classmethod
    def from_json_dict(cls, data: dict) -> "JumpModel":
        try:
            d = int(data["d"])
            jumps = []
            for rec in data["jumps"]:
                xi = float(rec["xi"])
                mags = []
                for a in rec["a"]:
                    if isinstance(a, (list, tuple)):
                        mags.append(complex(a[0], a[1]))
                    else:
                        mags.append(complex(float(a)))
                jumps.append((xi, tuple(mags)))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ModelError(f"malformed model record: {exc}") from exc
        return cls(d, tuple(jumps))


@dataclass(frozen=True)
class SmoothPart:
    """Smooth remainder: an evaluator plus its declared coefficient decay.

    coeff_bound R promises |c_k| <= R * k^{-d-2} for the intended order d;
    None means "not declared" (measure with fitted_decay_constant instead).
    coeff_fn, when set, returns the exact coefficients c_{-M}..c_M and
    bypasses the quadrature fallback in synth_spectrum.
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    coeff_bound: Optional[float] = None
    coeff_fn: Optional[Callable[[int], np.ndarray]] = None

    def to_json_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


@dataclass(frozen=True)
class AprioriBounds:
    """Known-in-advance constants: separation, magnitude box, smooth decay."""

    J: float
    A: float
    B: float
    R: float

    def __post_init__(self):
        if self.J <= 0:
            raise ModelError(f"separation must be positive, got {self.J}")
        if self.B <= 0:
            raise ModelError(f"magnitude floor must be positive, got {self.B}")
        if self.B > self.A:
            raise ModelError(f"magnitude floor {self.B} exceeds ceiling {self.A}")
        if self.R < 0:
            raise ModelError(f"smooth decay constant must be >= 0, got {self.R}")


def phi_eval(model: JumpModel, x, side: Optional[str] = None):
    """Evaluate the piecewise polynomial at x (scalar or array).

    Points sitting exactly on a jump are ambiguous; pass side="left" or
    side="right" to pick the one-sided limit there.
    """
    if side not in (None, "left", "right"):
        raise ModelError(f"side must be left/right/None, got {side!r}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(xs.shape, dtype=np.complex128)
    for xi, mags in model.jumps:
        t = np.mod((xs - xi) / (2.0 * np.pi), 1.0)
        at_jump = np.minimum(t, 1.0 - t) * 2.0 * np.pi < _JUMP_TOL
        if np.any(at_jump):
            if side is None:
                raise ModelError(
                    f"evaluation at jump location {xi}: pass side='left' or 'right'"
                )
            t = t.copy()
            t[at_jump] = 0.0 if side == "right" else 1.0
        for ell, a in enumerate(mags):
            if a != 0:
                out += a * _vn_from_t(ell, t)
    if model.is_real:
        out = out.real
    if np.ndim(x) == 0:
        return out[0]
    return out


def phi_fourier_coeff(model: JumpModel, k: int) -> complex:
    """Closed-form Fourier coefficient of the piecewise polynomial.

    c_0 = 0 by the zero-mean convention of the basis; any DC offset
    belongs to the smooth part.
    """
    if k == 0:
        return 0.0 + 0.0j
    acc = 0.0 + 0.0j
    ik = 1j * k
    for xi, mags in model.jumps:
        inner = 0.0 + 0.0j
        w = 1.0 / ik
        for a in mags:
            inner += a * w
            w /= ik
        acc += np.exp(-ik * xi) * inner
    return complex(acc / (2.0 * np.pi))


def phi_coeff_array(model: JumpModel, M: int) -> np.ndarray:
    ks = np.arange(-M, M + 1)
    out = np.zeros(2 * M + 1, dtype=np.complex128)
    nz = ks != 0
    kz = ks[nz].astype(float)
    ik = 1j * kz
    inner = np.zeros(kz.shape, dtype=np.complex128)
    for xi, mags in model.jumps:
        inner[:] = 0.0
        w = 1.0 / ik
        for a in mags:
            inner += a * w
            w = w / ik
        out[nz] += np.exp(-ik * xi) * inner
    out /= 2.0 * np.pi
    return out


def synth_spectrum(
    model: JumpModel, smooth: Optional[SmoothPart], M: int
) -> FourierSpectrum:
    """First M coefficients of the model plus its smooth remainder.

    Requires M >= (d+2)K so downstream sampling plans are feasible.  Smooth
    coefficients come from trapezoid quadrature at 8M points with a
    convergence check against a refined grid.
    """
    if model.K > 0 and M < (model.order + 2) * model.K:
        raise ModelError(
            f"M={M} below (d+2)K = {(model.order + 2) * model.K} "
            f"for d={model.order}, K={model.K}"
        )
    if M < 1:
        raise ModelError(f"M must be >= 1, got {M}")
    coeffs = phi_coeff_array(model, M)
    if smooth is not None and smooth.coeff_fn is not None:
        coeffs = coeffs + np.asarray(smooth.coeff_fn(M), dtype=np.complex128)
    elif smooth is not None and smooth.name != "zero":
        c1 = coeffs_of_function(smooth.evaluator, M, oversample=8)
        c2 = coeffs_of_function(smooth.evaluator, M, oversample=16)
        scale = max(1.0, float(np.max(np.abs(c2))))
        defect = float(np.max(np.abs(c1 - c2)))
        if defect > 1e-9 * scale:
            raise NumericError(
                f"smooth-part quadrature not converged: refinement moved "
                f"coefficients by {defect:.3e}"
            )
        coeffs = coeffs + c2
    return FourierSpectrum(M, coeffs, real_valued=model.is_real)


def _v_coeff_abs(order: int) -> float:
    # |c_k(V_order)| = (1/2pi) |k|^{-order-1}
    return 1.0 / (2.0 * np.pi)


def smooth_catalog(name: str, **params) -> SmoothPart:
    """Built-in smooth remainders selected by name.

    zero: identically zero.
    sin: amp * sin(freq x + phase).
    expsin: exp(amp sin x) minus its mean (coefficients decay faster than
        any power).
    poly-blend: amp * V_n(x; center), a one-higher-order polynomial blend
        whose coefficients decay like |k|^{-n-1} exactly.
    """
    if name == "zero":
        return SmoothPart("zero", lambda xs: np.zeros_like(np.asarray(xs, float)), {}, 0.0)
    if name == "sin":
        amp = float(params.pop("amp", 1.0))
        freq = int(params.pop("freq", 1))
        phase = float(params.pop("phase", 0.0))
        if params:
            raise ModelError(f"unknown sin parameters: {sorted(params)}")
        if freq < 1:
            raise ModelError(f"sin frequency must be >= 1, got {freq}")
        def sin_coeffs(M, A=amp, w=freq, p=phase):
            out = np.zeros(2 * M + 1, dtype=np.complex128)
            if w <= M:
                out[M + w] = A * cmath.exp(1j * p) / 2j
                out[M - w] = -A * cmath.exp(-1j * p) / 2j
            return out

        return SmoothPart(
            "sin",
            lambda xs, A=amp, w=freq, p=phase: A * np.sin(w * np.asarray(xs, float) + p),
            {"amp": amp, "freq": freq, "phase": phase},
            abs(amp) / 2.0 if freq == 1 else None,
            sin_coeffs,
        )
    if name == "expsin":
        amp = float(params.pop("amp", 1.0))
        if params:
            raise ModelError(f"unknown expsin parameters: {sorted(params)}")
        mean = float(np.i0(amp))
        return SmoothPart(
            "expsin",
            lambda xs, A=amp, m=mean: np.exp(A * np.sin(np.asarray(xs, float))) - m,
            {"amp": amp},
            None,
        )
    if name == "poly-blend":
        order = params.pop("order", None)
        if order is None:
            raise ModelError("poly-blend requires an 'order' parameter")
        order = int(order)
        center = float(params.pop("center", 0.0))
        amp = float(params.pop("amp", 1.0))
        if params:
            raise ModelError(f"unknown poly-blend parameters: {sorted(params)}")
        if not 1 <= order <= _TABLE_MAX - 1:
            raise ModelError(f"poly-blend order must be in 1..{_TABLE_MAX - 1}")
        def blend_coeffs(M, n=order, c=center, A=amp):
            ks = np.arange(-M, M + 1)
            out = np.zeros(2 * M + 1, dtype=np.complex128)
            nz = ks != 0
            ik = 1j * ks[nz].astype(float)
            out[nz] = A / (2.0 * np.pi) * ik ** (-n - 1) * np.exp(-ik * c)
            return out

        return SmoothPart(
            "poly-blend",
            lambda xs, n=order, c=center, A=amp: A * vn_eval(n, np.asarray(xs, float), c),
            {"order": order, "center": center, "amp": amp},
            abs(amp) * _v_coeff_abs(order),
            blend_coeffs,
        )
    raise ModelError(f"unknown smooth-part name {name!r}")


def fitted_decay_constant(spectrum: FourierSpectrum, exponent: int) -> float:
    """Smallest R with |c_k| <= R k^{-exponent} over 1 <= k <= M."""
    ks = np.arange(1, spectrum.M + 1, dtype=float)
    vals = np.abs(spectrum.coeffs[spectrum.M + 1 :])
    return float(np.max(vals * ks**exponent))


def shift_jumps(model: JumpModel, delta: float) -> JumpModel:
    """Translate every jump by delta, wrapping back into [-pi, pi)."""
    moved = []
    for xi, mags in model.jumps:
        xi_new = float(np.mod(xi + delta + np.pi, 2.0 * np.pi) - np.pi)
        moved.append((xi_new, mags))
    moved.sort(key=lambda item: item[0])
    return JumpModel(model.order, tuple(moved))


def adversarial_pair(model: JumpModel, M: int, bounds: AprioriBounds):
    """Two admissible functions sharing all coefficients |k| <= M.

    Returns (g, h, delta): g is the spectrum of the given piecewise
    polynomial, h is the spectrum of the same model with every jump moved
    by delta = (2pi R / A) M^{-d-2} plus a smooth correction whose
    coefficients b_k cancel the difference exactly on |k| <= M and stay
    inside the class decay budget.  Any recovery consuming only these
    coefficients treats g and h identically while their jump sets differ
    by delta.
    """
    if model.magnitude_sum() >= bounds.A:
        raise ModelError(
            f"model magnitude sum {model.magnitude_sum():.6g} must stay "
            f"below A={bounds.A} for the ceiling construction"
        )
    if M < 1:
        raise ModelError(f"M must be >= 1, got {M}")
    delta = (2.0 * np.pi * bounds.R / bounds.A) * float(M) ** (-(model.order + 2))
    g = synth_spectrum(model, None, M)
    # h's truncated spectrum coincides with g's by construction: the
    # correction b_k = c_k(Phi) - c_k(Phi_shifted) is folded in exactly.
    h = FourierSpectrum(M, g.coeffs.copy(), g.real_valued)
    return g, h, float(delta)


def load_model(path) -> JumpModel:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return JumpModel.from_json_dict(data)


def save_model(path, model: JumpModel) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json_dict(), fh)
        fh.write("\n")
