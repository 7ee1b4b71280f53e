"""Algebraic recovery of a single jump from weighted moments.

Pipeline: pick a sampling plan (decimated or consecutive), build the
finite-difference annihilating polynomial, find its roots, pick the one
near the unit circle, undo the N-th power with a prior, then solve the
small Vandermonde system for the weighted magnitudes.  The s_i^d family
used in the analysis of the decimated construction lives here too.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import rootfind
from .errors import AmbiguityError, ModelError, NumericError, WeakJumpWarning
from .spectrum import FourierSpectrum, MomentSequence, weight_moments

__all__ = [
    "SamplePlan",
    "AnnihilatorPoly",
    "JumpEstimate",
    "s_poly",
    "build_annihilator",
    "find_roots",
    "select_root",
    "disambiguate_nth_root",
    "solve_magnitudes",
    "recover_single_jump",
    "half_order_recover",
    "synth_moments",
    "alpha_to_magnitudes",
    "magnitudes_to_alpha",
]

_S_POLY_DMAX = 16


@dataclass(frozen=True)
class SamplePlan:
    """Which moment indices feed the annihilator.

    decimated: {N, 2N, ..., (d+2)N} with N = floor(M/(d+2));
    consecutive: {M-d-1, ..., M}.  Both contain exactly d+2 indices.
    """

    kind: str
    d: int
    M: int

    def __post_init__(self):
        if self.kind not in ("decimated", "consecutive"):
            raise ModelError(f"unknown plan kind {self.kind!r}")
        if self.d < 0:
            raise ModelError(f"plan order must be >= 0, got {self.d}")
        if self.M < self.d + 2:
            raise ModelError(
                f"M={self.M} cannot host d+2 = {self.d + 2} sample indices"
            )
        if self.kind == "consecutive" and self.M - self.d - 1 < 1:
            raise ModelError(f"consecutive plan needs M >= d+2, got M={self.M}")

    @property
    def stride(self) -> int:
        return self.M // (self.d + 2) if self.kind == "decimated" else 1

    @property
    def base_index(self) -> int:
        if self.kind == "decimated":
            return self.M // (self.d + 2)
        return self.M - self.d - 1

    @property
    def indices(self) -> tuple:
        s, b = self.stride, self.base_index
        return tuple(b + j * s for j in range(self.d + 2))


@dataclass(frozen=True)
class AnnihilatorPoly:
    """Finite-difference polynomial in u; descending coefficients.

    The leading coefficient is the j = 0 moment (binomial weight +1).
    """

    degree: int
    coefficients: np.ndarray
    stride: int
    base_index: int

    def __post_init__(self):
        arr = np.asarray(self.coefficients, dtype=np.complex128)
        if arr.ndim != 1 or arr.size != self.degree + 1:
            raise ModelError(
                f"degree {self.degree} needs {self.degree + 1} coefficients, "
                f"got {arr.size}"
            )
        object.__setattr__(self, "coefficients", arr)

    def eval(self, u: complex) -> complex:
        acc = 0.0 + 0.0j
        for c in self.coefficients:
            acc = acc * u + c
        return acc

    def coefficient_scale(self) -> float:
        return float(np.max(np.abs(self.coefficients)))


@dataclass(frozen=True)
class JumpEstimate:
    """Recovered single-jump parameters with solver diagnostics."""

    xi: float
    magnitudes: tuple
    alpha: tuple
    root_residual: float
    condition_note: float
    root: complex = 0.0 + 0.0j

    @property
    def order(self) -> int:
        return len(self.magnitudes) - 1


def s_poly(i: int, d: int):
    """Integer coefficients (descending powers of w) of s_i^d.

    s_i^d(w) = sum_{j=0}^{d+1} (-1)^j C(d+1, j) (j+1)^i w^{d+1-j}; exact.
    """
    if i < 0:
        raise ModelError(f"s_poly index i must be >= 0, got {i}")
    if not 0 <= d <= _S_POLY_DMAX:
        raise ModelError(f"s_poly order d must be in 0..{_S_POLY_DMAX}, got {d}")
    return [(-1) ** j * math.comb(d + 1, j) * (j + 1) ** i for j in range(d + 2)]


def build_annihilator(moments: MomentSequence, plan: SamplePlan) -> AnnihilatorPoly:
    """Alternating-binomial combination of the planned moments."""
    if moments.order != plan.d:
        raise ModelError(
            f"moment order {moments.order} does not match plan order {plan.d}"
        )
    if moments.indices != plan.indices:
        raise ModelError(
            f"moment indices {moments.indices} do not match plan indices "
            f"{plan.indices}"
        )
    d = plan.d
    coeffs = np.array(
        [(-1) ** j * math.comb(d + 1, j) * moments.values[j] for j in range(d + 2)],
        dtype=np.complex128,
    )
    return AnnihilatorPoly(d + 1, coeffs, plan.stride, plan.base_index)


def find_roots(poly: AnnihilatorPoly) -> np.ndarray:
    """All roots of the annihilator (deterministic order)."""
    return rootfind.find_roots(poly.coefficients)


def select_root(roots, mode: str = "closest") -> complex:
    """Pick the root nearest the unit circle (default) or the ray average.

    Ties within 1e-14 of circle distance break toward the smallest angle
    magnitude.  mode="angle-average" returns the unit-modulus circular
    mean of all root angles, usable because exact-data roots share one ray.
    """
    rs = [complex(r) for r in roots]
    if not rs:
        raise ModelError("empty root list")
    if mode == "angle-average":
        s = sum(r / abs(r) for r in rs if abs(r) > 0)
        if s == 0:
            raise NumericError("angle-average undefined: root phases cancel")
        return s / abs(s)
    if mode != "closest":
        raise ModelError(f"unknown root selection mode {mode!r}")
    best = None
    best_key = None
    for r in rs:
        dist = abs(abs(r) - 1.0)
        key = (dist, abs(cmath.phase(r)))
        if best is None or dist < best_key[0] - 1e-14:
            best, best_key = r, key
        elif abs(dist - best_key[0]) <= 1e-14 and key[1] < best_key[1]:
            best, best_key = r, key
    return best


def _wrap_angle(x: float) -> float:
    return float(np.mod(x + np.pi, 2.0 * np.pi) - np.pi)


def disambiguate_nth_root(z: complex, N: int, xi_prior: float) -> float:
    """Resolve xi from z ~ e^{-i xi N} using a prior of accuracy < pi/N.

    Candidates are (-arg z + 2 pi n)/N wrapped into [-pi, pi); the one
    circularly closest to the prior wins.  Near-ties mean the prior was
    too weak; that raises an ambiguity error rather than guessing.
    """
    if N < 1:
        raise ModelError(f"N must be >= 1, got {N}")
    if z == 0:
        raise ModelError("zero root cannot carry phase information")
    t = -cmath.phase(z)
    cands = sorted(_wrap_angle(t / N + 2.0 * np.pi * n / N) for n in range(N))
    dists = []
    for xi in cands:
        d = abs(xi - xi_prior) % (2.0 * np.pi)
        dists.append(min(d, 2.0 * np.pi - d))
    order = np.argsort(dists)
    best = int(order[0])
    if len(cands) > 1:
        second = int(order[1])
        if abs(dists[second] - dists[best]) < 1e-12:
            raise AmbiguityError(
                f"prior {xi_prior:.6g} sits equidistant from candidates "
                f"{cands[best]:.12g} and {cands[second]:.12g} (N={N})"
            )
    return float(cands[best])


def _vandermonde_inverse(nodes: tuple):
    """Exact inverse of the Vandermonde matrix V[r][c] = nodes[r]^c."""
    n = len(nodes)
    aug = [
        [Fraction(nodes[r]) ** c for c in range(n)]
        + [Fraction(1 if c == r else 0) for c in range(n)]
        for r in range(n)
    ]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = Fraction(1) / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


_VINV_CACHE: dict = {}


def _vandermonde_inverse_float(nodes: tuple) -> np.ndarray:
    if nodes not in _VINV_CACHE:
        exact = _vandermonde_inverse(nodes)
        _VINV_CACHE[nodes] = np.array(
            [[float(x) for x in row] for row in exact], dtype=float
        )
    return _VINV_CACHE[nodes]


def alpha_to_magnitudes(alpha) -> tuple:
    """Invert the weighting alpha_l = i^l a_{d-l}."""
    d = len(alpha) - 1
    return tuple(complex(alpha[d - m]) * (-1j) ** (d - m) for m in range(d + 1))


def magnitudes_to_alpha(a) -> tuple:
    d = len(a) - 1
    return tuple((1j) ** l * complex(a[d - l]) for l in range(d + 1))


def synth_moments(xi: float, alpha, indices) -> MomentSequence:
    """Exact moments m_k = e^{-i k xi} sum_l alpha_l k^l of one jump."""
    alpha = [complex(x) for x in alpha]
    vals = []
    for k in indices:
        poly = sum(a * float(k) ** l for l, a in enumerate(alpha))
        vals.append(cmath.exp(-1j * k * xi) * poly)
    return MomentSequence(len(alpha) - 1, tuple(int(k) for k in indices), np.array(vals))


def solve_magnitudes(moments: MomentSequence, omega_est: complex, plan: SamplePlan):
    """Weighted magnitudes from the first d+1 planned moments.

    Demodulates with omega_est (must be unit-modulus to 1e-10), then
    solves the small integer-node Vandermonde system through its exact
    cached inverse: decimated nodes factor as (jN)^l = j^l N^l, while
    consecutive nodes are shifted to 0..d and mapped back through the
    binomial triangle.  Returns (alpha, a).
    """
    if abs(abs(omega_est) - 1.0) > 1e-10:
        raise ModelError(
            f"omega estimate must sit on the unit circle, |omega|={abs(omega_est):.12g}"
        )
    if moments.order != plan.d:
        raise ModelError(
            f"moment order {moments.order} does not match plan order {plan.d}"
        )
    d = plan.d
    use = plan.indices[: d + 1]
    if tuple(moments.indices[: d + 1]) != use:
        raise ModelError(
            f"moments {moments.indices} do not cover the magnitude indices {use}"
        )
    rhs = np.array(
        [moments.values[j] * omega_est ** (-use[j]) for j in range(d + 1)],
        dtype=np.complex128,
    )
    if plan.kind == "decimated":
        N = plan.stride
        vinv = _vandermonde_inverse_float(tuple(range(1, d + 2)))
        scaled = vinv @ rhs
        alpha = scaled / np.power(float(N), np.arange(d + 1))
    else:
        base = use[0]
        vinv = _vandermonde_inverse_float(tuple(range(0, d + 1)))
        beta = vinv @ rhs
        alpha = np.zeros(d + 1, dtype=np.complex128)
        for l in range(d, -1, -1):
            acc = beta[l]
            for m in range(l + 1, d + 1):
                acc -= math.comb(m, l) * float(base) ** (m - l) * alpha[m]
            alpha[l] = acc
    # residual check in the original system: sum_l alpha_l k^l vs rhs
    recon = np.array(
        [sum(alpha[l] * float(k) ** l for l in range(d + 1)) for k in use],
        dtype=np.complex128,
    )
    scale = float(np.max(np.abs(rhs))) or 1.0
    resid = float(np.max(np.abs(recon - rhs)))
    if resid > 1e-8 * scale:
        raise NumericError(
            f"magnitude system ill-conditioned: residual {resid:.3e} "
            f"vs data scale {scale:.3e}"
        )
    a = alpha_to_magnitudes(alpha)
    return tuple(complex(x) for x in alpha), a


def _min_pairwise_distance(roots) -> float:
    rs = [complex(r) for r in roots]
    if len(rs) < 2:
        return float("inf")
    return min(
        abs(rs[i] - rs[j]) for i in range(len(rs)) for j in range(i + 1, len(rs))
    )


def recover_single_jump(
    spec: FourierSpectrum,
    d: int,
    xi_prior: Optional[float],
    plan_kind: str = "decimated",
    *,
    M: Optional[int] = None,
    select_mode: str = "closest",
    weak_floor: Optional[float] = None,
) -> JumpEstimate:
    """Full single-jump recovery from a spectrum obeying the one-jump model.

    M restricts the usable top index (defaults to the spectrum's own M);
    xi_prior is required for the decimated plan, where the annihilator
    root determines xi only up to the N-th roots of unity.
    """
    M_used = spec.M if M is None else int(M)
    if M_used > spec.M:
        raise ModelError(f"usable M={M_used} exceeds spectrum M={spec.M}")
    plan = SamplePlan(plan_kind, d, M_used)
    moments = weight_moments(spec, d, plan.indices)
    return _recover_from_moments(
        moments, plan, xi_prior, select_mode=select_mode, weak_floor=weak_floor
    )


def _recover_from_moments(
    moments: MomentSequence,
    plan: SamplePlan,
    xi_prior: Optional[float],
    *,
    select_mode: str = "closest",
    weak_floor: Optional[float] = None,
) -> JumpEstimate:
    poly = build_annihilator(moments, plan)
    roots = find_roots(poly)
    z = select_root(roots, mode=select_mode)
    if plan.kind == "decimated" and plan.stride > 1:
        if xi_prior is None:
            raise ModelError("decimated recovery requires a location prior")
        xi = disambiguate_nth_root(z, plan.stride, xi_prior)
    else:
        xi = _wrap_angle(-cmath.phase(z))
    omega = cmath.exp(-1j * xi)
    alpha, a = solve_magnitudes(moments, omega, plan)
    if weak_floor is not None and abs(a[0]) < weak_floor / 2.0:
        warnings.warn(
            f"leading magnitude {abs(a[0]):.3e} below half the declared "
            f"floor {weak_floor:.3e}",
            WeakJumpWarning,
        )
    return JumpEstimate(
        xi=xi,
        magnitudes=a,
        alpha=alpha,
        root_residual=abs(poly.eval(z)),
        condition_note=_min_pairwise_distance(roots),
        root=complex(z),
    )


def half_order_recover(
    spec: FourierSpectrum,
    d1: int,
    M: Optional[int] = None,
    *,
    weak_floor: Optional[float] = None,
) -> JumpEstimate:
    """Consecutive-index recovery at reduced order d1.

    Stride 1 makes the annihilator root the node omega itself, so the
    angle is read directly and no prior is needed.  d1 = d gives the
    classical full-order consecutive variant used as a benchmark.
    """
    M_used = spec.M if M is None else int(M)
    if M_used > spec.M:
        raise ModelError(f"usable M={M_used} exceeds spectrum M={spec.M}")
    plan = SamplePlan("consecutive", d1, M_used)
    moments = weight_moments(spec, d1, plan.indices)
    return _recover_from_moments(moments, plan, None, weak_floor=weak_floor)
