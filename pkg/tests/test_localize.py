"""Coarse location detection and single-jump isolation windows."""

import numpy as np
import pytest

from jumprec.errors import DetectionError, ModelError, NumericError
from jumprec.localize import BumpSpec, localize_jump, make_bump, prony_order0
from jumprec.model import JumpModel, smooth_catalog, synth_spectrum
from jumprec.solver import recover_single_jump
from jumprec.spectrum import eval_partial_sum


def _circ(a, b):
    d = abs(a - b) % (2.0 * np.pi)
    return min(d, 2.0 * np.pi - d)


TWO_JUMPS_D2 = JumpModel(2, ((-1.3, (1.0, 0.3, -0.2)), (0.7, (0.8, -0.4, 0.25))))


# ---------------------------------------------------------------- detection


def test_detection_finds_both_jumps_within_coarse_accuracy():
    spec = synth_spectrum(TWO_JUMPS_D2, None, 256)
    locs = prony_order0(spec, 2)
    assert len(locs) == 2
    assert list(locs) == sorted(locs)
    assert _circ(locs[0], -1.3) <= 1e-4
    assert _circ(locs[1], 0.7) <= 1e-4


def test_detection_pinned_values():
    spec = synth_spectrum(TWO_JUMPS_D2, None, 256)
    locs = prony_order0(spec, 2)
    assert locs[0] == pytest.approx(-1.300004684898645, abs=1e-9)
    assert locs[1] == pytest.approx(0.7000078242740431, abs=1e-9)


def test_detection_is_insensitive_to_a_smooth_background():
    bare = prony_order0(synth_spectrum(TWO_JUMPS_D2, None, 256), 2)
    dressed = prony_order0(
        synth_spectrum(TWO_JUMPS_D2, smooth_catalog("expsin"), 256), 2
    )
    assert max(abs(a - b) for a, b in zip(bare, dressed)) <= 1e-9


def test_detection_reports_rank_deficit():
    spec = synth_spectrum(JumpModel(0, ((0.7, (1.0,)),)), None, 128)
    with pytest.raises(DetectionError) as exc:
        prony_order0(spec, 2)
    assert exc.value.rank == 1
    assert exc.value.expected == 2


def test_detection_validation():
    spec = synth_spectrum(JumpModel(0, ((0.7, (1.0,)),)), None, 64)
    with pytest.raises(ModelError):
        prony_order0(spec, 0)
    with pytest.raises(ModelError):
        prony_order0(spec, 1, tail=2)  # needs 2K+1 samples
    with pytest.raises(ModelError):
        prony_order0(spec, 1, tail=65)  # tail beyond available modes


# ---------------------------------------------------------------- windows


def test_bump_plateau_taper_and_support():
    J = np.pi / 2
    b = make_bump(0.5, J, 256)
    assert b.center == 0.5
    assert b.half_width == J
    assert b.profile(0.5) == pytest.approx(1.0, abs=1e-8)
    assert b.profile(0.5 + J / 3) == pytest.approx(1.0, abs=1e-6)
    assert b.profile(0.5 - J / 3) == pytest.approx(1.0, abs=1e-6)
    # taper midpoint by symmetry of the smoothing kernel
    assert b.profile(0.5 + 2 * J / 3) == pytest.approx(0.5, abs=1e-6)
    assert abs(b.profile(0.5 + J)) <= 1e-8
    assert abs(b.profile(0.5 - 1.3 * J)) <= 1e-8


def test_bump_profile_is_even_about_center():
    b = make_bump(-0.4, 1.2, 128, plateau_tol=1e-6)
    offs = np.linspace(0.0, 1.3, 23)
    left = np.array([b.profile(-0.4 - o) for o in offs])
    right = np.array([b.profile(-0.4 + o) for o in offs])
    assert np.max(np.abs(left - right)) <= 1e-12


def test_bump_spectrum_resynthesizes_profile():
    b = make_bump(0.5, np.pi / 2, 256)
    xs = np.linspace(-np.pi, np.pi, 401, endpoint=False)
    vals = eval_partial_sum(b.spectrum, xs)
    target = np.array([b.profile(x) for x in xs])
    assert np.max(np.abs(vals - target)) <= 1e-6


def test_bump_width_gate_depends_on_mode_budget():
    # 64 modes cannot meet the default plateau defect, 256 can
    with pytest.raises(NumericError):
        make_bump(0.3, np.pi / 2, 64)
    make_bump(0.3, np.pi / 2, 64, plateau_tol=1e-3)
    make_bump(0.3, np.pi / 2, 256)


def test_bump_validation():
    with pytest.raises(ModelError):
        make_bump(0.3, 0.0, 64)
    with pytest.raises(ModelError):
        make_bump(0.3, np.pi, 64)  # wider than a quarter circle
    with pytest.raises(ModelError):
        make_bump(0.3, np.pi / 2, 16)  # too few modes
    with pytest.raises(ModelError):
        make_bump(0.3, np.pi / 2, 64, plateau_tol=0.0)
    with pytest.raises(ModelError):
        make_bump(0.3, np.pi / 2, 64, degree=0)
    with pytest.raises(ModelError):
        make_bump(0.3, np.pi / 2, 64, degree=65)


def test_bumpspec_holds_given_fields():
    b = make_bump(0.1, 1.0, 128, plateau_tol=1e-5)
    assert isinstance(b, BumpSpec)
    assert b.plateau_fraction == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert b.spectrum.M == 128


# ---------------------------------------------------------------- isolation


def test_windowed_recovery_ignores_the_other_jump():
    # multiply by a window flat at one jump and dead at the other, then
    # run the single-jump solver on the product coefficients
    mm = JumpModel(1, ((-1.3, (1.0, 0.3)), (0.7, (0.8, -0.4))))
    spec = synth_spectrum(mm, None, 256)
    M_eff = 192
    stride = M_eff // 3
    deg = max(1, min(256 - M_eff, stride - 2))
    bump = make_bump(0.7, np.pi / 2, 256, plateau_tol=5e-2, degree=deg)
    loc = localize_jump(spec, bump)
    est = recover_single_jump(loc, 1, 0.69, "decimated", M=M_eff)
    assert abs(est.xi - 0.7) <= 1e-12
    assert abs(est.magnitudes[0] - 0.8) <= 1e-10


def test_window_product_keeps_mode_budget():
    spec = synth_spectrum(JumpModel(0, ((0.7, (1.0,)),)), None, 256)
    bump = make_bump(0.7, np.pi / 2, 256, plateau_tol=1e-10)
    loc = localize_jump(spec, bump)
    assert loc.M == 256
