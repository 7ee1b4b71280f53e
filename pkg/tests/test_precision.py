"""Extended-precision solve path and precision flag parsing."""

import numpy as np
import pytest

from jumprec.errors import ModelError
from jumprec.model import JumpModel, phi_coeff_array
from jumprec.precision import parse_precision, recover_single_jump_mp
from jumprec.solver import recover_single_jump
from jumprec.spectrum import FourierSpectrum


def jump_spectrum(model, M):
    return FourierSpectrum(M, phi_coeff_array(model, M), real_valued=model.is_real)


def test_precision_flag_parsing():
    assert parse_precision("double") == ("double", None)
    assert parse_precision("extended:60") == ("extended", 60)
    with pytest.raises(ModelError):
        parse_precision("extended:10")
    with pytest.raises(ModelError):
        parse_precision("extended:many")
    with pytest.raises(ModelError):
        parse_precision("quad")


def test_extended_path_agrees_with_double_on_easy_data():
    m = JumpModel(2, ((0.7, (1.0, -0.5, 0.3)),))
    sp = jump_spectrum(m, 120)
    est_d = recover_single_jump(sp, 2, 0.65)
    est_mp = recover_single_jump_mp(sp, 2, 0.65, digits=60)
    assert abs(est_mp.xi - 0.7) <= 1e-12
    assert abs(est_mp.xi - est_d.xi) <= 1e-13
    for a_mp, a_d in zip(est_mp.magnitudes, est_d.magnitudes):
        assert abs(a_mp - a_d) <= 1e-7
    assert isinstance(est_mp.xi, float)
    assert all(isinstance(a, complex) for a in est_mp.magnitudes)


def test_extended_path_validation():
    m = JumpModel(0, ((0.7, (1.0,)),))
    sp = jump_spectrum(m, 32)
    with pytest.raises(ModelError):
        recover_single_jump_mp(sp, 0, 0.7, digits=30)
    with pytest.raises(ModelError):
        recover_single_jump_mp(sp, 0, 0.7, M=64)


def test_extended_path_consecutive_plan():
    m = JumpModel(1, ((-0.9, (1.0, 0.4)),))
    est = recover_single_jump_mp(jump_spectrum(m, 64), 1, None, "consecutive")
    assert abs(est.xi - (-0.9)) <= 1e-8
