import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_su2.profile import (
    BumpParams,
    ProfileError,
    TargetProfile,
    bump_phi,
    eval_f,
    eval_g,
    parse_amplitude,
    smooth_step_p,
    smooth_transition_q,
)


def test_p_and_q_values():
    assert smooth_step_p(0.0) == 0.0
    assert smooth_step_p(-1.0) == 0.0
    assert smooth_step_p(1.0) == pytest.approx(math.exp(-1))
    assert smooth_transition_q(0.0) == 0.0
    assert smooth_transition_q(1.0) == 1.0
    assert smooth_transition_q(0.5) == pytest.approx(0.5)
    assert smooth_transition_q(2.0) == 1.0


@pytest.mark.parametrize(
    "x, expected",
    [(0.75, 1.0), (0.3, 0.0), (1.2, 0.0), (0.45, 0.5), (1.05, 0.5), (0.5, 1.0), (1.0, 1.0), (0.4, 0.0)],
)
def test_bump_values(bump, x, expected):
    assert bump_phi(x, bump) == pytest.approx(expected, abs=1e-15)


def test_bump_frozen_interior_value(bump):
    # q(0.2) = p(0.2) / (p(0.2) + p(0.8))
    q = math.exp(-5) / (math.exp(-5) + math.exp(-1.25))
    assert bump_phi(0.42, bump) == pytest.approx(q, rel=1e-13)
    assert q == pytest.approx(0.022977369910025428, rel=1e-13)


def test_bump_is_monotone_on_ramps(bump):
    up = bump_phi(np.linspace(0.4, 0.5, 201), bump)
    down = bump_phi(np.linspace(1.0, 1.1, 201), bump)
    assert np.all(np.diff(up) >= 0) and np.all(np.diff(down) <= 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5, allow_nan=False))
def test_bump_range(x):
    v = bump_phi(x, BumpParams(0.4, 0.5, 1.0, 1.1))
    assert 0.0 <= v <= 1.0


@pytest.mark.parametrize("args", [(0.5, 0.4, 1, 1.1), (0, 0.5, 1, 1.1), (0.4, 0.5, 0.5, 1.1), (0.4, 0.5, 1.2, 1.1)])
def test_bump_params_validation(args):
    with pytest.raises(ProfileError):
        BumpParams(*args)


def test_parse_amplitude_whitelist():
    fn = parse_amplitude("pi/(6*ω) + sin(w)*0 - -1")
    assert fn(np.array([0.5]))[0] == pytest.approx(math.pi / 3 + 1)
    assert parse_amplitude("2")(np.array([0.1, 0.2])).tolist() == [2.0, 2.0]
    for bad in ("__import__('os')", "w ** 2", "open", "x + 1", "lambda: 0", ""):
        with pytest.raises(ProfileError):
            parse_amplitude(bad)


def test_eval_f_and_g(half_pi, sixth):
    assert eval_f(half_pi, 0.75) == pytest.approx(math.pi / 2)
    assert eval_f(half_pi, 0.2) == 0.0
    assert eval_f(sixth, 0.5) == pytest.approx(math.pi / 3)
    # g(2w) w = f(w)
    assert eval_g(half_pi, 1.5) == pytest.approx(math.pi / 1.5)
    assert eval_g(half_pi, -1.5) == eval_g(half_pi, 1.5)
    assert eval_g(half_pi, 0.0) == 0.0
    w = np.linspace(0.3, 1.2, 50)
    np.testing.assert_allclose(w * eval_g(sixth, 2 * w), eval_f(sixth, w), rtol=1e-14, atol=1e-300)


def test_singular_profile_reported(bump):
    prof = TargetProfile(BumpParams(0.4, 0.5, 1.0, 1.1), "1/(omega - 0.75)")
    with pytest.raises(ProfileError, match="singular"):
        eval_f(prof, 0.75)


def test_profile_dict_round_trip(sixth, zero_profile):
    assert TargetProfile.from_dict(sixth.to_dict()) == sixth
    assert zero_profile.is_zero and not sixth.is_zero
    assert sixth.support == (0.4, 1.1)
    with pytest.raises(ProfileError):
        TargetProfile.from_dict({"bump": {"a": 1}, "amplitude": "1"})
