import json

import numpy as np
import pytest
from hypothesis import given

from bcbounds.channel import (BroadcastChannel, ChannelParseError, ChannelValidationError, bssc,
                              channel_from_json, channel_to_json, from_marginals, load_channel,
                              marginal_y, marginal_z, noiseless, push_forward, random_channel,
                              save_channel, validate)
from bcbounds.probcore import JointDist

from strategies import channels


def test_bssc_half_rows(half):
    assert np.allclose(half.wy, [[0.5, 0.5], [0.0, 1.0]])
    assert np.allclose(half.wz, [[1.0, 0.0], [0.5, 0.5]])
    assert validate(half) == []


def test_bssc_endpoint_is_noiseless():
    assert np.allclose(bssc(1.0).w, noiseless(2).w)
    with pytest.raises(ValueError):
        bssc(1.5)


def test_outputs_independent_given_input(half):
    for x in range(2):
        assert np.allclose(half.w[x], np.outer(half.wy[x], half.wz[x]))


def test_validate_reports_offending_row():
    w = bssc(0.5).w.copy()
    w[1, 1, 0] -= 0.1
    problems = validate(BroadcastChannel(w))
    assert len(problems) == 1 and "x=1" in problems[0]


def test_validate_reports_negative_entry():
    w = np.array([[[1.2, -0.2], [0, 0]], [[0, 0], [0, 1]]])
    problems = validate(BroadcastChannel(w))
    assert any("negative" in p and "w[0][0][1]" in p for p in problems)


def test_json_round_trip_is_exact(tmp_path, rng):
    c = random_channel(rng, 3, 2, 4)
    save_channel(c, tmp_path / "c.json")
    assert np.array_equal(load_channel(tmp_path / "c.json").w, c.w)


@pytest.mark.parametrize("text, fragment", [
    ('{"nx": 2', "malformed JSON"),
    ('{"ny": 2, "nz": 2, "w": []}', "'nx'"),
    ('{"nx": 2, "ny": 2, "nz": 2, "w": [[[1, 0], [0, 0]]]}', "x=1 missing"),
    ('{"nx": 1, "ny": 2, "nz": 2, "w": [[[1, 0], [0, "a"]]]}', "w[0][1][1]"),
    ('[1, 2]', "object"),
])
def test_parse_errors_name_the_field(text, fragment):
    with pytest.raises(ChannelParseError) as e:
        channel_from_json(text)
    assert fragment in str(e.value)


def test_loader_rejects_invalid_mass():
    obj = json.loads(channel_to_json(bssc(0.5)))
    obj["w"][0][0][0] = 0.4
    with pytest.raises(ChannelValidationError) as e:
        channel_from_json(json.dumps(obj))
    assert "x=0" in str(e.value)
    assert channel_from_json(json.dumps(obj), check=False).nx == 2


def test_push_forward_marginals(half):
    j = push_forward([0.5, 0.5], half)
    assert isinstance(j, JointDist)
    assert np.allclose(j.marginal("Y").probs, [0.25, 0.75])
    assert np.allclose(j.marginal("Z").probs, [0.75, 0.25])
    with pytest.raises(ValueError):
        push_forward([1 / 3] * 3, half)


def test_marginal_channels(half):
    assert np.allclose(marginal_y(half).rows, half.wy)
    assert marginal_z(half).nout == 2


def test_from_marginals_shape_check():
    with pytest.raises(ValueError):
        from_marginals(np.eye(2), np.eye(3))


@given(channels())
def test_random_channels_validate(c):
    assert validate(c) == []
    assert np.allclose(from_marginals(c.wy, c.wz).wy, c.wy)
