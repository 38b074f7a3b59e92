import json

import numpy as np
import pytest

from volterra_leveling import ConfigurationError, voltker_kernel
from volterra_leveling.errors import FormatError
from volterra_leveling.files import (
    emit_report,
    kernel_from_dict,
    kernel_to_dict,
    load_kernel,
    read_two_columns,
    render_report,
    write_two_columns,
)


def test_preset_and_explicit_agree():
    explicit = kernel_from_dict(
        {"T": 2.0, "segments": [{"value": 1}, {"value": "const:0.9"}, {"value": 0.85}],
         "boundaries": [{"proportional": 0.25}, {"proportional": 0.75}]}
    )
    preset = kernel_from_dict({"preset": "voltker", "T": 2.0})
    for t, s in [(2.0, 0.1), (2.0, 1.0), (1.0, 0.9), (0.4, 0.05)]:
        assert explicit.eval(t, s) == preset.eval(t, s)


def test_fade_segments():
    k = kernel_from_dict({"T": 10, "segments": [{"value": "age_fade:0.9,0.5"}, {"value": "exp_fade:0.8,1"}],
                          "boundaries": [{"proportional": 0.5}]})
    assert k.eval(10.0, 1.0) == pytest.approx(0.9 * (1 - 0.5 * 0.9))
    assert k.eval(10.0, 8.0) == pytest.approx(0.8 * np.exp(-0.2))


def test_kernel_round_trip():
    d = kernel_to_dict(voltker_kernel(3.0))
    assert kernel_to_dict(kernel_from_dict(json.loads(json.dumps(d)))) == d


@pytest.mark.parametrize(
    "doc",
    [
        {"preset": "nope"},
        {"segments": [{"value": 1}]},
        {"T": 1, "segments": [{"value": "warp:1"}]},
        {"T": 1, "segments": [{"value": 1}, {"value": 2}], "boundaries": []},
        {"T": 1, "segments": [{"value": 1}, {"value": 2}], "boundaries": [{"proportional": 1.5}]},
        [1, 2],
    ],
)
def test_bad_kernel_documents(doc):
    with pytest.raises(ConfigurationError):
        kernel_from_dict(doc)


def test_bad_kernel_file(tmp_path):
    p = tmp_path / "k.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        load_kernel(p)


def test_two_columns_round_trip(tmp_path):
    t = np.linspace(0, 1, 7)
    write_two_columns(tmp_path / "x.csv", ("t", "x"), t, t**2 / 3)
    a, b = read_two_columns(tmp_path / "x.csv")
    np.testing.assert_array_equal(a, t)
    np.testing.assert_array_equal(b, t**2 / 3)


def test_two_columns_bad_row(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("t,f\n0,0\n0.5,abc\n1,1\n")
    with pytest.raises(FormatError) as exc:
        read_two_columns(p)
    assert exc.value.row == 2


def test_report_is_deterministic_and_sorted():
    a = render_report({"b": np.float64(1.5), "a": [np.int64(2), float("nan")], "c": {"z": True, "y": np.bool_(False)}})
    b = render_report({"c": {"y": False, "z": True}, "a": [2, None], "b": 1.5})
    assert a == b
    assert list(json.loads(a)) == ["a", "b", "c"]


def test_report_unwritable(tmp_path):
    with pytest.raises(OSError):
        emit_report({"a": 1}, tmp_path / "missing-dir" / "r.json")
