"""End-to-end smoke tests for the python bindings.

The compiled module must be importable (the build wires PYTHONPATH); these
tests exercise one representative of each binding family and a couple of
pinned values, not the full numerical surface, which the C++ suites own.
"""

import json
import math

import pytest

import fractalwalk as fw

CANTOR_DIM = 0.6309297535714574


def test_surface():
    assert len(fw.experiments) == 11
    assert "cf-stats" in fw.experiments
    assert fw.__version__


def test_system_and_dimension():
    s = fw.system("cantor3")
    assert s.alphabet_size() == 2
    assert s.ambient_dim() == 1
    assert abs(fw.similarity_dimension(s) - CANTOR_DIM) < 1e-12
    assert abs(fw.contraction_on_average(s) + math.log(3.0)) < 1e-12


def test_cf_digits_pins():
    assert fw.cf_digits("golden", 30) == [1] * 30
    assert fw.cf_digits("13/30") == [2, 3, 4]


def test_coding_point_brackets_limit():
    s = fw.system("cantor3")
    value, radius = fw.coding_point(s, [0] * 20)
    assert abs(float(value[0][0])) <= radius
    assert radius == pytest.approx(3.0**-20, rel=1e-12)
    value, radius = fw.coding_point(s, [1] * 20)
    # the limit point 1 sits exactly on the certified ball's boundary, and
    # the float composite drifts a few ulps beyond it
    assert abs(float(value[0][0]) - 1.0) <= radius + 1e-15


def test_walk_matrices_pin():
    s = fw.system("cantor3")
    mats = fw.walk_matrices(s, 1, 1)
    assert len(mats) == 2
    r3 = math.sqrt(3.0)
    expect = [[r3, 0.0], [0.0, 1.0 / r3]]
    for i in range(2):
        for j in range(2):
            assert float(mats[0][i][j]) == pytest.approx(expect[i][j], abs=1e-12)
    assert abs(mats[1][0][1] - 2.0 / r3) < 1e-12


def test_walk_systoles_deterministic():
    s = fw.system("cantor3")
    a = fw.walk_systoles(s, 1, 1, 50, 123)
    b = fw.walk_systoles(s, 1, 1, 50, 123)
    assert a == b
    assert a[0] == 1.0
    assert len(a) == 51


def test_flow_systoles_start_at_one():
    times, sys = fw.flow_systoles(0.5, 10.0, 0.5)
    assert len(times) == len(sys) == 21
    assert sys[0] == pytest.approx(1.0, abs=1e-12)


def test_lyapunov_spectrum_symmetric():
    s = fw.system("cantor3")
    ly = fw.lyapunov_spectrum(s, 1, 1, 1, 400, 9)
    assert len(ly) == 3
    assert ly[0] == pytest.approx(math.log(3.0), abs=1e-6)
    assert abs(sum(ly)) < 1e-9
    assert sorted(ly, reverse=True) == ly


def test_sample_word_deterministic():
    s = fw.system("cantor3")
    w1 = fw.sample_word(s, 25, 7)
    w2 = fw.sample_word(s, 25, 7)
    assert w1 == w2
    assert len(w1) == 25
    assert set(w1) <= {0, 1}


def test_run_experiment_manifest():
    m = fw.run_experiment(
        experiment="cf-stats",
        system="cantor3",
        points=3,
        digits=30,
        depth=150,
        seed=5,
    )
    assert m["tool"]["name"] == "fractalwalk"
    assert m["exit_code"] == 0
    assert m["pass"] is True
    h = m["config_hash"]
    assert len(h) == 16 and all(c in "0123456789abcdef" for c in h)
    assert isinstance(m["csv"], str)


def test_run_deterministic():
    cfg = {"experiment": "ba-test", "alpha": "golden", "q_max": 400, "seed": 3}
    a = fw.run(cfg)
    b = fw.run(cfg)
    assert a["manifest_json"] == b["manifest_json"]
    manifest = json.loads(a["manifest_json"])
    assert manifest["results"]["c_min"] == pytest.approx(0.3819660113, abs=1e-9)


def test_bad_config_raises():
    with pytest.raises(fw.ConfigError):
        fw.run({"experiment": "no-such-experiment", "seed": 1})
    with pytest.raises(fw.ConfigError):
        fw.run({"experiment": "ba-test", "alpha": "golden"})  # missing seed
