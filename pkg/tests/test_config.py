import math

import numpy as np
import pytest

from kurograph import config, graphon, output
from kurograph.errors import ConfigError

SW = """
[kernel]
kind = small_world
p = 0.1
r = 0.25

[engine]
n = 512
T = 20

[run]
seed = 7
"""


def test_parse_and_defaults():
    cfg = config.parse_config_text(SW)
    assert cfg.kernel["kind"] == "small_world" and cfg.kernel["r"] == 0.25
    assert cfg.engine["n"] == 512 and cfg.engine["T"] == 20.0
    assert cfg.engine["J"] == 8 and cfg.engine["closure"] == "truncate"
    assert cfg.freq["kind"] == "standard_normal"
    assert cfg.seed == 7
    assert cfg.build_kernel().eval(0.0, 0.2) == pytest.approx(0.9)
    assert cfg.build_model().g0 == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_echo_round_trip():
    cfg = config.parse_config_text(SW)
    again = config.parse_config_text(cfg.echo())
    assert again == cfg
    assert again.echo() == cfg.echo()


def test_all_errors_reported_together(tmp_path):
    text = """
[kernel]
kind = small_world
p = 1.5
r = 0.7
colour = red

[engine]
n = many
J = 1
closure = magic

[extra]
a = 1
"""
    with pytest.raises(ConfigError) as err:
        config.parse_config_text(text)
    msgs = "\n".join(err.value.errors)
    for fragment in ("kernel.p", "kernel.r", "colour", "engine.n", "engine.J", "engine.closure", "[extra]"):
        assert fragment in msgs
    assert len(err.value.errors) == 7


@pytest.mark.parametrize("text, fragment", [
    ("[kernel]\np = 0.5\n", "kernel.kind"),
    ("[kernel]\nkind = lattice\n", "not one of"),
    ("[kernel]\nkind = constant\np = -1.5\n", "outside [-1, 1]"),
    ("[kernel]\nkind = grid\ngrid_file = nope.csv\n", "file not found"),
    ("[kernel]\nkind = circulant\n", "coeffs"),
    ("[kernel]\nkind = constant\np = 1\n[freq]\nkind = normal\nsigma = 0\n", "sigma"),
    ("[kernel]\nkind = constant\np = 1\n[run]\nseed = -3\n", "64-bit"),
    ("[kernel\nkind = x", "syntax"),
])
def test_single_errors(text, fragment):
    with pytest.raises(ConfigError, match=None) as err:
        config.parse_config_text(text)
    assert any(fragment in e for e in err.value.errors)


def test_grid_kernel_relative_to_config(tmp_path):
    graphon.save_matrix_csv(graphon.sample_weight_matrix(graphon.constant(0.3), 4), tmp_path / "w.csv")
    (tmp_path / "run.ini").write_text("[kernel]\nkind = grid\ngrid_file = w.csv\n")
    cfg = config.parse_config(tmp_path / "run.ini")
    assert cfg.build_kernel().eval(0.1, 0.9) == pytest.approx(0.3)
    with pytest.raises(ConfigError):
        config.parse_config(tmp_path / "missing.ini")


def test_named_streams_are_independent_and_reproducible():
    a = config.stream(5, "frequencies").random(4)
    assert np.array_equal(a, config.stream(5, "frequencies").random(4))
    assert not np.array_equal(a, config.stream(5, "initial-phases").random(4))
    assert not np.array_equal(a, config.stream(6, "frequencies").random(4))


def test_csv_round_trip(tmp_path):
    cfg = config.parse_config_text(SW)
    path = output.write_csv(tmp_path / "x.csv", ["a", "b", "flag"],
                            [[0.1, math.inf, True], [1 / 3, -math.inf, False]], cfg, meta=dict(mu=0.25))
    text = path.read_text()
    assert "pos_inf" in text and "neg_inf" in text
    meta, cfg_text, cols = output.read_csv(path)
    assert meta["mu"] == 0.25 and meta["seed"] == 7
    assert config.parse_config_text(cfg_text) == cfg
    assert cols["a"][1] == 1 / 3
    assert cols["b"].tolist() == [math.inf, -math.inf]
    assert cols["flag"].tolist() == [1.0, 0.0]


def test_fmt():
    assert output.fmt(0.1) == "0.1"
    assert output.fmt(np.float64(1e-300)) == "1e-300"
    assert output.fmt(math.nan) == "nan"
    assert output.fmt(np.int64(3)) == "3"
    assert output.fmt("x") == "x"
    assert output.parse_value("neg_inf") == -math.inf
    assert output.parse_value("abc") == "abc"


def test_strip_stamp(tmp_path):
    p = output.write_csv(tmp_path / "a.csv", ["x"], [[1.0]])
    stripped = output.strip_stamp(p.read_text())
    assert "generated" not in stripped and stripped.startswith("# kurograph")
