import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aremc.config import ConfigError, RunConfig, dump_config, load_config, parse_config


def test_defaults_follow_the_reference_parameters():
    c = RunConfig()
    assert (c.D, c.v, c.d, c.l_rx, c.n_mol, c.dt, c.t_sim) == (0.01, 0.2, 0.5, 0.2, 100, 1e-3, 15.0)
    assert (c.d_hex_min, c.d_hex_max) == (0.05, 5.0)
    assert c.a_rx is None and c.channel(0.6).a_rx == pytest.approx(0.3)
    assert c.n_rings == 3 and c.k_max == 20 and c.theta_max == 200
    assert c.mc_rings == 20 and c.mc_realizations == 100_000


def test_default_round_trip():
    assert parse_config(dump_config(RunConfig())) == RunConfig()


@given(
    d_hex=st.floats(0.01, 10, allow_nan=False),
    a_rx=st.none() | st.floats(0.001, 1),
    n_mol_list=st.lists(st.integers(1, 10_000), min_size=1, max_size=4).map(tuple),
    seed=st.integers(0, 2**32),
    mc_markers=st.booleans(),
    fmt=st.sampled_from(["csv", "json"]),
    out=st.none() | st.sampled_from(["a.csv", "/tmp/x y.json"]),
)
def test_round_trip_is_identity(d_hex, a_rx, n_mol_list, seed, mc_markers, fmt, out):
    cfg = RunConfig(d_hex=d_hex, a_rx=a_rx, n_mol_list=n_mol_list, seed=seed,
                    mc_markers=mc_markers, format=fmt, out=out)
    once = parse_config(dump_config(cfg))
    assert once == cfg
    assert parse_config(dump_config(once)) == once


def test_comments_blank_lines_and_scientific_integers():
    cfg = parse_config("# sweep\n\nmc_realizations = 1e5  # symbols\na_rx = auto\nn_mol_list = 10, 100\n")
    assert cfg.mc_realizations == 100_000 and cfg.a_rx is None and cfg.n_mol_list == (10, 100)


@pytest.mark.parametrize("text,line", [
    ("n_mol = 10\nfoo = 1\n", 2),
    ("n_mol = 10\n\nD = -1\n", 3),
    ("seed = 1\nseed = 2\n", 2),
    ("just words\n", 1),
    ("n_mol = 1.5\n", 1),
    ("mc_markers = maybe\n", 1),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, source="run.cfg")
    assert exc.value.line == line
    assert str(exc.value).startswith(f"run.cfg:{line}:")


def test_cross_field_error_without_single_culprit():
    with pytest.raises(ConfigError, match="d_hex_min"):
        parse_config("d_hex_min = 1\nd_hex_max = 0.5\n")


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "nope.cfg"))


def test_load_file(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("d_hex = 0.4\nn_rings = 1\n")
    cfg = load_config(str(f))
    assert dataclasses.replace(RunConfig(), d_hex=0.4, n_rings=1) == cfg
