"""Config parsing, defaults, and the traceability hash."""

import pytest

from dualband.config import (
    InvalidConfig,
    RunConfig,
    canonical_lines,
    config_hash,
    load_config,
    parse_config_text,
)


def test_defaults():
    cfg = RunConfig()
    assert cfg.lam == 45.0
    assert cfg.betas == (0.9, 0.99, 0.999, 0.9999)
    assert cfg.effective_warmup == cfg.horizon // 10
    assert cfg.m_list[0] == 1 and cfg.m_list[-1] == 30


def test_parse_overrides_and_comments():
    cfg = parse_config_text(
        """
        # full line comment
        lambda = 50          # trailing comment
        betas = 0.9, 0.99
        horizon = 1e6
        box_x=40
        out_dir = results
        """
    )
    assert cfg.lam == 50.0
    assert cfg.betas == (0.9, 0.99)
    assert cfg.horizon == 1_000_000
    assert cfg.box_x == 40
    assert cfg.out_dir == "results"
    # untouched keys keep defaults
    assert cfg.mu_p == 100.0


def test_parse_errors_carry_line_numbers():
    with pytest.raises(InvalidConfig, match="line 2.*unknown key"):
        parse_config_text("lambda = 45\nlambdas = 45\n")
    with pytest.raises(InvalidConfig, match="line 1"):
        parse_config_text("horizon = 1.5e3.7")
    with pytest.raises(InvalidConfig, match="key = value"):
        parse_config_text("just some words")
    with pytest.raises(InvalidConfig, match="empty value"):
        parse_config_text("lambda =")
    with pytest.raises(InvalidConfig, match="expected an integer"):
        parse_config_text("seed = 1.25")
    with pytest.raises(InvalidConfig, match="non-empty"):
        parse_config_text("m_list = ,")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(InvalidConfig, match="not found"):
        load_config(tmp_path / "nope.cfg")
    f = tmp_path / "run.cfg"
    f.write_text("mu_sub6 = 2.5\n")
    assert load_config(f).mu_sub6 == 2.5


def test_rates_builder():
    cfg = parse_config_text("lambda = 50\nverify_beta = 0.99\n")
    p = cfg.rates()
    assert p.lam == 50.0 and p.beta == 0.99
    q = cfg.rates(lam=30.0, beta=0.9)
    assert q.lam == 30.0 and q.beta == 0.9
    assert q.mu_mm == cfg.mu_mm


def test_hash_stability_and_sensitivity():
    a = RunConfig()
    b = parse_config_text("")  # no overrides
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 16
    int(config_hash(a), 16)  # hex digest
    c = parse_config_text("seed = 7")
    assert config_hash(c) != config_hash(a)


def test_canonical_lines_sorted_by_file_key():
    lines = canonical_lines(RunConfig())
    keys = [l.split(" = ")[0] for l in lines]
    assert keys == sorted(keys)
    assert "lambda = 45" in lines
    assert "warmup = auto" in lines
    assert not any(k == "lam" for k in keys)
