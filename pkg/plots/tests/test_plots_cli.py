"""Exit codes and messages of the `plots` entry point."""

import pytest

from dualband_plots.cli import main


def test_renders_two_curves_to_one_image(golden, tmp_path, capsys):
    out = tmp_path / "sweep.png"
    rc = main(["threshold_sweep", str(golden["sweep_a"]), str(golden["sweep_b"]),
               "-o", str(out)])
    assert rc == 0
    assert f"wrote {out}" in capsys.readouterr().out
    assert out.stat().st_size > 0


def test_schema_mismatch_exits_one_naming_the_column(golden, tmp_path, capsys):
    out = tmp_path / "bad.png"
    rc = main(["blockage_surface", str(golden["compare"]), "-o", str(out)])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("schema error:")
    assert "p_na" in err  # first column the surface needs that fig6 lacks
    assert not out.exists()


def test_missing_file_exits_one(tmp_path, capsys):
    rc = main(["maxweight_compare", str(tmp_path / "nope.csv"),
               "-o", str(tmp_path / "x.png")])
    assert rc == 1
    assert "file not found" in capsys.readouterr().err


def test_unknown_kind_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["pie_chart", "a.csv", "-o", "x.png"])
    assert exc.value.code == 2


def test_output_flag_is_required(golden):
    with pytest.raises(SystemExit) as exc:
        main(["threshold_sweep", str(golden["sweep_a"])])
    assert exc.value.code == 2
