"""Golden CSVs for the figure tests, produced by the experiment CLI itself.

The renderer's whole contract is "draw what the tool wrote", so the fixtures
shell out to the installed `dualband` entry point instead of fabricating
files; only the deliberately broken inputs are written by hand.
"""

import subprocess
from pathlib import Path

import pytest

UNIT_CFG = """\
lambda = 0.2
mu_p = 0.3
mu_mm = 0.8
mu_sub6 = 0.1
p_a = 0.5
m_list = 1,2,3,4
horizon = 20000
replications = 2
"""

# 3x3 surface grid: p_na 0.553 puts lambda 45 just past the single-band
# arm's capacity (44.7) but inside the integrated border (45.7), so the
# grid carries censored points and one genuinely unstable hole
BLOCKAGE_CFG = """\
lambda_list = 30,45,70
p_na_list = 0,0.3,0.553
horizon = 20000
replications = 2
"""

COMPARE_CFG = """\
lambda = 0.2
mu_p = 0.3
mu_mm = 0.8
mu_sub6 = 0.1
p_a = 0.5
lambda_list = 0.2,0.25
m_list = 2,2
horizon = 20000
replications = 2
"""


def _run(args: list[str], workdir: Path) -> None:
    proc = subprocess.run(
        ["dualband", *args], cwd=workdir, capture_output=True, text=True,
    )
    assert proc.returncode == 0, f"dualband {args} failed:\n{proc.stderr}"


@pytest.fixture(scope="session")
def golden(tmp_path_factory) -> dict[str, Path]:
    root = tmp_path_factory.mktemp("golden")
    (root / "unit.cfg").write_text(UNIT_CFG, encoding="utf-8")
    (root / "blockage.cfg").write_text(BLOCKAGE_CFG, encoding="utf-8")
    (root / "compare.cfg").write_text(COMPARE_CFG, encoding="utf-8")

    for lam in ("0.2", "0.3"):
        _run(["sweep-threshold", "--config", "unit.cfg", "--out", ".",
              "--lambda", lam], root)
    _run(["sweep-blockage", "--config", "blockage.cfg", "--out", ".",
          "--beta", "0.9", "--box", "12x12"], root)
    _run(["compare-maxweight", "--config", "compare.cfg", "--out", "."], root)

    return {
        "sweep_a": root / "fig4_0.2.csv",
        "sweep_b": root / "fig4_0.3.csv",
        "surface": root / "fig5.csv",
        "compare": root / "fig6.csv",
    }
