"""Frontend tests: golden-fixture rendering, determinism, schema errors."""

from pathlib import Path

import pytest

from deepmix_plots import PlotSpec, SchemaError, render
from deepmix_plots.cli import main as cli_main

FIXTURES = Path(__file__).parent / "fixtures"
KINDS = {
    "fig1b": "fig1b.csv",
    "dynamics": "dynamics.csv",
    "selfdual": "selfdual.csv",
}


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_renders_golden_fixture(kind, tmp_path):
    out = render(PlotSpec(kind, FIXTURES / KINDS[kind], tmp_path / f"{kind}.svg"))
    assert out.exists()
    assert out.stat().st_size > 1000


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_render_is_pixel_stable(kind, tmp_path):
    a = render(PlotSpec(kind, FIXTURES / KINDS[kind], tmp_path / "a.svg"))
    b = render(PlotSpec(kind, FIXTURES / KINDS[kind], tmp_path / "b.svg"))
    assert a.read_bytes() == b.read_bytes()


def test_png_output_also_stable(tmp_path):
    a = render(PlotSpec("fig1b", FIXTURES / "fig1b.csv", tmp_path / "a.png"))
    b = render(PlotSpec("fig1b", FIXTURES / "fig1b.csv", tmp_path / "b.png"))
    assert a.read_bytes() == b.read_bytes()


def test_header_only_csv_renders_empty_axes(tmp_path):
    csv_path = tmp_path / "empty.csv"
    csv_path.write_text("s2,k,delta_k\r\n")
    out = render(PlotSpec("fig1b", csv_path, tmp_path / "empty.svg"))
    assert out.exists()


def test_schema_mismatch_names_offending_column(tmp_path):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("s2,k,wrong\r\n0,2,0.5\r\n")
    with pytest.raises(SchemaError, match="delta_k"):
        render(PlotSpec("fig1b", csv_path, tmp_path / "bad.svg"))
    # kind/schema cross-mismatch: dynamics schema fed to selfdual kind
    with pytest.raises(SchemaError):
        render(PlotSpec("selfdual", FIXTURES / "dynamics.csv", tmp_path / "x.svg"))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaError):
        PlotSpec("contour", FIXTURES / "fig1b.csv", tmp_path / "x.svg")


def test_cli_success_and_exit_codes(tmp_path, capsys):
    rc = cli_main(
        [
            "--kind", "selfdual",
            "--in", str(FIXTURES / "selfdual.csv"),
            "--out", str(tmp_path / "sd.svg"),
        ]
    )
    assert rc == 0
    assert (tmp_path / "sd.svg").exists()
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\r\n")
    rc = cli_main(
        ["--kind", "fig1b", "--in", str(bad), "--out", str(tmp_path / "no.svg")]
    )
    assert rc == 2
    err = capsys.readouterr().err
    assert "offending column" in err


def test_logy_override(tmp_path):
    out1 = render(
        PlotSpec("fig1b", FIXTURES / "fig1b.csv", tmp_path / "lin.svg", logy=False)
    )
    out2 = render(
        PlotSpec("dynamics", FIXTURES / "dynamics.csv", tmp_path / "log.svg", logy=True)
    )
    assert out1.exists() and out2.exists()
