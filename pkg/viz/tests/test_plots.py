import json
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
import pytest

from cogviz.cli import main
from cogviz.plots import plot_boxplot, plot_chord, plot_headmap, plot_heatmap
from cogviz.schemas import ArtifactError, load_artifact

FIXTURES = Path(__file__).parent / "fixtures"


def pixels(path):
    return plt.imread(path)


@pytest.mark.parametrize(
    "kind,extra",
    [
        ("chord", []),
        ("heatmap", []),
        ("headmap", ["--montage", str(FIXTURES / "montage.json")]),
        ("psd", []),
        ("curves", []),
    ],
)
def test_each_kind_renders_golden_fixture(tmp_path, kind, extra):
    src = {
        "chord": "edges.json",
        "headmap": "edges.json",
        "heatmap": "matrix.json",
        "psd": "psd.json",
        "curves": "curves.json",
    }[kind]
    out = tmp_path / f"{kind}.png"
    code = main(["plot", kind, "--in", str(FIXTURES / src), "--out", str(out), *extra])
    assert code == 0
    assert out.exists() and out.stat().st_size > 1000


def test_boxplot_renders_report_set(tmp_path):
    out = tmp_path / "box.png"
    code = main([
        "plot", "boxplot",
        "--in", str(FIXTURES / "report.json"), str(FIXTURES / "report_b.json"),
        "--out", str(out),
    ])
    assert code == 0
    assert out.exists() and out.stat().st_size > 1000


def test_rerender_pixel_identical(tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    plot_chord(FIXTURES / "edges.json", a)
    plot_chord(FIXTURES / "edges.json", b)
    assert np.array_equal(pixels(a), pixels(b))


def test_heatmap_symmetry_render(tmp_path):
    payload = load_artifact(FIXTURES / "matrix.json", "cogstate.matrix/v1")
    transposed = dict(payload)
    transposed["values"] = np.asarray(payload["values"]).T.tolist()
    tpath = tmp_path / "matrix_t.json"
    tpath.write_text(json.dumps(transposed))
    a, b = tmp_path / "m.png", tmp_path / "mt.png"
    plot_heatmap(FIXTURES / "matrix.json", a)
    plot_heatmap(tpath, b)
    # symmetric input renders identically to its transpose
    assert np.array_equal(pixels(a), pixels(b))


def test_empty_edge_set_warns_but_renders(tmp_path):
    out = tmp_path / "empty.png"
    with pytest.warns(UserWarning, match="empty edge set"):
        plot_chord(FIXTURES / "edges_empty.json", out)
    assert out.exists() and out.stat().st_size > 1000


def test_schema_mismatch_names_producer(tmp_path):
    with pytest.raises(ArtifactError, match="cogstate connect"):
        plot_heatmap(FIXTURES / "edges.json", tmp_path / "x.png")


def test_missing_artifact_names_producer(tmp_path, capsys):
    code = main(["plot", "psd", "--in", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "x.png")])
    assert code == 3
    assert "cogstate preprocess" in capsys.readouterr().err


def test_headmap_requires_montage(tmp_path, capsys):
    code = main(["plot", "headmap", "--in", str(FIXTURES / "edges.json"),
                 "--out", str(tmp_path / "x.png")])
    assert code == 3
    assert "montage" in capsys.readouterr().err


def test_headmap_unknown_channel(tmp_path):
    bad = {
        "schema": "cogstate.edges/v1", "kind": "x", "label": "",
        "edges": [{"a": "Nope", "b": "Fz", "weight": 1.0}],
    }
    p = tmp_path / "bad_edges.json"
    p.write_text(json.dumps(bad))
    with pytest.raises(ArtifactError, match="Nope"):
        plot_headmap(p, FIXTURES / "montage.json", tmp_path / "x.png")


def test_svg_output(tmp_path):
    out = tmp_path / "chord.svg"
    plot_chord(FIXTURES / "edges.json", out)
    assert out.exists()
    assert b"<svg" in out.read_bytes()[:300]


def test_bad_extension(tmp_path):
    with pytest.raises(ArtifactError, match="png or .svg"):
        plot_chord(FIXTURES / "edges.json", tmp_path / "chord.pdf")


def test_boxplot_requires_input():
    with pytest.raises(ArtifactError):
        plot_boxplot([], "x.png")
