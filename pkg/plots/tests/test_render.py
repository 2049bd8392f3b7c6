import hashlib
import subprocess
import sys

import pytest

from circumfeas_plots.cli import main
from circumfeas_plots.render import (
    PlotSpec,
    SchemaError,
    read_profile_csv,
    render_gap_decay,
    render_profile,
)


@pytest.fixture(scope="session")
def bench_outputs(tmp_path_factory):
    """Interior-suite artifacts produced through the solver CLI (the only
    interface this package consumes)."""
    out = tmp_path_factory.mktemp("bench")
    subprocess.run(
        [sys.executable, "-m", "circumfeas", "bench", "--suite", "interior",
         "--seed", "1234", "--out", str(out)],
        check=True, capture_output=True,
    )
    return out


@pytest.fixture(scope="session")
def trajectories(tmp_path_factory):
    out = tmp_path_factory.mktemp("traj")
    subprocess.run(
        [sys.executable, "-m", "circumfeas", "gen", "--seed", "1234", "--dim", "30",
         "--count", "1", "--out", str(out)],
        check=True, capture_output=True,
    )
    import json

    manifest = json.loads((out / "manifest.json").read_text())
    inst = out / manifest["files"][0]
    paths = {}
    for method in ("ccrm", "map"):
        traj = out / f"traj_{method}.csv"
        subprocess.run(
            [sys.executable, "-m", "circumfeas", "solve", "--method", method,
             "--instance", str(inst), "--eps", "1e-6", "--budget", "10000",
             "--out", str(traj)],
            check=True, capture_output=True,
        )
        paths[method] = traj
    return paths


def test_profile_rendering_dominance(bench_outputs, tmp_path):
    """cCRM starts at rho(1) >= 0.9 and dominates the other curves throughout."""
    profile_csv = bench_outputs / "profile.csv"
    taus, fractions = read_profile_csv(profile_csv)
    assert taus[0] == 1.0
    assert fractions["ccrm"][0] >= 0.9
    for i in range(len(taus)):
        assert fractions["ccrm"][i] >= fractions["map"][i]
        assert fractions["ccrm"][i] >= fractions["crmprod"][i]

    fig = tmp_path / "profile.png"
    out = render_profile(PlotSpec(profile_path=str(profile_csv), out_path=str(fig)))
    data = (tmp_path / "profile.png").read_bytes()
    assert out == str(fig)
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    print(f"ACCEPTANCE 9 [PASS] rho(1)={fractions['ccrm'][0]:.2f}, "
          f"dominates over {len(taus)} factors, figure {len(data)} bytes")


def test_single_method_profile_flat(tmp_path):
    src = tmp_path / "profile.csv"
    src.write_text("tau,solo\n1.0,1.0\n2.0,1.0\n")
    fig = tmp_path / "flat.png"
    render_profile(PlotSpec(profile_path=str(src), out_path=str(fig)))
    assert fig.exists()


def test_empty_profile_errors_without_output(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("")
    fig = tmp_path / "nope.png"
    with pytest.raises(SchemaError):
        render_profile(PlotSpec(profile_path=str(src), out_path=str(fig)))
    assert not fig.exists()
    src.write_text("tau,map\n")  # header only
    with pytest.raises(SchemaError):
        render_profile(PlotSpec(profile_path=str(src), out_path=str(fig)))
    assert not fig.exists()


def test_profile_schema_mismatch_names_the_problem(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("factor,map\n1.0,1.0\n")
    with pytest.raises(SchemaError, match="tau"):
        render_profile(PlotSpec(profile_path=str(src), out_path=str(tmp_path / "x.png")))
    src.write_text("tau,map\n1.0,1.5\n")
    with pytest.raises(SchemaError, match=r"\[0, 1\]"):
        render_profile(PlotSpec(profile_path=str(src), out_path=str(tmp_path / "x.png")))
    src.write_text("tau,map\n0.5,0.5\n")
    with pytest.raises(SchemaError, match="below 1"):
        render_profile(PlotSpec(profile_path=str(src), out_path=str(tmp_path / "x.png")))


def test_gap_decay_from_solver_trajectories(tmp_path, trajectories):
    fig = tmp_path / "decay.png"
    spec = PlotSpec(trajectory_paths={m: str(p) for m, p in trajectories.items()},
                    out_path=str(fig))
    render_gap_decay(spec)
    assert fig.exists()

    # the solver data behind the figure: ccrm crosses 1e-6 with projections to spare
    from circumfeas_plots.render import read_trajectory_csv

    _, gaps_c, cums_c = read_trajectory_csv(trajectories["ccrm"])
    _, gaps_m, cums_m = read_trajectory_csv(trajectories["map"])
    first_c = next(c for g, c in zip(gaps_c, cums_c) if g < 1e-6)
    first_m = next(c for g, c in zip(gaps_m, cums_m) if g < 1e-6)
    assert first_c < first_m


def test_gap_decay_constant_input_renders_flat_line(tmp_path):
    src = tmp_path / "flat.csv"
    rows = ["iteration,gap,cumulative_projections"]
    rows += [f"{k},0.5,{2 * k}" for k in range(10)]
    src.write_text("\n".join(rows) + "\n")
    fig = tmp_path / "flat.png"
    render_gap_decay(PlotSpec(trajectory_paths={"const": str(src)}, out_path=str(fig)))
    assert fig.exists()


def test_gap_decay_schema_mismatch(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("step,gap,total\n0,1.0,2\n")
    with pytest.raises(SchemaError, match="header"):
        render_gap_decay(PlotSpec(trajectory_paths={"x": str(src)},
                                  out_path=str(tmp_path / "y.png")))
    assert not (tmp_path / "y.png").exists()


def test_rendering_is_deterministic_and_input_untouched(tmp_path):
    src = tmp_path / "profile.csv"
    src.write_text("tau,ccrm,map\n1.0,0.9,0.1\n2.0,1.0,0.4\n8.0,1.0,1.0\n")
    before = hashlib.sha256(src.read_bytes()).hexdigest()
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render_profile(PlotSpec(profile_path=str(src), out_path=str(a)))
    render_profile(PlotSpec(profile_path=str(src), out_path=str(b)))
    assert a.read_bytes() == b.read_bytes()
    assert hashlib.sha256(src.read_bytes()).hexdigest() == before


def test_svg_output(tmp_path):
    src = tmp_path / "profile.csv"
    src.write_text("tau,ccrm\n1.0,1.0\n")
    fig = tmp_path / "fig.svg"
    render_profile(PlotSpec(profile_path=str(src), out_path=str(fig), svg=True))
    head = fig.read_text()[:300]
    assert "<svg" in head


def test_cli_profile_and_errors(tmp_path, capsys):
    src = tmp_path / "profile.csv"
    src.write_text("tau,ccrm,map\n1.0,0.9,0.1\n2.0,1.0,0.4\n")
    fig = tmp_path / "cli.png"
    assert main(["--profile", str(src), "--out", str(fig)]) == 0
    assert fig.exists()

    assert main(["--out", str(fig)]) == 2  # neither input kind
    assert main(["--profile", str(src), "--records", "a=b", "--out", str(fig)]) == 2

    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n1\n")
    assert main(["--profile", str(bad), "--out", str(tmp_path / "z.png")]) == 1


def test_cli_gap_decay(tmp_path):
    src = tmp_path / "t.csv"
    rows = ["iteration,gap,cumulative_projections"]
    rows += [f"{k},{10.0 * 0.5 ** k!r},{2 * k}" for k in range(12)]
    src.write_text("\n".join(rows) + "\n")
    fig = tmp_path / "decay.png"
    assert main(["--records", f"map={src}", "--out", str(fig)]) == 0
    assert fig.exists()
    assert main(["--records", "missing-equals-sign", "--out", str(fig)]) == 2
