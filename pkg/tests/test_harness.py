import json
import subprocess
import sys
from pathlib import Path

import pytest

from cardylab.harness import (
    ExperimentConfig,
    UnsupportedCinfError,
    cmd_convergence,
    cmd_discretize,
    cmd_estimate,
    cmd_fit,
    cmd_sigma_holo,
    load_defaults,
)


def small_cfg(tmp_path, **kw):
    base = dict(
        domain="square",
        n_ladder=(8, 16),
        samples=4000,
        stream=7,
        outdir=str(tmp_path),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_hash_stable(tmp_path):
    c1 = small_cfg(tmp_path)
    c2 = small_cfg(tmp_path)
    assert c1.config_hash() == c2.config_hash()
    c3 = small_cfg(tmp_path, samples=5000)
    assert c3.config_hash() != c1.config_hash()


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        small_cfg(tmp_path, n_ladder=(16, 8))
    with pytest.raises(ValueError):
        small_cfg(tmp_path, samples=0)


def test_defaults_file_loads():
    d = load_defaults()
    assert d.get("theta") == 0.05
    assert d.get("B") == 7 and d.get("r") == 3


def test_discretize_outputs(tmp_path):
    rep = cmd_discretize(small_cfg(tmp_path))
    out = Path(rep["outdir"])
    assert (out / "discretize.csv").exists()
    assert (out / "discretize.json").exists()
    assert (out / "manifest.json").exists()
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "discretize"
    assert "discretize.csv" in man["outputs"]


def test_estimate_command(tmp_path):
    rep = cmd_estimate(small_cfg(tmp_path, n_ladder=(8,)), source="DA", target="BC")
    assert 0 <= rep["points"][0]["mean"] <= 1


def test_convergence_unsupported(tmp_path):
    with pytest.raises(UnsupportedCinfError):
        cmd_convergence(small_cfg(tmp_path, domain="fjord"))


def _report_files(outdir: Path):
    for p in sorted(outdir.rglob("*")):
        if p.suffix in (".csv", ".json") and p.name != "manifest.json":
            yield p


def test_byte_identical_reruns(tmp_path):
    cfg1 = small_cfg(tmp_path / "a", n_ladder=(8, 16, 24))
    cfg2 = small_cfg(tmp_path / "b", n_ladder=(8, 16, 24))
    r1 = cmd_convergence(cfg1)
    r2 = cmd_convergence(cfg2)
    files1 = {p.name: p.read_bytes() for p in _report_files(Path(r1["outdir"]))}
    files2 = {p.name: p.read_bytes() for p in _report_files(Path(r2["outdir"]))}
    assert files1.keys() == files2.keys()
    for name in files1:
        assert files1[name] == files2[name], name
    # manifests agree except for the wall clock
    m1 = json.loads((Path(r1["outdir"]) / "manifest.json").read_text())
    m2 = json.loads((Path(r2["outdir"]) / "manifest.json").read_text())
    m1.pop("wall_clock_s"), m2.pop("wall_clock_s")
    m1["config"].pop("outdir"), m2["config"].pop("outdir")
    assert m1 == m2


def test_byte_identical_across_worker_counts(tmp_path):
    import numba

    cfg1 = small_cfg(tmp_path / "w1")
    r1 = cmd_convergence(cfg1)
    old = numba.get_num_threads()
    try:
        numba.set_num_threads(1)
        cfg2 = small_cfg(tmp_path / "w2")
        r2 = cmd_convergence(cfg2)
    finally:
        numba.set_num_threads(old)
    files1 = {p.name: p.read_bytes() for p in _report_files(Path(r1["outdir"]))}
    files2 = {p.name: p.read_bytes() for p in _report_files(Path(r2["outdir"]))}
    assert files1 == files2


def test_sigma_holo_emits_three_reports(tmp_path):
    rep = cmd_sigma_holo(small_cfg(tmp_path, n_ladder=(8, 16)))
    out = Path(rep["outdir"])
    names = {p.name for p in _report_files(out)}
    assert {"residuals.csv", "rho_fit.json", "cauchy_proximity.json"} <= names


def test_noise_floor_flags_on_starved_budget(tmp_path):
    rep = cmd_sigma_holo(small_cfg(tmp_path, n_ladder=(8, 16, 24), samples=100))
    verdict = rep["rho"]["verdict"]
    flags = rep["rho"]["noise_flags"]
    assert verdict in ("MC_NOISE_DOMINATED", "DEGENERATE") or "MC_NOISE_FLOOR" in flags


def test_fit_command(tmp_path):
    csv = tmp_path / "in.csv"
    rows = ["n,value,stderr"] + [f"{n},{2.0 * n ** -0.7},{0.0001}" for n in (8, 16, 32, 64)]
    csv.write_text("\n".join(rows))
    rep = cmd_fit(small_cfg(tmp_path), str(csv))
    assert rep["psi_hat"] == pytest.approx(0.7, abs=0.01)


def test_cli_help_and_smoke(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "cardylab.cli", "--help"], capture_output=True, text=True
    )
    assert out.returncode == 0
    for sub in ("discretize", "estimate", "convergence", "regularize",
                "sigma-holo", "cauchy", "harris", "fit"):
        assert sub in out.stdout


def test_cli_exit_codes(tmp_path):
    out = subprocess.run(
        [
            sys.executable, "-m", "cardylab.cli", "discretize",
            "--domain", "square", "--n-ladder", "8,16",
            "--samples", "1000", "--out", str(tmp_path),
        ],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    bad = subprocess.run(
        [sys.executable, "-m", "cardylab.cli", "convergence", "--domain", "nosuch"],
        capture_output=True,
        text=True,
    )
    assert bad.returncode == 1


def test_cli_thread_cap_env(tmp_path):
    out = subprocess.run(
        [
            sys.executable, "-m", "cardylab.cli", "estimate",
            "--domain", "square", "--n-ladder", "8", "--samples", "2000",
            "--out", str(tmp_path),
        ],
        capture_output=True,
        text=True,
        env={"CARDY_LAB_THREADS": "1", "PATH": "/usr/bin:/bin:/usr/local/bin"},
    )
    assert out.returncode == 0, out.stderr
