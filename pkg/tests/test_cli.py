import json

from flocklab.cli import main

MT_DOC = """
[model]
model = mt
s = 0.25
alpha = 1

[initial]
N = 6
seed = 3
pos_min = 0
pos_max = 4

[integration]
dt = 0.05
T = 2
snapshot_stride = 10
"""

HYDRO_DOC = """
[model]
model = mt
s = 0.25
alpha = 1

[initial]
N = 2
seed = 1

[integration]
dt = 0.08
T = 2
snapshot_stride = 10

[hydro]
x_min = -8
x_max = 8
dx = 0.1
profile = two-bump
centers = -3 3
width = 0.5
speeds = 0.5 -0.5
"""

GROUPS_DOC = """
[model]
model = mt
phi = power-law-with-cutoff
s = 4
cutoff = 5
alpha = 1

[initial]
kind = two-group
N1 = 3
N2 = 20
D = 40
group_spread = 0.5
seed = 11

[integration]
dt = 0.05
T = 150
"""


def write(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_simulate_writes_outputs(tmp_path):
    cfg = write(tmp_path, MT_DOC)
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["prng"] == "splitmix64"
    assert summary["certificate"]["verdict"] == "unconditional"
    assert summary["decay_check"]["passed"] is True
    assert summary["scenario"]["initial"]["seed"] == 3
    diagnostics = (out / "diagnostics.csv").read_text().splitlines()
    assert diagnostics[0] == "t,d_x,d_v,momentum_norm,decay_margin"
    assert len(diagnostics) == 42  # header + 41 recorded instants
    snapshots = (out / "snapshots.csv").read_text().splitlines()
    assert snapshots[0] == "t,agent,x0,x1,v0,v1"
    assert len(snapshots) == 1 + 6 * 5  # initial + steps 10,20,30,40


def test_simulate_is_byte_deterministic(tmp_path):
    cfg = write(tmp_path, MT_DOC)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(out_a), "--quiet"]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(out_b), "--quiet"]) == 0
    for name in ("diagnostics.csv", "snapshots.csv", "summary.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_seed_override_changes_outputs(tmp_path):
    cfg = write(tmp_path, MT_DOC)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(out_a), "--quiet"]) == 0
    assert main(
        ["simulate", "--config", cfg, "--out", str(out_b), "--seed", "4", "--quiet"]
    ) == 0
    assert (out_a / "diagnostics.csv").read_bytes() != (out_b / "diagnostics.csv").read_bytes()
    summary = json.loads((out_b / "summary.json").read_text())
    assert summary["scenario"]["initial"]["seed"] == 4


def test_simulate_vision_model_skips_certificate(tmp_path):
    doc = MT_DOC.replace(
        "model = mt", "model = vision\ngamma = 0.2\nnormalization = mt-style"
    )
    cfg = write(tmp_path, doc)
    out = tmp_path / "vision"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["certificate"] is None  # no alignment guarantee for vision
    assert summary["decay_check"] is None  # and no default level schedule
    diagnostics = (out / "diagnostics.csv").read_text().splitlines()
    assert diagnostics[1].endswith("nan")  # margin column not computable


def test_certify_command(tmp_path):
    cfg = write(tmp_path, MT_DOC)
    out = tmp_path / "cert"
    assert main(["certify", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["certificate"]["verdict"] == "unconditional"
    assert summary["certificate"]["tail"] == "diverges"
    assert summary["symmetric_theory_tail"] == "diverges"


def test_verify_lemma_command(tmp_path):
    out = tmp_path / "lemma"
    assert main(["verify-lemma", "--seed", "5", "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["cases"] == 1000
    assert summary["violations"] == 0
    assert summary["worst_slack"] >= -1e-12


def test_hydro_command(tmp_path):
    cfg = write(tmp_path, HYDRO_DOC)
    out = tmp_path / "hydro"
    assert main(["hydro", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["max_step_mass_drift"] <= 1e-12
    assert summary["certificate"]["verdict"] == "unconditional"
    fields = (out / "fields.csv").read_text().splitlines()
    assert fields[0] == "t,x,rho,u"
    diag = (out / "diagnostics.csv").read_text().splitlines()
    assert diag[0] == "t,d_x,d_v,mass"


def test_sweep_exponent_flips_verdict(tmp_path):
    cfg = write(tmp_path, MT_DOC)
    out = tmp_path / "sweep"
    assert main(
        ["sweep", "--config", cfg, "--out", str(out), "--quiet", "s", "0.25,0.5,0.6,1"]
    ) == 0
    rows = (out / "sweep.csv").read_text().splitlines()[1:]
    verdicts = {float(r.split(",")[0]): r.split(",")[3] for r in rows}
    assert verdicts[0.25] == "unconditional"
    assert verdicts[0.5] == "unconditional"
    assert verdicts[0.6] != "unconditional"
    assert verdicts[1.0] != "unconditional"


def test_sweep_alpha_rates_increase(tmp_path):
    cfg = write(tmp_path, MT_DOC.replace("T = 2", "T = 6"))
    out = tmp_path / "alpha"
    assert main(
        ["sweep", "--config", cfg, "--out", str(out), "--quiet", "alpha", "0.5,1,2"]
    ) == 0
    rows = (out / "sweep.csv").read_text().splitlines()[1:]
    rates = [float(r.split(",")[2]) for r in rows]
    assert rates[0] < rates[1] < rates[2]


def test_sweep_rejects_bad_parameter(tmp_path):
    cfg = write(tmp_path, MT_DOC)
    assert main(["sweep", "--config", cfg, "--quiet", "phase", "1,2"]) == 2
    assert main(["sweep", "--config", cfg, "--quiet", "s", " "]) == 2


def test_compare_groups_reports_contrast(tmp_path):
    cfg = write(tmp_path, GROUPS_DOC)
    out = tmp_path / "groups"
    assert main(["compare-groups", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["mt"]["halving_time"] is not None
    # the remote crowd halts the averaged dynamics: either cs halves much
    # later, or not at all within the horizon (ratio then a lower bound)
    assert summary["halving_time_ratio_cs_over_mt"] > 10.0
    assert summary["rate_ratio_mt_over_cs"] > 1.0


def test_compare_groups_requires_two_group_kind(tmp_path):
    cfg = write(tmp_path, MT_DOC)
    assert main(["compare-groups", "--config", cfg, "--quiet"]) == 2


def test_bad_config_exits_two(tmp_path):
    cfg = write(tmp_path, MT_DOC.replace("alpha = 1", "alpha = -3"))
    assert main(["simulate", "--config", cfg, "--quiet"]) == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg"), "--quiet"]) == 2


def test_stability_violation_exits_three(tmp_path):
    cfg = write(tmp_path, HYDRO_DOC.replace("dt = 0.08", "dt = 0.5"))
    assert main(["hydro", "--config", cfg, "--out", str(tmp_path / "h"), "--quiet"]) == 3


def test_console_entry_point(tmp_path):
    import subprocess
    import sys

    cfg = write(tmp_path, MT_DOC)
    proc = subprocess.run(
        [sys.executable, "-m", "flocklab", "certify", "--config", cfg,
         "--out", str(tmp_path / "m"), "--quiet"],
        capture_output=True,
    )
    assert proc.returncode == 0
