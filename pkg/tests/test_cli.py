import json
from pathlib import Path

import pytest

from kgmlab import cli

SOLVE_INI = """
[physics]
n = 3
p = 4.0
m0 = 1.0
m1 = 1.0
q = 1.0
omega = 0.5

[grid]
n_cells = 100

[mountainpass]
max_outer_iters = 60

[solve]
seed_mu = 0.2
"""

PHASE_INI = """
[phase_ratio]
dims = 3, 5
mus = 1e-1, 1e-2
grid_n = 2000
"""

GAUGE_INI = """
[gauge_check]
n = 5
mu = 0.05
lambdas = 1, 4, 16, 64, 256
n_random = 4
grid_n = 600
seed = 0
"""

POHO_INI = """
[pohozaev]
n = 5
mus = 1e-2
r0 = 1.0
grid_n = 1500
"""

AUBIN_INI = """
[aubin]
n = 5
lam = 1.0
rho0 = 1.0
eps = 0.3, 0.1
grid_n = 2000
grading = 2.0
"""


def write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestExitCodes:
    def test_solve_ok(self, tmp_path):
        cfg = write(tmp_path, SOLVE_INI)
        out = tmp_path / "out"
        assert cli.main(["solve", "--config", cfg, "--out", str(out),
                         "--quiet"]) == 0
        report = json.loads((out / "solve_report.json").read_text())
        assert report["status"] == "ok"
        assert report["residual1"] <= 1e-8
        header = (out / "solve_samples.csv").read_text().splitlines()[0]
        assert header == "r,u,v"

    def test_missing_config(self, tmp_path):
        assert cli.main(["solve", "--config", str(tmp_path / "nope.ini"),
                         "--out", str(tmp_path), "--quiet"]) == 2

    def test_malformed_config(self, tmp_path):
        cfg = write(tmp_path, "[physics]\nn = 3\np = not-a-number\n")
        assert cli.main(["solve", "--config", cfg, "--out", str(tmp_path),
                         "--quiet"]) == 2

    def test_refused_phase(self, tmp_path):
        cfg = write(tmp_path, SOLVE_INI.replace("omega = 0.5", "omega = 1.5"))
        assert cli.main(["solve", "--config", cfg, "--out", str(tmp_path),
                         "--quiet"]) == 4

    def test_sweep_range_refused(self, tmp_path):
        cfg = write(tmp_path, SOLVE_INI + "\n[sweep]\nomega_min = -2\n"
                    "omega_max = 2\ncount = 3\n")
        assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path),
                         "--quiet"]) == 4

    def test_empty_eps_list(self, tmp_path):
        cfg = write(tmp_path, AUBIN_INI.replace("eps = 0.3, 0.1", "eps ="))
        assert cli.main(["aubin-scan", "--config", cfg, "--out", str(tmp_path),
                         "--quiet"]) == 2


class TestOutputs:
    def test_phase_ratio_csv(self, tmp_path):
        cfg = write(tmp_path, PHASE_INI)
        out = tmp_path / "pr"
        assert cli.main(["phase-ratio", "--config", cfg, "--out", str(out),
                         "--quiet"]) == 0
        lines = (out / "phase_ratio.csv").read_text().splitlines()
        assert lines[0] == "n,q,m1,grid_n,mu,ratio,note"
        assert len(lines) == 5      # 2 dims x 2 mus
        ratios = [float(line.split(",")[5]) for line in lines[1:]]
        assert all(0.0 <= r <= 1.0 for r in ratios)

    def test_grid_override(self, tmp_path):
        cfg = write(tmp_path, PHASE_INI)
        out = tmp_path / "pr2"
        assert cli.main(["phase-ratio", "--config", cfg, "--out", str(out),
                         "--grid-n", "1500", "--quiet"]) == 0
        lines = (out / "phase_ratio.csv").read_text().splitlines()
        assert lines[1].split(",")[3] == "1500"

    def test_gauge_check_outputs(self, tmp_path):
        cfg = write(tmp_path, GAUGE_INI)
        out = tmp_path / "gc"
        assert cli.main(["gauge-check", "--config", cfg, "--out", str(out),
                         "--quiet"]) == 0
        report = json.loads((out / "gauge_check.json").read_text())
        assert report["max_bound_violation"] <= 1e-10
        lines = (out / "truncation.csv").read_text().splitlines()
        assert lines[0] == "n,q,m1,grid_n,mu,cutoff,h1_delta"
        assert len(lines) == 6

    def test_pohozaev_csv(self, tmp_path):
        cfg = write(tmp_path, POHO_INI)
        out = tmp_path / "po"
        assert cli.main(["pohozaev", "--config", cfg, "--out", str(out),
                         "--quiet"]) == 0
        lines = (out / "pohozaev.csv").read_text().splitlines()
        assert lines[0].startswith("n,q,m1,grid_n,grading,r0,mu,beta,lhs_mass")

    def test_csv_schema_file_matches_writers(self):
        schema = json.loads(
            (Path(cli.__file__).parent / "csv_schema.json").read_text())
        for name, columns in cli.CSV_COLUMNS.items():
            assert list(schema["tables"][name]["columns"].keys()) == columns


class TestDeterminism:
    @pytest.mark.parametrize("ini,command,files", [
        (PHASE_INI, "phase-ratio", ["phase_ratio.csv"]),
        (AUBIN_INI, "aubin-scan", ["aubin_scan.csv"]),
        (POHO_INI, "pohozaev", ["pohozaev.csv", "pohozaev_report.json"]),
        (GAUGE_INI, "gauge-check", ["truncation.csv", "gauge_check.json"]),
        (SOLVE_INI, "solve", ["solve_report.json", "solve_samples.csv"]),
    ])
    def test_byte_identical_reruns(self, tmp_path, ini, command, files):
        cfg = write(tmp_path, ini)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert cli.main([command, "--config", cfg, "--out", str(out1),
                         "--quiet"]) == 0
        assert cli.main([command, "--config", cfg, "--out", str(out2),
                         "--quiet"]) == 0
        for name in files:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestServerMode:
    def test_round_trip_against_asgi(self, tmp_path, monkeypatch):
        # thin-client path: same writers, transport via HTTP test client
        from fastapi.testclient import TestClient
        from kgmlab.service.app import app

        test_client = TestClient(app)

        def fake_post(url, json=None, timeout=None):
            path = "/" + url.rsplit("/", 1)[1]
            return test_client.post(path, json=json)

        import httpx
        monkeypatch.setattr(httpx, "post", fake_post)
        cfg = write(tmp_path, PHASE_INI)
        out_local = tmp_path / "local"
        out_remote = tmp_path / "remote"
        assert cli.main(["phase-ratio", "--config", cfg, "--out",
                         str(out_local), "--quiet"]) == 0
        assert cli.main(["phase-ratio", "--config", cfg, "--out",
                         str(out_remote), "--server", "http://svc",
                         "--quiet"]) == 0
        assert (out_local / "phase_ratio.csv").read_bytes() == \
            (out_remote / "phase_ratio.csv").read_bytes()
