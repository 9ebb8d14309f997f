import json
import math

import numpy as np
import pytest

from qrelent import io as qio
from qrelent.cli import main
from qrelent.errors import FileFormatError
from qrelent.sampling import as_rng, random_state

LN2 = math.log(2)


def write_diag(path, values):
    dim = len(values)
    entries = []
    for i in range(dim):
        for j in range(dim):
            entries.append([float(values[i]) if i == j else 0.0, 0.0])
    path.write_text(json.dumps({"dim": dim, "entries": entries}))
    return path


def write_jump_family(path, c=LN2, dim=2):
    path.write_text(json.dumps({"kind": "jump", "c": c, "dim": dim}))
    return path


class TestMatrixFormat:
    def test_round_trip(self, tmp_path):
        rho = random_state(as_rng(1), 3)
        target = tmp_path / "rho.json"
        qio.save_matrix(target, rho.matrix)
        loaded = qio.load_positive(target)
        assert np.allclose(loaded.matrix, rho.matrix)

    def test_rectangular_object(self):
        m = np.arange(6, dtype=float).reshape(2, 3).astype(complex)
        back = qio.matrix_from_obj(qio.matrix_to_obj(m))
        assert np.array_equal(back, m)

    @pytest.mark.parametrize(
        "obj",
        [
            {"entries": [[1.0, 0.0]]},
            {"dim": 2, "entries": [[1.0, 0.0]]},
            {"dim": 2, "entries": [[1.0, 0.0]] * 3 + ["bad"]},
            {"dim": 0, "entries": []},
            [1, 2, 3],
        ],
    )
    def test_malformed_rejected(self, obj):
        with pytest.raises(FileFormatError):
            qio.matrix_from_obj(obj)


class TestChannelFormat:
    def test_round_trip(self, tmp_path):
        from qrelent.channels import random_channel

        ch = random_channel(2, 3, 2, seed=8)
        target = tmp_path / "chan.json"
        qio.save_channel(target, ch)
        loaded = qio.load_channel(target)
        assert loaded.dim_in == 2 and loaded.dim_out == 3
        for a, b in zip(loaded.kraus, ch.kraus):
            assert np.allclose(a, b)

    def test_declared_dims_checked(self, tmp_path):
        obj = {
            "dimIn": 3,
            "dimOut": 2,
            "kraus": [{"dim": 2, "entries": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]}],
        }
        target = tmp_path / "chan.json"
        target.write_text(json.dumps(obj))
        with pytest.raises(FileFormatError):
            qio.load_channel(target)


class TestFamilyFormat:
    def test_jump_descriptor(self, tmp_path):
        fam = qio.load_family(write_jump_family(tmp_path / "fam.json", c=0.5, dim=3))
        assert fam.dim == 3 and fam.analytic_jump.value == 0.5

    def test_continuous_descriptor(self, tmp_path):
        p = tmp_path / "fam.json"
        p.write_text(json.dumps({"kind": "continuous", "dim": 3, "seed": 7}))
        fam = qio.load_family(p)
        assert fam.dim == 3 and fam.analytic_jump.value == 0.0

    def test_table_descriptor(self, tmp_path):
        mat = qio.matrix_to_obj(np.diag([0.5, 0.5]).astype(complex))
        obj = {
            "kind": "table",
            "dim": 2,
            "members": [{"n": 1, "rho": mat, "sigma": mat}],
            "limit": {"rho": mat, "sigma": mat},
            "analytic_jump": 0.0,
        }
        p = tmp_path / "fam.json"
        p.write_text(json.dumps(obj))
        fam = qio.load_family(p)
        rho, sigma = fam.pair(1)
        assert rho.trace == pytest.approx(1.0)

    def test_unknown_kind(self, tmp_path):
        p = tmp_path / "fam.json"
        p.write_text(json.dumps({"kind": "mystery"}))
        with pytest.raises(FileFormatError):
            qio.load_family(p)


class TestReportSerialization:
    def test_infinities_become_strings(self):
        text = qio.report_json({"a": math.inf, "b": [1.0, -math.inf], "c": {"d": math.nan}})
        doc = json.loads(text)
        assert doc == {"a": "inf", "b": [1.0, "-inf"], "c": {"d": "nan"}}

    def test_csv_flattening(self):
        report = {
            "check": "demo",
            "params": {"trials": 2},
            "seed": 1,
            "residuals": {"worst": 0.5},
            "trials": [{"trial": 0, "value": 1.0}, {"trial": 1, "value": 2.0}],
            "pass": True,
            "runtime_ms": 3.0,
        }
        text = qio.report_csv(report)
        lines = text.strip().splitlines()
        assert len(lines) == 3
        assert "params.trials" in lines[0] and "value" in lines[0]

    def test_atomic_write(self, tmp_path):
        target = tmp_path / "sub" / "report.json"
        qio.write_report({"check": "x", "pass": True}, target)
        assert json.loads(target.read_text())["check"] == "x"
        leftovers = [p for p in (tmp_path / "sub").iterdir() if p.suffix == ".tmp"]
        assert not leftovers


class TestCliDiv:
    def test_identical_files(self, tmp_path, capsys):
        p = write_diag(tmp_path / "rho.json", [0.5, 0.5])
        assert main(["div", str(p), str(p)]) == 0
        assert float(capsys.readouterr().out) == 0.0

    def test_zero_numerator_prints_trace(self, tmp_path, capsys):
        z = write_diag(tmp_path / "zero.json", [0.0, 0.0])
        s = write_diag(tmp_path / "sigma.json", [0.3, 0.2])
        assert main(["div", str(z), str(s)]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.5, abs=1e-12)

    def test_support_violation_prints_inf(self, tmp_path, capsys):
        a = write_diag(tmp_path / "a.json", [1.0, 0.0])
        b = write_diag(tmp_path / "b.json", [0.0, 1.0])
        assert main(["div", str(a), str(b)]) == 0
        assert capsys.readouterr().out.strip() == "inf"

    def test_classical_value(self, tmp_path, capsys):
        a = write_diag(tmp_path / "a.json", [0.5, 0.5])
        b = write_diag(tmp_path / "b.json", [0.75, 0.25])
        assert main(["div", str(a), str(b)]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.5 * math.log(4 / 3), abs=1e-11)

    def test_malformed_file_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        good = write_diag(tmp_path / "good.json", [1.0])
        assert main(["div", str(bad), str(good)]) == 2
        assert "error" in capsys.readouterr().err

    def test_invariant_violation_named(self, tmp_path, capsys):
        nonpsd = tmp_path / "nonpsd.json"
        nonpsd.write_text(
            json.dumps({"dim": 2, "entries": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]]})
        )
        good = write_diag(tmp_path / "good.json", [0.5, 0.5])
        assert main(["div", str(nonpsd), str(good)]) == 2
        assert "positivity" in capsys.readouterr().err


class TestCliEntropyApply:
    def test_entropy(self, tmp_path, capsys):
        p = write_diag(tmp_path / "rho.json", [0.5, 0.5])
        assert main(["entropy", str(p)]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(LN2, abs=1e-11)

    def test_apply_writes_matrix(self, tmp_path, capsys):
        p = write_diag(tmp_path / "rho.json", [1.0, 0.0])
        out = tmp_path / "image.json"
        assert main(["apply", "depolarizing", str(p), "--out", str(out)]) == 0
        image = qio.load_positive(out)
        assert np.allclose(image.matrix, np.eye(2) / 2.0)

    def test_apply_random_needs_seed(self, tmp_path, capsys):
        p = write_diag(tmp_path / "rho.json", [1.0, 0.0])
        assert main(["apply", "random(3,2)", str(p)]) == 2
        assert "--seed" in capsys.readouterr().err


class TestCliVerify:
    def test_report_written_and_exit_zero(self, tmp_path, capsys):
        out = tmp_path / "dpi.json"
        rc = main(["verify", "dpi", "--trials", "25", "--seed", "42", "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["check"] == "dpi" and report["pass"] is True
        assert len(report["trials"]) == 25

    def test_seed_mandatory(self, capsys):
        assert main(["verify", "dpi", "--trials", "5"]) == 2

    def test_unknown_suite_exits_2(self, capsys):
        assert main(["verify", "nosuch", "--seed", "1"]) == 2

    def test_csv_format(self, tmp_path):
        out = tmp_path / "donald.csv"
        rc = main(
            ["verify", "donald", "--trials", "8", "--seed", "3", "--format", "csv",
             "--out", str(out)]
        )
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 9  # header + one row per trial

    def test_determinism_modulo_runtime(self, tmp_path):
        outs = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            main(["verify", "scaling", "--trials", "20", "--seed", "7", "--out", str(out)])
            doc = json.loads(out.read_text())
            doc.pop("runtime_ms")
            outs.append(json.dumps(doc, sort_keys=True))
        assert outs[0] == outs[1]


class TestCliJump:
    def test_depolarizing_passes(self, tmp_path):
        fam = write_jump_family(tmp_path / "fam.json")
        out = tmp_path / "jump.json"
        rc = main(
            ["jump", str(fam), "--channel", "depolarizing", "--nmax", "300",
             "--window", "30", "--out", str(out)]
        )
        assert rc == 0
        report = json.loads(out.read_text())
        assert abs(report["output"]["estimate"]) <= 1e-6
        assert report["pass"] is True

    def test_identity_equality_case(self, tmp_path):
        fam = write_jump_family(tmp_path / "fam.json")
        out = tmp_path / "jump.json"
        rc = main(["jump", str(fam), "--channel", "identity", "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["output"]["estimate"] == pytest.approx(LN2, abs=5e-3)

    def test_random_channel_deterministic(self, tmp_path):
        fam = write_jump_family(tmp_path / "fam.json")
        docs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            rc = main(
                ["jump", str(fam), "--channel", "random(3,2)", "--seed", "5",
                 "--nmax", "20", "--window", "10", "--rank-tol", "1e-13",
                 "--out", str(out)]
            )
            assert rc == 0
            doc = json.loads(out.read_text())
            doc.pop("runtime_ms")
            docs.append(json.dumps(doc, sort_keys=True))
        assert docs[0] == docs[1]

    def test_plot_written(self, tmp_path):
        fam = write_jump_family(tmp_path / "fam.json")
        out = tmp_path / "jump.json"
        plot = tmp_path / "curves.svg"
        rc = main(
            ["jump", str(fam), "--channel", "depolarizing", "--nmax", "200",
             "--window", "20", "--out", str(out), "--plot", str(plot)]
        )
        assert rc == 0
        head = plot.read_bytes()[:200]
        assert b"<svg" in head or b"<?xml" in head

    def test_plot_path_derived_from_out(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        fam = write_jump_family(tmp_path / "fam.json")
        out = tmp_path / "jump.json"
        rc = main(["jump", str(fam), "--nmax", "100", "--window", "10",
                   "--out", str(out), "--plot"])
        assert rc == 0
        assert (tmp_path / "jump.svg").exists()

    def test_malformed_family_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "fam.json"
        bad.write_text(json.dumps({"kind": "jump"}))
        assert main(["jump", str(bad)]) == 2


class TestCliTrace:
    def test_identity_trace_passes(self, tmp_path, capsys):
        fam = write_jump_family(tmp_path / "fam.json")
        out = tmp_path / "trace.json"
        rc = main(
            ["trace", str(fam), "--m-max", "4", "--nmax", "60", "--out", str(out)]
        )
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["pass"] is True
        assert {row["m"] for row in report["trials"]} == {1, 2, 3, 4}

    def test_dephasing_trace_passes(self, tmp_path):
        fam = write_jump_family(tmp_path / "fam.json")
        rc = main(["trace", str(fam), "--channel", "dephasing", "--m-max", "3",
                   "--nmax", "40"])
        assert rc == 0

    def test_malformed_family_exits_2(self, tmp_path):
        bad = tmp_path / "fam.json"
        bad.write_text("[]")
        assert main(["trace", str(bad)]) == 2


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nmax = 120\nwindow = 10\n")
        fam = write_jump_family(tmp_path / "fam.json")
        out = tmp_path / "jump.json"
        rc = main(["--config", str(cfg), "jump", str(fam), "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["params"]["n_max"] == 120
        rc = main(["--config", str(cfg), "jump", str(fam), "--nmax", "60",
                   "--out", str(out)])
        assert json.loads(out.read_text())["params"]["n_max"] == 60

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["--config", str(tmp_path / "nope.cfg"), "entropy", "x"]) == 2
