import json

import numpy as np
import pytest

from tomostop import io
from tomostop.cli import main
from tomostop.errors import ValidationError
from tomostop.homodyne import HomodyneDataset
from tomostop.likelihood import Dataset, qubit_example
from tomostop.quantum import random_density


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def qubit_file(tmp_path):
    return write(tmp_path / "qubit.json", io.dataset_to_json(qubit_example()))


@pytest.fixture
def z_file(tmp_path):
    return write(tmp_path / "z.json", io.matrix_to_json(np.diag([1.0, -1.0])))


class TestFormats:
    def test_matrix_roundtrip(self, rng):
        m = random_density(3, rng)
        np.testing.assert_array_equal(io.matrix_from_json(json.loads(json.dumps(io.matrix_to_json(m)))), m)

    def test_matrix_malformed(self):
        with pytest.raises(ValidationError):
            io.matrix_from_json([[1, 2], [3, 4]])

    def test_dataset_roundtrip(self):
        data = qubit_example()
        back = io.dataset_from_json(json.loads(json.dumps(io.dataset_to_json(data))))
        np.testing.assert_array_equal(back.ops, data.ops)
        np.testing.assert_array_equal(back.weights, data.weights)

    def test_homodyne_roundtrip(self):
        data = HomodyneDataset([0.0, 1.0], [0.5, -0.2], 0.9, 4)
        obj = io.dataset_to_json(data)
        assert obj["kind"] == "homodyne" and obj["records"] == [[0.0, 0.5], [1.0, -0.2]]
        back = io.dataset_from_json(obj)
        np.testing.assert_array_equal(back.ops, data.ops)

    def test_dataset_validation(self):
        with pytest.raises(ValidationError):
            io.dataset_from_json({"dim": 2, "elements": []})
        bad = {"dim": 2, "elements": [{"op": io.matrix_to_json(np.diag([1.0, -1.0])), "weight": 1}]}
        with pytest.raises(ValidationError):
            io.dataset_from_json(bad)

    def test_scenario(self):
        sc = io.scenario_from_json({"alpha": [1, 0], "n_samples": 10, "seed": 3})
        assert sc.alpha == 1 and sc.n_samples == 10
        assert io.scenario_from_json(io.scenario_to_json(sc)) == sc
        with pytest.raises(ValidationError):
            io.scenario_from_json({"bogus": 1})


class TestCli:
    def test_simulate_deterministic(self, tmp_path, capsys):
        cfg = write(tmp_path / "sc.json", {"alpha": [1, 0], "n_samples": 300, "seed": 5})
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
        for name in ("dataset.json", "truth.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert len(json.loads((tmp_path / "a" / "dataset.json").read_text())["records"]) == 300
        assert "purity" in capsys.readouterr().out

    def test_simulate_rejects_zero_samples(self, tmp_path, capsys):
        cfg = write(tmp_path / "sc.json", {"n_samples": 0})
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ValidationError"

    def test_fit_qubit(self, tmp_path, qubit_file, capsys):
        out = tmp_path / "fit"
        assert main(["fit", "--config", qubit_file, "--out", str(out), "--r-threshold", "1e-6"]) == 0
        fit = json.loads((out / "fit.json").read_text())
        np.testing.assert_allclose(io.matrix_from_json(fit["state"]), np.diag([0.75, 0.25]), atol=1e-6)
        assert fit["stop_reason"] == "rule_satisfied"
        assert (out / "trace.csv").read_text().splitlines()[0] == "k,loglik,r_k,trace_dist,step,epsilon"

    def test_fit_gradient_algo_and_reference(self, tmp_path, qubit_file, capsys):
        ref = tmp_path / "ref.txt"
        ref.write_text("-2.2493405784\n")
        out = tmp_path / "fit"
        assert main(["fit", "--config", qubit_file, "--out", str(out), "--algo", "gradient",
                     "--r-threshold", "1e-6", "--reference-loglik", str(ref)]) == 0
        gap = (out / "gap.csv").read_text().splitlines()
        assert gap[0] == "k,gap,r_k" and len(gap) >= 2
        assert "gradient_ascent" in (out / "trace.csv").read_text()

    def test_fit_cat_contexts(self, tmp_path, cat_data, capsys):
        from scipy import stats

        data_file = write(tmp_path / "d.json", io.dataset_to_json(cat_data))
        assert main(["fit", "--config", data_file, "--out", str(tmp_path / "p"), "--context", "point", "--s", "0.5"]) == 0
        out = capsys.readouterr().out
        thr = float(out.split("r_threshold=")[1].split()[0])
        assert thr == pytest.approx(stats.chi2.ppf(0.5, 120) / 2, rel=1e-5)
        assert main(["fit", "--config", data_file, "--out", str(tmp_path / "q"), "--r-threshold", "0.1"]) == 0
        out = capsys.readouterr().out
        assert "stop_reason=rule_satisfied" in out and "trace_dist_at_stop=" in out

    def test_ci_qubit(self, tmp_path, qubit_file, z_file, capsys):
        out = tmp_path / "ci"
        assert main(["ci", "--config", qubit_file, "--observable", z_file, "--s", "0.32", "--out", str(out),
                     "--r-threshold", "1e-6"]) == 0
        ci = json.loads((out / "ci.json").read_text())
        assert ci["f_lo"] < 0.5 < ci["f_hi"]
        assert ci["t"] == pytest.approx(0.99, abs=0.01)
        assert "D_lb" in capsys.readouterr().out
        assert main(["ci", "--config", qubit_file, "--observable", z_file, "--s", "0.05", "--out", str(out),
                     "--r-threshold", "1e-6"]) == 0
        assert json.loads((out / "ci.json").read_text())["t"] == pytest.approx(3.84, abs=0.01)

    def test_ci_identity_observable(self, tmp_path, qubit_file, capsys):
        eye = write(tmp_path / "eye.json", io.matrix_to_json(np.eye(2)))
        assert main(["ci", "--config", qubit_file, "--observable", eye, "--out", str(tmp_path)]) == 1
        assert json.loads(capsys.readouterr().err)["error"] == "BracketFailure"

    def test_ci_requires_observable(self, tmp_path, qubit_file, capsys):
        assert main(["ci", "--config", qubit_file, "--out", str(tmp_path)]) == 1

    @pytest.mark.parametrize("s,r_k,t,worst,tol", [(0.32, 2.0, 105.04, 0.23, 0.01), (0.05, 1.5, 123.22, 0.03, 0.005),
                                                   (0.32, 0.0, 105.04, 0.32, 1e-12)])
    def test_report(self, tmp_path, capsys, s, r_k, t, worst, tol):
        cfg = write(tmp_path / "fit.json", {"dim": 10, "final_r": r_k})
        assert main(["report", "--config", cfg, "--s", str(s), "--out", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "region.json").read_text())
        assert rep["threshold_t"] == pytest.approx(t, abs=0.01)
        assert rep["worst_case_pvalue"] == pytest.approx(worst, abs=tol)

    def test_missing_file(self, tmp_path, capsys):
        assert main(["fit", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1
        assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"
