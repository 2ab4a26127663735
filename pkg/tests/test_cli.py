import json
from pathlib import Path

import numpy as np
import pytest

from blockcs import BlockStructure, gaussian_matrix, sharpness_instance, apply
from blockcs.cli import main
from blockcs.serialize import matrix_to_json, save_json, signal_from_json, structure_to_json


@pytest.fixture
def instance_files(tmp_path):
    inst = sharpness_instance(1.0, 2, 2, 6)
    matrix_path = tmp_path / "phi.json"
    obs_path = tmp_path / "b.json"
    save_json(matrix_to_json(inst.phi), matrix_path)
    b = apply(inst.phi, inst.x0)
    obs_path.write_text(json.dumps([float(v) for v in b]))
    return inst, str(matrix_path), str(obs_path), tmp_path


def test_recover_subcommand(instance_files):
    inst, matrix_path, obs_path, tmp_path = instance_files
    out = tmp_path / "result.json"
    code = main(["recover", "--matrix", matrix_path, "--obs", obs_path, "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["converged"] is True
    assert payload["objective"] <= 2 * np.sqrt(2) + 1e-6
    assert payload["feasibility_gap"] <= 1e-7
    estimate = signal_from_json(payload["estimate"])
    assert estimate.structure == inst.phi.structure


def test_recover_nonconvergence_exit_code(instance_files):
    _, matrix_path, obs_path, tmp_path = instance_files
    out = tmp_path / "r.json"
    code = main([
        "recover", "--matrix", matrix_path, "--obs", obs_path,
        "--max-iters", "2", "--out", str(out),
    ])
    assert code == 3
    assert json.loads(out.read_text())["converged"] is False


def test_ric_subcommand(instance_files):
    _, matrix_path, _, tmp_path = instance_files
    out = tmp_path / "ric.json"
    code = main(["ric", "--matrix", matrix_path, "--order", "2", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert abs(payload["delta"] - 1.0 / 3.0) <= 1e-10
    assert payload["supports_enumerated"] == 15
    assert payload["wall_time"] >= 0.0


def test_ric_invalid_order_exit_one(instance_files):
    _, matrix_path, _, _ = instance_files
    assert main(["ric", "--matrix", matrix_path, "--order", "99"]) == 1


def test_missing_file_exit_two(tmp_path):
    code = main(["ric", "--matrix", str(tmp_path / "nope.json"), "--order", "1"])
    assert code == 2


def test_usage_error_exit_one():
    assert main(["recover", "--matrix"]) == 1
    assert main(["bogus-subcommand"]) == 1


def test_bound_subcommand(tmp_path, capsys):
    out = tmp_path / "bound.json"
    code = main([
        "bound", "--t", "1", "--s", "2", "--delta", "0.25",
        "--rho", "0.1", "--tail", "0.0", "--variant", "both", "--out", str(out),
    ])
    assert code == 0
    payload = json.loads(out.read_text())["bounds"]
    assert payload[0]["variant"] == "tight"
    assert payload[1]["variant"] == "loose"
    assert payload[0]["bound"] <= payload[1]["bound"] + 1e-12


def test_bound_invalid_condition_exit_one():
    assert main(["bound", "--t", "1", "--s", "2", "--delta", "0.5"]) == 1


def test_oracle_subcommand(tmp_path):
    st_ = BlockStructure.uniform(2, 5)
    phi = gaussian_matrix(6, st_, seed=3)
    truth = np.zeros(10)
    truth[4:6] = [1.5, -2.0]
    b = phi.entries @ truth
    save_json(matrix_to_json(phi), tmp_path / "phi.json")
    (tmp_path / "b.json").write_text(json.dumps([float(v) for v in b]))
    out = tmp_path / "oracle.json"
    code = main([
        "oracle", "--matrix", str(tmp_path / "phi.json"),
        "--obs", str(tmp_path / "b.json"), "--smax", "2", "--out", str(out),
    ])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["found"] is True
    assert payload["support"] == [2]
    assert payload["sparsity"] == 1


def test_counterexample_subcommand(tmp_path, capsys):
    out = tmp_path / "cx.json"
    code = main([
        "counterexample", "--t", "1", "--s", "2", "--d", "2", "--l", "6",
        "--out", str(out),
    ])
    assert code == 0
    text = capsys.readouterr().out
    assert "threshold instance" in text
    payload = json.loads(out.read_text())
    assert abs(payload["delta"] - 1.0 / 3.0) <= 1e-10
    assert payload["non_unique"] is True


def test_counterexample_invalid_params_exit_one():
    assert main(["counterexample", "--t", "1", "--s", "2", "--d", "2", "--l", "4"]) == 1


def test_sweep_subcommand_and_determinism(tmp_path, capsys):
    config = {
        "kind": "RECOVERY_TRIALS",
        "seed": 4,
        "grid": {"l": 6, "d": 2, "m": 10, "s": 2, "ensemble": "gaussian",
                 "compute_ric": False, "trials": 4},
        "output_path": str(tmp_path / "sweep1"),
    }
    cfg_path = tmp_path / "spec.json"
    cfg_path.write_text(json.dumps(config))
    assert main(["sweep", "--config", str(cfg_path)]) == 0
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "sweep2")]) == 0

    def strip_wall(path):
        rows = []
        for ln in Path(path).read_text().splitlines():
            rows.append(ln if ln.startswith(("#", "trial_id")) else ",".join(ln.split(",")[:-1]))
        return rows

    assert strip_wall(tmp_path / "sweep1.csv") == strip_wall(tmp_path / "sweep2.csv")


def test_sweep_requires_config():
    assert main(["sweep"]) == 1


def test_verify_identities_subcommand(tmp_path, capsys):
    out = tmp_path / "ids"
    code = main([
        "verify-identities", "--seed", "2", "--trials", "20",
        "--max-blocks", "5", "--out", str(out),
    ])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["all_below_1e-10"] is True
    assert (tmp_path / "ids.json").exists()
    assert (tmp_path / "ids.csv").exists()


def test_recover_csv_matrix_with_sidecar(tmp_path):
    st_ = BlockStructure.uniform(2, 2)
    entries = np.eye(4)
    (tmp_path / "phi.csv").write_text(
        "\n".join(",".join(f"{v:.17g}" for v in row) for row in entries) + "\n"
    )
    save_json(structure_to_json(st_), tmp_path / "st.json")
    (tmp_path / "b.json").write_text(json.dumps([1.0, 2.0, 3.0, 4.0]))
    out = tmp_path / "res.json"
    code = main([
        "recover", "--matrix", str(tmp_path / "phi.csv"),
        "--structure", str(tmp_path / "st.json"),
        "--obs", str(tmp_path / "b.json"), "--out", str(out),
    ])
    assert code == 0
    payload = json.loads(out.read_text())
    np.testing.assert_allclose(payload["estimate"]["coeffs"], [1, 2, 3, 4], atol=1e-6)
