import json
import math
from pathlib import Path

import pytest

from blockcs import ExperimentSpec, demo_counterexample, run_experiment
from blockcs.experiments import records_from_csv, records_to_csv, spec_from_json, spec_to_json


def _strip_wall_time(csv_text: str) -> str:
    lines = []
    for line in csv_text.splitlines():
        if line.startswith("#") or line.startswith("trial_id"):
            lines.append(line)
        else:
            lines.append(",".join(line.split(",")[:-1]))
    return "\n".join(lines)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(kind="NOPE", seed=1, grid={"trials": 1})
    with pytest.raises(ValueError):
        ExperimentSpec(kind="RECOVERY_TRIALS", seed=1, grid={})
    with pytest.raises(ValueError):
        ExperimentSpec(kind="RECOVERY_TRIALS", seed=1, grid={"trials": 0})


def test_spec_json_round_trip():
    spec = ExperimentSpec(
        kind="PHASE_TRANSITION",
        seed=42,
        grid={"l": 12, "d": 2, "s_values": [1, 2], "m_values": [8, 16], "trials": 2},
        output_path="out",
        success_tol=1e-5,
    )
    back = spec_from_json(spec_to_json(spec))
    assert back == spec


def test_counterexample_demo_values():
    report = demo_counterexample(1.0, 2, 2, 6)
    assert abs(report.delta - 1.0 / 3.0) <= 1e-10
    assert report.threshold == pytest.approx(1.0 / 3.0)
    target = 2 * math.sqrt(2)
    assert report.x0_mixed_norm == pytest.approx(target, abs=1e-12)
    assert report.x_hat_mixed_norm == pytest.approx(target, abs=1e-12)
    assert report.measurement_gap <= 1e-12
    assert report.solver_objective <= target + 1e-6
    assert report.non_unique
    text = report.render()
    assert "verdict" in text and "share the measurement" in text


def test_counterexample_demo_smallest_instance():
    report = demo_counterexample(1.0, 1, 1, 3)
    assert abs(report.delta - 1.0 / 3.0) <= 1e-10
    assert report.ric_order == 1
    assert report.x0_mixed_norm == pytest.approx(1.0, abs=1e-12)
    assert report.solver_objective <= 1.0 + 1e-6


def test_counterexample_rejects_small_l():
    with pytest.raises(ValueError, match="2s < l"):
        demo_counterexample(1.0, 2, 2, 4)


def test_records_csv_round_trip(tmp_path):
    spec = ExperimentSpec(
        kind="RECOVERY_TRIALS",
        seed=3,
        grid={"l": 6, "d": 2, "m": 11, "s": 2, "ensemble": "spread_kernel", "trials": 2},
        output_path=str(tmp_path / "trials"),
    )
    report = run_experiment(spec)
    text = Path(report.csv_path).read_text()
    records = records_from_csv(report.csv_path)
    assert len(records) == 2
    again = tmp_path / "again.csv"
    records_to_csv(records, again, {"kind": spec.kind, "seed": spec.seed, "success_tol": "1.0000000000000001e-05"})
    # byte-identical modulo the fixed float formatting used on both sides
    assert Path(report.csv_path).read_text() == again.read_text()


def test_recovery_trials_identity_all_succeed(tmp_path):
    spec = ExperimentSpec(
        kind="RECOVERY_TRIALS",
        seed=11,
        grid={"l": 4, "d": 2, "m": 8, "s": 2, "ensemble": "identity",
              "compute_ric": False, "trials": 5},
        output_path=str(tmp_path / "ident"),
    )
    report = run_experiment(spec)
    assert report.summary["success_rate"] == 1.0


def test_recovery_trials_certified_bounds_present(tmp_path):
    spec = ExperimentSpec(
        kind="RECOVERY_TRIALS",
        seed=5,
        grid={"l": 6, "d": 2, "m": 11, "s": 2, "ensemble": "spread_kernel",
              "rho": [0.0, 0.01], "trials": 3},
        output_path=str(tmp_path / "cert"),
    )
    report = run_experiment(spec)
    assert report.summary["condition_certified"] == len(report.records)
    # rho = 0 trials have a zero theoretical bound; the reported violation is
    # then pure solver tolerance, far below any meaningful error scale
    assert report.summary["max_bound_violation"] <= 1e-7
    for rec in report.records:
        assert rec.condition_ok
        assert rec.bound_tight is not None and rec.bound_loose is not None
        assert rec.bound_tight <= rec.bound_loose + 1e-12
        if rec.rho > 0:
            assert rec.recovery_error <= rec.bound_tight


def test_run_deterministic_across_threads(tmp_path):
    grid = {"l": 6, "d": 2, "m": 10, "s": 2, "ensemble": "gaussian",
            "compute_ric": False, "trials": 6}
    spec1 = ExperimentSpec(kind="RECOVERY_TRIALS", seed=9, grid=grid,
                           output_path=str(tmp_path / "a"))
    spec2 = ExperimentSpec(kind="RECOVERY_TRIALS", seed=9, grid=grid,
                           output_path=str(tmp_path / "b"))
    rep1 = run_experiment(spec1, threads=1)
    rep2 = run_experiment(spec2, threads=3)
    a = _strip_wall_time(Path(rep1.csv_path).read_text())
    b = _strip_wall_time(Path(rep2.csv_path).read_text())
    assert a == b
    s1 = json.loads(Path(rep1.json_path).read_text())
    s2 = json.loads(Path(rep2.json_path).read_text())
    assert s1 == s2


def test_phase_transition_monotone_trend(tmp_path):
    spec = ExperimentSpec(
        kind="PHASE_TRANSITION",
        seed=42,
        grid={"l": 12, "d": 2, "s_values": [1, 2, 3, 4], "m_values": [8, 12, 16, 20, 24],
              "trials": 6, "ensemble": "gaussian"},
        output_path=str(tmp_path / "phase"),
    )
    report = run_experiment(spec, threads=2)
    cells = report.summary["cells"]
    # success is nonincreasing in s for each m, with one-cell slack
    for m in (8, 12, 16, 20, 24):
        rates = [cells[f"m={m},s={s}"]["success_rate"] for s in (1, 2, 3, 4)]
        violations = sum(1 for lo, hi in zip(rates, rates[1:]) if hi > lo + 1e-12)
        assert violations <= 1, (m, rates)
    # extremes behave as expected
    assert cells["m=24,s=1"]["success_rate"] == 1.0


def test_counterexample_experiment(tmp_path):
    spec = ExperimentSpec(
        kind="COUNTEREXAMPLE",
        seed=1,
        grid={"t": 1.0, "s": 2, "d": 2, "l": 6},
        output_path=str(tmp_path / "cx"),
    )
    report = run_experiment(spec)
    assert abs(report.summary["delta"] - 1.0 / 3.0) <= 1e-10
    assert report.summary["non_unique_minimizer"] is True
    payload = json.loads(Path(report.json_path).read_text())
    assert payload["summary"]["threshold"] == pytest.approx(1.0 / 3.0)


def test_ric_sweep_experiment(tmp_path):
    spec = ExperimentSpec(
        kind="RIC_SWEEP",
        seed=2,
        grid={"l": 6, "d": 2, "m": 9, "orders": [1, 2, 3], "matrices": 3,
              "ensemble": "gaussian"},
        output_path=str(tmp_path / "ric"),
    )
    report = run_experiment(spec)
    per_order = report.summary["per_order"]
    assert set(per_order) == {"order=1", "order=2", "order=3"}
    # monotone in the order, matrix by matrix
    by_matrix = {}
    for rec in report.records:
        by_matrix.setdefault(rec.seed_stream, {})[rec.s] = rec.delta
    for deltas in by_matrix.values():
        assert deltas[1] <= deltas[2] + 1e-14
        assert deltas[2] <= deltas[3] + 1e-14


def test_identity_suite_experiment(tmp_path):
    spec = ExperimentSpec(
        kind="IDENTITY_SUITE",
        seed=7,
        grid={"trials": 25, "max_blocks": 6},
        output_path=str(tmp_path / "ids"),
    )
    report = run_experiment(spec)
    worst = report.summary["max_residuals"]
    assert set(worst) == {
        "subset_sum", "subset_inner_product", "subset_energy_difference",
        "disjoint_pair_energy",
    }
    assert max(worst.values()) <= 1e-10
    assert report.summary["all_below_1e-10"]
    assert report.summary["polytope_members_checked"] == 25
