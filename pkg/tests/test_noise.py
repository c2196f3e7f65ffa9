"""Calibration loading, error-unit accounting, and fidelity arithmetic.

The ibm_torino snapshot numbers below were recomputed by hand:
E_S = 5 * 3.086e-4, E_T = 6 * 2.437e-3, E_M = 3 * 2.95e-2, and
F = exp(-(E_S + E_T + E_M)).
"""

import json
import math

import pytest

from jcsim.circuits import Circuit
from jcsim.gates import Gate
from jcsim.linalg import MeasurementHistogram
from jcsim.noise import (
    COMPARISON_HEADER,
    CalibrationData,
    ErrorBudget,
    apply_readout_error,
    backend_comparison,
    bundled_backend_names,
    bundled_calibration,
    comparison_table_csv,
    comparison_table_json,
    count_error_units,
    fidelity_estimate,
    hardware_reference_circuit,
    load_calibration,
    product_fidelity_estimate,
)

#: Reported percentage fidelities the bundled calibrations must reproduce.
REPORTED_PERCENT = {
    ("ibm_marrakesh", 1): 94.6,
    ("ibm_fez", 1): 94.5,
    ("ibm_torino", 1): 90.0,
    ("ibm_marrakesh", 2): 88.4,
    ("ibm_fez", 2): 88.1,
    ("ibm_torino", 2): 78.7,
}


def reference_rows():
    calibs = [bundled_calibration(name) for name in bundled_backend_names()]
    circuits = {1: hardware_reference_circuit(1), 2: hardware_reference_circuit(2)}
    return backend_comparison(calibs, circuits, measured_qubits=3)


# -- calibrations ------------------------------------------------------------------


def test_calibration_validation():
    with pytest.raises(ValueError, match="median_2q_error"):
        CalibrationData("x", 0.001, 0.6, 0.01)
    with pytest.raises(ValueError, match="rccx_2q_count"):
        CalibrationData("x", 0.001, 0.002, 0.01, rccx_2q_count=0)
    with pytest.raises(ValueError, match="backend name"):
        CalibrationData("", 0.001, 0.002, 0.01)


def test_calibration_json_round_trip():
    calib = CalibrationData("dev", 1e-4, 2e-3, 1e-2, rccx_2q_count=3)
    assert CalibrationData.from_json_dict(calib.to_json_dict()) == calib


def test_calibration_from_json_names_missing_and_invalid_fields():
    with pytest.raises(ValueError, match="missing field 'median_1q_error'"):
        CalibrationData.from_json_dict({"backend": "x"})
    with pytest.raises(ValueError, match="'median_2q_error' is invalid"):
        CalibrationData.from_json_dict(
            {
                "backend": "x",
                "median_1q_error": 1e-4,
                "median_2q_error": "bad",
                "median_readout_error": 1e-2,
                "rccx_2q_count": 3,
            }
        )


def test_load_calibration_file(tmp_path):
    path = tmp_path / "device.json"
    payload = {
        "backend": "dev",
        "median_1q_error": 1e-4,
        "median_2q_error": 2e-3,
        "median_readout_error": 1e-2,
        "rccx_2q_count": 3,
    }
    path.write_text(json.dumps(payload))
    assert load_calibration(str(path)).backend_name == "dev"
    bad = tmp_path / "broken.json"
    bad.write_text("{nope")
    with pytest.raises(ValueError, match="not valid JSON"):
        load_calibration(str(bad))


def test_bundled_calibrations():
    names = bundled_backend_names()
    assert names == ["ibm_fez", "ibm_marrakesh", "ibm_torino"]
    torino = bundled_calibration("ibm_torino")
    assert torino.median_1q_error == 3.086e-4
    assert torino.median_2q_error == 2.437e-3
    assert torino.median_readout_error == 2.95e-2
    assert torino.rccx_2q_count == 3
    with pytest.raises(ValueError, match="no bundled calibration"):
        bundled_calibration("nope")


# -- error-unit accounting ------------------------------------------------------------


def test_count_error_units_weights_rccx():
    calib = CalibrationData("x", 1e-4, 1e-3, 1e-2, rccx_2q_count=3)
    circuit = Circuit(
        4,
        (
            Gate("H", (0,)),
            Gate("RZ", (1,), 0.1),
            Gate("CX", (0, 1)),
            Gate("CRZ", (0, 1), 0.1),
            Gate("CH", (1, 2)),
            Gate("RCCX", (0, 1, 3)),
        ),
    )
    assert count_error_units(circuit, calib, measured_qubits=3) == (2, 6, 3)
    # each RCCX contributes rccx_2q_count native two-qubit units
    heavier = CalibrationData("y", 1e-4, 1e-3, 1e-2, rccx_2q_count=5)
    assert count_error_units(circuit, heavier, measured_qubits=3) == (2, 8, 3)


def test_count_error_units_is_additive_over_concatenation():
    calib = bundled_calibration("ibm_torino")
    a = hardware_reference_circuit(1)
    combined = a.extended(a)
    n1, n2, _ = count_error_units(a, calib, 3)
    assert count_error_units(combined, calib, 3) == (2 * n1, 2 * n2, 3)


def test_reference_circuit_profiles():
    calib = bundled_calibration("ibm_torino")
    assert count_error_units(hardware_reference_circuit(1), calib, 3) == (5, 6, 3)
    assert count_error_units(hardware_reference_circuit(2), calib, 3) == (16, 60, 3)
    with pytest.raises(ValueError, match="order"):
        hardware_reference_circuit(3)


def test_error_budget_counts_validation():
    calib = bundled_calibration("ibm_torino")
    with pytest.raises(ValueError, match=">= 0"):
        ErrorBudget.from_counts(calib, -1, 0, 0)


# -- fidelity arithmetic ------------------------------------------------------------


def test_torino_first_order_budget_matches_hand_computation():
    calib = bundled_calibration("ibm_torino")
    budget = ErrorBudget.from_circuit(calib, hardware_reference_circuit(1), 3)
    assert budget.e_s == pytest.approx(1.543e-3, rel=1e-4)
    assert budget.e_t == pytest.approx(1.4622e-2, rel=1e-4)
    assert budget.e_m == pytest.approx(8.85e-2, rel=1e-4)
    fidelity = fidelity_estimate(budget)
    assert fidelity == pytest.approx(math.exp(-(1.543e-3 + 1.4622e-2 + 8.85e-2)), rel=1e-9)
    assert abs(fidelity - 0.9007) < 1e-4


def test_all_bundled_backends_reproduce_reported_fidelities():
    table = {(row.backend, row.order): row.fidelity for row in reference_rows()}
    assert set(table) == set(REPORTED_PERCENT)
    for key, percent in REPORTED_PERCENT.items():
        assert abs(table[key] * 100 - percent) <= 0.3, key


def test_exponential_form_agrees_with_survival_product():
    for row in reference_rows():
        calib = bundled_calibration(row.backend)
        b = row.budget
        product = product_fidelity_estimate(calib, b.n_1q, b.n_2q, b.n_meas)
        assert abs(row.fidelity - product) < 0.006


def test_fidelity_monotonic_in_rates_and_counts():
    base = CalibrationData("x", 1e-4, 1e-3, 1e-2)
    worse = CalibrationData("x", 2e-4, 2e-3, 2e-2)
    f_base = fidelity_estimate(ErrorBudget.from_counts(base, 5, 6, 3))
    assert fidelity_estimate(ErrorBudget.from_counts(worse, 5, 6, 3)) < f_base
    assert fidelity_estimate(ErrorBudget.from_counts(base, 5, 7, 3)) < f_base
    assert fidelity_estimate(ErrorBudget.from_counts(base, 0, 0, 0)) == 1.0


def test_comparison_table_grouping_and_format():
    rows = reference_rows()
    orders = [row.order for row in rows]
    assert orders == [1, 1, 1, 2, 2, 2]
    for third in (rows[:3], rows[3:]):
        fids = [row.fidelity for row in third]
        assert fids == sorted(fids, reverse=True)
    csv_text = comparison_table_csv(rows)
    lines = csv_text.strip().splitlines()
    assert lines[0] == COMPARISON_HEADER == "backend,order,n_1q,n_2q,n_meas,E_S,E_T,E_M,F"
    assert len(lines) == 7
    first = lines[1].split(",")
    assert first[0] == "ibm_marrakesh" and first[1] == "1"
    payload = comparison_table_json(rows)
    assert payload[0]["backend"] == "ibm_marrakesh"
    assert payload[0]["F"] == pytest.approx(0.946, abs=3e-3)


def test_backend_comparison_validation():
    with pytest.raises(ValueError, match="at least one"):
        backend_comparison([], {1: hardware_reference_circuit(1)})


# -- readout error ---------------------------------------------------------------------


def test_readout_error_zero_probability_is_identity():
    hist = MeasurementHistogram(counts={"000": 10}, shots=10)
    assert apply_readout_error(hist, 0.0, seed=1) is hist


def test_readout_error_is_deterministic_and_preserves_shots():
    hist = MeasurementHistogram(counts={"000": 600, "111": 400}, shots=1000)
    a = apply_readout_error(hist, 0.05, seed=9)
    b = apply_readout_error(hist, 0.05, seed=9)
    c = apply_readout_error(hist, 0.05, seed=10)
    assert a == b
    assert a != c
    assert sum(a.counts.values()) == 1000


def test_readout_error_flip_statistics():
    shots = 100_000
    p = 0.03
    hist = MeasurementHistogram(counts={"000": shots}, shots=shots)
    noisy = apply_readout_error(hist, p, seed=4)
    survive = (1 - p) ** 3
    sigma = math.sqrt(shots * survive * (1 - survive))
    assert abs(noisy.counts["000"] - shots * survive) < 5 * sigma
    # single-bit flips land on the three weight-one strings
    for key in ("001", "010", "100"):
        expected = shots * p * (1 - p) ** 2
        assert abs(noisy.counts[key] - expected) < 5 * math.sqrt(expected)


def test_readout_error_validation():
    hist = MeasurementHistogram(counts={"0": 5}, shots=5)
    with pytest.raises(ValueError, match=r"\[0, 0.5\)"):
        apply_readout_error(hist, 0.5, seed=0)
    with pytest.raises(ValueError, match=r"\[0, 0.5\)"):
        apply_readout_error(hist, -0.1, seed=0)
