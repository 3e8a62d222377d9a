import json

import numpy as np
import pytest

from lingate.fock import project_transformation
from lingate.gates import (
    KNOWN_MAXIMA,
    cz_spec,
    gate_from_json,
    gate_to_json,
    load_gate,
    ns_closed_form,
    ns_spec,
)
from lingate.metrics import fidelity, success_probability

from oracles import random_unitary


def test_ns_spec():
    gate = ns_spec()
    assert (gate.n_modes, gate.n_ancilla, gate.d_in) == (3, 2, 3)
    assert gate.computational_inputs == ((0,), (1,), (2,))
    assert gate.ancilla_input == gate.measurement == (1, 0)
    np.testing.assert_array_equal(gate.target, np.diag([1, 1, -1]))
    assert np.trace(gate.target @ gate.target.conj().T).real == 3
    np.testing.assert_array_equal(gate.u0, np.eye(3))


def test_cz_spec():
    gate = cz_spec()
    assert (gate.n_modes, gate.n_ancilla) == (8, 4)
    assert gate.target.shape == (4, 10)
    rows, cols = np.nonzero(gate.target)
    assert [(r + 1, c + 1) for r, c in zip(rows, cols)] == [(1, 3), (2, 4), (3, 6), (4, 7)]
    np.testing.assert_array_equal(gate.target[rows, cols], [1, 1, 1, -1])
    assert np.trace(gate.target @ gate.target.conj().T).real == 4
    assert sum(gate.measurement) == sum(gate.ancilla_input)


def test_cz_identity_metrics():
    gate = cz_spec()
    a = project_transformation(np.eye(8), gate)
    assert success_probability(a) == pytest.approx(1)
    assert fidelity(a, gate.target) == pytest.approx(1 / 4)


def test_ns_identity_metrics():
    gate = ns_spec()
    a = project_transformation(np.eye(3), gate)
    assert success_probability(a) == pytest.approx(1)
    assert fidelity(a, gate.target) == pytest.approx(1 / 9)


class TestNSClosedForm:
    def test_identity(self):
        assert ns_closed_form(np.eye(3)) == pytest.approx((1, 1, 1))

    def test_phase(self):
        theta = 0.7
        u = np.diag([np.exp(1j * theta), 1, 1])
        want = (1, np.exp(1j * theta), np.exp(2j * theta))
        assert ns_closed_form(u) == pytest.approx(want)

    def test_random_matches_projection(self, rng):
        for _ in range(20):
            u = random_unitary(3, rng)
            a = project_transformation(u, ns_spec()).entries
            np.testing.assert_allclose(np.diag(a), ns_closed_form(u), atol=1e-12)

    def test_wrong_size(self):
        with pytest.raises(ValueError):
            ns_closed_form(np.eye(4))


def test_cz_rows_live_in_two_photon_basis(rng):
    gate = cz_spec()
    a = project_transformation(random_unitary(8, rng), gate)
    assert all(sum(label) == 2 and len(label) == 4 for label in a.output_labels)


@pytest.mark.parametrize("gate_fn", [ns_spec, cz_spec])
def test_json_round_trip(gate_fn, tmp_path):
    gate = gate_fn()
    path = tmp_path / "gate.json"
    path.write_text(json.dumps(gate_to_json(gate)))
    loaded = load_gate(path)
    assert loaded.computational_inputs == gate.computational_inputs
    assert loaded.measurement == gate.measurement
    np.testing.assert_array_equal(loaded.target, gate.target)


def test_load_by_name():
    assert load_gate("NS").name == "ns"
    assert KNOWN_MAXIMA["cz"] == pytest.approx(0.0741, abs=1e-4)


def test_unknown_gate():
    with pytest.raises(ValueError):
        load_gate("toffoli")


def test_malformed_description():
    with pytest.raises(ValueError):
        gate_from_json({"name": "x"})


def test_target_shape_checked():
    data = gate_to_json(ns_spec())
    data["target"] = {"rows": 2, "cols": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]}
    with pytest.raises(ValueError):
        gate_from_json(data)
