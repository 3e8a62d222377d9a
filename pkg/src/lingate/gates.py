"""Gate problem definitions: NS and CZ, plus JSON-described custom gates."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from lingate.fock import PhotonConfig, as_config, output_labeling


@dataclass(frozen=True)
class GateSpec:
    """A heralded gate search problem.

    Computational modes come first, ancilla modes last.  ``target`` has one
    row per computational input and one column per output label, as laid
    out by :func:`lingate.fock.output_labeling`.
    """

    name: str
    n_modes: int
    n_ancilla: int
    computational_inputs: tuple[PhotonConfig, ...]
    ancilla_input: PhotonConfig
    measurement: PhotonConfig
    target: np.ndarray = field(repr=False)
    u0: np.ndarray = field(repr=False)

    def __post_init__(self):
        comp = self.n_modes - self.n_ancilla
        if comp < 1 or self.n_ancilla < 0:
            raise ValueError("need at least one computational mode")
        if any(len(c) != comp for c in self.computational_inputs):
            raise ValueError(f"computational inputs must span {comp} modes")
        if len(self.ancilla_input) != self.n_ancilla or len(self.measurement) != self.n_ancilla:
            raise ValueError(f"ancilla input and measurement must span {self.n_ancilla} modes")
        labels, _ = output_labeling(
            self.computational_inputs, self.ancilla_input, self.measurement
        )
        expected = (len(self.computational_inputs), len(labels))
        if self.target.shape != expected:
            raise ValueError(f"target shape {self.target.shape} != {expected}")
        if self.u0.shape != (self.n_modes, self.n_modes):
            raise ValueError("u0 must be n_modes x n_modes")
        self.target.setflags(write=False)
        self.u0.setflags(write=False)

    @property
    def d_in(self) -> int:
        return len(self.computational_inputs)

    @property
    def output_labels(self) -> tuple[PhotonConfig, ...]:
        return output_labeling(
            self.computational_inputs, self.ancilla_input, self.measurement
        )[0]


def _make(name, n_modes, n_ancilla, inputs, ancilla, measurement, target) -> GateSpec:
    return GateSpec(
        name=name,
        n_modes=n_modes,
        n_ancilla=n_ancilla,
        computational_inputs=tuple(as_config(c) for c in inputs),
        ancilla_input=as_config(ancilla),
        measurement=as_config(measurement),
        target=np.asarray(target, dtype=complex),
        u0=np.eye(n_modes, dtype=complex),
    )


def ns_spec() -> GateSpec:
    """Nonlinear sign gate on one mode with a single-photon ancilla."""
    return _make(
        "ns", 3, 2,
        [(0,), (1,), (2,)], (1, 0), (1, 0),
        np.diag([1.0, 1.0, -1.0]),
    )


def cz_spec() -> GateSpec:
    """Dual-rail controlled-Z with two ancilla photons in four ancilla modes."""
    inputs = [(1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1)]
    target = np.zeros((4, 10))
    # columns 2, 3, 5, 6 are |1010>, |1001>, |0110>, |0101> in the
    # descending two-photon basis of four modes
    for row, (col, sign) in enumerate([(2, 1), (3, 1), (5, 1), (6, -1)]):
        target[row, col] = sign
    return _make("cz", 8, 4, inputs, (1, 0, 1, 0), (1, 0, 1, 0), target)


def ns_closed_form(u) -> tuple[complex, complex, complex]:
    """Diagonal of the NS transformation written out in unitary entries."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (3, 3):
        raise ValueError(f"NS closed form needs a 3x3 matrix, got {u.shape}")
    u11, u12, u21, u22 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    return (
        complex(u22),
        complex(u12 * u21 + u11 * u22),
        complex(u11**2 * u22 + 2 * u11 * u12 * u21),
    )


GATES = {"ns": ns_spec, "cz": cz_spec}

# Best known heralded success probabilities, used as plot reference lines.
KNOWN_MAXIMA = {"ns": 0.25, "cz": 2.0 / 27.0}


def gate_to_json(gate: GateSpec) -> dict:
    return {
        "name": gate.name,
        "n_modes": gate.n_modes,
        "n_ancilla": gate.n_ancilla,
        "computational_inputs": [list(c) for c in gate.computational_inputs],
        "ancilla_input": list(gate.ancilla_input),
        "measurement": list(gate.measurement),
        "target": {
            "rows": int(gate.target.shape[0]),
            "cols": int(gate.target.shape[1]),
            "re": gate.target.real.tolist(),
            "im": gate.target.imag.tolist(),
        },
    }


def gate_from_json(data: dict) -> GateSpec:
    try:
        t = data["target"]
        target = np.asarray(t["re"], dtype=float) + 1j * np.asarray(t["im"], dtype=float)
        target = target.reshape(int(t["rows"]), int(t["cols"]))
        return _make(
            str(data["name"]),
            int(data["n_modes"]),
            int(data["n_ancilla"]),
            data["computational_inputs"],
            data["ancilla_input"],
            data["measurement"],
            target,
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed gate description: {exc}") from exc


def load_gate(name_or_path: str | Path) -> GateSpec:
    """Shipped gate by name (``"ns"``, ``"cz"``) or a JSON description file."""
    key = str(name_or_path).lower()
    if key in GATES:
        return GATES[key]()
    path = Path(name_or_path)
    if not path.exists():
        raise ValueError(f"unknown gate {name_or_path!r}")
    return gate_from_json(json.loads(path.read_text()))


def shipped_gate_names() -> Sequence[str]:
    return tuple(GATES)
