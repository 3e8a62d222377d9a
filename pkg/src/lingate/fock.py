"""Bosonic Fock bases, multi-photon amplitudes and post-selected projections.

Occupation vectors are plain tuples of non-negative ints.  A unitary ``U``
acts on creation operators as ``a_i^dag -> sum_j U[i, j] a_j^dag``, so a
photon entering mode ``i`` leaves in mode ``j`` with amplitude ``U[i, j]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from lingate.gates import GateSpec

PhotonConfig = tuple[int, ...]


def as_config(occupations: Sequence[int]) -> PhotonConfig:
    config = tuple(int(n) for n in occupations)
    if any(n < 0 for n in config):
        raise ValueError(f"negative occupation in {config}")
    return config


@dataclass(frozen=True)
class FockBasis:
    modes: int
    photons: int
    states: tuple[PhotonConfig, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def index(self, config: Sequence[int]) -> int:
        return self.states.index(tuple(config))


@lru_cache(maxsize=None)
def enumerate_basis(modes: int, photons: int) -> FockBasis:
    """All occupation vectors over ``modes`` modes holding ``photons`` photons.

    States are sorted in descending lexicographic order, e.g. for two
    photons in four modes ``(2,0,0,0), (1,1,0,0), (1,0,1,0), ...``.
    """
    if modes < 1:
        raise ValueError("modes must be >= 1")
    if photons < 0:
        raise ValueError("photons must be >= 0")

    def _fill(remaining_modes: int, remaining: int):
        if remaining_modes == 1:
            yield (remaining,)
            return
        for head in range(remaining, -1, -1):
            for tail in _fill(remaining_modes - 1, remaining - head):
                yield (head,) + tail

    return FockBasis(modes, photons, tuple(_fill(modes, photons)))


def _permanent_direct(m: np.ndarray) -> complex:
    n = m.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return complex(m[0, 0])
    if n == 2:
        return complex(m[0, 0] * m[1, 1] + m[0, 1] * m[1, 0])
    # Laplace-style expansion along the first row.
    total = 0j
    cols = np.arange(n)
    for j in range(n):
        minor = m[1:, cols != j]
        total += m[0, j] * _permanent_direct(minor)
    return total


def _permanent_ryser_gray(m: np.ndarray) -> complex:
    # Ryser inclusion-exclusion; subsets visited in Gray-code order so each
    # step adds or removes a single column from the running row sums.
    n = m.shape[0]
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    gray_prev = 0
    for k in range(1, 2**n):
        gray = k ^ (k >> 1)
        changed = gray ^ gray_prev
        j = changed.bit_length() - 1
        if gray & changed:
            row_sums += m[:, j]
        else:
            row_sums -= m[:, j]
        gray_prev = gray
        sign = -1.0 if bin(gray).count("1") % 2 else 1.0
        total += sign * np.prod(row_sums)
    return complex((-1) ** n * total)


def permanent(matrix) -> complex:
    """Permanent of a square matrix.

    Exact: Ryser's formula with Gray-code updates for ``n >= 4`` and a
    direct expansion below that.  The empty matrix has permanent 1.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {m.shape}")
    if m.shape[0] >= 4:
        return _permanent_ryser_gray(m)
    return _permanent_direct(m)


def _expand_indices(config: Sequence[int]) -> list[int]:
    return [mode for mode, n in enumerate(config) for _ in range(n)]


def _norm_factor(out: Sequence[int], inp: Sequence[int]) -> float:
    prod = 1
    for n in itertools.chain(out, inp):
        prod *= math.factorial(n)
    return math.sqrt(prod)


def transition_amplitude(unitary, out: Sequence[int], inp: Sequence[int]) -> complex:
    """Amplitude ``<out| U |inp>`` for Fock states of an N-mode interferometer.

    The permanent is taken over the submatrix whose rows repeat each input
    mode ``inp[i]`` times and whose columns repeat each output mode
    ``out[j]`` times, divided by ``sqrt(prod out! * prod inp!)``.
    """
    u = np.asarray(unitary, dtype=complex)
    n = u.shape[0]
    if u.shape != (n, n):
        raise ValueError(f"unitary must be square, got shape {u.shape}")
    if len(out) != n or len(inp) != n:
        raise ValueError(
            f"configs of length {len(out)} and {len(inp)} do not match {n} modes"
        )
    if sum(out) != sum(inp):
        return 0j
    rows = _expand_indices(inp)
    cols = _expand_indices(out)
    sub = u[np.ix_(rows, cols)]
    return permanent(sub) / _norm_factor(out, inp)


@dataclass(frozen=True)
class TransformationMatrix:
    """Post-selected map from computational inputs to computational outputs.

    ``entries[i, j]`` is the amplitude for input ``input_basis[i]`` to end
    in ``output_labels[j]``.  ``output_labels`` concatenates the photon
    sectors reached by the rows, in order of first appearance, so rows
    from different sectors never share a column.
    """

    entries: np.ndarray
    input_basis: tuple[PhotonConfig, ...]
    output_labels: tuple[PhotonConfig, ...]
    row_bases: tuple[FockBasis | None, ...] = field(default=())

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def output_labeling(
    computational_inputs: Sequence[PhotonConfig],
    ancilla_input: PhotonConfig,
    measurement: PhotonConfig,
) -> tuple[tuple[PhotonConfig, ...], tuple[FockBasis | None, ...]]:
    """Union output labels and the per-row output basis (None when empty)."""
    comp_modes = len(computational_inputs[0])
    extra = sum(ancilla_input) - sum(measurement)
    labels: list[PhotonConfig] = []
    seen_totals: list[int] = []
    row_bases: list[FockBasis | None] = []
    for config in computational_inputs:
        total = sum(config) + extra
        if total < 0:
            row_bases.append(None)
            continue
        basis = enumerate_basis(comp_modes, total)
        row_bases.append(basis)
        if total not in seen_totals:
            seen_totals.append(total)
            labels.extend(basis.states)
    return tuple(labels), tuple(row_bases)


def project_transformation(unitary, gate: GateSpec) -> TransformationMatrix:
    """Amplitudes of the interferometer conditioned on the heralding pattern.

    Each computational input is padded with the ancilla input and each
    computational output with the measured pattern before taking the
    transition amplitude.  Entries between different photon sectors are zero.
    """
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (gate.n_modes, gate.n_modes):
        raise ValueError(
            f"unitary of shape {u.shape} does not match {gate.n_modes} modes"
        )
    inputs = gate.computational_inputs
    labels, row_bases = output_labeling(inputs, gate.ancilla_input, gate.measurement)
    col_of = {label: j for j, label in enumerate(labels)}
    entries = np.zeros((len(inputs), len(labels)), dtype=complex)
    for i, (config, basis) in enumerate(zip(inputs, row_bases)):
        if basis is None:
            continue
        full_in = config + gate.ancilla_input
        for out in basis:
            entries[i, col_of[out]] = transition_amplitude(
                u, out + gate.measurement, full_in
            )
    return TransformationMatrix(entries, tuple(inputs), labels, row_bases)


# Subset sign/indicator tables for the vectorised Ryser kernel.
@lru_cache(maxsize=None)
def _ryser_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    subsets = np.array(list(itertools.product((0, 1), repeat=n))[1:], dtype=float)
    signs = (-1.0) ** (n - subsets.sum(axis=1))
    return subsets, signs


def batched_permanent(matrices: np.ndarray) -> np.ndarray:
    """Permanents of a stack ``(..., n, n)`` via vectorised Ryser sums."""
    m = np.asarray(matrices, dtype=complex)
    n = m.shape[-1]
    if m.shape[-2] != n:
        raise ValueError(f"need square trailing dims, got {m.shape}")
    if n == 0:
        return np.ones(m.shape[:-2], dtype=complex)
    subsets, signs = _ryser_tables(n)
    row_sums = m @ subsets.T.astype(complex)
    return np.prod(row_sums, axis=-2) @ signs.astype(complex)


class Projector:
    """Compiled form of :func:`project_transformation` for stacks of unitaries.

    Row/column index lists for every admissible entry are built once per
    gate; :meth:`__call__` then gathers submatrices from a ``(B, N, N)``
    stack and evaluates all permanents in a few array operations.
    """

    def __init__(self, gate: GateSpec):
        self.n_modes = gate.n_modes
        self.input_basis = tuple(gate.computational_inputs)
        labels, row_bases = output_labeling(
            gate.computational_inputs, gate.ancilla_input, gate.measurement
        )
        self.output_labels = labels
        self.row_bases = row_bases
        self.shape = (len(self.input_basis), len(labels))
        col_of = {label: j for j, label in enumerate(labels)}

        # group entries by photon number so each group has one submatrix size
        groups: dict[int, list[tuple[int, int, list[int], list[int], float]]] = {}
        for i, (config, basis) in enumerate(zip(self.input_basis, row_bases)):
            if basis is None:
                continue
            full_in = config + gate.ancilla_input
            for out in basis:
                full_out = out + gate.measurement
                rows = _expand_indices(full_in)
                cols = _expand_indices(full_out)
                groups.setdefault(len(rows), []).append(
                    (i, col_of[out], rows, cols, _norm_factor(full_out, full_in))
                )
        self._groups = []
        for size, items in sorted(groups.items()):
            flat = np.array([i * self.shape[1] + j for i, j, *_ in items])
            rows = np.array([r for _, _, r, _, _ in items], dtype=int).reshape(-1, size)
            cols = np.array([c for _, _, _, c, _ in items], dtype=int).reshape(-1, size)
            norms = np.array([f for *_, f in items])
            self._groups.append((size, flat, rows, cols, norms))

    def __call__(self, unitaries: np.ndarray) -> np.ndarray:
        u = np.asarray(unitaries, dtype=complex)
        single = u.ndim == 2
        if single:
            u = u[None]
        if u.shape[1:] != (self.n_modes, self.n_modes):
            raise ValueError(
                f"unitaries of shape {u.shape[1:]} do not match {self.n_modes} modes"
            )
        out = np.zeros((u.shape[0], self.shape[0] * self.shape[1]), dtype=complex)
        for size, flat, rows, cols, norms in self._groups:
            if size == 0:
                out[:, flat] = 1.0 / norms
                continue
            sub = u[:, rows[:, :, None], cols[:, None, :]]
            out[:, flat] = batched_permanent(sub) / norms
        out = out.reshape(-1, *self.shape)
        return out[0] if single else out
