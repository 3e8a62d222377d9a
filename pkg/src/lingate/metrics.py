"""Fidelity, success probability and the annealed fitness of a transformation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lingate.fock import TransformationMatrix


def _entries(a) -> np.ndarray:
    if isinstance(a, TransformationMatrix):
        return a.entries
    return np.asarray(a, dtype=complex)


@dataclass(frozen=True)
class GateMetrics:
    fidelity: float
    success: float
    norm_min: float
    norm_max: float
    fitness: float


def fidelity(a, target) -> float:
    """Squared cosine of the projective angle between ``a`` and ``target``.

    Invariant under ``a -> c * a`` for any nonzero complex ``c``.  A zero
    matrix has fidelity 0.
    """
    a, t = _entries(a), _entries(target)
    if a.shape != t.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {t.shape}")
    overlap = np.vdot(t, a)
    norm_a = np.vdot(a, a).real
    norm_t = np.vdot(t, t).real
    if norm_a == 0.0:
        return 0.0
    return float(abs(overlap) ** 2 / (norm_a * norm_t))


def success_probability(a) -> float:
    """Mean squared Hilbert-Schmidt norm ``Tr(A^dag A) / D_in``."""
    a = _entries(a)
    if a.shape[0] == 0:
        return 0.0
    return float(np.vdot(a, a).real / a.shape[0])


def norm_bounds(a) -> tuple[float, float]:
    """Extreme eigenvalues of the input-space Gram matrix ``A A^dag``.

    These bracket the state-dependent success probability over all
    computational input states.
    """
    a = _entries(a)
    gram = a @ a.conj().T
    eig = np.linalg.eigvalsh(gram)
    return float(max(eig[0], 0.0)), float(max(eig[-1], 0.0))


def fitness(fid: float, success: float, temperature: float) -> float:
    """Success probability damped by ``exp(-(1 - F) / T)``."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    return float(success * np.exp(-(1.0 - fid) / temperature))


def gate_metrics(a, target, temperature: float | None = None) -> GateMetrics:
    f = fidelity(a, target)
    s = success_probability(a)
    lo, hi = norm_bounds(a)
    phi = f if temperature is None else fitness(f, s, temperature)
    return GateMetrics(f, s, lo, hi, phi)


def batched_fidelity_success(entries: np.ndarray, target: np.ndarray):
    """Fidelity and success probability for a stack ``(B, D_in, D_out)``."""
    entries = np.asarray(entries, dtype=complex)
    t = np.asarray(target, dtype=complex)
    b = entries.shape[0]
    flat = entries.reshape(b, -1)
    tflat = t.reshape(-1)
    norm_a = np.einsum("bk,bk->b", flat.conj(), flat).real
    overlap = flat @ tflat.conj()
    norm_t = np.vdot(tflat, tflat).real
    with np.errstate(invalid="ignore", divide="ignore"):
        fid = np.where(norm_a > 0, np.abs(overlap) ** 2 / (norm_a * norm_t), 0.0)
    success = norm_a / entries.shape[1] if entries.shape[1] else np.zeros(b)
    return fid, success
