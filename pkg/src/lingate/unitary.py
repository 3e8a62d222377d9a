"""Exponential-map parametrisation of U(N) by a real vector."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

# Scaled-norm ceiling and degree-12 Taylor coefficients; the truncation
# error is bounded by 0.5**13 / 13! ~ 2e-14.
_SCALED_NORM = 0.5
_COEFFS = [1.0 / math.factorial(k) for k in range(13)]


@dataclass(frozen=True)
class GeneratorBasis:
    n: int
    generators: np.ndarray  # (R, n, n), anti-Hermitian

    @property
    def dim(self) -> int:
        return self.generators.shape[0]


@lru_cache(maxsize=None)
def standard_generators(n: int) -> GeneratorBasis:
    """Basis of the Lie algebra u(n), R = n**2 elements.

    Order: ``i*E_kk`` for k = 0..n-1, then for each pair k < l (row-major)
    the real rotation ``E_kl - E_lk`` followed by ``i*(E_kl + E_lk)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gens = []
    for k in range(n):
        g = np.zeros((n, n), dtype=complex)
        g[k, k] = 1j
        gens.append(g)
    for k in range(n):
        for l in range(k + 1, n):
            g = np.zeros((n, n), dtype=complex)
            g[k, l], g[l, k] = 1.0, -1.0
            gens.append(g)
            g = np.zeros((n, n), dtype=complex)
            g[k, l] = g[l, k] = 1j
            gens.append(g)
    arr = np.array(gens)
    arr.setflags(write=False)
    return GeneratorBasis(n, arr)


def expm_taylor(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of one ``(n, n)`` or a stack ``(B, n, n)``.

    Scaling and squaring: each matrix is divided by ``2**s`` so that its
    1-norm is at most 0.5, a degree-12 Taylor polynomial is evaluated
    (Paterson-Stockmeyer, five matrix products), and the result is squared
    ``s`` times.  ``s`` is chosen per matrix, so a
    result never depends on what else is in the stack.
    """
    a = np.asarray(a, dtype=complex)
    single = a.ndim == 2
    if single:
        a = a[None]
    norms = np.abs(a).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(norms > _SCALED_NORM, np.ceil(np.log2(norms / _SCALED_NORM)), 0)
    s = s.astype(int)
    scaled = a / (2.0 ** s)[:, None, None]

    n = a.shape[-1]
    eye = np.eye(n, dtype=complex)
    c = _COEFFS
    x2 = scaled @ scaled
    x3 = x2 @ scaled
    x4 = x2 @ x2

    def block(k):
        return c[k] * eye + c[k + 1] * scaled + c[k + 2] * x2 + c[k + 3] * x3

    result = block(8) + c[12] * x4
    result = block(4) + x4 @ result
    result = block(0) + x4 @ result

    for step in range(int(s.max(initial=0))):
        mask = s > step
        result[mask] = result[mask] @ result[mask]
    return result[0] if single else result


def generator_sum(x: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != basis.dim:
        raise ValueError(f"parameter length {x.shape[-1]} != basis size {basis.dim}")
    return np.tensordot(x, basis.generators, axes=([-1], [0]))


def exp_map(x, u0, basis: GeneratorBasis) -> np.ndarray:
    """``u0 @ exp(sum_i x_i g_i)``; ``x`` may carry leading batch dims."""
    u0 = np.asarray(u0, dtype=complex)
    if u0.shape != (basis.n, basis.n):
        raise ValueError(f"u0 shape {u0.shape} does not match n={basis.n}")
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        return np.broadcast_to(u0, x.shape[:-1] + u0.shape).copy()
    gen = generator_sum(x, basis)
    flat = gen.reshape(-1, basis.n, basis.n)
    u = u0 @ expm_taylor(flat)
    return u.reshape(gen.shape)


def unitarity_deviation(u) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def unitary_to_json(u) -> dict:
    u = np.asarray(u, dtype=complex)
    return {"n": int(u.shape[0]), "re": u.real.tolist(), "im": u.imag.tolist()}


def unitary_from_json(data: dict) -> np.ndarray:
    try:
        n = int(data["n"])
        u = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed unitary document: {exc}") from exc
    if u.shape != (n, n):
        raise ValueError(f"unitary shape {u.shape} does not match n={n}")
    return u


def save_unitary(path, u) -> None:
    Path(path).write_text(json.dumps(unitary_to_json(u), indent=2) + "\n")


def load_unitary(path) -> np.ndarray:
    return unitary_from_json(json.loads(Path(path).read_text()))
