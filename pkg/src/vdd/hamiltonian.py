"""Pauli-string Hamiltonians on n qubits with matrix-free basis action.

A Hamiltonian is a real-weighted sum of Pauli strings.  Each string maps
a basis state to exactly one basis state with a phase in {1, -1, i, -i},
so H|v> costs O(#terms * 2^n) without ever materializing the matrix:

    Z keeps the bit,  phase (-1)^b
    X flips the bit,  phase 1
    Y flips the bit,  phase i*(-1)^b     (Y|0> = i|1>, Y|1> = -i|0>)

Qubit 1 is the most significant bit of the state-vector index throughout.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .state import CapacityError, StateVector, as_amplitudes

__all__ = [
    "CapacityError",
    "PauliString",
    "PauliHamiltonian",
    "ModelSpec",
    "build_model",
    "apply_string",
    "apply_to_vector",
    "expectation",
    "dense_matrix",
    "ground_energy",
]

MODELS = ("z1z2", "tfim", "heisenberg")
BOUNDARIES = ("open", "periodic")

DENSE_CAP = 12


@dataclass(frozen=True)
class PauliString:
    """One term: coeff times a tensor product of I/X/Y/Z over all qubits."""

    coeff: float
    ops: str

    def __post_init__(self):
        if not math.isfinite(self.coeff):
            raise ValueError(f"coefficient must be finite, got {self.coeff}")
        bad = set(self.ops) - set("IXYZ")
        if bad:
            raise ValueError(f"operators must be I/X/Y/Z, got {sorted(bad)}")


@dataclass(frozen=True)
class PauliHamiltonian:
    """Hermitian operator: a list of real-coefficient Pauli strings."""

    num_qubits: int
    terms: tuple[PauliString, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if len(t.ops) != self.num_qubits:
                raise ValueError(
                    f"term {t.ops!r} has length {len(t.ops)}, expected {self.num_qubits}"
                )


@dataclass(frozen=True)
class ModelSpec:
    """Named spin-chain model: "z1z2" | "tfim" | "heisenberg".

    z1z2:       Z_1 Z_2 embedded in n qubits (identities elsewhere).
    tfim:       sum_<ij> Z_i Z_j + g * sum_i X_i on a 1D chain.
    heisenberg: sum_<ij> (jx X_i X_j + jy Y_i Y_j + jz Z_i Z_j).

    boundary "open" gives n-1 bonds, "periodic" gives n bonds.
    """

    model: str
    n: int
    g: float = 0.0
    jx: float = 1.0
    jy: float = 1.0
    jz: float = 1.0
    boundary: str = "open"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODELS}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}, expected one of {BOUNDARIES}")
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 2:
            raise ValueError(f"coupled models need an integer n >= 2, got {self.n!r}")
        for name in ("g", "jx", "jy", "jz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"coupling {name} must be finite")


def _string_on(n: int, placed: dict[int, str]) -> str:
    """Ops string with the given {qubit (1-based): op} placements."""
    ops = ["I"] * n
    for q, op in placed.items():
        ops[q - 1] = op
    return "".join(ops)


def _bonds(n: int, boundary: str) -> list[tuple[int, int]]:
    bonds = [(i, i + 1) for i in range(1, n)]
    if boundary == "periodic":
        bonds.append((n, 1))
    return bonds


def build_model(spec: ModelSpec) -> PauliHamiltonian:
    """Assemble the Pauli terms for a model spec (zero-coefficient terms dropped)."""
    n = spec.n
    terms: list[PauliString] = []
    if spec.model == "z1z2":
        terms.append(PauliString(1.0, _string_on(n, {1: "Z", 2: "Z"})))
    elif spec.model == "tfim":
        for i, j in _bonds(n, spec.boundary):
            terms.append(PauliString(1.0, _string_on(n, {i: "Z", j: "Z"})))
        if spec.g != 0.0:
            for i in range(1, n + 1):
                terms.append(PauliString(spec.g, _string_on(n, {i: "X"})))
    else:
        for i, j in _bonds(n, spec.boundary):
            for coeff, op in ((spec.jx, "X"), (spec.jy, "Y"), (spec.jz, "Z")):
                if coeff != 0.0:
                    terms.append(PauliString(coeff, _string_on(n, {i: op, j: op})))
    return PauliHamiltonian(num_qubits=n, terms=tuple(terms))


def apply_string(s: PauliString, b) -> tuple[tuple[int, ...], complex]:
    """Action on one basis state: returns (b', phase) with <b'|s|b> = coeff*phase."""
    bits = tuple(int(x) for x in b)
    if len(bits) != len(s.ops):
        raise ValueError(f"bit string has length {len(bits)}, expected {len(s.ops)}")
    out = list(bits)
    phase = 1 + 0j
    for i, (op, bit) in enumerate(zip(s.ops, bits)):
        if op == "Z":
            phase *= 1 - 2 * bit
        elif op == "X":
            out[i] = 1 - bit
        elif op == "Y":
            out[i] = 1 - bit
            phase *= 1j * (1 - 2 * bit)
    return tuple(out), phase


@functools.lru_cache(maxsize=256)
def _compiled_terms(h: PauliHamiltonian) -> tuple[tuple[float, int, int, complex], ...]:
    """Per term: (coeff, flip mask, Z/Y mask, i^{#Y}) over index bits (qubit 1 = MSB)."""
    n = h.num_qubits
    out = []
    for t in h.terms:
        flip = 0
        zy = 0
        ny = 0
        for q, op in enumerate(t.ops, start=1):
            bitpos = n - q
            if op in ("X", "Y"):
                flip |= 1 << bitpos
            if op in ("Z", "Y"):
                zy |= 1 << bitpos
            if op == "Y":
                ny += 1
        out.append((t.coeff, flip, zy, 1j**(ny % 4)))
    return tuple(out)


def _parity_sign(idx: np.ndarray, mask: int) -> np.ndarray:
    """(-1)^{popcount(idx & mask)} as an int8 array."""
    counts = np.bitwise_count(idx & mask)
    return (1 - 2 * (counts & 1)).astype(np.int8)


def apply_to_vector(h: PauliHamiltonian, v) -> np.ndarray:
    """H @ v, matrix-free: one permutation + phase per Pauli string."""
    amps = as_amplitudes(v)
    n = h.num_qubits
    if amps.shape[0] != 2**n:
        raise ValueError(f"vector length {amps.shape[0]} does not match n = {n}")
    idx = np.arange(2**n, dtype=np.int64)
    out = np.zeros_like(amps)
    for coeff, flip, zy, ipow in _compiled_terms(h):
        val = (coeff * ipow) * (_parity_sign(idx, zy) * amps)
        # idx ^ flip is a bijection, so fancy-index accumulation is collision-free
        out[idx ^ flip] += val
    return out


def expectation(h: PauliHamiltonian, v) -> float:
    """<v|H|v> for a normalized state; the imaginary residue is checked and dropped."""
    amps = as_amplitudes(v)
    if amps.shape[0] != 2**h.num_qubits:
        raise ValueError(
            f"state has {amps.shape[0]} amplitudes, expected {2**h.num_qubits}"
        )
    norm2 = float(np.sum(np.abs(amps) ** 2))
    if abs(norm2 - 1.0) > 1e-10:
        raise ValueError(f"state not normalized: sum |amp|^2 = {norm2!r}")
    val = complex(np.vdot(amps, apply_to_vector(h, amps)))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has a non-real residue: {val!r}")
    return val.real


def dense_matrix(h: PauliHamiltonian) -> np.ndarray:
    """Materialize the 2^n x 2^n matrix (small n only; oracle/cross-check use)."""
    n = h.num_qubits
    if n > DENSE_CAP:
        raise CapacityError(f"dense matrix is capped at n = {DENSE_CAP}, got n = {n}")
    dim = 2**n
    idx = np.arange(dim, dtype=np.int64)
    m = np.zeros((dim, dim), dtype=np.complex128)
    for coeff, flip, zy, ipow in _compiled_terms(h):
        m[idx ^ flip, idx] += (coeff * ipow) * _parity_sign(idx, zy)
    return m


def ground_energy(h: PauliHamiltonian) -> tuple[float, StateVector]:
    """Smallest eigenvalue and a unit ground vector, residual <= 1e-8.

    Dense Hermitian eigensolve up to n = 9; for n = 10..12 a matrix-free
    Lanczos iteration (deterministic start vector) with a dense fallback
    if the residual contract is not met.  Beyond n = 12 raises
    CapacityError: use the sampling (VMC) engine at that scale.
    """
    n = h.num_qubits
    if n > DENSE_CAP:
        raise CapacityError(
            f"exact diagonalization is capped at n = {DENSE_CAP} (got n = {n}); "
            "use the VMC engine for larger systems"
        )
    dim = 2**n

    def _dense() -> tuple[float, np.ndarray]:
        vals, vecs = np.linalg.eigh(dense_matrix(h))
        return float(vals[0]), vecs[:, 0]

    if n <= 9:
        e0, v0 = _dense()
    else:
        from scipy.sparse.linalg import LinearOperator, eigsh

        op = LinearOperator(
            (dim, dim), matvec=lambda x: apply_to_vector(h, x), dtype=np.complex128
        )
        start = 1.0 + 0.1 * np.cos(np.arange(dim))
        start /= np.linalg.norm(start)
        try:
            vals, vecs = eigsh(op, k=1, which="SA", v0=start, maxiter=10000)
            e0, v0 = float(vals[0]), vecs[:, 0]
        except Exception:
            e0, v0 = _dense()
        if np.linalg.norm(apply_to_vector(h, v0) - e0 * v0) > 1e-8:
            e0, v0 = _dense()

    v0 = v0 / np.linalg.norm(v0)
    residual = float(np.linalg.norm(apply_to_vector(h, v0) - e0 * v0))
    if residual > 1e-8:
        raise RuntimeError(f"eigensolver residual {residual} exceeds 1e-8")
    return e0, StateVector(num_qubits=n, amps=v0)
