"""Dense state-vector container shared by the exact engine and the oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CapacityError",
    "StateVector",
    "as_amplitudes",
    "index_of_bits",
    "bits_of_index",
]


class CapacityError(ValueError):
    """A dense 2^n computation was requested beyond its size cap."""


@dataclass
class StateVector:
    """Amplitudes of an n-qubit state.

    amps[index(b)] = <b|psi> with index(b) = sum_l b_l * 2^(n-l), i.e.
    qubit 1 is the most significant bit, so amplitudes are in lexicographic
    bit-string order.
    """

    num_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {self.amps.shape}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def as_amplitudes(v) -> np.ndarray:
    """Accept a StateVector or a plain array and return the amplitude array."""
    return np.asarray(getattr(v, "amps", v), dtype=np.complex128)


def index_of_bits(bits) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def bits_of_index(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - l)) & 1 for l in range(1, n + 1))
