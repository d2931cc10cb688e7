"""Stochastic (VMC) engine: exact autoregressive sampling and estimators.

Sampling walks the diagram root-to-leaves, emitting bit 0 with probability
r^2 at each visited node, so draws come from |psi(b)|^2 exactly — i.i.d.,
no Markov chain, no burn-in.

Per-sample quantities:

* local value     A~(b) = sum_s coeff * conj(phase_s(b)) * psi(b xor flip_s) / psi(b)
                  (one connected configuration per Pauli string; the
                  conjugate is <b|s|b'> for the Hermitian string s)
* log-derivative  O_j(b) = d log psi(b) / d theta_j, nonzero only for the
                  n nodes on b's path:
                      left edge:  O_r = 1/r,            O_omega = i
                      right edge: O_r = -r/(1 - r^2),   O_phi   = i
                  ("trig" mode rescales the magnitude row by dr/du = -sin u,
                  giving -tan u on left edges and cot u on right edges)

and the stochastic gradient 2 Re E[conj(O_j) (A~ - E[A~])] with in-batch
centering.  Batch helpers are vectorized; the per-bit-string operations are
the reference implementations they are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exact import GradientVector, _LevelTables, parameter_labels
from .graph import VddGraph, amplitude, edge_amplitudes
from .hamiltonian import PauliHamiltonian, _compiled_terms

__all__ = [
    "VmcBatch",
    "sample",
    "local_estimator",
    "log_derivatives",
    "sample_batch",
    "vmc_energy",
    "vmc_gradient",
    "vmc_gradient_stderr",
    "batch_to_csv",
]


@dataclass
class VmcBatch:
    """Samples plus everything the stochastic gradient needs.

    samples is a (batch, n) 0/1 array (row = bit string, qubit 1 first);
    log_derivs is (batch, 3 * node count) complex, columns ordered like
    GradientVector entries; mode records which magnitude derivative the
    O columns hold ("raw" or "trig").
    """

    samples: np.ndarray
    local_values: np.ndarray
    log_derivs: np.ndarray
    energy_mean: float
    energy_stderr: float
    labels: tuple[str, ...]
    node_ids: tuple[int, ...]
    mode: str

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        self.local_values = np.asarray(self.local_values, dtype=np.complex128)
        self.log_derivs = np.asarray(self.log_derivs, dtype=np.complex128)
        b = self.samples.shape[0]
        if self.local_values.shape != (b,) or self.log_derivs.shape[0] != b:
            raise ValueError("samples, local_values and log_derivs must have equal length")

    @property
    def batch_size(self) -> int:
        return int(self.samples.shape[0])


def _energy_stats(local_values: np.ndarray) -> tuple[float, float]:
    re = np.real(local_values)
    mean = float(np.mean(re))
    if re.shape[0] < 2:
        return mean, 0.0
    return mean, float(np.std(re, ddof=1) / math.sqrt(re.shape[0]))


def sample(g: VddGraph, count: int, seed: int = 0, rng=None) -> np.ndarray:
    """(count, n) array of i.i.d. Born-distribution bit strings.

    Level-major: one uniform draw per (sample, level), consumed level by
    level, so results are reproducible for a given seed.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    tables = _LevelTables(g)
    n = g.num_qubits
    if rng is None:
        rng = np.random.default_rng(seed)
    bits = np.empty((count, n), dtype=np.uint8)
    pos = np.full(count, tables.root_pos, dtype=np.int64)
    for level in range(1, n + 1):
        p_zero = np.abs(tables.left[level][pos]) ** 2
        b = (rng.random(count) >= p_zero).astype(np.uint8)
        bits[:, level - 1] = b
        if level < n:
            pos = np.where(b == 0, tables.child0[level][pos], tables.child1[level][pos])
    return bits


def _batch_amplitudes(tables: _LevelTables, bits: np.ndarray, global_phase: float) -> np.ndarray:
    """psi(b) for every row of a (batch, n) bit array via a shared path walk."""
    count = bits.shape[0]
    amp = np.full(count, np.exp(1j * global_phase), dtype=np.complex128)
    pos = np.full(count, tables.root_pos, dtype=np.int64)
    for level in range(1, tables.num_qubits + 1):
        b = bits[:, level - 1]
        amp = amp * np.where(b == 0, tables.left[level][pos], tables.right[level][pos])
        if level < tables.num_qubits:
            pos = np.where(b == 0, tables.child0[level][pos], tables.child1[level][pos])
    return amp


def _pack_indices(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[1]
    weights = (1 << np.arange(n - 1, -1, -1)).astype(np.int64)
    return bits.astype(np.int64) @ weights


def _unpack_indices(idx: np.ndarray, n: int) -> np.ndarray:
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def _batch_local_values(
    g: VddGraph, tables: _LevelTables, h: PauliHamiltonian, bits: np.ndarray
) -> np.ndarray:
    psi = _batch_amplitudes(tables, bits, g.global_phase)
    if np.any(psi == 0):
        raise ValueError("local estimator undefined where psi(b) = 0")
    idx = _pack_indices(bits)
    n = g.num_qubits
    out = np.zeros(bits.shape[0], dtype=np.complex128)
    for coeff, flip, zy, ipow in _compiled_terms(h):
        sign = 1 - 2 * (np.bitwise_count(idx & zy) & 1).astype(np.int64)
        if flip:
            psi_flip = _batch_amplitudes(tables, _unpack_indices(idx ^ flip, n), g.global_phase)
        else:
            psi_flip = psi
        out += (coeff * np.conj(ipow)) * sign * psi_flip / psi
    return out


def local_estimator(g: VddGraph, h: PauliHamiltonian, b) -> complex:
    """A~(b) for one bit string; O(#terms * n) via single-path walks."""
    from .hamiltonian import apply_string

    bits = tuple(int(x) for x in b)
    psi_b = amplitude(g, bits)
    if psi_b == 0:
        raise ValueError(f"local estimator undefined at psi{bits} = 0")
    total = 0j
    for term in h.terms:
        b_prime, phase = apply_string(term, bits)
        total += term.coeff * np.conj(phase) * amplitude(g, b_prime) / psi_b
    return complex(total)


def _magnitude_log_deriv(r: float, bit: int, mode: str) -> float:
    """O for the magnitude slot on a taken edge; raises where the edge has
    zero amplitude (probability-0 under Born sampling).

    raw:  1/r (left) or -r/(1-r^2) (right); trig with r = cos u:
    -tan u (left) or cot u (right).
    """
    if bit == 0:
        if r == 0.0:
            raise ValueError("left edge taken with r = 0: log-derivative is singular")
        return -math.sqrt(1.0 - r * r) / r if mode == "trig" else 1.0 / r
    if r == 1.0:
        raise ValueError("right edge taken with r = 1: log-derivative is singular")
    return r / math.sqrt(1.0 - r * r) if mode == "trig" else -r / (1.0 - r * r)


def log_derivatives(g: VddGraph, b, mode: str = "raw") -> np.ndarray:
    """O_j(b) = d log psi(b)/d theta_j as a flat complex array (3 per node)."""
    from .exact import PARAM_MODES

    if mode not in PARAM_MODES:
        raise ValueError(f"unknown parameter mode {mode!r}, expected one of {PARAM_MODES}")
    bits = tuple(int(x) for x in b)
    if len(bits) != g.num_qubits or any(x not in (0, 1) for x in bits):
        raise ValueError(f"need {g.num_qubits} bits of 0/1, got {b!r}")
    node_ids = g.sorted_ids()
    slot = {node_id: k for k, node_id in enumerate(node_ids)}
    out = np.zeros(3 * len(node_ids), dtype=np.complex128)
    current = g.root_child
    for bit in bits:
        node = g.nodes[current]
        k = slot[node.id]
        out[3 * k] = _magnitude_log_deriv(node.params.r, bit, mode)
        if bit == 0:
            out[3 * k + 1] = 1j
            current = node.child0
        else:
            out[3 * k + 2] = 1j
            current = node.child1
    return out


def _batch_log_derivs(g: VddGraph, tables: _LevelTables, bits: np.ndarray, mode: str) -> np.ndarray:
    count, n = bits.shape
    node_ids = g.sorted_ids()
    slot = {node_id: k for k, node_id in enumerate(node_ids)}
    out = np.zeros((count, 3 * len(node_ids)), dtype=np.complex128)
    rows = np.arange(count)
    pos = np.full(count, tables.root_pos, dtype=np.int64)
    for level in range(1, n + 1):
        level_slots = np.array([slot[i] for i in tables.ids[level]], dtype=np.int64)
        r = np.abs(tables.left[level])  # |left| = r per node at this level
        k = level_slots[pos]
        b = bits[:, level - 1]
        r_here = r[pos]
        left_taken = b == 0
        # sampled paths never take zero-amplitude edges, so divisions are safe
        with np.errstate(divide="ignore", invalid="ignore"):
            if mode == "trig":
                sin_u = np.sqrt(np.maximum(0.0, 1.0 - r_here**2))
                mag = np.where(left_taken, -sin_u / r_here, r_here / sin_u)
            else:
                mag = np.where(left_taken, 1.0 / r_here, -r_here / (1.0 - r_here**2))
        out[rows, 3 * k] = mag
        out[rows[left_taken], 3 * k[left_taken] + 1] = 1j
        out[rows[~left_taken], 3 * k[~left_taken] + 2] = 1j
        if level < n:
            pos = np.where(left_taken, tables.child0[level][pos], tables.child1[level][pos])
    if not np.all(np.isfinite(out)):
        raise ValueError("log-derivatives hit a zero-amplitude edge")
    return out


def sample_batch(
    g: VddGraph,
    h: PauliHamiltonian,
    count: int,
    seed: int = 0,
    rng=None,
    mode: str = "raw",
) -> VmcBatch:
    """Draw a batch and evaluate local values, log-derivatives and stats."""
    if h.num_qubits != g.num_qubits:
        raise ValueError(
            f"operator acts on {h.num_qubits} qubits but the graph has {g.num_qubits}"
        )
    tables = _LevelTables(g)
    bits = sample(g, count, seed=seed, rng=rng)
    local = _batch_local_values(g, tables, h, bits)
    oj = _batch_log_derivs(g, tables, bits, mode)
    mean, stderr = _energy_stats(local)
    return VmcBatch(
        samples=bits,
        local_values=local,
        log_derivs=oj,
        energy_mean=mean,
        energy_stderr=stderr,
        labels=parameter_labels(g),
        node_ids=tuple(g.sorted_ids()),
        mode=mode,
    )


def vmc_energy(batch: VmcBatch) -> tuple[float, float]:
    """(mean, standard error) of Re A~ over the batch."""
    if batch.batch_size < 1:
        raise ValueError("empty batch")
    return _energy_stats(batch.local_values)


def vmc_gradient(batch: VmcBatch) -> GradientVector:
    """2 Re mean(conj(O_j) (A~ - batch mean A~)) per parameter."""
    if batch.batch_size < 2:
        raise ValueError(f"gradient needs at least 2 samples, got {batch.batch_size}")
    centered = batch.local_values - np.mean(batch.local_values)
    entries = 2.0 * np.real(np.conj(batch.log_derivs).T @ centered) / batch.batch_size
    return GradientVector(entries=entries, labels=batch.labels, node_ids=batch.node_ids)


def vmc_gradient_stderr(batch: VmcBatch) -> np.ndarray:
    """Leave-one-out jackknife standard error of every gradient entry.

    The estimator is a smooth function of three batch sums, so each
    leave-one-out replicate is available in closed form and the whole
    jackknife is a few broadcast operations.
    """
    if batch.batch_size < 2:
        raise ValueError(f"jackknife needs at least 2 samples, got {batch.batch_size}")
    count = batch.batch_size
    oconj = np.conj(batch.log_derivs)  # (B, P)
    a = batch.local_values  # (B,)
    s_oa = oconj.T @ a  # (P,)
    s_o = oconj.sum(axis=0)  # (P,)
    s_a = a.sum()
    m = count - 1
    loo_oa = s_oa[None, :] - oconj * a[:, None]
    loo_o = s_o[None, :] - oconj
    loo_a = (s_a - a)[:, None]
    replicates = 2.0 * np.real((loo_oa - loo_o * loo_a / m) / m)  # (B, P)
    spread = replicates - replicates.mean(axis=0, keepdims=True)
    return np.sqrt((m / count) * np.sum(spread**2, axis=0))


def batch_to_csv(batch: VmcBatch, path) -> None:
    """Write `sample_index, bitstring, local_value_re, local_value_im` rows."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_index", "bitstring", "local_value_re", "local_value_im"])
        for i in range(batch.batch_size):
            bitstring = "".join(str(int(x)) for x in batch.samples[i])
            writer.writerow(
                [i, bitstring, repr(float(batch.local_values[i].real)),
                 repr(float(batch.local_values[i].imag))]
            )
