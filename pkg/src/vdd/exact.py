"""Exact engine: dense state vectors, energies, and analytic gradients.

The state vector is filled by level-wise forward propagation: every
bit-string prefix of length l-1 sits at exactly one level-l node, so the
2^n amplitudes are built in n vectorized sweeps (O(n 2^n) total) instead
of 2^n independent path walks.

Gradients use d<H>/dθ_j = 2 Re <∂_j ψ|H|ψ>, valid because the diagram is
normalized for every parameter value.  ∂_j ψ is ψ with node j's edge
factor on the path replaced by its θ_j-derivative, so one forward pass
(prefix amplitudes) plus one backward pass (suffix sums against H|ψ>)
yields every parameter's gradient at the cost of a few state-vector
sweeps.

Two parameter modes:

* "raw"  — derivatives w.r.t. the stored (r, omega, phi).  The right-edge
           magnitude sqrt(1-r^2) makes d/dr singular at r = 1; the factor
           is clamped and a SingularGradientWarning names the affected
           parameters when r sits exactly on {0, 1}.
* "trig" — magnitude reparameterized as r = cos(u) with u unconstrained
           (left |cos u|-edge, right sin(u)-edge), so the magnitude
           derivative -sin(u), cos(u) is bounded.  Used for training.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .graph import Node, VddGraph, edge_amplitudes, validate
from .state import CapacityError, StateVector

__all__ = [
    "PARAM_MODES",
    "STATEVECTOR_CAP",
    "GradientVector",
    "SingularGradientWarning",
    "to_state_vector",
    "exact_energy",
    "exact_gradient",
    "finite_difference",
    "parameter_labels",
]

PARAM_MODES = ("raw", "trig")

STATEVECTOR_CAP = 20

_CLAMP = 1e-9  # raw-mode distance kept from the r = 1 singularity


class SingularGradientWarning(UserWarning):
    """Raw-mode gradient requested with some r exactly on {0, 1}."""


@dataclass
class GradientVector:
    """Flat gradient, ordered (r, omega, phi) per node in ascending node id.

    Labels follow the node ids ("r3", "omega3", "phi3"); lookups also
    accept negative ids counting nodes from the end, so "phi-1" is the
    phi entry of the last node.
    """

    entries: np.ndarray
    labels: tuple[str, ...]
    node_ids: tuple[int, ...]

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.shape != (3 * len(self.node_ids),):
            raise ValueError(
                f"expected {3 * len(self.node_ids)} entries, got shape {self.entries.shape}"
            )
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("gradient entries must be finite")

    def index_of(self, label: str) -> int:
        for kind, offset in (("omega", 1), ("phi", 2), ("r", 0)):
            if label.startswith(kind):
                suffix = label[len(kind):]
                break
        else:
            raise KeyError(f"bad gradient label {label!r}")
        try:
            ref = int(suffix)
        except ValueError:
            raise KeyError(f"bad gradient label {label!r}") from None
        if ref < 0:
            try:
                node_id = self.node_ids[ref]  # negative ids count from the last node
            except IndexError:
                raise KeyError(f"label {label!r} reaches past the first node") from None
        else:
            node_id = ref
        if node_id not in self.node_ids:
            raise KeyError(f"no node {node_id} behind label {label!r}")
        return 3 * self.node_ids.index(node_id) + offset

    def entry(self, label: str) -> float:
        return float(self.entries[self.index_of(label)])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


def parameter_labels(g: VddGraph) -> tuple[str, ...]:
    """Canonical flat parameter names, matching GradientVector ordering."""
    out: list[str] = []
    for node_id in g.sorted_ids():
        out.extend((f"r{node_id}", f"omega{node_id}", f"phi{node_id}"))
    return tuple(out)


# ---------------------------------------------------------------------------
# level tables and the forward sweep


class _LevelTables:
    """Per-level arrays: edge amplitudes and child positions of each node.

    Position = index of a node within the sorted id list of its level, so
    prefix -> node lookups are integer arrays instead of dict probes.
    """

    def __init__(self, g: VddGraph):
        issues = validate(g)
        if issues:
            raise ValueError("invalid graph: " + "; ".join(issues))
        n = g.num_qubits
        by_level: list[list[Node]] = [[] for _ in range(n + 1)]
        for node_id in g.sorted_ids():
            node = g.nodes[node_id]
            by_level[node.level].append(node)
        pos = {node.id: k for nodes in by_level for k, node in enumerate(nodes)}
        self.num_qubits = n
        self.ids = [np.array([node.id for node in nodes], dtype=np.int64) for nodes in by_level]
        self.left = []
        self.right = []
        self.child0 = []
        self.child1 = []
        for level in range(n + 1):
            nodes = by_level[level]
            left = np.empty(len(nodes), dtype=np.complex128)
            right = np.empty(len(nodes), dtype=np.complex128)
            c0 = np.empty(len(nodes), dtype=np.int64)
            c1 = np.empty(len(nodes), dtype=np.int64)
            for k, node in enumerate(nodes):
                left[k], right[k] = edge_amplitudes(node.params)
                c0[k] = pos.get(node.child0, -1)
                c1[k] = pos.get(node.child1, -1)
            self.left.append(left)
            self.right.append(right)
            self.child0.append(c0)
            self.child1.append(c1)
        self.root_pos = pos[g.root_child]


def _forward(g: VddGraph, tables: _LevelTables):
    """Prefix amplitudes F[l] (length 2^l) and node positions P[l] per level.

    P[l][p] is the position (within level l+1) of the node reached by the
    length-l prefix p; F[l][p] is the product of the first l edge factors
    times the global phase.
    """
    n = g.num_qubits
    amps = [np.array([np.exp(1j * g.global_phase)], dtype=np.complex128)]
    positions = [np.array([tables.root_pos], dtype=np.int64)]
    for level in range(1, n + 1):
        cur_pos = positions[-1]
        cur_amp = amps[-1]
        new_amp = np.empty(2 * cur_amp.shape[0], dtype=np.complex128)
        new_amp[0::2] = cur_amp * tables.left[level][cur_pos]
        new_amp[1::2] = cur_amp * tables.right[level][cur_pos]
        amps.append(new_amp)
        if level < n:
            new_pos = np.empty(2 * cur_pos.shape[0], dtype=np.int64)
            new_pos[0::2] = tables.child0[level][cur_pos]
            new_pos[1::2] = tables.child1[level][cur_pos]
            positions.append(new_pos)
    return amps, positions


def to_state_vector(g: VddGraph) -> StateVector:
    """All 2^n amplitudes of the diagram, indexed with qubit 1 as the MSB."""
    if g.num_qubits > STATEVECTOR_CAP:
        raise CapacityError(
            f"state vectors are capped at n = {STATEVECTOR_CAP}, got n = {g.num_qubits}"
        )
    tables = _LevelTables(g)
    amps, _ = _forward(g, tables)
    return StateVector(num_qubits=g.num_qubits, amps=amps[-1])


def exact_energy(g: VddGraph, h) -> float:
    """<psi|H|psi> from the dense state vector."""
    from .hamiltonian import expectation

    if h.num_qubits != g.num_qubits:
        raise ValueError(
            f"operator acts on {h.num_qubits} qubits but the graph has {g.num_qubits}"
        )
    return expectation(h, to_state_vector(g))


# ---------------------------------------------------------------------------
# analytic gradient


def _magnitude_derivatives(params, mode: str):
    """Derivative of (left, right) edge factors w.r.t. the magnitude slot.

    raw:  d/dr  (r e^{iw}, sqrt(1-r^2) e^{ip}) — clamped near r = 1.
    trig: d/du at r = cos u, u in [0, pi/2]    — (-sin u e^{iw}, cos u e^{ip}).
    """
    r = params.r
    eiw = np.exp(1j * params.omega)
    eip = np.exp(1j * params.phi)
    if mode == "raw":
        rc = min(max(r, _CLAMP), 1.0 - _CLAMP)
        return eiw, -(rc / math.sqrt(1.0 - rc * rc)) * eip
    sin_u = math.sqrt(max(0.0, 1.0 - r * r))
    return -sin_u * eiw, r * eip


def exact_gradient(g: VddGraph, h, mode: str = "raw") -> GradientVector:
    """d<H>/dθ for every parameter via one forward and one backward sweep.

    Forward gives the prefix amplitude F[p] in front of each node; backward
    propagates suffix sums B against H|psi>, so that the derivative of
    <psi|H|psi> w.r.t. node j's edge factors is read off from
    sum_{p at j} conj(F[p]) * B[child prefixes].  Entries are
    2 Re <∂_j psi|H|psi>.
    """
    from .hamiltonian import apply_to_vector

    if mode not in PARAM_MODES:
        raise ValueError(f"unknown parameter mode {mode!r}, expected one of {PARAM_MODES}")
    if h.num_qubits != g.num_qubits:
        raise ValueError(
            f"operator acts on {h.num_qubits} qubits but the graph has {g.num_qubits}"
        )
    n = g.num_qubits
    tables = _LevelTables(g)
    amps, positions = _forward(g, tables)

    if mode == "raw":
        singular = [
            f"r{node_id}"
            for node_id in g.sorted_ids()
            if g.nodes[node_id].params.r in (0.0, 1.0)
        ]
        if singular:
            warnings.warn(
                "raw-mode magnitude gradient is singular at r in {0, 1} for: "
                + ", ".join(singular),
                SingularGradientWarning,
                stacklevel=2,
            )

    hv = apply_to_vector(h, amps[-1])

    node_ids = g.sorted_ids()
    slot = {node_id: k for k, node_id in enumerate(node_ids)}
    g0 = np.zeros(len(node_ids), dtype=np.complex128)  # conj(F) * B at the 0-child
    g1 = np.zeros(len(node_ids), dtype=np.complex128)

    back = hv
    for level in range(n, 0, -1):
        cur_pos = positions[level - 1]
        prefix = np.conj(amps[level - 1])
        b0 = back[0::2]
        b1 = back[1::2]
        level_slots = np.array([slot[i] for i in tables.ids[level]], dtype=np.int64)
        np.add.at(g0, level_slots[cur_pos], prefix * b0)
        np.add.at(g1, level_slots[cur_pos], prefix * b1)
        back = np.conj(tables.left[level][cur_pos]) * b0 + np.conj(
            tables.right[level][cur_pos]
        ) * b1

    entries = np.empty(3 * len(node_ids), dtype=np.float64)
    for k, node_id in enumerate(node_ids):
        node = g.nodes[node_id]
        left, right = edge_amplitudes(node.params)
        dleft, dright = _magnitude_derivatives(node.params, mode)
        entries[3 * k] = 2.0 * (np.conj(dleft) * g0[k] + np.conj(dright) * g1[k]).real
        entries[3 * k + 1] = 2.0 * (np.conj(1j * left) * g0[k]).real
        entries[3 * k + 2] = 2.0 * (np.conj(1j * right) * g1[k]).real

    labels = parameter_labels(g)
    return GradientVector(entries=entries, labels=labels, node_ids=tuple(node_ids))


# ---------------------------------------------------------------------------
# finite differences (verification oracle for the analytic gradient)


def _with_params(g: VddGraph, node_id: int, params) -> VddGraph:
    nodes = dict(g.nodes)
    nodes[node_id] = replace(nodes[node_id], params=params)
    return replace(g, nodes=nodes)


def finite_difference(g: VddGraph, h, step: float = 1e-6, mode: str = "raw") -> GradientVector:
    """Central-difference gradient of exact_energy, parameter by parameter.

    Magnitude probes: raw mode clips r into [0, 1] and divides by the
    realized interval (one-sided at the box edge); trig mode probes
    u -> u ± step at r = cos u.  Probes never mutate the input graph.
    """
    if not (1e-8 <= step <= 1e-3):
        raise ValueError(f"step must lie in [1e-8, 1e-3], got {step!r}")
    if mode not in PARAM_MODES:
        raise ValueError(f"unknown parameter mode {mode!r}, expected one of {PARAM_MODES}")

    node_ids = g.sorted_ids()
    entries = np.empty(3 * len(node_ids), dtype=np.float64)

    def energy_at(node_id: int, params) -> float:
        return exact_energy(_with_params(g, node_id, params), h)

    for k, node_id in enumerate(node_ids):
        p = g.nodes[node_id].params
        if mode == "raw":
            hi = min(1.0, p.r + step)
            lo = max(0.0, p.r - step)
            de = energy_at(node_id, replace(p, r=hi)) - energy_at(node_id, replace(p, r=lo))
            entries[3 * k] = de / (hi - lo)
        else:
            u = math.acos(min(1.0, max(0.0, p.r)))
            r_hi = min(1.0, max(0.0, math.cos(u + step)))
            r_lo = min(1.0, max(0.0, math.cos(u - step)))
            de = energy_at(node_id, replace(p, r=r_hi)) - energy_at(node_id, replace(p, r=r_lo))
            entries[3 * k] = de / (2.0 * step)
        for offset, field in ((1, "omega"), (2, "phi")):
            val = getattr(p, field)
            de = energy_at(node_id, replace(p, **{field: val + step})) - energy_at(
                node_id, replace(p, **{field: val - step})
            )
            entries[3 * k + offset] = de / (2.0 * step)

    return GradientVector(
        entries=entries, labels=parameter_labels(g), node_ids=tuple(node_ids)
    )
