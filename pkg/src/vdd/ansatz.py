"""Builders for the three diagram layouts, parameter initialization, and
encoding of arbitrary states onto the universal layout.

Layouts ("product", "accordion", "universal"):

* product   — one node per level; any state it represents is a product of
              single-qubit states.  3n parameters.
* accordion — alternating one- and two-node levels; represents exactly the
              products of two-qubit (dimer) states on pairs (1,2), (3,4), ...
              floor(3n/2) nodes, 3*floor(3n/2) parameters.
* universal — level l holds 2^(l-1) nodes, one per bit-string prefix; can
              represent any n-qubit state.  2^n - 1 nodes.

Builders return graphs with balanced parameters (r = 1/sqrt2, phases 0);
apply ``init_params`` to overwrite them.  Node ids run level by level,
left to right, starting at 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .graph import TERMINAL, Node, ParamTriple, VddGraph, validate
from .state import CapacityError, as_amplitudes

__all__ = [
    "ANSATZ_KINDS",
    "InitScheme",
    "build_product",
    "build_accordion",
    "build_universal",
    "build_ansatz",
    "init_params",
    "parse_init_scheme",
    "encode_state",
    "accordion_node_count",
]

ANSATZ_KINDS = ("product", "accordion", "universal")

_BALANCED = ParamTriple(r=1.0 / math.sqrt(2.0), omega=0.0, phi=0.0)


def accordion_node_count(n: int) -> int:
    """Closed form for the accordion layout: floor(3n/2) nodes."""
    return (3 * n) // 2


def _check_n(n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")


def build_product(n: int) -> VddGraph:
    """One node per level; both edges of level l target the level-(l+1) node."""
    _check_n(n)
    nodes = {}
    for level in range(1, n + 1):
        nxt = level + 1 if level < n else TERMINAL
        nodes[level] = Node(id=level, level=level, params=_BALANCED, child0=nxt, child1=nxt)
    return VddGraph(num_qubits=n, global_phase=0.0, root_child=1, nodes=nodes)


def build_accordion(n: int) -> VddGraph:
    """Alternating one- and two-node levels.

    A one-node level's left/right edges point at the left/right nodes of
    the next (two-node) level; both nodes of a two-node level send both
    edges to the single node of the level after.  The represented states
    are dimer products over qubit pairs (1,2), (3,4), ... with a single
    leftover qubit factor when n is odd.
    """
    _check_n(n)
    level_ids: list[list[int]] = []
    next_id = 1
    for level in range(1, n + 1):
        width = 1 if level % 2 == 1 else 2
        level_ids.append(list(range(next_id, next_id + width)))
        next_id += width

    nodes = {}
    for level, ids in enumerate(level_ids, start=1):
        nxt = level_ids[level] if level < n else None
        for nid in ids:
            if nxt is None:
                c0 = c1 = TERMINAL
            elif len(nxt) == 2:
                c0, c1 = nxt[0], nxt[1]
            else:
                c0 = c1 = nxt[0]
            nodes[nid] = Node(id=nid, level=level, params=_BALANCED, child0=c0, child1=c1)
    return VddGraph(num_qubits=n, global_phase=0.0, root_child=1, nodes=nodes)


def build_universal(n: int) -> VddGraph:
    """Complete binary layout: node k at level l has children 2k and 2k+1.

    Level l holds the 2^(l-1) nodes indexed by the bit-string prefixes of
    length l-1, so any n-qubit state can be represented (see encode_state).
    Capped at n = 20 since the layout has 2^n - 1 nodes.
    """
    _check_n(n)
    if n > 20:
        raise CapacityError(f"universal layout is capped at n = 20 (2^n - 1 nodes), got n = {n}")
    nodes = {}
    for level in range(1, n + 1):
        for nid in range(2 ** (level - 1), 2**level):
            if level == n:
                c0 = c1 = TERMINAL
            else:
                c0, c1 = 2 * nid, 2 * nid + 1
            nodes[nid] = Node(id=nid, level=level, params=_BALANCED, child0=c0, child1=c1)
    return VddGraph(num_qubits=n, global_phase=0.0, root_child=1, nodes=nodes)


def build_ansatz(kind: str, n: int) -> VddGraph:
    """Dispatch on the layout name ("product" | "accordion" | "universal")."""
    if kind == "product":
        return build_product(n)
    if kind == "accordion":
        return build_accordion(n)
    if kind == "universal":
        return build_universal(n)
    raise ValueError(f"unknown ansatz {kind!r}, expected one of {ANSATZ_KINDS}")


@dataclass(frozen=True)
class InitScheme:
    """Parameter-initialization recipe.

    kind "uniform":  r ~ U[0,1], omega, phi ~ U[0, 2*pi), independent per
                     node, drawn in node-id order (r, omega, phi each) from
                     numpy's seeded default generator (PCG64), so runs are
                     bit-reproducible across platforms.
    kind "balanced": r = 1/sqrt2, phases 0.
    kind "basis":    r in {0,1} along the path of ``bits`` so that
                     psi(bits) = 1; off-path nodes get r = 1, phases 0.
    """

    kind: str
    seed: int = 0
    bits: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "balanced", "basis"):
            raise ValueError(f"unknown init scheme {self.kind!r}")
        if self.kind == "basis":
            if self.bits is None:
                raise ValueError("basis init requires a bit string")
            object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
            if any(b not in (0, 1) for b in self.bits):
                raise ValueError(f"bits must be 0/1, got {self.bits}")


def parse_init_scheme(text: str, seed: int = 0) -> InitScheme:
    """Parse the CLI form: "uniform" | "balanced" | "basis:<bitstring>"."""
    if text == "uniform":
        return InitScheme("uniform", seed=seed)
    if text == "balanced":
        return InitScheme("balanced")
    if text.startswith("basis:"):
        bits = text[len("basis:"):]
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"basis init needs a 0/1 string, got {bits!r}")
        return InitScheme("basis", bits=tuple(int(c) for c in bits))
    raise ValueError(f'unknown init scheme {text!r}, expected "uniform", "balanced" or "basis:<bits>"')


def init_params(g: VddGraph, scheme: InitScheme) -> VddGraph:
    """Return a copy of ``g`` with freshly initialized parameters.

    Deterministic given the scheme's seed; the global phase is reset to 0
    (it is not a trainable parameter).
    """
    new_nodes: dict[int, Node] = {}
    if scheme.kind == "uniform":
        rng = np.random.default_rng(scheme.seed)
        for nid in sorted(g.nodes):
            r = float(rng.uniform(0.0, 1.0))
            omega = float(rng.uniform(0.0, 2.0 * math.pi))
            phi = float(rng.uniform(0.0, 2.0 * math.pi))
            new_nodes[nid] = replace(g.nodes[nid], params=ParamTriple(r, omega, phi))
    elif scheme.kind == "balanced":
        for nid, node in g.nodes.items():
            new_nodes[nid] = replace(node, params=_BALANCED)
    else:
        bits = scheme.bits
        if bits is None or len(bits) != g.num_qubits:
            raise ValueError(
                f"basis init needs {g.num_qubits} bits, got {len(bits) if bits else 0}"
            )
        on_path: dict[int, int] = {}
        current = g.root_child
        for bit in bits:
            on_path[current] = bit
            node = g.nodes[current]
            current = node.child1 if bit else node.child0
        for nid, node in g.nodes.items():
            r = 0.0 if on_path.get(nid, 0) else 1.0
            new_nodes[nid] = replace(node, params=ParamTriple(r, 0.0, 0.0))
    return VddGraph(
        num_qubits=g.num_qubits, global_phase=0.0, root_child=g.root_child, nodes=new_nodes
    )


def encode_state(v) -> VddGraph:
    """Encode an arbitrary normalized state onto the universal layout.

    Works by the autoregressive split: the node for prefix p carries
    r = sqrt(M(p0)/M(p)) where M(q) is the probability mass of all bit
    strings starting with q, and the leaf-level phases carry arg(<b|v>).
    The branch factors then telescope to reproduce every amplitude of the
    input exactly (well inside the 1e-10 contract).  Branches with zero
    mass get r in {0, 1} exactly and zero phases; unreachable subtrees
    keep (r=1, 0, 0).

    Accepts a StateVector or a plain complex array of length 2^n, n <= 12.
    """
    amps = as_amplitudes(v)
    size = amps.shape[0]
    n = int(size).bit_length() - 1
    if size < 2 or size != 2**n:
        raise ValueError(f"amplitude count must be a power of two >= 2, got {size}")
    if n > 12:
        raise CapacityError(f"encode_state is capped at n = 12, got n = {n}")
    total = float(np.sum(np.abs(amps) ** 2))
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"state not normalized: sum |amp|^2 = {total!r}")

    # masses[l][p] = probability mass of prefixes of length l
    probs = np.abs(amps) ** 2
    masses = [probs]
    while masses[0].shape[0] > 1:
        masses.insert(0, masses[0].reshape(-1, 2).sum(axis=1))

    g = build_universal(n)
    new_nodes: dict[int, Node] = {}
    for nid, node in g.nodes.items():
        level = node.level
        p = nid - 2 ** (level - 1)
        mass = masses[level - 1][p]
        if mass <= 0.0:
            params = ParamTriple(1.0, 0.0, 0.0)
        else:
            ratio = float(masses[level][2 * p] / mass)
            r = math.sqrt(min(1.0, max(0.0, ratio)))
            if level == n:
                omega = cmath.phase(amps[2 * p])
                phi = cmath.phase(amps[2 * p + 1])
            else:
                omega = phi = 0.0
            params = ParamTriple(r, omega, phi)
        new_nodes[nid] = replace(node, params=params)
    out = VddGraph(num_qubits=n, global_phase=0.0, root_child=1, nodes=new_nodes)
    assert not validate(out)
    return out
