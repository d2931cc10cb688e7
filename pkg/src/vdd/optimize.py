"""Gradient-descent training of diagram parameters.

Losses:

* "energy_gap" — <H> - E0 (E0 from the dense eigensolver or user-supplied);
                 same gradient as "energy", but the trace shows the gap.
* "energy"     — plain <H>.
* "bce"        — binary cross-entropy of Born probabilities against 0/1
                 labels, -(1/N) sum [l log p + (1-l) log(1-p)].
* "kl"         — cross-entropy against the empirical distribution of the
                 dataset, -(1/N) sum log p(b_i)  (the KL divergence up to
                 the dataset's fixed entropy).

Gradients come from the exact engine or from sampled batches ("vmc").
Parameter updates run in a flat vector ordered like GradientVector
entries.  In "trig" mode the magnitude slot holds u with r = cos u,
re-derived from the graph each epoch (u in [0, pi/2]); after a step the
graph is materialized with r = |cos u| and a pi phase shift on whichever
edge's factor went negative.  In "raw" mode r is updated directly and
projected into [delta, 1-delta] to keep later gradients finite.

Dataset losses depend on parameters only through the path probabilities
r^2 and 1 - r^2, so their gradients are polynomial in r (no divisions)
and every phase entry is exactly zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ansatz import ANSATZ_KINDS, InitScheme, build_ansatz, init_params
from .exact import (
    PARAM_MODES,
    GradientVector,
    exact_energy,
    exact_gradient,
    parameter_labels,
)
from .graph import ParamTriple, VddGraph
from .hamiltonian import ModelSpec, build_model, ground_energy
from .state import CapacityError

__all__ = [
    "ConfigError",
    "TrainingError",
    "AdamConfig",
    "SgdConfig",
    "AdamState",
    "TrainConfig",
    "TraceRecord",
    "TrainTrace",
    "LabeledDataset",
    "adam_step",
    "sgd_step",
    "bce_loss",
    "kl_loss",
    "train",
]

LOSSES = ("energy_gap", "energy", "bce", "kl")
GRADIENT_SOURCES = ("exact", "vmc")

_DELTA = 1e-9  # raw-mode projection margin for r
_EPS_PROB = 1e-12  # probability clamp in the dataset losses


class ConfigError(ValueError):
    """A training / run configuration that cannot be executed as given."""


class TrainingError(RuntimeError):
    """A training run hit a non-finite gradient or similar runtime failure."""


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not (self.lr > 0):
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("betas must lie in [0, 1)")
        if not (self.eps > 0):
            raise ConfigError("eps must be positive")


@dataclass(frozen=True)
class SgdConfig:
    lr: float = 0.01

    def __post_init__(self):
        if not (self.lr > 0):
            raise ConfigError(f"lr must be positive, got {self.lr}")


@dataclass
class AdamState:
    """First/second moment accumulators; step counts applied updates."""

    step: int
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(step=0, m=np.zeros(size), v=np.zeros(size))


def _check_finite(grads: np.ndarray, labels=None, epoch=None) -> None:
    bad = np.flatnonzero(~np.isfinite(np.asarray(grads)))
    if bad.size:
        names = [labels[i] for i in bad] if labels is not None else list(bad)
        where = f" at epoch {epoch}" if epoch is not None else ""
        raise TrainingError(f"non-finite gradient{where} for: {names}")


def adam_step(
    params: np.ndarray,
    grads: np.ndarray,
    state: AdamState,
    lr: float = 0.01,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; pure (inputs are not mutated)."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape:
        raise ValueError(f"shape mismatch: params {params.shape} vs grads {grads.shape}")
    _check_finite(grads)
    t = state.step + 1
    m = beta1 * state.m + (1 - beta1) * grads
    v = beta2 * state.v + (1 - beta2) * grads**2
    m_hat = m / (1 - beta1**t)
    v_hat = v / (1 - beta2**t)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + eps)
    return new_params, AdamState(step=t, m=m, v=v)


def sgd_step(params: np.ndarray, grads: np.ndarray, lr: float) -> np.ndarray:
    """Plain steepest-descent update theta <- theta - lr * grad."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape:
        raise ValueError(f"shape mismatch: params {params.shape} vs grads {grads.shape}")
    _check_finite(grads)
    return params - lr * grads


# ---------------------------------------------------------------------------
# flat parameter vector <-> graph


def _flatten(g: VddGraph, mode: str) -> np.ndarray:
    """(r|u, omega, phi) per node; trig mode stores u = arccos(r)."""
    out = np.empty(3 * len(g.nodes))
    for k, node_id in enumerate(g.sorted_ids()):
        p = g.nodes[node_id].params
        out[3 * k] = math.acos(min(1.0, max(0.0, p.r))) if mode == "trig" else p.r
        out[3 * k + 1] = p.omega
        out[3 * k + 2] = p.phi
    return out


def _materialize(g: VddGraph, theta: np.ndarray, mode: str) -> VddGraph:
    """Write a flat parameter vector back into a valid graph.

    trig: r = |cos u|; a negative cos u shifts omega by pi, a negative
    sin u shifts phi by pi, so the edge factors cos(u) e^{i omega} and
    sin(u) e^{i phi} are reproduced exactly.  raw: r projected into
    [delta, 1-delta].
    """
    nodes = {}
    for k, node_id in enumerate(g.sorted_ids()):
        mag, omega, phi = theta[3 * k], theta[3 * k + 1], theta[3 * k + 2]
        if mode == "trig":
            c, s = math.cos(mag), math.sin(mag)
            r = abs(c)
            if c < 0:
                omega += math.pi
            if s < 0:
                phi += math.pi
        else:
            r = min(1.0 - _DELTA, max(_DELTA, mag))
        nodes[node_id] = replace(g.nodes[node_id], params=ParamTriple(r, omega, phi))
    return replace(g, nodes=nodes)


# ---------------------------------------------------------------------------
# dataset losses


@dataclass(frozen=True)
class LabeledDataset:
    """Bit strings with optional 0/1 labels (labels required for BCE)."""

    items: tuple

    def __post_init__(self):
        norm = []
        for entry in self.items:
            bits, label = entry
            bits = tuple(int(x) for x in bits)
            if any(x not in (0, 1) for x in bits):
                raise ValueError(f"bits must be 0/1, got {bits}")
            if label is not None and label not in (0, 1):
                raise ValueError(f"labels must be 0, 1 or None, got {label!r}")
            norm.append((bits, label))
        if not norm:
            raise ValueError("dataset must contain at least one item")
        lengths = {len(bits) for bits, _ in norm}
        if len(lengths) != 1:
            raise ValueError(f"bit strings must share one length, got lengths {sorted(lengths)}")
        object.__setattr__(self, "items", tuple(norm))

    @property
    def num_qubits(self) -> int:
        return len(self.items[0][0])


def _born_prob_and_grad(g: VddGraph, bits, mode: str) -> tuple[float, np.ndarray]:
    """p(b) = |psi(b)|^2 and dp/dtheta (flat, phase entries exactly 0).

    p factorizes over the path into r^2 / (1-r^2) terms, so each node's
    magnitude derivative is prefix * d(factor) * suffix — polynomial in r,
    finite at the box boundary.
    """
    node_ids = g.sorted_ids()
    slot = {node_id: k for k, node_id in enumerate(node_ids)}
    factors = []
    derivs = []
    slots = []
    current = g.root_child
    for bit in bits:
        node = g.nodes[current]
        r = node.params.r
        if bit == 0:
            q, d_raw = r * r, 2.0 * r
            current = node.child0
        else:
            q, d_raw = 1.0 - r * r, -2.0 * r
            current = node.child1
        if mode == "trig":
            # chain rule through r = cos u: dq/du = dq/dr * (-sin u)
            d = -d_raw * math.sqrt(max(0.0, 1.0 - r * r))
        else:
            d = d_raw
        factors.append(q)
        derivs.append(d)
        slots.append(slot[node.id])
    n = len(factors)
    prefix = np.concatenate(([1.0], np.cumprod(factors)[:-1]))
    suffix = np.concatenate((np.cumprod(factors[::-1])[-2::-1], [1.0]))
    grad = np.zeros(3 * len(node_ids))
    for i in range(n):
        grad[3 * slots[i]] += prefix[i] * derivs[i] * suffix[i]
    return float(np.prod(factors)), grad


def _dataset_loss(g: VddGraph, data: LabeledDataset, mode: str, want_labels: bool):
    if mode not in PARAM_MODES:
        raise ValueError(f"unknown parameter mode {mode!r}, expected one of {PARAM_MODES}")
    if data.num_qubits != g.num_qubits:
        raise ValueError(
            f"dataset bit strings have {data.num_qubits} bits but the graph has {g.num_qubits}"
        )
    count = len(data.items)
    total = 0.0
    grad = np.zeros(3 * len(g.nodes))
    for bits, label in data.items:
        if want_labels and label is None:
            raise ValueError(f"BCE needs a 0/1 label for every item, none on {bits}")
        p, dp = _born_prob_and_grad(g, bits, mode)
        ph = min(max(p, _EPS_PROB), 1.0 - _EPS_PROB)
        if want_labels:
            total -= label * math.log(ph) + (1 - label) * math.log(1.0 - ph)
            grad -= (label / ph - (1 - label) / (1.0 - ph)) * dp
        else:
            total -= math.log(ph)
            grad -= dp / ph
    gv = GradientVector(
        entries=grad / count, labels=parameter_labels(g), node_ids=tuple(g.sorted_ids())
    )
    return total / count, gv


def bce_loss(g: VddGraph, data: LabeledDataset, mode: str = "raw"):
    """Binary cross-entropy of Born probabilities vs labels, with gradient."""
    return _dataset_loss(g, data, mode, want_labels=True)


def kl_loss(g: VddGraph, data: LabeledDataset, mode: str = "raw"):
    """Cross-entropy -(1/N) sum log p(b_i), with gradient."""
    return _dataset_loss(g, data, mode, want_labels=False)


# ---------------------------------------------------------------------------
# the training loop


@dataclass(frozen=True)
class TrainConfig:
    ansatz: str = "accordion"
    model: ModelSpec | None = None
    optimizer: AdamConfig | SgdConfig = field(default_factory=AdamConfig)
    epochs: int = 10000
    seed: int = 0
    gradient_source: str = "exact"
    batch_size: int | None = None
    param_mode: str = "trig"
    loss: str = "energy_gap"
    e0: float | None = None
    dataset: LabeledDataset | None = None
    init: InitScheme | None = None

    def __post_init__(self):
        if self.ansatz not in ANSATZ_KINDS:
            raise ConfigError(f"unknown ansatz {self.ansatz!r}, expected one of {ANSATZ_KINDS}")
        if self.loss not in LOSSES:
            raise ConfigError(f"unknown loss {self.loss!r}, expected one of {LOSSES}")
        if self.gradient_source not in GRADIENT_SOURCES:
            raise ConfigError(
                f"unknown gradient_source {self.gradient_source!r}, "
                f"expected one of {GRADIENT_SOURCES}"
            )
        if self.param_mode not in PARAM_MODES:
            raise ConfigError(
                f"unknown param_mode {self.param_mode!r}, expected one of {PARAM_MODES}"
            )
        if not isinstance(self.epochs, int) or isinstance(self.epochs, bool) or self.epochs < 1:
            raise ConfigError(f"epochs must be an integer >= 1, got {self.epochs!r}")
        if not isinstance(self.optimizer, (AdamConfig, SgdConfig)):
            raise ConfigError(f"optimizer must be AdamConfig or SgdConfig, got {self.optimizer!r}")
        if self.e0 is not None and not math.isfinite(self.e0):
            raise ConfigError(f"e0 must be finite, got {self.e0!r}")
        if self.gradient_source == "vmc":
            if self.batch_size is None or self.batch_size < 2:
                raise ConfigError(f"vmc needs batch_size >= 2, got {self.batch_size!r}")
        if self.loss in ("bce", "kl"):
            if self.dataset is None:
                raise ConfigError(f"loss {self.loss!r} needs a dataset")
            if self.model is not None:
                raise ConfigError(f"loss {self.loss!r} takes a dataset, not a model")
            if self.gradient_source != "exact":
                raise ConfigError(f"loss {self.loss!r} supports only the exact gradient source")
        else:
            if self.model is None:
                raise ConfigError(f"loss {self.loss!r} needs a model")

    @property
    def num_qubits(self) -> int:
        return self.model.n if self.model is not None else self.dataset.num_qubits


@dataclass
class TraceRecord:
    epoch: int
    loss: float
    energy: float
    relative_error: float | None
    grad_norm: float


@dataclass
class TrainTrace:
    records: list[TraceRecord]
    graph: VddGraph

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def column(self, name: str) -> list:
        return [getattr(rec, name) for rec in self.records]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "loss", "energy", "relative_error", "grad_norm"])
            for rec in self.records:
                writer.writerow(
                    [
                        rec.epoch,
                        repr(rec.loss),
                        "" if math.isnan(rec.energy) else repr(rec.energy),
                        "" if rec.relative_error is None else repr(rec.relative_error),
                        repr(rec.grad_norm),
                    ]
                )


def _resolve_e0(config: TrainConfig, h) -> float | None:
    if config.e0 is not None:
        return config.e0
    if config.loss != "energy_gap":
        return None
    try:
        e0, _ = ground_energy(h)
    except CapacityError as exc:
        raise ConfigError(
            f"energy_gap at n = {h.num_qubits} needs a user-supplied e0: {exc}"
        ) from None
    return e0


def train(config: TrainConfig) -> TrainTrace:
    """Run the configured descent and return the per-epoch trace.

    Initializes uniformly at `seed` (unless an explicit init scheme is
    given), then per epoch: evaluate loss + gradient, step, materialize.
    """
    from .vmc import sample_batch, vmc_gradient

    n = config.num_qubits
    scheme = config.init if config.init is not None else InitScheme("uniform", seed=config.seed)
    g = init_params(build_ansatz(config.ansatz, n), scheme)
    labels = parameter_labels(g)
    mode = config.param_mode

    h = e0 = None
    energy_driven = config.loss in ("energy_gap", "energy")
    if energy_driven:
        h = build_model(config.model)
        e0 = _resolve_e0(config, h)

    sample_rng = np.random.default_rng([config.seed, 1]) if config.gradient_source == "vmc" else None

    opt = config.optimizer
    adam_state = AdamState.zeros(3 * len(g.nodes)) if isinstance(opt, AdamConfig) else None

    records: list[TraceRecord] = []
    for epoch in range(1, config.epochs + 1):
        if energy_driven:
            if config.gradient_source == "exact":
                energy = exact_energy(g, h)
                gv = exact_gradient(g, h, mode=mode)
            else:
                batch = sample_batch(
                    g, h, config.batch_size, rng=sample_rng, mode=mode
                )
                energy = batch.energy_mean
                gv = vmc_gradient(batch)
            loss_val = energy - e0 if config.loss == "energy_gap" else energy
            rel = abs((energy - e0) / e0) if e0 not in (None, 0.0) else None
        else:
            loss_fn = bce_loss if config.loss == "bce" else kl_loss
            loss_val, gv = loss_fn(g, config.dataset, mode=mode)
            energy, rel = math.nan, None

        _check_finite(gv.entries, labels=labels, epoch=epoch)
        records.append(
            TraceRecord(
                epoch=epoch,
                loss=float(loss_val),
                energy=float(energy),
                relative_error=None if rel is None else float(rel),
                grad_norm=gv.norm,
            )
        )

        theta = _flatten(g, mode)
        if isinstance(opt, AdamConfig):
            theta, adam_state = adam_step(
                theta, gv.entries, adam_state, opt.lr, opt.beta1, opt.beta2, opt.eps
            )
        else:
            theta = sgd_step(theta, gv.entries, opt.lr)
        g = _materialize(g, theta, mode)

    return TrainTrace(records=records, graph=g)
