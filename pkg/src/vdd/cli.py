"""Command-line entry point.

Subcommands: build | validate | amplitude | statevector | eigen | sample |
train | variance-scan | g-sweep | emit-svg.

Every option has one source of truth: an explicit flag wins over a value
in the ``--config`` file (a JSON object of option names), which wins over
the documented default.  Commands that write files create them under
``--output-dir`` and echo the fully resolved options to
``resolved_config.json`` there; on failure, files created by the run are
removed.  Randomized commands draw a seed when none is given and record
it in the resolved config.

Exit codes: 0 success; 2 configuration problem (bad flag, unknown config
key, malformed input document, over-capacity request); 1 runtime failure.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .ansatz import ANSATZ_KINDS, build_ansatz, init_params, parse_init_scheme
from .exact import PARAM_MODES, exact_energy, to_state_vector
from .experiments import VarianceScanConfig, g_sweep, variance_scan
from .graph import ParseError, amplitude, deserialize, serialize, validate
from .hamiltonian import BOUNDARIES, MODELS, ModelSpec, build_model, ground_energy
from .optimize import (
    LOSSES,
    AdamConfig,
    ConfigError,
    LabeledDataset,
    SgdConfig,
    TrainConfig,
    train,
)
from .state import CapacityError
from .vmc import batch_to_csv, sample, sample_batch

__all__ = ["run", "main", "emit_svg"]


# ---------------------------------------------------------------------------
# option plumbing: flag > config file > default


@dataclass(frozen=True)
class Opt:
    name: str  # underscore form; the flag is --with-dashes
    kind: str  # int | float | str | bool | ints | floats
    default: object = None
    help: str = ""
    required: bool = False
    choices: tuple | None = None


_COMMON = (
    Opt("config", "str", None, "JSON file of option values (flags override it)"),
    Opt("output_dir", "str", ".", "directory for produced files"),
    Opt("threads", "int", 1, "upper bound on engine parallelism (engines run single-threaded)"),
)

_MODEL_OPTS = (
    Opt("model", "str", None, "hamiltonian family", choices=MODELS),
    Opt("n", "int", None, "number of qubits"),
    Opt("g", "float", 0.0, "transverse-field strength (tfim)"),
    Opt("jx", "float", 1.0, "XX coupling (heisenberg)"),
    Opt("jy", "float", 1.0, "YY coupling (heisenberg)"),
    Opt("jz", "float", 1.0, "ZZ coupling (heisenberg)"),
    Opt("boundary", "str", "open", "chain boundary", choices=BOUNDARIES),
)

_OPTIONS: dict[str, tuple[Opt, ...]] = {
    "build": _COMMON + (
        Opt("ansatz", "str", "accordion", "graph layout", choices=ANSATZ_KINDS),
        Opt("n", "int", None, "number of qubits", required=True),
        Opt("init", "str", "balanced", 'parameter init: "uniform", "balanced" or "basis:<bits>"'),
        Opt("seed", "int", None, "seed for uniform init (generated and recorded if omitted)"),
        Opt("out", "str", "vdd.json", "output file name under output-dir"),
    ),
    "validate": _COMMON + (
        Opt("vdd", "str", None, "graph document to check", required=True),
    ),
    "amplitude": _COMMON + (
        Opt("vdd", "str", None, "graph document", required=True),
        Opt("bits", "str", None, "bit string, qubit 1 first (e.g. 001)", required=True),
    ),
    "statevector": _COMMON + (
        Opt("vdd", "str", None, "graph document", required=True),
        Opt("out", "str", "statevector.csv", "output file name under output-dir"),
    ),
    "eigen": _COMMON + _MODEL_OPTS,
    "sample": _COMMON + (
        Opt("vdd", "str", None, "graph document", required=True),
        Opt("count", "int", 1000, "number of samples"),
        Opt("seed", "int", None, "sampling seed (generated and recorded if omitted)"),
        Opt("out", "str", "samples.csv", "output file name under output-dir"),
    ) + _MODEL_OPTS[:1] + _MODEL_OPTS[2:],  # optional model adds local values
    "train": _COMMON + _MODEL_OPTS + (
        Opt("ansatz", "str", "accordion", "graph layout", choices=ANSATZ_KINDS),
        Opt("optimizer", "str", "adam", "update rule", choices=("adam", "sgd")),
        Opt("lr", "float", 0.01, "learning rate"),
        Opt("beta1", "float", 0.9, "adam first-moment decay"),
        Opt("beta2", "float", 0.999, "adam second-moment decay"),
        Opt("eps", "float", 1e-8, "adam denominator floor"),
        Opt("epochs", "int", 10000, "gradient steps"),
        Opt("seed", "int", None, "init/sampling seed (generated and recorded if omitted)"),
        Opt("param_mode", "str", "trig", "magnitude parameterization", choices=PARAM_MODES),
        Opt("gradient_source", "str", "exact", "gradient engine", choices=("exact", "vmc")),
        Opt("batch_size", "int", None, "samples per epoch (vmc)"),
        Opt("loss", "str", "energy_gap", "objective", choices=LOSSES),
        Opt("e0", "float", None, "reference ground energy (skips the dense eigensolve)"),
        Opt("dataset", "str", None, "JSON dataset file for bce/kl losses"),
        Opt("init", "str", None, 'parameter init override (default "uniform" at --seed)'),
    ),
    "variance-scan": _COMMON + (
        Opt("model", "str", None, "hamiltonian family", required=True, choices=MODELS),
        Opt("g", "float", 0.0, "transverse-field strength (tfim)"),
        Opt("jx", "float", 1.0, "XX coupling (heisenberg)"),
        Opt("jy", "float", 1.0, "YY coupling (heisenberg)"),
        Opt("jz", "float", 1.0, "ZZ coupling (heisenberg)"),
        Opt("boundary", "str", "open", "chain boundary", choices=BOUNDARIES),
        Opt("n_values", "ints", tuple(range(2, 13)), "comma-separated system sizes"),
        Opt("tracked", "strs", ("r1", "omega3", "phi-1"), "comma-separated parameter labels"),
        Opt("num_seeds", "int", 100, "random initializations per grid cell"),
        Opt("base_seed", "int", None, "scan seed (generated and recorded if omitted)"),
        Opt("param_mode", "str", "raw", "magnitude parameterization", choices=PARAM_MODES),
        Opt("ansatz", "str", "accordion", "graph layout", choices=ANSATZ_KINDS),
    ),
    "g-sweep": _COMMON + (
        Opt("g_values", "floats", (10.0, 20.0, 40.0), "comma-separated field strengths"),
        Opt("n", "int", 8, "number of qubits"),
        Opt("epochs", "int", 10000, "gradient steps per field value"),
        Opt("lr", "float", 0.01, "learning rate"),
        Opt("seed", "int", None, "training seed (generated and recorded if omitted)"),
        Opt("ansatz", "str", "accordion", "graph layout", choices=ANSATZ_KINDS),
        Opt("param_mode", "str", "trig", "magnitude parameterization", choices=PARAM_MODES),
    ),
    "emit-svg": _COMMON + (
        Opt("csv", "str", None, "input table", required=True),
        Opt("x", "str", None, "x column name", required=True),
        Opt("y", "str", None, "y column name", required=True),
        Opt("log_y", "bool", False, "plot log10 of y (nonpositive points dropped)"),
        Opt("out", "str", "chart.svg", "output file name under output-dir"),
    ),
}

_RANDOMIZED_SEED_KEY = {
    "build": "seed",
    "sample": "seed",
    "train": "seed",
    "variance-scan": "base_seed",
    "g-sweep": "seed",
}


def _parse_list(kind: str, text: str):
    items = [part.strip() for part in text.split(",") if part.strip()]
    if kind == "ints":
        return tuple(int(x) for x in items)
    if kind == "floats":
        return tuple(float(x) for x in items)
    return tuple(items)


def _add_options(parser: argparse.ArgumentParser, opts: tuple[Opt, ...]) -> None:
    for opt in opts:
        flag = "--" + opt.name.replace("_", "-")
        if opt.kind == "bool":
            parser.add_argument(flag, dest=opt.name, action="store_const", const=True,
                                default=None, help=opt.help)
        elif opt.kind in ("ints", "floats", "strs"):
            parser.add_argument(flag, dest=opt.name, type=str, default=None,
                                help=opt.help + " (comma-separated)")
        else:
            typ = {"int": int, "float": float, "str": str}[opt.kind]
            parser.add_argument(flag, dest=opt.name, type=typ, default=None,
                                choices=opt.choices, help=opt.help)


def _coerce_config_value(opt: Opt, value):
    try:
        if opt.kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError
            return value
        if opt.kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError
            return float(value)
        if opt.kind == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if opt.kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(value, str):
            return _parse_list(opt.kind, value)
        items = tuple(value)
        if opt.kind == "ints":
            return tuple(int(x) for x in items)
        if opt.kind == "floats":
            return tuple(float(x) for x in items)
        return tuple(str(x) for x in items)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for config key {opt.name!r}: {value!r}") from None


def _resolve(command: str, args: argparse.Namespace) -> dict:
    """Merge flags, config file and defaults into one options dict."""
    opts = _OPTIONS[command]
    by_name = {o.name: o for o in opts}
    file_values: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config file: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in doc.items():
            if key == "config" or key not in by_name:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            file_values[key] = _coerce_config_value(by_name[key], value)

    resolved = {}
    for opt in opts:
        flag_value = getattr(args, opt.name)
        if flag_value is not None and opt.kind in ("ints", "floats", "strs"):
            flag_value = _parse_list(opt.kind, flag_value)
        if flag_value is not None:
            resolved[opt.name] = flag_value
        elif opt.name in file_values:
            resolved[opt.name] = file_values[opt.name]
        else:
            resolved[opt.name] = opt.default
    resolved.pop("config", None)

    if resolved.get("threads") is not None and resolved["threads"] < 1:
        raise ConfigError(f"threads must be >= 1, got {resolved['threads']}")
    seed_key = _RANDOMIZED_SEED_KEY.get(command)
    if seed_key and resolved.get(seed_key) is None:
        resolved[seed_key] = int.from_bytes(os.urandom(4), "big")
        print(f"{seed_key} {resolved[seed_key]} (generated)", file=sys.stderr)
    for opt in opts:
        if opt.required and resolved.get(opt.name) is None:
            raise ConfigError(f"missing required option {opt.name!r}")
    return resolved


class _Outputs:
    """Files created by this run; discarded together if the run fails."""

    def __init__(self, output_dir: str):
        self.dir = output_dir
        self.created: list[str] = []
        os.makedirs(output_dir, exist_ok=True)

    def path(self, name: str) -> str:
        full = os.path.join(self.dir, name)
        self.created.append(full)
        return full

    def discard(self) -> None:
        for full in self.created:
            try:
                os.unlink(full)
            except OSError:
                pass


def _write_resolved(outputs: _Outputs, command: str, cfg: dict) -> None:
    doc = {"command": command}
    doc.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(cfg.items())})
    with open(outputs.path("resolved_config.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _read_graph(path: str):
    try:
        with open(path) as fh:
            return deserialize(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read vdd file: {exc}") from None


def _parse_bit_text(text: str) -> tuple[int, ...]:
    if not text or set(text) - {"0", "1"}:
        raise ConfigError(f"bits must be a nonempty 0/1 string, got {text!r}")
    return tuple(int(c) for c in text)


def _model_spec(cfg: dict, n: int | None = None) -> ModelSpec:
    if cfg.get("model") is None:
        raise ConfigError("missing required option 'model'")
    if n is None:
        n = cfg.get("n")
    if n is None:
        raise ConfigError("missing required option 'n'")
    try:
        return ModelSpec(
            cfg["model"], n, g=cfg["g"],
            jx=cfg["jx"], jy=cfg["jy"], jz=cfg["jz"], boundary=cfg["boundary"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommands


def _cmd_build(cfg: dict, outputs: _Outputs) -> None:
    scheme = parse_init_scheme(cfg["init"], seed=cfg["seed"])
    g = init_params(build_ansatz(cfg["ansatz"], cfg["n"]), scheme)
    path = outputs.path(cfg["out"])
    with open(path, "w") as fh:
        fh.write(serialize(g))
    print(path)


def _cmd_validate(cfg: dict) -> int:
    try:
        with open(cfg["vdd"]) as fh:
            g = deserialize(fh.read(), validate_graph=False)
    except OSError as exc:
        raise ConfigError(f"cannot read vdd file: {exc}") from None
    problems = validate(g)
    if not problems:
        print("valid")
        return 0
    for problem in problems:
        print(problem)
    return 1


def _cmd_amplitude(cfg: dict) -> None:
    g = _read_graph(cfg["vdd"])
    bits = _parse_bit_text(cfg["bits"])
    if len(bits) != g.num_qubits:
        raise ConfigError(f"bits has length {len(bits)} but the graph has {g.num_qubits} qubits")
    a = amplitude(g, bits)
    print(f"modulus {abs(a)!r}")
    print(f"phase {cmath.phase(a)!r}")


def _cmd_statevector(cfg: dict, outputs: _Outputs) -> None:
    g = _read_graph(cfg["vdd"])
    sv = to_state_vector(g)
    path = outputs.path(cfg["out"])
    n = g.num_qubits
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "bitstring", "amplitude_re", "amplitude_im"])
        for idx, amp in enumerate(sv.amps):
            writer.writerow([idx, format(idx, f"0{n}b"), repr(float(amp.real)), repr(float(amp.imag))])
    print(path)


def _cmd_eigen(cfg: dict) -> None:
    e0, _ = ground_energy(build_model(_model_spec(cfg)))
    print(repr(e0))


def _cmd_sample(cfg: dict, outputs: _Outputs) -> None:
    g = _read_graph(cfg["vdd"])
    if cfg["count"] < 1:
        raise ConfigError(f"count must be >= 1, got {cfg['count']}")
    path = outputs.path(cfg["out"])
    if cfg.get("model") is not None:
        spec = _model_spec(cfg, n=g.num_qubits)
        batch = sample_batch(g, build_model(spec), cfg["count"], seed=cfg["seed"])
        batch_to_csv(batch, path)
    else:
        bits = sample(g, cfg["count"], seed=cfg["seed"])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_index", "bitstring", "local_value_re", "local_value_im"])
            for i, row in enumerate(bits):
                writer.writerow([i, "".join(str(int(x)) for x in row), "", ""])
    print(path)


def _load_dataset(path: str) -> LabeledDataset:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read dataset file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed dataset file: {exc}") from None
    if not isinstance(doc, dict) or set(doc) != {"items"} or not isinstance(doc["items"], list):
        raise ConfigError('dataset file must be {"items": [...]}')
    items = []
    for entry in doc["items"]:
        if not isinstance(entry, dict) or not set(entry) <= {"bits", "label"}:
            raise ConfigError(f"dataset items must have keys bits/label, got {entry!r}")
        if "bits" not in entry or not isinstance(entry["bits"], str):
            raise ConfigError(f"dataset item needs a bits string, got {entry!r}")
        label = entry.get("label")
        if label is not None and (isinstance(label, bool) or label not in (0, 1)):
            raise ConfigError(f"dataset labels must be 0, 1 or null, got {label!r}")
        items.append((_parse_bit_text(entry["bits"]), label))
    try:
        return LabeledDataset(tuple(items))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_train(cfg: dict, outputs: _Outputs) -> None:
    if cfg["optimizer"] == "adam":
        opt = AdamConfig(lr=cfg["lr"], beta1=cfg["beta1"], beta2=cfg["beta2"], eps=cfg["eps"])
    else:
        opt = SgdConfig(lr=cfg["lr"])
    dataset = _load_dataset(cfg["dataset"]) if cfg.get("dataset") else None
    model = None
    if cfg["loss"] in ("energy_gap", "energy"):
        model = _model_spec(cfg)
    init = parse_init_scheme(cfg["init"], seed=cfg["seed"]) if cfg.get("init") else None
    config = TrainConfig(
        ansatz=cfg["ansatz"],
        model=model,
        optimizer=opt,
        epochs=cfg["epochs"],
        seed=cfg["seed"],
        gradient_source=cfg["gradient_source"],
        batch_size=cfg["batch_size"],
        param_mode=cfg["param_mode"],
        loss=cfg["loss"],
        e0=cfg["e0"],
        dataset=dataset,
        init=init,
    )
    trace = train(config)
    trace.to_csv(outputs.path("trace.csv"))
    with open(outputs.path("final_vdd.json"), "w") as fh:
        fh.write(serialize(trace.graph))
    final = trace.final
    rel = "" if final.relative_error is None else f" relative_error {final.relative_error!r}"
    print(f"epoch {final.epoch} loss {final.loss!r}{rel}")


def _cmd_variance_scan(cfg: dict, outputs: _Outputs) -> None:
    scan_cfg = VarianceScanConfig(
        model=cfg["model"],
        n_values=cfg["n_values"],
        tracked_params=cfg["tracked"],
        num_seeds=cfg["num_seeds"],
        base_seed=cfg["base_seed"],
        g=cfg["g"], jx=cfg["jx"], jy=cfg["jy"], jz=cfg["jz"],
        boundary=cfg["boundary"],
        ansatz=cfg["ansatz"],
        param_mode=cfg["param_mode"],
    )
    result = variance_scan(scan_cfg)
    result.rows_to_csv(outputs.path("variance_scan.csv"))
    result.fits_to_csv(outputs.path("variance_fits.csv"))
    for note in result.notices:
        print(note, file=sys.stderr)
    print(os.path.join(outputs.dir, "variance_scan.csv"))


def _cmd_g_sweep(cfg: dict, outputs: _Outputs) -> None:
    result = g_sweep(
        cfg["g_values"],
        n=cfg["n"],
        epochs=cfg["epochs"],
        seed=cfg["seed"],
        lr=cfg["lr"],
        ansatz=cfg["ansatz"],
        param_mode=cfg["param_mode"],
    )
    result.to_csv(outputs.path("g_sweep.csv"))
    result.benchmark_to_csv(outputs.path("dimer_benchmark.csv"))
    for row in result.rows:
        print(f"g {row.g!r} relative_error {row.relative_error!r}")


# ---------------------------------------------------------------------------
# SVG emission


def emit_svg(csv_path: str, x_column: str, y_column: str, log_y: bool = False) -> str:
    """Single-series SVG line chart from two numeric CSV columns.

    Deterministic for fixed input; nonpositive y points are dropped in
    log mode.  Missing columns, empty tables and non-numeric cells raise
    ConfigError.
    """
    try:
        with open(csv_path, newline="") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            for col in (x_column, y_column):
                if col not in fields:
                    raise ConfigError(f"missing column {col!r} in {csv_path}")
            xs, ys = [], []
            for row in reader:
                try:
                    x = float(row[x_column])
                    y = float(row[y_column])
                except (TypeError, ValueError):
                    raise ConfigError(
                        f"non-numeric value {row[x_column]!r}/{row[y_column]!r} "
                        f"in columns {x_column!r}/{y_column!r}"
                    ) from None
                xs.append(x)
                ys.append(y)
    except OSError as exc:
        raise ConfigError(f"cannot read csv file: {exc}") from None
    if not xs:
        raise ConfigError(f"no data rows in {csv_path}")
    if log_y:
        pairs = [(x, math.log10(y)) for x, y in zip(xs, ys) if y > 0 and math.isfinite(y)]
        if not pairs:
            raise ConfigError(f"no positive values in column {y_column!r} for log scale")
        xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]

    width, height = 640.0, 480.0
    left, right, top, bottom = 70.0, 20.0, 20.0, 50.0
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    span_x = width - left - right
    span_y = height - top - bottom

    def sx(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * span_x

    def sy(y: float) -> float:
        return height - bottom - (y - y_lo) / (y_hi - y_lo) * span_y

    points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    y_name = f"log10({y_column})" if log_y else y_column
    fmt = lambda v: f"{v:.6g}"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" '
        'stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{points}"/>',
        f'<text x="{left}" y="{height - bottom + 18}" font-size="12" text-anchor="middle">'
        f"{fmt(x_lo)}</text>",
        f'<text x="{width - right}" y="{height - bottom + 18}" font-size="12" '
        f'text-anchor="middle">{fmt(x_hi)}</text>',
        f'<text x="{left - 6}" y="{height - bottom}" font-size="12" text-anchor="end">'
        f"{fmt(y_lo)}</text>",
        f'<text x="{left - 6}" y="{top + 10}" font-size="12" text-anchor="end">{fmt(y_hi)}</text>',
        f'<text x="{(left + width - right) / 2:.1f}" y="{height - 12}" font-size="14" '
        f'text-anchor="middle">{x_column}</text>',
        f'<text x="16" y="{(top + height - bottom) / 2:.1f}" font-size="14" '
        f'text-anchor="middle" transform="rotate(-90 16 {(top + height - bottom) / 2:.1f})">'
        f"{y_name}</text>",
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def _cmd_emit_svg(cfg: dict, outputs: _Outputs) -> None:
    svg = emit_svg(cfg["csv"], cfg["x"], cfg["y"], log_y=bool(cfg["log_y"]))
    path = outputs.path(cfg["out"])
    with open(path, "w") as fh:
        fh.write(svg)
    print(path)


# ---------------------------------------------------------------------------
# dispatch


_WRITING_COMMANDS = {
    "build", "statevector", "sample", "train", "variance-scan", "g-sweep", "emit-svg",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vdd",
        description="Variational decision-diagram toolkit: build and inspect "
        "diagrams, diagonalize small chains, sample, train, and reproduce "
        "the gradient-variance and field-sweep experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in _OPTIONS.items():
        p = sub.add_parser(command)
        _add_options(p, opts)
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    outputs = None
    try:
        cfg = _resolve(args.command, args)
        if args.command in _WRITING_COMMANDS:
            outputs = _Outputs(cfg["output_dir"])
            _write_resolved(outputs, args.command, cfg)
        if args.command == "build":
            _cmd_build(cfg, outputs)
        elif args.command == "validate":
            return _cmd_validate(cfg)
        elif args.command == "amplitude":
            _cmd_amplitude(cfg)
        elif args.command == "statevector":
            _cmd_statevector(cfg, outputs)
        elif args.command == "eigen":
            _cmd_eigen(cfg)
        elif args.command == "sample":
            _cmd_sample(cfg, outputs)
        elif args.command == "train":
            _cmd_train(cfg, outputs)
        elif args.command == "variance-scan":
            _cmd_variance_scan(cfg, outputs)
        elif args.command == "g-sweep":
            _cmd_g_sweep(cfg, outputs)
        elif args.command == "emit-svg":
            _cmd_emit_svg(cfg, outputs)
        return 0
    except (ConfigError, ParseError, CapacityError) as exc:
        if outputs is not None:
            outputs.discard()
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 — CLI boundary
        if outputs is not None:
            outputs.discard()
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
