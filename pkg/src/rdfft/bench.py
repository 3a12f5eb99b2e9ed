"""Benchmark and verification harness for the in-place kernels.

Times each (op, size, precision) cell over batched repetitions, checks the
result against the float64 oracle on the same seeded input, and audits
buffer acquisitions of one post-warmup call.

    rdfft-bench --op fft --sizes 512,1024,4096 --precision f32 --verify --strict

Exit status: 0 ok, 1 configuration error, 2 threshold violation (``--strict``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import circulant, oracle
from ._validate import PRECISIONS, is_power_of_two
from .audit import AllocationAudit
from .core import forward_in_place, inverse_in_place, plan_create
from .errors import ConfigError, ThresholdViolation
from .packed import pack, unpack

__all__ = [
    "BenchConfig",
    "BenchCell",
    "BenchReport",
    "OPS",
    "THRESHOLDS",
    "REPORT_SCHEMA",
    "make_inputs",
    "run_bench",
    "emit_report",
    "main",
]

OP_NAMES = ("fft", "ifft", "roundtrip", "circulant-fwd", "circulant-bwd")
FORMATS = ("human", "json", "csv")
SEED_ENV = "RDFFT_BENCH_SEED"
_BATCH = 64

# (max abs error, max rel error) per (op, precision); None = not gated
THRESHOLDS: dict[tuple[str, str], tuple[float | None, float | None]] = {
    ("fft", "f32"): (5e-6, 5e-3),
    ("fft", "f64"): (1e-12, None),
    ("ifft", "f32"): (1e-5, None),
    ("ifft", "f64"): (1e-11, None),
    ("roundtrip", "f32"): (1e-5, 1e-5),
    ("roundtrip", "f64"): (1e-11, None),
    ("circulant-fwd", "f32"): (1e-4, None),
    ("circulant-fwd", "f64"): (1e-10, None),
    ("circulant-bwd", "f32"): (None, 1e-3),
    ("circulant-bwd", "f64"): (None, 1e-7),
}

_NUM_OR_NULL = {"type": ["number", "null"]}
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "rdfft bench report",
    "type": "array",
    "items": {
        "type": "object",
        "required": [
            "op", "n", "precision", "mean_ns", "abs_err", "rel_err", "alloc_count", "scratch_bytes",
        ],
        "properties": {
            "op": {"enum": list(OP_NAMES)},
            "n": {"type": "integer", "minimum": 2},
            "precision": {"enum": list(PRECISIONS)},
            "mean_ns": {"type": "number", "minimum": 0},
            "median_ns": {"type": "number", "minimum": 0},
            "min_ns": {"type": "number", "minimum": 0},
            "abs_err": _NUM_OR_NULL,
            "mean_abs_err": _NUM_OR_NULL,
            "rel_err": _NUM_OR_NULL,
            "alloc_count": {"type": "integer", "minimum": 0},
            "scratch_bytes": {"type": "integer", "minimum": 0},
            "violations": {"type": "array", "items": {"type": "string"}},
            "ok": {"type": "boolean"},
        },
    },
}


@dataclass
class BenchConfig:
    op: str = "fft"
    sizes: Sequence[int] = (512, 1024, 4096)
    precision: Sequence[str] = ("f32",)
    reps: int = 1000
    warmup: int = 10
    seed: int = 0
    output: str = "human"
    verify: bool = False

    def __post_init__(self):
        if isinstance(self.precision, str):
            self.precision = (self.precision,)
        self.sizes = tuple(self.sizes)
        self.precision = tuple(self.precision)
        if self.op not in OP_NAMES:
            raise ConfigError(f"unknown op {self.op!r}; choose from {', '.join(OP_NAMES)}")
        if not self.sizes:
            raise ConfigError("at least one size is required")
        for n in self.sizes:
            if isinstance(n, bool) or not isinstance(n, int) or n < 2 or not is_power_of_two(n):
                raise ConfigError(f"size {n!r} is not a power of two >= 2")
        for prec in self.precision:
            if prec not in PRECISIONS:
                raise ConfigError(f"unknown precision {prec!r}; use f32 or f64")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.warmup < 0:
            raise ConfigError("warmup must be >= 0")
        if self.output not in FORMATS:
            raise ConfigError(f"unknown format {self.output!r}")


@dataclass
class BenchCell:
    op: str
    n: int
    precision: str
    mean_ns: float
    median_ns: float
    min_ns: float
    abs_err: float | None
    mean_abs_err: float | None
    rel_err: float | None
    alloc_count: int
    scratch_bytes: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


@dataclass
class BenchReport:
    cells: list[BenchCell] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells)

    def raise_for_violations(self) -> None:
        bad = [f"{c.op}/{c.precision}/n={c.n}: {v}" for c in self.cells for v in c.violations]
        if bad:
            raise ThresholdViolation("; ".join(bad))


# -- ops --


def make_inputs(seed: int, op: str, n: int, precision: str) -> dict[str, np.ndarray]:
    """Seeded float64 inputs for one cell; the same arrays feed timing and verification."""
    bits = 32 if precision == "f32" else 64
    rng = np.random.default_rng([seed, n, bits, OP_NAMES.index(op)])
    inputs = {"x": rng.standard_normal(n)}
    if op.startswith("circulant"):
        inputs["c"] = rng.standard_normal(n) / math.sqrt(n)
        inputs["g"] = rng.standard_normal(n)
    return inputs


def _errors(out: np.ndarray, ref: np.ndarray) -> tuple[float, float, float]:
    err = np.abs(np.asarray(out, dtype=np.complex128) - ref)
    peak = float(np.max(np.abs(ref)))
    abs_err = float(err.max())
    return abs_err, float(err.mean()), abs_err / peak if peak > 0 else abs_err


class _Case:
    """One cell's buffers. ``reset`` is untimed; ``step(i)`` is the timed call on row ``i``."""

    def __init__(self, inputs: dict[str, np.ndarray], n: int, dtype: np.dtype):
        self.inputs = inputs
        self.n = n
        self.dtype = dtype
        self.x = inputs["x"].astype(dtype)
        self.work = np.empty((_BATCH, n), dtype=dtype)
        self.rows = list(self.work)

    def source(self) -> np.ndarray:
        return self.x

    def reset(self) -> None:
        self.work[...] = self.source()

    def step(self, i: int) -> None:
        raise NotImplementedError

    def verify(self) -> tuple[float, float, float]:
        raise NotImplementedError


class _FFT(_Case):
    def __init__(self, inputs, n, dtype):
        super().__init__(inputs, n, dtype)
        self.plan = plan_create(n, dtype)

    def step(self, i):
        forward_in_place(self.plan, self.rows[i])

    def verify(self):
        buf = self.x.copy()
        forward_in_place(self.plan, buf)
        return _errors(unpack(buf), oracle.naive_dft(self.x))


class _IFFT(_FFT):
    def __init__(self, inputs, n, dtype):
        super().__init__(inputs, n, dtype)
        self.spectrum = pack(oracle.naive_dft(inputs["x"])).astype(dtype)

    def source(self):
        return self.spectrum

    def step(self, i):
        inverse_in_place(self.plan, self.rows[i])

    def verify(self):
        buf = self.spectrum.copy()
        inverse_in_place(self.plan, buf)
        return _errors(buf, oracle.naive_idft(unpack(self.spectrum)))


class _Roundtrip(_FFT):
    def step(self, i):
        forward_in_place(self.plan, self.rows[i])
        inverse_in_place(self.plan, self.rows[i])

    def verify(self):
        buf = self.x.copy()
        forward_in_place(self.plan, buf)
        inverse_in_place(self.plan, buf)
        return _errors(buf, self.x.astype(np.float64))


class _CirculantForward(_Case):
    def __init__(self, inputs, n, dtype):
        super().__init__(inputs, n, dtype)
        self.c = inputs["c"].astype(dtype)
        self.layer = circulant.layer_create(n, 1, 1, self.c, dtype)
        self.y = np.empty(n, dtype=dtype)
        self.cache = np.empty(n, dtype=dtype)

    def step(self, i):
        circulant.forward(self.layer, self.rows[i], self.y, self.cache)

    def verify(self):
        y = np.empty(self.n, dtype=self.dtype)
        circulant.forward(self.layer, self.x.copy(), y)
        return _errors(y, oracle.naive_circulant_matvec(self.c, self.x))


class _CirculantBackward(_CirculantForward):
    def __init__(self, inputs, n, dtype):
        super().__init__(inputs, n, dtype)
        self.g = inputs["g"].astype(dtype)
        self.x_spec = self.x.copy()
        circulant.forward(self.layer, self.x_spec, self.y)
        self.grads = circulant.GradientSet.zeros(self.layer)

    def source(self):
        return self.g

    def step(self, i):
        circulant.backward(self.layer, self.x_spec, self.rows[i], self.grads)

    def verify(self):
        grads = circulant.GradientSet.zeros(self.layer)
        circulant.backward(self.layer, self.x_spec, self.g.copy(), grads)
        gx, gc = oracle.dense_circulant_grads(self.c, self.x, self.g)
        out = np.concatenate([grads.grad_input, grads.grad_weights.ravel()])
        return _errors(out, np.concatenate([gx, gc.ravel()]))


OPS: dict[str, Callable[..., _Case]] = {
    "fft": _FFT,
    "ifft": _IFFT,
    "roundtrip": _Roundtrip,
    "circulant-fwd": _CirculantForward,
    "circulant-bwd": _CirculantBackward,
}


# -- running --


def _time(case: _Case, reps: int) -> list[float]:
    per_call = []
    done = 0
    while done < reps:
        batch = min(_BATCH, reps - done)
        case.reset()
        t0 = time.perf_counter_ns()
        for i in range(batch):
            case.step(i)
        per_call.append((time.perf_counter_ns() - t0) / batch)
        done += batch
    return per_call


def _run_cell(config: BenchConfig, n: int, precision: str) -> BenchCell:
    dtype = PRECISIONS[precision]
    case = OPS[config.op](make_inputs(config.seed, config.op, n, precision), n, dtype)

    case.reset()
    for i in range(config.warmup):
        case.step(i % _BATCH)
        if i % _BATCH == _BATCH - 1:
            case.reset()

    case.reset()
    with AllocationAudit() as audit:
        case.step(0)

    timings = _time(case, config.reps)
    abs_err = mean_abs = rel_err = None
    if config.verify:
        abs_err, mean_abs, rel_err = case.verify()

    cell = BenchCell(
        op=config.op,
        n=n,
        precision=precision,
        mean_ns=statistics.fmean(timings),
        median_ns=statistics.median(timings),
        min_ns=min(timings),
        abs_err=abs_err,
        mean_abs_err=mean_abs,
        rel_err=rel_err,
        alloc_count=audit.alloc_count,
        scratch_bytes=audit.scratch_bytes,
    )
    if cell.alloc_count:
        cell.violations.append(f"alloc_count {cell.alloc_count} > 0")
    if cell.scratch_bytes:
        cell.violations.append(f"scratch_bytes {cell.scratch_bytes} > 0")
    if config.verify:
        abs_tol, rel_tol = THRESHOLDS[(config.op, precision)]
        if abs_tol is not None and not abs_err <= abs_tol:
            cell.violations.append(f"abs_err {abs_err:.3e} > {abs_tol:.1e}")
        if rel_tol is not None and not rel_err <= rel_tol:
            cell.violations.append(f"rel_err {rel_err:.3e} > {rel_tol:.1e}")
    return cell


def _scaling_warnings(cells: list[BenchCell]) -> list[str]:
    warnings = []
    for prec in {c.precision for c in cells}:
        pts = [c for c in cells if c.op == "fft" and c.precision == prec and 256 <= c.n <= 4096]
        if len(pts) < 2:
            continue
        ratios = [c.median_ns / (c.n * math.log2(c.n)) for c in pts]
        if max(ratios) > 4 * min(ratios):
            warnings.append(
                f"fft/{prec}: per n*log2(n) time varies {max(ratios) / min(ratios):.1f}x across sizes"
            )
    return warnings


def run_bench(config: BenchConfig) -> BenchReport:
    """Run every (size, precision) cell of ``config``; timings aside, deterministic in ``seed``."""
    report = BenchReport()
    for precision in config.precision:
        for n in config.sizes:
            report.cells.append(_run_cell(config, n, precision))
    report.warnings = _scaling_warnings(report.cells)
    return report


# -- output --


_CSV_FIELDS = [
    "op", "n", "precision", "mean_ns", "median_ns", "min_ns", "abs_err", "mean_abs_err",
    "rel_err", "alloc_count", "scratch_bytes", "ok", "violations",
]


def _fmt(v) -> str:
    return "-" if v is None else f"{v:.3e}"


def emit_report(report: BenchReport, fmt: str = "human") -> str:
    """Serialize ``report`` as ``human`` text, a ``json`` array or ``csv`` rows."""
    if fmt == "json":
        return json.dumps([c.as_dict() for c in report.cells], indent=2)
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=_CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for c in report.cells:
            row = c.as_dict()
            row["violations"] = ";".join(c.violations)
            writer.writerow(row)
        return out.getvalue()
    if fmt != "human":
        raise ConfigError(f"unknown format {fmt!r}")
    lines = [
        f"{'op':<14}{'n':>7} {'prec':<5}{'mean us':>10}{'median us':>11}"
        f"{'max abs':>11}{'mean abs':>11}{'rel':>11}{'allocs':>8}  status"
    ]
    for c in report.cells:
        status = "ok" if c.ok else "FAIL: " + "; ".join(c.violations)
        lines.append(
            f"{c.op:<14}{c.n:>7} {c.precision:<5}{c.mean_ns / 1e3:>10.2f}{c.median_ns / 1e3:>11.2f}"
            f"{_fmt(c.abs_err):>11}{_fmt(c.mean_abs_err):>11}{_fmt(c.rel_err):>11}"
            f"{c.alloc_count:>8}  {status}"
        )
    lines.extend(f"warning: {w}" for w in report.warnings)
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rdfft-bench", description="Time and verify the in-place real FFT kernels.")
    p.add_argument("--op", default="fft", help=f"one of {', '.join(OP_NAMES)} (default fft)")
    p.add_argument("--sizes", type=_int_list, default=[512, 1024, 4096], help="comma list of powers of two")
    p.add_argument("--precision", type=_str_list, default=["f32"], help="f32, f64 or both comma-separated")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--warmup", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help=f"overridden by ${SEED_ENV}")
    p.add_argument("--format", choices=FORMATS, default="human")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--verify", action="store_true", help="check results against the float64 oracle")
    p.add_argument("--strict", action="store_true", help="exit 2 if any threshold is violated")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        seed = args.seed
        if os.environ.get(SEED_ENV):
            try:
                seed = int(os.environ[SEED_ENV])
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be an integer") from None
        config = BenchConfig(
            op=args.op, sizes=args.sizes, precision=args.precision, reps=args.reps,
            warmup=args.warmup, seed=seed, output=args.format, verify=args.verify,
        )
    except ConfigError as exc:
        print(f"rdfft-bench: {exc}", file=sys.stderr)
        return 1

    report = run_bench(config)
    text = emit_report(report, config.output)
    try:
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"rdfft-bench: cannot write report: {exc}", file=sys.stderr)
        return 1
    for w in report.warnings:
        print(f"rdfft-bench: warning: {w}", file=sys.stderr)

    if args.strict:
        try:
            report.raise_for_violations()
        except ThresholdViolation as exc:
            print(f"rdfft-bench: threshold violation: {exc}", file=sys.stderr)
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
