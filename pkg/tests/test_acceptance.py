"""Acceptance criteria, one test each.

Every test records a ``[PASS]`` / ``[FAIL]`` line through the ``criterion``
fixture (printed in the "acceptance criteria" summary section) and then
asserts, so a failing criterion also fails the test run. Tolerances are
pinned below and are never relaxed to make a line green.
"""

import json
import time

import jsonschema
import numpy as np
import pytest

from rdfft import (
    GradientSet,
    backward,
    forward,
    forward_in_place,
    forward_staged,
    inverse_in_place,
    layer_create,
    layer_for_shape,
    oracle,
    pack,
    plan_create,
    unpack,
)
from rdfft.audit import AllocationAudit
from rdfft.bench import REPORT_SCHEMA, main

from conftest import EPS

SIZES = [2**k for k in range(1, 13)]
SEED = 20240601

# criterion 1
ACC_SIZES = (512, 1024, 4096)
ACC_TRIALS = 32
ACC_ABS = 5e-6
ACC_REL = 5e-3
ACC_SECONDS = 10.0
# criterion 2
RT_TRIALS = 100
RT_TOL = {"f32": 1e-5, "f64": 1e-11}
# criterion 3
LAYOUT_SPECTRA = 1000
LAYOUT_F64_TOL = 1e-12
# criterion 4
STAGED_SIZES = (16, 64, 256)
# criteria 5 and 6
BLOCK_SIZES = (2, 4, 8, 16)
GRIDS = ((1, 1), (2, 3), (4, 2))
EQUIV_TOL = 1e-4
FD = {"f32": (1e-3, 1e-3), "f64": (1e-5, 1e-7)}  # (step, tolerance)
FD_SECONDS = 60.0
# criterion 8
PROPERTY_TRIALS = 1000
PARSEVAL_TOL = 1e-5
LINEARITY_TOL = 1e-5


def _rng(*key):
    return np.random.default_rng([SEED, *key])


def test_c1_operator_accuracy_f32(criterion):
    start = time.perf_counter()
    worst_abs, worst_rel, details = 0.0, 0.0, []
    for n in ACC_SIZES:
        plan = plan_create(n, "f32")
        x = _rng(1, n).standard_normal((ACC_TRIALS, n)).astype(np.float32)
        ref = oracle.naive_dft(x)
        abs_n = rel_n = mean_n = 0.0
        for t in range(ACC_TRIALS):
            buf = x[t].copy()
            forward_in_place(plan, buf)
            err = np.abs(unpack(buf).astype(np.complex128) - ref[t])
            abs_n = max(abs_n, err.max())
            rel_n = max(rel_n, err.max() / np.abs(ref[t]).max())
            mean_n += err.mean() / ACC_TRIALS
        worst_abs, worst_rel = max(worst_abs, abs_n), max(worst_rel, rel_n)
        details.append(f"n={n} max_abs={abs_n:.2e} mean_abs={mean_n:.2e} rel={rel_n:.2e}")
    elapsed = time.perf_counter() - start
    ok = worst_abs <= ACC_ABS and worst_rel <= ACC_REL and elapsed < ACC_SECONDS
    criterion(
        "C1 operator accuracy f32",
        ok,
        f"{'; '.join(details)}; limits abs<={ACC_ABS:g} rel<={ACC_REL:g}; {elapsed:.1f}s",
    )
    assert worst_rel <= ACC_REL
    assert elapsed < ACC_SECONDS
    assert worst_abs <= ACC_ABS, f"max abs error {worst_abs:.3e} exceeds {ACC_ABS:g}"


def test_c2_round_trip(criterion):
    worst = {"f32": 0.0, "f64": 0.0}
    for precision in ("f32", "f64"):
        for n in SIZES:
            plan = plan_create(n, precision)
            xs = _rng(2, n).standard_normal((RT_TRIALS, n)).astype(plan.dtype)
            for x in xs:
                buf = x.copy()
                forward_in_place(plan, buf)
                inverse_in_place(plan, buf)
                worst[precision] = max(worst[precision], float(np.max(np.abs(buf - x))))
    ok = all(worst[p] <= RT_TOL[p] for p in worst)
    criterion(
        "C2 round trip n=2..4096",
        ok,
        f"f32 max {worst['f32']:.2e} (<= {RT_TOL['f32']:g}), f64 max {worst['f64']:.2e} (<= {RT_TOL['f64']:g})",
    )
    assert ok


def _hermitian(rng, n):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    mirror = np.conj(z[(-np.arange(n)) % n])
    return (z + mirror) / 2


def test_c3_layout_correctness(criterion):
    mismatches = 0
    oracle_err = 0.0
    for n in SIZES:
        rng = _rng(3, n)
        for _ in range(LAYOUT_SPECTRA):
            y = _hermitian(rng, n)
            s = pack(y)
            if not np.array_equal(unpack(s), y):
                mismatches += 1
            r = rng.standard_normal(n)
            if not np.array_equal(pack(unpack(r)), r):
                mismatches += 1
        for _ in range(3):
            x = rng.standard_normal(n)
            buf = x.copy()
            forward_in_place(plan_create(n, "f64"), buf)
            oracle_err = max(oracle_err, float(np.max(np.abs(buf - pack(oracle.naive_dft(x))))))
    ok = mismatches == 0 and oracle_err <= LAYOUT_F64_TOL
    criterion(
        "C3 layout bijection and forward == pack(naive_dft)",
        ok,
        f"{mismatches} bijection mismatches over {2 * LAYOUT_SPECTRA} buffers/size; "
        f"f64 oracle max {oracle_err:.2e} (<= {LAYOUT_F64_TOL:g})",
    )
    assert ok


def test_c4_stage_windows(criterion):
    worst_ratio = 0.0
    for precision in ("f32", "f64"):
        for n in STAGED_SIZES:
            plan = plan_create(n, precision)
            x = _rng(4, n).standard_normal(n).astype(plan.dtype)
            for view in forward_staged(plan, x.copy()):
                r = view.block_size
                for base in range(0, n, r):
                    ref = oracle.naive_dft(x[plan.bitrev[base] :: n // r])
                    err = np.max(np.abs(unpack(view.buffer[base : base + r]) - ref))
                    bound = EPS[precision] * max(np.log2(r), 1) * np.abs(ref).max()
                    worst_ratio = max(worst_ratio, err / bound)
    ok = worst_ratio <= 1.0
    criterion("C4 every stage window decodes to its sub-signal DFT", ok, f"worst err/bound {worst_ratio:.3f}")
    assert ok


def test_c5_circulant_equivalence(criterion):
    worst = 0.0
    for p in BLOCK_SIZES:
        for q_out, q_in in GRIDS:
            rng = _rng(5, p, q_out, q_in)
            c = rng.standard_normal((q_out, q_in, p))
            x = rng.standard_normal(q_in * p)
            layer = layer_create(p, q_out, q_in, c.astype(np.float32))
            y = np.empty(q_out * p, np.float32)
            forward(layer, x.astype(np.float32), y)
            ref = oracle.naive_circulant_matvec(c.astype(np.float32), x.astype(np.float32))
            worst = max(worst, float(np.max(np.abs(y - ref))))
    ok = worst <= EQUIV_TOL
    criterion("C5 circulant forward == dense matvec (f32)", ok, f"max abs {worst:.2e} (<= {EQUIV_TOL:g})")
    assert ok


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def test_c6_gradients_vs_finite_differences(criterion):
    start = time.perf_counter()
    worst = {"f32": 0.0, "f64": 0.0}
    for precision, (step, _) in FD.items():
        dtype = np.float32 if precision == "f32" else np.float64
        for p in BLOCK_SIZES:
            for q_out, q_in in GRIDS:
                rng = _rng(6, p, q_out, q_in)
                # values exactly representable in the layer precision
                c = rng.standard_normal((q_out, q_in, p)).astype(dtype).astype(np.float64)
                x = rng.standard_normal(q_in * p).astype(dtype).astype(np.float64)
                g = rng.standard_normal(q_out * p).astype(dtype).astype(np.float64)
                layer = layer_create(p, q_out, q_in, c, precision)
                xs = x.astype(dtype)
                forward(layer, xs, np.empty(q_out * p, dtype))
                grads = GradientSet.zeros(layer)
                backward(layer, xs, g.astype(dtype), grads)
                # L = <g, C x>, evaluated with the dense float64 oracle
                fx = oracle.finite_difference_grad(lambda t: g @ oracle.naive_circulant_matvec(c, t), x, step)
                fc = oracle.finite_difference_grad(lambda t: g @ oracle.naive_circulant_matvec(t, x), c, step)
                worst[precision] = max(worst[precision], _rel(grads.grad_input, fx), _rel(grads.grad_weights, fc))
    elapsed = time.perf_counter() - start
    ok = all(worst[p] <= FD[p][1] for p in FD) and elapsed < FD_SECONDS
    criterion(
        "C6 gradients vs central differences",
        ok,
        f"f32 rel {worst['f32']:.2e} (<= {FD['f32'][1]:g}), f64 rel {worst['f64']:.2e} (<= {FD['f64'][1]:g}); "
        f"{elapsed:.1f}s",
    )
    assert ok


def _guarded(n, dtype, guard=16):
    region = np.full(n + 2 * guard, np.nan, dtype=dtype)
    return region, region[guard:-guard]


def test_c7_zero_allocation(criterion):
    allocs, scratch, canary_ok, param_ok = 0, 0, True, True
    for precision in ("f32", "f64"):
        dtype = np.float32 if precision == "f32" else np.float64
        rng = _rng(7, 0 if precision == "f32" else 1)
        n = 1024
        plan = plan_create(n, precision)
        rb, buf = _guarded(n, dtype)
        buf[:] = rng.standard_normal(n)
        layer = layer_create(16, 4, 2, rng.standard_normal((4, 2, 16)), precision)
        rx, x = _guarded(32, dtype)
        ry, y = _guarded(64, dtype)
        rg, g = _guarded(64, dtype)
        ri, gi = _guarded(32, dtype)
        grads = GradientSet(gi, np.zeros((4, 2, 16), dtype))
        x[:] = rng.standard_normal(32)
        g[:] = rng.standard_normal(64)
        # compile outside the audit
        forward_in_place(plan, buf)
        inverse_in_place(plan, buf)
        forward(layer, x, y)
        backward(layer, x, g, grads)
        with AllocationAudit() as audit:
            forward_in_place(plan, buf)
            inverse_in_place(plan, buf)
            forward(layer, x, y)
            backward(layer, x, g, grads)
        allocs += audit.alloc_count
        scratch += audit.scratch_bytes
        for region in (rb, rx, ry, rg, ri):
            canary_ok &= bool(np.isnan(region[:16]).all() and np.isnan(region[-16:]).all())
        for m, nn, p in ((64, 32, 16), (4096, 4096, 512), (768, 3072, 256)):
            shaped = layer_for_shape(m, nn, p, np.zeros((m // p, nn // p, p)), precision)
            param_ok &= shaped.num_parameters == (m * nn) // p
    ok = allocs == 0 and scratch == 0 and canary_ok and param_ok
    criterion(
        "C7 zero-allocation contract",
        ok,
        f"alloc_count={allocs} scratch_bytes={scratch} canaries_intact={canary_ok} params==(m*n)/p: {param_ok}",
    )
    assert ok


def test_c8_parseval_and_linearity(criterion):
    worst_parseval, worst_linear = 0.0, 0.0
    for n in SIZES:
        plan = plan_create(n, "f32")
        rng = _rng(8, n)
        for _ in range(PROPERTY_TRIALS):
            x = rng.standard_normal(n).astype(np.float32)
            z = rng.standard_normal(n).astype(np.float32)
            a, b = rng.standard_normal(2)
            mix = (a * x + b * z).astype(np.float32)
            energy = np.sum(x.astype(np.float64) ** 2)
            for buf in (x, z, mix):
                forward_in_place(plan, buf)
            spec = np.sum(np.abs(unpack(x).astype(np.complex128)) ** 2) / n
            worst_parseval = max(worst_parseval, abs(spec - energy) / energy)
            rhs = a * x.astype(np.float64) + b * z.astype(np.float64)
            worst_linear = max(worst_linear, float(np.max(np.abs(mix - rhs)) / np.abs(rhs).max()))
    ok = worst_parseval <= PARSEVAL_TOL and worst_linear <= LINEARITY_TOL
    criterion(
        "C8 Parseval and linearity (f32)",
        ok,
        f"Parseval rel {worst_parseval:.2e} (<= {PARSEVAL_TOL:g}), linearity rel {worst_linear:.2e} "
        f"(<= {LINEARITY_TOL:g}); {PROPERTY_TRIALS} trials x {len(SIZES)} sizes",
    )
    assert ok


def test_c9_bench_default_matrix_strict(criterion, tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["--verify", "--strict", "--format", "json", "--out", str(out)])
    doc = json.loads(out.read_text())
    try:
        jsonschema.validate(doc, REPORT_SCHEMA)
        schema_ok = True
    except jsonschema.ValidationError:
        schema_ok = False
    failing = [f"n={c['n']} abs_err={c['abs_err']:.2e}" for c in doc if c["violations"]]
    ok = code == 0 and schema_ok
    criterion(
        "C9 bench --verify --strict on the default matrix",
        ok,
        f"exit={code} schema_valid={schema_ok} cells={len(doc)} violating: {', '.join(failing) or 'none'}",
    )
    assert schema_ok
    assert code == 0, f"strict bench exited {code}: {failing}"
