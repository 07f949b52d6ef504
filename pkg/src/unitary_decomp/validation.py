"""Invariant suite behind ``unitary-decomp validate``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channels import RHO0_DEFAULT, GADParams, cptp_check, gad_kraus, make_ensemble, preset_channel
from .decomposition import (
    assemble_full_U,
    build_block_set,
    check_epsilon,
    effective_operator,
    rotation_R,
)
from .experiment import (
    ExperimentConfig,
    estimate_kraus_diag,
    reconstruct_diagonal,
    run_trace,
)
from .linalg import adjoint, max_abs, structure_checks, unitarity_residual

BENCHMARK_CHANNELS = ("amp-damp-zero-T", "amp-damp-infinite-T")
BENCHMARK_TIMES = tuple(np.linspace(0.0, 3e-9, 7))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def benchmark_operators() -> list[np.ndarray]:
    """Non-zero Kraus operators of both benchmark channels on a coarse grid, plus a lowering operator."""
    ops = []
    for name in BENCHMARK_CHANNELS:
        for t in BENCHMARK_TIMES:
            ops += [m for m in preset_channel(name, t).operators if not structure_checks(m).is_zero]
    ops.append(np.array([[0, 0.6], [0, 0]], dtype=complex))
    return ops


def benchmark_states() -> list[np.ndarray]:
    states = list(make_ensemble(RHO0_DEFAULT, "eigen").states)
    states += list(make_ensemble(RHO0_DEFAULT, "plus-one").states)
    return states


def check_unitarity(epsilons, builder) -> CheckResult:
    worst = 0.0
    for m in benchmark_operators():
        for eps in epsilons:
            bs = builder(m, eps)
            worst = max(worst, *(unitarity_residual(b) for b in bs.blocks))
            worst = max(worst, unitarity_residual(assemble_full_U(bs, 1)))
    worst = max(worst, unitarity_residual(rotation_R(1)), unitarity_residual(rotation_R(3)))
    return CheckResult("unitarity", worst <= 1e-12, f"max residual {worst:.2e} (tol 1e-12)")


def check_cptp() -> CheckResult:
    worst = 0.0
    for gamma in (0.0, 1e8, 1.52e9, 1e10):
        for lam in np.linspace(0, 1, 11):
            for t in np.linspace(0, 5e-9, 11):
                worst = max(worst, cptp_check(gad_kraus(GADParams(gamma, float(lam), float(t)))))
    return CheckResult("cptp", worst <= 1e-12, f"max residual {worst:.2e} (tol 1e-12)")


def check_convergence(builder) -> CheckResult:
    lo, hi = np.inf, -np.inf
    for name in BENCHMARK_CHANNELS:
        for t in BENCHMARK_TIMES:
            for m in preset_channel(name, t).operators:
                e = [max_abs(builder(m, eps).block_sum() / (2 * eps) - m) for eps in (0.2, 0.1)]
                if e[1] < 1e-13:
                    continue
                ratio = e[0] / e[1]
                lo, hi = min(lo, ratio), max(hi, ratio)
    ok = 3.5 <= lo and hi <= 4.5
    return CheckResult("convergence", ok, f"e(0.2)/e(0.1) in [{lo:.4f}, {hi:.4f}] (want [3.5, 4.5])")


def _dense_diag(m, psi, eps) -> np.ndarray:
    eff = effective_operator(m, eps).matrix
    return (eff @ np.outer(psi, psi.conj()) @ adjoint(eff)).diagonal().real


def check_backend_equivalence(epsilons, builder) -> CheckResult:
    worst = 0.0
    for m in benchmark_operators():
        for psi in benchmark_states():
            for eps in epsilons:
                ref = _dense_diag(m, psi, eps)
                for form in ("full4", "reduced2"):
                    got = estimate_kraus_diag(m, psi, eps, circuit_form=form, block_builder=builder)
                    worst = max(worst, max_abs(got - ref))
    return CheckResult("backend_equivalence", worst <= 1e-10, f"max deviation {worst:.2e} (tol 1e-10)")


def check_form_equivalence(epsilons, builder) -> CheckResult:
    worst = 0.0
    for m in benchmark_operators():
        for psi in benchmark_states():
            for eps in epsilons:
                a = estimate_kraus_diag(m, psi, eps, circuit_form="full4", block_builder=builder)
                b = estimate_kraus_diag(m, psi, eps, circuit_form="reduced2", block_builder=builder)
                worst = max(worst, max_abs(a - b))
    return CheckResult("form_equivalence", worst <= 1e-10, f"max deviation {worst:.2e} (tol 1e-10)")


def check_reconstruction_identity(n_samples: int = 1000, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    pairs_idx = [(i, k) for i in range(4) for k in range(i + 1, 4)]
    for _ in range(n_samples):
        a = rng.normal(size=4) + 1j * rng.normal(size=4)
        pair = [np.array([abs(a[i] + a[k]) ** 2 / 4]) for i, k in pairs_idx]
        single = [np.array([abs(x) ** 2]) for x in a]
        # eps = 1/2 makes the rescaled result |sum a|^2 / (4 eps^2) = |sum a|^2
        got = reconstruct_diagonal(pair, single, 0.5)[0]
        worst = max(worst, float(abs(got - abs(a.sum()) ** 2)))
    return CheckResult("reconstruction_identity", worst <= 1e-12, f"max deviation {worst:.2e} over {n_samples} tuples")


def check_determinism() -> CheckResult:
    cfg = ExperimentConfig(
        time_grid=(0.0, 1e-9, 2e-9),
        epsilons=(1.15, 1.0),
        richardson=(2,),
        mode="sampled",
        shots=4096,
        repetitions=3,
        master_seed=11,
        circuit_form="reduced2",
    )
    serial = run_trace(cfg)
    parallel = run_trace(cfg, workers=4)
    same = np.array_equal(serial.per_repetition, parallel.per_repetition) and np.array_equal(
        serial.estimates, parallel.estimates
    )
    return CheckResult("determinism", same, "serial and 4-worker traces bit-identical" if same else "traces differ")


def run_validation(
    epsilons: Sequence[float] = (0.2, 0.1, 1.0),
    block_builder: Callable = build_block_set,
) -> list[CheckResult]:
    """Run every invariant check; raises ParameterError for invalid ``epsilons``."""
    epsilons = [check_epsilon(e) for e in epsilons]
    return [
        check_unitarity(epsilons, block_builder),
        check_cptp(),
        check_convergence(block_builder),
        check_backend_equivalence(epsilons, block_builder),
        check_form_equivalence(epsilons, block_builder),
        check_reconstruction_identity(),
        check_determinism(),
    ]
