"""
Population dynamics through the four-unitary circuits.

For every time point, Kraus operator and ensemble member, the diagonal of
``M |psi><psi| M^H`` is estimated from circuit outcome probabilities and
rescaled by eps. The weighted sum over operators and members is the estimated
population vector, compared against the classical operator-sum result.

Circuit forms
-------------
``full4``
    Two select ancillas prepared uniformly, the multiplexed
    ``diag(Sm, NegSp, NegAm, Ap)``, then the ancilla adder. The sum-branch
    outcome has probability ``(eps^2 / 4) |<j|M_eff psi>|^2``.
``reduced2``
    One ancilla per circuit: six block pairs and four single blocks,
    recombined classically with
    ``|a+b+c+d|^2 = sum_{i<k} |a_i + a_k|^2 - 2 sum_k |a_k|^2``.

A purely Hermitian or anti-Hermitian operator runs a single pair circuit in
either form.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .channels import (
    GAMMA_DEFAULT,
    RHO0_DEFAULT,
    check_density_matrix,
    kraus_evolve_oracle,
    make_ensemble,
    preset_channel,
    preset_lambda,
)
from .decomposition import (
    ANCILLA_ROTATION,
    CircuitSpec,
    Purity,
    UnitaryBlockSet,
    build_block_set,
    pair_enumeration,
    richardson_extrapolate,
    sum_branch,
)
from .linalg import DimensionError, ParameterError, as_matrix, as_vector, structure_checks
from .simulator import (
    Circuit,
    Multiplexed,
    Prepare,
    UnitaryGate,
    run_exact,
    sample_counts,
)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
UNIFORM_2 = np.full(4, 0.5, dtype=complex)
PLUS = np.full(2, 1 / math.sqrt(2), dtype=complex)

MODES = ("exact", "sampled")
CIRCUIT_FORMS = ("full4", "reduced2")

_MASK64 = 0xFFFFFFFFFFFFFFFF


def seed_derivation(
    master_seed: int,
    t_index: int,
    kraus_index: int,
    member_index: int,
    circuit_index: int,
    repetition: int,
    epsilon_index: int = 0,
) -> int:
    """
    64-bit seed for one circuit execution.

    The little-endian packing of ``(master_seed, t_index, kraus_index,
    member_index, circuit_index, repetition, epsilon_index)`` as unsigned
    64-bit integers is hashed with BLAKE2b (8-byte digest, personalization
    ``b"udseed01"``). The seed depends only on the tuple, never on the order
    in which tasks run.
    """
    fields = (master_seed, t_index, kraus_index, member_index, circuit_index, repetition, epsilon_index)
    if any(int(x) < 0 for x in fields):
        raise ParameterError("seed indices must be non-negative")
    payload = struct.pack("<7Q", *(int(x) & _MASK64 for x in fields))
    digest = hashlib.blake2b(payload, digest_size=8, person=b"udseed01").digest()
    return int.from_bytes(digest, "little")


# --- circuits ---------------------------------------------------------------


def _n_system(dim: int) -> int:
    n = dim.bit_length() - 1
    if n < 1 or 1 << n != dim:
        raise DimensionError(f"operator dimension {dim} is not a power of two >= 2")
    return n


def full4_circuit(blocks: UnitaryBlockSet, psi) -> Circuit:
    n = _n_system(blocks.dim)
    system = tuple(range(n))
    ancillas = (n, n + 1)
    return Circuit(
        n + 2,
        (
            Prepare(ancillas, UNIFORM_2),
            Prepare(system, as_vector(psi)),
            Multiplexed(ancillas, system, blocks.blocks),
            UnitaryGate(ancillas, ANCILLA_ROTATION),
        ),
    )


def pair_circuit(spec: CircuitSpec, blocks: UnitaryBlockSet, psi) -> Circuit:
    n = _n_system(blocks.dim)
    system = tuple(range(n))
    i, j = spec.indices
    return Circuit(
        n + 1,
        (
            Prepare((n,), PLUS),
            Prepare(system, as_vector(psi)),
            Multiplexed((n,), system, (blocks.blocks[i], blocks.blocks[j])),
            UnitaryGate((n,), HADAMARD),
        ),
    )


def single_circuit(spec: CircuitSpec, blocks: UnitaryBlockSet, psi) -> Circuit:
    n = _n_system(blocks.dim)
    system = tuple(range(n))
    (k,) = spec.indices
    return Circuit(n, (Prepare(system, as_vector(psi)), UnitaryGate(system, blocks.blocks[k])))


def circuits_for(blocks: UnitaryBlockSet, psi, circuit_form: str) -> list[tuple[str, Circuit]]:
    """The circuits run for one operator, tagged ``"full4"``, ``"pair"`` or ``"single"``."""
    if circuit_form not in CIRCUIT_FORMS:
        raise ParameterError(f"unknown circuit form {circuit_form!r}")
    if blocks.purity is not Purity.GENERAL or circuit_form == "reduced2":
        out = []
        for spec in pair_enumeration(blocks):
            build = pair_circuit if spec.kind == "pair" else single_circuit
            out.append((spec.kind, build(spec, blocks, psi)))
        return out
    return [("full4", full4_circuit(blocks, psi))]


# --- reconstruction ---------------------------------------------------------


def reconstruct_diagonal(pair_probs, single_probs, epsilon: float, purity: Purity = Purity.GENERAL) -> np.ndarray:
    """
    Diagonal of ``M_eff |psi><psi| M_eff^H`` from reduced-scheme probabilities.

    ``pair_probs`` hold the ancilla-0 probabilities ``(1/4)|<j|(u_i + u_k)>|^2``
    of the pair circuits, ``single_probs`` the outcome probabilities
    ``|<j|u_k>|^2`` of the single-block circuits.
    """
    pair_probs = [np.asarray(p, dtype=float) for p in pair_probs]
    single_probs = [np.asarray(p, dtype=float) for p in single_probs]
    if purity is Purity.GENERAL:
        if len(pair_probs) != 6 or len(single_probs) != 4:
            raise DimensionError(
                f"general operators need 6 pair and 4 single results, got {len(pair_probs)} and {len(single_probs)}"
            )
        total = 4.0 * sum(pair_probs) - 2.0 * sum(single_probs)
        return total / (4.0 * epsilon**2)
    if len(pair_probs) != 1 or single_probs:
        raise DimensionError("a pure operator needs exactly one pair result and no singles")
    return pair_probs[0] / epsilon**2


def _probabilities(circuit: Circuit, mode: str, shots: int | None, seed: int | None) -> np.ndarray:
    p = run_exact(circuit)
    if mode == "exact":
        return p
    return sample_counts(p, shots, seed).frequencies(p.size)


def estimate_kraus_diag(
    m,
    psi,
    epsilon: float,
    mode: str = "exact",
    shots: int | None = None,
    seed: int | Sequence[int] | None = None,
    circuit_form: str = "full4",
    block_builder=build_block_set,
) -> np.ndarray:
    """
    Estimate ``diag(M |psi><psi| M^H)`` at expansion parameter ``epsilon``.

    In sampled mode ``seed`` is either one seed per circuit (in the order of
    :func:`circuits_for`) or a single integer from which per-circuit seeds
    are derived. ``block_builder`` exists so validation can inject faulty
    blocks.
    """
    if mode not in MODES:
        raise ParameterError(f"unknown mode {mode!r}")
    m = as_matrix(m)
    psi = as_vector(psi)
    if psi.size != m.shape[0]:
        raise DimensionError("state and operator dimensions differ")
    blocks = block_builder(m, epsilon)
    dim = blocks.dim
    circuits = circuits_for(blocks, psi, circuit_form)

    if mode == "sampled":
        if shots is None or int(shots) < 1:
            raise ParameterError("sampled mode needs shots >= 1")
        if seed is None:
            raise ParameterError("sampled mode needs a seed")
        if isinstance(seed, (int, np.integer)):
            seeds = [seed_derivation(int(seed), 0, 0, 0, c, 0) for c in range(len(circuits))]
        else:
            seeds = [int(s) for s in seed]
            if len(seeds) < len(circuits):
                raise ParameterError(f"{len(circuits)} circuits but {len(seeds)} seeds")
    else:
        seeds = [None] * len(circuits)

    pairs, singles = [], []
    for (kind, circ), s in zip(circuits, seeds):
        probs = _probabilities(circ, mode, shots, s)
        if kind == "full4":
            sb = sum_branch(ANCILLA_ROTATION)
            return 4.0 * probs[sb * dim : (sb + 1) * dim] / epsilon**2
        if kind == "pair":
            sb = sum_branch(HADAMARD)
            pairs.append(probs[sb * dim : (sb + 1) * dim])
        else:
            singles.append(probs)
    return reconstruct_diagonal(pairs, singles, epsilon, blocks.purity)


# --- experiment -------------------------------------------------------------


def default_time_grid() -> tuple[float, ...]:
    """13 uniform points from 0 to 3 ns."""
    return tuple(float(t) for t in np.linspace(0.0, 3e-9, 13))


@dataclass(frozen=True)
class ExperimentConfig:
    channel: str = "amp-damp-zero-T"
    gamma: float = GAMMA_DEFAULT
    rho0: np.ndarray = field(default_factory=lambda: RHO0_DEFAULT.copy())
    time_grid: tuple[float, ...] = field(default_factory=default_time_grid)
    epsilons: tuple[float, ...] = (0.2,)
    mode: str = "exact"
    shots: int = 1
    repetitions: int = 1
    master_seed: int = 0
    circuit_form: str = "full4"
    richardson: tuple[int, ...] | None = None
    renormalize: bool = False
    ensemble: str = "eigen"
    average_first: bool = False

    def __post_init__(self):
        object.__setattr__(self, "time_grid", tuple(float(t) for t in self.time_grid))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        if self.richardson is not None:
            object.__setattr__(self, "richardson", tuple(int(o) for o in self.richardson))
        object.__setattr__(self, "rho0", check_density_matrix(self.rho0))
        preset_lambda(self.channel)
        if not self.time_grid or any(not (np.isfinite(t) and t >= 0) for t in self.time_grid):
            raise ParameterError("time grid must be non-empty and non-negative")
        if not self.epsilons or any(not (np.isfinite(e) and e > 0) for e in self.epsilons):
            raise ParameterError(f"epsilons must be positive, got {self.epsilons}")
        if self.mode not in MODES:
            raise ParameterError(f"unknown mode {self.mode!r}")
        if self.circuit_form not in CIRCUIT_FORMS:
            raise ParameterError(f"unknown circuit form {self.circuit_form!r}")
        if self.shots < 1 or self.repetitions < 1:
            raise ParameterError("shots and repetitions must be >= 1")
        if not 0 <= self.master_seed <= _MASK64:
            raise ParameterError("master seed must fit in 64 bits")
        if self.richardson is not None:
            if len(self.epsilons) < 2:
                raise ParameterError("Richardson extrapolation needs at least two epsilons")
            if any(b >= a for a, b in zip(self.epsilons, self.epsilons[1:])):
                raise ParameterError("epsilons must be strictly decreasing for Richardson extrapolation")
            if len(self.richardson) < len(self.epsilons) - 1:
                raise ParameterError("order schedule shorter than the Richardson table")
        elif len(self.epsilons) != 1:
            raise ParameterError("several epsilons given without Richardson extrapolation")

    @property
    def lam(self) -> float:
        return preset_lambda(self.channel)

    @property
    def epsilon_label(self) -> str:
        return ";".join(f"{e:g}" for e in self.epsilons)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rho0"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.rho0]
        d["time_grid"] = list(self.time_grid)
        d["epsilons"] = list(self.epsilons)
        d["richardson"] = list(self.richardson) if self.richardson is not None else None
        return d


@dataclass(frozen=True)
class PopulationTrace:
    """
    Estimated and oracle populations on a time grid.

    ``per_repetition`` has shape ``(repetitions, n_times, dim)``; ``estimates``
    is the repetition mean used for comparisons.
    """

    times: np.ndarray
    estimates: np.ndarray
    oracle: np.ndarray
    per_repetition: np.ndarray
    epsilon_label: str
    shots: int  # 0 in exact mode

    def rows(self) -> list[tuple]:
        out = []
        reps = self.per_repetition.shape[0]
        blocks = [(r, self.per_repetition[r]) for r in range(reps)] if reps > 1 else []
        blocks.append(("mean", self.estimates))
        for rep, est in blocks:
            for ti, t in enumerate(self.times):
                for j in range(est.shape[1]):
                    out.append((t * 1e9, j, est[ti, j], self.oracle[ti, j], self.epsilon_label, self.shots, rep))
        return out


def _member_tasks(config: ExperimentConfig):
    ens = make_ensemble(config.rho0, config.ensemble)
    reps = config.repetitions if config.mode == "sampled" else 1
    tasks = []
    for ti, t in enumerate(config.time_grid):
        channel = preset_channel(config.channel, t, config.gamma)
        for ki, op in enumerate(channel.operators):
            if structure_checks(op).is_zero:
                continue
            for mi, (w, psi) in enumerate(ens.members):
                for ei, eps in enumerate(config.epsilons):
                    for rep in range(reps):
                        tasks.append((ti, ki, mi, ei, rep, w, op, psi, eps))
    return tasks, reps


def _run_task(config: ExperimentConfig, task) -> np.ndarray:
    ti, ki, mi, ei, rep, w, op, psi, eps = task
    seeds = None
    if config.mode == "sampled":
        seeds = [seed_derivation(config.master_seed, ti, ki, mi, c, rep, ei) for c in range(10)]
    d = estimate_kraus_diag(op, psi, eps, config.mode, config.shots, seeds, config.circuit_form)
    return w * d


def _finish(config: ExperimentConfig, raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # raw: (reps, n_eps, T, dim)
    def extrapolate(x):
        if config.richardson is None:
            return x[0]
        return richardson_extrapolate(list(x), config.epsilons, config.richardson)

    def renorm(x):
        return x / x.sum(axis=-1, keepdims=True) if config.renormalize else x

    per_rep = np.stack([renorm(extrapolate(raw[r])) for r in range(raw.shape[0])])
    if config.average_first:
        mean = renorm(extrapolate(raw.mean(axis=0)))
    else:
        mean = per_rep.mean(axis=0)
    return per_rep, mean


def run_trace(config: ExperimentConfig, workers: int | None = None) -> PopulationTrace:
    """
    Run the full population-dynamics experiment.

    ``workers > 1`` evaluates circuits on a thread pool; results are keyed by
    task indices and seeds come from :func:`seed_derivation`, so the trace is
    bit-identical to a serial run.
    """
    tasks, reps = _member_tasks(config)
    dim = config.rho0.shape[0]
    n_t, n_e = len(config.time_grid), len(config.epsilons)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda tk: _run_task(config, tk), tasks))
    else:
        results = [_run_task(config, tk) for tk in tasks]

    # fixed-order accumulation keeps floating-point sums schedule independent
    raw = np.zeros((reps, n_e, n_t, dim))
    for task, val in zip(tasks, results):
        ti, _, _, ei, rep = task[:5]
        raw[rep, ei, ti] += val

    per_rep, mean = _finish(config, raw)
    oracle = oracle_trace(config)
    return PopulationTrace(
        times=np.array(config.time_grid),
        estimates=mean,
        oracle=oracle,
        per_repetition=per_rep,
        epsilon_label=config.epsilon_label,
        shots=config.shots if config.mode == "sampled" else 0,
    )


@dataclass(frozen=True)
class OracleMetrics:
    mae: float
    max_abs_err: float
    residuals: np.ndarray  # (n_times, dim), estimated - oracle


def compare_to_oracle(trace: PopulationTrace) -> OracleMetrics:
    res = trace.estimates - trace.oracle
    return OracleMetrics(mae=float(np.mean(np.abs(res))), max_abs_err=float(np.max(np.abs(res))), residuals=res)


def oracle_trace(config: ExperimentConfig) -> np.ndarray:
    """Oracle populations only, shape ``(n_times, dim)``."""
    return np.array(
        [
            kraus_evolve_oracle(config.rho0, preset_channel(config.channel, t, config.gamma)).diagonal().real
            for t in config.time_grid
        ]
    )


# --- output -----------------------------------------------------------------

TRACE_COLUMNS = ("t_ns", "basis_index", "pop_est", "pop_oracle", "epsilon", "shots", "repetition")


def _g17(x) -> str:
    return format(float(x), ".17g")


def write_trace_csv(trace: PopulationTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for t_ns, j, est, orc, eps, shots, rep in trace.rows():
            w.writerow([_g17(t_ns), j, _g17(est), _g17(orc), eps, shots, rep])


def write_trace_json(trace: PopulationTrace, config: ExperimentConfig, path) -> None:
    rows = [dict(zip(TRACE_COLUMNS, r)) for r in trace.rows()]
    metrics = compare_to_oracle(trace)
    doc = {
        "config": config.to_dict(),
        "metrics": {"mae": metrics.mae, "max_abs_err": metrics.max_abs_err},
        "rows": rows,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
