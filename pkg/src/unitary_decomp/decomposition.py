"""
Four-unitary representation of an arbitrary square operator.

An operator ``M`` is split into Hermitian ``S`` and anti-Hermitian ``A`` parts,
and each part is written as a difference of two unitaries::

    sin(eps S) / eps  = (1 / 2 eps) (i e^{-i eps S} - i e^{i eps S})
    sinh(eps A) / eps = (1 / 2 eps) (e^{eps A} - e^{-eps A})

The four blocks carry their signs, so ``sum(blocks) / (2 eps)`` is the finite-eps
effective operator, which tends to ``M`` as ``eps -> 0`` with an ``O(eps^2)``
error. Richardson extrapolation over eps removes the even error terms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .linalg import (
    DimensionError,
    ParameterError,
    StructureError,
    eig_hermitian,
    hermitian_split,
    structure_checks,
    unitary_exp,
)

BLOCK_LABELS = ("Sm", "NegSp", "NegAm", "Ap")


class Purity(enum.Enum):
    GENERAL = "general"
    HERMITIAN_ONLY = "hermitian_only"
    ANTI_HERMITIAN_ONLY = "anti_hermitian_only"


def check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise ParameterError(f"epsilon must be a positive finite number, got {epsilon!r}")
    return epsilon


@dataclass(frozen=True)
class UnitaryBlockSet:
    """
    The blocks ``(Sm, NegSp, NegAm, Ap)`` for one operator at one eps.

    ``Sm = i e^{-i eps S}``, ``NegSp = -i e^{i eps S}``, ``NegAm = -e^{-eps A}``
    and ``Ap = e^{eps A}``; these are the diagonal blocks of the multiplexed
    operator in ancilla order 0..3.
    """

    epsilon: float
    blocks: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    purity: Purity

    @property
    def dim(self) -> int:
        return self.blocks[0].shape[0]

    def labelled(self) -> list[tuple[str, np.ndarray]]:
        return list(zip(BLOCK_LABELS, self.blocks))

    def active_indices(self) -> tuple[int, ...]:
        """Indices of the blocks that carry the operator."""
        if self.purity is Purity.HERMITIAN_ONLY:
            return (0, 1)
        if self.purity is Purity.ANTI_HERMITIAN_ONLY:
            return (2, 3)
        return (0, 1, 2, 3)

    def block_sum(self) -> np.ndarray:
        return sum(self.blocks)


def classify_purity(s: np.ndarray, a: np.ndarray) -> Purity:
    # a zero operator lands in HERMITIAN_ONLY
    if structure_checks(a).is_zero:
        return Purity.HERMITIAN_ONLY
    if structure_checks(s).is_zero:
        return Purity.ANTI_HERMITIAN_ONLY
    return Purity.GENERAL


def build_block_set(m, epsilon: float) -> UnitaryBlockSet:
    """Build the four signed unitary blocks of ``m`` at expansion parameter ``epsilon``."""
    epsilon = check_epsilon(epsilon)
    s, a = hermitian_split(m)
    ia = 1j * a
    e_minus_s = unitary_exp(s, epsilon)  # e^{-i eps S}
    e_plus_s = unitary_exp(s, -epsilon)
    e_plus_a = unitary_exp(ia, epsilon)  # e^{-i eps (iA)} = e^{eps A}
    e_minus_a = unitary_exp(ia, -epsilon)
    blocks = (1j * e_minus_s, -1j * e_plus_s, -e_minus_a, e_plus_a)
    return UnitaryBlockSet(epsilon=epsilon, blocks=blocks, purity=classify_purity(s, a))


@dataclass(frozen=True)
class EffectiveOperator:
    matrix: np.ndarray
    epsilon: float


def effective_operator(m, epsilon: float) -> EffectiveOperator:
    """
    Closed form of the operator realised by the four blocks at finite eps.

    Computes ``sin(eps S)/eps + sinh(eps A)/eps`` through eigendecompositions of
    ``S`` and of the Hermitian matrix ``iA`` (``sinh(eps A) = -i sin(eps iA)``).
    """
    epsilon = check_epsilon(epsilon)
    s, a = hermitian_split(m)
    sin_part = eig_hermitian(s).apply_function(lambda lam: np.sin(epsilon * lam) / epsilon)
    sinh_part = -1j * eig_hermitian(1j * a).apply_function(
        lambda lam: np.sin(epsilon * lam) / epsilon
    )
    return EffectiveOperator(matrix=sin_part + sinh_part, epsilon=epsilon)


def assemble_full_U(blocks: UnitaryBlockSet, n_system_qubits: int) -> np.ndarray:
    """Block-diagonal ``4 * 2^n`` square unitary ``diag(Sm, NegSp, NegAm, Ap)``."""
    if blocks.dim != 2**n_system_qubits:
        raise DimensionError(
            f"blocks have dimension {blocks.dim}, expected {2**n_system_qubits}"
        )
    return block_diag(*blocks.blocks)


ANCILLA_ROTATION = 0.5 * np.array(
    [
        [1, -1, -1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, 1, 1, 1],
    ],
    dtype=complex,
)


def rotation_R(n_system_qubits: int) -> np.ndarray:
    """Ancilla adder ``R`` (4x4, entries +-1/2) tensored with the system identity."""
    if n_system_qubits < 0:
        raise ParameterError("n_system_qubits must be non-negative")
    return np.kron(ANCILLA_ROTATION, np.eye(2**n_system_qubits))


def sum_branch(rotation: np.ndarray = ANCILLA_ROTATION) -> int:
    """Row index of the rotation whose entries are all equal and positive."""
    rows = [
        k
        for k, row in enumerate(rotation)
        if np.allclose(row, row[0]) and row[0].real > 0 and abs(row[0].imag) < 1e-15
    ]
    if len(rows) != 1:
        raise StructureError("rotation has no unique uniform positive row")
    return rows[0]


def richardson_step(v1, v2, eps1: float, eps2: float, order: int = 2) -> np.ndarray:
    """
    One Richardson step removing the ``eps**order`` error term.

    Parameters
    ----------
    v1, v2 : array_like
        Values computed at ``eps1`` and ``eps2`` respectively.
    eps1, eps2 : float
        Expansion parameters with ``eps1 > eps2 > 0``.
    order : int
        Even power of the leading error term in ``v1`` and ``v2``.

    Returns
    -------
    ndarray
        ``(v1 - v2 r**order) / (1 - r**order)`` with ``r = eps1 / eps2``.
    """
    if order < 1:
        raise ParameterError("order must be a positive integer")
    if not eps2 > 0:
        raise ParameterError("eps2 must be positive")
    if eps1 == eps2:
        raise ParameterError("eps1 == eps2 gives a singular ratio")
    if eps1 < eps2:
        raise ParameterError("eps1 must be larger than eps2")
    v1 = np.asarray(v1)
    v2 = np.asarray(v2)
    if v1.shape != v2.shape:
        raise DimensionError("value arrays differ in shape")
    rn = (eps1 / eps2) ** order
    return (v1 - v2 * rn) / (1 - rn)


def richardson_extrapolate(
    values: Sequence, epsilons: Sequence[float], orders: Sequence[int] | None = None
) -> np.ndarray:
    """
    Iterated Richardson table over a strictly decreasing list of eps.

    Level ``j`` combines neighbouring entries with the ratio of their leading
    eps and ``orders[j]`` (default ``2, 4, 6, ...``). The step-ratio form is
    exact for geometric eps sequences.
    """
    eps = [float(e) for e in epsilons]
    if len(values) != len(eps) or not eps:
        raise DimensionError("need one value per epsilon")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ParameterError("epsilons must be strictly decreasing")
    levels = len(eps) - 1
    if orders is None:
        orders = [2 * (j + 1) for j in range(levels)]
    if len(orders) < levels:
        raise ParameterError(f"need {levels} orders for {len(eps)} epsilons")
    table = [np.asarray(v) for v in values]
    for j in range(levels):
        table = [
            richardson_step(table[k], table[k + 1], eps[k], eps[k + 1], orders[j])
            for k in range(len(table) - 1)
        ]
    return table[0]


@dataclass(frozen=True)
class CircuitSpec:
    """One circuit of the reduced scheme: a pair ``diag(U_i, U_j)`` or a single block."""

    kind: str  # "pair" | "single"
    indices: tuple[int, ...]
    matrix: np.ndarray


def pair_enumeration(blocks: UnitaryBlockSet) -> list[CircuitSpec]:
    """
    Circuits for the reduced (one-ancilla) scheme.

    General operators need all six block pairs plus the four single blocks.
    A purely Hermitian or anti-Hermitian operator needs one pair.
    """
    if blocks.purity is not Purity.GENERAL:
        i, j = blocks.active_indices()
        return [CircuitSpec("pair", (i, j), block_diag(blocks.blocks[i], blocks.blocks[j]))]
    specs = [
        CircuitSpec("pair", (i, j), block_diag(blocks.blocks[i], blocks.blocks[j]))
        for i, j in combinations(range(4), 2)
    ]
    specs += [CircuitSpec("single", (k,), blocks.blocks[k]) for k in range(4)]
    return specs
