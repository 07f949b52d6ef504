"""
Generalized amplitude damping channels and the classical operator-sum oracle.

The channel at time ``t`` maps the initial density matrix directly,
``rho(t) = sum_i M_i(t) rho(0) M_i(t)^H``, with ``eta = exp(-gamma t)``::

    M0 = sqrt(lam)   [[1, 0], [0, sqrt(eta)]]
    M1 = sqrt(lam)   [[0, sqrt(1 - eta)], [0, 0]]
    M2 = sqrt(1-lam) [[sqrt(eta), 0], [0, 1]]
    M3 = sqrt(1-lam) [[0, 0], [sqrt(1 - eta), 0]]

``lam = 1`` is zero temperature; ``lam = 0.5`` is the infinite-temperature limit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DimensionError,
    ParameterError,
    adjoint,
    as_matrix,
    eig_hermitian,
    max_abs,
)

GAMMA_DEFAULT = 1.52e9  # s^-1
CPTP_TOL = 1e-12
DENSITY_TOL = 1e-12
POSITIVITY_TOL = 1e-10

# (1/4) [[1, 1], [1, 3]]
RHO0_DEFAULT = np.array([[0.25, 0.25], [0.25, 0.75]], dtype=complex)


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    label: str = ""

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]


@dataclass(frozen=True)
class GADParams:
    gamma: float
    lam: float
    t: float

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if not (np.isfinite(self.t) and self.t >= 0):
            raise ParameterError(f"t must be >= 0, got {self.t}")
        if not 0 <= self.lam <= 1:
            raise ParameterError(f"lambda must lie in [0, 1], got {self.lam}")


def gad_kraus(params: GADParams) -> KrausChannel:
    """The four generalized amplitude damping operators at ``params.t``."""
    eta = math.exp(-params.gamma * params.t)
    a, b = math.sqrt(params.lam), math.sqrt(1 - params.lam)
    se, sd = math.sqrt(eta), math.sqrt(1 - eta)
    ops = (
        a * np.array([[1, 0], [0, se]], dtype=complex),
        a * np.array([[0, sd], [0, 0]], dtype=complex),
        b * np.array([[se, 0], [0, 1]], dtype=complex),
        b * np.array([[0, 0], [sd, 0]], dtype=complex),
    )
    return KrausChannel(ops, label=f"gad(lam={params.lam:g})")


def lambda_from_beta(beta: float) -> float:
    """``1 / (1 + exp(-beta))``; ``beta = inf`` is zero temperature."""
    beta = float(beta)
    if math.isnan(beta) or beta < 0:
        raise ParameterError(f"beta must be non-negative, got {beta}")
    if math.isinf(beta):
        return 1.0
    return 1.0 / (1.0 + math.exp(-beta))


def cptp_check(channel: KrausChannel) -> float:
    """Max-abs residual of ``sum M^H M - I``."""
    acc = sum(adjoint(m) @ m for m in channel.operators)
    return max_abs(acc - np.eye(channel.dim))


def check_density_matrix(rho) -> np.ndarray:
    rho = as_matrix(rho)
    if max_abs(rho - adjoint(rho)) > DENSITY_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > DENSITY_TOL:
        raise ValueError(f"density matrix has trace {np.trace(rho).real!r}")
    w = np.linalg.eigvalsh((rho + adjoint(rho)) / 2)
    if w.min() < -POSITIVITY_TOL:
        raise ValueError(f"density matrix has negative eigenvalue {w.min()!r}")
    return rho


def kraus_evolve_oracle(rho0, channel: KrausChannel) -> np.ndarray:
    rho0 = as_matrix(rho0)
    if rho0.shape[0] != channel.dim:
        raise DimensionError(f"rho has dimension {rho0.shape[0]}, channel acts on {channel.dim}")
    return sum(m @ rho0 @ adjoint(m) for m in channel.operators)


@dataclass(frozen=True)
class Ensemble:
    """Convex mixture of pure states ``sum_k w_k |psi_k><psi_k|``."""

    weights: tuple[float, ...]
    states: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.states) or not self.weights:
            raise ValueError("ensemble needs matching, non-empty weights and states")
        if any(not 0 < w <= 1 for w in self.weights):
            raise ValueError("ensemble weights must lie in (0, 1]")
        if abs(sum(self.weights) - 1) > 1e-12:
            raise ValueError(f"ensemble weights sum to {sum(self.weights)!r}")

    @property
    def members(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.weights, self.states))

    def density_matrix(self) -> np.ndarray:
        return sum(w * np.outer(v, np.conj(v)) for w, v in self.members)


def ensemble_decompose(rho0) -> Ensemble:
    """Eigen-ensemble of ``rho0``: weights are the eigenvalues above 1e-12."""
    rho0 = check_density_matrix(rho0)
    es = eig_hermitian(rho0)
    keep = [k for k, w in enumerate(es.eigenvalues) if w > 1e-12]
    # largest weight first
    keep.sort(key=lambda k: -es.eigenvalues[k])
    weights = np.array([es.eigenvalues[k] for k in keep])
    weights = weights / weights.sum()
    return Ensemble(
        weights=tuple(float(w) for w in weights),
        states=tuple(es.eigenvectors[:, k].copy() for k in keep),
    )


def plus_one_ensemble() -> Ensemble:
    """``{(1/2, |+>), (1/2, |1>)}``, an easy-to-prepare mixture for the default ``rho0``."""
    s = 1 / math.sqrt(2)
    return Ensemble(
        weights=(0.5, 0.5),
        states=(np.array([s, s], dtype=complex), np.array([0, 1], dtype=complex)),
    )


def make_ensemble(rho0, kind: str = "eigen") -> Ensemble:
    """Ensemble preset ``"eigen"`` or ``"plus-one"``; the latter must reproduce ``rho0``."""
    if kind == "eigen":
        return ensemble_decompose(rho0)
    if kind == "plus-one":
        ens = plus_one_ensemble()
        if max_abs(ens.density_matrix() - as_matrix(rho0)) > 1e-10:
            raise ValueError("the plus-one ensemble only reproduces rho0 = (1/4)[[1,1],[1,3]]")
        return ens
    raise ValueError(f"unknown ensemble {kind!r}")


# --- presets ----------------------------------------------------------------

_BETA_PRESET = re.compile(r"^amp-damp\(beta=([^)]+)\)$")


def preset_lambda(name: str) -> float:
    """Equilibrium parameter for a channel preset name."""
    if name == "amp-damp-zero-T":
        return 1.0
    if name == "amp-damp-infinite-T":
        return 0.5
    m = _BETA_PRESET.match(name)
    if m:
        try:
            beta = float(m.group(1))
        except ValueError:
            raise ParameterError(f"cannot parse beta in {name!r}") from None
        return lambda_from_beta(beta)
    raise ParameterError(
        f"unknown channel {name!r}; expected amp-damp-zero-T, amp-damp-infinite-T or amp-damp(beta=...)"
    )


def preset_channel(name: str, t: float, gamma: float = GAMMA_DEFAULT) -> KrausChannel:
    ch = gad_kraus(GADParams(gamma=gamma, lam=preset_lambda(name), t=t))
    return KrausChannel(ch.operators, label=name)
