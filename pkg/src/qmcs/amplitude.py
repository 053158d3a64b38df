"""Exact simulation of the amplitude-estimation primitive.

The estimation procedure with t Grover-type iterations on an amplitude
a = sin^2(pi*omega) induces a closed-form distribution over measurement
outcomes y in {0, ..., t-1}: the squared Dirichlet kernel

    Pr[y | omega] = sin^2(pi t D) / (t^2 sin^2(pi D)),   D = d(y/t, omega),

mixed equally over the conjugate phases +-omega, with estimate
a~ = sin^2(pi y / t).  Here d(x, y) = min_z |z + x - y| is circle distance.

A dense circuit simulation of phase estimation on the two-dimensional
rotation cross-validates the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .outcome import QueryLedger, ValueDistribution, make_distribution

__all__ = [
    "PhasePoint",
    "StabilityBound",
    "amplitude_phase",
    "ae_measurement_probs",
    "ae_outcome_distribution",
    "ae_sample",
    "ae_median",
    "ae_circuit_distribution",
    "arcsin_gap_bound",
    "measurement_tv_bound",
    "stability_failure_bound",
    "outcome_interval_halfwidth",
    "interval_coverage",
    "AE_SUCCESS_PROB",
    "AE_FAIL_PROB",
]

AE_SUCCESS_PROB = 8.0 / math.pi**2
AE_FAIL_PROB = 1.0 - AE_SUCCESS_PROB

_CIRCUIT_T_CAP = 2**14


@dataclass(frozen=True)
class PhasePoint:
    """Amplitude a with its phase omega in [0, 1/2], sin^2(pi*omega) = a."""

    a: float
    omega: float
    t: int

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("amplitude must lie in [0, 1]")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if abs(math.sin(math.pi * self.omega) ** 2 - self.a) > 1e-12:
            raise ValueError("omega inconsistent with amplitude")


@dataclass(frozen=True)
class StabilityBound:
    """Failure-probability bound 3/10 + (pi^2/sqrt(6)) * T * sqrt(gamma)."""

    gamma: float
    T: int

    @property
    def bound(self) -> float:
        return 0.3 + (math.pi**2 / math.sqrt(6.0)) * self.T * math.sqrt(self.gamma)


def amplitude_phase(a: float) -> float:
    """Phase omega in [0, 1/2] with sin^2(pi*omega) = a."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    return math.asin(math.sqrt(a)) / math.pi


def _circle_dist(x, y):
    return np.abs(np.mod(x - y + 0.5, 1.0) - 0.5)


def _kernel(delta: np.ndarray, t: int) -> np.ndarray:
    """Squared Dirichlet kernel with the on-grid limit value 1."""
    out = np.ones_like(delta)
    off = delta != 0.0
    s = np.sin(np.pi * delta[off])
    out[off] = (np.sin(np.pi * t * delta[off]) / (t * s)) ** 2
    return out


def ae_measurement_probs(a: float, t: int) -> np.ndarray:
    """Length-t probability vector over raw outcomes y."""
    omega = amplitude_phase(a)
    y = np.arange(t) / t
    probs = 0.5 * _kernel(_circle_dist(y, omega), t) + 0.5 * _kernel(_circle_dist(y, -omega), t)
    total = probs.sum()
    if abs(total - 1.0) > 1e-10:
        raise ArithmeticError(f"kernel normalization drifted: {total}")
    return probs / total


def _estimate_values(t: int) -> np.ndarray:
    """a~ = sin^2(pi*y/t), computed from min(y, t-y) so conjugates merge exactly."""
    y = np.arange(t)
    y_eff = np.minimum(y, t - y)
    return np.sin(np.pi * y_eff / t) ** 2


@lru_cache(maxsize=4096)
def _outcome_distribution_cached(a: float, t: int) -> ValueDistribution:
    probs = ae_measurement_probs(a, t)
    return make_distribution(zip(_estimate_values(t), probs))


def ae_outcome_distribution(a: float, t: int) -> ValueDistribution:
    """Closed-form distribution of the estimate a~ for amplitude a, t iterations."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    if t < 1:
        raise ValueError("t must be >= 1")
    return _outcome_distribution_cached(float(a), int(t))


def _draw_outcome(omega: float, t: int, rng: np.random.Generator) -> int:
    """Sample y from the kernel at phase omega without materializing all t probs.

    Outcomes are enumerated outward from the nearest grid point, so the
    inverse-CDF scan usually stops after a handful of terms.
    """
    u = rng.random()
    center = int(round(t * omega)) % t
    acc = 0.0
    last = center
    chunk = 64
    # offsets 0, 1, -1, 2, -2, ... cover all residues mod t
    max_off = t // 2 + 1
    for start in range(0, max_off + 1, chunk):
        offs = np.arange(start, min(start + chunk, max_off + 1))
        signed = np.empty(2 * len(offs), dtype=np.int64)
        signed[0::2] = offs
        signed[1::2] = -offs
        ys = np.mod(center + signed, t)
        # drop duplicate residues (offset 0 and t/2 appear twice)
        _, first = np.unique(ys, return_index=True)
        ys = ys[np.sort(first)]
        probs = _kernel(_circle_dist(ys / t, omega), t) / 1.0
        for yv, pv in zip(ys, probs):
            acc += pv
            last = int(yv)
            if acc >= u:
                return last
    return last


def ae_sample(a: float, t: int, rng: np.random.Generator, ledger: QueryLedger) -> float:
    """One draw of the estimate a~; charges t reflections and one A / A^-1 pair."""
    if not 0.0 <= a <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    ledger.a_uses += 1
    ledger.a_inv_uses += 1
    ledger.reflection_uses += t
    omega = amplitude_phase(a)
    if rng.random() < 0.5:
        omega = (1.0 - omega) % 1.0  # conjugate phase -omega
    y = _draw_outcome(omega, t, rng)
    y_eff = min(y, t - y)
    return float(math.sin(math.pi * y_eff / t) ** 2)


def ae_median(a: float, t: int, reps: int, rng: np.random.Generator,
              ledger: QueryLedger) -> float:
    """Median of reps independent ae_sample draws (reps must be odd)."""
    if reps < 1 or reps % 2 == 0:
        raise ValueError("reps must be a positive odd integer")
    draws = [ae_sample(a, t, rng, ledger) for _ in range(reps)]
    return float(np.median(draws))


def ae_circuit_distribution(a: float, t: int) -> ValueDistribution:
    """Dense phase-estimation simulation on the 2D rotation with phases +-omega.

    Register of size t (general Fourier transform over Z_t), target qubit in
    the rotation plane.  Must match ae_outcome_distribution within 1e-8 TV.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    if t > _CIRCUIT_T_CAP:
        raise ValueError(f"t={t} exceeds dense simulation cap {_CIRCUIT_T_CAP}")
    omega = amplitude_phase(a)
    theta = math.pi * omega
    psi = np.array([math.cos(theta), math.sin(theta)])  # (bad, good) plane
    # controlled powers of the rotation by angle 2*pi*omega
    ys = np.arange(t)
    angles = 2.0 * math.pi * omega * ys
    state = np.empty((t, 2), dtype=complex)
    # rotation^y applied to psi stays real-rotational; build directly
    state[:, 0] = np.cos(angles) * psi[0] - np.sin(angles) * psi[1]
    state[:, 1] = np.sin(angles) * psi[0] + np.cos(angles) * psi[1]
    state /= math.sqrt(t)
    # inverse Fourier transform over Z_t on the register
    f_inv = np.exp(-2j * math.pi * np.outer(ys, ys) / t) / math.sqrt(t)
    state = f_inv @ state
    probs = np.abs(state[:, 0]) ** 2 + np.abs(state[:, 1]) ** 2
    probs = probs / probs.sum()
    return make_distribution(zip(_estimate_values(t), probs))


def arcsin_gap_bound(x: float, y: float):
    """(|arcsin x - arcsin y|, (pi/2) sqrt(|x^2 - y^2|)); lhs <= rhs always."""
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError("arguments must lie in [0, 1]")
    lhs = abs(math.asin(x) - math.asin(y))
    rhs = 0.5 * math.pi * math.sqrt(abs(x * x - y * y))
    return lhs, rhs


def measurement_tv_bound(mu_a: float, mu_b: float, t: int) -> float:
    """Upper bound (pi^2 / (2 sqrt(3))) * t * sqrt(|mu_a - mu_b|) on the outcome TV."""
    return (math.pi**2 / (2.0 * math.sqrt(3.0))) * t * math.sqrt(abs(mu_a - mu_b))


def stability_failure_bound(gamma: float, T: int) -> float:
    """Failure bound under a gamma-TV input perturbation after T operator uses."""
    return StabilityBound(gamma, T).bound


def outcome_interval_halfwidth(a: float, t: int) -> float:
    """Half-width 2 pi sqrt(a(1-a))/t + pi^2/t^2 of the guaranteed interval."""
    return 2.0 * math.pi * math.sqrt(a * (1.0 - a)) / t + math.pi**2 / t**2


def interval_coverage(a: float, t: int, halfwidth: float = None) -> float:
    """Exact kernel mass of {|a~ - a| <= halfwidth} (default: guaranteed interval)."""
    if halfwidth is None:
        halfwidth = outcome_interval_halfwidth(a, t)
    d = ae_outcome_distribution(a, t)
    inside = np.abs(d.values - a) <= halfwidth * (1.0 + 1e-12) + 1e-15
    return float(d.probs[inside].sum())
