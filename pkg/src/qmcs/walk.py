"""Szegedy walk operators, coherent Gibbs samples, and reflection contracts.

The walk on an ergodic reversible chain P acts on the edge space C^{n*n}:
W = S (2 Pi_A - I): the reflection about span{|x>|p_x>} followed by the
register swap S.  Its eigenphases are +-arccos(sigma) for the singular
values sigma of the discriminant D(x,y) = sqrt(P(x,y)P(y,x)).

Two contracts built on W run in dual modes:

  * approx_reflection -- approximates 2|pi><pi| - I.  `exact_sim` builds the
    phase-estimation construction (b ancilla phase bits, powers of W) and
    exposes its realized error; `idealized` applies the exact reflection and
    charges ceil(c_r * sqrt(tau) * ln(1/eps_r)) walk steps.
  * warm_start_prepare -- walks a cooling schedule 0 = beta_0 < ... < beta_r,
    producing |pi_r> by iterated projection |pi_j> -> |pi_{j+1}>; `idealized`
    returns the exact state and charges the stated
    r * sqrt(tau) * log^2(r/eps) * B log B cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chains import MarkovChain, relaxation_time
from .gibbs import GibbsModel, gibbs_distribution
from .outcome import QueryLedger

__all__ = [
    "WalkOperator",
    "QuantumSample",
    "ReflectionSpec",
    "szegedy_walk",
    "quantum_sample_state",
    "discriminant_matrix",
    "approx_reflection",
    "ApproxReflection",
    "warm_start_prepare",
    "reflection_cost",
    "warm_start_cost",
]

WALK_NODE_CAP = 64


@dataclass(frozen=True)
class WalkOperator:
    W: np.ndarray
    chain: MarkovChain
    node_embedding: np.ndarray  # n^2 x n isometry, columns |x>|p_x>

    def __post_init__(self):
        W = np.asarray(self.W, complex)
        W.setflags(write=False)
        object.__setattr__(self, "W", W)
        resid = np.abs(W.conj().T @ W - np.eye(len(W))).max()
        if resid > 1e-10:
            raise ValueError(f"walk operator not unitary (residual {resid:.2e})")

    @property
    def stationary_edge_state(self) -> np.ndarray:
        return self.node_embedding @ np.sqrt(self.chain.pi)

    def eigensystem(self):
        """Unitary eigendecomposition (phases in (-pi, pi], orthonormal vectors)."""
        T, Z = scipy.linalg.schur(self.W, output="complex")
        eigs = np.diag(T)
        offdiag = np.abs(T - np.diag(eigs)).max()
        if offdiag > 1e-8:
            raise ValueError("walk operator failed to diagonalize unitarily")
        return np.angle(eigs), Z

    @property
    def phase_gap(self) -> float:
        phases, _ = self.eigensystem()
        nz = np.abs(phases)[np.abs(phases) > 1e-9]
        return float(nz.min())


@dataclass(frozen=True)
class QuantumSample:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes)
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError("quantum sample must be normalized")


@dataclass(frozen=True)
class ReflectionSpec:
    epsilon_r: float
    mode: str = "idealized"  # "exact_sim" | "idealized"
    b: int = 0               # 0 = choose from measured phase gap
    c_r: float = 1.0

    def __post_init__(self):
        if self.epsilon_r <= 0:
            raise ValueError("epsilon_r must be positive")
        if self.mode not in ("exact_sim", "idealized"):
            raise ValueError("mode must be 'exact_sim' or 'idealized'")


def discriminant_matrix(c: MarkovChain) -> np.ndarray:
    return np.sqrt(c.P * c.P.T)


def szegedy_walk(c: MarkovChain) -> WalkOperator:
    n = c.n
    if n > WALK_NODE_CAP:
        raise ValueError(f"chain of size {n} exceeds walk cap {WALK_NODE_CAP}")
    relaxation_time(c)  # rejects non-ergodic chains
    sqrtP = np.sqrt(c.P)
    # columns phi_x = e_x (x) sqrt(P(x,:)); W = SWAP * (2 sum |phi_x><phi_x| - I)
    A = np.zeros((n * n, n))
    for x in range(n):
        A[x * n:(x + 1) * n, x] = sqrtP[x]
    swap = np.zeros((n * n, n * n))
    for x in range(n):
        for y in range(n):
            swap[y * n + x, x * n + y] = 1.0
    W = swap @ (2.0 * A @ A.T - np.eye(n * n))
    return WalkOperator(W, c, A)


def spectral_correspondence_residual(w: WalkOperator) -> float:
    """max over discriminant eigenvalues lam of min_theta |cos(theta) - lam|.

    Every eigenvalue lam of D(x,y) = sqrt(P(x,y)P(y,x)) must appear as
    cos(theta) for a pair of walk eigenphases +-theta; comparing cosines
    avoids the arccos conditioning blowup near |lam| = 1.
    """
    phases, _ = w.eigensystem()
    cosines = np.cos(phases)
    lams = np.linalg.eigvalsh(discriminant_matrix(w.chain))
    return float(max(np.abs(cosines - lam).min() for lam in lams))


def quantum_sample_state(m: GibbsModel, beta) -> QuantumSample:
    return QuantumSample(np.sqrt(gibbs_distribution(m, beta)))


def reflection_cost(tau: float, epsilon_r: float, c_r: float = 1.0) -> int:
    """Walk steps charged for one idealized approximate reflection."""
    return math.ceil(c_r * math.sqrt(tau) * math.log(1.0 / epsilon_r))


def warm_start_cost(r: int, tau: float, epsilon_s: float, B: float,
                    c_s: float = 1.0) -> int:
    """Walk steps charged for one idealized warm-start preparation."""
    if r == 0:
        return 0
    log2 = math.log(max(r, 2) / epsilon_s) ** 2
    return math.ceil(c_s * r * math.sqrt(tau) * log2 * B * max(math.log(B), 1.0))


class ApproxReflection:
    """Realized reflection about |pi> on the walk's edge space.

    exact_sim: phase estimation with b phase bits; identical +1 action on the
    phase-0 sector, and per-eigenvector ancilla deviation elsewhere.  The
    scalar r0_j = <0|M_j|0> (ancilla-0 overlap after the reflect-and-undo
    circuit) fully determines both the ancilla-0-postselected action and the
    realized error norm, so the 2^b-dimensional ancilla never needs storing.

    idealized: exact reflection; every application charges walk steps.
    """

    def __init__(self, walk: WalkOperator, spec: ReflectionSpec,
                 ledger: QueryLedger):
        self.walk = walk
        self.spec = spec
        self.ledger = ledger
        self.tau = relaxation_time(walk.chain)
        if spec.mode == "idealized":
            self.charge = reflection_cost(self.tau, spec.epsilon_r, spec.c_r)
            return
        phases, vecs = walk.eigensystem()
        gap = walk.phase_gap
        b = spec.b
        if b <= 0:
            b = (math.ceil(math.log2(2.0 * math.pi / gap))
                 + math.ceil(math.log2(1.0 / spec.epsilon_r)) + 2)
        self.b = b
        T = 2**b
        ys = np.arange(T)
        zero = np.abs(phases) <= 1e-9
        # r0 = 2|T^{-1} sum_y e^{i theta y}|^2 - 1, the <0|...|0> matrix element
        geo = np.abs(np.exp(1j * np.outer(phases, ys)).sum(axis=1) / T) ** 2
        self.r0 = np.where(zero, 1.0, 2.0 * geo - 1.0)
        self.err = np.where(zero, 0.0, np.sqrt(np.maximum(2.0 + 2.0 * self.r0, 0.0)))
        self.phases = phases
        self.vecs = vecs
        self.charge = T  # controlled-W^y powers up to 2^b - 1

    def error_norm(self, edge_vec: np.ndarray) -> float:
        """||R~(v|0^b>) - ((2|pi><pi|-I)v)|0^b>|| for v in the node embedding."""
        if self.spec.mode != "exact_sim":
            return 0.0
        c = self.vecs.conj().T @ edge_vec
        return float(np.sqrt(np.sum(np.abs(c) ** 2 * self.err**2)))

    def apply_postselected(self, edge_vec: np.ndarray) -> np.ndarray:
        """Ancilla-0 block of R~(v|0^b>); idealized mode applies exactly."""
        self.ledger.walk_steps += self.charge
        if self.spec.mode == "idealized":
            pi_e = self.walk.stationary_edge_state
            return 2.0 * pi_e * (pi_e @ edge_vec) - edge_vec
        c = self.vecs.conj().T @ edge_vec
        return self.vecs @ (self.r0 * c)


def approx_reflection(c: MarkovChain, spec: ReflectionSpec,
                      ledger: QueryLedger) -> ApproxReflection:
    return ApproxReflection(szegedy_walk(c), spec, ledger)


def warm_start_prepare(m: GibbsModel, betas, target_index: int,
                       epsilon_s: float, mode: str, ledger: QueryLedger,
                       B: float = None, c_s: float = 1.0) -> QuantumSample:
    """Prepare |pi_{beta_r}> along the schedule prefix betas[0..r], r = target_index.

    Requires consecutive overlaps |<pi_j|pi_{j+1}>|^2 >= 1/B along the prefix.
    idealized: exact amplitudes, with the nominal cost charged to walk_steps.
    exact_sim: iterated ancilla-0 projection (I + R~)/2 through the walks of
    the successive Gibbs chains; the realized state must land within
    epsilon_s of the target (checked by the caller via the returned state).
    """
    from .chains import glauber_chain, matching_chain

    r = target_index
    if not 0 <= r < len(betas):
        raise ValueError("target index outside schedule")
    amps = [np.sqrt(gibbs_distribution(m, b)) for b in betas[: r + 1]]
    overlaps = [float((amps[j] @ amps[j + 1]) ** 2) for j in range(r)]
    if B is None:
        B = 1.0 / min(overlaps) if overlaps else 1.0
    if overlaps and min(overlaps) < 1.0 / B - 1e-12:
        raise ValueError("overlap condition violated along schedule prefix")

    if mode == "idealized":
        taus = [relaxation_time(glauber_chain(m, b) if m.name != "matching"
                                else matching_chain(m, b))
                for b in betas[1: r + 1]]
        tau = max(taus) if taus else 1.0
        ledger.walk_steps += warm_start_cost(r, tau, epsilon_s, B, c_s)
        return QuantumSample(amps[r])

    if mode != "exact_sim":
        raise ValueError("mode must be 'idealized' or 'exact_sim'")
    eps_r = epsilon_s / (4.0 * max(r, 1))
    state = amps[0]
    for j in range(r):
        beta_next = betas[j + 1]
        chain = (glauber_chain(m, beta_next) if m.name != "matching"
                 else matching_chain(m, beta_next))
        refl = approx_reflection(chain, ReflectionSpec(eps_r, "exact_sim"),
                                 ledger)
        edge = refl.walk.node_embedding @ state
        projected = 0.5 * (edge + refl.apply_postselected(edge))
        # back to the node register (the embedding isometry is per-chain)
        state = refl.walk.node_embedding.T @ projected
        norm = np.linalg.norm(state)
        if norm < 1e-12:
            raise ArithmeticError("projection annihilated the state")
        state = state / norm
        state = np.real_if_close(state)
    # fix the global sign so amplitudes stay nonnegative
    if state.sum() < 0:
        state = -state
    return QuantumSample(np.asarray(state, float))
