"""Partition-function estimation through Chebyshev cooling schedules.

Z(inf) (or, for matchings, Z(0)) is reached as a telescoping product of
ratios alpha_i = Z(beta_{i+1})/Z(beta_i), each the mean of a ratio random
variable Y_i with relative second moment bounded by the schedule's B.
Schedules are built greedily against the exact Z oracle: from beta_i,
bisect the largest beta_{i+1} keeping the Chebyshev ratio at most B
(monotone in beta_{i+1} because ln Z is convex), terminating as soon as
the pair (beta_i, inf) itself satisfies Z(beta_i)/Z(inf) <= B.

The matchings pipeline runs the schedule in reverse: the anchor is
Z(inf) = 1 (the empty matching) and each Y_i is sampled under the colder
distribution.  The terminal pair (beta_{l-1}, inf) cannot use the reversed
ratio variable (its relative second moment diverges), so that single ratio
is estimated forward -- the ground-state indicator under pi_{beta_{l-1}} --
and inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gibbs import GibbsModel, exact_partition, gibbs_distribution, overlap_squared
from .mean import estimate_mean_relative, power_median, powering_reps
from .outcome import QueryLedger, ValueDistribution, make_distribution
from .walk import reflection_cost, warm_start_cost

__all__ = [
    "CoolingSchedule",
    "PartitionEstimate",
    "ScheduleError",
    "ratio_variable",
    "reversed_ratio_variable",
    "chebyshev_ratio",
    "build_schedule",
    "verify_schedule",
    "estimate_partition",
    "classical_baseline",
]

BETA_CAP = 1e6
_BISECT_ITERS = 60


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class CoolingSchedule:
    betas: tuple
    B: float
    direction: str = "forward"  # "forward" | "reversed"

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.betas) < 2:
            raise ScheduleError("schedule needs at least two temperatures")
        if any(b2 <= b1 for b1, b2 in zip(self.betas, self.betas[1:])):
            raise ScheduleError("betas must be strictly increasing")
        if self.betas[0] != 0.0:
            raise ScheduleError("schedule must start at beta = 0")
        if self.B <= 1.0:
            raise ScheduleError("B must exceed 1")
        if self.direction not in ("forward", "reversed"):
            raise ScheduleError("direction must be 'forward' or 'reversed'")

    @property
    def ell(self) -> int:
        return len(self.betas) - 1


@dataclass
class PartitionEstimate:
    z_value: float
    ratios: list
    epsilon: float
    delta: float
    ledger: QueryLedger = field(default_factory=QueryLedger)
    meta: dict = field(default_factory=dict)


def ratio_variable(m: GibbsModel, beta_i, beta_j) -> ValueDistribution:
    """Y(x) = e^{-(beta_j - beta_i) H(x)} with x ~ pi_{beta_i}.

    E[Y] = Z(beta_j)/Z(beta_i); E[Y^2]/E[Y]^2 = Z(2beta_j - beta_i)
    Z(beta_i)/Z(beta_j)^2.  beta_j = inf gives the ground-state indicator.
    """
    if not beta_i < beta_j:
        raise ScheduleError("requires beta_i < beta_j")
    pi = gibbs_distribution(m, beta_i)
    if beta_j == math.inf:
        values = (m.energies == 0).astype(float)
    else:
        values = np.exp(-(beta_j - beta_i) * m.energies)
    return make_distribution(zip(values, pi))


def reversed_ratio_variable(m: GibbsModel, beta_i, beta_j) -> ValueDistribution:
    """Y(x) = e^{+(beta_j - beta_i) H(x)} with x ~ pi_{beta_j}; E[Y] = Z(beta_i)/Z(beta_j)."""
    if not beta_i < beta_j:
        raise ScheduleError("requires beta_i < beta_j")
    if beta_j == math.inf:
        raise ScheduleError("reversed ratio variable undefined at beta_j = inf")
    pi = gibbs_distribution(m, beta_j)
    values = np.exp((beta_j - beta_i) * m.energies)
    return make_distribution(zip(values, pi))


def chebyshev_ratio(m: GibbsModel, beta_i, beta_j, direction="forward") -> float:
    """The relative second moment of the ratio variable for the pair.

    forward:  Z(2 beta_j - beta_i) Z(beta_i) / Z(beta_j)^2
    reversed: Z(2 beta_i - beta_j) Z(beta_j) / Z(beta_i)^2
    A terminal pair (beta_i, inf) evaluates Z(beta_i)/Z(inf) in either
    direction (the reversed form diverges there; see estimate_partition).
    """
    if beta_j == math.inf:
        return exact_partition(m, beta_i) / exact_partition(m, math.inf)
    zi, zj = exact_partition(m, beta_i), exact_partition(m, beta_j)
    if direction == "forward":
        return exact_partition(m, 2.0 * beta_j - beta_i) * zi / zj**2
    return exact_partition(m, 2.0 * beta_i - beta_j) * zj / zi**2


def build_schedule(m: GibbsModel, B: float, direction="forward") -> CoolingSchedule:
    if B <= 1.0:
        raise ScheduleError("B must exceed 1")
    if exact_partition(m, math.inf) < 1.0:
        raise ScheduleError("model has no ground states to anchor the schedule")
    betas = [0.0]
    while True:
        b_i = betas[-1]
        if exact_partition(m, b_i) / exact_partition(m, math.inf) <= B:
            betas.append(math.inf)
            return CoolingSchedule(tuple(betas), B, direction)
        lo, hi = b_i, max(2.0 * b_i, 1.0)
        # expand until the monotone ratio crosses B
        while chebyshev_ratio(m, b_i, hi, direction) <= B:
            hi *= 2.0
            if hi > BETA_CAP:
                raise ScheduleError("terminal condition unreachable below beta cap")
        for _ in range(_BISECT_ITERS):
            mid = (lo + hi) / 2.0
            if chebyshev_ratio(m, b_i, mid, direction) <= B:
                lo = mid
            else:
                hi = mid
        if lo <= b_i:
            raise ScheduleError("schedule stalled: no admissible next beta")
        betas.append(lo)


def verify_schedule(m: GibbsModel, s: CoolingSchedule) -> dict:
    """Per-pair Chebyshev ratios, chi-squared values, and overlap checks."""
    pairs = []
    ok = True
    for i in range(s.ell):
        bi, bj = s.betas[i], s.betas[i + 1]
        ratio = chebyshev_ratio(m, bi, bj, s.direction)
        terminal = bj == math.inf
        # the forward ratio minus 1 equals chi^2(pi_j, pi_i)
        chi2 = chebyshev_ratio(m, bi, bj, "forward") - 1.0
        ov = overlap_squared(m, bi, bj)
        pair_ok = ratio <= s.B * (1.0 + 1e-12) and ov >= 1.0 / s.B - 1e-12
        ok = ok and pair_ok
        pairs.append({
            "beta_i": bi, "beta_j": bj, "ratio": ratio, "chi_squared": chi2,
            "overlap_squared": ov, "terminal_pair": terminal, "ok": pair_ok,
        })
    return {"ok": ok, "B": s.B, "direction": s.direction, "ell": s.ell,
            "pairs": pairs}


def _walk_taus(m: GibbsModel, s: CoolingSchedule):
    from .chains import glauber_chain, matching_chain, relaxation_time

    taus = []
    for beta in s.betas[:-1]:
        chain = (matching_chain(m, beta) if m.name == "matching"
                 else glauber_chain(m, beta))
        taus.append(relaxation_time(chain))
    return taus


def estimate_partition(m: GibbsModel, s: CoolingSchedule, epsilon: float,
                       delta: float, mode: str, rng: np.random.Generator,
                       ledger: QueryLedger) -> PartitionEstimate:
    """Telescoping estimate of Z(inf) (forward) or Z(0) (reversed).

    Each ratio is estimated by the relative-error mean estimator at accuracy
    epsilon/(2*ell), median-amplified from per-run success 3/4 to delta/ell.
    Walk modes convert each ratio's oracle charges into walk steps: every
    state preparation becomes a warm start along the schedule prefix and
    every reflection an approximate reflection on that rung's chain.
    """
    if mode not in ("ideal_sampling", "walk_idealized", "walk_exact_sim"):
        raise ValueError(f"unknown mode {mode!r}")
    report = verify_schedule(m, s)
    if not report["ok"]:
        raise ScheduleError("schedule fails verification")
    ell = s.ell
    eps_i = epsilon / (2.0 * ell)
    delta_i = delta / ell
    reps = powering_reps(0.25, delta_i)
    taus = _walk_taus(m, s) if mode != "ideal_sampling" else None
    exact_sim_charge = None
    if mode == "walk_exact_sim":
        exact_sim_charge = _exact_sim_reflection_charges(m, s, eps_i)

    ratios = []
    for i in range(ell):
        bi, bj = s.betas[i], s.betas[i + 1]
        terminal = bj == math.inf
        if s.direction == "forward" or terminal:
            dist = ratio_variable(m, bi, bj)
            rung = i  # samples drawn under pi_{beta_i}
        else:
            dist = reversed_ratio_variable(m, bi, bj)
            rung = i + 1
        before = ledger.snapshot()

        def run():
            return estimate_mean_relative(dist, s.B, eps_i, rng, ledger)

        alpha = power_median(run, gamma=0.25, delta=delta_i)
        if mode != "ideal_sampling":
            _convert_walk_charges(ledger, before, taus, rung, s, eps_i,
                                  exact_sim_charge)
        if s.direction == "reversed" and terminal:
            if alpha <= 0.0:
                raise ArithmeticError("terminal ratio estimate collapsed to 0")
            alpha = 1.0 / alpha  # estimated Z(inf)/Z(beta) inverted
        ratios.append(float(alpha))

    if s.direction == "forward":
        z = exact_partition(m, 0.0) * float(np.prod(ratios))
        target = "Z(inf)"
    else:
        z = exact_partition(m, math.inf) * float(np.prod(ratios))
        target = "Z(0)"
    return PartitionEstimate(z_value=float(z), ratios=ratios, epsilon=epsilon,
                             delta=delta, ledger=ledger.snapshot(),
                             meta={"mode": mode, "target": target,
                                   "reps_per_ratio": reps})


def _convert_walk_charges(ledger: QueryLedger, before: QueryLedger, taus,
                          rung: int, s: CoolingSchedule, eps_i: float,
                          exact_sim_charge):
    """Translate oracle uses into walk steps for one ratio estimation.

    Each A / A^-1 use becomes a warm-start preparation of |pi_rung> along
    the schedule prefix; each reflection becomes an approximate reflection
    on rung's chain.
    """
    da = (ledger.a_uses - before.a_uses) + (ledger.a_inv_uses - before.a_inv_uses)
    dr = ledger.reflection_uses - before.reflection_uses
    tau = taus[min(rung, len(taus) - 1)]
    # reflection accuracy gamma/R: the total coherent error R*eps_r stays a
    # constant slice of the failure budget however many reflections run
    eps_r = 0.1 / max(dr, 1)
    if exact_sim_charge is not None:
        per_reflection = exact_sim_charge[min(rung, len(exact_sim_charge) - 1)]
    else:
        per_reflection = reflection_cost(tau, eps_r)
    prep = warm_start_cost(rung, max(taus[: max(rung, 1)], default=tau),
                           eps_r, s.B)
    ledger.walk_steps += da * prep + dr * per_reflection


def _exact_sim_reflection_charges(m: GibbsModel, s: CoolingSchedule,
                                  eps_i: float):
    """Per-rung cost (2^b controlled walk powers) of the simulated reflection."""
    from .chains import glauber_chain, matching_chain
    from .walk import ReflectionSpec, approx_reflection

    charges = []
    scratch = QueryLedger()
    for beta in s.betas[:-1]:
        chain = (matching_chain(m, beta) if m.name == "matching"
                 else glauber_chain(m, beta))
        refl = approx_reflection(chain, ReflectionSpec(min(0.25, eps_i),
                                                       "exact_sim"), scratch)
        charges.append(refl.charge)
    return charges


def classical_baseline(m: GibbsModel, s: CoolingSchedule, epsilon: float,
                       rng: np.random.Generator, ledger: QueryLedger,
                       sampling: str = "ideal") -> PartitionEstimate:
    """Product of per-ratio sample means, 16*B*ell/eps^2 samples per ratio."""
    report = verify_schedule(m, s)
    if not report["ok"]:
        raise ScheduleError("schedule fails verification")
    ell = s.ell
    n = math.ceil(16.0 * s.B * ell / epsilon**2)
    ratios = []
    for i in range(ell):
        bi, bj = s.betas[i], s.betas[i + 1]
        terminal = bj == math.inf
        if s.direction == "forward" or terminal:
            dist = ratio_variable(m, bi, bj)
            beta_sample = bi
        else:
            dist = reversed_ratio_variable(m, bi, bj)
            beta_sample = bj
        if sampling == "ideal":
            from .outcome import classical_sample_block
            draws = classical_sample_block(dist, n, rng, ledger)
            alpha = float(np.mean(draws))
        elif sampling == "mix":
            alpha = _mix_sampled_mean(m, beta_sample, bi, bj, s.direction,
                                      terminal, n, rng, ledger)
        else:
            raise ValueError(f"unknown sampling {sampling!r}")
        if s.direction == "reversed" and terminal:
            if alpha <= 0.0:
                raise ArithmeticError("terminal ratio estimate collapsed to 0")
            alpha = 1.0 / alpha
        ratios.append(alpha)
    anchor = (exact_partition(m, 0.0) if s.direction == "forward"
              else exact_partition(m, math.inf))
    return PartitionEstimate(z_value=float(anchor * np.prod(ratios)),
                             ratios=ratios, epsilon=epsilon, delta=0.25,
                             ledger=ledger.snapshot(),
                             meta={"mode": "classical", "sampling": sampling,
                                   "samples_per_ratio": n})


def _mix_sampled_mean(m, beta_sample, bi, bj, direction, terminal, n, rng,
                      ledger):
    """Estimate the ratio mean from finitely-mixed chain samples."""
    from .chains import glauber_chain, matching_chain, mix_sample, mixing_steps

    chain = (matching_chain(m, beta_sample) if m.name == "matching"
             else glauber_chain(m, beta_sample))
    steps = mixing_steps(chain, 0.01)
    gap = bj - bi
    total = 0.0
    for _ in range(n):
        start = int(rng.integers(chain.n))
        x = mix_sample(chain, start, steps, rng, ledger)
        h = m.energies[x]
        ledger.classical_samples += 1
        if direction == "forward" or terminal:
            total += float(h == 0) if bj == math.inf else math.exp(-gap * h)
        else:
            total += math.exp(gap * h)
    return total / n
