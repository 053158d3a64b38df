"""Command-line front end: experiment runner and reporting shell.

Every subcommand emits JSON (or CSV for tables) on stdout, with a fixed key
order so identical seeds give byte-identical output.  Exit codes: 1 for bad
configuration, 2 for I/O problems, 3 for a detected contract violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .chains import ChainError, glauber_chain, matching_chain
from .gibbs import (GibbsModel, colouring_model, exact_partition,
                    gibbs_distribution, ising_model, matching_model, read_graph)
from .mean import (bounded_mean_constant, classical_mean_chebyshev,
                   estimate_mean_bounded, estimate_mean_l2,
                   estimate_mean_relative, estimate_mean_variance, l2_constant,
                   t_for_additive_error)
from .amplitude import interval_coverage, outcome_interval_halfwidth
from .outcome import DistributionError, QueryLedger, make_distribution
from .partition import (ScheduleError, build_schedule, classical_baseline,
                        estimate_partition, verify_schedule)
from .tvd import estimate_tvd
from .walk import szegedy_walk, spectral_correspondence_residual

SCHEMA = 1

EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_CONTRACT = 3


class ContractViolation(RuntimeError):
    pass


def _emit(obj, out=None):
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _constants():
    return {"C": bounded_mean_constant(), "D": l2_constant(),
            "c_r": 1.0, "c_s": 1.0}


def _finite(x):
    """JSON-safe float (math.inf serializes as the string 'inf')."""
    return "inf" if x == math.inf else x


def _load_distribution(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise SystemExit(_fail(EXIT_IO, f"cannot read {path}: {exc}"))
    except json.JSONDecodeError as exc:
        raise SystemExit(_fail(EXIT_IO, f"bad JSON in {path}: {exc}"))
    try:
        return make_distribution(payload["support"])
    except (KeyError, TypeError, DistributionError) as exc:
        raise SystemExit(_fail(EXIT_CONFIG, f"bad distribution in {path}: {exc}"))


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_model(args):
    try:
        g = read_graph(args.graph)
    except OSError as exc:
        raise SystemExit(_fail(EXIT_IO, f"cannot read graph: {exc}"))
    except ValueError as exc:
        raise SystemExit(_fail(EXIT_CONFIG, f"bad graph file: {exc}"))
    if args.model == "ising":
        return ising_model(g)
    if args.model == "colouring":
        return colouring_model(g, args.k)
    if args.model == "matching":
        return matching_model(g)
    raise SystemExit(_fail(EXIT_CONFIG, f"unknown model {args.model}"))


def _chain_for(m: GibbsModel, beta: float):
    return matching_chain(m, beta) if m.name == "matching" else glauber_chain(m, beta)


def _parse_betas(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        out.append(math.inf if tok in ("inf", "Inf") else float(tok))
    return out


def cmd_mean(args):
    d = _load_distribution(args.dist)
    rng = np.random.default_rng(args.seed)
    ledger = QueryLedger()
    try:
        if args.method == "bounded":
            t = args.t or t_for_additive_error(args.eps)
            est = estimate_mean_bounded(d, t, args.delta, rng, ledger)
        elif args.method == "l2":
            est = estimate_mean_l2(d, args.eps, rng, ledger)
        elif args.method == "variance":
            est = estimate_mean_variance(d, args.sigma, args.eps, rng, ledger)
        elif args.method == "relative":
            est = estimate_mean_relative(d, args.B, args.eps, rng, ledger)
        elif args.method == "classical":
            est = classical_mean_chebyshev(d, args.sigma, args.eps, rng, ledger)
        else:
            return _fail(EXIT_CONFIG, f"unknown method {args.method}")
    except (ValueError, ArithmeticError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    _emit({"schema": SCHEMA, "version": __version__, "method": args.method,
           "seed": args.seed, "value": est.value,
           "target_error": est.target_error, "error_kind": est.error_kind,
           "confidence": est.confidence, "ledger": est.ledger.as_dict(),
           "constants": _constants()}, args.out)
    return 0


def cmd_ae_check(args):
    cov = interval_coverage(args.a, args.t)
    _emit({"schema": SCHEMA, "a": args.a, "t": args.t, "coverage": cov,
           "bound": outcome_interval_halfwidth(args.a, args.t),
           "success_floor": 8.0 / math.pi**2}, args.out)
    if cov < 8.0 / math.pi**2:
        return EXIT_CONTRACT
    return 0


def cmd_model(args):
    m = _load_model(args)
    betas = _parse_betas(args.betas)
    lines = ["beta,Z,Z_unshifted"]
    n_edges = len(m.graph.edges)
    for beta in betas:
        z = exact_partition(m, beta)
        if m.name == "ising" and beta != math.inf:
            # unshifted convention H = -sum z_u z_v: Z_u(beta) = e^{beta m} Z(2 beta)
            zu = math.exp(beta * n_edges) * exact_partition(m, 2.0 * beta)
        else:
            zu = z
        lines.append(f"{_finite(beta)},{z!r},{zu!r}")
    text = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_chain(args):
    m = _load_model(args)
    try:
        c = _chain_for(m, args.beta)
        tau = c.tau
    except ChainError as exc:
        return _fail(EXIT_CONTRACT, str(exc))
    pi = gibbs_distribution(m, args.beta)
    _emit({"schema": SCHEMA, "model": args.model, "beta": _finite(args.beta),
           "tau": tau, "lambda1": c.lambda1,
           "stationarity_residual": float(np.abs(pi @ c.P - pi).max()),
           "row_sum_residual": float(np.abs(c.P.sum(axis=1) - 1.0).max())},
          args.out)
    return 0


def cmd_walk_check(args):
    m = _load_model(args)
    try:
        c = _chain_for(m, args.beta)
        w = szegedy_walk(c)
    except (ChainError, ValueError) as exc:
        return _fail(EXIT_CONTRACT, str(exc))
    phases, _ = w.eigensystem()
    resid = float(np.abs(w.W.conj().T @ w.W - np.eye(len(w.W))).max())
    _emit({"schema": SCHEMA, "model": args.model, "beta": _finite(args.beta),
           "phases": sorted(round(p, 12) for p in phases),
           "phase_gap": w.phase_gap, "unitarity_residual": resid,
           "spectral_residual": spectral_correspondence_residual(w)}, args.out)
    return 0


def cmd_schedule(args):
    m = _load_model(args)
    try:
        s = build_schedule(m, args.B, args.direction)
    except ScheduleError as exc:
        return _fail(EXIT_CONTRACT, str(exc))
    report = verify_schedule(m, s)
    if not report["ok"]:
        return _fail(EXIT_CONTRACT, "schedule failed verification")
    _emit({"schema": SCHEMA, "model": args.model, "B": args.B,
           "direction": s.direction, "ell": s.ell,
           "betas": [_finite(b) for b in s.betas],
           "pairs": [{**p, "beta_j": _finite(p["beta_j"])}
                     for p in report["pairs"]],
           "source": "oracle schedule"}, args.out)
    return 0


def cmd_partition(args):
    m = _load_model(args)
    direction = args.direction or ("reversed" if args.model == "matching"
                                   else "forward")
    rng = np.random.default_rng(args.seed)
    ledger = QueryLedger()
    try:
        s = build_schedule(m, args.B, direction)
        if args.mode == "classical":
            pe = classical_baseline(m, s, args.eps, rng, ledger)
        else:
            pe = estimate_partition(m, s, args.eps, args.delta, args.mode,
                                    rng, ledger)
    except (ScheduleError, ValueError, ArithmeticError) as exc:
        return _fail(EXIT_CONTRACT, str(exc))
    _emit({"schema": SCHEMA, "model": args.model, "seed": args.seed,
           "B": args.B, "eps": args.eps, "delta": args.delta,
           "mode": args.mode, "direction": direction,
           "betas": [_finite(b) for b in s.betas], "z_value": pe.z_value,
           "ratios": pe.ratios, "ledger": pe.ledger.as_dict(),
           "meta": pe.meta, "constants": _constants()}, args.out)
    return 0


def cmd_tvd(args):
    p = _load_distribution(args.p)
    q = _load_distribution(args.q)
    rng = np.random.default_rng(args.seed)
    ledger = QueryLedger()
    try:
        est = estimate_tvd(p.probs, q.probs, args.eps, args.delta, rng, ledger)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    _emit({"schema": SCHEMA, "seed": args.seed, "eps": args.eps,
           "delta": args.delta, "value": est.value,
           "confidence": est.confidence, "ledger": est.ledger.as_dict(),
           "constants": _constants()}, args.out)
    return 0


def _bench_trial(payload):
    d_pairs, method, eps, sigma, bound, seed = payload
    d = make_distribution(d_pairs)
    rng = np.random.default_rng(seed)
    ledger = QueryLedger()
    if method == "bounded":
        est = estimate_mean_bounded(d, t_for_additive_error(eps), 0.1, rng, ledger)
    elif method == "l2":
        est = estimate_mean_l2(d, eps, rng, ledger)
    elif method == "variance":
        est = estimate_mean_variance(d, sigma, eps, rng, ledger)
    elif method == "relative":
        est = estimate_mean_relative(d, bound, eps, rng, ledger)
    elif method == "classical":
        est = classical_mean_chebyshev(d, sigma, eps, rng, ledger)
    else:
        raise ValueError(f"unknown method {method}")
    err = abs(est.value - d.mean())
    if method == "relative":
        err /= abs(d.mean())
    return (eps, ledger.reflection_uses, ledger.classical_samples, err)


def cmd_bench(args):
    d = _load_distribution(args.dist)
    sweep = [float(tok) for tok in args.sweep.split("=", 1)[1].split(",")]
    if not sweep:
        return _fail(EXIT_CONFIG, "empty sweep")
    pairs = tuple((float(v), float(p)) for v, p in d.to_pairs())
    jobs = []
    seeds = np.random.SeedSequence(args.seed).spawn(len(sweep) * args.trials)
    for i, eps in enumerate(sweep):
        for trial in range(args.trials):
            jobs.append((pairs, args.method, eps, args.sigma, args.B,
                         seeds[i * args.trials + trial]))
    workers = max(1, int(os.environ.get("QMCS_THREADS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_trial, jobs))
    else:
        rows = [_bench_trial(job) for job in jobs]
    lines = ["eps,reflections,classical_samples,error"]
    lines += [f"{eps!r},{refl},{cs},{err!r}" for eps, refl, cs, err in rows]
    text = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_validate(args):
    from .validate import validate_suite

    report = validate_suite(criteria=args.criteria)
    for entry in report["criteria"]:
        status = "PASS" if entry["passed"] else "FAIL"
        print(f"[{status}] criterion {entry['id']:>2}  {entry['name']}"
              f"  ({entry['seconds']:.1f}s)")
    _emit({"schema": SCHEMA, **report}, args.out)
    return 0 if report["ok"] else EXIT_CONTRACT


def build_parser():
    ap = argparse.ArgumentParser(prog="qmcs",
                                 description="Monte Carlo estimators with "
                                             "quadratically better accuracy "
                                             "scaling, with query metering")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)

    p = sub.add_parser("mean", help="estimate the mean of a distribution")
    p.add_argument("--dist", required=True)
    p.add_argument("--method", default="bounded",
                   choices=["bounded", "l2", "variance", "relative", "classical"])
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--t", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("ae-check", help="interval coverage of one (a, t) cell")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--t", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_ae_check)

    def model_flags(p):
        p.add_argument("--model", required=True,
                       choices=["ising", "colouring", "matching"])
        p.add_argument("--graph", required=True)
        p.add_argument("--k", type=int, default=3)

    p = sub.add_parser("model", help="partition-function table (CSV)")
    model_flags(p)
    p.add_argument("--betas", default="0,0.5,1,2,inf")
    common(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("chain", help="relaxation time and residuals")
    model_flags(p)
    p.add_argument("--beta", type=float, default=0.0)
    common(p)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("walk-check", help="walk spectrum diagnostics")
    model_flags(p)
    p.add_argument("--beta", type=float, default=0.0)
    common(p)
    p.set_defaults(func=cmd_walk_check)

    p = sub.add_parser("schedule", help="build and verify a cooling schedule")
    model_flags(p)
    p.add_argument("--B", type=float, default=2.0)
    p.add_argument("--direction", default="forward",
                   choices=["forward", "reversed"])
    common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("partition", help="estimate a partition function")
    model_flags(p)
    p.add_argument("--B", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--mode", default="ideal_sampling",
                   choices=["ideal_sampling", "walk_idealized",
                            "walk_exact_sim", "classical"])
    p.add_argument("--direction", default=None,
                   choices=["forward", "reversed"])
    common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("tvd", help="estimate total variation distance")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    common(p)
    p.set_defaults(func=cmd_tvd)

    p = sub.add_parser("bench", help="accuracy sweep, CSV ledger rows")
    p.add_argument("--dist", required=True)
    p.add_argument("--method", default="variance",
                   choices=["bounded", "l2", "variance", "relative", "classical"])
    p.add_argument("--sweep", default="eps=0.1,0.05,0.02",
                   help="eps=v1,v2,...")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--B", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--criteria", default=None,
                   help="comma-separated criterion ids (default: all)")
    common(p)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
