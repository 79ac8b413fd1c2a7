"""Command-line front end for reproducible solve / sweep / verify experiments.

Subcommands:

* solve              value-iterate, write values.csv, policy.csv, threshold.txt
* sweep-threshold    simulate delay vs threshold m, one fig4_<lambda>.csv per rate
* sweep-blockage     relative-improvement surface, fig5.csv
* compare-maxweight  threshold policy vs backpressure baseline, fig6.csv
* verify             run every structural check, violations.csv + exit code

Every command is deterministic given config + seed: reruns produce
byte-identical CSVs.  Each CSV starts with a `# config=<hash>` comment so
results are traceable to their settings.  Exit codes: 0 success, 1 check or
convergence failure, 2 usage/config error, 3 model-assumption violation.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .config import InvalidConfig, RunConfig, config_hash, load_config
from .model import (
    AssumptionViolated,
    NonPositiveRate,
    RateParams,
    check_fastpath_assumption,
    stability_region,
    uniformize,
)
from .bellman4d import solve_discounted_4d
from .simulator import (
    RUN_CSV_HEADER,
    SimConfig,
    SimStats,
    compare_maxweight,
    relative_improvement,
    run_csv_row,
    simulate,
)
from .solver import (
    NoConvergence,
    NoStabilization,
    PolicyTable,
    ThresholdResult,
    TruncationBox,
    average_delay_threshold,
    dump_values_csv,
    extract_threshold,
    nearest_threshold,
    solve_discounted,
)
from .verifier import (
    IterateAudit,
    ViolationReport,
    check_class_F,
    check_extended,
    check_theorem_fixedpoint,
    check_total_order_info,
    perturbed,
    trace_rows,
    truncation_band,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_ASSUMPTION = 3

# threshold "infinite" simulates as a finite m no trajectory ever reaches
NEVER_ADD_M = 10**9


def _num(value: float) -> str:
    return format(value, ".12g")


def _fmt_rate(lam: float) -> str:
    return str(int(lam)) if float(lam).is_integer() else format(lam, "g")


def _write_csv(
    path: Path,
    cfg: RunConfig,
    header: str,
    rows: list[str],
    extra_comments: Sequence[str] = (),
) -> None:
    lines = [f"# config={config_hash(cfg)}"]
    lines.extend(f"# {c}" for c in extra_comments)
    lines.append(header)
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _sim_config(cfg: RunConfig, params: RateParams, policy: str, m: int = 0) -> SimConfig:
    return SimConfig(
        params=params,
        policy=policy,
        m=m,
        horizon_events=cfg.horizon,
        warmup_events=cfg.warmup,
        seed=cfg.seed,
        replications=cfg.replications,
    )


def _numeric_threshold(policy: PolicyTable) -> ThresholdResult:
    """Exact threshold when the policy is flat, best flat fit otherwise."""
    thr = extract_threshold(policy)
    if thr.kind == "not-threshold":
        thr = nearest_threshold(policy)
    return thr


def _threshold_m(thr: ThresholdResult) -> int:
    if thr.kind == "finite":
        return int(thr.m)  # type: ignore[arg-type]
    return NEVER_ADD_M


def _fmt_threshold(t: ThresholdResult) -> str:
    body = str(t.m) if t.kind == "finite" else t.kind
    if t.mismatches:
        body += f" ({t.mismatches} state(s) off the flat boundary)"
    return body


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    box = TruncationBox(cfg.box_x, cfg.box_q1)
    if len(cfg.betas) == 1:
        params, _ = uniformize(cfg.rates(beta=cfg.betas[0]))
        res = solve_discounted(params, box, tol=cfg.tol, max_iter=cfg.max_iter)
        thr = _numeric_threshold(res.policy)
        trajectory = [(cfg.betas[0], thr)]
    else:
        params, _ = uniformize(cfg.rates())
        adr = average_delay_threshold(
            params, box, cfg.betas, tol=cfg.tol, max_iter=cfg.max_iter
        )
        thr, trajectory, res = adr.threshold, adr.trajectory, adr.solve

    tag = f"config={config_hash(cfg)}"
    dump_values_csv(res.values, res.policy, str(out / "values.csv"), tag)

    policy_rows = []
    adding = res.policy.adding
    for x in range(box.x_max + 1):
        for q1 in range(box.q1_max + 1):
            policy_rows.append(f"{x},{q1},{1 if adding[x, q1] else 0}")
    _write_csv(out / "policy.csv", cfg, "x,q1,adding", policy_rows)

    final = str(thr.m) if thr.kind == "finite" else thr.kind
    lines = [f"# {tag}", f"threshold = {final}"]
    for beta, t in trajectory:
        lines.append(f"beta = {beta:g} -> {_fmt_threshold(t)}")
    (out / "threshold.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"threshold = {final} (box {box.x_max}x{box.q1_max}, "
          f"{res.iterations} sweeps at beta={res.values.beta:g})")
    return EXIT_OK


def _parallel(jobs: int, tasks: list):
    """Run zero-arg callables, preserving submission order in the results."""
    if jobs <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        futures = [ex.submit(t) for t in tasks]
        return [f.result() for f in futures]


def cmd_sweep_threshold(cfg: RunConfig, out: Path) -> int:
    if not cfg.m_list:
        raise InvalidConfig("m_list must be non-empty")
    if not cfg.lambda_list:
        raise InvalidConfig("lambda_list must be non-empty")
    run_rows: list[str] = []
    for lam in cfg.lambda_list:
        params = cfg.rates(lam=lam)
        sim_cfgs = [_sim_config(cfg, params, "threshold", m) for m in cfg.m_list]
        stats_list = _parallel(cfg.jobs, [lambda c=c: simulate(c) for c in sim_cfgs])
        fig_rows = []
        for c, stats in zip(sim_cfgs, stats_list):
            fig_rows.append(f"{c.m},{_num(stats.avg_delay)},{_num(stats.ci_delay)}")
            run_rows.append(run_csv_row(params, c, stats))
        _write_csv(out / f"fig4_{_fmt_rate(lam)}.csv", cfg, "m,avg_delay,ci", fig_rows)
    _write_csv(out / "runs.csv", cfg, RUN_CSV_HEADER, run_rows)
    print(f"wrote {len(cfg.lambda_list)} sweep file(s) and runs.csv to {out}")
    return EXIT_OK


def cmd_sweep_blockage(cfg: RunConfig, out: Path) -> int:
    box = TruncationBox(cfg.box_x, cfg.box_q1)

    def one_point(lam: float, p_na: float):
        p_a = 1.0 - p_na
        border = cfg.mu_sub6 + p_a * cfg.mu_mm
        if lam >= border:
            return f"{_num(lam)},{_num(p_na)},nan,2", []
        params = RateParams(
            lam=lam, mu_p=cfg.mu_p, mu_mm=cfg.mu_mm, mu_sub6=cfg.mu_sub6,
            p_a=p_a, beta=cfg.verify_beta,
        )
        norm, _ = uniformize(params)
        res = solve_discounted(norm, box, tol=cfg.tol, max_iter=cfg.max_iter)
        m = _threshold_m(_numeric_threshold(res.policy))
        imp = relative_improvement(params, m, _sim_config(cfg, params, "threshold", m))
        flag = 1 if imp.censored else 0
        runs = [
            run_csv_row(params, _sim_config(cfg, params, "threshold", m), imp.stats_with),
            run_csv_row(params, _sim_config(cfg, params, "mmwave-only"), imp.stats_without),
        ]
        return f"{_num(lam)},{_num(p_na)},{_num(imp.w_hat)},{flag}", runs

    grid = [(lam, p_na) for lam in cfg.lambda_list for p_na in cfg.p_na_list]
    results = _parallel(cfg.jobs, [lambda g=g: one_point(*g) for g in grid])
    fig_rows = [row for row, _ in results]
    run_rows = [r for _, runs in results for r in runs]
    _write_csv(
        out / "fig5.csv", cfg, "lambda,p_na,W_hat,censored_flag", fig_rows,
        extra_comments=(f"mu_mm = {cfg.mu_mm:g}", f"mu_sub6 = {cfg.mu_sub6:g}"),
    )
    _write_csv(out / "runs.csv", cfg, RUN_CSV_HEADER, run_rows)
    print(f"wrote fig5.csv ({len(fig_rows)} grid points) to {out}")
    return EXIT_OK


def cmd_compare_maxweight(cfg: RunConfig, out: Path) -> int:
    if len(cfg.m_list) != len(cfg.lambda_list):
        raise InvalidConfig(
            f"compare needs one threshold per rate point: got {len(cfg.m_list)} "
            f"m values for {len(cfg.lambda_list)} rates (set m_list explicitly)"
        )
    params_list = [cfg.rates(lam=lam) for lam in cfg.lambda_list]
    template = _sim_config(cfg, params_list[0], "threshold")
    rows = compare_maxweight(params_list, list(cfg.m_list), template)
    header = (
        "lambda,m,delay_threshold,ci_delay_threshold,delay_maxweight,"
        "ci_delay_maxweight,tput_threshold,ci_tput_threshold,tput_maxweight,"
        "ci_tput_maxweight"
    )
    fig_rows = []
    run_rows = []
    for params, row in zip(params_list, rows):
        fig_rows.append(",".join([
            _num(row.lam), str(row.m),
            _num(row.delay_threshold), _num(row.ci_delay_threshold),
            _num(row.delay_maxweight), _num(row.ci_delay_maxweight),
            _num(row.tput_threshold), _num(row.ci_tput_threshold),
            _num(row.tput_maxweight), _num(row.ci_tput_maxweight),
        ]))
        run_rows.append(run_csv_row(
            params, _sim_config(cfg, params, "threshold", row.m), row.stats_threshold))
        run_rows.append(run_csv_row(
            params, _sim_config(cfg, params, "maxweight"), row.stats_maxweight))
    _write_csv(out / "fig6.csv", cfg, header, fig_rows)
    _write_csv(out / "runs.csv", cfg, RUN_CSV_HEADER, run_rows)
    print(f"wrote fig6.csv ({len(fig_rows)} rate points) to {out}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path, self_test_perturb: bool = False) -> int:
    params = cfg.rates()
    if not check_fastpath_assumption(params):
        raise AssumptionViolated(
            "fast path is not faster than the slow server at these rates: "
            "1/(p_a mu_mm) + 1/mu_p must be < 1/mu_sub6"
        )
    params, _ = uniformize(params)
    box = TruncationBox(cfg.box_x, cfg.box_q1)
    band = truncation_band(params, box, cfg.check_tol)

    audit = IterateAudit(box, params.beta, tol=cfg.check_tol, band=band)
    res = solve_discounted(
        params, box, tol=cfg.tol, max_iter=cfg.max_iter, iterate_hook=audit
    )
    trace = audit.threshold_trace()
    n_sweeps = len(audit.thresholds)

    v4, iters4, _ = solve_discounted_4d(params, box, tol=cfg.tol, max_iter=cfg.max_iter)
    rep4 = check_theorem_fixedpoint(v4, params, box, tol=cfg.check_tol, band=band)
    info = check_total_order_info(v4, box, tol=cfg.check_tol, band=band)

    # the gate covers the implementation-sensitive claims: value inequalities
    # per sweep, fixed-point structure, and the best-fit threshold never
    # climbing by more than one per sweep
    merged = ViolationReport(tol=cfg.check_tol)
    merged.extend(audit.report)
    merged.extend(rep4)
    step_rows = trace_rows(audit.nearest_trace(), tol=cfg.check_tol)
    merged.extend(step_rows)
    gate_count = len(merged.entries)

    self_test_undetected = False
    if self_test_perturb:
        # dent must land inside the band-clipped window or it cannot be seen
        mid = (min(box.x_max // 2, box.x_max - band - 1),
               min(box.q1_max // 2, box.q1_max - band - 1), 0)
        bad = perturbed(res.values.values, mid)
        merged.extend(check_class_F(bad, box, cfg.check_tol, "self-test", band=band))
        merged.extend(check_extended(bad, box, cfg.check_tol, "self-test", band=band))
        injected = len(merged.entries) - gate_count
        print(f"self-test: injected dent at {mid} raised {injected} violation(s)")
        if injected == 0:
            self_test_undetected = True
            print("error: self-test perturbation went undetected", file=sys.stderr)
        gate_count = len(merged.entries)

    # reported but never gating: the exact flat-threshold reading fails by a
    # couple of corner states on essentially every sweep (adding a lone
    # packet from the head buffer pays before adding one from the mmWave
    # queue does, so the switching curve is not exactly flat in x + q1);
    # total-order rows are informational by construction
    strict_rows = [e for e in trace_rows(trace, tol=cfg.check_tol).entries
                   if e.property_id == "policy-threshold-type"]
    merged.entries.extend(strict_rows)
    merged.extend(info)

    merged.to_csv(str(out / "violations.csv"), f"config={config_hash(cfg)}")
    flat = sum(1 for t in trace.per_iteration if t.kind != "not-threshold")
    final = audit.nearest[-1] if audit.nearest else None
    print(f"cap-exclusion band: {band} (truncation distortion < {cfg.check_tol:g})")
    print(f"iterate value checks over {n_sweeps} sweeps: "
          f"{len(audit.report.entries)} violation(s)")
    print(f"fixed-point structure ({iters4} sweeps, full state): "
          f"{len(rep4.entries)} violation(s)")
    print(f"threshold trajectory (best flat fit per sweep): "
          f"{'ok' if step_rows.ok else 'VIOLATED'}, final "
          f"{_fmt_threshold(final) if final else 'n/a'}")
    print(f"exactly-flat sweeps: {flat}/{n_sweeps}; "
          f"{len(strict_rows)} corner-deviation row(s) reported, not gating")
    print(f"informational total-order rows (not gating): {len(info.entries)}")
    print(f"violations written to {out / 'violations.csv'}")
    if gate_count == 0 and not self_test_undetected:
        return EXIT_OK
    return EXIT_CHECK_FAILED


def _parse_box(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise InvalidConfig(f"--box expects XxQ (e.g. 60x60), got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise InvalidConfig(f"--box expects integer dims, got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="FILE", help="key = value config file")
    shared.add_argument("--out", metavar="DIR", help="output directory")
    shared.add_argument("--jobs", type=int, metavar="N", help="parallel sweep points")
    shared.add_argument("--seed", type=int, metavar="N", help="base RNG seed")
    shared.add_argument("--lambda", dest="lam", type=float, metavar="RATE",
                        help="arrival rate (also collapses sweep rate lists)")
    shared.add_argument("--m", type=int, metavar="M", help="threshold override")
    shared.add_argument("--beta", type=float, metavar="B",
                        help="single discount factor override")
    shared.add_argument("--box", metavar="XxQ", help="truncation box, e.g. 60x60")
    shared.add_argument("--horizon", type=int, metavar="N", help="events per run")

    parser = argparse.ArgumentParser(
        prog="dualband",
        description="Solve, simulate, and verify the dual-band scheduling model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[shared],
                   help="value iteration, threshold extraction")
    sub.add_parser("sweep-threshold", parents=[shared],
                   help="simulated delay vs threshold per arrival rate")
    sub.add_parser("sweep-blockage", parents=[shared],
                   help="relative improvement over the blockage grid")
    sub.add_parser("compare-maxweight", parents=[shared],
                   help="threshold policy vs backpressure baseline")
    verify = sub.add_parser("verify", parents=[shared],
                            help="structural property checks")
    verify.add_argument("--self-test-perturb", action="store_true",
                        help="inject a dent into the solved table to prove "
                             "the checks can fail")
    return parser


def _effective_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    updates: dict = {}
    if args.lam is not None:
        if args.lam <= 0:
            raise InvalidConfig("--lambda must be positive")
        updates["lam"] = args.lam
        updates["lambda_list"] = (args.lam,)
    if args.m is not None:
        if args.m < 0:
            raise InvalidConfig("--m must be nonnegative")
        updates["m_list"] = (args.m,)
    if args.beta is not None:
        if not 0.0 <= args.beta < 1.0:
            raise InvalidConfig("--beta must lie in [0, 1)")
        updates["betas"] = (args.beta,)
        updates["verify_beta"] = args.beta
    if args.box is not None:
        updates["box_x"], updates["box_q1"] = _parse_box(args.box)
    if args.horizon is not None:
        if args.horizon <= 0:
            raise InvalidConfig("--horizon must be positive")
        updates["horizon"] = args.horizon
    if args.seed is not None:
        if args.seed < 0:
            raise InvalidConfig("--seed must be nonnegative")
        updates["seed"] = args.seed
    if args.jobs is not None:
        if args.jobs < 1:
            raise InvalidConfig("--jobs must be >= 1")
        updates["jobs"] = args.jobs
    if args.out is not None:
        updates["out_dir"] = args.out
    return replace(cfg, **updates)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective_config(args)
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "sweep-threshold":
            return cmd_sweep_threshold(cfg, out)
        if args.command == "sweep-blockage":
            return cmd_sweep_blockage(cfg, out)
        if args.command == "compare-maxweight":
            return cmd_compare_maxweight(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, self_test_perturb=args.self_test_perturb)
        parser.error(f"unknown command {args.command!r}")
    except (InvalidConfig, NonPositiveRate) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssumptionViolated as exc:
        print(f"assumption error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (NoConvergence, NoStabilization) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
