"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import codes, ftcheck, model

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str) -> codes.MeasurementSequence:
    p = Path(path)
    if p.exists():
        return codes.load_sequence(p)
    try:
        return codes.load_fixture(path)
    except FileNotFoundError:
        raise UsageError(f"no such sequence file or shipped fixture: {path}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    seq = _load(args.sequence)
    try:
        rep = ftcheck.check_sufficiency(seq, args.max_errors, args.include_output)
    except codes.UnresolvableSupportError as e:
        print(f"sufficient: no ({e})")
        return EXIT_FAIL
    print(f"code: {seq.code.name}; steps: {len(seq)}; frame rank: {rep.frame_rank}/{rep.k}")
    if rep.sufficient:
        necessary = ftcheck.check_necessity(seq, args.max_errors, args.include_output)
        print(f"sufficient: yes; necessary: {sum(necessary)}/{len(seq)}")
        unnecessary = [i for i, n in enumerate(necessary) if not n]
        if unnecessary:
            print(f"unnecessary steps: {unnecessary}")
    else:
        print(f"sufficient: no ({rep.reason}); violations: {len(rep.violations)}")
        for v in rep.violations[: args.show]:
            print(f"  witness {v}")
    dest = seq.steps and any(st.destabilizer for st in seq.steps)
    if dest:
        drep = codes.verify_destabilizers(seq)
        touched = [q for q in range(seq.code.n_tiles) if (drep.touched_tiles >> q) & 1]
        print(f"destabilizers: {sum(c.ok for c in drep.checks)}/{drep.n_destabilizers} ok; touched tiles: {touched}")
    return EXIT_OK if rep.sufficient else EXIT_FAIL


def cmd_ccz_verify(args) -> int:
    seq = _load(args.sequence)
    rep = ftcheck.check_ccz(seq, all_orders=args.all_orders, max_participation=args.max_participation)
    rec = rep.as_record()
    for key, value in rec.items():
        print(f"{key}: {value}")
    print(f"passed: {'yes' if rep.passed else 'no'}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_search(args) -> int:
    from .search import estimate as est
    from .search import get_profile, local_optimize, sample_sequence, stage_metrics

    constraints = get_profile(args.profile)
    print(f"# seed={args.seed} profile={args.profile} samples={args.samples}")
    t0 = time.perf_counter()
    hits: list[int] = []
    done = 0
    chunk = args.progress or args.samples
    records: list[dict] = []
    estimate = est.ProbabilityEstimate.from_counts(0, 0, seed=args.seed, profile=args.profile)
    while done < args.samples:
        n = min(chunk, args.samples - done)
        part = est.estimate_sufficiency_probability(
            constraints, n, args.seed, threads=args.threads, start=done, profile=args.profile
        )
        hits.extend(part.hit_indices)
        done += n
        if args.progress:
            rate = done / max(time.perf_counter() - t0, 1e-9)
            print(f"# progress {done}/{args.samples} hits={len(hits)} rate={rate:.3g}/s", file=sys.stderr)
    if args.samples:
        estimate = est.ProbabilityEstimate.from_counts(
            len(hits), args.samples, seed=args.seed, profile=args.profile, hit_indices=hits
        )
        records = est.hit_records(constraints, estimate)
    if estimate.point is None:
        print("hits: 0; samples: 0; estimate: none")
    else:
        print(f"hits: {estimate.hits}; samples: {estimate.samples}; p: {estimate.point:.6g} +- {estimate.stderr:.3g}")
        frac = est.stage1_fraction(records)
        if frac.point is not None:
            print(f"stage1_prefix>=4: {frac.hits}/{frac.samples} = {frac.point:.4g}")
    for i in range(args.optimize):
        start = sample_sequence(constraints, args.seed, i)
        res = local_optimize(start, args.seed, i)
        m = stage_metrics(res.sequence)
        records.append(
            {
                "profile": args.profile,
                "seed": args.seed,
                "index": i,
                "optimized": True,
                "converged": res.converged,
                "supports": [[q for q in range(16) if (s >> q) & 1] for s in res.sequence.supports],
                "sequence": codes.format_sequence(res.sequence),
                "stage1_prefix": m.stage1_prefix,
                "stage2_clusters": m.stage2_clusters,
                "suffix_ok": m.suffix_ok,
            }
        )
        print(f"optimized[{i}]: {len(res.sequence)} steps, +{res.additions}/-{res.removals}, converged={res.converged}")
    if args.log:
        Path(args.log).unlink(missing_ok=True)
        est.append_log(Path(args.log), records)
    if args.summary:
        est.write_summary_csv(Path(args.summary), [est.summary_row(estimate, [r for r in records if not r.get("optimized")])])
    print(f"# elapsed {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK


def cmd_crossval(args) -> int:
    from .oracle.crossval import SamplePolicy, crossvalidate

    seq = _load(args.sequence)
    policy = SamplePolicy(
        size=args.size,
        exhaustive=args.random is None,
        n_random=args.random or 0,
        seed=args.seed,
        frames_per_pattern=args.frames,
        include_output=args.include_output,
    )
    print(f"# seed={args.seed} size={args.size} patterns={'all' if args.random is None else args.random}")
    rep = crossvalidate(seq, args.budget, policy)
    print(f"patterns: {rep.n_patterns}; verdicts: {json.dumps(rep.verdict_counts, sort_keys=True)}")
    print(f"disagreements: {len(rep.disagreements)}")
    for d in rep.disagreements[: args.show]:
        print(f"  {d.pattern}: checker={d.verdict} detected={d.detected_fraction:.3f} fidelity={d.min_fidelity}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_relations(args) -> int:
    from .oracle.relations import verify_relations

    ok = True
    for name in (["t15", "ccz"] if args.set == "all" else [args.set]):
        rep = verify_relations(name)
        for c in rep.checks:
            status = "pass" if c.holds else "FAIL"
            print(f"{name}: {status} phase=w^{c.phase if c.phase is not None else '-'}  {c.name}")
        ok &= rep.ok
    return EXIT_OK if ok else EXIT_FAIL


def cmd_analyze(args) -> int:
    d0 = args.d0 if args.d0 is not None else model.min_base_distance(args.p, args.p)
    header = f"# p={args.p} d0={d0} levels={args.levels} kind={args.kind}\n"
    if args.kind == "error":
        body = model.error_curve_csv(model.magic_error_curve(args.p, d0, args.levels, args.p_m0))
    elif args.kind == "time":
        body = model.time_curve_csv(model.expected_time_curve(args.p, d0, args.levels, p_M_at_d0=args.p_m0))
    else:
        th = model.distillation_threshold(args.p, d0)
        amp = model.amplification_analysis(args.p, args.d_prime, args.omega)
        lines = [
            "quantity,value",
            f"threshold_p0,{th.p_0}",
            f"threshold_lower,{th.lower}",
            f"feasible,{th.feasible}",
            f"regime,{amp.regime}",
            f"fixed_point,{amp.fixed_point}",
            f"tangency_p,{amp.tangency_p}",
            f"d_out_ratio,{amp.d_out_ratio}",
        ]
        body = "\n".join(lines) + "\n"
    _emit(header + body, args.out)
    return EXIT_OK


def cmd_cost(args) -> int:
    _emit(f"# d={args.d} L={args.L} n={args.n}\n" + model.cost_table_csv(model.cost_table(args.d, args.L, args.n)), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="magicft", description="Fault-tolerant distillation sequence toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="sufficiency and necessity of a tesseract sequence")
    p.add_argument("sequence", help="sequence file or shipped fixture name")
    p.add_argument("--max-errors", type=int, default=2, choices=(1, 2))
    p.add_argument("--include-output", action="store_true", help="also inject X errors on output tiles")
    p.add_argument("--show", type=int, default=5, help="violation witnesses to print")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ccz-verify", help="check a cube-code sequence")
    p.add_argument("sequence")
    p.add_argument("--all-orders", action="store_true")
    p.add_argument("--max-participation", type=int, default=3)
    p.set_defaults(func=cmd_ccz_verify)

    p = sub.add_parser("search", help="estimate the sufficiency probability of random sequences")
    p.add_argument("--profile", default="std17", help="std17, free17, subset-std17 or subset-free17")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--optimize", type=int, default=0, help="locally optimize this many sampled sequences")
    p.add_argument("--log", help="line-delimited JSON log of found sequences")
    p.add_argument("--summary", help="CSV summary path")
    p.add_argument("--progress", type=int, default=0, help="report every N samples on stderr")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("crossval", help="compare checker verdicts with the state-vector oracle")
    p.add_argument("sequence")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, default=1, choices=(1, 2))
    p.add_argument("--random", type=int, default=None, help="sample this many patterns instead of all")
    p.add_argument("--frames", type=int, default=2, help="Z frames simulated per pattern")
    p.add_argument("--budget", type=int, default=None, help="stop after this many patterns")
    p.add_argument("--include-output", action="store_true")
    p.add_argument("--show", type=int, default=10)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("relations", help="verify the non-Abelian stabilizer identities")
    p.add_argument("--set", default="all", choices=("t15", "ccz", "all"))
    p.set_defaults(func=cmd_relations)

    p = sub.add_parser("analyze", help="model curves as CSV")
    p.add_argument("--p", type=float, default=1e-3, help="physical error rate (illustrative default)")
    p.add_argument("--d0", type=int, default=None, help="base distance (default: smallest feasible)")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--p-m0", type=float, default=None, help="base magic-state error (default: p)")
    p.add_argument("--kind", default="error", choices=("error", "time", "amplification"))
    p.add_argument("--d-prime", type=int, default=None)
    p.add_argument("--omega", type=float, default=None, help="Omega(d') for the distance ratio")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cost", help="gate-set cost table at distance d")
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cost)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except codes.SequenceFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, model.ModelDomainError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
