"""Command-line driver: ``coherent-oga {gen-dict,run,sweep,selftest}``.

Exit codes: 0 when no asserted check fails, 1 when one does, 2 for usage,
configuration, dictionary or oracle-budget errors.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import regime_ceiling
from .dictionary import (
    DictionaryError,
    gen_identity_hadamard,
    gen_orthonormal,
    gen_random_spherical,
    load_dictionary,
    save_dictionary,
    subdictionary,
    union_subset_indices,
)
from .experiment import (
    INSTANCE_KINDS,
    ORACLE_MODES,
    InstanceSpec,
    audit,
    family_summary,
    report_json,
    run_sweep,
    summary_csv,
)
from .oga import write_trace_csv
from .oracle import DEFAULT_BUDGET, OracleBudgetError
from .selftest import run_selftest

FAMILIES = ("hadamard-union", "random", "orthonormal")
EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_seeds(text):
    """``"0:500"`` (half-open range), ``"1,2,5"``, ``"7"`` or a comma list mixing both."""
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                lo, hi = part.split(":")
                seeds.extend(range(int(lo), int(hi)))
            else:
                seeds.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError(f"seed list {text!r} is empty")
    if min(seeds) < 0:
        raise argparse.ArgumentTypeError("seeds must be non-negative")
    return sorted(set(seeds))


def read_config(path):
    """Flat ``key=value`` lines; ``#`` starts a comment. Keys use flag names without dashes."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _add_dict_args(p):
    g = p.add_argument_group("dictionary")
    g.add_argument("--dict", help="dictionary file to load instead of generating one")
    g.add_argument("--family", choices=FAMILIES, default="hadamard-union")
    g.add_argument("--k", type=int, default=10, help="union of identity and Hadamard bases of R^(2^k)")
    g.add_argument("--dim", type=int, help="ambient dimension for random and orthonormal families")
    g.add_argument("--count", type=int, help="atom count for the random family")
    g.add_argument("--dict-seed", type=int, default=None,
                   help="seed for random families (orthonormal without a seed is the standard basis)")
    g.add_argument("--max-coherence", type=float, default=None, help="rejection threshold for the random family")
    g.add_argument("--subdict", type=int, default=None,
                   help="keep this many union atoms, half from each basis (hadamard-union only)")
    g.add_argument("--subdict-seed", type=int, default=0)


def _add_instance_args(p):
    g = p.add_argument_group("instances")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--steps", type=int, default=None, help="OGA steps (default 2m)")
    g.add_argument("--seeds", type=parse_seeds, default=[0], help="e.g. 0:500, 1,2,5 or 7")
    g.add_argument("--instance", choices=INSTANCE_KINDS, default="mixed")
    g.add_argument("--signal", help="file with one explicit signal (comma or newline separated floats)")
    g.add_argument("--coeff-low", type=float, default=1.0)
    g.add_argument("--coeff-high", type=float, default=2.0)
    g.add_argument("--noise", type=float, default=0.5, help="norm of the planted remainder")
    g.add_argument("--oracle", choices=ORACLE_MODES, default="exact")
    g.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max supports the exact oracle may enumerate")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--report-out", help="JSON report path")


def build_parser():
    parser = argparse.ArgumentParser(prog="coherent-oga", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file supplying defaults; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dict", help="generate a dictionary file and print its coherence")
    _add_dict_args(p)
    p.add_argument("--seed", type=int, dest="dict_seed", help="alias of --dict-seed")
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="audit seeded or explicit instances")
    _add_dict_args(p)
    _add_instance_args(p)
    p.add_argument("--trace-out", help="trace CSV path (single instance only)")
    p.add_argument("--summary-out", help="CSV summary path")

    p = sub.add_parser("sweep", help="audit many seeds and print per-family counts")
    _add_dict_args(p)
    _add_instance_args(p)
    p.add_argument("--summary-out", help="CSV summary path")

    sub.add_parser("selftest", help="checker fault injection, oracle agreement, projection properties")
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    command = next((a for a in argv if a in COMMANDS), None)
    if command is None:
        return
    subparser = parser._subparsers._group_actions[0].choices[command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        value = action.type(raw) if action.type else raw
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config {key}={raw!r} not in {list(action.choices)}")
        defaults[key] = value
        action.required = False
    subparser.set_defaults(**defaults)


def load_dict(args):
    if args.dict:
        return load_dictionary(args.dict)
    if args.family == "hadamard-union":
        d = gen_identity_hadamard(args.k)
        if args.subdict is not None:
            idx = union_subset_indices(args.k, args.subdict, args.subdict_seed)
            d = subdictionary(d, idx, f"{d.label}-sub{args.subdict}-s{args.subdict_seed}")
        return d
    if args.subdict is not None:
        raise UsageError("--subdict applies to the hadamard-union family only")
    if args.dim is None:
        raise UsageError(f"--dim is required for family {args.family}")
    if args.family == "orthonormal":
        return gen_orthonormal(args.dim, args.dict_seed)
    if args.count is None:
        raise UsageError("--count is required for the random family")
    seed = 0 if args.dict_seed is None else args.dict_seed
    return gen_random_spherical(args.dim, args.count, seed, args.max_coherence)


def read_signal(path, dim):
    text = Path(path).read_text(encoding="utf-8").replace("\n", ",")
    try:
        f = np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if f.shape != (dim,):
        raise UsageError(f"{path}: signal has {f.size} entries, dictionary dimension is {dim}")
    return f


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")


def _print_family_table(reports, out):
    print(f"{'family':<10}{'total':>9}{'vacuous':>9}{'active':>9}{'failed':>8}{'reported':>10}", file=out)
    for fam, s in family_summary(reports).items():
        print(f"{fam:<10}{s['total']:>9}{s['vacuous']:>9}{s['active']:>9}{s['failed']:>8}{s['reported']:>10}", file=out)


def _print_overview(d, m, reports, out):
    M = d.m_coherence
    ratios = [r.lebesgue.ratio for r in reports]
    print(f"dictionary {d.label}: dim {d.dim}, {d.count} atoms, coherence {M:.17g}, "
          f"regime ceiling {regime_ceiling(M)}", file=out)
    n_fail = sum(r.failed for r in reports)
    n_regime = sum(r.regime_ok for r in reports)
    print(f"m={m}: {len(reports)} instances, {n_regime} in regime, max ratio {max(ratios):.6g}, "
          f"{n_fail} with asserted failures", file=out)


def cmd_gen_dict(args, out):
    d = load_dict(args)
    save_dictionary(d, args.out)
    M = d.m_coherence
    print(f"wrote {d.count} atoms of dimension {d.dim} to {args.out}", file=out)
    print(f"coherence {M:.17g}", file=out)
    print(f"regime ceiling {regime_ceiling(M)}", file=out)
    return EXIT_OK


def _spec(args):
    return InstanceSpec(args.instance, args.coeff_low, args.coeff_high, args.noise)


def _audit_args(args):
    if args.m < 1:
        raise UsageError("--m must be at least 1")
    if args.steps is not None and args.steps < args.m:
        raise UsageError("--steps must be at least --m")


def _emit(args, reports, out):
    if args.report_out:
        _write(args.report_out, report_json(reports))
    if args.summary_out:
        _write(args.summary_out, summary_csv(reports))
    return EXIT_CHECK_FAILED if any(r.failed for r in reports) else EXIT_OK


def cmd_run(args, out):
    _audit_args(args)
    d = load_dict(args)
    if args.signal:
        if args.oracle == "relaxed":
            raise UsageError("the relaxed oracle needs planted instances, not --signal")
        f = read_signal(args.signal, d.dim)
        reports = [audit(d, f, args.m, "exact", None, args.budget, args.steps, seed=0, kind="explicit")]
    else:
        if args.trace_out and len(args.seeds) != 1:
            raise UsageError("--trace-out needs a single seed")
        reports = run_sweep(d, args.m, args.seeds, _spec(args), args.oracle, args.budget, args.steps,
                            args.workers, keep_traces=bool(args.trace_out))
    if args.trace_out:
        write_trace_csv(reports[0].trace, args.trace_out)
    _print_overview(d, args.m, reports, out)
    for r in reports:
        leb = r.lebesgue
        verdict = "FAIL" if r.failed else ("pass" if leb.asserted else "unasserted")
        print(f"  seed {r.seed:>6} {r.kind:<8} ||f_K||={leb.final_residual:.6g} sigma={leb.sigma:.6g} "
              f"ratio={leb.ratio:.6g} {verdict}", file=out)
    return _emit(args, reports, out)


def cmd_sweep(args, out):
    _audit_args(args)
    d = load_dict(args)
    reports = run_sweep(d, args.m, args.seeds, _spec(args), args.oracle, args.budget, args.steps, args.workers)
    _print_overview(d, args.m, reports, out)
    _print_family_table(reports, out)
    return _emit(args, reports, out)


def cmd_selftest(args, out):
    results = run_selftest()
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}", file=out)
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CHECK_FAILED


COMMANDS = {"gen-dict": cmd_gen_dict, "run": cmd_run, "sweep": cmd_sweep, "selftest": cmd_selftest}


def main(argv=None, out=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args, out)
    except (UsageError, DictionaryError, OracleBudgetError, OSError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
