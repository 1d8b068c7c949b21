"""Command-line entry point.

Exit codes: 0 success, 1 identity verification failed, 2 usage or config
error, 3 data incompatible with a model.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import evidence, lattice
from .config import ConfigError, RunConfig, guess_format, load_config
from .core import (
    CvLatticeError,
    Dataset,
    DegenerateEvidenceError,
    ModelDataMismatch,
    PreconditionError,
    ZeroProbabilityError,
)

EXIT_OK = 0
EXIT_IDENTITY = 1
EXIT_USAGE = 2
EXIT_DATA = 3


def _num(x):
    """JSON-safe number: non-finite values become null."""
    if x is None or not math.isfinite(x):
        return None
    return x


def _g(x) -> str:
    return "" if x is None else format(x, ".17g")


def _f4(x) -> str:
    return "n/a" if x is None else f"{x:.4f}"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _dataset_header(data: Dataset) -> dict:
    return {"d": data.d, "kind": data.kind}


def _rows_json(table: lattice.DecompositionTable) -> list[dict]:
    return [
        {"k": r.k, "count": r.count, "score": _num(r.score), "cumulative": _num(r.cumulative)}
        for r in table.rows
    ]


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- commands -------------------------------------------------------------


def cmd_score(cfg: RunConfig) -> tuple[str, int]:
    data = cfg.load_data()
    results = []
    for spec in cfg.hypotheses:
        h = spec.hypothesis
        cache = lattice.build_cache(h, data, cfg.d_max)
        loo = lattice.loo_score(cache)
        lmo = [lattice.leave_m_out_score(cache, m) for m in cfg.leave_out]
        results.append((h, cache.direct, loo.value, [(s.m, s.value) for s in lmo]))

    if cfg.output == "json":
        doc = {
            "command": "score",
            "dataset": _dataset_header(data),
            "results": [
                {
                    "hypothesis": h.name,
                    "kind": h.kind,
                    "log_likelihood": _num(ll),
                    "loo": _num(loo),
                    "leave_m_out": [{"m": m, "score": _num(v)} for m, v in lmo],
                }
                for h, ll, loo, lmo in results
            ],
        }
        return _dump_json(doc), EXIT_OK
    if cfg.output == "csv":
        header = ["hypothesis", "log_likelihood", "loo"] + [f"leave_{m}_out" for m in cfg.leave_out]
        rows = [[h.name, _g(ll), _g(loo)] + [_g(v) for _, v in lmo] for h, ll, loo, lmo in results]
        return _csv(header, rows), EXIT_OK
    lines = [f"dataset: d={data.d} ({data.kind})"]
    for h, ll, loo, lmo in results:
        lines.append(f"{h.name} [{h.kind}]")
        lines.append(f"  {'log_likelihood':<15} {_f4(ll)}")
        lines.append(f"  {'loo':<15} {_f4(loo)}")
        for m, v in lmo:
            lines.append(f"  {f'leave-{m}-out':<15} {_f4(v)}")
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    data = cfg.load_data()
    results = [
        (s.hypothesis, lattice.verify_identity(s.hypothesis, data, cfg.tolerance, cfg.threads, cfg.d_max))
        for s in cfg.hypotheses
    ]
    passed = all(r.passed for _, r in results)
    code = EXIT_OK if passed else EXIT_IDENTITY

    if cfg.output == "json":
        doc = {
            "command": "verify",
            "dataset": _dataset_header(data),
            "tolerance": cfg.tolerance,
            "passed": passed,
            "results": [
                {
                    "hypothesis": h.name,
                    "kind": h.kind,
                    "passed": r.passed,
                    "direct": _num(r.direct),
                    "reconstructed": _num(r.per_cardinality.reconstructed),
                    "residual_per_cardinality": _num(r.residual_compact),
                    "residual_per_datum": _num(r.residual_per_datum),
                    "marginal_evaluations": r.evaluations,
                    "per_cardinality": _rows_json(r.per_cardinality),
                    "per_datum": _rows_json(r.per_datum),
                }
                for h, r in results
            ],
        }
        return _dump_json(doc), code
    if cfg.output == "csv":
        rows = [
            [h.name, row.k, row.count, _g(row.score), _g(row.cumulative)]
            for h, r in results
            for row in r.per_cardinality.rows
        ]
        return _csv(["hypothesis", "k", "count", "score", "cumulative"], rows), code
    lines = [f"dataset: d={data.d} ({data.kind})  tolerance={cfg.tolerance:g}"]
    for h, r in results:
        lines.append(f"{h.name} [{h.kind}]")
        lines.append(f"  {'k':>3} {'count':>8} {'S_k':>12} {'cumulative':>12}")
        for row in r.per_cardinality.rows:
            lines.append(f"  {row.k:>3} {row.count:>8} {_f4(row.score):>12} {_f4(row.cumulative):>12}")
        lines.append(f"  {'sum of S_k':<21} {_f4(r.per_cardinality.reconstructed)}")
        lines.append(f"  {'log_likelihood':<21} {_f4(r.direct)}")
        lines.append(f"  {'residual (subsets)':<21} {r.residual_compact:.3e}")
        lines.append(f"  {'residual (per datum)':<21} {r.residual_per_datum:.3e}")
        lines.append(f"  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines) + "\n", code


def cmd_compare(cfg: RunConfig) -> tuple[str, int]:
    data = cfg.load_data()
    hset = cfg.hypothesis_set()
    rep = evidence.compare(hset, data)

    if cfg.output == "json":
        doc = {
            "command": "compare",
            "dataset": _dataset_header(data),
            "hypotheses": rep.names,
            "results": [
                {
                    "hypothesis": e.name,
                    "prior": e.prior,
                    "log_likelihood": _num(e.log_likelihood),
                    "posterior": e.posterior,
                    "log_bayes_factor": _num(e.log_bayes_factor),
                    "weight_of_evidence_db": _num(e.weight_of_evidence_db),
                    "relative_log_bayes_factors": [_num(x) for x in row],
                }
                for e, row in zip(rep.entries, rep.pairwise)
            ],
        }
        return _dump_json(doc), EXIT_OK
    if cfg.output == "csv":
        rows = [
            [e.name, _g(e.prior), _g(e.log_likelihood), _g(e.posterior), _g(e.log_bayes_factor), _g(e.weight_of_evidence_db)]
            for e in rep.entries
        ]
        header = ["hypothesis", "prior", "log_likelihood", "posterior", "log_bayes_factor", "weight_of_evidence_db"]
        return _csv(header, rows), EXIT_OK
    width = max(10, *(len(n) for n in rep.names))
    lines = [
        f"dataset: d={data.d} ({data.kind})",
        f"{'hypothesis':<{width}} {'prior':>8} {'log_lik':>10} {'posterior':>10} {'log_BF':>10} {'WoE_dB':>10}",
    ]
    for e in rep.entries:
        lines.append(
            f"{e.name:<{width}} {e.prior:>8.4f} {_f4(e.log_likelihood):>10} {e.posterior:>10.4f} "
            f"{_f4(e.log_bayes_factor):>10} {_f4(e.weight_of_evidence_db):>10}"
        )
    lines.append("")
    lines.append("relative log Bayes factors (row vs column):")
    lines.append(" " * width + "".join(f" {n:>10}" for n in rep.names))
    for name, row in zip(rep.names, rep.pairwise):
        lines.append(f"{name:<{width}}" + "".join(f" {_f4(x):>10}" for x in row))
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_subsets(cfg: RunConfig) -> tuple[str, int]:
    data = cfg.load_data()
    tables = []
    for spec in cfg.hypotheses:
        cache = lattice.build_cache(spec.hypothesis, data, cfg.d_max)
        tables.append((spec.hypothesis, lattice.per_cardinality_scores(cache, cfg.threads)))
    if cfg.output == "json":
        doc = {
            "command": "subsets",
            "dataset": _dataset_header(data),
            "results": [{"hypothesis": h.name, "kind": h.kind, "rows": _rows_json(t)} for h, t in tables],
        }
        return _dump_json(doc), EXIT_OK
    if cfg.output == "text":
        lines = [f"dataset: d={data.d} ({data.kind})"]
        for h, t in tables:
            lines.append(f"{h.name} [{h.kind}]")
            for row in t.rows:
                lines.append(f"  k={row.k:<3} count={row.count:<8} S_k={_f4(row.score)}  cumulative={_f4(row.cumulative)}")
        return "\n".join(lines) + "\n", EXIT_OK
    rows = [[h.name, r.k, r.count, _g(r.score), _g(r.cumulative)] for h, t in tables for r in t.rows]
    return _csv(["hypothesis", "k", "count", "score", "cumulative"], rows), EXIT_OK


COMMANDS = {
    "score": cmd_score,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "subsets": cmd_subsets,
}


# -- argument handling ----------------------------------------------------


def _leave_out(text: str) -> list[int]:
    try:
        ms = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--leave-out must be like '1,2,3' (got {text!r})") from None
    if not ms:
        raise argparse.ArgumentTypeError("--leave-out needs at least one value")
    return ms


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cvlattice",
        description="Log-likelihoods, cross-validation log-scores and their exact subset decomposition.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("score", "log-likelihood, LOO and leave-m-out scores per hypothesis"),
        ("verify", "check that the subset-averaged LOO scores add up to the log-likelihood"),
        ("compare", "posteriors, Bayes factors and weights of evidence for a hypothesis set"),
        ("subsets", "per-cardinality averaged LOO scores as CSV"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--data", required=True, type=Path, help="dataset file (single-column CSV or JSON array)")
        p.add_argument("--config", required=True, type=Path, help="hypothesis config (JSON)")
        p.add_argument("--format", dest="output", choices=["text", "json", "csv"],
                       default="csv" if name == "subsets" else "text")
        p.add_argument("--data-format", choices=["csv", "json"], help="default: from file extension")
        p.add_argument("--header", action="store_true", help="skip one header line in a CSV dataset")
        p.add_argument("--tolerance", type=float, help="identity tolerance (scaled by max(1, |log-likelihood|))")
        p.add_argument("--d-max", type=int, help="lattice size cap (default 20, at most 26)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--leave-out", type=_leave_out, default=[], help="comma-separated leave-out sizes")
    return ap


def make_config(args: argparse.Namespace) -> RunConfig:
    specs, tol, d_max = load_config(args.config)
    cfg = RunConfig(
        data_path=args.data,
        data_format=args.data_format or guess_format(args.data),
        hypotheses=specs,
        output=args.output,
        threads=args.threads,
        leave_out=args.leave_out,
        header=args.header,
    )
    if args.tolerance is not None:
        cfg.tolerance = args.tolerance
    elif tol is not None:
        cfg.tolerance = tol
    if args.d_max is not None:
        cfg.d_max = args.d_max
    elif d_max is not None:
        cfg.d_max = d_max
    cfg.validate(needs_priors=args.command == "compare")
    return cfg


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        text, code = COMMANDS[args.command](cfg)
    except (ModelDataMismatch, ZeroProbabilityError, DegenerateEvidenceError) as exc:
        print(f"cvlattice: data/model incompatibility: {exc}", file=err)
        return EXIT_DATA
    except (ConfigError, PreconditionError) as exc:
        print(f"cvlattice: {exc}", file=err)
        return EXIT_USAGE
    except CvLatticeError as exc:
        print(f"cvlattice: {exc}", file=err)
        return EXIT_USAGE
    out.write(text)
    if code == EXIT_IDENTITY:
        print("cvlattice: identity verification failed (implementation bug)", file=err)
    return code


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
