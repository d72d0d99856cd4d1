"""Command-line entry point: ``rskgue <subcommand> [flags]``.

Exit codes: 0 on success, 2 on bad input or unknown flags, 3 when a resource
cap would be exceeded, 1 when a numerical routine fails to converge.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import InputError, NumericError, ResourceError
from .experiments import (
    DEFAULT_GUE_TRIALS,
    cyclic_conjecture_test,
    fig2_report,
    fig2_run,
    histogram_svg,
    residual_sweep,
    theorem1_check,
)
from .qstat import DIM_CAP, identity_suite, moment_convergence, moments_csv
from .rmt import sample_spectra, spectra_csv, spectra_summary
from .shapes import exact_shape_distribution, rsk_row_insert
from .streams import default_seed
from .walks import MAX_SHAPES, estimated_shape_count, residual_report_csv
from .wordgen import StochasticMatrix, chain, variance_per_letter

MAX_TRIALS = 10**7


@dataclass
class RunConfig:
    subcommand: str
    k: int | None = None
    N: object = None
    trials: int | None = None
    seed: int | None = None
    chain: str | None = None
    output: str | None = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--format", choices=("csv", "json", "svg"), default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=None, help="default: $YG_SEED or 20010501")

    p = _Parser(prog="rskgue", description="Random words, RSK shapes and GUE spectra.")
    p.add_argument("--version", action="version", version=f"rskgue {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("rsk", parents=[common], help="shape and tableaux of words")
    s.add_argument("--word", type=_int_list, help="comma-separated letters, e.g. 2,1,1")
    s.add_argument("--input", help="file with one comma-separated word per line")
    s.add_argument("--k", type=int)

    s = sub.add_parser("dist", parents=[common], help="exact shape distribution")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--max-shapes", type=int, default=MAX_SHAPES)

    s = sub.add_parser("gue", parents=[common], help="sample traceless GUE spectra")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--trials", type=int, default=10**4)
    s.add_argument("--max-trials", type=int, default=MAX_TRIALS)

    s = sub.add_parser("theorem1", parents=[common], help="exact word law against GUE")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--gue-trials", type=int, default=DEFAULT_GUE_TRIALS)
    s.add_argument("--max-shapes", type=int, default=MAX_SHAPES)
    s.add_argument("--max-trials", type=int, default=MAX_TRIALS)

    s = sub.add_parser("fig2", parents=[common], help="Markov chains A, F, C+, C-")
    s.add_argument("--trials", type=int, default=10**5)
    s.add_argument("--max-trials", type=int, default=MAX_TRIALS)

    s = sub.add_parser("cyclic", parents=[common], help="circulant chain against GUE")
    s.add_argument("--chain", default="C+")
    s.add_argument("--chain-file")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--trials", type=int, default=10**5)
    s.add_argument("--gue-trials", type=int)
    s.add_argument("--max-trials", type=int, default=MAX_TRIALS)

    s = sub.add_parser("residual", parents=[common], help="local-limit residual sweep")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=_int_list, required=True, help="comma-separated lengths")
    s.add_argument("--max-shapes", type=int, default=MAX_SHAPES)

    s = sub.add_parser("casimir", parents=[common], help="operator identity residuals")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--max-dim", type=int, default=DIM_CAP)

    s = sub.add_parser("moments", parents=[common], help="tracial moments against Wick")
    s.add_argument("--monomial", default="Jx,Jy,Jx,Jy")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--n", type=_int_list, default=[4, 8, 12])
    s.add_argument("--max-dim", type=int, default=DIM_CAP)

    s = sub.add_parser("variance", parents=[common], help="variance per letter of a chain")
    s.add_argument("--chain", default="F")
    s.add_argument("--chain-file")
    s.add_argument("--method", choices=("auto", "closed", "series"), default="auto")
    return p


def _metadata(cfg: RunConfig) -> dict:
    return {"program": "rskgue", "version": __version__, "config": asdict(cfg), "seed": cfg.seed}


def _csv_with_header(cfg: RunConfig, body: str) -> str:
    return "# " + json.dumps(_metadata(cfg), sort_keys=True) + "\n" + body


def _json_with_header(cfg: RunConfig, result) -> str:
    return json.dumps({"metadata": _metadata(cfg), "result": result}, indent=2, sort_keys=True) + "\n"


def _svg_with_header(cfg: RunConfig, svg: str) -> str:
    meta = json.dumps(_metadata(cfg), sort_keys=True).replace("--", "- -")
    head, rest = svg.split("\n", 1)
    return f"{head}\n<!-- {meta} -->\n{rest}"


def _check_trials(n: int, cap: int) -> None:
    if n < 1:
        raise InputError("trials must be at least 1")
    if n > cap:
        raise ResourceError(f"{n} trials exceeds cap {cap}; raise --max-trials to allow")


def _check_dim(k: int, N: int, cap: int) -> None:
    if k < 2 or N < 1:
        raise InputError("need k >= 2 and n >= 1")
    if k**N > cap:
        raise ResourceError(f"tensor dimension {k}^{N} exceeds cap {cap}; raise --max-dim to allow")


def _load_chain(args) -> tuple[StochasticMatrix, str]:
    if getattr(args, "chain_file", None):
        try:
            text = Path(args.chain_file).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {args.chain_file}: {exc}") from exc
        return StochasticMatrix.from_json(text), args.chain_file
    return chain(args.chain), args.chain


def _read_words(args) -> list[list[int]]:
    if args.word is not None and args.input:
        raise InputError("give --word or --input, not both")
    if args.word is not None:
        return [args.word]
    if not args.input:
        raise InputError("rsk needs --word or --input")
    try:
        lines = Path(args.input).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc}") from exc
    return [_int_list(line) for line in lines if line.strip() and not line.startswith("#")]


def _dotted(parts) -> str:
    return ".".join(str(p) for p in parts)


def run(args) -> str:
    cmd = args.subcommand
    seed = args.seed if args.seed is not None else default_seed()
    if seed < 0:
        raise InputError("seed must be non-negative")
    cfg = RunConfig(cmd, getattr(args, "k", None), getattr(args, "n", None), getattr(args, "trials", None), seed)
    cfg.output = args.output
    fmt = args.format or "csv"
    cfg.format = fmt
    if fmt == "svg" and cmd != "fig2":
        raise InputError("svg output is only available for fig2")

    if cmd == "rsk":
        words = _read_words(args)
        rows = []
        for w in words:
            t = rsk_row_insert(w, args.k)
            rows.append({"word": list(w), "shape": _dotted(t.shape.parts), "P": [list(r) for r in t.P], "Q": [list(r) for r in t.Q]})
        if fmt == "json":
            return _json_with_header(cfg, rows)
        body = "word,shape\n" + "".join(f"{_dotted(r['word'])},{r['shape']}\n" for r in rows)
        return _csv_with_header(cfg, body)

    if cmd == "dist":
        if args.k < 1 or args.n < 0:
            raise InputError("need k >= 1 and n >= 0")
        if estimated_shape_count(args.k, args.n) > args.max_shapes:
            raise ResourceError(f"too many shapes at k={args.k}, n={args.n}; raise --max-shapes to allow")
        dist = exact_shape_distribution(args.k, args.n)
        if fmt == "json":
            counts = {lam.dotted(args.k): c for lam, c in dist.counts.items()}
            return _json_with_header(cfg, {"k": args.k, "N": args.n, "total": dist.total, "counts": counts})
        return _csv_with_header(cfg, dist.to_csv())

    if cmd == "gue":
        _check_trials(args.trials, args.max_trials)
        spectra = sample_spectra(args.k, args.trials, seed, args.threads)
        if fmt == "json":
            return _json_with_header(cfg, spectra_summary(spectra, seed))
        return _csv_with_header(cfg, spectra_csv(spectra))

    if cmd == "theorem1":
        if args.k >= 3:
            _check_trials(args.gue_trials, args.max_trials)
        cfg.extra = {"gue_trials": args.gue_trials}
        report = theorem1_check(args.k, args.n, args.gue_trials, seed, args.threads, args.max_shapes)
        return _json_with_header(cfg, report.to_dict()) if fmt == "json" else _csv_with_header(cfg, report.to_csv())

    if cmd == "fig2":
        _check_trials(args.trials, args.max_trials)
        dists = fig2_run(args.trials, seed, args.threads)
        if fmt == "svg":
            return _svg_with_header(cfg, histogram_svg(dists))
        report = fig2_report(dists)
        return _json_with_header(cfg, report.to_dict()) if fmt == "json" else _csv_with_header(cfg, report.to_csv())

    if cmd == "cyclic":
        _check_trials(args.trials, args.max_trials)
        if args.gue_trials is not None:
            _check_trials(args.gue_trials, args.max_trials)
        M, name = _load_chain(args)
        cfg.chain = name
        cfg.extra = {"gue_trials": args.gue_trials}
        report = cyclic_conjecture_test(M, args.n, args.trials, seed, args.gue_trials, args.threads)
        return _json_with_header(cfg, report.to_dict()) if fmt == "json" else _csv_with_header(cfg, report.to_csv())

    if cmd == "residual":
        records = residual_sweep(args.k, args.n, args.max_shapes)
        if fmt == "json":
            return _json_with_header(cfg, [asdict(r) for r in records])
        return _csv_with_header(cfg, residual_report_csv(records))

    if cmd == "casimir":
        _check_dim(args.k, args.n, args.max_dim)
        res = identity_suite(args.k, args.n)
        if fmt == "json":
            return _json_with_header(cfg, res)
        return _csv_with_header(cfg, "identity,max_residual\n" + "".join(f"{k},{v!r}\n" for k, v in res.items()))

    if cmd == "moments":
        for N in args.n:
            _check_dim(args.k, N, args.max_dim)
        names = [t.strip() for t in args.monomial.split(",") if t.strip()]
        cfg.extra = {"monomial": names}
        rows = moment_convergence(names, args.k, args.n)
        if fmt == "json":
            out = [
                {"monomial": r.monomial, "N": r.N, "exact": [r.exact.real, r.exact.imag], "wick": r.wick, "abs_diff": r.abs_diff}
                for r in rows
            ]
            return _json_with_header(cfg, out)
        return _csv_with_header(cfg, moments_csv(rows))

    if cmd == "variance":
        M, name = _load_chain(args)
        cfg.chain = name
        cfg.k = M.k
        v = variance_per_letter(M, args.method)
        if fmt == "json":
            return _json_with_header(cfg, {"chain": name, "v": v})
        return _csv_with_header(cfg, f"chain,v\n{name},{v!r}\n")

    raise InputError(f"unknown subcommand {cmd!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = run(args)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    except SystemExit as exc:
        # --help and --version exit through argparse
        return int(exc.code or 0)
    except InputError as exc:
        print(f"rskgue: error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"rskgue: resource cap: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"rskgue: numerical failure: {exc}", file=sys.stderr)
        return 1
