"""Command-line interface: ``priorsample {sample,diagnose,benchmark}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(every likelihood underflowed, LAPS copy cap exceeded, ...).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import core, diagnostics, models
from .io import run_manifest, samples_to_json, write_manifest, write_samples
from .rng import Stream
from .types import PriorSampleError, TotalUnderflow, WeightedPosterior

logger = logging.getLogger("priorsample")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

BENCH_COLUMNS = ["grid_point", "seed", "ks", "ess", "d2_hat", "exp_d2_hat", "wall_time_s"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    algorithm: str = "lips"
    model: str = "gaussian-gaussian"
    params: dict = field(default_factory=dict)
    n: int = 10_000
    m: Optional[int] = None
    c: Optional[float] = None
    seed: int = 0
    shards: int = 1
    output: Optional[str] = None
    format: str = "csv"
    max_copies: int = core.DEFAULT_MAX_COPIES

    def validate(self) -> "RunConfig":
        if self.algorithm not in ("lips", "laps", "slips"):
            raise UsageError(f"unknown algorithm {self.algorithm!r}")
        if self.n < 1:
            raise UsageError("--n must be >= 1")
        if self.m is not None and self.algorithm != "slips":
            raise UsageError("--m only applies to slips")
        if self.c is not None and self.algorithm != "laps":
            raise UsageError("--c only applies to laps")
        if self.algorithm == "slips":
            self.m = self.n if self.m is None else self.m
            if self.m < 1:
                raise UsageError("--m must be >= 1")
        if self.algorithm == "laps":
            self.c = 100.0 if self.c is None else self.c
            if not (self.c > 0 and math.isfinite(self.c)):
                raise UsageError("--c must be a positive number")
        if self.shards < 1:
            raise UsageError("--shards must be >= 1")
        if self.seed < 0:
            raise UsageError("--seed must be non-negative")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        return self

    def build_model(self):
        try:
            return models.build_model(self.model, self.params)
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(str(exc).strip("'\"")) from exc


def _parse_params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"model parameter {item!r} is not key=value")
        out[key.strip().replace("-", "_")] = _number(value)
    return out


def _number(text: str):
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"{text!r} is not a number") from None
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


def _add_run_args(p: argparse.ArgumentParser, with_algorithm: bool = True):
    p.add_argument("--model", default="gaussian-gaussian", choices=sorted(models.MODELS))
    p.add_argument("-p", "--param", action="append", metavar="KEY=VALUE",
                   help="model parameter, repeatable")
    p.add_argument("--x", "--xbar", dest="xbar", type=float, help="observation mean (gaussian models)")
    p.add_argument("--t", dest="t", type=int, help="number of observations (gaussian models)")
    if with_algorithm:
        p.add_argument("--algorithm", default="lips", choices=["lips", "laps", "slips"])
    p.add_argument("--n", type=int, default=10_000, help="prior draws")
    p.add_argument("--m", type=int, help="SLIPS resample size (default n)")
    p.add_argument("--c", type=float, help="LAPS copies of the best draw (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--max-copies", type=int, default=core.DEFAULT_MAX_COPIES)


def _config(args, with_algorithm=True) -> RunConfig:
    params = _parse_params(args.param)
    if args.xbar is not None:
        key = "x" if args.model == "latent-gaussian-chain" else "xbar"
        params[key] = args.xbar
    if args.t is not None:
        params["t"] = args.t
    return RunConfig(
        algorithm=args.algorithm if with_algorithm else "lips",
        model=args.model,
        params=params,
        n=args.n,
        m=args.m,
        c=args.c,
        seed=args.seed,
        shards=args.shards,
        output=getattr(args, "output", None),
        format=getattr(args, "format", "csv"),
        max_copies=args.max_copies,
    ).validate()


def _run(cfg: RunConfig, model):
    root = Stream(cfg.seed)
    weighted = core.lips(model, cfg.n, root, cfg.shards)
    if cfg.algorithm == "lips":
        return weighted, weighted
    if cfg.algorithm == "laps":
        return weighted, core.amplify(weighted, cfg.c, cfg.max_copies)
    return weighted, core.resample(weighted, cfg.m, root)


def cmd_sample(args) -> int:
    cfg = _config(args)
    model = cfg.build_model()
    _, post = _run(cfg, model)
    out = Path(cfg.output or f"samples.{cfg.format}")
    if cfg.format == "csv":
        write_samples(out, post)
    else:
        out.write_text(samples_to_json(post), encoding="utf-8")
    rows = post.n if isinstance(post, WeightedPosterior) else post.size
    manifest = run_manifest(asdict(cfg), {"rows": rows, "samples": out.name})
    write_manifest(out.with_name(out.name + ".manifest.json"), manifest)
    logger.info("wrote %s", out)
    return EXIT_OK


def _half_line(text: str):
    upper = _number(text)
    return core.half_line(float(upper))


def cmd_diagnose(args) -> int:
    cfg = _config(args)
    model = cfg.build_model()
    weighted, post = _run(cfg, model)
    cdf = None
    if model.analytic_posterior_cdf is not None:
        cdf = lambda x: model.analytic_posterior_cdf(x, 0)  # noqa: E731
    sets = [_half_line(s) for s in (args.set or [])]
    report = diagnostics.diagnose(weighted, sets, cdf, post)
    text = report.to_json(indent=None) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


FIGURES = {
    "fig1": {"model": {"xbar": 1.0, "t": 1}, "n": 10_000},
    "fig2": {"model": {"xbar": 1.0, "t": 10_000}, "n": 100_000},
}


def _bench_row(grid_point, seed, post, weighted, cdf) -> dict:
    e = diagnostics.ess(weighted.weights)
    d2 = math.log(weighted.n) - math.log(e)
    return {
        "grid_point": grid_point,
        "seed": seed,
        "ks": diagnostics.ks_distance(post, cdf) if cdf else float("nan"),
        "ess": e,
        "d2_hat": d2,
        "exp_d2_hat": math.exp(d2),
    }


def benchmark_rows(target: str, seed: int = 0, reps: int = 1, n: Optional[list] = None,
                   t_grid: Optional[list] = None, xbar: float = 1.0, shards: int = 1) -> list[dict]:
    rows = []
    if target in FIGURES:
        fig = FIGURES[target]
        model = models.make_gaussian_gaussian(xbar=xbar, t=fig["model"]["t"])
        cdf = lambda x: model.analytic_posterior_cdf(x, 0)  # noqa: E731
        for size in n or [fig["n"]]:
            for r in range(reps):
                s = seed + r
                start = time.perf_counter()
                weighted = core.lips(model, size, Stream(s), shards)
                post = core.resample(weighted, size, Stream(s))
                wall = time.perf_counter() - start
                row = _bench_row(size, s, post, weighted, cdf)
                row["wall_time_s"] = wall
                rows.append(row)
    elif target == "sweep":
        size = (n or [1_000_000])[0]
        family = models.gaussian_family(xbar=xbar)
        for t in t_grid or [10, 100, 1000, 10_000]:
            model = family(t)
            cdf = lambda x, model=model: model.analytic_posterior_cdf(x, 0)  # noqa: E731
            for r in range(reps):
                s = seed + r
                start = time.perf_counter()
                try:
                    weighted = core.lips(model, size, Stream(s), shards)
                except TotalUnderflow:
                    rows.append({"grid_point": t, "seed": s, "ks": float("nan"), "ess": float("nan"),
                                 "d2_hat": float("nan"), "exp_d2_hat": float("nan"),
                                 "wall_time_s": time.perf_counter() - start})
                    continue
                wall = time.perf_counter() - start
                row = _bench_row(t, s, weighted, weighted, cdf)
                row["wall_time_s"] = wall
                rows.append(row)
    else:
        raise UsageError(f"unknown benchmark {target!r}")
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_benchmark(args) -> int:
    if args.reps < 1 or args.seed < 0 or args.shards < 1:
        raise UsageError("--reps and --shards must be >= 1 and --seed >= 0")
    rows = benchmark_rows(args.target, args.seed, args.reps, args.n, args.t_grid, args.xbar, args.shards)
    text = rows_to_csv(rows)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="priorsample", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw a posterior sample and write it to a file")
    _add_run_args(p)
    p.add_argument("-o", "--output", help="sample file (default samples.<format>)")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("diagnose", help="print the diagnostics report as JSON")
    _add_run_args(p)
    p.add_argument("--set", action="append", metavar="UPPER",
                   help="half-line (-inf, UPPER] on coordinate 0 for per-set variance; repeatable")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser(
        "benchmark",
        help="reproduce the Gaussian figures or run a t sweep",
        description="CSV columns: " + ", ".join(BENCH_COLUMNS)
        + ". grid_point is n for fig1/fig2 and t for sweep; ks is against the analytic posterior.",
    )
    p.add_argument("target", choices=["fig1", "fig2", "sweep"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1, help="seeds seed .. seed+reps-1")
    p.add_argument("--n", type=_int_list, help="comma-separated draw counts")
    p.add_argument("--t-grid", type=_int_list, help="comma-separated t values for sweep")
    p.add_argument("--x", "--xbar", dest="xbar", type=float, default=1.0)
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"priorsample: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TotalUnderflow as exc:
        print(f"priorsample: numerical failure: {exc} (prior and likelihood barely overlap; raise --n)",
              file=sys.stderr)
        return EXIT_NUMERIC
    except PriorSampleError as exc:
        print(f"priorsample: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
