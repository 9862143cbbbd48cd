"""Command-line interface: ``chunkreg {simulate,ingest,sample,summarize,bench}``.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical
error.  Every failure prints exactly one ``chunkreg: error: <kind>: <reason>``
line on stderr (usage errors print the usage text first).
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import posterior
from .conditionals import Flat, InverseGamma, Jeffreys, MvnKnown, MvnUnknown
from .distributions import SpdMatrix
from .errors import ChunkregError, DataError, DomainError, NumericalError
from .gibbs import ChainConfig, reduce_for_zero_intercept, run_chain, run_chains
from .simulate import SimulationConfig, simulate_dataset
from .summaries import IngestConfig, ingest, load, save

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _fail(kind: str, message: str) -> None:
    print(f"chunkreg: error: {kind}: {' '.join(str(message).split())}", file=sys.stderr)


def parse_cols(text: str) -> list[int]:
    """``"1-10"``, ``"2,3"``, ``"1-3,7"`` -> list of 1-based indices."""
    cols: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                a, b = part.split("-", 1)
                lo, hi = int(a), int(b)
                if hi < lo:
                    raise ValueError(part)
                cols.extend(range(lo, hi + 1))
            elif part:
                cols.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid column list {text!r}") from None
    if not cols:
        raise argparse.ArgumentTypeError("empty column list")
    return cols


def parse_probs(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid probability list {text!r}") from None


def _delimiter(text: str) -> str:
    return {"tab": "\t", "\\t": "\t", "space": " "}.get(text, text)


def _numbers(value: str, what: str) -> np.ndarray:
    """Load a vector/matrix from a file, or from an inline comma list."""
    path = Path(value)
    if path.is_file():
        text = path.read_text()
        try:
            return np.loadtxt(path, delimiter="," if "," in text else None, ndmin=1)
        except ValueError as exc:
            raise DataError(f"{what}: cannot parse {value}: {exc}") from exc
    try:
        return np.array([float(v) for v in value.split(",")])
    except ValueError:
        raise DataError(f"{what}: {value!r} is neither a file, a number list nor a literal") from None


def hyper_vector(value: Optional[str], p: int, what: str):
    if value is None:
        return None
    if value == "zeros":
        return np.zeros(p)
    if value == "ones":
        return np.ones(p)
    v = _numbers(value, what)
    if v.ndim != 1:
        raise DataError(f"{what} must be a vector")
    return v


def hyper_matrix(value: Optional[str], p: int, what: str):
    if value is None:
        return None
    if value == "identity":
        return SpdMatrix.identity(p)
    if value == "zeros":
        raise DataError(f"{what} must be positive definite; 'zeros' is not")
    m = _numbers(value, what)
    if m.ndim == 1 and m.size == 1:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise DataError(f"{what} must be a square matrix")
    return m


def _beta_prior(args, p: int):
    kind = args.beta_prior
    if kind == "flat":
        return Flat()
    if kind == "mvnorm-known":
        return MvnKnown(
            mu=hyper_vector(args.mean_mu, p, "mean.mu"),
            C=hyper_matrix(args.cov_c, p, "cov.C"),
            Cinv=hyper_matrix(args.prec_cinv, p, "prec.Cinv"),
        )
    return MvnUnknown(
        eta=hyper_vector(args.eta, p, "mu.hyper.mean.eta"),
        Dinv=hyper_matrix(args.dinv, p, "mu.hyper.prec.Dinv"),
        lam=args.lam,
        Vinv=hyper_matrix(args.vinv, p, "Cinv.hyper.invscale.Vinv"),
        mu_init=hyper_vector(args.mu_init, p, "mu.init"),
        Cinv_init=hyper_matrix(args.cinv_init, p, "Cinv.init"),
    )


def _sigmasq_prior(args):
    if args.sigmasq_prior == "jeffreys":
        return Jeffreys(sigmasq_init=args.sigmasq_init)
    return InverseGamma(a=args.ig_a, b=args.ig_b, sigmasq_init=args.sigmasq_init)


def _byte_count(sources: Sequence[str]) -> int:
    return sum(os.path.getsize(s) for s in sources if os.path.isfile(s))


# --- subcommands --------------------------------------------------------


def cmd_ingest(args) -> int:
    config = IngestConfig(
        files=args.input,
        predictor_cols=args.predictor_cols,
        response_col=args.response_col,
        first_rows=args.first_rows,
        next_rows=args.next_rows,
        skip_rows=args.skip,
        delimiter=_delimiter(args.delimiter),
        add_intercept=not args.no_intercept,
    )
    previous = load(args.update) if args.update else None
    stats = ingest(config, update=previous)
    save(stats, args.out)
    print(f"n={stats.n} p={stats.p} bytes={_byte_count(args.input)} out={args.out}")
    return EXIT_OK


def cmd_sample(args) -> int:
    stats = load(args.stats)
    p = reduce_for_zero_intercept(stats).p if args.zero_intercept else stats.p
    config = ChainConfig(
        t_samples=args.samples,
        seed=args.seed,
        zero_intercept=args.zero_intercept,
        beta_prior=_beta_prior(args, p),
        sigmasq_prior=_sigmasq_prior(args),
    )
    prefix = args.out_prefix
    if args.chains == 1:
        chains = [run_chain(stats, config)]
        paths = [f"{prefix}draws.csv"]
    else:
        chains = run_chains(stats, config, args.chains)
        paths = [f"{prefix}chain{i}_draws.csv" for i in range(args.chains)]
    for chain, path in zip(chains, paths):
        rows = posterior.write_draws(chain, path)
        print(f"draws={rows} p={chain.p} out={path}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    chain = posterior.read_draws(args.draws)
    probs = args.probs
    sums = posterior.summarize(chain, args.burn_in, probs)
    cols = chain.columns()
    header = ["parameter", "mean", "sd", "naive_se"] + [posterior.prob_label(q) for q in probs]
    header += ["ci_lo", "ci_hi"]
    lines = ["  ".join(f"{h:>12}" for h in header)]
    for s in sums:
        lo, hi = posterior.credible_interval(s, args.level, cols[s.name][args.burn_in :])
        vals = [s.mean, s.sd, s.naive_se] + list(s.quantiles.values()) + [lo, hi]
        lines.append("  ".join([f"{s.name:>12}"] + [f"{v:>12.6g}" for v in vals]))
    print(f"retained draws: {chain.t_samples - args.burn_in} (burn-in {args.burn_in}), "
          f"{args.level:g} equal-tail intervals")
    print("\n".join(lines))
    if args.out:
        posterior.write_summary(sums, args.out)
    if args.plot_data:
        prefix = args.plot_data
        written = posterior.write_plot_data(chain, args.burn_in, prefix)
        print(f"plot data files: {len(written)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        config = SimulationConfig(
            n=args.n,
            k=args.k,
            rho=args.rho,
            sigma_sq=args.sigma_sq,
            seed=args.seed,
            chunk_rows=args.chunk_rows,
            digits=args.digits,
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    beta = simulate_dataset(config, args.out, args.truth_out)
    size = os.path.getsize(args.out)
    print(f"bytes={size} out={args.out}")
    print("beta=" + ",".join(format(b, ".17g") for b in beta))
    return EXIT_OK


DEFAULT_BENCH_PRIORS = "1:1,2:2,3:2"


def _bench_priors(spec: str):
    out = []
    for item in spec.split(","):
        try:
            b, s = (int(v) for v in item.split(":"))
        except ValueError:
            raise UsageError(f"invalid prior pair {item!r}; expected BETA:SIGMASQ") from None
        if b not in (1, 2, 3) or s not in (1, 2):
            raise UsageError(f"prior pair {item!r} out of range (beta 1-3, sigmasq 1-2)")
        out.append((b, s))
    return out


def cmd_bench(args) -> int:
    pairs = _bench_priors(args.priors)
    betas = {1: Flat(), 2: MvnKnown(), 3: MvnUnknown()}
    sigmas = {1: InverseGamma(), 2: Jeffreys()}
    with tempfile.TemporaryDirectory(dir=args.workdir) as tmp:
        data = Path(tmp) / "bench.csv"
        simulate_dataset(
            SimulationConfig(n=args.n, k=args.k, seed=args.seed, digits=args.digits), data
        )
        size = os.path.getsize(data)
        t0 = time.perf_counter()
        stats = ingest(
            IngestConfig([data], list(range(1, args.k + 1)), args.k + 1,
                         first_rows=args.first_rows, next_rows=args.next_rows)
        )
        ingest_s = time.perf_counter() - t0
    times = []
    for b, s in pairs:
        cfg = ChainConfig(t_samples=args.samples, seed=args.seed,
                          beta_prior=betas[b], sigmasq_prior=sigmas[s])
        t0 = time.perf_counter()
        run_chain(stats, cfg)
        times.append(time.perf_counter() - t0)
    header = ["predictors", "rows", "bytes", "ingest_seconds"]
    header += [f"sample_seconds_beta{b}_sigmasq{s}" for b, s in pairs]
    row = [str(args.k), str(stats.n), str(size), f"{ingest_s:.3f}"] + [f"{t:.3f}" for t in times]
    print(",".join(header))
    print(",".join(row))
    return EXIT_OK


# --- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chunkreg", description="Out-of-core Bayesian linear regression.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="compute summary statistics from delimited files")
    p.add_argument("--input", action="append", required=True, help="data file (repeatable)")
    p.add_argument("--predictor-cols", type=parse_cols, required=True, help="e.g. 1-10 or 2,3")
    p.add_argument("--response-col", type=int, required=True)
    p.add_argument("--first-rows", type=int, default=100_000)
    p.add_argument("--next-rows", type=int, default=100_000)
    p.add_argument("--skip", type=int, default=0, help="leading rows to skip per file")
    p.add_argument("--delimiter", default=",", help="single character, or 'tab'")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--update", help="statistics file to add the new rows to")
    p.add_argument("--out", required=True, help="statistics file to write")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sample", help="run the Gibbs sampler on a statistics file")
    p.add_argument("--stats", required=True)
    p.add_argument("--beta-prior", choices=["flat", "mvnorm-known", "mvnorm-unknown"], default="flat")
    p.add_argument("--sigmasq-prior", choices=["inverse-gamma", "jeffreys"], default="inverse-gamma")
    p.add_argument("--mean-mu", help="vector file, comma list, 'zeros' or 'ones'")
    p.add_argument("--cov-c", help="matrix file or 'identity'")
    p.add_argument("--prec-cinv", help="matrix file or 'identity'; preferred over --cov-c")
    p.add_argument("--eta")
    p.add_argument("--dinv")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--vinv")
    p.add_argument("--mu-init")
    p.add_argument("--cinv-init")
    p.add_argument("--ig-a", type=float, default=1.0)
    p.add_argument("--ig-b", type=float, default=1.0)
    p.add_argument("--sigmasq-init", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-intercept", action="store_true")
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("summarize", help="posterior summaries of a draws file")
    p.add_argument("--draws", required=True)
    p.add_argument("--burn-in", type=int, default=0)
    p.add_argument("--probs", type=parse_probs, default=list(posterior.DEFAULT_PROBS))
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--out", help="write the summary table as CSV")
    p.add_argument("--plot-data", metavar="PREFIX", help="write history/density files")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("simulate", help="write a synthetic regression data set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--sigma-sq", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chunk-rows", type=int, default=100_000)
    p.add_argument("--digits", type=int, default=17, help="significant digits per value")
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="time ingestion and sampling")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=11_000)
    p.add_argument("--priors", default=DEFAULT_BENCH_PRIORS, help="BETA:SIGMASQ pairs, e.g. 1:1,3:2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--digits", type=int, default=6)
    p.add_argument("--first-rows", type=int, default=100_000)
    p.add_argument("--next-rows", type=int, default=100_000)
    p.add_argument("--workdir")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _fail("usage", str(exc))
        return EXIT_USAGE
    except NumericalError as exc:
        _fail("numerical", str(exc))
        return EXIT_NUMERIC
    except DataError as exc:
        _fail("data", str(exc))
        return EXIT_DATA
    except ChunkregError as exc:
        _fail("error", str(exc))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
