"""Command-line entry point: ``gen``, ``run``, ``bench`` and ``verify``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import work
from .edcs import EdcsParams
from .errors import DynMatchError
from .graph import DynamicGraph, Stream, UpdateEvent, format_stream, parse_stream
from .oracle import check_damaged_edcs, check_matching, mu
from .pipelines import (
    DamagedEdcsPipeline,
    ReducedMatcher,
    UniformPipeline,
    WorstCasePipeline,
    amortized_profile,
    scheduled_profile,
    summarize,
    uniform_scheduled_profile,
)
from .rational import frac
from .scheduler import smallest_k
from .streams import GENERATORS, generate
from .uniform import check_uniform
from .vertex_sparsify import parse_expander, verify_expander

ALGORITHMS = (
    "damaged-edcs",
    "damaged-edcs-batch",
    "worstcase-3-2",
    "uniform-sparsify",
    "uniform-sparsify-batch",
    "vertex-sparsify",
)
CSV_COLUMNS = ("step", "work_units", "matching_size", "mu_exact", "ratio", "rebuild_flag")


class CheckFailed(Exception):
    """A verified invariant did not hold."""


@dataclass
class RunConfig:
    algorithm: str
    beta: Fraction
    lam: Fraction
    delta: Fraction
    eps: Fraction
    k: int | None
    C: Fraction
    L: int
    seed: int
    verify_every: int
    allow_degenerate: bool = False

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            algorithm=ns.algo,
            beta=frac(ns.beta),
            lam=frac(ns.lam),
            delta=frac(ns.delta),
            eps=frac(ns.eps),
            k=ns.k,
            C=frac(ns.C),
            L=ns.L,
            seed=ns.seed,
            verify_every=getattr(ns, "verify_every", 0),
            allow_degenerate=ns.allow_degenerate,
        )

    def edcs_params(self) -> EdcsParams:
        return EdcsParams.of(self.beta, self.lam, self.delta)

    def batch_k(self) -> int:
        return self.k if self.k is not None else 4


def build_pipeline(cfg: RunConfig, n: int, steps: int):
    algo = cfg.algorithm
    if algo == "damaged-edcs":
        return DamagedEdcsPipeline(n, cfg.edcs_params(), cfg.eps, allow_degenerate=cfg.allow_degenerate)
    if algo == "damaged-edcs-batch":
        return DamagedEdcsPipeline(n, cfg.edcs_params(), cfg.eps, cfg.batch_k(),
                                   total_steps=steps, allow_degenerate=cfg.allow_degenerate)
    if algo == "worstcase-3-2":
        k = cfg.k if cfg.k is not None else smallest_k(max(steps, 1))
        return WorstCasePipeline(n, cfg.edcs_params(), cfg.eps, k, allow_degenerate=cfg.allow_degenerate)
    if algo == "uniform-sparsify":
        return UniformPipeline(n, cfg.lam, cfg.beta, cfg.eps)
    if algo == "uniform-sparsify-batch":
        return UniformPipeline(n, cfg.lam, cfg.beta, cfg.eps, cfg.batch_k(), total_steps=steps)
    if algo == "vertex-sparsify":
        return _ReducedPipeline(n, cfg)
    raise ValueError(f"unknown algorithm {algo!r}")


class _ReducedPipeline:
    def __init__(self, n: int, cfg: RunConfig) -> None:
        self.graph = DynamicGraph(n)
        self.inner = ReducedMatcher(self.graph, cfg.edcs_params(), cfg.eps, cfg.C, cfg.L, seed=cfg.seed)

    def update(self, ev: UpdateEvent) -> bool:
        self.graph.apply(ev)
        return self.inner.update(ev)

    def matching(self):
        return self.inner.matching()


def verify_step(cfg: RunConfig, pipe, matching) -> None:
    """Raise :class:`CheckFailed` naming the first invariant that does not hold."""
    g = pipe.graph
    if not check_matching(g, matching):
        raise CheckFailed("matching: output is not a matching of the live graph")
    if isinstance(pipe, DamagedEdcsPipeline):
        p = pipe.params
        rep = check_damaged_edcs(g, pipe.sparsifier(), p.beta, p.lam, p.delta, pipe.witness())
        if not rep.valid:
            first = rep.violations[0]
            raise CheckFailed(f"damaged-edcs clause {first.clause}: {first}")
    if isinstance(pipe, UniformPipeline):
        rep = check_uniform(pipe.sparsifier)
        if not rep.weight_cap_ok:
            raise CheckFailed("uniform-sparsify: an output weight reached beta")
        if not rep.pending_ok:
            raise CheckFailed("uniform-sparsify: pending buffer exceeds its slack")
        if not all(rep.deleted_ok):
            raise CheckFailed("uniform-sparsify: a deletion buffer exceeds its slack")
        if not rep.containment_ok:
            raise CheckFailed("uniform-sparsify: level containment broken")


def format_ratio(mu_exact: int, size: int) -> str:
    if mu_exact == 0:
        return "1.000000"
    if size == 0:
        return "inf"
    return f"{mu_exact / size:.6f}"


def ratio_bound(cfg: RunConfig, pipe) -> tuple[Fraction, Fraction] | None:
    """(multiplicative, additive) bound to assert, or None in report-only mode."""
    if cfg.algorithm.startswith("damaged-edcs") and cfg.edcs_params().satisfies_strict:
        return Fraction(3, 2) + cfg.eps, cfg.delta * pipe.graph.n
    return None


def run_stream(cfg: RunConfig, stream: Stream, out: io.TextIOBase) -> tuple[int, str | None]:
    """Write the metrics CSV; returns (rows, first failure or None)."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    pipe = build_pipeline(cfg, stream.n, len(stream.events))
    failure = None
    rows = 0
    for step, ev in enumerate(stream.events, start=1):
        with work.Meter() as m:
            rebuilt = pipe.update(ev)
        matching = pipe.matching()
        mu_exact = ratio = ""
        if cfg.verify_every > 0 and step % cfg.verify_every == 0:
            exact = mu(pipe.graph)
            mu_exact, ratio = str(exact), format_ratio(exact, len(matching))
            try:
                verify_step(cfg, pipe, matching)
                bound = ratio_bound(cfg, pipe)
                if bound is not None and len(matching) * bound[0] + bound[1] < exact:
                    raise CheckFailed(f"approximation: {exact} > {bound[0]}*{len(matching)} + {bound[1]}")
            except CheckFailed as exc:
                failure = failure or f"step {step}: {exc}"
        writer.writerow((step, m.units, len(matching), mu_exact, ratio, int(bool(rebuilt))))
        rows += 1
    return rows, failure


def _read_stream(path: str) -> Stream:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_stream(text)


def cmd_gen(ns: argparse.Namespace) -> int:
    events = generate(ns.kind, ns.n, ns.steps, ns.seed)
    text = format_stream(ns.n, events)
    if ns.out and ns.out != "-":
        Path(ns.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_run(ns: argparse.Namespace) -> int:
    cfg = RunConfig.from_args(ns)
    stream = _read_stream(ns.stream)
    if ns.metrics and ns.metrics != "-":
        with open(ns.metrics, "w", newline="") as fh:
            _, failure = run_stream(cfg, stream, fh)
    else:
        _, failure = run_stream(cfg, stream, sys.stdout)
    if failure:
        print(f"FAILED {failure}", file=sys.stderr)
        return 1
    return 0


def cmd_bench(ns: argparse.Namespace) -> int:
    cfg = RunConfig.from_args(ns)
    stream = _read_stream(ns.stream)
    events = stream.events
    k = cfg.k if cfg.k is not None else smallest_k(max(len(events), 1))
    if cfg.algorithm.startswith("uniform"):
        amort = []
        pipe = UniformPipeline(stream.n, cfg.lam, cfg.beta, cfg.eps)
        for ev in events:
            with work.Meter() as m:
                pipe.update(ev)
            amort.append(m.units)
        wrapped = uniform_scheduled_profile(stream.n, events, cfg.lam, cfg.beta, cfg.eps, k)
    else:
        amort = amortized_profile(stream.n, events, cfg.edcs_params())
        wrapped = scheduled_profile(stream.n, events, cfg.edcs_params(), k)
    for label, prof in (("amortized", amort), ("scheduled", wrapped)):
        s = summarize(prof, k)
        print(
            f"{label}: steps={s.steps} total={s.total} max={s.max} median={s.median:g} "
            f"max/median={s.ratio:.3f} batch_totals={','.join(map(str, s.batch_totals))}"
        )
    return 0


def cmd_verify(ns: argparse.Namespace) -> int:
    if ns.expander:
        exp = parse_expander(Path(ns.expander).read_text())
        ok = verify_expander(exp, ns.k or 1, frac(ns.eps))
        print(f"expander n_left={exp.n_left} n_right={exp.n_right} d={exp.d}: {'ok' if ok else 'NOT an expander'}")
        return 0 if ok else 1
    if not ns.stream:
        print("verify needs a stream or --expander", file=sys.stderr)
        return 2
    ns.verify_every = 1
    cfg = RunConfig.from_args(ns)
    rows, failure = run_stream(cfg, _read_stream(ns.stream), io.StringIO())
    if failure:
        print(f"FAILED {failure}", file=sys.stderr)
        return 1
    print(f"ok: {rows} steps verified")
    return 0


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=ALGORITHMS, default="damaged-edcs")
    p.add_argument("--n", type=int, help="ignored when the stream header gives n")
    p.add_argument("--beta", default="64")
    p.add_argument("--lambda", dest="lam", default="1/2")
    p.add_argument("--delta", default="1/2")
    p.add_argument("--eps", default="1/4")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--C", default="8")
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-degenerate", action="store_true",
                   help="accept rebuild periods that force a rebuild on every update")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynmatch", description="Dynamic matching sparsifiers")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a seeded update stream")
    g.add_argument("--kind", choices=sorted(GENERATORS), default="erdos-renyi-dynamic")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--steps", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", default="-")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run a pipeline and write per-step metrics")
    r.add_argument("stream")
    _add_params(r)
    r.add_argument("--verify-every", type=int, default=0)
    r.add_argument("--metrics", default="-")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="compare amortized and scheduled per-step work")
    b.add_argument("stream")
    _add_params(b)
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="check every step of a run, or an expander file")
    v.add_argument("stream", nargs="?")
    _add_params(v)
    v.add_argument("--expander")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except DynMatchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
