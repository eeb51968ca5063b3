"""Command-line entry point: ``rdvlab <subcommand> ...``.

Exit codes: 0 success, 1 a verifier failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import bounds, exact, montecarlo, optimize
from .model import GameError, Strategy, Tactic, format_strategy, make_tactic, parse_strategy, parse_tactics, point_mass
from .report import dec, dumps, estimate_json, moments_json, rat, report_json, survival_json
from .zoo import AWConfig, BlockMode, anderson_weber, all_constant_strategy, uniform_random_strategy, wait_for_mommy_pair

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- argument helpers ---------------------------------------------------------------

def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _theta_grid(text: str) -> list[float]:
    """``0:1:0.05`` (inclusive) or a comma list ``0.2,0.25``."""
    try:
        if ":" in text:
            lo, hi, step = (Fraction(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            k = int((hi - lo) / step)
            return [float(lo + i * step) for i in range(k + 1)]
        return [float(Fraction(x)) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad theta grid {text!r}") from None


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise GameError(f"no such file: {path}")
    return p.read_text()


def _tactic(text: str, n: Optional[int]) -> Tactic:
    if text.startswith("@"):
        ts = parse_tactics(_read(text[1:]), n)
        if len(ts) != 1:
            raise GameError(f"{text[1:]}: expected exactly one tactic, found {len(ts)}")
        return ts[0]
    try:
        locs = [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise GameError(f"tactic must be whitespace-separated integers, got {text!r}") from None
    return make_tactic(n if n is not None else len(locs), locs)


def _tactic_pair(args) -> tuple[Tactic, Tactic]:
    if args.tactics:
        ts = parse_tactics(_read(args.tactics), args.n)
        if len(ts) != 2:
            raise GameError(f"{args.tactics}: expected two tactics, found {len(ts)}")
        return ts[0], ts[1]
    if args.tactic_a is None or args.tactic_b is None:
        raise UsageError("give --tactic-a and --tactic-b, or --tactics FILE")
    tA, tB = _tactic(args.tactic_a, args.n), _tactic(args.tactic_b, args.n)
    if tA.n != tB.n:
        raise GameError(f"tactics have different n ({tA.n} vs {tB.n})")
    return tA, tB


def strategy_from_spec(spec: str, n: Optional[int], role: str = "a", *,
                       theta: Fraction = Fraction(1, 4), aw_mode: str = "truncated",
                       horizon: Optional[int] = None) -> Strategy:
    """Resolve a strategy spec.

    ``baby``, ``mommy``, ``wfm`` (baby for player A, mommy for player B),
    ``uniform``, ``all-stay``, ``aw[:THETA[:MODE]]``, ``@FILE`` (strategy text
    format) or an itinerary such as ``"1 2 3 4"`` (point mass).
    """
    if spec.startswith("@"):
        s = parse_strategy(_read(spec[1:]), name=spec[1:])
        if n is not None and s.n != n:
            raise GameError(f"{spec[1:]} has n={s.n}, expected {n}")
        return s
    head, *rest = spec.split(":")
    if head[:1].isdigit():
        return point_mass(_tactic(spec, n))
    if n is None:
        raise UsageError(f"strategy {spec!r} needs --n")
    if head in ("baby", "mommy", "wfm"):
        baby, mommy = wait_for_mommy_pair(n)
        if head == "wfm":
            return baby if role == "a" else mommy
        return baby if head == "baby" else mommy
    if head == "uniform":
        return uniform_random_strategy(n)
    if head == "all-stay":
        return all_constant_strategy(n)
    if head == "aw":
        if len(rest) > 2:
            raise GameError(f"bad aw spec {spec!r}; use aw[:THETA[:MODE]]")
        if rest and rest[0]:
            try:
                theta = Fraction(rest[0])
            except (ValueError, ZeroDivisionError):
                raise GameError(f"bad theta in {spec!r}") from None
        if len(rest) == 2:
            aw_mode = rest[1]
        try:
            mode = BlockMode(aw_mode)
        except ValueError:
            raise GameError(f"aw mode must be truncated or multiblock, got {aw_mode!r}") from None
        return anderson_weber(AWConfig(n, theta, mode, horizon if mode is BlockMode.MULTIBLOCK else None))
    raise GameError(f"unknown strategy {spec!r}")


def _strategy_arg(args, spec: str, role: str, horizon: Optional[int] = None) -> Strategy:
    return strategy_from_spec(spec, args.n, role, theta=args.theta, aw_mode=args.aw_mode, horizon=horizon)


# -- commands -----------------------------------------------------------------------

class Result:
    """What a command produced: a JSON-able payload plus optional text/CSV renderings."""

    def __init__(self, payload, text: Optional[str] = None, csv_text: Optional[str] = None,
                 ok: bool = True):
        self.payload, self.text, self.csv_text, self.ok = payload, text, csv_text, ok


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _pair_header(tA: Tactic, tB: Tactic) -> dict:
    return {"n": tA.n, "tactic_a": str(tA), "tactic_b": str(tB)}


def cmd_eval(args) -> Result:
    tA, tB = _tactic_pair(args)
    curve = exact.survival_curve(tA, tB, args.engine)
    w, p0 = curve.expectation(), curve.values[-1]
    out = _pair_header(tA, tB) | {"w": rat(w), "w_decimal": dec(w)} | survival_json(curve)
    out |= {"p_no_meet": rat(p0), "p_no_meet_decimal": dec(p0), "engine": args.engine}
    return Result(out, text=f"w = {rat(w)}\n")


def cmd_survival(args) -> Result:
    tA, tB = _tactic_pair(args)
    curve = exact.survival_curve(tA, tB, args.engine)
    rows = [(k, rat(v), dec(v)) for k, v in enumerate(curve.values)]
    text = "".join(f"P(Z>{k}) = {r}\n" for k, r, _ in rows)
    return Result(_pair_header(tA, tB) | survival_json(curve), text=text,
                  csv_text=_csv(("k", "survival", "survival_decimal"), rows))


def cmd_moments(args) -> Result:
    tA, tB = _tactic_pair(args)
    m = exact.moments(tA, tB, args.engine)
    out = _pair_header(tA, tB) | moments_json(m)
    text = "".join(f"{k} = {out[k]}\n" for k in ("m", "mean", "variance", "fourth_moment", "fourth_central", "p_zero"))
    return Result(out, text=text)


def cmd_phi(args) -> Result:
    sA = _strategy_arg(args, args.strategy_a, "a")
    sB = _strategy_arg(args, args.strategy_b, "b")
    value = exact.bilinear_phi(sA, sB)
    out = {"n": sA.n, "strategy_a": sA.name, "strategy_b": sB.name, "phi": rat(value), "phi_decimal": dec(value)}
    return Result(out, text=f"phi = {rat(value)}\n")


PAIR_LEMMAS = tuple(bounds.PAIR_VERIFIERS)
SCAN_LEMMAS = ("same-kind-gap", "many-disjoint", "theorem1-assembly", "chain")


def cmd_verify(args) -> Result:
    lemma = args.lemma
    n = args.n
    if lemma == "theorem1-assembly":
        if not args.strategy:
            raise UsageError("theorem1-assembly needs --strategy")
        reports = [bounds.verify_theorem1_assembly(_strategy_arg(args, args.strategy, "a"))]
    elif lemma in PAIR_LEMMAS and (args.tactic_a or args.tactics):
        tA, tB = _tactic_pair(args)
        fn = bounds.PAIR_VERIFIERS[lemma]
        reports = [fn(tA, tB, args.alpha) if lemma == "var-pb" else fn(tA, tB)]
    else:
        if n is None:
            raise UsageError(f"verify {lemma} needs --n")
        mode = args.mode or ("exhaustive" if n <= 4 else "sampled")
        seed = args.seed if args.seed is not None else montecarlo.fresh_seed()
        if lemma == "many-disjoint":
            reports = [bounds.verify_many_disjoint(n, args.samples, seed)]
        elif lemma == "same-kind-gap":
            reports = [bounds.verify_same_kind_gap(n, mode, args.samples, seed)]
        elif lemma == "chain":
            reports = bounds.scan_lemma_chain(n, mode, args.samples, seed)
        else:
            reports = [bounds.scan_lemma(lemma, n, mode, args.samples, seed)]
    payload = [report_json(r) for r in reports]
    ok = all(r.passed for r in reports)
    text = "".join(f"{r.name}: {'PASS' if r.passed else 'FAIL'} "
                   f"(hypotheses {'hold' if r.hypotheses_hold else 'vacuous'}, margin {rat(r.margin)})\n"
                   for r in reports)
    return Result(payload, text=text, ok=ok)


def cmd_scan(args) -> Result:
    if args.what == "engines":
        if args.n is None:
            raise UsageError("scan engines needs --n")
        mode = args.mode or ("exhaustive" if args.n <= 4 else "sampled")
        seed = args.seed if args.seed is not None else montecarlo.fresh_seed()
        res = exact.scan_engines(args.n, mode, args.samples, seed)
        payload = {k: (rat(v) if isinstance(v, Fraction) else v) for k, v in res.items()}
        payload["examples"] = [{k: (rat(v) if isinstance(v, Fraction) else v) for k, v in e.items()}
                               for e in res["examples"]]
        ok = not (res["disagreements"] or res["floor_violations"] or res["moment_violations"])
        text = (f"pairs {res['pairs']}: disagreements {res['disagreements']}, floor violations "
                f"{res['floor_violations']}, moment violations {res['moment_violations']}\n")
        return Result(payload, text=text, ok=ok)
    n = args.n
    if n is None:
        raise UsageError("scan aw needs --n")
    horizon = args.horizon or 20 * n
    seed = montecarlo.fresh_seed(args.seed)
    rows = montecarlo.aw_scan(n, args.thetas, horizon, args.trials, seed, args.workers)
    best, est = montecarlo.best_theta(rows)
    payload = {"n": n, "horizon": horizon, "trials": args.trials, "seed": seed,
               "rows": [{"theta": t} | estimate_json(e) | {"mean_over_n": e.mean / n} for t, e in rows],
               "best_theta": best, "best_mean_over_n": est.mean / n}
    text = "".join(f"theta={t:.4f} mean={e.mean:.4f} se={e.std_error:.4f} mean/n={e.mean / n:.4f}\n"
                   for t, e in rows) + f"best theta={best} (seed {seed})\n"
    return Result(payload, text=text, csv_text=montecarlo.scan_to_csv(rows, n))


def cmd_simulate(args) -> Result:
    n = args.n
    horizon = args.horizon if args.horizon is not None else n
    sA = _strategy_arg(args, args.strategy_a, "a", horizon)
    sB = _strategy_arg(args, args.strategy_b, "b", horizon)
    seed = montecarlo.fresh_seed(args.seed)
    est = montecarlo.estimate_expected_waiting(sA, sB, horizon, args.trials, seed, args.workers)
    payload = {"n": sA.n, "strategy_a": sA.name, "strategy_b": sB.name} | estimate_json(est)
    header = ("n", "strategy_a", "strategy_b", "trials", "horizon", "mean", "std_error", "meet_fraction", "seed")
    row = [payload[k] for k in header]
    text = f"mean = {est.mean:.6f} +/- {est.std_error:.6f} (trials {est.trials}, seed {seed})\n"
    if args.csv:
        Path(args.csv).write_text(_csv(header, [row]))
    return Result(payload, text=text, csv_text=_csv(header, [row]))


def cmd_optimize(args) -> Result:
    n = args.n
    if args.what == "theta":
        if args.mode == "exact":
            theta, value = optimize.optimize_theta(n, "exact", args.resolution)
            payload = {"n": n, "mode": "exact", "resolution": args.resolution, "theta": float(theta),
                       "theta_exact": rat(theta), "value": rat(value), "value_decimal": dec(value)}
        else:
            seed = montecarlo.fresh_seed(args.seed)
            horizon = args.horizon or 20 * n
            theta, value = optimize.optimize_theta(n, "mc", args.resolution, trials=args.trials,
                                                   horizon=horizon, seed=seed, workers=args.workers)
            payload = {"n": n, "mode": "mc", "resolution": args.resolution, "theta": theta,
                       "value": value, "value_over_n": value / n, "seed": seed, "horizon": horizon,
                       "trials": args.trials}
        return Result(payload, text=f"theta* = {payload['theta']:.6f}, value = {payload['value']}\n")
    seed = montecarlo.fresh_seed(args.seed)
    point, value = optimize.optimize_symmetric_strategy(n, args.restarts, seed)
    floor = Fraction(n + 1, 2) + bounds.EPSILON * n
    strategy = point.to_strategy()
    payload = {"n": n, "restarts": args.restarts, "seed": seed, "value": rat(value), "value_decimal": dec(value),
               "floor": rat(floor), "above_floor": value >= floor,
               "support": [{"tactic": str(t), "weight": rat(w)} for t, w in strategy.support],
               "strategy_text": format_strategy(strategy)}
    return Result(payload, text=f"value = {rat(value)}\n" + format_strategy(strategy), ok=value >= floor)


def cmd_export(args) -> Result:
    s = _strategy_arg(args, args.strategy, "a")
    text = format_strategy(s)
    return Result({"n": s.n, "name": s.name, "strategy_text": text}, text=text)


COMMANDS = {"eval": cmd_eval, "survival": cmd_survival, "moments": cmd_moments, "phi": cmd_phi,
            "verify": cmd_verify, "scan": cmd_scan, "simulate": cmd_simulate,
            "optimize": cmd_optimize, "export": cmd_export}


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text", "csv"),
                        help="default: text for export, json otherwise")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--workers", type=int, default=montecarlo.default_workers(),
                        help="worker processes (default: $RDV_WORKERS or 1)")
    common.add_argument("--n", type=int)
    common.add_argument("--seed", type=int)

    pair = _Parser(add_help=False)
    pair.add_argument("--tactic-a")
    pair.add_argument("--tactic-b")
    pair.add_argument("--tactics", help="file with two tactics, one per line")

    strat = _Parser(add_help=False)
    strat.add_argument("--theta", type=_fraction, default=Fraction(1, 4), help="default AW theta")
    strat.add_argument("--aw-mode", choices=("truncated", "multiblock"), default="truncated")

    p = _Parser(prog="rdvlab", description="Exact and Monte Carlo tools for the rendezvous game.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("eval", "survival", "moments"):
        sp = sub.add_parser(name, parents=[common, pair])
        sp.add_argument("--engine", choices=exact.ENGINES, default="ie")

    sp = sub.add_parser("phi", parents=[common, strat])
    sp.add_argument("--strategy-a", required=True)
    sp.add_argument("--strategy-b", required=True)

    sp = sub.add_parser("verify", parents=[common, pair, strat])
    sp.add_argument("lemma", choices=PAIR_LEMMAS + SCAN_LEMMAS)
    sp.add_argument("--mode", choices=("exhaustive", "sampled"))
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--alpha", type=_fraction, default=bounds.SAME_KIND_VAR_FLOOR)
    sp.add_argument("--strategy")

    sp = sub.add_parser("scan", parents=[common])
    sp.add_argument("what", choices=("aw", "engines"))
    sp.add_argument("--thetas", type=_theta_grid, default=_theta_grid("0:1:1/20"))
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--trials", type=int, default=20_000)
    sp.add_argument("--mode", choices=("exhaustive", "sampled"))
    sp.add_argument("--samples", type=int, default=10_000)

    sp = sub.add_parser("simulate", parents=[common, strat])
    sp.add_argument("--strategy-a", required=True)
    sp.add_argument("--strategy-b", required=True)
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--csv", help="also write a one-row CSV here")

    sp = sub.add_parser("optimize", parents=[common])
    sp.add_argument("what", choices=("theta", "symmetric"))
    sp.add_argument("--mode", choices=("exact", "mc"), default="exact")
    sp.add_argument("--resolution", type=int, default=21)
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--trials", type=int, default=20_000)
    sp.add_argument("--horizon", type=int)

    sp = sub.add_parser("export", parents=[common, strat])
    sp.add_argument("--strategy", required=True)
    return p


def _render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return dumps(result.payload)
    if fmt == "csv":
        if result.csv_text is None:
            raise UsageError("this command has no CSV output")
        return result.csv_text
    return result.text if result.text is not None else dumps(result.payload)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "n", None) is not None and args.n < 2:
            raise GameError(f"n must be at least 2, got {args.n}")
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        result = COMMANDS[args.command](args)
        fmt = args.format or ("text" if args.command == "export" else "json")
        out = _render(result, fmt)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GameError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except bounds.LemmaViolation as exc:
        print(f"error: verifier failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)
    if not result.ok:
        print("error: verifier failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
