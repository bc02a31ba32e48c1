"""Command-line front end: experiment runner, bound calculator, verifier.

Exit codes: 0 success, 1 verification failure, 2 bad arguments or config,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bounds
from .reports import format_sig, write_regret_svg
from .simulation import (
    AlternatingPair,
    Correlated,
    ExperimentConfig,
    FtlKiller,
    IidBernoulli,
    _resolve_threads,
    run_experiment,
)
from .strategies import (
    AdaHedge,
    DoublingHedge,
    FixedHedge,
    FollowTheLeader,
    OracleHedge,
    VariableHedge,
)
from .verify import DEFAULT_SEED, run_suite

__all__ = ["ConfigError", "parse_config", "main"]


class ConfigError(Exception):
    """Config-file problem, located by file and (when known) line number."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        where = f"{path}:{line_no}" if line_no else str(path)
        super().__init__(f"{where}: {message}")


_GENERATOR_KEYS = {
    "iid_bernoulli": {"probs"},
    "correlated": {"hard_prob", "p1", "p2"},
    "alternating_pair": {"a", "b", "eps"},
    "ftl_killer": set(),
}
_REQUIRED_GENERATOR_KEYS = {
    "iid_bernoulli": {"probs"},
    "correlated": set(),  # hard_prob/p1/p2 all have defaults
    "alternating_pair": {"a", "b", "eps"},
    "ftl_killer": set(),
}
_TOP_KEYS = {
    "generator",
    "horizon_t",
    "repetitions",
    "strategies",
    "base_seed",
    "output_dir",
}
_ALL_KEYS = _TOP_KEYS | {k for keys in _GENERATOR_KEYS.values() for k in keys}


def _split_outside_parens(text: str, path, line_no: int) -> list[str]:
    parts, cur, depth = [], [], 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ConfigError(path, line_no, "unbalanced ')' in strategy list")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ConfigError(path, line_no, "unbalanced '(' in strategy list")
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _parse_strategy(entry: str, path, line_no: int):
    name, _, rest = entry.partition("(")
    name = name.strip().lower()
    params = {}
    if rest:
        if not rest.endswith(")"):
            raise ConfigError(path, line_no, f"missing ')' in strategy {entry!r}")
        for item in rest[:-1].split(","):
            item = item.strip()
            if not item:
                continue
            key, eq, value = item.partition("=")
            if not eq:
                raise ConfigError(
                    path, line_no, f"expected key=value inside {entry!r}, got {item!r}"
                )
            try:
                params[key.strip().lower()] = float(value.strip())
            except ValueError:
                raise ConfigError(
                    path, line_no, f"{key.strip()!r} in {entry!r} is not a number"
                )

    def only(allowed: set[str]):
        extra = set(params) - allowed
        if extra:
            raise ConfigError(
                path,
                line_no,
                f"strategy {name!r} does not take parameter(s) {sorted(extra)}",
            )

    if name in ("ftl", "follow_the_leader"):
        only(set())
        return FollowTheLeader()
    if name == "fixed_hedge":
        only({"eta"})
        if "eta" not in params:
            raise ConfigError(path, line_no, "fixed_hedge requires eta, e.g. fixed_hedge(eta=0.1)")
        return FixedHedge(eta=params["eta"])
    if name == "oracle_hedge":
        only(set())
        return OracleHedge()
    if name == "doubling_hedge":
        only({"phi"})
        return DoublingHedge(phi=params.get("phi", 2.0))
    if name == "adahedge":
        only({"phi"})
        return AdaHedge(phi=params.get("phi", 2.0))
    if name == "variable_hedge":
        only(set())
        return VariableHedge()
    raise ConfigError(path, line_no, f"unknown strategy {name!r}")


def _parse_float(raw: str, key: str, path, line_no: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(path, line_no, f"{key} must be a number, got {raw!r}")


def _parse_int(raw: str, key: str, path, line_no: int) -> int:
    try:
        return int(raw, 0)
    except ValueError:
        raise ConfigError(path, line_no, f"{key} must be an integer, got {raw!r}")


def parse_config(text: str, path="<config>") -> ExperimentConfig:
    """Parse the flat key=value experiment format into an ExperimentConfig.

    Unknown or duplicated keys, missing required keys and out-of-range
    values are reported with the offending line number.
    """
    entries: dict[str, tuple[str, int]] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(path, line_no, f"expected key = value, got {line!r}")
        key = key.strip().lower()
        value = value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(path, line_no, f"unknown key {key!r}")
        if key in entries:
            raise ConfigError(
                path, line_no, f"duplicate key {key!r} (first set on line {entries[key][1]})"
            )
        if not value:
            raise ConfigError(path, line_no, f"key {key!r} has an empty value")
        entries[key] = (value, line_no)

    def need(key: str) -> tuple[str, int]:
        if key not in entries:
            raise ConfigError(path, 0, f"missing required key {key!r}")
        return entries[key]

    gen_name, gen_line = need("generator")
    gen_name = gen_name.lower()
    if gen_name not in _GENERATOR_KEYS:
        raise ConfigError(
            path,
            gen_line,
            f"unknown generator {gen_name!r} (expected one of {sorted(_GENERATOR_KEYS)})",
        )
    for key, (_, line_no) in entries.items():
        if key in _TOP_KEYS:
            continue
        if key not in _GENERATOR_KEYS[gen_name]:
            raise ConfigError(
                path, line_no, f"key {key!r} is not valid for generator {gen_name!r}"
            )
    for key in _REQUIRED_GENERATOR_KEYS[gen_name]:
        if key not in entries:
            raise ConfigError(path, gen_line, f"generator {gen_name!r} requires key {key!r}")

    try:
        if gen_name == "iid_bernoulli":
            raw, line_no = entries["probs"]
            probs = [_parse_float(p, "probs", path, line_no) for p in raw.split(",")]
            generator = IidBernoulli(probs)
        elif gen_name == "correlated":
            def opt(key: str, default: float) -> float:
                if key in entries:
                    return _parse_float(entries[key][0], key, path, entries[key][1])
                return default
            generator = Correlated(
                hard_prob=opt("hard_prob", 0.3), p1=opt("p1", 0.01), p2=opt("p2", 0.02)
            )
        elif gen_name == "alternating_pair":
            vals = {
                key: _parse_float(entries[key][0], key, path, entries[key][1])
                for key in ("a", "b", "eps")
            }
            generator = AlternatingPair(**vals)
        else:
            generator = FtlKiller()
    except ValueError as exc:  # generator invariant violations
        raise ConfigError(path, gen_line, str(exc))

    raw, line_no = need("horizon_t")
    horizon_t = _parse_int(raw, "horizon_t", path, line_no)
    if horizon_t < 1:
        raise ConfigError(path, line_no, f"horizon_t must be >= 1, got {horizon_t}")

    raw, line_no = need("repetitions")
    repetitions = _parse_int(raw, "repetitions", path, line_no)
    if repetitions < 1:
        raise ConfigError(path, line_no, f"repetitions must be >= 1, got {repetitions}")

    raw, line_no = need("base_seed")
    base_seed = _parse_int(raw, "base_seed", path, line_no)
    if not (0 <= base_seed < 2**64):
        raise ConfigError(path, line_no, "base_seed must be an unsigned 64-bit integer")

    raw, line_no = need("strategies")
    kinds = [
        _parse_strategy(entry, path, line_no)
        for entry in _split_outside_parens(raw, path, line_no)
    ]
    if not kinds:
        raise ConfigError(path, line_no, "strategies list is empty")
    slugs = [kind.slug for kind in kinds]
    if len(set(slugs)) != len(slugs):
        raise ConfigError(path, line_no, f"duplicate strategies: {slugs}")

    raw, line_no = need("output_dir")
    return ExperimentConfig(
        generator=generator,
        horizon_t=horizon_t,
        repetitions=repetitions,
        strategies=tuple(kinds),
        base_seed=base_seed,
        output_dir=Path(raw),
    )


def _describe_generator(generator) -> str:
    if isinstance(generator, IidBernoulli):
        return f"iid_bernoulli(probs={', '.join(format_sig(p) for p in generator.probs)})"
    if isinstance(generator, Correlated):
        return (
            f"correlated(hard_prob={format_sig(generator.hard_prob)}, "
            f"p1={format_sig(generator.p1)}, p2={format_sig(generator.p2)})"
        )
    if isinstance(generator, AlternatingPair):
        return (
            f"alternating_pair(a={format_sig(generator.a)}, "
            f"b={format_sig(generator.b)}, eps={format_sig(generator.eps)})"
        )
    return "ftl_killer"


def cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3
    try:
        config = parse_config(text, args.config)
        threads = _resolve_threads(None)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.dry_run:
        print(f"config OK: {args.config}")
        print(f"  generator   {_describe_generator(config.generator)}  [K={config.k}]")
        print(f"  horizon     {config.horizon_t} rounds x {config.repetitions} repetitions")
        print(f"  strategies  {', '.join(config.slugs)}")
        print(f"  base_seed   {config.base_seed}")
        print(f"  output_dir  {config.output_dir}")
        print(f"  threads     {threads}")
        return 0

    try:
        result = run_experiment(config, threads=threads)
        svg_path = write_regret_svg(
            result, Path(config.output_dir) / "regret.svg", log_x=args.log_x
        )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for slug in config.slugs:
        print(
            f"{slug}: final mean regret {format_sig(result.mean_regret[slug][-1])}"
        )
    print(f"wrote {len(config.slugs)} trace files, summary.csv and {svg_path.name} to {config.output_dir}")
    return 0


_BOUND_NAMES = (
    "budget",
    "lemma2",
    "eta-floor",
    "theorem1",
    "lemma3",
    "factor",
    "lemma4",
    "lemma5",
    "intro-mstar",
    "theorem3-mstar",
    "lemma6-tau",
)


def _evaluate_bound(args):
    name = args.name

    def need(*flags):
        for flag in flags:
            if getattr(args, flag) is None:
                raise ValueError(f"bounds {name} requires --{flag}")

    if name == "budget":
        need("eta", "k")
        return bounds.budget(args.eta, args.k)
    if name == "lemma2":
        need("eta", "lstar", "k")
        return bounds.lemma2_bound(args.eta, args.lstar, args.k)
    if name == "eta-floor":
        need("lstar", "k")
        return bounds.eta_floor(args.lstar, args.k)
    if name == "theorem1":
        need("lstar", "k")
        return bounds.theorem1_bound(args.lstar, args.k)
    if name == "lemma3":
        need("m", "k", "phi")
        return bounds.lemma3_bound(args.m, args.k, args.phi)
    if name == "factor":
        need("phi")
        return bounds.theorem2_leading_factor(args.phi)
    if name == "lemma4":
        need("eta", "wstar")
        return bounds.lemma4_bound(args.eta, args.wstar)
    if name == "lemma5":
        need("k", "alpha", "beta")
        if args.eta is not None:
            return bounds.lemma5_bound(args.k, args.alpha, args.beta, args.eta)
        return bounds.lemma5_ck(args.k, args.alpha, args.beta)
    if name == "intro-mstar":
        need("alpha", "phi")
        return bounds.intro_mstar(args.alpha, args.phi)
    if name == "theorem3-mstar":
        need("alpha", "delta", "k", "phi")
        return bounds.theorem3_mstar(args.alpha, args.delta, args.k, args.phi)
    need("mstar", "k", "alpha", "beta", "phi")
    return bounds.lemma6_tau(args.mstar, args.k, args.alpha, args.beta, args.phi)


def cmd_bounds(args) -> int:
    try:
        value = _evaluate_bound(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if isinstance(value, int):
        print(value)
    else:
        print(format_sig(value))
    return 0


def cmd_verify(args) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    results, info = run_suite(full=args.full, seed=seed)
    profile = "--full" if args.full else "--quick"
    for res in results:
        line = f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}"
        if not res.passed:
            line += f"  [rerun: adahedge verify {profile} --seed {seed}]"
        print(line)
    for extra in info:
        print(f"INFO {extra}")
    failed = sum(1 for res in results if not res.passed)
    if failed:
        print(f"{failed} of {len(results)} properties failed (seed {seed})")
        return 1
    print(f"all {len(results)} properties passed (seed {seed})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adahedge",
        description="Hedge-family online learning: experiments, bound calculators, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment described by a config file")
    p_run.add_argument("config", help="path to a key=value experiment config")
    p_run.add_argument(
        "--dry-run", action="store_true", help="validate and print the plan; simulate nothing"
    )
    p_run.add_argument(
        "--log-x", action="store_true", help="use a logarithmic round axis in regret.svg"
    )
    p_run.set_defaults(func=cmd_run)

    p_bounds = sub.add_parser("bounds", help="evaluate a closed-form guarantee")
    p_bounds.add_argument("name", choices=_BOUND_NAMES)
    p_bounds.add_argument("--eta", type=float, help="learning rate")
    p_bounds.add_argument("--k", type=int, help="number of actions")
    p_bounds.add_argument("--lstar", type=float, help="best action's cumulative loss")
    p_bounds.add_argument("--phi", type=float, help="rate-division factor (> 1)")
    p_bounds.add_argument("--m", type=int, help="segment count")
    p_bounds.add_argument("--mstar", type=int, help="segment cap")
    p_bounds.add_argument("--alpha", type=float, help="divergence rate coefficient")
    p_bounds.add_argument("--beta", type=float, help="divergence rate exponent")
    p_bounds.add_argument("--delta", type=float, help="failure probability")
    p_bounds.add_argument("--wstar", type=float, help="weight of the leading action")
    p_bounds.set_defaults(func=cmd_bounds)

    p_verify = sub.add_parser("verify", help="run the numerical property suite")
    profile = p_verify.add_mutually_exclusive_group()
    profile.add_argument(
        "--quick", action="store_true", help="reduced sample counts (default)"
    )
    profile.add_argument(
        "--full", action="store_true", help="acceptance-scale samples plus the experiment report"
    )
    p_verify.add_argument("--seed", type=int, help=f"suite seed (default {DEFAULT_SEED})")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0 if code is None else 2
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
