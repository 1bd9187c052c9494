"""Command line front-end: batch experiments that write CSV tables.

Every subcommand writes a CSV with a header row whose first column is the
swept quantity. Output goes to ``--out`` or standard output. A plain-text
``key = value`` file given by ``--config`` supplies option values; flags
on the command line take precedence over it.
"""

from __future__ import annotations

import argparse
import shlex
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .basis.families import FAMILIES, BasisSpec
from .exceptions import DomainError, InfeasibleError
from .fuzzy import (
    FuzzyInterval,
    ExtensionConfig,
    extension_principle,
    fuzzy_l2_error,
    fuzzy_novak_ritter,
    piecewise_linear,
    quasi_gaussian,
    trapezoidal,
    triangular,
)
from .grid import (
    coarse_boundary_count,
    interior_point_count,
    regular_grid,
    regular_point_count,
)
from .io import write_csv
from .optimize import RefinementConfig, novak_ritter_generate, optimize_linear_surrogate, optimize_surrogate
from .surrogate import EntrywiseMatrixSurrogate, Interpolant, build_spd_surrogate
from .testfns import PROBLEMS, displaced, make_problem, spd_field

BASIS_ALIASES = {
    "nak": "not-a-knot",
    "hat": "uniform",
    "mod": "modified",
    "nak-mod": "nak-modified",
    "cc": "clenshaw-curtis",
    "fs": "fundamental",
    "wfs": "weakly-fundamental",
}


@dataclass
class ExperimentConfig:
    """Everything that determines one run (together with the library version)."""

    command: str
    family: str = "not-a-knot"
    degree: int = 3
    problem: str = "GoP"
    dim: int | None = None
    levels: tuple[int, ...] = ()
    n_max: tuple[int, ...] = ()
    boundary: int | None = None
    interior: bool = False
    regular: tuple[int, int] | None = None
    coarse: tuple[int, int] | None = None
    gamma: float = 0.15
    seed: int = 0
    samples: int = 10_000
    displacements: int = 5
    linear: bool = False
    alpha_segments: int = 20
    grid_kind: str = "adaptive"
    inputs: tuple[str, ...] = ()
    reference_starts: int = 20
    out: str | None = None
    extras: dict = field(default_factory=dict)

    @property
    def spec(self) -> BasisSpec:
        return BasisSpec(BASIS_ALIASES.get(self.family, self.family), self.degree)


# -- argument parsing -------------------------------------------------------------

def parse_int_list(text: str) -> tuple[int, ...]:
    """``"4..8"`` (inclusive range), ``"100,200,400"`` or a single integer."""
    text = text.strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range a..b or a comma list of integers, got {text!r}")


def parse_fuzzy(text: str) -> FuzzyInterval:
    """``triangular:a,b,c``, ``trapezoidal:a,b,c,d``, ``quasi-gaussian:mean,sigma[,k]``
    or ``piecewise-linear:x/mu,x/mu,...``."""
    kind, _, args = text.partition(":")
    try:
        if kind == "piecewise-linear":
            pts = [tuple(float(v) for v in item.split("/")) for item in args.split(",")]
            return piecewise_linear(pts)
        vals = [float(v) for v in args.split(",")]
        if kind == "triangular" and len(vals) == 3:
            return triangular(*vals)
        if kind == "trapezoidal" and len(vals) == 4:
            return trapezoidal(*vals)
        if kind == "quasi-gaussian" and len(vals) in (2, 3):
            return quasi_gaussian(*vals)
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(f"bad fuzzy input {text!r}: {exc}")
    raise argparse.ArgumentTypeError(f"bad fuzzy input {text!r}")


def _add_basis(p: argparse.ArgumentParser, family: str, degree: int) -> None:
    p.add_argument("--basis", dest="family", default=family,
                   choices=sorted(set(FAMILIES) | set(BASIS_ALIASES)), help="basis family")
    p.add_argument("--degree", type=int, default=degree, help="odd B-spline degree")


def _add_problem(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--problem", default=default, choices=PROBLEMS)
    p.add_argument("--dim", type=int, default=None, help="dimension for problems defined in any d")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with option defaults")
    common.add_argument("--out", help="CSV output path (default: standard output)")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="sgbspline", description="B-splines on sparse grids: experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid-info", parents=[common], help="grid point counts")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--regular", nargs=2, type=int, metavar=("N", "D"))
    kind.add_argument("--coarse", nargs=2, type=int, metavar=("N", "D"))
    p.add_argument("--interior", action="store_true", help="count interior points only")
    p.add_argument("--boundary", type=int, default=None, metavar="B", help="boundary coarsening level")

    p = sub.add_parser("interp-convergence", parents=[common], help="relative L2 error per level")
    _add_problem(p, "GoP")
    _add_basis(p, "not-a-knot", 3)
    p.add_argument("--levels", type=parse_int_list, default=parse_int_list("4..8"))
    p.add_argument("--samples", type=int, default=10_000, help="Monte Carlo sample count")

    p = sub.add_parser("surplus-decay", parents=[common], help="mean |surplus| per level sum")
    _add_problem(p, "GoP")
    _add_basis(p, "not-a-knot", 3)
    p.add_argument("--level", dest="levels", type=parse_int_list, default=(7,))

    p = sub.add_parser("optimize", parents=[common], help="optimality gap against N_max")
    _add_problem(p, "Bra02")
    _add_basis(p, "nak-modified", 3)
    p.add_argument("--nmax", dest="n_max", type=parse_int_list, default=parse_int_list("100,200,500,1000"))
    p.add_argument("--gamma", type=float, default=0.15)
    p.add_argument("--displacements", type=int, default=5)
    p.add_argument("--linear", action="store_true", help="add the piecewise linear comparison column")

    p = sub.add_parser("fuzzy", parents=[common], help="fuzzy L2 error against grid size")
    _add_problem(p, "Bra02")
    p.add_argument("--grid", dest="grid_kind", choices=("adaptive", "regular"), default="adaptive")
    p.add_argument("--sizes", type=parse_int_list, default=None,
                   help="N_max values (adaptive) or levels (regular)")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--alpha-segments", type=int, default=20)
    p.add_argument("--reference-starts", type=int, default=20)
    p.add_argument("--input", dest="inputs", action="append", default=None,
                   help="fuzzy input per dimension, e.g. triangular:0.2,0.5,0.8")

    p = sub.add_parser("spd-demo", parents=[common], help="min eigenvalue of SPD surrogates")
    _add_basis(p, "not-a-knot", 3)
    p.add_argument("--nmax", dest="n_max", type=parse_int_list, default=parse_int_list("50,100,200"))
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--field-seed", type=int, default=7)

    sub.add_parser("problems", parents=[common], help="list the test problems")
    return parser


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys may use ``-`` or ``_``."""
    out: dict[str, str] = {}
    for no, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DomainError(f"{path}:{no}: expected key = value")
        out[key.strip().replace("_", "-")] = value.strip()
    return out


def _config_tokens(parser: argparse.ArgumentParser, command: str, entries: dict[str, str]) -> list[str]:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    flags = {opt: a for a in sub._actions for opt in a.option_strings}
    tokens: list[str] = []
    for key, value in entries.items():
        if key in ("command", "config"):
            continue
        flag = f"--{key}"
        action = flags.get(flag)
        if action is None:
            raise DomainError(f"unknown config key {key!r} for {command}")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
        elif action.nargs not in (None, 1) or isinstance(action, argparse._AppendAction):
            parts = shlex.split(value)
            if isinstance(action, argparse._AppendAction):
                for part in parts:
                    tokens += [flag, part]
            else:
                tokens += [flag, *parts]
        else:
            tokens += [flag, value]
    return tokens


def parse_config(argv: Sequence[str]) -> ExperimentConfig:
    """Turn command line arguments (plus an optional config file) into a config."""
    parser = build_parser()
    argv = list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            entries = read_config_file(known.config)
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        except DomainError as exc:
            parser.error(str(exc))
        commands = [a for a in argv if not a.startswith("-")]
        command = commands[0] if commands and commands[0] in _commands(parser) else entries.get("command")
        if command is None:
            parser.error("no subcommand given")
        rest = argv[argv.index(command) + 1:] if command in argv else argv
        try:
            tokens = _config_tokens(parser, command, entries)
        except (DomainError, KeyError) as exc:
            parser.error(str(exc))
        argv = [command, *tokens, *rest]
    ns = parser.parse_args(argv)
    cfg = ExperimentConfig(command=ns.command, seed=ns.seed, out=ns.out)
    for name in ("family", "degree", "problem", "dim", "levels", "n_max", "boundary", "interior", "regular",
                 "coarse", "gamma", "samples", "displacements", "linear", "alpha_segments", "grid_kind",
                 "reference_starts"):
        if hasattr(ns, name) and getattr(ns, name) is not None:
            value = getattr(ns, name)
            setattr(cfg, name, tuple(value) if isinstance(value, list) else value)
    if getattr(ns, "inputs", None):
        cfg.inputs = tuple(ns.inputs)
    if getattr(ns, "sizes", None):
        cfg.extras["sizes"] = ns.sizes
    if hasattr(ns, "field_seed"):
        cfg.extras["field_seed"] = ns.field_seed
    _validate(parser, cfg)
    return cfg


def _commands(parser: argparse.ArgumentParser) -> tuple[str, ...]:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return tuple(sub.choices)


def _validate(parser: argparse.ArgumentParser, cfg: ExperimentConfig) -> None:
    if cfg.command == "grid-info":
        if cfg.coarse is not None and cfg.interior:
            parser.error("--interior applies to --regular grids only")
        if cfg.regular is not None and cfg.boundary is not None and cfg.interior:
            parser.error("--interior and --boundary are mutually exclusive")
        n, d = cfg.regular or cfg.coarse
        if d < 1 or n < 0:
            parser.error("need n >= 0 and d >= 1")
        return
    if cfg.command == "problems":
        return
    try:
        cfg.spec
    except DomainError as exc:
        parser.error(str(exc))
    if cfg.command in ("interp-convergence", "spd-demo") and cfg.samples < 1:
        parser.error("--samples must be positive")
    if cfg.command in ("interp-convergence", "surplus-decay") and not cfg.levels:
        parser.error("need at least one level")
    if cfg.command in ("optimize", "spd-demo") and (not cfg.n_max or min(cfg.n_max) < 1):
        parser.error("--nmax values must be positive")
    if cfg.command == "optimize" and cfg.displacements < 1:
        parser.error("--displacements must be positive")
    if not 0.0 <= cfg.gamma <= 1.0:
        parser.error("--gamma must lie in [0, 1]")
    if cfg.command == "fuzzy":
        for text in cfg.inputs:
            try:
                parse_fuzzy(text)
            except argparse.ArgumentTypeError as exc:
                parser.error(str(exc))
        if cfg.alpha_segments < 1:
            parser.error("--alpha-segments must be positive")


# -- experiments --------------------------------------------------------------------

DEFAULT_DIM = 2


def _make(name: str, d: int | None):
    """Problems defined in any dimension default to ``d = 2``."""
    try:
        return make_problem(name, d)
    except DomainError:
        if d is not None:
            raise
        return make_problem(name, DEFAULT_DIM)


def _problem(cfg: ExperimentConfig):
    return _make(cfg.problem, cfg.dim)


def _sub_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _grid_for(spec: BasisSpec, n: int, d: int):
    return regular_grid(n, d, boundary=not spec.is_modified)


def grid_info(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    if cfg.regular is not None:
        n, d = cfg.regular
        if cfg.interior:
            count, b = interior_point_count(n, d), "interior"
        elif cfg.boundary is not None:
            count, b = coarse_boundary_count(n, d, cfg.boundary), cfg.boundary
        else:
            count, b = regular_point_count(n, d), "full"
    else:
        n, d = cfg.coarse
        b = 1 if cfg.boundary is None else cfg.boundary
        count = coarse_boundary_count(n, d, b)
    return ["n", "d", "boundary", "points"], [[n, d, b, count]]


def interp_convergence(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    problem = _problem(cfg)
    spec = cfg.spec
    rng = np.random.default_rng(cfg.seed)
    x = rng.uniform(0.0, 1.0, (cfg.samples, problem.dim))
    fx = problem(x)
    norm = np.sqrt(np.mean(fx**2))
    rows = []
    for n in cfg.levels:
        grid = _grid_for(spec, n, problem.dim)
        fs = Interpolant.from_values(grid, spec, problem)
        err = np.sqrt(np.mean((fs(x) - fx) ** 2)) / norm
        rows.append([n, len(grid), float(err)])
    return ["level", "points", "relative_l2_error"], rows


def surplus_decay(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    problem = _problem(cfg)
    spec = cfg.spec
    n = cfg.levels[-1]
    grid = _grid_for(spec, n, problem.dim)
    fs = Interpolant.from_values(grid, spec, problem)
    sums = grid.levels.sum(axis=1)
    rows = []
    for s in np.unique(sums):
        a = np.abs(fs.surpluses[sums == s])
        rows.append([int(s), int(a.size), float(a.mean())])
    return ["level_sum", "points", "mean_abs_surplus"], rows


def optimize_gaps(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    base = _problem(cfg)
    spec = cfg.spec
    problems = [displaced(base, seed=_sub_seed(cfg.seed, k)) for k in range(cfg.displacements)]
    header = ["n_max", "gap", "violation"] + (["gap_linear"] if cfg.linear else [])
    rows = []
    for n_max in cfg.n_max:
        gaps, viols, lin = [], [], []
        for k, pr in enumerate(problems):
            g = pr.constraints if pr.raw_constraints is not None else None
            try:
                res = optimize_surrogate(pr, pr.dim, RefinementConfig(n_max, cfg.gamma), spec, cfg.seed, g)
            except InfeasibleError as exc:
                raise DomainError(f"{pr.name}: {exc}") from exc
            gaps.append(res.f - pr.f_opt)
            viols.append(res.violation)
            if cfg.linear:
                r1 = optimize_linear_surrogate(pr, res.grid, res.values, cfg.seed, g)
                lin.append(r1.f - pr.f_opt)
        row = [n_max, float(np.mean(gaps)), float(np.max(viols))]
        if cfg.linear:
            row.append(float(np.mean(lin)))
        rows.append(row)
    return header, rows


def default_fuzzy_inputs(d: int) -> list[FuzzyInterval]:
    """Trapezoidal inputs in odd dimensions, quasi-Gaussian ones in even dimensions (1-based)."""
    return [trapezoidal(0.125, 0.25, 0.375, 0.625) if t % 2 == 1 else quasi_gaussian(0.5, 0.125, 3.0)
            for t in range(1, d + 1)]


def fuzzy_errors(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    problem = _problem(cfg)
    d = problem.dim
    inputs = [parse_fuzzy(t) for t in cfg.inputs] if cfg.inputs else default_fuzzy_inputs(d)
    if len(inputs) != d:
        raise DomainError(f"{problem.name} has {d} inputs, got {len(inputs)} fuzzy intervals")
    m = cfg.alpha_segments
    ref = extension_principle(problem, inputs, m,
                              ExtensionConfig(nelder_mead_starts=cfg.reference_starts, seed=cfg.seed))
    ext = ExtensionConfig(seed=cfg.seed)
    spec = BasisSpec("nak-modified", 3)
    linear = BasisSpec("modified", 1)
    adaptive = cfg.grid_kind == "adaptive"
    sizes = cfg.extras.get("sizes") or ((100, 200, 400) if adaptive else (3, 4, 5, 6))
    rows = []
    for size in sizes:
        if adaptive:
            grid, values = fuzzy_novak_ritter(problem, inputs, size, spec, cfg.gamma, m)
        else:
            grid = regular_grid(size, d, boundary=False)
            values = problem(Interpolant(grid, spec, np.zeros(len(grid))).points())
        errs = []
        for basis in (spec, linear):
            fs = Interpolant.from_values(grid, basis, values)
            out = extension_principle(fs if basis is spec else _NoGradient(fs), inputs, m, ext)
            errs.append(fuzzy_l2_error(ref, out))
        rows.append([len(grid), *errs])
    return ["points", "error_bspline", "error_linear"], rows


class _NoGradient:
    """Hides the gradient of a piecewise linear surrogate so Nelder-Mead is used."""

    def __init__(self, f):
        self._f = f

    def __call__(self, x):
        return self._f(x)


def spd_demo(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    spec = cfg.spec
    field_at = spd_field(seed=cfg.extras.get("field_seed", 7))
    x = np.random.default_rng(cfg.seed).uniform(0.0, 1.0, (cfg.samples, 2))
    rows = []
    for n_max in cfg.n_max:
        grid, _ = novak_ritter_generate(lambda y: np.linalg.eigvalsh(field_at(y))[0],
                                        RefinementConfig(n_max, cfg.gamma), spec, d=2)
        chol = build_spd_surrogate(grid, spec, field_at)
        direct = EntrywiseMatrixSurrogate(grid, spec, field_at)
        rows.append([len(grid), float(np.linalg.eigvalsh(chol.evaluate(x))[:, 0].min()),
                     float(np.linalg.eigvalsh(direct.evaluate(x))[:, 0].min())])
    return ["points", "min_eig_cholesky", "min_eig_entrywise"], rows


def list_problems(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    rows = []
    for name in PROBLEMS:
        p = _make(name, None)
        rows.append([name, p.dim, p.raw_constraints is not None, float(p.f_opt)])
    return ["name", "dim", "constrained", "f_opt"], rows


EXPERIMENTS = {
    "grid-info": grid_info,
    "interp-convergence": interp_convergence,
    "surplus-decay": surplus_decay,
    "optimize": optimize_gaps,
    "fuzzy": fuzzy_errors,
    "spd-demo": spd_demo,
    "problems": list_problems,
}


def run(config: ExperimentConfig, stream=None) -> int:
    """Run one experiment; returns the process exit status."""
    stream = sys.stdout if stream is None else stream
    try:
        header, rows = EXPERIMENTS[config.command](config)
    except (DomainError, InfeasibleError) as exc:
        print(f"sgbspline {config.command}: error: {exc}", file=sys.stderr)
        return 1
    if config.command == "grid-info" and config.out is None:
        print(rows[0][-1], file=stream)
        return 0
    write_csv(config.out, header, rows, stream=stream)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    config = parse_config(sys.argv[1:] if argv is None else argv)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
