"""Command-line front end.

Every subcommand writes a table as CSV (default) or JSON. CSV files start with
``#``-prefixed metadata lines followed by a header row; floats are written
with 17 significant digits so that they parse back to the same double.

On failure a single JSON object is written to stderr and the process exits
with one of the codes in :data:`EXIT_CODES`.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields

from . import __version__
from .applications import (
    damped_wave_curve,
    schrodinger_imag_axis_curve,
    schrodinger_real_axis_curve,
    weyl_fit,
)
from .exceptions import (
    BelowThresholdError,
    BracketError,
    ConvergenceError,
    OverflowGuardError,
    PotentialSpecError,
    ResolutionError,
)
from .potential import parse_potential, validate_assumptions
from .resolvent import estimate_resolvent
from .semigroup import estimate_semigroup
from .spectral import Side, laplace_asymptote, laplace_integral, profile

__all__ = ["RunConfig", "Table", "run", "main", "build_parser", "EXIT_CODES"]

SUBCOMMANDS = ("validate", "profile", "resolvent", "semigroup", "levelcurve", "weyl", "laplace")

EXIT_CODES = {
    "usage": 2,
    "potential_spec": 3,
    "below_threshold": 4,
    "overflow_guard": 5,
    "output": 6,
    "numerical": 7,
    "invalid_value": 8,
    "config": 9,
}


class ConfigError(ValueError):
    """The configuration file or merged run configuration is invalid."""


@dataclass
class RunConfig:
    subcommand: str = ""
    potential: str | None = None
    lambda_list: list[float] = field(default_factory=list)
    t_list: list[float] = field(default_factory=list)
    range: list[float] = field(default_factory=list)
    epsilon: float | None = None
    output_format: str = "csv"
    output_path: str = "-"
    points_per_rho: int = 20
    schur_grid_n: int = 2000
    seed: int = 0
    require_numeric: bool = False
    M: float = 2.0
    kind: str = "real"
    param: float | None = None
    n: int = 50
    x_max: float = 1e3
    n_samples: int = 400
    p: float = 1.0
    grid_n: int = 4000
    L: float | None = None
    k_max: int = 40

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}; choose from {', '.join(SUBCOMMANDS)}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output_format must be csv or json, got {self.output_format!r}")
        needs_pot = {"validate", "profile", "resolvent", "semigroup", "laplace"}
        if self.subcommand in needs_pot and not self.potential:
            raise ConfigError(f"{self.subcommand} requires a potential (e.g. --potential pow:2)")
        if self.subcommand in ("profile", "resolvent", "laplace") and not self.lambda_list:
            raise ConfigError(f"{self.subcommand} requires --lambda")
        if self.subcommand == "semigroup" and not self.t_list:
            raise ConfigError("semigroup requires --t")
        if self.subcommand == "levelcurve":
            if len(self.range) != 2 or not self.range[0] < self.range[1]:
                raise ConfigError("levelcurve requires a nonempty --range lo,hi")
            if self.epsilon is None:
                raise ConfigError("levelcurve requires --epsilon")


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    metadata: dict = field(default_factory=dict)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    for key, value in table.metadata.items():
        buf.write(f"# {key}: {_fmt(value) if not isinstance(value, (list, dict)) else json.dumps(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(table: Table) -> str:
    payload = {
        "metadata": table.metadata,
        "columns": table.columns,
        "rows": [dict(zip(table.columns, row)) for row in table.rows],
    }
    return json.dumps(payload, indent=2) + "\n"


def _validate_cmd(cfg: RunConfig) -> Table:
    pot = parse_potential(cfg.potential)
    report = validate_assumptions(pot, cfg.x_max, cfg.n_samples)
    rows = [
        [c.name, c.passed, c.witness[0] if c.witness else None, c.witness[1] if c.witness else None]
        for c in report.checks
    ]
    meta = {
        "potential": pot.spec,
        "sampled_range": list(report.sampled_range),
        "status": report.status,
        "all_passed": report.all_passed,
    }
    return Table(["check", "passed", "witness_x", "witness_value"], rows, meta)


def _profile_cmd(cfg: RunConfig) -> Table:
    pot = parse_potential(cfg.potential)
    cols = ["lambda", "x_lambda", "f_at_xlambda", "wprime_at_xlambda", "x_lambda_0", "delta_lambda", "upsilon1", "rho"]
    rows = []
    for lam in cfg.lambda_list:
        pr = profile(pot, lam)
        rows.append([pr.lam, pr.x_lambda, pr.f_at_xlambda, pr.wprime_at_xlambda, pr.x_lambda_0,
                     pr.delta_lambda, pr.upsilon1, pr.rho])
    return Table(cols, rows, {"potential": pot.spec})


def _resolvent_cmd(cfg: RunConfig) -> Table:
    pot = parse_potential(cfg.potential)
    cols = ["lambda", "x_lambda", "f_at_xlambda", "log_asymptotic", "log_schur_upper",
            "log_witness_lower", "log_numeric", "guard"]
    rows = []
    for lam in cfg.lambda_list:
        pr = profile(pot, lam)
        est = estimate_resolvent(
            pot,
            lam,
            points_per_rho=cfg.points_per_rho,
            schur_grid_n=cfg.schur_grid_n,
            seed=cfg.seed,
            require_numeric=cfg.require_numeric,
        )
        rows.append([est.lam, pr.x_lambda, pr.f_at_xlambda, est.log_asymptotic, est.log_schur_upper,
                     est.log_witness_lower, est.log_numeric, est.guard])
    meta = {"potential": pot.spec, "points_per_rho": cfg.points_per_rho,
            "schur_grid_n": cfg.schur_grid_n, "seed": cfg.seed}
    return Table(cols, rows, meta)


def _semigroup_cmd(cfg: RunConfig) -> Table:
    pot = parse_potential(cfg.potential)
    rows = []
    t0 = 0.0
    for t in cfg.t_list:
        est = estimate_semigroup(pot, t)
        t0 = est.t0
        rows.append([est.t, est.log_norm, est.maximizer])
    return Table(["t", "log_norm", "maximizer"], rows, {"potential": pot.spec, "t0": t0})


def _levelcurve_cmd(cfg: RunConfig) -> Table:
    rng = (cfg.range[0], cfg.range[1])
    kind = cfg.kind
    if kind == "real":
        curve = schrodinger_real_axis_curve(cfg.param if cfg.param is not None else 2.0, cfg.epsilon, rng, cfg.n)
    elif kind == "imag":
        pot = parse_potential(cfg.potential or "pow:2")
        curve = schrodinger_imag_axis_curve(pot, cfg.epsilon, rng, cfg.n)
    elif kind in ("dw-log", "dw-pow"):
        param = cfg.param if cfg.param is not None else 1.0
        curve = damped_wave_curve(kind[3:], param, cfg.epsilon, rng, cfg.n)
    else:
        raise ValueError(f"unknown level-curve kind {kind!r}; choose real, imag, dw-log or dw-pow")
    meta = {"kind": curve.kind.value, "epsilon": curve.epsilon}
    meta.update({k: v for k, v in curve.metadata.items() if k != "davies"})
    cols = ["parameter", "value"]
    rows = [list(s) for s in curve.samples]
    if "davies" in curve.metadata:
        cols.append("value_davies")
        for row, (_, v) in zip(rows, curve.metadata["davies"]):
            row.append(v)
    return Table(cols, rows, meta)


def _weyl_cmd(cfg: RunConfig) -> Table:
    fit = weyl_fit(cfg.p, cfg.grid_n, cfg.L, cfg.k_max)
    rows = [[k + 1, float(mu)] for k, mu in enumerate(fit.eigenvalues)]
    meta = {"p": fit.p, "fitted_slope": fit.fitted_slope, "expected_slope": fit.expected_slope,
            "L": fit.L, "grid_n": fit.grid_n}
    return Table(["k", "mu_k"], rows, meta)


def _laplace_cmd(cfg: RunConfig) -> Table:
    pot = parse_potential(cfg.potential)
    rows = []
    for lam in cfg.lambda_list:
        pr = profile(pot, lam)
        log_i = laplace_integral(pot, lam, cfg.M, Side.PLUS, prof=pr)
        log_a = laplace_asymptote(pr, cfg.M)
        rows.append([pr.lam, cfg.M, log_i, log_a, math.exp(log_i - log_a)])
    return Table(["lambda", "M", "log_Iplus", "log_asymptote", "ratio"], rows, {"potential": pot.spec})


_DISPATCH = {
    "validate": _validate_cmd,
    "profile": _profile_cmd,
    "resolvent": _resolvent_cmd,
    "semigroup": _semigroup_cmd,
    "levelcurve": _levelcurve_cmd,
    "weyl": _weyl_cmd,
    "laplace": _laplace_cmd,
}


def execute(cfg: RunConfig) -> Table:
    """Run the pipeline for ``cfg`` and return its table without writing it."""
    cfg.validate()
    return _DISPATCH[cfg.subcommand](cfg)


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _fail(kind: str, exc: BaseException) -> int:
    code = EXIT_CODES[kind]
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def run(cfg: RunConfig) -> int:
    """Execute ``cfg`` and write the result; return the process exit status."""
    try:
        table = execute(cfg)
        text = render_json(table) if cfg.output_format == "json" else render_csv(table)
    except ConfigError as exc:
        return _fail("config", exc)
    except PotentialSpecError as exc:
        return _fail("potential_spec", exc)
    except BelowThresholdError as exc:
        return _fail("below_threshold", exc)
    except OverflowGuardError as exc:
        return _fail("overflow_guard", exc)
    except (ConvergenceError, ResolutionError, BracketError) as exc:
        return _fail("numerical", exc)
    except ValueError as exc:
        return _fail("invalid_value", exc)
    try:
        _write(text, cfg.output_path)
    except OSError as exc:
        return _fail("output", exc)
    return 0


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("potential_pos", nargs="?", metavar="POTENTIAL", help="potential spec such as pow:2")
    common.add_argument("--potential", help="potential spec family:exponent (pow, logpow, exppow)")
    common.add_argument("--lambda", dest="lambda_list", type=_float_list, help="comma-separated lambda values")
    common.add_argument("--t", dest="t_list", type=_float_list, help="comma-separated times")
    common.add_argument("--range", type=_float_list, help="interval lo,hi")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--format", dest="output_format", choices=("csv", "json"))
    common.add_argument("--output", dest="output_path", help="output file, '-' for stdout")
    common.add_argument("--config", help="JSON file with RunConfig field names")
    common.add_argument("--seed", type=int)
    common.add_argument("--points-per-rho", dest="points_per_rho", type=int)
    common.add_argument("--schur-grid-n", dest="schur_grid_n", type=int)
    common.add_argument("--require-numeric", dest="require_numeric", action="store_true", default=None)
    common.add_argument("--M", dest="M", type=float, help="Laplace exponent multiplier")
    common.add_argument("--kind", choices=("real", "imag", "dw-log", "dw-pow"), help="level-curve kind")
    common.add_argument("--param", type=float, help="V_p for real, p for dw-log, n for dw-pow")
    common.add_argument("--n", type=int, help="number of curve samples")
    common.add_argument("--x-max", dest="x_max", type=float)
    common.add_argument("--n-samples", dest="n_samples", type=int)
    common.add_argument("--p", type=float, help="Weyl exponent p")
    common.add_argument("--grid-n", dest="grid_n", type=int)
    common.add_argument("--L", dest="L", type=float)
    common.add_argument("--k-max", dest="k_max", type=int)

    parser = argparse.ArgumentParser(prog="genairy", allow_abbrev=False, description="Resolvent and semigroup norms of -d/dx + W(x).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand")
    helps = {
        "validate": "check the standing hypotheses on W",
        "profile": "turning point and action scalars",
        "resolvent": "asymptotic, numeric, Schur and witness log norms",
        "semigroup": "log norm and maximizer of the semigroup",
        "levelcurve": "leading-order pseudospectral level curves",
        "weyl": "eigenvalue exponent of -d^2/dx^2 + |x|^(2p) + 1",
        "laplace": "Laplace window integral against its asymptote",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], allow_abbrev=False)
    return parser


def config_from_args(argv: list[str] | None = None) -> RunConfig:
    """Merge defaults, an optional ``--config`` JSON file and explicit flags."""
    ns = build_parser().parse_args(argv)
    merged = asdict(RunConfig())
    known = {f.name for f in fields(RunConfig)}
    path = getattr(ns, "config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")
        merged.update(data)
    for name in known:
        value = getattr(ns, name, None)
        if value is not None:
            merged[name] = value
    if getattr(ns, "potential_pos", None):
        if ns.potential and ns.potential != ns.potential_pos:
            raise ConfigError("potential given both positionally and with --potential")
        merged["potential"] = ns.potential_pos
    if ns.subcommand:
        merged["subcommand"] = ns.subcommand
    return RunConfig(**merged)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        return _fail("config", exc)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
