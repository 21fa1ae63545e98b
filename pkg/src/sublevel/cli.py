"""Batch driver: ``sublevel run | list | catalog``.

Configuration comes from a flat ``key = value`` file, environment
variables ``SUBLEVEL_<KEY>`` and command-line flags, in increasing order
of precedence.  Every run writes three files into the output directory:

``<statement>_seed<seed>_report.json``
    the full report (rows, fit, checks, extra diagnostics)
``<statement>_seed<seed>_rows.csv``
    one row per parameter value
``<statement>_seed<seed>_manifest.json``
    resolved config, package version and wall time

Exit status is 0 when the report passes, 1 when a row or check fails
and 2 for an invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import statements as st
from .experiments.report import CSV_COLUMNS, VerificationReport, geometric_grid
from .field import builtin_catalog, parse_function_spec
from .stochastic import WalkConfig

ENV_PREFIX = "SUBLEVEL_"

# statement id -> one-line citation
STATEMENTS = {
    "vdcorput": "van der Corput lemma: u^(k) >= 1 on R gives |{|u| <= t}| <~_k t^(1/k)",
    "carbery": "Theorem 1: convex u with det D^2 u >= 1 gives |{u <= s}| <~_n s^(n/2)",
    "prop2": "Proposition 2: lap u >= 1 on a ball of radius r forces max u - min u >= r^2/(2n)",
    "prop4": "Proposition 4: max of u on the sphere of radius r is >= (r^2 - |y|^2)/(2n) + u(y) for |y| < r",
    "thm2": "Theorem 2: 1 <= lap u <= c gives |{|u| <= eps}| <~_c sqrt(eps) + (2 eps)^(alpha-1/2) int |grad u|/|u|^alpha",
    "thm3": "Theorem 3: lap u >= 1 on [0,1]^2 gives |{|u| >= c_n}| * sup|u| >= c_n",
    "lemma5": "Lemma 5: psi = 0 on the boundary with 1 <= lap psi <= c has min psi >= -4c H1(boundary)^2",
    "lemma6": "Lemma 6: a <= psi <= b with lap psi >= 1 gives E tau_x <= b - a",
    "lemma7": "Lemma 7: heat content at time eps is <~ sqrt(eps) |boundary| when removed pieces have long boundary",
    "champagne": "Champagne domains: adding bubbles can only shorten the sup of the expected exit time",
    "coarea-check": "Coarea formula: int H1({f = t}) dt = int |grad f|",
    "fk-check": "Feynman-Kac representation: u(x) = E u(w_tau) - E int_0^tau lap u(w_s) ds",
}

# meaning of the CSV ``parameter`` column per statement
PARAMETER_COLUMN = {
    "vdcorput": "t",
    "carbery": "s",
    "prop2": "ball radius r",
    "prop4": "ball radius r (one row per point y)",
    "thm2": "eps",
    "thm3": "certificate kappa (one row per family member)",
    "lemma5": "c (one row per ellipse)",
    "lemma6": "oscillation b - a (one row per domain)",
    "lemma7": "eps (one row per configuration and eps)",
    "champagne": "bubble count",
    "coarea-check": "grid resolution (one row per function)",
    "fk-check": "|x0| (one row per function, domain and start point)",
}


class ConfigError(ValueError):
    """Invalid configuration; the message is a complete diagnostic."""


# --------------------------------------------------------------------------
# value parsers


def _int(v: str) -> int:
    return int(v)


def _float(v: str) -> float:
    return float(v)


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _floats(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.split(",") if x.strip())


def _ints(v: str) -> tuple[int, ...]:
    return tuple(int(x) for x in v.split(",") if x.strip())


def _str(v: str) -> str:
    return v.strip()


def parse_grid(spec: str) -> np.ndarray:
    """``"lo:hi:n"`` (geometric, ``n`` points), ``"lo:hi"`` (8 per decade) or a comma list."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"grid {spec!r} must be lo:hi or lo:hi:n")
        lo, hi = float(parts[0]), float(parts[1])
        if not 0 < lo < hi:
            raise ValueError(f"grid {spec!r} needs 0 < lo < hi")
        n = int(parts[2]) if len(parts) == 3 else None
        if n is not None and n < 1:
            raise ValueError(f"grid {spec!r} needs n >= 1")
        return geometric_grid(lo, hi, n)
    vals = np.array(_floats(spec))
    if vals.size == 0:
        raise ValueError("grid is empty")
    return vals


def parse_points(spec: str) -> list[tuple[float, ...]]:
    """Points separated by ``;`` with comma-separated coordinates."""
    return [_floats(p) for p in spec.split(";") if p.strip()]


def parse_functions(spec: str):
    """Function specs separated by ``;``; ``catalog`` expands to the built-in catalog."""
    if spec.strip() == "catalog":
        return builtin_catalog()
    return [parse_function_spec(s) for s in spec.split(";") if s.strip()]


KEYS = {
    "statement": _str,
    "function": _str,
    "functions": _str,
    "grid": _str,
    "resolution": _int,
    "seed": _int,
    "out": _str,
    "paths": _int,
    "dt": _float,
    "max_time": _float,
    "workers": _int,
    "k": _int,
    "a": _floats,
    "alpha": _float,
    "c": _float,
    "r": _float,
    "points": _str,
    "bubbles": _ints,
    "r_b": _float,
    "placement_seed": _int,
    "pipeline": _bool,
}

COMMON = {"seed": 0, "out": ".", "workers": 1, "max_time": 10.0}

DEFAULTS = {
    "vdcorput": {"k": 2, "grid": "1e-5:1e-2", "resolution": 2**18},
    "carbery": {"a": (0.5, 0.5), "grid": "1e-3:1e-1", "resolution": 256},
    "prop2": {"function": "radial_extremal:n=2", "grid": "0.25,0.5,1.0", "resolution": 512},
    "prop4": {"function": "radial_extremal:n=2", "r": 1.0, "points": "0,0;0.3,0.2;-0.5,0.4", "resolution": 512},
    "thm2": {
        "function": "radial_extremal:n=2",
        "grid": "1e-4:1e-2:9",
        "alpha": 1.0,
        "resolution": 1024,
        "paths": 2000,
        "dt": 1e-3,
        "pipeline": True,
    },
    "thm3": {
        "functions": "radial_extremal:n=2;harmonic_probe:A=0.1,m=3;harmonic_probe:A=1,m=3;harmonic_probe:A=10,m=3",
        "grid": "1e-4:1:9",
        "resolution": 512,
    },
    "lemma5": {"c": 2.0, "resolution": 192, "paths": 4000, "dt": 1e-3},
    "lemma6": {"function": "radial_extremal:n=2", "resolution": 192, "paths": 4000, "dt": 1e-3},
    "lemma7": {"bubbles": st.DEFAULT_CORPUS, "r_b": 0.03, "placement_seed": 7, "grid": "1e-4,4e-4", "resolution": 1024, "paths": 1_000_000},
    "champagne": {"bubbles": st.DEFAULT_CORPUS, "r_b": 0.03, "placement_seed": 7, "resolution": 512, "paths": 2000, "dt": 1e-3},
    "coarea-check": {"functions": "sum_sq;harmonic_probe:A=0.1,m=3", "resolution": 512},
    "fk-check": {"functions": "catalog", "paths": 4000, "dt": 1e-3},
}


# --------------------------------------------------------------------------
# config assembly


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Raises :class:`ConfigError` as ``file:line: msg``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    out = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"{path}:{no}: expected 'key = value', got {raw.strip()!r}")
        out[key] = _convert(key, value.strip(), f"{path}:{no}")
    return out


def _convert(key: str, value: str, where: str):
    if key not in KEYS:
        raise ConfigError(f"{where}: unknown key {key!r}; known keys: {', '.join(sorted(KEYS))}")
    try:
        return KEYS[key](value)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None


def read_env(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for name, value in sorted(environ.items()):
        if name.startswith(ENV_PREFIX):
            key = name[len(ENV_PREFIX) :].lower()
            out[key] = _convert(key, value, f"environment {name}")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved configuration of one run."""

    statement: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def walk(self, **kw) -> WalkConfig:
        return WalkConfig(
            n_paths=self["paths"],
            dt=self["dt"],
            max_time=self["max_time"],
            seed=self["seed"],
            workers=self["workers"],
            **kw,
        )

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(self.values.items())}


def resolve_config(file_values: dict, env_values: dict, cli_values: dict) -> ExperimentConfig:
    """Merge defaults < file < environment < command line and validate."""
    merged = {**file_values, **env_values, **{k: v for k, v in cli_values.items() if v is not None}}
    statement = merged.get("statement")
    if statement is None:
        raise ConfigError("config: no statement given (positional argument or 'statement = ...')")
    if statement not in STATEMENTS:
        raise ConfigError(f"config: unknown statement {statement!r}; known: {', '.join(STATEMENTS)}")
    values = {**COMMON, **DEFAULTS[statement], **merged}
    if values["seed"] < 0:
        raise ConfigError("config: seed must be >= 0")
    if values.get("resolution") is not None and values["resolution"] < 8:
        raise ConfigError("config: resolution must be >= 8")
    if values["workers"] < 1:
        raise ConfigError("config: workers must be >= 1")
    for key in ("grid", "function", "functions", "points"):
        if key in values:
            try:
                {"grid": parse_grid, "function": parse_function_spec, "functions": parse_functions, "points": parse_points}[key](
                    values[key]
                )
            except ValueError as exc:
                raise ConfigError(f"config: bad {key} {values[key]!r}: {exc}") from None
    return ExperimentConfig(statement, values)


# --------------------------------------------------------------------------
# dispatch


def _run_vdcorput(cfg):
    return st.verify_vdcorput(cfg["k"], parse_grid(cfg["grid"]), cfg["resolution"], seed=cfg["seed"])


def _run_carbery(cfg):
    return st.verify_carbery(cfg["a"], parse_grid(cfg["grid"]), cfg["resolution"], seed=cfg["seed"])


def _run_prop2(cfg):
    f = parse_function_spec(cfg["function"])
    return st.verify_prop2_prop4(f, parse_grid(cfg["grid"]), [], resolution=cfg["resolution"], seed=cfg["seed"])


def _run_prop4(cfg):
    f = parse_function_spec(cfg["function"])
    rows = st.verify_prop4(f, cfg["r"], parse_points(cfg["points"]), resolution=cfg["resolution"])
    return VerificationReport("prop4", rows, None, [], {"function": f.id, "r": cfg["r"]}, cfg["seed"])


def _run_thm2(cfg):
    f = parse_function_spec(cfg["function"])
    settings = st.Thm2Settings(lhs_resolution=cfg["resolution"], run_pipeline=cfg["pipeline"])
    return st.verify_thm2(
        f, parse_grid(cfg["grid"]), cfg["alpha"], cfg.get("c"), cfg.walk(), settings=settings, seed=cfg["seed"]
    )


def _run_thm3(cfg):
    return st.verify_thm3(parse_functions(cfg["functions"]), parse_grid(cfg["grid"]), resolution=cfg["resolution"], seed=cfg["seed"])


def _run_lemma5(cfg):
    return st.verify_lemma5(cfg["c"], resolution=cfg["resolution"], cfg=cfg.walk(), seed=cfg["seed"])


def _run_lemma6(cfg):
    f = parse_function_spec(cfg["function"])
    return st.verify_lemma6(f, st.default_lemma6_masks(cfg["resolution"]), cfg.walk(), seed=cfg["seed"])


def _run_lemma7(cfg):
    specs = st.champagne_corpus(cfg["bubbles"], cfg["r_b"], cfg["placement_seed"])
    return st.verify_lemma7(specs, tuple(parse_grid(cfg["grid"])), cfg["resolution"], mc_paths=cfg["paths"], seed=cfg["seed"])


def _run_champagne(cfg):
    return st.verify_champagne(
        cfg["bubbles"], cfg["r_b"], cfg["resolution"], cfg.walk(), placement_seed=cfg["placement_seed"], seed=cfg["seed"]
    )


def _run_coarea(cfg):
    return st.verify_coarea(parse_functions(cfg["functions"]), cfg["resolution"], seed=cfg["seed"])


def _run_fk(cfg):
    return st.verify_fk(parse_functions(cfg["functions"]), cfg.walk(), seed=cfg["seed"])


RUNNERS = {
    "vdcorput": _run_vdcorput,
    "carbery": _run_carbery,
    "prop2": _run_prop2,
    "prop4": _run_prop4,
    "thm2": _run_thm2,
    "thm3": _run_thm3,
    "lemma5": _run_lemma5,
    "lemma6": _run_lemma6,
    "lemma7": _run_lemma7,
    "champagne": _run_champagne,
    "coarea-check": _run_coarea,
    "fk-check": _run_fk,
}


def run_experiment(cfg: ExperimentConfig) -> VerificationReport:
    return RUNNERS[cfg.statement](cfg)


# --------------------------------------------------------------------------
# output


def write_atomic(path: Path, text: str) -> None:
    """Write ``text`` to a temporary file in the same directory, then rename it over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def output_paths(cfg: ExperimentConfig) -> dict[str, Path]:
    stem = f"{cfg.statement}_seed{cfg['seed']}"
    out = Path(cfg["out"])
    return {
        "report": out / f"{stem}_report.json",
        "rows": out / f"{stem}_rows.csv",
        "manifest": out / f"{stem}_manifest.json",
    }


def write_outputs(cfg: ExperimentConfig, report: VerificationReport, wall_time: float) -> dict[str, Path]:
    paths = output_paths(cfg)
    write_atomic(paths["report"], report.to_json())
    write_atomic(paths["rows"], report.to_csv())
    manifest = {
        "statement": cfg.statement,
        "citation": STATEMENTS[cfg.statement],
        "config": cfg.to_dict(),
        "version": __version__,
        "wall_time_s": round(wall_time, 3),
        "pass": report.passed,
        "files": {k: p.name for k, p in paths.items() if k != "manifest"},
    }
    write_atomic(paths["manifest"], json.dumps(manifest, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    return paths


# --------------------------------------------------------------------------
# entry point


def _epilog() -> str:
    lines = [
        "CSV columns (every statement): " + ", ".join(CSV_COLUMNS) + ".",
        "The parameter column holds:",
    ]
    lines += [f"  {k:<13} {v}" for k, v in PARAMETER_COLUMN.items()]
    lines += [
        "",
        f"Any config key can be set through the environment as {ENV_PREFIX}<KEY>,",
        f"e.g. {ENV_PREFIX}SEED=3.  Precedence: flags > environment > config file > defaults.",
        "Config keys: " + ", ".join(sorted(KEYS)) + ".",
        "Grids: lo:hi:n (geometric), lo:hi (8 points per decade) or a comma list.",
        "Function lists are separated by ';'; 'catalog' means the built-in catalog.",
    ]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sublevel", description="Numerical verification of sublevel set estimates.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run",
        help="run one verification experiment",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run.add_argument("statement", nargs="?", help="statement id (see 'sublevel list')")
    run.add_argument("--config", metavar="PATH", help="flat key = value config file")
    run.add_argument("--seed", type=int, metavar="N")
    run.add_argument("--resolution", type=int, metavar="N")
    run.add_argument("--out", metavar="DIR")
    run.add_argument("--paths", type=int, metavar="N", help="Monte Carlo paths")
    run.add_argument("--dt", type=float, metavar="X", help="walk time step")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")

    sub.add_parser("list", help="list statement ids with citations")
    sub.add_parser("catalog", help="print the built-in function catalog")
    return parser


def _cli_values(args) -> dict:
    values = {
        "statement": args.statement,
        "seed": args.seed,
        "resolution": args.resolution,
        "out": args.out,
        "paths": args.paths,
        "dt": args.dt,
    }
    for item in args.set:
        key, sep, value = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"--set {item!r}: expected KEY=VALUE")
        values[key] = _convert(key, value, f"--set {key}")
    return values


def cmd_list(out=None) -> int:
    out = out or sys.stdout
    for sid, citation in STATEMENTS.items():
        print(f"{sid}\t{citation}", file=out)
    return 0


def cmd_catalog(out=None) -> int:
    out = out or sys.stdout
    for f in builtin_catalog():
        print(f"{f.id}\tdim={f.dim}", file=out)
    return 0


def cmd_run(args, out=None, err=None, environ=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(file_values, read_env(environ), _cli_values(args))
    except ConfigError as exc:
        print(f"sublevel: {exc}", file=err)
        return 2
    start = time.perf_counter()
    try:
        report = run_experiment(cfg)
    except ValueError as exc:
        # precondition of the statement fails for the configured input
        print(f"sublevel: config: {exc}", file=err)
        return 2
    paths = write_outputs(cfg, report, time.perf_counter() - start)
    status = "PASS" if report.passed else "FAIL"
    print(f"{cfg.statement} seed={cfg['seed']}: {status} ({len(report.rows)} rows) -> {paths['report']}", file=out)
    if not report.passed:
        print(f"first failure: {report.first_failure()}", file=err)
        return 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return cmd_list()
    if args.command == "catalog":
        return cmd_catalog()
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
