"""Command-line driver.

Settings are resolved as: command-line flags, then the ``--config`` file (flat
``key = value`` lines, ``#`` comments), then built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__, cache, operators, phi_solver, report, spectral
from .operators import KernelKind

__all__ = ["main", "RunConfig", "ConfigError", "read_table", "parse_config_file", "format_value", "store_profile"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    kind: str = "cos"
    nodes: int | None = None
    precision: str = "auto"
    a: float | None = None
    a_min: float | None = None
    a_max: float | None = None
    steps: int | None = None
    u_min: float | None = None
    u_max: float | None = None
    du: float | None = None
    gamma: list[float] = field(default_factory=list)
    gamma_max: float | None = None
    dgamma: float | None = None
    branch: str = "both"
    closure: str = "balance"
    tolerance: float | None = None
    u_fixed: float = 0.0
    u_probe: float = -8.0
    t_max: float = 1.0
    points: int | None = None
    s_min: float = 3.0
    s_max: float = 10.0
    corrections: int = 1
    format: str = "csv"
    out: str | None = None
    json: str | None = None
    strict: bool = False
    cache: str | None = None
    no_cache: bool = False
    workers: int = 1

    def validate(self) -> "RunConfig":
        self.kind = KernelKind.parse(self.kind).value
        if self.nodes is not None and self.nodes < 8:
            raise ConfigError("nodes must be at least 8")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.branch.upper() not in ("A", "B", "BOTH"):
            raise ConfigError("branch must be A, B or both")
        if self.closure not in ("balance", "eigen"):
            raise ConfigError("closure must be balance or eigen")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: str) -> Any:
    kind = _FIELD_TYPES[key]
    text = value.strip()
    if kind == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if kind.startswith("list"):
        return [float(x) for x in text.replace(",", " ").split()]
    if text.lower() in ("", "none"):
        return None
    if "int" in kind:
        return int(text)
    if "float" in kind:
        return float(text)
    return text


def parse_config_file(path: str | Path) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return out


# ---------------------------------------------------------------- output

def format_value(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _render(rows: list[dict], columns: Sequence[str], fmt: str, meta: dict | None = None) -> str:
    if fmt == "json":
        doc = dict(meta or {})
        doc["columns"] = list(columns)
        doc["rows"] = [{c: _json_value(r[c]) for c in columns} for r in rows]
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_value(r[c]) for c in columns])
    return buf.getvalue()


def _json_value(x: Any) -> Any:
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def read_table(path: str | Path) -> list[dict]:
    """Rows of a CSV or JSON table written by this CLI (numbers parsed)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)["rows"]
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for k, v in r.items():
            try:
                parsed[k] = float(v)
            except ValueError:
                parsed[k] = v
        rows.append(parsed)
    return rows


# ---------------------------------------------------------------- grids

def _a_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.a is not None:
        grid = np.array([cfg.a])
    elif cfg.a_min is not None or cfg.a_max is not None:
        if cfg.a_min is None or cfg.a_max is None:
            raise ConfigError("give both --a-min and --a-max")
        steps = cfg.steps if cfg.steps is not None else 15
        if steps < 1 or cfg.a_max < cfg.a_min or (steps > 1 and cfg.a_max == cfg.a_min):
            raise ConfigError("empty a range")
        grid = np.linspace(cfg.a_min, cfg.a_max, steps)
    elif cfg.u_min is not None or cfg.u_max is not None:
        grid = np.exp(_u_grid(cfg, None, None, None))
    else:
        raise ConfigError("give --a, --a-min/--a-max/--steps or --u-min/--u-max/--du")
    if np.any(grid <= 0):
        raise ConfigError("a must be positive")
    return grid


def _u_grid(cfg: RunConfig, lo: float | None, hi: float | None, step: float | None) -> np.ndarray:
    u_min = cfg.u_min if cfg.u_min is not None else lo
    u_max = cfg.u_max if cfg.u_max is not None else hi
    du = cfg.du if cfg.du is not None else step
    if u_min is None or u_max is None or du is None:
        raise ConfigError("give --u-min, --u-max and --du")
    if not u_max > u_min or not du > 0:
        raise ConfigError("empty u range")
    return spectral.uniform_grid(u_min, u_max, du)


def _gamma_grid(cfg: RunConfig, default_max: float, default_step: float) -> np.ndarray:
    if cfg.gamma:
        return np.array(cfg.gamma, dtype=float)
    gmax = cfg.gamma_max if cfg.gamma_max is not None else default_max
    dg = cfg.dgamma if cfg.dgamma is not None else default_step
    if not (gmax > 0 and dg > 0):
        raise ConfigError("gamma range must be positive")
    count = int(round(gmax / dg))
    if count < 1:
        raise ConfigError("empty gamma range")
    return dg * np.arange(1, count + 1)


def _map(cfg: RunConfig, fn: Callable, items: Sequence) -> list:
    if cfg.workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, items))


def _cache_dir(cfg: RunConfig) -> Path | None:
    if cfg.no_cache:
        return None
    if cfg.cache:
        return Path(cfg.cache)
    return cache.default_cache_dir()


def _profile_path(directory: Path, kind: str, u: np.ndarray, nodes, precision) -> Path:
    return cache.cache_path(directory, "profile", kind, cache.grid_hash(nodes, u, precision))


def store_profile(directory: str | Path, profile: spectral.PotentialProfile, nodes=None,
                  precision="auto") -> Path:
    """Write the samples that rebuild ``profile`` into a cache directory."""
    kind = profile.kind.value
    mu_ext, lp, lm = spectral.profile_samples(profile)
    path = _profile_path(Path(directory), kind, profile.u, nodes, precision)
    return cache.cache_store(path, "profile", kind, nodes, profile.u,
                             {"mu": mu_ext, "log_det_plus": lp, "log_det_minus": lm}, precision)


def _profile(cfg: RunConfig, kind: str, u: np.ndarray) -> spectral.PotentialProfile:
    directory = _cache_dir(cfg)
    if directory is not None:
        path = _profile_path(directory, kind, u, cfg.nodes, cfg.precision)
        if path.exists():
            cols = cache.cache_load(path, "profile", kind, cfg.nodes, u, cfg.precision)
            return spectral.potential_profile(kind, u, cfg.nodes, cfg.precision,
                                              samples=(cols["mu"], cols["log_det_plus"], cols["log_det_minus"]))
    prof = spectral.potential_profile(kind, u, cfg.nodes, cfg.precision)
    if directory is not None:
        store_profile(directory, prof, cfg.nodes, cfg.precision)
    return prof


# ---------------------------------------------------------------- commands

DETS_COLUMNS = ("a", "u", "det_plus", "det_minus", "det_d", "log_det_d")


def cmd_dets(cfg: RunConfig) -> int:
    grid = _a_grid(cfg)
    n = cfg.nodes or 64
    directory = _cache_dir(cfg)
    rows = None
    if directory is not None:
        path = cache.cache_path(directory, "dets", cfg.kind, cache.grid_hash(n, grid, cfg.precision))
        if path.exists():
            cols = cache.cache_load(path, "dets", cfg.kind, n, grid, cfg.precision)
            rows = [dict(zip(DETS_COLUMNS, vals)) for vals in zip(*(cols[c] for c in DETS_COLUMNS))]
    if rows is None:
        qgrid = operators.gauss_legendre(n)
        records = _map(cfg, lambda a: operators.fredholm_dets(float(a), cfg.kind, qgrid, cfg.precision), list(grid))
        rows = [r.as_row() for r in records]
        if directory is not None:
            cache.cache_store(path, "dets", cfg.kind, n, grid, {c: [r[c] for r in rows] for c in DETS_COLUMNS},
                              cfg.precision)
    _emit(_render(rows, DETS_COLUMNS, cfg.format, {"command": "dets", "kind": cfg.kind, "n": n}), cfg.out)
    return 0


def cmd_phi(cfg: RunConfig) -> int:
    if cfg.a is None:
        raise ConfigError("phi needs --a")
    points = cfg.points or 101
    if points < 2 or not cfg.t_max > 0:
        raise ConfigError("need at least two points and a positive --t-max")
    t = np.linspace(0.0, cfg.t_max, points)
    plus = phi_solver.solve_phi(cfg.a, cfg.kind, 1, cfg.nodes, cfg.precision)
    minus = phi_solver.solve_phi(cfg.a, cfg.kind, -1, cfg.nodes, cfg.precision)
    gp, gm = phi_solver.phi_eval(plus, t), phi_solver.phi_eval(minus, t)
    rows = [{"t": ti, "x": cfg.a * ti, "g_plus": p, "g_minus": m} for ti, p, m in zip(t, gp, gm)]
    meta = {"command": "phi", "kind": cfg.kind, "a": cfg.a,
            "endpoint_plus": plus.endpoint, "endpoint_minus": minus.endpoint}
    _emit(_render(rows, ("t", "x", "g_plus", "g_minus"), cfg.format, meta), cfg.out)
    return 0


def cmd_mu(cfg: RunConfig) -> int:
    grid = _a_grid(cfg)
    vals = _map(cfg, lambda a: phi_solver.mu(float(a), cfg.kind, cfg.nodes, cfg.precision), list(grid))
    rows = [{"a": v.a, "u": v.u, "mu": v.mu, "mu_over_a": v.mu / v.a} for v in vals]
    _emit(_render(rows, ("a", "u", "mu", "mu_over_a"), cfg.format, {"command": "mu", "kind": cfg.kind}), cfg.out)
    return 0


POTENTIAL_COLUMNS = ("u", "a", "mu", "mu_prime", "v_plus", "v_minus", "v_plus_det", "v_minus_det")


def cmd_potentials(cfg: RunConfig) -> int:
    prof = _profile(cfg, cfg.kind, _u_grid(cfg, -3.0, 0.6, 0.01))
    rows = prof.rows()
    _emit(_render(rows, POTENTIAL_COLUMNS, cfg.format, {"command": "potentials", "kind": cfg.kind}), cfg.out)
    worst = float(np.max(prof.assembly_mismatch()))
    tol = cfg.tolerance if cfg.tolerance is not None else 1e-4
    return 1 if (cfg.strict and worst > tol) else 0


SCATTER_COLUMNS = ("gamma", "branch", "re_s", "im_s", "abs_s", "arg_s", "arg_ref", "phase_error", "flag")


def cmd_scatter(cfg: RunConfig) -> int:
    gammas = _gamma_grid(cfg, 5.0, 0.5)
    prof = _profile(cfg, cfg.kind, _u_grid(cfg, -12.0, 1.0, 0.01))
    branches = ("A", "B") if cfg.branch.upper() == "BOTH" else (cfg.branch.upper(),)
    tol = cfg.tolerance if cfg.tolerance is not None else 1e-2
    jobs = [(float(g), b) for g in gammas for b in branches]
    recs = _map(cfg, lambda job: spectral.scattering_matrix(job[0], cfg.kind, job[1], prof, closure=cfg.closure), jobs)
    rows, failed = [], False
    for r in recs:
        row = r.as_row()
        bad = (not r.converged) or r.phase_error > tol
        row["flag"] = "under-resolved" if not r.converged else ("phase" if r.phase_error > tol else "ok")
        failed |= bad
        rows.append(row)
    meta = {"command": "scatter", "kind": cfg.kind, "convention": recs[0].convention if recs else "",
            "reference": "chi_+" if cfg.kind == "cos" else "chi_-", "u_min": prof.u_min, "u_max": prof.u_max}
    _emit(_render(rows, SCATTER_COLUMNS, cfg.format, meta), cfg.out)
    return 1 if (cfg.strict and failed) else 0


JOST_COLUMNS = ("gamma", "ode_residual", "u_probe", "approach", "re_s_jost", "im_s_jost",
                "re_s_ode", "im_s_ode", "s_difference")


def cmd_jost(cfg: RunConfig) -> int:
    if cfg.kind != "cos":
        raise ConfigError("the Jost representation is implemented for --kind cos only")
    gammas = _gamma_grid(cfg, 2.0, 0.5)
    prof = _profile(cfg, "cos", _u_grid(cfg, -12.0, 1.0, 0.01))
    reps = _map(cfg, lambda g: spectral.jost_verify(float(g), prof, cfg.nodes, u_probe=cfg.u_probe,
                                                    closure=cfg.closure), list(gammas))
    rows = [{"gamma": r.gamma, "ode_residual": r.ode_residual, "u_probe": r.u_probe, "approach": r.approach,
             "re_s_jost": r.S_jost.real, "im_s_jost": r.S_jost.imag, "re_s_ode": r.S_ode.real,
             "im_s_ode": r.S_ode.imag, "s_difference": r.s_difference} for r in reps]
    _emit(_render(rows, JOST_COLUMNS, cfg.format, {"command": "jost"}), cfg.out)
    failed = any(r.ode_residual > 1e-4 or r.approach > 1e-5 or r.s_difference > 1e-3 for r in reps)
    return 1 if (cfg.strict and failed) else 0


ASYM_COLUMNS = ("fit", "coefficient", "value", "stderr", "expected")


def cmd_asymfit(cfg: RunConfig) -> int:
    s_range = (cfg.s_min, cfg.s_max)
    points = cfg.points or 15
    fit = spectral.asymptotic_fit(cfg.kind, s_range, points, cfg.corrections, cfg.nodes, cfg.precision)
    prod = spectral.product_fit(s_range, points, cfg.corrections, cfg.nodes, cfg.precision)
    sign = -1.0 if cfg.kind == "cos" else 1.0
    expected = {"c2": -0.25, "c1": 0.5 * sign, "clog": -0.125}
    rows = [{"fit": cfg.kind, "coefficient": b, "value": fit[b], "stderr": fit.stderr(b),
             "expected": expected.get(b, float("nan"))} for b in fit.basis]
    rows += [{"fit": "product", "coefficient": b, "value": prod[b], "stderr": prod.stderr(b),
              "expected": -0.5 if b == "c2" else float("nan")} for b in prod.basis]
    meta = {"command": "asymfit", "kind": cfg.kind, "s_range": list(s_range),
            "residual_norm": fit.residual_norm, "condition": fit.condition}
    _emit(_render(rows, ASYM_COLUMNS, cfg.format, meta), cfg.out)
    tol = {"c2": 0.005, "c1": 0.02, "clog": 0.03}
    failed = any(abs(fit[k] - v) > tol[k] for k, v in expected.items()) or abs(prod["c2"] / -0.5 - 1) > 0.01
    return 1 if (cfg.strict and failed) else 0


def cmd_zeros(cfg: RunConfig) -> int:
    gmax = cfg.gamma_max if cfg.gamma_max is not None else 40.0
    dg = cfg.dgamma if cfg.dgamma is not None else 0.1
    prof = _profile(cfg, cfg.kind, _u_grid(cfg, min(-1.0, cfg.u_fixed - 1.0), 1.0, 0.01))
    zs = spectral.structure_zeros(cfg.u_fixed, gmax, cfg.kind, prof, dgamma=dg, closure=cfg.closure)
    rows = [{"index": i + 1, "gamma": z} for i, z in enumerate(zs.zeros)]
    first_order = (gmax / (2 * math.pi)) * math.log(gmax / (2 * math.pi))
    meta = {"command": "zeros", "kind": cfg.kind, "u_fixed": cfg.u_fixed, "gamma_max": gmax,
            "dgamma": dg, "count": zs.count, "coarse": zs.coarse,
            "first_order_count": first_order,
            "free_region_count": spectral.free_zero_count(gmax, cfg.u_fixed, cfg.kind)}
    _emit(_render(rows, ("index", "gamma"), cfg.format, meta), cfg.out)
    return 1 if (cfg.strict and zs.coarse) else 0


def cmd_report(cfg: RunConfig) -> int:
    settings = report.ReportSettings(nodes=cfg.nodes, tolerance=cfg.tolerance)
    if cfg.u_min is not None:
        settings.u_min = cfg.u_min
    if cfg.u_max is not None:
        settings.u_max = cfg.u_max
    if cfg.du is not None:
        settings.du = cfg.du
    if cfg.gamma:
        settings.gammas = tuple(cfg.gamma)
    grid = spectral.uniform_grid(settings.u_min, settings.u_max, settings.du)
    entries = report.build_report(settings, lambda kind: _profile(cfg, kind, grid),
                                  progress=lambda msg: print(f"[report] {msg}", file=sys.stderr))
    text = report.render_json(entries) if cfg.format == "json" else report.render_markdown(entries)
    _emit(text, cfg.out)
    if cfg.json:
        _emit(report.render_json(entries) + "\n", cfg.json)
    return 0 if report.all_pass(entries) else 1


COMMANDS: dict[str, tuple[Callable[[RunConfig], int], str]] = {
    "dets": (cmd_dets, "Fredholm determinants on an a grid"),
    "phi": (cmd_phi, "solutions g+ and g- of the integral equations at one a"),
    "mu": (cmd_mu, "mu(a) on an a grid"),
    "potentials": (cmd_potentials, "mu, mu' and the Schrodinger potentials on a u grid"),
    "scatter": (cmd_scatter, "scattering coefficients against chi"),
    "jost": (cmd_jost, "Jost solution checks"),
    "asymfit": (cmd_asymfit, "least-squares fit of the determinant asymptotics"),
    "zeros": (cmd_zeros, "real zeros of alpha(u_fixed; gamma)"),
    "report": (cmd_report, "verification report of every identity"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("common options")
    g.add_argument("--config", help="flat key = value file; flags override it")
    g.add_argument("--kind", choices=["cos", "sin"])
    g.add_argument("--nodes", type=int, metavar="N", help="Gauss-Legendre nodes (default: automatic)")
    g.add_argument("--precision", help="auto, double, extended or a bit count")
    g.add_argument("--a", type=float)
    g.add_argument("--a-min", type=float, dest="a_min")
    g.add_argument("--a-max", type=float, dest="a_max")
    g.add_argument("--steps", type=int, help="number of a values")
    g.add_argument("--u-min", type=float, dest="u_min")
    g.add_argument("--u-max", type=float, dest="u_max")
    g.add_argument("--du", type=float)
    g.add_argument("--gamma", type=float, action="append", help="repeatable")
    g.add_argument("--gamma-max", type=float, dest="gamma_max")
    g.add_argument("--dgamma", type=float)
    g.add_argument("--branch", choices=["A", "B", "both"])
    g.add_argument("--closure", choices=["balance", "eigen"])
    g.add_argument("--tolerance", type=float)
    g.add_argument("--u-fixed", type=float, dest="u_fixed")
    g.add_argument("--u-probe", type=float, dest="u_probe")
    g.add_argument("--t-max", type=float, dest="t_max")
    g.add_argument("--points", type=int)
    g.add_argument("--s-min", type=float, dest="s_min")
    g.add_argument("--s-max", type=float, dest="s_max")
    g.add_argument("--corrections", type=int)
    g.add_argument("--format", choices=["csv", "json"])
    g.add_argument("--out", metavar="PATH")
    g.add_argument("--json", metavar="PATH", help="report: also write JSON entries here")
    g.add_argument("--strict", action="store_true")
    g.add_argument("--cache", metavar="PATH", help=f"cache directory (default: ${cache.CACHE_ENV})")
    g.add_argument("--no-cache", action="store_true", dest="no_cache")
    g.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(prog="fourierdirac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    given = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    merged: dict[str, Any] = {}
    if getattr(args, "config", None):
        merged.update(parse_config_file(args.config))
    merged.update(given)
    return RunConfig(**merged).validate()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command][0](cfg)
    except (ConfigError, cache.CacheError) as exc:
        print(f"fourierdirac {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"fourierdirac {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
