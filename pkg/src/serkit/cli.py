"""Command-line front end.

Every command reads one JSON config (``--config``).  A config is either a
constellation file::

    {"label": "QPSK", "points": [[...], [...]], "priors": [...], "complex": false}

with ``points`` given row-major as an N x M matrix (complex points as
interleaved Re, Im pairs per row), or a run file that names one::

    {"constellation": "qpsk.json", "fading": [{"family": "nakagami", "m": 1}, ...],
     "grid": "0.01:100:60:log", "seed": 7, "methods": ["closed", "mc"]}

Relative constellation paths resolve against the config's directory.
Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .constellation import Constellation, ConstellationError, complex_embed, min_distance, new_constellation, reduce
from .fading import FadingModel, check_gp_order, order_implies_ser_comparison
from .geometry import GeometryError, decompose
from .noise import MixingSpec, NoiseModel
from .quadrature import QuadratureError
from .ser import (
    TailError,
    cm_check,
    default_u_grid,
    representing_fn,
    rho0,
    ser_closed_cube,
    ser_closed_qam,
    ser_mc,
    ser_quadrature_curve,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

DEFAULT_GRID = "0.5:30:20:log"
DEFAULT_SAMPLES = 100_000
CLOSED_FORMS = ("qam", "cube")


class InputError(ValueError):
    """Malformed command-line or config input."""


def fixture_dir() -> Path:
    """Directory of the packaged example configs."""
    return Path(str(resources.files("serkit") / "fixtures"))


def parse_grid(spec: str) -> np.ndarray:
    """Parse ``MIN:MAX:COUNT:log|lin`` into an increasing grid."""
    parts = str(spec).split(":")
    if len(parts) != 4 or parts[3] not in ("log", "lin"):
        raise InputError(f"grid must look like MIN:MAX:COUNT:log|lin, got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InputError(f"bad grid {spec!r}: {exc}") from None
    if n < 2 or not hi > lo or (parts[3] == "log" and lo <= 0) or lo < 0:
        raise InputError(f"grid {spec!r} needs count >= 2, max > min and min > 0 for log spacing")
    return np.geomspace(lo, hi, n) if parts[3] == "log" else np.linspace(lo, hi, n)


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    return data


def constellation_from_dict(d: dict) -> Constellation:
    if "points" not in d:
        raise InputError("constellation needs a 'points' matrix")
    pts = np.asarray(d["points"], dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    label = str(d.get("label", ""))
    if d.get("complex", False):
        if pts.shape[1] % 2:
            raise InputError("complex points need an even number of interleaved entries per row")
        return complex_embed(pts[:, 0::2] + 1j * pts[:, 1::2], d.get("priors"), label)
    return new_constellation(pts, d.get("priors"), label)


def load_config(path: str | Path) -> tuple[dict, Constellation]:
    """Read a config and the constellation it describes."""
    path = Path(path)
    cfg = _read_json(path)
    if "points" in cfg:
        src = cfg
    elif "constellation" in cfg:
        ref = cfg["constellation"]
        src = ref if isinstance(ref, dict) else _read_json(path.parent / str(ref))
    else:
        raise InputError(f"{path}: expected 'points' or 'constellation'")
    return cfg, constellation_from_dict(src)


def _closed_form(cfg: dict):
    spec = cfg.get("closedForm")
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind == "qam":
        m = int(spec["M"])
        return lambda r: ser_closed_qam(m, np.asarray(r, dtype=float))
    if kind == "cube":
        return lambda r: ser_closed_cube(np.asarray(r, dtype=float))
    raise InputError(f"unknown closed form {kind!r}; expected one of {CLOSED_FORMS}")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _emit(args, name: str, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _grid(args, cfg: dict, default: str | None = DEFAULT_GRID) -> np.ndarray | None:
    spec = args.grid or cfg.get("grid") or default
    return None if spec is None else parse_grid(spec)


def _seed(args, cfg: dict) -> int | None:
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        return None
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise InputError("seed must be an unsigned 64-bit integer")
    return seed


def _tol(args, cfg: dict, default: float) -> float:
    tol = args.tol if args.tol is not None else cfg.get("tol", default)
    tol = float(tol)
    if not tol > 0:
        raise InputError("tol must be positive")
    return tol


def _check_dim(c: Constellation, limit: int = 4) -> int:
    n = reduce(c).reduced_dim
    if n > limit:
        raise InputError(f"reduced dimension {n} exceeds the supported maximum of {limit}")
    return n


# Commands -------------------------------------------------------------------


def cmd_analyze(args) -> int:
    cfg, c = load_config(args.config)
    red = reduce(c)
    n = red.reduced_dim
    report = {
        "label": c.label,
        "N": c.dim,
        "M": c.size,
        "reducedDim": n,
        "dMin": min_distance(c),
    }
    if n > 2:
        report["rho0"] = rho0(red)
    if n <= 4:
        dec = decompose(red)
        report["facetCounts"] = [sum(not h.artificial for h in reg.halfspaces) for reg in dec.regions]
        report["coneCounts"] = [sum(not k.artificial for k in cones) for cones in dec.cones]
        report["boundedRegions"] = list(dec.unclipped_bounded)
    _emit(args, "analyze.json", dumps(report))
    return EXIT_OK


def cmd_ser_curve(args) -> int:
    cfg, c = load_config(args.config)
    grid = _grid(args, cfg)
    tol = _tol(args, cfg, 1e-10)
    closed = _closed_form(cfg)
    noise = None
    if "noise" in cfg:
        noise = NoiseModel.compound(MixingSpec.from_dict(cfg["noise"]))
    default = ["closed"] * (closed is not None and noise is None) + ["quadrature"] * (noise is None) + ["mc"]
    methods = cfg.get("methods", default)
    bad = set(methods) - {"closed", "quadrature", "mc"}
    if bad:
        raise InputError(f"unknown methods {sorted(bad)}")
    if "closed" in methods and closed is None:
        raise InputError("method 'closed' needs a 'closedForm' entry")
    if noise is not None and set(methods) - {"mc"}:
        raise InputError("compound noise supports only the mc method")
    seed = _seed(args, cfg)
    if "mc" in methods and seed is None:
        raise InputError("the mc method needs a seed (--seed or 'seed' in the config)")
    n_samples = int(cfg.get("nSamples", DEFAULT_SAMPLES))
    if "quadrature" in methods:
        _check_dim(c)

    rows: list[tuple[float, float, float, str, str]] = []
    failed = False
    for method in methods:
        try:
            if method == "closed":
                vals = np.asarray(closed(grid), dtype=float)
                rows += [(r, v, 0.0, "closed_form", "ok") for r, v in zip(grid, vals)]
            elif method == "quadrature":
                vals = ser_quadrature_curve(c, grid, tol=tol)
                rows += [(r, v, 0.0, "quadrature", "ok") for r, v in zip(grid, vals)]
            else:
                for r in grid:
                    est = ser_mc(c, noise, float(r), n_samples, seed)
                    rows.append((r, est.value, est.stderr, "mc", "ok"))
        except (QuadratureError, GeometryError, FloatingPointError) as exc:
            print(f"serkit: {method} failed: {exc}", file=sys.stderr)
            rows += [(r, float("nan"), float("nan"), method, "failed") for r in grid]
            failed = True
    header = "rho,value,stderr,method" + (",status" if failed else "")
    lines = [header]
    for r, v, s, m, st in rows:
        line = f"{fmt(r)},{fmt(v)},{fmt(s)},{m}"
        lines.append(line + (f",{st}" if failed else ""))
    _emit(args, "ser_curve.csv", "\n".join(lines) + "\n")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_cm_check(args) -> int:
    cfg, c = load_config(args.config)
    _check_dim(c)
    grid = _grid(args, cfg, default=None)
    eps = _tol(args, cfg, 1e-7)
    verdict = cm_check(c, grid, int(cfg.get("maxOrder", 4)), eps, bool(cfg.get("scan", False)))
    out = verdict.to_dict()
    out["label"] = c.label
    _emit(args, "cm_check.json", dumps(out))
    return EXIT_OK


def cmd_fading_compare(args) -> int:
    cfg, c = load_config(args.config)
    specs = cfg.get("fading")
    if not isinstance(specs, list) or len(specs) != 2:
        raise InputError("fading-compare needs a 'fading' list with two specs")
    f1, f2 = (FadingModel.from_dict(s) for s in specs)
    n = _check_dim(c)
    grid = _grid(args, cfg, default="0.01:100:60:log")
    closed = _closed_form(cfg)
    ps = sorted({0.0, max(0.5 * n - 1, 0.0)})
    orders = {fmt(p): check_gp_order(f1, f2, p, grid).to_dict() for p in ps}
    rep = order_implies_ser_comparison(c, f1, f2, grid, ser_fn=closed)
    out = {
        "label": c.label,
        "fading": [f1.to_dict(), f2.to_dict()],
        "orders": orders,
        "serP": rep["p"],
        "serRelation": rep["ser_relation"],
        "serBrackets": [list(b) for b in rep["ser_brackets"]],
        "firstWorseAt": rep["first_worse_at"],
        "consistent": rep["consistent"],
    }
    lines = ["rho,ser1,ser2"] + [f"{fmt(r)},{fmt(a)},{fmt(b)}" for r, a, b in zip(rep["rho"], rep["ser1"], rep["ser2"])]
    _emit(args, "fading_compare.json", dumps(out))
    _emit(args, "fading_ser.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_representing_fn(args) -> int:
    cfg, c = load_config(args.config)
    _check_dim(c)
    spec = args.grid or cfg.get("uGrid")
    grid = default_u_grid(c) if spec is None else parse_grid(spec)
    mu = representing_fn(c, u_grid=grid, tol=_tol(args, cfg, 1e-10))
    _emit(args, "mu.csv", mu.to_csv())
    return EXIT_OK


def cmd_decompose(args) -> int:
    cfg, c = load_config(args.config)
    _check_dim(c)
    _emit(args, "decomposition.json", decompose(c).to_json() + "\n")
    return EXIT_OK


def cmd_fixtures(args) -> int:
    for p in sorted(fixture_dir().glob("*.json")):
        print(p)
    return EXIT_OK


COMMANDS = {
    "analyze": (cmd_analyze, "print dimensions, d_min, rho0 and facet/cone counts"),
    "ser-curve": (cmd_ser_curve, "SER against rho by closed form, quadrature and Monte Carlo"),
    "cm-check": (cmd_cm_check, "complete-monotonicity verdict"),
    "fading-compare": (cmd_fading_compare, "G_p order verdicts and fading-averaged SER curves"),
    "representing-fn": (cmd_representing_fn, "tabulate mu(u); default grid is graded from the onset"),
    "decompose": (cmd_decompose, "dump the Voronoi cone decomposition as JSON"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="serkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config or constellation file")
        p.add_argument("--out", help="output directory (default: stdout)")
        p.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
        p.add_argument("--tol", type=float, help="numerical tolerance")
        p.add_argument("--grid", help="MIN:MAX:COUNT:log|lin (rho grid; u grid for representing-fn)")
    sub.add_parser("fixtures", help="list the packaged example configs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "fixtures":
        return cmd_fixtures(args)
    fn = COMMANDS[args.command][0]
    try:
        return fn(args)
    except (QuadratureError, TailError, GeometryError, FloatingPointError) as exc:
        print(f"serkit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ConstellationError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"serkit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
