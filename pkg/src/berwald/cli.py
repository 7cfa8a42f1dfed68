"""Command-line front end: scene configs, experiment orchestration, CSV/JSON
artifacts and figure rendering.

Subcommands map one-to-one onto library operations; the ``run`` subcommand
executes a YAML scene (bodies, measures, descriptors, experiments) and exits
0 only when every certification passes.  CSV artifacts carry a claim header
line; figures render next to the delimited output unless --no-plot.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np
import yaml

from . import certify, covariogram, means, measures, quadrature, starbodies
from . import geometry
from .geometry import ConvexBody, GeometryError

SCHEMA_VERSION = 1

_BODY_ALIASES = {"square": ("cube", 2), "triangle": ("simplex", 2),
                 "cube": ("cube", 3), "tetrahedron": ("simplex", 3)}


class ConfigError(ValueError):
    """Schema violation; message carries the offending key path."""


# ---------------------------------------------------------------------------
# Spec parsers (flags) and config builders
# ---------------------------------------------------------------------------

def parse_body(spec: str) -> ConvexBody:
    """Named primitives: simplex:N, cube:N[:centered], cross:N, plus the
    aliases square/triangle/cube/tetrahedron and centered-square."""
    if spec in _BODY_ALIASES:
        kind, n = _BODY_ALIASES[spec]
        return getattr(geometry, kind)(n)
    if spec in ("centered-square", "symmetric-square"):
        return geometry.cube(2, centered=True)
    parts = spec.split(":")
    kind = parts[0].replace("-", "_")
    try:
        n = int(parts[1])
    except (IndexError, ValueError):
        raise ConfigError(f"body '{spec}': expected NAME:DIM")
    if kind == "simplex":
        return geometry.simplex(n)
    if kind == "cube":
        return geometry.cube(n, centered=len(parts) > 2 and parts[2] == "centered")
    if kind in ("cross", "cross_polytope"):
        return geometry.cross_polytope(n)
    raise ConfigError(f"unknown body '{spec}'")


def build_body(cfg: dict, path: str) -> ConvexBody:
    kind = cfg.get("kind")
    try:
        if kind == "simplex":
            return geometry.simplex(int(cfg["dim"]))
        if kind == "cube":
            return geometry.cube(int(cfg["dim"]), centered=bool(cfg.get("centered")))
        if kind == "cross":
            return geometry.cross_polytope(int(cfg["dim"]))
        if kind == "vertices":
            return geometry.body_from_vertices(np.asarray(cfg["points"], float))
        if kind == "halfspaces":
            return geometry.body_from_halfspaces(np.asarray(cfg["A"], float),
                                                 np.asarray(cfg["b"], float))
    except KeyError as exc:
        raise ConfigError(f"{path}: missing field {exc}")
    except GeometryError as exc:
        raise ConfigError(f"{path}: {exc}")
    raise ConfigError(f"{path}: unknown body kind '{kind}'")


def parse_measure(spec: str, n: int) -> measures.MeasureSpec:
    parts = spec.replace("-", "_").split(":")
    kind = parts[0]
    args = [float(x) for x in parts[1:]]
    try:
        if kind == "lebesgue":
            return measures.lebesgue(n)
        if kind == "gaussian":
            return measures.gaussian(n, *args)
        if kind == "cauchy":
            return measures.cauchy(n, *args)
        if kind == "exponential":
            return measures.exponential(n, *args)
        if kind == "radial_power":
            return measures.radial_power(n, *args)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"measure '{spec}': {exc}")
    raise ConfigError(f"unknown measure '{spec}'")


def build_measure(cfg: dict, n: int, path: str) -> measures.MeasureSpec:
    kind = cfg.get("kind")
    params = {k: v for k, v in cfg.items() if k != "kind"}
    try:
        return measures.measure_catalog(kind, n, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}")


def parse_descriptor(spec: str, n: int) -> measures.ConcavityDescriptor:
    parts = spec.replace("_", "-").split(":")
    kind = parts[0]
    try:
        if kind == "power":
            return measures.descriptor_catalog("power", s=float(parts[1]))
        if kind == "log":
            return measures.descriptor_catalog("log")
        if kind == "ehrhard":
            return measures.descriptor_catalog("ehrhard")
        if kind == "gaussian-half-power":
            return measures.descriptor_catalog("gaussian-half-power", n=n)
        if kind == "symmetric-power":
            return measures.descriptor_catalog("symmetric-power", n=n)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"descriptor '{spec}': {exc}")
    raise ConfigError(f"unknown descriptor '{spec}'")


def build_descriptor(cfg: dict, n: int, path: str) -> measures.ConcavityDescriptor:
    kind = cfg.get("kind")
    try:
        if kind == "power":
            return measures.descriptor_catalog("power", s=float(cfg["s"]))
        if kind in ("log", "ehrhard"):
            return measures.descriptor_catalog(kind)
        if kind in ("gaussian-half-power", "symmetric-power"):
            return measures.descriptor_catalog(kind, n=n)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}")
    raise ConfigError(f"{path}: unknown descriptor kind '{kind}'")


def parse_function(spec: str, K: ConvexBody, seed: int) -> means.ConcaveFunction:
    """roof[:height], random[:pieces] on the given body."""
    parts = spec.split(":")
    if parts[0] == "roof":
        height = float(parts[1]) if len(parts) > 1 else 1.0
        apex = np.zeros(K.n) if K.contains(np.zeros(K.n), 1e-9) else K.centroid
        return means.ConcaveFunction.from_roof(K, height, apex)
    if parts[0] == "random":
        k = int(parts[1]) if len(parts) > 1 else 3
        rng = quadrature.rng_stream(seed, "cli_function")
        pieces = []
        for _ in range(k):
            a = rng.standard_normal(K.n)
            c = -float(np.min(K.vertices @ a)) + rng.uniform(0.3, 1.0)
            pieces.append((a, c))
        return means.ConcaveFunction(K, pieces=pieces)
    raise ConfigError(f"unknown function spec '{spec}'")


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def _parse_vec(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")])


def _parse_grid(text: str) -> list:
    return [float(x) for x in text.split(",")]


# ---------------------------------------------------------------------------
# Artifact writers
# ---------------------------------------------------------------------------

def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: str, claim: str, header: list, rows) -> str:
    lines = [f"# claim: {claim}", ",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.12g}" if isinstance(v, (int, float, np.floating))
                              else str(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def write_json(path: str, payload: dict) -> str:
    _atomic_write(path, json.dumps(payload, indent=2, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def _maybe_plot(enabled: bool, fn, *args, **kw):
    if not enabled:
        return None
    from . import plotting
    return getattr(plotting, fn)(*args, **kw)


# ---------------------------------------------------------------------------
# Subcommand implementations (thin adapters, no computation logic)
# ---------------------------------------------------------------------------

def cmd_body_info(args) -> int:
    K = parse_body(args.body)
    dk = geometry.difference_body(K)
    info = {"dimension": K.n, "vertices": len(K.vertices),
            "facets": len(K.b), "volume": K.volume,
            "centroid": K.centroid, "symmetric": K.is_symmetric(),
            "difference_body_volume": dk.volume,
            "volume_ratio_DK": dk.volume / K.volume}
    print(json.dumps(info, indent=2, default=_json_default))
    if args.out:
        write_json(args.out + ".json", info)
        write_csv(args.out + "_vertices.csv", "body_vertices",
                  [f"x{i}" for i in range(K.n)], K.vertices)
    return 0


def cmd_covariogram(args) -> int:
    K = parse_body(args.body)
    mu = parse_measure(args.measure, K.n)
    theta = _parse_vec(args.dir)
    prof = covariogram.profile(K, mu, theta, nodes=args.nodes,
                               polarized=args.polarized)
    print(f"mu(K) = {prof.total:.12g}   rho_DK(theta) = {prof.rho_dk:.12g}")
    print(f"derivative at zero = {covariogram.derivative_at_zero(prof):.12g}")
    if args.out:
        rows = list(zip(prof.data.grid, prof.data.values))
        write_csv(args.out + ".csv",
                  "polarized_covariogram" if args.polarized else "covariogram",
                  ["r", "g"], rows)
        _maybe_plot(args.plot, "plot_profile", prof.data.grid,
                    prof.data.values, args.out + ".png")
    return 0


def _direction_set(args, n: int) -> quadrature.DirectionSet:
    if getattr(args, "dir", None):
        v = geometry.as_direction(_parse_vec(args.dir))
        return quadrature.DirectionSet(n=n, vectors=v[None, :], scheme="manual")
    count = args.dirs or {2: 64, 3: 256}.get(n, 512)
    return quadrature.directions(n, count, seed=args.seed,
                                 symmetric=getattr(args, "symmetric", False))


def _star_csv(path, claim, samples, plot):
    n = samples.directions.n
    header = [f"theta{i}" for i in range(n)] + ["value", "error"]
    rows = [list(v) + [val, err] for v, val, err in
            zip(samples.directions.vectors, samples.values, samples.errors)]
    write_csv(path + ".csv", claim, header, rows)
    _maybe_plot(plot, "plot_star_values", samples.directions.vectors,
                samples.values, path + ".png", title=claim)


def cmd_radial_mean(args) -> int:
    K = parse_body(args.body)
    mu = parse_measure(args.measure, K.n)
    dirs = _direction_set(args, K.n)
    p = float("inf") if args.p == "inf" else float(args.p)
    fn = starbodies.polarized_mean_body if args.polarized \
        else starbodies.radial_mean_body
    samples = fn(K, mu, p, dirs)
    for v, val in zip(dirs.vectors, samples.values):
        print(f"theta = {np.array2string(v, precision=6)}   rho = {val:.12g}")
    if args.out:
        _star_csv(args.out, samples.family, samples, args.plot)
    return 0


def cmd_projection_body(args) -> int:
    K = parse_body(args.body)
    mu = parse_measure(args.measure, K.n)
    dirs = _direction_set(args, K.n)
    proj = starbodies.weighted_projection_body(K, mu, dirs)
    for v, val in zip(dirs.vectors, proj.values):
        print(f"theta = {np.array2string(v, precision=6)}   h = {val:.12g}"
              f"   polar rho = {1.0 / val:.12g}")
    print(f"shift vector = {np.array2string(proj.shift, precision=10)}")
    if args.out:
        n = K.n
        header = [f"theta{i}" for i in range(n)] + ["support", "polar_radial"]
        rows = [list(v) + [h, 1.0 / h]
                for v, h in zip(dirs.vectors, proj.values)]
        write_csv(args.out + ".csv", proj.family, header, rows)
        _maybe_plot(args.plot, "plot_star_values", dirs.vectors, proj.values,
                    args.out + ".png", title=proj.family, label="support")
    return 0


def cmd_berwald_curve(args) -> int:
    fspec = args.f
    parts = fspec.split(":")
    if len(parts) > 1 and not _is_number(parts[1]):
        # roof:triangle form: the body rides along in the function spec
        K = parse_body(parts[1])
        fspec = ":".join([parts[0]] + parts[2:]) if len(parts) > 2 else parts[0]
    elif args.body:
        K = parse_body(args.body)
    else:
        raise ConfigError("need --body or an --f spec naming the body")
    mu = parse_measure(args.measure, K.n)
    desc = parse_descriptor(args.desc, K.n)
    f = parse_function(fspec, K, args.seed)
    grid = _parse_grid(args.p_grid)
    curve = means.berwald_curve(f, mu, desc, grid)
    print("p, T(p), constant, mean")
    for p, t, c, m in zip(curve.p_grid, curve.values, curve.constants, curve.means):
        print(f"{p:8.3f}  {t:.10g}  {c:.10g}  {m:.10g}")
    status = "nonincreasing" if curve.is_nonincreasing() else "VIOLATION"
    print(f"curve check: {status}")
    if args.out:
        write_csv(args.out + ".csv", "berwald_curve",
                  ["p", "T", "constant", "mean"],
                  zip(curve.p_grid, curve.values, curve.constants, curve.means))
        _maybe_plot(args.plot, "plot_curve", curve.p_grid, curve.values,
                    args.out + ".png")
    return 0 if curve.is_nonincreasing() else 1


def _chain_dispatch(kind, K, mu, desc, grid, dirs, tols):
    if kind == "reverse":
        return certify.reverse_chain(K, mu, desc, grid, dirs, **tols)
    if kind == "log":
        return certify.log_chain(K, mu, desc, grid, dirs, **tols)
    if kind == "symmetric":
        return certify.symmetric_chain(K, mu, grid, dirs, **tols)
    raise ConfigError(f"unknown chain kind '{kind}'")


def _report_out(rep, out, plot, dirs=None):
    if not out:
        return
    write_json(out + ".json", rep.to_dict())
    if rep.chain_values is not None and dirs is not None:
        labels = [lk.label.split(" <= ")[0] for lk in rep.links]
        labels.append(rep.links[-1].label.split(" <= ")[1])
        header = [f"theta{i}" for i in range(dirs.vectors.shape[1])] + labels
        rows = [list(v) + list(row) for v, row in
                zip(dirs.vectors, rep.chain_values)]
        write_csv(out + ".csv", rep.claim, header, rows)
        _maybe_plot(plot, "plot_chain", dirs.vectors, rep.chain_values,
                    labels, out + ".png", title=rep.claim)


def cmd_chain(args) -> int:
    K = parse_body(args.body)
    mu = parse_measure(args.measure, K.n)
    desc = parse_descriptor(args.desc, K.n) if args.desc else None
    dirs = _direction_set(args, K.n)
    grid = _parse_grid(args.p_grid)
    tols = {"pass_tol": args.tol, "eq_tol": args.eq_tol}
    rep = _chain_dispatch(args.kind, K, mu, desc, grid, dirs, tols)
    print(rep.to_json(indent=2))
    _report_out(rep, args.out, args.plot, dirs)
    return 0 if rep.passed else 1


def cmd_rs_zhang(args) -> int:
    K = parse_body(args.body)
    nu = parse_measure(args.nu, K.n)
    mu = parse_measure(args.measure, K.n)
    desc = parse_descriptor(args.desc, K.n)
    tols = {"pass_tol": args.tol, "eq_tol": args.eq_tol}
    rs = certify.rogers_shephard_check(K, nu, mu, desc, **tols)
    zh = certify.zhang_check(K, nu, mu, desc, **tols)
    print(rs.to_json(indent=2))
    print(zh.to_json(indent=2))
    if args.out:
        write_json(args.out + ".json",
                   {"rogers_shephard": rs.to_dict(), "zhang": zh.to_dict()})
        write_csv(args.out + ".csv", "rogers_shephard_zhang",
                  ["claim", "lhs", "rhs", "margin", "pass", "equality"],
                  [["rogers_shephard", rs.params["lhs"], rs.params["rhs"],
                    rs.links[0].min_margin, rs.passed, rs.equality],
                   ["zhang", zh.params["lhs"], zh.params["rhs"],
                    zh.links[0].min_margin, zh.passed, zh.equality]])
        _maybe_plot(args.plot, "plot_scalar_bound", zh.params["lhs"],
                    zh.params["rhs"], ["lhs", "rhs"], args.out + ".png",
                    "zhang bound")
    return 0 if (rs.passed and zh.passed) else 1


def cmd_moments(args) -> int:
    n = args.dim
    mu = parse_measure(args.measure, n)
    desc = parse_descriptor(args.desc, n)
    theta = _parse_vec(args.dir)
    rep = means.halfspace_moment_ratio(mu, theta, args.p, args.q, desc)
    print(f"lhs = {rep.lhs:.10g}   rhs = {rep.rhs:.10g}   "
          f"margin = {rep.margin:.6g}   halfspace mass = {rep.halfspace_mass:.10g}")
    if args.out:
        write_csv(args.out + ".csv", "halfspace_moment_ratio",
                  ["p", "q", "lhs", "rhs", "margin", "halfspace_mass",
                   "tail_bound"],
                  [[rep.p, rep.q, rep.lhs, rep.rhs, rep.margin,
                    rep.halfspace_mass, rep.tail_bound]])
        _maybe_plot(args.plot, "plot_scalar_bound", rep.lhs, rep.rhs,
                    ["lhs", "rhs"], args.out + ".png", "moment ratio")
    return 0 if rep.margin >= -args.tol else 1


# ---------------------------------------------------------------------------
# Scene runner
# ---------------------------------------------------------------------------

def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"invalid YAML{where}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    if cfg.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"schema: expected {SCHEMA_VERSION}, "
                          f"got {cfg.get('schema')!r}")
    return cfg


def _run_experiment(exp, idx, scene, out_dir, plot, seed):
    """Execute one experiment entry; returns (name, status, detail)."""
    path = f"experiments[{idx}]"
    op = exp.get("op")
    if not isinstance(exp.get("out"), str) or not exp["out"]:
        raise ConfigError(f"{path}.out: required output name")
    out = os.path.join(out_dir, exp["out"])

    def body(key="body"):
        name = exp.get(key)
        if name not in scene["bodies"]:
            raise ConfigError(f"{path}.{key}: unknown body '{name}'")
        return scene["bodies"][name]

    def measure(key, n):
        name = exp.get(key)
        if name not in scene["measures"]:
            raise ConfigError(f"{path}.{key}: unknown measure '{name}'")
        return scene["measures"][name](n)

    def descriptor(n):
        name = exp.get("descriptor")
        if name not in scene["descriptors"]:
            raise ConfigError(f"{path}.descriptor: unknown descriptor '{name}'")
        return scene["descriptors"][name](n)

    tols = scene["tolerances"]
    if op == "chain":
        K = body()
        mu = measure("measure", K.n)
        desc = descriptor(K.n) if exp.get("descriptor") else None
        grid = exp.get("p_grid", scene["p_grid"])
        count = exp.get("directions", scene["directions"])
        dirs = quadrature.directions(K.n, count, seed=seed,
                                     symmetric=bool(exp.get("symmetric")))
        rep = _chain_dispatch(exp.get("kind", "reverse"), K, mu, desc, grid,
                              dirs, tols)
        _report_out(rep, out, plot, dirs)
        detail = (f"equality={rep.equality} min_margin="
                  f"{min(l.min_margin for l in rep.links):.3g}")
        return op, rep.passed, detail
    if op == "rs-zhang":
        K = body()
        nu = measure("nu", K.n)
        mu = measure("measure", K.n)
        desc = descriptor(K.n)
        rs = certify.rogers_shephard_check(K, nu, mu, desc, **tols)
        zh = certify.zhang_check(K, nu, mu, desc, **tols)
        write_json(out + ".json", {"rogers_shephard": rs.to_dict(),
                                   "zhang": zh.to_dict()})
        write_csv(out + ".csv", "rogers_shephard_zhang",
                  ["claim", "lhs", "rhs", "margin", "pass", "equality"],
                  [["rogers_shephard", rs.params["lhs"], rs.params["rhs"],
                    rs.links[0].min_margin, rs.passed, rs.equality],
                   ["zhang", zh.params["lhs"], zh.params["rhs"],
                    zh.links[0].min_margin, zh.passed, zh.equality]])
        _maybe_plot(plot, "plot_scalar_bound", zh.params["lhs"],
                    zh.params["rhs"], ["lhs", "rhs"], out + ".png",
                    "zhang bound")
        detail = f"rs_eq={rs.equality} zhang_eq={zh.equality}"
        return op, rs.passed and zh.passed, detail
    if op == "berwald-curve":
        K = body()
        mu = measure("measure", K.n)
        desc = descriptor(K.n)
        f = parse_function(exp.get("f", "roof"), K, seed)
        grid = exp.get("p_grid", scene["p_grid"])
        curve = means.berwald_curve(f, mu, desc, grid)
        write_csv(out + ".csv", "berwald_curve",
                  ["p", "T", "constant", "mean"],
                  zip(curve.p_grid, curve.values, curve.constants,
                      curve.means))
        _maybe_plot(plot, "plot_curve", curve.p_grid, curve.values,
                    out + ".png")
        ok = curve.is_nonincreasing()
        return op, ok, f"T range [{curve.values.min():.6g}, {curve.values.max():.6g}]"
    if op == "covariogram":
        K = body()
        mu = measure("measure", K.n)
        prof = covariogram.profile(K, mu, np.asarray(exp["direction"], float),
                                   polarized=bool(exp.get("polarized")))
        write_csv(out + ".csv", "covariogram", ["r", "g"],
                  zip(prof.data.grid, prof.data.values))
        _maybe_plot(plot, "plot_profile", prof.data.grid, prof.data.values,
                    out + ".png")
        return op, True, f"mu(K)={prof.total:.6g}"
    if op == "radial-mean":
        K = body()
        mu = measure("measure", K.n)
        p = exp.get("p", 1.0)
        count = exp.get("directions", scene["directions"])
        dirs = quadrature.directions(K.n, count, seed=seed)
        fn = starbodies.polarized_mean_body if exp.get("polarized") \
            else starbodies.radial_mean_body
        samples = fn(K, mu, float(p), dirs)
        _star_csv(out, samples.family, samples, plot)
        flagged = bool(samples.flags.any())
        return op, not flagged, f"p={p} dirs={count}"
    if op == "projection-body":
        K = body()
        mu = measure("measure", K.n)
        count = exp.get("directions", scene["directions"])
        dirs = quadrature.directions(K.n, count, seed=seed)
        proj = starbodies.weighted_projection_body(K, mu, dirs)
        header = [f"theta{i}" for i in range(K.n)] + ["support", "polar_radial"]
        rows = [list(v) + [h, 1.0 / h] for v, h in
                zip(dirs.vectors, proj.values)]
        write_csv(out + ".csv", proj.family, header, rows)
        _maybe_plot(plot, "plot_star_values", dirs.vectors, proj.values,
                    out + ".png", title=proj.family, label="support")
        return op, True, f"shift_norm={np.linalg.norm(proj.shift):.3g}"
    if op == "moments":
        n = int(exp.get("dim", 2))
        mu = measure("measure", n)
        desc = descriptor(n)
        rep = means.halfspace_moment_ratio(
            mu, np.asarray(exp["direction"], float),
            float(exp.get("p", 1.0)), float(exp.get("q", 2.0)), desc)
        write_csv(out + ".csv", "halfspace_moment_ratio",
                  ["p", "q", "lhs", "rhs", "margin", "halfspace_mass",
                   "tail_bound"],
                  [[rep.p, rep.q, rep.lhs, rep.rhs, rep.margin,
                    rep.halfspace_mass, rep.tail_bound]])
        _maybe_plot(plot, "plot_scalar_bound", rep.lhs, rep.rhs,
                    ["lhs", "rhs"], out + ".png", "moment ratio")
        return op, rep.margin >= -tols["pass_tol"], f"lhs={rep.lhs:.6g} rhs={rep.rhs:.6g}"
    raise ConfigError(f"{path}.op: unknown operation '{op}'")


def cmd_run(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out_dir = args.out_dir or cfg.get("out_dir", "out")
    plot = cfg.get("plot", True) if args.plot is None else args.plot
    tol_cfg = cfg.get("tolerances", {})
    scene = {
        "bodies": {}, "measures": {}, "descriptors": {},
        "tolerances": {"pass_tol": float(tol_cfg.get("pass", 1e-6)),
                       "eq_tol": float(tol_cfg.get("equality", 1e-4))},
        "directions": int(cfg.get("directions", 64)),
        "p_grid": list(cfg.get("p_grid", [0.5, 1.0, 2.0])),
    }
    for name, bc in (cfg.get("bodies") or {}).items():
        scene["bodies"][name] = build_body(bc, f"bodies.{name}")
    for name, mc in (cfg.get("measures") or {}).items():
        scene["measures"][name] = \
            (lambda mc=mc, name=name: lambda n: build_measure(mc, n, f"measures.{name}"))()
    for name, dc in (cfg.get("descriptors") or {}).items():
        scene["descriptors"][name] = \
            (lambda dc=dc, name=name: lambda n: build_descriptor(dc, n, f"descriptors.{name}"))()
    experiments = cfg.get("experiments")
    if not isinstance(experiments, list) or not experiments:
        raise ConfigError("experiments: need a non-empty list")

    os.makedirs(out_dir, exist_ok=True)
    all_ok = True
    print(f"{'experiment':24s} {'op':16s} {'status':8s} detail")
    for i, exp in enumerate(experiments):
        if not isinstance(exp, dict):
            raise ConfigError(f"experiments[{i}]: must be a mapping")
        op, ok, detail = _run_experiment(exp, i, scene, out_dir, plot, seed)
        all_ok &= ok
        print(f"{exp['out']:24s} {op:16s} {'PASS' if ok else 'FAIL':8s} {detail}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------

def _add_common(sp, body=True, measure=True, desc=False):
    if body:
        sp.add_argument("--body", required=True,
                        help="simplex:N | cube:N[:centered] | cross:N | square | triangle")
    if measure:
        sp.add_argument("--measure", required=True,
                        help="lebesgue | gaussian[:sigma] | cauchy:beta | "
                             "exponential[:c] | radial-power:alpha")
    if desc:
        sp.add_argument("--desc", help="power:s | log | ehrhard | "
                                       "gaussian-half-power | symmetric-power")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="output path prefix (CSV/JSON, PNG)")
    sp.add_argument("--plot", dest="plot", action="store_true", default=True)
    sp.add_argument("--no-plot", dest="plot", action="store_false")
    sp.add_argument("--tol", type=float, default=certify.PASS_TOL)
    sp.add_argument("--eq-tol", type=float, default=certify.EQ_TOL)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="berwald",
        description="Certification toolkit for weighted Berwald-type "
                    "inequalities, covariograms, radial mean bodies and "
                    "projection bodies of polytopes.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="execute a YAML scene config")
    sp.add_argument("config")
    sp.add_argument("--out-dir")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--plot", dest="plot", action="store_true", default=None)
    sp.add_argument("--no-plot", dest="plot", action="store_false")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("body-info", help="summary of a named body")
    _add_common(sp, measure=False)
    sp.set_defaults(fn=cmd_body_info)

    sp = sub.add_parser("covariogram", help="directional covariogram profile")
    _add_common(sp)
    sp.add_argument("--dir", required=True, help="direction, e.g. 1,0")
    sp.add_argument("--nodes", type=int, default=quadrature.PROFILE_NODES)
    sp.add_argument("--polarized", action="store_true")
    sp.set_defaults(fn=cmd_covariogram)

    sp = sub.add_parser("radial-mean", help="radial mean body samples")
    _add_common(sp)
    sp.add_argument("--p", required=True, help="order, 'inf' allowed")
    sp.add_argument("--dir", help="single direction, e.g. 1,0")
    sp.add_argument("--dirs", type=int, help="direction count")
    sp.add_argument("--polarized", action="store_true")
    sp.set_defaults(fn=cmd_radial_mean)

    sp = sub.add_parser("projection-body", help="weighted projection body")
    _add_common(sp)
    sp.add_argument("--dir", help="single direction")
    sp.add_argument("--dirs", type=int)
    sp.set_defaults(fn=cmd_projection_body)

    sp = sub.add_parser("berwald-curve", help="normalized mean curve")
    _add_common(sp, body=False, desc=True)
    sp.add_argument("--body", help="body name when --f does not carry one")
    sp.add_argument("--f", default="roof", help="roof[:height] | random[:pieces]")
    sp.add_argument("--p-grid", default="-0.5,0.5,1,2,5")
    sp.set_defaults(fn=cmd_berwald_curve)

    sp = sub.add_parser("chain", help="inclusion chain certification")
    _add_common(sp, desc=True)
    sp.add_argument("--kind", choices=["reverse", "log", "symmetric"],
                    default="reverse")
    sp.add_argument("--p-grid", default="1,2")
    sp.add_argument("--dir", help="single direction")
    sp.add_argument("--dirs", type=int)
    sp.set_defaults(fn=cmd_chain)

    sp = sub.add_parser("rs-zhang", help="difference-body and polar-projection bounds")
    _add_common(sp, desc=True)
    sp.add_argument("--nu", required=True, help="homogeneous measure spec")
    sp.set_defaults(fn=cmd_rs_zhang)

    sp = sub.add_parser("moments", help="half-space moment ratio")
    _add_common(sp, body=False, desc=True)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--dir", required=True)
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--q", type=float, default=2.0)
    sp.set_defaults(fn=cmd_moments)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (GeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
