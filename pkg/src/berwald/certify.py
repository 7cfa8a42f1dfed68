"""End-to-end inequality certification with margins and equality detection.

Each certifier evaluates a chain of directionwise radial inequalities (or a
scalar inequality for the Rogers-Shephard / Zhang family) and reports
per-link margins: the minimum over sampled directions of the relative slack.
A report passes when every margin clears -pass_tol and flags equality when
every link is tight to eq_tol across all directions.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .covariogram import profile
from .geometry import ConvexBody, GeometryError, difference_body
from .means import berwald_constant, binom_real, lebesgue_constant
from .measures import ConcavityDescriptor, MeasureSpec, measure_of_body
from .quadrature import DirectionSet, mellin, mellin_log_limit
from .starbodies import (polar_projection_measure, polarized_mean_body,
                         radial_mean_body, translated_average,
                         weighted_projection_body)

PASS_TOL = 1e-6
EQ_TOL = 1e-4


@dataclass
class LinkMargin:
    label: str
    min_margin: float
    max_abs_margin: float
    argmin_direction: list


@dataclass
class InequalityReport:
    claim: str
    params: dict
    links: list
    passed: bool
    equality: bool
    pass_tol: float
    eq_tol: float
    runtime_ms: float
    chain_values: np.ndarray | None = None
    direction_count: int = 0

    def to_dict(self):
        return {
            "claim": self.claim,
            "params": self.params,
            "margins": {lk.label: {"min": lk.min_margin,
                                   "max_abs": lk.max_abs_margin,
                                   "argmin_direction": lk.argmin_direction}
                        for lk in self.links},
            "pass": bool(self.passed),
            "equality": bool(self.equality),
            "tolerances": {"pass": self.pass_tol, "equality": self.eq_tol},
            "runtime_ms": self.runtime_ms,
            "directions": self.direction_count,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _assemble(claim, params, labels, table, dirs, pass_tol, eq_tol, t0):
    """Margins of consecutive columns of a chain-value table (rows=dirs)."""
    links = []
    for j in range(table.shape[1] - 1):
        lower = table[:, j]
        upper = table[:, j + 1]
        scale = np.maximum(np.abs(lower), 1e-300)
        margins = (upper - lower) / scale
        k = int(np.argmin(margins))
        links.append(LinkMargin(
            label=f"{labels[j]} <= {labels[j + 1]}",
            min_margin=float(margins[k]),
            max_abs_margin=float(np.max(np.abs(margins))),
            argmin_direction=list(np.asarray(dirs.vectors[k], float))))
    passed = all(lk.min_margin >= -pass_tol for lk in links)
    equality = all(lk.max_abs_margin <= eq_tol for lk in links)
    return InequalityReport(
        claim=claim, params=params, links=links, passed=passed,
        equality=equality, pass_tol=pass_tol, eq_tol=eq_tol,
        runtime_ms=1000.0 * (time.perf_counter() - t0),
        chain_values=table, direction_count=len(dirs))


def _scaled_radial_column(K, mu, p, dirs, constant, polarized, rel_tol):
    body = (polarized_mean_body if polarized else radial_mean_body)(
        K, mu, p, dirs, rel_tol=rel_tol)
    return constant * body.values


def reverse_chain(K: ConvexBody, mu: MeasureSpec,
                  descriptor: ConcavityDescriptor, p_grid, dirs: DirectionSet,
                  rel_tol: float = 1e-8, pass_tol: float = PASS_TOL,
                  eq_tol: float = EQ_TOL) -> InequalityReport:
    """Reverse inclusion chain for zero-anchored concavity:

    DK inside C(q) R_q inside C(p) R_p inside (F/F')(mu(K)) polar projection
    body, checked directionwise for all grid pairs p <= q.
    """
    t0 = time.perf_counter()
    if descriptor.branch != "F":
        raise GeometryError("reverse chain needs a zero-anchored descriptor")
    if descriptor.validity != "all":
        raise GeometryError("reverse chain needs concavity on all convex "
                            "subsets (covariogram intersections leave "
                            "restricted classes)")
    if not descriptor.compatible_measure(mu):
        raise GeometryError(f"{descriptor.name} not valid for {mu.kind}")
    total = measure_of_body(mu, K, rel_tol=rel_tol, cache=True).value
    dk = difference_body(K)
    proj = weighted_projection_body(K, mu, dirs)
    ps = sorted(p_grid, reverse=True)   # descending: largest p tightest
    cols = [np.array([dk.radial_origin(th) for th in dirs])]
    labels = ["rho_DK"]
    for p in ps:
        C = berwald_constant(p, descriptor, total)
        cols.append(_scaled_radial_column(K, mu, p, dirs, C, False, rel_tol))
        labels.append(f"C({p:g})rho_R[{p:g}]")
    last = (descriptor.transform(total) / descriptor.derivative(total)) \
        / proj.support_many(dirs.vectors)
    cols.append(last)
    labels.append("(F/F')rho_polarProj")
    table = np.column_stack(cols)
    params = {"measure": mu.kind, "descriptor": descriptor.name,
              "s": descriptor.s, "p_grid": list(map(float, p_grid)),
              "mu(K)": total}
    return _assemble("reverse_chain", params, labels, table, dirs,
                     pass_tol, eq_tol, t0)


def log_chain(K: ConvexBody, mu: MeasureSpec,
              descriptor: ConcavityDescriptor, p_grid, dirs: DirectionSet,
              rel_tol: float = 1e-8, pass_tol: float = PASS_TOL,
              eq_tol: float = EQ_TOL) -> InequalityReport:
    """Chain for real-line concavity transforms (log, Gaussian quantile):

    C(q) R_q inside C(p) R_p inside (1/Q'(mu(K))) polar projection body.
    No difference-body link: C(p) R_p shrinks to a point as p grows.
    """
    t0 = time.perf_counter()
    if descriptor.branch != "Q":
        raise GeometryError("log chain needs a real-line concavity transform")
    if not descriptor.compatible_measure(mu):
        raise GeometryError(f"{descriptor.name} not valid for {mu.kind}")
    total = measure_of_body(mu, K, rel_tol=rel_tol, cache=True).value
    proj = weighted_projection_body(K, mu, dirs)
    ps = sorted(p_grid, reverse=True)
    cols, labels = [], []
    for p in ps:
        C = berwald_constant(p, descriptor, total)
        cols.append(_scaled_radial_column(K, mu, p, dirs, C, False, rel_tol))
        labels.append(f"C({p:g})rho_R[{p:g}]")
    last = (1.0 / descriptor.derivative(total)) / proj.support_many(dirs.vectors)
    cols.append(last)
    labels.append("(1/Q')rho_polarProj")
    table = np.column_stack(cols)
    params = {"measure": mu.kind, "descriptor": descriptor.name,
              "p_grid": list(map(float, p_grid)), "mu(K)": total}
    return _assemble("log_chain", params, labels, table, dirs,
                     pass_tol, eq_tol, t0)


def symmetric_chain(K: ConvexBody, mu: MeasureSpec, p_grid,
                    dirs: DirectionSet, rel_tol: float = 1e-8,
                    pass_tol: float = PASS_TOL,
                    eq_tol: float = EQ_TOL) -> InequalityReport:
    """Chain for symmetric bodies under rotation-invariant-type measures
    (1/n-concave on symmetric convex bodies), via polarized mean bodies:

    DK inside binom(n+q, q)^(1/q) P_q inside binom(n+p, p)^(1/p) P_p inside
    n mu(K) polar projection body.
    """
    t0 = time.perf_counter()
    if not K.is_symmetric():
        raise GeometryError("symmetric chain needs a symmetric body")
    if not mu.in_Mn:
        raise GeometryError("symmetric chain needs a measure from the "
                            "rotation-invariant concavity class")
    n = K.n
    total = measure_of_body(mu, K, rel_tol=rel_tol, cache=True).value
    dk = difference_body(K)
    proj = weighted_projection_body(K, mu, dirs)
    ps = sorted(p_grid, reverse=True)
    cols = [np.array([dk.radial_origin(th) for th in dirs])]
    labels = ["rho_DK"]
    for p in ps:
        C = lebesgue_constant(n, p)
        cols.append(_scaled_radial_column(K, mu, p, dirs, C, True, rel_tol))
        labels.append(f"binom^(1/p)P[{p:g}]")
    last = (n * total) / proj.support_many(dirs.vectors)
    cols.append(last)
    labels.append("n mu(K) rho_polarProj")
    table = np.column_stack(cols)
    params = {"measure": mu.kind, "p_grid": list(map(float, p_grid)),
              "mu(K)": total, "n": n}
    return _assemble("symmetric_chain", params, labels, table, dirs,
                     pass_tol, eq_tol, t0)


def good_set_inclusion(K: ConvexBody, mu: MeasureSpec,
                       descriptor: ConcavityDescriptor, dirs: DirectionSet,
                       rel_tol: float = 1e-8, pass_tol: float = PASS_TOL,
                       eq_tol: float = EQ_TOL) -> InequalityReport:
    """Single-link inclusion DK inside (F/F')(mu(K)) polar projection body."""
    t0 = time.perf_counter()
    if descriptor.branch != "F":
        raise GeometryError("inclusion needs a zero-anchored descriptor")
    if not descriptor.compatible_measure(mu):
        raise GeometryError(f"{descriptor.name} not valid for {mu.kind}")
    total = measure_of_body(mu, K, rel_tol=rel_tol, cache=True).value
    dk = difference_body(K)
    proj = weighted_projection_body(K, mu, dirs)
    col0 = np.array([dk.radial_origin(th) for th in dirs])
    col1 = (descriptor.transform(total) / descriptor.derivative(total)) \
        / proj.support_many(dirs.vectors)
    table = np.column_stack([col0, col1])
    params = {"measure": mu.kind, "descriptor": descriptor.name,
              "mu(K)": total}
    return _assemble("difference_polar_inclusion", params,
                     ["rho_DK", "(F/F')rho_polarProj"], table, dirs,
                     pass_tol, eq_tol, t0)


def _scalar_report(claim, params, lhs, rhs, pass_tol, eq_tol, t0):
    margin = (rhs - lhs) / abs(rhs)
    link = LinkMargin(label=f"{claim}: lhs <= rhs", min_margin=float(margin),
                      max_abs_margin=float(abs(margin)), argmin_direction=[])
    return InequalityReport(
        claim=claim, params={**params, "lhs": float(lhs), "rhs": float(rhs)},
        links=[link], passed=bool(margin >= -pass_tol),
        equality=bool(abs(margin) <= eq_tol), pass_tol=pass_tol,
        eq_tol=eq_tol, runtime_ms=1000.0 * (time.perf_counter() - t0))


def rogers_shephard_check(K: ConvexBody, nu: MeasureSpec, mu: MeasureSpec,
                          descriptor: ConcavityDescriptor,
                          rel_tol: float = 1e-7, pass_tol: float = PASS_TOL,
                          eq_tol: float = EQ_TOL) -> InequalityReport:
    """Difference-body bound for a homogeneous nu and a power-concave mu:

    nu(DK) <= binom(1/s + alpha, alpha) min(avg(K), avg(-K)) with avg the
    nu-translated average.  Equality exactly on the simplex profile.
    """
    t0 = time.perf_counter()
    if descriptor.s is None or descriptor.s <= 0:
        raise GeometryError("need a positive power descriptor")
    if not descriptor.compatible_measure(mu):
        raise GeometryError(f"{descriptor.name} not valid for {mu.kind}")
    alpha = nu.homogeneity
    if alpha is None:
        raise GeometryError("nu must declare a homogeneity degree")
    s = descriptor.s
    dk = difference_body(K)
    lhs = measure_of_body(nu, dk, cache=True).value
    avg_pos = translated_average(nu, mu, K, cov_rel_tol=rel_tol)
    avg_neg = translated_average(nu, mu, ConvexBody(-K.vertices, validate=False),
                                 cov_rel_tol=rel_tol)
    rhs = binom_real(1.0 / s + alpha, alpha) * min(avg_pos, avg_neg)
    params = {"nu": nu.kind, "mu": mu.kind, "s": s, "alpha": alpha,
              "nu(DK)": lhs, "avg+": avg_pos, "avg-": avg_neg}
    return _scalar_report("rogers_shephard", params, lhs, rhs,
                          pass_tol, eq_tol, t0)


def zhang_check(K: ConvexBody, nu: MeasureSpec, mu: MeasureSpec,
                descriptor: ConcavityDescriptor, resolution: int = 0,
                rel_tol: float = 1e-7, pass_tol: float = PASS_TOL,
                eq_tol: float = EQ_TOL) -> InequalityReport:
    """Polar projection bound:

    s^alpha binom(1/s + alpha, alpha) <= mu(K)^alpha / avg(K) times
    nu(polar weighted projection body), avg the nu-translated average.
    """
    t0 = time.perf_counter()
    if descriptor.s is None or descriptor.s <= 0:
        raise GeometryError("need a positive power descriptor")
    if not descriptor.compatible_measure(mu):
        raise GeometryError(f"{descriptor.name} not valid for {mu.kind}")
    alpha = nu.homogeneity
    if alpha is None:
        raise GeometryError("nu must declare a homogeneity degree")
    s = descriptor.s
    total = measure_of_body(mu, K, rel_tol=rel_tol, cache=True).value
    dirs_stub = DirectionSet(n=K.n, vectors=np.eye(K.n), scheme="stub")
    proj = weighted_projection_body(K, mu, dirs_stub)
    nu_polar = polar_projection_measure(nu, proj, K.n, resolution=resolution)
    avg = translated_average(nu, mu, K, cov_rel_tol=rel_tol)
    lhs = s ** alpha * binom_real(1.0 / s + alpha, alpha)
    rhs = total ** alpha / avg * nu_polar
    params = {"nu": nu.kind, "mu": mu.kind, "s": s, "alpha": alpha,
              "mu(K)": total, "avg": avg, "nu(polarProj)": nu_polar}
    return _scalar_report("zhang", params, lhs, rhs, pass_tol, eq_tol, t0)
