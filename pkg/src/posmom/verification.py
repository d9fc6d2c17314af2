"""
Numerical self-checks shared by ``posmom verify`` and the acceptance tests.

Every check reduces to a measured residual compared against a tolerance
(``residual <= tolerance`` passes). Checks are grouped by the numbered
acceptance criterion they belong to.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import core, oracle, scan
from .core import Backend, ParitySector
from .quadrature import QuadratureConfig

__all__ = ["CheckResult", "CHECKS", "run_checks", "format_result", "DEFAULT_M_SET"]

DEFAULT_M_SET = tuple(range(7))


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    residual: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual <= self.tolerance


def format_result(r: CheckResult) -> str:
    status = "PASS" if r.passed else "FAIL"
    line = f"{status}  [{r.criterion:>2}] {r.name:<38} residual={r.residual:.3e}  tol={r.tolerance:.1e}"
    if r.detail:
        line += f"  ({r.detail})"
    return line


@dataclass
class _Context:
    quick: bool
    m_set: tuple
    override_tol: float | None
    cfg: QuadratureConfig

    def tol(self, value: float) -> float:
        return value if self.override_tol is None else self.override_tol


def _closed_form(ctx: _Context):
    step = 0.05 if ctx.quick else 0.01
    grid = scan.lambda_grid(-4.0, 4.0, step)
    for m in core.CLOSED_FORM_M:
        if m not in ctx.m_set:
            continue
        err = np.max(np.abs(core.density(m, grid, ctx.cfg) - core.density_closed_form(m, grid)))
        yield f"closed form m={m}", float(err), ctx.tol(1e-7), f"{grid.size} points"


def _peak(ctx: _Context):
    p0 = float(core.density(0, 0.0, ctx.cfg))
    yield "peak p_0(0)", abs(p0 - 1.393), ctx.tol(0.007), f"p_0(0)={p0:.7f}"


def _parseval(ctx: _Context):
    for m in ctx.m_set:
        total = core.density_integral(m, 0, 12.0, ctx.cfg)
        yield f"normalisation m={m}", abs(total - 1.0), ctx.tol(1e-6), "[-12, 12]"
    if not ctx.quick:
        for m in (40, 41):
            total = core.density_integral(m, 0, 27.0, ctx.cfg)
            yield f"normalisation m={m}", abs(total - 1.0), ctx.tol(1e-4), "[-27, 27]"


def _variance(ctx: _Context):
    n_points = 4096
    for m in ctx.m_set:
        target = oracle.posmom_second_moment(oracle.angular_state(m, n_points))
        second = core.density_integral(m, 2, 12.0, ctx.cfg)
        yield (f"variance m={m}", abs(second - target), ctx.tol(1e-5),
               f"int lam^2 p={second:.9f} grid <Q^2>={target:.9f}")


def _symmetry(ctx: _Context):
    grid = scan.lambda_grid(0.0, 5.0, 0.1 if ctx.quick else 0.02)
    both = np.concatenate([grid, -grid])
    tol = ctx.tol(1e-10)
    for m in ctx.m_set:
        c = core.coefficients(m, both, ctx.cfg)
        sq = c.squared()
        p = sum(sq)
        n = grid.size
        yield f"reflection p(l)=p(-l) m={m}", float(np.max(np.abs(p[:n] - p[n:]))), tol, ""
        if m % 2 == 0:
            vanish = max(np.max(np.abs(c.mu)), np.max(np.abs(c.nu)))
            yield f"mu = nu = 0 for m={m}", float(vanish), tol, ""
        else:
            vanish = max(np.max(np.abs(c.alpha)), np.max(np.abs(c.beta)))
            yield f"alpha = beta = 0 for m={m}", float(vanish), tol, ""
            yield f"|mu|^2 = |nu|^2 for m={m}", float(np.max(np.abs(sq[2] - sq[3]))), tol, ""
        if m == 0:
            yield "beta_0 = 0", float(np.max(np.abs(c.beta))), tol, ""


def _eigen(ctx: _Context):
    for lam in (0.5, 1.5, 3.0):
        coarse = oracle.eigenvalue_residual(lam, 4096)
        fine = oracle.eigenvalue_residual(lam, 8192)
        yield f"eigen residual lam={lam} N=4096", coarse, ctx.tol(1e-4), ""
        yield (f"eigen refinement lam={lam}", fine / coarse, ctx.tol(1.0 / 8.0),
               f"improvement x{coarse / fine:.1f}")


def _commutators(ctx: _Context):
    for m in (1, 2, 3, 4):
        phi = oracle.angular_state(m, 4096)
        q_phi = oracle.apply_posmom(phi)
        scale = oracle.norm(q_phi)
        for which in ("m_x", "m_y"):
            a = oracle.apply_parity(which, q_phi).samples
            b = oracle.apply_posmom(oracle.apply_parity(which, phi)).samples
            rel = math.sqrt(np.sum(np.abs(a - b) ** 2) * phi.step) / scale
            yield f"[{which}, Q_x] Phi_{m}", rel, ctx.tol(1e-10), ""


def _reconstruction(ctx: _Context):
    ms = (0,) if ctx.quick else (0, 1, 2)
    grid = scan.lambda_grid(-10.0, 10.0, 0.01)
    for m in ms:
        rec = oracle.reconstruct(m, grid, ctx.cfg, n_points=1024 if ctx.quick else 2048)
        yield f"reconstruction m={m}", rec.l2_residual, ctx.tol(1e-3), ""


def _backends(ctx: _Context):
    lams = np.array([-5.0, -1.0, 0.0, 0.3, 2.0])
    for m in ctx.m_set:
        quad = core.coefficient_integral_I(m, lams, Backend.QUADRATURE, ctx.cfg)
        hyp = core.coefficient_integral_I(m, lams, Backend.HYPERGEOMETRIC)
        yield f"I_m quadrature vs 2F1 m={m}", float(np.max(np.abs(quad - hyp))), ctx.tol(1e-8), ""


def _figures(ctx: _Context):
    t40 = scan.scan_density(40, -25.0, 25.0, 0.01, ctx.cfg)
    r40 = scan.count_extrema(t40)
    off = max(abs(r40.n_maxima - 21), abs(r40.n_minima - 20))
    yield ("m=40 peaks/minima 21/20 (+-1)", float(off), ctx.tol(1.0),
           f"{r40.n_maxima} maxima, {r40.n_minima} minima")

    t6 = scan.scan_density(6, cfg=ctx.cfg)
    r6 = scan.count_extrema(t6, node_threshold=1e-3)
    depths = [scan.refine_minimum(6, x, 0.01, ctx.cfg)[1] for x in r6.minima]
    nodes = sum(d <= 1e-8 * float(np.max(t6.p)) for d in depths)
    yield ("m=6 0 nodes, 2 near-zero minima", float(abs(r6.n_near_zero_minima - 2) + nodes), ctx.tol(0.0),
           f"{nodes} nodes, {r6.n_near_zero_minima} minima below 1e-3, minimum values "
           + ", ".join(f"{d:.3g}" for d in depths))

    if ctx.quick:
        return
    t41 = scan.scan_density(41, cfg=ctx.cfg)
    osc = scan.oscillator_comparison(41, t41, ctx.cfg)
    yield ("m=41 vs oscillator n=20, L1", osc.l1_distance + abs(osc.n_oscillator - 20), ctx.tol(0.08),
           f"n={osc.n_oscillator}, scale={osc.scale:.4f}")
    for m, table in ((40, scan.scan_density(40, cfg=ctx.cfg)), (41, t41)):
        yield f"m={m} Kolmogorov vs arcsine", scan.classical_comparison(m, table), ctx.tol(0.06), ""


def _determinism(ctx: _Context):
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for k in range(2):
            path = os.path.join(tmp, f"run{k}.csv")
            code = main(["density", "--m", "3", "--min", "-4", "--max", "4", "--step", "0.05",
                         "--out", path])
            if code != 0:
                yield "byte-identical CSV", math.inf, 0.0, f"exit code {code}"
                return
            with open(path, "rb") as fh:
                outs.append(fh.read())
    same = outs[0] == outs[1]
    yield "byte-identical CSV", 0.0 if same else 1.0, 0.0, f"{len(outs[0])} bytes"


CHECKS: dict[int, Callable] = {
    1: _closed_form,
    2: _peak,
    3: _parseval,
    4: _variance,
    5: _symmetry,
    6: _eigen,
    7: _commutators,
    8: _reconstruction,
    9: _backends,
    10: _figures,
    11: _determinism,
}


def run_checks(criteria: Iterable[int] | None = None, *, quick: bool = False,
               m_set: Iterable[int] | None = None, override_tol: float | None = None,
               cfg: QuadratureConfig = QuadratureConfig(),
               on_result: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    """
    Run the selected criteria (all by default) and return their results.

    ``m_set`` restricts the per-m checks of criteria 1, 3, 4, 5 and 9;
    ``override_tol`` replaces every tolerance, which is how the harness is
    made to fail on purpose. ``on_result`` is called as each check finishes.
    """
    ctx = _Context(quick, tuple(DEFAULT_M_SET if m_set is None else m_set), override_tol, cfg)
    results = []
    for number in (sorted(CHECKS) if criteria is None else criteria):
        t0 = time.perf_counter()
        for name, residual, tolerance, detail in CHECKS[number](ctx):
            t1 = time.perf_counter()
            r = CheckResult(number, name, float(residual), float(tolerance), detail, t1 - t0)
            t0 = t1
            results.append(r)
            if on_result is not None:
                on_result(r)
    return results
