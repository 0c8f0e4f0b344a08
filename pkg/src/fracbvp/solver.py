r"""Green-representation solves and Picard iteration for the nonlinear problem.

Because :math:`G(t,s) = (t-s)_+^{\alpha-1}/\Gamma(\alpha) + (1-t)B_\alpha(s)` and
:math:`H(t,s) = (t-s)_+ + (1-t)(2-s)`, every kernel integral reduces to
Riemann-Liouville integrals of the sampled source,

.. math::

    \int_0^1 G(t,s)h(s)\,ds = I^\alpha h(t) + (1-t)\big[I^\alpha h(1) + I^{\alpha-1}h(1)\big],

    \int_0^1 H(t,s)k(s)\,ds = I^2 k(t) + (1-t)\big[I^2 k(1) + I^1 k(1)\big],

which the product-trapezoidal rule integrates exactly for piecewise-linear
sources.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .certifier import DEFAULT_N
from .expr import ExprEvalError
from .fraccalc import (
    Order,
    SampledFn,
    UniformGrid,
    _order,
    caputo_deriv,
    equiv_norm,
    rl_integral,
    rl_integral_at_one,
)
from .kernels import green_G_gamma
from .problem import ProblemSpec

log = logging.getLogger(__name__)


def green_G_integral(h: SampledFn, alpha: Order) -> SampledFn:
    """``t -> int_0^1 G(t,s) h(s) ds`` on the grid of ``h``."""
    a = _order(alpha)
    if not 2.0 < a < 3.0:
        raise ValueError(f"alpha must lie in (2, 3), got {a}")
    t = h.t
    tail = rl_integral_at_one(h, a) + rl_integral_at_one(h, a - 1.0)
    return SampledFn(h.grid, rl_integral(h, a).values + (1.0 - t) * tail)


def green_H_integral(k: SampledFn) -> SampledFn:
    """``t -> int_0^1 H(t,s) k(s) ds`` on the grid of ``k``."""
    t = k.t
    tail = rl_integral_at_one(k, 2.0) + rl_integral_at_one(k, 1.0)
    return SampledFn(k.grid, rl_integral(k, 2.0).values + (1.0 - t) * tail)


def solve_linear(
    h: SampledFn,
    k: SampledFn,
    eta1_int: float,
    eta2_int: float,
    alpha: Order,
    grid: UniformGrid | None = None,
) -> SampledFn:
    """Solution of the linear problem through its Green representation.

    ``eta1_int`` and ``eta2_int`` are the already integrated right-hand sides
    of the two mixed boundary conditions. ``k(0) = 0`` is required.
    """
    grid = grid or h.grid
    if h.grid != grid or k.grid != grid:
        raise ValueError("h and k must be sampled on the solver grid")
    if abs(k.values[0]) > 1e-12 * max(1.0, float(np.max(np.abs(k.values)))):
        raise ValueError(f"solve_linear requires k(0) = 0, got k(0) = {k.values[0]!r}")
    t = grid.nodes
    y = (
        green_G_integral(h, alpha).values
        + green_H_integral(k).values
        + (2.0 - t) * eta1_int
        + (t - 1.0) * eta2_int
    )
    return SampledFn(grid, y)


def _integral(v: np.ndarray, h: float) -> float:
    return float(np.trapezoid(v, dx=h))


def _eval_f(y: SampledFn, spec: ProblemSpec) -> SampledFn:
    dy = caputo_deriv(y, spec.gamma)
    s = y.t
    try:
        fv = spec.f(t=s, x=y.values, y=dy.values)
    except ExprEvalError as exc:
        raise ExprEvalError(f"f(s, y(s), D^gamma y(s)): {exc}") from None
    return SampledFn(y.grid, np.broadcast_to(fv, s.shape))


def apply_F(y: SampledFn, spec: ProblemSpec, grid: UniformGrid | None = None) -> SampledFn:
    """``Fy(t) = int_0^1 G(t,s) f(s, y(s), D^gamma y(s)) ds``."""
    if grid is not None and grid != y.grid:
        raise ValueError("y must be sampled on the solver grid")
    return green_G_integral(_eval_f(y, spec), spec.alpha)


def apply_L(y: SampledFn, spec: ProblemSpec, grid: UniformGrid | None = None) -> SampledFn:
    """``Ly(t) = int H g(s,y) ds + (2-t) int q1(y) + (t-1) int q2(y)``."""
    if grid is not None and grid != y.grid:
        raise ValueError("y must be sampled on the solver grid")
    s = y.t
    try:
        gv = np.broadcast_to(spec.g(t=s, x=y.values), s.shape)
        q1v = np.broadcast_to(spec.q1(x=y.values), s.shape)
        q2v = np.broadcast_to(spec.q2(x=y.values), s.shape)
    except ExprEvalError as exc:
        raise ExprEvalError(f"g/q1/q2 along y: {exc}") from None
    h = y.grid.h
    Q1, Q2 = _integral(q1v, h), _integral(q2v, h)
    base = green_H_integral(SampledFn(y.grid, gv)).values
    return SampledFn(y.grid, base + (2.0 - s) * Q1 + (s - 1.0) * Q2)


def fixed_point_map(y: SampledFn, spec: ProblemSpec) -> SampledFn:
    return apply_F(y, spec) + apply_L(y, spec)


# --- residuals ----------------------------------------------------------------


def endpoint_derivatives(y: SampledFn) -> tuple[float, float, float]:
    """One-sided second-order ``y'(0)``, ``y'(1)`` and ``y''(0)``."""
    v = y.values
    h = y.grid.h
    d0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    d1 = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    dd0 = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h**2
    return float(d0), float(d1), float(dd0)


def bc_residuals(y: SampledFn, eta1_int: float, eta2_int: float) -> dict[str, float]:
    """Defects of the three boundary conditions for given integrated data."""
    d0, d1, dd0 = endpoint_derivatives(y)
    v = y.values
    return {
        "r0": abs(v[0] + d0 - eta1_int),
        "r1": abs(v[-1] + d1 - eta2_int),
        "r2": abs(dd0),
    }


@dataclass(frozen=True)
class ResidualReport:
    fixed_point_residual: float
    bc_residuals: dict


def residual(y: SampledFn, spec: ProblemSpec) -> ResidualReport:
    """Fixed-point defect ``||y - (Fy + Ly)||`` (equivalent norm) and boundary defects."""
    defect = y - fixed_point_map(y, spec)
    h = y.grid.h
    q1 = _integral(np.broadcast_to(spec.q1(x=y.values), y.t.shape), h)
    q2 = _integral(np.broadcast_to(spec.q2(x=y.values), y.t.shape), h)
    return ResidualReport(equiv_norm(defect, spec.gamma, spec.p), bc_residuals(y, q1, q2))


# --- Picard iteration ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SolveReport:
    solution: SampledFn
    iterations: int
    delta_norms: list
    fixed_point_residual: float
    bc_residuals: dict
    converged: bool
    iterate_norms: list = field(default_factory=list)
    damping: float = 1.0
    tol: float = 1e-8
    gamma: float = 1.0

    @property
    def dgamma(self) -> SampledFn:
        return caputo_deriv(self.solution, self.gamma)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "tol": self.tol,
            "damping": self.damping,
            "fixed_point_residual": self.fixed_point_residual,
            "bc_residuals": dict(self.bc_residuals),
            "delta_norms": list(self.delta_norms),
            "iterate_norms": list(self.iterate_norms),
            "solution_norm": self.iterate_norms[-1] if self.iterate_norms else 0.0,
            "n_intervals": self.solution.grid.n_intervals,
        }

    def solution_csv(self) -> str:
        """``t,y,dgamma_y`` rows at 17 significant digits."""
        d = self.dgamma.values
        rows = ["t,y,dgamma_y"]
        rows += [f"{t:.17g},{y:.17g},{dy:.17g}" for t, y, dy in zip(self.solution.t, self.solution.values, d)]
        return "\n".join(rows) + "\n"


_DIVERGED = 1e100


def _oscillating(deltas: list) -> bool:
    if len(deltas) < 5:
        return False
    diffs = np.diff(deltas[-5:])
    return bool(np.all(diffs[:-1] * diffs[1:] < 0.0))


def fixed_point_solve(
    spec: ProblemSpec,
    grid: UniformGrid | None = None,
    tol: float = 1e-8,
    max_iter: int = 500,
    damping: float = 1.0,
) -> SolveReport:
    """Damped Picard iteration ``y <- (1-d) y + d (Fy + Ly)`` from ``y = 0``.

    Stops once the fixed-point defect of the current iterate, measured in the
    equivalent norm ``||D^gamma .||_p``, drops below ``tol``. Oscillating
    step sizes switch an undamped run to ``d = 0.5``. Failure to converge is
    reported, not raised.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    grid = grid or UniformGrid(DEFAULT_N)
    g, p = spec.gamma, spec.p
    y = SampledFn.constant(grid, 0.0)
    deltas: list[float] = []
    norms = [0.0]
    converged = False
    res = float("inf")
    iterations = 0
    for iterations in range(1, max_iter + 1):
        z = fixed_point_map(y, spec)
        res = equiv_norm(y - z, g, p)
        if res < tol:
            converged = True
            break
        y_new = y + damping * (z - y)
        deltas.append(equiv_norm(y_new - y, g, p))
        y = y_new
        norms.append(equiv_norm(y, g, p))
        log.debug("picard %d: delta=%.3e norm=%.6f", iterations, deltas[-1], norms[-1])
        if not norms[-1] < _DIVERGED:
            log.warning("iterates diverged after %d iterations (norm %.3e)", iterations, norms[-1])
            break
        if damping == 1.0 and _oscillating(deltas):
            log.info("oscillating step sizes after %d iterations; damping 0.5", iterations)
            damping = 0.5
    rr = residual(y, spec)
    return SolveReport(
        solution=y,
        iterations=iterations,
        delta_norms=deltas,
        fixed_point_residual=rr.fixed_point_residual,
        bc_residuals=rr.bc_residuals,
        converged=converged and rr.fixed_point_residual <= tol,
        iterate_norms=norms,
        damping=damping,
        tol=tol,
        gamma=g,
    )


def translation_modulus(alpha: Order, gamma: Order, grid: UniformGrid, shifts) -> list[float]:
    """``sup_t sup_s |G_gamma(t+h, s) - G_gamma(t, s)|`` on the grid, ``t+h`` clamped to 1."""
    nodes = grid.nodes
    T, S = np.meshgrid(nodes, nodes, indexing="ij")
    base = green_G_gamma(T, S, alpha, gamma)
    out = []
    for h in shifts:
        h = float(h)
        if h < 0.0 or h > 1.0:
            raise ValueError(f"shift must lie in [0, 1], got {h}")
        if h == 0.0:
            out.append(0.0)
            continue
        shifted = green_G_gamma(np.minimum(T + h, 1.0), S, alpha, gamma)
        out.append(float(np.max(np.abs(shifted - base))))
    return out
