r"""Numerical check of the existence conditions.

Two scalar conditions decide the certificate. The contraction constant

.. math::

    \kappa = \frac{3\|\varphi_1\|_q + k_1 + k_2}{\Gamma(2-\gamma)\Gamma(1+\gamma)}

must be below one, and the invariant-ball inequality

.. math::

    R\kappa + G_\gamma^*\Big(\|w\|_1 + c\big(1 + \Gamma(\gamma+1)^{-p}\big)R^p\Big) \le R

must hold for some radius :math:`R > 0`. :func:`h4_slack` returns the left side
minus :math:`R`, so a certificate needs a nonpositive slack.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .fraccalc import SampledFn, UniformGrid, gamma_fn, lp_norm
from .kernels import analytic_bounds, kernel_max, tabulate
from .problem import ProblemSpec

DEFAULT_N = 1024
G_GAMMA_MODES = ("paper", "analytic_bound", "grid_max")
W1_MODES = ("exact", "supplied")
DEFAULT_R_SEARCH = (1e-3, 1e3, 200)
PROBE_TOL = 1e-9
PROBE_SAMPLES = 10_000


def _sample(expr, grid: UniformGrid) -> SampledFn:
    t = grid.nodes
    return SampledFn(grid, np.broadcast_to(expr(t=t), t.shape))


def phi1_norm(spec: ProblemSpec, n: int = DEFAULT_N) -> float:
    """``||phi1||_q`` by composite trapezoid."""
    return lp_norm(_sample(spec.hyp.phi1, UniformGrid(n)), spec.q)


def w1_exact(spec: ProblemSpec, n: int = DEFAULT_N) -> float:
    """``||w||_1`` by composite trapezoid."""
    return lp_norm(_sample(spec.hyp.w, UniformGrid(n)), 1.0)


def contraction_constant(spec: ProblemSpec, n: int = DEFAULT_N) -> float:
    h = spec.hyp
    g = spec.gamma
    num = 3.0 * phi1_norm(spec, n) + h.k1 + h.k2
    return num / (gamma_fn(2.0 - g) * gamma_fn(1.0 + g))


def h4_slack(
    spec: ProblemSpec,
    R: float,
    g_gamma_star: float,
    w1: float,
    kappa: float | None = None,
    n: int = DEFAULT_N,
) -> float:
    """Left side minus right side of the invariant-ball inequality at radius ``R``.

    ``kappa`` may be passed to reuse an already computed contraction constant.
    """
    if not R > 0.0:
        raise ValueError(f"R must be positive, got {R}")
    if not g_gamma_star > 0.0:
        raise ValueError(f"g_gamma_star must be positive, got {g_gamma_star}")
    if not w1 >= 0.0:
        raise ValueError(f"w1 must be nonnegative, got {w1}")
    if kappa is None:
        kappa = contraction_constant(spec, n)
    g, p = spec.gamma, spec.p
    growth = spec.hyp.c * (1.0 + (1.0 / gamma_fn(g + 1.0)) ** p) * R**p
    return R * kappa + g_gamma_star * (w1 + growth) - R


@dataclass(frozen=True)
class Certificate:
    contraction_constant: float
    contraction_ok: bool
    g_gamma_star: float
    g_gamma_mode: str
    w1: float
    w1_mode: str
    h4_slack: float
    h4_ok: bool
    witness_R: Optional[float]
    spec_echo: dict

    @property
    def ok(self) -> bool:
        return self.contraction_ok and self.h4_ok

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def resolve_g_gamma_star(spec: ProblemSpec, mode: str, n: int = DEFAULT_N) -> float:
    if mode == "paper":
        if spec.g_gamma_star is None:
            raise ValueError("g_gamma_mode 'paper' needs g_gamma_star in the problem description")
        return spec.g_gamma_star
    if mode == "analytic_bound":
        return analytic_bounds(spec.alpha, spec.gamma)["Ggamma"]
    if mode == "grid_max":
        return kernel_max(tabulate("Ggamma", spec.alpha, spec.gamma, UniformGrid(n)))
    raise ValueError(f"unknown g_gamma_mode {mode!r}; expected one of {G_GAMMA_MODES}")


def resolve_w1(spec: ProblemSpec, mode: str, n: int = DEFAULT_N) -> float:
    if mode == "exact":
        return w1_exact(spec, n)
    if mode == "supplied":
        if spec.w1 is None:
            raise ValueError("w1_mode 'supplied' needs w1 in the problem description")
        return spec.w1
    raise ValueError(f"unknown w1_mode {mode!r}; expected one of {W1_MODES}")


def certify(
    spec: ProblemSpec,
    g_gamma_mode: str = "analytic_bound",
    w1_mode: str = "exact",
    R_search: tuple[float, float, int] | None = None,
    n: int = DEFAULT_N,
) -> Certificate:
    """Evaluate both conditions at ``spec.hyp.R``.

    With ``R_search = (R_min, R_max, steps)`` a logarithmic grid of radii is
    scanned and the first radius with nonpositive slack becomes ``witness_R``.
    """
    kappa = contraction_constant(spec, n)
    gstar = resolve_g_gamma_star(spec, g_gamma_mode, n)
    w1 = resolve_w1(spec, w1_mode, n)
    slack = h4_slack(spec, spec.hyp.R, gstar, w1, kappa=kappa)
    witness = None
    if R_search is not None:
        lo, hi, steps = R_search
        for R in np.logspace(np.log10(lo), np.log10(hi), int(steps)):
            if h4_slack(spec, float(R), gstar, w1, kappa=kappa) <= 0.0:
                witness = float(R)
                break
    return Certificate(
        contraction_constant=kappa,
        contraction_ok=bool(kappa < 1.0),
        g_gamma_star=gstar,
        g_gamma_mode=g_gamma_mode,
        w1=w1,
        w1_mode=w1_mode,
        h4_slack=slack,
        h4_ok=bool(slack <= 0.0),
        witness_R=witness,
        spec_echo=spec.digest(),
    )


# --- advisory probes ----------------------------------------------------------


def probe_seed(seed: int | None = None) -> int:
    """Explicit seed, else ``$FRACBVP_SEED``, else 0."""
    if seed is not None:
        return int(seed)
    env = os.environ.get("FRACBVP_SEED")
    return int(env) if env else 0


@dataclass(frozen=True)
class ProbeReport:
    name: str
    n_samples: int
    violations: int
    by_function: dict
    worst_ratio: float
    seed: int

    def summary(self) -> str:
        parts = ", ".join(f"{k}: {v}" for k, v in self.by_function.items())
        return f"{self.violations} violation(s) in {self.n_samples} samples ({parts}); worst ratio {self.worst_ratio:.4g}"

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _ratio(lhs, rhs):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.where(lhs > 0, np.inf, 0.0))
    return float(np.max(r)) if r.size else 0.0


def lipschitz_probe(
    spec: ProblemSpec, n_samples: int = PROBE_SAMPLES, seed: int | None = None, tol: float = PROBE_TOL
) -> ProbeReport:
    """Random check of the Lipschitz data ``phi1, k1, k2`` on ``[0,1] x [-R,R]``."""
    seed = probe_seed(seed)
    rng = np.random.default_rng(seed)
    R = spec.hyp.R
    t = rng.uniform(0.0, 1.0, n_samples)
    x, xp, y, yp = rng.uniform(-R, R, (4, n_samples))
    one = np.ones(n_samples)
    checks = {
        "g": (np.abs(spec.g(t=t, x=x) - spec.g(t=t, x=xp)), spec.hyp.phi1(t=t) * one * np.abs(x - xp)),
        "q1": (np.abs(spec.q1(x=y) - spec.q1(x=yp)) * one, spec.hyp.k1 * np.abs(y - yp)),
        "q2": (np.abs(spec.q2(x=y) - spec.q2(x=yp)) * one, spec.hyp.k2 * np.abs(y - yp)),
    }
    counts, worst = {}, 0.0
    for name, (lhs, rhs) in checks.items():
        counts[name] = int(np.count_nonzero(lhs > rhs * (1.0 + tol) + 1e-15))
        worst = max(worst, _ratio(lhs, rhs))
    return ProbeReport("lipschitz", n_samples, sum(counts.values()), counts, worst, seed)


def growth_probe(
    spec: ProblemSpec, n_samples: int = PROBE_SAMPLES, seed: int | None = None, tol: float = PROBE_TOL
) -> ProbeReport:
    """Random check of ``|f(t,u,v)| <= w(t) + c(|u|^p + |v|^p)`` on ``[0,1] x [-R,R]^2``."""
    seed = probe_seed(seed)
    rng = np.random.default_rng(seed)
    R = spec.hyp.R
    t = rng.uniform(0.0, 1.0, n_samples)
    u, v = rng.uniform(-R, R, (2, n_samples))
    one = np.ones(n_samples)
    lhs = np.abs(spec.f(t=t, x=u, y=v)) * one
    rhs = spec.hyp.w(t=t) * one + spec.hyp.c * (np.abs(u) ** spec.p + np.abs(v) ** spec.p)
    count = int(np.count_nonzero(lhs > rhs * (1.0 + tol) + 1e-15))
    return ProbeReport("growth", n_samples, count, {"f": count}, _ratio(lhs, rhs), seed)
