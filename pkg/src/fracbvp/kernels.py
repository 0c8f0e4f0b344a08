r"""Green's kernels of the linear three-point problem and their Caputo derivatives.

With :math:`B_\alpha(s) = (1-s)^{\alpha-1}/\Gamma(\alpha) + (1-s)^{\alpha-2}/\Gamma(\alpha-1)`
the kernels are

.. math::

    G(t,s) = \frac{(t-s)_+^{\alpha-1}}{\Gamma(\alpha)} + (1-t) B_\alpha(s), \qquad
    H(t,s) = (t-s)_+ + (1-t)(2-s),

and their order-:math:`\gamma` Caputo derivatives in :math:`t` are

.. math::

    G_\gamma(t,s) = \frac{(t-s)_+^{\alpha-\gamma-1}}{\Gamma(\alpha-\gamma)}
        - \frac{t^{1-\gamma}}{\Gamma(2-\gamma)} B_\alpha(s), \qquad
    H_\gamma(t,s) = \frac{(t-s)_+^{1-\gamma}}{\Gamma(2-\gamma)}
        - \frac{t^{1-\gamma}}{\Gamma(2-\gamma)} (2-s).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from .fraccalc import Order, UniformGrid, _order, gamma_fn

KINDS = ("G", "H", "Ggamma", "Hgamma")


def _unit(name, v):
    v = np.asarray(v, dtype=float)
    if np.any(~(v >= 0.0)) or np.any(v > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return v


def _alpha(alpha: Order) -> float:
    a = _order(alpha)
    if not 2.0 < a < 3.0:
        raise ValueError(f"alpha must lie in (2, 3), got {a}")
    return a


def _gamma(gamma: Order) -> float:
    g = _order(gamma)
    if not 0.0 < g <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {g}")
    return g


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def boundary_profile(s, alpha: float):
    """``(1-s)^(a-1)/Gamma(a) + (1-s)^(a-2)/Gamma(a-1)``; exactly 0 at s = 1."""
    r = 1.0 - np.asarray(s, dtype=float)
    return r ** (alpha - 1.0) / gamma_fn(alpha) + r ** (alpha - 2.0) / gamma_fn(alpha - 1.0)


def _G_lower(t, s, a):
    # branch 0 <= s <= t
    return ((t - s) ** (a - 1.0) + (1.0 - t) * (1.0 - s) ** (a - 1.0)) / gamma_fn(a) + (
        1.0 - t
    ) * (1.0 - s) ** (a - 2.0) / gamma_fn(a - 1.0)


def _G_upper(t, s, a):
    # branch 0 <= t <= s
    return (1.0 - t) * (1.0 - s) ** (a - 1.0) / gamma_fn(a) + (1.0 - t) * (1.0 - s) ** (
        a - 2.0
    ) / gamma_fn(a - 1.0)


def _H_lower(t, s):
    return (t - s) + (1.0 - t) * (2.0 - s)


def _H_upper(t, s):
    return (1.0 - t) * (2.0 - s)


def green_G(t, s, alpha: Order):
    t, s = np.broadcast_arrays(_unit("t", t), _unit("s", s))
    a = _alpha(alpha)
    lower = s <= t
    out = np.where(lower, _G_lower(t, np.minimum(s, t), a), _G_upper(t, s, a))
    return _scalar_or_array(out)


def green_H(t, s):
    t, s = np.broadcast_arrays(_unit("t", t), _unit("s", s))
    out = np.where(s <= t, _H_lower(t, s), _H_upper(t, s))
    return _scalar_or_array(out)


def green_G_gamma(t, s, alpha: Order, gamma: Order):
    """Caputo derivative of order ``gamma`` of ``t -> G(t, s)``."""
    t, s = np.broadcast_arrays(_unit("t", t), _unit("s", s))
    a, g = _alpha(alpha), _gamma(gamma)
    diff = np.maximum(t - s, 0.0)
    head = np.where(s <= t, diff ** (a - g - 1.0) / gamma_fn(a - g), 0.0)
    out = head - t ** (1.0 - g) / gamma_fn(2.0 - g) * boundary_profile(s, a)
    return _scalar_or_array(out)


def green_H_gamma(t, s, gamma: Order):
    """Caputo derivative of order ``gamma`` of ``t -> H(t, s)``."""
    t, s = np.broadcast_arrays(_unit("t", t), _unit("s", s))
    g = _gamma(gamma)
    diff = np.maximum(t - s, 0.0)
    c = 1.0 / gamma_fn(2.0 - g)
    head = np.where(s <= t, diff ** (1.0 - g) * c, 0.0)
    out = head - t ** (1.0 - g) * c * (2.0 - s)
    return _scalar_or_array(out)


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Kernel values on the tensor grid; ``values[i, j]`` is at ``(t_i, s_j)``."""

    kind: str
    alpha: Optional[float]
    gamma: Optional[float]
    grid: UniformGrid
    values: np.ndarray

    def to_csv(self, stream: TextIO | None = None) -> str:
        """Row-major ``t,s,value`` CSV at 17 significant digits."""
        nodes = self.grid.nodes
        buf = io.StringIO()
        buf.write("t,s,value\n")
        for i, ti in enumerate(nodes):
            row = self.values[i]
            buf.write(
                "".join(f"{ti:.17g},{sj:.17g},{v:.17g}\n" for sj, v in zip(nodes, row))
            )
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text


def tabulate(kind: str, alpha: Order | None, gamma: Order | None, grid: UniformGrid) -> KernelTable:
    """Evaluate one of the four kernels on ``grid x grid``."""
    if kind not in KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}; expected one of {KINDS}")
    T, S = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    a = _order(alpha) if alpha is not None else None
    g = _order(gamma) if gamma is not None else None
    if kind == "G":
        vals = green_G(T, S, a)
    elif kind == "H":
        vals = green_H(T, S)
    elif kind == "Ggamma":
        vals = green_G_gamma(T, S, a, g)
    else:
        vals = green_H_gamma(T, S, g)
    vals = np.array(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError(f"non-finite entries in {kind} table")
    vals.setflags(write=False)
    return KernelTable(
        kind,
        a if kind in ("G", "Ggamma") else None,
        g if kind in ("Ggamma", "Hgamma") else None,
        grid,
        vals,
    )


def kernel_max(table: KernelTable) -> float:
    """Largest ``|value|`` over the grid (a lower estimate of the true sup)."""
    return float(np.max(np.abs(table.values)))


def analytic_bounds(alpha: Order, gamma: Order) -> dict[str, float]:
    """Closed-form caps on ``|G|, |H|, |G_gamma|, |H_gamma|`` over the unit square."""
    a, g = _alpha(alpha), _gamma(gamma)
    return {
        "G": 3.0 / gamma_fn(a - 1.0),
        "H": 3.0,
        "Ggamma": gamma_fn(a) / gamma_fn(a - g) + 2.0 / (gamma_fn(2.0 - g) * gamma_fn(a - 1.0)),
        "Hgamma": 3.0 / gamma_fn(2.0 - g),
    }


@dataclass(frozen=True)
class BoundEntry:
    kind: str
    observed_max: float
    bound: float
    ok: bool


@dataclass(frozen=True)
class BoundsReport:
    alpha: float
    gamma: float
    n_intervals: int
    entries: tuple[BoundEntry, ...]

    @property
    def all_ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def __getitem__(self, kind: str) -> BoundEntry:
        for e in self.entries:
            if e.kind == kind:
                return e
        raise KeyError(kind)


def kernel_bounds_check(alpha: Order, gamma: Order, grid: UniformGrid) -> BoundsReport:
    bounds = analytic_bounds(alpha, gamma)
    entries = []
    for kind in KINDS:
        observed = kernel_max(tabulate(kind, alpha, gamma, grid))
        entries.append(BoundEntry(kind, observed, bounds[kind], observed <= bounds[kind] + 1e-12))
    return BoundsReport(_order(alpha), _order(gamma), grid.n_intervals, tuple(entries))
