"""Problem descriptions: data types, the key = value file format, built-ins.

A problem file is UTF-8 text with one ``key = value`` pair per line; lines
starting with ``#`` are comments. Required keys are ``alpha, gamma, p, f, g,
q1, q2, w, c, phi1, k1, k2, R``. Numeric keys accept constant expressions such
as ``1/(164*pi)``. Two optional keys carry certificate inputs that cannot be
derived from the rest: ``g_gamma_star`` (a quoted value of the kernel maximum)
and ``w1`` (a supplied bound for the L^1 norm of ``w``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .expr import ExprEvalError, ExprSyntaxError, Node, eval_expr, parse_expr, variables

REQUIRED_KEYS = ("alpha", "gamma", "p", "f", "g", "q1", "q2", "w", "c", "phi1", "k1", "k2", "R")
OPTIONAL_KEYS = ("g_gamma_star", "w1")
NUMERIC_KEYS = ("alpha", "gamma", "p", "c", "k1", "k2", "R", "g_gamma_star", "w1")

_ALLOWED_VARS = {
    "f": {"t", "x", "y"},
    "g": {"t", "x"},
    "q1": {"x"},
    "q2": {"x"},
    "w": {"t"},
    "phi1": {"t"},
}


class ProblemError(ValueError):
    """Malformed or inconsistent problem description."""


@dataclass(frozen=True)
class Expr:
    """An expression tree together with the text it was parsed from."""

    ast: Node
    source: str = field(default="", compare=False)

    @classmethod
    def parse(cls, text: str) -> "Expr":
        text = text.strip()
        return cls(parse_expr(text), text)

    def __call__(self, t=None, x=None, y=None):
        return eval_expr(self.ast, t=t, x=x, y=y)

    @property
    def variables(self) -> frozenset[str]:
        return variables(self.ast)

    def __str__(self) -> str:
        return self.source


@dataclass(frozen=True)
class HypothesisData:
    w: Expr
    c: float
    phi1: Expr
    k1: float
    k2: float
    R: float


@dataclass(frozen=True)
class ProblemSpec:
    alpha: float
    gamma: float
    p: float
    f: Expr
    g: Expr
    q1: Expr
    q2: Expr
    hyp: HypothesisData
    g_gamma_star: Optional[float] = None
    w1: Optional[float] = None
    name: str = field(default="", compare=False)

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def to_text(self) -> str:
        """Serialise back to the problem-file format."""
        h = self.hyp
        rows = [
            ("alpha", repr(self.alpha)),
            ("gamma", repr(self.gamma)),
            ("p", repr(self.p)),
            ("f", self.f.source),
            ("g", self.g.source),
            ("q1", self.q1.source),
            ("q2", self.q2.source),
            ("w", h.w.source),
            ("c", repr(h.c)),
            ("phi1", h.phi1.source),
            ("k1", repr(h.k1)),
            ("k2", repr(h.k2)),
            ("R", repr(h.R)),
        ]
        if self.g_gamma_star is not None:
            rows.append(("g_gamma_star", repr(self.g_gamma_star)))
        if self.w1 is not None:
            rows.append(("w1", repr(self.w1)))
        return "".join(f"{k} = {v}\n" for k, v in rows)

    def digest(self) -> dict:
        """Plain-data echo of the spec, for reports."""
        h = self.hyp
        return {
            "name": self.name,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "p": self.p,
            "q": self.q,
            "f": self.f.source,
            "g": self.g.source,
            "q1": self.q1.source,
            "q2": self.q2.source,
            "w": h.w.source,
            "c": h.c,
            "phi1": h.phi1.source,
            "k1": h.k1,
            "k2": h.k2,
            "R": h.R,
            "g_gamma_star": self.g_gamma_star,
            "w1": self.w1,
        }


def _number(key: str, text: str) -> float:
    try:
        ast = parse_expr(text)
    except ExprSyntaxError as exc:
        raise ProblemError(f"{key}: {exc}") from None
    if variables(ast):
        raise ProblemError(f"{key}: expected a constant, got {text!r}")
    try:
        return eval_expr(ast)
    except ExprEvalError as exc:
        raise ProblemError(f"{key}: {exc}") from None


def _expression(key: str, text: str) -> Expr:
    try:
        e = Expr.parse(text)
    except ExprSyntaxError as exc:
        raise ProblemError(f"{key}: {exc}") from None
    extra = e.variables - _ALLOWED_VARS[key]
    if extra:
        allowed = ", ".join(sorted(_ALLOWED_VARS[key]))
        raise ProblemError(f"{key}: variable(s) {', '.join(sorted(extra))} not allowed (use {allowed})")
    return e


def spec_from_mapping(values: dict[str, str], name: str = "") -> ProblemSpec:
    """Build a spec from raw ``key -> text`` pairs."""
    unknown = set(values) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS)
    if unknown:
        raise ProblemError(f"unknown key(s): {', '.join(sorted(unknown))}")
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ProblemError(f"missing key(s): {', '.join(missing)}")
    num = {k: _number(k, values[k]) for k in NUMERIC_KEYS if k in values}
    ex = {k: _expression(k, values[k]) for k in _ALLOWED_VARS}
    if not num["p"] > 1.0:
        raise ProblemError(f"p must exceed 1, got {num['p']}")
    for k in ("c", "k1", "k2"):
        if num[k] < 0.0:
            raise ProblemError(f"{k} must be nonnegative, got {num[k]}")
    if not num["R"] > 0.0:
        raise ProblemError(f"R must be positive, got {num['R']}")
    hyp = HypothesisData(ex["w"], num["c"], ex["phi1"], num["k1"], num["k2"], num["R"])
    return ProblemSpec(
        alpha=num["alpha"],
        gamma=num["gamma"],
        p=num["p"],
        f=ex["f"],
        g=ex["g"],
        q1=ex["q1"],
        q2=ex["q2"],
        hyp=hyp,
        g_gamma_star=num.get("g_gamma_star"),
        w1=num.get("w1"),
        name=name,
    )


def parse_problem(text: str, name: str = "") -> ProblemSpec:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ProblemError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key in values:
            raise ProblemError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return spec_from_mapping(values, name=name)


def load_problem(path: str | os.PathLike) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_problem(text, name=os.path.splitext(os.path.basename(path))[0])


EXAMPLE1 = """\
# alpha = 2.5, gamma = 0.5, p = 3
alpha = 2.5
gamma = 0.5
p = 3
f = exp(-t)/5 - (1/(164*pi))*atan(x^3 + y^3)
g = (1/10)*t^(2/3)*x
q1 = x/20
q2 = x/20
w = exp(-t)/5
c = 1/(164*pi)
phi1 = t^(2/3)/10
k1 = 1/20
k2 = 1/20
R = 2
# quoted kernel maximum and the pointwise cap used for ||w||_1
g_gamma_star = 4.047
w1 = 1/5
"""

EXAMPLE2 = """\
# alpha = 2.7, gamma = 0.7, p = 4
alpha = 2.7
gamma = 0.7
p = 4
f = sin(t)/10 + cos(x^4 + y^4)/200
g = (1/(9*pi))*t^(3/4)*atan(x)
q1 = sin(x)/10
q2 = sin(x)/10
w = sin(t)/10
c = 1/200
phi1 = t^(3/4)/(9*pi)
k1 = 1/10
k2 = 1/10
R = 2
# quoted kernel maximum and the pointwise cap used for ||w||_1
g_gamma_star = 3.9995
w1 = 1/10
"""

BUILTINS = {"example1": EXAMPLE1, "example2": EXAMPLE2}


def builtin_problem(name: str) -> ProblemSpec:
    try:
        text = BUILTINS[name]
    except KeyError:
        raise ProblemError(f"unknown built-in problem {name!r}; choose from {sorted(BUILTINS)}") from None
    return parse_problem(text, name=name)


# --- validation -------------------------------------------------------------

PASS, WARN, FAIL = "pass", "warn", "fail"


@dataclass(frozen=True)
class CheckItem:
    name: str
    status: str
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    items: tuple[CheckItem, ...]

    @property
    def failures(self) -> list[CheckItem]:
        return [i for i in self.items if i.status == FAIL]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __getitem__(self, name: str) -> CheckItem:
        for i in self.items:
            if i.name == name:
                return i
        raise KeyError(name)


def _max_abs(fn, **kw) -> float:
    return float(np.max(np.abs(np.broadcast_to(fn(**kw), np.broadcast(*kw.values()).shape))))


def validate_spec(spec: ProblemSpec, n_grid: int = 1024, n_samples: int = 10_000, seed: int | None = None) -> ValidationReport:
    """Order ranges, structural zeros, hypothesis-data signs, advisory probes."""
    from .certifier import growth_probe, lipschitz_probe

    items = []
    a, g, p = spec.alpha, spec.gamma, spec.p
    items.append(CheckItem("alpha_range", PASS if 2.0 < a < 3.0 else FAIL, f"alpha = {a!r}, need 2 < alpha < 3"))
    ok = 1.0 / p < g <= 1.0 and p > 1.0
    items.append(CheckItem("gamma_range", PASS if ok else FAIL, f"gamma = {g!r}, need 1/p = {1.0 / p!r} < gamma <= 1"))
    items.append(CheckItem("q", PASS, f"q = {spec.q!r}"))

    pts = np.linspace(0.0, 1.0, 33)
    ys = np.linspace(-spec.hyp.R, spec.hyp.R, 33)
    zero_checks = [
        ("g(t,0)=0", lambda: _max_abs(spec.g, t=pts, x=np.zeros_like(pts))),
        ("g(0,y)=0", lambda: _max_abs(spec.g, t=np.zeros_like(ys), x=ys)),
        ("q1(0)=0", lambda: abs(spec.q1(x=0.0))),
        ("q2(0)=0", lambda: abs(spec.q2(x=0.0))),
    ]
    for name, fn in zero_checks:
        try:
            m = fn()
        except ExprEvalError as exc:
            items.append(CheckItem(name, FAIL, str(exc)))
            continue
        items.append(CheckItem(name, PASS if m <= 1e-12 else FAIL, f"max |value| = {m:.3e}"))

    t = np.linspace(0.0, 1.0, n_grid + 1)
    for name, e in (("w>=0", spec.hyp.w), ("phi1>=0", spec.hyp.phi1)):
        try:
            lo = float(np.min(np.broadcast_to(e(t=t), t.shape)))
        except ExprEvalError as exc:
            items.append(CheckItem(name, FAIL, str(exc)))
            continue
        items.append(CheckItem(name, PASS if lo >= 0.0 else FAIL, f"min = {lo:.3e}"))

    if not any(i.status == FAIL for i in items):
        for name, probe in (("lipschitz_probe", lipschitz_probe), ("growth_probe", growth_probe)):
            try:
                rep = probe(spec, n_samples, seed=seed)
            except ExprEvalError as exc:
                # data that cannot be evaluated on the ball is an error, not a soft warning
                items.append(CheckItem(name, FAIL, str(exc)))
                continue
            items.append(CheckItem(name, PASS if rep.violations == 0 else WARN, rep.summary()))
    return ValidationReport(tuple(items))

