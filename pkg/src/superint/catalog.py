"""Parameter-validated catalog of Cartesian-separable magnetic systems and their
integrals of motion.

Every builder returns the system in a gauge adapted to the separation together
with its integrals as momentum polynomials.  Integrals of degree <= 2 also carry
their structured second-order spec.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Mapping

import numpy as np

from .core import Field, MagneticSystem, ScalarFunction1D as S1
from .integrals import MomentumPolynomial as MP, QuadraticIntegralSpec

CLASS_RANK = {"integrable": 3, "minimal": 4, "maximal": 5}


class ValidationError(ValueError):
    """Parameters violate an entry's validity predicate."""


def _load_anchors() -> dict:
    with resources.files(__package__).joinpath("data/anchors.json").open(encoding="utf-8") as fh:
        return json.load(fh)


ANCHORS = _load_anchors()


@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: float = 1.0
    doc: str = ""


@dataclass(frozen=True)
class Predicate:
    text: str
    check: Callable[[Mapping], bool]


@dataclass(frozen=True)
class Box:
    """Coordinate ranges; signed coordinates are drawn as +-[lo, hi]."""
    x: tuple = ((-1.0, 1.0, False),) * 3
    p: tuple = ((-1.0, 1.0),) * 3

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.empty((n, 6))
        for j, (lo, hi, signed) in enumerate(self.x):
            v = rng.uniform(lo, hi, n)
            if signed:
                v = v * rng.choice([-1.0, 1.0], n)
            out[:, j] = v
        for j, (lo, hi) in enumerate(self.p):
            out[:, 3 + j] = rng.uniform(lo, hi, n)
        return out


@dataclass
class IntegralRecord:
    name: str
    poly: MP
    role: str                 # cartesian | additional | higher-order
    ref: str
    spec: QuadraticIntegralSpec | None = None


@dataclass
class Instance:
    entry_id: str
    params: dict
    system: MagneticSystem
    integrals: list
    classification: str
    expected_rank: int
    sample_box: Box
    start_box: Box
    metadata: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.system, self.integrals, self.metadata))

    def integral(self, name: str) -> IntegralRecord:
        for r in self.integrals:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def polys(self) -> list:
        return [r.poly for r in self.integrals]


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    title: str
    params: tuple
    predicates: tuple
    builder: Callable
    w_params: tuple = ()
    classification: str = "minimal"   # at default parameters

    @property
    def anchor(self) -> str:
        return ANCHORS[self.id]["anchor"]

    @property
    def param_names(self) -> list:
        return [p.name for p in self.params]

    def defaults(self) -> dict:
        return {p.name: float(p.default) for p in self.params}

    def descriptor(self) -> dict:
        return {"id": self.id, "title": self.title, "classification": self.classification,
                "params": {p.name: p.default for p in self.params},
                "anchor": self.anchor, "w_params": list(self.w_params)}

    def resolve(self, params: Mapping | None) -> dict:
        vals = self.defaults()
        for k, v in (params or {}).items():
            if k not in vals:
                raise ValidationError(f"{self.id}: unknown parameter {k!r} "
                                      f"(expected one of {', '.join(vals)})")
            v = float(v)
            if not math.isfinite(v):
                raise ValidationError(f"{self.id}: parameter {k} must be finite")
            vals[k] = v
        for pred in self.predicates:
            if not pred.check(vals):
                raise ValidationError(f"{self.id}: parameters violate '{pred.text}'")
        return vals

    def instantiate(self, params: Mapping | None = None, **kw) -> Instance:
        vals = self.resolve(params)
        inst = self.builder(vals, **kw)
        inst.entry_id = self.id
        inst.params = vals
        refs = ANCHORS[self.id]["refs"]
        for r in inst.integrals:
            r.ref = refs.get(r.name, r.ref)
            if r.poly.degree <= 2 and r.spec is None:
                r.spec = QuadraticIntegralSpec.from_polynomial(r.poly, name=r.name)
        inst.metadata.setdefault("anchor", self.anchor)
        inst.metadata.setdefault("explicit_integrals_complete", True)
        return inst


# ---------------------------------------------------------------------------
# building blocks

def _x(j: int) -> Field:
    return Field.coord(j)


def _pw(j: int, b: float, a: float = 1.0) -> Field:
    return S1.power(b, a).along(j)


def _F(f) -> MP:
    return MP.of_field(Field.lift(f))


def _canon(sys: MagneticSystem) -> list:
    return [MP.canonical_p(j, sys.gauge) for j in range(3)]


def _cov():
    pi = [MP.pi(j) for j in range(3)]
    l = [MP.angular(j) for j in range(3)]
    return pi, l


def case_one_cartesian(sys: MagneticSystem) -> list:
    """X1, X2 of the separation and the linear momentum p3."""
    d = sys.separation
    P = _canon(sys)
    u1, u2 = d.u1.along(1), d.u2.along(0)
    V1, V2 = d.V1.along(0), d.V2.along(1)
    X1 = P[0] * P[0] - 2.0 * (P[2] * u2 - _F(V1))
    X2 = P[1] * P[1] + 2.0 * (P[2] * u1 + _F(V2))
    return [IntegralRecord("X1", X1.named("X1"), "cartesian", ""),
            IntegralRecord("X2", X2.named("X2"), "cartesian", ""),
            IntegralRecord("X0", P[2].named("X0"), "cartesian", "")]


def case_two_cartesian(sys: MagneticSystem) -> list:
    P = _canon(sys)
    return [IntegralRecord("X1", P[1].named("X1"), "cartesian", ""),
            IntegralRecord("X2", P[2].named("X2"), "cartesian", "")]


def _inst(sys, integrals, classification, sample_box, start_box, **meta) -> Instance:
    return Instance("", {}, sys, integrals, classification, CLASS_RANK[classification],
                    sample_box, start_box, dict(meta))


def _is_rational(r: float, max_den: int = 64, tol: float = 1e-12) -> bool:
    if not math.isfinite(r):
        return False
    f = Fraction(r).limit_denominator(max_den)
    return abs(float(f) - r) <= tol * max(1.0, abs(r))


SING = (0.3, 2.0, True)
POS = (0.3, 2.0, False)
FREE = (-1.0, 1.0, False)
P_BOX = ((-1.0, 1.0),) * 3


# ---------------------------------------------------------------------------
# Case I and Case II generic

def build_case1_generic(v, functions: Mapping | None = None) -> Instance:
    fns = dict(functions or {})
    u1 = fns.get("u1", S1.power(2, v["a"]))
    u2 = fns.get("u2", S1.power(1, v["b"]))
    V1 = fns.get("V1", S1.poly([0, 0, v["w"], 0, v["c"] / 4]))
    V2 = fns.get("V2", S1.poly([0, 0, v["w"], 0, v["c"] / 4]))
    sys = MagneticSystem.case_one(u1, u2, V1, V2, name="case1.generic")
    box = Box(x=tuple(SING if j in sys.singular else FREE for j in range(3)))
    return _inst(sys, case_one_cartesian(sys), "integrable", box, box)


def build_case2_generic(v, functions: Mapping | None = None) -> Instance:
    fns = dict(functions or {})
    u2 = fns.get("u2", S1.power(2, v["a"]))
    u3 = fns.get("u3", S1.power(1, v["b"]))
    V1 = fns.get("V1", S1.poly([0, 0, v["w"], 0, v["c"] / 4]))
    sys = MagneticSystem.case_two(u2, u3, V1, name="case2.generic")
    box = Box(x=tuple(SING if j in sys.singular else FREE for j in range(3)))
    return _inst(sys, case_two_cartesian(sys), "integrable", box, box)


# ---------------------------------------------------------------------------
# Case I.a

def build_case1a(v) -> Instance:
    a, b, c, w = v["a"], v["b"], v["c"], v["w"]
    ex = S1.exp(b).along(1)
    u1 = S1.exp(b, a / b)
    u2 = S1.power(1, c)
    V1 = S1.power(2, c * c / 2)
    V2 = S1.exp(b, a * w)
    sys = MagneticSystem.case_one(u1, u2, V1, V2, name="case1.a")
    pi, _ = _cov()
    x1, x3 = _x(0), _x(2)
    s1 = w * b - (a / b) * ex + c * x1
    s2 = Field.const(-c / b)
    s3 = -c * x3
    m = c * x3 * ((a / b) * ex - c * x1 - w * b)
    X3 = pi[0] * pi[2] + pi[0] * s1 + pi[1] * s2 + pi[2] * s3 + _F(m)
    ints = case_one_cartesian(sys) + [IntegralRecord("X3", X3.named("X3"), "additional", "")]
    box = Box(x=((-1, 1, False), (-1, 1, False), (-1, 1, False)))
    start = Box(x=((-0.5, 0.5, False), (-0.5, 0.5, False), (-0.5, 0.5, False)),
                p=((-0.5, 0.5),) * 3)
    return _inst(sys, ints, "minimal", box, start)


# ---------------------------------------------------------------------------
# Table 1 lifts (Case I.b, I.c, I.d)

def _table1(kind: str, v, name: str) -> Instance:
    a1, a2, a3, b1, b2, b3 = (v[k] for k in ("a1", "a2", "a3", "b1", "b2", "b3"))
    if kind == "E1":
        u1 = S1({(2, 0, 0): a1, (-2, 0, 0): a3})
        u2 = S1({(2, 0, 0): -a1, (-2, 0, 0): -a2})
        V1 = S1({(2, 0, 0): b1, (-2, 0, 0): b2})
        V2 = S1({(2, 0, 0): b1, (-2, 0, 0): b3})
    elif kind == "E2":
        u1 = S1({(2, 0, 0): a1, (-2, 0, 0): a3})
        u2 = S1({(2, 0, 0): -4 * a1, (1, 0, 0): -a2})
        V1 = S1({(2, 0, 0): 4 * b1, (1, 0, 0): b2})
        V2 = S1({(2, 0, 0): b1, (-2, 0, 0): b3})
    else:
        u1 = S1({(2, 0, 0): a1, (1, 0, 0): a3})
        u2 = S1({(2, 0, 0): -a1, (1, 0, 0): -a2})
        V1 = S1({(2, 0, 0): b1, (1, 0, 0): b2})
        V2 = S1({(2, 0, 0): b1, (1, 0, 0): b3})
    sys = MagneticSystem.case_one(u1, u2, V1, V2, name=name)
    X3 = table1_integral(kind, sys, KappaCoefficients((a1, b1), (a2, b2), (a3, b3)))
    ints = case_one_cartesian(sys) + [IntegralRecord("X3", X3.named("X3"), "additional", "")]
    xs = tuple(SING if j in sys.singular else FREE for j in range(3))
    start_x = tuple((0.5, 1.5, True) if j in sys.singular else (-0.5, 0.5, False) for j in range(3))
    start = Box(x=start_x, p=((-0.5, 0.5), (-0.5, 0.5), (0.0, 0.5)))
    return _inst(sys, ints, "minimal", Box(x=xs), start, table1=kind)


@dataclass(frozen=True)
class KappaCoefficients:
    """c_j = a_j * kappa + b_j for j = 1, 2, 3, stored as (a_j, b_j)."""
    c1: tuple
    c2: tuple
    c3: tuple

    def at(self, kappa: float) -> tuple:
        return tuple(a * kappa + b for a, b in (self.c1, self.c2, self.c3))


def _kc(P3: MP, ab: tuple) -> MP:
    return P3 * ab[0] + ab[1]


def table1_integral(kind: str, sys: MagneticSystem, c: KappaCoefficients) -> MP:
    """Third integral of a Table 1 row with c_j -> a_j p3 + b_j (canonical p)."""
    P = _canon(sys)
    x1, x2 = _x(0), _x(1)
    L3 = P[1] * x1 - P[0] * x2
    c1, c2, c3 = (_kc(P[2], t) for t in (c.c1, c.c2, c.c3))
    if kind == "E1":
        return L3 * L3 + 2.0 * (c2 * (x2 * x2 * _pw(0, -2)) + c3 * (x1 * x1 * _pw(1, -2)))
    if kind == "E2":
        return P[1] * L3 - (c1 * (2.0 * x1 * x2 * x2) + c2 * (0.5 * x2 * x2)) \
            + c3 * (2.0 * x1 * _pw(1, -2))
    if kind == "E2swap":
        return -(P[0] * L3) - (c1 * (2.0 * x2 * x1 * x1) + c2 * (0.5 * x1 * x1)) \
            + c3 * (2.0 * x2 * _pw(0, -2))
    if kind == "E3":
        return P[0] * P[1] + c1 * (2.0 * x1 * x2) + c2 * x2 + c3 * x1
    raise ValueError(kind)


# ---------------------------------------------------------------------------
# Case I.d maximal subclass

def build_case1d_max(v) -> Instance:
    a2, v21 = v["a2"], v["v21"]
    sys = MagneticSystem.case_one(S1(), S1.power(1, a2), S1(), S1.power(1, v21),
                                  name="case1.d.max")
    ints = case_one_cartesian(sys)
    P = _canon(sys)
    x1, x2 = _x(0), _x(1)
    X3 = P[0] * P[1] - P[2] * (a2 * x2) + _F(v21 * x1)
    pi, l = _cov()
    X4 = 3.0 * (pi[2] * l[0]) - pi[0] * l[2] - l[1] * (3.0 * v21 / a2) \
        + pi[2] * (a2 * x1 * x2) + l[0] * (3.0 * a2 * x1) \
        + _F(v21 * x1 * x1 + a2 * a2 * x1 * x1 * x2)
    ints += [IntegralRecord("X3", X3.named("X3"), "additional", ""),
             IntegralRecord("X4", X4.named("X4"), "additional", "")]
    box = Box()
    start = Box(x=((-0.5, 0.5, False),) * 3, p=((-0.5, 0.5),) * 3)
    return _inst(sys, ints, "maximal", box, start)


# ---------------------------------------------------------------------------
# Case II.a - II.d

def build_case2a(v) -> Instance:
    a, b, c, w = v["a"], v["b"], v["c"], v["w"]
    sys = MagneticSystem.case_two(S1.exp(b, a / b), S1(), S1({(1, 0, 0): w, (0, b, 0): c}),
                                  name="case2.a")
    pi, l = _cov()
    e1, e2 = S1.exp(b).along(0), S1.exp(2 * b).along(0)
    x2, x3 = _x(1), _x(2)
    s2 = x3 * (a * e1 - b * b * c / a)
    s3 = x2 * (b * b * c / a - 2 * a * e1)
    m = x2 * (w + b * c * e1 - (a * a / b) * e2)
    X3 = pi[0] * pi[1] - b * (pi[2] * l[0]) + pi[1] * s2 + pi[2] * s3 + _F(m)
    ints = case_two_cartesian(sys) + [IntegralRecord("X3", X3.named("X3"), "additional", "")]
    start = Box(x=((-0.5, 0.5, False),) * 3, p=((-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)))
    return _inst(sys, ints, "minimal", Box(), start)


def build_case2b(v) -> Instance:
    a, b, c, w = v["a"], v["b"], v["c"], v["w"]
    u2 = S1.power(b - 2, a)
    # at b = 0 the c term lands on the same x1^-2 atom as w
    V1 = S1({(b - 2, 0, 0): a * (b - 2) * c}) + S1({(-2, 0, 0): w})
    sys = MagneticSystem.case_two(u2, S1(), V1, name="case2.b")
    pi, l = _cov()
    x2, x3 = _x(1), _x(2)
    q = _pw(0, b - 2)
    s2 = b * x3 * (a * q - c * (b - 2))
    s3 = x2 * (b * c * (b - 2) - 2 * a * (b - 1) * q)
    m = x2 * (a * (b - 2) ** 2 * c * q - a * a * (b - 2) * _pw(0, 2 * b - 4) - 2 * w * _pw(0, -2))
    X3 = pi[0] * l[2] - b * (pi[2] * l[0]) + pi[1] * s2 + pi[2] * s3 + _F(m)
    ints = case_two_cartesian(sys) + [IntegralRecord("X3", X3.named("X3"), "additional", "")]
    sx = POS if sys.positive else SING
    box = Box(x=(sx, FREE, FREE))
    start = Box(x=((0.8, 1.5, False), (-0.5, 0.5, False), (-0.5, 0.5, False)),
                p=((-0.3, 0.3),) * 3)
    return _inst(sys, ints, "minimal", box, start)


def build_case2c(v) -> Instance:
    a, b, w = v["a"], v["b"], v["w"]
    sys = MagneticSystem.case_two(S1.log(a), S1(), S1({(0, 0, 1): b, (-2, 0, 0): w}),
                                  name="case2.c")
    pi, l = _cov()
    x2, x3 = _x(1), _x(2)
    L = S1.log().along(0)
    s2 = 2.0 * x3 * (a * L - b / a)
    s3 = x2 * (2 * b / a - 2 * a * L - a)
    m = x2 * (b - a * a * L - 2 * w * _pw(0, -2))
    X3 = pi[0] * l[2] - 2.0 * (pi[2] * l[0]) + pi[1] * s2 + pi[2] * s3 + _F(m)
    ints = case_two_cartesian(sys) + [IntegralRecord("X3", X3.named("X3"), "additional", "")]
    box = Box(x=(SING, FREE, FREE))
    start = Box(x=((0.8, 1.5, False), (-0.5, 0.5, False), (-0.5, 0.5, False)),
                p=((-0.3, 0.3), (-0.3, 0.3), (-0.3, 0.3)))
    return _inst(sys, ints, "minimal", box, start)


def build_case2d(v) -> Instance:
    a, b, w = v["a"], v["b"], v["w"]
    u3 = S1.power(-2, -a / 2)
    V1 = S1({(-2, 0, 1): -a * b, (-2, 0, 0): w})
    sys = MagneticSystem.case_two(S1(), u3, V1, name="case2.d")
    pi, l = _cov()
    x2, x3 = _x(1), _x(2)
    L = S1.log().along(0)
    s2 = x3 * (2 * b - a * _pw(0, -2))
    s3 = -2 * b * x2
    m = x3 * (-(a * a / 2) * _pw(0, -4) + (2 * w + a * b) * _pw(0, -2) - 2 * a * b * L * _pw(0, -2))
    X3 = pi[0] * l[1] + pi[1] * s2 + pi[2] * s3 + _F(m)
    ints = case_two_cartesian(sys) + [IntegralRecord("X3", X3.named("X3"), "additional", "")]
    box = Box(x=(SING, FREE, FREE))
    start = Box(x=((4.0, 5.0, False), (-0.5, 0.5, False), (-0.5, 0.5, False)),
                p=((-0.1, 0.1), (-0.1, 0.1), (-0.1, 0.1)))
    return _inst(sys, ints, "minimal", box, start)


# ---------------------------------------------------------------------------
# constant field along x2

def uniform_field_system(gamma: float, VY: S1, name: str) -> MagneticSystem:
    """A = (0, 0, -gamma x1), gauge potential V = V(x2) + gamma^2 x1^2 / 2, so W = V(x2)."""
    return MagneticSystem.case_one(S1(), S1.power(1, gamma), S1.power(2, gamma ** 2 / 2), VY,
                                   name=name)


def uniform_field_integrals(sys: MagneticSystem, gamma: float) -> list:
    P = _canon(sys)
    x1, x3 = _x(0), _x(2)
    I1 = P[0] - _F(gamma * x3)
    I2 = P[2]
    l2 = P[0] * x3 - P[2] * x1
    I3 = 2.0 * l2 + _F(gamma * (x1 * x1 - x3 * x3))
    X1 = I1 * I1 + gamma * I3
    X2 = 2.0 * MP.hamiltonian(sys) - X1 - I2 * I2
    return [IntegralRecord("I1", I1.named("I1"), "cartesian", ""),
            IntegralRecord("I2", I2.named("I2"), "cartesian", ""),
            IntegralRecord("I3", I3.named("I3"), "additional", ""),
            IntegralRecord("X1", X1.named("X1"), "cartesian", ""),
            IntegralRecord("X2", X2.named("X2"), "cartesian", "")]


def x5_integral(gamma: float, c: float) -> MP:
    pi, l = _cov()
    g = gamma
    x1, x2 = _x(0), _x(1)
    q = g * g * x2 * x2 + 2 * c * _pw(1, -2)     # (gamma^2 x2^4 + 2c) / x2^2
    return 2 * g * (pi[1] * pi[2] * l[2]) \
        + g * g * (pi[1] * pi[1] * (x1 * x1) + (pi[2] * pi[2] - pi[0] * pi[0]) * (x2 * x2)) \
        + pi[2] * (2 * g * x1 * q) + _F(g * g * x1 * x1 * q)


def build_uniformB(v) -> Instance:
    g = v["gamma"]
    sys = uniform_field_system(g, S1.poly([0, 0, v["v2"], 0, v["v4"]]), "const.uniformB")
    start = Box(x=((-0.5, 0.5, False),) * 3, p=((-0.5, 0.5),) * 3)
    return _inst(sys, uniform_field_integrals(sys, g), "minimal", Box(), start)


def caged_potential(gamma: float, c: float, ell: float, m: float) -> S1:
    """c / Y^2 + (m^2 / (2 l^2)) gamma^2 Y^2: Y-frequency m gamma / l against gamma in X."""
    return S1({(-2, 0, 0): c, (2, 0, 0): (m * m) / (2 * ell * ell) * gamma * gamma})


def build_cagedosc(v) -> Instance:
    g, c, ell, m = v["gamma"], v["c"], v["ell"], v["m"]
    sys = uniform_field_system(g, caged_potential(g, c, ell, m), "const.cagedosc")
    ints = uniform_field_integrals(sys, g)
    ratio = m / ell
    rational = _is_rational(ratio)
    if abs(ratio - 1.0) < 1e-15:
        ints.append(IntegralRecord("X5", x5_integral(g, c).named("X5"), "higher-order", ""))
    cls = "maximal" if rational else "minimal"
    complete = len(ints) >= 6 or cls == "minimal"
    y = SING if c != 0 else FREE
    ys = (0.6, 1.4, False) if c != 0 else (-0.8, 0.8, False)
    start = Box(x=((-0.5, 0.5, False), ys, (-0.5, 0.5, False)), p=((-0.5, 0.5),) * 3)
    omega_y = (2.0 if c != 0 else 1.0) * abs(g) * m / ell
    periods = [2 * math.pi / abs(g), 2 * math.pi / omega_y]
    return _inst(sys, ints, cls, Box(x=(FREE, y, FREE)), start,
                 frequency_ratio=ratio, commensurate=rational,
                 explicit_integrals_complete=complete,
                 shortest_period=min(periods),
                 note="extra integral for general (l, m) is not explicit; closure is "
                      "checked by orbit recurrence")


def build_cagedosc_x5(v) -> Instance:
    g, c = v["gamma"], v["c"]
    sys = uniform_field_system(g, S1({(-2, 0, 0): c, (2, 0, 0): g * g / 2}), "const.cagedosc.x5")
    ints = uniform_field_integrals(sys, g)
    ints.append(IntegralRecord("X5", x5_integral(g, c).named("X5"), "higher-order", ""))
    start = Box(x=((-0.5, 0.5, False), (0.6, 1.4, False), (-0.5, 0.5, False)),
                p=((-0.5, 0.5),) * 3)
    return _inst(sys, ints, "maximal", Box(x=(FREE, SING, FREE)), start)


# ---------------------------------------------------------------------------
# extended caged oscillator

def extcage_condition(v) -> tuple:
    """(holds, r) with r = l^2 / m^2 when l1/m1 = l2/m2 = r and l/m is rational."""
    l1, l2, m1, m2 = v["l1"], v["l2"], v["m1"], v["m2"]
    ratios = []
    for lj, mj in ((l1, m1), (l2, m2)):
        if lj == 0 and mj == 0:
            continue
        if mj == 0:
            return False, math.inf
        ratios.append(lj / mj)
    if not ratios or (len(ratios) == 2 and abs(ratios[0] - ratios[1]) > 1e-12 * max(1, abs(ratios[0]))):
        return False, ratios[0] if ratios else math.nan
    r = ratios[0]
    if r <= 0:
        return False, r
    return _is_rational(math.sqrt(r)), r


def build_extcage(v) -> Instance:
    om = v["omega"]
    l1, l2, m1, m2 = v["l1"], v["l2"], v["m1"], v["m2"]
    al1, al2, be1, be2 = v["alpha1"], v["alpha2"], v["beta1"], v["beta2"]
    u1 = S1({(2, 0, 0): om * m1, (-2, 0, 0): be1})
    u2 = S1({(2, 0, 0): -om * l1, (-2, 0, 0): -al1})
    V1 = S1({(2, 0, 0): om * l2, (-2, 0, 0): al2})
    V2 = S1({(2, 0, 0): om * m2, (-2, 0, 0): be2})
    sys = MagneticSystem.case_one(u1, u2, V1, V2, name="extcage")
    ints = case_one_cartesian(sys)
    holds, r = extcage_condition(v)
    kind = None
    if holds and abs(r - 1) < 1e-12:
        kind = "E1"
        cc = KappaCoefficients((om * l1, om * l2), (al1, al2), (be1, be2))
    elif holds and abs(r - 4) < 1e-12 and al1 == 0 and al2 == 0:
        kind = "E2"
        cc = KappaCoefficients((om * m1, om * m2), (0.0, 0.0), (be1, be2))
    elif holds and abs(r - 0.25) < 1e-12 and be1 == 0 and be2 == 0:
        kind = "E2swap"
        cc = KappaCoefficients((om * l1, om * l2), (0.0, 0.0), (al1, al2))
    if kind:
        X3 = table1_integral(kind, sys, cc)
        ints.append(IntegralRecord("X3", X3.named("X3"), "additional", ""))
    cls = "minimal" if holds else "integrable"
    xs = tuple(SING if j in sys.singular else FREE for j in range(3))
    start_x = tuple((0.5, 1.5, True) if j in sys.singular else (-0.5, 0.5, False) for j in range(3))
    start = Box(x=start_x, p=((-0.5, 0.5), (-0.5, 0.5), (0.0, 0.5)))
    return _inst(sys, ints, cls, Box(x=xs), start, ratio_condition=holds, squared_ratio=r,
                 explicit_integrals_complete=(kind is not None) or not holds,
                 note="classified minimal when the ratio condition holds; non-maximality "
                      "is not asserted")


# ---------------------------------------------------------------------------
# constant field (a1, a2, 0) with quadratic potentials

def sec8_coefficient(a1, a2, v12, v22) -> float:
    return 1.0 - a1 * a1 / (2 * v22) - a2 * a2 / (2 * v12)


def build_sec8(v) -> Instance:
    a1, a2, v11, v12, v21, v22 = (v[k] for k in ("a1", "a2", "v11", "v12", "v21", "v22"))
    sys = MagneticSystem.case_one(S1.power(1, a1), S1.power(1, a2),
                                  S1.poly([0, v11, v12]), S1.poly([0, v21, v22]),
                                  name="sec8.quadratic")
    ints = case_one_cartesian(sys)
    P = _canon(sys)
    x1, x2, x3 = _x(0), _x(1), _x(2)
    meta = {}
    extra = 0
    complete = True
    if v12 != 0 and v22 != 0:
        coef = sec8_coefficient(a1, a2, v12, v22)
        meta["p3_coefficient"] = coef
        meta["inverted"] = coef < 0
        meta["degenerate"] = abs(coef) < 1e-12
        if abs(v12 - v22) < 1e-15:
            X3 = table1_integral("E3", sys, KappaCoefficients((0.0, v12), (-a2, v11), (a1, v21)))
            ints.append(IntegralRecord("X3", X3.named("X3"), "additional", ""))
            extra += 1
        elif _is_rational(v12 / v22) and v12 / v22 > 0:
            extra += 1
            complete = False
        shift = a2 * v11 / (2 * v12) - a1 * v21 / (2 * v22)
        if meta["degenerate"] and abs(shift) < 1e-12:
            Z = _F(x3) - P[0] * (a2 / (2 * v12)) + P[1] * (a1 / (2 * v22))
            ints.append(IntegralRecord("Z", Z.named("Z"), "additional", ""))
            extra += 1
        meta["branch"] = "both nonzero"
    elif v12 == 0 and v22 == 0:
        X3 = P[0] * P[1] + (v11 - a2 * P[2]) * x2 + (v21 + a1 * P[2]) * x1
        ints.append(IntegralRecord("X3", X3.named("X3"), "additional", ""))
        extra += 1
        if a1 == 0 and v11 == 0 and a2 != 0:
            pi, l = _cov()
            X4 = 3.0 * (pi[2] * l[0]) - pi[0] * l[2] - l[1] * (3.0 * v21 / a2) \
                + pi[2] * (a2 * x1 * x2) + l[0] * (3.0 * a2 * x1) \
                + _F(v21 * x1 * x1 + a2 * a2 * x1 * x1 * x2)
            ints.append(IntegralRecord("X4", X4.named("X4"), "additional", ""))
            extra += 1
        meta["branch"] = "both zero"
    else:
        meta["branch"] = "one zero"
    cls = ["integrable", "minimal", "maximal"][min(extra, 2)]
    start = Box(x=((-0.5, 0.5, False),) * 3, p=((-0.5, 0.5),) * 3)
    return _inst(sys, ints, cls, Box(), start, explicit_integrals_complete=complete, **meta)


# ---------------------------------------------------------------------------
# registry

def _ne(*names):
    return Predicate(" and ".join(f"{n} != 0" for n in names),
                     lambda v, names=names: all(v[n] != 0 for n in names))


def _P(*names, default=1.0):
    return tuple(ParamSpec(n, default) for n in names)


def _any_nonzero(names, text):
    return Predicate(text, lambda v: any(v[n] != 0 for n in names))


ENTRIES = [
    CatalogEntry("case1.generic", "Case I separable system, polynomial data",
                 _P("a", "b", "c", "w"),
                 (_any_nonzero(("a", "b"), "a != 0 or b != 0 (nonvanishing B)"),),
                 build_case1_generic, ("w", "c"), "integrable"),
    CatalogEntry("case2.generic", "Case II separable system, polynomial data",
                 _P("a", "b", "c", "w"),
                 (_any_nonzero(("a", "b"), "a != 0 or b != 0 (nonvanishing B)"),),
                 build_case2_generic, ("w", "c"), "integrable"),
    CatalogEntry("case1.a", "B = (a e^{b x2}, c, 0)", _P("a", "b", "c", "w"),
                 (_ne("a", "b", "c"),), build_case1a, ("w",)),
    CatalogEntry("case1.b", "Table 1 E1 lift", _P("a1", "a2", "a3", "b1", "b2", "b3"),
                 (_any_nonzero(("a1", "a2", "a3"), "a1, a2, a3 not all zero"),),
                 lambda v: _table1("E1", v, "case1.b"), ("b1", "b2", "b3")),
    CatalogEntry("case1.c", "Table 1 E2 lift", _P("a1", "a2", "a3", "b1", "b2", "b3"),
                 (_any_nonzero(("a1", "a2", "a3"), "a1, a2, a3 not all zero"),),
                 lambda v: _table1("E2", v, "case1.c"), ("b1", "b2", "b3")),
    CatalogEntry("case1.d", "Table 1 E3 lift", _P("a1", "a2", "a3", "b1", "b2", "b3"),
                 (_any_nonzero(("a1", "a2", "a3"), "a1, a2, a3 not all zero"),),
                 lambda v: _table1("E3", v, "case1.d"), ("b1", "b2", "b3")),
    CatalogEntry("case1.d.max", "B = (0, a2, 0), W = v21 x2 - a2^2 x1^2 / 2", _P("a2", "v21"),
                 (_ne("a2"),), build_case1d_max, ("v21",), "maximal"),
    CatalogEntry("case2.a", "B = (0, a e^{b x1}, 0)", _P("a", "b", "c", "w"),
                 (_ne("a", "b"),), build_case2a, ("w", "c")),
    CatalogEntry("case2.b", "B = (0, a (b-2) x1^{b-3}, 0)", _P("a", "b", "c", "w"),
                 (_ne("a"), Predicate("b != 2", lambda v: v["b"] != 2)), build_case2b, ("w",)),
    CatalogEntry("case2.c", "B = (0, a / x1, 0)", _P("a", "b", "w"),
                 (_ne("a"),), build_case2c, ("w", "b")),
    CatalogEntry("case2.d", "B = (0, 0, a / x1^3)", _P("a", "b", "w"),
                 (_ne("a"),), build_case2d, ("w",)),
    CatalogEntry("const.uniformB", "B = (0, gamma, 0), W = V(x2)", _P("gamma", "v2", "v4"),
                 (_ne("gamma"),), build_uniformB, ("v2", "v4")),
    CatalogEntry("const.cagedosc", "B = (0, gamma, 0), caged oscillator W(x2)",
                 _P("gamma", "c", "ell", "m"),
                 (_ne("gamma"), Predicate("ell > 0 and m > 0", lambda v: v["ell"] > 0 and v["m"] > 0)),
                 build_cagedosc, ("c",), "maximal"),
    CatalogEntry("const.cagedosc.x5", "B = (0, gamma, 0), W = c / x2^2 + gamma^2 x2^2 / 2",
                 _P("gamma", "c"), (_ne("gamma"),), build_cagedosc_x5, ("c",), "maximal"),
    CatalogEntry("extcage", "extended caged oscillator",
                 _P("omega", "l1", "l2", "m1", "m2", "alpha1", "alpha2", "beta1", "beta2"),
                 (_ne("omega"),
                  _any_nonzero(("l1", "m1", "alpha1", "beta1"), "l1, m1, alpha1, beta1 not all zero")),
                 build_extcage, ("alpha2", "beta2", "l2", "m2")),
    CatalogEntry("sec8.quadratic", "B = (a1, a2, 0), quadratic potentials",
                 _P("a1", "a2", "v11", "v12", "v21", "v22"),
                 (_any_nonzero(("a1", "a2"), "a1 != 0 or a2 != 0"),),
                 build_sec8, ("v11", "v21", "v12", "v22"), "maximal"),
]

_BY_ID = {e.id: e for e in ENTRIES}


def list_entries() -> list:
    return list(ENTRIES)


def get(entry_id: str) -> CatalogEntry:
    try:
        return _BY_ID[entry_id]
    except KeyError:
        raise ValidationError(f"unknown catalog entry {entry_id!r}") from None


def instantiate(entry_id: str, params: Mapping | None = None, **kw) -> Instance:
    return get(entry_id).instantiate(params, **kw)
