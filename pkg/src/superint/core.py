"""Phase-space primitives, exact field algebra, gauge handling and the Hamiltonian.

Coordinate-dependent quantities are stored as `Field` objects: finite sums of
products of one-dimensional atoms

    x**b * exp(c*x) * log|x|**k

one factor per Cartesian coordinate.  The family is closed under products and
differentiation, so every derivative used by the library is exact.  Fields are
compiled once into plain Python functions (math for scalars, numpy for
batches) so evaluation inside the integrator stays cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np

SINGULAR_GUARD = 1e-3
COORDS = ("x1", "x2", "x3")

# atom key: (power b, exponential rate c, log power k)
Key = tuple
ONE: Key = (0, 0, 0)
UNIT3 = (ONE, ONE, ONE)


class DomainError(ValueError):
    """Raised when a point sits in (or too close to) a declared singular set."""

    def __init__(self, message: str, coordinate: str | None = None):
        super().__init__(message)
        self.coordinate = coordinate


class StructuralError(ValueError):
    """Raised when an object does not have the structure an operation needs."""


def _norm_num(v: float):
    """Snap exponents so that keys built along different routes coincide."""
    v = float(v)
    r = round(v)
    if abs(v - r) < 1e-12:
        return int(r)
    return round(v, 12)


def _is_int(b) -> bool:
    return isinstance(b, int)


def _atom_mul(k1: Key, k2: Key) -> Key:
    return (_norm_num(k1[0] + k2[0]), _norm_num(k1[1] + k2[1]), k1[2] + k2[2])


def _atom_diff(key: Key, coef: float) -> list:
    b, c, k = key
    out = []
    if b != 0:
        out.append(((_norm_num(b - 1), c, k), coef * b))
    if c != 0:
        out.append(((b, c, k), coef * c))
    if k > 0:
        out.append(((_norm_num(b - 1), c, k - 1), coef * k))
    return out


def atom_is_singular(key: Key) -> bool:
    b, _, k = key
    return k > 0 or not _is_int(b) or b < 0


def atom_needs_positive(key: Key) -> bool:
    return not _is_int(key[0])


def _clean(terms: Mapping, tol: float = 0.0) -> dict:
    return {k: float(v) for k, v in terms.items() if v != 0.0 and abs(v) > tol}


class ScalarFunction1D:
    """Finite sum of atoms a * x**b * exp(c x) * log|x|**k in one variable."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        acc: dict = {}
        for key, v in (terms or {}).items():
            key = (_norm_num(key[0]), _norm_num(key[1]), int(key[2]))
            acc[key] = acc.get(key, 0.0) + float(v)
        self.terms = _clean(acc)

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, a: float) -> "ScalarFunction1D":
        return cls({ONE: a})

    @classmethod
    def power(cls, b: float, a: float = 1.0) -> "ScalarFunction1D":
        return cls({(b, 0, 0): a})

    @classmethod
    def exp(cls, c: float, a: float = 1.0) -> "ScalarFunction1D":
        return cls({(0, c, 0): a})

    @classmethod
    def log(cls, a: float = 1.0, k: int = 1) -> "ScalarFunction1D":
        return cls({(0, 0, k): a})

    @classmethod
    def poly(cls, coefs: Sequence[float]) -> "ScalarFunction1D":
        """coefs[i] multiplies x**i."""
        return cls({(i, 0, 0): a for i, a in enumerate(coefs)})

    # algebra --------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ScalarFunction1D):
            other = ScalarFunction1D.const(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0.0) + v
        return ScalarFunction1D(t)

    __radd__ = __add__

    def __neg__(self):
        return ScalarFunction1D({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, ScalarFunction1D):
            return ScalarFunction1D({k: v * float(other) for k, v in self.terms.items()})
        t: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = _atom_mul(k1, k2)
                t[k] = t.get(k, 0.0) + v1 * v2
        return ScalarFunction1D(t)

    __rmul__ = __mul__

    def derivative(self, order: int = 1) -> "ScalarFunction1D":
        f = self
        for _ in range(order):
            t: dict = {}
            for key, v in f.terms.items():
                for k, c in _atom_diff(key, v):
                    t[k] = t.get(k, 0.0) + c
            f = ScalarFunction1D(t)
        return f

    @property
    def singular(self) -> bool:
        return any(atom_is_singular(k) for k in self.terms)

    @property
    def needs_positive(self) -> bool:
        return any(atom_needs_positive(k) for k in self.terms)

    def along(self, axis: int) -> "Field":
        """Embed as a field depending on coordinate `axis` (0-based) only."""
        t = {}
        for k, v in self.terms.items():
            key = [ONE, ONE, ONE]
            key[axis] = k
            t[tuple(key)] = v
        return Field(t)

    def __call__(self, x):
        return self.along(0)(np.stack([np.asarray(x, float), np.zeros_like(x, float),
                                       np.zeros_like(x, float)], axis=-1))

    def __repr__(self):
        return f"ScalarFunction1D({self.terms!r})"


class Field:
    """Sum of products of one-dimensional atoms in x1, x2, x3."""

    __slots__ = ("terms", "_compiled")

    def __init__(self, terms: Mapping | None = None):
        acc: dict = {}
        for key, v in (terms or {}).items():
            key = tuple((_norm_num(a[0]), _norm_num(a[1]), int(a[2])) for a in key)
            acc[key] = acc.get(key, 0.0) + float(v)
        self.terms = _clean(acc)
        self._compiled = None

    @classmethod
    def const(cls, a: float) -> "Field":
        return cls({UNIT3: a})

    @classmethod
    def monomial(cls, powers: Sequence[int], a: float = 1.0) -> "Field":
        return cls({tuple((p, 0, 0) for p in powers): a})

    @classmethod
    def coord(cls, j: int, a: float = 1.0) -> "Field":
        pw = [0, 0, 0]
        pw[j] = 1
        return cls.monomial(pw, a)

    @classmethod
    def zero(cls) -> "Field":
        return cls()

    @staticmethod
    def lift(obj) -> "Field":
        if isinstance(obj, Field):
            return obj
        if isinstance(obj, (int, float, np.floating, np.integer)):
            return Field.const(float(obj))
        raise TypeError(f"cannot use {type(obj).__name__} as a field")

    # algebra ----------------------------------------------------------------
    def __add__(self, other):
        other = Field.lift(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0.0) + v
        return Field(t)

    __radd__ = __add__

    def __neg__(self):
        return Field({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-Field.lift(other))

    def __rsub__(self, other):
        return Field.lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Field):
            s = float(other)
            return Field({k: v * s for k, v in self.terms.items()})
        t: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(_atom_mul(a, b) for a, b in zip(k1, k2))
                t[k] = t.get(k, 0.0) + v1 * v2
        return Field(t)

    __rmul__ = __mul__

    def __truediv__(self, s: float):
        return self * (1.0 / float(s))

    def __pow__(self, n: int):
        out = Field.const(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def diff(self, j: int, order: int = 1) -> "Field":
        f = self
        for _ in range(order):
            t: dict = {}
            for key, v in f.terms.items():
                for k, c in _atom_diff(key[j], v):
                    nk = list(key)
                    nk[j] = k
                    nk = tuple(nk)
                    t[nk] = t.get(nk, 0.0) + c
            f = Field(t)
        return f

    def grad(self) -> tuple:
        return tuple(self.diff(j) for j in range(3))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def depends_on(self, j: int) -> bool:
        return any(key[j] != ONE for key in self.terms)

    def singular_coords(self) -> set:
        return {j for key in self.terms for j in range(3) if atom_is_singular(key[j])}

    def positive_coords(self) -> set:
        return {j for key in self.terms for j in range(3) if atom_needs_positive(key[j])}

    def is_polynomial(self, max_degree: int | None = None) -> bool:
        for key in self.terms:
            deg = 0
            for b, c, k in key:
                if c != 0 or k != 0 or not _is_int(b) or b < 0:
                    return False
                deg += b
            if max_degree is not None and deg > max_degree:
                return False
        return True

    def close_to(self, other: "Field", tol: float = 1e-12) -> bool:
        d = (self - other).terms
        scale = max([1.0] + [abs(v) for v in self.terms.values()])
        return all(abs(v) <= tol * scale for v in d.values())

    def scale_bound(self) -> float:
        return sum(abs(v) for v in self.terms.values())

    # evaluation -------------------------------------------------------------
    def __call__(self, pts):
        pts = np.asarray(pts, float)
        if self._compiled is None:
            self._compiled = FieldBundle([self])
        return self._compiled(pts)[0]

    def expr(self, names: Sequence[str] = COORDS, digits: int = 12) -> str:
        """Human-readable sum, e.g. '3*x1^2 + 3*x2^-2'."""
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=lambda k: tuple(-a[0] for a in k)):
            v = self.terms[key]
            factors = []
            for name, (b, c, k) in zip(names, key):
                if b != 0:
                    factors.append(name if b == 1 else f"{name}^{b}")
                if c != 0:
                    factors.append(f"exp({c:g}*{name})")
                if k:
                    factors.append(f"log|{name}|" + (f"^{k}" if k > 1 else ""))
            coef = f"{v:.{digits}g}"
            if not factors:
                parts.append(coef)
            elif coef in ("1", "-1"):
                parts.append(("-" if coef == "-1" else "") + "*".join(factors))
            else:
                parts.append(coef + "*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Field({len(self.terms)} terms)"


def _fmt(v: float) -> str:
    return repr(float(v))


class FieldBundle:
    """Several fields compiled into one evaluator with shared atom values.

    Calling the bundle with an (..., 3) array (or a length-3 sequence) returns a
    list of values, one per field.  `scalar(x1, x2, x3)` is the math-module
    variant used on hot paths.
    """

    def __init__(self, fields: Sequence[Field]):
        self.fields = [Field.lift(f) for f in fields]
        sing, pos = set(), set()
        for f in self.fields:
            sing |= f.singular_coords()
            pos |= f.positive_coords()
        self.singular = frozenset(sing)
        self.positive = frozenset(pos)
        self._src = self._source()
        self._vec = self._build(np)
        self._sca = self._build(math)
        self._mp = None

    def _source(self) -> str:
        lines = []
        atom_names: list = [dict(), dict(), dict()]
        base_lines = []
        for j in range(3):
            xs = f"x{j + 1}"
            pw, ex, lg = {}, {}, {}
            for f in self.fields:
                for key in f.terms:
                    a = key[j]
                    if a == ONE or a in atom_names[j]:
                        continue
                    b, c, k = a
                    parts = []
                    if b != 0:
                        if b not in pw:
                            pw[b] = f"P{j}_{len(pw)}"
                            expo = str(b) if _is_int(b) else _fmt(b)
                            base_lines.append(f"    {pw[b]} = {xs}**{expo}")
                        parts.append(pw[b])
                    if c != 0:
                        if c not in ex:
                            ex[c] = f"E{j}_{len(ex)}"
                            base_lines.append(f"    {ex[c]} = exp({_fmt(c)}*{xs})")
                        parts.append(ex[c])
                    if k != 0:
                        if 1 not in lg:
                            lg[1] = f"L{j}"
                            base_lines.append(f"    L{j} = log(abs({xs}))")
                        parts.append(f"L{j}" if k == 1 else f"L{j}**{k}")
                    name = f"A{j}_{len(atom_names[j])}"
                    atom_names[j][a] = name
                    lines.append(f"    {name} = " + "*".join(parts))
        out = []
        for f in self.fields:
            terms = []
            for key, v in f.terms.items():
                facs = [atom_names[j][key[j]] for j in range(3) if key[j] != ONE]
                if facs:
                    terms.append(f"{_fmt(v)}*" + "*".join(facs))
                else:
                    terms.append(_fmt(v))
            out.append(" + ".join(terms) if terms else "ZERO")
        body = base_lines + lines
        src = "def _f(x1, x2, x3, ZERO):\n" + "\n".join(body) + ("\n" if body else "")
        src += "    return [" + ", ".join(out) + "]\n"
        return src

    def _build(self, lib):
        ns = {"exp": lib.exp, "log": lib.log, "abs": (np.abs if lib is np else abs)}
        exec(compile(self._src, "<field-bundle>", "exec"), ns)
        return ns["_f"]

    def check(self, x1, x2, x3):
        """Raise DomainError if a coordinate is inside the guarded singular set."""
        xs = (x1, x2, x3)
        for j in self.singular:
            if np.any(np.abs(xs[j]) < SINGULAR_GUARD):
                raise DomainError(f"{COORDS[j]} is within {SINGULAR_GUARD:g} of the singular "
                                  f"hyperplane {COORDS[j]} = 0", COORDS[j])
        for j in self.positive:
            if np.any(np.asarray(xs[j]) <= 0):
                raise DomainError(f"{COORDS[j]} must be positive (real power)", COORDS[j])

    def __call__(self, pts, check: bool = True):
        pts = np.asarray(pts, float)
        x1, x2, x3 = pts[..., 0], pts[..., 1], pts[..., 2]
        if check:
            self.check(x1, x2, x3)
        zero = np.zeros(np.shape(x1))
        with np.errstate(over="ignore", invalid="ignore"):
            vals = self._vec(x1, x2, x3, zero)
        return [np.broadcast_to(np.asarray(v, float), np.shape(x1)).copy()
                if np.ndim(v) < np.ndim(x1) else np.asarray(v, float) for v in vals]

    def scalar(self, x1: float, x2: float, x3: float, check: bool = True) -> list:
        if check:
            self.check(x1, x2, x3)
        return self._sca(x1, x2, x3, 0.0)

    def precise(self, x1: float, x2: float, x3: float) -> list:
        """Values at one point in mpmath arithmetic at the caller's working precision.

        Float inputs convert to mpf exactly, so only the arithmetic is extended.
        """
        if self._mp is None:
            self._mp = self._build(mpmath)
        self.check(x1, x2, x3)
        return self._mp(mpmath.mpf(x1), mpmath.mpf(x2), mpmath.mpf(x3), mpmath.mpf(0))


# ---------------------------------------------------------------------------
# phase space

@dataclass(frozen=True)
class PhasePoint:
    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, float).reshape(3)
        p = np.asarray(self.p, float).reshape(3)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError("phase point entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_array(cls, y) -> "PhasePoint":
        y = np.asarray(y, float)
        return cls(y[:3], y[3:6])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])


def as_states(pt) -> np.ndarray:
    """Accept a PhasePoint, a list of them, or an (n, 6) array; return (n, 6)."""
    if isinstance(pt, PhasePoint):
        return pt.as_array()[None, :]
    if isinstance(pt, (list, tuple)) and pt and isinstance(pt[0], PhasePoint):
        return np.array([q.as_array() for q in pt])
    arr = np.asarray(pt, float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[-1] != 6:
        raise ValueError("phase points need 6 entries")
    return arr


# ---------------------------------------------------------------------------
# gauge potential and systems

@dataclass(frozen=True)
class CaseIData:
    u1: ScalarFunction1D  # function of x2
    u2: ScalarFunction1D  # function of x1
    V1: ScalarFunction1D
    V2: ScalarFunction1D


@dataclass(frozen=True)
class CaseIIData:
    u2: ScalarFunction1D  # functions of x1
    u3: ScalarFunction1D
    V1: ScalarFunction1D


class GaugePotential:
    """Vector potential A = (A1, A2, A3) with exact curl."""

    def __init__(self, components: Sequence, kind: str | None = None):
        comps = tuple(Field.lift(c) for c in components)
        if len(comps) != 3:
            raise ValueError("a gauge potential has three components")
        self.components = comps
        self.kind = kind
        self._bundle = None

    @classmethod
    def zero(cls) -> "GaugePotential":
        return cls((Field(), Field(), Field()), kind=None)

    @classmethod
    def case_one(cls, u1: ScalarFunction1D, u2: ScalarFunction1D) -> "GaugePotential":
        return cls((Field(), Field(), u1.along(1) - u2.along(0)), kind="I")

    @classmethod
    def case_two(cls, u2: ScalarFunction1D, u3: ScalarFunction1D) -> "GaugePotential":
        return cls((Field(), u3.along(0), -u2.along(0)), kind="II")

    def curl_fields(self) -> tuple:
        A = self.components
        return (A[2].diff(1) - A[1].diff(2),
                A[0].diff(2) - A[2].diff(0),
                A[1].diff(0) - A[0].diff(1))

    @property
    def bundle(self) -> FieldBundle:
        if self._bundle is None:
            self._bundle = FieldBundle(self.components)
        return self._bundle

    def __call__(self, x):
        return np.stack(self.bundle(x), axis=-1)

    def shifted(self, grad_chi: Sequence[Field]) -> "GaugePotential":
        return GaugePotential([a + g for a, g in zip(self.components, grad_chi)], kind=None)


def covariant_momentum(pt, gauge: GaugePotential) -> np.ndarray:
    """p + A(x), componentwise; shape (3,) for one point, (n, 3) for many."""
    y = as_states(pt)
    out = y[:, 3:] + gauge(y[:, :3])
    return out[0] if isinstance(pt, PhasePoint) or np.ndim(pt) == 1 else out


def curl(gauge: GaugePotential, x) -> np.ndarray:
    x = np.asarray(x, float)
    b = FieldBundle(gauge.curl_fields())
    return np.stack(b(x), axis=-1)


class MagneticSystem:
    """A = gauge, V = gauge-dependent scalar potential; B and W are derived."""

    def __init__(self, gauge: GaugePotential, V, name: str = "",
                 separation: CaseIData | CaseIIData | None = None,
                 extra_singular: Iterable[int] = ()):
        self.gauge = gauge
        self.V = Field.lift(V)
        self.name = name
        self.separation = separation
        A = gauge.components
        self.B = gauge.curl_fields()
        self.W = self.V - 0.5 * (A[0] * A[0] + A[1] * A[1] + A[2] * A[2])
        fields = list(A) + [A[i].diff(j) for i in range(3) for j in range(3)] \
            + [self.V] + [self.V.diff(j) for j in range(3)]
        self._rhs = FieldBundle(fields)
        self.singular = frozenset(set(self._rhs.singular) | set(extra_singular))
        self.positive = self._rhs.positive
        self._aux = None

    # constructors -------------------------------------------------------------
    @classmethod
    def case_one(cls, u1, u2, V1, V2, name: str = "") -> "MagneticSystem":
        g = GaugePotential.case_one(u1, u2)
        return cls(g, V1.along(0) + V2.along(1), name=name,
                   separation=CaseIData(u1, u2, V1, V2))

    @classmethod
    def case_two(cls, u2, u3, V1, name: str = "") -> "MagneticSystem":
        g = GaugePotential.case_two(u2, u3)
        return cls(g, V1.along(0), name=name, separation=CaseIIData(u2, u3, V1))

    @classmethod
    def free(cls) -> "MagneticSystem":
        return cls(GaugePotential.zero(), Field(), name="free")

    # checks ---------------------------------------------------------------------
    def check_point(self, x) -> None:
        x = np.asarray(x, float)
        self._rhs.check(x[..., 0], x[..., 1], x[..., 2])

    @property
    def aux(self) -> FieldBundle:
        """B, W and grad W in one bundle."""
        if self._aux is None:
            self._aux = FieldBundle(list(self.B) + [self.W] + list(self.W.grad()))
        return self._aux

    def magnetic_field(self, x) -> np.ndarray:
        return np.stack(self.aux(np.asarray(x, float))[:3], axis=-1)

    def effective_potential(self, x) -> np.ndarray:
        return self.aux(np.asarray(x, float))[3]

    # Hamiltonian -------------------------------------------------------------
    def _parts(self, y):
        vals = self._rhs(y[:, :3])
        A = np.stack(vals[0:3], axis=-1)
        dA = np.stack(vals[3:12], axis=-1).reshape(-1, 3, 3)  # dA[n, i, j] = d_j A_i
        V = vals[12]
        dV = np.stack(vals[13:16], axis=-1)
        return A, dA, V, dV

    def hamiltonian(self, pt) -> np.ndarray:
        y = as_states(pt)
        A, _, V, _ = self._parts(y)
        pi = y[:, 3:] + A
        W = V - 0.5 * np.sum(A * A, axis=1)
        return 0.5 * np.sum(pi * pi, axis=1) + W

    def hamiltonian_gauge_form(self, pt) -> np.ndarray:
        y = as_states(pt)
        A, _, V, _ = self._parts(y)
        p = y[:, 3:]
        return 0.5 * np.sum(p * p, axis=1) + np.sum(A * p, axis=1) + V

    def hamiltonian_gradient(self, pt) -> np.ndarray:
        y = as_states(pt)
        A, dA, _, dV = self._parts(y)
        p = y[:, 3:]
        dx = np.einsum("ni,nij->nj", p, dA) + dV
        return np.concatenate([dx, p + A], axis=1)

    def rhs(self, y: np.ndarray) -> np.ndarray:
        """Hamilton's equations (dx/dt, dp/dt) for a single state, math-backed."""
        v = self._rhs.scalar(y[0], y[1], y[2])
        p1, p2, p3 = y[3], y[4], y[5]
        return np.array([
            p1 + v[0], p2 + v[1], p3 + v[2],
            -(p1 * v[3] + p2 * v[6] + p3 * v[9] + v[13]),
            -(p1 * v[4] + p2 * v[7] + p3 * v[10] + v[14]),
            -(p1 * v[5] + p2 * v[8] + p3 * v[11] + v[15]),
        ])

    def reversed(self) -> "MagneticSystem":
        """A -> -A with V kept: the time-reversed partner (pair with p -> -p)."""
        g = GaugePotential([-a for a in self.gauge.components], kind=self.gauge.kind)
        return MagneticSystem(g, self.V, name=self.name + "~reversed",
                              extra_singular=self.singular)


def hamiltonian(sys: MagneticSystem, pt):
    h = sys.hamiltonian(pt)
    return float(h[0]) if isinstance(pt, PhasePoint) or np.ndim(pt) == 1 else h


def hamiltonian_gradient(sys: MagneticSystem, pt):
    g = sys.hamiltonian_gradient(pt)
    return g[0] if isinstance(pt, PhasePoint) or np.ndim(pt) == 1 else g


def gauge_transform(sys: MagneticSystem, chi: Field) -> MagneticSystem:
    """A' = A + grad chi and V' = V + A.grad chi + |grad chi|^2 / 2, so W is unchanged."""
    chi = Field.lift(chi)
    g = chi.grad()
    A = sys.gauge.components
    Vn = sys.V + (A[0] * g[0] + A[1] * g[1] + A[2] * g[2]) \
        + 0.5 * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
    return MagneticSystem(sys.gauge.shifted(g), Vn, name=sys.name,
                          extra_singular=set(sys.singular) | chi.singular_coords())


def shift_momentum(pt, chi: Field):
    """Canonical momentum change matching gauge_transform: p' = p - grad chi."""
    y = as_states(pt).copy()
    g = FieldBundle(Field.lift(chi).grad())(y[:, :3])
    y[:, 3:] -= np.stack(g, axis=-1)
    if isinstance(pt, PhasePoint):
        return PhasePoint.from_array(y[0])
    return y[0] if np.ndim(pt) == 1 else y
