"""Canonical transformations and dimension reductions.

Three reductions are covered:

* Case I with p3 fixed to kappa gives a natural 2D system H0^kappa, and
  kappa-polynomial 2D integrals lift back to 3D by kappa -> p3.
* The uniform field B = (0, gamma, 0) with W = V(x2) is conjugate to a natural
  system K in (X, Y) plus two cyclic directions.
* The constant field B = (a1, a2, 0) with quadratic V1, V2 is conjugate to an
  anisotropic oscillator plus (possibly inverted or frozen) motion along Z.

All maps here send new canonical variables (X, Y, Z, P1, P2, P3) to the
original (x, p); states are arrays of shape (6,) or (n, 6).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import (Field, GaugePotential, MagneticSystem, PhasePoint, StructuralError,
                   as_states)
from .integrals import MomentumPolynomial, bracket_residual

KAPPA_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0)
OMEGA = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]])


def _like(pt, y: np.ndarray):
    """Return y in the same container type as pt."""
    if isinstance(pt, PhasePoint):
        return PhasePoint.from_array(y[0])
    return y[0] if np.ndim(pt) == 1 else y


# ---------------------------------------------------------------------------
# reduced 2D systems

@dataclass
class Reduced2DSystem:
    """H = (p1^2 + p2^2) / 2 + U(x1, x2) on (x1, x2, p1, p2)."""
    potential: Field
    source: str = ""
    parameter: tuple = ()
    label: str = ""
    _embedded: MagneticSystem | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.potential.depends_on(2):
            raise StructuralError("a 2D potential cannot depend on x3")

    @property
    def system(self) -> MagneticSystem:
        """The same Hamiltonian embedded as a field-free 3D system (x3, p3 inert)."""
        if self._embedded is None:
            self._embedded = MagneticSystem(GaugePotential.zero(), self.potential,
                                            name=self.label or "reduced")
        return self._embedded

    @staticmethod
    def embed(pts) -> np.ndarray:
        """(x1, x2, p1, p2) rows -> 6D states with x3 = p3 = 0."""
        q = np.atleast_2d(np.asarray(pts, float))
        if q.shape[1] != 4:
            raise ValueError("2D states have 4 components (x1, x2, p1, p2)")
        y = np.zeros((q.shape[0], 6))
        y[:, [0, 1, 3, 4]] = q
        return y

    def hamiltonian(self, pts) -> np.ndarray:
        y = self.embed(pts)
        self.system.check_point(y[:, :3])
        U = self.potential(y[:, :3])
        return 0.5 * (y[:, 3] ** 2 + y[:, 4] ** 2) + U

    def __call__(self, pts):
        v = self.hamiltonian(pts)
        return float(v[0]) if np.ndim(pts) == 1 else v

    def bracket_residual(self, I: MomentumPolynomial, pts) -> float:
        return bracket_residual(self.system, I, self.embed(pts))

    def describe(self) -> str:
        return "H0 = (p1^2 + p2^2)/2 + " + self.potential.expr()


def _check_case_one(sys: MagneticSystem) -> None:
    A = sys.gauge.components
    if not (A[0].is_zero and A[1].is_zero):
        raise StructuralError("Case I form needs A = (0, 0, A3)")
    for f, what in ((A[2], "A3"), (sys.V, "V")):
        if f.depends_on(2):
            raise StructuralError(f"Case I form needs {what} independent of x3")
        for key in f.terms:
            if key[0] != (0, 0, 0) and key[1] != (0, 0, 0):
                raise StructuralError(f"Case I form needs {what} additively separated in x1, x2")


def reduce_caseI(sys: MagneticSystem, kappa: float) -> Reduced2DSystem:
    """H0^kappa = H(x, p1, p2, p3 = kappa) - kappa^2 / 2 = p^2/2 + kappa A3 + V."""
    _check_case_one(sys)
    U = sys.gauge.components[2] * float(kappa) + sys.V
    return Reduced2DSystem(U, sys.name, ("kappa", float(kappa)),
                           f"{sys.name or 'caseI'}|kappa={kappa:g}")


def caseI_kappa_residual(sys: MagneticSystem, kappa: float, pts, relative: bool = False) -> float:
    """max |H(x, p1, p2, kappa) - kappa^2/2 - H0^kappa(x1, x2, p1, p2)|.

    relative=True divides each difference by 1 + |H0^kappa|.
    """
    red = reduce_caseI(sys, kappa)
    y = as_states(pts).copy()
    y[:, 5] = kappa
    lhs = sys.hamiltonian(y) - 0.5 * kappa * kappa
    rhs = red.hamiltonian(y[:, [0, 1, 3, 4]])
    d = np.abs(lhs - rhs)
    if relative:
        d = d / (1.0 + np.abs(rhs))
    return float(np.max(d))


# ---------------------------------------------------------------------------
# kappa-parametric 2D integrals and the lift kappa -> p3

def _substitute(poly: MomentumPolynomial, repl: Sequence[MomentumPolynomial]) -> MomentumPolynomial:
    """Replace each momentum symbol j of poly by repl[j]."""
    out = MomentumPolynomial()
    for e, c in poly.terms.items():
        term = MomentumPolynomial.of_field(c)
        for j in range(3):
            for _ in range(e[j]):
                term = term * repl[j]
        out = out + term
    return out


class KappaPolynomial:
    """sum_k kappa^k I_k with I_k 2D momentum polynomials in (x1, x2, p1, p2)."""

    def __init__(self, coefficients: Mapping[int, MomentumPolynomial], name: str = ""):
        self.coefficients = {}
        for k, I in coefficients.items():
            if int(k) < 0:
                raise ValueError("kappa powers must be non-negative")
            for e, c in I.terms.items():
                if e[2] or c.depends_on(2):
                    raise StructuralError("2D integrals cannot involve x3 or p3")
            self.coefficients[int(k)] = I
        self.name = name

    @classmethod
    def constant(cls, I: MomentumPolynomial) -> "KappaPolynomial":
        return cls({0: I}, name=I.name)

    @classmethod
    def from_callable(cls, family: Callable[[float], MomentumPolynomial], max_degree: int = 4,
                      name: str = "", tol: float = 1e-9) -> "KappaPolynomial":
        """Recover the kappa polynomial behind family(kappa) coefficient by coefficient.

        A fit of degree max_degree on max_degree + 1 nodes is checked on extra nodes;
        a mismatch means the kappa dependence is not polynomial.
        """
        nodes = np.linspace(-2.0, 2.0, max_degree + 1)
        probes = np.array([-1.7, -0.3, 0.9, 1.3])
        samples = [family(float(k)) for k in np.concatenate([nodes, probes])]
        slots = set()
        for I in samples:
            for e, c in I.terms.items():
                if e[2] or c.depends_on(2):
                    raise StructuralError("2D integrals cannot involve x3 or p3")
                slots |= {(e, key) for key in c.terms}
        V = np.vander(nodes, max_degree + 1, increasing=True)
        Vp = np.vander(probes, max_degree + 1, increasing=True)
        coeffs: dict = {}
        n = len(nodes)
        for e, key in slots:
            vals = np.array([I.terms[e].terms.get(key, 0.0) if e in I.terms else 0.0
                             for I in samples])
            a = np.linalg.solve(V, vals[:n])
            scale = 1.0 + np.max(np.abs(vals))
            if np.max(np.abs(Vp @ a - vals[n:])) > tol * scale:
                raise ValueError("kappa dependence is not polynomial "
                                 f"(up to degree {max_degree})")
            for k, ak in enumerate(a):
                if abs(ak) > 1e-13 * scale:
                    coeffs.setdefault(k, {}).setdefault(e, {})[key] = float(ak)
        polys = {k: MomentumPolynomial({e: Field(t) for e, t in d.items()})
                 for k, d in coeffs.items()}
        return cls(polys or {0: MomentumPolynomial()}, name=name)

    @property
    def degree(self) -> int:
        return max(self.coefficients, default=0)

    def at(self, kappa: float) -> MomentumPolynomial:
        out = MomentumPolynomial()
        for k, I in self.coefficients.items():
            out = out + I * (float(kappa) ** k)
        return out.named(self.name)


def lift_integral(I2d, sys: MagneticSystem | None = None, name: str = "") -> MomentumPolynomial:
    """kappa -> p3 (canonical) on a Case I system.

    I2d is a KappaPolynomial, a plain 2D MomentumPolynomial (kappa independent) or
    a callable kappa -> MomentumPolynomial whose kappa dependence must be
    polynomial.  The 2D momenta become the canonical p1, p2 of sys.
    """
    if callable(I2d) and not isinstance(I2d, (KappaPolynomial, MomentumPolynomial)):
        I2d = KappaPolynomial.from_callable(I2d)
    if isinstance(I2d, MomentumPolynomial):
        I2d = KappaPolynomial.constant(I2d)
    gauge = sys.gauge if sys is not None else GaugePotential.zero()
    if sys is not None:
        _check_case_one(sys)
    p = [MomentumPolynomial.canonical_p(j, gauge) for j in range(3)]
    out = MomentumPolynomial()
    for k, I in I2d.coefficients.items():
        out = out + _substitute(I, p) * (p[2] ** k)
    return out.named(name or I2d.name)


def prop21_check(sys: MagneticSystem, I2d: KappaPolynomial, pts,
                 grid: Sequence[float] = KAPPA_GRID) -> tuple:
    """(max 2D residual over the kappa grid, max 3D residual of the lift).

    The 2D residual uses {H0^kappa, I2d(kappa)} at the (x1, x2, p1, p2) part of the
    sample; the 3D residual uses {H, lift} at the same points with p3 = kappa.
    """
    y = as_states(pts)
    lifted = lift_integral(I2d, sys)
    r2 = r3 = 0.0
    for kappa in grid:
        red = reduce_caseI(sys, kappa)
        r2 = max(r2, red.bracket_residual(I2d.at(kappa), y[:, [0, 1, 3, 4]]))
        yk = y.copy()
        yk[:, 5] = kappa
        r3 = max(r3, bracket_residual(sys, lifted, yk))
    return r2, r3


def table1_2d(kind: str, c: Sequence) -> tuple:
    """(potential U^kappa as a callable, I3^kappa as a KappaPolynomial) of a Table 1 row.

    c holds (a_j, b_j) pairs with c_j = a_j kappa + b_j.
    """
    x1, x2 = Field.coord(0), Field.coord(1)
    ix1 = Field.monomial((-2, 0, 0))
    ix2 = Field.monomial((0, -2, 0))
    p1, p2 = MomentumPolynomial.pi(0), MomentumPolynomial.pi(1)
    L3 = p2 * x1 - p1 * x2
    if kind == "E1":
        shapes = (x1 * x1 + x2 * x2, ix1, ix2)
        parts = (MomentumPolynomial(), 2.0 * x2 * x2 * ix1, 2.0 * x1 * x1 * ix2)
        base = L3 * L3
    elif kind == "E2":
        shapes = (4.0 * x1 * x1 + x2 * x2, x1, ix2)
        parts = (-2.0 * x1 * x2 * x2, -0.5 * x2 * x2, 2.0 * x1 * ix2)
        base = p2 * L3
    elif kind == "E3":
        shapes = (x1 * x1 + x2 * x2, x1, x2)
        parts = (2.0 * x1 * x2, x2, x1)
        base = p1 * p2
    else:
        raise ValueError(f"unknown Table 1 row {kind!r}")
    parts = [MomentumPolynomial.of_field(q) if isinstance(q, Field) else q for q in parts]
    a = [float(t[0]) for t in c]
    b = [float(t[1]) for t in c]
    I = KappaPolynomial({0: base + sum((parts[j] * b[j] for j in range(3)), MomentumPolynomial()),
                         1: sum((parts[j] * a[j] for j in range(3)), MomentumPolynomial())},
                        name="I3")

    def potential(kappa: float) -> Field:
        return sum((shapes[j] * (a[j] * kappa + b[j]) for j in range(3)), Field())

    return potential, I


# ---------------------------------------------------------------------------
# linear canonical maps

@dataclass(frozen=True)
class LinearCanonicalMap:
    """old = J new + offset, a constant-Jacobian change of canonical variables."""
    J: np.ndarray
    offset: np.ndarray = field(default_factory=lambda: np.zeros(6))
    label: str = ""

    def __call__(self, pt_new):
        y = as_states(pt_new)
        return _like(pt_new, y @ self.J.T + self.offset)

    def inverse(self, pt_old):
        y = as_states(pt_old)
        return _like(pt_old, np.linalg.solve(self.J, (y - self.offset).T).T)

    def jacobian(self, pt_new=None) -> np.ndarray:
        return self.J.copy()

    def then(self, other: "LinearCanonicalMap") -> "LinearCanonicalMap":
        """Apply self first, then other: new -> self -> other."""
        return LinearCanonicalMap(other.J @ self.J, other.J @ self.offset + other.offset,
                                  f"{other.label} o {self.label}".strip(" o"))


def symplectic_residual(J: np.ndarray) -> float:
    """max |J^T Omega J - Omega| for a 6x6 Jacobian in (x, p) ordering."""
    J = np.asarray(J, float)
    return float(np.max(np.abs(J.T @ OMEGA @ J - OMEGA)))


def numerical_jacobian(f: Callable, y: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian (exact up to roundoff for affine maps)."""
    y = np.asarray(y, float)
    cols = []
    for j in range(6):
        e = np.zeros(6)
        e[j] = h
        cols.append((np.asarray(f(y + e)) - np.asarray(f(y - e))) / (2 * h))
    return np.stack(cols, axis=1)


def translation(d: Sequence[float]) -> LinearCanonicalMap:
    """x = x' + d, p unchanged."""
    off = np.zeros(6)
    off[:3] = np.asarray(d, float)
    return LinearCanonicalMap(np.eye(6), off, "translation")


def momentum_shift(s: Sequence[float]) -> LinearCanonicalMap:
    """p = p' + s: the momentum side of a gauge change with linear chi = -s.x."""
    off = np.zeros(6)
    off[3:] = np.asarray(s, float)
    return LinearCanonicalMap(np.eye(6), off, "momentum shift")


def _prop32_matrix(gamma: float) -> LinearCanonicalMap:
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    J = np.eye(6)
    J[0, 5] = 1.0 / gamma   # x1 = X + P3 / gamma
    J[2, 3] = 1.0 / gamma   # x3 = Z + P1 / gamma
    return LinearCanonicalMap(J, label="prop32")


def prop32_map(gamma: float, pt_new):
    """x1 = X + P3/gamma, x2 = Y, x3 = Z + P1/gamma, p = P."""
    return _prop32_matrix(float(gamma))(pt_new)


def prop32_jacobian(gamma: float, pt_new=None) -> np.ndarray:
    return _prop32_matrix(float(gamma)).J.copy()


def prop32_K(gamma: float, VY: Field, pt_new) -> np.ndarray:
    """K = (P1^2 + P2^2)/2 + gamma^2 X^2 / 2 + V(Y); VY is a field in x2 only."""
    y = as_states(pt_new)
    return 0.5 * (y[:, 3] ** 2 + y[:, 4] ** 2) + 0.5 * gamma * gamma * y[:, 0] ** 2 \
        + VY(np.column_stack([np.zeros(len(y)), y[:, 1], np.zeros(len(y))]))


def _uniform_gamma(sys: MagneticSystem) -> float:
    A = sys.gauge.components
    if not (A[0].is_zero and A[1].is_zero):
        raise StructuralError("prop32 needs the gauge A = (0, 0, -gamma x1)")
    g = -A[2].terms.get(((1, 0, 0), (0, 0, 0), (0, 0, 0)), 0.0)
    if g == 0 or not A[2].close_to(Field.coord(0, -g)):
        raise StructuralError("prop32 needs the gauge A = (0, 0, -gamma x1)")
    if sys.W.depends_on(0) or sys.W.depends_on(2):
        raise StructuralError("prop32 needs an effective potential W = V(x2)")
    return g


def reduce_prop32(sys: MagneticSystem, gamma: float | None = None) -> Reduced2DSystem:
    """The natural 2D system K on (X, Y, P1, P2) conjugate to a uniform-field system."""
    g = _uniform_gamma(sys)
    if gamma is not None and abs(float(gamma) - g) > 1e-12 * max(1.0, abs(g)):
        raise StructuralError(f"system has gamma = {g:g}, not {gamma:g}")
    U = Field.monomial((2, 0, 0), 0.5 * g * g) + sys.W
    return Reduced2DSystem(U, sys.name, ("gamma", g), f"{sys.name or 'uniformB'}|K")


def prop32_residual(sys: MagneticSystem, pts_new) -> float:
    """max |H(prop32_map(pt)) - K(pt)| over the sample."""
    g = _uniform_gamma(sys)
    y = as_states(pts_new)
    K = prop32_K(g, sys.W, y)
    H = sys.hamiltonian(prop32_map(g, y))
    return float(np.max(np.abs(H - K)))


# ---------------------------------------------------------------------------
# constant field (a1, a2, 0) with quadratic potentials

def sec8_coefficient(a1: float, a2: float, v12: float, v22: float) -> float:
    return 1.0 - a1 * a1 / (2 * v22) - a2 * a2 / (2 * v12)


def _sec8_matrix(a1, a2, v12, v22, scaled: bool = False) -> tuple:
    if v12 == 0 or v22 == 0:
        raise ValueError("v12 and v22 must both be nonzero")
    k = sec8_coefficient(a1, a2, v12, v22)
    degenerate = abs(k) < 1e-12
    lam_k = 1.0 if degenerate else math.sqrt(abs(k))
    lam = lam_k if scaled else 1.0
    b1, b2 = a2 / (2 * v12), a1 / (2 * v22)
    # scaling step P3 = P3~ / lam, Z = lam Z~ applied first when requested
    S = np.diag([1.0, 1.0, lam, 1.0, 1.0, 1.0 / lam])
    J = np.eye(6)
    J[0, 5] = b1            # x1 = X + a2 P3 / (2 v12)
    J[1, 5] = -b2           # x2 = Y - a1 P3 / (2 v22)
    J[2, 3] = b1            # x3 = Z + a2 P1 / (2 v12) - a1 P2 / (2 v22)
    J[2, 4] = -b2
    meta = {"p3_coefficient": k, "degenerate": degenerate, "inverted": k < 0 and not degenerate,
            "lambda": lam_k, "extra_invariant": "Z" if degenerate else None}
    return LinearCanonicalMap(J @ S, label="sec8"), meta


def sec8_map(a1: float, a2: float, v12: float, v22: float, pt_new, scaled: bool = False):
    """Constant-field reduction map; scaled=True also applies the P3 rescaling."""
    m, _ = _sec8_matrix(float(a1), float(a2), float(v12), float(v22), scaled)
    return m(pt_new)


def sec8_jacobian(a1, a2, v12, v22, pt_new=None, scaled: bool = False) -> np.ndarray:
    return _sec8_matrix(float(a1), float(a2), float(v12), float(v22), scaled)[0].J.copy()


def sec8_metadata(a1, a2, v12, v22) -> dict:
    return _sec8_matrix(float(a1), float(a2), float(v12), float(v22))[1]


def sec8_target(a1, a2, v12, v22, pt_new, scaled: bool = False) -> np.ndarray:
    """(P1^2 + P2^2 + k P3^2)/2 + v12 X^2 + v22 Y^2, k = +-1 after scaling."""
    y = as_states(pt_new)
    _, meta = _sec8_matrix(float(a1), float(a2), float(v12), float(v22), scaled)
    k = meta["p3_coefficient"]
    if scaled and not meta["degenerate"]:
        k = math.copysign(1.0, k)
    return 0.5 * (y[:, 3] ** 2 + y[:, 4] ** 2 + k * y[:, 5] ** 2) \
        + v12 * y[:, 0] ** 2 + v22 * y[:, 1] ** 2


@dataclass
class Sec8Reduction:
    """Full reduction of the constant-field family with linear terms v11, v21.

    The linear terms are absorbed by a translation.  The translation leaves a
    constant `shift` in A3, so H equals the target form plus shift * P3 plus the
    constant `offset`; P3 is conserved, so the shift only drifts Z uniformly.
    """
    a1: float
    a2: float
    v11: float
    v12: float
    v21: float
    v22: float
    scaled: bool = False

    @property
    def shift(self) -> float:
        return self.a2 * self.v11 / (2 * self.v12) - self.a1 * self.v21 / (2 * self.v22)

    @property
    def translation(self) -> np.ndarray:
        return np.array([-self.v11 / (2 * self.v12), -self.v21 / (2 * self.v22), 0.0])

    @property
    def offset(self) -> float:
        d = self.translation
        return -self.v12 * d[0] ** 2 - self.v22 * d[1] ** 2

    @property
    def map(self) -> LinearCanonicalMap:
        core, _ = _sec8_matrix(self.a1, self.a2, self.v12, self.v22, self.scaled)
        return core.then(translation(self.translation))

    @property
    def metadata(self) -> dict:
        meta = dict(sec8_metadata(self.a1, self.a2, self.v12, self.v22))
        meta["shift"] = self.shift
        meta["z_is_invariant"] = meta["degenerate"] and abs(self.shift) < 1e-12
        return meta

    def target(self, pt_new) -> np.ndarray:
        y = as_states(pt_new)
        _, meta = _sec8_matrix(self.a1, self.a2, self.v12, self.v22, self.scaled)
        lam = meta["lambda"] if self.scaled else 1.0
        return sec8_target(self.a1, self.a2, self.v12, self.v22, y, self.scaled) \
            + self.shift * y[:, 5] / lam + self.offset

    def residual(self, sys: MagneticSystem, pts_new) -> float:
        y = as_states(pts_new)
        return float(np.max(np.abs(sys.hamiltonian(self.map(y)) - self.target(y))))

    def reduced(self) -> Reduced2DSystem:
        U = Field.monomial((2, 0, 0), self.v12) + Field.monomial((0, 2, 0), self.v22)
        return Reduced2DSystem(U, "sec8.quadratic",
                               ("p3_coefficient", sec8_coefficient(self.a1, self.a2,
                                                                   self.v12, self.v22)),
                               "sec8|oscillator")
