"""Momentum polynomials, Poisson brackets, determining-equation residuals and
linear-dependence fits.

A `MomentumPolynomial` is a polynomial in the covariant momenta pi_j = p_j + A_j
with coefficient fields in x.  Its value is gauge covariant by construction: the
coefficients never refer to the gauge, only to x and pi.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import mpmath
import numpy as np

from .core import (Field, FieldBundle, MagneticSystem, PhasePoint, as_states,
                   GaugePotential)

MAX_DEGREE = 4
EPS = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}

_E = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


class DependenceError(ValueError):
    """Design matrix of a dependence fit is rank deficient."""


def _addm(a, b):
    return tuple(i + j for i, j in zip(a, b))


class MomentumPolynomial:
    """sum_e c_e(x) * pi^e over multi-indices e with |e| <= 4."""

    def __init__(self, terms: Mapping | None = None, name: str = ""):
        t = {}
        for e, c in (terms or {}).items():
            e = tuple(int(i) for i in e)
            if len(e) != 3 or min(e) < 0:
                raise ValueError(f"bad multi-index {e}")
            if sum(e) > MAX_DEGREE:
                raise ValueError(f"degree {sum(e)} exceeds the cap {MAX_DEGREE}")
            c = Field.lift(c)
            t[e] = t[e] + c if e in t else c
        self.terms = {e: c for e, c in t.items() if not c.is_zero}
        self.name = name
        self._bundle = None

    # constructors -------------------------------------------------------------
    @classmethod
    def const(cls, a: float) -> "MomentumPolynomial":
        return cls({(0, 0, 0): a})

    @classmethod
    def of_field(cls, f: Field, name: str = "") -> "MomentumPolynomial":
        return cls({(0, 0, 0): f}, name=name)

    @classmethod
    def pi(cls, j: int) -> "MomentumPolynomial":
        return cls({_E[j]: 1.0})

    @classmethod
    def canonical_p(cls, j: int, gauge: GaugePotential) -> "MomentumPolynomial":
        """p_j = pi_j - A_j(x) written in covariant form."""
        return cls({_E[j]: 1.0, (0, 0, 0): -gauge.components[j]}, name=f"p{j + 1}")

    @classmethod
    def coord(cls, j: int) -> "MomentumPolynomial":
        return cls({(0, 0, 0): Field.coord(j)}, name=f"x{j + 1}")

    @classmethod
    def angular(cls, j: int) -> "MomentumPolynomial":
        """l_j = eps_jkl x_k pi_l."""
        t = {}
        for (a, k, l), s in EPS.items():
            if a == j:
                t[_E[l]] = t.get(_E[l], Field()) + Field.coord(k, float(s))
        return cls(t, name=f"l{j + 1}")

    @classmethod
    def hamiltonian(cls, sys: MagneticSystem) -> "MomentumPolynomial":
        t = {(2, 0, 0): 0.5, (0, 2, 0): 0.5, (0, 0, 2): 0.5, (0, 0, 0): sys.W}
        return cls(t, name="H")

    # algebra --------------------------------------------------------------------
    def __add__(self, other):
        other = _lift(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t[e] + c if e in t else c
        return MomentumPolynomial(t)

    __radd__ = __add__

    def __neg__(self):
        return MomentumPolynomial({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Field):
            return MomentumPolynomial({e: c * other for e, c in self.terms.items()})
        if not isinstance(other, MomentumPolynomial):
            s = float(other)
            return MomentumPolynomial({e: c * s for e, c in self.terms.items()})
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _addm(e1, e2)
                if sum(e) > MAX_DEGREE:
                    raise ValueError(f"product degree exceeds the cap {MAX_DEGREE}")
                t[e] = t[e] + c1 * c2 if e in t else c1 * c2
        return MomentumPolynomial(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = MomentumPolynomial.const(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def named(self, name: str) -> "MomentumPolynomial":
        out = MomentumPolynomial(self.terms, name=name)
        return out

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def homogeneous(self, d: int) -> "MomentumPolynomial":
        return MomentumPolynomial({e: c for e, c in self.terms.items() if sum(e) == d})

    def coefficient(self, e) -> Field:
        return self.terms.get(tuple(e), Field())

    def d_pi(self, j: int) -> "MomentumPolynomial":
        t = {}
        for e, c in self.terms.items():
            if e[j] > 0:
                ne = list(e)
                ne[j] -= 1
                t[tuple(ne)] = c * float(e[j])
        return MomentumPolynomial(t)

    def d_x(self, j: int) -> "MomentumPolynomial":
        """Derivative with respect to x_j at fixed covariant momenta."""
        return MomentumPolynomial({e: c.diff(j) for e, c in self.terms.items()})

    def close_to(self, other: "MomentumPolynomial", tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(self.coefficient(e).close_to(other.coefficient(e), tol) for e in keys)

    def singular_coords(self) -> set:
        out = set()
        for c in self.terms.values():
            out |= c.singular_coords()
        return out

    # numerics ---------------------------------------------------------------------
    def _compiled(self):
        if self._bundle is None:
            keys = sorted(self.terms)
            fields = []
            for e in keys:
                c = self.terms[e]
                fields += [c, c.diff(0), c.diff(1), c.diff(2)]
            self._bundle = (keys, FieldBundle(fields) if fields else None)
        return self._bundle

    def _eval_parts(self, sys: MagneticSystem, y: np.ndarray):
        keys, bundle = self._compiled()
        A, dA, _, _ = sys._parts(y)
        pi = y[:, 3:] + A
        n = y.shape[0]
        val = np.zeros(n)
        dxc = np.zeros((n, 3))      # explicit x derivative at fixed pi
        dpi = np.zeros((n, 3))
        if bundle is None:
            return val, dxc, dpi, dA
        vals = bundle(y[:, :3])
        for i, e in enumerate(keys):
            c = vals[4 * i]
            mono = pi[:, 0] ** e[0] * pi[:, 1] ** e[1] * pi[:, 2] ** e[2]
            val += c * mono
            for j in range(3):
                dxc[:, j] += vals[4 * i + 1 + j] * mono
                if e[j] > 0:
                    ee = list(e)
                    ee[j] -= 1
                    dpi[:, j] += e[j] * c * (pi[:, 0] ** ee[0] * pi[:, 1] ** ee[1]
                                             * pi[:, 2] ** ee[2])
        return val, dxc, dpi, dA

    def values(self, sys: MagneticSystem, pts) -> np.ndarray:
        y = as_states(pts)
        sys.check_point(y[:, :3])
        return self._eval_parts(sys, y)[0]

    def values_precise(self, sys: MagneticSystem, pts, dps: int = 40) -> np.ndarray:
        """values() with dps-digit arithmetic, for integrals whose terms cancel heavily.

        The states are taken as exact binary numbers; the result is rounded once.
        """
        y = as_states(pts)
        sys.check_point(y[:, :3])
        keys, bundle = self._compiled()
        gauge = FieldBundle(sys.gauge.components)
        out = np.zeros(len(y))
        if bundle is None:
            return out
        with mpmath.workdps(dps):
            for n, row in enumerate(y):
                A = gauge.precise(*row[:3])
                pi = [mpmath.mpf(row[3 + j]) + A[j] for j in range(3)]
                vals = bundle.precise(*row[:3])
                s = mpmath.mpf(0)
                for i, e in enumerate(keys):
                    s += vals[4 * i] * pi[0] ** e[0] * pi[1] ** e[1] * pi[2] ** e[2]
                out[n] = float(s)
        return out

    def gradient(self, sys: MagneticSystem, pts) -> np.ndarray:
        """(dI/dx, dI/dp) in canonical variables, shape (n, 6)."""
        y = as_states(pts)
        sys.check_point(y[:, :3])
        _, dxc, dpi, dA = self._eval_parts(sys, y)
        dx = dxc + np.einsum("nk,nkj->nj", dpi, dA)
        return np.concatenate([dx, dpi], axis=1)

    def __repr__(self):
        return f"MomentumPolynomial({self.name or '?'}, degree={self.degree}, terms={len(self.terms)})"


def _lift(obj) -> MomentumPolynomial:
    if isinstance(obj, MomentumPolynomial):
        return obj
    if isinstance(obj, Field):
        return MomentumPolynomial.of_field(obj)
    return MomentumPolynomial.const(float(obj))


# ---------------------------------------------------------------------------
# evaluation and brackets

def _as_poly(f, sys: MagneticSystem) -> MomentumPolynomial:
    if isinstance(f, MagneticSystem):
        return MomentumPolynomial.hamiltonian(f)
    return f


def evaluate(I: MomentumPolynomial, sys: MagneticSystem, pt):
    v = I.values(sys, pt)
    return float(v[0]) if isinstance(pt, PhasePoint) or np.ndim(pt) == 1 else v


def gradient(f, sys: MagneticSystem, pts) -> np.ndarray:
    if isinstance(f, MagneticSystem):
        y = as_states(pts)
        sys.check_point(y[:, :3])
        return f.hamiltonian_gradient(y)
    return f.gradient(sys, pts)


def poisson(f, g, sys: MagneticSystem, pt):
    """{f, g} = sum_j df/dx_j dg/dp_j - dg/dx_j df/dp_j.

    f and g are momentum polynomials; passing the system itself stands for H.
    """
    gf = gradient(f, sys, pt)
    gg = gradient(g, sys, pt)
    v = np.sum(gf[:, :3] * gg[:, 3:], axis=1) - np.sum(gg[:, :3] * gf[:, 3:], axis=1)
    return float(v[0]) if isinstance(pt, PhasePoint) or np.ndim(pt) == 1 else v


def bracket(f, g, sys: MagneticSystem) -> MomentumPolynomial:
    """Exact bracket as a momentum polynomial, using {pi_i, pi_j} = -eps_ijk B_k."""
    f, g = _as_poly(f, sys), _as_poly(g, sys)
    out = MomentumPolynomial()
    for j in range(3):
        out = out + f.d_x(j) * g.d_pi(j) - g.d_x(j) * f.d_pi(j)
    B = sys.B
    for (i, j, k), s in EPS.items():
        if B[k].is_zero:
            continue
        out = out + (f.d_pi(i) * g.d_pi(j)) * (B[k] * (-float(s)))
    return out


def bracket_residual(sys: MagneticSystem, I, points) -> float:
    """max |{H, I}| / (1 + |grad H| |grad I|) over the sample."""
    y = as_states(points)
    if y.shape[0] == 0:
        raise ValueError("bracket_residual needs at least one admissible point")
    gh = gradient(sys, sys, y)
    gi = gradient(I, sys, y)
    br = np.sum(gh[:, :3] * gi[:, 3:], axis=1) - np.sum(gi[:, :3] * gh[:, 3:], axis=1)
    norm = 1.0 + np.linalg.norm(gh, axis=1) * np.linalg.norm(gi, axis=1)
    return float(np.max(np.abs(br) / norm))


# ---------------------------------------------------------------------------
# structured second-order ansatz

_PAIRS = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
_H_INDEX = [(2, 0, 0), (0, 2, 0), (0, 0, 2)]
_N_INDEX = [(0, 1, 1), (1, 0, 1), (1, 1, 0)]


def _upper(a) -> np.ndarray:
    """Accept a 3x3 array (0-based) or {(i, j): v} with 1-based keys as in alpha_33."""
    out = np.zeros((3, 3))
    if a is None:
        return out
    if isinstance(a, Mapping):
        for (i, j), v in a.items():
            if not (1 <= i <= 3 and 1 <= j <= 3):
                raise ValueError(f"index ({i}, {j}) out of range; mapping keys are 1-based")
            out[i - 1, j - 1] = float(v)
        return out
    return np.array(a, float).reshape(3, 3)


@dataclass
class QuadraticIntegralSpec:
    """X = sum alpha_ij l_i l_j + sum beta_ij pi_i l_j + sum gamma_ij pi_i pi_j + s.pi + m.

    alpha and gamma use the upper triangle (i <= j).  Since pi.l = 0 the diagonal
    of beta is only defined up to a common shift; the stored form is traceless.
    """

    alpha: np.ndarray = None
    beta: np.ndarray = None
    gamma: np.ndarray = None
    s: tuple = (None, None, None)
    m: Field = None
    name: str = ""

    def __post_init__(self):
        self.alpha = np.triu(_upper(self.alpha))
        self.gamma = np.triu(_upper(self.gamma))
        b = _upper(self.beta)
        b = b - np.eye(3) * (np.trace(b) / 3.0)
        b[np.abs(b) < 1e-15] = 0.0
        self.beta = b
        self.s = tuple(Field() if f is None else Field.lift(f) for f in self.s)
        self.m = Field() if self.m is None else Field.lift(self.m)

    @property
    def reduced(self) -> bool:
        """True when gamma_11 = gamma_22 = gamma_33 = 0."""
        return bool(np.all(np.diag(self.gamma) == 0))

    def leading_polynomial(self) -> MomentumPolynomial:
        l = [MomentumPolynomial.angular(j) for j in range(3)]
        pi = [MomentumPolynomial.pi(j) for j in range(3)]
        out = MomentumPolynomial()
        for i, j in _PAIRS:
            if self.alpha[i, j]:
                out = out + (l[i] * l[j]) * self.alpha[i, j]
            if self.gamma[i, j]:
                out = out + (pi[i] * pi[j]) * self.gamma[i, j]
        for i in range(3):
            for j in range(3):
                if self.beta[i, j]:
                    out = out + (pi[i] * l[j]) * self.beta[i, j]
        return out

    def leading_fields(self) -> tuple:
        lp = self.leading_polynomial()
        return (tuple(lp.coefficient(e) for e in _H_INDEX),
                tuple(lp.coefficient(e) for e in _N_INDEX))

    def to_polynomial(self) -> MomentumPolynomial:
        out = self.leading_polynomial()
        for j in range(3):
            out = out + MomentumPolynomial({_E[j]: self.s[j]})
        return (out + MomentumPolynomial.of_field(self.m)).named(self.name)

    @classmethod
    def from_polynomial(cls, poly: MomentumPolynomial, name: str = "") -> "QuadraticIntegralSpec":
        if poly.degree > 2:
            raise ValueError("only polynomials of degree <= 2 have a quadratic spec")
        lead = poly.homogeneous(2)
        for c in lead.terms.values():
            if not c.is_polynomial(2):
                raise ValueError("leading coefficients must be polynomials of degree <= 2")
        # unknowns: 6 alpha, 9 beta, 6 gamma; equations: monomial coefficients
        basis = []
        for i, j in _PAIRS:
            basis.append(("a", i, j, MomentumPolynomial.angular(i) * MomentumPolynomial.angular(j)))
        for i in range(3):
            for j in range(3):
                basis.append(("b", i, j, MomentumPolynomial.pi(i) * MomentumPolynomial.angular(j)))
        for i, j in _PAIRS:
            basis.append(("g", i, j, MomentumPolynomial.pi(i) * MomentumPolynomial.pi(j)))
        rows = set()
        for _, _, _, p in basis:
            for e, c in p.terms.items():
                rows |= {(e, k) for k in c.terms}
        for e, c in lead.terms.items():
            rows |= {(e, k) for k in c.terms}
        rows = sorted(rows)
        idx = {r: n for n, r in enumerate(rows)}
        M = np.zeros((len(rows), len(basis)))
        rhs = np.zeros(len(rows))
        for col, (_, _, _, p) in enumerate(basis):
            for e, c in p.terms.items():
                for k, v in c.terms.items():
                    M[idx[(e, k)], col] += v
        for e, c in lead.terms.items():
            for k, v in c.terms.items():
                rhs[idx[(e, k)]] += v
        sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.max(np.abs(M @ sol - rhs), initial=0.0) > 1e-9 * (1 + np.max(np.abs(rhs), initial=0)):
            raise ValueError("leading part is not in the Euclidean enveloping form")
        sol[np.abs(sol) < 1e-13] = 0.0
        alpha, beta, gamma = np.zeros((3, 3)), np.zeros((3, 3)), np.zeros((3, 3))
        for (kind, i, j, _), v in zip(basis, sol):
            {"a": alpha, "b": beta, "g": gamma}[kind][i, j] = v
        s = tuple(poly.coefficient(_E[j]) for j in range(3))
        return cls(alpha=alpha, beta=beta, gamma=gamma, s=s,
                   m=poly.coefficient((0, 0, 0)), name=name or poly.name)


def leading_from_constants(spec: QuadraticIntegralSpec, x) -> tuple:
    """h_j(x), n_j(x) of the expanded leading part at the point x."""
    h, n = spec.leading_fields()
    b = FieldBundle(list(h) + list(n))
    v = b(np.asarray(x, float), check=False)
    return np.array([float(t) for t in v[:3]]), np.array([float(t) for t in v[3:]])


# ---------------------------------------------------------------------------
# determining equations

def _ordered(d: dict) -> dict:
    return dict(d)


def determining_fields(sys: MagneticSystem, spec: QuadraticIntegralSpec) -> dict:
    """name -> (lhs - rhs field, list of term fields for scaling)."""
    (h1, h2, h3), (n1, n2, n3) = spec.leading_fields()
    h, n = (h1, h2, h3), (n1, n2, n3)
    s, m = spec.s, spec.m
    B = sys.B
    W = sys.W
    dW = W.grad()
    d = lambda f, j: f.diff(j)
    out = {}
    # third order: the Euclidean structure of the leading part
    third = [
        (d(h1, 0), []), (d(h1, 1), [d(n3, 0)]), (d(h1, 2), [d(n2, 0)]),
        (d(h2, 0), [d(n3, 1)]), (d(h2, 1), []), (d(h2, 2), [d(n1, 1)]),
        (d(h3, 0), [d(n2, 2)]), (d(h3, 1), [d(n1, 2)]), (d(h3, 2), []),
    ]
    for k, (lhs, rhs) in enumerate(third, start=1):
        r = lhs
        for t in rhs:
            r = r + t
        out[f"3ord-{k}"] = (r, [lhs] + rhs)
    out["3ord-10"] = (d(n1, 0) + d(n2, 1) + d(n3, 2), [d(n1, 0), d(n2, 1), d(n3, 2)])
    R = second_order_rhs(sys, spec)
    lhs2 = {
        "11": d(s[0], 0), "22": d(s[1], 1), "33": d(s[2], 2),
        "12": d(s[0], 1) + d(s[1], 0), "13": d(s[0], 2) + d(s[2], 0),
        "23": d(s[2], 1) + d(s[1], 2),
    }
    for k, key in enumerate(["11", "22", "33", "12", "13", "23"], start=1):
        rhs, terms = R[key]
        out[f"2ord-{k}"] = (lhs2[key] - rhs, [lhs2[key]] + terms)
    F = first_order_rhs(sys, spec)
    for j in range(3):
        rhs, terms = F[j]
        out[f"1ord-{j + 1}"] = (d(m, j) - rhs, [d(m, j)] + terms)
    t0 = [s[j] * dW[j] for j in range(3)]
    out["0ord"] = (t0[0] + t0[1] + t0[2], t0)
    return out


def second_order_rhs(sys: MagneticSystem, spec: QuadraticIntegralSpec) -> dict:
    (h1, h2, h3), (n1, n2, n3) = spec.leading_fields()
    B1, B2, B3 = sys.B
    e = {
        "11": [n2 * B2, -(n3 * B3)],
        "22": [n3 * B3, -(n1 * B1)],
        "33": [n1 * B1, -(n2 * B2)],
        "12": [n1 * B2, -(n2 * B1), 2.0 * (h1 - h2) * B3],
        "13": [n3 * B1, -(n1 * B3), 2.0 * (h3 - h1) * B2],
        "23": [n2 * B3, -(n3 * B2), 2.0 * (h2 - h3) * B1],
    }
    return {k: (_sum(v), v) for k, v in e.items()}


def first_order_rhs(sys: MagneticSystem, spec: QuadraticIntegralSpec) -> list:
    (h1, h2, h3), (n1, n2, n3) = spec.leading_fields()
    s1, s2, s3 = spec.s
    B1, B2, B3 = sys.B
    W1, W2, W3 = sys.W.grad()
    e = [
        [2.0 * h1 * W1, n3 * W2, n2 * W3, s3 * B2, -(s2 * B3)],
        [n3 * W1, 2.0 * h2 * W2, n1 * W3, s1 * B3, -(s3 * B1)],
        [n2 * W1, n1 * W2, 2.0 * h3 * W3, s2 * B1, -(s1 * B2)],
    ]
    return [(_sum(v), v) for v in e]


def _sum(fields):
    out = Field()
    for f in fields:
        out = out + f
    return out


def compatibility_fields(sys: MagneticSystem, spec: QuadraticIntegralSpec) -> dict:
    """Integrability conditions of the second- and first-order blocks.

    The six identities among third derivatives of s are applied to the right-hand
    sides of the second-order block, giving conditions on B, h and n alone.  The
    three symmetry conditions d_i F_j = d_j F_i are applied to the right-hand side
    F of the first-order block.
    """
    R = {k: v[0] for k, v in second_order_rhs(sys, spec).items()}
    d = lambda f, *js: _dd(f, js)
    out = {}
    c1 = [d(R["11"], 1, 1), d(R["22"], 0, 0), -d(R["12"], 0, 1)]
    c2 = [d(R["11"], 2, 2), d(R["33"], 0, 0), -d(R["13"], 0, 2)]
    c3 = [d(R["22"], 2, 2), d(R["33"], 1, 1), -d(R["23"], 1, 2)]
    c4 = [d(R["12"], 0, 2), -2.0 * d(R["11"], 1, 2), d(R["13"], 0, 1), -d(R["23"], 0, 0)]
    c5 = [d(R["12"], 1, 2), -2.0 * d(R["22"], 0, 2), d(R["23"], 0, 1), -d(R["13"], 1, 1)]
    c6 = [d(R["13"], 1, 2), -2.0 * d(R["33"], 0, 1), d(R["23"], 0, 2), -d(R["12"], 2, 2)]
    for k, terms in enumerate([c1, c2, c3, c4, c5, c6], start=1):
        out[f"comp-s-{k}"] = (_sum(terms), terms)
    F = [v[0] for v in first_order_rhs(sys, spec)]
    for k, (i, j) in enumerate([(0, 1), (0, 2), (1, 2)], start=1):
        a, b = F[j].diff(i), F[i].diff(j)
        out[f"comp-m-{k}"] = (a - b, [a, -b])
    return out


def _dd(f: Field, js) -> Field:
    for j in js:
        f = f.diff(j)
    return f


def _evaluate_named(named: dict, x, normalized: bool) -> dict:
    x = np.asarray(x, float)
    names = list(named)
    fields = []
    spans = []
    for nm in names:
        r, terms = named[nm]
        spans.append((len(fields), len(terms)))
        fields.append(r)
        fields += terms
    vals = FieldBundle(fields)(x)
    out = {}
    for nm, (i0, nt) in zip(names, spans):
        r = np.asarray(vals[i0])
        if normalized:
            scale = 1.0 + sum(np.abs(vals[i0 + 1 + k]) for k in range(nt))
            r = np.abs(r) / scale
        out[nm] = float(r) if r.ndim == 0 else r
    return out


def determining_residuals(sys: MagneticSystem, spec: QuadraticIntegralSpec, x,
                          normalized: bool = False) -> dict:
    """Residual (lhs - rhs) of every determining equation at x.

    Names: "3ord-1".."3ord-10" (leading structure), "2ord-1".."2ord-6",
    "1ord-1".."1ord-3" and "0ord".  With normalized=True each residual is
    divided by 1 + the sum of the absolute values of its terms.
    """
    return _evaluate_named(determining_fields(sys, spec), x, normalized)


def compatibility_residuals(sys: MagneticSystem, spec: QuadraticIntegralSpec, x,
                            normalized: bool = False) -> dict:
    return _evaluate_named(compatibility_fields(sys, spec), x, normalized)


# ---------------------------------------------------------------------------
# linear dependence

def dependence_fit(target: MomentumPolynomial, basis: Sequence, sys: MagneticSystem,
                   points, tol: float = 1e-8) -> tuple:
    """Least-squares fit target ~ sum c_k basis_k over the sample points.

    Returns (coefficients, residual) where residual is the fit error divided by
    the norm of the target values (or by 1 when the target vanishes).
    Basis entries may be momentum polynomials, constants, or the system (for H).
    """
    y = as_states(points)
    if y.shape[0] < 2 * len(basis):
        raise ValueError("dependence_fit needs at least twice as many points as basis members")
    t = evaluate_any(target, sys, y)
    cols = [evaluate_any(b, sys, y) for b in basis]
    M = np.stack(cols, axis=1)
    colscale = np.linalg.norm(M, axis=0)
    colscale[colscale == 0] = 1.0
    Mn = M / colscale
    sv = np.linalg.svd(Mn, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise DependenceError("degenerate sample: the basis is rank deficient on these points; "
                              "use more (or different) points")
    c, *_ = np.linalg.lstsq(Mn, t, rcond=None)
    c = c / colscale
    res = np.linalg.norm(M @ c - t)
    denom = max(np.linalg.norm(t), 1.0)
    return c, float(res / denom)


def evaluate_any(f, sys: MagneticSystem, y) -> np.ndarray:
    if isinstance(f, MagneticSystem):
        return f.hamiltonian(y)
    if isinstance(f, (int, float)):
        return np.full(as_states(y).shape[0], float(f))
    return f.values(sys, y)
