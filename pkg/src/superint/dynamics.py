"""Hamilton's equations, conservation drift, functional-independence rank and
orbit recurrence.

The integrator is an adaptive explicit Runge-Kutta method of order 8 with the
embedded 5th/3rd-order error estimate (Dormand-Prince 8(5,3)); the tableau
comes from scipy.  It is deliberately not symplectic: conservation drift is
what the tests measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop
from scipy.optimize import minimize_scalar

from .core import DomainError, MagneticSystem, PhasePoint, as_states
from .integrals import MomentumPolynomial

DEFAULT_SEED = 0xC0FFEE
RANK_THRESHOLD = 1e-6

_NS = _dop.N_STAGES
_A = _dop.A[:_NS, :_NS]
_B = _dop.B
_C = _dop.C[:_NS]
_E3 = _dop.E3
_E5 = _dop.E5
_A_ROWS = [np.ascontiguousarray(_A[s, :s]) for s in range(_NS)]

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ORDER = 8


class StiffnessError(RuntimeError):
    """Step size fell below the representable resolution of t."""


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    system: MagneticSystem
    rel_tol: float
    abs_tol: float
    stats: dict = field(default_factory=dict)

    @property
    def samples(self) -> list:
        return [(float(t), PhasePoint.from_array(y)) for t, y in zip(self.t, self.y)]

    @property
    def truncated(self) -> bool:
        return bool(self.stats.get("truncated", False))

    def __len__(self):
        return len(self.t)

    def state_at(self, t: float) -> np.ndarray:
        """State at time t by re-flowing from the nearest earlier sample."""
        if t < self.t[0] or t > self.t[-1]:
            raise ValueError("time outside the trajectory span")
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        if self.t[k] == t:
            return self.y[k].copy()
        sub = flow(self.system, self.y[k], t - self.t[k], self.rel_tol, self.abs_tol,
                   t_eval=[t - self.t[k]])
        return sub.y[-1]


def _initial_step(rhs, y0, f0, rtol, atol, direction=1.0) -> float:
    scale = np.maximum(atol, rtol * np.abs(y0))
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = rhs(y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1)


def _step(rhs, t, y, f, h):
    K = np.empty((_NS + 1, y.size))
    K[0] = f
    for s in range(1, _NS):
        K[s] = rhs(y + h * (_A_ROWS[s] @ K[:s]))
    y_new = y + h * (_B @ K[:_NS])
    f_new = rhs(y_new)
    K[_NS] = f_new
    return y_new, f_new, K


def _error(K, h, scale):
    e5 = np.max(np.abs(_E5 @ K) / scale)
    e3 = np.max(np.abs(_E3 @ K) / scale)
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    return abs(h) * e5 * e5 / math.sqrt(e5 * e5 + 0.01 * e3 * e3)


def flow(sys: MagneticSystem, pt0, t_end: float, rel_tol: float = 1e-12,
         abs_tol: float = 1e-14, t_eval: Sequence[float] | None = None,
         fixed_step: float | None = None, max_steps: int = 2_000_000) -> Trajectory:
    """Integrate Hamilton's equations from pt0 over [0, t_end].

    Samples are returned at t_eval (steps land exactly on those times) or, when
    t_eval is None, at every accepted step.  Each accepted step satisfies
    |local error| <= max(rel_tol |y|, abs_tol) componentwise.  fixed_step
    switches off error control (used for convergence-order checks).
    """
    if not (1e-14 <= rel_tol <= 1e-3) or not (1e-14 <= abs_tol <= 1e-3):
        raise ValueError("tolerances must lie in [1e-14, 1e-3]")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    y = as_states(pt0)[0].astype(float)
    sys.check_point(y[:3])
    rhs = sys.rhs
    f = rhs(y)
    t = 0.0
    if t_eval is None:
        targets = [t_end]
        record_all = True
    else:
        targets = sorted(float(s) for s in t_eval)
        if targets and (targets[0] < 0 or targets[-1] > t_end * (1 + 1e-14)):
            raise ValueError("t_eval outside [0, t_end]")
        record_all = False
    ts, ys = [0.0], [y.copy()]
    if targets and targets[0] == 0.0:
        targets = targets[1:]
    stats = {"accepted": 0, "rejected": 0, "max_error": 0.0, "truncated": False,
             "diagnostic": ""}
    h = fixed_step if fixed_step else _initial_step(rhs, y, f, rel_tol, abs_tol)
    ti = 0
    while ti < len(targets):
        target = targets[ti]
        if stats["accepted"] + stats["rejected"] > max_steps:
            raise StiffnessError(f"step budget exhausted at t={t:.6g}")
        h_try = min(h, target - t)
        if h_try <= 10 * np.spacing(max(abs(t), 1.0)):
            if target - t <= 10 * np.spacing(max(abs(t), 1.0)):
                t = target
                ts.append(t)
                ys.append(y.copy())
                ti += 1
                continue
            raise StiffnessError(f"step size underflow at t={t:.6g} (h={h:.3g})")
        try:
            y_new, f_new, K = _step(rhs, t, y, f, h_try)
            ok = bool(np.all(np.isfinite(y_new)))
        except DomainError as exc:
            ok = False
            if h_try < 1e-9 * max(1.0, abs(t)):
                stats["truncated"] = True
                stats["diagnostic"] = f"approached singular set at t={t:.6g}: {exc}"
                break
        if not ok:
            stats["rejected"] += 1
            h = h_try * 0.25
            continue
        if fixed_step:
            err = 0.0
        else:
            scale = np.maximum(abs_tol, rel_tol * np.maximum(np.abs(y), np.abs(y_new)))
            err = _error(K, h_try, scale)
            if err > 1.0:
                stats["rejected"] += 1
                h = h_try * max(MIN_FACTOR, SAFETY * err ** (-1.0 / ORDER))
                continue
        stats["accepted"] += 1
        stats["max_error"] = max(stats["max_error"], err)
        landed = h_try == target - t
        t = target if landed else t + h_try
        y, f = y_new, f_new
        if not fixed_step:
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** (-1.0 / ORDER))
            h_next = h_try * max(MIN_FACTOR, factor)
            # a step clipped to land on a sample does not shrink the next one
            h = max(h, h_next) if landed and h_try < h else h_next
        if landed:
            ti += 1
            ts.append(t)
            ys.append(y.copy())
        elif record_all:
            ts.append(t)
            ys.append(y.copy())
    return Trajectory(np.array(ts), np.array(ys), sys, rel_tol, abs_tol, stats)


def _values(I, sys: MagneticSystem, y: np.ndarray) -> np.ndarray:
    if isinstance(I, MagneticSystem):
        return I.hamiltonian(y)
    return I.values(sys, y)


def drift(traj: Trajectory, I, sys: MagneticSystem, dps: int | None = None) -> float:
    """max over samples of |I(pt) - I(pt0)| / (1 + |I(pt0)|); pass sys for H.

    With dps set, I is evaluated in dps-digit arithmetic on the float64 states.
    This separates the flow's own error from cancellation in evaluating I when
    its terms grow far beyond its value (unbounded orbits, cubic integrals).
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if dps:
        if isinstance(I, MagneticSystem):
            I = MomentumPolynomial.hamiltonian(I)
        v = I.values_precise(sys, traj.y, dps)
    else:
        v = _values(I, sys, traj.y)
    return float(np.max(np.abs(v - v[0])) / (1.0 + abs(v[0])))


def _gradients(I, sys, y):
    if isinstance(I, MagneticSystem):
        return I.hamiltonian_gradient(y)
    return I.gradient(sys, y)


def point_ranks(integrals: Sequence, sys: MagneticSystem, points,
                threshold: float = RANK_THRESHOLD) -> np.ndarray:
    """Rank of the (k x 6) gradient matrix at each point, rows scaled to unit norm."""
    y = as_states(points)
    sys.check_point(y[:, :3])
    G = np.stack([_gradients(I, sys, y) for I in integrals], axis=1)  # (n, k, 6)
    norms = np.linalg.norm(G, axis=2, keepdims=True)
    G = np.where(norms > 0, G / np.where(norms > 0, norms, 1.0), 0.0)
    s = np.linalg.svd(G, compute_uv=False)
    top = s[:, :1]
    return np.sum((s > threshold * top) & (top > 0), axis=1)


def independence_rank(integrals: Sequence, sys: MagneticSystem, points,
                      threshold: float = RANK_THRESHOLD) -> int:
    """Generic rank of the integrals' phase-space gradients over the sample.

    The rank is evaluated pointwise (singular values above threshold times the
    largest) and the maximum over points is returned, which is the generic rank
    of the family.  Pass the system itself in the list to include H.
    """
    y = as_states(points)
    if y.shape[0] < 5:
        raise ValueError("independence_rank needs at least 5 admissible points")
    if not integrals:
        raise ValueError("no integrals given")
    r = point_ranks(integrals, sys, y, threshold)
    if np.all(r == 0):
        raise ValueError("degenerate sample: all gradients vanish on these points")
    return int(np.max(r))


def recurrence(traj: Trajectory, pt0, transient: float = 1.0, refine: bool = True,
               candidates: int = 8) -> tuple:
    """Minimum phase-space distance to pt0 over t > transient and its time."""
    y0 = as_states(pt0)[0]
    if traj.t[-1] < transient:
        raise ValueError("trajectory shorter than the transient")
    mask = traj.t > transient
    idx = np.nonzero(mask)[0]
    d = np.linalg.norm(traj.y[idx] - y0, axis=1)
    # interior local minima of the sampled distance, best first
    loc = [i for i in range(len(d)) if (i == 0 or d[i] <= d[i - 1]) and
           (i == len(d) - 1 or d[i] <= d[i + 1])]
    loc.sort(key=lambda i: d[i])
    best_d, best_t = float(d[loc[0]]), float(traj.t[idx[loc[0]]])
    if not refine:
        return best_d, best_t
    for i in loc[:candidates]:
        lo = traj.t[idx[max(i - 1, 0)]]
        hi = traj.t[idx[min(i + 1, len(idx) - 1)]]
        lo = max(lo, transient)
        if hi <= lo:
            continue
        fun = lambda s: float(np.linalg.norm(traj.state_at(s) - y0))
        res = minimize_scalar(fun, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * max(1.0, hi)})
        if res.fun < best_d:
            best_d, best_t = float(res.fun), float(res.x)
    return best_d, best_t


def time_reversal_error(sys: MagneticSystem, pt0, t_end: float, rel_tol: float = 1e-12,
                        abs_tol: float = 1e-14) -> float:
    """Flow forward, flip p and the vector potential, flow again; distance to the start."""
    y0 = as_states(pt0)[0]
    fwd = flow(sys, y0, t_end, rel_tol, abs_tol, t_eval=[t_end])
    y1 = fwd.y[-1].copy()
    y1[3:] *= -1
    back = flow(sys.reversed(), y1, t_end, rel_tol, abs_tol, t_eval=[t_end])
    y2 = back.y[-1].copy()
    y2[3:] *= -1
    return float(np.max(np.abs(y2 - y0)) / (1.0 + np.max(np.abs(y0))))


def sample_points(box, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """n seeded draws from a catalog Box (or an Instance's sample box)."""
    box = getattr(box, "sample_box", box)
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    return box.draw(rng, n)


def sample_starts(inst, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    rng = np.random.default_rng((int(seed) + 1) & 0xFFFFFFFFFFFFFFFF)
    return inst.start_box.draw(rng, n)
