"""Adaptive propagation of the three-body equations of motion.

Wraps an explicit 8(5,3) embedded Runge-Kutta stepper with dense output
(scipy's DOP853) behind the artifact's interfaces: error-controlled
integration to a fixed time, per-step dense interpolants, near-collision
failure detection, and localization of the first collinearity event by
sign monitoring plus Brent refinement on the interpolant.

Single trajectories integrate sequentially; distinct trajectories share
no mutable state and may run concurrently.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .dynamics import PotentialSpec, ThreeBodyState

__all__ = [
    "IntegratorConfig",
    "TrajectorySegment",
    "IntegrationError",
    "TrajectoryFailure",
    "StiffnessFailure",
    "EventNotFound",
    "collinearity",
    "integrate",
    "integrate_to_collinear",
]


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and guards for trajectory propagation."""

    rel_tol: float = 1e-11
    abs_tol: float = 1e-11
    max_step: float = math.inf
    t_max: float = 200.0
    min_distance: float = 1e-3

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.min_distance <= 0:
            raise ValueError("min_distance must be positive")

    def to_json_dict(self) -> dict:
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_step": None if math.isinf(self.max_step) else self.max_step,
            "t_max": self.t_max,
            "min_distance": self.min_distance,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "IntegratorConfig":
        ms = d.get("max_step")
        return cls(
            rel_tol=float(d["rel_tol"]),
            abs_tol=float(d["abs_tol"]),
            max_step=math.inf if ms is None else float(ms),
            t_max=float(d["t_max"]),
            min_distance=float(d["min_distance"]),
        )


class IntegrationError(Exception):
    """Base for trajectory propagation failures."""


class TrajectoryFailure(IntegrationError):
    """Trajectory left the trusted region (near-collision blowup)."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = t


class StiffnessFailure(TrajectoryFailure):
    """Step-size underflow / stepper breakdown."""


class EventNotFound(IntegrationError):
    """No collinearity sign change before the abort horizon."""


def _pair_g(spec: PotentialSpec):
    """Force factor g(r^2) with force-on-i = g * (q_i - q_j), g = -u'(r)/r.

    Specialized closed forms for the quantitative families keep the hot
    loop in plain float arithmetic.
    """
    if spec.kind == "lj" and spec.b == 12.0 and spec.a == 6.0:

        def g(r2):
            s = 1.0 / r2
            s3 = s * s * s
            return s3 * s * (12.0 * s3 - 6.0)

        return g
    if spec.kind == "homogeneous" and spec.a == 6.0:

        def g(r2):
            s = 1.0 / r2
            return -6.0 * (s * s) * (s * s)

        return g
    du = spec.du

    def g(r2):
        r = math.sqrt(r2)
        return -du(r) / r

    return g


def make_rhs(spec: PotentialSpec):
    """Right-hand side of the first-order system y' = f(y), y = (q, qdot) flat."""
    g = _pair_g(spec)

    def rhs(t, y):
        x0 = y[0]; y0 = y[1]; x1 = y[2]; y1 = y[3]; x2 = y[4]; y2 = y[5]
        dx = x0 - x1; dy = y0 - y1
        g01 = g(dx * dx + dy * dy)
        f01x = g01 * dx; f01y = g01 * dy
        dx = x0 - x2; dy = y0 - y2
        g02 = g(dx * dx + dy * dy)
        f02x = g02 * dx; f02y = g02 * dy
        dx = x1 - x2; dy = y1 - y2
        g12 = g(dx * dx + dy * dy)
        f12x = g12 * dx; f12y = g12 * dy
        return [y[6], y[7], y[8], y[9], y[10], y[11],
                f01x + f02x, f01y + f02y,
                -f01x + f12x, -f01y + f12y,
                -f02x - f12x, -f02y - f12y]

    return rhs


class TrajectorySegment:
    """Dense record of one integrated trajectory on [0, t_end].

    Stores the accepted step times and the per-step interpolants, so the
    state can be evaluated anywhere inside the covered interval to
    integration accuracy.
    """

    def __init__(self, ts: list[float], interpolants: list, t_end: float):
        if len(ts) != len(interpolants) + 1:
            raise ValueError("need one interpolant per accepted step")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("step times must be strictly increasing")
        self.ts = ts
        self.interpolants = interpolants
        self.t_end = t_end

    @property
    def times(self) -> list[float]:
        return list(self.ts)

    def _interp_at(self, t: float):
        # ts[k] <= t < ts[k+1] selects interpolants[k]; clamp at the ends
        k = bisect_right(self.ts, t) - 1
        return self.interpolants[min(max(k, 0), len(self.interpolants) - 1)]

    def eval(self, t: float) -> np.ndarray:
        """Flat 12-vector (positions, velocities) at time t in [0, t_end]."""
        return np.asarray(self._interp_at(t)(t), dtype=float)

    def eval_many(self, t) -> np.ndarray:
        """Vectorized eval; returns shape (12, len(t))."""
        t = np.asarray(t, dtype=float)
        out = np.empty((12, t.size))
        for i, ti in enumerate(t.ravel()):
            out[:, i] = self.eval(ti)
        return out

    def state(self, t: float) -> ThreeBodyState:
        return ThreeBodyState.from_array(t, self.eval(t))

    def to_csv(self, path, n_samples: int = 1000, header_lines: tuple[str, ...] = ()):
        """Uniform sampling of the covered interval to a CSV file."""
        ts = np.linspace(0.0, self.t_end, n_samples)
        cols = "t,x0,y0,x1,y1,x2,y2,vx0,vy0,vx1,vy1,vx2,vy2"
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write(cols + "\n")
            for ti in ts:
                y = self.eval(ti)
                fh.write(",".join(f"{val:.17g}" for val in (ti, *y)) + "\n")


def _collinearity_flat(y) -> float:
    return (y[2] - y[0]) * (y[5] - y[1]) - (y[3] - y[1]) * (y[4] - y[0])


def collinearity(state: ThreeBodyState) -> float:
    """Cross product (q1 - q0) x (q2 - q0); zero iff the bodies are aligned."""
    return (state.q[1] - state.q[0]).cross(state.q[2] - state.q[0])


def _min_pair_dist_sq(y) -> float:
    d01 = (y[0] - y[2]) ** 2 + (y[1] - y[3]) ** 2
    d02 = (y[0] - y[4]) ** 2 + (y[1] - y[5]) ** 2
    d12 = (y[2] - y[4]) ** 2 + (y[3] - y[5]) ** 2
    return min(d01, d02, d12)


# interior probe offsets per accepted step for event sign monitoring
_EVENT_PROBES = (0.25, 0.5, 0.75, 1.0)


def _propagate(state0: ThreeBodyState, spec: PotentialSpec, cfg: IntegratorConfig,
               t_bound: float, find_collinear: bool):
    """Shared stepping driver.

    Returns (segment, t_event or None, y_event or None). Raises on
    near-collision, stepper breakdown, or (when event hunting) a missing
    sign change before t_bound.
    """
    y0 = state0.to_array()
    rhs = make_rhs(spec)
    solver = DOP853(rhs, 0.0, y0, t_bound, rtol=cfg.rel_tol, atol=cfg.abs_tol,
                    max_step=cfg.max_step)
    min_d2 = cfg.min_distance ** 2
    if _min_pair_dist_sq(y0) < min_d2:
        raise TrajectoryFailure("bodies closer than min_distance", 0.0)

    ts = [0.0]
    interps = []
    prev_t = 0.0
    prev_c = _collinearity_flat(y0)

    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            raise StiffnessFailure("stepper breakdown (step-size underflow)", solver.t)
        interp = solver.dense_output()
        interps.append(interp)
        ts.append(solver.t)

        if find_collinear:
            for frac in _EVENT_PROBES:
                tt = prev_t + frac * (solver.t - prev_t)
                c = _collinearity_flat(interp(tt))
                if c == 0.0 or (prev_c > 0.0) != (c > 0.0):
                    if c == 0.0:
                        te = tt
                    else:
                        te = brentq(lambda s: _collinearity_flat(interp(s)),
                                    prev_t, tt, xtol=1e-13, rtol=8.9e-16)
                    seg = TrajectorySegment(ts, interps, te)
                    return seg, te, np.asarray(interp(te), dtype=float)
                prev_t, prev_c = tt, c

        if _min_pair_dist_sq(solver.y) < min_d2:
            raise TrajectoryFailure("bodies closer than min_distance", solver.t)

    if find_collinear:
        raise EventNotFound(
            f"no collinearity sign change in [0, {t_bound:.6g}]")
    return TrajectorySegment(ts, interps, solver.t), None, None


def integrate(state0: ThreeBodyState, spec: PotentialSpec, t_end: float,
              cfg: IntegratorConfig) -> TrajectorySegment:
    """Propagate state0 for t_end time units, returning the dense segment."""
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    seg, _, _ = _propagate(state0, spec, cfg, t_end, find_collinear=False)
    return seg


def integrate_to_collinear(state0: ThreeBodyState, spec: PotentialSpec,
                           cfg: IntegratorConfig):
    """Propagate until the first zero of the collinearity function.

    Returns (t_f, state_f, segment). The event time is refined on the
    dense interpolant to a bracket below 1e-12 in t. Raises EventNotFound
    if the sign never changes before cfg.t_max.
    """
    if collinearity(state0) == 0.0:
        raise ValueError("initial state is already collinear")
    seg, te, ye = _propagate(state0, spec, cfg, cfg.t_max, find_collinear=True)
    return te, ThreeBodyState.from_array(te, ye), seg
