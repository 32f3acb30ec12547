"""Pseudo-arclength continuation of solution families.

Solutions come in one-parameter families in (x0, y0, v) that fold back
in x0, so x0 cannot serve as the continuation parameter. Points advance
by a secant predictor in start-normalized coordinates and a corrector
that solves {both shooting residuals = 0, arclength constraint = 0} with
a damped 3-D Newton iteration. Folds are recorded where the x0 step
changes sign; distinguished points (energy zero/maximum, period minimum,
smallest x0) are refined afterwards by 1-D root finding or golden-section
over arclength with a full corrector re-convergence at every probe.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import PotentialSpec, ShootingParams
from .integrate import IntegrationError, IntegratorConfig
from .shooting import ResidualSample, SolutionRecord, SolverError, residuals

__all__ = [
    "ContinuationSeries",
    "ContinuationError",
    "SpecialPointNotFound",
    "continue_family",
    "locate_special",
    "SPECIAL_KINDS",
]

SPECIAL_KINDS = ("E-zero", "T-min", "E-max", "x0-min")


class ContinuationError(SolverError):
    """Corrector breakdown that prevents even the first continuation step."""


class SpecialPointNotFound(SolverError):
    """The series does not bracket the requested distinguished point."""


@dataclass
class ContinuationSeries:
    """An ordered family of converged solutions with fold bookkeeping."""

    label: str
    points: list[SolutionRecord]
    fold_points: list[int] = field(default_factory=list)
    special_points: list[tuple[str, SolutionRecord]] = field(default_factory=list)
    truncation_reason: str | None = None
    tol: float = 1e-10

    @property
    def scale(self) -> np.ndarray:
        p = self.points[0].params
        return np.array([p.x0, p.y0, p.v])

    def u_coords(self) -> np.ndarray:
        """Points in start-normalized coordinates, shape (n, 3)."""
        s = self.scale
        return np.array([[p.params.x0, p.params.y0, p.params.v] for p in self.points]) / s

    def x0_values(self) -> np.ndarray:
        return np.array([p.params.x0 for p in self.points])

    def to_csv(self, path, header_lines: tuple[str, ...] = ()):
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("label,x0,y0,v,T,E,n0\n")
            for p in self.points:
                n0 = "" if p.n0 is None else str(p.n0)
                fh.write(f"{self.label},{p.params.x0:.17g},{p.params.y0:.17g},"
                         f"{p.params.v:.17g},{p.T:.17g},{p.E:.17g},{n0}\n")


def _eval_u(u: np.ndarray, scale: np.ndarray, spec: PotentialSpec,
            cfg: IntegratorConfig) -> ResidualSample:
    x0, y0, v = (float(c) for c in u * scale)
    if x0 <= 0 or y0 <= 0 or v <= 0:
        raise IntegrationError("parameters left the positive domain")
    s = residuals(ShootingParams(x0, y0, v), spec, cfg)
    if not s.ok:
        raise IntegrationError(f"trajectory failed: {s.status}")
    return s


def _fd_step(value: float) -> float:
    return max(1e-6 * abs(value), 1e-8)


def _residual_jacobian(u: np.ndarray, f0: np.ndarray, scale: np.ndarray,
                       spec: PotentialSpec, cfg: IntegratorConfig) -> np.ndarray:
    """Forward-difference 2x3 Jacobian of the dimensionless residual pair."""
    J = np.empty((2, 3))
    for k in range(3):
        h = _fd_step(float(u[k]))
        up = u.copy()
        up[k] += h
        s = _eval_u(up, scale, spec, cfg)
        J[:, k] = (np.array([s.P_norm, s.D_norm]) - f0) / h
    return J


class _CorrectorFailure(Exception):
    pass


def _corrector(u_pred: np.ndarray, tangent: np.ndarray, u_anchor: np.ndarray,
               h: float, scale: np.ndarray, spec: PotentialSpec,
               cfg: IntegratorConfig, tol: float, max_it: int = 10):
    """Solve {residuals = 0, (u - u_anchor).tangent = h} from u_pred.

    Returns (u, sample, iterations). Raises _CorrectorFailure on stall.
    """
    u = u_pred.copy()
    try:
        s = _eval_u(u, scale, spec, cfg)
    except IntegrationError as exc:
        raise _CorrectorFailure(str(exc)) from exc
    for it in range(max_it):
        arc = float((u - u_anchor) @ tangent) - h
        fnorm = math.hypot(s.P_norm, s.D_norm)
        if fnorm <= tol and abs(arc) <= 1e-10:
            return u, s, it
        f0 = np.array([s.P_norm, s.D_norm])
        try:
            J2 = _residual_jacobian(u, f0, scale, spec, cfg)
        except IntegrationError as exc:
            raise _CorrectorFailure(str(exc)) from exc
        J = np.vstack([J2, tangent])
        g = np.array([f0[0], f0[1], arc])
        try:
            du = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError as exc:
            raise _CorrectorFailure("singular corrector Jacobian") from exc
        gnorm = float(np.linalg.norm(g))
        lam = 1.0
        for _ in range(10):
            ut = u + lam * du
            try:
                st = _eval_u(ut, scale, spec, cfg)
            except IntegrationError:
                lam *= 0.5
                continue
            arct = float((ut - u_anchor) @ tangent) - h
            gt = math.sqrt(st.P_norm ** 2 + st.D_norm ** 2 + arct ** 2)
            if gt < gnorm:
                u, s = ut, st
                break
            lam *= 0.5
        else:
            raise _CorrectorFailure("corrector line search stalled")
    fnorm = math.hypot(s.P_norm, s.D_norm)
    if fnorm <= tol:
        return u, s, max_it
    raise _CorrectorFailure(f"corrector stagnated at |F|={fnorm:.2e}")


def _record_from(sample: ResidualSample, spec: PotentialSpec,
                 label: str | None) -> SolutionRecord:
    return SolutionRecord(params=sample.params, T=12.0 * sample.t_f, E=sample.E,
                          residual_norm=sample.norm, potential=spec,
                          series_label=label)


def continue_family(start: SolutionRecord, spec: PotentialSpec,
                    cfg: IntegratorConfig, step: float = 0.01,
                    n_steps: int = 500, direction: int = 1,
                    tol: float = 1e-10, step_max_factor: float = 8.0,
                    x0_limits: tuple[float, float] | None = None,
                    label: str | None = None) -> ContinuationSeries:
    """Trace the family through `start` by pseudo-arclength continuation.

    direction fixes the sign of the initial x0 motion. The step adapts:
    halved when the corrector fails, grown 1.3x (up to step_max_factor
    times the nominal step) after corrector successes in three or fewer
    iterations. Stops after n_steps points, at x0_limits, or with a
    recorded truncation reason when the corrector cannot proceed.
    """
    if direction not in (-1, 1):
        raise ValueError("direction must be +1 or -1")
    label = label or start.series_label or "series"
    p0 = start.params
    scale = np.array([p0.x0, p0.y0, p0.v])
    u = np.array([1.0, 1.0, 1.0])
    try:
        s0 = _eval_u(u, scale, spec, cfg)
    except IntegrationError as exc:
        raise ContinuationError(f"start point does not integrate: {exc}") from exc
    if s0.norm > max(tol, 10.0 * start.residual_norm + 1e-14):
        raise ContinuationError(
            f"start point residual {s0.norm:.2e} above tolerance {tol:.2e}")
    series = ContinuationSeries(label=label, points=[_record_from(s0, spec, label)],
                                tol=tol)
    # initial tangent: null direction of the residual Jacobian, oriented along x0
    f0 = np.array([s0.P_norm, s0.D_norm])
    J = _residual_jacobian(u, f0, scale, spec, cfg)
    tangent = np.linalg.svd(J)[2][2]
    if tangent[0] != 0.0 and math.copysign(1.0, tangent[0]) != direction:
        tangent = -tangent

    us = [u.copy()]
    h = step
    while len(series.points) < n_steps + 1:
        u_prev = us[-1]
        u_pred = u_prev + h * tangent
        try:
            u_new, s_new, its = _corrector(u_pred, tangent, u_prev, h, scale,
                                           spec, cfg, tol)
        except _CorrectorFailure as exc:
            h *= 0.5
            if h < step * 2.0 ** -14:
                series.truncation_reason = f"step underflow: {exc}"
                break
            continue
        us.append(u_new.copy())
        series.points.append(_record_from(s_new, spec, label))
        if len(us) >= 3:
            d1 = us[-1][0] - us[-2][0]
            d0 = us[-2][0] - us[-3][0]
            if d0 * d1 < 0.0:
                series.fold_points.append(len(us) - 2)
        delta = us[-1] - u_prev
        norm = float(np.linalg.norm(delta))
        if norm == 0.0:
            series.truncation_reason = "corrector returned the anchor point"
            break
        tangent = delta / norm
        if its <= 3:
            h = min(h * 1.3, step * step_max_factor)
        x0_now = us[-1][0] * scale[0]
        if x0_limits is not None and not (x0_limits[0] <= x0_now <= x0_limits[1]):
            series.truncation_reason = f"reached x0 limit at {x0_now:.6g}"
            break
    return series


def _probe(series: ContinuationSeries, spec: PotentialSpec, cfg: IntegratorConfig,
           us: np.ndarray, seg: int, tau: float):
    """Re-converged solution on the hyperplane through the interpolated point."""
    u_a, u_b = us[seg], us[seg + 1]
    tangent = u_b - u_a
    tangent = tangent / np.linalg.norm(tangent)
    u_base = u_a + tau * (u_b - u_a)
    u, s, _ = _corrector(u_base, tangent, u_base, 0.0, series.scale, spec, cfg,
                         series.tol)
    return u, s


def _arc_params(us: np.ndarray):
    """Cumulative arclength of the normalized polyline."""
    seglen = np.linalg.norm(np.diff(us, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seglen)])


def _probe_at_s(series, spec, cfg, us, S, s):
    s = min(max(s, 0.0), S[-1])
    seg = int(np.searchsorted(S, s, side="right") - 1)
    seg = min(max(seg, 0), len(us) - 2)
    tau = (s - S[seg]) / (S[seg + 1] - S[seg])
    return _probe(series, spec, cfg, us, seg, tau)


def locate_special(series: ContinuationSeries, kind: str,
                   cfg: IntegratorConfig,
                   spec: PotentialSpec | None = None,
                   s_tol: float = 1e-6) -> SolutionRecord:
    """Refine a distinguished point along the series.

    kind "E-zero" needs a sign change of the energy between consecutive
    points; "T-min", "E-max" and "x0-min" need an interior discrete
    extremum. The refined record is returned and appended to the series'
    special_points.
    """
    if kind not in SPECIAL_KINDS:
        raise ValueError(f"unknown special point kind {kind!r}")
    if len(series.points) < 3:
        raise SpecialPointNotFound("series too short")
    spec = spec or series.points[0].potential
    us = series.u_coords()
    S = _arc_params(us)

    if kind == "E-zero":
        E = np.array([p.E for p in series.points])
        idx = None
        for k in range(len(E) - 1):
            if E[k] == 0.0 or (E[k] > 0.0) != (E[k + 1] > 0.0):
                idx = k
                break
        if idx is None:
            raise SpecialPointNotFound("energy does not change sign along the series")
        from scipy.optimize import brentq

        cache = {}

        def E_at(s):
            _, smp = _probe_at_s(series, spec, cfg, us, S, s)
            cache[s] = smp
            return smp.E

        s_root = brentq(E_at, S[idx], S[idx + 1], xtol=s_tol * max(S[-1], 1.0))
        smp = cache.get(s_root) or _probe_at_s(series, spec, cfg, us, S, s_root)[1]
        rec = _record_from(smp, spec, series.label)
        series.special_points.append((kind, rec))
        return rec

    values = {
        "T-min": np.array([p.T for p in series.points]),
        "E-max": np.array([-p.E for p in series.points]),
        "x0-min": np.array([p.params.x0 for p in series.points]),
    }[kind]
    k = int(np.argmin(values))
    if k == 0 or k == len(values) - 1:
        raise SpecialPointNotFound(f"{kind} not bracketed by interior points")

    def value_at(s):
        _, smp = _probe_at_s(series, spec, cfg, us, S, s)
        if kind == "T-min":
            return 12.0 * smp.t_f, smp
        if kind == "E-max":
            return -smp.E, smp
        return smp.params.x0, smp

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = S[k - 1], S[k + 1]
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, smp_c = value_at(c)
    fd, smp_d = value_at(d)
    while b - a > s_tol * max(S[-1], 1.0):
        if fc < fd:
            b, d, fd, smp_d = d, c, fc, smp_c
            c = b - invphi * (b - a)
            fc, smp_c = value_at(c)
        else:
            a, c, fc, smp_c = c, d, fd, smp_d
            d = a + invphi * (b - a)
            fd, smp_d = value_at(d)
    smp = smp_c if fc < fd else smp_d
    rec = _record_from(smp, spec, series.label)
    series.special_points.append((kind, rec))
    return rec
