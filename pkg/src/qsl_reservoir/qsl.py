"""Alternative-fidelity quantum speed limit bound.

For actual driving time tau,

    tau_QSL = |1 - F(rho_0, rho_tau)| / X(tau),
    X(tau)  = (2 / tau) int_0^tau sqrt(Tr(rho_dot_t^2) / Tr(rho_t^2)) dt,

with F the normalised Hilbert-Schmidt overlap (:func:`qmath.fidelity`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import common, independent
from .common import CommonReservoirParams
from .independent import IndependentReservoirParams
from .qmath import InvariantViolation, fidelity, hs_inner
from .states import EWLParams, ewl_state
from .trajectory import Trajectory

MIN_POINTS = 100
X_ZERO = 1e-14
F_ZERO = 1e-12
BOUND_SLACK = 1e-9
GAUSS_NODES = 16


@dataclass(frozen=True)
class QSLResult:
    fidelity_end: float
    x_tau: float
    tau_qsl: float
    tau: float
    no_evolution: bool = False


def simpson(y: np.ndarray, h: float) -> float:
    """Composite Simpson rule; an even point count closes with one trapezoid panel."""
    n = len(y)
    if n < 3:
        return float(0.5 * h * (y[0] + y[-1])) if n == 2 else 0.0
    tail = 0.0
    if n % 2 == 0:
        tail = 0.5 * h * (y[-2] + y[-1])
        y = y[:-1]
    body = h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
    return float(body + tail)


def _hermite_basis(s, deriv=False):
    """Quintic Hermite basis on [0, 1] (values, or d/ds when ``deriv``)."""
    s2, s3, s4 = s * s, s**3, s**4
    if deriv:
        return (
            -30 * s2 + 60 * s3 - 30 * s4,
            1 - 18 * s2 + 32 * s3 - 15 * s4,
            0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4),
            30 * s2 - 60 * s3 + 30 * s4,
            -12 * s2 + 28 * s3 - 15 * s4,
            0.5 * (3 * s2 - 8 * s3 + 5 * s4),
        )
    s5 = s**5
    return (
        1 - 10 * s3 + 15 * s4 - 6 * s5,
        s - 6 * s3 + 8 * s4 - 3 * s5,
        0.5 * (s2 - 3 * s3 + 3 * s4 - s5),
        10 * s3 - 15 * s4 + 6 * s5,
        -4 * s3 + 7 * s4 - 3 * s5,
        0.5 * (s3 - 2 * s4 + s5),
    )


def _hermite_coeffs(y, d1, d2, h):
    return (y[:-1], h * d1[:-1], h * h * d2[:-1], y[1:], h * d1[1:], h * h * d2[1:])


def _hermite_eval(coeffs, s, deriv=False):
    """Evaluate per-interval interpolants at fractions ``s`` of shape (k,) or (intervals, k)."""
    s = np.asarray(s)
    basis = _hermite_basis(s if s.ndim == 2 else s[None, :], deriv)
    return sum(c[:, None] * b for c, b in zip(coeffs, basis))


def _interior_minima(coeffs, iters: int = 60):
    """Intervals whose interpolant has a local minimum inside, and where it sits.

    A minimum is bracketed when the slope goes from negative at the left
    node to positive at the right one; it is located by bisection on the
    interpolant's derivative.
    """
    slope_l, slope_r = coeffs[1], coeffs[4]
    idx = np.flatnonzero((slope_l < 0) & (slope_r > 0))
    sub = tuple(c[idx] for c in coeffs)
    lo = np.zeros(len(idx))
    hi = np.ones(len(idx))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        up = _hermite_eval(sub, mid[:, None], deriv=True)[:, 0] > 0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return idx, 0.5 * (lo + hi)


def _speed_sq(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    q = hs_inner(traj.rho_dot, traj.rho_dot)
    p = hs_inner(traj.states, traj.states)
    if q.min() < -X_ZERO:
        raise InvariantViolation(f"negative Tr(rho_dot^2) = {q.min():.3e}: corrupt derivative")
    return q, p


def speed_integral(traj: Trajectory, method: str = "auto", nodes: int = GAUSS_NODES) -> float:
    """int_0^tau sqrt(Tr(rho_dot^2) / Tr(rho^2)) dt on the trajectory grid.

    ``"simpson"`` applies the composite rule to the integrand samples.
    ``"hermite"`` interpolates the smooth radicands Tr(rho_dot^2) and Tr(rho^2)
    with quintic Hermite polynomials (needs the second and third state
    derivatives) and integrates each interval with Gauss-Legendre nodes.
    The integrand has kinks wherever rho_dot vanishes, which limits Simpson
    to roughly second order there.  Interpolating under the square root and
    splitting each interval at an interior minimum of Tr(rho_dot^2) keeps
    the quadrature high order.  ``"auto"`` picks hermite when possible.
    """
    if len(traj.times) < MIN_POINTS:
        raise ValueError(f"trajectory needs >= {MIN_POINTS} points, got {len(traj.times)}")
    if method == "auto":
        method = "hermite" if len(traj.derivatives) >= 3 else "simpson"
    q, p = _speed_sq(traj)
    h = traj.step
    if method == "simpson":
        return simpson(np.sqrt(np.clip(q, 0.0, None) / p), h)
    if method != "hermite":
        raise ValueError(f"unknown quadrature method {method!r}")
    if len(traj.derivatives) < 3:
        raise ValueError("hermite quadrature needs derivatives up to third order")
    r0, r1, r2, r3 = (traj.states, *traj.derivatives[:3])
    q_co = _hermite_coeffs(q, 2.0 * hs_inner(r1, r2), 2.0 * (hs_inner(r2, r2) + hs_inner(r1, r3)), h)
    p_co = _hermite_coeffs(p, 2.0 * hs_inner(r0, r1), 2.0 * (hs_inner(r1, r1) + hs_inner(r0, r2)), h)
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (x + 1.0)

    def speed(co_q, co_p, at):
        return np.sqrt(np.clip(_hermite_eval(co_q, at), 0.0, None) / _hermite_eval(co_p, at))

    per_interval = 0.5 * speed(q_co, p_co, s) @ w
    # rho_dot can vanish inside an interval, leaving a kink in the integrand
    # at the minimum of Tr(rho_dot^2); integrate either side of it separately
    idx, cut = _interior_minima(q_co)
    if len(idx):
        sub_q = tuple(c[idx] for c in q_co)
        sub_p = tuple(c[idx] for c in p_co)
        left = speed(sub_q, sub_p, cut[:, None] * s) @ w * cut
        right = speed(sub_q, sub_p, cut[:, None] + (1 - cut[:, None]) * s) @ w * (1 - cut)
        per_interval[idx] = 0.5 * (left + right)
    return float(h * per_interval.sum())


def x_tau(traj: Trajectory, method: str = "auto") -> float:
    return 2.0 / traj.tau * speed_integral(traj, method)


def tau_qsl(rho0, rho_tau, x: float, tau: float) -> float:
    if x < 0:
        raise ValueError(f"X(tau) must be non-negative, got {x}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    gap = abs(1.0 - fidelity(rho0, rho_tau))
    if x < X_ZERO:
        if gap < F_ZERO:
            return 0.0
        raise InvariantViolation(f"state moved (|1 - F| = {gap:.3e}) but X(tau) = {x:.3e}")
    return gap / x


def initial_state(ewl: EWLParams) -> np.ndarray:
    return ewl_state(ewl)


def build_trajectory(
    ewl: EWLParams,
    res: IndependentReservoirParams | CommonReservoirParams,
    tau: float = 1.0,
    steps: int = common.DEFAULT_STEPS,
    *,
    route: str = "map",
    substeps: int = common.DEFAULT_SUBSTEPS,
) -> Trajectory:
    """Reduced two-qubit trajectory on ``steps + 1`` uniform times in [0, tau].

    Independent reservoirs use the analytic G(t) with the product Kraus map
    (``route="map"``) or the closed-form theta = 0 matrices
    (``route="closed_form"``); derivatives follow from the chain rule in G.
    A common reservoir integrates the pseudomode master equation.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    rho0 = initial_state(ewl)
    if isinstance(res, CommonReservoirParams):
        traj = common.evolve(rho0, res, tau, steps, substeps=substeps)
    elif isinstance(res, IndependentReservoirParams):
        times = np.linspace(0.0, tau, steps + 1)
        if route == "map":
            states, derivs = independent.evolve(rho0, res, times)
        elif route == "closed_form":
            if ewl.theta != 0.0:
                raise ValueError("closed-form route is only defined for theta = 0")
            g = independent.amplitude_derivatives(times, res.mu, res.c, order=3)
            states, *derivs = independent.closed_form_with_derivatives(
                ewl.family, g, ewl.r, ewl.alpha, order=3
            )
        else:
            raise ValueError(f"unknown route {route!r}")
        traj = Trajectory(times, states, tuple(derivs))
    else:
        raise TypeError(f"unsupported reservoir parameters {type(res).__name__}")
    return traj.validate()


def qsl_from_trajectory(traj: Trajectory, method: str = "auto") -> QSLResult:
    rho0, rho_t = traj.states[0], traj.states[-1]
    x = x_tau(traj, method)
    bound = tau_qsl(rho0, rho_t, x, traj.tau)
    if bound > traj.tau + BOUND_SLACK:
        raise InvariantViolation(f"tau_QSL = {bound!r} exceeds tau = {traj.tau!r}")
    f_end = fidelity(rho0, rho_t)
    return QSLResult(f_end, x, bound, traj.tau, no_evolution=x < X_ZERO)


def evaluate_point(
    setup: str,
    ewl: EWLParams,
    res: IndependentReservoirParams | CommonReservoirParams,
    tau: float = 1.0,
    steps: int = common.DEFAULT_STEPS,
    *,
    route: str = "map",
    substeps: int = common.DEFAULT_SUBSTEPS,
    method: str = "auto",
) -> QSLResult:
    expected = {"independent": IndependentReservoirParams, "common": CommonReservoirParams}
    if setup not in expected:
        raise ValueError(f"setup must be 'independent' or 'common', got {setup!r}")
    if not isinstance(res, expected[setup]):
        raise TypeError(f"{setup} setup needs {expected[setup].__name__}")
    traj = build_trajectory(ewl, res, tau, steps, route=route, substeps=substeps)
    return qsl_from_trajectory(traj, method)
