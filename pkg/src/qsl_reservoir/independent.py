"""Two qubits, each damped by its own zero-temperature Lorentzian reservoir.

The single-qubit reduced dynamics is amplitude damping with a decoherence
function G(t) solving the memory-kernel equation

    G'(t) = -int_0^t f(t - s) G(s) ds,   f(tau) = (gamma0 * lam / 2) exp(-lam |tau|),

which for this exponential kernel is the damped oscillator
G'' + lam G' + (gamma0 lam / 2) G = 0 with G(0) = 1, G'(0) = 0.
All quantities live in the frame rotating at the qubit frequency.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.integrate import solve_ivp

from .qmath import InvariantViolation, check_density, dagger
from .states import EWLParams, Family, ewl_state

SINGULAR_D = 1e-8
KRAUS_TOL = 1e-14


@dataclass(frozen=True)
class IndependentReservoirParams:
    lam: float
    gamma0: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.gamma0 > 0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")

    @property
    def boundary(self) -> float:
        return self.lam / 2.0

    @property
    def regime(self) -> str:
        # ties count as markovian
        return "markovian" if self.gamma0 <= self.boundary else "non_markovian"

    @property
    def mu(self) -> float:
        return self.lam

    @property
    def c(self) -> float:
        return 0.5 * self.gamma0 * self.lam


@dataclass(frozen=True)
class DecoherenceSample:
    t: float
    g: complex
    gdot: complex


def _sinhc(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0), np.sinh(safe) / safe)


def _check_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    return t


def amplitude_derivatives(t, mu: float, c: float, order: int = 1) -> np.ndarray:
    """G and its first ``order`` derivatives for G'' + mu G' + c G = 0, G(0)=1, G'(0)=0.

    Returns an array of shape ``(order + 1,) + shape(t)``.  The discriminant
    D = sqrt(mu^2 - 4c) is taken complex so the oscillating branch needs no
    special casing; D -> 0 uses the critically damped limit.
    """
    t = _check_times(t)
    d = np.sqrt(complex(mu * mu - 4.0 * c))
    decay = np.exp(-0.5 * mu * t)
    if abs(d) < SINGULAR_D * mu:
        g = decay * (1.0 + 0.5 * mu * t)
        g1 = -c * t * decay
    else:
        x = 0.5 * d * t
        big = np.abs(x) > 1.0
        # exponential form avoids cosh overflow at long times; sinhc form avoids
        # cancellation when D t is small
        ep = np.exp(np.where(big, 0.5 * (d - mu) * t, 0.0))
        em = np.exp(np.where(big, -0.5 * (d + mu) * t, 0.0))
        cosh_part = np.where(big, 0.5 * (ep + em), decay * np.cosh(np.where(big, 0.0, x)))
        sinhc_part = np.where(
            big, (ep - em) / np.where(big, d * t, 1.0), decay * _sinhc(np.where(big, 0.0, x))
        )
        g = cosh_part + 0.5 * mu * t * sinhc_part
        g1 = -c * t * sinhc_part
    out = [np.asarray(g, dtype=complex), np.asarray(g1, dtype=complex)]
    for _ in range(2, order + 1):
        out.append(-mu * out[-1] - c * out[-2])
    return np.stack(out[: order + 1])


def g_exact(t, p: IndependentReservoirParams):
    """Closed-form decoherence function G(t)."""
    g = amplitude_derivatives(t, p.mu, p.c, order=1)[0]
    return g[()] if g.ndim == 0 else g


def g_derivative(t, p: IndependentReservoirParams):
    g1 = amplitude_derivatives(t, p.mu, p.c, order=1)[1]
    return g1[()] if g1.ndim == 0 else g1


def g_ode_oracle(p: IndependentReservoirParams, t_grid) -> list[DecoherenceSample]:
    """Integrate the oscillator form of the memory-kernel equation numerically."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("empty time grid")
    _check_times(t_grid)
    if t_grid.size > 2 and np.abs(np.diff(t_grid, 2)).max() > 1e-12:
        raise ValueError("time grid must be uniform")

    def rhs(_t, y):
        return [y[1], -p.mu * y[1] - p.c * y[0]]

    t_end = float(t_grid[-1])
    if t_end == 0.0:
        return [DecoherenceSample(0.0, 1.0 + 0j, 0j)]
    sol = solve_ivp(
        rhs, (0.0, t_end), [1.0, 0.0], method="DOP853", t_eval=t_grid, rtol=1e-13, atol=1e-15
    )
    if not sol.success:
        raise InvariantViolation(f"ODE oracle failed: {sol.message}")
    return [DecoherenceSample(float(t), complex(g), complex(gd)) for t, g, gd in zip(sol.t, *sol.y)]


# --- Kraus maps --------------------------------------------------------------


def damping_kraus(g) -> np.ndarray:
    """Amplitude-damping Kraus pair in computational order (|0> ground, |1> excited).

    Accepts a scalar or an array of G values; returns shape ``shape(g) + (2, 2, 2)``.
    """
    g = np.asarray(g, dtype=complex)
    p = np.abs(g) ** 2
    if np.any(p > 1.0 + 2e-10):
        raise InvariantViolation(f"|G| = {np.sqrt(p.max()):.12g} > 1: map is not CPT")
    # moduli within tolerance above 1 are rounded back onto the unit circle
    over = p > 1.0
    g = np.where(over, g / np.sqrt(np.where(over, p, 1.0)), g)
    p = np.minimum(p, 1.0)
    k = np.zeros(g.shape + (2, 2, 2), dtype=complex)
    k[..., 0, 0, 0] = 1.0
    k[..., 0, 1, 1] = g
    k[..., 1, 0, 1] = np.sqrt(np.clip(1.0 - p, 0.0, None))
    completeness = np.einsum("...kji,...kjl->...il", k.conj(), k)
    if np.abs(completeness - np.eye(2)).max(initial=0.0) > KRAUS_TOL:
        raise InvariantViolation("Kraus completeness violated")
    return k


def single_qubit_map(rho, g: complex) -> np.ndarray:
    """Reduced single-qubit state after damping with decoherence value ``g``.

    Uses the textbook layout with the excited level first: rho[0, 0] is the
    excited population, rho[1, 1] the ground population.
    """
    rho = np.asarray(rho, dtype=complex)
    flip = rho[::-1, ::-1]
    k = damping_kraus(g)
    out = np.einsum("kij,jl,kml->im", k, flip, k.conj())[::-1, ::-1]
    g = complex(g)
    p = abs(g) ** 2
    expected = np.array(
        [[p * rho[0, 0], g * rho[0, 1]], [g.conjugate() * rho[1, 0], rho[1, 1] + (1 - p) * rho[0, 0]]]
    )
    if np.abs(out - expected).max() > 1e-13:
        raise InvariantViolation("Kraus map disagrees with element-wise damping formula")
    return out


def two_qubit_kraus(g) -> np.ndarray:
    """The four product operators K_i (x) K_j, shape ``shape(g) + (4, 4, 4)``."""
    k = damping_kraus(g)
    kk = np.einsum("...iab,...jcd->...ijacbd", k, k)
    return kk.reshape(k.shape[:-3] + (4, 4, 4))


def two_qubit_map(rho, g) -> np.ndarray:
    """Apply Phi_G (x) Phi_G to a 4x4 state; ``g`` may be an array (stacked output)."""
    rho = np.asarray(rho, dtype=complex)
    kk = two_qubit_kraus(g)
    out = np.einsum("...kij,jl,...kml->...im", kk, rho, kk.conj(), optimize=True)
    completeness = np.einsum("...kji,...kjl->...il", kk.conj(), kk)
    if np.abs(completeness - np.eye(4)).max(initial=0.0) > 1e-13:
        raise InvariantViolation("two-qubit map is not trace preserving")
    return out


def _leibniz(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """n-th derivative of a product from derivative stacks a[k], b[k]."""
    return sum(comb(n, k) * a[k] * b[n - k] for k in range(n + 1))


def _damping_superop(g_derivs: np.ndarray, n: int) -> np.ndarray:
    """n-th time derivative of the single-qubit damping superoperator.

    Shape ``(T, 2, 2, 2, 2)`` with out[i, j] = sum T[i, j, k, l] rho[k, l].
    """
    gc = g_derivs.conj()
    pop = _leibniz(g_derivs, gc, n)
    s = np.zeros(g_derivs.shape[1:] + (2, 2, 2, 2), dtype=complex)
    s[..., 1, 1, 1, 1] = pop
    s[..., 0, 0, 1, 1] = -pop if n else 1.0 - pop
    if n == 0:
        s[..., 0, 0, 0, 0] = 1.0
    s[..., 1, 0, 1, 0] = g_derivs[n]
    s[..., 0, 1, 0, 1] = gc[n]
    return s


def map_derivatives(rho0, g_derivs: np.ndarray, order: int) -> list[np.ndarray]:
    """Time derivatives 1..order of Phi_G(t) (x) Phi_G(t) applied to rho0.

    ``g_derivs[k]`` is the k-th derivative of G on the time grid.  Every
    matrix element of the evolved state is a polynomial in G and G*, so the
    chain rule is exact.
    """
    r = np.asarray(rho0, dtype=complex).reshape(2, 2, 2, 2)
    sup = [_damping_superop(g_derivs, n) for n in range(order + 1)]
    out = []
    for n in range(1, order + 1):
        acc = 0
        for k in range(n + 1):
            acc = acc + comb(n, k) * np.einsum("...acij,...bdkl,ikjl->...abcd", sup[k], sup[n - k], r, optimize=True)
        out.append(acc.reshape(acc.shape[:-4] + (4, 4)))
    return out


# --- closed-form evolved states ----------------------------------------------


def _reversed_to_computational(m: np.ndarray) -> np.ndarray:
    # element labels 1..4 run |11>, |10>, |01>, |00>: reversed computational order
    return m[..., ::-1, ::-1]


def _assemble(family: Family, r: float, alpha: float, p2, p4, g2, const: float) -> np.ndarray:
    p2, p4, g2 = np.broadcast_arrays(*(np.asarray(x, dtype=complex) for x in (p2, p4, g2)))
    m = np.zeros(p2.shape + (4, 4), dtype=complex)
    a2 = alpha * alpha
    coh = r * alpha * np.sqrt(max(1.0 - a2, 0.0))
    if family is Family.PSI1:
        m[..., 0, 0] = (1 - r) / 4 * p4
        m[..., 1, 1] = (r - 1) / 4 * p4 + ((1 - 2 * a2) * r + 1) / 2 * p2
        m[..., 1, 2] = coh * p2
        m[..., 2, 1] = coh * p2
        m[..., 2, 2] = (r - 1) / 4 * p4 + ((2 * a2 - 1) * r + 1) / 2 * p2
        m[..., 3, 3] = (1 - r) / 4 * p4 - p2 + const
    else:
        edge = (1 + (3 - 4 * a2) * r) / 4
        m[..., 0, 0] = edge * p4
        m[..., 0, 3] = coh * g2
        m[..., 3, 0] = coh * g2.conj()
        m[..., 1, 1] = m[..., 2, 2] = ((4 * a2 - 3) * r - 1) / 4 * p4 + ((1 - 2 * a2) * r + 1) / 2 * p2
        m[..., 3, 3] = edge * p4 + ((2 * a2 - 1) * r - 1) * p2 + const
    return _reversed_to_computational(m)


def closed_form_with_derivatives(
    family: Family | str, g_derivs: np.ndarray, r: float, alpha: float, order: int = 0
) -> list[np.ndarray]:
    """Closed-form evolved state (theta = 0) and its first ``order`` time derivatives.

    The matrix is affine in |G|^2, |G|^4 and G^2, so each derivative is the
    same assembly applied to the differentiated scalars with the constant dropped.
    """
    family = Family(family)
    g = np.asarray(g_derivs, dtype=complex)
    p2 = np.stack([_leibniz(g, g.conj(), n) for n in range(order + 1)])
    p4 = [_leibniz(p2, p2, n) for n in range(order + 1)]
    g2 = [_leibniz(g, g, n) for n in range(order + 1)]
    out = [_assemble(family, r, alpha, p2[n], p4[n], g2[n], 1.0 if n == 0 else 0.0) for n in range(order + 1)]
    tr_err = np.abs(np.trace(out[0], axis1=-2, axis2=-1) - 1.0).max(initial=0.0)
    if tr_err > 1e-9:
        raise InvariantViolation(f"closed-form state has trace error {tr_err:.3e}")
    return out


def _closed_form(family: Family, t, r: float, alpha: float, p: IndependentReservoirParams):
    g = amplitude_derivatives(t, p.mu, p.c, order=0)
    rho = closed_form_with_derivatives(family, g, r, alpha)[0]
    return check_density(rho, f"closed-form {family.value} state")


def closed_form_psi1(t, r: float, alpha: float, p: IndependentReservoirParams) -> np.ndarray:
    return _closed_form(Family.PSI1, t, r, alpha, p)


def closed_form_psi2(t, r: float, alpha: float, p: IndependentReservoirParams) -> np.ndarray:
    return _closed_form(Family.PSI2, t, r, alpha, p)


def _check_index_convention() -> None:
    # with G = 1 the closed forms must reproduce the initial EWL states
    one = np.ones(1, dtype=complex)[None]
    for family in Family:
        for r, alpha in ((1.0, 0.6), (0.3, 0.9)):
            got = closed_form_with_derivatives(family, one, r, alpha)[0][0]
            want = ewl_state(EWLParams(family, r, alpha, 0.0))
            if np.abs(got - want).max() > 1e-14:
                raise RuntimeError(f"closed-form index convention broken for {family.value}")


_check_index_convention()


def evolve(rho0, p: IndependentReservoirParams, times, order: int = 3) -> tuple[np.ndarray, list[np.ndarray]]:
    """States on ``times`` via the product Kraus map, plus derivatives 1..order."""
    g = amplitude_derivatives(times, p.mu, p.c, order=order)
    states = two_qubit_map(rho0, g[0])
    return states, map_derivatives(rho0, g, order)


__all__ = [
    "DecoherenceSample",
    "IndependentReservoirParams",
    "amplitude_derivatives",
    "closed_form_psi1",
    "closed_form_psi2",
    "closed_form_with_derivatives",
    "damping_kraus",
    "evolve",
    "g_derivative",
    "g_exact",
    "g_ode_oracle",
    "map_derivatives",
    "single_qubit_map",
    "two_qubit_kraus",
    "two_qubit_map",
]
