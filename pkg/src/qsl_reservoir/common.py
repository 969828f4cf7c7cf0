"""Two qubits sharing one Lorentzian reservoir, via a single damped pseudomode.

The extended space is (dressed two-qubit basis) (x) (pseudomode Fock space
truncated at ``n_fock`` quanta), index = 4-level label * (n_fock + 1) + n.
The master equation, in the frame rotating at the qubit frequency, is

    d rho/dt = -i [V, rho] - (Gamma / 2) (a^dag a rho + rho a^dag a - 2 a rho a^dag),
    V = sqrt(2) gamma0 (a |+><0| + a^dag |0><+| + a |2><+| + a^dag |+><2|).

|-> does not appear in V and therefore never decays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .independent import amplitude_derivatives
from .qmath import InvariantViolation, check_density, dagger, partial_trace
from .states import DOUBLE, GROUND, MINUS, PLUS, dressed_transform, embed_pseudomode
from .trajectory import Trajectory

POSITIVITY_EVERY = 10
SUBRADIANT_TOL = 1e-8
DEFAULT_STEPS = 2000
DEFAULT_SUBSTEPS = 32


@dataclass(frozen=True)
class CommonReservoirParams:
    big_gamma: float
    gamma0: float
    n_fock: int = 2

    def __post_init__(self):
        if not self.big_gamma > 0:
            raise ValueError(f"Gamma must be positive, got {self.big_gamma}")
        if not self.gamma0 > 0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0}")
        if self.n_fock < 2:
            raise ValueError(f"Fock truncation must be >= 2, got {self.n_fock}")

    @property
    def boundary(self) -> float:
        return self.big_gamma / 4.0

    @property
    def regime(self) -> str:
        return "markovian" if self.gamma0 <= self.boundary else "non_markovian"

    @property
    def dim(self) -> int:
        return 4 * (self.n_fock + 1)


def _sys(i: int, j: int) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[i, j] = 1.0
    return m


def annihilation(n_fock: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_fock + 1)), 1).astype(complex)


def build_V(p: CommonReservoirParams) -> np.ndarray:
    a = annihilation(p.n_fock)
    ad = dagger(a)
    v = (
        np.kron(_sys(PLUS, GROUND), a)
        + np.kron(_sys(GROUND, PLUS), ad)
        + np.kron(_sys(DOUBLE, PLUS), a)
        + np.kron(_sys(PLUS, DOUBLE), ad)
    )
    return np.sqrt(2.0) * p.gamma0 * v


def _mode_ops(p: CommonReservoirParams) -> tuple[np.ndarray, np.ndarray]:
    big_a = np.kron(np.eye(4), annihilation(p.n_fock))
    return big_a, dagger(big_a) @ big_a


def lindblad_rhs(rho, p: CommonReservoirParams) -> np.ndarray:
    """Right-hand side of the pseudomode master equation (matrix form)."""
    rho = np.asarray(rho, dtype=complex)
    v = build_V(p)
    big_a, num = _mode_ops(p)
    comm = v @ rho - rho @ v
    diss = num @ rho + rho @ num - 2.0 * big_a @ rho @ dagger(big_a)
    return -1j * comm - 0.5 * p.big_gamma * diss


def liouvillian(p: CommonReservoirParams) -> np.ndarray:
    """The generator acting on row-major vec(rho): vec(X r Y) = kron(X, Y^T) vec(r)."""
    v = build_V(p)
    big_a, num = _mode_ops(p)
    eye = np.eye(p.dim)
    unitary = -1j * (np.kron(v, eye) - np.kron(eye, v.T))
    diss = np.kron(num, eye) + np.kron(eye, num.T) - 2.0 * np.kron(big_a, big_a.conj())
    return unitary - 0.5 * p.big_gamma * diss


def rk4_step_matrix(gen: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for y' = gen @ y, as a matrix.

    For a constant linear generator the four stages collapse to the degree-4
    Taylor polynomial of exp(h gen); applying it is the same arithmetic as
    the staged update.
    """
    eye = np.eye(gen.shape[0], dtype=complex)
    hg = h * gen
    return eye + hg @ (eye + hg / 2 @ (eye + hg / 3 @ (eye + hg / 4)))


def rk4_step(rho: np.ndarray, p: CommonReservoirParams, h: float) -> np.ndarray:
    """Staged RK4 step on the matrix form; the reference for :func:`rk4_step_matrix`."""
    k1 = lindblad_rhs(rho, p)
    k2 = lindblad_rhs(rho + 0.5 * h * k1, p)
    k3 = lindblad_rhs(rho + 0.5 * h * k2, p)
    k4 = lindblad_rhs(rho + h * k3, p)
    return rho + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def subradiant_population(rho: np.ndarray, n_fock: int) -> np.ndarray:
    d = n_fock + 1
    diag = np.diagonal(rho, axis1=-2, axis2=-1).real
    return diag[..., MINUS * d : (MINUS + 1) * d].sum(axis=-1)


def integrate_master(
    rho0,
    p: CommonReservoirParams,
    t_end: float,
    steps: int = DEFAULT_STEPS,
    *,
    substeps: int = DEFAULT_SUBSTEPS,
    order: int = 3,
) -> Trajectory:
    """Fixed-step RK4 integration of the extended-space master equation.

    The trajectory is sampled at ``steps + 1`` uniform times; each sampling
    interval is covered by ``substeps`` RK4 steps.  Time derivatives up to
    ``order`` come from repeated application of the generator.  Raises
    :class:`InvariantViolation` naming the first step that breaks trace,
    Hermiticity, positivity (checked every ``POSITIVITY_EVERY`` samples) or
    subradiant-population conservation.
    """
    if steps < 100:
        raise ValueError(f"steps must be >= 100, got {steps}")
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (p.dim, p.dim):
        raise ValueError(f"extended state must be {p.dim}x{p.dim}, got {rho0.shape}")
    check_density(rho0, "initial extended state")

    gen = liouvillian(p)
    h = t_end / steps
    prop = np.linalg.matrix_power(rk4_step_matrix(gen, h / substeps), substeps)

    vecs = np.empty((steps + 1, p.dim * p.dim), dtype=complex)
    vecs[0] = rho0.reshape(-1)
    states = vecs.reshape(steps + 1, p.dim, p.dim)
    # a blow-up is reported by the checks below, not by floating-point warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            vecs[k + 1] = prop @ vecs[k]
        tr_err = np.abs(np.trace(states, axis1=1, axis2=2) - 1.0)
        herm = np.abs(states - dagger(states)).max(axis=(1, 2))

    step_ids = np.arange(steps + 1)
    # "not within tolerance" so that NaN counts as a violation
    for bad, name, vals in ((~(tr_err <= 1e-9), "trace", tr_err), (~(herm <= 1e-10), "hermiticity", herm)):
        if bad.any():
            i = int(np.argmax(bad))
            raise InvariantViolation(f"master equation: {name} violated at step {i} ({vals[i]:.3e})")
    sampled = np.unique(np.append(step_ids[::POSITIVITY_EVERY], steps))
    check_density(states[sampled], "master equation", steps=sampled)
    sub = subradiant_population(states, p.n_fock)
    drift = np.abs(sub - sub[0])
    if drift.max() > SUBRADIANT_TOL:
        i = int(drift.argmax())
        raise InvariantViolation(f"master equation: subradiant population drifted at step {i} ({drift[i]:.3e})")

    derivs = []
    cur = vecs
    for _ in range(order):
        cur = cur @ gen.T
        derivs.append(cur.reshape(states.shape))
    times = np.linspace(0.0, t_end, steps + 1)
    return Trajectory(times, states, tuple(derivs))


def reduced_state(rho, n_fock: int = 2) -> np.ndarray:
    """Trace out the pseudomode and return to the computational two-qubit basis."""
    return dressed_transform(partial_trace(rho, (4, n_fock + 1), keep="A"), "toComputational")


def reduced_derivative(rho, p: CommonReservoirParams) -> np.ndarray:
    return reduced_state(lindblad_rhs(rho, p), p.n_fock)


def single_excitation_oracle(t, p: CommonReservoirParams):
    """Amplitude on |+> for an initial |+>, vacuum pseudomode.

    The one-excitation sector is |+,0> <-> |0bar,1> with coupling sqrt(2) gamma0
    and pseudomode amplitude decay Gamma/2, i.e. G'' + (Gamma/2) G' + 2 gamma0^2 G = 0.
    """
    g = amplitude_derivatives(t, 0.5 * p.big_gamma, 2.0 * p.gamma0**2, order=0)[0]
    return g[()] if g.ndim == 0 else g


def evolve(rho0, p: CommonReservoirParams, tau: float, steps: int = DEFAULT_STEPS, *, substeps: int = DEFAULT_SUBSTEPS) -> Trajectory:
    """Reduced computational-basis trajectory for an initial two-qubit state."""
    ext0 = embed_pseudomode(dressed_transform(rho0, "toDressed"), p.n_fock)
    ext = integrate_master(ext0, p, tau, steps, substeps=substeps)
    states = reduced_state(ext.states, p.n_fock)
    derivs = tuple(reduced_state(d, p.n_fock) for d in ext.derivatives)
    return Trajectory(ext.times, states, derivs)
