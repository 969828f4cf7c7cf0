from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmath import InvariantViolation, check_density, dagger

DERIVATIVE_TOL = 1e-10


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled states and their time derivatives.

    ``derivatives[k]`` holds the (k+1)-th derivative at every sample, so
    ``derivatives[0]`` is rho-dot.  At least the first derivative is
    required; the X(tau) quadrature uses the second and third when present.
    """

    times: np.ndarray
    states: np.ndarray
    derivatives: tuple[np.ndarray, ...]

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def rho_dot(self) -> np.ndarray:
        return self.derivatives[0]

    def validate(self, what: str = "trajectory") -> "Trajectory":
        t = self.times
        if t.ndim != 1 or len(t) < 2 or t[0] != 0.0:
            raise InvariantViolation(f"{what}: times must start at 0 and hold >= 2 samples")
        if np.abs(np.diff(t) - self.step).max() > 1e-12:
            raise InvariantViolation(f"{what}: time grid is not uniform")
        check_density(self.states, what)
        d1 = self.rho_dot
        tr = np.abs(np.trace(d1, axis1=-2, axis2=-1))
        herm = np.abs(d1 - dagger(d1)).max(axis=(-2, -1))
        if tr.max() > DERIVATIVE_TOL:
            raise InvariantViolation(
                f"{what}: derivative not traceless at step {int(tr.argmax())} ({tr.max():.3e})"
            )
        if herm.max() > DERIVATIVE_TOL:
            raise InvariantViolation(
                f"{what}: derivative not Hermitian at step {int(herm.argmax())} ({herm.max():.3e})"
            )
        return self
