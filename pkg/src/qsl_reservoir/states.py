"""Initial states: extended Werner-like (EWL) families and basis helpers.

Two-qubit computational ordering is |00>, |01>, |10>, |11> with the left
label the most significant Kronecker factor and |1> the excited level.
The dressed basis used for a common reservoir is ordered
|0bar> = |00>, |+>, |->, |2bar> = |11>, with |+-> = (|10> +- |01>)/sqrt(2).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .qmath import check_density, dagger, ket, projector

SQRT_HALF = np.sqrt(0.5)

# dressed basis labels -> index
GROUND, PLUS, MINUS, DOUBLE = range(4)


class Family(str, enum.Enum):
    PSI1 = "psi1"  # alpha|01> + e^{i theta} sqrt(1 - alpha^2)|10>
    PSI2 = "psi2"  # alpha|00> + e^{i theta} sqrt(1 - alpha^2)|11>


@dataclass(frozen=True)
class EWLParams:
    family: Family = Family.PSI1
    r: float = 1.0
    alpha: float = SQRT_HALF
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


def bell_like(family: Family | str, alpha: float, theta: float = 0.0) -> np.ndarray:
    family = Family(family)
    lo, hi = (1, 2) if family is Family.PSI1 else (0, 3)
    psi = np.zeros(4, dtype=complex)
    psi[lo] = alpha
    psi[hi] = np.exp(1j * theta) * np.sqrt(max(1.0 - alpha * alpha, 0.0))
    return psi


def ewl_state(p: EWLParams) -> np.ndarray:
    """r |Psi><Psi| + (1 - r)/4 * I for the chosen Bell-like family."""
    psi = bell_like(p.family, p.alpha, p.theta)
    rho = p.r * projector(psi) + 0.25 * (1.0 - p.r) * np.eye(4)
    return check_density(rho, "EWL state")


def dressed_unitary() -> np.ndarray:
    """Columns are the dressed basis vectors in computational coordinates."""
    u = np.zeros((4, 4), dtype=complex)
    u[0, GROUND] = 1.0
    u[2, PLUS] = u[1, PLUS] = SQRT_HALF
    u[2, MINUS], u[1, MINUS] = SQRT_HALF, -SQRT_HALF
    u[3, DOUBLE] = 1.0
    return u


_U = dressed_unitary()


def dressed_transform(rho, direction: str = "toDressed") -> np.ndarray:
    """Change a two-qubit operator (or stack) between computational and dressed bases."""
    rho = np.asarray(rho, dtype=complex)
    if direction == "toDressed":
        return dagger(_U) @ rho @ _U
    if direction == "toComputational":
        return _U @ rho @ dagger(_U)
    raise ValueError(f"direction must be 'toDressed' or 'toComputational', got {direction!r}")


def embed_pseudomode(rho_dressed, n_fock: int = 2) -> np.ndarray:
    """rho_dressed (x) |0><0| on the system (x) pseudomode space, Fock cutoff ``n_fock``."""
    if n_fock < 2:
        raise ValueError(f"Fock truncation must be >= 2 (two excitations possible), got {n_fock}")
    vac = projector(ket(0, n_fock + 1))
    return np.kron(np.asarray(rho_dressed, dtype=complex), vac)
