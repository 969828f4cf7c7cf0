"""Dense complex linear algebra and quantum-information primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Density
matrices are validated on demand with :func:`check_density`, which also
accepts stacks of shape ``(..., d, d)``.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-8
FIDELITY_CLAMP = 1e-12


class InvariantViolation(RuntimeError):
    """A numerical invariant (trace, Hermiticity, positivity, ...) failed."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(np.conj(m), -1, -2)


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def tensor(a, b) -> np.ndarray:
    """Kronecker product; the left factor is the most significant index."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(rho, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``rho`` may be a single ``(dA*dB, dA*dB)`` matrix or a stack of them.
    ``keep`` selects the surviving factor, ``"A"`` (left) or ``"B"`` (right).
    """
    rho = np.asarray(rho, dtype=complex)
    d_a, d_b = dims
    n = d_a * d_b
    if rho.shape[-2:] != (n, n):
        raise ValueError(f"operator shape {rho.shape[-2:]} does not match dims {dims}")
    t = rho.reshape(rho.shape[:-2] + (d_a, d_b, d_a, d_b))
    if keep == "A":
        return np.einsum("...ijkj->...ik", t)
    if keep == "B":
        return np.einsum("...ijil->...jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def hermitian_eigenvalues(m, tol: float = 1e-8) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix (or stack)."""
    m = np.asarray(m, dtype=complex)
    dev = np.abs(m - dagger(m)).max(initial=0.0)
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max |m - m^dagger| = {dev:.3e})")
    return np.linalg.eigvalsh(0.5 * (m + dagger(m)))


def purity(rho) -> float:
    rho = as_matrix(rho)
    return float(np.einsum("ij,ji->", rho, rho).real)


def hs_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tr(a b) over the trailing two axes; real part only (Hermitian inputs)."""
    return np.einsum("...ij,...ji->...", a, b).real


def fidelity(rho0, rhot) -> float:
    """Normalised Hilbert-Schmidt overlap Tr(r0 rt) / sqrt(Tr r0^2 Tr rt^2)."""
    rho0 = as_matrix(rho0)
    rhot = as_matrix(rhot)
    if rho0.shape != rhot.shape:
        raise ValueError(f"dimension mismatch: {rho0.shape} vs {rhot.shape}")
    overlap = np.einsum("ij,ji->", rho0, rhot)
    if abs(overlap.imag) > FIDELITY_CLAMP:
        raise InvariantViolation(f"fidelity overlap has imaginary part {overlap.imag:.3e}")
    f = overlap.real / np.sqrt(purity(rho0) * purity(rhot))
    if f > 1.0 + FIDELITY_CLAMP:
        raise InvariantViolation(f"fidelity {f!r} exceeds 1 beyond rounding")
    return float(min(max(f, 0.0), 1.0))


def density_defects(rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-matrix (|tr - 1|, max Hermiticity defect, min eigenvalue)."""
    rho = np.asarray(rho, dtype=complex)
    tr_err = np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1.0)
    herm = np.abs(rho - dagger(rho)).max(axis=(-2, -1))
    lam_min = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[..., 0]
    return tr_err, herm, lam_min


def check_density(rho, what: str = "state", *, steps=None) -> np.ndarray:
    """Raise :class:`InvariantViolation` unless ``rho`` is a valid density matrix.

    Works on a single matrix or a stack; for stacks the first offending
    index (or ``steps[index]`` when given) is named in the message.
    """
    rho = np.asarray(rho, dtype=complex)
    finite = np.isfinite(rho).all(axis=(-2, -1))
    if not np.all(finite):
        i = int(np.argmin(np.atleast_1d(finite)))
        where = "" if rho.ndim == 2 else f" at step {steps[i] if steps is not None else i}"
        raise InvariantViolation(f"{what}: non-finite entries{where}")
    tr_err, herm, lam_min = density_defects(rho)
    checks = (
        (tr_err > TRACE_TOL, "trace", tr_err),
        (herm > HERMITIAN_TOL, "hermiticity", herm),
        (lam_min < -PSD_TOL, "positivity", lam_min),
    )
    for bad, name, values in checks:
        bad = np.atleast_1d(bad)
        if bad.any():
            i = int(np.argmax(bad))
            where = "" if rho.ndim == 2 else f" at step {steps[i] if steps is not None else i}"
            raise InvariantViolation(
                f"{what}: {name} violated{where} (value {np.atleast_1d(values)[i]:.3e})"
            )
    return rho
