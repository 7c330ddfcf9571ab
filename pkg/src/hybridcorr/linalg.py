"""Small dense linear-algebra helpers shared across modules."""

from __future__ import annotations

import numpy as np


class NumericalToleranceError(ValueError):
    """A state or operator violated a numerical invariant beyond tolerance."""


def hermitian_part(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.conj().T)


def check_density_matrix(
    mat: np.ndarray,
    *,
    trace_tol: float = 1e-6,
    herm_tol: float = 1e-12,
    psd_tol: float = -1e-10,
    what: str = "state",
) -> None:
    """Raise :class:`NumericalToleranceError` unless ``mat`` is a (sub)normalized state.

    The trace may fall short of one by at most ``trace_tol``; that shortfall is
    the weight lost to Fock-space truncation.
    """
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NumericalToleranceError(f"{what}: expected a square matrix, got {mat.shape}")
    herm_err = np.abs(mat - mat.conj().T).max()
    if herm_err > herm_tol:
        raise NumericalToleranceError(f"{what}: not Hermitian (max deviation {herm_err:.3e})")
    tr = np.trace(mat)
    if abs(tr.imag) > herm_tol * mat.shape[0] or not (1.0 - trace_tol <= tr.real <= 1.0 + 1e-10):
        raise NumericalToleranceError(f"{what}: trace {tr.real:.12g} outside [1 - {trace_tol:g}, 1]")
    lam_min = np.linalg.eigvalsh(hermitian_part(mat))[0]
    if lam_min < psd_tol:
        raise NumericalToleranceError(f"{what}: negative eigenvalue {lam_min:.3e}")


def entropy(mat_or_eigs: np.ndarray, base: float = 2.0) -> float:
    """Von Neumann entropy of a density matrix, or Shannon entropy of a spectrum.

    Eigenvalues below 1e-15 are dropped (0 log 0 = 0).
    """
    arr = np.asarray(mat_or_eigs)
    lam = np.linalg.eigvalsh(hermitian_part(arr)) if arr.ndim == 2 else arr.real
    lam = lam[lam > 1e-15]
    return float(-(lam * np.log(lam)).sum() / np.log(base))


def lowdin(vectors: np.ndarray, min_gram_eig: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric (Loewdin) orthonormalization of the columns of ``vectors``.

    Returns ``(orthonormal_columns, gram)``. Raises ``ValueError`` when the Gram
    matrix is numerically singular (the set is linearly dependent).
    """
    gram = vectors.conj().T @ vectors
    lam, u = np.linalg.eigh(hermitian_part(gram))
    if lam[0] < min_gram_eig:
        raise ValueError(f"degenerate basis: smallest Gram eigenvalue {lam[0]:.3e}")
    inv_sqrt = (u / np.sqrt(lam)) @ u.conj().T
    return vectors @ inv_sqrt, gram


def partial_transpose(mat: np.ndarray, dim_a: int) -> np.ndarray:
    """Partial transpose on the first tensor factor (dimension ``dim_a``)."""
    dim_b = mat.shape[0] // dim_a
    t = mat.reshape(dim_a, dim_b, dim_a, dim_b)
    return t.transpose(2, 1, 0, 3).reshape(mat.shape)


def negativity_of_matrix(mat: np.ndarray, dim_a: int) -> float:
    """``||rho^T_A||_1 - tr(rho)``, i.e. twice the summed weight of negative eigenvalues."""
    lam = np.linalg.eigvalsh(hermitian_part(partial_transpose(mat, dim_a)))
    return float(-2.0 * lam[lam < 0].sum())


def partial_trace(mat: np.ndarray, dim_a: int, keep: str) -> np.ndarray:
    dim_b = mat.shape[0] // dim_a
    t = mat.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "a":
        return np.einsum("ijkj->ik", t)
    if keep == "b":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'a' or 'b', got {keep!r}")


def bloch_projector(theta: float, phi: float) -> np.ndarray:
    """Qubit projector onto ``cos(t/2)|0> + e^{i phi} sin(t/2)|1>``."""
    k = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return np.outer(k, k.conj())


def bloch_ket(theta: float, phi: float) -> np.ndarray:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
