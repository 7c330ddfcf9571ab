"""Single bosonic mode on a truncated Fock basis.

Everything here is a pure function of immutable inputs. Matrices are dense
``complex128`` arrays indexed by Fock number ``0..dim-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .linalg import NumericalToleranceError, check_density_matrix

TRACE_TOL = 1e-6
PSD_TOL = -1e-10
HERM_TOL = 1e-12


class TruncationError(NumericalToleranceError):
    """The Fock cutoff is too small; ``deficit`` carries the lost weight."""

    def __init__(self, message: str, deficit: float, report: "TruncationReport | None" = None):
        super().__init__(message)
        self.deficit = deficit
        self.report = report


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise ValueError(f"Fock cutoff must be an integer >= 2, got {dim!r}")
    return int(dim)


@dataclass(frozen=True, eq=False)
class OscillatorState:
    """Density matrix of a qumode on Fock levels ``0..dim-1``.

    The trace may be short of one by at most ``trace_tol`` (truncation leakage).
    """

    mat: np.ndarray
    trace_tol: float = TRACE_TOL
    dim: int = field(init=False)

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        _check_dim(mat.shape[0])
        check_density_matrix(mat, trace_tol=self.trace_tol, herm_tol=HERM_TOL, psd_tol=PSD_TOL,
                             what="oscillator state")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dim", mat.shape[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (descending) and eigenvectors (columns) of the state.

        Ties are broken by the Fock index of each eigenvector's largest
        component, so diagonal states give ``psi_j = |j>``. Each eigenvector is
        phased so its largest component is real and positive.
        """
        mat = self.mat
        if np.count_nonzero(mat - np.diag(np.diag(mat))) == 0:
            lam = np.diag(mat).real.copy()
            vecs = np.eye(self.dim, dtype=complex)
        else:
            lam, vecs = np.linalg.eigh(mat)
        peak = np.abs(vecs).argmax(axis=0)
        order = np.lexsort((peak, -np.round(lam, 14)))
        lam, vecs, peak = lam[order], vecs[:, order], peak[order]
        phases = vecs[peak, np.arange(vecs.shape[1])]
        vecs = vecs * (np.abs(phases) / phases)
        lam = np.clip(lam, 0.0, None)
        lam.setflags(write=False)
        vecs.setflags(write=False)
        return lam, vecs


@dataclass(frozen=True)
class TruncationReport:
    """Truncation diagnostics; every field lies in ``[0, 1]``.

    ``trace_deficit`` is the weight the state itself lost to the Fock cutoff,
    ``tail_eps`` the spectral weight beyond the Kraus cutoff, and
    ``containment_margin`` the worst-case weight sitting in (or beyond) the top
    10% of Fock levels after any pending displacement.
    """

    trace_deficit: float
    tail_eps: float
    containment_margin: float


def vacuum(dim: int) -> OscillatorState:
    mat = np.zeros((_check_dim(dim),) * 2, dtype=complex)
    mat[0, 0] = 1.0
    return OscillatorState(mat)


def fock_state(n: int, dim: int) -> OscillatorState:
    mat = np.zeros((_check_dim(dim),) * 2, dtype=complex)
    mat[n, n] = 1.0
    return OscillatorState(mat)


def thermal_populations(nbar: float, dim: int) -> np.ndarray:
    """``s_n = nbar^n / (1 + nbar)^(n+1)`` for ``n < dim``."""
    if nbar < 0:
        raise ValueError(f"mean thermal occupation must be >= 0, got {nbar}")
    n = np.arange(_check_dim(dim))
    if nbar == 0:
        return (n == 0).astype(float)
    ratio = nbar / (1.0 + nbar)
    return np.exp(n * np.log(ratio)) / (1.0 + nbar)


def thermal_deficit(nbar: float, dim: int) -> float:
    """Exact weight of a thermal state above the cutoff, ``(nbar/(1+nbar))^dim``."""
    return 0.0 if nbar == 0 else (nbar / (1.0 + nbar)) ** dim


def thermal_state(nbar: float, dim: int, trace_tol: float = TRACE_TOL) -> OscillatorState:
    pops = thermal_populations(nbar, dim)
    deficit = thermal_deficit(nbar, dim)
    if deficit > trace_tol:
        raise TruncationError(
            f"thermal state nbar={nbar} loses weight {deficit:.3e} at dim={dim} "
            f"(tolerance {trace_tol:g})",
            deficit,
        )
    return OscillatorState(np.diag(pops).astype(complex), trace_tol=trace_tol)


def thermal_tail_length(nbar: float, tol: float = 1e-10) -> int:
    """Smallest ``n`` with ``sum_{k >= n} s_k <= tol``."""
    if nbar == 0:
        return 1
    return max(1, math.ceil(math.log(tol) / math.log(nbar / (1.0 + nbar))))


def recommended_dim(beta_total: float, tail_length: int = 1) -> int:
    """Rule-of-thumb cutoff ``ceil((|beta_total| + 6)^2) + tail_length``.

    ``beta_total`` should be the largest displacement in any operator product
    (``2 beta`` for partial transposes and Bell measurements).
    """
    return math.ceil((abs(beta_total) + 6.0) ** 2) + int(tail_length)


@lru_cache(maxsize=64)
def _displacement_cached(beta: complex, dim: int) -> np.ndarray:
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    lo = np.minimum(m, n)
    k = np.abs(m - n)
    x = abs(beta) ** 2
    if beta == 0:
        out = np.eye(dim, dtype=complex)
    else:
        # <m|D|n> = sqrt(lo!/(lo+k)!) e^{-x/2} |beta|^k L_lo^(k)(x) times a phase
        log_mag = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) - 0.5 * x + k * math.log(abs(beta))
        lag = eval_genlaguerre(lo, k, x)
        unit = beta / abs(beta)
        phase = np.where(m >= n, unit ** k, (-np.conj(unit)) ** k)
        out = np.exp(log_mag) * lag * phase
    if not np.isfinite(out).all():
        raise NumericalToleranceError(f"displacement matrix overflow at beta={beta}, dim={dim}")
    out.setflags(write=False)
    return out


def displacement_matrix(beta: complex, dim: int) -> np.ndarray:
    """Matrix elements ``<m|D(beta)|n>`` on the truncated Fock basis.

    Uses the associated-Laguerre closed form with log-factorials. The entries
    are exact (not those of a truncated generator), so ``D @ rho`` is exact on
    every retained row whenever ``rho`` lives inside the cutoff.
    """
    return _displacement_cached(complex(beta), _check_dim(dim))


def coherent_state(beta: complex, dim: int) -> np.ndarray:
    """Amplitudes ``beta^m e^{-|beta|^2/2} / sqrt(m!)`` of ``|beta>``, truncated."""
    return np.array(displacement_matrix(beta, dim)[:, 0])


def displace(state: OscillatorState | np.ndarray, beta: complex) -> np.ndarray:
    """``D(beta) rho D(beta)^dagger`` as a raw matrix (no validation)."""
    mat = state.mat if isinstance(state, OscillatorState) else state
    d = displacement_matrix(beta, mat.shape[0])
    return d @ mat @ d.conj().T


def purity(state: OscillatorState) -> float:
    m = state.mat
    return float(np.vdot(m, m).real)


def char_fn(state: OscillatorState, alpha: complex) -> complex:
    """Characteristic function ``tr[rho D(alpha)]``."""
    d = displacement_matrix(alpha, state.dim)
    return complex(np.sum(state.mat.T * d))


def spectral_tail(state: OscillatorState, cutoff: int) -> float:
    """``1 - sum_{j <= cutoff} s_j``: spectral weight beyond eigenvector ``cutoff``.

    Measured against unit trace, so Fock-truncation leakage is included.
    """
    lam, _ = state.spectrum
    return float(min(1.0, max(0.0, 1.0 - lam[: cutoff + 1].sum())))


def truncation_report(
    state: OscillatorState,
    pending_displacements: Iterable[complex] = (),
    kraus_cutoff: int | None = None,
) -> TruncationReport:
    """Diagnose how well ``state`` (and its displaced images) fit the cutoff.

    ``containment_margin`` is ``max`` over the undisplaced state and each
    pending displacement of ``tr(rho) - (weight on the lower 90% of levels)``,
    which counts both the top-10% weight and anything pushed past the cutoff.
    """
    dim = state.dim
    deficit = min(1.0, max(0.0, 1.0 - state.trace))
    tail = spectral_tail(state, kraus_cutoff) if kraus_cutoff is not None else deficit
    lower = int(math.floor(0.9 * dim))
    margin = 0.0
    for beta in (0.0, *pending_displacements):
        pops = np.diag(displace(state, beta)).real if beta != 0 else np.diag(state.mat).real
        margin = max(margin, state.trace - pops[:lower].sum())
    margin = min(1.0, max(0.0, margin))
    return TruncationReport(trace_deficit=deficit, tail_eps=tail, containment_margin=margin)


def eigen_cutoff_for_tail(state: OscillatorState, eps: float) -> int:
    """Smallest Kraus cutoff ``N`` (indices ``0..N``) with spectral tail <= ``eps``."""
    lam, _ = state.spectrum
    missing = 1.0 - np.cumsum(lam)
    ok = np.nonzero(missing <= eps)[0]
    return int(ok[0]) if ok.size else state.dim - 1


def eigvecs(state: OscillatorState, n_kept: int | None = None) -> np.ndarray:
    lam, vecs = state.spectrum
    return vecs if n_kept is None else vecs[:, :n_kept]


def as_state(mat: np.ndarray | Sequence[Sequence[complex]], trace_tol: float = TRACE_TOL) -> OscillatorState:
    return OscillatorState(np.asarray(mat, dtype=complex), trace_tol=trace_tol)
