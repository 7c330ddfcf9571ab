"""Local channel on the oscillator that maps the two displaced branches onto a qubit register.

Kraus operators ``O_j = |e~><a_j| + |g~><b_j|`` for ``j = 0..N``, where
``a_j, b_j`` are the (jointly Loewdin-orthonormalized) vectors
``D(beta)|psi_j>`` and ``D^+(beta)|psi_j>`` built from the eigenvectors of the
initial oscillator state. ``sum_j O_j^+ O_j`` is then an exact projector, and
the complement is sent to a third "fail" register level or discarded.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .hybrid import HybridState, QubitParams
from .linalg import NumericalToleranceError, check_density_matrix, hermitian_part, lowdin
from .oscillator import OscillatorState, displacement_matrix, eigen_cutoff_for_tail, spectral_tail


class ChannelConstructionError(ValueError):
    """The Kraus set is too far from complete on its subspace (``beta`` too small or mismatched)."""


class FailPolicy(str, enum.Enum):
    TRACK_FAIL_FLAG = "track_fail_flag"
    RENORMALIZE_SUCCESS = "renormalize_success"


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """4x4 density matrix in the ``{|e e~>, |e g~>, |g e~>, |g g~>}`` ordering."""

    mat: np.ndarray

    def __post_init__(self):
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (4, 4):
            raise ValueError(f"two-qubit state must be 4x4, got {mat.shape}")
        check_density_matrix(mat, trace_tol=1e-10, herm_tol=1e-10, what="two-qubit state")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)


@dataclass(frozen=True)
class DigitalizeConfig:
    """``kraus_cutoff`` N keeps eigenvectors ``psi_0..psi_N`` of the initial oscillator state.

    ``completeness_tol`` optionally bounds the raw-operator completeness defect.
    By default only a degenerate branch basis is rejected: for mixed oscillator
    states the high-index branches overlap at moderate ``beta`` while carrying
    negligible weight.
    """

    kraus_cutoff: int
    beta: complex
    fail_policy: FailPolicy = FailPolicy.TRACK_FAIL_FLAG
    completeness_tol: float | None = None

    def __post_init__(self):
        if int(self.kraus_cutoff) != self.kraus_cutoff or self.kraus_cutoff < 1:
            raise ValueError(f"kraus_cutoff must be an integer >= 1, got {self.kraus_cutoff!r}")
        object.__setattr__(self, "fail_policy", FailPolicy(self.fail_policy))
        object.__setattr__(self, "beta", complex(self.beta))

    @classmethod
    def for_tail(cls, osc: OscillatorState, beta: complex, eps: float, **kwargs) -> "DigitalizeConfig":
        """Smallest cutoff whose spectral tail is at most ``eps``."""
        return cls(max(1, eigen_cutoff_for_tail(osc, eps)), beta, **kwargs)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Orthonormalized branch vectors (columns) plus the raw-set diagnostics."""

    plus: np.ndarray
    minus: np.ndarray
    completeness_defect: float

    def operators(self) -> np.ndarray:
        """Kraus operators as an array of shape ``(N+1, 2, dim)``."""
        return np.stack([self.plus.conj().T, self.minus.conj().T], axis=1)


@dataclass(frozen=True, eq=False)
class DigitalizeResult:
    state: TwoQubitState
    success_prob: float
    output: np.ndarray
    fail_policy: FailPolicy
    tail_eps: float
    completeness_defect: float

    def fidelity(self, target: TwoQubitState) -> float:
        """Fidelity of the channel output (fail level included) with ``target``."""
        if self.output.shape == (4, 4):
            return state_fidelity(self.output, target.mat)
        embed = np.zeros((6, 6), dtype=complex)
        idx = [0, 1, 3, 4]
        embed[np.ix_(idx, idx)] = target.mat
        return state_fidelity(self.output, embed)


def digitalized_target(qubit: QubitParams) -> TwoQubitState:
    """``p|ee~><ee~| + r|ee~><gg~| + r*|gg~><ee~| + (1-p)|gg~><gg~|``."""
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 0] = qubit.p
    mat[0, 3] = qubit.r
    mat[3, 0] = np.conj(qubit.r)
    mat[3, 3] = 1 - qubit.p
    return TwoQubitState(mat)


def kraus_set(osc: OscillatorState, beta: complex, kraus_cutoff: int) -> KrausSet:
    """Branch vectors for eigenvectors ``0..kraus_cutoff``.

    ``completeness_defect`` is the largest singular value of
    ``sum_j O_j^+ O_j - P_12`` for the raw (non-orthonormalized) operators.
    """
    _, vecs = osc.spectrum
    psi = vecs[:, : kraus_cutoff + 1]
    d = displacement_matrix(beta, osc.dim)
    raw_plus, raw_minus = d @ psi, d.conj().T @ psi
    raw = np.hstack([raw_plus, raw_minus])
    try:
        ortho, _ = lowdin(raw)
    except ValueError as exc:
        raise ChannelConstructionError(f"branch vectors degenerate at beta={beta}: {exc}") from exc
    proj = ortho @ ortho.conj().T
    defect = float(np.linalg.norm(raw @ raw.conj().T - proj, 2))
    n = psi.shape[1]
    return KrausSet(ortho[:, :n], ortho[:, n:], defect)


def _register_block(x: np.ndarray, plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    """``sum_j O_j X O_j^+`` as a 2x2 register matrix."""
    xp, xm = x @ plus, x @ minus
    return np.array([
        [np.einsum("ij,ij->", plus.conj(), xp), np.einsum("ij,ij->", plus.conj(), xm)],
        [np.einsum("ij,ij->", minus.conj(), xp), np.einsum("ij,ij->", minus.conj(), xm)],
    ])


def apply_kraus(rho: HybridState, ks: KrausSet) -> tuple[np.ndarray, np.ndarray]:
    """Return the 4x4 success block and the 2x2 qubit state of the fail sector (both unnormalized)."""
    blocks = {(0, 0): rho.ee, (0, 1): rho.eg, (1, 0): rho.ge, (1, 1): rho.gg}
    success = np.zeros((4, 4), dtype=complex)
    fail = np.zeros((2, 2), dtype=complex)
    for (a, b), x in blocks.items():
        reg = _register_block(x, ks.plus, ks.minus)
        success[2 * a: 2 * a + 2, 2 * b: 2 * b + 2] = reg
        fail[a, b] = np.trace(x) - np.trace(reg)
    return hermitian_part(success), hermitian_part(fail)


def digitalize_channel(rho: HybridState, cfg: DigitalizeConfig) -> DigitalizeResult:
    """Apply the digitalizing channel on the oscillator side.

    With ``track_fail_flag`` the output is a 6x6 state on qubit (x) three-level
    register whose third level flags failure; any Fock-truncation leakage of
    ``rho`` is booked there too, with a maximally mixed qubit. With
    ``renormalize_success`` the success block is simply renormalized.
    ``success_prob`` is the success-sector weight in both cases.
    """
    if rho.osc is None:
        raise ValueError("digitalization needs the initial oscillator state (build with build_resource_state)")
    if rho.beta is not None and abs(rho.beta - cfg.beta) > 1e-12:
        raise ChannelConstructionError(f"channel beta={cfg.beta} does not match state beta={rho.beta}")
    ks = kraus_set(rho.osc, cfg.beta, cfg.kraus_cutoff)
    if cfg.completeness_tol is not None and ks.completeness_defect > cfg.completeness_tol:
        raise ChannelConstructionError(
            f"Kraus completeness defect {ks.completeness_defect:.3e} exceeds {cfg.completeness_tol:g}; "
            f"beta={cfg.beta} too small for cutoff {cfg.kraus_cutoff}"
        )
    success, fail = apply_kraus(rho, ks)
    p_success = float(np.trace(success).real)
    if p_success <= 0:
        raise NumericalToleranceError("digitalization succeeded with zero probability")
    state = TwoQubitState(success / p_success)
    if cfg.fail_policy is FailPolicy.RENORMALIZE_SUCCESS:
        output = state.mat
    else:
        leak = max(0.0, 1.0 - rho.trace)
        output = np.zeros((6, 6), dtype=complex)
        idx = [0, 1, 3, 4]
        output[np.ix_(idx, idx)] = success
        output[np.ix_([2, 5], [2, 5])] = fail + 0.5 * leak * np.eye(2)
    return DigitalizeResult(
        state=state,
        success_prob=p_success,
        output=output,
        fail_policy=cfg.fail_policy,
        tail_eps=spectral_tail(rho.osc, cfg.kraus_cutoff),
        completeness_defect=ks.completeness_defect,
    )


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    lam, u = np.linalg.eigh(hermitian_part(a))
    return (u * np.sqrt(np.clip(lam, 0, None))) @ u.conj().T


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(a) b sqrt(a)))^2 = ||sqrt(a) sqrt(b)||_1^2``.

    The trace-norm form is used: it stays accurate when either state is
    (nearly) pure, where eigenvalue noise under a square root would not.
    """
    sv = np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)
    return float(sv.sum() ** 2)


def fidelity_two_qubit(a: TwoQubitState, b: TwoQubitState) -> float:
    return state_fidelity(a.mat, b.mat)
