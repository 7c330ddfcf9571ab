"""Qubit-oscillator states produced by a qubit-controlled displacement.

A :class:`HybridState` keeps its ``2 dim x 2 dim`` density matrix as four
``dim x dim`` oscillator blocks indexed by the qubit basis ``{|e>, |g>}``
(``sigma_3 |e> = +|e>``). The full matrix, with qubit index major, is only
materialized when an eigensolver needs it.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .linalg import NumericalToleranceError, check_density_matrix
from .oscillator import (
    HERM_TOL,
    PSD_TOL,
    TRACE_TOL,
    OscillatorState,
    TruncationError,
    displacement_matrix,
    truncation_report,
)


@dataclass(frozen=True)
class QubitParams:
    """Initial qubit state ``[[p, r], [r*, 1 - p]]`` in the ``{|e>, |g>}`` basis."""

    p: float
    r: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "r", complex(self.r))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if abs(self.r) ** 2 > self.p * (1.0 - self.p) + 1e-12:
            raise ValueError(f"|r|^2 = {abs(self.r) ** 2:.6g} exceeds p(1-p) = {self.p * (1 - self.p):.6g}")

    @classmethod
    def polar(cls, p: float, r_abs: float, r_arg: float = 0.0) -> "QubitParams":
        return cls(p, cmath.rect(r_abs, r_arg))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.p, self.r], [self.r.conjugate(), 1.0 - self.p]], dtype=complex)


@dataclass(frozen=True)
class InputPureState:
    """Pure qubit ``eta|e> + gamma|g>``."""

    eta: complex
    gamma: complex

    def __post_init__(self):
        norm = abs(self.eta) ** 2 + abs(self.gamma) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"input state not normalized: |eta|^2 + |gamma|^2 = {norm!r}")

    @classmethod
    def from_bloch(cls, theta: float, phi: float) -> "InputPureState":
        return cls(complex(np.cos(theta / 2)), complex(np.exp(1j * phi) * np.sin(theta / 2)))

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.eta, self.gamma], dtype=complex)


@dataclass(frozen=True, eq=False)
class HybridState:
    """Bipartite qubit (A) x oscillator (B) density matrix in block form.

    ``qubit``, ``osc`` and ``beta`` record how the state was built, when known;
    protocol simulators read them to set up measurements and corrections.
    """

    ee: np.ndarray
    eg: np.ndarray
    ge: np.ndarray
    gg: np.ndarray
    trace_tol: float = TRACE_TOL
    qubit: QubitParams | None = None
    osc: OscillatorState | None = None
    beta: complex | None = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        blocks = [np.array(b, dtype=complex) for b in (self.ee, self.eg, self.ge, self.gg)]
        for name, b in zip(("ee", "eg", "ge", "gg"), blocks):
            b.setflags(write=False)
            object.__setattr__(self, name, b)
        if self.validate:
            err = np.abs(self.ge - self.eg.conj().T).max()
            if err > HERM_TOL:
                raise NumericalToleranceError(f"ge block is not eg^dagger (deviation {err:.3e})")
            check_density_matrix(self.full, trace_tol=self.trace_tol, herm_tol=HERM_TOL,
                                 psd_tol=PSD_TOL, what="hybrid state")

    @property
    def dim(self) -> int:
        return self.ee.shape[0]

    @cached_property
    def full(self) -> np.ndarray:
        out = np.block([[self.ee, self.eg], [self.ge, self.gg]])
        out.setflags(write=False)
        return out

    @property
    def trace(self) -> float:
        return float((np.trace(self.ee) + np.trace(self.gg)).real)

    @classmethod
    def from_full(cls, mat: np.ndarray, **kwargs) -> "HybridState":
        d = mat.shape[0] // 2
        return cls(mat[:d, :d], mat[:d, d:], mat[d:, :d], mat[d:, d:], **kwargs)


@dataclass(frozen=True, eq=False)
class FanoVector:
    """Operator-valued Bloch vector ``v_mu = tr_A(rho sigma_mu)``; ``v0`` is ``rho_B``."""

    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray

    def __post_init__(self):
        for name in ("v0", "v1", "v2", "v3"):
            v = np.asarray(getattr(self, name))
            err = np.abs(v - v.conj().T).max()
            if err > HERM_TOL:
                raise NumericalToleranceError(f"Fano component {name} is not Hermitian (deviation {err:.3e})")

    @property
    def spatial(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.v1, self.v2, self.v3


def build_resource_state(
    qubit: QubitParams,
    osc: OscillatorState,
    beta: complex,
    trace_tol: float | None = None,
    validate: bool = True,
) -> HybridState:
    """Apply ``D(sigma_3 beta)`` to ``rho_A^0 (x) rho_B^0``.

    Blocks: ``ee = p D rho D^+``, ``gg = (1-p) D^+ rho D``, ``eg = r D rho D``
    and ``ge = r* D^+ rho D^+``. Raises :class:`TruncationError` if the
    displaced branches leak more than ``trace_tol`` past the Fock cutoff.
    """
    tol = osc.trace_tol if trace_tol is None else trace_tol
    beta = complex(beta)
    d = displacement_matrix(beta, osc.dim)
    dd = d.conj().T
    rho = osc.mat
    d_rho = d @ rho
    dd_rho = dd @ rho
    ee = qubit.p * (d_rho @ dd)
    gg = (1.0 - qubit.p) * (dd_rho @ d)
    eg = qubit.r * (d_rho @ d)
    ge = eg.conj().T
    # exact Hermitian symmetrization of the diagonal blocks
    ee = 0.5 * (ee + ee.conj().T)
    gg = 0.5 * (gg + gg.conj().T)
    trace = float((np.trace(ee) + np.trace(gg)).real)
    if trace < 1.0 - tol:
        report = truncation_report(osc, [beta, -beta])
        raise TruncationError(
            f"displaced state leaks {1 - trace:.3e} past dim={osc.dim} at beta={beta} "
            f"(tolerance {tol:g}); raise the Fock cutoff",
            1.0 - trace,
            report,
        )
    return HybridState(ee, eg, ge, gg, trace_tol=tol, qubit=qubit, osc=osc, beta=beta, validate=validate)


def product_state(qubit: QubitParams, osc: OscillatorState) -> HybridState:
    rho = osc.mat
    return HybridState(qubit.p * rho, qubit.r * rho, np.conj(qubit.r) * rho, (1 - qubit.p) * rho,
                       trace_tol=osc.trace_tol, qubit=qubit, osc=osc, beta=0j)


def partial_transpose_qubit(rho: HybridState) -> np.ndarray:
    """Full ``2 dim`` matrix of ``rho^{T_A}``: diagonal blocks kept, eg and ge swapped."""
    return np.block([[rho.ee, rho.ge], [rho.eg, rho.gg]])


def partial_trace_qubit(rho: HybridState) -> OscillatorState:
    """Reduced oscillator state ``rho_B = ee + gg``."""
    return OscillatorState(rho.ee + rho.gg, trace_tol=rho.trace_tol)


def partial_trace_osc(rho: HybridState) -> np.ndarray:
    """Reduced ``2 x 2`` qubit state."""
    return np.array(
        [[np.trace(rho.ee), np.trace(rho.eg)], [np.trace(rho.ge), np.trace(rho.gg)]],
        dtype=complex,
    )


def fano_components(rho: HybridState) -> FanoVector:
    return FanoVector(
        v0=rho.ee + rho.gg,
        v1=rho.eg + rho.ge,
        v2=1j * rho.eg - 1j * rho.ge,
        v3=rho.ee - rho.gg,
    )


def fano_reconstruct(v: FanoVector) -> np.ndarray:
    """Inverse of :func:`fano_components`: ``(1/2) sum_mu sigma_mu (x) v_mu``."""
    paulis = (
        np.eye(2),
        np.array([[0, 1], [1, 0]]),
        np.array([[0, -1j], [1j, 0]]),
        np.array([[1, 0], [0, -1]]),
    )
    return 0.5 * sum(np.kron(s, vm) for s, vm in zip(paulis, (v.v0, v.v1, v.v2, v.v3)))


def rotate_qubit_phase(rho: HybridState, theta: float) -> HybridState:
    """Conjugate the qubit by ``diag(e^{i theta}, 1)``: ``eg -> e^{i theta} eg``."""
    ph = cmath.exp(1j * theta)
    qubit = None if rho.qubit is None else QubitParams(rho.qubit.p, ph * rho.qubit.r)
    return replace(rho, eg=ph * rho.eg, ge=np.conj(ph) * rho.ge, qubit=qubit, validate=False)


def overlap_diagnostic(rho: HybridState) -> float:
    """``|chi_B0(2 beta)|``: residual overlap between the two displaced branches."""
    if rho.osc is None or rho.beta is None:
        raise ValueError("state carries no construction data (osc, beta)")
    d2 = displacement_matrix(2 * rho.beta, rho.dim)
    return float(abs(np.sum(rho.osc.mat.T * d2)))
