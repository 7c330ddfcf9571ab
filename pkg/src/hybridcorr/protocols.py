"""Hybrid teleportation (oscillator-side sender) and remote state preparation.

Finite-``beta`` choices:

* the hybrid Bell vectors and the branch subspaces behind the pi-phase shift
  are Loewdin-orthonormalized, which reduces to the ideal sets as beta grows;
* whatever the truncated measurement does not cover counts as failure with
  fidelity zero and shows up in ``success_prob`` rather than being
  renormalized away.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .digitalize import _register_block, kraus_set
from .hybrid import HybridState, InputPureState, rotate_qubit_phase
from .linalg import hermitian_part, lowdin
from .oscillator import OscillatorState, coherent_state, displacement_matrix, eigen_cutoff_for_tail

TELEPORT_CLASSICAL_THRESHOLD = 2.0 / 3.0
DEFAULT_TAIL_EPS = 1e-7
MIN_BRANCH_GRAM_EIG = 1e-6

log = logging.getLogger(__name__)

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)


class RspMode(str, enum.Enum):
    UNITARY = "unitary_correction"
    DIGITALIZING = "digitalizing_correction"


def payoff(avg_fidelity: float, classical_threshold: float) -> float:
    """Normalized excess over the classical threshold, clamped at zero."""
    if classical_threshold >= 1.0:
        return 0.0
    return max(0.0, avg_fidelity - classical_threshold) / (1.0 - classical_threshold)


def _osc_and_beta(rho: HybridState, beta: complex | None) -> tuple[OscillatorState, complex]:
    if rho.osc is None:
        raise ValueError("protocol simulation needs a state built by build_resource_state")
    beta = rho.beta if beta is None else complex(beta)
    if beta is None:
        raise ValueError("displacement beta unknown")
    return rho.osc, beta


def default_n_kept(
    osc: OscillatorState,
    eps: float = DEFAULT_TAIL_EPS,
    beta: complex | None = None,
    min_gram_eig: float = MIN_BRANCH_GRAM_EIG,
) -> int:
    """Number of oscillator eigenvectors needed for a spectral tail <= ``eps``.

    With ``beta`` given, the count is lowered when needed so that the branch
    vectors ``D(+-beta)|psi_m>`` stay linearly independent (smallest Gram
    eigenvalue >= ``min_gram_eig``); the dropped tail then shows up as failure
    weight. Broad states at moderate ``beta`` hit this limit.
    """
    n = eigen_cutoff_for_tail(osc, eps) + 1
    if beta is None:
        return n
    _, psi = osc.spectrum
    d = displacement_matrix(beta, osc.dim)
    branches = np.hstack([d @ psi[:, :n], d.conj().T @ psi[:, :n]])
    gram = hermitian_part(branches.conj().T @ branches)

    def smallest(k: int) -> float:
        idx = np.r_[0:k, n: n + k]
        return float(np.linalg.eigvalsh(gram[np.ix_(idx, idx)])[0])

    if smallest(n) >= min_gram_eig:
        return n
    # principal submatrices: the smallest eigenvalue is non-increasing in k
    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (mid, hi) if smallest(mid) >= min_gram_eig else (lo, mid)
    if lo == 0:
        raise ValueError(f"degenerate basis: branches overlap at beta={beta}")
    log.warning("keeping %d of %d oscillator eigenvectors at beta=%s (branch overlap); spectral tail %.3e",
                lo, n, beta, 1.0 - float(np.sum(osc.spectrum[0][:lo])))
    return lo


# ----------------------------------------------------------------------- teleportation


@dataclass(frozen=True, eq=False)
class BellBasis:
    """Orthonormal hybrid Bell vectors on (input qubit) x (oscillator).

    ``vectors`` has one column per label; ``labels[k] = (sign, family, m)`` with
    sign in ``{+1, -1}`` and family ``"phi"`` or ``"xi"``. ``gram`` is the Gram
    matrix of the raw vectors before orthonormalization.
    """

    vectors: np.ndarray
    labels: list[tuple[int, str, int]]
    gram: np.ndarray


def hybrid_bell_basis(osc_eigvecs: np.ndarray, beta: complex, n_kept: int | None = None) -> BellBasis:
    """``phi_m^+- = (|e> D|psi_m> +- |g> D^+|psi_m>)/sqrt2``, ``xi_m^+-`` with D and D^+ swapped.

    Raises ``ValueError`` when the raw set is degenerate (e.g. ``beta = 0``).
    """
    psi = osc_eigvecs if n_kept is None else osc_eigvecs[:, :n_kept]
    dim, n = psi.shape
    d = displacement_matrix(beta, dim)
    plus, minus = d @ psi, d.conj().T @ psi
    cols, labels = [], []
    for family, (top, bot) in (("phi", (plus, minus)), ("xi", (minus, plus))):
        for sign in (1, -1):
            cols.append(np.vstack([top, sign * bot]) / math.sqrt(2))
            labels += [(sign, family, m) for m in range(n)]
    raw = np.hstack(cols)
    vecs, gram = lowdin(raw)
    return BellBasis(vecs, labels, gram)


def _alice_correction(sign: int, family: str, r: complex) -> np.ndarray:
    rot = np.diag([abs(r) / r if r != 0 else 1.0, 1.0]).astype(complex)
    c = rot
    if family == "xi":
        c = _X @ c
    if sign < 0:
        c = _Z @ c
    return c


@dataclass(frozen=True, eq=False)
class TeleportResult:
    outcome_states: dict[tuple[str, str], np.ndarray]
    per_input_fidelity: float
    average_fidelity: float
    classical_threshold: float
    payoff: float
    success_prob: float


class _Teleporter:
    """Caches the Bell basis and block products shared by all inputs."""

    def __init__(self, rho: HybridState, beta: complex | None = None, n_kept: int | None = None):
        osc, beta = _osc_and_beta(rho, beta)
        if rho.qubit is None:
            raise ValueError("qubit parameters unknown")
        self.r = rho.qubit.r
        n_kept = default_n_kept(osc, beta=beta) if n_kept is None else n_kept
        _, psi = osc.spectrum
        self.basis = hybrid_bell_basis(psi, beta, n_kept)
        dim = rho.dim
        v_e, v_g = self.basis.vectors[:dim], self.basis.vectors[dim:]
        self.v = (v_e, v_g)
        blocks = ((rho.ee, rho.eg), (rho.ge, rho.gg))
        # rho_ab @ v_q for all blocks and both input components
        self.prod = [[[blocks[a][b] @ v for v in self.v] for b in range(2)] for a in range(2)]
        self.corrections = [_alice_correction(s, f, self.r) for s, f, _ in self.basis.labels]

    def outcomes(self, inp: InputPureState) -> dict[tuple[str, str], np.ndarray]:
        ce, cg = np.conj(inp.eta), np.conj(inp.gamma)
        w = ce * self.v[0] + cg * self.v[1]
        m = np.empty((w.shape[1], 2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                rw = ce * self.prod[a][b][0] + cg * self.prod[a][b][1]
                m[:, a, b] = np.einsum("ik,ik->k", w.conj(), rw)
        out = {(s, f): np.zeros((2, 2), dtype=complex) for s in ("+", "-") for f in ("phi", "xi")}
        for k, (sign, family, _) in enumerate(self.basis.labels):
            c = self.corrections[k]
            out[("+" if sign > 0 else "-", family)] += c @ m[k] @ c.conj().T
        return {key: hermitian_part(val) for key, val in out.items()}

    def fidelity(self, inp: InputPureState) -> tuple[float, float, dict]:
        out = self.outcomes(inp)
        ket = inp.ket
        fid = sum(np.vdot(ket, o @ ket).real for o in out.values())
        prob = sum(np.trace(o).real for o in out.values())
        return float(fid), float(prob), out


def _icosahedron() -> np.ndarray:
    g = (1 + math.sqrt(5)) / 2
    pts = []
    for a in (-1, 1):
        for b in (-g, g):
            pts += [(0, a, b), (a, b, 0), (b, 0, a)]
    pts = np.array(pts, dtype=float)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _octahedron() -> np.ndarray:
    return np.vstack([np.eye(3), -np.eye(3)])


def bloch_design(quadrature_order: int = 5, n_samples: int = 2000, seed: int | None = 0) -> np.ndarray:
    """Unit vectors whose uniform average integrates polynomials up to ``quadrature_order`` exactly.

    Octahedron (exact to degree 3) or icosahedron (degree 5); higher orders
    fall back to seeded Monte Carlo sampling.
    """
    if quadrature_order <= 3:
        return _octahedron()
    if quadrature_order <= 5:
        return _icosahedron()
    pts = np.random.default_rng(seed).normal(size=(n_samples, 3))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _input_from_bloch(n: np.ndarray) -> InputPureState:
    theta = math.acos(max(-1.0, min(1.0, n[2])))
    phi = math.atan2(n[1], n[0])
    return InputPureState.from_bloch(theta, phi)


def teleport_average_fidelity(
    rho: HybridState,
    beta: complex | None = None,
    quadrature_order: int = 5,
    n_kept: int | None = None,
    seed: int | None = 0,
    _tele: _Teleporter | None = None,
) -> float:
    """Input-averaged teleportation fidelity over the Bloch sphere.

    The per-input fidelity is quartic in the input amplitudes (quadratic in the
    Bloch vector), so the default icosahedral design gives the exact average.
    """
    tele = _tele or _Teleporter(rho, beta, n_kept)
    pts = bloch_design(quadrature_order, seed=seed)
    return float(np.mean([tele.fidelity(_input_from_bloch(n))[0] for n in pts]))


def teleport_simulate(
    rho: HybridState,
    input: InputPureState,
    beta: complex | None = None,
    n_kept: int | None = None,
    quadrature_order: int = 5,
) -> TeleportResult:
    """Run the oscillator-to-qubit teleportation for one input state.

    Bob projects (input qubit, oscillator) onto the hybrid Bell vectors; Alice
    applies ``|e> -> (|r|/r)|e>``, then a bit flip on ``xi`` outcomes and a
    phase flip on ``-`` outcomes. Outcome states are summed over ``m``.
    """
    tele = _Teleporter(rho, beta, n_kept)
    fid, prob, out = tele.fidelity(input)
    avg = teleport_average_fidelity(rho, quadrature_order=quadrature_order, _tele=tele)
    return TeleportResult(
        outcome_states=out,
        per_input_fidelity=fid,
        average_fidelity=avg,
        classical_threshold=TELEPORT_CLASSICAL_THRESHOLD,
        payoff=payoff(avg, TELEPORT_CLASSICAL_THRESHOLD),
        success_prob=prob,
    )


def teleport_fidelity_formula(inp: InputPureState, r: complex) -> float:
    """Large-displacement per-input fidelity ``|eta|^4 + |gamma|^4 + 4|r||eta|^2|gamma|^2``."""
    a, b = abs(inp.eta) ** 2, abs(inp.gamma) ** 2
    return a * a + b * b + 4 * abs(r) * a * b


# ------------------------------------------------------------- remote state preparation


def rsp_goal_state(phi: float, beta: complex, dim: int) -> np.ndarray:
    """Cat state ``(|beta> + e^{-i phi}|-beta>)``, normalized on the truncated basis."""
    vec = coherent_state(beta, dim) + np.exp(-1j * phi) * coherent_state(-beta, dim)
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise ValueError(f"goal state vanishes at phi={phi}, beta={beta}")
    return vec / norm


def rsp_classical_threshold(beta: complex) -> float:
    """Phase-averaged fidelity of the random guess ``(|beta><beta| + |-beta><-beta|)/2``.

    With ``c = exp(-2|beta|^2)`` the per-phase value is
    ``1 - (1 - c^2) / (2(1 + c cos phi))``, whose average is ``1 - sqrt(1 - c^2)/2``.
    """
    c = math.exp(-2.0 * abs(beta) ** 2)
    return 1.0 - math.sqrt(max(0.0, 1.0 - c * c)) / 2.0


def rsp_payoff_bounds(dg: float) -> tuple[float, float]:
    """``(max{0, (3 D_G - 1)/(1 + D_G)}, sqrt(D_G))``."""
    return max(0.0, (3 * dg - 1) / (1 + dg)), math.sqrt(max(dg, 0.0))


def phase_shift_operator(
    beta: complex,
    osc_eigvecs: np.ndarray,
    n_kept: int | None,
    dim: int | None = None,
) -> np.ndarray:
    """Reflection ``1 - 2 P_-`` about the ``-beta`` branch.

    ``P_-`` projects onto the span of ``D(-beta)|psi_m>`` after joint Loewdin
    orthonormalization with the ``D(beta)|psi_m>`` vectors; the ``+beta``
    branch and everything outside both spans is left untouched.
    """
    psi = osc_eigvecs if n_kept is None else osc_eigvecs[:, :n_kept]
    dim = psi.shape[0] if dim is None else dim
    if psi.shape[0] != dim:
        raise ValueError("eigenvector length does not match dim")
    d = displacement_matrix(beta, dim)
    n = psi.shape[1]
    vecs, _ = lowdin(np.hstack([d @ psi, d.conj().T @ psi]))
    minus = vecs[:, n:]
    return np.eye(dim, dtype=complex) - 2.0 * minus @ minus.conj().T


@dataclass(frozen=True, eq=False)
class RspResult:
    phi: float
    conditional_outputs: tuple[np.ndarray, np.ndarray]
    probabilities: tuple[float, float]
    fidelity_at_phi: float
    average_fidelity: float
    classical_threshold: float
    payoff: float
    mode: RspMode
    success_prob: float


class _Preparer:
    def __init__(self, rho: HybridState, beta, mode, n_kept):
        osc, beta = _osc_and_beta(rho, beta)
        if rho.qubit is None:
            raise ValueError("qubit parameters unknown")
        if rho.qubit.r != 0:
            rho = rotate_qubit_phase(rho, -math.atan2(rho.qubit.r.imag, rho.qubit.r.real))
        self.rho, self.beta, self.mode = rho, beta, RspMode(mode)
        n_kept = default_n_kept(osc, beta=beta) if n_kept is None else n_kept
        _, psi = osc.spectrum
        if self.mode is RspMode.UNITARY:
            self.shift = phase_shift_operator(beta, psi, n_kept, rho.dim)
            self.threshold = rsp_classical_threshold(beta)
        else:
            ks = kraus_set(osc, beta, n_kept - 1)
            self.plus, self.minus = ks.plus, ks.minus
            self.threshold = 0.5
            self.reg_diag = _register_block(rho.ee + rho.gg, self.plus, self.minus)
            self.reg_eg = _register_block(rho.eg, self.plus, self.minus)
        self.diag = rho.ee + rho.gg

    def conditional(self, phi: float):
        """Bob's corrected, unnormalized states for outcomes + and -."""
        ph = np.exp(1j * phi)
        outs = []
        for sign in (1, -1):
            if self.mode is RspMode.UNITARY:
                x = 0.5 * (self.diag + sign * (ph * self.rho.eg + np.conj(ph) * self.rho.ge))
                if sign < 0:
                    x = self.shift @ x @ self.shift.conj().T
            else:
                coh = ph * self.reg_eg
                x = 0.5 * (self.reg_diag + sign * (coh + coh.conj().T))
                if sign < 0:
                    x = _Z @ x @ _Z
            outs.append(hermitian_part(x))
        return outs

    def goal(self, phi: float) -> np.ndarray:
        if self.mode is RspMode.UNITARY:
            return rsp_goal_state(phi, self.beta, self.rho.dim)
        return np.array([1.0, np.exp(-1j * phi)]) / math.sqrt(2)

    def fidelity(self, phi: float) -> float:
        g = self.goal(phi)
        return float(sum(np.vdot(g, x @ g).real for x in self.conditional(phi)))

    def average(self, quadrature_order: int) -> float:
        phis = 2 * np.pi * np.arange(quadrature_order) / quadrature_order
        return float(np.mean([self.fidelity(f) for f in phis]))


def rsp_simulate(
    rho: HybridState,
    phi: float,
    beta: complex | None = None,
    mode: RspMode | str = RspMode.UNITARY,
    n_kept: int | None = None,
    quadrature_order: int = 64,
) -> RspResult:
    """Remote preparation of a phase-``phi`` target on Bob's side.

    Alice (after rotating ``r`` to ``|r|``) measures in
    ``(|e> +- e^{i phi}|g>)/sqrt2``. In unitary mode Bob applies the pi-phase
    shift on ``-`` and the target is the cat state; in digitalizing mode Bob
    applies the digitalizing channel, then ``Z`` on ``-``, and the target is
    ``(|e~> + e^{-i phi}|g~>)/sqrt2``. ``n_kept`` eigenvectors of the initial
    oscillator state set up the branch subspaces.
    """
    prep = _Preparer(rho, beta, mode, n_kept)
    outs = prep.conditional(phi)
    probs = tuple(float(np.trace(x).real) for x in outs)
    avg = prep.average(quadrature_order)
    return RspResult(
        phi=float(phi),
        conditional_outputs=(outs[0], outs[1]),
        probabilities=probs,
        fidelity_at_phi=prep.fidelity(phi),
        average_fidelity=avg,
        classical_threshold=prep.threshold,
        payoff=payoff(avg, prep.threshold),
        mode=prep.mode,
        success_prob=float(sum(probs)),
    )


def rsp_average_fidelity(
    rho: HybridState,
    beta: complex | None = None,
    mode: RspMode | str = RspMode.UNITARY,
    quadrature_order: int = 64,
    n_kept: int | None = None,
) -> float:
    """Target-phase average of the RSP fidelity by uniform quadrature on ``[0, 2 pi)``."""
    return _Preparer(rho, beta, mode, n_kept).average(quadrature_order)
