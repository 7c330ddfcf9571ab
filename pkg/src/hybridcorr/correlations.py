"""Entanglement and discord-type correlations of qubit-oscillator states.

Measurements always act on the qubit ``A``. Entropies are in bits.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from .hybrid import HybridState, QubitParams, fano_components, partial_transpose_qubit
from .linalg import entropy, hermitian_part, negativity_of_matrix
from .oscillator import TruncationReport, displacement_matrix, purity, truncation_report

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-9


def _clamp(value: float, what: str) -> float:
    if value < 0.0:
        level = logging.WARNING if value < -CLAMP_TOL else logging.DEBUG
        log.log(level, "%s: clamping negative value %.3e to 0", what, value)
        return 0.0
    return float(value)


# --------------------------------------------------------------------------- negativity


def negativity(rho: HybridState) -> float:
    """``||rho^{T_A}||_1 - tr(rho)``, computed from the full eigen-spectrum.

    For unit-trace states this is the usual ``||rho^{T_A}||_1 - 1``; subtracting
    the actual trace keeps truncation leakage from biasing the result.
    """
    lam = np.linalg.eigvalsh(hermitian_part(partial_transpose_qubit(rho)))
    return _clamp(-2.0 * lam[lam < 0].sum(), "negativity")


def negativity_asymptote(qubit: QubitParams) -> float:
    return 2.0 * abs(qubit.r)


def negativity_witness_bound(
    rho: HybridState,
    osc_eigvecs: np.ndarray | None = None,
    beta: complex | None = None,
    phase: complex | None = None,
) -> float:
    """Certified lower bound on the negativity from displaced test vectors.

    Test vectors are ``(|e> D^+|psi_m> - e^{i phi} |g> D|psi_m>)/sqrt(2)`` with
    ``psi_m`` the eigenvectors of the initial oscillator state and
    ``e^{i phi} = r/|r|``. Only vectors with a negative expectation on the
    partial transpose are kept. Because they are only approximately orthonormal
    at finite ``beta``, the summed expectation is divided by the largest
    eigenvalue of their Gram matrix, which keeps the bound rigorous.

    Returns 0 when ``r = 0`` (no phase to align with, and the state is PPT).
    """
    if osc_eigvecs is None:
        if rho.osc is None:
            raise ValueError("pass osc_eigvecs or a state built by build_resource_state")
        lam, osc_eigvecs = rho.osc.spectrum
        osc_eigvecs = osc_eigvecs[:, lam > 1e-14]
    beta = rho.beta if beta is None else complex(beta)
    if beta is None:
        raise ValueError("displacement beta unknown")
    if phase is None:
        if rho.qubit is None:
            raise ValueError("qubit parameters unknown; pass phase=r/|r|")
        if rho.qubit.r == 0:
            return 0.0
        phase = rho.qubit.r / abs(rho.qubit.r)
    d = displacement_matrix(beta, rho.dim)
    top = d.conj().T @ osc_eigvecs / math.sqrt(2)
    bot = -phase * (d @ osc_eigvecs) / math.sqrt(2)
    # <phi|rho^{T_A}|phi> with rho^{T_A} = [[ee, ge], [eg, gg]]
    vals = (
        np.einsum("im,im->m", top.conj(), rho.ee @ top)
        + np.einsum("im,im->m", top.conj(), rho.ge @ bot)
        + np.einsum("im,im->m", bot.conj(), rho.eg @ top)
        + np.einsum("im,im->m", bot.conj(), rho.gg @ bot)
    ).real
    keep = vals < 0
    if not keep.any():
        return 0.0
    vecs = np.vstack([top[:, keep], bot[:, keep]])
    gram_max = np.linalg.eigvalsh(hermitian_part(vecs.conj().T @ vecs))[-1]
    return float(2.0 * max(0.0, -vals[keep].sum()) / max(gram_max, 1.0))


# ------------------------------------------------------------------- geometric discord


def s_matrix(rho: HybridState) -> np.ndarray:
    """``S_ij = tr_B[v_i v_j]`` for the spatial Fano components (real symmetric 3x3)."""
    v = fano_components(rho).spatial
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            out[i, j] = out[j, i] = np.sum(v[i] * v[j].T).real
    return out


def geometric_discord(rho: HybridState) -> float:
    """Normalized geometric discord ``tr(S) - lambda_max(S)``."""
    s = s_matrix(rho)
    return _clamp(float(np.trace(s) - np.linalg.eigvalsh(s)[-1]), "geometric discord")


def geometric_discord_asymptote(qubit: QubitParams, mu: float) -> float:
    return 4.0 * mu * abs(qubit.r) ** 2


def _as_full(rho: HybridState | np.ndarray) -> np.ndarray:
    return rho.full if isinstance(rho, HybridState) else np.asarray(rho, dtype=complex)


def _sphere_search(objective, n_theta: int, n_phi: int, refine_top: int, xatol: float, fatol: float):
    """Grid seed over the Bloch sphere followed by Nelder-Mead polishing.

    Grid values are independent and the reduction is a plain minimum, so the
    result does not depend on evaluation order.
    """
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    grid = np.array([[objective((t, f)) for f in phis] for t in thetas])
    order = np.argsort(grid, axis=None, kind="stable")[:refine_top]
    i0, j0 = np.unravel_index(order[0], grid.shape)
    best_val, best_x = float(grid[i0, j0]), np.array([thetas[i0], phis[j0]])
    for idx in order:
        i, j = np.unravel_index(idx, grid.shape)
        res = minimize(objective, np.array([thetas[i], phis[j]]), method="Nelder-Mead",
                       options={"xatol": xatol, "fatol": fatol, "maxiter": 2000})
        if res.fun < best_val:
            best_val, best_x = float(res.fun), res.x
    return best_val, best_x


def geometric_discord_bruteforce(
    rho: HybridState | np.ndarray,
    grid_resolution: tuple[int, int] = (16, 32),
    refine_top: int = 3,
) -> float:
    """Minimize ``4 tr[rho^2 P] - 4 tr[rho P rho P]`` over qubit projectors ``P``.

    Independent check on :func:`geometric_discord`, working on the full matrix.
    """
    full = _as_full(rho)
    dim_b = full.shape[0] // 2
    rho2 = full @ full
    eye = np.eye(dim_b)

    def objective(x):
        theta, phi = x
        k = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
        proj = np.kron(np.outer(k, k.conj()), eye)
        rp = full @ proj
        return float((4 * np.trace(rho2 @ proj) - 4 * np.trace(rp @ rp)).real)

    val, _ = _sphere_search(objective, *grid_resolution, refine_top, 1e-10, 1e-14)
    return _clamp(val, "geometric discord (brute force)")


# --------------------------------------------------------------------- entropic discord


def binary_entropy(x: float) -> float:
    return float(-(xlogy(x, x) + xlogy(1 - x, 1 - x)) / math.log(2))


def entropic_discord_digitalized(qubit: QubitParams) -> float:
    """Closed-form discord of the digitalized two-qubit state.

    ``H(p) + (1/2)[log2(p(1-p) - |r|^2) + zeta log2((1+zeta)/(1-zeta))]`` with
    ``zeta = sqrt((1-2p)^2 + 4|r|^2)``. On the pure boundary
    ``|r|^2 = p(1-p)`` the bracket's divergent terms cancel; the limit
    ``a log2 a + b log2 b`` with ``a, b = (1 +- zeta)/2`` is used there.
    """
    p, r2 = qubit.p, abs(qubit.r) ** 2
    zeta = math.sqrt((1 - 2 * p) ** 2 + 4 * r2)
    det = p * (1 - p) - r2
    if det > 0 and zeta < 1:
        bracket = 0.5 * (math.log2(det) + zeta * math.log2((1 + zeta) / (1 - zeta)))
    else:
        zeta = min(zeta, 1.0)
        a, b = (1 + zeta) / 2, (1 - zeta) / 2
        bracket = float((xlogy(a, a) + xlogy(b, b)) / math.log(2))
    return _clamp(binary_entropy(p) + bracket, "digitalized discord")


@dataclass(frozen=True)
class DiscordOptimizerConfig:
    n_theta: int = 32
    n_phi: int = 64
    refine_top: int = 3
    xatol: float = 1e-8
    fatol: float = 1e-8
    rank_tol: float = 1e-14


@dataclass(frozen=True)
class DiscordResult:
    value: float
    theta: float
    phi: float

    @property
    def direction(self) -> np.ndarray:
        """Bloch vector of the optimal measurement."""
        return np.array([
            math.sin(self.theta) * math.cos(self.phi),
            math.sin(self.theta) * math.sin(self.phi),
            math.cos(self.theta),
        ])


def entropic_discord_numeric(
    rho: HybridState | np.ndarray,
    config: DiscordOptimizerConfig | None = None,
) -> DiscordResult:
    """Entropic discord with projective measurements on the qubit.

    Evaluates ``S(A) - S(AB) + min_k sum_k p_k S(rho_B|k)``. The state is first
    factored as ``W W^+`` from its significant eigenpairs, so each conditional
    entropy costs an ``R x R`` eigensolve where ``R`` is the rank.
    """
    cfg = config or DiscordOptimizerConfig()
    full = _as_full(rho)
    full = full / np.trace(full).real
    d = full.shape[0] // 2
    lam, vecs = np.linalg.eigh(hermitian_part(full))
    keep = lam > cfg.rank_tol * max(lam[-1], 1e-300)
    w = vecs[:, keep] * np.sqrt(lam[keep])
    w_e, w_g = w[:d], w[d:]
    s_ab = entropy(lam[keep])
    rho_a = np.array([[np.sum(np.abs(w_e) ** 2), np.vdot(w_g, w_e)],
                      [np.vdot(w_e, w_g), np.sum(np.abs(w_g) ** 2)]])
    s_a = entropy(rho_a)

    def branch(ke, kg):
        x = np.conj(ke) * w_e + np.conj(kg) * w_g
        mu = np.linalg.eigvalsh(hermitian_part(x.conj().T @ x))
        pk = mu.sum()
        if pk <= 1e-300:
            return 0.0
        return float(pk * entropy(np.clip(mu, 0, None) / pk))

    def objective(x):
        theta, phi = x
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        e = complex(math.cos(phi), math.sin(phi))
        return branch(c, s * e) + branch(-s / e, c)

    val, best = _sphere_search(objective, cfg.n_theta, cfg.n_phi, cfg.refine_top, cfg.xatol, cfg.fatol)
    return DiscordResult(_clamp(s_a - s_ab + val, "entropic discord"), float(best[0]), float(best[1]))


# ------------------------------------------------------------------------- aggregation


@dataclass(frozen=True)
class CorrelationReport:
    negativity: float
    negativity_asymptote: float
    geometric_discord: float
    geometric_discord_asymptote: float
    dz_digitalized: float
    dz_numeric: float | None
    purity_B0: float
    truncation: TruncationReport


def correlation_report(
    rho: HybridState,
    qubit: QubitParams | None = None,
    mu: float | None = None,
    beta: complex | None = None,
    dz_numeric: bool = False,
    kraus_cutoff: int | None = None,
    optimizer: DiscordOptimizerConfig | None = None,
) -> CorrelationReport:
    """Numeric measures next to their large-displacement limits.

    Missing ``qubit``/``mu``/``beta`` are taken from the state's construction data.
    """
    qubit = qubit or rho.qubit
    beta = rho.beta if beta is None else beta
    if qubit is None:
        raise ValueError("qubit parameters unknown")
    if mu is None:
        if rho.osc is None:
            raise ValueError("initial oscillator purity unknown")
        mu = purity(rho.osc)
    if rho.osc is not None:
        pending = [] if beta is None else [2 * beta, -2 * beta]
        trunc = truncation_report(rho.osc, pending, kraus_cutoff)
    else:
        deficit = max(0.0, 1.0 - rho.trace)
        trunc = TruncationReport(deficit, deficit, 0.0)
    return CorrelationReport(
        negativity=negativity(rho),
        negativity_asymptote=negativity_asymptote(qubit),
        geometric_discord=geometric_discord(rho),
        geometric_discord_asymptote=geometric_discord_asymptote(qubit, mu),
        dz_digitalized=entropic_discord_digitalized(qubit),
        dz_numeric=entropic_discord_numeric(rho, optimizer).value if dz_numeric else None,
        purity_B0=float(mu),
        truncation=trunc,
    )
