"""Truncation study: how the Fock cutoff and branch separation affect the measures.

Sweeps dim at fixed beta, then beta at fixed dim, for the maximally
correlated qubit block, and prints the deviation from the asymptotes.

    python3 scripts/convergence.py [--nbar 0.5]
"""

import argparse

from hybridcorr.correlations import geometric_discord, negativity
from hybridcorr.hybrid import QubitParams, build_resource_state
from hybridcorr.oscillator import purity, recommended_dim, thermal_state, thermal_tail_length, vacuum


def _state(nbar: float, dim: int, beta: float):
    osc = vacuum(dim) if nbar == 0 else thermal_state(nbar, dim, trace_tol=1.0)
    return osc, build_resource_state(QubitParams(0.5, 0.5), osc, beta, trace_tol=1.0)


def run(nbar: float, beta: float) -> None:
    need = recommended_dim(2 * beta, thermal_tail_length(nbar, 1e-10))
    print(f"nbar={nbar:g} beta={beta:g}: containment rule asks for dim >= {need}")
    print(f"{'dim':>5} {'trace':>12} {'|N - 1|':>10} {'|D_G - mu|':>10}")
    for dim in sorted({max(20, need // 4), need // 2, 3 * need // 4, need, need + 50}):
        osc, rho = _state(nbar, dim, beta)
        print(f"{dim:5d} {rho.trace:12.9f} {abs(negativity(rho) - 1):10.2e} "
              f"{abs(geometric_discord(rho) - purity(osc)):10.2e}")
    print(f"\n{'beta':>5} {'|N - 1|':>10} {'|D_G - mu|':>10}")
    for b in (0.5, 1.0, 1.5, 2.0, 3.0, beta):
        osc, rho = _state(nbar, need, b)
        print(f"{b:5.2f} {abs(negativity(rho) - 1):10.2e} {abs(geometric_discord(rho) - purity(osc)):10.2e}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nbar", type=float, default=0.5)
    parser.add_argument("--beta", type=float, default=4.0)
    args = parser.parse_args()
    run(args.nbar, args.beta)
