"""Protocol payoffs against negativity and geometric discord.

Writes the four figure3_*.csv panels and prints a sandwich check for the
unitary-correction RSP payoffs.

    python3 scripts/figure3.py [--out DIR]
"""

import argparse
import csv
from pathlib import Path

from hybridcorr.cli import main


def _rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(out: Path) -> None:
    code = main(["figure3", "--out", str(out)])
    if code:
        raise SystemExit(code)
    b = _rows(out / "figure3_b.csv")
    worst = max(max(float(r["payoff_lower_bound"]) - float(r["payoff_rsp_unitary"]),
                    float(r["payoff_rsp_unitary"]) - float(r["sqrt_dg"])) for r in b)
    print(f"unitary RSP: worst bound violation {worst:.2e} over {len(b)} points")
    a, c = _rows(out / "figure3_a.csv"), _rows(out / "figure3_c.csv")
    gap = max(abs(float(x["payoff_tel"]) - float(y["payoff_rsp_digitalizing"])) for x, y in zip(a, c))
    print(f"teleport vs digitalizing RSP payoff: max gap {gap:.2e}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    run(args.out)
