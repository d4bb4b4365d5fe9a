"""How the fitted precision phi affects Horseshoe estimation error.

Data are generated with phi = 10 and fitted with phi in {1, 5, 10, 15, 20}.
A small phi treats the responses as much noisier than they are, so the
tempered likelihood carries little information and shrinkage wins.

Run with ``python demos/phi_misspecification.py [replications]``.  Each
replication costs a few seconds per fitted value.
"""
from __future__ import annotations

import sys

from hsbeta.simgen import SimScenario
from hsbeta.study import StudyCase, run_benchmark


def main(replications: int = 5) -> None:
    truth = SimScenario(n=100, p=20, s_star=10, phi_true=10.0, seed=1)
    cases = [StudyCase(scenario=truth, name=f"phi={phi:g}", fit_phi=phi, methods=("horseshoe",))
             for phi in (1, 5, 10, 15, 20)]
    result = run_benchmark(cases, replications)
    print(f"{'fitted phi':>10}  {'10*l2(beta0)':>12}  {'sd':>6}  {'recall':>6}")
    for i, case in enumerate(cases):
        agg = result.report()["cases"][i]["aggregate"]["horseshoe"]
        l2, rec = agg["l2_beta"], agg["recall"]
        sd = "-" if l2["sd"] is None else f"{10 * l2['sd']:.3f}"
        print(f"{case.phi:>10g}  {10 * l2['mean']:>12.3f}  {sd:>6}  {rec['mean']:>6.2f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 5)
