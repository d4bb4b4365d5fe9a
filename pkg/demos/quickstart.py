"""Fit the Horseshoe sampler and the transformed Lasso to one simulated data set.

Run with ``python demos/quickstart.py``; it takes about ten seconds.
"""
from __future__ import annotations

import numpy as np

from hsbeta import (
    Dataset,
    FitConfig,
    SimScenario,
    evaluate,
    ess,
    fit_transformed_lasso,
    generate,
    lasso_selected,
    pool_draws,
    run_chains,
    summarize,
)


def main() -> None:
    scenario = SimScenario(n=100, p=20, s_star=10, phi_true=10.0, seed=1)
    data = generate(scenario, replication=0)

    config = FitConfig(phi=10.0, alpha=0.99, iterations=1200, burn_in=200, chains=2, seed=3)
    chains = run_chains(Dataset(data.X, data.y), config)
    post = summarize(pool_draws(chains))

    lasso = fit_transformed_lasso(data.X, data.y, rng_for_folds=np.random.default_rng(3))

    print(" j   beta0   horseshoe mean   95% interval        lasso")
    for j in range(scenario.p):
        print(f"{j:2d}  {data.beta0[j]:+.0f}     {post.mean[j]:+.3f}        "
              f"[{post.ci_lower[j]:+.3f}, {post.ci_upper[j]:+.3f}]   {lasso.coefficients[j]:+.3f}")

    hs = evaluate(post.mean, post.selected, data.beta0, data.X, data.y, data.X_test, data.y_test)
    la = evaluate(lasso.coefficients, lasso_selected(lasso), data.beta0,
                  data.X, data.y, data.X_test, data.y_test)
    print()
    for name in ("l2_beta", "l2_linpred", "l2_ytest", "precision", "recall", "fdr"):
        print(f"{name:>11}: horseshoe {getattr(hs, name):.4f}   lasso {getattr(la, name):.4f}")

    worst = min(ess(ch.beta_draws[:, j]) for ch in chains for j in range(scenario.p))
    print(f"\nsmallest effective sample size over coefficients and chains: {worst:.0f} of {config.kept}")


if __name__ == "__main__":
    main()
