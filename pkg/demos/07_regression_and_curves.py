"""Author fixed effects versus pooled OLS, and a bootstrapped binned curve."""
import numpy as np

from teamscope.econometrics import bootstrap_binned_curve, ols, within_fixed_effects

rng = np.random.default_rng(1)
authors = np.repeat(np.arange(60), 5)
talent = rng.normal(size=60)
# talented authors pick flatter teams and also score higher
lratio = np.clip(0.4 + 0.15 * talent[authors] + rng.normal(scale=0.1, size=authors.size), 0.05, 1)
outcome = -1.0 * lratio + 2.0 * talent[authors] + rng.normal(scale=0.3, size=authors.size)

pooled = ols(outcome, lratio, ["lratio"], add_intercept=True)
fe = within_fixed_effects(outcome, lratio, authors, ["lratio"], cluster=authors)
print(f"true effect -1.0; pooled OLS {pooled.coef('lratio'):+.3f}, "
      f"author FE {fe.coef('lratio'):+.3f} (se {fe.bse[0]:.3f}, {fe.entities} authors)")

bins = bootstrap_binned_curve(lratio, outcome, n_bins=5, n_boot=1000, seed=0)
print("\nbin   range        n    mean y   95% CI")
for b in bins:
    print(f"{b.bin:>3}  [{b.lo:.1f}, {b.hi:.1f})  {b.n:>4}  {b.mean_y:+.3f}  [{b.ci_low:+.3f}, {b.ci_high:+.3f}]")
