# %% [markdown]
# # Adam's update size at a local minimum
#
# At a minimum the gradient is pure noise.  We feed Adam i.i.d. zero-mean
# Gaussian gradients for 25,000 parameters and watch the per-parameter
# update magnitude |update| / alpha.  No warmup, epsilon = 0.

# %%
import numpy as np

from adamwarmup.sim import SimConfig, run_local_minimum_sim, stationary_median

traj = run_local_minimum_sim(SimConfig())

# %% [markdown]
# The very first step is exactly +/- alpha for every parameter: the bias
# corrected first and second moments are g and g**2.

# %%
print("t=1 quantiles:", traj.row(1))

# %% [markdown]
# The spread collapses quickly.  By a few dozen iterations the median has
# settled near 0.16 alpha, and it drifts only slightly after that.

# %%
print(f"{'t':>5}" + "".join(f"{'q' + format(100 * q, 'g'):>9}" for q in traj.quantiles))
for t in (1, 2, 5, 10, 20, 40, 100, 400, 1000):
    print(f"{t:>5}" + "".join(f"{x:9.4f}" for x in traj.row(t)))

# %% [markdown]
# The long-run median (10,000 iterations) is close to 0.153 alpha.  The
# variance of the noise does not matter: Adam's update is scale invariant.

# %%
print("stationary median:", round(stationary_median(), 4))
loud = run_local_minimum_sim(SimConfig(n_params=2000, n_iters=200, grad_variance=1.0))
quiet = run_local_minimum_sim(SimConfig(n_params=2000, n_iters=200, grad_variance=1e-9))
print("max relative difference, variance 1 vs 1e-9:", np.max(np.abs(loud.values / quiet.values - 1)))

# %%
traj.to_csv("update_magnitudes.csv")
print("wrote update_magnitudes.csv (t, quantiles)")
