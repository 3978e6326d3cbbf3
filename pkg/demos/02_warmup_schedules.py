# %% [markdown]
# # Warmup schedules and how much they dampen
#
# A warmup schedule multiplies the learning rate by omega_t in [0, 1].
# Its total dampening is the effective warmup period sum_t (1 - omega_t).

# %%
import numpy as np

from adamwarmup.schedules import WarmupSchedule, effective_warmup_period, radam_rho

beta2 = 0.999
schedules = {
    "linear, tau = 2/(1-beta2)": WarmupSchedule.untuned_linear(beta2),
    "exponential, tau = 1/(1-beta2)": WarmupSchedule.untuned_exponential(beta2),
    "RAdam rectifier": WarmupSchedule.radam(beta2),
}

# %%
t = np.array([1, 5, 10, 100, 500, 1000, 2000, 5000])
print(f"{'t':>30}" + "".join(f"{x:>9d}" for x in t))
for name, s in schedules.items():
    print(f"{name:>30}" + "".join(f"{x:9.4f}" for x in s(t)))

# %% [markdown]
# The two rules of thumb dampen by the same total amount, about
# 1/(1 - beta2) - 1/2 iterations.  RAdam's rectifier is in the same range.

# %%
for name, s in schedules.items():
    print(f"{name:>30}: {effective_warmup_period(s):9.2f}")

# %% [markdown]
# The rectifier is switched off while rho_t <= 4.  For every beta2 in
# [0.8, 1) this happens exactly for the first four iterations.

# %%
for b in (0.8, 0.9, 0.99, 0.999, 0.9999):
    rho = radam_rho(np.arange(1, 7), b).rho_t
    print(f"beta2={b:<7} rho_1..6 =", np.round(rho, 4))
