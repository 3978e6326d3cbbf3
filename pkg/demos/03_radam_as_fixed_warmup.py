# %% [markdown]
# # RAdam is Adam with a fixed warmup schedule
#
# For the first four steps RAdam takes bias-corrected heavy-ball steps.
# After that its update equals Adam's, scaled by a factor that depends on
# t and beta2 only, never on the gradients.

# %%
import numpy as np

from adamwarmup.optim import AdamHyperparams, OptimizerState, adam_step, radam_step
from adamwarmup.schedules import WarmupSchedule

hp = AdamHyperparams(alpha=1e-3)
rectifier = WarmupSchedule.radam(hp.beta2)
rng = np.random.default_rng(0)

s_radam, s_adam = OptimizerState.zeros(5), OptimizerState.zeros(5)
p = np.zeros(5)
for t in range(1, 13):
    g = rng.standard_normal(5) + 0.3
    u_r = radam_step(p, g, s_radam, hp).update
    u_a = adam_step(p, g, s_adam, hp, rectifier(t)).update
    tag = "heavy-ball phase" if t <= 4 else f"ratio {np.max(np.abs(u_r / u_a)):.15f}"
    print(f"t={t:>2}  omega={rectifier(t):.5f}  {tag}")

# %% [markdown]
# From t = 5 on, the two update vectors agree to the last bit.  Swapping
# RAdam for Adam plus this schedule (or any schedule with a similar
# effective period) is therefore a change of warmup, not of optimizer.
