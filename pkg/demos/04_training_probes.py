# %% [markdown]
# # Gradient statistics early in training
#
# We train a 784-200-100-50-10 ReLU network on a 5,000-image MNIST subset
# and probe it every ten iterations: how noisy are the gradients, and how
# large are Adam's steps relative to alpha?

# %%
import numpy as np
from mlxtend.data import mnist_data

from adamwarmup.train import IdxDataset, ProbeSettings, method_config, train

x, y = mnist_data()
data = IdxDataset(x.reshape(-1, 28, 28).astype(np.uint8), y.astype(np.int64), 10)

# %%
result = train(method_config("expo-untuned", n_iters=300, probe=ProbeSettings()), data)
print(f"loss {result.initial_loss:.3f} -> {result.final_loss:.3f}")
print(f"{'t':>4} {'median CV':>10} {'corr(|m|, sqrt v)':>18} {'median |update|/alpha':>22}")
for r in result.probes[::3]:
    print(f"{r.t:>4} {r.median_cv:10.3f} {r.moment_correlation:18.3f} {r.median_update_magnitude:22.3f}")

# %% [markdown]
# At t = 1 the two moments are proportional, so their correlation is 1, and
# every step is a full alpha.  While the warmup keeps the learning rate
# small, gradients stay consistent and the ratio can exceed 1.  Once the
# gradients turn noisy (CV well above 1) it falls towards the noise-only
# level from the first demo.

# %%
result.write_probe_csv("probes.csv")
print("wrote probes.csv")
