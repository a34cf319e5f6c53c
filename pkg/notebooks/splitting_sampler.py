# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Splitting a density into a bump and a residual
#
# If `p(x) >= eps * psi_r(|x - z|^2)` then a draw from `p` can be built as
# `chi * V + (1 - chi) * U` where `chi` is a coin with `P(chi = 1) = eps * m_r`,
# `V` follows the normalized bump and `U` the normalized remainder.

# %%
import numpy as np

from chaos_lab.sampling import bump, get_distribution, split_sampler, verify_split

prof = bump(0.5)
print("m_0.5 =", prof.m_r)
t = np.linspace(0, 1.2, 13)
print(np.round(prof.psi(t), 4))

# %% [markdown]
# The lower bound has to hold everywhere. For the Gaussian, the bound is
# tightest at the edge of the plateau, `|x| = sqrt(r)`.

# %%
g = get_distribution("gaussian")
xs = np.linspace(-1.0, 1.0, 2001)
resid = g.density(xs) - 0.24 * prof.psi(xs ** 2)
print("min residual:", resid.min(), "at", xs[resid.argmin()])

# %%
for name in ["gaussian", "uniform", "laplace"]:
    chk = verify_split(name, 10 ** 5, 1, 2)
    print(f"{name:9s} KS={chk.statistic:.5f} threshold={chk.threshold:.5f} "
          f"P(chi=1)={chk.chi_prob:.4f} observed={chk.chi_rate:.4f}")

# %% [markdown]
# Histogram of the split draws against the density.

# %%
b = split_sampler("laplace", 3, 2 * 10 ** 5)
hist, edges = np.histogram(b.values, bins=24, range=(-3, 3), density=True)
mid = 0.5 * (edges[1:] + edges[:-1])
lap = get_distribution("laplace")
for x, h in zip(mid, hist):
    print(f"{x:+.2f} {h:.4f} {float(lap.density(x)):.4f}")
