# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
# ---

# %% [markdown]
# # Product and gradient expansions, checked pointwise
#
# `S^2` and `sum_j (d_j S)^2` are again finite chaos-like sums once `z^2` is
# rewritten as `1 + y`. Here the coefficient formulas are compared with direct
# evaluation at random points.

# %%
import numpy as np

from chaos_lab.expansion import (Realization, gradient_expansion_mean, gradient_functionals,
                                 square_identity_check, square_identity_check_B)
from chaos_lab.kernels import gradient_second_moment, series_second_moment
from chaos_lab.suites import random_kernel

rng = np.random.default_rng(0)
c = random_kernel(rng, [1, 2, 3], 5)
z = rng.standard_normal(5)
print(square_identity_check(c, z))
print(square_identity_check_B(c, z))

# %%
real = Realization(z, chi=(rng.random(5) < 0.4).astype(float), chi_prob=0.4)
g = gradient_functionals(c, real)
print("I      ", g.I, g.expansion)
print("I tilde", g.I_tilde, g.expansion_tilde)

# %% [markdown]
# The constant term of the gradient expansion is the mean of `sum_j (d_j S)^2`,
# which is `sum_m m m! |c|_m^2`. With the alternative normalization the constant
# term becomes `i_N` instead, and the pointwise identity no longer holds.

# %%
print(gradient_expansion_mean(c))
print(gradient_expansion_mean(c, as_printed=True))
g2 = gradient_functionals(c, real, as_printed=True)
print("pointwise gap with the alternative normalization:", g2.I - g2.expansion)
print(gradient_second_moment(c), series_second_moment(c))
