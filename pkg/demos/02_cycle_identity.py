# %% [markdown]
"""
# Atomic masses versus convex slope jumps on a cycle

For a degeneration whose dual complex is a cycle of N segments, two
measures can be attached to the same twisting data: the atomic measure
computed from intersection numbers, and the distributional second
derivative of the induced piecewise affine convex function on the cycle.
They agree vertex by vertex, exactly, in rational arithmetic.
"""

# %%
from fractions import Fraction as F

from nama import cycle_model, cycle_table, na_ma_model_metric, \
    vilsmeier_check_1d

# %% [markdown]
"""
## 1. A cycle with degrees (1, 2, 1)

The polarization has total degree 4.  Twisting by the divisor
``(1/2) E_1 + (1/3) E_2`` moves mass around the three vertices without
changing the total.
"""

# %%
degrees = [1, 2, 1]
coeffs = {0: F(0), 1: F(1, 2), 2: F(1, 3)}
model = cycle_model(degrees)
table = cycle_table(degrees)

atoms = na_ma_model_metric(model, table, coeffs)
print("atomic masses:", [str(m) for m in atoms.masses])
print("total:", atoms.total(), " = total degree", sum(degrees))

# %% [markdown]
"""
## 2. The same numbers from convex analysis

On each vertex the twisted potential is piecewise affine in the cycle
coordinate; the jump of its slope across the vertex is the local mass.
The identity holds with zero residual because both sides are exact
rationals.
"""

# %%
rep = vilsmeier_check_1d(model, table, coeffs)
for ident, na, real in zip(rep.vertex_order, rep.na_masses,
                           rep.real_masses):
    print(f"vertex {ident}: atomic {str(na):>5}  slope jump {str(real):>5}"
          f"  difference {na - real}")
print("max discrepancy:", rep.max_discrepancy, " identity holds:",
      rep.holds)

# %% [markdown]
"""
## 3. Where convexity fails

Nothing forces a random twist to stay inside the convex range.  With
degrees (2, 2, 2) and the one-sided twist ``5 E_0`` the vertex masses go
negative, which is the algebraic signal that the twisted potential is no
longer convex; the identity with the slope jumps still holds.
"""

# %%
degrees = [2, 2, 2]
coeffs = {0: F(5), 1: F(0), 2: F(0)}
rep = vilsmeier_check_1d(cycle_model(degrees), cycle_table(degrees),
                         coeffs)
print("masses:", [str(m) for m in rep.na_masses])
print("still exact:", rep.holds, " total:", rep.total_na)
