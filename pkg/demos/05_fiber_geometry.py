# %% [markdown]
"""
# Semiflat forms, calibrated torus fibers, and two volume identities

The limiting geometry of a maximally degenerating family is encoded by
Hermitian forms in logarithmic coordinates.  Everything in this script is
finite-dimensional linear algebra: torus fibers are Lagrangian and have a
locked calibration phase, the radial metric ansatz reduces to a
one-variable differential equation with an exact solution, and the block
form of a fibration satisfies its determinant identity at large scale.
"""

# %%
import math

import numpy as np

from nama import (calabi_ode_residual, fiber_lagrangian_residual,
                  fiber_phase_residual, generalized_calabi_form, pfaffian,
                  power_law_potential, real_antisymmetric_representation,
                  semiflat_form, standard_torus_frame,
                  volume_identity_check)

# %% [markdown]
"""
## 1. Torus fibers are Lagrangian

A semiflat form is a real Hessian divided by 4 pi L^2 in logarithmic
coordinates.  Pairing it with the angular directions of a torus fiber
gives zero: the fibers are Lagrangian, with no discretization involved.
"""

# %%
H = np.array([[2.0, 1.0], [1.0, 5.0]])
form = semiflat_form(H, scale=10.0)
frame = standard_torus_frame(2)
print("smallest eigenvalue:", f"{form.smallest_eigenvalue():.4e}")
print("Lagrangian residual:", fiber_lagrangian_residual(form, frame))

# %% [markdown]
"""
## 2. The calibration phase steps by right angles

The product of the logarithmic differentials evaluates on an n-torus
fiber to a complex number of fixed phase -n pi / 2 (mod pi); the
imaginary part after rotating by that phase is zero to rounding.
"""

# %%
for n in (1, 2, 3, 4):
    rep = fiber_phase_residual(n, standard_torus_frame(n))
    print(f"n = {n}: phase {rep.phase / math.pi:+.2f} pi, "
          f"residual {rep.residual:.1e}")

# %% [markdown]
"""
## 3. The radial ansatz is a one-variable equation

The rotationally reduced metric ansatz asks for phi''(phi')^(n-1) to be
constant.  The power law x^((n+1)/n) solves it, with invariant constant
(n+1)^n / n^(n+1); differentiating numerically or analytically gives the
same verdict.
"""

# %%
xs = np.logspace(-2, 2, 21)
for n in (1, 2, 3):
    triple, expected = power_law_potential(n)
    rep = calabi_ode_residual(n, triple, xs)
    print(f"n = {n}: constant {rep.constant:.10f} "
          f"(expected {expected:.10f}), residual {rep.residual:.1e}")

blackbox = calabi_ode_residual(2, lambda x: x ** 1.5, [0.5, 1.0, 2.0])
print("black-box cross-check, finite differences:",
      f"constant {blackbox.constant:.8f}, residual "
      f"{blackbox.residual:.1e}")

# %% [markdown]
"""
## 4. The block volume identity

With a base block P, a fiber block Q, and a coupling suppressed by one
power of the scale, the rescaled determinant converges to det P det Q
at first order: the log-log error slope is -1.  Dropping the coupling
makes the identity exact at every scale.
"""

# %%
P = np.array([[2.0, 0.3], [0.3, 1.0]])
Q = np.array([[3.0]])
B = np.array([[0.5], [0.2]])
scales = [10.0 ** k for k in range(2, 7)]
rep = volume_identity_check(P, Q, B, scales)
print("relative errors:", " ".join(f"{e:.1e}" for e in
                                   rep.relative_errors))
print(f"fitted slope: {rep.slope:.4f}")
print("exact without coupling:",
      volume_identity_check(P, Q, [], scales).exact)

# %% [markdown]
"""
## 5. A Pfaffian cross-check

Viewing the 2-form as a real antisymmetric matrix in interleaved real
coordinates, its Pfaffian must equal the determinant of the complex
coefficient matrix; this catches sign and ordering mistakes in the real
representation.
"""

# %%
h = generalized_calabi_form(P, Q, B, 100.0)
M = real_antisymmetric_representation(h)
print(f"pfaffian {pfaffian(M):.10e}")
print(f"det      {h.determinant().real:.10e}")
