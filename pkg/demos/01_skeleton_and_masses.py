# %% [markdown]
"""
# Dual complexes, skeletons, and atomic masses

A one-parameter degeneration is described combinatorially: one vertex per
component of the special fibre, one face per nonempty intersection, and a
chart ``sum b_i x_i = 1`` on every face.  This script builds two small
models, explores their charts, and computes the atomic measure attached to
a metric through an intersection table.
"""

# %%
from fractions import Fraction as F

from nama import (Divisor, IntersectionTable, build_model,
                  essential_skeleton, lebesgue_measure, monomial_valuation,
                  na_ma_model_metric)

# %% [markdown]
"""
## 1. A weighted segment

Two components, multiplicities 2 and 3, meeting in a point.  The edge
chart is the segment ``2 x_0 + 3 x_1 = 1``.  The first coordinate is
solved from the relation, so the chart is measured in the remaining free
coordinate ``x_1 in [0, 1/3]`` and has volume 1/3.
"""

# %%
weighted = build_model(
    [Divisor(0, multiplicity=2), Divisor(1, multiplicity=3)],
    [[0], [1], [0, 1]],
    dimension=1,
)
edge = weighted.face((0, 1))
print("chart volume of the edge:", edge.chart_volume())
print("vertex of component 0:   ", dict(edge.vertex_point(0)))
print("barycenter of the edge:  ", dict(edge.barycenter()))

# %% [markdown]
"""
A monomial valuation at a chart point takes the minimum of ``alpha . x``
over the exponents present in a function.  At the barycenter the
exponent (1, 0) wins against (0, 2):
"""

# %%
x = edge.barycenter()
val = monomial_valuation(edge, x, [(1, 0), (0, 2)])
print("valuation of z0 + z1^2 at the barycenter:", val)

# %% [markdown]
"""
## 2. The essential skeleton and its flat measure

With zero discrepancy weights on every vertex the whole complex is
essential.  For a semistable maximal model the limit measure is uniform
on the top faces; here the model is a plain segment with two unit
multiplicities.
"""

# %%
segment = build_model(
    [Divisor(0), Divisor(1)],
    [[0], [1], [0, 1]],
    dimension=1,
    semistable=True,
)
sk = essential_skeleton(segment)
measure = lebesgue_measure(segment)
print("skeleton dimension:", sk.dim, "(maximal:", sk.is_maximal, ")")
print("top faces:", [f.index_set for f in measure.faces])
print("mass per face:", measure.face_mass)
print("total mass:", measure.total())

# %% [markdown]
"""
## 3. From intersection numbers to atomic masses

An intersection table stores the pairings of the polarization and the
component classes on the strata.  The model metric twisted by the
divisor ``(1/4) E_1`` then carries an atomic measure supported on the
vertices; its total always equals the top self-intersection.
"""

# %%
table = IntersectionTable(1)
table.add(1, {}, (), 2)           # (L) on the total space
table.add(1, {}, (0,), 1)         # degree of L on each component
table.add(1, {}, (1,), 1)
table.add(0, {}, (0, 1), 1)       # the intersection point
table.add(0, {0: 1}, (0,), -1)    # self-intersections of the components
table.add(0, {1: 1}, (0,), 1)
table.add(0, {0: 1}, (1,), 1)
table.add(0, {1: 1}, (1,), -1)

checked, violations, unchecked = table.check_relations(segment)
print("linear relations checked:", checked, "violations:", violations)

atoms = na_ma_model_metric(segment, table, {0: F(0), 1: F(1, 4)})
print("atomic masses:", dict(zip(atoms.support, map(str, atoms.masses))))
print("total:", atoms.total(), "  expected:", atoms.expected_total)
