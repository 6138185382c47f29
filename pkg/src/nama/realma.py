"""Discrete real Monge-Ampere measures of convex piecewise-linear functions.

A convex PL function is the lower convex envelope of finitely many lifted
nodes over a convex domain.  Its Monge-Ampere (subgradient) measure puts, at
each interior node, the d-volume of the dual cell

    cell(i) = { p : p . (x_i - x_j) >= v_i - v_j  for all j },

the set of supporting slopes at the node.  Cells of distinct nodes tile
gradient space, so total interior mass equals the volume of the gradient
image of the open domain.  Boundary nodes have unbounded cells and are
excluded from mass accounting.

Everything runs exactly in rational arithmetic when nodes and values are
rationals; the solver works in floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .convexgeom import (clip_halfplane, dual_cell_1d, dual_cell_2d,
                         dual_cell_3d, polygon_area)
from .errors import InfeasibleBoundary
from .measures import AtomicMeasure


def _coerce(value):
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    return float(value)


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object

    def __post_init__(self):
        object.__setattr__(self, "lo", _coerce(self.lo))
        object.__setattr__(self, "hi", _coerce(self.hi))
        if not self.lo < self.hi:
            raise ValueError("empty interval")

    dim = 1

    @property
    def vertices(self):
        return ((self.lo,), (self.hi,))

    def volume(self):
        return self.hi - self.lo

    def contains(self, pt):
        return self.lo <= pt[0] <= self.hi

    def on_boundary(self, pt):
        tol = self._tol()
        return abs(pt[0] - self.lo) <= tol or abs(pt[0] - self.hi) <= tol

    def _tol(self):
        if isinstance(self.lo, Fraction):
            return 0
        return 1e-12 * max(1.0, abs(float(self.hi - self.lo)))


@dataclass(frozen=True)
class Polygon:
    """A convex polygon domain with counterclockwise vertices."""

    verts: tuple

    def __post_init__(self):
        vs = tuple(tuple(_coerce(c) for c in v) for v in self.verts)
        if len(vs) < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        object.__setattr__(self, "verts", vs)
        if polygon_area(list(vs)) <= 0:
            raise ValueError("degenerate polygon")

    dim = 2

    @property
    def vertices(self):
        return self.verts

    def volume(self):
        return polygon_area(list(self.verts))

    def _edges(self):
        m = len(self.verts)
        return [(self.verts[k], self.verts[(k + 1) % m]) for k in range(m)]

    def halfplanes(self):
        """Inward halfplanes (a, c) with the domain = {x : a . x >= c}."""
        out = []
        for (P, Q) in self._edges():
            a = (-(Q[1] - P[1]), Q[0] - P[0])     # inward for ccw order
            c = a[0] * P[0] + a[1] * P[1]
            out.append((a, c))
        return out

    def _tol(self):
        if isinstance(self.verts[0][0], Fraction):
            return 0
        scale = max(abs(float(c)) for v in self.verts for c in v)
        return 1e-12 * max(1.0, scale)

    def contains(self, pt):
        tol = self._tol()
        for a, c in self.halfplanes():
            if a[0] * pt[0] + a[1] * pt[1] < c - tol:
                return False
        return True

    def on_boundary(self, pt):
        tol = self._tol()
        if not self.contains(pt):
            return False
        for a, c in self.halfplanes():
            if abs(a[0] * pt[0] + a[1] * pt[1] - c) <= tol:
                return True
        return False


def box_polygon(lo0, hi0, lo1, hi1):
    """Axis-aligned rectangle as a Polygon (ccw)."""
    return Polygon(((lo0, lo1), (hi0, lo1), (hi0, hi1), (lo0, hi1)))


@dataclass(frozen=True)
class Box3:
    lo: tuple
    hi: tuple

    dim = 3

    @property
    def vertices(self):
        lo, hi = self.lo, self.hi
        return tuple((x, y, z) for x in (lo[0], hi[0])
                     for y in (lo[1], hi[1]) for z in (lo[2], hi[2]))

    def volume(self):
        return math.prod(h - l for l, h in zip(self.lo, self.hi))

    def contains(self, pt):
        return all(l <= c <= h for c, l, h in zip(pt, self.lo, self.hi))

    def on_boundary(self, pt):
        tol = 1e-12 * max(1.0, *(abs(float(c)) for c in self.hi + self.lo))
        return any(abs(c - l) <= tol or abs(c - h) <= tol
                   for c, l, h in zip(pt, self.lo, self.hi))


# ---------------------------------------------------------------------------
# convex PL functions


class ConvexPL:
    """Lower convex envelope of lifted nodes over a convex domain.

    Parameters
    ----------
    domain : Interval, Polygon or Box3
    nodes : iterable of coordinate tuples
        Must be distinct, lie in the domain and include all domain vertices.
    values : iterable of scalars
        Node lifts.  The function itself is the envelope; nodes lifted above
        it simply do not contribute.
    """

    def __init__(self, domain, nodes, values):
        self.domain = domain
        nodes = [tuple(_coerce(c) for c in nd) for nd in nodes]
        values = [_coerce(v) for v in values]
        if len(nodes) != len(values):
            raise ValueError("one value per node required")
        if len(set(nodes)) != len(nodes):
            raise ValueError("nodes must be distinct")
        if any(len(nd) != domain.dim for nd in nodes):
            raise ValueError("node dimension mismatch")
        for nd in nodes:
            if not domain.contains(nd):
                raise ValueError(f"node {nd} lies outside the domain")
        node_set = set(nodes)
        for v in domain.vertices:
            if tuple(_coerce(c) for c in v) not in node_set:
                raise ValueError(f"domain vertex {v} must be a node")
        self.nodes = nodes
        self.values = values
        self.is_rational = (all(isinstance(v, Fraction) for v in values)
                            and all(isinstance(c, Fraction)
                                    for nd in nodes for c in nd))
        self._planes = None

    @property
    def dim(self):
        return self.domain.dim

    def interior_mask(self):
        return [not self.domain.on_boundary(nd) for nd in self.nodes]

    # -- evaluation ---------------------------------------------------------

    def _envelope_planes(self):
        if self._planes is None:
            pts = np.array([[float(c) for c in nd] for nd in self.nodes])
            vals = np.array([float(v) for v in self.values])
            self._planes = lower_hull_planes(pts, vals)
        return self._planes

    def evaluate(self, points):
        """Envelope values at query points (float).

        The envelope is the pointwise maximum of its facet planes, so the
        evaluation is a max over supporting affine functions.
        """
        g, b = self._envelope_planes()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (pts @ g.T + b).max(axis=1)


def lower_hull_planes(points, values):
    """Supporting planes (gradients, intercepts) of the lower envelope.

    Returns arrays ``g`` (facets x d) and ``b`` with
    ``envelope(x) = max_f (g[f] . x + b[f])``.  Degenerate (affine) data is
    handled by least-squares.
    """
    from scipy.spatial import ConvexHull, QhullError

    d = points.shape[1]
    if d == 1:
        order = np.argsort(points[:, 0], kind="stable")
        xs, vs = points[order, 0], values[order]
        chain = []          # indices into sorted arrays, lower hull
        for k in range(len(xs)):
            while len(chain) >= 2:
                i, j = chain[-2], chain[-1]
                cross = ((xs[j] - xs[i]) * (vs[k] - vs[i])
                         - (xs[k] - xs[i]) * (vs[j] - vs[i]))
                if cross <= 0:
                    chain.pop()
                else:
                    break
            chain.append(k)
        g, b = [], []
        for i, j in zip(chain[:-1], chain[1:]):
            slope = (vs[j] - vs[i]) / (xs[j] - xs[i])
            g.append([slope])
            b.append(vs[i] - slope * xs[i])
        if not g:
            g, b = [[0.0]], [float(vs[0])]
        return np.array(g), np.array(b)

    lifted = np.column_stack([points, values])
    try:
        hull = ConvexHull(lifted)
    except QhullError:
        coeffs, *_ = np.linalg.lstsq(
            np.column_stack([points, np.ones(len(points))]), values,
            rcond=None)
        return coeffs[:d][None, :], np.array([coeffs[d]])
    eqs = hull.equations          # a . x + c v + off <= 0
    lower = eqs[:, d] < -1e-12
    a, c, off = eqs[lower, :d], eqs[lower, d], eqs[lower, d + 1]
    g = -a / c[:, None]
    b = -off / c
    # deduplicate coplanar triangulated facets
    uniq = np.unique(np.round(np.column_stack([g, b]), 12), axis=0)
    return uniq[:, :d], uniq[:, d]


def discrete_slope_jumps(xs, values):
    """Signed 1D second-difference measure of a piecewise-linear function.

    ``xs`` must be strictly increasing.  No envelope is taken: jumps can be
    negative, which is how non-convex model potentials report negative mass.
    Exact for rational input.
    """
    xs = [_coerce(x) for x in xs]
    values = [_coerce(v) for v in values]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("xs must be strictly increasing")
    jumps = []
    for i in range(1, len(xs) - 1):
        right = (values[i + 1] - values[i]) / (xs[i + 1] - xs[i])
        left = (values[i] - values[i - 1]) / (xs[i] - xs[i - 1])
        jumps.append(right - left)
    return jumps


# ---------------------------------------------------------------------------
# the measure


@dataclass(frozen=True)
class MAMeasure:
    """Per-node subgradient masses of a ConvexPL function."""

    nodes: tuple
    masses: tuple            # zero at boundary / non-contributing nodes
    interior: tuple          # bool per node
    on_envelope: tuple       # bool per node
    degenerate: bool         # zero measure everywhere

    def total(self):
        return sum(self.masses)

    def atomic(self):
        sup, ms = [], []
        for nd, m, it in zip(self.nodes, self.masses, self.interior):
            if it:
                sup.append(nd)
                ms.append(m)
        return AtomicMeasure(tuple(sup), tuple(ms))


def gradient_cells(cpl, clip_box=None, expect_bounded=True):
    """Dual (subgradient) cells of every node.

    Interior nodes get bounded cells (box auto-enlarged); with ``clip_box``
    given, every cell is clipped to it instead, which is how the tiling
    identity is checked.
    """
    cells = []
    interior = cpl.interior_mask()
    for i in range(len(cpl.nodes)):
        if cpl.dim == 1:
            box = clip_box
            cells.append(dual_cell_1d(i, cpl.nodes, cpl.values, box=box))
        elif cpl.dim == 2:
            bounded = expect_bounded and interior[i] and clip_box is None
            cells.append(dual_cell_2d(i, cpl.nodes, cpl.values,
                                      box=clip_box, expect_bounded=bounded))
        else:
            if clip_box is None:
                m = 1.0
                for j in range(len(cpl.nodes)):
                    if j == i:
                        continue
                    dx = max(abs(float(a) - float(b))
                             for a, b in zip(cpl.nodes[j], cpl.nodes[i]))
                    if dx > 0:
                        m = max(m, abs(float(cpl.values[j])
                                       - float(cpl.values[i])) / dx)
                box = (-4 * m, 4 * m)
            else:
                box = clip_box
            cells.append(dual_cell_3d(i, cpl.nodes, cpl.values, box))
    return cells


def ma_measure(cpl):
    """The discrete Monge-Ampere measure of a ConvexPL function.

    Mass at an interior node is the volume of its dual cell, exact in
    rational mode; boundary nodes carry no mass (their cells are unbounded
    and the measure is restricted to the open domain).  Nodes strictly above
    the envelope have empty cells and are flagged off-envelope.
    """
    interior = cpl.interior_mask()
    masses, on_env = [], []
    zero = Fraction(0) if cpl.is_rational else 0.0
    for i in range(len(cpl.nodes)):
        if cpl.dim == 1:
            if interior[i]:
                cell = dual_cell_1d(i, cpl.nodes, cpl.values)
                on_env.append(not cell.empty)
                masses.append(zero if cell.empty else cell.volume)
            else:
                # domain endpoints always sit on the envelope
                on_env.append(True)
                masses.append(zero)
        elif cpl.dim == 2:
            if interior[i]:
                cell = dual_cell_2d(i, cpl.nodes, cpl.values,
                                    expect_bounded=True)
                masses.append(zero if cell.empty else cell.volume)
                on_env.append(not cell.empty)
            else:
                cell = dual_cell_2d(i, cpl.nodes, cpl.values)
                masses.append(zero)
                on_env.append(not cell.empty)
        else:
            if interior[i]:
                cell = gradient_cells_single_3d(cpl, i)
                masses.append(zero if cell.empty else cell.volume)
                on_env.append(not cell.empty)
            else:
                masses.append(zero)
                on_env.append(True)
    degenerate = all(m == 0 for m, it in zip(masses, interior) if it)
    return MAMeasure(tuple(cpl.nodes), tuple(masses), tuple(interior),
                     tuple(on_env), degenerate)


def gradient_cells_single_3d(cpl, i):
    m = 1.0
    for j in range(len(cpl.nodes)):
        if j == i:
            continue
        dx = max(abs(float(a) - float(b))
                 for a, b in zip(cpl.nodes[j], cpl.nodes[i]))
        if dx > 0:
            m = max(m, abs(float(cpl.values[j]) - float(cpl.values[i])) / dx)
    return dual_cell_3d(i, cpl.nodes, cpl.values, (-4 * m, 4 * m))


def ma_measure_oracle(cpl, resolution=1000):
    """Brute-force check measure: rasterize the gradient image.

    A grid of slopes p covers the bounding box of the envelope's facet
    gradients; each grid point is assigned to the node maximizing
    ``p . x_j - v_j`` (ties to the lowest index) and interior nodes collect
    the grid-cell volume.  Converges to :func:`ma_measure` as the resolution
    grows; completely independent of the cell-clipping path.
    """
    if cpl.dim > 2:
        raise NotImplementedError("oracle supports dimensions 1 and 2")
    g, _ = cpl._envelope_planes()
    lo = g.min(axis=0)
    hi = g.max(axis=0)
    pad = np.maximum(2 * (hi - lo) / resolution, 1e-6)
    lo, hi = lo - pad, hi + pad
    step = (hi - lo) / resolution

    pts = np.array([[float(c) for c in nd] for nd in cpl.nodes])
    vals = np.array([float(v) for v in cpl.values])
    interior = np.array(cpl.interior_mask())
    counts = np.zeros(len(pts), dtype=np.int64)

    if cpl.dim == 1:
        p = lo[0] + (np.arange(resolution) + 0.5) * step[0]
        scores = np.outer(p, pts[:, 0]) - vals
        counts = np.bincount(scores.argmax(axis=1), minlength=len(pts))
        cellvol = step[0]
    else:
        axis0 = lo[0] + (np.arange(resolution) + 0.5) * step[0]
        axis1 = lo[1] + (np.arange(resolution) + 0.5) * step[1]
        budget = max(1, 4_000_000 // max(len(pts), 1))
        rows_per = max(1, budget // resolution)
        for start in range(0, resolution, rows_per):
            rows = axis0[start:start + rows_per]
            P = np.stack(np.meshgrid(rows, axis1, indexing="ij"),
                         axis=-1).reshape(-1, 2)
            scores = P @ pts.T - vals
            counts += np.bincount(scores.argmax(axis=1), minlength=len(pts))
        cellvol = step[0] * step[1]

    masses = np.where(interior, counts * cellvol, 0.0)
    return masses


@dataclass(frozen=True)
class StrictConvexityReport:
    strict: tuple            # node indices with positive cell volume
    singular: tuple          # interior nodes with (near) zero cell volume
    components: tuple        # singular nodes grouped by shared envelope facets
    degenerate: bool


def strict_convexity_report(cpl, tol=1e-12):
    """Classify interior nodes by cell volume and group the singular set.

    Two singular nodes belong to the same component when some envelope facet
    contains both (flat pieces of the graph are connected regions).
    """
    measure = ma_measure(cpl)
    scale = max([abs(float(m)) for m in measure.masses] + [1.0])
    strict, singular = [], []
    for i, it in enumerate(measure.interior):
        if not it:
            continue
        if float(measure.masses[i]) > tol * scale:
            strict.append(i)
        else:
            singular.append(i)

    # adjacency through lower-hull facets
    pts = np.array([[float(c) for c in nd] for nd in cpl.nodes])
    vals = np.array([float(v) for v in cpl.values])
    g, b = lower_hull_planes(pts, vals)
    on_facet = []
    ftol = 1e-9 * max(1.0, np.abs(vals).max())
    for f in range(len(g)):
        plane = pts @ g[f] + b[f]
        on_facet.append(set(np.nonzero(np.abs(plane - vals) <= ftol)[0]))

    parent = {i: i for i in singular}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    sing = set(singular)
    for members in on_facet:
        group = sorted(sing & members)
        for a, b2 in zip(group, group[1:]):
            ra, rb = find(a), find(b2)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    comps = {}
    for i in singular:
        comps.setdefault(find(i), []).append(i)
    components = tuple(tuple(sorted(c)) for _, c in sorted(comps.items()))
    return StrictConvexityReport(tuple(strict), tuple(singular), components,
                                 measure.degenerate)


# ---------------------------------------------------------------------------
# targets and the solver


@dataclass(frozen=True)
class TargetMeasure:
    """Node masses prescribing the discrete Monge-Ampere equation.

    ``masses`` maps node tuples to nonnegative masses; ``density`` records a
    background density the masses were derived from (when both are known the
    totals must agree, see :meth:`from_density`).  Lookups go through float
    node keys so exact and float representations of the same node agree;
    mass values keep whatever arithmetic they were built with.
    """

    masses: dict
    density: object = None

    def __post_init__(self):
        table = {}
        for node, mass in self.masses.items():
            key = tuple(float(c) for c in node)
            if key in table:
                raise ValueError(f"two target nodes collapse to {key}")
            table[key] = mass
        object.__setattr__(self, "_table", table)

    def mass_at(self, node):
        return self._table.get(tuple(float(c) for c in node), 0)

    def total(self):
        return sum(self.masses.values())

    @classmethod
    def from_density(cls, domain, nodes, density):
        """Integrate a constant density over the Voronoi regions of the nodes.

        The Voronoi cell of a node is its dual cell for the paraboloid lift
        ``|x|^2 / 2`` clipped to the domain, so the construction reuses the
        exact cell machinery and the masses add up to density * volume
        exactly in rational mode.
        """
        density = _coerce(density)
        nodes = [tuple(_coerce(c) for c in nd) for nd in nodes]
        half = Fraction(1, 2) if isinstance(density, Fraction) else 0.5
        values = [half * sum(c * c for c in nd) for nd in nodes]
        masses = {}
        if domain.dim == 1:
            for i, nd in enumerate(nodes):
                cell = dual_cell_1d(i, nodes, values,
                                    box=(domain.lo, domain.hi))
                masses[nd] = density * cell.volume
        elif domain.dim == 2:
            hps = domain.halfplanes()
            for i, nd in enumerate(nodes):
                lo0 = min(v[0] for v in domain.vertices)
                hi0 = max(v[0] for v in domain.vertices)
                lo1 = min(v[1] for v in domain.vertices)
                hi1 = max(v[1] for v in domain.vertices)
                cell = dual_cell_2d(i, nodes, values,
                                    box=(lo0, hi0, lo1, hi1))
                verts, labels = cell.vertices, ["x"] * len(cell.vertices)
                for a, c in hps:
                    verts, labels, _ = clip_halfplane(verts, labels, a, c, "d")
                masses[nd] = density * polygon_area(verts)
        else:
            raise NotImplementedError("density targets support dims 1 and 2")
        return cls(masses, density)

    def validate_total(self, domain):
        if self.density is None:
            return
        expected = self.density * domain.volume()
        got = self.total()
        if isinstance(got, Fraction) and isinstance(expected, Fraction):
            ok = got == expected
        else:
            ok = abs(float(got) - float(expected)) <= 1e-9 * max(
                1.0, abs(float(expected)))
        if not ok:
            raise ValueError(
                f"target total {got} != density * volume = {expected}")


@dataclass(frozen=True)
class SolveResult:
    solution: ConvexPL
    residual: float          # max-norm mass residual relative to mean target
    iterations: int
    converged: bool
    method: str


def _resolve_boundary(boundary, node):
    if callable(boundary):
        return boundary(node)
    return boundary[tuple(node)]


def solve(domain, target, boundary, nodes=None, tol=1e-8,
          max_updates=100000, method="newton"):
    """Solve the discrete Monge-Ampere Dirichlet problem on a node set.

    Finds the convex PL function with prescribed subgradient masses at the
    interior nodes and prescribed boundary values, by node lifting: interior
    values start on the envelope of the boundary data and deficient nodes
    are lowered (each lowering grows the node's own cell monotonically).
    ``method="newton"`` accelerates the lifting with damped Newton steps on
    the cell-volume map; ``method="lift"`` is the plain damped scheme.

    Parameters
    ----------
    domain : Interval or Polygon
    target : TargetMeasure, or mapping node -> mass
    boundary : callable or mapping
        Dirichlet values; must admit a convex extension.
    nodes : iterable of tuples, optional
        Defaults to the target support plus the boundary nodes (boundary
        given as a mapping) or the domain vertices (boundary callable).
    tol : float
        Max-norm mass residual, relative to the mean target mass.
    max_updates : int
        Cap on node updates / Newton trials before giving up.

    Returns
    -------
    SolveResult
        ``converged=False`` carries the best iterate with its residual; no
        exception is raised for slow convergence.
    """
    if isinstance(target, dict):
        target = TargetMeasure({tuple(k): v for k, v in target.items()})
    target.validate_total(domain)
    if nodes is None:
        if isinstance(boundary, dict):
            extra = [tuple(k) for k in boundary.keys()]
        elif hasattr(domain, "vertices"):
            extra = [tuple(v) for v in domain.vertices]
        else:
            extra = [(domain.lo,), (domain.hi,)]
        seen = {}
        for pt in list(target.masses.keys()) + extra:
            seen[tuple(float(c) for c in pt)] = pt
        nodes = list(seen.values())

    if domain.dim == 1:
        return _solve_1d(domain, nodes, target, boundary, tol)
    if domain.dim == 2:
        return _solve_2d(domain, nodes, target, boundary, tol, max_updates,
                         method)
    raise NotImplementedError("solve supports dimensions 1 and 2")


def _solve_1d(domain, nodes, target, boundary, tol):
    nodes = sorted(tuple(_coerce(c) for c in nd) for nd in nodes)
    xs = [nd[0] for nd in nodes]
    mus = [target.mass_at(nd) for nd in nodes]
    rational = (all(isinstance(x, Fraction) for x in xs)
                and all(isinstance(_coerce(m), Fraction) for m in mus[1:-1]))
    v_lo = _coerce(_resolve_boundary(boundary, nodes[0]))
    v_hi = _coerce(_resolve_boundary(boundary, nodes[-1]))
    rational = (rational and isinstance(v_lo, Fraction)
                and isinstance(v_hi, Fraction))

    n = len(xs)
    if rational:
        one = Fraction(1)
    else:
        one = 1.0
        xs = [float(x) for x in xs]
        mus = [float(m) for m in mus]
        v_lo, v_hi = float(v_lo), float(v_hi)
    h = [xs[i + 1] - xs[i] for i in range(n - 1)]

    # tridiagonal system for the interior values:
    # v[i-1]/h[i-1] - (1/h[i-1] + 1/h[i]) v[i] + v[i+1]/h[i] = mu_i - bdry
    sub = [one / h[i] for i in range(n - 1)]
    diag = [-(one / h[i - 1] + one / h[i]) for i in range(1, n - 1)]
    rhs = [_coerce(mus[i]) if rational else float(mus[i])
           for i in range(1, n - 1)]
    if n == 2:
        interior_vals = []
    else:
        rhs[0] -= v_lo * sub[0]
        rhs[-1] -= v_hi * sub[-1]
        interior_vals = _thomas(sub[1:-1], diag, sub[1:-1], rhs)

    values = [v_lo] + interior_vals + [v_hi]
    if not rational and n > 2:
        values = _refine_1d(xs, values, mus)
    cpl = ConvexPL(domain, [(x,) for x in xs], values)

    jumps = discrete_slope_jumps(xs, values)
    mean = sum(float(m) for m in mus[1:-1]) / max(1, n - 2) or 1.0
    residual = max((abs(float(j) - float(m))
                    for j, m in zip(jumps, mus[1:-1])), default=0.0) / mean
    return SolveResult(cpl, residual, 1, residual <= tol, "direct")


def _thomas(lower, diag, upper, rhs):
    """Tridiagonal elimination; exact when fed Fractions."""
    m = len(diag)
    diag = list(diag)
    rhs = list(rhs)
    for i in range(1, m):
        w = lower[i - 1] / diag[i - 1]
        diag[i] = diag[i] - w * upper[i - 1]
        rhs[i] = rhs[i] - w * rhs[i - 1]
    out = [None] * m
    out[-1] = rhs[-1] / diag[-1]
    for i in range(m - 2, -1, -1):
        out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i]
    return out


def _refine_1d(xs, values, mus):
    """Residual-correction passes for the float tridiagonal solve."""
    n = len(xs)
    a = np.zeros((n - 2, n - 2))
    for i in range(n - 2):
        hl = xs[i + 1] - xs[i]
        hr = xs[i + 2] - xs[i + 1]
        a[i, i] = -(1 / hl + 1 / hr)
        if i > 0:
            a[i, i - 1] = 1 / hl
        if i < n - 3:
            a[i, i + 1] = 1 / hr
    vals = np.array([float(v) for v in values])
    for _ in range(2):
        jumps = np.array(discrete_slope_jumps(xs, vals.tolist()))
        res = np.array([float(m) for m in mus[1:-1]]) - jumps
        vals[1:-1] += np.linalg.solve(a, res)
    return vals.tolist()


def _boundary_envelope_values(b_nodes, b_values, queries):
    pts = np.array([[float(c) for c in nd] for nd in b_nodes])
    vals = np.array([float(v) for v in b_values])
    g, b = lower_hull_planes(pts, vals)
    q = np.array([[float(c) for c in nd] for nd in queries])
    if len(q) == 0:
        return np.zeros(0)
    return (q @ g.T + b).max(axis=1)


def _cells_2d(nodes, values, interior_idx):
    """Cells, masses and edge sensitivities of all interior nodes."""
    masses = np.zeros(len(interior_idx))
    edges = []
    for k, i in enumerate(interior_idx):
        cell = dual_cell_2d(i, nodes, values, expect_bounded=True)
        masses[k] = float(cell.volume)
        edges.append(cell.edges)
    return masses, edges


def _lift_node(i, nodes, values, mu, rel_tol=0.02, max_evals=80):
    """Lower node i until its cell volume matches mu (never raises it)."""
    evals = 0

    def mass(v):
        trial = values[:i] + [v] + values[i + 1:]
        cell = dual_cell_2d(i, nodes, trial, expect_bounded=True)
        return float(cell.volume)

    v0 = float(values[i])
    m0 = mass(v0)
    evals += 1
    if m0 >= mu * (1 - rel_tol):
        return v0, evals
    scale = 1.0
    for j, nd in enumerate(nodes):
        if j != i:
            scale = max(scale, abs(float(values[j]) - v0))
    step = 0.25 * scale / max(1, len(nodes)) + 1e-6
    lo = v0
    while evals < max_evals:
        lo = lo - step
        step *= 2
        m = mass(lo)
        evals += 1
        if m >= mu:
            break
    hi = v0
    for _ in range(60):
        if evals >= max_evals:
            break
        mid = 0.5 * (lo + hi)
        m = mass(mid)
        evals += 1
        if m >= mu:
            lo = mid
        else:
            hi = mid
        if mu > 0 and abs(m - mu) <= rel_tol * mu:
            return mid, evals
    return lo, evals


def _solve_2d(domain, nodes, target, boundary, tol, max_updates, method):
    nodes = [tuple(float(c) for c in nd) for nd in nodes]
    interior_idx = [i for i, nd in enumerate(nodes)
                    if not domain.on_boundary(nd)]
    boundary_idx = [i for i, nd in enumerate(nodes)
                    if domain.on_boundary(nd)]
    if not interior_idx:
        raise ValueError("no interior nodes to solve for")

    b_nodes = [nodes[i] for i in boundary_idx]
    b_values = [float(_resolve_boundary(boundary, nodes[i]))
                for i in boundary_idx]
    env_b = _boundary_envelope_values(b_nodes, b_values, b_nodes)
    scale = max(1.0, np.abs(b_values).max() if b_values else 1.0)
    if np.any(env_b < np.array(b_values) - 1e-9 * scale):
        bad = int(np.argmin(env_b - np.array(b_values)))
        raise InfeasibleBoundary(
            f"boundary node {b_nodes[bad]} lies above the envelope of the "
            "other boundary data; no convex extension exists")

    mus = np.array([float(target.mass_at(nodes[i])) for i in interior_idx])
    if np.any(mus < 0):
        raise ValueError("target masses must be nonnegative")
    mean_mu = mus.mean() if mus.size else 1.0

    values = [0.0] * len(nodes)
    for i, v in zip(boundary_idx, b_values):
        values[i] = v
    init = _boundary_envelope_values(b_nodes, b_values,
                                     [nodes[i] for i in interior_idx])
    for k, i in enumerate(interior_idx):
        values[i] = float(init[k])

    updates = 0
    best = (np.inf, list(values))

    def residual_of(masses):
        return np.abs(masses - mus).max() / mean_mu

    # warm-up sweeps: genuine node lifting; guarantees nonempty cells
    for sweep in range(200):
        for k, i in enumerate(interior_idx):
            vi, evals = _lift_node(i, nodes, values, mus[k])
            values[i] = vi
            updates += 1
            if updates > max_updates:
                break
        masses, edges = _cells_2d(nodes, values, interior_idx)
        res = residual_of(masses)
        if res < best[0]:
            best = (res, list(values))
        if res <= tol or updates > max_updates:
            break
        if method == "newton" and masses.min() > 0 and sweep >= 1:
            break

    if method == "newton":
        pos = {i: k for k, i in enumerate(interior_idx)}
        while updates <= max_updates:
            masses, edges = _cells_2d(nodes, values, interior_idx)
            res = residual_of(masses)
            if res < best[0]:
                best = (res, list(values))
            if res <= tol:
                break
            jac = np.zeros((len(interior_idx), len(interior_idx)))
            for k, i in enumerate(interior_idx):
                for j, ell in edges[k].items():
                    dist = math.hypot(nodes[i][0] - nodes[j][0],
                                      nodes[i][1] - nodes[j][1])
                    sens = ell / dist
                    jac[k, k] -= sens
                    if j in pos:
                        jac[k, pos[j]] += sens
            try:
                delta = np.linalg.solve(jac, -(masses - mus))
            except np.linalg.LinAlgError:
                for k, i in enumerate(interior_idx):
                    values[i], _ = _lift_node(i, nodes, values, mus[k])
                    updates += 1
                continue
            floor = 0.0 if mus.min() <= 0 else 0.5 * min(masses.min(),
                                                         mus.min())
            tau = 1.0
            accepted = False
            while tau > 1e-6:
                trial = list(values)
                for k, i in enumerate(interior_idx):
                    trial[i] = values[i] + tau * delta[k]
                t_masses, _ = _cells_2d(nodes, trial, interior_idx)
                updates += 1
                if residual_of(t_masses) < res and t_masses.min() >= floor:
                    values = trial
                    accepted = True
                    break
                tau *= 0.5
            if not accepted:
                for k, i in enumerate(interior_idx):
                    values[i], _ = _lift_node(i, nodes, values, mus[k],
                                              rel_tol=1e-4)
                    updates += 1
            if updates > max_updates:
                break

    masses, _ = _cells_2d(nodes, values, interior_idx)
    res = residual_of(masses)
    if res > best[0]:
        res = best[0]
        values = best[1]
    cpl = ConvexPL(domain, nodes, values)
    return SolveResult(cpl, float(res), updates, res <= tol, method)
