"""Subgradient measures, oracles and the Dirichlet solver."""

from fractions import Fraction

import pytest

from nama import (ConvexPL, InfeasibleBoundary, Interval, TargetMeasure,
                  box_polygon, discrete_slope_jumps, gradient_cells,
                  ma_measure, ma_measure_oracle, solve,
                  strict_convexity_report)

F = Fraction


def kink_function():
    return ConvexPL(Interval(0, 1), [(0,), (F(1, 2),), (1,)],
                    [0, F(-1, 8), 0])


def square_pyramid():
    dom = box_polygon(-1, 1, -1, 1)
    nodes = [(-1, -1), (1, -1), (1, 1), (-1, 1), (0, 0)]
    return ConvexPL(dom, nodes, [1, 1, 1, 1, 0])


def test_domains_classify_points():
    iv = Interval(0, 1)
    assert iv.contains((F(1, 3),)) and not iv.on_boundary((F(1, 3),))
    assert iv.on_boundary((0,)) and iv.on_boundary((1,))
    assert not iv.contains((2,))
    assert iv.volume() == 1

    box = box_polygon(0, 2, 0, 1)
    assert box.volume() == 2
    assert box.contains((1, F(1, 2)))
    assert box.on_boundary((0, F(1, 2)))
    assert box.on_boundary((2, 1))
    assert not box.contains((3, 0))


def test_convexpl_validates_its_input():
    iv = Interval(0, 1)
    with pytest.raises(ValueError):
        ConvexPL(iv, [(0,), (1,)], [0])            # value count
    with pytest.raises(ValueError):
        ConvexPL(iv, [(0,), (0,), (1,)], [0, 0, 0])  # duplicate node
    with pytest.raises(ValueError):
        ConvexPL(iv, [(0,), (2,)], [0, 0])         # outside the domain
    with pytest.raises(ValueError):
        ConvexPL(iv, [(0,), (F(1, 2),)], [0, 0])   # missing domain vertex


def test_discrete_slope_jumps_second_difference():
    jumps = discrete_slope_jumps([0, F(1, 2), 1], [0, F(-1, 8), 0])
    assert jumps == [F(1, 2)]
    # a non-convex profile reports a negative jump; no envelope is taken
    assert discrete_slope_jumps([0, 1, 2], [0, 1, 0]) == [-2]
    with pytest.raises(ValueError):
        discrete_slope_jumps([0, 0, 1], [0, 0, 0])


def test_ma_measure_1d_kink():
    measure = ma_measure(kink_function())
    assert measure.masses == (0, F(1, 2), 0)
    assert measure.interior == (False, True, False)
    assert measure.on_envelope == (True, True, True)
    assert not measure.degenerate
    assert measure.total() == F(1, 2)
    atoms = measure.atomic()
    assert atoms.support == ((F(1, 2),),) and atoms.masses == (F(1, 2),)


def test_ma_measure_1d_off_envelope_node():
    lifted = ConvexPL(Interval(0, 1), [(0,), (F(1, 2),), (1,)],
                      [0, F(1, 4), 0])
    measure = ma_measure(lifted)
    assert measure.masses[1] == 0
    assert measure.on_envelope == (True, False, True)
    assert measure.degenerate


def test_ma_measure_2d_pyramid_and_oracle_agree():
    cpl = square_pyramid()
    measure = ma_measure(cpl)
    assert measure.masses[4] == 2
    assert measure.total() == 2
    oracle = ma_measure_oracle(cpl, resolution=400)
    assert abs(float(oracle[4]) - 2.0) < 5e-2
    assert all(m == 0 for m in oracle[:4])


def test_ma_measure_is_exact_in_rational_mode():
    dom = box_polygon(0, 1, 0, 1)
    nodes = [(0, 0), (1, 0), (1, 1), (0, 1), (F(1, 3), F(2, 5))]
    values = [F(1, 2) * (x * x + y * y) for x, y in nodes[:4]] + [F(0)]
    cpl = ConvexPL(dom, nodes, values)
    measure = ma_measure(cpl)
    assert isinstance(measure.masses[4], Fraction)
    assert measure.masses[4] > 0


def test_gradient_cells_tile_a_clip_box():
    cpl = square_pyramid()
    cells = gradient_cells(cpl, clip_box=(-3, 3, -3, 3))
    assert sum(c.volume for c in cells) == 36


def test_evaluate_returns_the_envelope():
    cpl = kink_function()
    vals = cpl.evaluate([(0.25,), (0.5,), (1.0,)])
    assert abs(vals[0] + 1 / 16) < 1e-12
    assert abs(vals[1] + 1 / 8) < 1e-12
    assert abs(vals[2]) < 1e-12


def test_strict_convexity_report_groups_flat_regions():
    cpl = square_pyramid()
    rep = strict_convexity_report(cpl)
    assert rep.strict == (4,) and rep.singular == ()

    dom = Interval(0, 2)
    flat = ConvexPL(dom, [(0,), (1,), (F(3, 2),), (2,)],
                    [0, -1, -1, 0])      # the middle segment is affine
    rep2 = strict_convexity_report(flat)
    assert set(rep2.singular) <= {1, 2}
    assert len(rep2.components) <= 1


def test_target_measure_from_density_is_exact():
    dom = Interval(0, 1)
    nodes = [(F(k, 4),) for k in range(5)]
    target = TargetMeasure.from_density(dom, nodes, F(2))
    assert target.total() == 2
    assert target.mass_at((0.25,)) == F(1, 2)
    assert target.mass_at((0,)) == F(1, 4)     # half cell at the endpoint
    target.validate_total(dom)

    box = box_polygon(0, 1, 0, 1)
    grid = [(F(i, 2), F(j, 2)) for i in range(3) for j in range(3)]
    t2 = TargetMeasure.from_density(box, grid, F(4))
    assert t2.total() == 4
    assert t2.mass_at((0.5, 0.5)) == 1


def test_target_measure_rejects_colliding_nodes():
    third = float(F(1, 3))
    with pytest.raises(ValueError):
        TargetMeasure({(F(1, 3),): 1, (third,): 1})
    # lookups succeed through either representation of the same point
    target = TargetMeasure({(F(1, 3),): F(2, 7)})
    assert target.mass_at((third,)) == F(2, 7)


def test_solve_1d_quadratic_is_exact():
    dom = Interval(0, 1)
    nodes = [(F(k, 8),) for k in range(9)]
    target = TargetMeasure.from_density(dom, nodes, 2)
    result = solve(dom, target, {(F(0),): F(0), (F(1),): F(0)}, nodes=nodes)
    assert result.converged
    assert result.method == "direct"
    for (x,), v in zip(result.solution.nodes, result.solution.values):
        assert v == x * x - x


def test_solve_default_nodes_come_from_target_and_boundary():
    dom = Interval(0, 1)
    nodes = [(F(k, 4),) for k in range(5)]
    target = TargetMeasure.from_density(dom, nodes, 2)
    result = solve(dom, target, {(F(0),): F(0), (F(1),): F(0)})
    assert sorted(result.solution.nodes) == sorted(nodes)
    assert result.converged


def test_solve_2d_uniform_square():
    dom = box_polygon(0, 1, 0, 1)
    per = 5
    nodes = [(F(i, per - 1), F(j, per - 1))
             for i in range(per) for j in range(per)]
    target = TargetMeasure.from_density(dom, nodes, 1)

    def boundary(nd):
        x, y = nd
        return (x * x + y * y) / 2

    result = solve(dom, target, boundary, nodes=nodes, tol=1e-8)
    assert result.converged
    assert result.residual <= 1e-8
    sol = dict(zip(result.solution.nodes, result.solution.values))
    exact = (0.5 ** 2 + 0.5 ** 2) / 2
    assert abs(sol[(0.5, 0.5)] - exact) < 0.02


def test_solve_2d_rejects_concave_boundary_data():
    dom = box_polygon(0, 1, 0, 1)
    per = 3
    nodes = [(F(i, 2), F(j, 2)) for i in range(per) for j in range(per)]
    target = TargetMeasure.from_density(dom, nodes, 1)

    def boundary(nd):
        x, y = nd
        return -(x - 0.5) ** 2 - (y - 0.5) ** 2

    with pytest.raises(InfeasibleBoundary):
        solve(dom, target, boundary, nodes=nodes)


def test_oracle_matches_exact_measure_on_random_data():
    import random

    rng = random.Random(5)
    dom = box_polygon(-1, 1, -1, 1)
    corners = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    inner = [(F(rng.randint(-7, 7), 8), F(rng.randint(-7, 7), 8))
             for _ in range(6)]
    nodes = corners + sorted(set(inner))
    values = [F(1, 2) * (x * x + y * y) + F(rng.randint(-2, 2), 16)
              for x, y in nodes]
    cpl = ConvexPL(dom, nodes, values)
    exact = ma_measure(cpl)
    approx = ma_measure_oracle(cpl, resolution=600)
    for m_exact, m_grid, it in zip(exact.masses, approx, exact.interior):
        if it:
            assert abs(float(m_exact) - float(m_grid)) < 2e-2
