"""Intersection tables, model functions and the atomic measure."""

from fractions import Fraction

import pytest

from nama import (Divisor, IntersectionTable, MassMismatch, MissingTableEntry,
                  Section, build_model, check_continuity,
                  check_face_convexity, model_function, na_ma_model_metric,
                  nef_check, stratum_class, tropical_fs_potential)
from nama.potential import LinearFunctional

F = Fraction


def segment_model():
    return build_model([Divisor(0), Divisor(1)], [(0,), (1,), (0, 1)],
                       dimension=1, semistable=True)


def segment_table():
    """Degree data of a segment degeneration with (L) = 2."""
    return IntersectionTable(1, [
        (1, {}, (), 2),
        (1, {}, (0,), 1),
        (1, {}, (1,), 1),
        (0, {}, (0, 1), 1),
        (0, {0: 1}, (0,), -1),
        (0, {1: 1}, (0,), 1),
        (0, {0: 1}, (1,), 1),
        (0, {1: 1}, (1,), -1),
    ])


def test_table_enforces_the_dimension_rule():
    table = IntersectionTable(2)
    table.add(2, {}, (), 5)
    table.add(1, {3: 1}, (), 1)
    table.add(0, {3: 1}, (3, 4), 1)
    with pytest.raises(ValueError):
        table.add(2, {}, (0, 1), 1)
    with pytest.raises(ValueError):
        table.add(1, {}, (), 1)
    with pytest.raises(ValueError):
        table.add(0, {0: -1}, (), 1)


def test_table_rejects_conflicting_entries_and_reports_missing():
    table = segment_table()
    with pytest.raises(ValueError):
        table.add(1, {}, (0,), 3)
    table.add(1, {}, (0,), 1)     # same value is fine
    with pytest.raises(MissingTableEntry):
        table.value(0, {0: 1}, (0, 1))
    assert table.top_self_intersection() == 2
    assert len(table) == 8


def test_table_keys_are_canonical():
    table = IntersectionTable(2)
    table.add(0, {1: 1, 0: 1}, (2,), 7)
    assert table.value(0, {0: 1, 1: 1}, (2,)) == 7
    assert table.has(0, {0: 1, 1: 1, 2: 0}, (2,))


def test_check_relations_flags_a_bad_table():
    model = segment_model()
    good = segment_table()
    checked, violations, unchecked = good.check_relations(model)
    assert checked == 2 and violations == [] and unchecked == 0

    bad = IntersectionTable(1, [
        (0, {0: 1}, (0,), -1),
        (0, {1: 1}, (0,), 2),
    ])
    checked, violations, unchecked = bad.check_relations(model)
    assert violations == [(0, (), (0,))]


def test_check_relations_skips_incomplete_rows():
    model = segment_model()
    partial = IntersectionTable(1, [(0, {0: 1}, (0,), -1)])
    checked, violations, unchecked = partial.check_relations(model)
    assert (checked, violations, unchecked) == (0, [], 1)


def test_model_function_interpolates_coefficients_at_vertices():
    model = segment_model()
    fn = model_function(model, {0: F(1, 2), 1: F(-1, 3)})
    face = model.face((0, 1))
    assert fn.value(face, face.vertex_point(0)) == F(1, 2)
    assert fn.value(face, face.vertex_point(1)) == F(-1, 3)
    assert fn.value(face, face.barycenter()) == F(1, 12)
    assert check_continuity(model, fn) == 0


def test_atomic_measure_of_the_model_metric():
    model = segment_model()
    table = segment_table()
    measure = na_ma_model_metric(model, table, {0: 0, 1: F(1, 4)})
    assert measure.mass_of(0) == F(5, 4)
    assert measure.mass_of(1) == F(3, 4)
    assert measure.total() == 2
    assert measure.expected_total == 2


def test_atomic_measure_weights_masses_by_multiplicity():
    model = build_model(
        [Divisor(0, multiplicity=2), Divisor(1, multiplicity=1)],
        [(0,), (1,), (0, 1)], dimension=1)
    table = IntersectionTable(1, [
        (1, {}, (), 3),
        (1, {}, (0,), 1),
        (1, {}, (1,), 1),
        (0, {0: 1}, (0,), F(-1, 2)),
        (0, {1: 1}, (0,), 1),
        (0, {0: 1}, (1,), 1),
        (0, {1: 1}, (1,), -2),
    ])
    measure = na_ma_model_metric(model, table, {0: F(1, 3), 1: 0})
    # mass at E_0 is b_0 ((L.E_0) + c_0 (O(E_0).E_0)) = 2 (1 - 1/6) = 5/3
    assert measure.mass_of(0) == F(5, 3)
    assert measure.mass_of(1) == F(4, 3)
    assert measure.total() == 3


def test_atomic_measure_needs_all_expanded_entries():
    model = segment_model()
    table = IntersectionTable(1, [
        (1, {}, (), 2), (1, {}, (0,), 1), (1, {}, (1,), 1)])
    with pytest.raises(MissingTableEntry):
        na_ma_model_metric(model, table, {0: 1, 1: 0})
    # zero coefficients never touch divisor-power entries
    measure = na_ma_model_metric(model, table, {0: 0, 1: 0})
    assert measure.total() == 2


def test_atomic_measure_detects_inconsistent_totals():
    model = segment_model()
    bad = IntersectionTable(1, [
        (1, {}, (), 3), (1, {}, (0,), 1), (1, {}, (1,), 1)])
    with pytest.raises(MassMismatch):
        na_ma_model_metric(model, bad, {0: 0, 1: 0})


def test_tropical_potential_is_convex_and_continuous():
    model = segment_model()
    sections = [
        Section({(0,): ((0,),), (1,): ((1,),), (0, 1): ((0, 1),)}, 0),
        Section({(0,): ((1,),), (1,): ((0,),), (0, 1): ((1, 0),)}, F(1, 2)),
    ]
    pot = tropical_fs_potential(model, sections)
    face = model.face((0, 1))
    # at the barycenter both pieces compete: max(-1/2, -1/2 - 1/2) = -1/2
    assert pot.value(face, face.barycenter()) == F(-1, 2)
    assert pot.value(face, face.vertex_point(0)) == 0
    assert check_face_convexity(pot, face).convex
    assert check_continuity(model, pot) == 0


def test_tropical_potential_scaling_shifts_by_a_constant():
    model = segment_model()
    base = [Section({(0,): ((0,),), (1,): ((1,),), (0, 1): ((0, 1),)}, 0)]
    shifted = [Section(base[0].support, 3)]
    p0 = tropical_fs_potential(model, base, power=2)
    p1 = tropical_fs_potential(model, shifted, power=2)
    face = model.face((0, 1))
    for x in face.grid_points(3):
        assert p1.value(face, x) - p0.value(face, x) == F(-3, 2)


def test_stratum_class_pairing_and_gauge_invariance():
    model = segment_model()
    table = segment_table()
    grads = {0: F(1, 5), 1: F(2, 5)}
    base = stratum_class(model, table, grads, (0,))
    assert base.pairing == 1 + F(1, 5) - F(2, 5)
    # shifting the twist and the gradients together changes nothing
    twisted = stratum_class(model, table,
                            {i: g + 7 for i, g in grads.items()},
                            (0,), base_twist={0: 7, 1: 7})
    assert twisted.pairing == base.pairing


def test_stratum_class_requires_gradients_for_neighbors():
    model = segment_model()
    table = segment_table()
    with pytest.raises(ValueError):
        stratum_class(model, table, {0: 1}, (0,))


def test_nef_check_evaluates_functionals():
    model = segment_model()
    table = segment_table()
    # pairing with E_0: (L . E_0) = 1, (O(E_0) . E_0) = -1, (O(E_1) . E_0) = 1
    degree_on_first = LinearFunctional(1, {0: -1, 1: 1}, name="deg E_0")

    steep = stratum_class(model, table, {0: 0, 1: F(3, 2)}, (0,)).cls
    report = nef_check(steep, [degree_on_first])
    assert not report.satisfied
    assert report.first_violation == (0, F(-1, 2))

    flat = stratum_class(model, table, {0: 0, 1: 1}, (0,)).cls
    edge = nef_check(flat, [degree_on_first])
    assert edge.satisfied
    assert edge.boundary == (0,)
