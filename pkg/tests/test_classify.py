import itertools
from fractions import Fraction

import pytest
import sympy as sp

from lieconf.classify import (
    affine_family,
    family_member,
    generate_structure_constraints,
    identity_residuals,
    identity_sides,
    solve_structure_bounded,
    staged_elimination,
    unknown_shapes,
    verify_structure_candidate,
)
from lieconf.errors import DegreeLimit
from lieconf.exactpoly import ZERO, var

import oracles

a, c, al, be = (var(s) for s in ("a", "c", "al", "be"))


def test_constraint_counts_grow():
    sizes = [len(generate_structure_constraints(d)) for d in range(4)]
    assert sizes[0] == 0
    assert sizes == sorted(sizes)


def test_degree_guard():
    with pytest.raises(DegreeLimit):
        generate_structure_constraints(5)
    assert len(generate_structure_constraints(5, guard=5)) > 0


def test_affine_solution_satisfies_every_constraint():
    for deg in range(1, 4):
        cs = generate_structure_constraints(deg)
        shapes = unknown_shapes(deg)
        for s, t in itertools.product(range(-2, 3), repeat=2):
            vals = [Fraction(0)] * len(shapes)
            vals[shapes.index((1, 0))] = Fraction(s)
            vals[shapes.index((0, 0))] = Fraction(t)
            assert cs.satisfied_by(vals)


def test_degree_one_excludes_beta():
    cs = generate_structure_constraints(1)
    shapes = unknown_shapes(1)
    for u in (1, -1, 2):
        vals = [Fraction(0)] * len(shapes)
        vals[shapes.index((0, 1))] = Fraction(u)
        assert not cs.satisfied_by(vals)


def test_constant_f_satisfies_degree_zero():
    for f in (ZERO, c, 3 + ZERO):
        assert all(r.is_zero() for r in identity_residuals(f).values())


def test_affine_identities_vanish_in_sympy():
    s, t = sp.symbols("s t")
    ff, fg = oracles.structure_identities(lambda x, y: s * x + t)
    assert ff == 0 and fg == 0


def test_alpha_squared_witness_is_four_versus_two():
    # brute-force evaluation of the second identity, independent of the engine
    f = lambda x, y: x * x
    g = lambda x, y: f(x, y) + f(y, x)
    x, y, r = 1, 1, 0
    assert (f(y, x) * g(x + y, r), f(y, r) * g(x, y + r)) == (4, 2)
    assert identity_sides(al ** 2, (1, 1, 0))["fg"] == (4, 2)


@pytest.mark.parametrize("f", [al ** 2, al * be, al + be ** 2])
def test_falsification_witnesses(f):
    v = verify_structure_candidate(f)
    assert not v.jacobi_ok
    w = v.witnesses["jacobi"]
    assert all(-2 <= t <= 2 for t in w)
    res = v.jacobi.substitute(dict(zip(("al", "be", "ga"), w)))
    assert not res.is_zero()


def test_witness_for_al_be_found_by_sympy_too():
    x, y, z = oracles.al, oracles.be, oracles.ga
    P = lambda p, q, d, l: p * q * d + 2 * p * q * l
    J = oracles.jacobi(P)
    w = verify_structure_candidate(al * be).witnesses["jacobi"]
    assert J.subs({x: w[0], y: w[1], z: w[2]}) != 0


def test_candidates_that_pass():
    for f in (a * al + c, ZERO, c):
        v = verify_structure_candidate(f)
        assert v.skew_ok and v.jacobi_ok and not v.witnesses


def test_staged_certificates_verified():
    for deg in range(4):
        stages = staged_elimination(generate_structure_constraints(deg))
        assert all(s["verified"] for s in stages), [s for s in stages if not s["verified"]]


def test_degree_one_small_grid_count():
    sol = solve_structure_bounded(1, [-1, 0, 1])
    assert len(sol.survivors) == 9
    assert not sol.outside_family
    assert sol.assignments_total == 27


def test_degree_zero_all_constants_survive():
    sol = solve_structure_bounded(0, [-2, 0, 5])
    assert len(sol.survivors) == 3
    assert str(affine_family(0)) == "c"


def test_exhaustive_matches_plain_enumeration():
    # naive sweep of every assignment as the oracle for the pruned search
    deg, grid = 1, [Fraction(x) for x in (-1, 0, 1)]
    cs = generate_structure_constraints(deg)
    naive = [v for v in itertools.product(grid, repeat=len(cs.labels)) if cs.satisfied_by(v)]
    sol = solve_structure_bounded(deg, grid)
    assert sorted(naive) == sorted(sol.survivors)


def test_survivors_pass_verification():
    sol = solve_structure_bounded(2, [-1, 0, 2])
    for v in sol.survivors:
        f = family_member(2, v)
        ver = verify_structure_candidate(f)
        assert ver.skew_ok and ver.jacobi_ok
