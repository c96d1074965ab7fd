from fractions import Fraction

import pytest
import sympy as sp

from lieconf.cmod import (
    DEFAULT_GRID,
    ModuleAnsatz,
    _full_window,
    f0_residual,
    is_rank1_module,
    loop_family_action,
    param_grid,
    rank1_residual,
    solve_rank1_f0,
    solve_rank1_family,
    virasoro_module_residual,
    window_pairs,
)
from lieconf.errors import RegimeMismatch, WindowViolation
from lieconf.exactpoly import ZERO, var
from lieconf.lca import cw

import oracles

D, la = var("D"), var("la")


def test_grid():
    assert len(DEFAULT_GRID) == 7
    assert param_grid([1], [1, 2, 4]) == (Fraction(1, 4), Fraction(1, 2), Fraction(1))


def test_residual_examples():
    A = cw(0, 1)
    f = loop_family_action(A, 1, 0, 2, 3)
    assert rank1_residual(A, f, 1, 2).is_zero()
    assert rank1_residual(cw(2, 3), {g: ZERO for g in range(-1, 2)}, 1, -1).is_zero()
    with pytest.raises(WindowViolation):
        rank1_residual(A, {0: D}, 0, 1)
    with pytest.raises(RegimeMismatch):
        rank1_residual(cw(), {0: D}, 0, 0)


def test_f0_candidates():
    assert f0_residual(cw(1, 1), D + la).is_zero()
    assert not f0_residual(cw(1, 1), D + la ** 2).is_zero()


@pytest.mark.parametrize("av,cv,lead", [(1, 2, "2*D"), (1, -1, "-D"), (2, 3, "3*D")])
def test_f0_stage(av, cv, lead):
    res = solve_rank1_f0(cw(av, cv))
    assert res.strings() == [f"{lead} + d*la + e", "0"]
    assert res.verified and res.irrational_cuts == 0


def test_f0_stage_matches_sympy_solve():
    u = sp.symbols("u0:4")
    f = lambda g, d, l: u[0] + u[1] * d + u[2] * l + u[3] * d * l
    P = lambda x, y, d, l: oracles.cw_bracket(x, y, d, l, 1, 2)
    eqs = sp.Poly(oracles.module_residual(P, f, 0, 0), oracles.D, oracles.la, oracles.mu).coeffs()
    sols = sp.solve(eqs, u, dict=True)
    assert {u[1]: 2, u[3]: 0} in sols
    assert solve_rank1_f0(cw(1, 2), 1, 1).strings() == ["2*D + d*la + e", "0"]


def test_f0_stage_rejects_c_zero():
    with pytest.raises(RegimeMismatch):
        solve_rank1_f0(cw(1, 0))


@pytest.mark.parametrize("av,cv", [(1, 2), (1, -1), (2, 3), (1, 0)])
def test_only_trivial_module_when_a_nonzero(av, cv):
    r = solve_rank1_family(cw(av, cv), window=2, deg_d=2, deg_la=2)
    assert r.trivial_only and r.complete


def test_staged_agrees_with_full_window():
    for av, cv in [(1, 2), (1, -1), (2, 3)]:
        staged = solve_rank1_family(cw(av, cv), window=1, deg_d=1, deg_la=1)
        full = _full_window(cw(av, cv), "check", 1, 1, 1)
        assert [f.formula for f in staged.families] == [f.formula for f in full.families] == ["0"]
        assert full.complete


def test_loop_family():
    r = solve_rank1_family(cw(0, 1), window=2, grid=param_grid(range(-1, 2), [1]))
    loop = r.families[0]
    assert loop.name == "loop" and loop.residual == "0"
    assert loop.points_checked == 3 * 3 * 2
    assert r.stage1.strings()[0] == "D + d*la + e"


def test_loop_family_symbolic_in_sympy():
    ap, bp, cp = sp.symbols("ap bp cp")
    x, y = oracles.al, oracles.be
    for cv in (1, 3):
        P = lambda p, q, d, l, cv=cv: oracles.cw_bracket(p, q, d, l, 0, cv)
        f = lambda g, d, l, cv=cv: cv * cp ** g * (d + ap * l + bp)
        assert sp.simplify(oracles.module_residual(P, f, x, y)) == 0
    # without the factor c the family fails for c != 1
    P = lambda p, q, d, l: oracles.cw_bracket(p, q, d, l, 0, 3)
    f = lambda g, d, l: cp ** g * (d + ap * l + bp)
    assert sp.simplify(oracles.module_residual(P, f, x, y)) != 0


def test_zero_action_propagates():
    A = cw(1, 2)
    f = {g: ZERO for g in range(-2, 3)}
    assert is_rank1_module(A, f)
    f[0] = 2 * D + la
    assert not is_rank1_module(A, f)


def test_module_ansatz_scalars():
    with pytest.raises(ValueError):
        ModuleAnsatz(1, 1, 1, {-1: 1, 0: 1, 1: 3})
    ans = ModuleAnsatz(1, 0, 1, {-1: Fraction(1, 2), 0: 1, 1: 2})
    act = ans.action([Fraction(1)] * ans.size)
    assert act[1] == 2 * (1 + la)
    with pytest.raises(WindowViolation):
        ModuleAnsatz(2, 0, 0, {0: 1, 1: 2})


def test_virasoro_module():
    for ap, bp in [(1, 0), (0, 5), ("1/2", "-3")]:
        assert virasoro_module_residual(ap, bp).is_zero()
    assert not virasoro_module_residual(1, 0, D + la ** 2).is_zero()
    ap, bp = sp.symbols("ap bp")
    P = lambda p, q, d, l: d + 2 * l
    assert oracles.module_residual(P, lambda g, d, l: d + ap * l + bp, 0, 0) == 0


def test_errors():
    with pytest.raises(RegimeMismatch):
        solve_rank1_family(cw(0, 0))
    with pytest.raises(RegimeMismatch):
        solve_rank1_family(cw())
    with pytest.raises(WindowViolation):
        solve_rank1_family(cw(1, 2), window=7)
    with pytest.raises(ValueError):
        loop_family_action(cw(0, 1), 1, 0, 0, 2)
    assert len(window_pairs(1)) == 7
