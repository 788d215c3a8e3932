"""Term layer: canonical words, parity marks, matching."""

import pytest
from hypothesis import given, strategies as st

from dinat.errors import ArityMismatch, CategoryMismatch, IllTyped
from dinat.signature import Signature, load_theory
from dinat.terms import (
    App,
    Var,
    cat_of,
    match,
    match_conflicts,
    mk_app,
    occurrences,
    parity_at,
    render_term,
    retag,
    retag_if,
    subterm,
    substitute,
    typecheck,
    word_view,
)
from conftest import DU, T, U, W


@pytest.fixture(scope="module")
def sig():
    return load_theory("hopf-monad")


# -- canonical constructors -------------------------------------------------

def test_word_flattening(sig):
    a, b, c = Var("a", "C"), Var("b", "C"), Var("c", "C")
    w = W(sig, W(sig, a, b), c)
    assert w == App("tensor", False, (a, b, c))
    assert word_view(sig, w) == (a, b, c)


def test_unit_factors_dropped(sig):
    a = Var("a", "C")
    assert W(sig, U(sig), a, U(sig)) == a
    assert W(sig, U(sig), U(sig)) == U(sig)


def test_single_factor_collapses(sig):
    a = Var("a", "C")
    assert W(sig, a) == a


def test_word_view_of_non_word(sig):
    a = Var("a", "C")
    assert word_view(sig, T(sig, a)) == (T(sig, a),)
    assert word_view(sig, U(sig)) == ()


def test_mk_app_arity(sig):
    with pytest.raises(ArityMismatch):
        mk_app(sig, "T", ())


def test_parity_clash_on_splice(sig):
    a, b = Var("a", "C"), Var("b", "C")
    inner = App("tensor", True, (a, b))
    with pytest.raises(IllTyped):
        mk_app(sig, "tensor", (inner, a))


# -- typing -----------------------------------------------------------------

def test_typecheck_reports_category(sig):
    c = Var("c", "C")
    t = W(sig, DU(sig, c), c)
    assert typecheck(sig, t) == "C"
    occ = [(name, neg) for name, _, neg in occurrences(sig, t)]
    assert occ == [("c", True), ("c", False)]


def test_typecheck_category_mismatch():
    th = Signature()
    th.declare_category("C")
    th.declare_category("D")
    th.declare_functor("T", ["C"], "C")
    with pytest.raises(CategoryMismatch):
        typecheck(th, App("T", False, (Var("x", "D"),)))


def test_unit_has_no_variables(sig):
    assert typecheck(sig, U(sig)) == "C"
    assert list(occurrences(sig, U(sig))) == []


def test_typecheck_rejects_wrong_parity_mark(sig):
    x = Var("x", "C")
    bad = App("dual", False, (App("T", False, (x,)),))  # inner T should be ~
    with pytest.raises(IllTyped):
        typecheck(sig, bad)


def test_parity_at_flips_under_dual(sig):
    x = Var("x", "C")
    t = DU(sig, T(sig, x))
    assert parity_at(sig, t, ()) is False
    assert parity_at(sig, t, (0,)) is True
    assert parity_at(sig, t, (0, 0)) is True


# -- substitution and matching ----------------------------------------------

def test_substitute_retags_at_negative_occurrence(sig):
    c = Var("c", "C")
    pat = W(sig, DU(sig, c), c)
    val = T(sig, Var("y", "C"))
    out = substitute(sig, pat, {"c": val})
    assert subterm(out, (0, 0)) == retag(val)
    assert subterm(out, (1,)) == val


def test_match_whole_node(sig):
    x = Var("x", "C")
    pat = T(sig, T(sig, Var("v", "C")))
    assert list(match(sig, pat, T(sig, T(sig, x)))) == [{"v": x}]
    assert list(match(sig, pat, T(sig, x))) == []


def test_match_word_splits(sig):
    a, b = Var("a", "C"), Var("b", "C")
    x, y, z = Var("x", "C"), Var("y", "C"), Var("z", "C")
    pat = W(sig, a, b)
    subject = W(sig, x, y, z)
    splits = list(match(sig, pat, subject))
    assert splits == [
        {"a": U(sig), "b": W(sig, x, y, z)},
        {"a": x, "b": W(sig, y, z)},
        {"a": W(sig, x, y), "b": z},
        {"a": W(sig, x, y, z), "b": U(sig)},
    ]


def test_match_nonlinear_agreement(sig):
    c = Var("c", "C")
    pat = W(sig, DU(sig, c), c)
    y = Var("y", "C")
    good = W(sig, DU(sig, T(sig, y)), T(sig, y))
    assert list(match(sig, pat, good)) == [{"c": T(sig, y)}]
    bad = W(sig, DU(sig, T(sig, y)), T(sig, Var("z", "C")))
    assert list(match(sig, pat, bad)) == []
    # the loose matcher still reports both candidate values
    loose = match_conflicts(sig, pat, bad)
    assert any(len(set(bs.get("c", ()))) == 2 for bs in loose)


@given(st.integers(0, 6), st.integers(0, 6))
def test_match_substitute_roundtrip(i, j):
    sig = load_theory("hopf-monad")
    names = ["x", "y", "z", "w", "p", "q", "r"]
    seg1 = [Var(n, "C") for n in names[: i % 4]]
    seg2 = [Var(n, "C") for n in names[3 : 3 + j % 4]]
    a, b = Var("a", "C"), Var("b", "C")
    pat = W(sig, a, b)
    subst = {
        "a": mk_app(sig, "tensor", seg1),
        "b": mk_app(sig, "tensor", seg2),
    }
    subject = substitute(sig, pat, subst)
    assert subst in list(match(sig, pat, subject))


def test_render_marks_negative_nodes(sig):
    x = Var("x", "C")
    assert render_term(DU(sig, T(sig, x))) == "(dual ~(T x))"
    assert cat_of(sig, DU(sig, x)) == "C"
