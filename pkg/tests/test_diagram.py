"""Diagram engine: step application, strand tracking, exchange normal form."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from dinat.diagram import (
    Diagram,
    Step,
    apply_step,
    apply_step_effect,
    build_diagram,
    canonical_pos,
    diagrams_equal,
    ek_graph,
    exchange_normal_form,
    op_dual,
    swap_adjacent,
    target,
    vertical_compose,
    whisker,
)
from dinat.errors import (
    BoundaryMismatch,
    EKCycle,
    IllTyped,
    NoMatch,
    NonLinearMismatch,
    StepFailure,
)
from dinat.signature import load_theory, _PRESETS
from dinat.terms import Var, mk_app, retag, substitute
from conftest import DU, T, U, W, hopf_sources, random_walk

x, y, z, q, w = (Var(n, "C") for n in "xyzqw")


# -- apply_step ---------------------------------------------------------------

def test_multiplication_collapses_one_layer(monad):
    t = T(monad, T(monad, x))
    s = Step("mu", "fwd", (), 0, {"v": x})
    assert apply_step(monad, t, s) == T(monad, x)


def test_evaluation_consumes_matching_legs(hopf):
    ty = T(hopf, y)
    t = W(hopf, DU(hopf, ty), ty)
    s = Step("ev", "fwd", (), 0, {"c": ty})
    assert apply_step(hopf, t, s) == U(hopf)


def test_evaluation_rejects_disagreeing_legs(hopf):
    t = W(hopf, DU(hopf, T(hopf, y)), T(hopf, z))
    s = Step("ev", "fwd", (), 0, {"c": T(hopf, y)})
    with pytest.raises(NonLinearMismatch) as exc:
        apply_step(hopf, t, s)
    assert "would need to be" in str(exc.value)


def test_no_match_names_expected_shape(monad):
    s = Step("mu", "fwd", (), 0, {"v": x})
    with pytest.raises(NoMatch):
        apply_step(monad, T(monad, x), s)


def test_inverse_step_restores_term_exactly():
    # every invertible generator, forward then backward at the produced spot
    for preset in sorted(_PRESETS):
        th = load_theory(preset)
        for name, rec in th.transforms.items():
            if not rec.iso:
                continue
            idsub = {v: Var(v, c) for v, c in rec.var_cats.items()}
            t0 = rec.lhs
            eff = apply_step_effect(th, t0, Step(name, "fwd", (), 0, idsub))
            from dinat.diagram import anchor_region
            path, off = canonical_pos(th, eff.term, *anchor_region(th, eff.plc_p))
            t2 = apply_step(th, eff.term, Step(name, "inv", path, off, idsub))
            assert t2 == t0, f"{preset}:{name}"


# -- position bookkeeping -----------------------------------------------------

def test_path_map_around_a_shrinking_edit(duality):
    t = W(duality, z, DU(duality, q), q, w)
    eff = apply_step_effect(duality, t, Step("ev", "fwd", (), 1, {"c": q}))
    assert eff.term == W(duality, z, w)
    pm = eff.pmap
    assert pm.map_path((0,)) == (0,)
    assert pm.map_path((3,)) == (1,)
    assert pm.map_path((1,)) is None
    assert pm.map_path((2,)) is None
    assert pm.unmap_path((1,)) == (3,)
    assert pm.map_region(((), 3, 1)) == ((), 1, 1)
    assert pm.map_region(((), 1, 2)) is None
    assert pm.unmap_region(((), 1, 1)) == ((), 3, 1)


# -- build_diagram ------------------------------------------------------------

def test_identity_diagram(monad):
    d = build_diagram(monad, T(monad, x), [])
    assert d.steps == ()
    assert target(monad, d) == T(monad, x)


def test_step_failure_carries_index_and_cause(monad):
    with pytest.raises(StepFailure) as exc:
        build_diagram(monad, T(monad, x), [
            Step("iota", "fwd", (), 0, {"v": T(monad, x)}),
            Step("mu", "fwd", (0,), 0, {"v": x}),
        ])
    assert exc.value.index == 1
    assert isinstance(exc.value.cause, NoMatch)


def test_autofill_invents_produce_values(duality):
    d = build_diagram(duality, x, [Step("coev", "fwd", (), 0)])
    (s,) = d.steps
    assert dict(s.subst)["c"].name == "c'1"


def test_closing_a_strand_on_itself_is_rejected(duality):
    # an auxiliary cap wired ᵛc-after-c: composing it onto coev closes a loop
    th = load_theory("left-duality")
    c = Var("c", "C")
    th.declare_transformation("rev", W(th, c, DU(th, c)), U(th))
    with pytest.raises(EKCycle) as exc:
        build_diagram(th, U(th), [
            Step("coev", "fwd", (), 0, {"c": x}),
            Step("rev", "fwd", (), 0, {"c": x}),
        ])
    assert "closed loop" in str(exc.value)


# -- composition and whiskering ------------------------------------------------

def test_vertical_compose_concatenates(duality):
    d1 = build_diagram(duality, x, [Step("coev", "fwd", (), 0, {"c": x})])
    d2 = build_diagram(duality, target(duality, d1),
                       [Step("ev", "fwd", (), 1, {"c": x})])
    snake = vertical_compose(duality, d1, d2)
    assert len(snake.steps) == 2
    assert target(duality, snake) == x


def test_vertical_compose_identity(duality):
    d = build_diagram(duality, x, [Step("coev", "fwd", (), 0, {"c": x})])
    ident = build_diagram(duality, target(duality, d), [])
    assert vertical_compose(duality, d, ident).steps == d.steps
    assert vertical_compose(
        duality, build_diagram(duality, x, []), d).steps == d.steps


def test_vertical_compose_checks_boundary(duality):
    d1 = build_diagram(duality, x, [])
    d2 = build_diagram(duality, DU(duality, x), [])
    with pytest.raises(BoundaryMismatch):
        vertical_compose(duality, d1, d2)


def test_vertical_compose_associative(hopf):
    a = build_diagram(hopf, T(hopf, T(hopf, T(hopf, x))),
                      [Step("mu", "fwd", (), 0, {"v": T(hopf, x)})])
    b = build_diagram(hopf, target(hopf, a),
                      [Step("mu", "fwd", (), 0, {"v": x})])
    c = build_diagram(hopf, target(hopf, b),
                      [Step("iota", "fwd", (), 0, {"v": T(hopf, x)})])
    left = vertical_compose(hopf, vertical_compose(hopf, a, b), c)
    right = vertical_compose(hopf, a, vertical_compose(hopf, b, c))
    assert diagrams_equal(hopf, left, right)


def test_whisker_prefixes_positions(bimonad):
    d = build_diagram(bimonad, T(bimonad, T(bimonad, x)),
                      [Step("mu", "fwd", (), 0, {"v": x})])
    ctx = W(bimonad, Var("hole", "C"), y)
    out = whisker(bimonad, d, ctx, "hole")
    assert out.source == W(bimonad, T(bimonad, T(bimonad, x)), y)
    assert out.steps == (Step("mu", "fwd", (0,), 0, {"v": x}),)
    assert target(bimonad, out) == W(bimonad, T(bimonad, x), y)


def test_whisker_trivial_hole(bimonad):
    d = build_diagram(bimonad, T(bimonad, T(bimonad, x)),
                      [Step("mu", "fwd", (), 0, {"v": x})])
    out = whisker(bimonad, d, Var("hole", "C"), "hole")
    assert out.source == d.source and out.steps == d.steps


def test_whisker_contravariant_reverses(hopf):
    d = build_diagram(hopf, T(hopf, T(hopf, x)), [
        Step("mu", "fwd", (), 0, {"v": x}),
        Step("iota", "fwd", (), 0, {"v": T(hopf, x)}),
    ])
    out = whisker(hopf, d, DU(hopf, Var("hole", "C")), "hole")
    assert out.source == DU(hopf, target(hopf, d))
    assert [s.gen for s in out.steps] == ["iota", "mu"]
    assert target(hopf, out) == DU(hopf, T(hopf, T(hopf, x)))
    ek_graph(hopf, out)  # still acyclic


def test_whisker_requires_unique_hole(bimonad):
    d = build_diagram(bimonad, T(bimonad, x), [])
    with pytest.raises(IllTyped):
        whisker(bimonad, d, W(bimonad, Var("h", "C"), Var("h", "C")), "h")


# -- op duality -----------------------------------------------------------------

def test_op_dual_of_identity(monad):
    d = build_diagram(monad, T(monad, x), [])
    dd = op_dual(monad, d)
    assert dd.ambient_op is True
    assert dd.source == retag(T(monad, x))
    assert dd.steps == ()


def test_op_dual_of_multiplication(monad):
    d = build_diagram(monad, T(monad, T(monad, x)),
                      [Step("mu", "fwd", (), 0, {"v": x})])
    dd = op_dual(monad, d)
    assert dd.source == retag(T(monad, x))
    assert dd.steps == (Step("mu", "fwd", (), 0, {"v": x}),)
    assert target(monad, dd) == retag(T(monad, T(monad, x)))


@pytest.mark.parametrize("preset", sorted(_PRESETS))
def test_op_dual_involution_on_axioms(preset):
    th = load_theory(preset)
    for eq in th.equations.values():
        for d in (eq.left, eq.right):
            assert op_dual(th, op_dual(th, d)) == d


# -- strand graphs ---------------------------------------------------------------

def test_ek_graph_identity(monad):
    g = ek_graph(monad, build_diagram(monad, T(monad, x), []))
    assert g["vertices"] == [("src", (0,)), ("tgt", (0,))]
    assert g["edges"] == [(("src", (0,)), ("tgt", (0,)))]


def test_ek_graph_evaluation_arc(hopf):
    ty = T(hopf, y)
    d = build_diagram(hopf, W(hopf, DU(hopf, ty), ty),
                      [Step("ev", "fwd", (), 0, {"c": ty})])
    g = ek_graph(hopf, d)
    ins = [v for v in g["vertices"] if v[0] == "in"]
    assert len(ins) == 2
    assert (ins[0], ins[1]) in g["edges"] or (ins[1], ins[0]) in g["edges"]


def test_ek_graph_snake_is_one_path(duality):
    d = build_diagram(duality, x, [
        Step("coev", "fwd", (), 0, {"c": x}),
        Step("ev", "fwd", (), 1, {"c": x}),
    ])
    g = ek_graph(duality, d)
    assert len(g["vertices"]) == 6
    assert len(g["edges"]) == 5
    deg = {v: 0 for v in g["vertices"]}
    for a, b in g["edges"]:
        deg[a] += 1
        deg[b] += 1
    assert max(deg.values()) <= 2
    ends = sorted(v for v, k in deg.items() if k == 1)
    assert ends == [("src", ()), ("tgt", ())]


# -- exchange normal form ----------------------------------------------------------

def test_normal_form_orders_disjoint_steps(bimonad):
    src = W(bimonad, T(bimonad, x), T(bimonad, y))
    d = build_diagram(bimonad, src, [
        Step("iota", "fwd", (1,), 0, {"v": T(bimonad, y)}),
        Step("iota", "fwd", (0,), 0, {"v": T(bimonad, x)}),
    ])
    nf = exchange_normal_form(bimonad, d)
    assert [s.path for s in nf.steps] == [(0,), (1,)]
    assert exchange_normal_form(bimonad, nf) == nf


def test_single_step_normal_form_unchanged(monad):
    d = build_diagram(monad, T(monad, T(monad, x)),
                      [Step("mu", "fwd", (), 0, {"v": x})])
    assert exchange_normal_form(monad, d) == d


def test_equal_up_to_disjoint_swap(bimonad):
    src = W(bimonad, T(bimonad, x), T(bimonad, y))
    s1 = Step("iota", "fwd", (0,), 0, {"v": T(bimonad, x)})
    s2 = Step("iota", "fwd", (1,), 0, {"v": T(bimonad, y)})
    d1 = build_diagram(bimonad, src, [s1, s2])
    d2 = build_diagram(bimonad, src, [s2, s1])
    assert diagrams_equal(bimonad, d1, d2)


def test_unequal_generators(monad):
    t = T(monad, x)
    d1 = build_diagram(monad, t, [Step("iota", "fwd", (), 0, {"v": t})])
    d2 = build_diagram(monad, t, [Step("iota", "fwd", (0,), 0, {"v": x})])
    assert not diagrams_equal(monad, d1, d2)


def test_axiom_sides_differ_structurally(monad):
    eq = monad.equations["Monad1"]
    assert not diagrams_equal(monad, eq.left, eq.right)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_normal_form_invariant_under_transposition(seed):
    """Swapping any adjacent exchangeable pair never changes the normal
    form, and renormalizing is idempotent."""
    th = load_theory("hopf-monad")
    rng = random.Random(seed)
    src = rng.choice(hopf_sources(th))
    d = random_walk(th, src, rng, max_steps=5)
    nf = exchange_normal_form(th, d)
    assert exchange_normal_form(th, nf) == nf
    term = d.source
    for i in range(len(d.steps) - 1):
        res = swap_adjacent(th, term, d.steps[i], d.steps[i + 1], d.ambient_op)
        if res is not None:
            steps = list(d.steps)
            steps[i], steps[i + 1] = res
            d2 = Diagram(d.source, tuple(steps), d.ambient_op)
            assert target(th, d2) == target(th, d)
            assert exchange_normal_form(th, d2).steps == nf.steps
        term = apply_step(th, term, d.steps[i], d.ambient_op)


def test_target_is_the_fold(hopf):
    rng = random.Random(5)
    for _ in range(20):
        d = random_walk(hopf, rng.choice(hopf_sources(hopf)), rng)
        t = d.source
        for s in d.steps:
            t = apply_step(hopf, t, s, d.ambient_op)
        assert t == target(hopf, d)
