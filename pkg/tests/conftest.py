"""Shared builders for the test suite."""

import random

import pytest

from dinat.diagram import Step, apply_step, build_diagram, target
from dinat.errors import DinatError
from dinat.rewrite import applicable_steps
from dinat.signature import load_theory
from dinat.terms import Var, mk_app, retag


@pytest.fixture(scope="session")
def monad():
    return load_theory("monad")


@pytest.fixture(scope="session")
def bimonad():
    return load_theory("bimonad")


@pytest.fixture(scope="session")
def duality():
    return load_theory("left-duality")


@pytest.fixture(scope="session")
def hopf():
    return load_theory("hopf-monad")


def T(sig, a):
    return mk_app(sig, "T", (a,))


def DU(sig, a):
    # arguments are stored at ambient parity, so the body flips
    return mk_app(sig, "dual", (retag(a),))


def W(sig, *a):
    return mk_app(sig, "tensor", a)


def U(sig):
    return mk_app(sig, "unit", ())


def random_walk(sig, source, rng, max_steps=6):
    """Grow a diagram by repeatedly firing a random applicable step."""
    steps = []
    term = source
    for _ in range(rng.randrange(1, max_steps + 1)):
        cands = applicable_steps(sig, term)
        if not cands:
            break
        s = rng.choice(cands)
        try:
            d = build_diagram(sig, source, steps + [s])
        except DinatError:
            continue
        steps = list(d.steps)
        term = target(sig, d)
    return build_diagram(sig, source, steps)


def hopf_sources(sig):
    x, y = Var("x", "C"), Var("y", "C")
    return [
        T(sig, x),
        W(sig, DU(sig, x), x),
        U(sig),
        T(sig, W(sig, DU(sig, T(sig, x)), x)),
        W(sig, x, y),
        DU(sig, T(sig, x)),
    ]
