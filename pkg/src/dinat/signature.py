"""Signatures: categories, functor generators, transformation generators.

A transformation generator has a left and a right side, both functor terms
over pattern variables.  Each variable is classified by its occurrence shape:

* natural - once on each side, at the same parity;
* consume - twice on the left at opposite parities (a cap: the two strands
  meet and vanish);
* produce - twice on the right at opposite parities (a cup).

Invertible generators are restricted to all-natural shapes; ``name^-1``
resolves to the generator with the direction flipped, and two composite-is-
identity equations are installed automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    BadVariableShape,
    BoundaryMismatch,
    CategoryMismatch,
    DinatError,
    DuplicateName,
    IllTyped,
    UnknownCategory,
    UnknownGenerator,
    UnknownPreset,
    VarianceMismatch,
)
from .terms import App, Term, Var, cat_of, mk_app, occurrences, subterm, typecheck


@dataclass(frozen=True)
class FunctorGen:
    name: str
    dom: tuple  # ((category, contravariant), ...)
    cod: str
    tensor_unit: str | None = None  # on a tensor generator: its unit's name


@dataclass
class TransGen:
    name: str
    lhs: Term
    rhs: Term
    iso: bool
    cod: str
    kinds: dict  # var -> natural | consume | produce
    var_cats: dict  # var -> category


@dataclass(frozen=True)
class Equation:
    name: str
    left: "Diagram"
    right: "Diagram"


class Signature:
    def __init__(self):
        self.categories: dict[str, None] = {}
        self.functors: dict[str, FunctorGen] = {}
        self.transforms: dict[str, TransGen] = {}
        self.monoidal: dict[str, tuple] = {}  # category -> (tensor, unit)
        self.equations: dict[str, Equation] = {}

    # -- lookups ----------------------------------------------------------
    def functor(self, name: str) -> FunctorGen:
        try:
            return self.functors[name]
        except KeyError:
            raise UnknownGenerator(f"no functor generator {name}") from None

    def transform(self, name: str) -> TransGen:
        try:
            return self.transforms[name]
        except KeyError:
            raise UnknownGenerator(f"no transformation generator {name}") from None

    def resolve_transform(self, name: str):
        """Resolve a step's generator name; ``g^-1`` flips the direction."""
        if name in self.transforms:
            return self.transforms[name], False
        if name.endswith("^-1") and name[:-3] in self.transforms:
            return self.transforms[name[:-3]], True
        raise UnknownGenerator(f"no transformation generator {name}")

    def tensor_of(self, cat: str):
        return self.monoidal.get(cat)

    # -- declarations ------------------------------------------------------
    def _claim(self, name: str):
        if name in self.categories or name in self.functors or name in self.transforms:
            raise DuplicateName(f"{name} is already declared")
        if name.endswith("^-1"):
            raise IllTyped(f"{name}: the ^-1 suffix is reserved for inverses")

    def declare_category(self, name: str):
        self._claim(name)
        self.categories[name] = None

    def declare_functor(self, name: str, dom, cod: str, tensor_unit=None):
        self._claim(name)
        slots = []
        for d in dom:
            cat, contra = (d, False) if isinstance(d, str) else d
            if cat not in self.categories:
                raise UnknownCategory(f"{name}: unknown category {cat}")
            slots.append((cat, bool(contra)))
        if cod not in self.categories:
            raise UnknownCategory(f"{name}: unknown category {cod}")
        self.functors[name] = FunctorGen(name, tuple(slots), cod, tensor_unit)

    def declare_monoidal(self, cat: str, tensor: str, unit: str):
        """Install a strictly associative, strictly unital tensor on a
        category.  Words over it are kept flat and unit-free."""
        if cat not in self.categories:
            raise UnknownCategory(f"unknown category {cat}")
        if cat in self.monoidal:
            raise DuplicateName(f"{cat} already has a tensor")
        self.declare_functor(unit, [], cat)
        self.declare_functor(tensor, [cat, cat], cat, tensor_unit=unit)
        self.monoidal[cat] = (tensor, unit)

    def declare_transformation(self, name: str, lhs: Term, rhs: Term,
                               iso: bool = False) -> TransGen:
        self._claim(name)
        cod_l = typecheck(self, lhs)
        cod_r = typecheck(self, rhs)
        if cod_l != cod_r:
            raise CategoryMismatch(
                f"{name}: sides land in {cod_l} and {cod_r}")
        var_cats, kinds = _classify(self, name, lhs, rhs)
        if iso and any(k != "natural" for k in kinds.values()):
            raise BadVariableShape(
                f"{name}: invertible generators must be plain natural")
        rec = TransGen(name, lhs, rhs, iso, cod_l, kinds, var_cats)
        self.transforms[name] = rec
        if iso:
            self._install_iso_equations(rec)
        return rec

    def declare_equation(self, name: str, left, right):
        from .diagram import target
        if name in self.equations:
            raise DuplicateName(f"equation {name} is already declared")
        if left.ambient_op != right.ambient_op or left.source != right.source:
            raise BoundaryMismatch(f"{name}: sides start differently")
        if target(self, left) != target(self, right):
            raise BoundaryMismatch(f"{name}: sides end differently")
        self.equations[name] = Equation(name, left, right)

    def _install_iso_equations(self, rec: TransGen):
        from .diagram import (Step, anchor_region, apply_step_effect,
                              build_diagram, canonical_pos)
        idsub = {v: Var(v, c) for v, c in rec.var_cats.items()}
        for side, tag in ((rec.lhs, "l"), (rec.rhs, "r")):
            d0 = "fwd" if tag == "l" else "inv"
            d1 = "inv" if tag == "l" else "fwd"
            s0 = Step(rec.name, d0, (), 0, idsub)
            eff = apply_step_effect(self, side, s0)
            path, off = canonical_pos(self, eff.term,
                                      *anchor_region(self, eff.plc_p))
            s1 = Step(rec.name, d1, path, off, idsub)
            self.declare_equation(
                f"{rec.name}-inv-{tag}",
                build_diagram(self, side, [s0, s1]),
                build_diagram(self, side, []))


class Theory(Signature):
    def __init__(self, name: str):
        super().__init__()
        self.name = name


def _classify(sig, name, lhs, rhs):
    var_cats: dict = {}
    for side in (lhs, rhs):
        for vname, p, _ in occurrences(sig, side):
            cat = subterm(side, p).cat
            if var_cats.setdefault(vname, cat) != cat:
                raise IllTyped(f"{name}: variable {vname} used at two categories")
    occs_l = list(occurrences(sig, lhs))
    occs_r = list(occurrences(sig, rhs))
    kinds = {}
    for v in var_cats:
        nl = [neg for n, _, neg in occs_l if n == v]
        nr = [neg for n, _, neg in occs_r if n == v]
        if len(nl) == 1 and len(nr) == 1:
            if nl[0] != nr[0]:
                raise VarianceMismatch(
                    f"{name}: {v} changes parity across the sides")
            kinds[v] = "natural"
        elif len(nl) == 2 and not nr:
            if nl[0] == nl[1]:
                raise VarianceMismatch(
                    f"{name}: {v} must pair opposite parities to cap")
            kinds[v] = "consume"
        elif len(nr) == 2 and not nl:
            if nr[0] == nr[1]:
                raise VarianceMismatch(
                    f"{name}: {v} must pair opposite parities to cup")
            kinds[v] = "produce"
        else:
            raise BadVariableShape(
                f"{name}: {v} occurs {len(nl)}x left, {len(nr)}x right")
    return var_cats, kinds


def validate_signature(sig) -> list:
    """Structural audit; returns a list of findings (empty when sound)."""
    from .diagram import target
    problems = []
    for name, fg in sig.functors.items():
        for cat, _ in fg.dom:
            if cat not in sig.categories:
                problems.append(f"functor {name}: unknown category {cat}")
        if fg.cod not in sig.categories:
            problems.append(f"functor {name}: unknown category {fg.cod}")
        if fg.tensor_unit is not None:
            unit = sig.functors.get(fg.tensor_unit)
            if unit is None or unit.dom or unit.cod != fg.cod:
                problems.append(f"functor {name}: bad unit link")
            if sig.monoidal.get(fg.cod) != (name, fg.tensor_unit):
                problems.append(f"functor {name}: not the tensor of {fg.cod}")
    for cat, pair in sig.monoidal.items():
        ten, un = pair
        if ten not in sig.functors or un not in sig.functors:
            problems.append(f"category {cat}: dangling tensor pair")
    for name, tg in sig.transforms.items():
        try:
            if typecheck(sig, tg.lhs) != typecheck(sig, tg.rhs):
                problems.append(f"transform {name}: side categories differ")
            var_cats, kinds = _classify(sig, name, tg.lhs, tg.rhs)
            if kinds != tg.kinds or var_cats != tg.var_cats:
                problems.append(f"transform {name}: stale variable shapes")
            if tg.iso and any(k != "natural" for k in kinds.values()):
                problems.append(f"transform {name}: invertible but not natural")
        except DinatError as exc:
            problems.append(f"transform {name}: {exc}")
    for name, eq in sig.equations.items():
        try:
            if eq.left.source != eq.right.source:
                problems.append(f"equation {name}: sources differ")
            elif target(sig, eq.left) != target(sig, eq.right):
                problems.append(f"equation {name}: targets differ")
        except DinatError as exc:
            problems.append(f"equation {name}: {exc}")
    return problems


# ---------------------------------------------------------------------------
# presets

def _A(th, gen, *args, op=False):
    return mk_app(th, gen, list(args), op)


def _preset_adjunction() -> Theory:
    from .diagram import Step, build_diagram
    th = Theory("adjunction")
    th.declare_category("C")
    th.declare_category("D")
    th.declare_functor("F", ["C"], "D")
    th.declare_functor("U", ["D"], "C")
    x, y = Var("x", "C"), Var("y", "D")
    th.declare_transformation("eta", x, _A(th, "U", _A(th, "F", x)))
    th.declare_transformation("eps", _A(th, "F", _A(th, "U", y)), y)
    fx = _A(th, "F", x)
    th.declare_equation(
        "Adj1",
        build_diagram(th, fx, [
            Step("eta", path=(0,), subst={"x": x}),
            Step("eps", subst={"y": fx}),
        ]),
        build_diagram(th, fx, []))
    uy = _A(th, "U", y)
    th.declare_equation(
        "Adj2",
        build_diagram(th, uy, [
            Step("eta", subst={"x": uy}),
            Step("eps", path=(0,), subst={"y": y}),
        ]),
        build_diagram(th, uy, []))
    return th


def _install_monad(th: Theory, cat: str = "C"):
    from .diagram import Step, build_diagram
    th.declare_functor("T", [cat], cat)
    v = Var("v", cat)
    th.declare_transformation("mu", _A(th, "T", _A(th, "T", v)), _A(th, "T", v))
    th.declare_transformation("iota", v, _A(th, "T", v))
    x = Var("x", cat)
    t1 = _A(th, "T", x)
    t3 = _A(th, "T", _A(th, "T", t1))
    th.declare_equation(
        "Monad1",
        build_diagram(th, t3, [
            Step("mu", subst={"v": t1}),
            Step("mu", subst={"v": x}),
        ]),
        build_diagram(th, t3, [
            Step("mu", path=(0,), subst={"v": x}),
            Step("mu", subst={"v": x}),
        ]))
    th.declare_equation(
        "Monad2",
        build_diagram(th, t1, [
            Step("iota", subst={"v": t1}),
            Step("mu", subst={"v": x}),
        ]),
        build_diagram(th, t1, []))
    th.declare_equation(
        "Monad2b",
        build_diagram(th, t1, [
            Step("iota", path=(0,), subst={"v": x}),
            Step("mu", subst={"v": x}),
        ]),
        build_diagram(th, t1, []))


def _preset_monad() -> Theory:
    th = Theory("monad")
    th.declare_category("C")
    _install_monad(th)
    return th


def _install_monoidal_cat(th: Theory, cat: str, tensor: str, unit: str,
                          nu_l=None, nu_r=None):
    th.declare_monoidal(cat, tensor, unit)
    # Units and associativity are strict at the term level, so the named
    # unitors exist but have nothing left to move.
    a = Var("a", cat)
    if nu_l:
        th.declare_transformation(nu_l, a, a, iso=True)
    if nu_r:
        th.declare_transformation(nu_r, a, a, iso=True)


def _preset_monoidal_category() -> Theory:
    th = Theory("monoidal-category")
    th.declare_category("C")
    _install_monoidal_cat(th, "C", "tensor", "unit", "nu_l", "nu_r")
    return th


def _install_monoidal_functor_laws(th, M, m2, m0, tenC, tenD, unitD, catD,
                                   names=("Mondl1", "Mondl2", "Mondl3")):
    """Coherence of a lax structure (m2, m0) on a functor M into a monoidal
    category: both bracketings agree, units cancel."""
    from .diagram import Step, build_diagram
    a, b, c = Var("a", catD), Var("b", catD), Var("c", catD)
    Ma, Mb, Mc = _A(th, M, a), _A(th, M, b), _A(th, M, c)
    src = _A(th, tenC, Ma, Mb, Mc)
    th.declare_equation(
        names[0],
        build_diagram(th, src, [
            Step(m2, subst={"a": a, "b": b}),
            Step(m2, subst={"a": _A(th, tenD, a, b), "b": c}),
        ]),
        build_diagram(th, src, [
            Step(m2, offset=1, subst={"a": b, "b": c}),
            Step(m2, subst={"a": a, "b": _A(th, tenD, b, c)}),
        ]))
    th.declare_equation(
        names[1],
        build_diagram(th, Ma, [
            Step(m0, offset=0),
            Step(m2, subst={"a": _A(th, unitD), "b": a}),
        ]),
        build_diagram(th, Ma, []))
    th.declare_equation(
        names[2],
        build_diagram(th, Ma, [
            Step(m0, offset=1),
            Step(m2, subst={"a": a, "b": _A(th, unitD)}),
        ]),
        build_diagram(th, Ma, []))


def _preset_monoidal_functor() -> Theory:
    th = Theory("monoidal-functor")
    th.declare_category("C")
    th.declare_category("D")
    _install_monoidal_cat(th, "C", "tensorC", "unitC")
    _install_monoidal_cat(th, "D", "tensorD", "unitD")
    th.declare_functor("M", ["D"], "C")
    a, b = Var("a", "D"), Var("b", "D")
    th.declare_transformation(
        "m2",
        _A(th, "tensorC", _A(th, "M", a), _A(th, "M", b)),
        _A(th, "M", _A(th, "tensorD", a, b)))
    th.declare_transformation("m0", _A(th, "unitC"), _A(th, "M", _A(th, "unitD")))
    _install_monoidal_functor_laws(th, "M", "m2", "m0",
                                   "tensorC", "tensorD", "unitD", "D")
    return th


def _install_opmonoidal_laws(th, Q, q2, q0, tenC, unitC, tenD, catC,
                             names=("Opmondl1", "Opmondl2", "Opmondl3")):
    """Coherence of an oplax structure (q2, q0): both unbracketings agree,
    units cancel."""
    from .diagram import Step, build_diagram
    a, b, c = Var("a", catC), Var("b", catC), Var("c", catC)
    src = _A(th, Q, _A(th, tenC, a, b, c))
    th.declare_equation(
        names[0],
        build_diagram(th, src, [
            Step(q2, subst={"a": _A(th, tenC, a, b), "b": c}),
            Step(q2, path=(0,), subst={"a": a, "b": b}),
        ]),
        build_diagram(th, src, [
            Step(q2, subst={"a": a, "b": _A(th, tenC, b, c)}),
            Step(q2, path=(1,), subst={"a": b, "b": c}),
        ]))
    qa = _A(th, Q, a)
    th.declare_equation(
        names[1],
        build_diagram(th, qa, [
            Step(q2, subst={"a": a, "b": _A(th, unitC)}),
            Step(q0, path=(1,)),
        ]),
        build_diagram(th, qa, []))
    th.declare_equation(
        names[2],
        build_diagram(th, qa, [
            Step(q2, subst={"a": _A(th, unitC), "b": a}),
            Step(q0, path=(0,)),
        ]),
        build_diagram(th, qa, []))


def _preset_opmonoidal_functor() -> Theory:
    th = Theory("opmonoidal-functor")
    th.declare_category("C")
    th.declare_category("D")
    _install_monoidal_cat(th, "C", "tensorC", "unitC")
    _install_monoidal_cat(th, "D", "tensorD", "unitD")
    th.declare_functor("Q", ["C"], "D")
    a, b = Var("a", "C"), Var("b", "C")
    th.declare_transformation(
        "q2",
        _A(th, "Q", _A(th, "tensorC", a, b)),
        _A(th, "tensorD", _A(th, "Q", a), _A(th, "Q", b)))
    th.declare_transformation("q0", _A(th, "Q", _A(th, "unitC")), _A(th, "unitD"))
    _install_opmonoidal_laws(th, "Q", "q2", "q0", "tensorC", "unitC",
                             "tensorD", "C")
    return th


def _install_bimonad(th: Theory):
    from .diagram import Step, build_diagram
    a, b = Var("a", "C"), Var("b", "C")
    th.declare_transformation(
        "sigma2",
        _A(th, "T", _A(th, "tensor", a, b)),
        _A(th, "tensor", _A(th, "T", a), _A(th, "T", b)))
    th.declare_transformation("sigma0", _A(th, "T", _A(th, "unit")), _A(th, "unit"))
    _install_opmonoidal_laws(th, "T", "sigma2", "sigma0", "tensor", "unit",
                             "tensor", "C")
    x, y = Var("x", "C"), Var("y", "C")
    unit = _A(th, "unit")
    src = _A(th, "T", _A(th, "T", _A(th, "tensor", x, y)))
    th.declare_equation(
        "BM1",
        build_diagram(th, src, [
            Step("mu", subst={"v": _A(th, "tensor", x, y)}),
            Step("sigma2", subst={"a": x, "b": y}),
        ]),
        build_diagram(th, src, [
            Step("sigma2", path=(0,), subst={"a": x, "b": y}),
            Step("sigma2", subst={"a": _A(th, "T", x), "b": _A(th, "T", y)}),
            Step("mu", path=(0,), subst={"v": x}),
            Step("mu", path=(1,), subst={"v": y}),
        ]))
    src = _A(th, "tensor", x, y)
    th.declare_equation(
        "BM2",
        build_diagram(th, src, [
            Step("iota", subst={"v": _A(th, "tensor", x, y)}),
            Step("sigma2", subst={"a": x, "b": y}),
        ]),
        build_diagram(th, src, [
            Step("iota", path=(0,), subst={"v": x}),
            Step("iota", path=(1,), subst={"v": y}),
        ]))
    src = _A(th, "T", _A(th, "T", unit))
    th.declare_equation(
        "BM3",
        build_diagram(th, src, [
            Step("mu", subst={"v": unit}),
            Step("sigma0"),
        ]),
        build_diagram(th, src, [
            Step("sigma0", path=(0,)),
            Step("sigma0"),
        ]))
    th.declare_equation(
        "BM4",
        build_diagram(th, unit, [
            Step("iota", subst={"v": unit}),
            Step("sigma0"),
        ]),
        build_diagram(th, unit, []))


def _preset_bimonad() -> Theory:
    th = Theory("bimonad")
    th.declare_category("C")
    _install_monoidal_cat(th, "C", "tensor", "unit", "nu_l", "nu_r")
    _install_monad(th)
    _install_bimonad(th)
    return th


def _install_duality(th: Theory, cat, dual, ev, coev, tensor, unit,
                     names=("Duality1", "Duality2")):
    from .diagram import Step, build_diagram
    c = Var("c", cat)
    th.declare_functor(dual, [(cat, True)], cat)
    th.declare_transformation(
        ev, _A(th, tensor, _A(th, dual, c), c), _A(th, unit))
    th.declare_transformation(
        coev, _A(th, unit), _A(th, tensor, c, _A(th, dual, c)))
    x = Var("x", cat)
    th.declare_equation(
        names[0],
        build_diagram(th, x, [
            Step(coev, offset=0, subst={"c": x}),
            Step(ev, offset=1, subst={"c": x}),
        ]),
        build_diagram(th, x, []))
    dx = _A(th, dual, x)
    th.declare_equation(
        names[1],
        build_diagram(th, dx, [
            Step(coev, offset=1, subst={"c": x}),
            Step(ev, offset=0, subst={"c": x}),
        ]),
        build_diagram(th, dx, []))


def _preset_left_duality() -> Theory:
    th = Theory("left-duality")
    th.declare_category("C")
    _install_monoidal_cat(th, "C", "tensor", "unit", "nu_l", "nu_r")
    _install_duality(th, "C", "dual", "ev", "coev", "tensor", "unit")
    return th


def _install_hopf(th: Theory):
    from .diagram import Step, build_diagram
    w, x = Var("w", "C"), Var("x", "C")
    # a node's op flag records its absolute parity, so the T inside the
    # dual is built negative
    th.declare_transformation(
        "S",
        _A(th, "T", _A(th, "dual", _A(th, "T", w, op=True))),
        _A(th, "dual", w))
    tx = _A(th, "T", x)
    dtx = _A(th, "dual", _A(th, "T", x, op=True))
    src = _A(th, "T", _A(th, "T", dtx))
    th.declare_equation(
        "HM0a",
        build_diagram(th, src, [
            Step("mu", subst={"v": dtx}),
            Step("S", subst={"w": x}),
        ]),
        build_diagram(th, src, [
            Step("mu", path=(0, 0, 0), subst={"v": x}),
            Step("S", path=(0,), subst={"w": tx}),
            Step("S", subst={"w": x}),
        ]))
    th.declare_equation(
        "HM0b",
        build_diagram(th, dtx, [
            Step("iota", subst={"v": dtx}),
            Step("S", subst={"w": x}),
        ]),
        build_diagram(th, dtx, [
            Step("iota", path=(0,), subst={"v": x}),
        ]))
    src = _A(th, "T", _A(th, "tensor", dtx, x))
    th.declare_equation(
        "HM1",
        build_diagram(th, src, [
            Step("iota", path=(0, 1), subst={"v": x}),
            Step("ev", path=(0,), subst={"c": tx}),
            Step("sigma0"),
        ]),
        build_diagram(th, src, [
            Step("sigma2", subst={"a": dtx, "b": x}),
            Step("mu", path=(0, 0, 0), subst={"v": x}),
            Step("S", path=(0,), subst={"w": tx}),
            Step("ev", subst={"c": tx}),
        ]))
    src = _A(th, "T", _A(th, "unit"))
    th.declare_equation(
        "HM2",
        build_diagram(th, src, [
            Step("sigma0"),
            Step("coev", offset=0, subst={"c": tx}),
            Step("iota", path=(1, 0), subst={"v": x}),
        ]),
        build_diagram(th, src, [
            Step("coev", path=(0,), subst={"c": tx}),
            Step("sigma2", subst={"a": tx, "b": dtx}),
            Step("mu", path=(0,), subst={"v": x}),
            Step("S", path=(1,), subst={"w": x}),
        ]))


def _preset_hopf_monad() -> Theory:
    th = Theory("hopf-monad")
    th.declare_category("C")
    _install_monoidal_cat(th, "C", "tensor", "unit", "nu_l", "nu_r")
    _install_monad(th)
    _install_bimonad(th)
    _install_duality(th, "C", "dual", "ev", "coev", "tensor", "unit")
    _install_hopf(th)
    return th


def _preset_module_category() -> Theory:
    from .diagram import Step, build_diagram
    th = Theory("module-category")
    th.declare_category("C")
    _install_monad(th)
    th.declare_category("M")
    th.declare_functor("UT", ["M"], "C")
    th.declare_functor("FT", ["C"], "M")
    m, x = Var("m", "M"), Var("x", "C")
    utm = _A(th, "UT", m)
    th.declare_transformation("rho", _A(th, "T", utm), utm)
    th.declare_transformation(
        "phi", _A(th, "UT", _A(th, "FT", x)), _A(th, "T", x), iso=True)
    src = _A(th, "T", _A(th, "T", utm))
    th.declare_equation(
        "Module1",
        build_diagram(th, src, [
            Step("mu", subst={"v": utm}),
            Step("rho", subst={"m": m}),
        ]),
        build_diagram(th, src, [
            Step("rho", path=(0,), subst={"m": m}),
            Step("rho", subst={"m": m}),
        ]))
    th.declare_equation(
        "Module2",
        build_diagram(th, utm, [
            Step("iota", subst={"v": utm}),
            Step("rho", subst={"m": m}),
        ]),
        build_diagram(th, utm, []))
    src = _A(th, "T", _A(th, "T", x))
    th.declare_equation(
        "FreeAct",
        build_diagram(th, src, [Step("mu", subst={"v": x})]),
        build_diagram(th, src, [
            Step("phi", "inv", (0,), 0, {"x": x}),
            Step("rho", subst={"m": _A(th, "FT", x)}),
            Step("phi", subst={"x": x}),
        ]))
    return th


def _preset_strong_monoidal_adjunction() -> Theory:
    from .diagram import Step, build_diagram
    th = Theory("strong-monoidal-adjunction")
    th.declare_category("C")
    th.declare_category("D")
    _install_monoidal_cat(th, "C", "tensorC", "unitC")
    _install_monoidal_cat(th, "D", "tensorD", "unitD")
    _install_duality(th, "C", "dualC", "evC", "coevC", "tensorC", "unitC",
                     names=("Duality1C", "Duality2C"))
    _install_duality(th, "D", "dualD", "evD", "coevD", "tensorD", "unitD",
                     names=("Duality1D", "Duality2D"))
    th.declare_functor("F", ["C"], "D")
    th.declare_functor("U", ["D"], "C")
    x, y = Var("x", "C"), Var("y", "D")
    th.declare_transformation("eta", x, _A(th, "U", _A(th, "F", x)))
    th.declare_transformation("eps", _A(th, "F", _A(th, "U", y)), y)
    fx = _A(th, "F", x)
    th.declare_equation(
        "Adj1",
        build_diagram(th, fx, [
            Step("eta", path=(0,), subst={"x": x}),
            Step("eps", subst={"y": fx}),
        ]),
        build_diagram(th, fx, []))
    uy = _A(th, "U", y)
    th.declare_equation(
        "Adj2",
        build_diagram(th, uy, [
            Step("eta", subst={"x": uy}),
            Step("eps", path=(0,), subst={"y": y}),
        ]),
        build_diagram(th, uy, []))
    a, b = Var("a", "D"), Var("b", "D")
    th.declare_transformation(
        "u2",
        _A(th, "tensorC", _A(th, "U", a), _A(th, "U", b)),
        _A(th, "U", _A(th, "tensorD", a, b)),
        iso=True)
    th.declare_transformation(
        "u0", _A(th, "unitC"), _A(th, "U", _A(th, "unitD")), iso=True)
    _install_monoidal_functor_laws(th, "U", "u2", "u0",
                                   "tensorC", "tensorD", "unitD", "D")
    return th


_PRESETS = {
    "adjunction": _preset_adjunction,
    "monad": _preset_monad,
    "monoidal-category": _preset_monoidal_category,
    "monoidal-functor": _preset_monoidal_functor,
    "opmonoidal-functor": _preset_opmonoidal_functor,
    "bimonad": _preset_bimonad,
    "left-duality": _preset_left_duality,
    "hopf-monad": _preset_hopf_monad,
    "module-category": _preset_module_category,
    "strong-monoidal-adjunction": _preset_strong_monoidal_adjunction,
}


def load_theory(name: str) -> Theory:
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(
            f"no preset theory {name}; have {', '.join(sorted(_PRESETS))}") from None
    return builder()
