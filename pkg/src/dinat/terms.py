"""Functor terms.

A term is either an ambient variable or a generator application::

    Var(name, cat)
    App(gen, op, args)

``op`` is the absolute parity of the node: True iff the node sits under an
odd number of contravariant slots (counting the diagram's own ambient
parity).  Variables carry no flag; their parity is read off the context.

Tensors are word formers.  A declared tensor is strictly associative and
strictly unital at the term level, so canonical terms never contain:

  * a tensor node directly under the same tensor node,
  * a unit factor inside its tensor,
  * a tensor node with fewer than two factors.

``mk_app`` enforces this; everything downstream assumes it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import (
    ArityMismatch,
    CategoryMismatch,
    IllTyped,
    MissingAssignment,
    UnknownGenerator,
)


@dataclass(frozen=True)
class Var:
    name: str
    cat: str


@dataclass(frozen=True)
class App:
    gen: str
    op: bool
    args: tuple

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


Term = Var | App


@dataclass(frozen=True)
class CategoryContext:
    """Domain context of a term read as a functor: one (category, op) entry
    per variable occurrence, left to right.  Empty = the terminal category."""

    entries: tuple

    def op(self) -> "CategoryContext":
        return CategoryContext(tuple((c, not o) for c, o in self.entries))


def retag(t: Term) -> Term:
    """Flip the parity flag on every application node."""
    if isinstance(t, Var):
        return t
    return App(t.gen, not t.op, tuple(retag(a) for a in t.args))


def retag_if(t: Term, flip: bool) -> Term:
    return retag(t) if flip else t


def cat_of(sig, t: Term) -> str:
    if isinstance(t, Var):
        return t.cat
    return sig.functor(t.gen).cod


def mk_app(sig, gen: str, args, op: bool = False) -> Term:
    """Normalizing constructor.

    For a tensor generator the argument list is flattened (same-tensor
    factors spliced, unit factors dropped) and collapsed: zero factors give
    the unit term, one factor gives the factor itself.
    """
    fg = sig.functor(gen)
    args = tuple(args)
    if fg.tensor_unit is not None:
        unit = fg.tensor_unit
        factors = []
        for a in args:
            if isinstance(a, App) and a.gen == gen:
                if a.op != op:
                    raise IllTyped(f"parity clash splicing {gen} word")
                factors.extend(a.args)
            elif isinstance(a, App) and a.gen == unit:
                continue
            else:
                factors.append(a)
        if not factors:
            return App(unit, op, ())
        if len(factors) == 1:
            return factors[0]
        return App(gen, op, tuple(factors))
    if len(args) != len(fg.dom):
        raise ArityMismatch(f"{gen} expects {len(fg.dom)} arguments, got {len(args)}")
    return App(gen, op, args)


def unit_term(sig, cat: str, op: bool = False) -> Term:
    ten, unit = sig.tensor_of(cat)
    return App(unit, op, ())


def word_view(sig, t: Term) -> tuple:
    """The factor list of ``t`` relative to its category's tensor.

    A tensor node yields its factors, the unit yields the empty word and
    anything else is a one-factor word.  In a category with no declared
    tensor every term is a one-factor word.
    """
    if isinstance(t, App):
        pair = sig.tensor_of(cat_of(sig, t))
        if pair is not None:
            ten, unit = pair
            if t.gen == ten:
                return t.args
            if t.gen == unit:
                return ()
    return (t,)


def from_view(sig, cat: str, factors, op: bool) -> Term:
    pair = sig.tensor_of(cat)
    factors = tuple(factors)
    if pair is None:
        if len(factors) != 1:
            raise IllTyped(f"category {cat} has no tensor to hold {len(factors)} factors")
        return factors[0]
    return mk_app(sig, pair[0], factors, op)


def subterm(t: Term, path) -> Term:
    for i in path:
        if not isinstance(t, App) or i >= len(t.args):
            raise IllTyped(f"path {tuple(path)} does not address a subterm")
        t = t.args[i]
    return t


def replace_subterm(sig, t: Term, path, new: Term) -> Term:
    """Rebuild along ``path`` with ``new`` at the end; ancestors renormalize."""
    if not path:
        return new
    if not isinstance(t, App):
        raise IllTyped("path walks through a variable")
    i = path[0]
    args = list(t.args)
    args[i] = replace_subterm(sig, t.args[i], path[1:], new)
    return mk_app(sig, t.gen, args, t.op)


def slot_negates(sig, t: App, i: int) -> bool:
    fg = sig.functor(t.gen)
    if fg.tensor_unit is not None:
        return False
    return fg.dom[i][1]


def parity_at(sig, t: Term, path, neg: bool = False) -> bool:
    for i in path:
        neg ^= slot_negates(sig, t, i)
        t = t.args[i]
    return neg


def typecheck(sig, t: Term, *, neg: bool = False, cat: str | None = None) -> str:
    """Validate typing, parity flags and canonical word form; return the
    term's category."""
    if isinstance(t, Var):
        if t.cat not in sig.categories:
            raise CategoryMismatch(f"variable {t.name} lives in unknown category {t.cat}")
        got = t.cat
    else:
        fg = sig.functor(t.gen)
        if t.op != neg:
            raise IllTyped(f"{t.gen} node carries parity {t.op}, context says {neg}")
        if fg.tensor_unit is not None:
            if len(t.args) < 2:
                raise IllTyped(f"non-collapsed {t.gen} word with {len(t.args)} factors")
            for a in t.args:
                if isinstance(a, App) and a.gen in (t.gen, fg.tensor_unit):
                    raise IllTyped(f"non-canonical factor {a.gen} inside {t.gen} word")
                typecheck(sig, a, neg=neg, cat=fg.cod)
        else:
            if len(t.args) != len(fg.dom):
                raise ArityMismatch(
                    f"{t.gen} expects {len(fg.dom)} arguments, got {len(t.args)}"
                )
            for a, (dcat, contra) in zip(t.args, fg.dom):
                typecheck(sig, a, neg=neg ^ contra, cat=dcat)
        got = fg.cod
    if cat is not None and got != cat:
        raise CategoryMismatch(f"expected category {cat}, got {got}")
    return got


def occurrences(sig, t: Term, path=(), neg: bool = False):
    """Yield (name, path, parity) for every variable occurrence, left to
    right."""
    if isinstance(t, Var):
        yield (t.name, path, neg)
        return
    for i, a in enumerate(t.args):
        yield from occurrences(sig, a, path + (i,), neg ^ slot_negates(sig, t, i))


def context_of(sig, t: Term) -> CategoryContext:
    return CategoryContext(
        tuple((subterm(t, p).cat, n) for _, p, n in occurrences(sig, t))
    )


def term_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t.name}
    out = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def rename_vars(t: Term, mapping: Mapping[str, str]) -> Term:
    if isinstance(t, Var):
        return Var(mapping.get(t.name, t.name), t.cat)
    return App(t.gen, t.op, tuple(rename_vars(a, mapping) for a in t.args))


def substitute(sig, pattern: Term, subst: Mapping[str, Term], neg: bool = False) -> Term:
    """Instantiate a pattern at absolute parity ``neg``.

    Substitution values are stored at positive parity; each occurrence
    inserts a retagged copy matching its own parity.
    """
    if isinstance(pattern, Var):
        if pattern.name not in subst:
            raise MissingAssignment(f"no value for pattern variable {pattern.name}")
        return retag_if(subst[pattern.name], neg)
    return mk_app(
        sig,
        pattern.gen,
        (
            substitute(sig, a, subst, neg ^ slot_negates(sig, pattern, i))
            for i, a in enumerate(pattern.args)
        ),
        neg,
    )


class Anchor:
    """Where a pattern variable's value landed inside an instantiated term.

    kind 'node': the value is the whole node at ``path``.
    kind 'seg': the value occupies factors [start, start + length) of the
    word view of the node at ``path`` (length 0 for a unit value that left
    no factors behind).
    """

    __slots__ = ("kind", "path", "start", "length", "neg", "value")

    def __init__(self, kind, path, start, length, neg, value):
        self.kind = kind
        self.path = tuple(path)
        self.start = start
        self.length = length
        self.neg = neg
        self.value = value

    def __repr__(self):
        return f"Anchor({self.kind}, {self.path}, {self.start}, {self.length}, neg={self.neg})"


def instantiate_anchored(sig, pattern: Term, subst: Mapping[str, Term], neg: bool = False):
    """Instantiate and also report where each variable's value landed.

    Returns (term, anchors) where anchors maps a variable name to its
    occurrence Anchors in pattern order.  Word splicing is accounted for:
    anchor paths address the built term, not the pattern.
    """
    anchors = {}

    def build(p, neg, path):
        if isinstance(p, Var):
            if p.name not in subst:
                raise MissingAssignment(f"no value for pattern variable {p.name}")
            val = retag_if(subst[p.name], neg)
            anchors.setdefault(p.name, []).append(Anchor("node", path, 0, 1, neg, val))
            return val
        fg = sig.functor(p.gen)
        if fg.tensor_unit is not None:
            built = [build(a, neg, path + (i,)) for i, a in enumerate(p.args)]
            spans, offset = [], 0
            for b in built:
                n = len(word_view(sig, b))
                spans.append((offset, n))
                offset += n
            total = offset
            for recs in anchors.values():
                for rec in recs:
                    if rec.path[: len(path)] != path or len(rec.path) <= len(path):
                        continue
                    i = rec.path[len(path)]
                    start, n = spans[i]
                    rest = rec.path[len(path) + 1 :]
                    if len(rec.path) == len(path) + 1:
                        # A variable sat directly in factor slot i.
                        if total == 1 and n == 1:
                            rec.path = path  # word collapsed onto the value
                        else:
                            rec.kind = "seg"
                            rec.path, rec.start, rec.length = path, start, n
                    elif isinstance(built[i], App) and built[i].gen == p.gen:
                        # Spliced word: inner factor j lands at start + j.
                        rec.path = path + (start + rest[0],) + rest[1:]
                    elif total == 1:
                        rec.path = path + rest  # word collapsed onto this factor
                    else:
                        rec.path = path + (start,) + rest
            return mk_app(sig, p.gen, built, neg)
        return mk_app(
            sig,
            p.gen,
            (
                build(a, neg ^ slot_negates(sig, p, i), path + (i,))
                for i, a in enumerate(p.args)
            ),
            neg,
        )

    term = build(pattern, neg, ())
    return term, anchors


def match(sig, pattern: Term, subject: Term, neg: bool = False) -> Iterator[dict]:
    """Yield every substitution making the pattern equal the subject at
    parity ``neg``.  Word patterns enumerate all factor splits, including
    empty segments (a variable bound to the unit)."""
    for s in _match_loose(sig, pattern, subject, neg):
        merged = {}
        ok = True
        for name, vals in s.items():
            first = vals[0]
            if any(v != first for v in vals[1:]):
                ok = False
                break
            merged[name] = first
        if ok:
            yield merged


def match_conflicts(sig, pattern: Term, subject: Term, neg: bool = False):
    """Like match, but returns per-occurrence bindings so callers can tell a
    nonlinear disagreement apart from a plain mismatch."""
    return list(_match_loose(sig, pattern, subject, neg))


def _match_loose(sig, pattern, subject, neg):
    def bind(binds, name, value):
        out = dict(binds)
        out[name] = out.get(name, ()) + (value,)
        return out

    def walk(p, s, neg, binds):
        if isinstance(p, Var):
            if cat_of(sig, s) != p.cat:
                return
            yield bind(binds, p.name, retag_if(s, neg))
            return
        fg = sig.functor(p.gen)
        if fg.tensor_unit is not None:
            yield from words(p.args, word_view(sig, s), neg, binds, fg.cod)
            return
        if not isinstance(s, App) or s.gen != p.gen or s.op != neg:
            return
        states = [binds]
        for i, (pa, sa) in enumerate(zip(p.args, s.args)):
            nxt = []
            n2 = neg ^ slot_negates(sig, p, i)
            for st in states:
                nxt.extend(walk(pa, sa, n2, st))
            states = nxt
            if not states:
                return
        yield from states

    def words(pfactors, sfactors, neg, binds, cat):
        # Match a word pattern against a factor list.  Variable factors may
        # take any contiguous segment; concrete factors take exactly one.
        if not pfactors:
            if not sfactors:
                yield binds
            return
        head, rest = pfactors[0], pfactors[1:]
        if isinstance(head, Var):
            if head.cat != cat:
                return
            for k in range(len(sfactors) + 1):
                seg = sfactors[:k]
                value = retag_if(from_view(sig, cat, seg, neg), neg)
                yield from words(rest, sfactors[k:], neg, bind(binds, head.name, value), cat)
        else:
            if not sfactors:
                return
            for b in walk(head, sfactors[0], neg, binds):
                yield from words(rest, sfactors[1:], neg, b, cat)

    subject_cat = cat_of(sig, subject)
    if isinstance(pattern, App) and sig.functor(pattern.gen).cod != subject_cat:
        return
    yield from walk(pattern, subject, neg, {})


def render_term(t: Term) -> str:
    """Compact deterministic text form; parity shown as a ~ prefix."""
    if isinstance(t, Var):
        return t.name
    inner = " ".join([t.gen] + [render_term(a) for a in t.args])
    return ("~(" if t.op else "(") + inner + ")"
