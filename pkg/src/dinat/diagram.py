"""Diagrams over functor terms: step application, duality, exchange normal form.

A diagram is a source term together with an ordered list of steps.  Each step
names a transformation generator, a direction, a position, and a substitution
for the generator's pattern variables.  Positions are (path, offset) pairs:
the path addresses a node, the offset selects where the matched factor
segment starts inside that node's word view.

Steps are parity relative.  At a position of negative parity the matched and
produced sides of the generator trade places, so a forward step under an odd
number of contravariant slots denotes the op-mate of the generator.  This is
what makes op_dual a purely structural involution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace as _dc_replace
from typing import Iterator, Optional

from .errors import (
    BoundaryMismatch,
    DinatError,
    EKCycle,
    IllTyped,
    InverseOnNonIso,
    MissingAssignment,
    NoMatch,
    NonLinearMismatch,
    StepFailure,
)
from .terms import (
    Anchor,
    App,
    Term,
    Var,
    cat_of,
    from_view,
    instantiate_anchored,
    match,
    match_conflicts,
    mk_app,
    occurrences,
    parity_at,
    rename_vars,
    render_term,
    replace_subterm,
    retag,
    retag_if,
    substitute,
    subterm,
    term_vars,
    typecheck,
    word_view,
)

Path = tuple
Region = tuple  # (path, offset, length) in the word view of the node at path


def _is_word(sig, t: Term) -> bool:
    return isinstance(t, App) and sig.functor(t.gen).tensor_unit is not None


def _is_unit(sig, t: Term) -> bool:
    return isinstance(t, App) and not _is_word(sig, t) and not word_view(sig, t)


@dataclass(frozen=True)
class Step:
    gen: str
    direction: str = "fwd"
    path: Path = ()
    offset: int = 0
    subst: tuple = ()

    def __post_init__(self):
        if self.direction not in ("fwd", "inv"):
            raise ValueError(f"bad step direction {self.direction!r}")
        object.__setattr__(self, "path", tuple(self.path))
        items = self.subst.items() if hasattr(self.subst, "items") else self.subst
        object.__setattr__(self, "subst", tuple(sorted(items)))

    @property
    def bindings(self) -> dict:
        return dict(self.subst)

    @property
    def pos(self):
        return (self.path, self.offset)


def render_step(s: Step) -> str:
    binds = " ".join(f"{n}:={render_term(t)}" for n, t in s.subst)
    arrow = "" if s.direction == "fwd" else "^-1"
    return f"{s.gen}{arrow}@{list(s.path)}+{s.offset}" + (f" {{{binds}}}" if binds else "")


@dataclass(frozen=True)
class Diagram:
    source: Term
    steps: tuple = ()
    ambient_op: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))


# ---------------------------------------------------------------------------
# region and anchor algebra

def anchor_region(sig, a: Anchor) -> Region:
    if a.kind == "seg":
        return (a.path, a.start, a.length)
    return (a.path, 0, len(word_view(sig, a.value)))


def region_contains(sig, term: Term, outer: Region, inner: Region) -> bool:
    pa, oa, la = outer
    pb, ob, lb = inner
    pa, pb = tuple(pa), tuple(pb)
    if pa == pb:
        return oa <= ob and ob + lb <= oa + la
    if len(pb) > len(pa) and pb[: len(pa)] == pa:
        node = subterm(term, pa)
        if _is_word(sig, node):
            return oa <= pb[len(pa)] < oa + la
        return la >= 1
    return False


def _contains_path(sig, term: Term, region: Region, p: Path) -> bool:
    P, O, Ln = region
    P = tuple(P)
    p = tuple(p)
    if p == P:
        return Ln >= 1 and O == 0
    if len(p) > len(P) and p[: len(P)] == P:
        node = subterm(term, P)
        if _is_word(sig, node):
            return O <= p[len(P)] < O + Ln
        return Ln >= 1
    return False


def relativize_region(sig, anchor: Anchor, region: Region) -> Region:
    """Re-express a region inside an anchor relative to the anchor's value."""
    p, o, l = region
    p = tuple(p)
    if anchor.kind == "node":
        if (anchor.path and p == anchor.path[:-1]
                and o == anchor.path[-1] and l == 1):
            # region stated in the enclosing word's view, covering the node
            return ((), 0, 1)
        return (p[len(anchor.path):], o, l)
    if p == anchor.path:
        return ((), o - anchor.start, l)
    j = p[len(anchor.path)]
    rest = p[len(anchor.path) + 1:]
    if anchor.length == 1:
        return (rest, o, l)
    return ((j - anchor.start,) + rest, o, l)


def absolutize_region(sig, anchor: Anchor, rel: Region) -> Region:
    rp, o, l = rel
    rp = tuple(rp)
    if anchor.kind == "node":
        return (anchor.path + rp, o, l)
    if not rp:
        return (anchor.path, anchor.start + o, l)
    if anchor.length == 1:
        return (anchor.path + (anchor.start,) + rp, o, l)
    return (anchor.path + (anchor.start + rp[0],) + rp[1:], o, l)


def absolutize_path(anchor: Anchor, rp: Path) -> Path:
    rp = tuple(rp)
    if anchor.kind == "node":
        return anchor.path + rp
    if anchor.length == 1:
        return anchor.path + (anchor.start,) + rp
    return anchor.path + (anchor.start + rp[0],) + rp[1:]


def _compose_anchor(sig, plc: Anchor, rel: Anchor) -> Anchor:
    """Embed an anchor, given relative to an instantiated side, at the side's
    placement in the ambient term."""
    if plc.kind == "node":
        if not rel.path:
            if rel.kind == "node":
                return Anchor("node", plc.path, 0, 1, rel.neg, rel.value)
            return Anchor("seg", plc.path, rel.start, rel.length, rel.neg, rel.value)
        return Anchor(rel.kind, plc.path + rel.path, rel.start, rel.length, rel.neg, rel.value)
    root_word = _is_word(sig, plc.value)
    if not rel.path:
        if rel.kind == "seg":
            return Anchor("seg", plc.path, plc.start + rel.start, rel.length, rel.neg, rel.value)
        n = len(word_view(sig, rel.value))
        if n == 1 and not root_word:
            return Anchor("node", plc.path + (plc.start,), 0, 1, rel.neg, rel.value)
        return Anchor("seg", plc.path, plc.start, n, rel.neg, rel.value)
    if root_word:
        j, rest = rel.path[0], rel.path[1:]
        return Anchor(rel.kind, plc.path + (plc.start + j,) + rest,
                      rel.start, rel.length, rel.neg, rel.value)
    return Anchor(rel.kind, plc.path + (plc.start,) + rel.path,
                  rel.start, rel.length, rel.neg, rel.value)


def canonical_pos(sig, term: Term, path: Path, offset: int, length: int):
    """Canonical (path, offset) for a region: single factors are addressed at
    the factor, insertions anchor at the maximal enclosing word."""
    path = tuple(path)
    node = subterm(term, path)
    if _is_word(sig, node):
        if length == 1:
            return canonical_pos(sig, term, path + (offset,), 0, 1)
        return path, offset
    if length == 0 and path:
        parent = subterm(term, path[:-1])
        if _is_word(sig, parent):
            return path[:-1], path[-1] + offset
    return path, offset


def promote_region(sig, term: Term, region: Region) -> Region:
    """Express a region in the view of the maximal enclosing word."""
    p, o, l = region
    p = tuple(p)
    if p:
        node = subterm(term, p)
        if not _is_word(sig, node):
            parent = subterm(term, p[:-1])
            if _is_word(sig, parent):
                return (p[:-1], p[-1] + o, l)
    return (p, o, l)


# ---------------------------------------------------------------------------
# one-step application

class PathMap:
    """Path and region relocation across a single view edit.

    The edit replaces factors [o, o + l) of the view of the node at ``path``
    by k new factors.  Collapses (the node ending up with one factor or none)
    stay inside the parent slot: ancestor views never change arity.
    """

    def __init__(self, sig, path, node, o, l, k):
        self.path = tuple(path)
        self.word = _is_word(sig, node)
        self.unit = _is_unit(sig, node)
        self.L = len(word_view(sig, node))
        self.o, self.l, self.k = o, l, k
        self.L2 = self.L - l + k
        survivors = [j for j in range(self.L) if j < o or j >= o + l]
        self.j_surv = survivors[0] if len(survivors) == 1 else None

    def map_path(self, p):
        p = tuple(p)
        if p[: len(self.path)] != self.path:
            return p
        rest = p[len(self.path):]
        if self.word:
            if not rest:
                return p
            j, tail = rest[0], rest[1:]
            if j < self.o:
                j2 = j
            elif j >= self.o + self.l:
                j2 = j - self.l + self.k
            else:
                return None
            if self.L2 >= 2:
                return self.path + (j2,) + tail
            if self.L2 == 1:
                return self.path + tail
            return None
        if self.unit:
            return p if not rest else None
        if self.l >= 1:
            return None
        if self.k == 0:
            return p
        j2 = self.k if self.o == 0 else 0
        return self.path + (j2,) + rest

    def map_region(self, region):
        P, o_r, l_r = region
        P = tuple(P)
        if P != self.path:
            p2 = self.map_path(P)
            return None if p2 is None else (p2, o_r, l_r)
        if o_r + l_r <= self.o:
            return (P, o_r, l_r)
        if o_r >= self.o + self.l:
            return (P, o_r - self.l + self.k, l_r)
        return None

    def unmap_path(self, p):
        p = tuple(p)
        if p[: len(self.path)] != self.path:
            return p
        rest = p[len(self.path):]
        if self.L2 >= 2:
            if not rest:
                return p
            j, tail = rest[0], rest[1:]
            if not self.word and not self.unit and self.l == 0:
                j_node = self.k if self.o == 0 else 0
                return self.path + tail if j == j_node else None
            if self.unit or (not self.word and self.l >= 1):
                return None
            if j < self.o:
                j2 = j
            elif j >= self.o + self.k:
                j2 = j - self.k + self.l
            else:
                return None
            return self.path + (j2,) + tail
        if self.L2 == 1:
            if self.word:
                if self.j_surv is None:
                    return p if not rest else None
                return self.path + (self.j_surv,) + rest
            if self.unit or self.l >= 1:
                return p if not rest else None
            return p  # trivial plain-node edit
        return p if not rest else None

    def unmap_region(self, region):
        P, o_r, l_r = region
        P = tuple(P)
        if P != self.path:
            p2 = self.unmap_path(P)
            return None if p2 is None else (p2, o_r, l_r)
        if o_r + l_r <= self.o:
            return (P, o_r, l_r)
        if o_r >= self.o + self.k:
            return (P, o_r - self.k + self.l, l_r)
        return None


@dataclass
class StepEffect:
    term: Term
    pmap: PathMap
    plc_m: Anchor
    plc_p: Anchor
    anchors_in: dict
    anchors_out: dict
    moves: list
    joins: list
    births: list
    neg: bool
    matched_len: int
    produced_len: int


def _diagnose(sig, pat_m, actual, neg, cat, gen_name):
    if len(actual) == 1:
        subject = actual[0]
    else:
        subject = from_view(sig, cat, actual, neg)
    for binds in match_conflicts(sig, pat_m, subject, neg):
        for v, vals in binds.items():
            first = vals[0]
            if any(x != first for x in vals[1:]):
                seen = ", ".join(sorted({render_term(x) for x in vals}))
                raise NonLinearMismatch(
                    f"{gen_name}: variable {v} would need to be {seen} at once")
    raise NoMatch(
        f"{gen_name}: expected {render_term(pat_m)} shape, found "
        + " ".join(render_term(a) for a in actual))


def apply_step_effect(sig, term: Term, step: Step, ambient_neg: bool = False,
                      _allow_reverse: bool = False) -> StepEffect:
    gen, aliased = sig.resolve_transform(step.gen)
    inverted = (step.direction == "inv") ^ aliased
    if inverted and not gen.iso and not _allow_reverse:
        raise InverseOnNonIso(f"{gen.name} is not invertible")
    try:
        node = subterm(term, step.path)
    except (AttributeError, IndexError, TypeError):
        raise NoMatch(f"no subterm at {list(step.path)}") from None
    neg = parity_at(sig, term, step.path, ambient_neg)
    matched_is_lhs = (not inverted) ^ neg
    pat_m = gen.lhs if matched_is_lhs else gen.rhs
    pat_p = gen.rhs if matched_is_lhs else gen.lhs

    binds = step.bindings
    unknown = set(binds) - set(gen.var_cats)
    if unknown:
        raise IllTyped(f"{gen.name}: unknown variables {sorted(unknown)}")
    for v, cat in sorted(gen.var_cats.items()):
        if v not in binds:
            raise MissingAssignment(f"{gen.name}: no value for {v}")
        typecheck(sig, binds[v], cat=cat)

    inst_m, am_rel = instantiate_anchored(sig, pat_m, binds, neg)
    inst_p, ap_rel = instantiate_anchored(sig, pat_p, binds, neg)
    seg_m = word_view(sig, inst_m)
    seg_p = word_view(sig, inst_p)
    if not seg_m and not seg_p and gen.var_cats:
        # a component collapsing to the unit on both sides has no footprint,
        # so its placement would not be pinned by any content
        raise NoMatch(f"{gen.name}: component collapses to the unit")
    view = word_view(sig, node)
    L, l, k, o = len(view), len(seg_m), len(seg_p), step.offset

    node_word = _is_word(sig, node)
    node_unit = _is_unit(sig, node)
    if node_word and l == 1:
        raise IllTyped(
            f"single-factor region at {list(step.path)} must address the factor")
    if not node_word and not node_unit and l == 0 and step.path:
        if _is_word(sig, subterm(term, step.path[:-1])):
            raise IllTyped(
                f"insertion at {list(step.path)} must anchor at the enclosing word")
    if o < 0 or o > L or o + l > L:
        raise NoMatch(f"{gen.name}: region [{o}, {o + l}) out of range at {list(step.path)}")

    cat = cat_of(sig, node)
    actual = tuple(view[o:o + l])
    if actual != tuple(seg_m):
        _diagnose(sig, pat_m, actual, neg, cat, gen.name)

    new_view = tuple(view[:o]) + tuple(seg_p) + tuple(view[o + l:])
    if node_word:
        new_node = mk_app(sig, node.gen, new_view, node.op)
    elif node_unit:
        new_node = from_view(sig, cat, new_view, node.op)
    elif l == 1 and len(new_view) == 1:
        new_node = new_view[0]
    else:
        new_node = from_view(sig, cat, new_view, neg)
    new_term = replace_subterm(sig, term, step.path, new_node)

    lifted = (not node_word and not node_unit and step.path
              and _is_word(sig, subterm(term, step.path[:-1])))
    if lifted:
        eff_path = step.path[:-1]
        eff_node = subterm(term, eff_path)
        eff_o, eff_l = step.path[-1], 1
        eff_k = len(word_view(sig, new_node))
    else:
        eff_path, eff_node, eff_o, eff_l, eff_k = step.path, node, o, l, k
    pmap = PathMap(sig, eff_path, eff_node, eff_o, eff_l, eff_k)

    if node_word:
        plc_m = Anchor("seg", step.path, o, l, neg, inst_m)
    elif l == 1:
        plc_m = Anchor("node", step.path, 0, 1, neg, inst_m)
    else:
        plc_m = Anchor("seg", step.path, o, 0, neg, inst_m)
    if pmap.L2 >= 2:
        plc_p = Anchor("seg", eff_path, eff_o, eff_k, neg, inst_p)
    elif eff_k == 1 and pmap.L2 == 1:
        plc_p = Anchor("node", eff_path, 0, 1, neg, inst_p)
    else:
        plc_p = Anchor("seg", eff_path, min(eff_o, pmap.L2), 0, neg, inst_p)

    anchors_in = {v: [_compose_anchor(sig, plc_m, a) for a in recs]
                  for v, recs in am_rel.items()}
    anchors_out = {v: [_compose_anchor(sig, plc_p, a) for a in recs]
                   for v, recs in ap_rel.items()}

    mregion = anchor_region(sig, plc_m)
    moves, joins, births = [], [], []
    for _, p, _ in occurrences(sig, term):
        if _contains_path(sig, term, mregion, p):
            continue
        np = pmap.map_path(p)
        assert np is not None, "frame occurrence lost"
        moves.append((p, np, None))
    for v in sorted(gen.var_cats):
        ains = anchors_in.get(v, [])
        aouts = anchors_out.get(v, [])
        occs = [p for _, p, _ in occurrences(sig, binds[v])]
        if len(ains) == 1 and len(aouts) == 1:
            for rp in occs:
                moves.append((absolutize_path(ains[0], rp),
                              absolutize_path(aouts[0], rp), v))
        elif len(ains) == 2 and not aouts:
            for rp in occs:
                joins.append((absolutize_path(ains[0], rp),
                              absolutize_path(ains[1], rp)))
        elif len(aouts) == 2 and not ains:
            for rp in occs:
                births.append((absolutize_path(aouts[0], rp),
                               absolutize_path(aouts[1], rp)))
        else:  # pragma: no cover - declaration validation rules this out
            raise IllTyped(f"{gen.name}: variable {v} has an unsupported shape")

    return StepEffect(new_term, pmap, plc_m, plc_p, anchors_in, anchors_out,
                      moves, joins, births, neg, l, k)


def apply_step(sig, term: Term, step: Step, ambient_neg: bool = False) -> Term:
    return apply_step_effect(sig, term, step, ambient_neg).term


# ---------------------------------------------------------------------------
# strand tracking

def _strand_fold(peer: dict, eff: StepEffect, index: int):
    """Update strand end pairing across one step; raises EKCycle when a step
    joins the two ends of a single strand."""
    renames = {}
    for old, new, _ in eff.moves:
        renames[("cur", old)] = ("cur", new)
    if renames:
        items = list(peer.items())
        peer.clear()
        for a, b in items:
            peer[renames.get(a, a)] = renames.get(b, b)
    for a, b in eff.joins:
        ka, kb = ("cur", a), ("cur", b)
        pa = peer.pop(ka)
        if pa == kb:
            raise EKCycle(
                f"step {index} joins both ends of one strand, "
                f"at {list(a)} and {list(b)}")
        pb = peer.pop(kb)
        peer[pa] = pb
        peer[pb] = pa
    for a, b in eff.births:
        peer[("cur", a)] = ("cur", b)
        peer[("cur", b)] = ("cur", a)


def _effects(sig, d: Diagram) -> Iterator[tuple]:
    term = d.source
    for i, s in enumerate(d.steps):
        try:
            eff = apply_step_effect(sig, term, s, d.ambient_op)
        except EKCycle:
            raise
        except DinatError as exc:
            raise StepFailure(i, exc) from exc
        yield i, s, term, eff
        term = eff.term


def target(sig, d: Diagram) -> Term:
    term = d.source
    for s in d.steps:
        term = apply_step(sig, term, s, d.ambient_op)
    return term


def diagram_context(sig, d: Diagram):
    """Ordered (name, category) pairs for the ambient variables of a diagram:
    source variables first, then fresh ones in order of introduction."""
    seen, out = set(), []
    def note(t):
        for name, p, _ in occurrences(sig, t):
            if name not in seen:
                seen.add(name)
                out.append((name, subterm(t, p).cat))
    note(d.source)
    for s in d.steps:
        for _, v in s.subst:
            note(v)
    return out


def build_diagram(sig, source: Term, steps, ambient_op: bool = False,
                  context=None) -> Diagram:
    """Validate and assemble a diagram.  Produce-side variables left without a
    value get a fresh ambient variable; every step must apply; a step closing
    a strand onto itself raises EKCycle."""
    typecheck(sig, source, neg=ambient_op)
    if context is not None:
        ctx = dict(context)
        for name, p, _ in occurrences(sig, source):
            v = subterm(source, p)
            if name not in ctx or ctx[name] != v.cat:
                raise IllTyped(f"source variable {name} not in the given context")
    used = set(term_vars(source))
    for s in steps:
        if isinstance(s, Step):
            for _, v in s.subst:
                used |= term_vars(v)
    counter = [0]

    def fresh(base: str) -> str:
        base = base.split("'")[0] or base
        while True:
            counter[0] += 1
            cand = f"{base}'{counter[0]}"
            if cand not in used:
                used.add(cand)
                return cand

    peer = {}
    for name, p, _ in occurrences(sig, source):
        peer[("cur", p)] = ("src", p)
        peer[("src", p)] = ("cur", p)

    term = source
    completed = []
    for i, s in enumerate(steps):
        if not isinstance(s, Step):
            s = Step(*s) if isinstance(s, tuple) else s
        try:
            s = _autofill(sig, term, s, ambient_op, fresh)
            eff = apply_step_effect(sig, term, s, ambient_op)
        except EKCycle:
            raise
        except DinatError as exc:
            raise StepFailure(i, exc) from exc
        _strand_fold(peer, eff, i)
        completed.append(s)
        term = eff.term
    return Diagram(source, tuple(completed), ambient_op)


def _autofill(sig, term: Term, step: Step, ambient_neg: bool, fresh) -> Step:
    gen, aliased = sig.resolve_transform(step.gen)
    missing = [v for v in sorted(gen.var_cats) if v not in dict(step.subst)]
    if not missing:
        return step
    inverted = (step.direction == "inv") ^ aliased
    try:
        neg = parity_at(sig, term, step.path, ambient_neg)
    except (AttributeError, IndexError, TypeError):
        raise NoMatch(f"no subterm at {list(step.path)}") from None
    pat_m = gen.lhs if (not inverted) ^ neg else gen.rhs
    matched_vars = term_vars(pat_m)
    binds = step.bindings
    for v in missing:
        if v in matched_vars:
            raise MissingAssignment(f"{gen.name}: no value for {v}")
        binds[v] = Var(fresh(v), gen.var_cats[v])
    return _dc_replace(step, subst=tuple(sorted(binds.items())))


# ---------------------------------------------------------------------------
# whole-diagram operations

def vertical_compose(sig, d1: Diagram, d2: Diagram) -> Diagram:
    if d1.ambient_op != d2.ambient_op:
        raise BoundaryMismatch("cannot compose across an op boundary")
    t1 = target(sig, d1)
    if t1 != d2.source:
        raise BoundaryMismatch(
            f"target {render_term(t1)} differs from source {render_term(d2.source)}")
    used = set(term_vars(d1.source))
    for s in d1.steps:
        for _, v in s.subst:
            used |= term_vars(v)
    steps2 = _rename_introduced(sig, d2, avoid=used)
    return Diagram(d1.source, d1.steps + steps2, d1.ambient_op)


def _rename_introduced(sig, d: Diagram, avoid: set) -> tuple:
    """Rename variables a diagram introduces mid-flight so they avoid a set of
    taken names.  Source variables are never renamed."""
    known = set(term_vars(d.source))
    used = set(avoid) | known
    for s in d.steps:
        for _, v in s.subst:
            used |= term_vars(v)
    mapping = {}
    counter = [0]

    def fresh(base):
        base = base.split("'")[0] or base
        while True:
            counter[0] += 1
            cand = f"{base}'{counter[0]}"
            if cand not in used:
                used.add(cand)
                return cand

    out = []
    for s in d.steps:
        binds = {n: rename_vars(t, mapping) for n, t in s.subst}
        for n in sorted(binds):
            for name in _vars_in_order(binds[n]):
                if name not in known:
                    if name in avoid:
                        mapping[name] = fresh(name)
                    known.add(name)
        binds = {n: rename_vars(t, mapping) for n, t in binds.items()}
        out.append(_dc_replace(s, subst=tuple(sorted(binds.items()))))
    return tuple(out)


def _vars_in_order(t: Term):
    if isinstance(t, Var):
        yield t.name
        return
    for a in t.args:
        yield from _vars_in_order(a)


def whisker(sig, d: Diagram, outer: Term, hole: str) -> Diagram:
    """Run a diagram inside a context.  ``outer`` is a term with a variable
    named ``hole`` occurring exactly once; the diagram is spliced in at that
    slot.  Under a contravariant slot the steps replay in reverse order, each
    anchored at its produced region, which is exactly the op-mate reading."""
    occs = [(p, n) for name, p, n in occurrences(sig, outer) if name == hole]
    if len(occs) != 1:
        raise IllTyped(f"context must use the hole {hole} exactly once")
    hpath, hneg = occs[0]
    hole_var = subterm(outer, hpath)
    src_cat = cat_of(sig, d.source)
    if hole_var.cat != src_cat:
        raise IllTyped(
            f"hole category {hole_var.cat} differs from diagram boundary {src_cat}")

    effs = list(_effects(sig, d))
    binds = {}
    for name, p, _ in occurrences(sig, outer):
        if name != hole:
            binds.setdefault(name, Var(name, subterm(outer, p).cat))

    steps = []
    seq = effs if not hneg else list(reversed(effs))
    for _, s, t_pre, eff in seq:
        if not hneg:
            plug = t_pre
            region = anchor_region(sig, eff.plc_m)
        else:
            plug = eff.term
            region = anchor_region(sig, eff.plc_p)
        binds[hole] = plug
        amb, anchors = instantiate_anchored(sig, outer, binds, d.ambient_op)
        absreg = absolutize_region(sig, anchors[hole][0], region)
        path, off = canonical_pos(sig, amb, *absreg)
        steps.append(_dc_replace(s, path=path, offset=off))

    binds[hole] = d.source if not hneg else target(sig, d)
    source0, _ = instantiate_anchored(sig, outer, binds, d.ambient_op)
    return build_diagram(sig, source0, steps, d.ambient_op)


def op_dual(sig, d: Diagram) -> Diagram:
    """Reverse a diagram through the contravariant reading: same generators,
    directions, and substitutions; steps reversed and re-anchored at their
    produced regions; the ambient parity flag toggles."""
    effs = list(_effects(sig, d))
    tgt = effs[-1][3].term if effs else d.source
    new_steps = []
    for _, s, _, eff in reversed(effs):
        region = anchor_region(sig, eff.plc_p)
        path, off = canonical_pos(sig, eff.term, *region)
        new_steps.append(_dc_replace(s, path=path, offset=off))
    return Diagram(retag(tgt), tuple(new_steps), not d.ambient_op)


def ek_graph(sig, d: Diagram) -> dict:
    """The explicit strand graph: boundary ports, per-step interface ports,
    within-step arcs, and propagation edges.  Every vertex has degree at most
    two, so components are paths or cycles."""
    vertices, edges = [], []
    live = {}
    for _, p, _ in occurrences(sig, d.source):
        v = ("src", p)
        vertices.append(v)
        live[p] = v
    term = d.source
    for i, s, t_pre, eff in _effects(sig, d):
        new_live = {}
        for old, new, via in eff.moves:
            if via is None:
                new_live[new] = live[old]
            else:
                u, w = ("in", i, old), ("out", i, new)
                vertices += [u, w]
                edges.append((live[old], u))
                edges.append((u, w))
                new_live[new] = w
        for a, b in eff.joins:
            ua, ub = ("in", i, a), ("in", i, b)
            vertices += [ua, ub]
            edges += [(live[a], ua), (live[b], ub), (ua, ub)]
        for a, b in eff.births:
            wa, wb = ("out", i, a), ("out", i, b)
            vertices += [wa, wb]
            edges.append((wa, wb))
            new_live[a] = wa
            new_live[b] = wb
        live = new_live
        term = eff.term
    for _, p, _ in occurrences(sig, term):
        v = ("tgt", p)
        vertices.append(v)
        edges.append((live[p], v))

    rank = {"src": 0, "in": 1, "out": 2, "tgt": 3}
    def vkey(v):
        return (rank[v[0]],) + tuple(v[1:])
    vertices = sorted(set(vertices), key=vkey)
    edges = sorted({tuple(sorted(e, key=vkey)) for e in edges},
                   key=lambda e: (vkey(e[0]), vkey(e[1])))
    return {"vertices": vertices, "edges": edges}


# ---------------------------------------------------------------------------
# exchange normal form

def _gen_readings(sig, term: Term, gen_name: str, direction: str,
                  base_subst, ambient_neg: bool) -> list:
    """Candidate presentations of a generator on a term: every position where
    the relevant pattern side matches, with variables the match leaves open
    carried over from a base substitution."""
    rec, aliased = sig.resolve_transform(gen_name)
    inverted = (direction == "inv") ^ aliased
    base = dict(base_subst)
    cands = []

    def consider(path, off, binds):
        full = dict(binds)
        for n, t in base.items():
            full.setdefault(n, t)
        cands.append(Step(gen_name, direction, tuple(path), off,
                          tuple(sorted(full.items()))))

    def visit(node, path):
        neg = parity_at(sig, term, tuple(path)) ^ ambient_neg
        pat = rec.lhs if (not inverted) ^ neg else rec.rhs
        if _is_word(sig, node):
            view = word_view(sig, node)
            wcat = sig.functor(node.gen).cod
            for o in range(len(view) + 1):
                for l in range(len(view) - o + 1):
                    if l == 1:
                        continue
                    seg = from_view(sig, wcat, view[o:o + l], neg)
                    for binds in match(sig, pat, seg, neg):
                        consider(path, o, binds)
        else:
            for binds in match(sig, pat, node, neg):
                consider(path, 0, binds)
        if isinstance(node, App):
            for i, a in enumerate(node.args):
                visit(a, path + (i,))

    visit(term, ())
    return cands


def swap_adjacent(sig, term: Term, s1: Step, s2: Step,
                  ambient_neg: bool = False):
    """Reorder consecutive independent steps: [s1, s2] becomes [s2', s1'] with
    the same composite.  Returns None when the two genuinely interact.

    A pair can also come back in the original order with the second step
    rewritten: that is the same exchange read through the other side of the
    naturality square (a component binding the earlier step's output against
    the functor image applied inside it)."""
    try:
        e1 = apply_step_effect(sig, term, s1, ambient_neg)
        t1 = e1.term
        e2 = apply_step_effect(sig, t1, s2, ambient_neg)
    except DinatError:
        return None
    r2 = promote_region(sig, t1, anchor_region(sig, e2.plc_m))
    rp = anchor_region(sig, e1.plc_p)

    pm1 = e1.pmap
    r2_cands = []
    r2_old = pm1.unmap_region(r2)
    if r2_old is not None:
        r2_cands.append(r2_old)
    # the gap left by a pure consumption has a preimage on each side of the
    # consumed block; unmap_region keeps the left one, so try the right too
    if (pm1.k == 0 and pm1.l > 0 and r2[2] == 0
            and tuple(r2[0]) == pm1.path and r2[1] == pm1.o):
        alt = (pm1.path, pm1.o + pm1.l, 0)
        if alt not in r2_cands:
            r2_cands.append(alt)
    best = None
    for r2_old in r2_cands:
        for res in _swap_disjoint(sig, term, s1, s2, e1, e2, r2_old,
                                  ambient_neg):
            # several placements can replay when the gap borders factors of
            # equal shape; order them so every presentation picks the same one
            k = (_step_key(res[1]), _step_key(res[0]))
            if best is None or k < best[0]:
                best = (k, res)
    if best is not None:
        return best[1]

    for v in sorted(e1.anchors_out):
        ains = e1.anchors_in.get(v, [])
        aouts = e1.anchors_out[v]
        if len(ains) != 1 or len(aouts) != 1:
            continue
        out_reg = promote_region(sig, t1, anchor_region(sig, aouts[0]))
        if region_contains(sig, t1, out_reg, r2):
            res = _swap_into_binding(sig, term, s1, s2, e1, e2, v,
                                     ains[0], aouts[0], r2, ambient_neg)
            if res is not None:
                return res

    for v in sorted(e2.anchors_in):
        ains = e2.anchors_in[v]
        aouts = e2.anchors_out.get(v, [])
        if len(ains) != 1 or len(aouts) != 1:
            continue
        in_reg = promote_region(sig, t1, anchor_region(sig, ains[0]))
        if region_contains(sig, t1, in_reg, promote_region(sig, t1, rp)):
            res = _swap_rebind(sig, term, s1, s2, e1, e2, v,
                               ains[0], r2, rp, ambient_neg)
            if res is not None:
                return res
    return None


def _verify_swap(sig, term, s2p, s1p, expect, ambient_neg):
    try:
        t = apply_step(sig, term, s2p, ambient_neg)
        t = apply_step(sig, t, s1p, ambient_neg)
    except DinatError:
        return None
    return (s2p, s1p) if t == expect else None


def _swap_disjoint(sig, term, s1, s2, e1, e2, r2_old, ambient_neg):
    try:
        path, off = canonical_pos(sig, term, *r2_old)
    except (AttributeError, IndexError, TypeError):
        return
    s2p = _dc_replace(s2, path=path, offset=off)
    try:
        e2p = apply_step_effect(sig, term, s2p, ambient_neg)
    except DinatError:
        return
    r1 = promote_region(sig, term, anchor_region(sig, e1.plc_m))
    pm = e2p.pmap
    cands = []
    r1_new = pm.map_region(r1)
    if r1_new is not None:
        cands.append(r1_new)
    # an empty region sitting exactly on a pure insertion point can live on
    # either side of the inserted block; map_region keeps it left, so offer
    # the right-hand placement too and let the replay check decide
    if (pm.l == 0 and pm.k > 0 and r1[2] == 0
            and tuple(r1[0]) == pm.path and r1[1] == pm.o):
        alt = (pm.path, pm.o + pm.k, 0)
        if alt not in cands:
            cands.append(alt)
    for r1_new in cands:
        try:
            path1, off1 = canonical_pos(sig, e2p.term, *r1_new)
        except (AttributeError, IndexError, TypeError):
            continue
        s1p = _dc_replace(s1, path=path1, offset=off1)
        res = _verify_swap(sig, term, s2p, s1p, e2.term, ambient_neg)
        if res is not None:
            yield res


def _apply_inside_binding(sig, value, occ_neg, step, direction, region_len,
                          forward):
    """Apply (or un-apply) a step relative to a standalone binding value."""
    tagged = retag_if(value, occ_neg)
    try:
        path, off = canonical_pos(sig, tagged, step.path, step.offset, region_len)
    except (AttributeError, IndexError, TypeError):
        return None
    rel = _dc_replace(step, path=path, offset=off, direction=direction)
    try:
        eff = apply_step_effect(sig, tagged, rel, occ_neg,
                                _allow_reverse=not forward)
    except DinatError:
        return None
    return retag_if(eff.term, occ_neg), eff


def _swap_into_binding(sig, term, s1, s2, e1, e2, v, a_in, a_out, r2,
                       ambient_neg):
    rel = relativize_region(sig, a_out, r2)
    val = dict(s1.subst)[v]
    upd = _apply_inside_binding(
        sig, val, a_out.neg,
        _dc_replace(s2, path=rel[0], offset=rel[1]),
        s2.direction, e2.matched_len, forward=True)
    if upd is None:
        return None
    val2, _ = upd
    binds1 = dict(s1.subst)
    binds1[v] = val2

    r2_abs = absolutize_region(sig, a_in, rel)
    try:
        path2, off2 = canonical_pos(sig, term, *r2_abs)
    except (AttributeError, IndexError, TypeError):
        return None
    s2p = _dc_replace(s2, path=path2, offset=off2)
    try:
        e2p = apply_step_effect(sig, term, s2p, ambient_neg)
    except DinatError:
        return None

    r1 = promote_region(sig, term, anchor_region(sig, e1.plc_m))
    l1p = _matched_len(sig, s1, e1.neg, binds1)
    try:
        path1, off1 = canonical_pos(sig, e2p.term, r1[0], r1[1], l1p)
    except (AttributeError, IndexError, TypeError):
        return None
    s1p = _dc_replace(s1, path=path1, offset=off1,
                      subst=tuple(sorted(binds1.items())))
    return _verify_swap(sig, term, s2p, s1p, e2.term, ambient_neg)


def _swap_rebind(sig, term, s1, s2, e1, e2, v, a_in, r2, rp, ambient_neg):
    rel = relativize_region(sig, a_in, rp)
    val = dict(s2.subst)[v]
    flip = {"fwd": "inv", "inv": "fwd"}[s1.direction]
    upd = _apply_inside_binding(
        sig, val, a_in.neg,
        _dc_replace(s1, path=rel[0], offset=rel[1]),
        flip, e1.produced_len, forward=False)
    if upd is None:
        return None
    val2, un_eff = upd
    binds2 = dict(s2.subst)
    binds2[v] = val2

    # Anchor s2 at the same spot in the pre-s1 term; the matched length is
    # recomputed from the rebound value.
    P2, O2, _ = r2
    l2p = _matched_len(sig, s2, e2.neg, binds2)
    try:
        path2, off2 = canonical_pos(sig, term, P2, O2, l2p)
    except (AttributeError, IndexError, TypeError):
        return None
    s2p = _dc_replace(s2, path=path2, offset=off2,
                      subst=tuple(sorted(binds2.items())))
    try:
        e2p = apply_step_effect(sig, term, s2p, ambient_neg)
    except DinatError:
        return None
    a_outp = e2p.anchors_out.get(v, [])
    if len(a_outp) != 1:
        return None
    r1_rel = anchor_region(sig, un_eff.plc_p)
    r1_new = absolutize_region(sig, a_outp[0], r1_rel)
    try:
        path1, off1 = canonical_pos(sig, e2p.term, *r1_new)
    except (AttributeError, IndexError, TypeError):
        return None
    s1p = _dc_replace(s1, path=path1, offset=off1)
    return _verify_swap(sig, term, s2p, s1p, e2.term, ambient_neg)


def _matched_len(sig, s: Step, neg: bool, binds: dict) -> int:
    """View length of the step's matched side under the given bindings."""
    gen, aliased = sig.resolve_transform(s.gen)
    inverted = (s.direction == "inv") ^ aliased
    pat_m = gen.lhs if (not inverted) ^ neg else gen.rhs
    return len(word_view(sig, substitute(sig, pat_m, binds, neg)))


def _step_key(s: Step):
    return (s.path, s.offset, s.gen, 0 if s.direction == "fwd" else 1,
            tuple((n, render_term(t)) for n, t in s.subst))


def _term_weight(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(_term_weight(a) for a in t.args)


def _subst_weight(s: Step) -> int:
    return sum(_term_weight(t) for _, t in s.subst)


def _bubble_to_front(sig, t0: Term, steps, idx: int, ambient_neg: bool,
                     prev=None):
    seq = list(steps[: idx + 1])
    terms = [t0]
    for s in seq[:-1]:
        terms.append(apply_step(sig, terms[-1], s, ambient_neg))
    for i in range(idx, 0, -1):
        sw = swap_adjacent(sig, terms[i - 1], seq[i - 1], seq[i], ambient_neg)
        if sw is None:
            sw = _reread_blocker(sig, terms, seq, i, ambient_neg, prev)
        if sw is None:
            return None
        seq[i - 1], seq[i] = sw
    return seq[0], tuple(seq[1:]) + tuple(steps[idx + 1:])


def _reread_blocker(sig, terms, seq, i, ambient_neg, prev):
    """Retry a failed swap after re-presenting the blocking step.

    A component applied on top of material its predecessor produced also
    reads as the functor image applied inside it, and only one of the two
    readings may commute with the step being moved.  Rewrite the blocker
    through its own predecessor, then attempt the swap again.  Inside the
    pending segment the predecessor pair may reorder freely; against the
    already emitted step only a reading change is allowed."""
    if i >= 2:
        fl = swap_adjacent(sig, terms[i - 2], seq[i - 2], seq[i - 1],
                           ambient_neg)
        if fl is None:
            return None
        seq[i - 2], seq[i - 1] = fl
        terms[i - 1] = apply_step(sig, terms[i - 2], seq[i - 2], ambient_neg)
        return swap_adjacent(sig, terms[i - 1], seq[i - 1], seq[i],
                             ambient_neg)
    if prev is not None:
        pt, ps = prev
        fl = swap_adjacent(sig, pt, ps, seq[0], ambient_neg)
        if fl is not None and fl[0] == ps:
            return swap_adjacent(sig, terms[0], fl[1], seq[1], ambient_neg)
    return None


def _noop_canonical(sig, term: Term, gen_name: str, direction: str,
                    ambient_neg: bool) -> Optional[Step]:
    """Least identity presentation of a generator on a term, or None.

    A step whose two sides instantiate to the same view leaves the term
    unchanged, so replay cannot tie it to a position, an extent, or a slot
    in the sequence (identical factors, flattened units).  Every identity
    reading is re-derived from scratch and the (binding size, step key)
    minimum is the canonical one."""
    best = None
    for cand in _gen_readings(sig, term, gen_name, direction, (), ambient_neg):
        try:
            if apply_step(sig, term, cand, ambient_neg) != term:
                continue
        except DinatError:
            continue
        k = (_subst_weight(cand), _step_key(cand))
        if best is None or k < best[0]:
            best = (k, cand)
    return None if best is None else best[1]


def _shed_binding(sig, terms, out, f, ambient_neg):
    """Canonical binding extent for a step about to be emitted after `out`:
    bubble it backward through the emitted prefix (rebind swaps strip
    material the prefix deposited inside its components), then forward
    again to its slot.  The prefix must come back unchanged, otherwise the
    original presentation is kept.  One round trip can expose another
    strippable layer, so run to a fixpoint; a trip that does not shrink the
    binding is discarded so restore paths cannot grow it back."""
    while True:
        g = _shed_binding_once(sig, terms, out, f, ambient_neg)
        if (_subst_weight(g), _step_key(g)) >= (_subst_weight(f),
                                                _step_key(f)):
            return f
        f = g


def _shed_binding_once(sig, terms, out, f, ambient_neg):
    if not out:
        return f
    seq = list(out) + [f]
    j = len(out)
    while j > 0:
        sw = swap_adjacent(sig, terms[j - 1], seq[j - 1], seq[j], ambient_neg)
        if sw is None:
            break
        if sw[0] == seq[j - 1]:
            # the pair did not reorder: sw[1] is the same step read through
            # the other side of the exchange; prefer the reading that binds
            # less material, which is the one every presentation can reach
            cur = (_subst_weight(seq[j]), _step_key(seq[j]))
            alt = (_subst_weight(sw[1]), _step_key(sw[1]))
            if alt < cur:
                seq[j] = sw[1]
            break
        seq[j - 1], seq[j] = sw
        j -= 1
    while j < len(out):
        sw = swap_adjacent(sig, terms[j], seq[j], seq[j + 1], ambient_neg)
        if sw is None:
            return f
        seq[j], seq[j + 1] = sw
        j += 1
    if seq[: len(out)] != list(out):
        return f
    return seq[-1]


def exchange_normal_form(sig, d: Diagram) -> Diagram:
    """Canonical step order: split off instances of declared-identity
    generators (the strictified unitors), repeatedly move the least movable
    remaining step to the front using composite-preserving adjacent swaps,
    rename every mid-flight variable by first introduction, then slot each
    identity instance back in at the last prefix that supports a reading of
    its generator."""
    reals, noops = [], []
    for s in d.steps:
        rec, _ = sig.resolve_transform(s.gen)
        if rec.iso and isinstance(rec.lhs, Var) and rec.lhs == rec.rhs:
            noops.append(s)
        else:
            reals.append(s)
    steps = tuple(reals)
    term = d.source
    out = []
    terms = [term]
    while steps:
        prev = (terms[-2], out[-1]) if out else None
        best = None
        for idx in range(len(steps)):
            res = _bubble_to_front(sig, term, steps, idx, d.ambient_op, prev)
            if res is None:
                continue
            front = _shed_binding(sig, terms, out, res[0], d.ambient_op)
            key = _step_key(front)
            if best is None or key < best[0]:
                best = (key, (front, res[1]))
        front, rest = best[1]
        out.append(front)
        term = apply_step(sig, term, front, d.ambient_op)
        terms.append(term)
        steps = rest
    renamed = _canonical_fresh_names(sig, d.source, out)
    if not noops:
        return Diagram(d.source, tuple(renamed), d.ambient_op)
    prefixes = [d.source]
    for s in renamed:
        prefixes.append(apply_step(sig, prefixes[-1], s, d.ambient_op))
    slotted = []
    for s in noops:
        for j in range(len(prefixes) - 1, -1, -1):
            c = _noop_canonical(sig, prefixes[j], s.gen, s.direction,
                                d.ambient_op)
            if c is not None:
                slotted.append((j, c))
                break
        else:
            # no identity reading survives the reordering; keep the original
            # interleaving instead of emitting an unreplayable sequence
            return Diagram(d.source, tuple(d.steps), d.ambient_op)
    final = []
    for j, s in enumerate(renamed + [None]):
        at = sorted((c for k, c in slotted if k == j), key=_step_key)
        final.extend(at)
        if s is not None:
            final.append(s)
    return Diagram(d.source, tuple(final), d.ambient_op)


def _canonical_fresh_names(sig, source: Term, steps):
    """Rename every mid-flight variable to base'k in first-introduction
    order.  The assignment is total and injective over mid-flight names, so
    applying it simultaneously cannot capture and re-running it is the
    identity."""
    ambient = set(term_vars(source))
    seen = set(ambient)
    order = []
    for s in steps:
        binds = dict(s.subst)
        for n in sorted(binds):
            for name in _vars_in_order(binds[n]):
                if name not in seen:
                    seen.add(name)
                    order.append(name)
    mapping = {}
    taken = set(ambient)
    counter = 0
    for name in order:
        base = name.split("'")[0] or name
        while True:
            counter += 1
            cand = f"{base}'{counter}"
            if cand not in taken:
                break
        taken.add(cand)
        mapping[name] = cand
    out = []
    for s in steps:
        binds = {n: rename_vars(t, mapping) for n, t in s.subst}
        out.append(_dc_replace(s, subst=tuple(sorted(binds.items()))))
    return out


def diagrams_equal(sig, d1: Diagram, d2: Diagram) -> bool:
    """Equality up to exchange and fresh-variable names."""
    if d1.ambient_op != d2.ambient_op or d1.source != d2.source:
        return False
    if d1.steps == d2.steps:
        return True
    n1 = exchange_normal_form(sig, d1)
    n2 = exchange_normal_form(sig, d2)
    return n1.steps == n2.steps
