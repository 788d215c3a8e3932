"""Equational rewriting over diagrams.

A proof is a list of explicit steps: a Rewrite cites an equation and says
exactly where its chosen side sits inside the current diagram (a MatchHint),
a DinatSlide moves one step to the partner leg of a consume/produce variable,
and Renormalize replaces the diagram by its exchange normal form.  The
checker verifies hints instead of searching; search_rewrite fills small gaps.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace as _dc_replace

from .errors import (
    BoundaryMismatch,
    DinatError,
    MissingAssignment,
    NotConvex,
    NotEKAdjacent,
    StepMismatch,
    UnknownGenerator,
)
from .terms import (
    App,
    Term,
    Var,
    match,
    parity_at,
    render_term,
    retag_if,
    substitute,
    subterm,
    word_view,
)
from .terms import Anchor, from_view
from .diagram import (
    Diagram,
    Step,
    _apply_inside_binding,
    _is_word,
    _matched_len,
    absolutize_region,
    anchor_region,
    apply_step,
    apply_step_effect,
    build_diagram,
    canonical_pos,
    diagram_context,
    diagrams_equal,
    exchange_normal_form,
    promote_region,
    region_contains,
    relativize_region,
    render_step,
    swap_adjacent,
    target,
)


def _norm_subst(subst):
    if isinstance(subst, dict):
        return tuple(sorted(subst.items()))
    return tuple(sorted(tuple(subst)))


@dataclass(frozen=True)
class MatchHint:
    """Where an equation side sits inside a diagram: which step indices form
    the side's steps, the position its boundary embeds at, and the values of
    its variables.  ``anchor`` places step-less sides between two steps."""

    indices: tuple = ()
    anchor: int = 0
    pos: tuple = ((), 0)
    subst: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "pos",
                           (tuple(self.pos[0]), int(self.pos[1])))
        object.__setattr__(self, "subst", _norm_subst(self.subst))

    @property
    def bindings(self):
        return dict(self.subst)


@dataclass(frozen=True)
class SubMatch:
    diagram: Diagram  # the input with the matched steps made contiguous
    start: int
    count: int
    pos: tuple
    subst: tuple


@dataclass(frozen=True)
class Rewrite:
    equation: str
    direction: str = "lr"
    hint: MatchHint = field(default_factory=MatchHint)


@dataclass(frozen=True)
class DinatSlide:
    dinat: int
    slid: int


@dataclass(frozen=True)
class Renormalize:
    pass


@dataclass(frozen=True)
class ProofScript:
    theory: str
    claim: "Equation"
    steps: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))


@dataclass(frozen=True)
class StepTrace:
    index: int
    kind: str
    detail: str
    ok: bool
    error: str = ""


@dataclass(frozen=True)
class ProofReport:
    name: str
    ok: bool
    steps: tuple
    citations: tuple
    message: str = ""


def _prefix_terms(sig, d: Diagram):
    out = [d.source]
    for s in d.steps:
        out.append(apply_step(sig, out[-1], s, d.ambient_op))
    return out


def _compact_block(sig, d: Diagram, indices):
    """Bubble the selected steps together (preserving their relative order)
    using structural exchanges only.  An in-between outsider that can be
    moved neither before nor after the selection makes it non-convex."""
    steps = list(d.steps)
    flags = [i in set(indices) for i in range(len(steps))]
    terms = _prefix_terms(sig, d)

    def swap_at(p):
        # swap steps[p], steps[p+1]; composite and later terms are unchanged
        res = swap_adjacent(sig, terms[p], steps[p], steps[p + 1], d.ambient_op)
        if res is None:
            return False
        steps[p], steps[p + 1] = res
        flags[p], flags[p + 1] = flags[p + 1], flags[p]
        terms[p + 1] = apply_step(sig, terms[p], steps[p], d.ambient_op)
        return True

    while True:
        sel = [i for i, f in enumerate(flags) if f]
        gaps = [g for g in range(sel[0], sel[-1]) if not flags[g]]
        if not gaps:
            d2 = Diagram(d.source, tuple(steps), d.ambient_op)
            return d2, sel[0], terms
        g = gaps[0]
        p = g
        while p > 0 and flags[p - 1] and swap_at(p - 1):
            p -= 1
        if not (p == 0 or not flags[p - 1]):
            while p + 1 < len(steps) and flags[p + 1] and swap_at(p):
                p += 1
            if p + 1 < len(steps) and flags[p + 1]:
                raise NotConvex(
                    f"step {g} is pinned between the selected steps")


def _transport_pos(sig, pat_term: Term, path, offset, sigma):
    """Map a canonical position on a pattern term through a substitution.
    Word slots shift when earlier variable factors stretch or vanish; a
    position naming a variable factor whose image is not one factor is
    re-expressed at the word level."""
    out = []
    cur = pat_term
    path = tuple(path)
    for n, comp in enumerate(path):
        if _is_word(sig, cur):
            view = word_view(sig, cur)
            shift = 0
            for f in view[:comp]:
                if isinstance(f, Var) and f.name in sigma:
                    shift += len(word_view(sig, sigma[f.name])) - 1
            f = view[comp]
            if (n == len(path) - 1 and isinstance(f, Var) and f.name in sigma
                    and len(word_view(sig, sigma[f.name])) != 1):
                return tuple(out), comp + shift
            out.append(comp + shift)
            cur = f
        else:
            out.append(comp)
            cur = cur.args[comp]
    if _is_word(sig, cur):
        view = word_view(sig, cur)
        shift = sum(
            len(word_view(sig, sigma[f.name])) - 1
            for f in view[:offset] if isinstance(f, Var) and f.name in sigma)
        return tuple(out), offset + shift
    return tuple(out), offset


def _embed_pos(sig, t_cur: Term, P, O, m_inst, rel_path, rel_off):
    """Absolutize a position taken relative to an instantiated pattern term
    occupying factors [O, O+m_inst) of the word at P (or the node at P)."""
    node = subterm(t_cur, P)
    rel_path = tuple(rel_path)
    if _is_word(sig, node):
        if rel_path == ():
            if m_inst == 1:
                return P + (O,), rel_off
            return P, O + rel_off
        if m_inst == 1:
            return P + (O,) + rel_path, rel_off
        return P + (O + rel_path[0],) + rel_path[1:], rel_off
    return P + rel_path, rel_off


def _transport_step(sig, pat_term, ps: Step, sigma, t_cur, P, O, ambient_neg):
    inst = substitute(sig, pat_term, sigma)
    m_inst = len(word_view(sig, inst))
    rel_path, rel_off = _transport_pos(sig, pat_term, ps.path, ps.offset, sigma)
    abs_path, abs_off = _embed_pos(sig, t_cur, P, O, m_inst, rel_path, rel_off)
    binds = {v: substitute(sig, val, sigma) for v, val in ps.subst}
    neg = parity_at(sig, t_cur, abs_path) ^ ambient_neg
    exp = _dc_replace(ps, path=abs_path, offset=abs_off,
                      subst=tuple(sorted(binds.items())))
    length = _matched_len(sig, exp, neg, binds)
    cp, co = canonical_pos(sig, t_cur, abs_path, abs_off, length)
    return _dc_replace(exp, path=cp, offset=co)


def _region_matches(sig, t: Term, P, O, inst: Term, neg: bool) -> bool:
    try:
        node = subterm(t, P)
    except (IndexError, TypeError, AttributeError):
        return False
    want = retag_if(inst, neg)
    if _is_word(sig, node):
        seg = word_view(sig, want)
        fl = word_view(sig, node)
        return 0 <= O and O + len(seg) <= len(fl) and \
            tuple(fl[O:O + len(seg)]) == tuple(seg)
    return O == 0 and node == want


def match_subdiagram(sig, d: Diagram, pattern: Diagram,
                     hint: MatchHint) -> SubMatch:
    """Verify that the hinted steps of ``d`` are ``pattern``'s steps placed at
    the hinted position under the hinted substitution."""
    from .diagram import op_dual
    if pattern.ambient_op != d.ambient_op:
        pattern = op_dual(sig, pattern)
    k = len(pattern.steps)
    idx = hint.indices
    if len(idx) != k:
        raise StepMismatch(
            f"pattern has {k} steps, hint selects {len(idx)}")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise StepMismatch("hint indices must be strictly increasing")
    if idx and not (0 <= idx[0] and idx[-1] < len(d.steps)):
        raise StepMismatch("hint indices out of range")
    if k == 0:
        b = hint.anchor
        if not 0 <= b <= len(d.steps):
            raise StepMismatch(f"anchor {b} out of range")
        d2, terms = d, _prefix_terms(sig, d)
    else:
        d2, b, terms = _compact_block(sig, d, idx)

    sigma = hint.bindings
    needed = [n for n, _ in diagram_context(sig, pattern)]
    missing = [n for n in needed if n not in sigma]
    if missing:
        raise MissingAssignment(
            "hint leaves pattern variables unassigned: " + ", ".join(missing))

    P, O = hint.pos
    t_b = terms[b]
    try:
        neg_emb = parity_at(sig, t_b, P) ^ d.ambient_op
    except (IndexError, TypeError, AttributeError):
        raise BoundaryMismatch(f"no position {list(P)} in the boundary term")
    inst_src = substitute(sig, pattern.source, sigma)
    if not _region_matches(sig, t_b, P, O, inst_src, neg_emb):
        raise BoundaryMismatch(
            f"pattern boundary {render_term(inst_src)} does not sit at "
            f"{list(P)}+{O}")

    pat_terms = _prefix_terms(sig, pattern)
    t_cur = t_b
    for j in range(k):
        exp = _transport_step(sig, pat_terms[j], pattern.steps[j], sigma,
                              t_cur, P, O, d.ambient_op)
        got = d2.steps[b + j]
        if exp != got:
            raise StepMismatch(
                f"step {b + j}: expected {render_step(exp)}, "
                f"found {render_step(got)}")
        t_cur = apply_step(sig, t_cur, got, d.ambient_op)
    return SubMatch(d2, b, k, (tuple(P), O), _norm_subst(sigma))


def _resolve_equation(sig, equation, lemmas=None):
    if not isinstance(equation, str):
        return equation
    if lemmas and equation in lemmas:
        return lemmas[equation]
    if equation in sig.equations:
        return sig.equations[equation]
    raise UnknownGenerator(f"no equation {equation}")


def rewrite(sig, d: Diagram, equation, direction: str = "lr",
            hint: MatchHint | None = None, lemmas=None) -> Diagram:
    """Replace one embedded occurrence of an equation side by the other side.
    The boundary is preserved exactly; the result is revalidated, so a
    replacement that closes a strand loop raises EKCycle."""
    from .diagram import op_dual
    eq = _resolve_equation(sig, equation, lemmas)
    if direction not in ("lr", "rl"):
        raise StepMismatch(f"direction must be lr or rl, not {direction}")
    pattern = eq.left if direction == "lr" else eq.right
    repl = eq.right if direction == "lr" else eq.left
    if pattern.ambient_op != d.ambient_op:
        pattern = op_dual(sig, pattern)
        repl = op_dual(sig, repl)
    m = match_subdiagram(sig, d, pattern, hint or MatchHint())
    d2, b, k = m.diagram, m.start, m.count
    sigma = dict(m.subst)

    used = {n for n, _ in diagram_context(sig, d2)}
    used.update(sigma_var for v in sigma.values()
                for sigma_var in _term_var_names(v))
    # introduced variables shared by name with the matched side keep their
    # values (they can occur in the target); the rest are renamed fresh
    sigma_r = {}
    for name, cat in diagram_context(sig, repl):
        if name in sigma:
            sigma_r[name] = sigma[name]
            continue
        base = name.split("'")[0]
        n = 1
        cand = f"{base}'{n}"
        while cand in used:
            n += 1
            cand = f"{base}'{n}"
        used.add(cand)
        sigma_r[name] = Var(cand, cat)

    P, O = m.pos
    terms = _prefix_terms(sig, d2)
    t_cur = terms[b]
    rep_terms = _prefix_terms(sig, repl)
    new_block = []
    for j, ps in enumerate(repl.steps):
        st = _transport_step(sig, rep_terms[j], ps, sigma_r, t_cur, P, O,
                             d2.ambient_op)
        new_block.append(st)
        t_cur = apply_step(sig, t_cur, st, d2.ambient_op)

    new_steps = list(d2.steps[:b]) + new_block + list(d2.steps[b + k:])
    out = build_diagram(sig, d2.source, new_steps, ambient_op=d2.ambient_op)
    if target(sig, out) != target(sig, d2):
        raise BoundaryMismatch("rewrite changed the boundary")
    return out


def _term_var_names(t: Term):
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from _term_var_names(a)


def _anchor_at(template: Anchor, region) -> Anchor:
    P, o, l = region
    return Anchor(template.kind, tuple(P), o, l, template.neg, template.value)


def dinat_slide(sig, d: Diagram, dinat: int, slid: int) -> Diagram:
    """Move the slid step to the partner occurrence of a consume/produce
    variable of the dinatural step, rebinding that variable.  The two steps
    are first made adjacent by structural exchanges."""
    n = len(d.steps)
    if not (0 <= dinat < n and 0 <= slid < n) or dinat == slid:
        raise NotEKAdjacent(f"no step pair ({dinat}, {slid})")
    gen, _ = sig.resolve_transform(d.steps[dinat].gen)
    consume = slid < dinat
    want = "consume" if consume else "produce"
    dvars = sorted(v for v, kind in gen.kinds.items() if kind == want)
    if not dvars:
        raise NotEKAdjacent(
            f"step {dinat} ({gen.name}) has no {want} variable")

    steps = list(d.steps)
    terms = _prefix_terms(sig, d)
    j, i = slid, dinat

    def swap_at(p):
        res = swap_adjacent(sig, terms[p], steps[p], steps[p + 1], d.ambient_op)
        if res is None:
            raise NotEKAdjacent(
                f"step {slid} cannot be brought next to step {dinat}")
        steps[p], steps[p + 1] = res
        terms[p + 1] = apply_step(sig, terms[p], steps[p], d.ambient_op)

    if consume:
        while j < i - 1:
            swap_at(j)
            j += 1
        b = i - 1
        pair = _slide_consume(sig, terms[b], steps[b], steps[b + 1], dvars,
                              d.ambient_op)
    else:
        while j > i + 1:
            swap_at(j - 1)
            j -= 1
        b = i
        pair = _slide_produce(sig, terms[b], steps[b], steps[b + 1], dvars,
                              d.ambient_op)
    if pair is None:
        raise NotEKAdjacent(
            f"step {slid} is not wired to a paired port of step {dinat}")
    steps[b], steps[b + 1] = pair
    out = build_diagram(sig, d.source, steps, ambient_op=d.ambient_op)
    if target(sig, out) != target(sig, d):
        raise NotEKAdjacent("slide failed to preserve the composite")
    return out


def _slide_consume(sig, t0, sj: Step, si: Step, dvars, ambient_neg):
    """Block [sj, si] where si caps a pair of strands; sj acts inside one
    leg.  Returns [sj', si'] with sj' on the other leg."""
    try:
        ej = apply_step_effect(sig, t0, sj, ambient_neg)
        t1 = ej.term
        ei = apply_step_effect(sig, t1, si, ambient_neg)
    except DinatError:
        return None
    rpj = anchor_region(sig, ej.plc_p)
    for c in dvars:
        legs = ei.anchors_in.get(c, [])
        if len(legs) != 2:
            continue
        for a_idx, legA in enumerate(legs):
            if not region_contains(sig, t1, anchor_region(sig, legA), rpj):
                continue
            legB = legs[1 - a_idx]
            v_post = dict(si.subst).get(c)
            if v_post is None:
                continue
            rel = relativize_region(sig, legA, rpj)
            flip = {"fwd": "inv", "inv": "fwd"}[sj.direction]
            upd = _apply_inside_binding(
                sig, v_post, legA.neg,
                _dc_replace(sj, path=rel[0], offset=rel[1]),
                flip, ej.produced_len, forward=False)
            if upd is None:
                continue
            v_pre, _ = upd
            legB_t0 = ej.pmap.unmap_region(anchor_region(sig, legB))
            if legB_t0 is None:
                continue
            absr = absolutize_region(sig, _anchor_at(legB, legB_t0), rel)
            try:
                pj, oj = canonical_pos(sig, t0, *absr)
            except (AttributeError, IndexError, TypeError):
                continue
            sjp = _dc_replace(sj, path=pj, offset=oj)
            binds_i = dict(si.subst)
            binds_i[c] = v_pre
            ri = promote_region(sig, t1, anchor_region(sig, ei.plc_m))
            try:
                t0p = apply_step(sig, t0, sjp, ambient_neg)
                li = _matched_len(sig, si, ei.neg, binds_i)
                pi, oi = canonical_pos(sig, t0p, ri[0], ri[1], li)
            except DinatError:
                continue
            except (AttributeError, IndexError, TypeError):
                continue
            sip = _dc_replace(si, path=pi, offset=oi,
                              subst=tuple(sorted(binds_i.items())))
            return sjp, sip
    return None


def _slide_produce(sig, t0, si: Step, sj: Step, dvars, ambient_neg):
    """Block [si, sj] where si cups a pair of strands; sj acts inside one
    leg.  Returns [si', sj'] with sj' on the other leg."""
    try:
        ei = apply_step_effect(sig, t0, si, ambient_neg)
        t1 = ei.term
        ej = apply_step_effect(sig, t1, sj, ambient_neg)
    except DinatError:
        return None
    rmj = promote_region(sig, t1, anchor_region(sig, ej.plc_m))
    for c in dvars:
        legs = ei.anchors_out.get(c, [])
        if len(legs) != 2:
            continue
        for a_idx, legA in enumerate(legs):
            if not region_contains(sig, t1, anchor_region(sig, legA), rmj):
                continue
            v_old = dict(si.subst).get(c)
            if v_old is None:
                continue
            rel = relativize_region(sig, legA, rmj)
            upd = _apply_inside_binding(
                sig, v_old, legA.neg,
                _dc_replace(sj, path=rel[0], offset=rel[1]),
                sj.direction, ej.matched_len, forward=True)
            if upd is None:
                continue
            v_new, fwd_eff = upd
            binds_i = dict(si.subst)
            binds_i[c] = v_new
            sip = _dc_replace(si, subst=tuple(sorted(binds_i.items())))
            try:
                eip = apply_step_effect(sig, t0, sip, ambient_neg)
            except DinatError:
                continue
            legsp = eip.anchors_out.get(c, [])
            if len(legsp) != 2:
                continue
            legBp = legsp[1 - a_idx]
            relp = anchor_region(sig, fwd_eff.plc_p)
            absr = absolutize_region(sig, legBp, relp)
            try:
                pj, oj = canonical_pos(sig, eip.term, *absr)
            except (AttributeError, IndexError, TypeError):
                continue
            sjp = _dc_replace(sj, path=pj, offset=oj)
            return sip, sjp
    return None


def check_proof(script: ProofScript, theory=None, lemmas=None) -> ProofReport:
    """Fold the script's steps over claim.left; pass iff the result equals
    claim.right up to exchange.  Failures are recorded per step."""
    from .signature import Signature, load_theory
    sig = theory if theory is not None else load_theory(script.theory)
    lemmas = dict(lemmas or {})
    cur = script.claim.left
    traces = []
    citations = []
    ok = True
    message = ""
    for i, ps in enumerate(script.steps):
        if not ok:
            break
        try:
            if isinstance(ps, Rewrite):
                detail = f"{ps.equation} {ps.direction}"
                cur = rewrite(sig, cur, ps.equation, ps.direction, ps.hint,
                              lemmas=lemmas)
                if ps.equation not in citations:
                    citations.append(ps.equation)
            elif isinstance(ps, DinatSlide):
                detail = f"slide {ps.slid} across {ps.dinat}"
                cur = dinat_slide(sig, cur, ps.dinat, ps.slid)
            elif isinstance(ps, Renormalize):
                detail = "renormalize"
                cur = exchange_normal_form(sig, cur)
            else:
                raise StepMismatch(f"unknown proof step {ps!r}")
            traces.append(StepTrace(i, type(ps).__name__, detail, True))
        except DinatError as exc:
            traces.append(StepTrace(i, type(ps).__name__, str(ps), False,
                                    f"{type(exc).__name__}: {exc}"))
            ok = False
            message = f"step {i} failed: {exc}"
    if ok:
        if diagrams_equal(sig, cur, script.claim.right):
            message = "claim established"
        else:
            ok = False
            message = "steps exhausted without reaching the right side"
    return ProofReport(script.name or script.claim.name, ok, tuple(traces),
                       tuple(citations), message)


# ---------------------------------------------------------------------------
# enumeration and search

def applicable_steps(sig, term: Term, ambient_neg: bool = False,
                     gens=None) -> list:
    """All canonical-position steps that fire on a term, in a deterministic
    order.  Inverse directions are included for invertible generators.
    Produce-only variables are left unassigned; build_diagram fills them."""
    names = sorted(gens) if gens is not None else sorted(sig.transforms)
    out = []
    seen = set()

    def emit(gen, direction, path, off, binds):
        s = Step(gen, direction, path, off, binds)
        key = (s.gen, s.direction, s.path, s.offset, s.subst)
        if key not in seen:
            seen.add(key)
            out.append(s)

    def visit(node, path):
        neg = parity_at(sig, term, path) ^ ambient_neg
        word = _is_word(sig, node)
        view = word_view(sig, node)
        for name in names:
            rec = sig.transform(name)
            dirs = ("fwd", "inv") if rec.iso else ("fwd",)
            for direction in dirs:
                inverted = direction == "inv"
                pat = rec.lhs if (not inverted) ^ neg else rec.rhs
                if word:
                    L = len(view)
                    wcat = sig.functor(node.gen).cod
                    for o in range(L + 1):
                        for l in range(L - o + 1):
                            if l == 1:
                                continue
                            seg = from_view(sig, wcat, view[o:o + l], neg)
                            for binds in match(sig, pat, seg, neg):
                                emit(name, direction, path, o, binds)
                else:
                    for binds in match(sig, pat, node, neg):
                        emit(name, direction, path, 0, binds)
                    parent_word = path and _is_word(
                        sig, subterm(term, path[:-1]))
                    cat = _cat_of_node(sig, node)
                    if not parent_word and sig.tensor_of(cat):
                        empty = from_view(sig, cat, [], neg)
                        gaps = (0,) if empty == node else (0, 1)
                        for o in gaps:
                            for binds in match(sig, pat, empty, neg):
                                emit(name, direction, path, o, binds)
        if isinstance(node, App):
            for k, a in enumerate(node.args):
                visit(a, path + (k,))

    visit(term, ())
    return out


def _cat_of_node(sig, node):
    if isinstance(node, Var):
        return node.cat
    return sig.functor(node.gen).cod


def _merge_binds(base, extra):
    out = dict(base)
    for k, v in extra.items():
        if k in out and out[k] != v:
            return None
        out[k] = v
    return out


def _infer_hints(sig, d: Diagram, pattern: Diagram):
    """Deterministically enumerate plausible MatchHints for a pattern inside
    a diagram; candidates are verified by the caller."""
    k = len(pattern.steps)
    terms = _prefix_terms(sig, d)
    starts = range(len(d.steps) + 1) if k == 0 else range(len(d.steps) - k + 1)
    for b in starts:
        if k and any(
                d.steps[b + j].gen != pattern.steps[j].gen
                or d.steps[b + j].direction != pattern.steps[j].direction
                for j in range(k)):
            continue
        sigma0 = {}
        bad = False
        for j in range(k):
            pb = dict(pattern.steps[j].subst)
            ab = dict(d.steps[b + j].subst)
            for v, pv in sorted(pb.items()):
                av = ab.get(v)
                if av is None:
                    bad = True
                    break
                found = False
                for cand in match(sig, pv, av):
                    merged = _merge_binds(sigma0, cand)
                    if merged is not None:
                        sigma0 = merged
                        found = True
                        break
                if not found:
                    bad = True
                    break
            if bad:
                break
        if bad:
            continue
        t_b = terms[b]
        for P, O, seg, neg in _regions(sig, t_b, d.ambient_op):
            for cand in match(sig, pattern.source, seg, neg):
                sigma = _merge_binds(sigma0, cand)
                if sigma is None:
                    continue
                needed = [n for n, _ in diagram_context(sig, pattern)]
                if any(n not in sigma for n in needed):
                    continue
                if k == 0:
                    yield MatchHint((), b, (P, O), sigma)
                else:
                    yield MatchHint(tuple(range(b, b + k)), 0, (P, O), sigma)


def _regions(sig, term: Term, ambient_neg: bool):
    """Canonical (path, offset, subject, parity) candidates for embedding a
    pattern boundary."""
    def visit(node, path):
        neg = parity_at(sig, term, path) ^ ambient_neg
        if _is_word(sig, node):
            view = word_view(sig, node)
            cat = sig.functor(node.gen).cod
            L = len(view)
            for o in range(L + 1):
                for l in range(L - o + 1):
                    if l == 1:
                        continue
                    yield path, o, from_view(sig, cat, view[o:o + l], neg), neg
        else:
            yield path, 0, node, neg
            parent_word = path and _is_word(sig, subterm(term, path[:-1]))
            cat = _cat_of_node(sig, node)
            if not parent_word and sig.tensor_of(cat):
                empty = from_view(sig, cat, [], neg)
                if empty != node:
                    for o in (0, 1):
                        yield path, o, empty, neg
        if isinstance(node, App):
            for kk, a in enumerate(node.args):
                yield from visit(a, path + (kk,))

    yield from visit(term, ())


def search_rewrite(d_from: Diagram, d_to: Diagram, depth_limit: int,
                   theory) -> ProofScript | None:
    """Breadth-first search for a proof script from d_from to d_to using
    rewrites and slides; deterministic order, None when exhausted."""
    from .signature import Signature, load_theory
    sig = theory if not isinstance(theory, str) else load_theory(theory)
    tname = getattr(sig, "name", "")
    from .signature import Equation
    claim = Equation("searched", d_from, d_to)

    def key(d):
        nf = exchange_normal_form(sig, d)
        return (render_term(nf.source),
                tuple(render_step(s) for s in nf.steps))

    if diagrams_equal(sig, d_from, d_to):
        return ProofScript(tname, claim, ())
    frontier = [(d_from, ())]
    visited = {key(d_from)}
    for _ in range(depth_limit):
        nxt = []
        for d, script in frontier:
            for move, d2 in _moves(sig, d):
                kk = key(d2)
                if kk in visited:
                    continue
                visited.add(kk)
                s2 = script + (move,)
                if diagrams_equal(sig, d2, d_to):
                    return ProofScript(tname, claim, s2)
                nxt.append((d2, s2))
        frontier = nxt
        if not frontier:
            break
    return None


def _moves(sig, d: Diagram):
    for name in sorted(sig.equations):
        eq = sig.equations[name]
        for direction in ("lr", "rl"):
            pattern = eq.left if direction == "lr" else eq.right
            for hint in _infer_hints(sig, d, pattern):
                try:
                    d2 = rewrite(sig, d, name, direction, hint)
                except DinatError:
                    continue
                yield Rewrite(name, direction, hint), d2
    for i in range(len(d.steps)):
        try:
            gen, _ = sig.resolve_transform(d.steps[i].gen)
        except DinatError:
            continue
        if all(k == "natural" for k in gen.kinds.values()):
            continue
        for j in range(len(d.steps)):
            if j == i:
                continue
            try:
                d2 = dinat_slide(sig, d, i, j)
            except DinatError:
                continue
            yield DinatSlide(i, j), d2
