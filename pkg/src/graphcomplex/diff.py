"""Differential parts, full differentials, and the inter-complex chain maps.

Sign discipline.  Think of a generator as the wedge of its cells, vertices
first (in label order) then edges (in list order); a cell is odd exactly when
its degree contribution is odd.  A degree-one operation acting at a cell
carries the Koszul prefix sign (-1)^(number of odd cells strictly before it);
its output cells sit in place, after which new edges migrate to the front of
the edge list and appended vertices to the end of the vertex list, each
migration crossing odd cells at a sign.  This reproduces the convention that
for even ambient dimension the fresh edge takes the first position in the
edge ordering, and for odd dimension the split vertex is replaced in place.
Degree-zero maps carry no prefix; their output placement follows the
defining displays (replacement edges in place, ordered left to right, fresh
vertices adjoined last).
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import NamedTuple

from .chains import Chain
from .families import (
    ComplexId,
    ComplexSpec,
    FamilyError,
    is_generator,
    spec_of,
)
from .graphs import (
    BLACK,
    DOTTED,
    S_DOTTED,
    SOLID,
    T_DOTTED,
    WAVY,
    WHITE,
    LabeledGraph,
    decode,
)


# ---------------------------------------------------------------------------
# sign helpers


def _odd_colors(spec):
    return frozenset(c for c in spec.colors if spec.vdeg[c] % 2 != 0)


def _odd_kinds(spec):
    return frozenset(k for k in spec.kinds if spec.edeg[k] % 2 != 0)


def _vertex_prefix_sign(spec, g, v):
    odd = _odd_colors(spec)
    cnt = sum(1 for u in range(v) if g.colors[u] in odd)
    return -1 if cnt & 1 else 1


def _edge_prefix_sign(spec, g, ei):
    oddc = _odd_colors(spec)
    oddk = _odd_kinds(spec)
    cnt = sum(1 for c in g.colors if c in oddc)
    cnt += sum(1 for j in range(ei) if g.edges[j][2] in oddk)
    return -1 if cnt & 1 else 1


def _odd_vertices_after(spec, g, v):
    odd = _odd_colors(spec)
    return sum(1 for u in range(v + 1, g.n) if g.colors[u] in odd)


# ---------------------------------------------------------------------------
# differential parts


def _incident_half_edges(g, v):
    out = []
    for i, (t, h, _) in enumerate(g.edges):
        if t == v:
            out.append((i, 0))
        if h == v:
            out.append((i, 1))
    return out


def _split_once(spec, g, v, chosen_set, new_kind, colors_pair):
    """One re-attachment of a split v -> v', v'' with its orientation sign.

    v' keeps the complement, v'' (inserted right after v) receives the
    half-edges in ``chosen_set``; the fresh edge v' -> v'' of ``new_kind`` is
    prepended to the edge list.
    """
    prefix = _vertex_prefix_sign(spec, g, v)
    migrate = 1
    if new_kind in _odd_kinds(spec):
        if _odd_vertices_after(spec, g, v) & 1:
            migrate = -1
    colors = g.colors[:v] + colors_pair + g.colors[v + 1 :]
    edges = [(v, v + 1, new_kind)]
    for i, (t, h, k) in enumerate(g.edges):
        nt = t + 1 if t > v else t
        nh = h + 1 if h > v else h
        if t == v and (i, 0) in chosen_set:
            nt = v + 1
        if h == v and (i, 1) in chosen_set:
            nh = v + 1
        edges.append((nt, nh, k))
    return LabeledGraph(g.n + 1, colors, tuple(edges)), prefix * migrate


def _split_vertex_terms(spec, g, v, new_kind, colors_pair, coeff):
    """All re-attachments of v's half-edges over a split v -> v', v''."""
    halves = _incident_half_edges(g, v)
    for mask in range(1 << len(halves)):
        chosen = frozenset(halves[i] for i in range(len(halves)) if mask >> i & 1)
        graph, sign = _split_once(spec, g, v, chosen, new_kind, colors_pair)
        yield graph, coeff * sign


def _blacken_terms(spec, g, v, coeff):
    """Replace white v by a black vertex plus k fresh white targets.

    The black vertex stays at v's slot; the k white vertices are appended
    last in vertex order and receive fresh solid edges from the black one,
    prepended first in edge order.  Each white needs two redistributed
    half-edges to reach the minimum valence, bounding k.
    """
    halves = _incident_half_edges(g, v)
    val = len(halves)
    prefix = _vertex_prefix_sign(spec, g, v)
    oddk = _odd_kinds(spec)
    oddc = _odd_colors(spec)
    a = _odd_vertices_after(spec, g, v)
    for k in range(0, val // 2 + 1):
        mig = 1
        if WHITE in oddc and (a * k) & 1:
            mig = -mig
        if SOLID in oddk and (a * k) & 1:
            mig = -mig
        base = coeff * prefix * mig * Fraction(1, factorial(k))
        n = g.n + k
        colors = g.colors[:v] + BLACK + g.colors[v + 1 :] + WHITE * k
        new_edges = [(v, g.n + i, SOLID) for i in range(k)]
        # distribute v's half-edges over {black} + k whites; whites need >= 2
        for assign in _distributions(val, k):
            edges = list(new_edges)
            ok = True
            for i, (t, h, kind) in enumerate(g.edges):
                nt, nh = t, h
                for slot, (ei, end) in enumerate(halves):
                    if ei != i:
                        continue
                    tgt = assign[slot]
                    if tgt > 0:
                        w = g.n + tgt - 1
                        if end == 0:
                            if kind == SOLID:
                                ok = False  # whites may not emit solid edges
                            nt = w
                        else:
                            nh = w
                if not ok:
                    break
                edges.append((nt, nh, kind))
            if not ok:
                continue
            yield LabeledGraph(n, colors, tuple(edges)), base


def _distributions(val, k):
    """Assignments of val half-edge slots to {0..k} with >= 2 per 1..k."""
    counts = [0] * (k + 1)
    assign = [0] * val

    def rec(i):
        if i == val:
            if all(counts[j] >= 2 for j in range(1, k + 1)):
                yield tuple(assign)
            return
        # prune: remaining slots must be able to fill deficient whites
        deficit = sum(max(0, 2 - counts[j]) for j in range(1, k + 1))
        if deficit > val - i:
            return
        for tgt in range(k + 1):
            assign[i] = tgt
            counts[tgt] += 1
            yield from rec(i + 1)
            counts[tgt] -= 1
        assign[i] = 0

    yield from rec(0)


_RETYPE_RULES = {
    # family kinds -> list of (from_kind, [(to_kind, sign), ...])
    "two_edge": {SOLID: ((DOTTED, 1),)},
    "four_edge": {
        SOLID: ((T_DOTTED, 1), (S_DOTTED, -1)),
        T_DOTTED: ((WAVY, 1),),
        S_DOTTED: ((WAVY, 1),),
    },
}


def _retype_rules(spec):
    if WAVY in spec.kinds:
        return _RETYPE_RULES["four_edge"]
    return _RETYPE_RULES["two_edge"]


def delta_part(part: str, cid: ComplexId, g: LabeledGraph, site: int) -> Chain:
    """One differential part applied at one site (vertex or edge index)."""
    spec = spec_of(cid)
    if part not in spec.parts:
        raise FamilyError(f"{cid} has no differential part {part!r}")
    out = Chain(cid)
    if part == "vertex_split":
        if not 0 <= site < g.n:
            raise FamilyError(f"vertex {site} out of range")
        if g.colors[site] != BLACK:
            raise FamilyError("vertex_split acts on black vertices")
        kind = SOLID if SOLID in spec.kinds else DOTTED
        for term, coeff in _split_vertex_terms(spec, g, site, kind, BLACK + BLACK, 1):
            out.add_graph(spec, term, coeff)
    elif part == "white_split":
        if not 0 <= site < g.n:
            raise FamilyError(f"vertex {site} out of range")
        if g.colors[site] != WHITE:
            raise FamilyError("white_split acts on white vertices")
        for term, coeff in _split_vertex_terms(
            spec, g, site, DOTTED, WHITE + WHITE, Fraction(1, 2)
        ):
            out.add_graph(spec, term, coeff)
    elif part == "white_blacken":
        if not 0 <= site < g.n:
            raise FamilyError(f"vertex {site} out of range")
        if g.colors[site] != WHITE:
            raise FamilyError("white_blacken acts on white vertices")
        for term, coeff in _blacken_terms(spec, g, site, 1):
            out.add_graph(spec, term, coeff)
    elif part == "edge_retype":
        if not 0 <= site < len(g.edges):
            raise FamilyError(f"edge {site} out of range")
        t, h, k = g.edges[site]
        rules = _retype_rules(spec).get(k, ())
        prefix = _edge_prefix_sign(spec, g, site)
        for to_kind, sgn in rules:
            edges = list(g.edges)
            edges[site] = (t, h, to_kind)
            out.add_graph(spec, LabeledGraph(g.n, g.colors, tuple(edges)), sgn * prefix)
    else:
        raise FamilyError(f"unknown differential part {part!r}")
    return out


def delta(cid: ComplexId, g: LabeledGraph) -> Chain:
    """The full differential of one generator, as a chain in the same family."""
    spec = spec_of(cid)
    if not is_generator(spec, g):
        raise FamilyError(f"not a generator of {cid}: {g!r}")
    out = Chain(cid)
    for part in spec.parts:
        if part in ("vertex_split", "white_split", "white_blacken"):
            want = BLACK if part == "vertex_split" else WHITE
            for v in range(g.n):
                if g.colors[v] == want:
                    out.add_chain(delta_part(part, cid, g, v))
        elif part == "edge_retype":
            for ei in range(len(g.edges)):
                out.add_chain(delta_part(part, cid, g, ei))
    return out


def delta_chain(cid: ComplexId, chain: Chain) -> Chain:
    out = Chain(cid)
    for enc, coeff in chain.terms.items():
        out.add_chain(delta(cid, decode(enc)), coeff)
    return out


# ---------------------------------------------------------------------------
# pre-Lie product and bracket


def pre_lie_insert(cid: ComplexId, a: LabeledGraph, b: LabeledGraph) -> Chain:
    """Sum over vertices of ``a`` of inserting ``b`` and re-attaching edges.

    The orientation convention: b's vertex block replaces the substituted
    vertex in place and b's edges are appended after a's, crossing signs
    accounted for.
    """
    spec = spec_of(cid)
    for graph in (a, b):
        if not is_generator(spec, graph):
            raise FamilyError(f"not a generator of {cid}: {graph!r}")
    oddc = _odd_colors(spec)
    oddk = _odd_kinds(spec)
    out = Chain(cid)
    nb = b.n
    odd_b_edges = sum(1 for e in b.edges if e[2] in oddk)
    for v in range(a.n):
        halves = _incident_half_edges(a, v)
        # b's edge block crosses a's odd suffix vertices on its way to the
        # back of the merged edge list
        suffix_odd = sum(1 for u in range(v + 1, a.n) if a.colors[u] in oddc)
        sign = -1 if (odd_b_edges * suffix_odd) & 1 else 1
        colors = a.colors[:v] + b.colors + a.colors[v + 1 :]
        n = a.n - 1 + nb

        def shift(u):
            return u if u < v else u + nb - 1

        for assign in _functions(len(halves), nb):
            edges = []
            for i, (t, h, k) in enumerate(a.edges):
                nt, nh = shift(t), shift(h)
                for slot, (ei, end) in enumerate(halves):
                    if ei != i:
                        continue
                    w = v + assign[slot]
                    if end == 0:
                        nt = w
                    else:
                        nh = w
                edges.append((nt, nh, k))
            for t, h, k in b.edges:
                edges.append((t + v, h + v, k))
            out.add_graph(spec, LabeledGraph(n, colors, tuple(edges)), sign)
    return out


def _functions(m, n):
    if m == 0:
        yield ()
        return
    idx = [0] * m
    while True:
        yield tuple(idx)
        i = m - 1
        while i >= 0 and idx[i] == n - 1:
            idx[i] = 0
            i -= 1
        if i < 0:
            return
        idx[i] += 1


def graph_degree(cid: ComplexId, g: LabeledGraph) -> int:
    from .families import degree as _degree

    return _degree(spec_of(cid), g)


def lie_bracket(cid: ComplexId, a: LabeledGraph, b: LabeledGraph) -> Chain:
    """[a, b] = a o b - (-1)^{|a||b|} b o a."""
    da, db = graph_degree(cid, a), graph_degree(cid, b)
    out = pre_lie_insert(cid, a, b)
    out.add_chain(pre_lie_insert(cid, b, a), -((-1) ** (da * db)))
    return out


# ---------------------------------------------------------------------------
# chain maps


class MapId(NamedTuple):
    tag: str  # f, s, sprime, z, j, iota, F_t, F_or, mu, inclusion, projection
    src: ComplexId
    dst: ComplexId


_MAP_TABLE = {
    # tag -> (src family, dst family, d offset dst - src)
    "f": ("GC", "dGC", 0),
    "s": ("barGC2edge", "dGC", 0),
    "sprime": ("barGC2edge", "rdGC4edge", 0),
    "z": ("rdGC4edge", "dGC", 0),
    "j": ("hatOGC", "OGC_geq2", 0),
    "iota": ("dGC", "dGC", 0),
    "F_t": ("GC", "GC_t_dd1", 1),
    "F_or": ("GC", "GC_or_dd1", 1),
    "mu": ("GC", "GC_wheeled", 0),
}


def map_id(tag: str, d: int, src_family=None, dst_family=None) -> MapId:
    """Build a MapId; ``d`` is the parameter of the source complex."""
    if tag in ("inclusion", "projection"):
        if src_family is None or dst_family is None:
            raise FamilyError("inclusion/projection need explicit families")
        return MapId(tag, ComplexId(src_family, d), ComplexId(dst_family, d))
    if tag not in _MAP_TABLE:
        raise FamilyError(f"unknown map tag {tag!r}")
    srcf, dstf, off = _MAP_TABLE[tag]
    if src_family is not None:
        srcf = src_family
    if dst_family is not None:
        dstf = dst_family
    return MapId(tag, ComplexId(srcf, d), ComplexId(dstf, d + off))


def _retype_to_solid(spec, g, ei):
    """Edge ei made solid in place, with the edge-operation prefix sign."""
    sign = _edge_prefix_sign(spec, g, ei)
    t, h, _ = g.edges[ei]
    edges = list(g.edges)
    edges[ei] = (t, h, SOLID)
    return LabeledGraph(g.n, g.colors, tuple(edges)), sign


def _relocate_fresh_edge(spec, g, ei):
    """Move the fresh edge (index 0 after a split) to sit just before the
    substituted edge (index ei+1), so that substitutions at different edges
    do not disturb each other's Koszul positions.  Crossing odd edges costs
    a sign when the fresh edge itself is odd."""
    sign = 1
    oddk = _odd_kinds(spec)
    if g.edges[0][2] in oddk:
        crossed = sum(1 for j in range(1, ei + 1) if g.edges[j][2] in oddk)
        if crossed & 1:
            sign = -1
    edges = list(g.edges[1 : ei + 1]) + [g.edges[0]] + list(g.edges[ei + 1 :])
    return LabeledGraph(g.n, g.colors, tuple(edges)), sign, ei


def _insert_target(spec, g, ei):
    """Subdivide edge ei by a bivalent target: tail -> apex <- head-remnant.

    Realized as the single split of the head vertex that sends exactly the
    edge's head half to the fresh vertex, so the orientation sign is the one
    the differential itself would produce.  Returns (graph, sign, new_ei)
    where new_ei indexes the fresh edge in the output.
    """
    g1, s1 = _retype_to_solid(spec, g, ei)
    h = g1.edges[ei][1]
    g2, s2 = _split_once(
        spec, g1, h, frozenset({(ei, 1)}), SOLID, g1.colors[h] * 2
    )
    g3, s3, new_ei = _relocate_fresh_edge(spec, g2, ei)
    return g3, s1 * s2 * s3, new_ei


def _insert_source(spec, g, ei):
    """Subdivide edge ei by a bivalent source: tail-remnant <- apex -> head."""
    g1, s1 = _retype_to_solid(spec, g, ei)
    t = g1.edges[ei][0]
    halves = _incident_half_edges(g1, t)
    chosen = frozenset(hh for hh in halves if hh != (ei, 0))
    g2, s2 = _split_once(spec, g1, t, chosen, SOLID, g1.colors[t] * 2)
    g3, s3, new_ei = _relocate_fresh_edge(spec, g2, ei)
    return g3, s1 * s2 * s3, new_ei


# Relative signs of the bivalent-insertion alternatives, fixed by requiring
# the chain-map identity to hold exactly in this orientation convention.
_SUBST_SIGNS = {
    "s": {DOTTED: ((_insert_target, 1), (_insert_source, 1))},
    "j": {DOTTED: ((_insert_target, 1), (_insert_source, 1))},
    "z": {
        T_DOTTED: ((_insert_target, 1),),
        S_DOTTED: ((_insert_source, -1),),
    },
}


def _expand_substitutions(spec_src, dst_spec, g, table, wavy_sign):
    """Apply the per-edge substitutions of a map, one edge kind at a time."""
    out = []

    def rec(coeff, cur):
        target = None
        for i, (_, _, k) in enumerate(cur.edges):
            if k in table or k == WAVY:
                target = (i, k)
                break
        if target is None:
            out.append((coeff, cur))
            return
        i, k = target
        if k == WAVY:
            for flip_coeff, graph in _wavy_variants(spec_src, cur, i, wavy_sign):
                rec(coeff * flip_coeff, graph)
            return
        for prim, sgn in table[k]:
            g2, s2, _ = prim(spec_src, cur, i)
            rec(coeff * sgn * s2, g2)

    rec(Fraction(1), g)
    return out


def _wavy_variants(spec, g, ei, wavy_sign):
    """Both orientations of a wavy edge, each subdivided into the three-edge
    chain tail -> apex <- mid -> head (a bivalent target then a bivalent
    source inserted on the fresh edge)."""
    t, h, k = g.edges[ei]
    for flip_coeff, graph in ((1, g), (wavy_sign, _flip_edge(g, ei))):
        g1, s1, new_ei = _insert_target(spec, graph, ei)
        g2, s2, _ = _insert_source(spec, g1, new_ei)
        yield flip_coeff * s1 * s2, g2


def _flip_edge(g, ei):
    t, h, k = g.edges[ei]
    edges = list(g.edges)
    edges[ei] = (h, t, k)
    return LabeledGraph(g.n, g.colors, tuple(edges))


def _sprime_expansions(spec_src, g):
    """Dotted edges resolved in place into t-dotted minus s-dotted."""
    out = []

    def rec(coeff, cur):
        tgt = None
        for i, (_, _, k) in enumerate(cur.edges):
            if k == DOTTED:
                tgt = i
                break
        if tgt is None:
            out.append((coeff, cur))
            return
        t, h, _ = cur.edges[tgt]
        for kind, sgn in ((T_DOTTED, 1), (S_DOTTED, -1)):
            edges = list(cur.edges)
            edges[tgt] = (t, h, kind)
            rec(coeff * sgn, LabeledGraph(cur.n, cur.colors, tuple(edges)))

    rec(Fraction(1), g)
    return out


def apply_map(m: MapId, g: LabeledGraph) -> Chain:
    """Apply a chain map to one generator of its source complex."""
    src = spec_of(m.src)
    dst = spec_of(m.dst)
    if not is_generator(src, g):
        raise FamilyError(f"not a generator of {m.src}: {g!r}")
    out = Chain(m.dst)
    tag = m.tag
    if tag == "f":
        sgn = -1 if m.src.d % 2 else 1
        ne = len(g.edges)
        for mask in range(1 << ne):
            edges = []
            rev = 0
            for i, (t, h, _) in enumerate(g.edges):
                if mask >> i & 1:
                    edges.append((h, t, SOLID))
                    rev += 1
                else:
                    edges.append((t, h, SOLID))
            out.add_graph(dst, LabeledGraph(g.n, g.colors, tuple(edges)), sgn**rev)
    elif tag == "mu":
        inner = apply_map(map_id("f", m.src.d), g)
        for enc, coeff in inner.terms.items():
            out.add_graph(dst, decode(enc), coeff)
    elif tag == "iota":
        edges = tuple((h, t, k) for (t, h, k) in g.edges)
        nv, ne = g.n, len(g.edges)
        if m.src.d % 2 == 0:
            sgn = (-1) ** (ne + nv + 1)
        else:
            sgn = (-1) ** (nv + 1)
        out.add_graph(dst, LabeledGraph(g.n, g.colors, edges), sgn)
    elif tag in ("s", "j", "z"):
        wavy_sign = -1 if (m.src.d - 1) % 2 else 1
        for coeff, term in _expand_substitutions(
            src, dst, g, _SUBST_SIGNS[tag], wavy_sign
        ):
            out.add_graph(dst, term, coeff)
    elif tag == "sprime":
        for coeff, term in _sprime_expansions(src, g):
            out.add_graph(dst, term, coeff)
    elif tag in ("F_t", "F_or"):
        # recolor all vertices white (degrees match across the two families),
        # then apply the blackening part, scaled by (-1)^degree
        deg = graph_degree(m.src, g)
        white = LabeledGraph(g.n, WHITE * g.n, g.edges)
        sgn = (-1) ** deg
        for v in range(g.n):
            for term, coeff in _blacken_terms(dst, white, v, 1):
                out.add_graph(dst, term, sgn * coeff)
    elif tag == "inclusion":
        out.add_graph(dst, g, 1)
        if len(out.terms) != 1 or set(out.terms.values()) != {1}:
            raise FamilyError(f"{g!r} does not include into {m.dst}")
    elif tag == "projection":
        out.add_graph(dst, g, 1)
    else:
        raise FamilyError(f"unknown map tag {tag!r}")
    return out


def apply_map_chain(m: MapId, chain: Chain) -> Chain:
    out = Chain(m.dst)
    for enc, coeff in chain.terms.items():
        out.add_chain(apply_map(m, decode(enc)), coeff)
    return out
