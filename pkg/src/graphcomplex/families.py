"""The graph-complex families, defined as data.

Every complex is described by a :class:`ComplexSpec`: which vertex colors and
edge kinds it allows, how each contributes to the cohomological degree, which
valence/connectivity constraints cut out the generators, and which
differential parts act.  The orientation recipe is derived from the degree
data: a vertex color or edge kind whose degree contribution is odd carries an
ordering (permutation parity); flippable kinds reverse direction at the cost
of a uniform per-family sign.

The ``d`` parameter of a :class:`ComplexId` is the ambient cohomological
dimension of the family.  For the two-edge-kind and two-vertex-color models
this is the dimension of the directed complex they resolve, i.e. the families
``hatOGC``, ``barGC2edge``, ``rdGC4edge``, ``oGC3``, ``GC_*_dd1`` at ``d = D``
compute cohomology related to ``GC`` at ``D`` or ``D - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .graphs import (
    BLACK,
    DOTTED,
    S_DOTTED,
    SOLID,
    T_DOTTED,
    WAVY,
    WHITE,
    GraphError,
    LabeledGraph,
    OrientationRecipe,
    has_solid_cycle,
    valence_profile,
)


class ComplexId(NamedTuple):
    family: str
    d: int

    def __str__(self):
        return f"{self.family}:d={self.d}"


class FamilyError(ValueError):
    """Unknown family tag or graph outside the family's universe."""


@dataclass(frozen=True)
class ComplexSpec:
    """A graph-complex family at a fixed dimension parameter."""

    cid: ComplexId
    colors: tuple
    kinds: tuple
    vdeg: dict  # color -> degree contribution per vertex
    edeg: dict  # kind -> degree contribution per edge
    flip_exp: int  # flips of flippable kinds cost (-1)**flip_exp
    min_valence: int = 3
    exact_valence: int | None = None
    max_valence: int | None = None
    no_passing: bool = False
    need_3plus: bool = False  # at least one vertex of valence >= 3
    solid_acyclic: bool = False
    target_need: str = ""  # "", "t", "s", "st", "s|t"
    biv_need: str = ""  # bivalent targets/sources: "", "t", "s", "st", "s|t"
    biv_forbid: str = ""  # forbid: "st" (both) or "s|t" (either)
    wheeled: bool = False
    white_no_out_solid: bool = False
    need_black: bool = False
    need_dotted: bool = False
    need_tdot_or_wavy: bool = False
    simple: bool = False
    relations: str | None = None  # None | "ihx" | "max4"
    parts: tuple = ()
    # degree window for cohomology when the family has unbounded degree
    # ranges at fixed loop order (None: the natural range is finite)
    windowed: bool = False

    @property
    def recipe(self) -> OrientationRecipe:
        return OrientationRecipe(
            ordered_colors=frozenset(c for c in self.colors if self.vdeg[c] % 2 != 0),
            ordered_kinds=frozenset(k for k in self.kinds if self.edeg[k] % 2 != 0),
            flip_kinds=frozenset(k for k in self.kinds if k != SOLID),
            flip_sign=-1 if self.flip_exp % 2 else 1,
        )

    def degree(self, n_by_color: dict, e_by_kind: dict) -> int:
        deg = -self.vdeg[BLACK]
        for c, n in n_by_color.items():
            deg += self.vdeg[c] * n
        for k, e in e_by_kind.items():
            deg += self.edeg[k] * e
        return deg


def degree(spec: ComplexSpec, g: LabeledGraph) -> int:
    """Evaluate the family's affine degree formula on ``g``."""
    n_by_color = {c: g.colors.count(c) for c in spec.colors}
    e_by_kind = dict.fromkeys(spec.kinds, 0)
    for _, _, k in g.edges:
        if k not in e_by_kind:
            raise FamilyError(f"edge kind {k!r} is foreign to {spec.cid}")
        e_by_kind[k] += 1
    for c in g.colors:
        if c not in spec.colors:
            raise FamilyError(f"vertex color {c!r} is foreign to {spec.cid}")
    return spec.degree(n_by_color, e_by_kind)


def is_generator(spec: ComplexSpec, g: LabeledGraph) -> bool:
    """Total predicate: does ``g`` span a generator of the family?"""
    for c in g.colors:
        if c not in spec.colors:
            return False
    kinds_present = set()
    seen_pairs = set()
    for t, h, k in g.edges:
        if k not in spec.kinds:
            return False
        kinds_present.add(k)
        if spec.simple:
            pair = (min(t, h), max(t, h))
            if pair in seen_pairs:
                return False
            seen_pairs.add(pair)
    if not g.is_connected():
        return False
    prof = valence_profile(g)
    any_3plus = False
    for v, rec in enumerate(prof):
        val = rec.valence
        if spec.exact_valence is not None and val != spec.exact_valence:
            return False
        if val < spec.min_valence:
            return False
        if spec.max_valence is not None and val > spec.max_valence:
            return False
        if spec.no_passing and rec.passing:
            return False
        if spec.wheeled and (rec.total_in == 0 or rec.total_out == 0):
            return False
        if spec.white_no_out_solid and g.colors[v] == WHITE and rec.out_of(SOLID) > 0:
            return False
        if val >= 3:
            any_3plus = True
    if spec.need_3plus and not any_3plus:
        return False
    if spec.solid_acyclic and has_solid_cycle(g):
        return False
    if spec.target_need and not _meets(spec.target_need, prof, bivalent=False):
        return False
    if spec.biv_need and not _meets(spec.biv_need, prof, bivalent=True):
        return False
    if spec.biv_forbid and _meets(spec.biv_forbid, prof, bivalent=True):
        return False
    if spec.need_black and BLACK not in g.colors:
        return False
    if spec.need_dotted and DOTTED not in kinds_present:
        return False
    if spec.need_tdot_or_wavy and not (kinds_present & {T_DOTTED, WAVY}):
        return False
    return True


def _meets(need: str, prof, bivalent: bool) -> bool:
    has_t = any(
        rec.target and (not bivalent or rec.valence == 2) for rec in prof
    )
    has_s = any(
        rec.source and (not bivalent or rec.valence == 2) for rec in prof
    )
    if need == "t":
        return has_t
    if need == "s":
        return has_s
    if need == "st":
        return has_t and has_s
    if need == "s|t":
        return has_t or has_s
    raise ValueError(f"bad requirement {need!r}")


# ---------------------------------------------------------------------------
# registry


def _directed(tag, d, **kw):
    return ComplexSpec(
        cid=ComplexId(tag, d),
        colors=(BLACK,),
        kinds=(SOLID,),
        vdeg={BLACK: d},
        edeg={SOLID: 1 - d},
        flip_exp=d,  # no flippable kinds anyway
        parts=("vertex_split",),
        **kw,
    )


def _undirected(tag, d, **kw):
    return ComplexSpec(
        cid=ComplexId(tag, d),
        colors=(BLACK,),
        kinds=(DOTTED,),
        vdeg={BLACK: d},
        edeg={DOTTED: 1 - d},
        flip_exp=d,
        parts=("vertex_split",),
        **kw,
    )


def _two_edge(tag, d, **kw):
    return ComplexSpec(
        cid=ComplexId(tag, d),
        colors=(BLACK,),
        kinds=(SOLID, DOTTED),
        vdeg={BLACK: d},
        edeg={SOLID: 1 - d, DOTTED: 2 - d},
        flip_exp=d - 1,
        parts=("vertex_split", "edge_retype"),
        **kw,
    )


def _four_edge(tag, d, **kw):
    return ComplexSpec(
        cid=ComplexId(tag, d),
        colors=(BLACK,),
        kinds=(SOLID, S_DOTTED, T_DOTTED, WAVY),
        vdeg={BLACK: d},
        edeg={SOLID: 1 - d, S_DOTTED: 2 - d, T_DOTTED: 2 - d, WAVY: 3 - d},
        flip_exp=d - 1,
        parts=("vertex_split", "edge_retype"),
        **kw,
    )


def _two_color(tag, d, **kw):
    return ComplexSpec(
        cid=ComplexId(tag, d),
        colors=(BLACK, WHITE),
        kinds=(SOLID, DOTTED),
        vdeg={BLACK: d, WHITE: d - 1},
        edeg={SOLID: 1 - d, DOTTED: 2 - d},
        flip_exp=d - 1,
        white_no_out_solid=True,
        parts=("vertex_split", "edge_retype", "white_split", "white_blacken"),
        **kw,
    )


_BUILDERS = {
    # undirected complexes
    "GC": lambda d: _undirected("GC", d, min_valence=3),
    "GC_simple": lambda d: _undirected("GC_simple", d, min_valence=3, simple=True),
    "GC_geq2": lambda d: _undirected("GC_geq2", d, min_valence=2, windowed=True),
    "GC_2valent": lambda d: _undirected("GC_2valent", d, min_valence=2, exact_valence=2, windowed=True),
    "GC_leq4": lambda d: _undirected("GC_leq4", d, min_valence=3, max_valence=4, relations="max4"),
    # directed complexes
    "dGC_geq2": lambda d: _directed("dGC_geq2", d, min_valence=2, no_passing=True, windowed=True),
    "dGC": lambda d: _directed("dGC", d, min_valence=2, no_passing=True, need_3plus=True, windowed=True),
    "OGC_geq2": lambda d: _directed("OGC_geq2", d, min_valence=2, no_passing=True, solid_acyclic=True, windowed=True),
    "OGC": lambda d: _directed("OGC", d, min_valence=2, no_passing=True, need_3plus=True, solid_acyclic=True, windowed=True),
    "TGC": lambda d: _directed("TGC", d, min_valence=2, no_passing=True, need_3plus=True, target_need="t", windowed=True),
    "SGC": lambda d: _directed("SGC", d, min_valence=2, no_passing=True, need_3plus=True, target_need="s", windowed=True),
    "STGC": lambda d: _directed("STGC", d, min_valence=2, no_passing=True, need_3plus=True, target_need="st", windowed=True),
    "SoTGC": lambda d: _directed("SoTGC", d, min_valence=2, no_passing=True, need_3plus=True, target_need="s|t", windowed=True),
    "GC_wedge": lambda d: _directed("GC_wedge", d, min_valence=2, no_passing=True, need_3plus=True, biv_need="t", windowed=True),
    "GC_vee": lambda d: _directed("GC_vee", d, min_valence=2, no_passing=True, need_3plus=True, biv_need="s", windowed=True),
    "GC_wedge_vee": lambda d: _directed("GC_wedge_vee", d, min_valence=2, no_passing=True, need_3plus=True, biv_need="st", windowed=True),
    "GC_vee_plus_wedge": lambda d: _directed("GC_vee_plus_wedge", d, min_valence=2, no_passing=True, need_3plus=True, biv_need="s|t", windowed=True),
    "X_st": lambda d: _directed("X_st", d, min_valence=2, no_passing=True, need_3plus=True, target_need="st", biv_forbid="st", windowed=True),
    "GC_st_geq3": lambda d: _directed("GC_st_geq3", d, min_valence=3, target_need="st"),
    "GC_s_plus_t_geq3": lambda d: _directed("GC_s_plus_t_geq3", d, min_valence=3, target_need="s|t"),
    "GC_t_geq3": lambda d: _directed("GC_t_geq3", d, min_valence=3, target_need="t"),
    "GC_s_geq3": lambda d: _directed("GC_s_geq3", d, min_valence=3, target_need="s"),
    "GC_wheeled": lambda d: _directed("GC_wheeled", d, min_valence=2, no_passing=True, need_3plus=True, wheeled=True),
    # two-edge-kind reduced models (ambient dimension d)
    "hatOGC": lambda d: _two_edge("hatOGC", d, solid_acyclic=True),
    "barGC2edge": lambda d: _two_edge("barGC2edge", d),
    "barTGC": lambda d: _two_edge("barTGC", d, target_need="t"),
    "barSGC": lambda d: _two_edge("barSGC", d, target_need="s"),
    "GC_t_dotted": lambda d: _two_edge("GC_t_dotted", d, target_need="t", need_dotted=True),
    "GC_s_dotted": lambda d: _two_edge("GC_s_dotted", d, target_need="s", need_dotted=True),
    "oGC3": lambda d: _two_edge("oGC3", d, exact_valence=3, solid_acyclic=True, relations="ihx"),
    # four-edge-kind reduced model and its acyclic subcomplex
    "rdGC4edge": lambda d: _four_edge("rdGC4edge", d),
    "dGC_wedge_tilde": lambda d: _four_edge("dGC_wedge_tilde", d, need_tdot_or_wavy=True),
    # two-vertex-color interpolating complexes
    "GC_t_dd1": lambda d: _two_color("GC_t_dd1", d, target_need="t", need_black=True),
    "GC_or_dd1": lambda d: _two_color("GC_or_dd1", d, solid_acyclic=True, need_black=True),
    "GC_t_dd1_tilde": lambda d: _two_color("GC_t_dd1_tilde", d, target_need="t"),
    "GC_or_dd1_tilde": lambda d: _two_color("GC_or_dd1_tilde", d, solid_acyclic=True),
}

FAMILIES = tuple(sorted(_BUILDERS))


@lru_cache(maxsize=None)
def get_spec(family: str, d: int) -> ComplexSpec:
    if family not in _BUILDERS:
        raise FamilyError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
    if d < 1:
        raise FamilyError("dimension parameter d must be >= 1")
    return _BUILDERS[family](d)


def spec_of(cid: ComplexId) -> ComplexSpec:
    return get_spec(cid.family, cid.d)


def count_vectors(spec: ComplexSpec, g: int, k: int):
    """All feasible count profiles ``(n_by_color, e_by_kind)`` at loop order
    ``g`` and degree ``k``.

    Solutions of {degree formula = k, #E - #V + 1 = g} subject to the
    valence bounds; always a finite list for the registered families.
    """
    if g < 0:
        raise FamilyError("loop order must be >= 0")
    minval = spec.exact_valence or spec.min_valence
    # n <= 2g - 2 for min valence 3 (from 2#E >= 3#V); for min valence 2 the
    # single edge kind pins #E = k + d*g through the degree formula.
    if minval >= 3:
        nmax = max(2 * g - 2, 1)
    elif len(spec.kinds) == 1:
        # degree = vdeg*(n-1) + edeg*e and e = n + g - 1 determine n uniquely
        vd, ed = spec.vdeg[BLACK], spec.edeg[spec.kinds[0]]
        num = k + vd - ed * (g - 1)
        den = vd + ed
        if den == 0:
            raise FamilyError(f"{spec.cid}: unbounded profile set at g={g}, k={k}")
        if num % den != 0:
            return []
        nmax = num // den
        if nmax < 1:
            return []
        return _profiles_at(spec, g, k, nmax, nmax, minval)
    else:
        raise FamilyError(f"{spec.cid}: cannot bound profiles at g={g}, k={k}")
    return _profiles_at(spec, g, k, 1, nmax, minval)


def _profiles_at(spec, g, k, nmin, nmax, minval):
    out = []
    for n in range(nmin, nmax + 1):
        e_total = n + g - 1
        if e_total < 0 or 2 * e_total < minval * n:
            continue
        if spec.exact_valence is not None and 2 * e_total != spec.exact_valence * n:
            continue
        if spec.max_valence is not None and 2 * e_total > spec.max_valence * n:
            continue
        if spec.simple and e_total > n * (n - 1) // 2:
            continue
        for n_by_color in _color_splits(spec, n):
            for e_by_kind in _kind_splits(spec, e_total):
                if spec.degree(n_by_color, e_by_kind) == k:
                    out.append((n_by_color, e_by_kind))
    return out


def _color_splits(spec, n):
    if len(spec.colors) == 1:
        yield {spec.colors[0]: n}
        return
    lo = 1 if spec.need_black else 0
    for nb in range(lo, n + 1):
        yield {BLACK: nb, WHITE: n - nb}


def _kind_splits(spec, e_total):
    kinds = spec.kinds
    if len(kinds) == 1:
        yield {kinds[0]: e_total}
        return

    def rec(i, remaining, acc):
        if i == len(kinds) - 1:
            acc[kinds[i]] = remaining
            yield dict(acc)
            return
        for c in range(remaining + 1):
            acc[kinds[i]] = c
            yield from rec(i + 1, remaining - c, acc)

    yield from rec(0, e_total, {})
