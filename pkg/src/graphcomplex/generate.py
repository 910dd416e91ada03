"""Basis enumeration: skeletons, decorations, and deduplicated generators.

Undirected multigraph skeletons are enumerated once per (vertex count, edge
count, minimum valence) and shared by all families.  Minimum-valence-3
skeletons come from a direct lexicographic edge-multiset search; the
minimum-valence-2 ones are obtained by subdividing loop-allowing cores (every
connected graph with minimum degree 2 and a vertex of degree >= 3 is the
subdivision of a unique such core) plus the pure cycles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .families import ComplexId, ComplexSpec, count_vectors, is_generator, spec_of
from .graphs import (
    BLACK,
    DOTTED,
    SOLID,
    WHITE,
    GraphError,
    LabeledGraph,
    canonicalize,
    decode,
    encode,
    skeleton_recipe,
)


class BudgetExceeded(RuntimeError):
    """Raised when decoration would exceed the configured candidate budget."""

    def __init__(self, msg, produced=None):
        super().__init__(msg)
        self.produced = produced


DEFAULT_BUDGET = 10_000_000


# ---------------------------------------------------------------------------
# skeletons


def _degree_sequence(n, edges):
    deg = [0] * n
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1  # a loop (a == b) contributes 2
    return deg


def _connected(n, edges):
    if n == 1:
        return True
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    cnt = 1
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                cnt += 1
                stack.append(u)
    return cnt == n


def _loopy_canon_key(n, edges):
    """Canonical key for a small multigraph that may contain loops."""
    best = None
    for pi in itertools.permutations(range(n)):
        mapped = sorted(
            (min(pi[a], pi[b]), max(pi[a], pi[b])) for a, b in edges
        )
        key = tuple(mapped)
        if best is None or key < best:
            best = key
    return best


def _search_multisets(n, e_total, allow_loops, min_deg):
    """Yield edge multisets (sorted tuples of pairs) with the degree bound."""
    pairs = []
    for a in range(n):
        start = a if allow_loops else a + 1
        for b in range(start, n):
            pairs.append((a, b))
    deg = [0] * n
    chosen = []

    def rec(start_idx):
        remaining = e_total - len(chosen)
        if remaining == 0:
            if all(d >= min_deg for d in deg) and _connected(n, chosen):
                yield tuple(chosen)
            return
        if sum(max(0, min_deg - d) for d in deg) > 2 * remaining:
            return
        for idx in range(start_idx, len(pairs)):
            a, b = pairs[idx]
            # edges are chosen in non-decreasing order, so vertices below a
            # are frozen and must already be saturated
            if any(deg[v] < min_deg for v in range(a)):
                break
            chosen.append((a, b))
            deg[a] += 1
            deg[b] += 1
            yield from rec(idx)
            deg[a] -= 1
            deg[b] -= 1
            chosen.pop()

    yield from rec(0)


@lru_cache(maxsize=None)
def _min3_cores(n, e_total, allow_loops):
    """Connected multigraphs with min degree 3, up to isomorphism.

    Returned as tuples of (a, b) pairs; loops (a == a) allowed when requested.
    """
    if n < 1 or e_total < 0 or 2 * e_total < 3 * n:
        return ()
    found = {}
    for edges in _search_multisets(n, e_total, allow_loops, 3):
        key = _loopy_canon_key(n, edges)
        if key not in found:
            found[key] = key
    return tuple(sorted(found.values()))


def _subdivide(n0, edges, points):
    """Insert ``points[i]`` bivalent vertices on edge ``i``; returns (n, edges)."""
    n = n0
    out = []
    for (a, b), m in zip(edges, points):
        if m == 0:
            out.append((a, b))
            continue
        chain = [a] + [n + i for i in range(m)] + [b]
        n += m
        out.extend((chain[i], chain[i + 1]) for i in range(m))
        out.append((chain[-2], chain[-1]))
    return n, out


@lru_cache(maxsize=None)
def skeletons(n, e_total, min_valence):
    """Connected loopless multigraph skeletons up to isomorphism.

    Skeletons are :class:`LabeledGraph` values with all-black vertices and
    all-dotted edges, in canonical labeling.
    """
    if n < 1 or e_total < 0:
        return ()
    recipe = skeleton_recipe()
    found = {}

    def emit(nn, edges):
        g = LabeledGraph(nn, "b" * nn, tuple((a, b, DOTTED) for a, b in edges))
        canon = canonicalize(g, recipe).encoding
        if canon not in found:
            found[canon] = decode(canon)

    if min_valence >= 3:
        for edges in _min3_cores(n, e_total, False):
            emit(n, list(edges))
        return tuple(found[k] for k in sorted(found))

    if min_valence < 2:
        raise ValueError("skeletons support minimum valence 2 or 3")

    # pure cycle (any connected graph with min degree 2 and no degree >= 3)
    if n == e_total and n >= 2:
        emit(n, [(i, (i + 1) % n) for i in range(n)])
    # subdivisions of loop-allowing cores with min degree 3
    for n0 in range(1, n + 1):
        m = n - n0
        e0 = e_total - m
        if e0 < 2 or 2 * e0 < 3 * n0:
            continue
        for core in _min3_cores(n0, e0, True):
            loops = [i for i, (a, b) in enumerate(core) if a == b]
            ranges = [
                range(1 if i in set(loops) else 0, m + 1) for i in range(e0)
            ]
            for points in itertools.product(*ranges):
                if sum(points) != m:
                    continue
                nn, edges = _subdivide(n0, list(core), points)
                emit(nn, edges)
    return tuple(found[k] for k in sorted(found))


# ---------------------------------------------------------------------------
# decoration


def _multiset_permutations(items):
    """Distinct permutations of a list with repetitions."""
    items = sorted(items)
    n = len(items)
    if n == 0:
        yield ()
        return
    perm = list(items)
    while True:
        yield tuple(perm)
        i = n - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while perm[j] <= perm[i]:
            j -= 1
        perm[i], perm[j] = perm[j], perm[i]
        perm[i + 1 :] = reversed(perm[i + 1 :])


class _Decorator:
    """Enumerates decorated generators of one family over one skeleton."""

    def __init__(self, spec: ComplexSpec, skeleton: LabeledGraph, charge):
        self.spec = spec
        self.skel = skeleton
        self.charge = charge  # budget callback
        self.pairs = [(t, h) for (t, h, _) in skeleton.edges]
        self.sdeg = _degree_sequence(skeleton.n, self.pairs)
        self.out = set()

    def run(self, n_white, e_by_kind):
        spec = self.spec
        n = self.skel.n
        if spec.max_valence is not None and any(
            d > spec.max_valence for d in self.sdeg
        ):
            return self.out
        if spec.exact_valence is not None and any(
            d != spec.exact_valence for d in self.sdeg
        ):
            return self.out
        kinds_pool = []
        for k in spec.kinds:
            kinds_pool.extend([k] * e_by_kind.get(k, 0))
        color_choices = (
            itertools.combinations(range(n), n_white)
            if len(spec.colors) == 2
            else ((),)
        )
        for whites in color_choices:
            white_set = set(whites)
            colors = "".join(
                WHITE if v in white_set else BLACK for v in range(n)
            )
            for kind_seq in _multiset_permutations(kinds_pool):
                self._directions(colors, kind_seq)
        return self.out

    def _directions(self, colors, kind_seq):
        spec = self.spec
        n = self.skel.n
        pairs = self.pairs
        solid_slots = [i for i, k in enumerate(kind_seq) if k == SOLID]
        fixed = [
            (pairs[i][0], pairs[i][1], k)
            for i, k in enumerate(kind_seq)
            if k != SOLID
        ]
        n_solid_at = [0] * n
        for i in solid_slots:
            a, b = pairs[i]
            n_solid_at[a] += 1
            n_solid_at[b] += 1
        sin = [0] * n
        sout = [0] * n
        assigned = [0] * n  # solid edge-ends assigned so far per vertex
        oriented = []

        def veto(v):
            # local fails once all solid ends of v are assigned
            if assigned[v] != n_solid_at[v]:
                return False
            if spec.no_passing and self.sdeg[v] == 2 and sin[v] == 1 and sout[v] == 1:
                return True
            return False

        def rec(idx):
            if idx == len(solid_slots):
                self.charge(1)
                self._finish(colors, kind_seq, dict(oriented))
                return
            slot = solid_slots[idx]
            a, b = pairs[slot]
            for tail, head in ((a, b), (b, a)):
                if spec.white_no_out_solid and colors[tail] == WHITE:
                    continue
                sout[tail] += 1
                sin[head] += 1
                assigned[a] += 1
                assigned[b] += 1
                if not (veto(a) or veto(b)):
                    oriented.append((slot, (tail, head)))
                    rec(idx + 1)
                    oriented.pop()
                sout[tail] -= 1
                sin[head] -= 1
                assigned[a] -= 1
                assigned[b] -= 1

        rec(0)

    def _finish(self, colors, kind_seq, oriented):
        spec = self.spec
        edges = []
        for i, k in enumerate(kind_seq):
            if i in oriented:
                t, h = oriented[i]
            else:
                t, h = self.pairs[i]
            edges.append((t, h, k))
        g = LabeledGraph(self.skel.n, colors, tuple(edges))
        if not is_generator(spec, g):
            return
        form = canonicalize(g, spec.recipe)
        if not form.is_zero:
            self.out.add(form.encoding)


@dataclass(frozen=True)
class Basis:
    """Sorted, deduplicated generators of one family at fixed (g, degree)."""

    cid: ComplexId
    g: int
    k: int
    encodings: tuple

    def __len__(self):
        return len(self.encodings)

    def index(self):
        return {e: i for i, e in enumerate(self.encodings)}

    def graphs(self):
        return [decode(e) for e in self.encodings]

    def to_text(self) -> str:
        head = (
            f"#complex={self.cid.family};d={self.cid.d};g={self.g};"
            f"deg={self.k};count={len(self.encodings)}\n"
        )
        return head + "".join(e + "\n" for e in self.encodings)

    @classmethod
    def from_text(cls, text: str) -> "Basis":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#complex="):
            raise GraphError("malformed basis file header")
        fields = dict(p.split("=", 1) for p in lines[0][1:].split(";"))
        encs = tuple(line for line in lines[1:] if line)
        if len(encs) != int(fields["count"]):
            raise GraphError("basis file count mismatch")
        return cls(
            ComplexId(fields["complex"], int(fields["d"])),
            int(fields["g"]),
            int(fields["deg"]),
            encs,
        )


class _BudgetMeter:
    def __init__(self, budget):
        self.budget = budget
        self.used = 0

    def __call__(self, amount):
        self.used += amount
        if self.used > self.budget:
            raise BudgetExceeded(
                f"candidate budget {self.budget} exceeded", produced=self.used
            )


def generate_basis(cid: ComplexId, g: int, k: int, budget: int = DEFAULT_BUDGET) -> Basis:
    """Enumerate the basis of a family at loop order ``g`` and degree ``k``."""
    spec = spec_of(cid)
    meter = _BudgetMeter(budget)
    encodings = set()
    minval = 2 if spec.min_valence <= 2 else 3
    for n_by_color, e_by_kind in count_vectors(spec, g, k):
        n = sum(n_by_color.values())
        e_total = sum(e_by_kind.values())
        if n == 1 and e_total == 0:
            continue  # the one-vertex graph spans nothing (valence 0)
        for skel in skeletons(n, e_total, minval):
            dec = _Decorator(spec, skel, meter)
            encodings |= dec.run(n_by_color.get(WHITE, 0), e_by_kind)
    return Basis(cid, g, k, tuple(sorted(encodings)))


def natural_degree_range(cid: ComplexId, g: int):
    """The (finite) degree range of a family with bounded vertex counts."""
    spec = spec_of(cid)
    if spec.windowed:
        raise ValueError(f"{cid} has an unbounded degree range at fixed g")
    ks = set()
    nmax = max(2 * g - 2, 1)
    for n in range(1, nmax + 1):
        e_total = n + g - 1
        if 2 * e_total < 3 * n and spec.min_valence >= 3:
            continue
        for n_by_color in _color_splits_public(spec, n):
            for e_by_kind in _kind_splits_public(spec, e_total):
                ks.add(spec.degree(n_by_color, e_by_kind))
    if not ks:
        return range(0, 0)
    return range(min(ks), max(ks) + 1)


def _color_splits_public(spec, n):
    if len(spec.colors) == 1:
        yield {spec.colors[0]: n}
    else:
        lo = 1 if spec.need_black else 0
        for nb in range(lo, n + 1):
            yield {BLACK: nb, WHITE: n - nb}


def _kind_splits_public(spec, e_total):
    kinds = spec.kinds
    if len(kinds) == 1:
        yield {kinds[0]: e_total}
        return
    for combo in itertools.product(range(e_total + 1), repeat=len(kinds) - 1):
        if sum(combo) <= e_total:
            d = dict(zip(kinds[:-1], combo))
            d[kinds[-1]] = e_total - sum(combo)
            yield d


def default_window(cid: ComplexId, g: int):
    """Degree window for cohomology computations.

    For families with bounded vertex counts this is the full natural range.
    For the rest (bivalent chains make the degree range infinite) the window
    covers the range where the cohomology can be nonzero, plus one degree of
    slack above, and everything below.
    """
    spec = spec_of(cid)
    if not spec.windowed:
        r = natural_degree_range(cid, g)
        return (r.start, r.stop - 1) if len(r) else (0, -1)
    d = cid.d
    vd, ed = spec.vdeg[BLACK], spec.edeg[spec.kinds[0]]
    kmin = vd + ed * (g + 1)  # two vertices, g+1 parallel edges
    if cid.family == "GC_2valent":
        # polytope degrees j - d grow without bound; view a handful
        return (kmin, kmin + 8)
    if cid.family in ("dGC", "dGC_geq2", "GC_geq2"):
        eff = d
    else:
        # targeted/sourced/oriented complexes at dimension d compute the
        # cohomology of the undirected complex at dimension d - 1
        eff = d - 1
    kmax = (3 - eff) * g - 3 + 1
    return (kmin, max(kmin, kmax))
