"""Labeled directed multigraphs and their signed canonical forms.

A generator of a graph complex is an isomorphism class of decorated
multigraphs together with an orientation.  We store a concrete labeled
representative (:class:`LabeledGraph`); the stored vertex order, edge order
and edge directions *are* the orientation.  Reducing a labeled graph to its
canonical representative produces a sign (the parity of the relabeling with
respect to an :class:`OrientationRecipe`) and detects generators that are
identified with zero because some automorphism reverses the orientation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

KINDS = ("s", "d", "sd", "td", "w")
KIND_INDEX = {k: i for i, k in enumerate(KINDS)}
COLORS = ("b", "w")

BLACK = "b"
WHITE = "w"
SOLID = "s"
DOTTED = "d"
S_DOTTED = "sd"
T_DOTTED = "td"
WAVY = "w"


class GraphError(ValueError):
    """Raised for structurally invalid graphs or malformed encodings."""


class LabeledGraph:
    """A connected-or-not directed multigraph with vertex colors and edge kinds.

    ``colors`` is a string over ``{'b', 'w'}`` indexed by vertex label and
    ``edges`` is a tuple of ``(tail, head, kind)`` triples in orientation
    order.  Loop edges (tail == head) are rejected everywhere.
    """

    __slots__ = ("n", "colors", "edges", "_hash")

    def __init__(self, n: int, colors: str, edges: tuple[tuple[int, int, str], ...]):
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        if len(colors) != n or any(c not in COLORS for c in colors):
            raise GraphError(f"colors must be a length-{n} string over 'b'/'w'")
        edges = tuple((int(t), int(h), k) for (t, h, k) in edges)
        for t, h, k in edges:
            if k not in KIND_INDEX:
                raise GraphError(f"unknown edge kind {k!r}")
            if not (0 <= t < n and 0 <= h < n):
                raise GraphError(f"edge ({t},{h}) out of range for {n} vertices")
            if t == h:
                raise GraphError(f"tadpole at vertex {t}")
        self.n = n
        self.colors = colors
        self.edges = edges
        self._hash = hash((n, colors, edges))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (
            isinstance(other, LabeledGraph)
            and self.n == other.n
            and self.colors == other.colors
            and self.edges == other.edges
        )

    def __repr__(self):
        return f"LabeledGraph({encode(self)!r})"

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        adj = [[] for _ in range(self.n)]
        for t, h, _ in self.edges:
            adj[t].append(h)
            adj[h].append(t)
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    count += 1
                    stack.append(u)
        return count == self.n


def encode(g: LabeledGraph) -> str:
    """Serialize to the one-line text grammar used for caches and fixtures."""
    body = ",".join(f"{t}-{h}:{k}" for (t, h, k) in g.edges)
    return f"n={g.n};colors={g.colors};edges={body}"


def decode(text: str) -> LabeledGraph:
    """Parse the :func:`encode` grammar; reports the byte offset on errors."""

    def fail(msg: str, pos: int):
        raise GraphError(f"parse error at byte {pos}: {msg}")

    if not text.startswith("n="):
        fail("expected 'n='", 0)
    semi = text.find(";")
    if semi < 0:
        fail("expected ';' after vertex count", len(text))
    try:
        n = int(text[2:semi])
    except ValueError:
        fail("vertex count is not an integer", 2)
    rest = text[semi + 1 :]
    if not rest.startswith("colors="):
        fail("expected 'colors='", semi + 1)
    semi2 = rest.find(";")
    if semi2 < 0:
        fail("expected ';' after colors", len(text))
    colors = rest[7:semi2]
    tail = rest[semi2 + 1 :]
    base = semi + 1 + semi2 + 1
    if not tail.startswith("edges="):
        fail("expected 'edges='", base)
    body = tail[6:]
    edges = []
    if body:
        pos = base + 6
        for part in body.split(","):
            dash = part.find("-")
            colon = part.find(":")
            if dash <= 0 or colon <= dash:
                fail(f"malformed edge {part!r}", pos)
            try:
                t = int(part[:dash])
                h = int(part[dash + 1 : colon])
            except ValueError:
                fail(f"non-integer endpoint in {part!r}", pos)
            k = part[colon + 1 :]
            if k not in KIND_INDEX:
                fail(f"unknown kind {k!r}", pos + colon + 1)
            if t == h:
                fail("tadpole", pos)
            edges.append((t, h, k))
            pos += len(part) + 1
    try:
        return LabeledGraph(n, colors, tuple(edges))
    except GraphError as exc:
        raise GraphError(f"parse error at byte 0: {exc}") from exc


@dataclass(frozen=True)
class OrientationRecipe:
    """Which ordering data carries permutation parity, and how flips sign.

    ``ordered_colors`` / ``ordered_kinds`` name the vertex-color classes and
    edge-kind lists whose internal ordering contributes permutation parity.
    Kinds in ``flip_kinds`` may have their direction reversed at the cost of
    ``flip_sign`` per reversal; all remaining kinds have frozen directions.
    """

    ordered_colors: frozenset
    ordered_kinds: frozenset
    flip_kinds: frozenset
    flip_sign: int

    def __post_init__(self):
        if self.flip_sign not in (1, -1):
            raise ValueError("flip_sign must be +1 or -1")


@dataclass(frozen=True)
class CanonicalForm:
    """Canonical encoding of a generator plus the sign relating it to the input."""

    encoding: str
    sign: int
    is_zero: bool


def _perm_parity_of_sequence(seq) -> int:
    """Parity (+1/-1) of the permutation sorting ``seq`` (entries distinct)."""
    inv = 0
    m = len(seq)
    for i in range(m):
        si = seq[i]
        for j in range(i + 1, m):
            if si > seq[j]:
                inv += 1
    return -1 if inv & 1 else 1


def _sort_parity(keys):
    """Parity of the stable sort of ``keys`` and whether duplicates occur."""
    inv = 0
    dup = False
    m = len(keys)
    for i in range(m):
        ki = keys[i]
        for j in range(i + 1, m):
            kj = keys[j]
            if ki > kj:
                inv += 1
            elif ki == kj:
                dup = True
    return (-1 if inv & 1 else 1), dup


def _refine(n, vcol, adj):
    """Iterative color refinement; returns an equitable, canonically ranked coloring."""
    ncells = len(set(vcol))
    while True:
        sigs = []
        for v in range(n):
            row = sorted((code, vcol[u]) for (code, u) in adj[v])
            sigs.append((vcol[v], tuple(row)))
        rank = {s: i for i, s in enumerate(sorted(set(sigs)))}
        vcol = [rank[s] for s in sigs]
        if len(rank) == ncells:
            return vcol
        ncells = len(rank)


class _CanonSearch:
    def __init__(self, g: LabeledGraph, recipe: OrientationRecipe):
        self.g = g
        self.recipe = recipe
        n = g.n
        adj = [[] for _ in range(n)]
        # Frozen kinds act as directional colorings; flippable kinds are
        # refined on the unordered endpoint pair.
        for t, h, k in g.edges:
            ki = KIND_INDEX[k]
            if k in recipe.flip_kinds:
                adj[t].append((3 * ki + 2, h))
                adj[h].append((3 * ki + 2, t))
            else:
                adj[t].append((3 * ki, h))
                adj[h].append((3 * ki + 1, t))
        self.adj = adj
        self.best_key = None
        self.best_signs = set()
        self.ambiguous_dup = False
        self.canon_colors = None

    def run(self):
        g = self.g
        vcol0 = [COLORS.index(c) for c in g.colors]
        self._descend(_refine(g.n, vcol0, self.adj))

    def _descend(self, vcol):
        n = self.g.n
        cells = {}
        for v, c in enumerate(vcol):
            cells.setdefault(c, []).append(v)
        target = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                target = cells[c]
                break
        if target is None:
            self._leaf(vcol)
            return
        for v in target:
            child = [2 * c for c in vcol]
            child[v] += 1
            self._descend(_refine(n, child, self.adj))

    def _leaf(self, vcol):
        g = self.g
        recipe = self.recipe
        pi = vcol  # discrete coloring: ranks are the new labels
        flips = 0
        mapped = []
        for t, h, k in g.edges:
            a, b = pi[t], pi[h]
            if k in recipe.flip_kinds and a > b:
                a, b = b, a
                flips += 1
            mapped.append((KIND_INDEX[k], a, b))
        key = tuple(sorted(mapped))
        if self.best_key is not None and key > self.best_key:
            return
        sign = 1 if flips % 2 == 0 or recipe.flip_sign == 1 else -1
        # permutation parity lives on the interleaved sequence of parity
        # carrying cells (vertices in label order, then edges in list order),
        # matching the Koszul position convention of the differentials
        if recipe.ordered_colors:
            seq = [
                pi[v] for v in range(g.n) if g.colors[v] in recipe.ordered_colors
            ]
            sign *= _perm_parity_of_sequence(seq)
        dup = False
        if recipe.ordered_kinds:
            ordered_idx = {KIND_INDEX[k] for k in recipe.ordered_kinds}
            keys = [e for e in mapped if e[0] in ordered_idx]
            par, dup = _sort_parity(keys)
            sign *= par
        if key == self.best_key:
            self.best_signs.add(sign)
            self.ambiguous_dup = self.ambiguous_dup or dup
        else:
            self.best_key = key
            self.best_signs = {sign}
            self.ambiguous_dup = dup
            colors_new = [""] * g.n
            for v in range(g.n):
                colors_new[pi[v]] = g.colors[v]
            self.canon_colors = "".join(colors_new)


def canonical_graph(g: LabeledGraph, recipe: OrientationRecipe):
    """Canonical labeled representative of ``g``.

    Returns ``(graph, sign, is_zero)`` where ``g == sign * graph`` as
    generators, and ``is_zero`` is true exactly when some automorphism acts
    with sign -1 on the orientation data.
    """
    search = _CanonSearch(g, recipe)
    search.run()
    edges = tuple((t, h, KINDS[ki]) for (ki, t, h) in search.best_key)
    canon = LabeledGraph(g.n, search.canon_colors, edges)
    is_zero = search.ambiguous_dup or len(search.best_signs) == 2
    sign = next(iter(search.best_signs))
    return canon, (1 if is_zero else sign), is_zero


def canonicalize(g: LabeledGraph, recipe: OrientationRecipe) -> CanonicalForm:
    canon, sign, is_zero = canonical_graph(g, recipe)
    return CanonicalForm(encode(canon), sign, is_zero)


def loop_number(g: LabeledGraph) -> int:
    """First Betti number #E - #V + 1 of a connected graph."""
    if not g.is_connected():
        raise GraphError("loop number is defined for connected graphs only")
    return len(g.edges) - g.n + 1


@dataclass(frozen=True)
class VertexValence:
    """Incidence counts of one vertex, by kind and direction."""

    in_by_kind: dict
    out_by_kind: dict
    total_in: int
    total_out: int

    @property
    def valence(self) -> int:
        return self.total_in + self.total_out

    def in_of(self, kind: str) -> int:
        return self.in_by_kind.get(kind, 0)

    def out_of(self, kind: str) -> int:
        return self.out_by_kind.get(kind, 0)

    @property
    def passing(self) -> bool:
        # (1,1) in the solid kind, nothing else incident
        return (
            self.valence == 2
            and self.in_of(SOLID) == 1
            and self.out_of(SOLID) == 1
        )

    @property
    def target(self) -> bool:
        return self.out_of(SOLID) == 0

    @property
    def source(self) -> bool:
        return self.in_of(SOLID) == 0


def valence_profile(g: LabeledGraph) -> list:
    """Per-vertex incidence record; targets/sources refer to solid edges."""
    ins = [dict() for _ in range(g.n)]
    outs = [dict() for _ in range(g.n)]
    tin = [0] * g.n
    tout = [0] * g.n
    for t, h, k in g.edges:
        outs[t][k] = outs[t].get(k, 0) + 1
        ins[h][k] = ins[h].get(k, 0) + 1
        tout[t] += 1
        tin[h] += 1
    return [
        VertexValence(ins[v], outs[v], tin[v], tout[v]) for v in range(g.n)
    ]


def has_solid_cycle(g: LabeledGraph) -> bool:
    """True iff the solid edges contain a closed directed path."""
    adj = [[] for _ in range(g.n)]
    for t, h, k in g.edges:
        if k == SOLID:
            adj[t].append(h)
    state = [0] * g.n  # 0 unseen, 1 on stack, 2 done
    for root in range(g.n):
        if state[root]:
            continue
        stack = [(root, iter(adj[root]))]
        state[root] = 1
        while stack:
            v, it = stack[-1]
            advanced = False
            for u in it:
                if state[u] == 1:
                    return True
                if state[u] == 0:
                    state[u] = 1
                    stack.append((u, iter(adj[u])))
                    advanced = True
                    break
            if not advanced:
                state[v] = 2
                stack.pop()
    return False


@lru_cache(maxsize=None)
def skeleton_recipe() -> OrientationRecipe:
    """Sign-free recipe used to deduplicate undirected skeletons."""
    return OrientationRecipe(
        ordered_colors=frozenset(),
        ordered_kinds=frozenset(),
        flip_kinds=frozenset(KINDS),
        flip_sign=1,
    )
