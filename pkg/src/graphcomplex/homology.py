"""Matrix realizations of differentials and maps, and cohomology dimensions.

``dim H^k = (#basis_k - rank delta_k) - rank delta_{k-1}``, with every rank
exact over the chosen field.  Families cut out by relations (the trivalent
complex modulo its six-term relations, and the valence-bounded quotient)
compute instead on representatives modulo the relation subspace.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .cache import CacheKey, CacheStore
from .chains import Chain
from .diff import MapId, apply_map, delta, delta_chain, _split_vertex_terms
from .families import ComplexId, spec_of, is_generator
from .generate import Basis, DEFAULT_BUDGET, default_window, generate_basis
from .graphs import BLACK, SOLID, LabeledGraph, decode
from .linalg import CohomologyTable, SparseMatrix, field_tag, hstack, parse_field

_EMPTY = frozenset()


def _cached_basis(cid, g, k, budget, store: CacheStore | None) -> Basis:
    if store is None:
        return generate_basis(cid, g, k, budget)
    key = CacheKey("basis", cid.family, cid.d, g, k, "none")
    blob = store.load(key)
    if blob is not None:
        return Basis.from_text(blob.decode())
    basis = generate_basis(cid, g, k, budget)
    store.store(key, basis.to_text().encode())
    return basis


def _delta_column(args):
    family, d, enc = args
    cid = ComplexId(family, d)
    ch = delta(cid, decode(enc))
    return [(e, c.numerator, c.denominator) for e, c in sorted(ch.terms.items())]


def _columns(cid, encodings, threads):
    """Differential of every generator, in basis order."""
    if threads > 1 and len(encodings) > 4 * threads:
        args = [(cid.family, cid.d, e) for e in encodings]
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            raw = list(pool.map(_delta_column, args, chunksize=8))
        return [
            {e: Fraction(n, dd) for (e, n, dd) in col} for col in raw
        ]
    out = []
    for enc in encodings:
        ch = delta(cid, decode(enc))
        out.append(dict(ch.terms))
    return out


def assemble_matrix(columns, row_index=None):
    """Stack sparse chain columns into a rational matrix.

    When ``row_index`` is None the row space is discovered from the columns
    and ordered by encoding, so the result is deterministic.
    """
    if row_index is None:
        seen = set()
        for col in columns:
            seen.update(col)
        rows = sorted(seen)
        row_index = {e: i for i, e in enumerate(rows)}
    else:
        rows = sorted(row_index, key=row_index.get)
    m = SparseMatrix(len(row_index), len(columns), "Q")
    for j, col in enumerate(columns):
        for enc, coeff in col.items():
            if enc not in row_index:
                raise KeyError(f"differential leaves the declared row basis: {enc}")
            m[row_index[enc], j] = coeff
    return m, tuple(rows)


@dataclass
class DeltaMatrix:
    cid: ComplexId
    g: int
    k: int
    matrix: SparseMatrix  # rational; convert per field as needed
    col_encodings: tuple
    row_encodings: tuple


def delta_matrix(
    cid: ComplexId,
    g: int,
    k: int,
    rows: Basis | None = None,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    store: CacheStore | None = None,
) -> DeltaMatrix:
    """Matrix of the differential from degree ``k`` to ``k + 1``.

    With ``rows`` given, rows are indexed by that basis (and the result is
    the literal matrix of the differential between the two bases); otherwise
    the row space is discovered from the columns.
    """
    cols = _cached_basis(cid, g, k, budget, store)
    columns = _columns(cid, cols.encodings, threads)
    row_index = rows.index() if rows is not None else None
    m, row_encs = assemble_matrix(columns, row_index)
    return DeltaMatrix(cid, g, k, m, cols.encodings, row_encs)


def map_matrix(
    m: MapId,
    g: int,
    k: int,
    rows: Basis | None = None,
    budget: int = DEFAULT_BUDGET,
    store: CacheStore | None = None,
) -> DeltaMatrix:
    """Matrix of a chain map against the source basis at (g, k)."""
    cols = _cached_basis(m.src, g, k, budget, store)
    columns = []
    for enc in cols.encodings:
        ch = apply_map(m, decode(enc))
        columns.append(dict(ch.terms))
    row_index = rows.index() if rows is not None else None
    mat, row_encs = assemble_matrix(columns, row_index)
    return DeltaMatrix(m.dst, g, k, mat, cols.encodings, row_encs)


@dataclass
class ChainMapReport:
    map: MapId
    g: int
    degrees: tuple
    columns_checked: int
    violations: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_chain_map(
    m: MapId,
    g: int,
    window: tuple | None = None,
    budget: int = DEFAULT_BUDGET,
    store: CacheStore | None = None,
) -> ChainMapReport:
    """Check delta_dst(M x) == M(delta_src x) exactly for every basis x."""
    kmin, kmax = window or default_window(m.src, g)
    checked = 0
    report = ChainMapReport(m, g, (kmin, kmax), 0)
    for k in range(kmin, kmax + 1):
        basis = _cached_basis(m.src, g, k, budget, store)
        for enc, x in zip(basis.encodings, basis.graphs()):
            lhs = delta_chain(m.dst, apply_map(m, x))
            rhs = apply_map_chain_cached(m, delta(m.src, x))
            diff = Chain(m.dst, dict(lhs.terms))
            diff.add_chain(rhs, -1)
            checked += 1
            if not diff.is_zero():
                report.violations.append((k, enc, len(diff)))
    report.columns_checked = checked
    return report


def apply_map_chain_cached(m: MapId, chain: Chain) -> Chain:
    out = Chain(m.dst)
    for enc, coeff in chain.terms.items():
        out.add_chain(apply_map(m, decode(enc)), coeff)
    return out


# ---------------------------------------------------------------------------
# relations (the trivalent six-term relation, and the valence-4 quotient)


def relation_matrix(
    cid: ComplexId,
    g: int,
    k: int,
    basis: Basis | None = None,
    budget: int = DEFAULT_BUDGET,
    store: CacheStore | None = None,
) -> SparseMatrix:
    """Relation columns over the ambient basis at (g, k).

    Empty for families without relations.  For the trivalent complex, one
    column per (generator, contractible solid edge): the six-term combination
    obtained by contracting the edge and re-splitting the four-valent vertex.
    For the valence-bounded quotient, the projections of differentials of
    graphs with a vertex of valence five or more.
    """
    spec = spec_of(cid)
    if basis is None:
        basis = _cached_basis(cid, g, k, budget, store)
    index = basis.index()
    if spec.relations is None:
        return SparseMatrix(len(basis), 0, "Q")
    columns = []
    if spec.relations == "ihx":
        for enc in basis.encodings:
            graph = decode(enc)
            for ei, (t, h, kind) in enumerate(graph.edges):
                if kind != SOLID:
                    continue
                contracted = _contract_edge(graph, ei)
                if contracted is None:
                    continue
                if not _solid_acyclic(contracted):
                    continue
                col = Chain(cid)
                merged = min(t, h)
                for term, coeff in _split_vertex_terms(
                    spec, contracted, merged, SOLID, BLACK + BLACK, 1
                ):
                    col.add_graph(spec, term, coeff)
                if col.terms:
                    columns.append(dict(col.terms))
    elif spec.relations == "max4":
        from .families import get_spec

        ambient = get_spec("GC", cid.d)
        wide = generate_basis(ambient.cid, g, k - 1, budget)
        for enc in wide.encodings:
            graph = decode(enc)
            prof = [0] * graph.n
            for t, h, _ in graph.edges:
                prof[t] += 1
                prof[h] += 1
            if max(prof) <= 4:
                continue
            image = delta(ambient.cid, graph)
            col = {}
            for e2, c2 in image.terms.items():
                if e2 in index:
                    col[e2] = c2
            if col:
                columns.append(col)
    m = SparseMatrix(len(basis), len(columns), "Q")
    for j, col in enumerate(columns):
        for enc, coeff in col.items():
            m[index[enc], j] = coeff
    return m


def _contract_edge(g: LabeledGraph, ei: int):
    """Contract edge ``ei``; None if that would create a loop."""
    t, h, _ = g.edges[ei]
    u, v = min(t, h), max(t, h)
    for j, (a, b, _) in enumerate(g.edges):
        if j != ei and {a, b} == {u, v}:
            return None

    def relabel(x):
        if x == v:
            return u
        return x - 1 if x > v else x

    edges = tuple(
        (relabel(a), relabel(b), kk)
        for j, (a, b, kk) in enumerate(g.edges)
        if j != ei
    )
    colors = "".join(c for i, c in enumerate(g.colors) if i != v)
    return LabeledGraph(g.n - 1, colors, edges)


def _solid_acyclic(g: LabeledGraph) -> bool:
    from .graphs import has_solid_cycle

    return not has_solid_cycle(g)


# ---------------------------------------------------------------------------
# cohomology


def cohomology_dims(
    cid: ComplexId,
    g: int,
    field="Fp:32003",
    window: tuple | None = None,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    store: CacheStore | None = None,
) -> CohomologyTable:
    """Dimension table of H^k over the requested field.

    For families with relations the dimensions are those of the quotient
    complex; see :func:`quotient_cohomology_dims`.
    """
    spec = spec_of(cid)
    if spec.relations is not None:
        return quotient_cohomology_dims(
            cid, g, field, window=window, budget=budget, threads=threads, store=store
        )
    fld = parse_field(field)
    kmin, kmax = window or default_window(cid, g)
    complete = not spec.windowed and window is None
    bases = {}
    for k in range(kmin - 1, kmax + 1):
        bases[k] = _cached_basis(cid, g, k, budget, store)
    ranks = {}
    for k in range(kmin - 1, kmax + 1):
        if len(bases[k]) == 0:
            ranks[k] = 0
            continue
        dm = delta_matrix(cid, g, k, budget=budget, threads=threads, store=store)
        ranks[k] = dm.matrix.to_field(fld).rank()
    dims = {}
    sizes = {}
    for k in range(kmin, kmax + 1):
        sizes[k] = len(bases[k])
        dims[k] = sizes[k] - ranks[k] - ranks[k - 1]
    table = CohomologyTable(
        complex=cid.family,
        d=cid.d,
        g=g,
        field=field_tag(fld),
        dims=dims,
        basis_sizes=sizes,
        window=(kmin, kmax),
        complete=complete,
    )
    table.check_consistency()
    return table


def quotient_cohomology_dims(
    cid: ComplexId,
    g: int,
    field="Fp:32003",
    window: tuple | None = None,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    store: CacheStore | None = None,
) -> CohomologyTable:
    """Dimensions of a subquotient complex presented by relation columns.

    With relation subspace R_k inside the ambient span V_k, the quotient has
    dim Q_k = dim V_k - rank R_k and the induced differential has rank
    rank([D_k | R_{k+1}]) - rank R_{k+1}.
    """
    spec = spec_of(cid)
    if spec.relations is None:
        return cohomology_dims(
            cid, g, field, window=window, budget=budget, threads=threads, store=store
        )
    fld = parse_field(field)
    kmin, kmax = window or default_window(cid, g)
    complete = not spec.windowed and window is None
    bases = {
        k: _cached_basis(cid, g, k, budget, store)
        for k in range(kmin - 1, kmax + 2)
    }
    rel = {
        k: relation_matrix(cid, g, k, basis=bases[k], budget=budget, store=store)
        for k in range(kmin - 1, kmax + 2)
    }
    rel_rank = {k: rel[k].to_field(fld).rank() for k in rel}
    induced_rank = {}
    for k in range(kmin - 1, kmax + 1):
        if len(bases[k]) == 0:
            induced_rank[k] = 0
            continue
        dm = delta_matrix(cid, g, k, rows=bases[k + 1], budget=budget, threads=threads, store=store)
        stacked = hstack(dm.matrix, rel[k + 1])
        induced_rank[k] = stacked.to_field(fld).rank() - rel_rank[k + 1]
    dims = {}
    sizes = {}
    for k in range(kmin, kmax + 1):
        sizes[k] = len(bases[k]) - rel_rank[k]
        dims[k] = sizes[k] - induced_rank[k] - induced_rank[k - 1]
    table = CohomologyTable(
        complex=cid.family,
        d=cid.d,
        g=g,
        field=field_tag(fld),
        dims=dims,
        basis_sizes=sizes,
        window=(kmin, kmax),
        complete=complete,
        notes={"quotient": True},
    )
    table.check_consistency()
    return table


def d_squared_report(
    cid: ComplexId,
    g: int,
    window: tuple | None = None,
    budget: int = DEFAULT_BUDGET,
    store: CacheStore | None = None,
):
    """Check delta(delta(x)) == 0 exactly over Q for every basis generator.

    For relation families the composite must land in the relation subspace;
    for everything else it must vanish on the nose.  Returns (columns
    checked, violations).
    """
    spec = spec_of(cid)
    kmin, kmax = window or default_window(cid, g)
    violations = []
    checked = 0
    for k in range(kmin, kmax + 1):
        basis = _cached_basis(cid, g, k, budget, store)
        rel2 = None
        for enc in basis.encodings:
            x = decode(enc)
            dd = delta_chain(cid, delta(cid, x))
            checked += 1
            if dd.is_zero():
                continue
            if spec.relations is None:
                violations.append((k, enc))
                continue
            if rel2 is None:
                b2 = _cached_basis(cid, g, k + 2, budget, store)
                rel2 = relation_matrix(cid, g, k + 2, basis=b2, budget=budget)
                idx2 = b2.index()
            vec = SparseMatrix(rel2.rows, 1, "Q")
            for e2, c2 in dd.terms.items():
                vec[idx2[e2], 0] = c2
            base_rank = rel2.rank()
            if hstack(rel2, vec).rank() != base_rank:
                violations.append((k, enc))
    return checked, violations
