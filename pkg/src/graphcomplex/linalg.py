"""Sparse exact linear algebra over GF(p) and the rationals."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

DEFAULT_PRIME = 32003
CHECK_PRIME = 65521
_DENSE_LIMIT = 500


class FieldError(ValueError):
    """Raised when a rational entry cannot be reduced to the working field."""


def parse_field(tag):
    """'Q' or 'Fp:<prime>' (an int is taken as a prime)."""
    if tag in ("Q", "q"):
        return "Q"
    if isinstance(tag, int):
        return tag
    if isinstance(tag, str) and tag.startswith("Fp:"):
        return int(tag[3:])
    raise FieldError(f"unknown field {tag!r}; use 'Q' or 'Fp:<prime>'")


def field_tag(fld) -> str:
    return "Q" if fld == "Q" else f"Fp:{fld}"


def _reduce(value: Fraction, fld):
    if fld == "Q":
        return value
    p = fld
    num, den = value.numerator, value.denominator
    if den % p == 0:
        raise FieldError(f"denominator {den} vanishes in GF({p})")
    return num * pow(den, p - 2, p) % p


class SparseMatrix:
    """Coordinate-format matrix over GF(p) or Q with exact rank."""

    __slots__ = ("rows", "cols", "fld", "entries")

    def __init__(self, rows: int, cols: int, fld="Q", entries=None):
        self.rows = rows
        self.cols = cols
        self.fld = parse_field(fld)
        self.entries = {}
        if entries:
            for (r, c), v in dict(entries).items():
                self[r, c] = v

    def __setitem__(self, key, value):
        r, c = key
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
        v = _reduce(Fraction(value), self.fld) if self.fld == "Q" else value % self.fld
        if v:
            self.entries[r, c] = v
        else:
            self.entries.pop((r, c), None)

    def __getitem__(self, key):
        return self.entries.get(key, 0)

    @property
    def nnz(self):
        return len(self.entries)

    def to_field(self, fld) -> "SparseMatrix":
        fld = parse_field(fld)
        out = SparseMatrix(self.rows, self.cols, fld)
        for (r, c), v in self.entries.items():
            out.entries[r, c] = _reduce(Fraction(v), fld) if fld != "Q" else Fraction(v)
        return out

    def triplets(self):
        """Nonzero entries as (row, col, value), sorted by (col, row)."""
        return sorted(
            ((r, c, v) for (r, c), v in self.entries.items()),
            key=lambda t: (t[1], t[0]),
        )

    def to_text(self) -> str:
        head = f"#rows={self.rows};cols={self.cols};field={field_tag(self.fld)}\n"
        return head + "".join(f"{r} {c} {v}\n" for r, c, v in self.triplets())

    @classmethod
    def from_text(cls, text: str) -> "SparseMatrix":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#rows="):
            raise ValueError("malformed matrix file header")
        fields = dict(p.split("=", 1) for p in lines[0][1:].split(";"))
        m = cls(int(fields["rows"]), int(fields["cols"]), fields["field"])
        for line in lines[1:]:
            if not line.strip():
                continue
            r, c, v = line.split()
            m[int(r), int(c)] = Fraction(v)
        return m

    def rank(self) -> int:
        return rank(self)

    def compose_is_zero(self, other: "SparseMatrix") -> bool:
        """True iff self @ other == 0 (self.cols must equal other.rows)."""
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in composition")
        by_col = {}
        for (r, c), v in other.entries.items():
            by_col.setdefault(c, []).append((r, v))
        rows_of = {}
        for (r, c), v in self.entries.items():
            rows_of.setdefault(c, []).append((r, v))
        for c, col in by_col.items():
            acc = {}
            for mid, v in col:
                for r, w in rows_of.get(mid, ()):
                    acc[r] = acc.get(r, 0) + (w * v if self.fld == "Q" else w * v % self.fld)
            for r, total in acc.items():
                if (total if self.fld == "Q" else total % self.fld):
                    return False
        return True


def _rank_dense_modp(m: SparseMatrix) -> int:
    p = m.fld
    a = np.zeros((m.rows, m.cols), dtype=np.int64)
    for (r, c), v in m.entries.items():
        a[r, c] = v % p
    rank = 0
    row = 0
    for col in range(m.cols):
        piv = None
        for i in range(row, m.rows):
            if a[i, col] % p:
                piv = i
                break
        if piv is None:
            continue
        if piv != row:
            a[[row, piv]] = a[[piv, row]]
        inv = pow(int(a[row, col]), p - 2, p)
        a[row] = a[row] * inv % p
        nz = np.nonzero(a[row + 1 :, col] % p)[0]
        if len(nz):
            idx = nz + row + 1
            a[idx] = (a[idx] - np.outer(a[idx, col], a[row])) % p
        row += 1
        rank += 1
        if row == m.rows:
            break
    return rank


def _rank_sparse(m: SparseMatrix) -> int:
    """Row-elimination with a cheap Markowitz-style pivot choice: the column
    of least fill, then the shortest row in it."""
    p = None if m.fld == "Q" else m.fld
    rows = {}
    col_rows = {}
    for (r, c), v in m.entries.items():
        rows.setdefault(r, {})[c] = v
        col_rows.setdefault(c, set()).add(r)
    rank = 0
    while col_rows:
        c = min(col_rows, key=lambda cc: len(col_rows[cc]))
        rset = col_rows[c]
        r = min(rset, key=lambda rr: len(rows[rr]))
        pivot_row = rows.pop(r)
        for cc in pivot_row:
            s = col_rows.get(cc)
            if s is not None:
                s.discard(r)
                if not s:
                    del col_rows[cc]
        pv = pivot_row[c]
        inv = Fraction(1) / pv if p is None else pow(pv, p - 2, p)
        targets = list(col_rows.get(c, ()))
        for r2 in targets:
            row2 = rows[r2]
            factor = row2[c] * inv if p is None else row2[c] * inv % p
            for cc, v in pivot_row.items():
                delta = factor * v if p is None else factor * v % p
                cur = row2.get(cc, 0)
                new = cur - delta if p is None else (cur - delta) % p
                if new:
                    if cur == 0:
                        col_rows.setdefault(cc, set()).add(r2)
                    row2[cc] = new
                else:
                    if cur:
                        del row2[cc]
                        s = col_rows.get(cc)
                        if s is not None:
                            s.discard(r2)
                            if not s:
                                col_rows.pop(cc, None)
            if not row2:
                del rows[r2]
        col_rows.pop(c, None)
        rank += 1
    return rank


def rank(m: SparseMatrix) -> int:
    """Exact rank over the matrix's field."""
    if not m.entries:
        return 0
    if m.fld != "Q" and m.rows <= _DENSE_LIMIT and m.cols <= _DENSE_LIMIT:
        return _rank_dense_modp(m)
    return _rank_sparse(m)


def hstack(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """[a | b]; row counts and fields must agree."""
    if a.fld != b.fld:
        raise FieldError("field mismatch in hstack")
    rows = max(a.rows, b.rows)
    out = SparseMatrix(rows, a.cols + b.cols, a.fld)
    out.entries.update(a.entries)
    for (r, c), v in b.entries.items():
        out.entries[r, a.cols + c] = v
    return out


@dataclass
class CohomologyTable:
    """Cohomology dimensions of one complex at one loop order."""

    complex: str
    d: int
    g: int
    field: str
    dims: dict
    basis_sizes: dict
    window: tuple
    complete: bool = True
    notes: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "complex": self.complex,
                "d": self.d,
                "g": self.g,
                "field": self.field,
                "dims": {str(k): v for k, v in sorted(self.dims.items())},
                "basis_sizes": {str(k): v for k, v in sorted(self.basis_sizes.items())},
                "window": list(self.window),
                "complete": self.complete,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "CohomologyTable":
        obj = json.loads(text)
        return cls(
            complex=obj["complex"],
            d=obj["d"],
            g=obj["g"],
            field=obj["field"],
            dims={int(k): v for k, v in obj["dims"].items()},
            basis_sizes={int(k): v for k, v in obj["basis_sizes"].items()},
            window=tuple(obj["window"]),
            complete=obj["complete"],
        )

    def total(self) -> int:
        return sum(self.dims.values())

    def nonzero(self) -> dict:
        return {k: v for k, v in sorted(self.dims.items()) if v}

    def check_consistency(self):
        for k, dim in self.dims.items():
            if dim < 0:
                raise AssertionError(f"negative dimension at degree {k}")
            if dim > self.basis_sizes.get(k, 0):
                raise AssertionError(f"dim exceeds basis size at degree {k}")
        if self.complete:
            euler_h = sum((-1) ** k * v for k, v in self.dims.items())
            euler_b = sum((-1) ** k * v for k, v in self.basis_sizes.items())
            if euler_h != euler_b:
                raise AssertionError(
                    f"Euler characteristic mismatch: H gives {euler_h}, "
                    f"bases give {euler_b}"
                )
