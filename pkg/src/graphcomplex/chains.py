"""Finite formal sums of canonical generators with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction

from .families import ComplexId, ComplexSpec, is_generator
from .graphs import LabeledGraph, canonical_graph, encode


class Chain:
    """A formal sum ``sum(coeff * generator)`` in one complex.

    Keys are canonical encodings; zero coefficients are never stored.
    """

    __slots__ = ("cid", "terms")

    def __init__(self, cid: ComplexId, terms=None):
        self.cid = cid
        self.terms = dict(terms or {})

    def add(self, encoding: str, coeff):
        c = self.terms.get(encoding, 0) + coeff
        if c:
            self.terms[encoding] = c
        else:
            self.terms.pop(encoding, None)

    def add_graph(self, spec: ComplexSpec, g: LabeledGraph, coeff):
        """Canonicalize a labeled term and accumulate it, dropping terms that
        fail the family's generator predicate or vanish by symmetry."""
        if coeff == 0:
            return
        if not is_generator(spec, g):
            return
        canon, sign, zero = canonical_graph(g, spec.recipe)
        if zero:
            return
        self.add(encode(canon), sign * coeff)

    def add_chain(self, other: "Chain", coeff=1):
        if other.cid != self.cid:
            raise ValueError(f"chain complex mismatch: {self.cid} vs {other.cid}")
        for enc, c in other.terms.items():
            self.add(enc, c * coeff)

    def scaled(self, coeff) -> "Chain":
        if coeff == 0:
            return Chain(self.cid)
        return Chain(self.cid, {e: c * coeff for e, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, Chain)
            and self.cid == other.cid
            and self.terms == other.terms
        )

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return f"Chain({self.cid}, 0)"
        parts = [f"{c!s}*[{e}]" for e, c in sorted(self.terms.items())]
        return f"Chain({self.cid}, " + " + ".join(parts) + ")"


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)
