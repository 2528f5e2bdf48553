"""CSS outer codes: validation and the hypergraph/lifted product constructions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gf2


class CssValidationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CssCode:
    """A CSS code given by its X- and Z-check matrices (uint8, dense)."""

    h_x: np.ndarray
    h_z: np.ndarray
    d: Optional[int] = None
    name: str = ""
    _k: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.h_z.shape[1]

    @property
    def k(self) -> int:
        if not self._k:
            self._k.append(self.n - gf2.rank(self.h_x) - gf2.rank(self.h_z))
        return self._k[0]

    def check_matrix(self, basis: str) -> np.ndarray:
        return self.h_x if basis == "X" else self.h_z

    def __repr__(self) -> str:
        d = "?" if self.d is None else self.d
        label = f"{self.name} " if self.name else ""
        return f"<CssCode {label}[[{self.n},{self.k},{d}]]>"


def validate_css(h_x, h_z, d: Optional[int] = None, name: str = "") -> CssCode:
    """Build a :class:`CssCode`, rejecting shape mismatches and anticommuting checks."""
    h_x = _as_matrix(h_x, "h_x")
    h_z = _as_matrix(h_z, "h_z")
    if h_x.shape[1] != h_z.shape[1]:
        raise CssValidationError(f"column mismatch: h_x has {h_x.shape[1]} columns, h_z has {h_z.shape[1]}")
    overlap = (h_x.astype(np.int64) @ h_z.T.astype(np.int64)) % 2
    bad = np.argwhere(overlap)
    if bad.size:
        i, j = bad[0]
        raise CssValidationError(
            f"h_x row {i} anticommutes with h_z row {j} ({len(bad)} offending pair(s))"
        )
    return CssCode(h_x, h_z, d=d, name=name)


def _as_matrix(a, label: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2:
        raise CssValidationError(f"{label} must be two-dimensional, got shape {a.shape}")
    if a.size and not np.all((a == 0) | (a == 1)):
        raise CssValidationError(f"{label} must be binary")
    return np.ascontiguousarray(a, dtype=np.uint8)


def repetition_checks(length: int) -> np.ndarray:
    h = np.zeros((length - 1, length), dtype=np.uint8)
    for i in range(length - 1):
        h[i, i] = h[i, i + 1] = 1
    return h


def repetition_code(length: int = 3) -> CssCode:
    """Bit-flip repetition code: Z checks only, corrects X errors."""
    h_z = repetition_checks(length)
    return validate_css(np.zeros((0, length), dtype=np.uint8), h_z, d=length, name=f"repetition{length}")


def hamming_checks() -> np.ndarray:
    return np.array(
        [[1, 0, 1, 0, 1, 0, 1], [0, 1, 1, 0, 0, 1, 1], [0, 0, 0, 1, 1, 1, 1]], dtype=np.uint8
    )


def steane_code() -> CssCode:
    h = hamming_checks()
    return validate_css(h, h, d=3, name="steane")


def hypergraph_product(h1, h2, name: str = "") -> CssCode:
    """Hypergraph product: H_X = [H1 x I | I x H2^T], H_Z = [I x H2 | H1^T x I]."""
    h1 = np.asarray(h1, dtype=np.uint8)
    h2 = np.asarray(h2, dtype=np.uint8)
    if not h1.any() or not h2.any():
        raise ValueError("hypergraph product needs nonzero input matrices")
    m1, n1 = h1.shape
    m2, n2 = h2.shape
    h_x = np.hstack([np.kron(h1, np.eye(n2, dtype=np.uint8)), np.kron(np.eye(m1, dtype=np.uint8), h2.T)])
    h_z = np.hstack([np.kron(np.eye(n1, dtype=np.uint8), h2), np.kron(h1.T, np.eye(m2, dtype=np.uint8))])
    return validate_css(h_x, h_z, name=name)


# ---------------------------------------------------------------------------
# lifted product over the group algebra F2[x]/(x^L - 1)
#
# A ring element is a frozenset of exponents (a sum of monomials x^a).


def _poly(entry, lift: int) -> frozenset:
    if entry is None:
        return frozenset()
    if isinstance(entry, (int, np.integer)):
        entry = [entry]
    counts = Counter()
    for a in entry:
        a = int(a)
        if not 0 <= a < lift:
            raise ValueError(f"exponent {a} out of range for lift size {lift}")
        counts[a] += 1
    return frozenset(a for a, c in counts.items() if c % 2)


def _poly_mul(p: frozenset, q: frozenset, lift: int) -> frozenset:
    counts = Counter((a + b) % lift for a in p for b in q)
    return frozenset(a for a, c in counts.items() if c % 2)


def _ring_matrix(base, lift: int) -> list[list[frozenset]]:
    rows = [[_poly(e, lift) for e in row] for row in base]
    if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
        raise ValueError("base matrix must be a nonempty rectangular nested list")
    return rows


def _ring_conj_transpose(a: list[list[frozenset]], lift: int) -> list[list[frozenset]]:
    return [[frozenset((-e) % lift for e in a[i][j]) for i in range(len(a))] for j in range(len(a[0]))]


def _ring_eye(n: int) -> list[list[frozenset]]:
    one, zero = frozenset([0]), frozenset()
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def _ring_kron(a, b, lift: int) -> list[list[frozenset]]:
    ra, ca, rb, cb = len(a), len(a[0]), len(b), len(b[0])
    out = [[frozenset()] * (ca * cb) for _ in range(ra * rb)]
    for i in range(ra):
        for j in range(ca):
            if not a[i][j]:
                continue
            for k in range(rb):
                for l in range(cb):
                    if b[k][l]:
                        out[i * rb + k][j * cb + l] = _poly_mul(a[i][j], b[k][l], lift)
    return out


def _lift(a: list[list[frozenset]], lift: int) -> np.ndarray:
    rows, cols = len(a), len(a[0])
    out = np.zeros((rows * lift, cols * lift), dtype=np.uint8)
    t = np.arange(lift)
    for i in range(rows):
        for j in range(cols):
            for e in a[i][j]:
                # circulant permutation: row t has its one in column t + e
                out[i * lift + t, j * lift + (t + e) % lift] ^= 1
    return out


def lifted_product(base1: Sequence, base2: Sequence, lift_size: int, name: str = "") -> CssCode:
    """Lifted product of two base matrices over the cyclic group algebra.

    Entries of ``base1``/``base2`` are lists of shift exponents in
    ``[0, lift_size)`` (an empty list or ``None`` is the zero element).
    The hypergraph-product block structure is applied over the ring and the
    result is lifted to circulant blocks, so ``lift_size=1`` reproduces
    :func:`hypergraph_product` exactly.
    """
    if lift_size < 1:
        raise ValueError("lift size must be positive")
    a = _ring_matrix(base1, lift_size)
    b = _ring_matrix(base2, lift_size)
    m1, n1 = len(a), len(a[0])
    m2, n2 = len(b), len(b[0])
    at = _ring_conj_transpose(a, lift_size)
    bt = _ring_conj_transpose(b, lift_size)
    h_x = np.hstack([
        _lift(_ring_kron(a, _ring_eye(n2), lift_size), lift_size),
        _lift(_ring_kron(_ring_eye(m1), bt, lift_size), lift_size),
    ])
    h_z = np.hstack([
        _lift(_ring_kron(_ring_eye(n1), b, lift_size), lift_size),
        _lift(_ring_kron(at, _ring_eye(m2), lift_size), lift_size),
    ])
    return validate_css(h_x, h_z, name=name)


#: Exponent matrix of the (3,5)-regular quasi-cyclic base used for the bundled lifted product code.
TANNER_EXPONENTS = [[1, 2, 4, 8, 16], [5, 10, 20, 9, 18], [25, 19, 7, 14, 28]]


def tanner_lifted_product() -> CssCode:
    base = [[[e] for e in row] for row in TANNER_EXPONENTS]
    code = lifted_product(base, base, 31, name="lp1054")
    return CssCode(code.h_x, code.h_z, d=20, name="lp1054")


# ---------------------------------------------------------------------------
# bivariate bicycle codes


def _shift(size: int) -> np.ndarray:
    return np.roll(np.eye(size, dtype=np.int64), 1, axis=1)


def bivariate_bicycle_terms(l: int, m: int, a_terms, b_terms):
    """Monomial matrices x^i y^j for the A and B polynomials (lists of (i, j))."""
    x = np.kron(_shift(l), np.eye(m, dtype=np.int64))
    y = np.kron(np.eye(l, dtype=np.int64), _shift(m))

    def mono(i, j):
        return (np.linalg.matrix_power(x, i) @ np.linalg.matrix_power(y, j)).astype(np.uint8)

    return [mono(*t) for t in a_terms], [mono(*t) for t in b_terms]


BB144 = dict(l=12, m=6, a_terms=[(3, 0), (0, 1), (0, 2)], b_terms=[(0, 3), (1, 0), (2, 0)])


def bivariate_bicycle(l: int, m: int, a_terms, b_terms, name: str = "") -> CssCode:
    """H_X = [A | B], H_Z = [B^T | A^T] with A, B sums of commuting monomials."""
    a_mats, b_mats = bivariate_bicycle_terms(l, m, a_terms, b_terms)
    a = sum(a_mats) % 2
    b = sum(b_mats) % 2
    return validate_css(np.hstack([a, b]), np.hstack([b.T, a.T]), name=name)


def bb144() -> CssCode:
    code = bivariate_bicycle(**BB144, name="bb144")
    return CssCode(code.h_x, code.h_z, d=12, name="bb144")
