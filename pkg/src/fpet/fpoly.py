"""Fractional polynomials over Q^D and their families.

A fractional polynomial of height d in ambient dimension D is the map

    phi(t) = sum_{j=1}^{d} t^(j/d) * v_j,        v_j in Q^D,  t >= 0.

The height is part of the object's identity: the same map rewritten at a
doubled height (zero vectors at the odd indices) is a different object, and
the goodness predicate genuinely depends on the choice.  All coefficients are
exact rationals; every predicate here is decided symbolically.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .ratlinalg import (
    RatVec,
    as_fraction_vector,
    is_independent,
    matvec,
    rank,
    rref,
)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class FPoly:
    """One fractional polynomial: height, ambient dimension, coefficient rows.

    ``coeffs[j-1]`` is the vector attached to the power t^(j/d).
    """

    height: int
    ambient_dim: int
    coeffs: tuple[RatVec, ...]

    def __post_init__(self):
        if self.height < 1:
            raise ValueError("height must be a positive integer")
        if self.ambient_dim < 1:
            raise ValueError("ambient dimension must be a positive integer")
        if len(self.coeffs) != self.height:
            raise ValueError(
                f"need exactly {self.height} coefficient vectors, got {len(self.coeffs)}"
            )
        for v in self.coeffs:
            if len(v) != self.ambient_dim:
                raise ValueError("coefficient vector of wrong dimension")

    @classmethod
    def make(cls, rows: Sequence[Iterable], height: int | None = None) -> "FPoly":
        """Build from coefficient rows (ints / Fractions / 'p/q' strings).

        ``height`` may exceed ``len(rows)``; missing top rows are zero.
        """
        vecs = [as_fraction_vector(r) for r in rows]
        if not vecs:
            raise ValueError("at least one coefficient row is required")
        dim = len(vecs[0])
        d = height if height is not None else len(vecs)
        if d < len(vecs):
            raise ValueError("declared height smaller than the coefficient list")
        vecs.extend([(_ZERO,) * dim] * (d - len(vecs)))
        return cls(height=d, ambient_dim=dim, coeffs=tuple(vecs))

    def leading_index(self) -> int:
        """Largest j with v_j != 0, or 0 for the zero map."""
        for j in range(self.height, 0, -1):
            if any(x != 0 for x in self.coeffs[j - 1]):
                return j
        return 0


def evaluate(p: FPoly, t: float) -> tuple[float, ...]:
    """phi(t) = sum_j t^(j/d) v_j, computed in floating point."""
    t = float(t)
    if t < 0:
        raise ValueError("fractional polynomials are defined for t >= 0 only")
    d = p.height
    out = [0.0] * p.ambient_dim
    for j, v in enumerate(p.coeffs, start=1):
        w = t ** (j / d)
        for c in range(p.ambient_dim):
            out[c] += w * float(v[c])
    return tuple(out)


def degree(p: FPoly) -> Fraction:
    """Largest j/d with v_j != 0; the zero map has degree 0."""
    return Fraction(p.leading_index(), p.height)


def is_top_degree(p: FPoly) -> bool:
    return p.leading_index() == p.height


@lru_cache(maxsize=65536)
def is_good(p: FPoly) -> bool:
    """v_1, ..., v_{d*deg} linearly independent over Q (hence all nonzero).

    The zero map is never good.  Values are immutable, so results are cached.
    """
    lead = p.leading_index()
    if lead == 0:
        return False
    return is_independent(p.coeffs[:lead])


def span_v(p: FPoly) -> tuple[RatVec, ...]:
    """Canonical (reduced echelon) basis of span{v_1, ..., v_d}."""
    return tuple(rref(p.coeffs))


def lower_part(p: FPoly) -> FPoly:
    """Drop the top coefficient v_d; equals p when p is not top-degree."""
    zero = (_ZERO,) * p.ambient_dim
    return FPoly(p.height, p.ambient_dim, p.coeffs[:-1] + (zero,))


def subtract(p: FPoly, q: FPoly) -> FPoly:
    if p.height != q.height or p.ambient_dim != q.ambient_dim:
        raise ValueError("height/dimension mismatch in fractional-polynomial difference")
    rows = tuple(
        tuple(a - b for a, b in zip(u, w)) for u, w in zip(p.coeffs, q.coeffs)
    )
    return FPoly(p.height, p.ambient_dim, rows)


def map_coefficients(matrix: Sequence[Sequence], p: FPoly) -> FPoly:
    """Apply a rational linear map (rows of a D' x D matrix) to every v_j."""
    rows = [as_fraction_vector(r) for r in matrix]
    if any(len(r) != p.ambient_dim for r in rows):
        raise ValueError("matrix has the wrong number of columns")
    new = tuple(matvec(rows, v) for v in p.coeffs)
    return FPoly(p.height, len(rows), new)


@dataclass(frozen=True)
class FPolyFamily:
    """An ordered tuple of fractional polynomials sharing height and dimension.

    The empty family (k = 0) is allowed; it is the terminal object of
    precedence chains and keeps its height and dimension.
    """

    height: int
    ambient_dim: int
    members: tuple[FPoly, ...]

    def __post_init__(self):
        for p in self.members:
            if p.height != self.height or p.ambient_dim != self.ambient_dim:
                raise ValueError("family members must share height and ambient dimension")

    @classmethod
    def of(cls, members: Sequence[FPoly]) -> "FPolyFamily":
        if not members:
            raise ValueError("use the explicit constructor for an empty family")
        return cls(members[0].height, members[0].ambient_dim, tuple(members))

    @classmethod
    def make(cls, member_rows: Sequence[Sequence[Iterable]], height: int | None = None) -> "FPolyFamily":
        """Build from a list of coefficient-row lists, padded to a shared height."""
        d = height if height is not None else max(len(rows) for rows in member_rows)
        return cls.of([FPoly.make(rows, height=d) for rows in member_rows])

    @property
    def k(self) -> int:
        return len(self.members)

    def degrees(self) -> tuple[Fraction, ...]:
        return tuple(degree(p) for p in self.members)


@lru_cache(maxsize=65536)
def family_is_good(f: FPolyFamily) -> bool:
    """Every member good, and all nonzero v_{i,j} across the family jointly
    independent (a repeated vector counts as a dependence).  Cached: this is
    the hot predicate of the precedence order."""
    if not all(is_good(p) for p in f.members):
        return False
    vectors = [v for p in f.members for v in p.coeffs if any(x != 0 for x in v)]
    return is_independent(vectors)


def lift_to_independent(
    polys: Sequence[Sequence[Iterable]], height: int | None = None
) -> tuple[FPolyFamily, tuple[RatVec, ...]]:
    """Rewrite integer/rational polynomial maps with formally independent coefficients.

    ``polys[i]`` lists the coefficient vectors u_{i,1}, ..., u_{i,d_i} of
    t -> sum_j t^j u_{i,j} (no constant term).  With d a common degree bound,
    the result is the family of height-d maps whose coefficients are the
    standard basis of Q^(k*d), paired with the D x (k*d) matrix sending basis
    vector (i, j) back to u_{i,j}.  Applying the matrix to the lifted family
    (see :func:`map_coefficients`) reproduces the inputs coefficient-wise.
    """
    if not polys:
        raise ValueError("at least one polynomial is required")
    coeff_lists = [[as_fraction_vector(u) for u in p] for p in polys]
    if any(not p for p in coeff_lists):
        raise ValueError("each polynomial needs at least one coefficient vector")
    dim = len(coeff_lists[0][0])
    for p in coeff_lists:
        for u in p:
            if len(u) != dim:
                raise ValueError("coefficient vectors of mixed dimension")
    d = height if height is not None else max(len(p) for p in coeff_lists)
    if d < max(len(p) for p in coeff_lists):
        raise ValueError("degree bound smaller than an input degree")
    k = len(coeff_lists)
    big = k * d
    zero_pad = (_ZERO,) * dim
    members = []
    for i in range(k):
        rows = []
        for j in range(d):
            e = [_ZERO] * big
            e[i * d + j] = Fraction(1)
            rows.append(tuple(e))
        members.append(FPoly(d, big, tuple(rows)))
    # matrix rows: D entries indexed by (i, j) column order
    matrix = []
    for r in range(dim):
        row = []
        for i in range(k):
            padded = coeff_lists[i] + [zero_pad] * (d - len(coeff_lists[i]))
            row.extend(padded[j][r] for j in range(d))
        matrix.append(tuple(row))
    return FPolyFamily.of(members), tuple(matrix)


def random_good_family(
    rng: random.Random, k: int, height: int, dim: int
) -> FPolyFamily:
    """A random good family: degrees drawn freely, coefficients taken from a
    random invertible rational matrix so joint independence holds by
    construction.  Requires dim >= sum of the leading indices drawn; degrees
    are resampled until they fit."""
    if k < 1 or height < 1 or dim < k:
        raise ValueError("need k >= 1, height >= 1 and dim >= k")
    while True:
        leads = [rng.randint(1, height) for _ in range(k)]
        if sum(leads) <= dim:
            break
    # random unimodular matrix via integer shears, then rational row scaling
    mat = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    for _ in range(2 * dim):
        i, j = rng.randrange(dim), rng.randrange(dim)
        if i == j:
            continue
        c = rng.choice([-2, -1, 1, 2])
        mat[i] = [a + c * b for a, b in zip(mat[i], mat[j])]
    scales = [Fraction(rng.choice([1, 1, 2, 3]), rng.choice([1, 1, 2, 3])) for _ in range(dim)]
    rows = [tuple(s * x for x in row) for s, row in zip(scales, mat)]
    rng.shuffle(rows)
    members = []
    pos = 0
    for lead in leads:
        members.append(FPoly.make(rows[pos : pos + lead], height=height))
        pos += lead
    return FPolyFamily.of(members)


# ---------------------------------------------------------------------------
# text format: height / ambient_dim / coefficient table of "p/q" strings


def family_to_text(f: FPolyFamily) -> str:
    lines = [
        f"height = {f.height}",
        f"ambient_dim = {f.ambient_dim}",
        f"members = {f.k}",
    ]
    for i, p in enumerate(f.members, start=1):
        for j, v in enumerate(p.coeffs, start=1):
            entries = " ".join(f"{x.numerator}/{x.denominator}" for x in v)
            lines.append(f"v[{i}][{j}] = {entries}")
    return "\n".join(lines) + "\n"


def family_from_text(text: str, path: str = "<family>") -> FPolyFamily:
    from .textkv import ParseError, parse_rational, scan_kv

    fields = {"height": None, "ambient_dim": None, "members": None}
    table: dict[tuple[int, int], RatVec] = {}
    for lineno, key, value in scan_kv(text, path):
        if key in fields:
            if fields[key] is not None:
                raise ParseError(path, lineno, f"duplicate key {key!r}")
            try:
                fields[key] = int(value)
            except ValueError:
                raise ParseError(path, lineno, f"{key} must be an integer") from None
        elif key.startswith("v[") and key.endswith("]"):
            try:
                i_s, j_s = key[2:-1].split("][")
                i, j = int(i_s), int(j_s)
            except ValueError:
                raise ParseError(path, lineno, f"bad coefficient key {key!r}") from None
            if (i, j) in table:
                raise ParseError(path, lineno, f"duplicate coefficient v[{i}][{j}]")
            table[(i, j)] = tuple(
                parse_rational(tok, path, lineno) for tok in value.split()
            )
        else:
            raise ParseError(path, lineno, f"unknown key {key!r}")
    for name, val in fields.items():
        if val is None:
            raise ParseError(path, 0, f"missing key {name!r}")
        if val < 1:
            raise ParseError(path, 0, f"{name} must be positive")
    d, dim, k = fields["height"], fields["ambient_dim"], fields["members"]
    members = []
    for i in range(1, k + 1):
        rows = []
        for j in range(1, d + 1):
            v = table.pop((i, j), None)
            if v is None:
                raise ParseError(path, 0, f"missing coefficient v[{i}][{j}]")
            if len(v) != dim:
                raise ParseError(path, 0, f"v[{i}][{j}] has {len(v)} entries, expected {dim}")
            rows.append(v)
        members.append(FPoly(d, dim, tuple(rows)))
    if table:
        i, j = next(iter(table))
        raise ParseError(path, 0, f"unexpected coefficient v[{i}][{j}]")
    return FPolyFamily(d, dim, tuple(members))
