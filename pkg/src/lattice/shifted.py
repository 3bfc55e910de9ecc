"""
Shifted polynomial lattices and their successive minima

A ShiftedLattice is spanned by the rows of a square polynomial matrix. The
norm of a row vector r is max_j (deg r_j + shift_j + offset_j): shifts carry
the diagonal flow, offsets undo the powers of X used to clear Laurent entries.
Reduction to shifted weak Popov form (distinct pivot columns) makes the sorted
row degrees the successive minima exponents, with the transform rows as
witnesses.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from src.algebra.degree import NEG_INF, DegValue
from src.algebra.poly import Poly
from src.exceptions import SingularBasis

logger = logging.getLogger(__name__)

Vector = Tuple[Poly, ...]


@dataclass(frozen=True)
class ShiftedLattice:
    """
    Lattice basis with degree shifts

    Args:
        basis: Rows of a nonsingular square matrix over F_q[X]
        shifts: Integer shift per column
        column_offsets: Integer per column restoring true degrees of cleared entries
        covolume: Known log_q covolume, asserted against the sum of the minima when set
    """

    basis: Tuple[Vector, ...]
    shifts: Tuple[int, ...]
    column_offsets: Tuple[int, ...] = None
    covolume: Optional[int] = None

    def __post_init__(self):
        basis = tuple(tuple(row) for row in self.basis)
        dim = len(basis)
        if dim == 0 or any(len(row) != dim for row in basis):
            raise ValueError("basis must be a nonempty square matrix")
        offsets = self.column_offsets if self.column_offsets is not None else (0,) * dim
        if len(self.shifts) != dim or len(offsets) != dim:
            raise ValueError("shifts and column offsets need one entry per column")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "shifts", tuple(self.shifts))
        object.__setattr__(self, "column_offsets", tuple(offsets))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def ring(self) -> type:
        return type(self.basis[0][0])

    @property
    def weights(self) -> Tuple[int, ...]:
        return tuple(s + o for s, o in zip(self.shifts, self.column_offsets))

    def with_shifts(self, shifts: Sequence[int]) -> "ShiftedLattice":
        return ShiftedLattice(self.basis, tuple(shifts), self.column_offsets, self.covolume)

    def scaled(self, k: int) -> "ShiftedLattice":
        """Basis multiplied by X^k; every minimum moves by k."""
        basis = tuple(tuple(e << k for e in row) for row in self.basis)
        covolume = None if self.covolume is None else self.covolume + self.dim * k
        return ShiftedLattice(basis, self.shifts, self.column_offsets, covolume)

    def vector(self, coefficients: Sequence[Poly]) -> Vector:
        """Lattice vector sum_i coefficients[i] * basis[i]."""
        ring = self.ring
        out = [ring.zero() for _ in range(self.dim)]
        for c, row in zip(coefficients, self.basis):
            if c:
                out = [o + c * e for o, e in zip(out, row)]
        return tuple(out)

    def norm(self, vector: Sequence[Poly]) -> DegValue:
        return row_degree(vector, self.weights)[0]


@dataclass(frozen=True)
class MinimaProfile:
    """
    Successive minima with witnesses

    d is sorted ascending; witnesses[i] is the coefficient vector (relative to
    the input basis) of a lattice vector of norm d[i]; vectors[i] is that
    lattice vector.
    """

    d: Tuple[int, ...]
    witnesses: Tuple[Vector, ...]
    vectors: Tuple[Vector, ...]

    @property
    def first(self) -> int:
        return self.d[0]

    @property
    def total(self) -> int:
        return sum(self.d)


def row_degree(row: Sequence[Poly], weights: Sequence[int]) -> Tuple[DegValue, int]:
    """Shifted row degree and pivot (rightmost column attaining it); (-inf, -1) for a zero row."""
    best, pivot = NEG_INF, -1
    for j, entry in enumerate(row):
        d = entry.deg
        if d is NEG_INF:
            continue
        value = d + weights[j]
        if value >= best:
            best, pivot = value, j
    return best, pivot


class ReductionSession:
    """
    Shifted weak Popov reduction with the transform kept alongside

    The session owns mutable rows; callers change weights or columns and
    call reduce() again. Owned by one caller at a time.
    """

    def __init__(self, lattice: ShiftedLattice):
        self.ring = lattice.ring
        self.field = self.ring.field
        self.dim = lattice.dim
        self.shifts = list(lattice.shifts)
        self.offsets = list(lattice.column_offsets)
        self.covolume = lattice.covolume
        self.rows: List[List[Poly]] = [list(row) for row in lattice.basis]
        one, zero = self.ring.one(), self.ring.zero()
        self.trans: List[List[Poly]] = [[one if i == j else zero for j in range(self.dim)] for i in range(self.dim)]
        self.info: List[Tuple[DegValue, int]] = []
        self.steps = 0
        self.reduce()

    @property
    def weights(self) -> List[int]:
        return [s + o for s, o in zip(self.shifts, self.offsets)]

    def copy(self) -> "ReductionSession":
        other = object.__new__(ReductionSession)
        other.ring, other.field, other.dim = self.ring, self.field, self.dim
        other.shifts, other.offsets, other.covolume = list(self.shifts), list(self.offsets), self.covolume
        other.rows = [list(r) for r in self.rows]
        other.trans = [list(r) for r in self.trans]
        other.info = list(self.info)
        other.steps = 0
        return other

    def set_shifts(self, shifts: Sequence[int]) -> None:
        self.shifts = list(shifts)
        self.reduce()

    def advance(self, dt: int = 1) -> None:
        """Move the diagonal flow by dt: shifts change by (-n dt, dt, ..., dt)."""
        n = self.dim - 1
        self.set_shifts([self.shifts[0] - n * dt] + [s + dt for s in self.shifts[1:]])

    def reduce(self) -> None:
        weights = self.weights
        self.info = [row_degree(r, weights) for r in self.rows]
        if any(p == -1 for _, p in self.info):
            raise SingularBasis("basis has a zero row")
        field = self.field
        while True:
            seen = {}
            conflict = None
            for i, (_, pivot) in enumerate(self.info):
                if pivot in seen:
                    conflict = (seen[pivot], i, pivot)
                    break
                seen[pivot] = i
            if conflict is None:
                return
            i, k, pivot = conflict
            di, dk = self.rows[i][pivot].deg, self.rows[k][pivot].deg
            if di < dk:
                i, k, di, dk = k, i, dk, di
            delta = di - dk
            c = field.div(self.rows[i][pivot].lc, self.rows[k][pivot].lc)
            self.rows[i] = [a.submul_shift(b, c, delta) for a, b in zip(self.rows[i], self.rows[k])]
            self.trans[i] = [a.submul_shift(b, c, delta) for a, b in zip(self.trans[i], self.trans[k])]
            self.info[i] = row_degree(self.rows[i], weights)
            self.steps += 1
            if self.info[i][1] == -1:
                raise SingularBasis("row reduced to zero")

    def order(self) -> List[int]:
        """Row indices sorted by shifted degree, ties by pivot column."""
        return sorted(range(self.dim), key=lambda i: (self.info[i][0], self.info[i][1]))

    def profile(self) -> MinimaProfile:
        order = self.order()
        d = tuple(self.info[i][0] for i in order)
        if self.covolume is not None and sum(d) != self.covolume:
            raise SingularBasis(f"minima sum {sum(d)} differs from covolume exponent {self.covolume}")
        return MinimaProfile(
            d=d,
            witnesses=tuple(tuple(self.trans[i]) for i in order),
            vectors=tuple(tuple(self.rows[i]) for i in order),
        )

    def first_minimum(self) -> int:
        return min(deg for deg, _ in self.info)

    def certify(self, floor) -> bool:
        """
        True when the minima are constant for every perturbation of the
        non-first columns' Laurent entries by terms of degree <= floor

        The first column of each transform row is the denominator g of the
        row; the perturbation of row i is bounded by deg g + floor + shift_j.
        """
        if floor is NEG_INF:
            return True
        widest = max(self.shifts[1:])
        for i in range(self.dim):
            delta = self.trans[i][0].deg
            if delta is NEG_INF:
                continue
            if delta + floor + widest > self.info[i][0]:
                return False
        return True

    def shortest(self) -> Vector:
        """Canonical witness of the first minimum."""
        d1 = self.first_minimum()
        tied = [i for i in range(self.dim) if self.info[i][0] == d1]
        return canonical_combination([self.trans[i] for i in tied], self.field)


def normalize(vector: Sequence[Poly], field) -> Vector:
    """Scale so the leading coefficient of the first nonzero entry is 1."""
    for entry in vector:
        if entry:
            inv = field.inv(entry.lc)
            return tuple(e.scale(inv) for e in vector)
    raise ValueError("cannot normalize the zero vector")


def vector_key(vector: Sequence[Poly]) -> Tuple:
    return tuple(e.sort_key() for e in vector)


def canonical_combination(rows: Sequence[Sequence[Poly]], field) -> Vector:
    """
    Lexicographically least normalized vector among nonzero F_q-combinations

    Args:
        rows: Vectors whose F_q-span (minus zero) is the candidate set
        field: Coefficient field

    Returns:
        The canonical representative
    """
    if len(rows) == 1:
        return normalize(rows[0], field)
    ring = type(rows[0][0])
    best, best_key = None, None
    for coeffs in itertools.product(field.elements(), repeat=len(rows)):
        if not any(coeffs):
            continue
        # leading nonzero coefficient 1 is enough: every other combination is a scalar multiple
        first = next(c for c in coeffs if c)
        if first != 1:
            continue
        combo = [ring.zero() for _ in rows[0]]
        for c, row in zip(coeffs, rows):
            if c:
                combo = [a + b.scale(c) for a, b in zip(combo, row)]
        if not any(combo):
            continue
        candidate = normalize(combo, field)
        key = vector_key(candidate)
        if best_key is None or key < best_key:
            best, best_key = candidate, key
    return best


def shifted_reduce(lattice: ShiftedLattice) -> ShiftedLattice:
    """Reduced basis spanning the same module, pivots pairwise distinct."""
    session = ReductionSession(lattice)
    order = session.order()
    basis = tuple(tuple(session.rows[i]) for i in order)
    return ShiftedLattice(basis, lattice.shifts, lattice.column_offsets, lattice.covolume)


def successive_minima(lattice: ShiftedLattice) -> MinimaProfile:
    return ReductionSession(lattice).profile()


def shortest_vector(lattice: ShiftedLattice) -> Vector:
    """Canonical coefficient vector attaining the first minimum."""
    return ReductionSession(lattice).shortest()
