"""
Brute-force successive minima

The lattice vectors sum_i c_i b_i with every deg c_i <= deg_bound form a
finite F_q-vector space. Its unknowns are the coefficients of the c_i; each
maps to the coefficients of the resulting vector. Ordering those image
coordinates by shifted degree (highest first) and bringing the unknowns to
row echelon form gives an F_q-basis in which every combination has the norm
of its highest pivot, so the vectors of norm <= D are exactly the span of the
echelon rows with pivot level <= D. Feeding those rows to a greedy
independence test over F_q[X] in order of increasing level yields the minima.

Nothing here touches the weak Popov reduction, so it serves as an
independent cross-check of successive_minima.
"""

import logging
from typing import List, Optional, Sequence, Tuple

from src.algebra.poly import Poly, poly_gcd
from src.config.settings import settings
from src.exceptions import BudgetExceeded, SingularBasis
from src.lattice.shifted import MinimaProfile, ShiftedLattice, Vector

logger = logging.getLogger(__name__)


class _Echelon:
    """Fraction-free row echelon form over F_q[X], used only as an independence test."""

    def __init__(self):
        self.rows: List[Tuple[int, List[Poly]]] = []

    def insert(self, vector: Sequence[Poly]) -> bool:
        """Add vector if independent of the rows so far; True when added."""
        v = list(vector)
        for pivot, row in self.rows:
            if v[pivot]:
                a, b = row[pivot], v[pivot]
                v = [a * x - b * y for x, y in zip(v, row)]
        nonzero = [j for j, e in enumerate(v) if e]
        if not nonzero:
            return False
        content = v[nonzero[0]]
        for j in nonzero[1:]:
            content = poly_gcd(content, v[j])
        if content.deg > 0:
            v = [e // content for e in v]
        self.rows.append((nonzero[0], v))
        return True


def _image_coordinates(lattice: ShiftedLattice, deg_bound: int) -> List[Tuple[int, int, int]]:
    """(level, column, exponent) of every coefficient a bounded combination can touch, highest level first."""
    weights = lattice.weights
    coordinates = []
    for j in range(lattice.dim):
        degrees = [row[j].deg for row in lattice.basis if row[j]]
        if not degrees:
            continue
        for e in range(max(degrees) + deg_bound + 1):
            coordinates.append((e + weights[j], j, e))
    coordinates.sort(key=lambda c: (-c[0], c[1], -c[2]))
    return coordinates


def _graded_basis(lattice: ShiftedLattice, deg_bound: int, coordinates) -> List[Tuple[int, List[int]]]:
    """
    Row echelon form of the bounded combinations

    Returns:
        (norm, unknowns) per echelon row, unknowns indexed i * (deg_bound + 1) + k
        for the coefficient of X^k in c_i
    """
    field = lattice.ring.field
    width = deg_bound + 1
    position = {(j, e): index for index, (_, j, e) in enumerate(coordinates)}
    pending = []
    for i, row in enumerate(lattice.basis):
        for k in range(width):
            image = [0] * len(coordinates)
            for j, entry in enumerate(row):
                for e in range(entry.deg + 1 if entry else 0):
                    c = entry.coeff(e)
                    if c:
                        image[position[(j, e + k)]] = c
            unknowns = [0] * (lattice.dim * width)
            unknowns[i * width + k] = 1
            pending.append((image, unknowns))

    graded = []
    for column, (level, _, _) in enumerate(coordinates):
        pivot = next((r for r in pending if r[0][column]), None)
        if pivot is None:
            continue
        pending.remove(pivot)
        inv = field.inv(pivot[0][column])
        for index, (image, unknowns) in enumerate(pending):
            c = image[column]
            if c:
                factor = field.mul(c, inv)
                pending[index] = (
                    [field.sub(a, field.mul(factor, b)) for a, b in zip(image, pivot[0])],
                    [field.sub(a, field.mul(factor, b)) for a, b in zip(unknowns, pivot[1])],
                )
        graded.append((level, pivot[1]))
    if pending:
        raise SingularBasis("a nonzero combination of basis rows vanishes")
    return graded


def brute_force_minima(lattice: ShiftedLattice, deg_bound: int, budget: Optional[int] = None) -> MinimaProfile:
    """
    Successive minima over coefficient vectors of bounded degree

    Args:
        lattice: Lattice to enumerate
        deg_bound: Largest coefficient degree enumerated
        budget: Maximum size (unknowns times image coordinates) of the linear system

    Returns:
        Minima restricted to the enumerated vectors; never below the true minima

    Raises:
        BudgetExceeded: the linear system is larger than the budget
    """
    if deg_bound < 0:
        raise ValueError("deg_bound must be >= 0")
    budget = budget or settings.ENUMERATION_BUDGET
    ring, dim = lattice.ring, lattice.dim
    width = deg_bound + 1
    coordinates = _image_coordinates(lattice, deg_bound)
    requested = dim * width * len(coordinates)
    if requested > budget:
        raise BudgetExceeded(
            f"a {dim * width} x {len(coordinates)} system exceeds the enumeration budget {budget}",
            budget=budget, requested=requested,
        )

    graded = _graded_basis(lattice, deg_bound, coordinates)
    graded.sort(key=lambda item: item[0])
    logger.debug(f"Graded basis of {len(graded)} vectors, norms {graded[0][0]}..{graded[-1][0]}")

    echelon = _Echelon()
    d, witnesses, vectors = [], [], []
    for norm, unknowns in graded:
        coefficients: Vector = tuple(
            ring.from_coeffs(unknowns[i * width:(i + 1) * width]) for i in range(dim)
        )
        if echelon.insert(coefficients):
            d.append(norm)
            witnesses.append(coefficients)
            vectors.append(lattice.vector(coefficients))
            if len(d) == dim:
                break
    return MinimaProfile(d=tuple(d), witnesses=tuple(witnesses), vectors=tuple(vectors))
