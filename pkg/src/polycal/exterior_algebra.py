"""Exterior algebra over R^N with dense coefficients.

Grade-m multivectors are stored as dense vectors over the lexicographically
ordered basis ``e_{i1} ^ ... ^ e_{im}`` with ``i1 < ... < im``, which is
orthonormal for the Euclidean inner product used throughout.  The module also
provides the geometric primitives tied to oriented simplices: the unit simple
m-vector of a simplex and its m-dimensional Hausdorff measure.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from . import config


class DegenerateSimplexError(ValueError):
    """Raised when an operation requires affinely independent vertices."""


@lru_cache(maxsize=None)
def basis_index_sets(ambient_dim: int, grade: int) -> tuple:
    """Lexicographically ordered index sets for the grade-m basis of Lambda_m R^N."""
    return tuple(itertools.combinations(range(ambient_dim), grade))


@lru_cache(maxsize=None)
def _basis_positions(ambient_dim: int, grade: int) -> dict:
    return {s: i for i, s in enumerate(basis_index_sets(ambient_dim, grade))}


@lru_cache(maxsize=None)
def _wedge_table(ambient_dim: int, p: int, q: int):
    """Index/sign table so that wedge reduces to one scatter-add.

    Entry k says: coefficient ``a[ia[k]] * b[ib[k]] * sign[k]`` accumulates
    into output slot ``iout[k]``.  Signs count the inversions needed to merge
    the two sorted index sets.
    """
    basis_p = basis_index_sets(ambient_dim, p)
    basis_q = basis_index_sets(ambient_dim, q)
    out_pos = _basis_positions(ambient_dim, p + q)
    ia, ib, iout, signs = [], [], [], []
    for i, left in enumerate(basis_p):
        left_set = set(left)
        for j, right in enumerate(basis_q):
            if left_set & set(right):
                continue
            inversions = sum(1 for a in left for b in right if a > b)
            ia.append(i)
            ib.append(j)
            iout.append(out_pos[tuple(sorted(left + right))])
            signs.append(-1.0 if inversions % 2 else 1.0)
    return (
        np.asarray(ia, dtype=np.intp),
        np.asarray(ib, dtype=np.intp),
        np.asarray(iout, dtype=np.intp),
        np.asarray(signs, dtype=float),
    )


class Multivector:
    """Element of Lambda_m R^N with dense lexicographic coefficients."""

    __slots__ = ("ambient_dim", "grade", "coeffs")

    def __init__(self, ambient_dim: int, grade: int, coeffs):
        if not 1 <= ambient_dim <= config.MAX_AMBIENT_DIM:
            raise ValueError(
                f"ambient dimension {ambient_dim} outside supported range "
                f"1..{config.MAX_AMBIENT_DIM}"
            )
        if not 0 <= grade <= ambient_dim:
            raise ValueError(f"grade {grade} outside 0..{ambient_dim}")
        arr = np.array(coeffs, dtype=float).reshape(-1)
        expected = math.comb(ambient_dim, grade)
        if arr.size != expected:
            raise ValueError(
                f"coefficient vector has length {arr.size}, expected "
                f"C({ambient_dim},{grade}) = {expected}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "ambient_dim", ambient_dim)
        object.__setattr__(self, "grade", grade)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    @classmethod
    def zero(cls, ambient_dim: int, grade: int) -> "Multivector":
        return cls(ambient_dim, grade, np.zeros(math.comb(ambient_dim, grade)))

    @classmethod
    def scalar(cls, ambient_dim: int, value: float) -> "Multivector":
        return cls(ambient_dim, 0, [float(value)])

    @classmethod
    def basis_blade(cls, ambient_dim: int, indices, coefficient: float = 1.0) -> "Multivector":
        indices = tuple(indices)
        grade = len(indices)
        pos = _basis_positions(ambient_dim, grade).get(indices)
        if pos is None:
            raise ValueError(f"{indices} is not a strictly increasing index set in R^{ambient_dim}")
        coeffs = np.zeros(math.comb(ambient_dim, grade))
        coeffs[pos] = coefficient
        return cls(ambient_dim, grade, coeffs)

    @classmethod
    def from_vector(cls, vector) -> "Multivector":
        vector = np.asarray(vector, dtype=float).reshape(-1)
        return cls(vector.size, 1, vector)

    def _check_compatible(self, other: "Multivector", same_grade: bool):
        if self.ambient_dim != other.ambient_dim:
            raise ValueError(
                f"ambient dimension mismatch: {self.ambient_dim} vs {other.ambient_dim}"
            )
        if same_grade and self.grade != other.grade:
            raise ValueError(f"grade mismatch: {self.grade} vs {other.grade}")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check_compatible(other, same_grade=True)
        return Multivector(self.ambient_dim, self.grade, self.coeffs + other.coeffs)

    def __sub__(self, other: "Multivector") -> "Multivector":
        self._check_compatible(other, same_grade=True)
        return Multivector(self.ambient_dim, self.grade, self.coeffs - other.coeffs)

    def __neg__(self) -> "Multivector":
        return Multivector(self.ambient_dim, self.grade, -self.coeffs)

    def __mul__(self, scalar) -> "Multivector":
        return Multivector(self.ambient_dim, self.grade, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_zero(self, tol=None) -> bool:
        return self.norm() <= config.zero_tol(tol)

    def allclose(self, other: "Multivector", tol: float = 1e-12) -> bool:
        if self.ambient_dim != other.ambient_dim or self.grade != other.grade:
            return False
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=tol))

    def wedge(self, other: "Multivector") -> "Multivector":
        return wedge(self, other)

    def inner(self, other: "Multivector") -> float:
        return inner(self, other)

    def __repr__(self):
        basis = basis_index_sets(self.ambient_dim, self.grade)
        terms = [
            f"{c:+g}*e{''.join(str(i) for i in s)}" if s else f"{c:+g}"
            for s, c in zip(basis, self.coeffs)
            if c != 0.0
        ]
        body = " ".join(terms) if terms else "0"
        return f"Multivector(N={self.ambient_dim}, grade={self.grade}, {body})"


def wedge(a: Multivector, b: Multivector) -> Multivector:
    """Exterior product; bilinear, associative, graded-anticommutative."""
    a._check_compatible(b, same_grade=False)
    out_grade = a.grade + b.grade
    if out_grade > a.ambient_dim:
        raise ValueError(
            f"grade overflow: {a.grade} + {b.grade} > ambient dimension {a.ambient_dim}"
        )
    ia, ib, iout, signs = _wedge_table(a.ambient_dim, a.grade, b.grade)
    out = np.zeros(math.comb(a.ambient_dim, out_grade))
    np.add.at(out, iout, signs * a.coeffs[ia] * b.coeffs[ib])
    return Multivector(a.ambient_dim, out_grade, out)


def inner(a: Multivector, b: Multivector) -> float:
    """Euclidean inner product for which the lexicographic basis is orthonormal."""
    a._check_compatible(b, same_grade=True)
    return float(np.dot(a.coeffs, b.coeffs))


class OrientedSimplex:
    """Ordered tuple of m+1 points in R^N; vertex order carries orientation."""

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        arr = np.array(vertices, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("vertices must be a nonempty (m+1, N) array")
        arr.setflags(write=False)
        object.__setattr__(self, "vertices", arr)

    def __setattr__(self, name, value):
        raise AttributeError("OrientedSimplex is immutable")

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def grade(self) -> int:
        return self.vertices.shape[0] - 1

    def edge_matrix(self) -> np.ndarray:
        return self.vertices[1:] - self.vertices[0]


def blade_of_points(points) -> Multivector:
    """Wedge of the edge vectors (v1-v0) ^ ... ^ (vm-v0); not normalized."""
    points = np.asarray(points, dtype=float)
    n = points.shape[1]
    m = points.shape[0] - 1
    if m == 0:
        return Multivector.scalar(n, 1.0)
    out = Multivector.from_vector(points[1] - points[0])
    for k in range(2, m + 1):
        out = wedge(out, Multivector.from_vector(points[k] - points[0]))
    return out


def volume_of_points(points) -> float:
    """H^m measure sqrt(det(E E^T)) / m! of the simplex spanned by the rows."""
    points = np.asarray(points, dtype=float)
    m = points.shape[0] - 1
    if m == 0:
        return 1.0
    edges = points[1:] - points[0]
    gram = edges @ edges.T
    det = float(np.linalg.det(gram))
    if det <= 0.0:
        return 0.0
    return math.sqrt(det) / math.factorial(m)


def simplex_volume(s: OrientedSimplex) -> float:
    """H^m measure of the simplex; degenerate input gives 0."""
    return volume_of_points(s.vertices)


def unit_simple_vector(s: OrientedSimplex, tol=None) -> Multivector:
    """Unit simple m-vector of an oriented simplex.

    Swapping two vertices negates the result.  Raises
    :class:`DegenerateSimplexError` when the vertices are affinely dependent
    within the volume tolerance.
    """
    if s.grade < 1:
        raise ValueError("unit simple vector requires grade >= 1")
    blade = blade_of_points(s.vertices)
    scale = blade.norm()
    # |blade| = m! * volume, so this tests the same degeneracy as the volume.
    if scale / math.factorial(s.grade) <= config.zero_tol(tol):
        raise DegenerateSimplexError(
            f"simplex volume below tolerance {config.zero_tol(tol)}"
        )
    return blade * (1.0 / scale)
