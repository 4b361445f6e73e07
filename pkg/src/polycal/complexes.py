"""Finite simplicial complexes embedded in R^N.

Simplices are stored as strictly sorted vertex-index tuples; the sorted tuple
is the canonical combinatorial orientation and user orientations live on chain
coefficients instead.  Construction closes the input under the face relation
and assigns deterministic ids (lexicographic order per dimension).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from . import config
from .exterior_algebra import (
    DegenerateSimplexError,
    Multivector,
    blade_of_points,
    volume_of_points,
)


class EmbeddedComplex:
    """Immutable simplicial complex with vertex coordinates in R^N."""

    def __init__(self, vertices, simplices_by_dim):
        vertices = np.array(vertices, dtype=float)
        if vertices.ndim != 2:
            raise ValueError("vertices must be a (V, N) array")
        n = vertices.shape[1]
        if not 1 <= n <= config.MAX_AMBIENT_DIM:
            raise ValueError(
                f"ambient dimension {n} outside supported range 1..{config.MAX_AMBIENT_DIM}"
            )
        vertices.setflags(write=False)
        self.vertices = vertices
        self.ambient_dim = n
        # simplices[d] is a lexicographically sorted list of sorted tuples
        self.simplices = [sorted(set(map(tuple, s))) for s in simplices_by_dim]
        while self.simplices and not self.simplices[-1]:
            self.simplices.pop()
        total = sum(len(s) for s in self.simplices)
        if total > config.MAX_SIMPLICES:
            raise ValueError(f"complex has {total} simplices, above desk-scale limit")
        self._ids = [
            {t: i for i, t in enumerate(level)} for level in self.simplices
        ]
        # faces[d][i, j] = id of the (d-1)-face of simplex i with vertex j removed,
        # carrying incidence sign (-1)^j
        self.faces = []
        for d, level in enumerate(self.simplices):
            if d == 0:
                self.faces.append(None)
                continue
            table = np.empty((len(level), d + 1), dtype=np.intp)
            lower = self._ids[d - 1]
            for i, t in enumerate(level):
                for j in range(d + 1):
                    face = t[:j] + t[j + 1 :]
                    if face not in lower:
                        raise ValueError(f"face {face} of {t} missing from complex")
                    table[i, j] = lower[face]
            self.faces.append(table)
        # cofaces[d][i] = list of (id of (d+1)-simplex, face slot j)
        self.cofaces = [
            [[] for _ in level] for level in self.simplices
        ]
        for d in range(1, len(self.simplices)):
            for i in range(len(self.simplices[d])):
                for j in range(d + 1):
                    self.cofaces[d - 1][self.faces[d][i, j]].append((i, j))
        self._volumes = [None] * len(self.simplices)
        self._unit_blades = [dict() for _ in self.simplices]
        self._boundary_matrices = {}

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def n_simplices(self, d: int) -> int:
        if 0 <= d <= self.dim:
            return len(self.simplices[d])
        return 0

    def simplex_tuple(self, d: int, sid: int) -> tuple:
        return self.simplices[d][sid]

    def simplex_id(self, vertex_tuple) -> tuple:
        """Resolve a sorted vertex tuple to (dim, id); raises if absent."""
        t = tuple(vertex_tuple)
        d = len(t) - 1
        if not (0 <= d <= self.dim) or t not in self._ids[d]:
            raise KeyError(f"{t} is not a simplex of the complex")
        return d, self._ids[d][t]

    def has_simplex(self, vertex_tuple) -> bool:
        t = tuple(vertex_tuple)
        d = len(t) - 1
        return 0 <= d <= self.dim and t in self._ids[d]

    def points_of(self, d: int, sid: int) -> np.ndarray:
        return self.vertices[list(self.simplices[d][sid])]

    def volumes(self, d: int) -> np.ndarray:
        """H^d measures of all d-simplices (cached)."""
        if self._volumes[d] is None:
            vols = np.array(
                [volume_of_points(self.points_of(d, i)) for i in range(self.n_simplices(d))]
            )
            vols.setflags(write=False)
            self._volumes[d] = vols
        return self._volumes[d]

    def volume(self, d: int, sid: int) -> float:
        return float(self.volumes(d)[sid])

    def unit_blade(self, d: int, sid: int) -> Multivector:
        """Unit simple d-vector of the canonically oriented simplex (cached).

        Grade 0 simplices get the scalar 1.
        """
        cache = self._unit_blades[d]
        got = cache.get(sid)
        if got is None:
            if d == 0:
                got = Multivector.scalar(self.ambient_dim, 1.0)
            else:
                blade = blade_of_points(self.points_of(d, sid))
                scale = blade.norm()
                if scale / math.factorial(d) <= config.ZERO_TOL:
                    raise DegenerateSimplexError(
                        f"simplex {(d, sid)} is geometrically degenerate"
                    )
                got = blade * (1.0 / scale)
            cache[sid] = got
        return got

    def maximal_simplices(self):
        """(d, id) pairs with no coface."""
        out = []
        for d, level in enumerate(self.simplices):
            for i in range(len(level)):
                if not self.cofaces[d][i]:
                    out.append((d, i))
        return out

    def boundary_matrix(self, d: int):
        """Sparse incidence matrix (n_{d-1} x n_d) with entries (-1)^j."""
        if d not in self._boundary_matrices:
            if not 1 <= d <= self.dim:
                raise ValueError(f"no {d}-simplices to take a boundary of")
            rows, cols, vals = [], [], []
            for i in range(self.n_simplices(d)):
                for j in range(d + 1):
                    rows.append(self.faces[d][i, j])
                    cols.append(i)
                    vals.append(-1.0 if j % 2 else 1.0)
            mat = sparse.csr_matrix(
                (vals, (rows, cols)), shape=(self.n_simplices(d - 1), self.n_simplices(d))
            )
            self._boundary_matrices[d] = mat
        return self._boundary_matrices[d]

    def to_json(self, gamma=None) -> dict:
        doc = {
            "ambient_dim": self.ambient_dim,
            "vertices": [[float(x) for x in v] for v in self.vertices],
            "simplices": [list(t) for d, i in self.maximal_simplices()
                          for t in [self.simplices[d][i]]],
        }
        doc["gamma_faces"] = (
            [list(self.simplex_tuple(gamma.face_dim, i)) for i in sorted(gamma.face_ids)]
            if gamma is not None
            else []
        )
        return doc

    def content_hash(self) -> str:
        doc = self.to_json()
        doc.pop("gamma_faces")
        payload = json.dumps(doc, sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class BoundaryRegion:
    """Designated (m-1)-faces where chain boundary is permitted."""

    complex: EmbeddedComplex
    face_dim: int
    face_ids: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not 0 <= self.face_dim <= self.complex.dim:
            raise ValueError(f"no simplices of dimension {self.face_dim}")
        n = self.complex.n_simplices(self.face_dim)
        bad = [i for i in self.face_ids if not 0 <= i < n]
        if bad:
            raise ValueError(f"face ids {bad} out of range for dimension {self.face_dim}")

    @classmethod
    def from_tuples(cls, complex, face_tuples):
        ids = set()
        dims = set()
        for t in face_tuples:
            d, i = complex.simplex_id(tuple(sorted(t)))
            dims.add(d)
            ids.add(i)
        if len(dims) > 1:
            raise ValueError("boundary region faces must share one dimension")
        face_dim = dims.pop() if dims else 0
        return cls(complex, face_dim, frozenset(ids))

    def vertex_ids(self) -> frozenset:
        verts = set()
        for i in self.face_ids:
            verts.update(self.complex.simplex_tuple(self.face_dim, i))
        return frozenset(verts)


def build_complex(vertices, top_simplices, ambient_dim=None) -> EmbeddedComplex:
    """Close the given simplices under the face relation and index everything.

    Input simplices may mix dimensions.  Top-dimensional entries must be
    geometrically nondegenerate; exact duplicates in the input are rejected.
    """
    vertices = np.array(vertices, dtype=float)
    if vertices.ndim == 1:
        vertices = vertices.reshape(-1, 1)
    if ambient_dim is not None and vertices.shape[1] != ambient_dim:
        raise ValueError(
            f"vertices have dimension {vertices.shape[1]}, expected {ambient_dim}"
        )
    nv = vertices.shape[0]
    canon = []
    seen = set()
    for t in top_simplices:
        t = tuple(int(i) for i in t)
        if len(set(t)) != len(t):
            raise ValueError(f"simplex {t} repeats a vertex")
        if any(i < 0 or i >= nv for i in t):
            raise ValueError(f"simplex {t} has a vertex index out of range 0..{nv - 1}")
        st = tuple(sorted(t))
        if st in seen:
            raise ValueError(f"duplicate simplex {st}")
        seen.add(st)
        canon.append(st)
    max_dim = max((len(t) - 1 for t in canon), default=0)
    by_dim = [set() for _ in range(max_dim + 1)]
    for t in canon:
        d = len(t) - 1
        if d >= 1 and volume_of_points(vertices[list(t)]) <= config.ZERO_TOL:
            raise ValueError(f"top simplex {t} is geometrically degenerate")
        by_dim[d].add(t)
    # face closure
    for d in range(max_dim, 0, -1):
        for t in by_dim[d]:
            for j in range(d + 1):
                by_dim[d - 1].add(t[:j] + t[j + 1 :])
    return EmbeddedComplex(vertices, by_dim)


def complex_from_json(doc) -> tuple:
    """Parse the complex JSON format; returns (complex, gamma-or-None)."""
    K = build_complex(doc["vertices"], doc["simplices"], ambient_dim=doc.get("ambient_dim"))
    gamma_faces = doc.get("gamma_faces") or []
    gamma = BoundaryRegion.from_tuples(K, gamma_faces) if gamma_faces else None
    return K, gamma


def interior_faces(K: EmbeddedComplex, m: int, gamma: BoundaryRegion) -> list:
    """All (m-1)-simplex ids of K not designated as boundary."""
    if gamma.complex is not K:
        raise ValueError("boundary region belongs to a different complex")
    if gamma.face_dim != m - 1:
        raise ValueError(
            f"boundary region has face dimension {gamma.face_dim}, expected {m - 1}"
        )
    return [i for i in range(K.n_simplices(m - 1)) if i not in gamma.face_ids]


# ---------------------------------------------------------------------------
# geometry validation

@dataclass
class GeometryReport:
    valid: bool
    violations: list
    pairs_checked: int

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "pairs_checked": self.pairs_checked,
            "violations": [
                {
                    "simplex_a": list(a_t),
                    "simplex_b": list(b_t),
                    "overlap_weight": w,
                }
                for (a_t, b_t, w) in self.violations
            ],
        }


def _pair_overlap_weight(pa, pb, shared_a, shared_b):
    """LP: max total barycentric weight off the shared face at a common point.

    Returns None when the simplices are disjoint; otherwise the optimum.  A
    positive optimum means the geometric intersection exceeds the combinatorial
    common face.
    """
    from scipy.optimize import linprog

    ka, kb = pa.shape[0], pb.shape[0]
    n = pa.shape[1]
    # variables: barycentric coords lambda (ka) then mu (kb)
    c = np.zeros(ka + kb)
    for i in range(ka):
        if i not in shared_a:
            c[i] = -1.0
    for j in range(kb):
        if j not in shared_b:
            c[ka + j] = -1.0
    a_eq = np.zeros((n + 2, ka + kb))
    b_eq = np.zeros(n + 2)
    a_eq[:n, :ka] = pa.T
    a_eq[:n, ka:] = -pb.T
    a_eq[n, :ka] = 1.0
    b_eq[n] = 1.0
    a_eq[n + 1, ka:] = 1.0
    b_eq[n + 1] = 1.0
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, 1), method="highs")
    if not res.success:
        return None
    return float(-res.fun)


def validate_geometry(K: EmbeddedComplex, tol: float = 1e-7) -> GeometryReport:
    """Check that maximal simplices pairwise meet only in common faces.

    Report-based: violating pairs are listed, nothing is raised.
    """
    maximal = K.maximal_simplices()
    violations = []
    checked = 0
    boxes = []
    for d, i in maximal:
        pts = K.points_of(d, i)
        boxes.append((pts.min(axis=0), pts.max(axis=0)))
    for a in range(len(maximal)):
        da, ia = maximal[a]
        ta = K.simplex_tuple(da, ia)
        pa = K.points_of(da, ia)
        for b in range(a + 1, len(maximal)):
            db, ib = maximal[b]
            lo_a, hi_a = boxes[a]
            lo_b, hi_b = boxes[b]
            if np.any(lo_a > hi_b + tol) or np.any(lo_b > hi_a + tol):
                continue
            tb = K.simplex_tuple(db, ib)
            pb = K.points_of(db, ib)
            shared = set(ta) & set(tb)
            shared_a = {k for k, v in enumerate(ta) if v in shared}
            shared_b = {k for k, v in enumerate(tb) if v in shared}
            checked += 1
            weight = _pair_overlap_weight(pa, pb, shared_a, shared_b)
            if weight is not None and weight > tol:
                violations.append((ta, tb, weight))
    return GeometryReport(valid=not violations, violations=violations, pairs_checked=checked)


# ---------------------------------------------------------------------------
# subdivision

@dataclass
class SubdivisionMap:
    """Correspondence from parent simplices to oriented children.

    ``children[(d, parent_id)]`` lists ``(child_id, sign)`` pairs where sign
    relates the child's canonical orientation to the parent's.
    """

    src: EmbeddedComplex
    dst: EmbeddedComplex
    children: dict


def _orientation_sign(K_src, K_dst, d, parent_id, child_id) -> int:
    if d == 0:
        return 1
    s = K_src.unit_blade(d, parent_id).inner(K_dst.unit_blade(d, child_id))
    if abs(abs(s) - 1.0) > 1e-6:
        raise RuntimeError(f"child {child_id} not parallel to parent {parent_id}")
    return 1 if s > 0 else -1


def _assemble_subdivision(K, new_vertices, raw_children):
    """Build the refined complex from child tuples and resolve ids/signs."""
    top = []
    for tuples in raw_children.values():
        top.extend(tuples)
    refined = build_complex(new_vertices, top)
    children = {}
    for (d, sid), tuples in raw_children.items():
        entries = []
        for t in tuples:
            cd, cid = refined.simplex_id(t)
            entries.append((cid, _orientation_sign(K, refined, d, sid, cid)))
        children[(d, sid)] = entries
    return refined, SubdivisionMap(src=K, dst=refined, children=children)


def _barycentric(K: EmbeddedComplex):
    nv = K.vertices.shape[0]
    new_vertices = [K.vertices]
    bary_index = {}
    counter = nv
    for d in range(1, K.dim + 1):
        centers = np.array(
            [K.points_of(d, i).mean(axis=0) for i in range(K.n_simplices(d))]
        )
        if centers.size:
            new_vertices.append(centers)
        for i in range(K.n_simplices(d)):
            bary_index[(d, i)] = counter
            counter += 1
    new_vertices = np.vstack(new_vertices) if len(new_vertices) > 1 else K.vertices

    def vertex_of(d, sid):
        if d == 0:
            return K.simplex_tuple(0, sid)[0]
        return bary_index[(d, sid)]

    flags_cache = {}

    def flags_ending_at(d, sid):
        key = (d, sid)
        if key in flags_cache:
            return flags_cache[key]
        if d == 0:
            out = [((0, sid),)]
        else:
            out = []
            for j in range(d + 1):
                fid = K.faces[d][sid, j]
                for fl in flags_ending_at(d - 1, fid):
                    out.append(fl + ((d, sid),))
        flags_cache[key] = out
        return out

    raw_children = {}
    for d in range(K.dim + 1):
        for sid in range(K.n_simplices(d)):
            raw_children[(d, sid)] = [
                tuple(sorted(vertex_of(fd, fi) for fd, fi in fl))
                for fl in flags_ending_at(d, sid)
            ]
    return _assemble_subdivision(K, new_vertices, raw_children)


def _edge_midpoint(K: EmbeddedComplex, edge):
    edge = tuple(sorted(int(i) for i in edge))
    if len(edge) != 2 or not K.has_simplex(edge):
        raise ValueError(f"{edge} is not an edge of the complex")
    a, b = edge
    w = K.vertices.shape[0]
    midpoint = 0.5 * (K.vertices[a] + K.vertices[b])
    new_vertices = np.vstack([K.vertices, midpoint[None, :]])
    raw_children = {}
    for d in range(K.dim + 1):
        for sid in range(K.n_simplices(d)):
            t = K.simplex_tuple(d, sid)
            if a in t and b in t:
                left = tuple(sorted(v for v in t if v != b) + [w])
                right = tuple(sorted(v for v in t if v != a) + [w])
                raw_children[(d, sid)] = [left, right]
            else:
                raw_children[(d, sid)] = [t]
    return _assemble_subdivision(K, new_vertices, raw_children)


def subdivide(K: EmbeddedComplex, rule: str, edge=None):
    """Refine the complex; returns (refined complex, SubdivisionMap).

    ``rule`` is ``"barycentric"`` (global) or ``"edge_midpoint"`` (split the
    named edge).  The map transports chains and varifolds onto the refinement.
    """
    if rule == "barycentric":
        return _barycentric(K)
    if rule == "edge_midpoint":
        if edge is None:
            raise ValueError("edge_midpoint rule needs an edge")
        return _edge_midpoint(K, edge)
    raise ValueError(f"unknown subdivision rule {rule!r}")


# ---------------------------------------------------------------------------
# simplexwise-affine pushforward (vertex relocation)

def pushforward_complex(K: EmbeddedComplex, images, frozen=(), tol=None):
    """Relocate vertices, keeping combinatorics; degenerate images are dropped.

    ``images`` is a (V, N) array or a {vertex_id: point} dict overlaying the
    original coordinates.  Vertices in ``frozen`` must map to themselves and
    all images must stay pairwise distinct.  Returns
    (new complex, {(d, old_id): new_id or None}, dropped list).
    """
    tol = config.zero_tol(tol)
    if isinstance(images, dict):
        coords = K.vertices.copy()
        for v, p in images.items():
            coords[int(v)] = np.asarray(p, dtype=float)
    else:
        coords = np.array(images, dtype=float)
        if coords.shape != K.vertices.shape:
            raise ValueError("vertex image array must match the vertex array shape")
    for v in frozen:
        if not np.array_equal(coords[int(v)], K.vertices[int(v)]):
            raise ValueError(f"map moves frozen vertex {v}")
    if coords.shape[0] > 1:
        from scipy.spatial import cKDTree

        pairs = cKDTree(coords).query_pairs(r=tol)
        if pairs:
            u, v = sorted(pairs)[0]
            raise ValueError(f"vertex collision: images of {u} and {v} coincide")
    kept = []
    simplex_map = {}
    dropped = []
    for d in range(K.dim + 1):
        level = []
        for sid in range(K.n_simplices(d)):
            t = K.simplex_tuple(d, sid)
            if d >= 1 and volume_of_points(coords[list(t)]) <= tol:
                simplex_map[(d, sid)] = None
                dropped.append((d, sid))
            else:
                simplex_map[(d, sid)] = len(level)
                level.append(t)
        kept.append(level)
    image = EmbeddedComplex(coords, kept)
    return image, simplex_map, dropped
