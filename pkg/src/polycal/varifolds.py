"""Polyhedral varifolds and the conormal-balance stationarity test.

A polyhedral varifold is a sparse map from unoriented m-simplices to strictly
positive weights.  Stationarity away from a designated boundary region is
checked at interior (m-1)-faces only: flat simplex interiors contribute no
first variation and lower-dimensional faces carry no (m-1)-measure.  At each
interior face the weighted outward conormals of the incident simplices must
balance; the same quantity is recomputed through the boundary of the
associated oriented chain and both routes are compared through the wedge
identity, so a sign-convention bug in either path shows up as a cross-check
residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .chains import Chain, boundary
from .complexes import (
    BoundaryRegion,
    EmbeddedComplex,
    SubdivisionMap,
    build_complex,
    pushforward_complex,
    subdivide,
)
from .exterior_algebra import Multivector, wedge
from .groups import MultivectorGroup


class PolyhedralVarifold:
    """Weighted unoriented m-simplices with weights > 0; immutable value."""

    __slots__ = ("complex", "dimension", "weights")

    def __init__(self, complex: EmbeddedComplex, dimension: int, weights=None):
        if dimension < 1:
            raise ValueError("varifold dimension must be >= 1")
        weights = {int(i): float(c) for i, c in (weights or {}).items()}
        n = complex.n_simplices(dimension)
        for i, c in weights.items():
            if not 0 <= i < n:
                raise ValueError(f"simplex id {i} out of range for dimension {dimension}")
            if c <= 0:
                raise ValueError("stored weights must be strictly positive")
        self.complex = complex
        self.dimension = dimension
        self.weights = weights

    def mass(self) -> float:
        vols = self.complex.volumes(self.dimension)
        return float(sum(c * vols[i] for i, c in self.weights.items()))

    def support_vertices(self) -> frozenset:
        verts = set()
        for i in self.weights:
            verts.update(self.complex.simplex_tuple(self.dimension, i))
        return frozenset(verts)

    def __repr__(self):
        return f"PolyhedralVarifold(dim={self.dimension}, simplices={len(self.weights)})"


def make_varifold(K: EmbeddedComplex, m: int, weighted_simplices) -> PolyhedralVarifold:
    """Canonicalize (simplex, weight) pairs: sum duplicates, drop zeros."""
    acc = {}
    for raw, c in weighted_simplices:
        c = float(c)
        if c < 0:
            raise ValueError("varifold weights must be nonnegative")
        if isinstance(raw, (int, np.integer)):
            sid = int(raw)
            if not 0 <= sid < K.n_simplices(m):
                raise ValueError(f"simplex id {sid} out of range")
        else:
            d, sid = K.simplex_id(tuple(sorted(int(v) for v in raw)))
            if d != m:
                raise ValueError(f"{tuple(raw)} is not an {m}-simplex")
        acc[sid] = acc.get(sid, 0.0) + c
    return PolyhedralVarifold(K, m, {i: c for i, c in acc.items() if c > 0.0})


def varifold_mass(V: PolyhedralVarifold) -> float:
    return V.mass()


def conormal(K: EmbeddedComplex, sigma, tau, tol=None) -> np.ndarray:
    """Outward unit conormal of the face tau within the simplex sigma.

    Both arguments are vertex tuples.  The result lies in sigma's affine
    span, is orthogonal to tau's span, and points out of sigma across tau
    (away from the opposite vertex).
    """
    sigma_t = tuple(sorted(int(v) for v in sigma))
    tau_t = tuple(sorted(int(v) for v in tau))
    if not set(tau_t) < set(sigma_t) or len(tau_t) != len(sigma_t) - 1:
        raise ValueError(f"{tau_t} is not a facet of {sigma_t}")
    opposite = next(v for v in sigma_t if v not in tau_t)
    return _conormal_points(K.vertices, tau_t, opposite, tol)


def _conormal_points(coords, tau_t, opposite, tol=None) -> np.ndarray:
    tol = config.zero_tol(tol)
    base = coords[tau_t[0]]
    d = coords[opposite] - base
    if len(tau_t) > 1:
        spans = coords[list(tau_t[1:])] - base
        gram = spans @ spans.T
        coeff = np.linalg.solve(gram, spans @ d)
        d = d - spans.T @ coeff
    scale = float(np.linalg.norm(d))
    if scale <= tol:
        raise ValueError("degenerate geometry: face and opposite vertex collapse")
    return -d / scale


@dataclass
class FaceBalance:
    face_id: int
    face_tuple: tuple
    residual: np.ndarray
    residual_norm: float
    incident: list  # (simplex id, weight, conormal vector)
    boundary_coeff_norm: float
    crosscheck_residual: float
    free_edge: bool
    passed: bool


@dataclass
class StationarityReport:
    dimension: int
    tol: float
    faces: list = field(default_factory=list)
    max_residual: float = 0.0
    is_stationary: bool = True
    max_crosscheck_residual: float = 0.0

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "is_stationary": self.is_stationary,
            "max_crosscheck_residual": self.max_crosscheck_residual,
            "faces": [
                {
                    "face": list(f.face_tuple),
                    "residual": [float(x) for x in f.residual],
                    "residual_norm": f.residual_norm,
                    "boundary_coeff_norm": f.boundary_coeff_norm,
                    "crosscheck_residual": f.crosscheck_residual,
                    "free_edge": f.free_edge,
                    "passed": f.passed,
                    "incident": [
                        {
                            "simplex": list(sigma_t),
                            "weight": c,
                            "conormal": [float(x) for x in nu],
                        }
                        for sigma_t, c, nu in f.incident
                    ],
                }
                for f in self.faces
            ],
        }


def stationarity(
    V: PolyhedralVarifold, gamma: BoundaryRegion, tol=None
) -> StationarityReport:
    """Conormal balance at every interior (m-1)-face.

    A face fails when the weighted conormal sum exceeds the tolerance or when
    it has a single incident weighted simplex (an unbalanced free edge).
    """
    tol = config.zero_tol(tol)
    K, m = V.complex, V.dimension
    if gamma.complex is not K or gamma.face_dim != m - 1:
        raise ValueError("boundary region does not match the varifold")
    bchain = boundary(chainify(V))
    report = StationarityReport(dimension=m, tol=tol)
    n = K.ambient_dim
    for fid in range(K.n_simplices(m - 1)):
        if fid in gamma.face_ids:
            continue
        incident = []
        residual = np.zeros(n)
        face_t = K.simplex_tuple(m - 1, fid)
        for sid, _slot in K.cofaces[m - 1][fid]:
            c = V.weights.get(sid)
            if c is None:
                continue
            sigma_t = K.simplex_tuple(m, sid)
            opposite = next(v for v in sigma_t if v not in face_t)
            nu = _conormal_points(K.vertices, face_t, opposite, tol=tol)
            incident.append((sigma_t, c, nu))
            residual = residual + c * nu
        residual_norm = float(np.linalg.norm(residual))
        bcoeff = bchain.coeffs.get(fid)
        bnorm = bcoeff.norm() if bcoeff is not None else 0.0
        if incident:
            eta_tau = K.unit_blade(m - 1, fid)
            predicted = wedge(Multivector.from_vector(residual), eta_tau)
            actual = bcoeff if bcoeff is not None else predicted * 0.0
            crosscheck = (actual - predicted).norm()
        else:
            crosscheck = bnorm
        free_edge = len(incident) == 1
        passed = (residual_norm <= tol) and not free_edge
        report.faces.append(
            FaceBalance(
                face_id=fid,
                face_tuple=K.simplex_tuple(m - 1, fid),
                residual=residual,
                residual_norm=residual_norm,
                incident=incident,
                boundary_coeff_norm=bnorm,
                crosscheck_residual=crosscheck,
                free_edge=free_edge,
                passed=passed,
            )
        )
        report.max_residual = max(report.max_residual, residual_norm)
        report.max_crosscheck_residual = max(report.max_crosscheck_residual, crosscheck)
        if not passed:
            report.is_stationary = False
    return report


def chainify(V: PolyhedralVarifold) -> Chain:
    """The associated chain over Lambda_m R^N: coefficient c * eta(sigma).

    Well defined on unoriented simplices because reversing an orientation
    negates both the simplex and its unit m-vector.
    """
    K, m = V.complex, V.dimension
    G = MultivectorGroup(K.ambient_dim, m)
    coeffs = {sid: K.unit_blade(m, sid) * c for sid, c in V.weights.items()}
    return Chain(K, m, G, coeffs)


def frontier_faces(V: PolyhedralVarifold) -> frozenset:
    """(m-1)-faces incident to exactly one weighted simplex."""
    K, m = V.complex, V.dimension
    out = set()
    for fid in range(K.n_simplices(m - 1)):
        count = sum(1 for sid, _ in K.cofaces[m - 1][fid] if sid in V.weights)
        if count == 1:
            out.add(fid)
    return frozenset(out)


def boundary_region_for(V: PolyhedralVarifold) -> BoundaryRegion:
    return BoundaryRegion(V.complex, V.dimension - 1, frontier_faces(V))


def transport_varifold(V: PolyhedralVarifold, corr: SubdivisionMap) -> PolyhedralVarifold:
    if corr.src is not V.complex:
        raise ValueError("subdivision map was built for a different complex")
    weights = {}
    for sid, c in V.weights.items():
        for cid, _sign in corr.children[(V.dimension, sid)]:
            weights[cid] = weights.get(cid, 0.0) + c
    return PolyhedralVarifold(corr.dst, V.dimension, weights)


@dataclass
class VarifoldPushforward:
    varifold: PolyhedralVarifold
    complex: EmbeddedComplex
    simplex_map: dict
    dropped: list
    gamma: BoundaryRegion | None = None


def pushforward_varifold(
    V: PolyhedralVarifold, images, frozen=(), gamma: BoundaryRegion | None = None, tol=None
) -> VarifoldPushforward:
    """Relocate vertices; weights ride along, collapsed simplices are dropped."""
    frozen = set(int(v) for v in frozen)
    if gamma is not None:
        frozen |= set(gamma.vertex_ids())
    image, smap, _ = pushforward_complex(V.complex, images, frozen=frozen, tol=tol)
    weights = {}
    dropped = []
    for sid, c in V.weights.items():
        new_id = smap[(V.dimension, sid)]
        if new_id is None:
            dropped.append((V.dimension, sid))
        else:
            weights[new_id] = c
    new_gamma = None
    if gamma is not None:
        ids = frozenset(
            smap[(gamma.face_dim, i)]
            for i in gamma.face_ids
            if smap[(gamma.face_dim, i)] is not None
        )
        new_gamma = BoundaryRegion(image, gamma.face_dim, ids)
    return VarifoldPushforward(
        varifold=PolyhedralVarifold(image, V.dimension, weights),
        complex=image,
        simplex_map=smap,
        dropped=dropped,
        gamma=new_gamma,
    )


def varifold_to_json(V: PolyhedralVarifold) -> dict:
    K = V.complex
    return {
        "dimension": V.dimension,
        "weights": [
            {"simplex": list(K.simplex_tuple(V.dimension, i)), "c": c}
            for i, c in sorted(V.weights.items())
        ],
    }


def varifold_from_json(K: EmbeddedComplex, doc: dict) -> PolyhedralVarifold:
    m = int(doc["dimension"])
    return make_varifold(K, m, [(entry["simplex"], entry["c"]) for entry in doc["weights"]])


# ---------------------------------------------------------------------------
# catalog of classical stationary cones

SQRT3 = math.sqrt(3.0)
Y_DIRECTIONS = np.array([[0.0, 1.0], [-SQRT3 / 2, -0.5], [SQRT3 / 2, -0.5]])
TETRA_VERTICES = np.array(
    [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
) / SQRT3

CATALOG = ("plane_disk", "y_line", "y_times_r", "tetrahedral_cone", "custom_net_cone")


def _refine(K, V, levels):
    for _ in range(int(levels)):
        K, corr = subdivide(K, "barycentric")
        V = transport_varifold(V, corr)
    return K, V


def generate_example(name: str, radius: float = 1.0, refinement: int = 0, **params):
    """Build a catalog truncation: (complex, varifold, boundary region).

    Catalog entries are stationary by construction; ``custom_net_cone`` takes
    ``directions`` and optional ``weights`` and is stationary only when the
    supplied weighted directions balance.
    """
    radius = float(radius)
    if radius <= 0:
        raise ValueError("truncation radius must be positive")
    if refinement < 0:
        raise ValueError("refinement level must be nonnegative")

    if name == "y_line":
        verts = np.vstack([np.zeros(2), radius * Y_DIRECTIONS])
        K = build_complex(verts, [(0, i) for i in range(1, 4)])
        V = make_varifold(K, 1, [((0, i), 1.0) for i in range(1, 4)])
    elif name == "plane_disk":
        sectors = int(params.pop("sectors", 6))
        if sectors < 3:
            raise ValueError("plane_disk needs at least 3 sectors")
        angles = 2 * np.pi * np.arange(sectors) / sectors
        rim = radius * np.column_stack(
            [np.cos(angles), np.sin(angles), np.zeros(sectors)]
        )
        verts = np.vstack([np.zeros(3), rim])
        tris = [(0, 1 + k, 1 + (k + 1) % sectors) for k in range(sectors)]
        K = build_complex(verts, tris)
        V = make_varifold(K, 2, [(t, 1.0) for t in tris])
    elif name == "y_times_r":
        height = float(params.pop("height", radius))
        if height <= 0:
            raise ValueError("y_times_r needs positive height")
        base = np.hstack([radius * Y_DIRECTIONS, np.zeros((3, 1))])
        top = base + np.array([0.0, 0.0, height])
        verts = np.vstack([np.zeros(3), [[0.0, 0.0, height]], base, top])
        tris = []
        for i in range(3):
            b, t = 2 + i, 5 + i
            tris += [(0, b, t), (0, t, 1)]
        K = build_complex(verts, tris)
        V = make_varifold(K, 2, [(t, 1.0) for t in tris])
    elif name == "tetrahedral_cone":
        verts = np.vstack([np.zeros(3), radius * TETRA_VERTICES])
        tris = [(0, a, b) for a in range(1, 5) for b in range(a + 1, 5)]
        K = build_complex(verts, tris)
        V = make_varifold(K, 2, [(t, 1.0) for t in tris])
    elif name == "custom_net_cone":
        directions = params.pop("directions", None)
        if directions is None:
            raise ValueError("custom_net_cone needs a list of directions")
        directions = np.array(directions, dtype=float)
        if directions.ndim != 2 or directions.shape[0] < 2:
            raise ValueError("need at least two direction vectors")
        lengths = np.linalg.norm(directions, axis=1)
        if np.any(lengths <= config.ZERO_TOL):
            raise ValueError("directions must be nonzero")
        directions = directions / lengths[:, None]
        weights = params.pop("weights", None)
        weights = [1.0] * len(directions) if weights is None else [float(w) for w in weights]
        if len(weights) != len(directions):
            raise ValueError("weights must match directions")
        verts = np.vstack([np.zeros(directions.shape[1]), radius * directions])
        K = build_complex(verts, [(0, i) for i in range(1, len(directions) + 1)])
        V = make_varifold(
            K, 1, [((0, i + 1), w) for i, w in enumerate(weights)]
        )
    else:
        raise ValueError(f"unknown example {name!r}; catalog: {', '.join(CATALOG)}")
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")

    K, V = _refine(K, V, refinement)
    return K, V, boundary_region_for(V)
