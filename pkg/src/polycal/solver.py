"""Convex oracle: minimum mass under a boundary constraint, and flat norms.

Both problems are sums of weighted Euclidean block norms under linear
equality constraints,

    min  sum_j  w_j ||x_j||_2     subject to   M x = c,

solved by a relaxed primal-dual splitting: the proximal map of the objective
is closed-form block shrinkage, the dual update for the equality constraint
is a translation, and step sizes come from a power-iteration estimate of
||M||.  Scalar coefficient groups reuse the same loop with 1-dimensional
blocks, where shrinkage degenerates to soft-thresholding.  Discrete groups
are out of scope here; minimality over a subgroup is inferred by retagging,
never solved directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import lsmr

from .chains import Chain, boundary, chain_to_json, combine, mass
from .complexes import EmbeddedComplex
from .exterior_algebra import Multivector
from .groups import CoefficientGroup, MultivectorGroup, RealGroup


@dataclass
class SolverConfig:
    max_iter: int = 200_000
    primal_tol: float = 1e-8
    obj_tol: float = 1e-6
    seed: int = 0
    relax: float = 1.8
    check_every: int = 100
    stall_tol: float = 1e-10
    stall_checks: int = 3

    @classmethod
    def from_json(cls, doc):
        doc = dict(doc or {})
        known = {f: doc[f] for f in cls.__dataclass_fields__ if f in doc}
        return cls(**known)

    def to_json(self):
        return asdict(self)


@dataclass
class MinMassProblem:
    complex: EmbeddedComplex
    dimension: int
    boundary: Chain
    group: CoefficientGroup
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.boundary.complex is not self.complex:
            raise ValueError("target boundary lives on a different complex")
        if self.boundary.dimension != self.dimension - 1:
            raise ValueError(
                f"target boundary must have dimension {self.dimension - 1}"
            )
        if self.boundary.group != self.group:
            raise ValueError("group mismatch between problem and target boundary")
        _block_size(self.group)  # validates the group kind


@dataclass
class SolveResult:
    chain: Chain
    objective: float
    primal_residual: float
    iterations: int
    status: str  # converged | iteration-cap | infeasible
    lower_bound: float | None = None
    gap: float | None = None
    config: SolverConfig = field(default_factory=SolverConfig)

    def to_json(self):
        return {
            "objective": self.objective,
            "primal_residual": self.primal_residual,
            "iterations": self.iterations,
            "status": self.status,
            "lower_bound": self.lower_bound,
            "gap": self.gap,
            "chain": chain_to_json(self.chain),
            "config": self.config.to_json(),
        }


def _block_size(group) -> int:
    if isinstance(group, RealGroup):
        return 1
    if isinstance(group, MultivectorGroup):
        return math.comb(group.ambient_dim, group.grade)
    raise ValueError(
        "solver supports coefficient groups R and Lambda_m R^N only; "
        "use retagging for discrete groups"
    )


def _dense_coeffs(A: Chain, size: int) -> np.ndarray:
    out = np.zeros((A.complex.n_simplices(A.dimension), size))
    for sid, g in A.coeffs.items():
        out[sid] = g.coeffs if isinstance(g, Multivector) else g
    return out


def _chain_from_rows(K, m, group, rows) -> Chain:
    coeffs = {}
    for sid in range(rows.shape[0]):
        if isinstance(group, RealGroup):
            g = float(rows[sid, 0])
        else:
            g = Multivector(group.ambient_dim, group.grade, rows[sid])
        if not group.is_zero(g):
            coeffs[sid] = g
    return Chain(K, m, group, coeffs)


def _operator_norm(M, seed: int) -> float:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(200):
        w = M.T @ (M @ v)
        est = float(np.linalg.norm(w))
        if est == 0.0:
            return 1e-12
        v = w / est
    return 1.02 * math.sqrt(est)


def _shrink_rows(V, thresholds):
    norms = np.linalg.norm(V, axis=1)
    factor = np.maximum(0.0, 1.0 - thresholds / np.maximum(norms, 1e-300))
    return V * factor[:, None]


def _solve_blockwise(M, weights, target, cfg: SolverConfig, lower_bound=None, warm=None):
    """Relaxed primal-dual iteration for min sum w_j ||x_j|| s.t. M x = c."""
    M = sparse.csr_matrix(M)
    MT = sparse.csr_matrix(M.T)
    weights = np.asarray(weights, dtype=float)
    X = np.zeros((M.shape[1], target.shape[1])) if warm is None else warm.copy()
    Y = np.zeros_like(target)
    L = _operator_norm(M, cfg.seed)
    tau = sigma = 0.99 / L
    thresholds = tau * weights
    status = "iteration-cap"
    obj_prev = None
    stalled = 0
    iterations = cfg.max_iter
    for k in range(1, cfg.max_iter + 1):
        Xt = _shrink_rows(X - tau * (MT @ Y), thresholds)
        Yt = Y + sigma * (M @ (2.0 * Xt - X)) - sigma * target
        X += cfg.relax * (Xt - X)
        Y += cfg.relax * (Yt - Y)
        if k % cfg.check_every == 0 or k == cfg.max_iter:
            residual = float(np.linalg.norm(M @ X - target))
            obj = float(weights @ np.linalg.norm(X, axis=1))
            feasible = residual <= cfg.primal_tol
            if feasible and lower_bound is not None:
                if obj - lower_bound <= cfg.obj_tol * max(1.0, abs(lower_bound)):
                    status, iterations = "converged", k
                    break
            if obj_prev is not None and abs(obj - obj_prev) <= cfg.stall_tol * max(1.0, obj):
                stalled += 1
            else:
                stalled = 0
            obj_prev = obj
            if feasible and stalled >= cfg.stall_checks:
                status, iterations = "converged", k
                break
    residual = float(np.linalg.norm(M @ X - target))
    objective = float(weights @ np.linalg.norm(X, axis=1))
    return X, {
        "status": status,
        "iterations": iterations,
        "primal_residual": residual,
        "objective": objective,
    }


def min_mass_fixed_boundary(problem: MinMassProblem, lower_bound=None) -> SolveResult:
    """Minimize mass over chains with the prescribed boundary.

    Infeasible targets (boundaries outside the image of the boundary
    operator) are detected through the least-squares residual, which cannot
    reach zero for them.
    """
    K, m, cfg = problem.complex, problem.dimension, problem.config
    group = problem.group
    size = _block_size(group)
    if not 1 <= m <= K.dim:
        raise ValueError(f"complex has no simplices of dimension {m}")
    M = K.boundary_matrix(m)
    target = _dense_coeffs(problem.boundary, size)
    weights = K.volumes(m)
    # least-squares feasibility probe doubles as the warm start
    warm = np.zeros((M.shape[1], size))
    for col in range(size):
        sol = lsmr(M, target[:, col], atol=1e-13, btol=1e-13, maxiter=8 * sum(M.shape))
        warm[:, col] = sol[0]
    lsq_residual = float(np.linalg.norm(M @ warm - target))
    if lsq_residual > max(100 * cfg.primal_tol, 1e-6) * max(1.0, float(np.linalg.norm(target))):
        zero = Chain(K, m, group)
        return SolveResult(
            chain=zero,
            objective=0.0,
            primal_residual=lsq_residual,
            iterations=0,
            status="infeasible",
            lower_bound=lower_bound,
            gap=None,
            config=cfg,
        )
    X, info = _solve_blockwise(M, weights, target, cfg, lower_bound=lower_bound, warm=warm)
    chain = _chain_from_rows(K, m, group, X)
    objective = mass(chain)
    bres = _dense_coeffs(boundary(chain), size) if chain.coeffs else np.zeros_like(target)
    primal_residual = float(np.linalg.norm(bres - target))
    gap = None if lower_bound is None else objective - lower_bound
    return SolveResult(
        chain=chain,
        objective=objective,
        primal_residual=primal_residual,
        iterations=info["iterations"],
        status=info["status"],
        lower_bound=lower_bound,
        gap=gap,
        config=cfg,
    )


@dataclass
class FlatNormResult:
    value: float
    filling: Chain       # optimal (m+1)-chain Q*
    remainder: Chain     # R* = A + boundary(Q*)
    iterations: int
    status: str
    used_zero_filling: bool = False

    def to_json(self):
        return {
            "value": self.value,
            "iterations": self.iterations,
            "status": self.status,
            "used_zero_filling": self.used_zero_filling,
            "filling": chain_to_json(self.filling),
            "remainder": chain_to_json(self.remainder),
        }


def flat_norm_solve(A: Chain, config: SolverConfig | None = None, lower_bound=None) -> FlatNormResult:
    """Complex-restricted flat norm: min over fillings Q of M(A+dQ) + M(Q).

    The reported value is the recomputed objective of the returned feasible
    pair, so it always upper-bounds the true flat norm and never exceeds
    M(A): when the iterate beats no filling at all, Q = 0 is returned.
    """
    cfg = config or SolverConfig()
    K, m = A.complex, A.dimension
    group = A.group
    size = _block_size(group)
    base_mass = mass(A)
    q_dim = m + 1
    if q_dim > K.dim or K.n_simplices(q_dim) == 0:
        return FlatNormResult(
            value=base_mass,
            filling=Chain(K, q_dim, group),
            remainder=A,
            iterations=0,
            status="converged",
            used_zero_filling=True,
        )
    n_m, n_q = K.n_simplices(m), K.n_simplices(q_dim)
    B = K.boundary_matrix(q_dim)
    M = sparse.hstack([sparse.identity(n_m, format="csr"), -B], format="csr")
    weights = np.concatenate([K.volumes(m), K.volumes(q_dim)])
    target = _dense_coeffs(A, size)
    warm = np.vstack([target, np.zeros((n_q, size))])  # exactly feasible: R=A, Q=0
    X, info = _solve_blockwise(M, weights, target, cfg, lower_bound=lower_bound, warm=warm)
    q_chain = _chain_from_rows(K, q_dim, group, X[n_m:])
    remainder = combine(A, boundary(q_chain), 1) if q_chain.coeffs else A
    value = mass(remainder) + mass(q_chain)
    used_zero = False
    if value > base_mass:
        q_chain = Chain(K, q_dim, group)
        remainder = A
        value = base_mass
        used_zero = True
    return FlatNormResult(
        value=value,
        filling=q_chain,
        remainder=remainder,
        iterations=info["iterations"],
        status=info["status"],
        used_zero_filling=used_zero,
    )
