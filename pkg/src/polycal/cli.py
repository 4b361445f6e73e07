"""Command-line front end.

Inputs and outputs are the JSON documents defined by the owning modules; the
file type is recognized from its keys (a bundle with "complex"/"varifold"
entries, produced by ``demo``, also works).  Exit codes: 0 on pass/success,
1 when a check fails, 2 on input errors.  All randomness is seeded and the
seed is recorded in the output, so runs are replayable.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .calibration import minimality_certificate, phi_flat_bound
from .chains import chain_from_json, chain_to_json
from .complexes import complex_from_json, validate_geometry
from .groups import SubgroupWithNorm, group_from_json, norm_ball, subgroup_norm
from .solver import MinMassProblem, SolverConfig, min_mass_fixed_boundary
from .varifolds import (
    boundary_region_for,
    chainify,
    generate_example,
    pushforward_varifold,
    stationarity,
    varifold_from_json,
    varifold_to_json,
)

COMMANDS = (
    "validate",
    "stationarity",
    "chainify",
    "certify",
    "minimize",
    "flatnorm",
    "deform",
    "groupnorm",
    "demo",
)


@dataclass
class CommandRequest:
    command: str
    inputs: list = field(default_factory=list)
    out: str | None = None
    tol: float | None = None
    seed: int = 0
    solver_config: SolverConfig = field(default_factory=SolverConfig)
    options: dict = field(default_factory=dict)


@dataclass
class DeformReport:
    trials: int
    accepted: int
    rejected: int
    min_ratio: float
    max_ratio: float
    mean_ratio: float
    mass_original: float
    magnitude: float
    seed: int
    passed: bool

    def to_json(self):
        return {
            "trials": self.trials,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "mass_original": self.mass_original,
            "magnitude": self.magnitude,
            "seed": self.seed,
            "pass": self.passed,
        }


def deform_experiment(V, gamma, trials: int, magnitude: float, seed: int = 0, tol=None) -> DeformReport:
    """Random PL vertex perturbations must not decrease mass.

    The varifold must be stationary off gamma (checked first).  Each trial
    moves the non-frozen support vertices by offsets drawn uniformly from a
    ball of the given radius; maps that collapse any simplex or collide
    vertices are rejected.  Passes when the minimum accepted mass ratio stays
    above 1 - 1e-9.
    """
    report = stationarity(V, gamma, tol=tol)
    if not report.is_stationary:
        raise ValueError(
            f"varifold is not stationary off gamma (max residual {report.max_residual:.3e})"
        )
    K = V.complex
    frozen = gamma.vertex_ids()
    movable = sorted(V.support_vertices() - frozen)
    rng = np.random.default_rng(seed)
    base_mass = V.mass()
    n = K.ambient_dim
    ratios = []
    rejected = 0
    for _ in range(int(trials)):
        offsets = rng.standard_normal((len(movable), n))
        norms = np.linalg.norm(offsets, axis=1, keepdims=True)
        radii = magnitude * rng.uniform(size=(len(movable), 1)) ** (1.0 / n)
        offsets = np.where(norms > 0, offsets / np.maximum(norms, 1e-300) * radii, 0.0)
        images = K.vertices.copy()
        for row, v in enumerate(movable):
            images[v] = images[v] + offsets[row]
        try:
            res = pushforward_varifold(V, images, gamma=gamma)
        except ValueError:
            rejected += 1
            continue
        if any(new_id is None for new_id in res.simplex_map.values()):
            rejected += 1
            continue
        ratios.append(res.varifold.mass() / base_mass)
    if not ratios:
        raise ValueError("all deformation trials were rejected; geometry too tight")
    ratios = np.asarray(ratios)
    return DeformReport(
        trials=int(trials),
        accepted=len(ratios),
        rejected=rejected,
        min_ratio=float(ratios.min()),
        max_ratio=float(ratios.max()),
        mean_ratio=float(ratios.mean()),
        mass_original=base_mass,
        magnitude=float(magnitude),
        seed=int(seed),
        passed=bool(ratios.min() >= 1.0 - 1e-9),
    )


# ---------------------------------------------------------------------------
# input plumbing

def _load_documents(paths):
    docs = []
    for path in paths:
        with open(path) as handle:
            doc = json.load(handle)
        if isinstance(doc, dict) and ("complex" in doc or "varifold" in doc):
            for key in ("complex", "varifold", "chain", "group"):
                if key in doc:
                    docs.append(doc[key])
        else:
            docs.append(doc)
    return docs

def _classify(docs):
    kinds = {}
    for doc in docs:
        if not isinstance(doc, dict):
            raise ValueError("input documents must be JSON objects")
        if "vertices" in doc:
            kinds.setdefault("complex", doc)
        elif "weights" in doc:
            kinds.setdefault("varifold", doc)
        elif "terms" in doc:
            kinds.setdefault("chain", doc)
        elif "kind" in doc:
            kinds.setdefault("group", doc)
        else:
            raise ValueError(f"unrecognized input document with keys {sorted(doc)}")
    return kinds


def _need(kinds, *names):
    missing = [n for n in names if n not in kinds]
    if missing:
        raise ValueError(f"missing input file(s): {', '.join(missing)}")
    return [kinds[n] for n in names]


def _complex_varifold_gamma(kinds):
    cdoc, vdoc = _need(kinds, "complex", "varifold")
    K, gamma = complex_from_json(cdoc)
    V = varifold_from_json(K, vdoc)
    if gamma is None:
        gamma = boundary_region_for(V)
    return K, V, gamma


# ---------------------------------------------------------------------------
# command handlers: each returns (exit_code, payload)

def _cmd_validate(request, kinds):
    (cdoc,) = _need(kinds, "complex")
    K, _ = complex_from_json(cdoc)
    report = validate_geometry(K, tol=request.tol or 1e-7)
    return (0 if report.valid else 1), report.to_json()


def _cmd_stationarity(request, kinds):
    K, V, gamma = _complex_varifold_gamma(kinds)
    report = stationarity(V, gamma, tol=request.tol)
    return (0 if report.is_stationary else 1), report.to_json()


def _cmd_chainify(request, kinds):
    K, V, _ = _complex_varifold_gamma(kinds)
    return 0, chain_to_json(chainify(V))


def _cmd_certify(request, kinds):
    K, V, gamma = _complex_varifold_gamma(kinds)
    cert = minimality_certificate(
        V,
        gamma,
        tol=request.tol or 1e-9,
        with_solver=request.options.get("with_solver", False),
        solver_config=request.solver_config,
    )
    return (0 if cert.passed else 1), cert.to_json()


def _cmd_minimize(request, kinds):
    cdoc, chdoc = _need(kinds, "complex", "chain")
    K, _ = complex_from_json(cdoc)
    b = chain_from_json(K, chdoc)
    problem = MinMassProblem(K, b.dimension + 1, b, b.group, request.solver_config)
    result = min_mass_fixed_boundary(problem)
    payload = result.to_json()
    payload["seed"] = request.solver_config.seed
    return (0 if result.status == "converged" else 1), payload


def _cmd_flatnorm(request, kinds):
    cdoc, chdoc = _need(kinds, "complex", "chain")
    K, _ = complex_from_json(cdoc)
    A = chain_from_json(K, chdoc)
    report = phi_flat_bound(A, solver_config=request.solver_config)
    payload = report.to_json()
    return (0 if report.passed else 1), payload


def _cmd_deform(request, kinds):
    K, V, gamma = _complex_varifold_gamma(kinds)
    report = deform_experiment(
        V,
        gamma,
        trials=request.options.get("trials", 100),
        magnitude=request.options.get("magnitude", 0.1),
        seed=request.seed,
        tol=request.tol,
    )
    return (0 if report.passed else 1), report.to_json()


def _cmd_groupnorm(request, kinds):
    (gdoc,) = _need(kinds, "group")
    G = group_from_json(gdoc)
    if not isinstance(G, SubgroupWithNorm):
        raise ValueError("groupnorm needs a subgroup descriptor")
    payload = {"generator_norms": list(G.generator_norms)}
    coords = request.options.get("coords")
    if coords is not None:
        payload["coords"] = list(coords)
        payload["norm"] = subgroup_norm(G, coords)
    ball_radius = request.options.get("ball")
    if ball_radius is not None:
        members = norm_ball(G, ball_radius)
        payload["ball_radius"] = ball_radius
        payload["ball"] = [
            {
                "coords": list(m.coords),
                "norm": m.norm,
                "value": G.ambient.coeff_to_json(m.value),
            }
            for m in members
        ]
    if coords is None and ball_radius is None:
        raise ValueError("groupnorm needs --coords and/or --ball")
    return 0, payload


def _cmd_demo(request, kinds):
    name = request.options["name"]
    params = {}
    for key in ("radius", "height"):
        if request.options.get(key) is not None:
            params[key] = request.options[key]
    params["refinement"] = request.options.get("refine", 0)
    if request.options.get("sectors") is not None:
        params["sectors"] = request.options["sectors"]
    if request.options.get("directions") is not None:
        params["directions"] = json.loads(request.options["directions"])
    if request.options.get("weights") is not None:
        params["weights"] = json.loads(request.options["weights"])
    K, V, gamma = generate_example(name, **params)
    return 0, {"complex": K.to_json(gamma), "varifold": varifold_to_json(V)}


_HANDLERS = {
    "validate": _cmd_validate,
    "stationarity": _cmd_stationarity,
    "chainify": _cmd_chainify,
    "certify": _cmd_certify,
    "minimize": _cmd_minimize,
    "flatnorm": _cmd_flatnorm,
    "deform": _cmd_deform,
    "groupnorm": _cmd_groupnorm,
    "demo": _cmd_demo,
}


def run(request: CommandRequest):
    """Dispatch a parsed request; returns (exit_code, JSON payload)."""
    handler = _HANDLERS.get(request.command)
    if handler is None:
        raise ValueError(f"unknown command {request.command!r}")
    kinds = _classify(_load_documents(request.inputs))
    code, payload = handler(request, kinds)
    payload["provenance"] = payload.get("provenance", {})
    payload["provenance"].setdefault("command", request.command)
    payload["provenance"].setdefault("seed", request.seed)
    payload["provenance"].setdefault("version", __version__)
    return code, payload


def _parser():
    parser = argparse.ArgumentParser(
        prog="polycal",
        description="polyhedral chains, varifolds, and calibration certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--in", dest="inputs", action="append", default=[], metavar="FILE")
        p.add_argument("--out", default=None, metavar="FILE")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--solver-config", default=None, metavar="FILE")

    for name in ("validate", "stationarity", "chainify", "minimize", "flatnorm"):
        common(sub.add_parser(name))
    certify = sub.add_parser("certify")
    common(certify)
    certify.add_argument("--with-solver", action="store_true")
    deform = sub.add_parser("deform")
    common(deform)
    deform.add_argument("--trials", type=int, default=100)
    deform.add_argument("--magnitude", type=float, default=0.1)
    groupnorm = sub.add_parser("groupnorm")
    common(groupnorm)
    groupnorm.add_argument("--coords", default=None, help="comma-separated integers")
    groupnorm.add_argument("--ball", type=float, default=None, help="norm-ball radius")
    demo = sub.add_parser("demo")
    common(demo)
    demo.add_argument("name")
    demo.add_argument("--radius", type=float, default=None)
    demo.add_argument("--height", type=float, default=None)
    demo.add_argument("--refine", type=int, default=0)
    demo.add_argument("--sectors", type=int, default=None)
    demo.add_argument("--directions", default=None, help="JSON list of vectors")
    demo.add_argument("--weights", default=None, help="JSON list of weights")
    return parser


def _request_from_args(args) -> CommandRequest:
    solver_config = SolverConfig(seed=args.seed)
    if args.solver_config:
        with open(args.solver_config) as handle:
            solver_config = SolverConfig.from_json(json.load(handle))
    options = {}
    if args.command == "certify":
        options["with_solver"] = args.with_solver
    elif args.command == "deform":
        options["trials"] = args.trials
        options["magnitude"] = args.magnitude
    elif args.command == "groupnorm":
        if args.coords is not None:
            options["coords"] = [int(tok) for tok in args.coords.split(",") if tok.strip()]
        options["ball"] = args.ball
    elif args.command == "demo":
        options = {
            "name": args.name,
            "radius": args.radius,
            "height": args.height,
            "refine": args.refine,
            "sectors": args.sectors,
            "directions": args.directions,
            "weights": args.weights,
        }
    return CommandRequest(
        command=args.command,
        inputs=args.inputs,
        out=args.out,
        tol=args.tol,
        seed=args.seed,
        solver_config=solver_config,
        options=options,
    )


def _emit(payload, out_path):
    text = json.dumps(payload, indent=2, default=float)
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    request = _request_from_args(args)
    try:
        code, payload = run(request)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"polycal: error: {exc}", file=sys.stderr)
        return 2
    _emit(payload, request.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
