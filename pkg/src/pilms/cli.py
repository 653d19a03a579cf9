"""``pilms`` command line: plan, estimate, audit, selftest.

Every command reads and writes versioned JSON.  Exit codes: 0 success,
2 validation failure, 3 numerical-acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from math import ceil
from pathlib import Path

import numpy as np

from . import states
from .bounds import (
    audit_plan,
    dicke_null_rank_bound,
    ghz_projection,
    min_settings_sign_change,
    plan_projection,
)
from .errors import PilmsError
from .pidecomp import RESIDUAL_TOL, decompose, parse_target, pi_target_library
from .planner import (
    MeasurementPlan,
    dicke_setting_count,
    general_setting_count,
    plan_dicke,
    plan_for_target,
    plan_ghz,
    reduce_to_settings,
)
from .product_basis import (
    ParamMatrix,
    certify_rank,
    make_param_matrix,
    operator_basis,
)
from .sim import DEFAULT_SEED, NOISE_MODELS, estimate_fidelity, noise_models, simulate
from .symcore import (
    SymCoords,
    coords_to_dense,
    enumerate_indices,
    m_basis_dense,
    norm_consts,
)

logger = logging.getLogger("pilms")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

SCHEMA_VERSION = 1

DEFAULTS = {
    "n": None,
    "target": "ghz",
    "scheme": "tangent",
    "mode": "exact",
    "shots": 10000,
    "seed": DEFAULT_SEED,
    "out": None,
    "tol_residual": RESIDUAL_TOL,
}


class ValidationFailure(Exception):
    pass


class NumericalFailure(Exception):
    pass


# I/O -----------------------------------------------------------------------

def write_json(path, payload):
    """Write ``payload`` atomically: temp file in the same directory, then rename."""
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path, kind):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ValidationFailure(f"{kind} file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"{kind} file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or data.get("schema_version") != SCHEMA_VERSION:
        raise ValidationFailure(
            f"{kind} file {path} lacks schema_version {SCHEMA_VERSION}"
        )
    return data


def resolve_config(args):
    """Merge flags over the config file over :data:`DEFAULTS`."""
    config = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationFailure(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(config) - set(DEFAULTS) - {"schema_version"}
        if unknown:
            raise ValidationFailure(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else config.get(key, default)
    if out["n"] is not None:
        out["n"] = int(out["n"])
        if out["n"] < 1:
            raise ValidationFailure(f"--n must be >= 1, got {out['n']}")
    if out["scheme"] not in ("integer", "tangent", "integer-grid", "tangent-grid"):
        raise ValidationFailure(f"unknown scheme {out['scheme']!r}")
    if out["mode"] not in ("exact", "sampled"):
        raise ValidationFailure(f"unknown mode {out['mode']!r}")
    if int(out["shots"]) < 1:
        raise ValidationFailure("--shots must be >= 1")
    if not float(out["tol_residual"]) > 0:
        raise ValidationFailure("--tol-residual must be positive")
    return out


# plan ----------------------------------------------------------------------

def build_plan(target, n, scheme, tol):
    """Plan for a named target, ``general``, or a SymCoords JSON file."""
    if target not in ("ghz", "w", "general") and not target.startswith("dicke"):
        path = Path(target)
        if not path.exists():
            raise ValidationFailure(
                f"target {target!r} is neither ghz, w, dicke:m, general nor a file"
            )
        try:
            coords = SymCoords.from_dict(read_json(path, "coords"))
        except ValueError as exc:
            raise ValidationFailure(str(exc)) from exc
        if n is not None and coords.n != n:
            raise ValidationFailure(f"coords file has n={coords.n}, --n is {n}")
        dec = decompose(coords, operator_basis(coords.n, scheme), tol=tol, name=path.stem)
        return reduce_to_settings(dec, tol=tol)
    if n is None:
        raise ValidationFailure("--n is required for named targets")
    plan = plan_for_target(target, n, scheme=scheme)
    if not plan.residual <= tol:
        raise NumericalFailure(f"plan residual {plan.residual:.3g} exceeds {tol:.1e}")
    return plan


def cmd_plan(args):
    cfg = resolve_config(args)
    plan = build_plan(cfg["target"], cfg["n"], cfg["scheme"], float(cfg["tol_residual"]))
    cond = plan.meta.get("omega_condition")
    summary = (
        f"target={plan.target} family={plan.family} n={plan.n} "
        f"settings={len(plan)} residual={plan.residual:.3e} "
        f"condition={'n/a' if cond is None else format(cond, '.3e')}"
    )
    write_json(cfg["out"], plan.to_dict())
    print(summary, file=sys.stderr if cfg["out"] is None else sys.stdout)
    return EXIT_OK


# estimate ------------------------------------------------------------------

def load_state(args, n, default_target):
    if args.state:
        path = Path(args.state)
        try:
            if path.suffix == ".npy":
                rho = np.load(path)
            else:
                data = read_json(path, "state")
                rho = np.asarray(data["real"], dtype=float) + 1j * np.asarray(
                    data.get("imag", np.zeros_like(data["real"])), dtype=float
                )
        except FileNotFoundError as exc:
            raise ValidationFailure(f"state file not found: {path}") from exc
        except (KeyError, ValueError) as exc:
            raise ValidationFailure(f"malformed state file {path}: {exc}") from exc
    else:
        rho = named_state(args.state_name or default_target, n)
    if rho.shape != (2**n, 2**n):
        raise ValidationFailure(f"state has shape {rho.shape}, plan needs n={n}")
    if args.noise:
        model, _, p = args.noise.partition(":")
        if model not in NOISE_MODELS or not p:
            raise ValidationFailure(
                f"--noise must be MODEL:P with MODEL in {NOISE_MODELS}"
            )
        rho = noise_models(rho, model, float(p))
    return rho


def named_state(name, n):
    name = name.lower()
    if name == "mixed":
        return np.eye(2**n, dtype=complex) / 2**n
    if name.startswith("product:"):
        bits = [int(b) for b in name.partition(":")[2]]
        if len(bits) != n:
            raise ValidationFailure(f"product state has {len(bits)} bits, need {n}")
        return states.projector(states.product_ket(bits))
    try:
        kind, m = parse_target(name)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    if kind == "ghz":
        return states.projector(states.ghz_ket(n))
    return states.projector(states.dicke_ket(n, m))


def cmd_estimate(args):
    cfg = resolve_config(args)
    plan = MeasurementPlan.from_dict(read_json(args.plan, "plan"))
    if cfg["n"] is not None and cfg["n"] != plan.n:
        raise ValidationFailure(f"plan has n={plan.n}, --n is {cfg['n']}")
    rho = load_state(args, plan.n, plan.target)
    shots = int(cfg["shots"]) if cfg["mode"] == "sampled" else None
    data = simulate(plan, rho, shots=shots, seed=int(cfg["seed"]))
    est = estimate_fidelity(plan, data)
    write_json(cfg["out"], est.to_dict())
    msg = f"value={est.value:.12g} std_error={est.std_error:.3g} mode={est.mode}"
    print(msg, file=sys.stderr if cfg["out"] is None else sys.stdout)
    return EXIT_OK


# audit ---------------------------------------------------------------------

def cmd_audit(args):
    cfg = resolve_config(args)
    plan = MeasurementPlan.from_dict(read_json(args.plan, "plan"))
    cert = audit_plan(plan, args.state, tol=float(cfg["tol_residual"]))
    write_json(cfg["out"], cert.to_dict())
    print(
        f"{cert.state} n={cert.n}: {cert.verdict} "
        f"(bound {cert.lower_bound}, plan size {cert.plan_size})",
        file=sys.stderr if cfg["out"] is None else sys.stdout,
    )
    return EXIT_OK if cert.passed else EXIT_NUMERICAL


# selftest ------------------------------------------------------------------

FAULTS = ("norm-const", "ghz-angle")


def _check_rank(max_n):
    for scheme in ("integer", "tangent"):
        for d in range(1, 5):
            for n in range(1, max_n + 1):
                certify_rank(make_param_matrix(d, n, scheme))
    pm = make_param_matrix(3, 3, "integer")
    rows = np.array(pm.rows)
    rows[1, 1] = rows[1, 0]
    try:
        certify_rank(ParamMatrix(3, 3, "integer-grid", rows))
    except ArithmeticError:
        return True
    return False


def _check_orthonormality(max_n, fault):
    for n in range(1, min(max_n, 4) + 1):
        consts = np.array(norm_consts(n))
        if fault:
            consts[-1] *= 1.001
        mats = [m_basis_dense(b, n) for b in enumerate_indices(n)]
        flat = np.array([m.reshape(-1) for m in mats])
        gram = (flat.conj() @ flat.T).real * consts[:, None]
        if np.max(np.abs(gram - np.eye(len(mats)))) > 1e-10:
            return False
    return True


def _dense_fidelity_ok(plan, rng):
    rho = states.random_pi_density(plan.n, rng)
    target = pi_target_library(plan.target, plan.n)
    exact = float(np.trace(rho @ coords_to_dense(target)).real)
    est = estimate_fidelity(plan, simulate(plan, rho)).value
    return abs(est - exact) < 1e-8


def _check_general(max_n, rng):
    for n in range(2, max_n + 1):
        plan = plan_for_target("w", n, general=True)
        if len(plan) != general_setting_count(n) or not _dense_fidelity_ok(plan, rng):
            return False
    return True


def _check_dicke(max_n, rng):
    for m in (1, 2):
        for n in range(2 * m, max_n + 1):
            plan = plan_dicke(n, m)
            if len(plan) != dicke_setting_count(n, m) or not _dense_fidelity_ok(plan, rng):
                return False
    return True


def _check_ghz(max_n, rng, fault):
    for n in range(2, max_n + 1):
        plan = plan_ghz(n, angle_shift=0.05 if fault else None)
        if len(plan) != n + 1 or not _dense_fidelity_ok(plan, rng):
            return False
    return True


def _check_ghz_bound(max_n):
    return all(
        min_settings_sign_change(ghz_projection(n)) == ceil((n + 1) / 2)
        for n in range(2, max_n + 1)
    )


def _check_dicke_bound(max_n):
    for m in (1, 2):
        for n in range(2 * m, max_n + 1):
            if dicke_null_rank_bound(n, m) != n - 2 * m + 1:
                return False
            proj = plan_projection(plan_dicke(n, m), f"dicke_null:{m}")
            if proj.values.size and np.max(np.abs(proj.values)) > 1e-10:
                return False
    return True


def run_selftest(max_n=5, inject_fault=None, seed=DEFAULT_SEED):
    """``[(claim, passed, detail)]`` for the oracle-equivalence checks."""
    rng = np.random.default_rng(seed)
    checks = [
        ("Theorem 1", "product-basis rank, duplicate nodes detected",
         lambda: _check_rank(max_n)),
        ("Normalization", "c_b Tr(M_b M_b') = delta",
         lambda: _check_orthonormality(max_n, inject_fault == "norm-const")),
        ("Theorem 2", "general plan: (n+1)(n+2)/2 settings, exact fidelity",
         lambda: _check_general(max_n, rng)),
        ("Theorem 3", "Dicke plan: m(2m+3)n+1 settings, exact fidelity",
         lambda: _check_dicke(max_n, rng)),
        ("GHZ plan", "n+1 settings, residual and exact fidelity",
         lambda: _check_ghz(max_n, rng, inject_fault == "ghz-angle")),
        ("Theorem 4", "GHZ sign-change bound ceil((n+1)/2)",
         lambda: _check_ghz_bound(max(max_n, 10))),
        ("Theorem 5", "Dicke null-subspace bound n-2m+1",
         lambda: _check_dicke_bound(max_n)),
    ]
    results = []
    for claim, desc, fn in checks:
        try:
            ok = bool(fn())
            detail = desc
        except (PilmsError, ArithmeticError, ValueError) as exc:
            ok = False
            detail = f"{desc}: {type(exc).__name__}: {exc}"
        results.append((claim, ok, detail))
    return results


def cmd_selftest(args):
    results = run_selftest(args.max_n, args.inject_fault, args.seed or DEFAULT_SEED)
    width = max(len(c) for c, _, _ in results)
    for claim, ok, detail in results:
        print(f"{claim:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


# entry point ---------------------------------------------------------------

def _common(p, *, target=True):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--n", type=int, help="number of qubits")
    if target:
        p.add_argument(
            "--target",
            help="ghz | w | dicke:m | general | path to a coordinates JSON "
            f"(default: {DEFAULTS['target']})",
        )
        p.add_argument(
            "--scheme", choices=["integer", "tangent"],
            help=f"product-basis node grid (default: {DEFAULTS['scheme']})",
        )
    p.add_argument("--out", help="output JSON path (default: stdout)")
    p.add_argument(
        "--tol-residual", dest="tol_residual", type=float,
        help=f"max-norm reconstruction tolerance (default: {DEFAULTS['tol_residual']:g})",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pilms",
        description="Plan, simulate and audit local-setting measurements of "
        "permutation-invariant observables.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="write a measurement plan")
    _common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("estimate", help="estimate <target> from a plan on a state")
    _common(p, target=False)
    p.add_argument("--plan", required=True, help="plan JSON")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--state", help="density matrix (.npy or JSON with real/imag)")
    src.add_argument(
        "--state-name",
        help="ghz | w | dicke:m | mixed | product:BITS (default: the plan's target)",
    )
    p.add_argument("--noise", help=f"MODEL:P with MODEL in {', '.join(NOISE_MODELS)}")
    p.add_argument(
        "--mode", choices=["exact", "sampled"],
        help=f"(default: {DEFAULTS['mode']})",
    )
    p.add_argument("--shots", type=int, help=f"shots per setting (default: {DEFAULTS['shots']})")
    p.add_argument("--seed", type=int, help=f"sampling seed (default: {DEFAULTS['seed']})")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("audit", help="check a plan against its lower bound")
    _common(p, target=False)
    p.add_argument("--plan", required=True, help="plan JSON")
    p.add_argument("--state", help="target to audit against (default: the plan's target)")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("selftest", help="run the oracle-equivalence checks")
    p.add_argument("--max-n", type=int, default=5, help="largest qubit count (default: 5)")
    p.add_argument("--inject-fault", choices=FAULTS, help="deliberately break one check")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, PilmsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
