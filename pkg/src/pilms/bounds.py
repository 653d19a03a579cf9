"""Lower bounds on the number of local settings, and plan audits.

Both bounds project the target onto a slice of the ``M`` basis on which a
plan can only contribute through its no-identity terms ``alpha_i0 A_i^n``:

* GHZ on ``{M[0, n-k, k] : k even}``, where its coordinates alternate in
  sign.  A plan's projection is an exponential sum
  ``g(x) = sum_i alpha_i beta_i^x``; every sign change forces a root and an
  exponential sum with ``r`` terms has at most ``r - 1`` roots.
* ``D_{n,m}`` on ``{M[0, j, 0] : 2m < j <= n}``, where it vanishes.  A plan's
  projection there is a Vandermonde matrix times a nonzero vector, which can
  vanish only with more than ``n - 2m`` distinct nodes ``b_i / d_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import ceil

import numpy as np

from .pidecomp import RESIDUAL_TOL, parse_target, pi_target_library
from .planner import MeasurementPlan
from .symcore import SymCoords, index_arrays, index_position, product_op_coords

__all__ = [
    "ProjectionVector",
    "BoundCertificate",
    "subspace_indices",
    "project_coords",
    "ghz_projection",
    "plan_projection",
    "sign_changes",
    "min_settings_sign_change",
    "dicke_null_rank_bound",
    "lower_bound",
    "audit_plan",
    "grid_search_min_residual",
]

ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProjectionVector:
    subspace_id: str
    n: int
    values: np.ndarray

    def __len__(self):
        return self.values.size


def _parse_subspace(subspace_id):
    name, _, arg = subspace_id.partition(":")
    if name == "ghz" and not arg:
        return name, None
    if name in ("dicke_null", "dicke_v2") and arg:
        return name, int(arg)
    raise ValueError(f"unknown subspace {subspace_id!r}")


def subspace_indices(subspace_id, n):
    """``(i, j, k)`` indices spanning a named slice of the ``M`` basis.

    ``ghz``: ``M[0, n-k, k]`` for even ``k``.  ``dicke_null:m``:
    ``M[0, j, 0]`` for ``2m+1 <= j <= n``.  ``dicke_v2:m``: ``M[0, j, 0]``
    for ``1 <= j <= 2m``.
    """
    name, m = _parse_subspace(subspace_id)
    if name == "ghz":
        return [(0, n - k, k) for k in range(0, n + 1, 2)]
    if name == "dicke_null":
        return [(0, j, 0) for j in range(2 * m + 1, n + 1)]
    return [(0, j, 0) for j in range(1, min(2 * m, n) + 1)]


def project_coords(coords: SymCoords, subspace_id):
    """Slice of symmetric coordinates on a named subspace."""
    idx = subspace_indices(subspace_id, coords.n)
    values = np.array([coords.values[index_position(coords.n, b)] for b in idx])
    return ProjectionVector(subspace_id, coords.n, values)


def ghz_projection(n):
    """``2^-n (1, -1, 1, ...)`` of length ``floor(n/2) + 1``."""
    if n < 2:
        raise ValueError("GHZ projection needs n >= 2")
    k = np.arange(n // 2 + 1)
    return ProjectionVector("ghz", n, (-1.0) ** k / 2.0**n)


def plan_projection(plan: MeasurementPlan, subspace_id):
    """Projection of a plan's operator, from its no-identity weights only."""
    n = plan.n
    name, m = _parse_subspace(subspace_id)
    idx = subspace_indices(subspace_id, n)
    values = np.zeros(len(idx))
    for s, row in zip(plan.settings, plan.coeffs):
        a0 = row[0]
        if a0 == 0.0:
            continue
        for p, (_, j, k) in enumerate(idx):
            values[p] += a0 * s.b**j * s.c**k * s.d ** (n - j - k)
    return ProjectionVector(subspace_id, n, values)


def sign_changes(values):
    """Sign alternations between consecutive nonzero entries."""
    signs = np.sign(np.asarray(values, dtype=float))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def min_settings_sign_change(v: ProjectionVector, betas_positive=True):
    """Fewest exponential terms that can reproduce ``v``'s sign pattern.

    With ``betas_positive`` every setting has ``b, c != 0`` and a sign change
    between entries ``x`` and ``x+1`` forces a root of ``g`` in ``(x, x+1)``,
    so ``s`` changes need ``s + 1`` terms.  Otherwise settings with ``c = 0``
    (resp. ``b = 0``) may absorb the first (resp. last) entry; each such
    group can remove at most one forced root while costing one setting, and
    the minimum over all cases is returned.
    """
    values = np.asarray(v.values if isinstance(v, ProjectionVector) else v, dtype=float)
    s = sign_changes(values)
    if betas_positive:
        return s + 1
    if values.size == 0:
        return 0
    best = None
    for absorb_first in (0, 1):
        for absorb_last in (0, 1):
            rest = values.copy()
            rest[0] = 0.0 if absorb_first else rest[0]
            rest[-1] = 0.0 if absorb_last else rest[-1]
            # the exponential sum must still match the untouched entries
            forced = sign_changes(values[absorb_first: values.size - absorb_last])
            if forced > 0:
                needed = forced + 1
            else:
                needed = 1 if np.any(rest != 0) else 0
            total = needed + absorb_first + absorb_last
            best = total if best is None else min(best, total)
    return best


def dicke_null_rank_bound(n, m):
    """``n - 2m + 1``, or 1 when ``n <= 2m``."""
    m = min(m, n - m)
    if n <= 2 * m:
        return 1
    rows = n - 2 * m
    # any rows x rows Vandermonde block on distinct nodes is nonsingular,
    # so a nonzero weight vector needs at least rows + 1 distinct nodes
    nodes = np.arange(1, rows + 1, dtype=float) / rows
    vander = np.vander(nodes, rows, increasing=True).T
    assert np.linalg.matrix_rank(vander) == rows
    return rows + 1


def lower_bound(state_id, n):
    """``(bound, m, witness)`` for a known target, else ``None``."""
    try:
        name, m = parse_target(state_id)
    except ValueError:
        return None
    if name == "ghz":
        return (
            ceil((n + 1) / 2), None,
            f"GHZ slice has {n // 2} sign changes; "
            f"an exponential sum with r terms has at most r-1 roots",
        )
    bound = dicke_null_rank_bound(n, m)
    return (
        bound, m,
        f"D_{{{n},{m}}} vanishes on M[0,j,0] for j > {2 * min(m, n - m)}; "
        f"a nonzero combination of Vandermonde columns with {max(n - 2 * min(m, n - m), 0)} "
        f"rows needs more distinct nodes than rows",
    )


def _nonzero(x, scale):
    return abs(x) > ZERO_TOL * max(scale, 1.0)


def _effective_count(plan, name, m):
    """Settings that can contribute to the bounding slice, counted per the proof."""
    active = [s for s, row in zip(plan.settings, plan.coeffs) if row[0] != 0.0]
    if name == "ghz":
        s_both = sum(_nonzero(s.b, s.scale) and _nonzero(s.c, s.scale) for s in active)
        s_b = sum(_nonzero(s.b, s.scale) and not _nonzero(s.c, s.scale) for s in active)
        s_c = sum(_nonzero(s.c, s.scale) and not _nonzero(s.b, s.scale) for s in active)
        return s_both + s_b + s_c, f"|S|={s_both}, |S_b|={s_b}, |S_c|={s_c}"
    with_b = [s for s in active if _nonzero(s.b, s.scale)]
    ratios = [s.b / s.d for s in with_b if _nonzero(s.d, s.scale)]
    flat = any(not _nonzero(s.d, s.scale) for s in with_b)
    distinct = np.unique(np.round(ratios, 9)).size if ratios else 0
    return distinct + int(flat), f"distinct b/d nodes={distinct}, d=0 group={int(flat)}"


@dataclass(frozen=True)
class BoundCertificate:
    state: str
    n: int
    m: int | None
    lower_bound: int | None
    plan_size: int
    verdict: str
    witness: str
    residual: float | None = None
    checked_n: int | None = None

    @property
    def passed(self):
        return self.verdict != "fail"

    def to_dict(self):
        return {
            "schema_version": 1,
            "state": self.state,
            "n": self.n,
            "m": self.m,
            "lower_bound": self.lower_bound,
            "plan_size": self.plan_size,
            "verdict": self.verdict,
            "witness": self.witness,
            "residual": self.residual,
            "checked_n": self.checked_n,
        }


def audit_plan(plan: MeasurementPlan, state_id=None, *, tol=RESIDUAL_TOL):
    """Check a plan against its target's reconstruction and lower bound."""
    state_id = plan.target if state_id is None else state_id
    n = plan.n
    known = lower_bound(state_id, n)
    if known is None:
        return BoundCertificate(
            state_id, n, None, None, len(plan), "no known bound",
            "no lower bound is known for this target", None, n,
        )
    bound, m, reason = known
    name, _ = parse_target(state_id)
    residual = plan.residual_against(pi_target_library(name, n, m))
    effective, split = _effective_count(plan, name, m)
    failures = []
    if not residual <= tol:
        failures.append(f"reconstruction residual {residual:.3g} > {tol:.1e}")
    if len(plan) < bound:
        failures.append(f"{len(plan)} settings < lower bound {bound}")
    if effective < bound and residual <= tol:
        failures.append(f"only {effective} settings reach the bounding slice")
    witness = f"{reason}; {split}; plan size {len(plan)} vs bound {bound}"
    if failures:
        witness += "; FAIL: " + "; ".join(failures)
    return BoundCertificate(
        state_id, n, m, bound, len(plan), "fail" if failures else "pass",
        witness, float(residual), n,
    )


def _setting_grid(step_deg):
    step = np.deg2rad(step_deg)
    out = []
    for theta in np.arange(0.0, np.pi + 1e-12, step):
        for phi in np.arange(0.0, 2 * np.pi - 1e-12, step):
            out.append((np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)))
            if theta == 0.0 or abs(theta - np.pi) < 1e-12:
                break
    return out


def _setting_columns(n, direction):
    # column j: coordinates of sum_pi I^j A^(n-j), the a^j part of (aI + A)^n
    b, c, d = direction
    full = product_op_coords(1.0, b, c, d, n).values
    i_counts = index_arrays(n)[0]
    return np.column_stack([np.where(i_counts == j, full, 0.0) for j in range(n + 1)])


def grid_search_min_residual(target: SymCoords, n_settings=1, step_deg=10.0):
    """Best max-norm residual over a grid of ``n_settings``-setting plans.

    Directions run over polar and azimuthal angles in ``step_deg`` steps;
    weights come from least squares.  A grid search is evidence, not proof.
    """
    n = target.n
    grid = _setting_grid(step_deg)
    cols = [_setting_columns(n, g) for g in grid]
    best = np.inf
    for combo in combinations(range(len(grid)), n_settings):
        mat = np.hstack([cols[c] for c in combo])
        w, *_ = np.linalg.lstsq(mat, target.values, rcond=None)
        best = min(best, float(np.max(np.abs(mat @ w - target.values))))
    return best
