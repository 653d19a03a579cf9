"""Measurement plans built from local settings ``A^{(x) n}``.

One setting ``A = b X + c Y + d Z`` measured on every qubit yields the
expectation of every ``sum_pi I^j A^(n-j)`` at once, through the elementary
symmetric polynomials of the +-1 outcomes.  A :class:`MeasurementPlan` pairs
a list of settings with weights ``alpha[i, j]`` on those operators such that
their sum reproduces the target observable.

Three planners are provided:

* :func:`reduce_to_settings` groups a product-operator decomposition by its
  ``(b, c)`` grid key, giving ``(n+1)(n+2)/2`` settings for any target;
* :func:`plan_dicke` uses ``m(2m+3)n + 1`` settings for ``D_{n,m}``;
* :func:`plan_ghz` uses ``n + 1`` settings for GHZ.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, pi

import numpy as np

from . import _backend
from .errors import DecompositionRejected, ParameterRangeError
from .pidecomp import (
    RESIDUAL_TOL,
    Decomposition,
    diag_block_coeffs,
    flip_pair_coeffs,
    pi_target_library,
)
from .product_basis import ParamMatrix, expansion_matrix, compositions
from .symcore import SymCoords, index_arrays

__all__ = [
    "LocalSetting",
    "MeasurementPlan",
    "reduce_to_settings",
    "plan_dicke",
    "plan_ghz",
    "plan_for_target",
    "expectations_from_setting",
    "outcome_signs",
    "general_setting_count",
    "dicke_setting_count",
    "ghz_setting_count",
]

SCHEMA_VERSION = 1
PROB_TOL = 1e-9


def general_setting_count(n):
    return (n + 1) * (n + 2) // 2


def dicke_setting_count(n, m):
    return m * (2 * m + 3) * n + 1


def ghz_setting_count(n):
    return n + 1


@dataclass(frozen=True)
class LocalSetting:
    """Raw direction ``(b, c, d)`` of ``A = b X + c Y + d Z``.

    The simulator measures along the unit vector :attr:`unit`; plan weights
    refer to the raw operator, so expectations of ``A^(n-j)`` pick up a
    factor ``scale ** (n - j)``.
    """

    b: float
    c: float
    d: float
    label: str = ""

    def __post_init__(self):
        if self.b == 0 and self.c == 0 and self.d == 0:
            raise ValueError("local setting direction must be nonzero")

    @property
    def scale(self):
        return float(np.sqrt(self.b**2 + self.c**2 + self.d**2))

    @property
    def unit(self):
        s = self.scale
        return (self.b / s, self.c / s, self.d / s)

    def to_dict(self):
        ub, uc, ud = self.unit
        return {"b": ub, "c": uc, "d": ud, "scale": self.scale, "label": self.label}

    @classmethod
    def from_dict(cls, data):
        s = float(data.get("scale", 1.0))
        if not s > 0:
            raise ValueError(f"setting scale must be positive, got {s}")
        return cls(
            float(data["b"]) * s, float(data["c"]) * s, float(data["d"]) * s,
            str(data.get("label", "")),
        )


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    """Settings plus weights ``coeffs[i, j]`` on ``sum_pi I^j A_i^(n-j)``."""

    n: int
    settings: tuple
    coeffs: np.ndarray
    target: str
    family: str = "custom"
    residual: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if coeffs.shape != (len(self.settings), self.n + 1):
            raise ValueError(
                f"coeffs must have shape ({len(self.settings)}, {self.n + 1}), "
                f"got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "settings", tuple(self.settings))

    def __len__(self):
        return len(self.settings)

    def reconstruct(self):
        """Symmetric coordinates of ``sum_{i,j} alpha_ij sum_pi I^j A_i^(n-j)``."""
        i, j, k, l = index_arrays(self.n)
        values = np.zeros(i.size)
        for s, row in zip(self.settings, self.coeffs):
            values += row[i] * np.power(s.b, j) * np.power(s.c, k) * np.power(s.d, l)
        return SymCoords(self.n, values)

    def residual_against(self, target: SymCoords):
        return self.reconstruct().max_abs_diff(target)

    def with_residual(self, target: SymCoords):
        res = self.residual_against(target)
        return MeasurementPlan(
            self.n, self.settings, self.coeffs, self.target, self.family, res, self.meta
        )

    def to_dict(self):
        coeffs = [
            {"setting": i, "j": j, "alpha": float(a)}
            for i, row in enumerate(self.coeffs)
            for j, a in enumerate(row)
            if a != 0.0
        ]
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "target": self.target,
            "family": self.family,
            "settings": [s.to_dict() for s in self.settings],
            "coeffs": coeffs,
            "residual": None if np.isnan(self.residual) else self.residual,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported plan schema_version {data.get('schema_version')!r}"
            )
        try:
            n = int(data["n"])
            settings = [LocalSetting.from_dict(s) for s in data["settings"]]
            coeffs = np.zeros((len(settings), n + 1))
            for entry in data["coeffs"]:
                i, j = int(entry["setting"]), int(entry["j"])
                if not (0 <= i < len(settings) and 0 <= j <= n):
                    raise ValueError(f"coefficient index ({i}, {j}) out of range")
                coeffs[i, j] += float(entry["alpha"])
            residual = data.get("residual")
            return cls(
                n, settings, coeffs, str(data["target"]),
                str(data.get("family", "custom")),
                float("nan") if residual is None else float(residual),
                dict(data.get("meta", {})),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed plan document: {exc}") from exc


def _powers(a, n):
    # a ** J for J = 0..n with 0 ** 0 = 1
    return np.power(float(a), np.arange(n + 1))


# General plan --------------------------------------------------------------

def reduce_to_settings(dec: Decomposition, *, tol=RESIDUAL_TOL):
    """Group a product-operator decomposition into local settings.

    ``(a I + A)^{(x) n} = sum_J a^J sum_pi I^J A^(n-J)`` for
    ``A = b_j X + c_k Y + Z``, so all basis operators sharing ``(j, k)`` are
    read off the same setting.
    """
    if not dec.residual <= tol:
        raise DecompositionRejected(
            f"decomposition residual {dec.residual:.3g} exceeds {tol:.1e}",
            residual=dec.residual, condition=dec.omega_condition,
        )
    n, basis = dec.n, dec.basis
    slots = {}
    settings = []
    rows = []
    for key, (a, b, c), g in zip(basis.keys, basis.elements, dec.gamma):
        group = key[1:]
        if group not in slots:
            slots[group] = len(settings)
            settings.append(LocalSetting(b, c, 1.0, f"b{group[0]}c{group[1]}"))
            rows.append(np.zeros(n + 1))
        rows[slots[group]] += g * _powers(a, n)
    plan = MeasurementPlan(
        n, settings, np.array(rows), dec.target, "general",
        meta={"scheme": basis.scheme, "omega_condition": dec.omega_condition},
    )
    return plan.with_residual(dec.reconstruct())


# GHZ plan ------------------------------------------------------------------

Z_SETTING = LocalSetting(0.0, 0.0, 1.0, "z")


def plan_ghz(n, *, angle_shift=None, tol=1e-9):
    """GHZ_n with ``sigma_Z`` plus ``n`` equatorial settings.

    The equatorial settings are ``cos(q pi / n) X + sin(q pi / n) Y``; their
    weights are found by solving for the off-diagonal part
    ``2^-n sum_{even k} (-1)^(k/2) sum_pi Y^k X^(n-k)``.  ``angle_shift``
    (radians added to each angle) exists only for fault injection.
    """
    if n < 2:
        raise ParameterRangeError(f"GHZ plan needs n >= 2, got {n}")
    target = pi_target_library("ghz", n)
    phis = np.arange(n) * pi / n
    if angle_shift is not None:
        phis = phis + np.asarray(angle_shift, dtype=float)
    k = np.arange(n + 1)
    system = np.power(np.cos(phis)[None, :], (n - k)[:, None]) * np.power(
        np.sin(phis)[None, :], k[:, None]
    )
    rhs = np.where(k % 2 == 0, (-1.0) ** (k // 2), 0.0) / 2.0**n
    weights, *_ = np.linalg.lstsq(system, rhs, rcond=None)

    coeffs = np.zeros((n + 1, n + 1))
    coeffs[0] = 0.5 * (diag_block_coeffs(0, n) + diag_block_coeffs(n, 0))
    settings = [Z_SETTING]
    for q, (phi, w) in enumerate(zip(phis, weights)):
        settings.append(LocalSetting(float(np.cos(phi)), float(np.sin(phi)), 0.0, f"xy{q}"))
        coeffs[q + 1, 0] = w
    plan = MeasurementPlan(n, settings, coeffs, "ghz", "ghz").with_residual(target)
    if not plan.residual <= tol:
        raise DecompositionRejected(
            f"GHZ plan residual {plan.residual:.3g} exceeds {tol:.1e}",
            residual=plan.residual,
        )
    return plan


# Dicke plan ----------------------------------------------------------------

@lru_cache(maxsize=None)
def _angle_weights(n):
    """Rows of ``V^-1`` with ``V[q, r] = sin^r(t_q) cos^(n-r)(t_q)``.

    ``sum_q W[r, q] (sin t_q T + cos t_q P0)^{(x) n} = sum_pi T^r P0^(n-r)``.
    """
    theta = np.arange(n + 1) * pi / (n + 1)
    r = np.arange(n + 1)
    v = np.power(np.sin(theta)[:, None], r[None, :]) * np.power(
        np.cos(theta)[:, None], (n - r)[None, :]
    )
    w = np.linalg.inv(v)
    w.setflags(write=False)
    return theta, w


def plan_dicke(n, m, *, tol=RESIDUAL_TOL):
    """``D_{n,m}`` with ``m(2m+3)n + 1`` settings.

    The projector splits into a diagonal part (read from ``sigma_Z``) and
    off-diagonal blocks ``Theta_t``, ``1 <= t <= m``.  Each block lies in the
    span of ``sum_pi T_jk^(m+t) P0^(n-m-t)`` with
    ``T_jk = P1 + b_j X + c_k Y`` on nodes ``b, c in {0, ..., 2m}``, and each
    of those is a combination of ``(sin t_q T_jk + cos t_q P0)^{(x) n}`` over
    ``t_q = q pi / (n + 1)``.  ``q = 0`` and ``T_00`` reduce to ``sigma_Z``.

    For ``m > n/2`` the plan for ``D_{n,n-m}`` is conjugated by ``X^{(x) n}``.
    """
    if m < 0 or n < 1 or m > n:
        raise ParameterRangeError(f"Dicke plan needs 0 <= m <= n, got n={n}, m={m}")
    if 2 * m > n:
        return _flipped(plan_dicke(n, n - m, tol=tol), m)
    target = pi_target_library("dicke", n, m)
    norm = comb(n, m)
    nodes = np.arange(2 * m + 1, dtype=np.float64)
    theta, weights = _angle_weights(n)

    settings = [Z_SETTING]
    rows = [diag_block_coeffs(m, n - m) / norm]
    slot = {}
    for j in range(2 * m + 1):
        for k in range(2 * m + 1 - j):
            if (j, k) == (0, 0):
                continue
            for q in range(1, n + 1):
                s, c = np.sin(theta[q]), np.cos(theta[q])
                slot[j, k, q] = len(settings)
                settings.append(
                    LocalSetting(nodes[j] * s, nodes[k] * s, (c - s) / 2, f"T{j}{k}q{q}")
                )
                rows.append(np.zeros(n + 1))
    coeffs = np.array(rows)

    for t in range(1, m + 1):
        size = m + t
        pm = ParamMatrix(3, size, "integer-grid",
                         np.vstack([np.ones(size + 1), nodes[: size + 1], nodes[: size + 1]]))
        block = np.zeros(len(compositions(size, 3)))
        keys = {key: p for p, key in enumerate(compositions(size, 3))}
        for l, alpha in enumerate(flip_pair_coeffs(t)):
            block[keys[l, 2 * t - l]] = alpha
        solved = np.linalg.solve(expansion_matrix(pm), block) / norm
        for (j, k), w in zip(compositions(size, 3), solved):
            if w == 0.0:
                continue
            if (j, k) == (0, 0):
                coeffs[0] += w * diag_block_coeffs(size, n - size)
                continue
            for q in range(n + 1):
                wq = w * weights[size, q]
                if q == 0:
                    coeffs[0] += wq / 2.0**n
                else:
                    s, c = np.sin(theta[q]), np.cos(theta[q])
                    coeffs[slot[j, k, q]] += wq * _powers((s + c) / 2, n)

    name = "w" if m == 1 else f"dicke:{m}"
    plan = MeasurementPlan(n, settings, coeffs, name, "dicke", meta={"m": m})
    plan = plan.with_residual(target)
    if not plan.residual <= tol:
        raise DecompositionRejected(
            f"Dicke plan residual {plan.residual:.3g} exceeds {tol:.1e}",
            residual=plan.residual,
        )
    return plan


def _flipped(plan, m):
    # X^{(x) n} (b X + c Y + d Z) X^{(x) n} = b X - c Y - d Z on every qubit
    settings = [LocalSetting(s.b, -s.c, -s.d, s.label) for s in plan.settings]
    name = "w" if m == 1 else f"dicke:{m}"
    flipped = MeasurementPlan(
        plan.n, settings, plan.coeffs, name, "dicke", meta={"m": m, "flipped": True}
    )
    return flipped.with_residual(pi_target_library("dicke", plan.n, m))


def plan_for_target(target, n, *, general=False, scheme="tangent-grid"):
    """Specialised plan for ``ghz``/``w``/``dicke:m``, or the general plan."""
    from .pidecomp import decompose, parse_target
    from .product_basis import operator_basis

    if target == "general":
        target, general = "ghz", True
    name, m = parse_target(target)
    if general:
        coords = pi_target_library(name, n, m)
        label = "w" if name == "w" else (f"dicke:{m}" if name == "dicke" else name)
        return reduce_to_settings(decompose(coords, operator_basis(n, scheme), name=label))
    if name == "ghz":
        return plan_ghz(n)
    return plan_dicke(n, m)


# Observation 1 -------------------------------------------------------------

@lru_cache(maxsize=16)
def outcome_signs(n):
    """``(2^n, n)`` int8 array of +-1 outcomes; bit 1 of the index means -1.

    Qubit 0 is the most significant bit.
    """
    idx = np.arange(2**n)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)[None, :]) & 1
    out = (1 - 2 * bits).astype(np.int8)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def _esym_table(n):
    table = _backend.esym_rows(outcome_signs(n))
    table.setflags(write=False)
    return table


def expectations_from_setting(setting, probs, *, raw=False):
    """Expectations of ``sum_pi I^j A^(n-j)`` for ``j = 0..n``.

    ``probs`` is the outcome distribution of measuring the unit direction of
    ``setting`` on every qubit, indexed as in :func:`outcome_signs`.  Entry
    ``j`` is ``E[e_{n-j}(s)]`` over the +-1 outcome strings ``s``.  With
    ``raw=True`` the values refer to the unnormalised ``A`` and carry the
    factor ``scale ** (n - j)``.
    """
    probs = np.asarray(probs, dtype=np.float64)
    n = int(round(np.log2(probs.size))) if probs.ndim == 1 and probs.size else -1
    if n < 1 or probs.shape != (2**n,):
        raise ValueError(f"expected 2^n outcome probabilities, got shape {probs.shape}")
    if np.any(probs < -PROB_TOL) or abs(probs.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"outcome probabilities sum to {probs.sum():.12g}, not 1")
    values = (probs @ _esym_table(n))[::-1]
    if raw:
        values = values * setting.scale ** (n - np.arange(n + 1))
    return values
