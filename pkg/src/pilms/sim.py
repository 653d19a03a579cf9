"""Simulated measurement of plans on dense density matrices.

Exact mode feeds Born-rule outcome distributions into the plan; sampled mode
draws multinomial shot counts per setting and propagates the per-setting
sample variance of the combined estimator.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidObservableError, MissingDataError, ParameterRangeError
from .planner import MeasurementPlan, LocalSetting, expectations_from_setting, outcome_signs
from .states import check_density

__all__ = [
    "DEFAULT_SEED",
    "ShotRecord",
    "FidelityEstimate",
    "exact_statistics",
    "sample_shots",
    "simulate",
    "estimate_fidelity",
    "noise_models",
    "NOISE_MODELS",
    "plan_id",
]

DEFAULT_SEED = 20190417


def _measurement_basis(setting: LocalSetting):
    b, c, d = setting.unit
    a = b * np.array([[0, 1], [1, 0]]) + c * np.array([[0, -1j], [1j, 0]]) + d * np.diag([1, -1])
    evals, evecs = np.linalg.eigh(a)
    # column 0 -> eigenvalue +1
    return evecs[:, ::-1]


def exact_statistics(rho, setting: LocalSetting, *, validate=True):
    """Outcome distribution of measuring ``setting`` on every qubit.

    Index order follows :func:`pilms.planner.outcome_signs`.
    """
    rho = np.asarray(rho, dtype=complex)
    if validate:
        try:
            check_density(rho, herm_tol=1e-10, trace_tol=1e-10)
        except ValueError as exc:
            raise InvalidObservableError(str(exc)) from exc
    n = int(round(np.log2(rho.shape[0])))
    u = _measurement_basis(setting)
    # kernel[a, 2r + c] = conj(u[r, a]) u[c, a]
    kernel = np.array([np.outer(u[:, a].conj(), u[:, a]).reshape(4) for a in range(2)])
    t = rho.reshape((2,) * (2 * n))
    t = t.transpose([ax for q in range(n) for ax in (q, n + q)]).reshape((4,) * n)
    for q in range(n):
        t = np.moveaxis(np.tensordot(kernel, t, axes=([1], [q])), 0, q)
    probs = t.reshape(-1).real
    probs = np.where(probs < 0, 0.0, probs)
    total = probs.sum()
    if abs(total - 1) > 1e-10:
        raise InvalidObservableError(f"outcome probabilities sum to {total:.12g}")
    return probs / total


@dataclass(frozen=True, eq=False)
class ShotRecord:
    setting_index: int
    shots: int
    outcomes: dict
    seed: int

    def __post_init__(self):
        total = sum(self.outcomes.values())
        if total != self.shots:
            raise ValueError(f"outcome counts sum to {total}, expected {self.shots}")
        lengths = {len(k) for k in self.outcomes}
        if len(lengths) > 1:
            raise ValueError("outcome strings have inconsistent lengths")

    @property
    def n(self):
        return len(next(iter(self.outcomes)))

    def to_dict(self):
        return {
            "setting": self.setting_index,
            "shots": self.shots,
            "seed": self.seed,
            "counts": dict(sorted(self.outcomes.items())),
        }

    @classmethod
    def from_dict(cls, data):
        counts = {str(k): int(v) for k, v in data["counts"].items()}
        if any(set(k) - {"+", "-"} for k in counts):
            raise ValueError("outcome strings may only contain '+' and '-'")
        return cls(int(data["setting"]), int(data["shots"]), counts, int(data["seed"]))


def _outcome_label(signs_row):
    return "".join("+" if s > 0 else "-" for s in signs_row)


def sample_shots(probs, shots, seed=DEFAULT_SEED, setting_index=0):
    """Multinomial shot counts drawn from ``probs``.

    The stream is seeded from ``(seed, setting_index)``, so settings can be
    sampled in any order or in parallel with identical results.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.asarray(probs, dtype=np.float64)
    n = int(round(np.log2(probs.size)))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(setting_index)]))
    counts = rng.multinomial(int(shots), probs / probs.sum())
    signs = outcome_signs(n)
    outcomes = {_outcome_label(signs[i]): int(counts[i]) for i in np.flatnonzero(counts)}
    return ShotRecord(int(setting_index), int(shots), outcomes, int(seed))


def simulate(plan: MeasurementPlan, rho, *, shots=None, seed=DEFAULT_SEED):
    """Per-setting data for ``plan`` on ``rho``: distributions, or shots if given."""
    check_density(np.asarray(rho), herm_tol=1e-10, trace_tol=1e-10)
    data = []
    for idx, setting in enumerate(plan.settings):
        probs = exact_statistics(rho, setting, validate=False)
        data.append(probs if shots is None else sample_shots(probs, shots, seed, idx))
    return data


def plan_id(plan: MeasurementPlan):
    blob = json.dumps(plan.to_dict(), sort_keys=True).encode()
    return f"{plan.target}/{plan.family}/n{plan.n}/{hashlib.sha256(blob).hexdigest()[:12]}"


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    std_error: float
    mode: str
    plan_id: str
    shots_per_setting: int | None = None
    seed: int | None = None

    def to_dict(self):
        return {
            "schema_version": 1,
            "value": self.value,
            "std_error": self.std_error,
            "mode": self.mode,
            "plan_id": self.plan_id,
            "shots_per_setting": self.shots_per_setting,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            float(data["value"]), float(data["std_error"]), str(data["mode"]),
            str(data["plan_id"]), data.get("shots_per_setting"), data.get("seed"),
        )


def _weights(plan, i):
    # per-shot estimator: sum_j alpha_ij scale^(n-j) e_{n-j}(s), as weights on e_0..e_n
    n = plan.n
    w = plan.coeffs[i] * plan.settings[i].scale ** (n - np.arange(n + 1))
    return w[::-1]


def estimate_fidelity(plan: MeasurementPlan, data):
    """Combine per-setting data into ``<target>``.

    ``data[i]`` is either an outcome distribution (exact) or a
    :class:`ShotRecord` for setting ``i``.
    """
    if len(data) != len(plan.settings):
        raise MissingDataError(
            f"plan has {len(plan.settings)} settings but {len(data)} data entries"
        )
    n = plan.n
    value = 0.0
    variance = 0.0
    shots = set()
    seeds = set()
    for i, entry in enumerate(data):
        if entry is None:
            raise MissingDataError(f"no data for setting {i}")
        if isinstance(entry, ShotRecord):
            if entry.shots <= 0:
                raise MissingDataError(f"setting {i} has zero shots")
            if entry.n != n:
                raise ValueError(f"setting {i}: outcome length {entry.n} != n={n}")
            labels = list(entry.outcomes)
            counts = np.array([entry.outcomes[k] for k in labels], dtype=np.float64)
            signs = np.array([[1 if ch == "+" else -1 for ch in k] for k in labels])
            z = _backend.esym_rows(signs) @ _weights(plan, i)
            mean = counts @ z / entry.shots
            if entry.shots > 1:
                var = counts @ (z - mean) ** 2 / (entry.shots - 1)
                variance += var / entry.shots
            value += mean
            shots.add(entry.shots)
            seeds.add(entry.seed)
        else:
            probs = np.asarray(entry, dtype=np.float64)
            if probs.size != 2**n:
                raise ValueError(f"setting {i}: expected {2**n} probabilities")
            value += plan.coeffs[i] @ expectations_from_setting(
                plan.settings[i], probs, raw=True
            )
    sampled = bool(shots)
    return FidelityEstimate(
        float(value),
        float(np.sqrt(variance)) if sampled else 0.0,
        "sampled" if sampled else "exact",
        plan_id(plan),
        (shots.pop() if len(shots) == 1 else None) if sampled else None,
        (seeds.pop() if len(seeds) == 1 else None) if sampled else None,
    )


# Noise ---------------------------------------------------------------------

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def _kraus(model, p):
    if model == "depolarizing":
        return [np.sqrt(1 - 3 * p / 4) * _PAULI["I"]] + [
            np.sqrt(p / 4) * _PAULI[s] for s in "XYZ"
        ]
    if model == "dephasing":
        return [np.sqrt(1 - p / 2) * _PAULI["I"], np.sqrt(p / 2) * _PAULI["Z"]]
    if model == "bitflip":
        return [np.sqrt(1 - p) * _PAULI["I"], np.sqrt(p) * _PAULI["X"]]
    raise ValueError(model)


NOISE_MODELS = ("depolarizing", "dephasing", "bitflip", "global_depolarizing")


def noise_models(rho, model, p):
    """Apply a noise channel to ``rho``.

    ``depolarizing``, ``dephasing`` and ``bitflip`` act identically on every
    qubit and shrink the affected Bloch components by ``1 - p``;
    ``global_depolarizing`` mixes the whole state with ``I / 2^n``.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterRangeError(f"noise strength must be in [0, 1], got {p}")
    if model not in NOISE_MODELS:
        raise ValueError(f"unknown noise model {model!r}; expected one of {NOISE_MODELS}")
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if model == "global_depolarizing":
        return (1 - p) * rho + p * np.eye(dim) / dim
    n = int(round(np.log2(dim)))
    kraus = _kraus(model, p)
    t = rho.reshape((2,) * (2 * n))
    for q in range(n):
        acc = np.zeros_like(t)
        for k in kraus:
            u = np.moveaxis(np.tensordot(k, t, axes=([1], [q])), 0, q)
            acc += np.moveaxis(np.tensordot(k.conj(), u, axes=([1], [n + q])), 0, n + q)
        t = acc
    return t.reshape(dim, dim)
