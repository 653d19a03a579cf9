from itertools import permutations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    I2, X, Y, Z, dense_projector, kron_all, ket_dicke, ket_ghz, random_pi_rho,
)
from pilms.errors import DecompositionRejected, ParameterRangeError
from pilms.pidecomp import decompose, pi_target_library
from pilms.planner import (
    LocalSetting,
    MeasurementPlan,
    dicke_setting_count,
    expectations_from_setting,
    general_setting_count,
    ghz_setting_count,
    outcome_signs,
    plan_dicke,
    plan_for_target,
    plan_ghz,
    reduce_to_settings,
)
from pilms.product_basis import operator_basis
from pilms.sim import exact_statistics
from pilms.symcore import SymCoords


def dense_setting_sum(setting, j, n):
    """Sum over distinct placements of I^j A^(n-j), for the raw direction A."""
    a = setting.b * X + setting.c * Y + setting.d * Z
    word = "I" * j + "A" * (n - j)
    local = {"I": I2, "A": a}
    return sum(kron_all([local[ch] for ch in w]) for w in set(permutations(word)))


def dense_plan(plan):
    return sum(
        alpha * dense_setting_sum(s, j, plan.n)
        for s, row in zip(plan.settings, plan.coeffs)
        for j, alpha in enumerate(row)
        if alpha != 0.0
    )


@pytest.mark.parametrize("n", range(2, 11))
def test_general_counts(n):
    plan = plan_for_target("general", n)
    assert len(plan) == general_setting_count(n) == (n + 1) * (n + 2) // 2
    assert plan.residual < 1e-8


def test_general_count_examples():
    assert general_setting_count(4) == 15
    assert general_setting_count(10) == 66
    # n = 1: any single-qubit observable
    target = SymCoords.from_mapping(1, {(0, 1, 0): 0.3, (0, 0, 1): -1.0, (1, 0, 0): 0.5})
    plan = reduce_to_settings(decompose(target, operator_basis(1)))
    assert len(plan) == 3
    assert plan.residual < 1e-12


@pytest.mark.parametrize("m", [1, 2])
def test_dicke_counts(m):
    for n in range(2 * m, 9):
        plan = plan_dicke(n, m)
        assert len(plan) == dicke_setting_count(n, m) == m * (2 * m + 3) * n + 1
        assert plan.residual < 1e-8


def test_dicke_count_examples():
    assert len(plan_dicke(4, 1)) == 21
    assert len(plan_dicke(6, 2)) == 85


@pytest.mark.parametrize("n", range(2, 9))
def test_ghz_counts(n):
    plan = plan_ghz(n)
    assert len(plan) == ghz_setting_count(n) == n + 1
    assert plan.residual < 1e-9


@pytest.mark.parametrize(
    "plan, ket",
    [
        (plan_dicke(3, 1), ket_dicke(3, 1)),
        (plan_dicke(4, 2), ket_dicke(4, 2)),
        (plan_dicke(3, 2), ket_dicke(3, 2)),
        (plan_ghz(2), ket_ghz(2)),
        (plan_ghz(4), ket_ghz(4)),
        (plan_for_target("w", 3, general=True), ket_dicke(3, 1)),
    ],
    ids=["W3", "D42", "D32-flipped", "GHZ2", "GHZ4", "W3-general"],
)
def test_plan_reconstructs_dense_projector(plan, ket):
    assert np.max(np.abs(dense_plan(plan) - dense_projector(ket))) < 1e-9


def test_ghz6_residual():
    assert plan_ghz(6).residual < 1e-9


def test_ghz_angle_fault_rejected():
    with pytest.raises(DecompositionRejected):
        plan_ghz(4, angle_shift=0.05)


def test_ghz_weights_closed_form():
    for n in range(2, 8):
        plan = plan_ghz(n)
        weights = plan.coeffs[1:, 0]
        np.testing.assert_allclose(weights, (-1.0) ** np.arange(n) / (2 * n), atol=1e-12)


def test_dicke_edge_cases():
    assert len(plan_dicke(3, 0)) == 1
    flipped = plan_dicke(5, 4)
    assert flipped.meta.get("flipped")
    assert flipped.residual < 1e-9
    with pytest.raises((ParameterRangeError, ValueError)):
        plan_dicke(3, 5)
    with pytest.raises(ParameterRangeError):
        plan_ghz(1)


def test_expectations_examples():
    n = 3
    probs = np.zeros(2**n)
    probs[0] = 1.0
    values = expectations_from_setting(LocalSetting(0, 0, 1), probs)
    np.testing.assert_allclose(values, [comb(n, n - j) for j in range(n + 1)])
    uniform = np.full(4, 0.25)
    assert expectations_from_setting(LocalSetting(1, 0, 0), uniform)[0] == pytest.approx(0.0)
    ghz = dense_projector(ket_ghz(3))
    probs = exact_statistics(ghz, LocalSetting(0, 0, 1))
    assert expectations_from_setting(LocalSetting(0, 0, 1), probs)[0] == pytest.approx(0.0, abs=1e-14)


def test_expectations_validation():
    with pytest.raises(ValueError):
        expectations_from_setting(LocalSetting(0, 0, 1), np.full(4, 0.3))
    with pytest.raises(ValueError):
        expectations_from_setting(LocalSetting(0, 0, 1), np.full(3, 1 / 3))


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 4),
    st.floats(0.05, np.pi - 0.05),
    st.floats(0, 2 * np.pi),
    st.floats(0.2, 3.0),
    st.integers(0, 2**32 - 1),
)
def test_expectations_match_dense_trace(n, theta, phi, scale, seed):
    rng = np.random.default_rng(seed)
    rho = random_pi_rho(n, rng) if n > 1 else np.diag([0.3, 0.7]).astype(complex)
    direction = scale * np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )
    setting = LocalSetting(*direction)
    probs = exact_statistics(rho, setting)
    values = expectations_from_setting(setting, probs, raw=True)
    for j in range(n + 1):
        oracle = np.trace(rho @ dense_setting_sum(setting, j, n)).real
        assert values[j] == pytest.approx(oracle, abs=1e-10 * scale**n)


def test_outcome_signs_order():
    signs = outcome_signs(2)
    np.testing.assert_array_equal(signs, [[1, 1], [1, -1], [-1, 1], [-1, -1]])


def test_local_setting_serialisation():
    s = LocalSetting(3.0, 4.0, 0.0, "x")
    assert s.scale == pytest.approx(5.0)
    np.testing.assert_allclose(s.unit, [0.6, 0.8, 0.0])
    back = LocalSetting.from_dict(s.to_dict())
    assert (back.b, back.c, back.d) == pytest.approx((3.0, 4.0, 0.0))
    with pytest.raises(ValueError):
        LocalSetting.from_dict({"b": 0, "c": 0, "d": 1, "scale": -1})


@pytest.mark.parametrize("target", ["ghz", "w", "dicke:2", "general"])
def test_plan_json_roundtrip(target):
    plan = plan_for_target(target, 4)
    back = MeasurementPlan.from_dict(plan.to_dict())
    assert len(back) == len(plan)
    assert back.reconstruct().max_abs_diff(plan.reconstruct()) < 1e-12
    assert back.target == plan.target


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(schema_version=2),
        lambda d: d.pop("settings"),
        lambda d: d["coeffs"].append({"setting": 99, "j": 0, "alpha": 1.0}),
        lambda d: d["coeffs"].append({"setting": 0, "j": 9, "alpha": 1.0}),
    ],
)
def test_plan_from_dict_rejects_malformed(mutate):
    d = plan_ghz(3).to_dict()
    mutate(d)
    with pytest.raises(ValueError):
        MeasurementPlan.from_dict(d)


def test_plan_shape_validation():
    with pytest.raises(ValueError):
        MeasurementPlan(3, [LocalSetting(0, 0, 1)], np.zeros((1, 3)), "x")


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_general_and_specialised_agree(n, rng):
    rho = random_pi_rho(n, rng)
    for target in ("ghz", "w"):
        spec = dense_plan(plan_for_target(target, n))
        gen = dense_plan(plan_for_target(target, n, general=True))
        assert abs(np.trace(rho @ (spec - gen))) < 1e-7
