import math

import numpy as np
import pytest

from supcusp.domain import GroupElement
from supcusp.dynamics import (
    OutOfChartError,
    axis_oracle,
    close_orbit,
    constants,
    expansion_ratio,
    flow,
    local_distance,
    splitting_components,
    w_in_M,
)
from supcusp.fixtures import load_data, planted_closing_case
from supcusp.structure import lie_basis, random_group_element, random_lie_element


def test_constants_at_T1_equal_1():
    c = constants(1.0, 0.1)
    assert c.C1 == pytest.approx(11.390186, abs=1e-6)
    assert c.eps1 == pytest.approx(0.010582, abs=1e-6)


def test_C1_is_increasing_beyond_its_minimum():
    Ts = np.linspace(2 * math.log(4 / 3), 3.0, 200)
    C = [constants(T).C1 for T in Ts]
    assert all(b > a for a, b in zip(C, C[1:]))


def test_C1_dips_for_small_T1():
    # the first branch of the max blows up as T1 -> 0, so C1 is not monotone on (0, 0.575)
    assert constants(0.3).C1 > constants(0.575).C1


def test_constants_reject_nonpositive():
    with pytest.raises(ValueError):
        constants(0.0)


def test_flow_contracts_positive_roots(rng):
    g = random_group_element(2, 0, rng)
    for root in (1, 2, -1, -2):
        nu = lie_basis(2, 0)[root][0] * 1e-5
        assert expansion_ratio(g, nu, 0.5) == pytest.approx(math.exp(-root * 0.5), rel=1e-3)


def test_splitting_components_sum(rng):
    xi = random_lie_element(2, 1, rng)
    parts = splitting_components(xi)
    assert (parts["T0"] + parts["T-"] + parts["T+"]).allclose(xi, atol=1e-12)


def test_local_distance_chart_limit(rng):
    g = random_group_element(1, 0, rng)
    far = flow(g, 3.0)
    with pytest.raises(OutOfChartError):
        local_distance(g, far)
    assert local_distance(g, flow(g, 0.2)) == pytest.approx(0.2, rel=1e-12)


@pytest.mark.parametrize("n,r,T", [(1, 0, 1.5), (1, 2, 2.0), (2, 1, 1.3), (3, 0, 2.5)])
def test_close_orbit_certifies_planted_cases(n, r, T):
    rng = np.random.default_rng([n, r, int(10 * T)])
    case = planted_closing_case(n, r, T, rng)
    res = close_orbit(case.x, case.gamma, T)
    assert res.status == "certified", res.notes
    assert res.residual < 1e-10
    assert w_in_M(res.w, 1e-9)
    assert res.t0 == pytest.approx(T, abs=1e-3)
    assert axis_oracle(case.gamma).coset_distance(res.z) < 1e-9
    assert max(res.bound_ratios.values()) <= 1.0


def test_coarse_perturbation_is_uncertified():
    rng = np.random.default_rng(3)
    case = planted_closing_case(1, 0, 1.2, rng, perturbation=0.02)
    res = close_orbit(case.x, case.gamma, 1.2)
    assert res.converged
    assert res.epsilon > res.consts.eps1
    assert res.status == "uncertified"


def test_short_time_is_uncertified():
    rng = np.random.default_rng(4)
    case = planted_closing_case(1, 0, 0.6, rng)
    res = close_orbit(case.x, case.gamma, 0.6)
    assert res.status == "uncertified"
    assert any("below T1" in note for note in res.notes)


def test_identity_gamma_below_T1_takes_degenerate_branch(rng):
    x = random_group_element(1, 1, rng)
    T = 0.004
    res = close_orbit(x, GroupElement.identity(1, 1), T)
    assert res.degenerate
    assert "Anosov-ii-T<=eps" in res.bound_ratios
    assert res.bound_ratios["Anosov-ii-T<=eps"] == pytest.approx(1.0, rel=1e-9)


def test_shipped_experiments_statuses():
    statuses = []
    for exp in load_data("closing_experiments.json")["experiments"]:
        res = close_orbit(GroupElement.from_json(exp["x"]), GroupElement.from_json(exp["gamma"]), exp["T"])
        statuses.append(res.status)
    assert statuses == ["certified"] * 4 + ["uncertified"]


def test_closing_result_json():
    rng = np.random.default_rng(5)
    case = planted_closing_case(1, 1, 1.5, rng)
    data = close_orbit(case.x, case.gamma, 1.5).to_json()
    assert data["status"] == "certified"
    assert set(data) >= {"z", "t0", "w", "residual", "bound_ratios", "epsilon", "constants"}
