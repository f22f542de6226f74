import numpy as np
import pytest

from supcusp.fixtures import (
    DATA_FILES,
    build_data_files,
    desk_generators,
    load_data,
    planted_closing_case,
    su11_from_sl2r,
)
from supcusp.structure import a_t, is_in_M


def _close(a, b, path="root"):
    if isinstance(a, dict):
        assert set(a) == set(b), path
        for key in a:
            _close(a[key], b[key], f"{path}.{key}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    elif isinstance(a, float):
        assert a == pytest.approx(b, abs=1e-10), path
    else:
        assert a == b, path


def test_shipped_data_is_reproducible():
    rebuilt = build_data_files()
    for name in DATA_FILES:
        _close(rebuilt[name], load_data(name), name)


def test_su11_map_preserves_form():
    M = np.array([[2.0, 1.0], [1.0, 1.0]])
    g = su11_from_sl2r(M)
    J = np.diag([1.0, -1.0])
    assert np.allclose(g.conj().T @ J @ g, J)
    assert np.trace(g).real == pytest.approx(3.0)


def test_desk_generators_with_phases():
    gens = desk_generators(1, phases=(0.3, -0.2))
    for g, th in zip(gens, (0.3, -0.2)):
        assert g.E[0, 0] == pytest.approx(np.exp(2j * th))


def test_planted_closing_case_epsilon_bound(rng):
    case = planted_closing_case(2, 1, 2.0, rng)
    assert case.epsilon <= 1e-4
    assert is_in_M(case.w0)
    assert case.gamma.distance_to(case.h @ a_t(2.0, 2, 1) @ case.w0 @ case.h.inv()) < 1e-12
