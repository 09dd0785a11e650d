import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effent.measurement import (
    OBSERVABLES,
    InfeasibleRecordError,
    MeasurementRecord,
    SetConfiguration,
    observable_operator,
    observe,
    observe_elements,
    parse_record_line,
    reconstruct_diagonals,
    reconstruct_reh,
    record,
)
from effent.states import bell_state, is_ppt, pure_state, random_state


@pytest.mark.parametrize("config", list(SetConfiguration))
def test_projectors(config):
    p_n, p_e = config.projectors
    for p in (p_n, p_e):
        assert np.allclose(p @ p, p, atol=1e-15)
        assert np.array_equal(p, p.T.conj())
    assert np.allclose(p_n @ p_e, 0)
    total = p_n + p_e
    assert np.allclose(total @ total, total)


def test_full_identity_for_a_and_c():
    for config in (SetConfiguration.A_LOWER, SetConfiguration.A_UPPER,
                   SetConfiguration.C_EXCITON_COUNT, SetConfiguration.C_VACUUM):
        assert np.allclose(sum(config.projectors), np.eye(4))
    # the midpoint SET only resolves the single-exciton subspace
    assert np.allclose(sum(SetConfiguration.B_MIDPOINT.projectors), np.diag([0, 1, 1, 0]))


def test_two_routes_agree():
    for seed in range(100):
        rho = random_state(seed)
        for name in OBSERVABLES:
            assert abs(observe(rho, name) - observe_elements(rho, name)) < 1e-14
        for config in SetConfiguration:
            assert observe(rho, config) == observe(rho, config.observable)


def test_bell_values():
    plus, minus = bell_state("+"), bell_state("-")
    assert observe(plus, SetConfiguration.A_LOWER) == pytest.approx(0.5)
    assert observe(plus, SetConfiguration.B_MIDPOINT) == pytest.approx(2.0)
    assert observe(minus, "x") == pytest.approx(0.5)
    assert observe(minus, "z") == pytest.approx(0.0, abs=1e-15)


def test_vacuum_values():
    rho = pure_state([1, 0, 0, 0])
    assert [observe(rho, k) for k in "xydaz"] == [1.0, 1.0, 0.0, 1.0, 0.0]
    assert observe(rho, SetConfiguration.C_VACUUM) == 1.0
    assert observe(pure_state([0, 0, 0, 1]), SetConfiguration.C_VACUUM) == 0.0


def test_observable_operator_hermitian():
    for name in OBSERVABLES:
        m = observable_operator(name)
        assert np.array_equal(m, m.T)


def test_records_per_setup():
    plus = bell_state("+")
    assert record(plus, "z_only").values == pytest.approx({"z": 2.0})
    full = record(plus, "full")
    assert full.values == pytest.approx({"x": 0.5, "y": 0.5, "z": 2.0, "d": 0.0}, abs=1e-15)
    assert set(record(plus, "xz").values) == {"x", "z"}
    with pytest.raises(ValueError):
        record(plus, "nope")


def test_random_records_in_range():
    for seed in range(200):
        rec = record(random_state(seed), "full")
        for k, v in rec.values.items():
            hi = 2.0 if k == "z" else 1.0
            assert 0.0 <= v <= hi


def test_record_validation():
    with pytest.raises(InfeasibleRecordError):
        MeasurementRecord({"z": 2.5}, "z_only")
    with pytest.raises(ValueError):
        MeasurementRecord({"x": 0.5}, "xz")
    with pytest.raises(ValueError):
        MeasurementRecord({"w": 0.5}, "custom")
    assert MeasurementRecord({"a": 0.2, "x": 0.4}, "custom")["a"] == 0.2


def test_csv_round_trip():
    rec = record(random_state(4), "full")
    line = rec.to_csv_line()
    assert line.startswith("full,") and line.endswith(",")
    assert MeasurementRecord.from_csv_line(line) == rec
    assert MeasurementRecord.from_csv_line("z_only,,,2,,").values == {"z": 2.0}
    assert parse_record_line("xz,0.3,,1.9,,") == ("xz", {"x": 0.3, "z": 1.9})
    with pytest.raises(ValueError):
        parse_record_line("xz,0.3,1.9")


def test_reconstruct_examples():
    assert reconstruct_diagonals(0.5, 0.5, 0.0) == (0.0, 0.5, 0.5, 0.0)
    assert reconstruct_diagonals(1.0, 1.0, 0.0) == (1.0, 0.0, 0.0, 0.0)
    assert reconstruct_reh(0.5, 0.5, 2.0, 0.0) == 0.5
    assert reconstruct_reh(0.5, 0.5, 0.0, 0.0) == -0.5


def test_reconstruct_round_trip():
    for seed in range(100):
        rho = random_state(seed)
        x, y, z, d = (observe(rho, k) for k in "xyzd")
        assert np.allclose(reconstruct_diagonals(x, y, d), rho.diagonals, atol=1e-12, rtol=0)
        assert reconstruct_reh(x, y, z, d) == pytest.approx(rho.h.real, abs=1e-12)


def test_reconstruct_infeasible():
    with pytest.raises(InfeasibleRecordError):
        reconstruct_diagonals(0.1, 0.1, 0.0)  # a = -0.8
    with pytest.raises(InfeasibleRecordError):
        reconstruct_diagonals(0.5, 0.5, 0.9)  # b = -0.4
    with pytest.raises(InfeasibleRecordError):
        reconstruct_reh(1.0, 0.5, 2.0, 0.0)  # c = 0 but Re h = 0.75


def test_high_z_implies_npt():
    for seed in range(500):
        rho = random_state(seed)
        if is_ppt(rho):
            assert observe(rho, "z") <= 1 + 1e-9


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=8, max_size=8))
def test_z_bounds_on_pure_states(parts):
    psi = np.array(parts[:4]) + 1j * np.array(parts[4:])
    if np.linalg.norm(psi) < 1e-3:
        return
    z = observe(pure_state(psi), "z")
    assert -1e-12 <= z <= 2 + 1e-12
