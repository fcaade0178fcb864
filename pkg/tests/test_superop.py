import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlight.errors import ContractError
from qlight.field import FieldMode, prepare_state
from qlight.matter import basis_state, build_system, ground_state, ladder, thermal_state, two_level
from qlight.response import chi1
from qlight.superop import (SignSequence, fdt_check, linear_spectra, nonlinear_fdt_table,
                            resonance_ratio, super_correlator, super_spectrum, two_atom_demo)


def test_minus_minus_vanishes():
    s = ladder(3, (1.0, 0.9))
    seq = SignSequence(("-", "-"), observable=False)
    assert abs(super_correlator(s, thermal_state(s, 0.7), seq, [1.2, 0.3])) < 1e-14


def test_observable_contract():
    with pytest.raises(ContractError):
        SignSequence(("-", "+"))
    with pytest.raises(ContractError):
        super_correlator(two_level(), ground_state(two_level()), "-+", [1, 0])
    with pytest.raises(ValueError):
        SignSequence(("*",))


def test_plus_minus_two_level():
    mu, w0 = 0.7, 1.3
    s = two_level(w0, mu)
    for t in (0.0, 0.4, 2.1):
        # <[V(t), V]> on the ground state
        assert np.isclose(super_correlator(s, ground_state(s), "+-", [t, 0.0]), -2j * mu ** 2 * np.sin(w0 * t),
                          atol=1e-15)


def test_all_plus_equal_times():
    mu = 0.9
    s = two_level(1.0, mu)
    v = s.dipole.data
    assert np.isclose(super_correlator(s, ground_state(s), "++++", [0.5] * 4),
                      (np.linalg.matrix_power(v, 4))[0, 0], rtol=1e-14)
    assert np.isclose(super_correlator(s, ground_state(s), "++++", [0.5] * 4), mu ** 4)


def test_times_must_be_ordered():
    with pytest.raises(ValueError):
        super_correlator(two_level(), ground_state(two_level()), "+-", [0.0, 1.0])


def test_spectrum_matches_time_integral():
    s = two_level(1.0, 1.0, epsilon=0.3)
    rho = thermal_state(s, 1.0)
    w = 0.8
    t = np.linspace(0, 60, 60001)
    vals = np.array([super_correlator(s, rho, "+-", [ti, 0.0]) for ti in t])
    integral = np.trapezoid(vals * np.exp(1j * w * t - s.epsilon * t), t)
    assert np.isclose(super_spectrum(s, rho, "+-", [w]), integral, rtol=1e-6)


def test_fdt_two_level():
    s = two_level(1.0)
    rep = fdt_check(s, 2.0, np.linspace(-2, 2, 9))
    (res,) = rep.resonances
    assert abs(res.ratio - 0.5 / np.tanh(1.0)) < 1e-6
    assert np.isclose(res.fdt, 0.656518, atol=1e-6)


def test_fdt_limits():
    s = two_level(1.0)
    assert abs(fdt_check(s, 60.0, [1.0]).resonances[0].ratio - 0.5) < 1e-12
    hot = fdt_check(s, 0.05, [1.0]).resonances[0].ratio
    assert abs(hot * 0.05 - 1) < 0.02


def test_chi1_consistency():
    s = ladder(3, (1.0, 0.9), (1.0, 0.4))
    rho = thermal_state(s, 1.5)
    omegas = np.linspace(-3, 3, 61)
    c_pm, _ = linear_spectra(s, rho, omegas)
    assert np.allclose(c_pm, [-2 * chi1(s, rho, w).imag for w in omegas], rtol=1e-10, atol=1e-14)


def test_fdt_negative_control():
    s = two_level(1.0)
    rep = fdt_check(s, 1.0, [1.0], basis_state(s, 1))
    res = rep.resonances[0]
    assert res.ratio == pytest.approx(-0.5)
    assert abs(res.ratio - res.fdt) > 1e-3


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["two_level", "ladder", "harmonic"]), st.floats(0.05, 5.0),
       st.floats(0.5, 1.5), st.floats(0.5, 1.5))
def test_fdt_property(preset, beta_t, a, b):
    params = {"two_level": dict(omega0=a, mu=b), "ladder": dict(n=3, spacings=[a, b]),
              "harmonic": dict(n=5, omega0=a, mu=b)}[preset]
    s = build_system(preset, **params)
    rep = fdt_check(s, beta_t, [])
    assert rep.resonances
    for r in rep.resonances:
        assert abs(r.ratio - r.fdt) <= 1e-9 * max(1.0, r.fdt)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_leftmost_minus_vanishes(n, seed):
    rng = np.random.default_rng(seed)
    s = ladder(4, rng.uniform(0.5, 1.5, 3), rng.uniform(0.2, 1.5, 3))
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    signs = ("-",) + tuple(rng.choice(["+", "-"], n - 1))
    times = np.sort(rng.uniform(0, 10, n))[::-1]
    val = super_correlator(s, rho, SignSequence(signs, observable=False), times)
    assert abs(val) < 1e-12 * np.linalg.norm(s.dipole.data) ** n


def test_nonlinear_ratio_differs_across_resonances():
    s = ladder(3, (1.0, 0.9))
    rows = nonlinear_fdt_table(s, 1.0)
    assert len(rows) == 2
    (w1, lin1, f1, r1), (w2, lin2, f2, r2) = rows
    assert np.isclose(lin1, f1) and np.isclose(lin2, f2)
    assert abs(r1 - r2) / max(abs(r1), abs(r2)) > 0.1
    assert resonance_ratio(s, thermal_state(s, 1.0), w1) == r1


@pytest.fixture(scope="module")
def demo_field():
    return prepare_state([FieldMode(1.0, 0.02, 8)], "coherent", beta=1.0)


def test_two_atom_classical_independence(demo_field):
    rep = two_atom_demo(two_level(), two_level(1.0, 0.7), demo_field, True, T=10.0, steps=1000)
    assert rep.relative_spread < 1e-10
    assert rep.populations[0] > 1e-4
    assert rep.atom2_minus_strings < 1e-14
    assert abs(rep.atom2_plus_minus) > 0.1


def test_two_atom_quantum_dependence(demo_field):
    rep = two_atom_demo(two_level(), two_level(1.0, 0.7), demo_field, False, T=20.0)
    assert rep.relative_spread > 1e-6


def test_two_atom_zero_coupling_frozen(demo_field):
    off = demo_field.scaled_couplings(0.0)
    for classical in (True, False):
        rep = two_atom_demo(two_level(), two_level(1.0, 0.7), off, classical, T=5.0, steps=50)
        assert np.all(rep.populations == 0)


def test_two_atom_leading_order_is_fourth(demo_field):
    rep = two_atom_demo(two_level(), two_level(1.0, 0.7), demo_field, False, T=20.0,
                        atom2_frequencies=[1.0], fit_grid=np.linspace(0.3, 1.0, 8))
    fit = rep.leading_order
    assert abs(fit[2]) < 0.01 * abs(fit[4])
