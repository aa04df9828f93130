import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinchannel import (
    LindbladModel,
    Propagator,
    SubspaceState,
    build_generator,
    christandl_chain,
    concurrence,
    critical_gamma,
    encode_input,
    evolve,
    find_peak,
    fwhm,
    hamiltonian,
    reduced_1q,
    reduced_2q,
    transfer_fidelity,
)
from spinchannel.engine import population_index, vacuum_site_index
from spinchannel.errors import BracketError, NoPeakError, ThresholdError, ValidationError
from spinchannel.metrics import (
    average_fidelity,
    excitation_fidelity,
    fidelity_curve,
    fidelity_readout,
    pair_concurrence,
    transfer_phase,
)


def gen(N, kind, gamma, lam=1.0):
    return build_generator(hamiltonian(christandl_chain(N, lam)), LindbladModel.build(kind, gamma, N))


BELL = np.array([[0, 0, 0, 0], [0, .5, .5, 0], [0, .5, .5, 0], [0, 0, 0, 0]], dtype=complex)


# --- reduced states --------------------------------------------------------

def test_reduced_vacuum():
    vac = np.zeros((4, 4))
    vac[-1, -1] = 1
    s = SubspaceState(vac)
    assert np.allclose(reduced_2q(s, 1, 2), np.diag([1, 0, 0, 0]))
    assert np.allclose(reduced_1q(s, 3), np.diag([1, 0]))


def test_reduced_bell_pair():
    s = SubspaceState.from_amplitudes({1: 1, 3: 1}, (1, 2, 3))
    assert np.allclose(reduced_2q(s, 1, 3), BELL)
    with pytest.raises(ValueError):
        reduced_2q(s, 1, 1)
    with pytest.raises(IndexError):
        reduced_2q(s, 1, 5)


@settings(max_examples=20, deadline=None)
@given(kind=st.sampled_from(["dissipative", "dephasing"]), t=st.floats(0, 6),
       theta=st.floats(0, math.pi), phi=st.floats(0, 2 * math.pi))
def test_reduced_states_are_physical(kind, t, theta, phi):
    s = evolve(Propagator(gen(4, kind, 0.3), t), encode_input(4, 1, theta, phi))
    for r in (reduced_2q(s, 1, 4), reduced_2q(s, 2, 3), reduced_1q(s, 4)):
        assert abs(np.trace(r) - 1) < 1e-10
        assert np.linalg.eigvalsh(r).min() > -1e-10


# --- fidelity ----------------------------------------------------------------

def test_transfer_fidelity_at_injection():
    s = encode_input(3, 1, 1.0, 0.4)
    assert transfer_fidelity(s, 1, 1.0, 0.4) == pytest.approx(1.0)
    # empty receiver: overlap with |0>
    assert transfer_fidelity(s, 3, 1.0, 0.4) == pytest.approx(math.cos(0.5) ** 2)


def test_excitation_fidelity_is_population_element():
    p = Propagator(gen(3, "dissipative", 0.1), 1.0)
    d = 4
    assert excitation_fidelity(p, 1, 3) == pytest.approx(
        p.element(population_index(d, 2), population_index(d, 0)).real)
    s = evolve(p, encode_input(3, 1, math.pi, 0.0))
    assert transfer_fidelity(s, 3, math.pi, 0.0) == pytest.approx(excitation_fidelity(p, 1, 3))


def test_dissipative_relation_and_its_failure():
    d = 4
    for kind, holds in (("dissipative", True), ("dephasing", False)):
        p = Propagator(gen(3, kind, 0.3), 1.2)
        lhs = p.element(population_index(d, 2), population_index(d, 0)).real
        rhs = abs(p.element(vacuum_site_index(d, 2), vacuum_site_index(d, 0))) ** 2
        assert (abs(lhs - rhs) < 1e-10) is holds


def test_average_fidelity_equals_sphere_average():
    """Average over a Lebedev-free quadrature: Gauss-Legendre in cos(theta), uniform phi."""
    p = Propagator(gen(4, "dephasing", 0.2), 1.4)
    x, w = np.polynomial.legendre.leggauss(12)
    phis = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    total = 0.0
    for xi, wi in zip(x, w):
        th = math.acos(xi)
        for ph in phis:
            s = evolve(p, encode_input(4, 1, th, ph))
            total += wi * transfer_fidelity(s, 4, th, ph) / 2 / len(phis)
    assert total == pytest.approx(average_fidelity(p, 1, 4), abs=1e-10)


def test_phase_correction_bounds():
    for N in (3, 4, 5):
        p = Propagator(gen(N, "dissipative", 0.2), math.pi / 2)
        raw = average_fidelity(p, 1, N)
        fixed = average_fidelity(p, 1, N, correct_phase=True)
        assert fixed >= raw - 1e-15
        r = fidelity_readout(p, 1, N, correct_phase=True)
        assert r.F == pytest.approx(fixed)
        assert r.alpha == pytest.approx(transfer_phase(p, 1, N))


def test_fidelity_readout_correct_phase_recovers_unit_fidelity():
    p = Propagator(gen(3, "none", 0.0), math.pi / 2)
    r = fidelity_readout(p, 1, 3, theta=math.pi / 2, phi=0.3, correct_phase=True)
    assert r.f == pytest.approx(1.0)


# --- concurrence ---------------------------------------------------------------

def test_concurrence_examples():
    assert concurrence(BELL) == pytest.approx(1.0)
    assert concurrence(np.diag([1, 0, 0, 0])) == 0.0
    w = SubspaceState.from_amplitudes({1: 1, 2: 1, 3: 1}, (1, 2, 3))
    assert pair_concurrence(w, 1, 2) == pytest.approx(2 / 3)


def test_concurrence_general_path():
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert concurrence(np.outer(psi, psi)) == pytest.approx(1.0)
    assert concurrence(np.eye(4) / 4) == 0.0


def test_concurrence_validation():
    with pytest.raises(ValidationError):
        concurrence(np.diag([0.5, 0.5, 0.5, -0.5]))
    with pytest.raises(ValidationError):
        concurrence(np.array([[1, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]))
    with pytest.raises(ValidationError):
        concurrence(np.eye(3) / 3)


@settings(max_examples=30, deadline=None)
@given(kind=st.sampled_from(["dissipative", "dephasing"]), t=st.floats(0, 8),
       chi=st.floats(0, 2 * math.pi), which=st.sampled_from([0, 1]))
def test_concurrence_bounds_and_local_phase(kind, t, chi, which):
    s = evolve(Propagator(gen(4, kind, 0.4), t), SubspaceState.from_amplitudes({1: 1, 2: 1j}, (1, 2, 3, 4)))
    r = reduced_2q(s, 1, 4)
    c = concurrence(r)
    assert 0 <= c <= 1
    u = np.diag([1, np.exp(1j * chi)])
    U = np.kron(u, np.eye(2)) if which == 0 else np.kron(np.eye(2), u)
    assert abs(concurrence(U @ r @ U.conj().T) - c) < 1e-10


@settings(max_examples=30)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_x_state_generic_matches_shortcut(pa, frac, ang):
    """States with a small |11> weight exercise the general route; both must agree as it shrinks."""
    pb = (1 - pa) * frac
    c = math.sqrt(pa * pb) * np.exp(1j * ang)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0], rho[1, 1], rho[2, 2] = 1 - pa - pb, pb, pa
    rho[2, 1], rho[1, 2] = c, np.conj(c)
    shortcut = concurrence(rho)
    eps = 1e-6
    mixed = (1 - eps) * rho + eps * np.eye(4) / 4
    assert abs(concurrence(mixed) - shortcut) < 1e-2
    assert shortcut == pytest.approx(2 * abs(c), abs=1e-12)


# --- searches ------------------------------------------------------------------

def test_find_peak_unit_fidelity():
    pk = find_peak(fidelity_curve(gen(4, "none", 0), 1, 4), (0, math.pi))
    assert pk.value == pytest.approx(math.pi / 2, abs=1e-6)
    assert pk.peak == pytest.approx(1.0)


def test_find_peak_errors():
    with pytest.raises(NoPeakError):
        find_peak(lambda t: 1.0, (0, 1))
    with pytest.raises(NoPeakError):
        find_peak(lambda t: t, (0, 1))
    with pytest.raises(ValueError):
        find_peak(lambda t: t, (1, 0))


def test_peak_times_approach_t0():
    tcs = [find_peak(fidelity_curve(gen(N, "dissipative", 0.1), 1, N), (0, math.pi)).value
           for N in (2, 4, 8, 16)]
    gaps = [math.pi / 2 - t for t in tcs]
    assert all(g > 0 for g in gaps)
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_fwhm_sine_squared():
    w = fwhm(lambda t: math.sin(t) ** 2, math.pi / 2)
    assert w.value == pytest.approx(math.pi / 2, abs=1e-8)
    assert w.bracket[0] == pytest.approx(math.pi / 4, abs=1e-8)


def test_fwhm_with_baseline():
    w = fwhm(lambda t: 0.5 + 0.5 * math.sin(t) ** 2, math.pi / 2, baseline=0.5)
    assert w.value == pytest.approx(math.pi / 2, abs=1e-8)


def test_fwhm_unbracketed():
    with pytest.raises(BracketError):
        fwhm(lambda t: 1.0 + 0.01 * math.sin(t), math.pi / 2, span=1.0)
    with pytest.raises(ValueError):
        fwhm(lambda t: -1.0, 0.5)


def test_classical_benchmark():
    net = christandl_chain(3)
    cp = critical_gamma(net, "dissipative", True)
    for gamma, above in ((cp.value * 0.95, True), (cp.value * 1.05, False)):
        curve = fidelity_curve(gen(3, "dissipative", gamma), 1, 3, "F", True)
        assert (find_peak(curve, (0, math.pi)).peak > 2 / 3) is above


def test_critical_gamma_modes():
    net = christandl_chain(5)
    t0 = critical_gamma(net, "dissipative", True, at="t0").value
    peak = critical_gamma(net, "dissipative", True).value
    assert t0 == pytest.approx(1.1222, abs=1e-3)
    assert peak > t0


def test_critical_gamma_errors():
    net = christandl_chain(3)
    with pytest.raises(ThresholdError):
        critical_gamma(net, "dissipative", True, gamma_max=0.5)
    with pytest.raises(ValueError):
        critical_gamma(net, "none")
    with pytest.raises(ValueError):
        critical_gamma(net, "dissipative", at="later")
