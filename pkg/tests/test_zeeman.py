import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm
from sympy.physics.quantum.cg import CG

from oam_storage_sim import zeeman
from oam_storage_sim.errors import EmptyGrid, InvalidF, InvalidInput
from oam_storage_sim.zeeman import GroundDM, ReadProjection, ZeemanParams

F = 3
PARAMS = ZeemanParams(B=0.6, gF=0.25, gamma_B=1 / 12)


def idx(m):
    return m + F


def expm_rotate(rho, params, t):
    """Independent propagator via scipy's Pade matrix exponential."""
    omega, _ = zeeman.larmor(params)
    fx, fy, fz = zeeman.angular_momentum_ops(3)
    n = params.axis
    u = expm(-1j * omega * t * (n[0] * fx + n[1] * fy + n[2] * fz))
    return u @ rho @ u.conj().T


def single_coherence(eps, m=3, n=1):
    rho = np.zeros((7, 7), complex)
    rho[idx(m), idx(n)] = eps
    rho[idx(n), idx(m)] = np.conj(eps)
    return rho


def test_spin_half_is_pauli_over_two():
    fx, fy, fz = zeeman.angular_momentum_ops(Fraction(1, 2))
    # ascending basis (-1/2, +1/2)
    assert np.allclose(fx, [[0, 0.5], [0.5, 0]])
    assert np.allclose(fy, [[0, 0.5j], [-0.5j, 0]])
    assert np.allclose(fz, [[-0.5, 0], [0, 0.5]])
    assert np.allclose(zeeman.angular_momentum_ops(0.5)[0], fx)


def test_spin_three_fz_diagonal():
    _, _, fz = zeeman.angular_momentum_ops(3)
    assert np.array_equal(np.diag(fz).real, np.arange(-3, 4))


@pytest.mark.parametrize("f", [Fraction(1, 2), 1, Fraction(3, 2), 3, 4])
def test_commutators(f):
    fx, fy, fz = zeeman.angular_momentum_ops(f)
    comm = lambda a, b: a @ b - b @ a  # noqa: E731
    assert np.linalg.norm(comm(fx, fy) - 1j * fz) < 1e-12
    assert np.linalg.norm(comm(fy, fz) - 1j * fx) < 1e-12
    assert np.linalg.norm(comm(fz, fx) - 1j * fy) < 1e-12
    ff = float(f)
    casimir = fx @ fx + fy @ fy + fz @ fz
    assert np.allclose(casimir, ff * (ff + 1) * np.eye(len(fz)), atol=1e-12)


@pytest.mark.parametrize("bad", [0, -1, Fraction(1, 3), 0.25])
def test_invalid_f(bad):
    with pytest.raises(InvalidF):
        zeeman.angular_momentum_ops(bad)


def test_larmor_zero_field():
    omega, period = zeeman.larmor(ZeemanParams(B=0.0))
    assert omega == 0 and period == math.inf


def test_larmor_cesium_value():
    _, period = zeeman.larmor(PARAMS)
    assert period == pytest.approx(1 / (0.25 * 1.399624 * 0.6), rel=1e-14)
    assert period == pytest.approx(4.76, abs=0.005)


def test_doubling_field_halves_period():
    _, t1 = zeeman.larmor(ZeemanParams(B=0.3))
    _, t2 = zeeman.larmor(ZeemanParams(B=0.6))
    assert t2 == pytest.approx(t1 / 2, rel=1e-15)


def test_precess_identity_at_zero():
    rho = GroundDM.edge_pumped()
    assert np.array_equal(zeeman.precess(rho, PARAMS, 0.0).rho, rho.rho)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_full_period_is_identity(n):
    rho = GroundDM.edge_pumped()
    _, period = zeeman.larmor(PARAMS)
    out = zeeman.precess(rho, PARAMS, n * period).rho
    assert np.max(np.abs(out - rho.rho)) < 1e-10
    assert np.max(np.abs(expm_rotate(rho.rho, PARAMS, n * period) - rho.rho)) < 1e-10


def test_half_period_reverses_populations():
    rho = GroundDM.edge_pumped()
    _, period = zeeman.larmor(PARAMS)
    out = zeeman.precess(rho, PARAMS, period / 2)
    oracle = expm_rotate(rho.rho, PARAMS, period / 2)
    assert np.allclose(out.rho, oracle, atol=1e-12)
    pops = np.diag(out.rho).real
    assert np.allclose(pops, np.diag(rho.rho).real[::-1], atol=1e-12)


@pytest.mark.parametrize("t", [0.3, 1.7, 5.55])
@pytest.mark.parametrize("axis", [(1, 0, 0), (0, 1, 0), (0.6, 0, 0.8)])
def test_precess_matches_expm(t, axis):
    params = ZeemanParams(axis=axis)
    rho = GroundDM.edge_pumped()
    assert np.allclose(zeeman.precess(rho, params, t).rho, expm_rotate(rho.rho, params, t), atol=1e-12)


def test_negative_time_rejected():
    with pytest.raises(InvalidInput):
        zeeman.precess(GroundDM.edge_pumped(), PARAMS, -1.0)


matrices = st.lists(st.floats(-1, 1), min_size=98, max_size=98).map(
    lambda v: np.array(v[:49]).reshape(7, 7) + 1j * np.array(v[49:]).reshape(7, 7)
)


@given(matrices, st.floats(0, 30), st.floats(0.01, 2.0))
def test_precess_is_unitary(m, t, b):
    rho0 = m @ m.conj().T
    if np.trace(rho0).real < 1e-6:
        rho0 = rho0 + np.eye(7)
    rho0 /= np.trace(rho0).real
    rho = GroundDM(rho0)
    out = zeeman.precess(rho, ZeemanParams(B=b), t).rho
    assert abs(np.trace(out) - np.trace(rho.rho)) < 1e-12
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    assert np.allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho.rho), atol=1e-10)


def test_diagonal_state_reads_nothing():
    rho = GroundDM(np.diag([0.1, 0.1, 0.1, 0.1, 0.1, 0.2, 0.3]))
    assert zeeman.retrieval_amplitude(rho, ReadProjection(), 0.0, 0.0) == 0


def test_single_element_reads_w3():
    eps = 0.15 - 0.05j
    got = zeeman.retrieval_amplitude(single_coherence(eps), ReadProjection(), 0.0, 0.0)
    assert got == pytest.approx(zeeman.CG_READ_WEIGHTS[4] * eps, rel=1e-15)


def test_half_period_partial_revival():
    eps = 0.2j
    _, period = zeeman.larmor(PARAMS)
    rotated = expm_rotate(single_coherence(eps), PARAMS, period / 2)
    a = zeeman.retrieval_amplitude(rotated, ReadProjection(), 0.0, 0.0)
    w = zeeman.CG_READ_WEIGHTS
    assert abs(a) == pytest.approx(abs(w[0] * eps), rel=1e-12)
    a0 = zeeman.retrieval_amplitude(single_coherence(eps), ReadProjection(), 0.0, 0.0)
    assert abs(a / a0) == pytest.approx(abs(w[0] / w[4]), rel=1e-12)


complexes = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(matrices, matrices, complexes, complexes, st.floats(0, 5), st.floats(0, 10))
def test_retrieval_is_linear(r1, r2, a, b, gamma, t):
    proj = ReadProjection()
    lhs = zeeman.retrieval_amplitude(a * r1 + b * r2, proj, gamma, t)
    rhs = a * zeeman.retrieval_amplitude(r1, proj, gamma, t) + b * zeeman.retrieval_amplitude(r2, proj, gamma, t)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


def test_cg_weights_match_symbolic_oracle():
    for w, m in zip(zeeman.CG_READ_WEIGHTS, zeeman.READ_M):
        c1 = CG(3, m, 1, -1, 2, m - 1).doit()
        c2 = CG(3, m - 2, 1, 1, 2, m - 1).doit()
        assert w == pytest.approx(float(sympy.nsimplify(c1 * c2)), rel=1e-14)


def test_zero_field_is_pure_decay():
    params = ZeemanParams(B=0.0, gamma_B=1 / 3)
    t = np.linspace(0, 10, 101)
    recs = zeeman.revival_scan(GroundDM.edge_pumped(), params, ReadProjection(), t)
    amp = np.abs([r.amplitude for r in recs])
    assert np.allclose(amp, amp[0] * np.exp(-t / 3), rtol=1e-12)
    assert np.all(np.diff(amp) < 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_full_revival_identity(n):
    _, period = zeeman.larmor(PARAMS)
    recs = zeeman.revival_scan(GroundDM.edge_pumped(), PARAMS, ReadProjection(), [0.0, n * period])
    expected = abs(recs[0].amplitude) * math.exp(-PARAMS.gamma_B * n * period)
    assert abs(recs[1].amplitude) == pytest.approx(expected, rel=1e-9)


def test_collapse_between_revivals():
    _, period = zeeman.larmor(PARAMS)
    rho = GroundDM.edge_pumped()
    for n in range(3):
        t = np.linspace(n * period, (n + 1) * period, 401)
        amp = np.abs([r.amplitude for r in zeeman.revival_scan(rho, PARAMS, ReadProjection(), t)])
        assert amp.min() / amp.max() < 0.1


def test_scan_matches_expm_oracle():
    rho = GroundDM.edge_pumped()
    grating = zeeman.grating_part(rho)
    times = [0.0, 0.9, 2.2, 7.3, 13.1]
    recs = zeeman.revival_scan(rho, PARAMS, ReadProjection(), times)
    for r, t in zip(recs, times):
        oracle = zeeman.retrieval_amplitude(expm_rotate(grating, PARAMS, t), ReadProjection(), PARAMS.gamma_B, t)
        assert r.amplitude == pytest.approx(oracle, abs=1e-13)
        assert r.intensity == pytest.approx(abs(oracle) ** 2, abs=1e-13)


def test_scan_is_deterministic():
    t = np.linspace(0, 20, 51)
    a = zeeman.revival_scan(GroundDM.edge_pumped(), PARAMS, ReadProjection(), t)
    b = zeeman.revival_scan(GroundDM.edge_pumped(), PARAMS, ReadProjection(), t)
    assert a == b


def test_scan_input_checks():
    with pytest.raises(EmptyGrid):
        zeeman.revival_scan(GroundDM.edge_pumped(), PARAMS, ReadProjection(), [])
    with pytest.raises(InvalidInput):
        zeeman.revival_scan(GroundDM.edge_pumped(), PARAMS, ReadProjection(), [1.0, 0.5])


def test_edge_pumped_default_is_valid():
    rho = GroundDM.edge_pumped()
    assert rho.element(3, 3) == 0.95
    assert rho.element(1, 1) == 0.05
    assert rho.element(3, 1) == 0.2j
    assert rho.element(1, 3) == -0.2j
