import math

import numpy as np
import pytest
import scipy.linalg

from nvtorsion.dynamics import (
    InstantaneousUnitary,
    LeakageError,
    LindbladModel,
    PulseSchedule,
    PulseSegment,
    StepFailureError,
    SystemParams,
    build_interaction_hamiltonian,
    build_lab_hamiltonian,
    collective_coupling,
    default_truncation,
    evolve_lindblad,
    evolve_unitary,
    propagator,
    single_qubit_drive_hamiltonian,
)
from nvtorsion.linalg import (
    DensityMatrix,
    NumericError,
    Operator,
    PureState,
    basis_state,
    embed,
    fock_state,
    mode_operators,
    pauli,
    thermal_state,
    trace_distance,
)

W = 2 * math.pi * 1e6


def params(g1=0.25 * W, g2=0.25 * W, N=12, w1=0.0, w2=0.0):
    return SystemParams(w1, w2, g1, g2, W, N)


def plus_state():
    return PureState(np.array([1.0, 1.0]) / math.sqrt(2)).to_density()


def seg(H, t, label="free"):
    return PulseSegment(t, H, label, {"kind": "matrix", "real": H.data.real.tolist(),
                                      "imag": H.data.imag.tolist(),
                                      "space": list(H.space.factor_dims)})


# -- Hamiltonians


def test_lab_hamiltonian_decoupled_spectrum():
    p = SystemParams(3.0 * W, 1.7 * W, 0.0, 0.0, W, 5)
    H = build_lab_hamiltonian(p)
    assert np.allclose(H.data, np.diag(np.diag(H.data)))
    ref = sorted(W * k + s1 * 1.5 * W + s2 * 0.85 * W
                 for s1 in (1, -1) for s2 in (1, -1) for k in range(5))
    assert np.allclose(sorted(np.diag(H.data).real), ref)


def test_lab_hamiltonian_matrix_element():
    p = SystemParams(3.0 * W, 1.7 * W, 0.11 * W, -0.07 * W, W, 6)
    H = build_lab_hamiltonian(p).data
    # |00, n=0> is index 0, |00, n=1> is index 1 on the [2, 2, N] space
    assert math.isclose(H[0, 1].real, p.g1 + p.g2, rel_tol=1e-14)
    assert build_lab_hamiltonian(p).is_hermitian()


def test_interaction_equals_lab_at_zero_splitting():
    p = params(0.2 * W, -0.3 * W, 8, 0.0, 0.0)
    assert build_interaction_hamiltonian(params(0.2 * W, -0.3 * W, 8, 5 * W, 4 * W)).allclose(
        build_lab_hamiltonian(p).data)


def test_completing_the_square_spectrum():
    p = params(0.25 * W, 0.2 * W, 20)
    S = collective_coupling(p)
    Hp = build_interaction_hamiltonian(p) + (S @ S) / W
    # truncation only lowers the top level, so allow -1e-6 omega
    assert np.linalg.eigvalsh(Hp.data)[0] >= -1e-6 * W


def test_s_tilde_squared_identity():
    p = params(0.3 * W, -0.1 * W, 4)
    S = collective_coupling(p)
    Z1 = embed(pauli("z"), 0, p.space)
    Z2 = embed(pauli("z"), 1, p.space)
    ref = (p.g1**2 + p.g2**2) * np.eye(16) + 2 * p.g1 * p.g2 * (Z1 @ Z2).data
    assert np.allclose((S @ S).data, ref)


# -- closed evolution


def test_evolve_unitary_zero_time():
    p = params()
    rho = thermal_state(0.3, p.N, allow_truncation=True)
    state = DensityMatrix(np.kron(np.eye(4) / 4, rho.data), p.space)
    out = evolve_unitary(build_lab_hamiltonian(p), 0.0, state)
    assert np.allclose(out.data, state.data, atol=1e-15)


def test_evolve_unitary_oscillator_period():
    _, _, n = mode_operators(15)
    U = propagator(W * n, 2 * math.pi / W)
    assert U.allclose(np.eye(15), atol=1e-10)


def test_evolve_unitary_preserves_norm():
    p = params(N=10)
    psi = PureState(np.ones(p.space.total_dim) / math.sqrt(p.space.total_dim), p.space)
    out = evolve_unitary(build_lab_hamiltonian(p), 3.3e-6, psi)
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10


def test_evolve_unitary_rejects_non_hermitian():
    with pytest.raises(NumericError):
        evolve_unitary(Operator([[0, 1], [0, 0]]), 1.0, plus_state())


def _one_loop_error(N, levels, m=1):
    p = params(0.25 * W, 0.25 * W, N)
    tm = 2 * math.pi * m / W
    U = propagator(build_interaction_hamiltonian(p), tm).data
    S = collective_coupling(p).data
    V = scipy.linalg.expm(2j * math.pi * m * (S @ S) / W**2)
    keep = np.array([i for i in range(4 * N) if i % N < levels])
    A = U[np.ix_(keep, keep)]
    B = V[np.ix_(keep, keep)]
    phase = np.vdot(B.ravel(), A.ravel())
    phase /= abs(phase)
    return np.max(abs(A - phase * B))


@pytest.mark.parametrize("N,levels", [(20, 8), (40, 20)])
def test_one_loop_reduces_to_spin_phase(N, levels):
    assert _one_loop_error(N, levels) < 1e-5


@pytest.mark.xfail(strict=True, reason=(
    "at g/omega = 1/4 the displaced upper Fock states reach the N = 20 cutoff; "
    "the identity holds to 1e-5 only on the bottom 8 levels, not N - 4 = 16"))
def test_one_loop_reduces_to_spin_phase_bottom_n_minus_4():
    assert _one_loop_error(20, 16) < 1e-5


def test_drive_hamiltonian_examples():
    Om = 1e6
    t = 1 / (2 * Om)
    U = propagator(single_qubit_drive_hamiltonian(0.0, Om, "x"), t)
    ref = scipy.linalg.expm(-1j * math.pi * 0.5 * pauli("x").data)
    assert U.allclose(ref, atol=1e-12)
    # pi rotation: full population transfer
    assert abs(abs(U.data[1, 0]) ** 2 - 1) < 1e-12
    d = 3e5
    Hz = single_qubit_drive_hamiltonian(d, 0.0)
    assert np.allclose(Hz.data, np.diag([math.pi * d, -math.pi * d]))


def test_generalized_rabi_frequency():
    d, Om = 4e5, 1e6
    H = single_qubit_drive_hamiltonian(d, Om, "y")
    ev = np.linalg.eigvalsh(H.data)
    gen = math.hypot(d, Om)
    assert np.allclose(ev, [-math.pi * gen, math.pi * gen])
    # minimum of the |0> population after half a generalized period
    U = propagator(H, 1 / (2 * gen)).data
    assert math.isclose(abs(U[1, 0]) ** 2, Om**2 / gen**2, rel_tol=1e-10)


def test_drive_axis_validation():
    with pytest.raises(ValueError):
        single_qubit_drive_hamiltonian(0, 1, "z")


# -- open evolution


def test_pure_dephasing_decay():
    Gamma = 2e4
    t = 60e-6
    H = Operator(np.zeros((2, 2)))
    res = evolve_lindblad(PulseSchedule((seg(H, t),)), LindbladModel(Gamma=Gamma), plus_state())
    ref = 0.5 * math.exp(-Gamma * t / 2)
    assert abs(res.final_rho.data[0, 1] - ref) < 1e-6 * ref


def test_damped_oscillator_number():
    kappa, nb, N = 1e4, 1.0, 30
    H = Operator(np.zeros((N, N)))
    rho0 = fock_state(3, N).to_density()
    t = 3 / kappa
    res = evolve_lindblad(PulseSchedule((seg(H, t),)), LindbladModel(kappa, nb), rho0)
    n_t = res.records[-1]["n_mean"]
    ref = nb + (3 - nb) * math.exp(-kappa * t)
    assert abs(n_t - ref) / ref < 1e-4


def test_thermalization_to_target():
    kappa, nb, N = 2e4, 0.8, 40
    _, _, n = mode_operators(N)
    H = W * 0.01 * n
    rho0 = fock_state(2, N).to_density()
    res = evolve_lindblad(PulseSchedule((seg(H, 20 / kappa),)), LindbladModel(kappa, nb), rho0)
    assert trace_distance(res.final_rho, thermal_state(nb, N)) < 1e-3


def test_closed_limit_matches_unitary():
    p = params(0.25 * W, 0.25 * W, 10, 2.0 * W, 1.5 * W)
    H = build_lab_hamiltonian(p)
    psi = np.zeros(p.space.total_dim, complex)
    psi[0] = psi[p.N] = psi[2 * p.N + 1] = 1
    rho0 = PureState(psi, p.space, normalize=True).to_density()
    t = 0.7 * 2 * math.pi / W
    res = evolve_lindblad(PulseSchedule((seg(H, t),)), LindbladModel(), rho0, check_leakage=False)
    ref = evolve_unitary(H, t, rho0)
    assert trace_distance(res.final_rho, ref) < 1e-8


def test_dephasing_keeps_populations():
    p = params(0.0, 0.0, 3)
    rng = np.random.default_rng(2)
    X = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    rho = X @ X.conj().T
    rho0 = DensityMatrix(rho / np.trace(rho), p.space)
    H = Operator(np.zeros((12, 12)), p.space)
    res = evolve_lindblad(PulseSchedule((seg(H, 5e-5),)), LindbladModel(Gamma=3e4), rho0,
                          check_leakage=False)
    assert np.max(abs(np.diag(res.final_rho.data) - np.diag(rho0.data))) < 1e-10


def test_hermiticity_and_positivity_preserved():
    p = params(0.25 * W, 0.25 * W, 12)
    rho0 = DensityMatrix(np.kron(plus_state().data, np.kron(plus_state().data,
                                                           thermal_state(0.2, 12).data)), p.space)
    res = evolve_lindblad(PulseSchedule((seg(build_interaction_hamiltonian(p), 2e-6),)),
                          LindbladModel(0.01 * W, 0.2, 0.01 * W), rho0, sample_every=2e-7)
    r = res.final_rho.data
    assert np.max(abs(r - r.conj().T)) < 1e-9
    assert res.diagnostics["min_eigenvalue"] > -1e-7
    assert res.valid
    assert len(res.times) == len(res.records) >= 10


def test_segment_splitting_invariance():
    p = params(0.25 * W, 0.25 * W, 10)
    H = build_interaction_hamiltonian(p)
    rho0 = DensityMatrix(np.kron(np.eye(4) / 4, thermal_state(0.1, 10).data), p.space)
    model = LindbladModel(0.001 * W, 0.1, 0.002 * W)
    T = 1.3e-6
    whole = evolve_lindblad(PulseSchedule((seg(H, T),)), model, rho0, dt=T / 400)
    halves = evolve_lindblad(PulseSchedule((seg(H, T / 2), seg(H, T / 2))), model, rho0,
                             dt=T / 400)
    assert trace_distance(whole.final_rho, halves.final_rho) < 1e-10


def test_frame_invariance_of_dissipators():
    w1, w2 = 1.5 * W, 1.2 * W
    p_lab = params(0.2 * W, 0.15 * W, 10, w1, w2)
    p_int = params(0.2 * W, 0.15 * W, 10)
    T = 1.0e-6
    rho0 = DensityMatrix(np.kron(np.kron(plus_state().data, plus_state().data),
                                 thermal_state(0.1, 10).data), p_lab.space)
    model = LindbladModel(0.002 * W, 0.1, 0.003 * W)
    lab = evolve_lindblad(PulseSchedule((seg(build_lab_hamiltonian(p_lab), T),)), model, rho0,
                          frame="lab")
    inter = evolve_lindblad(PulseSchedule((seg(build_interaction_hamiltonian(p_int), T),)),
                            model, rho0, frame="interaction")
    A = 0.5 * w1 * embed(pauli("z"), 0, p_lab.space) + 0.5 * w2 * embed(pauli("z"), 1, p_lab.space)
    R = scipy.linalg.expm(1j * A.data * T)
    back = R @ lab.final_rho.data @ R.conj().T
    assert trace_distance(back, inter.final_rho.data) < 1e-7
    assert lab.metadata["frame"] == "lab" and inter.metadata["frame"] == "interaction"


def test_instantaneous_unitary_applied():
    X = pauli("x")
    sched = PulseSchedule((InstantaneousUnitary(X, "flip", {"kind": "matrix",
                                                               "real": X.data.real.tolist(),
                                                               "imag": X.data.imag.tolist(),
                                                               "space": [2]}),))
    res = evolve_lindblad(sched, LindbladModel(), basis_state([0]).to_density())
    assert np.allclose(res.final_rho.data, np.diag([0, 1]))


def test_schedule_json_round_trip():
    p = params(0.2 * W, 0.2 * W, 6)
    H = build_interaction_hamiltonian(p)
    s = PulseSchedule((PulseSegment(1e-6, H, "free", {"kind": "interaction",
                                                       "params": p.as_record()}),
                       seg(H, 2e-7, "again")), {"note": "x"})
    back = PulseSchedule.from_json(s.to_json())
    assert back.metadata == {"note": "x"}
    assert math.isclose(back.total_duration, s.total_duration)
    assert np.allclose(back.propagator(), s.propagator(), atol=1e-13)


def test_schedule_rejects_bad_items():
    with pytest.raises(NumericError):
        PulseSegment(1.0, Operator([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        PulseSegment(-1.0, pauli("z"))
    with pytest.raises(NumericError):
        InstantaneousUnitary(Operator([[1, 0], [0, 2]]))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_step_failure_is_raised():
    p = params(0.25 * W, 0.25 * W, 12)
    rho0 = DensityMatrix(np.kron(np.eye(4) / 4, thermal_state(0.2, 12).data), p.space)
    # the coherent part is exact, so only a stiff dissipator can blow up
    with pytest.raises(StepFailureError):
        evolve_lindblad(PulseSchedule((seg(build_interaction_hamiltonian(p), 2e-5),)),
                        LindbladModel(1e7, 1.0), rho0, steps_per_period=1, stability=20.0,
                        check_leakage=False)


def test_leakage_error():
    N = 8
    rho0 = fock_state(1, N).to_density()
    H = Operator(np.zeros((N, N)))
    with pytest.raises(LeakageError):
        evolve_lindblad(PulseSchedule((seg(H, 5e-4),)), LindbladModel(1e4, 3.0), rho0)


def test_default_truncation_rule():
    assert default_truncation(0.0, 0.25) == math.ceil(4 + 5 + 6)
    assert default_truncation(2.0, 0.25) >= math.ceil(4 * 3 + 5 + 6)
    assert (2 / 3) ** default_truncation(2.0, 0.25) < 1e-6
