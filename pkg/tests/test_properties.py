"""Randomized invariants of the linear-algebra and dynamics layers.

Each property uses a fixed example budget and ``derandomize=True`` so the
suite is reproducible; the budgets add up to 1000 cases.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvtorsion.dynamics import (
    LindbladModel,
    PulseSchedule,
    PulseSegment,
    evolve_lindblad,
    evolve_unitary,
)
from nvtorsion.linalg import (
    DensityMatrix,
    Operator,
    PureState,
    embed,
    expm,
    partial_trace,
    state_fidelity,
    tensor_product,
    thermal_state,
)

BUDGET = {
    "expm_unitary": 150,
    "embed_hermitian": 100,
    "partial_trace": 150,
    "thermal": 100,
    "fidelity": 100,
    "unitary_evolution": 150,
    "lindblad": 150,
    "dephasing": 100,
}
assert sum(BUDGET.values()) == 1000

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def cfg(name):
    return settings(max_examples=BUDGET[name], derandomize=True, deadline=None,
                    database=None)


def random_hermitian(rng, d, scale=1.0):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = 0.5 * (X + X.conj().T)
    return scale * H / max(np.linalg.norm(H, 2), 1e-300)


def random_density(rng, d, rank=None):
    rank = rank or d
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def check_density(rho, tol=1e-9):
    assert abs(np.trace(rho) - 1) < tol
    assert np.max(abs(rho - rho.conj().T)) < tol
    assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] > -1e-8


@cfg("expm_unitary")
@given(seed=seeds, d=st.integers(1, 8), scale=st.floats(1e-3, 50.0))
def test_expm_of_antihermitian_is_unitary(seed, d, scale):
    H = random_hermitian(np.random.default_rng(seed), d, scale)
    U = expm(-1j * H)
    assert np.max(abs(U.conj().T @ U - np.eye(d))) < 1e-10
    # exp(-iH) exp(iH) = 1
    assert np.max(abs(U @ expm(1j * H) - np.eye(d))) < 1e-10


@cfg("embed_hermitian")
@given(seed=seeds, dims=st.lists(st.integers(2, 4), min_size=1, max_size=3),
       data=st.data())
def test_embed_and_product_keep_hermiticity(seed, dims, data):
    slot = data.draw(st.integers(0, len(dims) - 1))
    rng = np.random.default_rng(seed)
    A = Operator(random_hermitian(rng, dims[slot]))
    E = embed(A, slot, dims)
    assert E.is_hermitian()
    assert E.space.factor_dims == tuple(dims)
    B = Operator(random_hermitian(rng, 2))
    assert tensor_product(A, B).is_hermitian()
    # spectrum of the embedding is the spectrum of A with multiplicity
    mult = int(np.prod(dims)) // dims[slot]
    ev = np.sort(np.repeat(np.linalg.eigvalsh(A.data), mult))
    assert np.allclose(np.linalg.eigvalsh(E.data), ev, atol=1e-10)


@cfg("partial_trace")
@given(seed=seeds, dims=st.lists(st.integers(2, 3), min_size=2, max_size=3), data=st.data())
def test_partial_trace_gives_density_matrix(seed, dims, data):
    rng = np.random.default_rng(seed)
    D = int(np.prod(dims))
    rank = data.draw(st.integers(1, D))
    rho = DensityMatrix(random_density(rng, D, rank), dims)
    keep = data.draw(st.sets(st.integers(0, len(dims) - 1), min_size=1,
                             max_size=len(dims) - 1))
    red = partial_trace(rho, keep)
    check_density(red.data)
    assert red.space.factor_dims == tuple(dims[i] for i in sorted(keep))


@cfg("thermal")
@given(n_bar=st.floats(0.0, 6.0), extra=st.integers(0, 20))
def test_thermal_state_populations(n_bar, extra):
    N = 2 + extra
    rho = thermal_state(n_bar, N, allow_truncation=True)
    p = np.real(np.diag(rho.data))
    assert abs(p.sum() - 1) < 1e-12
    assert np.all(np.diff(p) <= 1e-15)
    assert np.all(p >= 0)


@cfg("fidelity")
@given(seed=seeds, d=st.integers(2, 8), data=st.data())
def test_state_fidelity_bounds(seed, d, data):
    rng = np.random.default_rng(seed)
    rank = data.draw(st.integers(1, d))
    rho = DensityMatrix(random_density(rng, d, rank))
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi = PureState(v / np.linalg.norm(v))
    f = state_fidelity(rho, psi)
    assert -1e-12 <= f <= 1 + 1e-12
    assert abs(state_fidelity(psi.to_density(), psi) - 1) < 1e-12


@cfg("unitary_evolution")
@given(seed=seeds, d=st.integers(2, 12), t=st.floats(0.0, 5.0), data=st.data())
def test_unitary_evolution_preserves_state(seed, d, t, data):
    rng = np.random.default_rng(seed)
    H = Operator(random_hermitian(rng, d, 3.0))
    rank = data.draw(st.integers(1, d))
    rho = DensityMatrix(random_density(rng, d, rank))
    out = evolve_unitary(H, t, rho)
    check_density(out.data, 1e-10)
    assert np.allclose(np.linalg.eigvalsh(out.data), np.linalg.eigvalsh(rho.data), atol=1e-9)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi = evolve_unitary(H, t, PureState(v / np.linalg.norm(v)))
    assert abs(np.linalg.norm(psi.amplitudes) - 1) < 1e-10


def _segment(H, t):
    return PulseSegment(t, H, "free", None, None)


@cfg("lindblad")
@given(seed=seeds, kappa=st.floats(0.0, 0.05), n_bar=st.floats(0.0, 0.3),
       gamma=st.floats(0.0, 0.05), t=st.floats(0.1, 3.0), data=st.data())
def test_lindblad_preserves_trace_hermiticity_positivity(seed, kappa, n_bar, gamma, t, data):
    rng = np.random.default_rng(seed)
    dims = (2, 6)
    H = Operator(random_hermitian(rng, 12, 2.0), dims)
    rank = data.draw(st.integers(1, 12))
    rho0 = random_density(rng, 12, rank)
    # keep the top oscillator levels empty so leakage stays meaningful
    P = np.kron(np.eye(2), np.diag([1, 1, 1, 1, 0, 0]))
    rho0 = P @ rho0 @ P
    rho0 = DensityMatrix(rho0 / np.trace(rho0).real, dims)
    res = evolve_lindblad(PulseSchedule((_segment(H, t),)),
                          LindbladModel(kappa, n_bar, gamma), rho0, check_leakage=False)
    check_density(res.final_rho.data)
    assert res.diagnostics["max_trace_drift"] < 1e-7


@cfg("dephasing")
@given(seed=seeds, gamma=st.floats(0.01, 5.0), t=st.floats(0.0, 2.0))
def test_dephasing_preserves_populations(seed, gamma, t):
    rng = np.random.default_rng(seed)
    rho0 = DensityMatrix(random_density(rng, 4), (2, 2))
    H = Operator(np.diag(rng.normal(size=4)), (2, 2))
    res = evolve_lindblad(PulseSchedule((_segment(H, t),)), LindbladModel(Gamma=gamma), rho0)
    assert np.max(abs(np.diag(res.final_rho.data) - np.diag(rho0.data))) < 1e-12
    # |00><11| loses phase from both qubits; RK4 truncation grows with gamma t up to ~1e-5
    off = abs(res.final_rho.data[0, 3])
    assert off == pytest.approx(abs(rho0.data[0, 3]) * math.exp(-gamma * t), rel=1e-4)
