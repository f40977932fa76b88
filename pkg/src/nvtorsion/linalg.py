"""Dimension-aware dense complex linear algebra.

Everything here works on plain ``numpy`` arrays wrapped in small frozen
containers that remember the tensor-factor structure of the Hilbert space
(e.g. ``[2, 2, N]`` for two qubits and a truncated oscillator).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "LinalgError",
    "ShapeError",
    "NumericError",
    "TruncationError",
    "TensorSpace",
    "Operator",
    "DensityMatrix",
    "PureState",
    "identity",
    "pauli",
    "tensor_product",
    "mode_operators",
    "embed",
    "expm",
    "matrix_exponential",
    "thermal_populations",
    "thermal_state",
    "fock_state",
    "basis_state",
    "partial_trace",
    "state_fidelity",
    "trace_distance",
    "average_gate_fidelity",
]


class LinalgError(Exception):
    """Base class for errors raised by this module."""


class ShapeError(LinalgError, ValueError):
    pass


class NumericError(LinalgError, ValueError):
    pass


class TruncationError(LinalgError, ValueError):
    pass


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TensorSpace:
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims:
            raise ShapeError("a tensor space needs at least one factor")
        if any(d < 2 for d in dims):
            raise ShapeError(f"every factor dimension must be >= 2, got {dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.factor_dims)

    def __add__(self, other: "TensorSpace") -> "TensorSpace":
        return TensorSpace(self.factor_dims + other.factor_dims)

    def __len__(self):
        return len(self.factor_dims)


def _space(dims) -> TensorSpace:
    if isinstance(dims, TensorSpace):
        return dims
    if isinstance(dims, (int, np.integer)):
        return TensorSpace((int(dims),))
    return TensorSpace(tuple(dims))


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense square matrix on a :class:`TensorSpace`."""

    space: TensorSpace
    data: np.ndarray

    def __init__(self, data, space=None):
        arr = _frozen(data)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"operator must be square, got shape {arr.shape}")
        sp = _space(space if space is not None else arr.shape[0])
        if sp.total_dim != arr.shape[0]:
            raise ShapeError(
                f"matrix dimension {arr.shape[0]} does not match space {sp.factor_dims}"
            )
        object.__setattr__(self, "space", sp)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.space)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = float(np.max(np.abs(self.data), initial=0.0))
        if scale == 0.0:
            return True
        return float(np.max(np.abs(self.data - self.data.conj().T))) <= tol * scale

    def is_unitary(self, tol: float = 1e-10) -> bool:
        eye = np.eye(self.dim)
        return float(np.max(np.abs(self.data.conj().T @ self.data - eye))) <= tol

    def _check(self, other: "Operator"):
        if self.space != other.space:
            raise ShapeError(
                f"space mismatch: {self.space.factor_dims} vs {other.space.factor_dims}"
            )

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.data @ other.data, self.space)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.data + other.data, self.space)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.data - other.data, self.space)
        return NotImplemented

    def __neg__(self):
        return Operator(-self.data, self.space)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return Operator(self.data * scalar, self.space)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.data / scalar, self.space)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def allclose(self, other, atol: float = 1e-12) -> bool:
        other_data = other.data if isinstance(other, Operator) else np.asarray(other)
        return bool(np.allclose(self.data, other_data, atol=atol, rtol=0.0))

    def __repr__(self):
        return f"Operator(space={list(self.space.factor_dims)}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one, Hermitian, positive semidefinite matrix.

    ``check=False`` skips validation; integrators use it for intermediate
    states and validate once at the end.
    """

    space: TensorSpace
    data: np.ndarray

    TRACE_TOL = 1e-9
    HERMITIAN_TOL = 1e-10
    POSITIVITY_TOL = -1e-8

    def __init__(self, data, space=None, check: bool = True):
        arr = _frozen(data)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"density matrix must be square, got shape {arr.shape}")
        sp = _space(space if space is not None else arr.shape[0])
        if sp.total_dim != arr.shape[0]:
            raise ShapeError(
                f"matrix dimension {arr.shape[0]} does not match space {sp.factor_dims}"
            )
        object.__setattr__(self, "space", sp)
        object.__setattr__(self, "data", arr)
        if check:
            self.validate()

    def validate(self) -> None:
        arr = self.data
        tr = np.trace(arr)
        if abs(tr - 1.0) > self.TRACE_TOL:
            raise NumericError(f"density matrix trace {tr.real:.3e} deviates from 1")
        herm = float(np.max(np.abs(arr - arr.conj().T)))
        if herm > self.HERMITIAN_TOL:
            raise NumericError(f"density matrix not Hermitian (deviation {herm:.2e})")
        lam = self.min_eigenvalue()
        if lam < self.POSITIVITY_TOL:
            raise NumericError(f"density matrix has negative eigenvalue {lam:.2e}")

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    @classmethod
    def from_pure(cls, psi: "PureState") -> "DensityMatrix":
        v = psi.amplitudes
        return cls(np.outer(v, v.conj()), psi.space)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def expect(self, op: Operator) -> complex:
        if op.space != self.space:
            raise ShapeError("operator and state live on different spaces")
        return complex(np.trace(op.data @ self.data))

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def __repr__(self):
        return f"DensityMatrix(space={list(self.space.factor_dims)})"


@dataclass(frozen=True, eq=False)
class PureState:
    space: TensorSpace
    amplitudes: np.ndarray

    def __init__(self, amplitudes, space=None, normalize: bool = False):
        arr = np.array(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            arr = arr / np.linalg.norm(arr)
        sp = _space(space if space is not None else arr.shape[0])
        if sp.total_dim != arr.shape[0]:
            raise ShapeError(
                f"vector length {arr.shape[0]} does not match space {sp.factor_dims}"
            )
        nrm = np.linalg.norm(arr)
        if abs(nrm - 1.0) > 1e-12:
            raise NumericError(f"state norm {nrm:.15f} is not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "space", sp)
        object.__setattr__(self, "amplitudes", arr)

    def to_density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(np.kron(self.amplitudes, other.amplitudes), self.space + other.space)


def identity(dims) -> Operator:
    sp = _space(dims)
    return Operator(np.eye(sp.total_dim), sp)


_PAULI = {
    "i": np.eye(2),
    "x": np.array([[0, 1], [1, 0]]),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.array([[1, 0], [0, -1]]),
}


def pauli(axis: str) -> Operator:
    """Pauli matrix in the qubit basis (|0>, |1>), with sigma_z|0> = +|0>."""
    try:
        return Operator(_PAULI[axis.lower()])
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def tensor_product(*ops: Operator) -> Operator:
    if not ops:
        raise ValueError("tensor_product needs at least one operator")
    data = reduce(np.kron, (op.data for op in ops))
    space = reduce(lambda a, b: a + b, (op.space for op in ops))
    return Operator(data, space)


def mode_operators(N: int) -> tuple[Operator, Operator, Operator]:
    """Annihilation, creation and number operators on N Fock levels."""
    if int(N) != N or N < 2:
        raise TruncationError(f"oscillator truncation must be an integer >= 2, got {N}")
    N = int(N)
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)
    adag = a.T.copy()
    n = np.diag(np.arange(N, dtype=float))
    return Operator(a), Operator(adag), Operator(n)


def embed(op: Operator, slot: int, space) -> Operator:
    """Lift ``op`` acting on factor ``slot`` to the full ``space``."""
    sp = _space(space)
    if not 0 <= slot < len(sp.factor_dims):
        raise IndexError(f"slot {slot} out of range for space {sp.factor_dims}")
    if op.dim != sp.factor_dims[slot]:
        raise ShapeError(
            f"operator of dimension {op.dim} cannot act on factor {slot} "
            f"of dimension {sp.factor_dims[slot]}"
        )
    left = math.prod(sp.factor_dims[:slot])
    right = math.prod(sp.factor_dims[slot + 1:])
    data = np.kron(np.kron(np.eye(left), op.data), np.eye(right))
    return Operator(data, sp)


# Pade coefficients and theta thresholds for the degree-13 scaling-and-squaring
# method (Higham 2005, SIAM J. Matrix Anal. Appl. 26, 1179).
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_PADE_LOW = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}


def _pade_low(A: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE_LOW[m]
    eye = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    powers = [eye, A2]
    for _ in range(2, (m + 1) // 2):
        powers.append(powers[-1] @ A2)
    U = sum(b[2 * j + 1] * powers[j] for j in range((m + 1) // 2))
    V = sum(b[2 * j] * powers[j] for j in range((m + 1) // 2))
    return A @ U, V


def _pade13(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE13
    eye = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye)
    return U, V


def expm(A) -> np.ndarray:
    """Matrix exponential of a square array by Pade scaling and squaring."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"matrix exponential needs a square matrix, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericError("matrix exponential of a matrix with NaN/Inf entries")
    A = A.astype(complex if np.iscomplexobj(A) else float)
    norm1 = float(np.linalg.norm(A, 1)) if A.size else 0.0
    s = 0
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            U, V = _pade_low(A, m)
            break
    else:
        if norm1 > _THETA[13]:
            s = max(0, int(math.ceil(math.log2(norm1 / _THETA[13]))))
        U, V = _pade13(A / 2.0**s)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def matrix_exponential(A: Operator) -> Operator:
    return Operator(expm(A.data), A.space)


def thermal_populations(n_bar: float, N: int) -> np.ndarray:
    """Bose-Einstein populations on N levels, renormalized over the kept levels."""
    if n_bar < 0:
        raise ValueError(f"thermal occupation must be >= 0, got {n_bar}")
    p = np.zeros(N)
    if n_bar == 0:
        p[0] = 1.0
        return p
    q = n_bar / (n_bar + 1.0)
    p = q ** np.arange(N, dtype=float)
    return p / p.sum()


def truncation_tail(n_bar: float, N: int) -> float:
    """Thermal weight lost by keeping only N levels."""
    if n_bar == 0:
        return 0.0
    return (n_bar / (n_bar + 1.0)) ** N


def thermal_state(n_bar: float, N: int, allow_truncation: bool = False) -> DensityMatrix:
    if int(N) != N or N < 2:
        raise TruncationError(f"oscillator truncation must be an integer >= 2, got {N}")
    N = int(N)
    tail = truncation_tail(n_bar, N)
    if tail >= 1e-6 and not allow_truncation:
        raise TruncationError(
            f"N={N} levels drop a thermal tail of {tail:.2e} at n_bar={n_bar}; "
            "increase N or pass allow_truncation=True"
        )
    return DensityMatrix(np.diag(thermal_populations(n_bar, N)), N)


def fock_state(k: int, N: int) -> PureState:
    if not 0 <= k < N:
        raise IndexError(f"Fock level {k} outside truncation {N}")
    v = np.zeros(N)
    v[k] = 1.0
    return PureState(v)


def basis_state(bits: Sequence[int], dims=None) -> PureState:
    """Product basis state |b0 b1 ...> on the given factor dimensions."""
    dims = tuple(dims) if dims is not None else (2,) * len(bits)
    if len(dims) != len(bits):
        raise ShapeError("one index per factor is required")
    v = np.zeros(math.prod(dims))
    v[np.ravel_multi_index(tuple(bits), dims)] = 1.0
    return PureState(v, dims)


def _ptrace_array(rho: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    keep = sorted(set(keep))
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(tuple(dims) + tuple(dims))
    # contract traced factors pairwise, highest index first so axes stay valid
    for offset, i in enumerate(sorted(traced, reverse=True)):
        m = n - offset
        t = np.trace(t, axis1=i, axis2=i + m)
    d = math.prod(dims[i] for i in keep)
    return t.reshape(d, d)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    keep = {keep} if isinstance(keep, (int, np.integer)) else set(keep)
    dims = rho.space.factor_dims
    if not keep or any(not 0 <= i < len(dims) for i in keep):
        raise IndexError(f"invalid factor indices {sorted(keep)} for space {dims}")
    red = _ptrace_array(rho.data, dims, keep)
    return DensityMatrix(red, [dims[i] for i in sorted(keep)], check=False)


def state_fidelity(rho: DensityMatrix, target: PureState) -> float:
    """<target|rho|target>."""
    if rho.space != target.space:
        raise ShapeError(
            f"state spaces differ: {rho.space.factor_dims} vs {target.space.factor_dims}"
        )
    v = target.amplitudes
    f = np.vdot(v, rho.data @ v)
    if abs(f.imag) > 1e-10:
        raise NumericError(f"fidelity has imaginary part {f.imag:.2e}")
    return float(f.real)


def trace_distance(a, b) -> float:
    da = a.data if isinstance(a, (Operator, DensityMatrix)) else np.asarray(a)
    db = b.data if isinstance(b, (Operator, DensityMatrix)) else np.asarray(b)
    diff = da - db
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def average_gate_fidelity(U: np.ndarray, target: np.ndarray,
                          env_populations: np.ndarray | None = None) -> float:
    """Average gate fidelity of the system channel induced by ``U``.

    ``U`` acts on system (dimension of ``target``) tensored with an environment
    that starts in the diagonal state ``env_populations``.  Without an
    environment this reduces to (d + |tr(T^dag U)|^2) / (d (d + 1)).
    """
    d = target.shape[0]
    if env_populations is None:
        env_populations = np.ones(1)
    p = np.asarray(env_populations, dtype=float)
    ne = p.shape[0]
    if U.shape != (d * ne, d * ne):
        raise ShapeError(f"propagator shape {U.shape} does not match {d}x{ne}")
    blocks = U.reshape(d, ne, d, ne)
    # M[j, k] = tr_sys(T^dag <j|U|k>) for environment levels j, k
    M = np.einsum("ba,ajbk->jk", target.conj().T, blocks)
    f_ent = float(np.sum(p * np.sum(np.abs(M) ** 2, axis=0))) / d**2
    return (d * f_ent + 1.0) / (d + 1.0)
