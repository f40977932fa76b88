"""Hamiltonians, pulse schedules and time evolution (unitary and Lindblad).

Frequencies are angular (rad/s) and times are seconds, except for
:func:`single_qubit_drive_hamiltonian`, which follows the microwave-drive
convention ``H = 2 pi (delta Sz + Omega S_axis)`` with ``delta`` and
``Omega`` in Hz.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .linalg import (
    DensityMatrix,
    NumericError,
    Operator,
    PureState,
    ShapeError,
    TensorSpace,
    embed,
    expm,
    mode_operators,
    pauli,
)

__all__ = [
    "SystemParams",
    "LindbladModel",
    "PulseSegment",
    "InstantaneousUnitary",
    "PulseSchedule",
    "EvolutionResult",
    "StepFailureError",
    "LeakageError",
    "default_truncation",
    "build_lab_hamiltonian",
    "build_interaction_hamiltonian",
    "single_qubit_drive_hamiltonian",
    "evolve_unitary",
    "propagator",
    "evolve_lindblad",
    "hamiltonian_from_record",
]

TWO_PI = 2.0 * math.pi

TRACE_DRIFT_LIMIT = 1e-7
LEAKAGE_LIMIT = 1e-4
POSITIVITY_LIMIT = DensityMatrix.POSITIVITY_TOL


class StepFailureError(NumericError):
    """Integration drifted; retry with a smaller time step."""


class LeakageError(NumericError):
    """Population reached the top of the oscillator truncation."""


def default_truncation(n_bar: float, g_over_omega: float) -> int:
    """Fock-space size covering the thermal tail and the polaron displacement.

    Takes the larger of ``ceil(4 (n + 1) + 20 g/omega + 6)`` and the size at
    which the dropped thermal weight falls below 1e-6.
    """
    n = int(math.ceil(4.0 * (n_bar + 1.0) + 10.0 * 2.0 * abs(g_over_omega) + 6.0))
    if n_bar > 0:
        n = max(n, int(math.ceil(math.log(1e-6) / math.log(n_bar / (n_bar + 1.0)))) + 1)
    return n


@dataclass(frozen=True)
class SystemParams:
    omega1: float
    omega2: float
    g1: float
    g2: float
    omega: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"truncation N must be an integer >= 2, got {self.N}")
        if self.omega <= 0:
            raise ValueError("torsional frequency must be positive")

    @property
    def space(self) -> TensorSpace:
        return TensorSpace((2, 2, int(self.N)))

    @property
    def g_eff(self) -> float:
        return math.sqrt(abs(self.g1 * self.g2))

    def as_record(self) -> dict:
        return {k: getattr(self, k) for k in ("omega1", "omega2", "g1", "g2", "omega", "N")}


@dataclass(frozen=True)
class LindbladModel:
    kappa: float = 0.0
    n_bar: float = 0.0
    Gamma: float = 0.0
    dephased_qubits: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        if self.kappa < 0 or self.n_bar < 0 or self.Gamma < 0:
            raise ValueError("rates and occupation must be >= 0")

    @property
    def frequency_scale(self) -> float:
        return max(self.kappa * (self.n_bar + 1.0), self.Gamma)

    def jump_operators(self, space: TensorSpace, mode_slot: int | None = None):
        """List of (rate, operator) pairs for the given space.

        The oscillator is taken to be the last factor whenever it has more
        than two levels; qubits are the two-level factors.
        """
        dims = space.factor_dims
        if mode_slot is None and len(dims) > 0 and dims[-1] > 2:
            mode_slot = len(dims) - 1
        out = []
        if mode_slot is not None and self.kappa > 0:
            a, adag, _ = mode_operators(dims[mode_slot])
            A = embed(a, mode_slot, space)
            Ad = embed(adag, mode_slot, space)
            out.append((self.kappa * (self.n_bar + 1.0), A))
            if self.n_bar > 0:
                out.append((self.kappa * self.n_bar, Ad))
        if self.Gamma > 0:
            qubit_slots = [i for i, d in enumerate(dims) if d == 2 and i != mode_slot]
            for q in self.dephased_qubits:
                if q < len(qubit_slots):
                    out.append((self.Gamma / 4.0, embed(pauli("z"), qubit_slots[q], space)))
        return out


@dataclass(frozen=True, eq=False)
class PulseSegment:
    """Evolution under a constant Hamiltonian for ``duration`` seconds.

    ``record`` carries the parameters needed to rebuild the Hamiltonian via
    :func:`hamiltonian_from_record`; ``frequency_scale`` (rad/s) is the
    largest physical rate in the segment and sets the RK4 step.
    """

    duration: float
    hamiltonian: Operator
    label: str = ""
    record: Mapping | None = None
    frequency_scale: float | None = None

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("segment duration must be >= 0")
        if not self.hamiltonian.is_hermitian(1e-12):
            raise NumericError(f"segment {self.label!r} has a non-Hermitian Hamiltonian")


@dataclass(frozen=True, eq=False)
class InstantaneousUnitary:
    unitary: Operator
    label: str = ""
    record: Mapping | None = None

    def __post_init__(self):
        if not self.unitary.is_unitary(1e-10):
            raise NumericError(f"item {self.label!r} is not unitary")


ScheduleItem = Union[PulseSegment, InstantaneousUnitary]


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    items: tuple
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        items = tuple(self.items)
        spaces = {it.hamiltonian.space if isinstance(it, PulseSegment) else it.unitary.space
                  for it in items}
        if len(spaces) > 1:
            raise ShapeError("all schedule items must act on the same space")
        object.__setattr__(self, "items", items)

    @property
    def total_duration(self) -> float:
        return sum(it.duration for it in self.items if isinstance(it, PulseSegment))

    @property
    def space(self) -> TensorSpace:
        it = self.items[0]
        return it.hamiltonian.space if isinstance(it, PulseSegment) else it.unitary.space

    def propagator(self) -> np.ndarray:
        """Closed-system propagator of the whole schedule (latest item leftmost)."""
        U = np.eye(self.space.total_dim, dtype=complex)
        for it in self.items:
            if isinstance(it, PulseSegment):
                U = expm(-1j * it.hamiltonian.data * it.duration) @ U
            else:
                U = it.unitary.data @ U
        return U

    def to_json(self, indent: int | None = 2) -> str:
        doc = {"metadata": dict(self.metadata),
               "space": list(self.space.factor_dims),
               "total_duration": self.total_duration,
               "items": []}
        for it in self.items:
            if isinstance(it, PulseSegment):
                entry = {"type": "segment", "label": it.label, "duration": it.duration,
                         "frequency_scale": it.frequency_scale}
            else:
                entry = {"type": "unitary", "label": it.label}
            if it.record is None:
                raise ValueError(f"item {it.label!r} has no parameter record to serialize")
            entry["record"] = dict(it.record)
            doc["items"].append(entry)
        return json.dumps(doc, indent=indent, default=_json_default)

    @classmethod
    def from_json(cls, text: str) -> "PulseSchedule":
        doc = json.loads(text)
        items = []
        for entry in doc["items"]:
            op = hamiltonian_from_record(entry["record"])
            if entry["type"] == "segment":
                items.append(PulseSegment(entry["duration"], op, entry.get("label", ""),
                                          entry["record"], entry.get("frequency_scale")))
            else:
                items.append(InstantaneousUnitary(op, entry.get("label", ""), entry["record"]))
        return cls(tuple(items), doc.get("metadata", {}))


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def build_lab_hamiltonian(p: SystemParams) -> Operator:
    """omega a^dag a + omega1/2 sz1 + omega2/2 sz2 + (g1 sz1 + g2 sz2)(a + a^dag)."""
    space = p.space
    a, adag, n = mode_operators(p.N)
    Z1 = embed(pauli("z"), 0, space)
    Z2 = embed(pauli("z"), 1, space)
    X = embed(a + adag, 2, space)
    N_op = embed(n, 2, space)
    S = p.g1 * Z1 + p.g2 * Z2
    return p.omega * N_op + (0.5 * p.omega1) * Z1 + (0.5 * p.omega2) * Z2 + S @ X


def build_interaction_hamiltonian(p: SystemParams) -> Operator:
    """Interaction-picture Hamiltonian with respect to the bare qubit splittings."""
    return build_lab_hamiltonian(
        SystemParams(0.0, 0.0, p.g1, p.g2, p.omega, p.N)
    )


def collective_coupling(p: SystemParams) -> Operator:
    """g1 sz1 + g2 sz2 on the [2, 2, N] space."""
    space = p.space
    return p.g1 * embed(pauli("z"), 0, space) + p.g2 * embed(pauli("z"), 1, space)


def _spin_half(axis: str) -> np.ndarray:
    return 0.5 * pauli(axis).data


def single_qubit_drive_hamiltonian(delta: float, Omega: float, axis: str = "x") -> Operator:
    """2 pi (delta Sz + Omega S_axis) with delta, Omega in Hz and S = sigma / 2."""
    if axis not in ("x", "y", "-x", "-y"):
        raise ValueError(f"drive axis must be x or y (optionally negated), got {axis!r}")
    sign = -1.0 if axis.startswith("-") else 1.0
    H = TWO_PI * (delta * _spin_half("z") + sign * Omega * _spin_half(axis[-1]))
    return Operator(H)


def spin_oscillator_drive_hamiltonian(Omega: float, axis: str, omega: float, g: float,
                                      N: int, delta: float = 0.0) -> Operator:
    """Driven qubit coupled to the torsional mode, on the [2, N] space.

    ``Omega`` and ``delta`` are in Hz (drive convention); ``omega`` and ``g``
    are angular.  The coupling is ``g sz (a + a^dag)``.
    """
    space = TensorSpace((2, int(N)))
    a, adag, n = mode_operators(N)
    drive = single_qubit_drive_hamiltonian(delta, Omega, axis) if Omega != 0 or delta != 0 \
        else Operator(np.zeros((2, 2)))
    return (embed(drive, 0, space) + omega * embed(n, 1, space)
            + g * embed(pauli("z"), 0, space) @ embed(a + adag, 1, space))


def hamiltonian_from_record(record: Mapping) -> Operator:
    """Rebuild an operator from a serialized parameter record."""
    kind = record["kind"]
    if kind == "lab":
        return build_lab_hamiltonian(SystemParams(**record["params"]))
    if kind == "interaction":
        return build_interaction_hamiltonian(SystemParams(**record["params"]))
    if kind == "qubit_drive":
        r = record["params"]
        return single_qubit_drive_hamiltonian(r["delta"], r["Omega"], r["axis"])
    if kind == "spin_oscillator_drive":
        return spin_oscillator_drive_hamiltonian(**record["params"])
    if kind == "global_rotation":
        from .protocols import global_rotation

        r = record["params"]
        op = global_rotation(r["axis"], r["angle"])
        N = r.get("N")
        if N is None:
            return op
        return Operator(np.kron(op.data, np.eye(N)), (2, 2, N))
    if kind == "flip":
        base = hamiltonian_from_record(record["params"]["base"])
        N = base.space.factor_dims[-1]
        sx = 0.5 * pauli("x").data
        drive = np.kron(np.kron(sx, np.eye(2)) + np.kron(np.eye(2), sx), np.eye(N))
        return base + record["params"]["rate"] * Operator(drive, base.space)
    if kind == "matrix":
        re = np.asarray(record["real"], dtype=float)
        im = np.asarray(record["imag"], dtype=float)
        return Operator(re + 1j * im, record["space"])
    raise ValueError(f"unknown Hamiltonian record kind {kind!r}")


StateLike = Union[PureState, DensityMatrix]


def propagator(H: Operator, t: float) -> Operator:
    if not H.is_hermitian(1e-12):
        raise NumericError("propagator requires a Hermitian Hamiltonian")
    return Operator(expm(-1j * H.data * t), H.space)


def evolve_unitary(H: Operator, t: float, state: StateLike) -> StateLike:
    """Apply exp(-i H t) to a pure state or density matrix."""
    U = propagator(H, t).data
    if state.space != H.space:
        raise ShapeError("state and Hamiltonian live on different spaces")
    if isinstance(state, PureState):
        v = U @ state.amplitudes
        return PureState(v / np.linalg.norm(v), state.space)
    rho = U @ state.data @ U.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T), state.space, check=False)


# ---------------------------------------------------------------------------
# Lindblad integration


@dataclass
class EvolutionResult:
    final_rho: DensityMatrix
    times: np.ndarray
    records: list[dict]
    diagnostics: dict
    metadata: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.diagnostics["max_trace_drift"] < TRACE_DRIFT_LIMIT

    def series(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.records])


class _BlockOp:
    """Operator split into diagonal blocks over the qubit register.

    ``blocks[s]`` is either a complex scalar (block = scalar * identity) or an
    N x N array.
    """

    def __init__(self, data: np.ndarray, nblocks: int, bdim: int):
        t = data.reshape(nblocks, bdim, nblocks, bdim)
        self.blocks = []
        eye = np.eye(bdim)
        for s in range(nblocks):
            blk = t[s, :, s, :]
            c = blk[0, 0]
            if np.allclose(blk, c * eye, atol=1e-15, rtol=0.0):
                self.blocks.append(complex(c))
            else:
                self.blocks.append(np.ascontiguousarray(blk))


def _is_block_diagonal(data: np.ndarray, nblocks: int, bdim: int) -> bool:
    t = data.reshape(nblocks, bdim, nblocks, bdim)
    return not any(np.any(t[s, :, u, :]) for s in range(nblocks) for u in range(nblocks)
                   if s != u)


def _lmul(x, r):
    return x * r if isinstance(x, complex) else x @ r


def _rmul(r, x):
    return r * x if isinstance(x, complex) else r @ x


def _dag(x):
    return x.conjugate() if isinstance(x, complex) else x.conj().T


class _Generator:
    """Master-equation pieces for one constant segment.

    ``d rho = -i [H, rho] + D(rho)`` with
    ``D(rho) = sum_k c_k (L_k rho L_k^dag - {L_k^dag L_k, rho} / 2)``.
    The coherent part is applied exactly through ``U = exp(-i H tau)``.
    When every operator is block diagonal over the leading (qubit) factors the
    density matrix is evolved block by block.
    """

    def __init__(self, H: np.ndarray, jumps: Sequence[tuple[float, np.ndarray]],
                 space: TensorSpace):
        dims = space.factor_dims
        self.dim = space.total_dim
        self.H = H.astype(complex)
        G = np.zeros_like(self.H)
        for c, L in jumps:
            G += 0.5 * c * (L.conj().T @ L)
        self.G = G
        self.jumps = [(c, L) for c, L in jumps]
        self.bdim = dims[-1] if len(dims) > 1 else self.dim
        self.nblocks = self.dim // self.bdim
        ops = [self.H, G] + [L for _, L in jumps]
        self.blocked = self.nblocks > 1 and all(
            _is_block_diagonal(op, self.nblocks, self.bdim) for op in ops
        )
        if self.blocked:
            self.Hb = _BlockOp(self.H, self.nblocks, self.bdim).blocks
            self.Gb = _BlockOp(G, self.nblocks, self.bdim).blocks
            self.Lb = [(c, _BlockOp(L, self.nblocks, self.bdim).blocks) for c, L in jumps]
            self.Lb_dag = [[_dag(x) for x in blocks] for _, blocks in self.Lb]

    def dissipator_dense(self, rho: np.ndarray) -> np.ndarray:
        out = -(self.G @ rho + rho @ self.G)
        for c, L in self.jumps:
            out += c * (L @ rho @ L.conj().T)
        return out

    # block form: ``rb`` maps (s, u) -> N x N array
    def dissipator_blocks(self, rb: dict) -> dict:
        out = {}
        for (s, u), r in rb.items():
            d = -(_lmul(self.Gb[s], r) + _rmul(r, self.Gb[u]))
            for (c, Ls), Lds in zip(self.Lb, self.Lb_dag):
                ls, ldu = Ls[s], Lds[u]
                if isinstance(ls, complex) and isinstance(ldu, complex):
                    d += (c * ls * ldu) * r
                else:
                    d += c * _rmul(_lmul(ls, r), ldu)
            out[(s, u)] = d
        return out

    def coherent(self, tau: float):
        """Return the map rho -> U rho U^dag with U = exp(-i H tau)."""
        if not self.blocked:
            U = expm(-1j * tau * self.H)
            Ud = U.conj().T
            return lambda rho: U @ rho @ Ud
        U = [complex(np.exp(-1j * tau * k)) if isinstance(k, complex) else expm(-1j * tau * k)
             for k in self.Hb]
        Ud = [_dag(x) for x in U]
        return lambda rb: {(s, u): _rmul(_lmul(U[s], r), Ud[u]) for (s, u), r in rb.items()}

    def spectral_width(self) -> float:
        w = np.linalg.eigvalsh(self.H)
        return float(w[-1] - w[0])

    def dissipative_scale(self) -> float:
        return float(sum(c * np.linalg.norm(L, 2) ** 2 for c, L in self.jumps))


def _split(rho: np.ndarray, nblocks: int, bdim: int, tol: float = 0.0) -> dict:
    t = rho.reshape(nblocks, bdim, nblocks, bdim)
    out = {}
    for s in range(nblocks):
        for u in range(nblocks):
            blk = t[s, :, u, :]
            if np.any(np.abs(blk) > tol):
                out[(s, u)] = np.array(blk, dtype=complex)
    return out


def _join(rb: dict, nblocks: int, bdim: int) -> np.ndarray:
    t = np.zeros((nblocks, bdim, nblocks, bdim), dtype=complex)
    for (s, u), r in rb.items():
        t[s, :, u, :] = r
    return t.reshape(nblocks * bdim, nblocks * bdim)


def _mode_populations(rho: np.ndarray, space: TensorSpace) -> np.ndarray | None:
    dims = space.factor_dims
    if not dims or dims[-1] <= 2:
        return None
    N = dims[-1]
    rest = space.total_dim // N
    diag = np.real(np.diagonal(rho)).reshape(rest, N)
    return diag.sum(axis=0)


def _mode_number(rho: np.ndarray, space: TensorSpace) -> float:
    pops = _mode_populations(rho, space)
    if pops is None:
        return float("nan")
    return float(np.dot(np.arange(pops.size), pops))


def evolve_lindblad(
    schedule: PulseSchedule,
    model: LindbladModel,
    rho0: DensityMatrix,
    sample_every: float | None = None,
    observables: Mapping[str, Callable[[np.ndarray], float]] | None = None,
    dt: float | None = None,
    steps_per_period: int = 50,
    stability: float = 0.2,
    check_leakage: bool = True,
    frame: str | None = None,
) -> EvolutionResult:
    """Fixed-step integration of the master equation over a schedule.

    In each constant segment the coherent part ``exp(-i H dt)`` is applied
    exactly and the dissipator is integrated with RK4 in the interaction
    picture of ``H``.  Closed segments are therefore exact, the trace is
    kept to rounding, and the RK4 error scales with the dissipative rates.  The step is the smaller of
    ``2 pi / (50 w)``, with ``w`` the segment's physical frequency scale (or
    the dissipative scale of ``model`` if larger), and ``stability / W`` with
    ``W`` the dissipator norm.  ``dt`` caps the step further.
    Instantaneous unitaries act as ``rho -> U rho U^dag``.
    """
    space = schedule.space
    if rho0.space != space:
        raise ShapeError("initial state and schedule live on different spaces")
    observables = dict(observables or {})
    jumps = [(c, L.data) for c, L in model.jump_operators(space)]
    rho = np.array(rho0.data, dtype=complex)

    t = 0.0
    times, records = [], []
    max_drift = 0.0
    min_eig = float("inf")
    max_leak = 0.0
    dts = []
    next_sample = 0.0

    def record(rho_now, t_now):
        nonlocal max_drift, min_eig, max_leak
        if not np.all(np.isfinite(rho_now)):
            raise StepFailureError("integration diverged (non-finite entries); reduce dt")
        tr = np.trace(rho_now).real
        drift = abs(tr - 1.0)
        max_drift = max(max_drift, drift)
        herm = 0.5 * (rho_now + rho_now.conj().T)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(herm)[0]))
        pops = _mode_populations(rho_now, space)
        leak = float(pops[-2:].sum()) if pops is not None else 0.0
        max_leak = max(max_leak, leak)
        rec = {"t": t_now, "n_mean": _mode_number(rho_now, space), "trace_drift": drift}
        for name, fn in observables.items():
            rec[name] = float(fn(rho_now))
        times.append(t_now)
        records.append(rec)

    if sample_every is not None:
        record(rho, 0.0)
        next_sample = sample_every

    for item in schedule.items:
        if isinstance(item, InstantaneousUnitary):
            U = item.unitary.data
            rho = U @ rho @ U.conj().T
            continue
        if item.duration == 0:
            continue
        gen = _Generator(item.hamiltonian.data, jumps, space)
        w_phys = item.frequency_scale or gen.spectral_width()
        w_phys = max(w_phys, model.frequency_scale)
        width = gen.dissipative_scale()
        h = TWO_PI / (steps_per_period * w_phys) if w_phys > 0 else item.duration
        if width > 0:
            h = min(h, stability / width)
        if dt is not None:
            h = min(h, dt)
        nsteps = max(1, int(math.ceil(item.duration / h - 1e-12)))
        h = item.duration / nsteps
        dts.append(h)
        E = gen.coherent(0.5 * h)

        if gen.blocked:
            rb = _split(rho, gen.nblocks, gen.bdim)
            J = gen.dissipator_blocks
            keys = list(rb)

            def lin(x, *terms):
                return {key: x[key] + sum(c * k[key] for c, k in terms) for key in keys}
        else:
            rb = rho
            J = gen.dissipator_dense

            def lin(x, *terms):
                return x + sum(c * k for c, k in terms)

        t_seg = t
        for step in range(nsteps):
            # RK4 for the dissipator in the interaction picture of H
            r_i = E(rb)
            if gen.jumps:
                k1 = E(J(rb))
                k2 = J(lin(r_i, (0.5 * h, k1)))
                k3 = J(lin(r_i, (0.5 * h, k2)))
                k4 = J(E(lin(r_i, (h, k3))))
                rb = lin(E(lin(r_i, (h / 6.0, k1), (h / 3.0, k2), (h / 3.0, k3))), (h / 6.0, k4))
            else:
                rb = E(r_i)
            t = t_seg + (step + 1) * h
            if sample_every is not None and t >= next_sample - 1e-15 * max(1.0, t):
                cur = _join(rb, gen.nblocks, gen.bdim) if gen.blocked else rb
                record(cur, t)
                while next_sample <= t + 1e-15 * max(1.0, t):
                    next_sample += sample_every
        rho = _join(rb, gen.nblocks, gen.bdim) if gen.blocked else rb
        if not np.all(np.isfinite(rho)):
            raise StepFailureError(f"integration diverged in segment {item.label!r}; reduce dt")
        t = t_seg + item.duration

    rho = 0.5 * (rho + rho.conj().T)
    record(rho, t)
    diagnostics = {
        "max_trace_drift": max_drift,
        "min_eigenvalue": min_eig,
        "max_leakage": max_leak,
        "dt": min(dts) if dts else 0.0,
        "steps": len(dts),
    }
    if max_drift > TRACE_DRIFT_LIMIT:
        raise StepFailureError(
            f"trace drifted by {max_drift:.2e} (> {TRACE_DRIFT_LIMIT:g}); reduce dt"
        )
    if min_eig < POSITIVITY_LIMIT:
        raise StepFailureError(
            f"density matrix eigenvalue {min_eig:.2e} below tolerance; reduce dt"
        )
    if check_leakage and max_leak > LEAKAGE_LIMIT:
        raise LeakageError(
            f"top two oscillator levels hold {max_leak:.2e} population (> {LEAKAGE_LIMIT:g}); "
            "increase the truncation N"
        )
    meta = dict(schedule.metadata)
    if frame is not None:
        meta["frame"] = frame
    return EvolutionResult(
        final_rho=DensityMatrix(rho, space, check=False),
        times=np.array(times),
        records=records,
        diagnostics=diagnostics,
        metadata=meta,
    )
