"""Gate protocols: echoed controlled phase, SUPCODE pulses, error predictors."""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .dynamics import (
    InstantaneousUnitary,
    PulseSchedule,
    PulseSegment,
    SystemParams,
    build_interaction_hamiltonian,
    build_lab_hamiltonian,
    single_qubit_drive_hamiltonian,
)
from .linalg import NumericError, Operator, expm, pauli

__all__ = [
    "GateWarning",
    "SynthesisError",
    "global_rotation",
    "ideal_cphase",
    "CPhaseProtocol",
    "cphase_schedule",
    "conditional_phase",
    "diagonal_phases",
    "SupcodePulse",
    "supcode_five_piece",
    "supcode_propagator",
    "rotation_infidelity",
    "NoiseParams",
    "predicted_errors",
    "REF_ALPHA_KAPPA",
    "REF_ALPHA_GAMMA_MU2",
    "REF_N0",
    "SUPCODE_COEFFICIENT",
]

TWO_PI = 2.0 * math.pi

REF_ALPHA_KAPPA = 4.0
REF_ALPHA_GAMMA_MU2 = 0.2  # alpha_Gamma * (g/omega)^2
REF_N0 = 2.65
SUPCODE_COEFFICIENT = 64.1


class GateWarning(UserWarning):
    """The requested gate parameters miss the resonance condition."""


class SynthesisError(NumericError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


_SX = 0.5 * pauli("x").data
_SY = 0.5 * pauli("y").data
_SZ = 0.5 * pauli("z").data


def global_rotation(axis: str, angle: float) -> Operator:
    """exp(-i angle/2 (sigma_1 + sigma_2)) along x, y or z on two qubits."""
    s = pauli(axis).data
    one = 0.5 * angle
    u = np.cos(one) * np.eye(2) - 1j * np.sin(one) * s
    return Operator(np.kron(u, u), (2, 2))


def ideal_cphase(phi: float) -> Operator:
    """diag(1, 1, 1, exp(2i phi)) in the |00>, |10>, |01>, |11> ordering."""
    return Operator(np.diag([1.0, 1.0, 1.0, np.exp(2j * phi)]), (2, 2))


def _with_mode(op: Operator, N: int) -> Operator:
    return Operator(np.kron(op.data, np.eye(N)), (2, 2, N))


@dataclass(frozen=True)
class CPhaseProtocol:
    m: int
    params: SystemParams
    frame: str = "lab"
    flip_duration: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.frame not in ("lab", "interaction"):
            raise ValueError("frame must be 'lab' or 'interaction'")
        if self.flip_duration < 0:
            raise ValueError("flip_duration must be >= 0")

    @property
    def t_m(self) -> float:
        return TWO_PI * self.m / self.params.omega

    @property
    def phi(self) -> float:
        p = self.params
        return 8.0 * self.m * math.pi * (p.g1 * p.g2) / p.omega**2

    @property
    def mu(self) -> float:
        return self.params.g_eff / self.params.omega

    @property
    def gate_time(self) -> float:
        return 2.0 * self.t_m

    def resonance_miss(self) -> float:
        """Relative deviation of g_eff/omega from 1/(4 sqrt(m))."""
        target = 1.0 / (4.0 * math.sqrt(self.m))
        return abs(self.mu - target) / target


def _hamiltonian(proto: CPhaseProtocol):
    p = proto.params
    if proto.frame == "lab":
        return build_lab_hamiltonian(p), {"kind": "lab", "params": p.as_record()}
    return build_interaction_hamiltonian(p), {"kind": "interaction", "params": p.as_record()}


def cphase_schedule(proto: CPhaseProtocol) -> PulseSchedule:
    """[evolve t_m, U_x(pi), evolve t_m, U_x(pi), U_z(-phi)], first item acts first."""
    p = proto.params
    N = p.N
    H, rec = _hamiltonian(proto)
    scale = max(abs(p.omega), abs(p.omega1), abs(p.omega2))
    meta = {"protocol": "cphase", "m": proto.m, "frame": proto.frame, "t_m": proto.t_m,
            "phi": proto.phi, "mu": proto.mu, "warnings": []}
    if proto.resonance_miss() > 0.1:
        msg = (f"g_eff/omega = {proto.mu:.4g} misses 1/(4 sqrt(m)) = "
               f"{1 / (4 * math.sqrt(proto.m)):.4g} by more than 10%")
        warnings.warn(msg, GateWarning, stacklevel=2)
        meta["warnings"].append(msg)

    def flip():
        if proto.flip_duration == 0:
            return InstantaneousUnitary(
                _with_mode(global_rotation("x", math.pi), N), "U_x(pi)",
                {"kind": "global_rotation", "params": {"axis": "x", "angle": math.pi, "N": N}},
            )
        rate = math.pi / proto.flip_duration
        Hf = H + rate * _with_mode(Operator(0.5 * np.kron(pauli("x").data, np.eye(2))
                                            + 0.5 * np.kron(np.eye(2), pauli("x").data)), N)
        return PulseSegment(proto.flip_duration, Hf, "flip_x(pi)",
                            {"kind": "flip", "params": {"base": rec, "rate": rate}},
                            max(scale, rate))

    items = [
        PulseSegment(proto.t_m, H, "free", rec, scale),
        flip(),
        PulseSegment(proto.t_m, H, "free", rec, scale),
        flip(),
        InstantaneousUnitary(
            _with_mode(global_rotation("z", -proto.phi), N), "U_z(-phi)",
            {"kind": "global_rotation", "params": {"axis": "z", "angle": -proto.phi, "N": N}},
        ),
    ]
    return PulseSchedule(tuple(items), meta)


def _vacuum_block(U: np.ndarray, N: int) -> np.ndarray:
    """<basis, vac| U |basis, vac> as a 4x4 matrix over the qubit basis."""
    return U.reshape(4, N, 4, N)[:, 0, :, 0]


def diagonal_phases(U: np.ndarray, N: int) -> np.ndarray:
    """Phases of <b,0|U|b,0> for b in 00, 10, 01, 11 (oscillator vacuum)."""
    return np.angle(np.diag(_vacuum_block(U, N)))


def conditional_phase(U: np.ndarray, N: int) -> float:
    """Gauge-fixed two-qubit phase arg(11) - arg(10) - arg(01) + arg(00) in (-pi, pi].

    For exp(i chi sz sz) this returns 4 chi (mod 2 pi).
    """
    p = diagonal_phases(U, N)
    return float(np.angle(np.exp(1j * (p[3] - p[1] - p[2] + p[0]))))


# ---------------------------------------------------------------------------
# SUPCODE


@dataclass(frozen=True)
class SupcodePulse:
    target_angle: float
    axis: str
    Omega: float
    segments: tuple
    drive_signs: tuple
    order_cancelled: int = 2
    residual: float = 0.0
    winding: int = 0

    def __post_init__(self):
        if len(self.segments) != 5 or any(s < 0 for s in self.segments):
            raise ValueError("SUPCODE pulse needs five non-negative durations")

    @property
    def total_duration(self) -> float:
        return float(sum(self.segments))

    @property
    def tau0_reference(self) -> float:
        """(2 + theta / 2 pi) t0 with t0 = 1 / (2 Omega)."""
        return (2.0 + self.target_angle / TWO_PI) / (2.0 * self.Omega)

    @property
    def drive_angles(self) -> tuple:
        return tuple(TWO_PI * self.Omega * s * d for s, d in zip(self.segments, self.drive_signs))

    def hamiltonians(self, delta: float = 0.0):
        """Piecewise qubit Hamiltonians (rad/s) for static detuning ``delta`` in Hz."""
        ax = self.axis
        out = []
        for d in self.drive_signs:
            if d == 0:
                out.append(single_qubit_drive_hamiltonian(delta, 0.0, ax))
            else:
                out.append(single_qubit_drive_hamiltonian(delta, self.Omega,
                                                          ax if d > 0 else "-" + ax))
        return out

    def schedule(self, delta: float = 0.0) -> PulseSchedule:
        items = []
        for k, (tau, H, d) in enumerate(zip(self.segments, self.hamiltonians(delta),
                                            self.drive_signs)):
            axis = self.axis if d >= 0 else "-" + self.axis
            rec = {"kind": "qubit_drive",
                   "params": {"delta": delta, "Omega": self.Omega if d else 0.0, "axis": axis}}
            items.append(PulseSegment(tau, H, f"piece{k + 1}", rec,
                                      TWO_PI * max(self.Omega, abs(delta))))
        return PulseSchedule(tuple(items), {"protocol": "supcode",
                                            "target_angle": self.target_angle})


def _spin(axis: str) -> np.ndarray:
    return {"x": _SX, "y": _SY}[axis]


def supcode_propagator(pulse: SupcodePulse, delta: float) -> np.ndarray:
    """Composite qubit propagator at static detuning ``delta`` (Hz)."""
    U = np.eye(2, dtype=complex)
    for tau, H in zip(pulse.segments, pulse.hamiltonians(delta)):
        U = expm(-1j * H.data * tau) @ U
    return U


def rotation_infidelity(U: np.ndarray, target: np.ndarray, average: bool = True) -> float:
    """1 - F for two-level unitaries, free of cancellation at tiny errors.

    With W = target^dag U = e^{ia}(w0 I - i w.sigma), 1 - |tr W / 2|^2 = |w|^2,
    which is summed directly from tr(W sigma_k).  ``average`` converts to the
    average gate infidelity (2/3 of the entanglement infidelity).
    """
    W = target.conj().T @ U
    e = sum(abs(np.trace(W @ pauli(ax).data) / 2.0) ** 2 for ax in "xyz")
    return float((2.0 / 3.0) * e if average else e)


def _series_segment(H0: np.ndarray, V: np.ndarray, t: float, order: int):
    """Taylor coefficients in delta of exp(-i (H0 + delta V) t) via a block-Toeplitz exponential."""
    d = H0.shape[0]
    M = np.zeros(((order + 1) * d, (order + 1) * d), dtype=complex)
    for i in range(order + 1):
        M[i * d:(i + 1) * d, i * d:(i + 1) * d] = -1j * H0 * t
        if i < order:
            M[i * d:(i + 1) * d, (i + 1) * d:(i + 2) * d] = -1j * V * t
    E = expm(M)
    return [E[:d, j * d:(j + 1) * d] for j in range(order + 1)]


def _series(pieces, order: int):
    """Compose per-piece series; ``pieces`` lists (duration, drive_angle_signed)."""
    ser = [np.eye(2, dtype=complex)] + [np.zeros((2, 2), dtype=complex)] * order
    V = TWO_PI * _SZ
    for tau, sign in pieces:
        s = _series_segment(TWO_PI * sign * _SX, V, tau, order)
        ser = [sum(s[j] @ ser[n - j] for j in range(n + 1)) for n in range(order + 1)]
    return ser


def _pieces(t1, a, t3, b, t5):
    return [(t1, 0.0), (abs(a) / TWO_PI, math.copysign(1.0, a)), (t3, 0.0),
            (abs(b) / TWO_PI, math.copysign(1.0, b)), (t5, 0.0)]


@functools.lru_cache(maxsize=64)
def _solve_unit(theta: float, order: int = 2, starts: int = 24, seed: int = 0):
    """Five-piece sequence at Omega = 1 Hz; returns (t1, a, t3, b, t5, k, residual)."""
    target = expm(-1j * theta * _SX)
    best = None
    best_cost = math.inf
    for fix_last in (True, False):
        rng = np.random.default_rng(seed)
        for k in (0, 1, -1, 2):
            for _ in range(starts):
                def unpack(p, k=k, fix_last=fix_last):
                    if fix_last:
                        t1, t3, a = p
                        t5 = 0.0
                    else:
                        t1, t3, t5, a = p
                    return t1, a, t3, theta + TWO_PI * k - a, t5

                def residual(p, unpack=unpack):
                    ser = _series(_pieces(*unpack(p)), order)
                    out = []
                    for n in range(1, order + 1):
                        E = target.conj().T @ ser[n]
                        out += [E.real.ravel(), E.imag.ravel()]
                    return np.concatenate(out)

                nt = 2 if fix_last else 3
                p0 = np.r_[rng.uniform(0.0, 1.5, nt), rng.uniform(-4 * np.pi, 4 * np.pi)]
                lb = [0.0] * nt + [-6 * np.pi]
                ub = [3.0] * nt + [6 * np.pi]
                r = least_squares(residual, p0, bounds=(lb, ub), xtol=1e-15, ftol=1e-15,
                                  gtol=1e-15)
                best_cost = min(best_cost, r.cost)
                if r.cost < 1e-24:
                    t1, a, t3, b, t5 = unpack(r.x)
                    T = t1 + t3 + t5 + (abs(a) + abs(b)) / TWO_PI
                    if best is None or T < best[0] - 1e-9:
                        best = (T, (t1, a, t3, b, t5, k, math.sqrt(2 * r.cost)))
        if best is not None:
            return best[1]
    raise SynthesisError(
        f"no five-piece sequence found for theta = {theta}", residuals=math.sqrt(2 * best_cost)
    )


def supcode_five_piece(target_angle: float, axis: str = "x", Omega: float = 1e6) -> SupcodePulse:
    """Free-drive-free-drive-free sequence cancelling detuning to second order.

    ``Omega`` is in Hz.  Drive pieces may run along +axis or -axis; the sign
    is stored in ``drive_signs``.  Among seeded multistart solutions the
    shortest total duration is kept (final free piece pinned to zero first).
    """
    if Omega <= 0:
        raise ValueError("Omega must be positive")
    if axis not in ("x", "y"):
        raise ValueError("axis must be x or y")
    theta = float(target_angle)
    t1, a, t3, b, t5, k, res = _solve_unit(round(theta, 15))
    seg = (t1 / Omega, abs(a) / (TWO_PI * Omega), t3 / Omega, abs(b) / (TWO_PI * Omega),
           t5 / Omega)
    signs = (0, int(math.copysign(1, a)), 0, int(math.copysign(1, b)), 0)
    pulse = SupcodePulse(theta, axis, Omega, tuple(float(s) for s in seg), signs, 2, res, k)
    U0 = supcode_propagator(pulse, 0.0)
    target = expm(-1j * theta * _spin(axis))
    W = target.conj().T @ U0
    dist = np.linalg.norm(W - (np.trace(W) / 2) * np.eye(2))
    if dist > 1e-9:
        raise SynthesisError(f"on-resonance composite misses the target by {dist:.2e}",
                             residuals=dist)
    return pulse


def supcode_slope_check(pulse: SupcodePulse, ratios=(1e-3, 3e-3, 1e-2)):
    """Log-log slope and 6th-order coefficient of infidelity vs delta / Omega."""
    target = expm(-1j * pulse.target_angle * _spin(pulse.axis))
    xs = np.asarray(ratios, dtype=float)
    ys = np.array([rotation_infidelity(supcode_propagator(pulse, r * pulse.Omega), target)
                   for r in xs])
    slope, icpt = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope), float(np.exp(icpt)), ys


# ---------------------------------------------------------------------------
# Closed-form error models


@dataclass(frozen=True)
class NoiseParams:
    delta_S: float = 0.0
    delta_g: float = 0.0
    n0: float = REF_N0

    def __post_init__(self):
        if self.n0 < 0:
            raise ValueError("n0 must be >= 0")

    @property
    def delta(self) -> float:
        return self.delta_S + self.delta_g


def predicted_errors(kind: str, *, g: float | None = None, n_bar: float = 0.0,
                     Omega: float | None = None, n0: float = REF_N0,
                     Q: float | None = None, Gamma: float = 0.0, omega: float | None = None,
                     mu: float | None = None, alpha_kappa: float = REF_ALPHA_KAPPA,
                     alpha_gamma: float | None = None,
                     coefficient: float = SUPCODE_COEFFICIENT) -> float:
    """Closed-form infidelity estimates.

    ``single``: coefficient * (2 g (sqrt(n_bar) + n0) / Omega)^6 with g and
    Omega in the same units.  ``cphase``: alpha_kappa n_bar / Q +
    alpha_gamma Gamma / omega, where alpha_gamma defaults to 0.2 / mu^2.
    """
    if kind == "single":
        if g is None or Omega is None:
            raise ValueError("single-qubit model needs g and Omega")
        if min(g, Omega, n_bar, n0) < 0:
            raise ValueError("inputs must be non-negative")
        return coefficient * (2.0 * g * (math.sqrt(n_bar) + n0) / Omega) ** 6
    if kind == "cphase":
        total = 0.0
        if n_bar and Q:
            total += alpha_kappa * n_bar / Q
        if Gamma:
            if omega is None:
                raise ValueError("dephasing term needs omega")
            if alpha_gamma is None:
                if mu is None:
                    raise ValueError("dephasing term needs mu or alpha_gamma")
                alpha_gamma = REF_ALPHA_GAMMA_MU2 / mu**2
            total += alpha_gamma * Gamma / omega
        return total
    raise ValueError(f"unknown error model {kind!r}")
