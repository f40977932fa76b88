"""NV-center level structure and spin-torsion coupling.

All frequencies are angular (rad/s).  The NV ground state is modelled as
``H = D Sz^2 + gamma_e B (cos(theta) Sz + sin(theta) Sx)`` and the qubit is
the pair of levels adiabatically connected to ``|ms=0>`` and ``|ms=-1>``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect, minimize_scalar

HBAR = 1.054571817e-34  # J s
MU0 = 1.25663706212e-6  # T m / A
K_B = 1.380649e-23  # J / K
TWO_PI = 2.0 * math.pi

DEFAULT_ANGLE_SUM = 1.81  # rad
DEFAULT_DENSITY = 3500.0  # kg / m^3

# spin-1 matrices in the basis (ms=+1, ms=0, ms=-1)
_SZ = np.diag([1.0, 0.0, -1.0])
_SX = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]) / math.sqrt(2.0)
_MS0, _MSM1 = 1, 2

# largest theta increment used when following eigenvectors from theta = 0
_TRACK_STEP = 0.01


class BranchTrackingWarning(UserWarning):
    """The field is close to the ground-state level anti-crossing."""


class NoSolutionError(ValueError):
    pass


@dataclass(frozen=True)
class SpinConstants:
    D: float = TWO_PI * 2.87e9  # rad/s
    gamma_e: float = TWO_PI * 28.0e9  # rad/s per tesla

    def __post_init__(self):
        if self.D <= 0 or self.gamma_e <= 0:
            raise ValueError("D and gamma_e must be positive")


@dataclass(frozen=True)
class NanodiamondGeometry:
    """Prolate spheroid with semi-axes a >= b = c (meters)."""

    semi_long: float
    semi_short: float
    mass_density: float = DEFAULT_DENSITY

    def __post_init__(self):
        if not self.semi_long >= self.semi_short > 0:
            raise ValueError("need semi_long >= semi_short > 0")
        if self.mass_density <= 0:
            raise ValueError("mass density must be positive")

    @classmethod
    def from_length(cls, L: float, aspect: float = 1.5,
                    mass_density: float = DEFAULT_DENSITY) -> "NanodiamondGeometry":
        """Geometry from the full long-axis length and long/short aspect ratio."""
        return cls(L / 2.0, L / (2.0 * aspect), mass_density)

    @property
    def mass(self) -> float:
        return self.mass_density * (4.0 / 3.0) * math.pi * self.semi_long * self.semi_short**2


@dataclass(frozen=True)
class NVPair:
    theta1: float
    angle_sum: float = DEFAULT_ANGLE_SUM
    spacing_d: float = 300e-9

    def __post_init__(self):
        if not 0.0 <= self.theta1 <= self.angle_sum:
            raise ValueError("need 0 <= theta1 <= angle_sum")
        if self.spacing_d <= 0:
            raise ValueError("spacing must be positive")

    @property
    def theta2(self) -> float:
        return self.angle_sum - self.theta1


@dataclass(frozen=True)
class TorsionalMode:
    omega: float
    Q: float
    moment_of_inertia: float
    n_bar: float | None = None
    temperature: float | None = None

    def __post_init__(self):
        if self.omega <= 0 or self.Q <= 0 or self.moment_of_inertia <= 0:
            raise ValueError("omega, Q and moment_of_inertia must be positive")
        if self.n_bar is None and self.temperature is None:
            object.__setattr__(self, "n_bar", 0.0)
        elif self.n_bar is None:
            object.__setattr__(self, "n_bar", thermal_occupation(self.omega, self.temperature))
        if self.n_bar < 0:
            raise ValueError("n_bar must be >= 0")

    @property
    def kappa(self) -> float:
        return self.omega / self.Q

    @property
    def zero_point_angle(self) -> float:
        return math.sqrt(HBAR / (2.0 * self.moment_of_inertia * self.omega))


def thermal_occupation(omega: float, temperature: float) -> float:
    if temperature <= 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega / (K_B * temperature))


def nv_hamiltonian(theta: float, B: float, consts: SpinConstants = SpinConstants()) -> np.ndarray:
    gb = consts.gamma_e * B
    return consts.D * _SZ @ _SZ + gb * (math.cos(theta) * _SZ + math.sin(theta) * _SX)


def _dH_dtheta(theta: float, B: float, consts: SpinConstants) -> np.ndarray:
    gb = consts.gamma_e * B
    return gb * (-math.sin(theta) * _SZ + math.cos(theta) * _SX)


def _check_branch(B: float, consts: SpinConstants) -> None:
    if abs(consts.gamma_e * B - consts.D) < 0.01 * consts.D:
        warnings.warn(
            f"gamma_e*B = {consts.gamma_e * B:.4e} rad/s is within 1% of D; "
            "branch tracking near the level anti-crossing is unreliable",
            BranchTrackingWarning,
            stacklevel=3,
        )


def _tracked_states(theta: float, B: float, consts: SpinConstants):
    """Eigenpairs of the ms=0 and ms=-1 branches at ``theta``.

    Eigenvectors are followed from theta = 0 in small steps, matching each
    step by maximal overlap with the previous one.
    """
    n = max(1, int(math.ceil(abs(theta) / _TRACK_STEP)))
    path = np.linspace(0.0, theta, n + 1)
    gb = consts.gamma_e * B
    Hs = (consts.D * (_SZ @ _SZ))[None] + gb * (
        np.cos(path)[:, None, None] * _SZ + np.sin(path)[:, None, None] * _SX
    )
    evals, evecs = np.linalg.eigh(Hs)
    # at theta = 0 the Hamiltonian is diagonal: pick columns by basis overlap
    prev = np.eye(3)[:, [_MS0, _MSM1]]
    idx = [int(np.argmax(np.abs(evecs[0][k, :]))) for k in (_MS0, _MSM1)]
    prev = evecs[0][:, idx]
    energies = evals[0][idx]
    for j in range(1, n + 1):
        ov = np.abs(prev.T.conj() @ evecs[j])
        idx = [int(np.argmax(ov[0])), int(np.argmax(ov[1]))]
        if idx[0] == idx[1]:
            order = np.argsort(-ov, axis=None)
            # fall back to a greedy assignment if both branches claim one vector
            used, idx = set(), [None, None]
            for flat in order:
                r, c = divmod(int(flat), 3)
                if idx[r] is None and c not in used:
                    idx[r] = c
                    used.add(c)
        vecs = evecs[j][:, idx]
        # fix the gauge so overlaps with the previous step stay positive
        phases = np.sum(prev.conj() * vecs, axis=0)
        vecs = vecs * np.exp(-1j * np.angle(phases))
        prev = vecs
        energies = evals[j][idx]
    return energies, prev


def energy_splitting(theta: float, B: float, consts: SpinConstants = SpinConstants()) -> float:
    """E(ms=-1) - E(ms=0) along the adiabatically connected branches (rad/s)."""
    if B < 0:
        raise ValueError("field magnitude must be >= 0")
    _check_branch(B, consts)
    energies, _ = _tracked_states(theta, B, consts)
    return float(energies[1] - energies[0])


def splitting_derivative(theta: float, B: float, consts: SpinConstants = SpinConstants()) -> float:
    """dE/dtheta from Hellmann-Feynman on the tracked branches (rad/s per rad)."""
    if B < 0:
        raise ValueError("field magnitude must be >= 0")
    _check_branch(B, consts)
    _, vecs = _tracked_states(theta, B, consts)
    dH = _dH_dtheta(theta, B, consts)
    d0 = np.vdot(vecs[:, 0], dH @ vecs[:, 0]).real
    d1 = np.vdot(vecs[:, 1], dH @ vecs[:, 1]).real
    return float(d1 - d0)


def splitting_second_derivative(theta: float, B: float,
                                consts: SpinConstants = SpinConstants(),
                                h: float = 1e-5) -> float:
    """Central difference of the Hellmann-Feynman slope."""
    return (splitting_derivative(theta + h, B, consts)
            - splitting_derivative(theta - h, B, consts)) / (2.0 * h)


def coupling_prefactor(omega: float, I: float) -> float:
    """sqrt(hbar / (8 I omega)), i.e. half the zero-point angle."""
    if omega <= 0 or I <= 0:
        raise ValueError("omega and I must be positive")
    return math.sqrt(HBAR / (8.0 * I * omega))


def coupling_strength(theta: float, B: float, omega: float, I: float,
                      consts: SpinConstants = SpinConstants(), sign: int = 1) -> float:
    """Spin-torsion coupling g (rad/s) for one NV at angle ``theta`` to the field."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign * coupling_prefactor(omega, I) * splitting_derivative(theta, B, consts)


@dataclass(frozen=True)
class PairCouplings:
    g1: float
    g2: float

    @property
    def g_eff(self) -> float:
        return math.sqrt(abs(self.g1 * self.g2))

    def __iter__(self):
        return iter((self.g1, self.g2, self.g_eff))


def pair_couplings(pair: NVPair, B: float, omega: float, I: float,
                   consts: SpinConstants = SpinConstants()) -> PairCouplings:
    """Couplings of both NVs; a body rotation raises theta1 and lowers theta2."""
    g1 = coupling_strength(pair.theta1, B, omega, I, consts, sign=1)
    g2 = coupling_strength(pair.theta2, B, omega, I, consts, sign=-1)
    return PairCouplings(g1, g2)


def moment_of_inertia(geom: NanodiamondGeometry) -> float:
    """Spheroid moment about a short axis through the center (kg m^2)."""
    return geom.mass * (geom.semi_long**2 + geom.semi_short**2) / 5.0


def resonant_ratio(m: int) -> float:
    return 1.0 / (4.0 * math.sqrt(m))


def solve_resonant_omega(m: int, pair: NVPair, B: float, I: float,
                         consts: SpinConstants = SpinConstants(),
                         bracket: tuple[float, float] = (TWO_PI * 1e2, TWO_PI * 1e8)) -> float:
    """Torsional frequency at which g_eff / omega = 1 / (4 sqrt(m))."""
    if int(m) != m or m < 1:
        raise ValueError("m must be a positive integer")
    target = resonant_ratio(int(m))
    # g_eff(omega) = slope * omega^(-1/2); the angle dependence is omega-free
    d1 = splitting_derivative(pair.theta1, B, consts)
    d2 = splitting_derivative(pair.theta2, B, consts)
    slope = math.sqrt(abs(d1 * d2) * HBAR / (8.0 * I))

    def f(log_w):
        w = math.exp(log_w)
        return slope * w ** -0.5 / w - target

    lo, hi = (math.log(b) for b in bracket)
    if f(lo) * f(hi) > 0:
        raise NoSolutionError(
            f"g_eff/omega never reaches {target:.4g} for omega in "
            f"[{bracket[0]:.3e}, {bracket[1]:.3e}] rad/s"
        )
    log_w = bisect(f, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=400)
    return math.exp(log_w)


def dipole_coupling_hz(d: float, consts: SpinConstants = SpinConstants()) -> float:
    """Magnetic dipole-dipole scale mu0 hbar gamma_e^2 / (4 pi d^3), in Hz."""
    J = MU0 * HBAR * consts.gamma_e**2 / (4.0 * math.pi * d**3)
    return J / TWO_PI


@dataclass
class RegimeReport:
    theta: float
    slope: float
    curvature: float
    delta_theta: float
    anharmonicity_ratio: float
    n_bar_limit: float
    anharmonic_ok: bool
    dipole_hz: float
    g_eff: float
    dipole_ok: bool
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.anharmonic_ok and self.dipole_ok

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["ok"] = self.ok
        return d


def regime_checks(pair: NVPair, B: float, mode: TorsionalMode,
                  consts: SpinConstants = SpinConstants(),
                  ratio_limit: float = 0.1) -> RegimeReport:
    """Anharmonicity of E(theta) over the thermal amplitude and dipole leakage.

    The anharmonicity ratio is |E'' dtheta / (2 E')| with
    dtheta = theta_zp * sqrt(2 n + 1), evaluated for NV-1.
    """
    th = pair.theta1
    slope = splitting_derivative(th, B, consts)
    curv = splitting_second_derivative(th, B, consts)
    zpa = mode.zero_point_angle
    dtheta = zpa * math.sqrt(2.0 * mode.n_bar + 1.0)
    notes = []
    if slope == 0.0:
        ratio = math.inf
        n_lim = 0.0
        notes.append("dE/dtheta vanishes: NV-1 does not couple at this angle")
    elif curv == 0.0:
        ratio = 0.0
        n_lim = math.inf
    else:
        ratio = abs(curv * dtheta / (2.0 * slope))
        dtheta_lim = 2.0 * ratio_limit * abs(slope / curv)
        n_lim = max(0.0, ((dtheta_lim / zpa) ** 2 - 1.0) / 2.0)
    g = pair_couplings(pair, B, mode.omega, mode.moment_of_inertia, consts).g_eff
    J_hz = dipole_coupling_hz(pair.spacing_d, consts)
    dipole_ok = TWO_PI * J_hz < g / 100.0
    return RegimeReport(
        theta=th, slope=slope, curvature=curv, delta_theta=dtheta,
        anharmonicity_ratio=ratio, n_bar_limit=n_lim,
        anharmonic_ok=ratio < ratio_limit,
        dipole_hz=J_hz, g_eff=g, dipole_ok=dipole_ok, notes=notes,
    )


def max_pair_coupling(B: float, omega: float, I: float,
                      consts: SpinConstants = SpinConstants(),
                      angle_sum: float = DEFAULT_ANGLE_SUM) -> tuple[float, float]:
    """(theta1*, g_eff*) maximizing g_eff over the NV-1 angle."""
    def neg(th):
        return -pair_couplings(NVPair(th, angle_sum), B, omega, I, consts).g_eff

    grid = np.linspace(0.0, angle_sum, 37)
    vals = [neg(t) for t in grid]
    j = int(np.argmin(vals))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    if res.fun <= vals[j]:
        return float(res.x), float(-res.fun)
    return float(grid[j]), float(-vals[j])
