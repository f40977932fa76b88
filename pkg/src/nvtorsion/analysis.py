"""Parameter sweeps, least-squares fits and result tables."""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import least_squares

from . import nvphysics as nv
from .dynamics import (
    LindbladModel,
    SystemParams,
    default_truncation,
    evolve_lindblad,
    spin_oscillator_drive_hamiltonian,
)
from .linalg import (
    DensityMatrix,
    average_gate_fidelity,
    expm,
    thermal_populations,
    thermal_state,
)
from .protocols import (
    REF_N0,
    SUPCODE_COEFFICIENT,
    CPhaseProtocol,
    SupcodePulse,
    cphase_schedule,
    predicted_errors,
    rotation_infidelity,
    supcode_five_piece,
    supcode_propagator,
)

TWO_PI = 2.0 * math.pi

# Fig. 2 anchor: B = 7 mT, omega = 2 pi x 0.1 MHz, long/short axes 300/200 nm
FIG2_B = 7e-3
FIG2_OMEGA = TWO_PI * 1e5
FIG2_LENGTH = 300e-9
FIG2_RATIO = 0.25
# Fig. 3 anchor: omega = 2 pi x 0.1 MHz at L = 150 nm
FIG3_ANCHOR = (150e-9, TWO_PI * 1e5)
# Fig. 5 and Fig. 6 settings
FIG5_OMEGA = TWO_PI * 1e5
FIG5_RABI_HZ = 1e6
FIG6_OMEGA = TWO_PI * 1e6


class FitError(ValueError):
    pass


# name -> (reference value, tolerance, mode); mode "rel", "abs", "factor", "min" or "range"
REFERENCE_TARGETS = {
    "alpha_kappa": (4.0, 0.3, "rel"),
    "alpha_gamma_mu2": (0.2, 0.3, "rel"),
    "n0": (REF_N0, 0.5, "abs"),
    "supcode_exponent": (6.0, 0.1, "abs"),
    "supcode_coefficient": (SUPCODE_COEFFICIENT, 1.5, "factor"),
    "omega_slope": (-6.0, 0.2, "abs"),
    "fig2_max_ratio": (0.25, 1e-12, "abs"),
    "headline_xi": (0.003, (0.002, 0.0045), "range"),
}


def compare(name: str, value: float, target: tuple | None = None) -> dict:
    """Row (quantity, reference value, simulated value, tolerance, pass)."""
    ref, tol, mode = target or REFERENCE_TARGETS[name]
    if mode == "rel":
        ok = abs(value - ref) <= tol * abs(ref)
        tol_s = f"+/-{tol * 100:g}%"
    elif mode == "abs":
        ok = abs(value - ref) <= tol
        tol_s = f"+/-{tol:g}"
    elif mode == "factor":
        ok = ref / tol <= value <= ref * tol
        tol_s = f"x{tol:g}"
    elif mode == "min":
        ok = value > ref
        tol_s = f"> {ref:g}"
    elif mode == "range":
        lo, hi = tol
        ok = lo <= value <= hi
        tol_s = f"[{lo:g}, {hi:g}]"
    else:
        raise ValueError(mode)
    return {"quantity": name, "reference": ref, "simulated": float(value),
            "tolerance": tol_s, "pass": bool(ok)}


# ---------------------------------------------------------------------------
# Data containers


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    grid: tuple
    fixed: Mapping = field(default_factory=dict)
    protocol: str = ""
    observable: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0:
            raise ValueError("sweep grid is empty")
        d = np.diff(g)
        if g.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep grid must be strictly monotone")
        object.__setattr__(self, "grid", tuple(float(x) for x in g))


@dataclass
class FitResult:
    model: str
    coefficients: dict
    stderr: dict
    r2: float
    residuals: np.ndarray
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if set(self.coefficients) != set(self.stderr):
            raise ValueError("coefficients and standard errors must match")
        self.r2 = float(min(1.0, max(0.0, self.r2)))

    def __getitem__(self, key):
        return self.coefficients[key]

    def as_dict(self) -> dict:
        return {"model": self.model, "coefficients": dict(self.coefficients),
                "stderr": dict(self.stderr), "r2": self.r2,
                "residuals": [float(r) for r in self.residuals], "flags": list(self.flags)}


@dataclass
class Table:
    """Column-oriented result table with units per column."""

    columns: dict
    units: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("columns have unequal lengths")
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}

    def __getitem__(self, key):
        return self.columns[key]

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def header(self) -> list[str]:
        return [f"{k} [{self.units.get(k, '1')}]" for k in self.columns]

    def to_csv(self) -> str:
        lines = [",".join(self.header())]
        cols = list(self.columns.values())
        for i in range(len(self)):
            lines.append(",".join(_fmt(c[i]) for c in cols))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path


def _fmt(x) -> str:
    if isinstance(x, (str, np.str_)):
        return str(x)
    return f"{float(x):.16e}"


# ---------------------------------------------------------------------------
# Fits


def _check_xy(xs, ys):
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("xs and ys must be 1-d arrays of equal length")
    if x.size < 3:
        raise FitError("need at least 3 points")
    if np.ptp(x) == 0:
        raise FitError("degenerate grid: all x equal")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("non-finite data")
    return x, y


def _ols(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(x.size - 2, 1)
    s2 = float(res @ res) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(res @ res) / ss_tot if ss_tot > 0 else 1.0
    return coef, np.sqrt(np.diag(cov)), r2, res


def fit_linear(xs, ys) -> FitResult:
    """Ordinary least squares y = slope x + intercept."""
    x, y = _check_xy(xs, ys)
    coef, se, r2, res = _ols(x, y)
    return FitResult("linear", {"slope": float(coef[0]), "intercept": float(coef[1])},
                     {"slope": float(se[0]), "intercept": float(se[1])}, r2, res)


def fit_power_law(xs, ys) -> FitResult:
    """OLS on (log x, log y): y = coefficient x^exponent."""
    x, y = _check_xy(xs, ys)
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("power-law fit needs positive data")
    coef, se, r2, res = _ols(np.log(x), np.log(y))
    c = math.exp(coef[1])
    return FitResult("power_law", {"exponent": float(coef[0]), "coefficient": c},
                     {"exponent": float(se[0]), "coefficient": c * float(se[1])}, r2, res)


# ---------------------------------------------------------------------------
# Couplings (Figs. 2 and 3)


def coupling_sweep_angle(thetas=None, B: float = FIG2_B, omega: float = FIG2_OMEGA,
                         geometry: nv.NanodiamondGeometry | None = None,
                         consts: nv.SpinConstants = nv.SpinConstants(),
                         angle_sum: float = nv.DEFAULT_ANGLE_SUM,
                         calibrate_to: float | None = FIG2_RATIO) -> Table:
    """g_eff / omega against the NV-1 angle.

    With ``calibrate_to`` set, the curve is rescaled by one overall factor so
    that its maximum over theta equals that value; the factor is stored in
    ``meta['scale']``.
    """
    if thetas is None:
        thetas = np.linspace(0.0, angle_sum, 182)
    thetas = np.asarray(SweepSpec("theta", tuple(thetas)).grid)
    geometry = geometry or nv.NanodiamondGeometry.from_length(FIG2_LENGTH)
    I = nv.moment_of_inertia(geometry)
    rows = []
    g1s, g2s = [], []
    for th in thetas:
        pc = nv.pair_couplings(nv.NVPair(float(th), angle_sum), B, omega, I, consts)
        g1s.append(pc.g1)
        g2s.append(pc.g2)
        rows.append(pc.g_eff / omega)
    raw = np.array(rows)
    scale = 1.0
    theta_star, peak = None, None
    if calibrate_to is not None:
        theta_star, g_star = nv.max_pair_coupling(B, omega, I, consts, angle_sum)
        peak = g_star / omega
        if peak <= 0:
            raise ValueError("coupling vanishes everywhere; cannot calibrate")
        scale = calibrate_to / peak
    return Table(
        {"theta": thetas, "ratio": raw * scale, "raw_ratio": raw,
         "g1": np.array(g1s), "g2": np.array(g2s)},
        {"theta": "rad", "ratio": "1", "raw_ratio": "1", "g1": "rad/s", "g2": "rad/s"},
        {"B": B, "omega": omega, "moment_of_inertia": I, "scale": scale,
         "theta_max": theta_star, "raw_max_ratio": peak,
         "max_ratio": None if peak is None else peak * scale},
    )


def anchored_omega(L: float, anchor=FIG3_ANCHOR, exponent: float = 1.0) -> float:
    """Torsional frequency scaled as (L_anchor / L)^exponent from the anchor."""
    L0, w0 = anchor
    return w0 * (L0 / L) ** exponent


def coupling_sweep_size(L_grid, B_grid, aspect: float = 1.5, anchor=FIG3_ANCHOR,
                        exponent: float = 1.0, consts: nv.SpinConstants = nv.SpinConstants(),
                        angle_sum: float = nv.DEFAULT_ANGLE_SUM) -> Table:
    """Maximum g_eff over theta for each (L, B); L is the full long-axis length."""
    Ls = SweepSpec("L", tuple(L_grid)).grid
    Bs = SweepSpec("B", tuple(B_grid)).grid
    out = {"L": [], "B": [], "omega": [], "theta_max": [], "g": []}
    for L in Ls:
        geom = nv.NanodiamondGeometry.from_length(L, aspect)
        I = nv.moment_of_inertia(geom)
        w = anchored_omega(L, anchor, exponent)
        for B in Bs:
            th, g = nv.max_pair_coupling(B, w, I, consts, angle_sum)
            for k, v in zip(out, (L, B, w, th, g)):
                out[k].append(v)
    return Table(out, {"L": "m", "B": "T", "omega": "rad/s", "theta_max": "rad", "g": "rad/s"},
                 {"aspect": aspect, "anchor": list(anchor), "exponent": exponent})


# ---------------------------------------------------------------------------
# Single-qubit gates under the torsional coupling (Fig. 5)


def supcode_scaling(pulse: SupcodePulse | None = None, ratios=None) -> FitResult:
    """Power-law fit of the static-detuning infidelity against delta / Omega."""
    pulse = pulse or supcode_five_piece(math.pi, "x", FIG5_RABI_HZ)
    if ratios is None:
        ratios = np.geomspace(1e-3, 3e-2, 7)
    target = expm(-1j * pulse.target_angle * _spin_axis(pulse.axis))
    ys = [rotation_infidelity(supcode_propagator(pulse, r * pulse.Omega), target)
          for r in ratios]
    return fit_power_law(ratios, ys)


def _spin_axis(axis):
    return {"x": np.array([[0, 1], [1, 0]]) * 0.5, "y": np.array([[0, -1j], [1j, 0]]) * 0.5}[axis]


def supcode_oscillator_infidelity(pulse: SupcodePulse, omega: float, g: float, n_bar: float,
                                  N: int | None = None, delta: float = 0.0) -> float:
    """Average gate infidelity of a SUPCODE pulse with the qubit coupled to the mode.

    The coupling ``g sz (a + a^dag)`` and the mode Hamiltonian act during all
    five pieces; the mode starts thermal and is traced out.
    """
    if N is None:
        N = default_truncation(n_bar, g / omega)
    U = np.eye(2 * N, dtype=complex)
    for tau, d in zip(pulse.segments, pulse.drive_signs):
        axis = pulse.axis if d >= 0 else "-" + pulse.axis
        H = spin_oscillator_drive_hamiltonian(pulse.Omega if d else 0.0, axis, omega, g, N,
                                              delta)
        U = expm(-1j * H.data * tau) @ U
    target = expm(-1j * pulse.target_angle * _spin_axis(pulse.axis))
    pops = thermal_populations(n_bar, N) if n_bar > 0 else np.eye(N)[0]
    return 1.0 - average_gate_fidelity(U, target, pops)


def fit_n0(n_bars, xis, g: float, Omega_hz: float,
           coefficient: float = SUPCODE_COEFFICIENT) -> FitResult:
    """Least squares on log xi for xi = c (2 g (sqrt(n) + n0) / (2 pi Omega))^6."""
    n = np.asarray(n_bars, dtype=float)
    y = np.log(np.asarray(xis, dtype=float))
    k = 2.0 * g / (TWO_PI * Omega_hz)

    def model(p):
        return math.log(coefficient) + 6.0 * np.log(k * (np.sqrt(n) + p[0]))

    # closed-form start from the n = 0 point or the mean offset
    start = float(np.mean((np.exp(y) / coefficient) ** (1 / 6) / k - np.sqrt(n)))
    r = least_squares(lambda p: model(p) - y, [max(start, 1e-3)], bounds=([0.0], [np.inf]))
    res = r.fun
    J = r.jac
    dof = max(n.size - 1, 1)
    s2 = float(res @ res) / dof
    jtj = float((J.T @ J).item())
    se = math.sqrt(s2 / jtj) if jtj > 0 else math.inf
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(res @ res) / ss_tot if ss_tot > 0 else 1.0
    return FitResult("eq14_n0", {"n0": float(r.x[0])}, {"n0": se}, r2, res)


def _sq_point(args):
    var, x, omega, g, Omega_hz, n_bar, pulse, delta_std, samples, seed = args
    if var == "n_bar":
        n_bar = x
    else:
        Omega_hz = x
        pulse = supcode_five_piece(pulse.target_angle, pulse.axis, Omega_hz)
    if n_bar > 20:
        xi = predicted_errors("single", g=g / TWO_PI, n_bar=n_bar, Omega=Omega_hz)
        return xi, "semiclassical"
    if delta_std > 0:
        rng = np.random.default_rng(seed)
        ds = rng.normal(0.0, delta_std, samples)
        xi = float(np.mean([supcode_oscillator_infidelity(pulse, omega, g, n_bar, delta=d)
                            for d in ds]))
    else:
        xi = supcode_oscillator_infidelity(pulse, omega, g, n_bar)
    return xi, "quantum"


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def single_qubit_error_sweep(var: str, grid, omega: float = FIG5_OMEGA,
                             g: float | None = None, Omega_hz: float = FIG5_RABI_HZ,
                             n_bar: float = 5.0, delta_S_std: float = 0.0,
                             samples: int = 64, seed: int = 0, jobs: int = 1):
    """Infidelity of the SUPCODE pi pulse along ``n_bar`` or ``Omega`` (Hz).

    Returns (table, fit).  For ``n_bar`` the fit is the closed-form sixth-order model with free
    n0 over points with n_bar <= 20; for ``Omega`` it is a power law.
    """
    if var not in ("n_bar", "Omega"):
        raise ValueError("var must be 'n_bar' or 'Omega'")
    spec = SweepSpec(var, tuple(grid), protocol="supcode", observable="xi")
    g = omega / 4.0 if g is None else g
    pulse = supcode_five_piece(math.pi, "x", Omega_hz)
    tasks = [(var, x, omega, g, Omega_hz, n_bar, pulse, delta_S_std, samples, seed)
             for x in spec.grid]
    results = _map(_sq_point, tasks, jobs)
    xs = np.array(spec.grid)
    xis = np.array([r[0] for r in results])
    branch = np.array([r[1] for r in results])
    table = Table({var: xs, "xi": xis, "branch": branch},
                  {var: "1" if var == "n_bar" else "Hz", "xi": "1", "branch": "1"},
                  {"omega": omega, "g": g, "Omega_hz": Omega_hz, "n_bar": n_bar,
                   "pulse_segments": list(pulse.segments),
                   "pulse_signs": list(pulse.drive_signs)})
    quantum = branch == "quantum"
    if var == "n_bar":
        fit = fit_n0(xs[quantum], xis[quantum], g, Omega_hz)
    else:
        fit = fit_power_law(xs[quantum], xis[quantum])
    return table, fit


# ---------------------------------------------------------------------------
# Two-qubit gate errors (Fig. 6)


def bell_fidelity_observable(N: int) -> Callable[[np.ndarray], float]:
    """F(rho) = <Phi| tr_mode rho |Phi> with Phi = (|00> - |11>)/sqrt 2."""
    tar = np.zeros(4)
    tar[0], tar[3] = 1 / math.sqrt(2), -1 / math.sqrt(2)

    def F(rho):
        r = np.trace(rho.reshape(4, N, 4, N), axis1=1, axis2=3)
        return float(np.real(tar @ r @ tar))

    return F


def gate_m(mu: float) -> int:
    """Loop number m with mu = 1 / (4 sqrt(m))."""
    return max(1, int(round(1.0 / (16.0 * mu * mu))))


def cphase_error(mu: float, kappa_over_omega: float = 0.0, n_bar: float = 0.0,
                 gamma_over_omega: float = 0.0, omega: float = FIG6_OMEGA,
                 m: int | None = None, N: int | None = None,
                 samples: int = 40) -> dict:
    """Run the echoed gate on the Bell input and return xi from F_max and F_end."""
    m = gate_m(mu) if m is None else m
    N = default_truncation(n_bar, mu) if N is None else N
    g = mu * omega
    params = SystemParams(0.0, 0.0, g, g, omega, N)
    proto = CPhaseProtocol(m, params, frame="interaction")
    sched = cphase_schedule(proto)
    bell = np.zeros(4)
    bell[0] = bell[3] = 1 / math.sqrt(2)
    mode = thermal_state(n_bar, N).data if n_bar > 0 else np.diag(np.eye(N)[0])
    rho0 = DensityMatrix(np.kron(np.outer(bell, bell), mode), (2, 2, N))
    model = LindbladModel(kappa_over_omega * omega, n_bar, gamma_over_omega * omega)
    res = evolve_lindblad(sched, model, rho0, sample_every=sched.total_duration / samples,
                          observables={"F": bell_fidelity_observable(N)},
                          frame="interaction")
    F = res.series("F")
    return {"xi": 1.0 - float(F.max()), "xi_end": 1.0 - float(F[-1]), "m": m, "N": N,
            "diagnostics": res.diagnostics}


def _cp_point(args):
    return cphase_error(**args)


def cphase_error_sweep(channel: str, grid, mu: float = 0.25, n_bar: float | None = None,
                       kappa_over_omega: float | None = None, omega: float = FIG6_OMEGA,
                       m: int | None = None, N: int | None = None, jobs: int = 1):
    """Sweep kappa/omega (``rethermalization``) or Gamma/omega (``dephasing``).

    Returns (table, fit) where the fit is linear in x = n_bar/Q or Gamma/omega;
    the fitted slope is alpha_kappa or alpha_Gamma.
    """
    spec = SweepSpec(channel, tuple(grid), protocol="cphase", observable="xi")
    if channel == "rethermalization":
        n_bar = 2.0 if n_bar is None else n_bar
        tasks = [dict(mu=mu, kappa_over_omega=k, n_bar=n_bar, omega=omega, m=m, N=N)
                 for k in spec.grid]
        xs = n_bar * np.asarray(spec.grid)
        xname = "n_bar_over_Q"
    elif channel == "dephasing":
        n_bar = 0.01 if n_bar is None else n_bar
        k = 1e-6 if kappa_over_omega is None else kappa_over_omega
        tasks = [dict(mu=mu, kappa_over_omega=k, n_bar=n_bar, gamma_over_omega=gm,
                      omega=omega, m=m, N=N) for gm in spec.grid]
        xs = np.asarray(spec.grid)
        xname = "gamma_over_omega"
    else:
        raise ValueError("channel must be 'rethermalization' or 'dephasing'")
    out = _map(_cp_point, tasks, jobs)
    xi = np.array([o["xi"] for o in out])
    table = Table({channel + "_grid": np.asarray(spec.grid), xname: xs, "xi": xi,
                   "xi_end": np.array([o["xi_end"] for o in out])},
                  {channel + "_grid": "1", xname: "1", "xi": "1", "xi_end": "1"},
                  {"channel": channel, "mu": mu, "n_bar": n_bar, "omega": omega,
                   "m": out[0]["m"], "N": out[0]["N"],
                   "max_trace_drift": max(o["diagnostics"]["max_trace_drift"] for o in out),
                   "min_eigenvalue": min(o["diagnostics"]["min_eigenvalue"] for o in out)})
    fit = fit_linear(xs, xi)
    if np.max(xi) > 0.1:
        fit.flags.append("low-confidence: errors beyond the linear regime")
    return table, fit


def additivity_check(kappa_over_omega: float = 1e-5, n_bar: float = 2.0,
                     gamma_over_omega: float = 1e-4, mu: float = 0.25) -> dict:
    """Compare xi(kappa and Gamma) with xi(kappa) + xi(Gamma) at one point.

    Each error is taken relative to the noiseless run so truncation and
    integrator offsets cancel.
    """
    base = cphase_error(mu, 0.0, n_bar, 0.0)["xi"]
    k_only = cphase_error(mu, kappa_over_omega, n_bar, 0.0)["xi"] - base
    g_only = cphase_error(mu, 0.0, n_bar, gamma_over_omega)["xi"] - base
    both = cphase_error(mu, kappa_over_omega, n_bar, gamma_over_omega)["xi"] - base
    gap = abs(both - (k_only + g_only))
    return {"xi_kappa": k_only, "xi_gamma": g_only, "xi_combined": both,
            "baseline": base, "gap": gap, "pass": gap < 0.2 * abs(both)}


# ---------------------------------------------------------------------------
# Output helpers


def write_summary(path, summary: Mapping) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, FitResult):
        return obj.as_dict()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def svg_line_plot(series: Mapping[str, tuple], path=None, xlabel: str = "x",
                  ylabel: str = "y", logx: bool = False, logy: bool = False,
                  width: int = 480, height: int = 320) -> str:
    """Minimal static SVG line plot; ``series`` maps label -> (xs, ys)."""
    pad = 50
    colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"]
    tx = np.log10 if logx else (lambda v: np.asarray(v, dtype=float))
    ty = np.log10 if logy else (lambda v: np.asarray(v, dtype=float))
    allx = np.concatenate([tx(np.asarray(s[0], dtype=float)) for s in series.values()])
    ally = np.concatenate([ty(np.asarray(s[1], dtype=float)) for s in series.values()])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
             f'height="{height - 2 * pad}" fill="none" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
             f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" '
             f'text-anchor="middle">{ylabel}</text>']
    for i, (label, (xs, ys)) in enumerate(series.items()):
        c = colors[i % len(colors)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}"
                       for a, b in zip(tx(np.asarray(xs, float)), ty(np.asarray(ys, float))))
        parts.append(f'<polyline fill="none" stroke="{c}" points="{pts}"/>')
        parts.append(f'<text x="{pad + 5}" y="{pad + 15 + 15 * i}" fill="{c}">{label}</text>')
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    if path is not None:
        Path(path).write_text(svg)
    return svg
