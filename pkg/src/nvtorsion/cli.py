"""Scenario-driven command line interface.

Usage::

    nvtorsion simulate <scenario.toml> [--out DIR] [--jobs N] [--dry-run]
    nvtorsion report <summary.json> [<summary.json> ...] [--json PATH]

Every frequency or rate in a scenario carries a unit tag, ``"hz:<x>"``
(meaning 2 pi x rad/s) or ``"rad_s:<x>"``.  The default output directory can
be set through ``NVTORSION_OUT``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import analysis as an
from . import nvphysics as nv
from .dynamics import SystemParams, default_truncation
from .protocols import REF_N0, CPhaseProtocol, GateWarning, cphase_schedule

TWO_PI = 2.0 * math.pi
OUT_ENV = "NVTORSION_OUT"
DEFAULT_OUT = "nvtorsion-out"

EXIT_OK, EXIT_ERROR, EXIT_REGIME = 0, 1, 2

KINDS = ("coupling-angle", "coupling-size", "single-qubit", "cphase", "regime-check",
         "fit-report")


class ConfigError(Exception):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


# ---------------------------------------------------------------------------
# Schema.  Each field: (type, default); type is one of
# "freq" (unit-tagged rad/s), "float", "pos" (> 0), "nonneg" (>= 0), "int",
# "posint", "str", "list", "freqlist", "strlist".  A default of REQUIRED
# marks a mandatory key, None an optional one.

REQUIRED = object()

_COMMON = {
    "D": ("freq", TWO_PI * 2.87e9),
    "gamma_e": ("freq", TWO_PI * 28.0e9),
    "aspect": ("pos", 1.5),
    "angle_sum": ("pos", nv.DEFAULT_ANGLE_SUM),
    "density": ("pos", nv.DEFAULT_DENSITY),
    "n0": ("nonneg", REF_N0),
}

SCHEMA = {
    "coupling-angle": {
        "physics": {"B": ("nonneg", an.FIG2_B), "omega": ("freq", an.FIG2_OMEGA),
                    "length": ("pos", an.FIG2_LENGTH), "calibrate_to": ("pos", an.FIG2_RATIO)},
        "sweep": {"theta_min": ("nonneg", 0.0), "theta_max": ("nonneg", None),
                  "points": ("posint", 182)},
    },
    "coupling-size": {
        "physics": {"anchor_length": ("pos", an.FIG3_ANCHOR[0]),
                    "anchor_omega": ("freq", an.FIG3_ANCHOR[1]),
                    "omega_exponent": ("float", 1.0)},
        "sweep": {"L": ("list", REQUIRED), "B": ("list", REQUIRED)},
    },
    "single-qubit": {
        "physics": {"omega": ("freq", an.FIG5_OMEGA), "mu": ("pos", 0.25),
                    "Omega": ("freq", TWO_PI * an.FIG5_RABI_HZ), "n_bar": ("nonneg", 5.0),
                    "delta_S_std": ("freq", 0.0), "samples": ("posint", 64)},
        "sweep": {"variable": ("str", REQUIRED), "grid": ("list", REQUIRED)},
    },
    "cphase": {
        "physics": {"omega": ("freq", REQUIRED), "mu": ("pos", None), "m": ("posint", None),
                    "n_bar": ("nonneg", 0.0), "Q": ("pos", None), "Gamma": ("freq", 0.0),
                    "N": ("posint", None)},
        "sweep": {"channel": ("str", "none"), "grid": ("list", None),
                  "mu_values": ("list", None), "n_bar_values": ("list", None),
                  "kappa_over_omega": ("nonneg", None)},
    },
    "regime-check": {
        "physics": {"B": ("nonneg", REQUIRED), "omega": ("freq", REQUIRED),
                    "Q": ("pos", 1e11), "n_bar": ("nonneg", None),
                    "temperature": ("nonneg", None), "length": ("pos", an.FIG2_LENGTH),
                    "theta1": ("nonneg", None), "spacing_d": ("pos", 300e-9)},
        "sweep": {},
    },
    "fit-report": {
        "physics": {},
        "sweep": {"summaries": ("strlist", REQUIRED)},
    },
}

_OUTPUT = {"dir": ("str", None), "formats": ("strlist", ["csv", "json"])}
_TOP = {"kind", "seed", "physics", "sweep", "output"}


@dataclass
class Scenario:
    kind: str
    physics: dict
    sweep: dict
    output: dict
    seed: int = 0
    source: str | None = None

    def key(self):
        return (self.kind, self.physics, self.sweep, self.output, self.seed)

    def __eq__(self, other):
        return isinstance(other, Scenario) and self.key() == other.key()


def parse_unit(value, where: str) -> float:
    """Parse ``"hz:x"`` or ``"rad_s:x"`` into rad/s."""
    if not isinstance(value, str):
        raise ValueError(f"{where}: frequency needs a unit tag such as \"hz:{value}\" "
                         f"or \"rad_s:{value}\"")
    tag, sep, num = value.partition(":")
    if not sep or tag not in ("hz", "rad_s"):
        raise ValueError(f"{where}: unknown unit tag in {value!r} (use hz: or rad_s:)")
    try:
        x = float(num)
    except ValueError:
        raise ValueError(f"{where}: {num!r} is not a number") from None
    return TWO_PI * x if tag == "hz" else x


def _coerce(kind: str, value, where: str):
    if kind == "freq":
        return parse_unit(value, where)
    if kind == "freqlist":
        if not isinstance(value, list):
            raise ValueError(f"{where}: expected a list")
        return [parse_unit(v, f"{where}[{i}]") for i, v in enumerate(value)]
    if kind == "str":
        if not isinstance(value, str):
            raise ValueError(f"{where}: expected a string")
        return value
    if kind == "strlist":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ValueError(f"{where}: expected a list of strings")
        return list(value)
    if kind == "list":
        if not isinstance(value, list) or not value:
            raise ValueError(f"{where}: expected a non-empty list")
        return list(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{where}: expected a number, got {value!r}")
    if kind in ("int", "posint"):
        if int(value) != value:
            raise ValueError(f"{where}: expected an integer")
        value = int(value)
        if kind == "posint" and value < 1:
            raise ValueError(f"{where}: must be a positive integer")
        return value
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{where}: must be finite")
    if kind == "pos" and value <= 0:
        raise ValueError(f"{where}: must be > 0")
    if kind == "nonneg" and value < 0:
        raise ValueError(f"{where}: must be >= 0")
    return value


def _resolve_block(raw: dict, schema: dict, name: str, errors: list) -> dict:
    out = {}
    if not isinstance(raw, dict):
        errors.append(f"[{name}] must be a table")
        return out
    for key in raw:
        if key not in schema:
            errors.append(f"{name}.{key}: unknown key")
    for key, (kind, default) in schema.items():
        where = f"{name}.{key}"
        if key in raw:
            try:
                out[key] = _coerce(kind, raw[key], where)
            except ValueError as exc:
                errors.append(str(exc))
        elif default is REQUIRED:
            errors.append(f"{where}: required")
        else:
            out[key] = default
    return out


def _kind_checks(kind: str, phys: dict, sweep: dict, errors: list):
    if kind == "single-qubit":
        var = sweep.get("variable")
        if var not in (None, "n_bar", "Omega"):
            errors.append("sweep.variable: must be 'n_bar' or 'Omega'")
        grid = sweep.get("grid")
        if var == "Omega" and grid is not None:
            try:
                sweep["grid"] = [parse_unit(v, f"sweep.grid[{i}]") for i, v in enumerate(grid)]
            except ValueError as exc:
                errors.append(str(exc))
    if kind == "cphase":
        ch = sweep.get("channel")
        if ch not in ("none", "rethermalization", "dephasing"):
            errors.append("sweep.channel: must be none, rethermalization or dephasing")
        if phys.get("mu") is None and not sweep.get("mu_values"):
            errors.append("physics.mu: required unless sweep.mu_values is given")
        if ch in ("rethermalization", "dephasing") and not sweep.get("grid"):
            errors.append("sweep.grid: required for a noise sweep")
    for key in ("grid", "L", "B", "mu_values", "n_bar_values"):
        vals = sweep.get(key)
        if isinstance(vals, list) and vals:
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
                errors.append(f"sweep.{key}: entries must be numbers")
                continue
            arr = np.asarray(vals, dtype=float)
            d = np.diff(arr)
            if arr.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
                errors.append(f"sweep.{key}: grid must be strictly monotone")
            if np.any(arr < 0):
                errors.append(f"sweep.{key}: entries must be >= 0")


def resolve(doc: dict, source: str | None = None) -> Scenario:
    errors = []
    for key in doc:
        if key not in _TOP:
            errors.append(f"{key}: unknown key")
    kind = doc.get("kind")
    if kind not in KINDS:
        errors.append(f"kind: must be one of {', '.join(KINDS)}")
        raise ConfigError(errors)
    schema = SCHEMA[kind]
    phys_schema = dict(_COMMON)
    phys_schema.update(schema["physics"])
    phys = _resolve_block(doc.get("physics", {}), phys_schema, "physics", errors)
    sweep = _resolve_block(doc.get("sweep", {}), schema["sweep"], "sweep", errors)
    output = _resolve_block(doc.get("output", {}), _OUTPUT, "output", errors)
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        errors.append("seed: must be an integer in [0, 2^64)")
    _kind_checks(kind, phys, sweep, errors)
    if errors:
        raise ConfigError(errors)
    return Scenario(kind, phys, sweep, output, int(seed), source)


def validate_config(path) -> Scenario:
    """Parse and resolve a TOML scenario; raises ConfigError listing every problem."""
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"{path}: no such file"])
    try:
        doc = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{path}: parse error: {exc}"]) from None
    return resolve(doc, str(path))


def _toml_value(kind: str, v):
    if kind == "freq":
        return f'"rad_s:{float(v)!r}"'
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value("x", x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_scenario(s: Scenario) -> str:
    """TOML text that resolves back to ``s``; unset optional keys are omitted."""
    schema = SCHEMA[s.kind]
    phys_schema = dict(_COMMON)
    phys_schema.update(schema["physics"])
    lines = [f'kind = "{s.kind}"', f"seed = {s.seed}", ""]
    for name, block, sch in (("physics", s.physics, phys_schema),
                             ("sweep", s.sweep, schema["sweep"]),
                             ("output", s.output, _OUTPUT)):
        lines.append(f"[{name}]")
        for key, val in block.items():
            if val is None:
                continue
            kind = sch[key][0]
            if name == "sweep" and key == "grid" and s.kind == "single-qubit" \
                    and s.sweep.get("variable") == "Omega":
                val_s = "[" + ", ".join(f'"rad_s:{float(x)!r}"' for x in val) + "]"
            else:
                val_s = _toml_value(kind, val)
            lines.append(f"{key} = {val_s}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Execution


def _consts(p):
    return nv.SpinConstants(p["D"], p["gamma_e"])


def _run_coupling_angle(s: Scenario, jobs: int):
    p, sw = s.physics, s.sweep
    theta_max = sw["theta_max"] if sw["theta_max"] is not None else p["angle_sum"]
    thetas = np.linspace(sw["theta_min"], theta_max, sw["points"])
    geom = nv.NanodiamondGeometry.from_length(p["length"], p["aspect"], p["density"])
    tab = an.coupling_sweep_angle(thetas, p["B"], p["omega"], geom, _consts(p), p["angle_sum"],
                                  p["calibrate_to"])
    in_band = (tab["theta"] >= 0.8) & (tab["theta"] <= 1.0)
    band_min = float(tab["ratio"][in_band].min()) if np.any(in_band) else float("nan")
    rows = [an.compare("fig2_max_ratio", tab.meta["max_ratio"])]
    if np.any(in_band):
        rows.append(an.compare("fig2_plateau_min", band_min, (0.25, 0.05, "rel")))
    summary = {"meta": tab.meta, "plateau_min_0.8_1.0": band_min}
    plot = {"g_eff/omega": (tab["theta"], tab["ratio"])}
    return tab, summary, rows, plot, ("theta [rad]", "g_eff/omega"), []


def _run_coupling_size(s: Scenario, jobs: int):
    p, sw = s.physics, s.sweep
    tab = an.coupling_sweep_size(sw["L"], sw["B"], p["aspect"],
                                 (p["anchor_length"], p["anchor_omega"]), p["omega_exponent"],
                                 _consts(p), p["angle_sum"])
    plot = {}
    for B in sw["B"]:
        sel = tab["B"] == B
        plot[f"B={B:g} T"] = (tab["L"][sel] * 1e9, tab["g"][sel] / TWO_PI)
    return tab, {"meta": tab.meta}, [], plot, ("L [nm]", "g / 2pi [Hz]"), []


def _run_single_qubit(s: Scenario, jobs: int):
    p, sw = s.physics, s.sweep
    var = sw["variable"]
    grid = sw["grid"] if var == "n_bar" else [w / TWO_PI for w in sw["grid"]]
    tab, fit = an.single_qubit_error_sweep(
        var, grid, p["omega"], p["mu"] * p["omega"], p["Omega"] / TWO_PI, p["n_bar"],
        p["delta_S_std"] / TWO_PI, p["samples"], s.seed, jobs)
    if var == "n_bar":
        rows = [an.compare("n0", fit["n0"])]
    else:
        rows = [an.compare("omega_slope", fit["exponent"])]
    plot = {"xi": (tab[var], tab["xi"])}
    return tab, {"fit": fit, "meta": tab.meta}, rows, plot, (var, "xi"), []


def _run_cphase(s: Scenario, jobs: int):
    p, sw = s.physics, s.sweep
    omega = p["omega"]
    kappa_over_omega = (1.0 / p["Q"]) if p["Q"] else 0.0
    ch = sw["channel"]
    warn = []
    schedule_json = None
    if ch == "none":
        mu = p["mu"]
        m = p["m"] or an.gate_m(mu)
        N = p["N"] or default_truncation(p["n_bar"], mu)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            proto = CPhaseProtocol(m, SystemParams(0.0, 0.0, mu * omega, mu * omega, omega, N),
                                   frame="interaction")
            schedule_json = cphase_schedule(proto).to_json()
        warn += [str(w.message) for w in caught if issubclass(w.category, GateWarning)]
        res = an.cphase_error(mu, kappa_over_omega, p["n_bar"], p["Gamma"] / omega, omega,
                              m, N)
        tab = an.Table({"mu": [mu], "xi": [res["xi"]], "xi_end": [res["xi_end"]]},
                       {"mu": "1", "xi": "1", "xi_end": "1"})
        predicted = an.predicted_errors("cphase", n_bar=p["n_bar"], Q=p["Q"],
                                        Gamma=p["Gamma"], omega=omega, mu=mu)
        summary = {"result": {k: v for k, v in res.items()}, "predicted_reference_model": predicted}
        return tab, summary, [], None, None, warn, schedule_json
    cols = {"mu": [], "n_bar": [], "x": [], "xi": [], "xi_end": []}
    fits, rows = {}, []
    if ch == "rethermalization":
        mu = p["mu"]
        nbars = sw["n_bar_values"] or [p["n_bar"]]
        for nb in nbars:
            tab, fit = an.cphase_error_sweep(ch, sw["grid"], mu, nb, None, omega, p["m"],
                                             p["N"], jobs)
            fits[f"n_bar={nb:g}"] = fit
            for x, xi, xe in zip(tab["n_bar_over_Q"], tab["xi"], tab["xi_end"]):
                for k, v in zip(cols, (mu, nb, x, xi, xe)):
                    cols[k].append(v)
        joint = an.fit_linear(cols["x"], cols["xi"])
        fits["joint"] = joint
        rows.append(an.compare("alpha_kappa", joint["slope"]))
        rows.append(an.compare("alpha_kappa_r2", joint.r2, (0.99, None, "min")))
    else:
        mus = sw["mu_values"] or [p["mu"]]
        k = sw["kappa_over_omega"] if sw["kappa_over_omega"] is not None else 1e-6
        nb = p["n_bar"] if p["n_bar"] > 0 else 0.01
        for mu in mus:
            tab, fit = an.cphase_error_sweep(ch, sw["grid"], mu, nb, k, omega, None, p["N"],
                                             jobs)
            fits[f"mu={mu:g}"] = fit
            rows.append({**an.compare("alpha_gamma_mu2", fit["slope"] * mu * mu),
                         "quantity": f"alpha_gamma_mu2(mu={mu:g})"})
            rows.append({**an.compare("alpha_gamma_r2", fit.r2, (0.99, None, "min")),
                         "quantity": f"alpha_gamma_r2(mu={mu:g})"})
            for x, xi, xe in zip(tab["gamma_over_omega"], tab["xi"], tab["xi_end"]):
                for kk, v in zip(cols, (mu, nb, x, xi, xe)):
                    cols[kk].append(v)
    if any(f.flags for f in fits.values()):
        warn.append("fit outside the linear regime")
    tab = an.Table(cols, {"mu": "1", "n_bar": "1", "x": "1", "xi": "1", "xi_end": "1"},
                   {"channel": ch})
    plot = {}
    key = "n_bar" if ch == "rethermalization" else "mu"
    for v in sorted(set(cols[key])):
        sel = np.asarray(cols[key]) == v
        plot[f"{key}={v:g}"] = (np.asarray(cols["x"])[sel], np.asarray(cols["xi"])[sel])
    xl = "n_bar / Q" if ch == "rethermalization" else "Gamma / omega"
    return tab, {"fits": fits}, rows, plot, (xl, "xi"), warn, schedule_json


def _run_regime(s: Scenario, jobs: int):
    p = s.physics
    geom = nv.NanodiamondGeometry.from_length(p["length"], p["aspect"], p["density"])
    I = nv.moment_of_inertia(geom)
    consts = _consts(p)
    theta1 = p["theta1"]
    if theta1 is None:
        theta1, _ = nv.max_pair_coupling(p["B"], p["omega"], I, consts, p["angle_sum"])
    mode = nv.TorsionalMode(p["omega"], p["Q"], I, p["n_bar"], p["temperature"])
    rep = nv.regime_checks(nv.NVPair(theta1, p["angle_sum"], p["spacing_d"]), p["B"], mode,
                           consts)
    d = rep.as_dict()
    tab = an.Table({k: [d[k]] for k in ("theta", "anharmonicity_ratio", "n_bar_limit",
                                        "dipole_hz", "g_eff")},
                   {"theta": "rad", "anharmonicity_ratio": "1", "n_bar_limit": "1",
                    "dipole_hz": "Hz", "g_eff": "rad/s"})
    warn = [] if rep.ok else ["physics regime check failed: " + ", ".join(
        n for n, ok in (("anharmonicity", rep.anharmonic_ok), ("dipole", rep.dipole_ok))
        if not ok)]
    return tab, {"regime": d}, [], None, None, warn


def _run_fit_report(s: Scenario, jobs: int):
    rep = build_report(s.sweep["summaries"])
    tab = an.Table({k: [r[k] for r in rep["rows"]] for k in ("quantity", "simulated")},
                   {"quantity": "1", "simulated": "1"})
    return tab, {"report": rep}, rep["rows"], None, None, []


_RUNNERS = {"coupling-angle": _run_coupling_angle, "coupling-size": _run_coupling_size,
            "single-qubit": _run_single_qubit, "cphase": _run_cphase,
            "regime-check": _run_regime, "fit-report": _run_fit_report}


def output_dir(s: Scenario, override: str | None = None) -> Path:
    return Path(override or s.output.get("dir") or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def run_scenario(s: Scenario, out: str | None = None, jobs: int = 1) -> int:
    """Run a validated scenario and write its artifacts; returns the exit status."""
    outdir = output_dir(s, out)
    try:
        result = _RUNNERS[s.kind](s, jobs)
    except Exception as exc:  # surfaced as exit status 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    tab, summary, rows, plot, labels, warn = result[:6]
    schedule_json = result[6] if len(result) > 6 else None
    outdir.mkdir(parents=True, exist_ok=True)
    fmts = s.output["formats"]
    tab.write_csv(outdir / "results.csv")
    summary = dict(summary)
    summary.update({"kind": s.kind, "seed": s.seed, "comparisons": rows,
                    "pass": all(r["pass"] for r in rows) if rows else None,
                    "warnings": warn, "scenario": dump_scenario(s)})
    an.write_summary(outdir / "summary.json", summary)
    if schedule_json is not None:
        (outdir / "schedule.json").write_text(schedule_json)
    if "svg" in fmts and plot:
        an.svg_line_plot(plot, outdir / "plot.svg", *labels,
                         logy=s.kind == "single-qubit")
    for w in warn:
        print(f"warning: {w}", file=sys.stderr)
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['quantity']}: simulated {r['simulated']:.6g}"
              f" vs reference {r['reference']} ({r['tolerance']})")
    return EXIT_REGIME if warn else EXIT_OK


# ---------------------------------------------------------------------------
# Report


def build_report(paths) -> dict:
    rows = []
    for path in paths:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"{path}: summary not found")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not a JSON summary ({exc})") from None
        if not isinstance(doc, dict) or "comparisons" not in doc:
            raise ValueError(f"{path}: missing 'comparisons'; not a simulate summary")
        for r in doc["comparisons"]:
            rows.append({**r, "source": str(path)})
    return {"rows": rows, "pass": bool(rows) and all(r["pass"] for r in rows),
            "failed": [r["quantity"] for r in rows if not r["pass"]]}


def report_markdown(rep: dict) -> str:
    lines = ["| quantity | reference value | simulated value | tolerance | pass |",
             "|---|---|---|---|---|"]
    for r in rep["rows"]:
        lines.append(f"| {r['quantity']} | {r['reference']} | {r['simulated']:.6g} | "
                     f"{r['tolerance']} | {'yes' if r['pass'] else 'no'} |")
    verdict = "PASS" if rep["pass"] else "FAIL (" + ", ".join(rep["failed"]) + ")"
    lines.append("")
    lines.append(f"overall: {verdict}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nvtorsion")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="run a TOML scenario")
    sim.add_argument("scenario")
    sim.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV})")
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--dry-run", action="store_true",
                     help="print the resolved scenario and write nothing")
    rep = sub.add_parser("report", help="compare fitted values with reference targets")
    rep.add_argument("summaries", nargs="+")
    rep.add_argument("--json", default=None, help="also write the report as JSON")
    args = parser.parse_args(argv)

    if args.command == "simulate":
        if args.jobs < 1:
            print("error: --jobs must be >= 1", file=sys.stderr)
            return EXIT_ERROR
        try:
            scenario = validate_config(args.scenario)
        except ConfigError as exc:
            for e in exc.errors:
                print(f"config error: {e}", file=sys.stderr)
            return EXIT_ERROR
        if args.dry_run:
            sys.stdout.write(dump_scenario(scenario))
            return EXIT_OK
        return run_scenario(scenario, args.out, args.jobs)

    try:
        report = build_report(args.summaries)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(report_markdown(report))
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK if report["pass"] else EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
