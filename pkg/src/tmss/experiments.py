"""Experiment definitions for the command-line runner.

Each experiment declares its parameters (type and default) and returns a
mapping of table name to ``(columns, rows)``. Everything here is
deterministic except the optional shot-noise readout of ``probe-scan``,
which draws from the seeded generator passed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .ion import IonParams, simulate_comparison
from .metrology import (
    SWEEP_FAMILIES,
    averaging_angles,
    mean_n_family,
    odd_smss_crossing,
    qfi_sweep,
)
from .probe import ProbeParams, detect_displacement, fit_affine, probe_scan
from .states import (
    DegenerateStateError,
    SqueezeParams,
    StateFamily,
    odd_ket,
    rho_even,
    rho_odd,
    smss_ket,
    smss_space,
    space_for,
    superposition_ket,
    thermal_rho,
    tmss_ket,
)
from .stats import (
    antibunching_threshold,
    e_even_odd,
    e_phi,
    e_tmss,
    entanglement_boundary,
    entanglement_numeric,
    g2_closed,
    g2_numeric,
    odd_projection_stats,
    populations,
    superbunching_crossing,
    wigner_closed,
    wigner_generic,
)


class ConfigError(ValueError):
    """Invalid or unknown configuration."""


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    items = [x.strip() for x in str(text).split(",") if x.strip()]
    return tuple(float(x) for x in items)


def _strings(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(str(x) for x in text)
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


PARSERS = {"float": float, "int": int, "floats": _floats, "strings": _strings, "bool": _bool, "str": str}


@dataclass(frozen=True)
class Experiment:
    name: str
    params: dict[str, tuple[str, object]]
    run: Callable[[dict, np.random.Generator], dict]
    description: str = ""

    def resolve(self, overrides: dict[str, object]) -> dict:
        """Defaults updated by ``overrides``; unknown keys and bad values raise ConfigError."""
        out = {}
        for key, (kind, default) in self.params.items():
            out[key] = PARSERS[kind](default)
        for key, value in overrides.items():
            if key not in self.params:
                known = ", ".join(sorted(self.params))
                raise ConfigError(f"unknown key {key!r} for experiment {self.name} (known: {known})")
            kind = self.params[key][0]
            try:
                out[key] = PARSERS[kind](value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value {value!r} for {self.name}.{key}: {exc}") from None
        return out


def _grid(lo: float, hi: float, points: int) -> np.ndarray:
    if points < 1:
        raise ConfigError("grid needs at least one point")
    # rounding keeps nominal grid values such as 0.5 exact
    return np.round(np.linspace(lo, hi, points), 12)


def _check_lambda(grid: np.ndarray, hi: float = 0.95):
    if grid.size and (grid.min() < 0.0 or grid.max() > hi):
        raise ConfigError(f"lambda_r grid must lie in [0, {hi}]")


def _r_of(lam: float) -> float:
    return math.atanh(math.sqrt(lam))


# --- populations-wigner -----------------------------------------------------

def run_populations_wigner(cfg: dict, rng) -> dict:
    r = cfg["r"]
    if r < 0:
        raise ConfigError("r must be >= 0")
    fams = cfg["families"]
    builders = {"thermal": thermal_rho, "even": rho_even, "odd": rho_odd}
    for f in fams:
        if f not in builders:
            raise ConfigError(f"unknown family {f!r}; choose from thermal, even, odd")
    lam = math.tanh(r) ** 2
    space = space_for(lam, cfg["tail_tol"], min_cutoff=cfg["n_max"])
    states = {}
    for f in fams:
        try:
            states[f] = builders[f](r, space)
        except DegenerateStateError as exc:
            raise ConfigError(f"family {f} at r={r}: {exc}") from None
    n = np.arange(cfg["n_max"] + 1)
    pops = [n.tolist()] + [populations(states[f])[: n.size].tolist() for f in fams]
    pop_rows = list(zip(*pops))
    axis = _grid(cfg["grid_min"], cfg["grid_max"], cfg["grid_points"])
    q, p = np.meshgrid(axis, axis, indexing="ij")
    w = [wigner_generic(states[f], q, p).ravel() for f in fams]
    w_rows = list(zip(q.ravel().tolist(), p.ravel().tolist(), *[x.tolist() for x in w]))
    return {
        "populations": (["n"] + [f"p_{f}" for f in fams], pop_rows),
        "wigner": (["q", "p"] + [f"w_{f}" for f in fams], w_rows),
    }


# --- g2-sweep -----------------------------------------------------------------

G2_FAMILIES = (
    ("thermal", StateFamily.THERMAL),
    ("even", StateFamily.REDUCED_EVEN),
    ("odd", StateFamily.REDUCED_ODD),
    ("smss", StateFamily.SMSS),
)


def _g2_state(fam: StateFamily, lam: float, tail_tol: float):
    r = _r_of(lam)
    if fam is StateFamily.SMSS:
        return smss_ket(r, 0.0, smss_space(r, tail_tol))
    if fam is StateFamily.REDUCED_ODD and lam == 0.0:
        return np.diag([0.0, 1.0, 0.0]).astype(complex)
    space = space_for(lam, tail_tol, min_cutoff=2)
    return {StateFamily.THERMAL: thermal_rho, StateFamily.REDUCED_EVEN: rho_even,
            StateFamily.REDUCED_ODD: rho_odd}[fam](r, space)


def run_g2_sweep(cfg: dict, rng) -> dict:
    grid = _grid(cfg["lambda_min"], cfg["lambda_max"], cfg["points"])
    _check_lambda(grid)
    rows = []
    for lam in grid:
        closed = [g2_closed(f, lam) for _, f in G2_FAMILIES]
        numeric = [g2_numeric(_g2_state(f, lam, cfg["tail_tol"])) for _, f in G2_FAMILIES]
        rows.append((float(lam), *closed, *numeric))
    cols = ["lambda_r"] + [f"g2_{n}" for n, _ in G2_FAMILIES] + [f"g2_{n}_numeric" for n, _ in G2_FAMILIES]
    thr = [("antibunching_odd", antibunching_threshold()), ("superbunching_even_vs_smss", superbunching_crossing())]
    return {"g2": (cols, rows), "thresholds": (["name", "lambda_r"], thr)}


# --- odd-source ---------------------------------------------------------------

def run_odd_source(cfg: dict, rng) -> dict:
    grid = _grid(cfg["lambda_min"], cfg["lambda_max"], cfg["points"])
    _check_lambda(grid)
    rows = []
    for lam in grid:
        p_odd, p1 = odd_projection_stats(lam)
        r = _r_of(lam)
        space = space_for(lam, cfg["tail_tol"], min_cutoff=2)
        amps = tmss_ket(SqueezeParams(r), space).tensor
        diag = np.abs(np.diagonal(amps)) ** 2
        p_odd_num = float(diag[1::2].sum())
        if lam > 0:
            odd = odd_ket(SqueezeParams(r), space).tensor
            p1_num = float(abs(odd[1, 1]) ** 2)
        else:
            p1_num = 1.0
        rows.append((float(lam), p_odd, p1, p_odd_num, p1_num))
    return {"odd_source": (["lambda_r", "p_odd", "p1_odd", "p_odd_numeric", "p1_odd_numeric"], rows)}


# --- entanglement -------------------------------------------------------------

def run_entanglement_map(cfg: dict, rng) -> dict:
    phis = _grid(0.0, 2.0 * math.pi, cfg["phi_points"])
    lams = _grid(cfg["lambda_min"], cfg["lambda_max"], cfg["lambda_points"])
    _check_lambda(lams, 0.999)
    rows = [(float(ph), float(lam), e_phi(lam, math.cos(ph)), e_tmss(lam)) for ph in phis for lam in lams]
    bound = [(float(ph), entanglement_boundary(math.cos(ph))) for ph in phis]
    return {
        "map": (["phi", "lambda_r", "e_phi", "e_tmss"], rows),
        "boundary": (["phi", "lambda_boundary"], bound),
    }


def _e_numeric(r: float, phi: float, tail_tol: float):
    p = SqueezeParams(r, 0.0, phi)
    try:
        return entanglement_numeric(superposition_ket(p, +1, space_for(p, tail_tol)))
    except DegenerateStateError:
        return None


def run_entanglement_slice(cfg: dict, rng) -> dict:
    lams = _grid(cfg["lambda_min"], cfg["lambda_max"], cfg["lambda_points"])
    _check_lambda(lams)
    phis = cfg["phis"]
    rows = []
    for lam in lams:
        r = _r_of(lam)
        vals = []
        for ph in phis:
            vals += [e_phi(lam, math.cos(ph)), _e_numeric(r, ph, cfg["tail_tol"])]
        rows.append((float(lam), e_tmss(lam), e_even_odd(lam), *vals))
    cols = ["lambda_r", "e_tmss", "e_even_odd"]
    for k in range(len(phis)):
        cols += [f"e_phi_{k}", f"e_phi_{k}_numeric"]
    r = cfg["r"]
    lam = math.tanh(r) ** 2
    angle = _grid(0.0, 2.0 * math.pi, cfg["phi_points"])
    prow = [(float(ph), e_phi(lam, math.cos(ph)), _e_numeric(r, ph, cfg["tail_tol"]), e_tmss(lam))
            for ph in angle]
    return {
        "slice_lambda": (cols, rows),
        "slice_phi": (["phi", "e_phi", "e_phi_numeric", "e_tmss"], prow),
    }


# --- qfi-sweep ----------------------------------------------------------------

def run_qfi_sweep(cfg: dict, rng) -> dict:
    grid = _grid(cfg["lambda_min"], cfg["lambda_max"], cfg["points"])
    _check_lambda(grid)
    spreads = cfg["spreads"]
    avg = [averaging_angles((-s, s), cfg["spread_samples"]) for s in spreads]
    base = qfi_sweep(SWEEP_FAMILIES, "lambda_r", grid, tail_tol=cfg["tail_tol"])
    cols = ["lambda_r"] + [f"f_{f.value}" for f in SWEEP_FAMILIES]
    extra = []
    for k, ang in enumerate(avg):
        curve = qfi_sweep([StateFamily.SMSS], "lambda_r", grid, misalignments=ang, tail_tol=cfg["tail_tol"])
        extra.append(curve.values("smss_avg"))
        cols.append(f"f_smss_avg_{k}")
    rows = []
    for i, lam in enumerate(grid):
        rows.append((float(lam), *[float(base.values(f)[i]) for f in SWEEP_FAMILIES], *[float(e[i]) for e in extra]))
    long_rows = []
    for f in SWEEP_FAMILIES:
        for i, lam in enumerate(grid):
            long_rows.append((f.value, float(lam), mean_n_family(f, lam), float(base.values(f)[i])))
    return {
        "qfi_lambda": (cols, rows),
        "qfi_mean_n": (["family", "lambda_r", "mean_n", "qfi"], long_rows),
        "crossing": (["name", "lambda_r"], [("odd_vs_smss", odd_smss_crossing())]),
    }


# --- ion-sim ------------------------------------------------------------------

def _tones(labels) -> tuple[int, ...]:
    out = []
    for s in labels:
        if s not in ("+", "-"):
            raise ConfigError(f"tones must be '+' and/or '-', got {s!r}")
        out.append(1 if s == "+" else -1)
    return tuple(out)


def run_ion_sim(cfg: dict, rng) -> dict:
    try:
        params = IonParams(cfg["omega_x"], cfg["omega_y"], cfg["Omega"], cfg["eta_x"], cfg["eta_y"],
                           _tones(cfg["tones"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg["cutoff"] < 1 or cfg["samples"] < 1 or cfg["chi_t_max"] <= 0:
        raise ConfigError("cutoff, samples and chi_t_max must be positive")
    dt = cfg["dt"] if cfg["dt"] > 0 else None
    tr = simulate_comparison(params, cfg["chi_t_max"], cfg["samples"], cfg["cutoff"], dt,
                             cfg["overflow_tol"])
    rows = list(zip(tr.chi_t.tolist(), tr.fidelity.tolist(), tr.n_full.tolist(), tr.n_eff.tolist(),
                    tr.fidelity_plus.tolist(), tr.fidelity_minus.tolist()))
    summary = [
        ("chi", params.chi),
        ("dt", tr.dt),
        ("norm_drift", tr.norm_drift),
        ("top_population", tr.top_population),
    ]
    return {
        "trajectory": (["chi_t", "fidelity", "n_full", "n_eff", "fidelity_plus", "fidelity_minus"], rows),
        "summary": (["name", "value"], summary),
    }


# --- probe-scan ---------------------------------------------------------------

def run_probe_scan(cfg: dict, rng) -> dict:
    r = cfg["r"]
    if r <= 0:
        raise ConfigError("probe-scan needs r > 0 (the odd reduced state is undefined at r = 0)")
    params = ProbeParams(cfg["eta_x"], cfg["Omega"])
    if abs(params.contrast) < 1e-9:
        raise ConfigError(f"eta_x = {cfg['eta_x']} gives cos(2 Phi) = {params.contrast:.2e}: no readout signal")
    lam = math.tanh(r) ** 2
    space = space_for(lam, cfg["tail_tol"])
    states = {"even": rho_even(r, space), "odd": rho_odd(r, space)}
    radii = _grid(0.0, cfg["radius_max"], cfg["points"])
    cols, data, fits = ["abs_alpha"], [radii.tolist()], []
    shots = cfg["shots"] if cfg["shots"] > 0 else None
    for name, rho in states.items():
        fam = StateFamily.REDUCED_EVEN if name == "even" else StateFamily.REDUCED_ODD
        res = probe_scan(rho, radii, params, cfg["phase"], cfg["exact"],
                         wigner=lambda q, p, fam=fam: wigner_closed(fam, lam, q, p))
        pe = [x.p_eg for x in res]
        w = [x.wigner_ref for x in res]
        fit = fit_affine(w, pe)
        fits.append((name, fit.slope, fit.intercept, fit.residual))
        cols += [f"p_eg_{name}", f"w_{name}"]
        data += [pe, w]
        if shots is not None:
            det = [detect_displacement(rho, a * complex(math.cos(cfg["phase"]), math.sin(cfg["phase"])), params,
                                       cfg["threshold"], cfg["exact"], shots, rng) for a in radii]
        else:
            det = [detect_displacement(rho, a * complex(math.cos(cfg["phase"]), math.sin(cfg["phase"])), params,
                                       cfg["threshold"], cfg["exact"]) for a in radii]
        cols += [f"detected_{name}", f"margin_{name}"]
        data += [[d.detected for d in det], [d.margin for d in det]]
    return {
        "scan": (cols, list(zip(*data))),
        "fit": (["family", "slope", "intercept", "residual"], fits),
    }


EXPERIMENTS = {
    e.name: e
    for e in [
        Experiment("populations-wigner", {
            "r": ("float", 1.5),
            "families": ("strings", "thermal, even, odd"),
            "n_max": ("int", 20),
            "grid_min": ("float", -3.0),
            "grid_max": ("float", 3.0),
            "grid_points": ("int", 61),
            "tail_tol": ("float", 1e-10),
        }, run_populations_wigner, "Fock populations and Wigner grids of the reduced states"),
        Experiment("g2-sweep", {
            "lambda_min": ("float", 0.05),
            "lambda_max": ("float", 0.95),
            "points": ("int", 19),
            "tail_tol": ("float", 1e-14),
        }, run_g2_sweep, "zero-delay second-order correlation versus lambda_r"),
        Experiment("odd-source", {
            "lambda_min": ("float", 0.0),
            "lambda_max": ("float", 0.95),
            "points": ("int", 20),
            "tail_tol": ("float", 1e-12),
        }, run_odd_source, "heralding probability of the odd TMSS and its single-pair weight"),
        Experiment("entanglement-map", {
            "phi_points": ("int", 41),
            "lambda_min": ("float", 0.0),
            "lambda_max": ("float", 0.95),
            "lambda_points": ("int", 41),
        }, run_entanglement_map, "linear entropy over (phi, lambda_r) and the TMSS-equality boundary"),
        Experiment("entanglement-slice", {
            "lambda_min": ("float", 0.0),
            "lambda_max": ("float", 0.9),
            "lambda_points": ("int", 19),
            "phis": ("floats", f"0, {math.pi!r}, {math.pi + math.pi / 10!r}"),
            "r": ("float", math.pi / 20),
            "phi_points": ("int", 41),
            "tail_tol": ("float", 1e-12),
        }, run_entanglement_slice, "linear entropy slices at fixed phi and at fixed r"),
        Experiment("qfi-sweep", {
            "lambda_min": ("float", 0.0),
            "lambda_max": ("float", 0.95),
            "points": ("int", 20),
            "spreads": ("floats", f"{math.pi / 6!r}, {math.pi / 3!r}"),
            "spread_samples": ("int", 64),
            "tail_tol": ("float", 1e-12),
        }, run_qfi_sweep, "quantum Fisher information of the probe states"),
        Experiment("ion-sim", {
            "omega_x": ("float", 1.0),
            "omega_y": ("float", 1.2),
            "Omega": ("float", 0.05),
            "eta_x": ("float", 0.1),
            "eta_y": ("float", 0.1),
            "tones": ("strings", "+, -"),
            "chi_t_max": ("float", 1.0),
            "samples": ("int", 50),
            "cutoff": ("int", 30),
            "dt": ("float", 0.0),
            "overflow_tol": ("float", 1e-4),
        }, run_ion_sim, "full two-colour versus effective ion dynamics"),
        Experiment("probe-scan", {
            "r": ("float", 1.5),
            "eta_x": ("float", 1.0 / math.sqrt(100.5)),
            "Omega": ("float", 0.05),
            "radius_max": ("float", 3.0),
            "points": ("int", 50),
            "phase": ("float", 0.0),
            "threshold": ("float", 0.5),
            "shots": ("int", 0),
            "exact": ("bool", True),
            "tail_tol": ("float", 1e-10),
        }, run_probe_scan, "carrier-pulse readout of the displaced parity"),
    ]
}


def kernel_implementation() -> str:
    return _kernels.IMPLEMENTATION


__all__ = ["ConfigError", "EXPERIMENTS", "Experiment", "kernel_implementation"]
