"""Command-line runner: JSON config in, CSV/JSON/SVG artifacts out.

Configs are ordinary-frequency files: rates in MHz, durations in ns.
The loader converts to the internal angular units (rad/us, us) after
validating every field and reporting all problems at once with their
config paths.  Runs write their artifacts plus a manifest recording the
config hash, seed, and library versions; identical config and seed
reproduce identical bytes.

Exit codes: 0 success, 2 invalid config or input, 3 numerical failure,
4 I/O failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND, thread_count
from .calibrate import fit_hopping_rate
from .evolve import (DEFAULT_TOL, NoiseSpec, evolve_lindblad,
                     evolve_schrodinger, result_to_csv)
from .experiments import (DEFAULT_PLACEMENTS, InterferencePattern,
                          aharonov_bohm_scan, ab_ring_lattice,
                          HallRecord, HallScan, hall_coefficient,
                          hall_experiment, hall_to_csv, pattern_to_csv,
                          wannier_stark_chain)
from .heatmap import heatmap_svg
from .lattice import build_lattice
from .model import ModelSpec, Tone, tone_phase_for_target
from .semiclassical import hall_velocity_ensemble, obc_modes

TWO_PI = 2.0 * math.pi
KINDS = ("two_site", "ab_scan", "gauge_check", "wannier_stark", "hall",
         "semiclassical")
VARIANTS = ("H1", "H2", "H3", "H4")
_NOISE_KINDS = ("two_site", "wannier_stark")


class ConfigError(Exception):
    """Validation failure; ``errors`` lists path-prefixed messages."""

    def __init__(self, errors):
        self.errors = [errors] if isinstance(errors, str) else list(errors)
        super().__init__("; ".join(self.errors))


class _Check:
    """Collects path-qualified validation errors."""

    def __init__(self):
        self.errors = []

    def error(self, path, msg):
        self.errors.append("%s: %s" % (path, msg))

    def number(self, node, key, path, default=None, minv=None,
               nonzero=False):
        val = node.get(key, None)
        if val is None:
            return default
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.error("%s.%s" % (path, key), "expected a number")
            return default
        if minv is not None and val < minv:
            self.error("%s.%s" % (path, key), "must be >= %g" % minv)
            return default
        if nonzero and val == 0:
            self.error("%s.%s" % (path, key), "must be nonzero")
            return default
        return float(val)

    def integer(self, node, key, path, default=None, minv=None):
        val = node.get(key, None)
        if val is None:
            return default
        if isinstance(val, bool) or not isinstance(val, int):
            self.error("%s.%s" % (path, key), "expected an integer")
            return default
        if minv is not None and val < minv:
            self.error("%s.%s" % (path, key), "must be >= %d" % minv)
            return default
        return val

    def choice(self, node, key, path, choices, default=None):
        val = node.get(key, None)
        if val is None:
            return default
        if val not in choices:
            self.error("%s.%s" % (path, key),
                       "must be one of %s" % ", ".join(choices))
            return default
        return val

    def grid(self, node, key, path, default):
        val = node.get(key, None)
        if val is None:
            return default
        p = "%s.%s" % (path, key)
        if isinstance(val, list):
            if not val:
                self.error(p, "grid must be non-empty")
                return default
            if any(isinstance(x, bool) or not isinstance(x, (int, float))
                   for x in val):
                self.error(p, "grid entries must be numbers")
                return default
            return [float(x) for x in val]
        if isinstance(val, dict):
            if set(val) != {"start", "stop", "num"}:
                self.error(p, "grid object needs exactly start, stop, num")
                return default
            num = self.integer(val, "num", p, minv=1)
            start = self.number(val, "start", p)
            stop = self.number(val, "stop", p)
            if num is None or start is None or stop is None:
                self.error(p, "incomplete grid object")
                return default
            return {"start": start, "stop": stop, "num": num}
        self.error(p, "expected a list or a start/stop/num object")
        return default

    def reject_unknown(self, node, path, allowed):
        for key in sorted(set(node) - set(allowed)):
            self.error("%s.%s" % (path, key), "unknown field")


def _grid_values(spec):
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    return np.linspace(spec["start"], spec["stop"], spec["num"])


def _times_us(spec):
    return _grid_values(spec) / 1000.0


def _parse_bond(key, path, ck):
    parts = str(key).split("-")
    try:
        a, b = (int(x) for x in parts)
        return (a, b)
    except ValueError:
        ck.error(path, "bond key must look like 'i-j', got %r" % key)
        return None


def _check_placement_block(ck, raw, path, cycle):
    if not isinstance(raw, dict) or not raw:
        ck.error(path, "expected a non-empty bond -> weight object")
        return None
    fwd = set(zip(cycle, cycle[1:] + cycle[:1])) if cycle else set()
    out = {}
    total = 0.0
    for key in sorted(raw):
        bond = _parse_bond(key, "%s.%s" % (path, key), ck)
        if bond is None:
            continue
        w = raw[key]
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            ck.error("%s.%s" % (path, key), "weight must be a number")
            continue
        if cycle and bond not in fwd:
            ck.error("%s.%s" % (path, key),
                     "not a forward bond of the cycle")
            continue
        out["%d-%d" % bond] = float(w)
        total += float(w)
    if out and abs(total - 1.0) > 1e-9:
        ck.error(path, "weights must sum to 1 (got %g)" % total)
    return out or None


def _check_lattice_block(ck, node, path):
    raw = node.get("lattice", {"rows": 2, "cols": 2})
    if not isinstance(raw, dict):
        ck.error("%s.lattice" % path, "expected an object")
        return None, None
    ck.reject_unknown(raw, "%s.lattice" % path, ("rows", "cols", "active"))
    rows = ck.integer(raw, "rows", "%s.lattice" % path, default=2, minv=1)
    cols = ck.integer(raw, "cols", "%s.lattice" % path, default=2, minv=1)
    active = raw.get("active", None)
    if active is not None:
        if (not isinstance(active, list) or not active or
                any(isinstance(s, bool) or not isinstance(s, int)
                    for s in active)):
            ck.error("%s.lattice.active" % path,
                     "expected a non-empty list of site ids")
            active = None
    if rows is None or cols is None:
        return None, None
    spec = {"rows": rows, "cols": cols, "active": active}
    try:
        lat = build_lattice(rows, cols,
                            set(active) if active is not None else None)
    except ValueError as exc:
        ck.error("%s.lattice" % path, str(exc))
        return None, spec
    return lat, spec


def _check_cycle(ck, node, path, lat):
    cycle = node.get("cycle", None)
    if cycle is None:
        if lat is not None and lat.rows == 2 and lat.cols == 2 \
                and lat.n_active == 4:
            return [1, 2, 4, 3]
        if lat is not None and lat.rows == 3 and lat.cols == 3 \
                and sorted(lat.sites) == [1, 2, 3, 4, 6, 7, 8, 9]:
            return [1, 2, 3, 6, 9, 8, 7, 4]
        ck.error("%s.cycle" % path, "required for this lattice")
        return None
    if (not isinstance(cycle, list) or len(cycle) < 3 or
            any(isinstance(s, bool) or not isinstance(s, int)
                for s in cycle)):
        ck.error("%s.cycle" % path, "expected a list of at least 3 site ids")
        return None
    if len(set(cycle)) != len(cycle):
        ck.error("%s.cycle" % path, "sites must be distinct")
        return None
    if lat is not None:
        sites = set(lat.sites)
        keys = {b.key for b in lat.bonds}
        for s in cycle:
            if s not in sites:
                ck.error("%s.cycle" % path, "site %d is not on the lattice" % s)
                return None
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            if ((a, b) if a < b else (b, a)) not in keys:
                ck.error("%s.cycle" % path,
                         "sites %d and %d are not neighbors" % (a, b))
                return None
    return list(cycle)


_COMMON_KEYS = ("kind", "seed", "tolerance", "threads", "out", "noise")


def resolve_config(raw):
    """Validate a parsed config and fill in every default.

    Returns the fully resolved dict (JSON-serializable: this is what
    gets hashed into the manifest).  Raises ConfigError listing every
    problem with its config path.
    """
    ck = _Check()
    if not isinstance(raw, dict):
        raise ConfigError(["config: top level must be a JSON object"])
    kind = ck.choice(raw, "kind", "config", KINDS)
    if kind is None and "kind" not in raw:
        ck.error("config.kind", "required")
    if ck.errors:
        raise ConfigError(ck.errors)

    cfg = {"kind": kind}
    cfg["seed"] = ck.integer(raw, "seed", "config", default=0, minv=0)
    tol = ck.number(raw, "tolerance", "config", default=DEFAULT_TOL,
                    minv=1e-14)
    if tol is not None and tol > 1e-2:
        ck.error("config.tolerance", "must be <= 0.01")
        tol = DEFAULT_TOL
    cfg["tolerance"] = tol
    cfg["threads"] = ck.integer(raw, "threads", "config", default=None,
                                minv=1)
    out = raw.get("out", None)
    if out is not None and not isinstance(out, str):
        ck.error("config.out", "expected a string")
        out = None
    cfg["out"] = out

    noise = raw.get("noise", None)
    if noise is not None:
        if kind not in _NOISE_KINDS:
            ck.error("config.noise", "not supported for kind %s" % kind)
            noise = None
        elif not isinstance(noise, dict):
            ck.error("config.noise", "expected an object")
            noise = None
        else:
            ck.reject_unknown(noise, "config.noise", ("t1_us", "tphi_us"))
            t1 = ck.number(noise, "t1_us", "config.noise", default=16.7,
                           minv=1e-6)
            tphi = ck.number(noise, "tphi_us", "config.noise", default=10.0,
                             minv=1e-6)
            noise = {"t1_us": t1, "tphi_us": tphi}
    cfg["noise"] = noise

    handler = {
        "two_site": _resolve_two_site,
        "ab_scan": _resolve_ab_scan,
        "gauge_check": _resolve_gauge_check,
        "wannier_stark": _resolve_wannier_stark,
        "hall": _resolve_hall,
        "semiclassical": _resolve_semiclassical,
    }[kind]
    handler(ck, raw, cfg)
    if ck.errors:
        raise ConfigError(ck.errors)
    return cfg


def _resolve_two_site(ck, raw, cfg):
    ck.reject_unknown(raw, "config", _COMMON_KEYS + (
        "bare_rate_mhz", "detuning_mhz", "drive_ratio", "second_tone",
        "times_ns"))
    cfg["bare_rate_mhz"] = ck.number(raw, "bare_rate_mhz", "config",
                                     default=5.9, minv=1e-6)
    cfg["detuning_mhz"] = ck.number(raw, "detuning_mhz", "config",
                                    default=155.0, nonzero=True)
    cfg["drive_ratio"] = ck.number(raw, "drive_ratio", "config",
                                   default=0.94, minv=1e-6)
    st = raw.get("second_tone", None)
    if st is not None:
        if not isinstance(st, dict):
            ck.error("config.second_tone", "expected an object")
            st = None
        else:
            ck.reject_unknown(st, "config.second_tone",
                              ("detuning_mhz", "drive_ratio"))
            st = {
                "detuning_mhz": ck.number(st, "detuning_mhz",
                                          "config.second_tone",
                                          default=-115.0, nonzero=True),
                "drive_ratio": ck.number(st, "drive_ratio",
                                         "config.second_tone",
                                         default=0.94, minv=1e-6),
            }
    cfg["second_tone"] = st
    cfg["times_ns"] = ck.grid(raw, "times_ns", "config",
                              {"start": 0.0, "stop": 500.0, "num": 201})


def _resolve_ab_scan(ck, raw, cfg):
    ck.reject_unknown(raw, "config", _COMMON_KEYS + (
        "lattice", "cycle", "placement", "variant", "rate_mhz",
        "bare_rate_mhz", "drive_ratio", "phases_rad", "times_ns"))
    lat, spec = _check_lattice_block(ck, raw, "config")
    cfg["lattice"] = spec
    cycle = _check_cycle(ck, raw, "config", lat)
    cfg["cycle"] = cycle
    if "placement" in raw:
        cfg["placement"] = _check_placement_block(
            ck, raw["placement"], "config.placement", cycle)
    elif cycle:
        cfg["placement"] = {"%d-%d" % (cycle[0], cycle[1]): 1.0}
    else:
        cfg["placement"] = None
    cfg["variant"] = ck.choice(raw, "variant", "config", VARIANTS,
                               default="H4")
    cfg["rate_mhz"] = ck.number(raw, "rate_mhz", "config", default=2.0,
                                minv=1e-6)
    cfg["bare_rate_mhz"] = ck.number(raw, "bare_rate_mhz", "config",
                                     default=5.9, minv=1e-6)
    cfg["drive_ratio"] = ck.number(raw, "drive_ratio", "config",
                                   default=0.94, minv=1e-6)
    cfg["phases_rad"] = ck.grid(raw, "phases_rad", "config",
                                {"start": 0.0, "stop": TWO_PI, "num": 41})
    cfg["times_ns"] = ck.grid(raw, "times_ns", "config",
                              {"start": 0.0, "stop": 400.0, "num": 121})


def _resolve_gauge_check(ck, raw, cfg):
    ck.reject_unknown(raw, "config", _COMMON_KEYS + (
        "variant", "rate_mhz", "bare_rate_mhz", "drive_ratio",
        "placements", "phases_rad", "times_ns"))
    cfg["variant"] = ck.choice(raw, "variant", "config", VARIANTS,
                               default="H4")
    cfg["rate_mhz"] = ck.number(raw, "rate_mhz", "config", default=2.0,
                                minv=1e-6)
    cfg["bare_rate_mhz"] = ck.number(raw, "bare_rate_mhz", "config",
                                     default=5.9, minv=1e-6)
    cfg["drive_ratio"] = ck.number(raw, "drive_ratio", "config",
                                   default=0.94, minv=1e-6)
    _, cycle = ab_ring_lattice()
    pls = raw.get("placements", None)
    if pls is None:
        cfg["placements"] = {
            name: {"%d-%d" % b: w for b, w in pl.items()}
            for name, pl in DEFAULT_PLACEMENTS.items()}
    elif not isinstance(pls, dict) or not pls:
        ck.error("config.placements", "expected a non-empty object")
        cfg["placements"] = None
    else:
        out = {}
        for name in sorted(pls):
            block = _check_placement_block(
                ck, pls[name], "config.placements.%s" % name, cycle)
            if block:
                out[str(name)] = block
        cfg["placements"] = out or None
    cfg["phases_rad"] = ck.grid(raw, "phases_rad", "config",
                                {"start": 0.0, "stop": TWO_PI, "num": 41})
    cfg["times_ns"] = ck.grid(raw, "times_ns", "config",
                              {"start": 0.0, "stop": 600.0, "num": 121})


def _resolve_wannier_stark(ck, raw, cfg):
    ck.reject_unknown(raw, "config", _COMMON_KEYS + (
        "n_sites", "field", "variant", "rate_mhz", "bare_rate_mhz",
        "drive_ratio", "times_ns"))
    cfg["n_sites"] = ck.integer(raw, "n_sites", "config", default=11, minv=3)
    cfg["field"] = ck.number(raw, "field", "config", default=1.5)
    cfg["variant"] = ck.choice(raw, "variant", "config", ("H1", "H4"),
                               default="H4")
    cfg["rate_mhz"] = ck.number(raw, "rate_mhz", "config", default=2.0,
                                minv=1e-6)
    cfg["bare_rate_mhz"] = ck.number(raw, "bare_rate_mhz", "config",
                                     default=5.9, minv=1e-6)
    cfg["drive_ratio"] = ck.number(raw, "drive_ratio", "config",
                                   default=0.94, minv=1e-6)
    cfg["times_ns"] = ck.grid(raw, "times_ns", "config",
                              {"start": 0.0, "stop": 400.0, "num": 201})


def _resolve_hall(ck, raw, cfg):
    ck.reject_unknown(raw, "config", _COMMON_KEYS + (
        "variant", "rate_mhz", "layout", "fluxes_rad", "fields",
        "t_window_ns", "n_times"))
    cfg["variant"] = ck.choice(raw, "variant", "config", ("H1", "H4"),
                               default="H4")
    cfg["rate_mhz"] = ck.number(raw, "rate_mhz", "config", default=2.0,
                                minv=1e-6)
    cfg["layout"] = ck.choice(raw, "layout", "config",
                              ("landau", "striped"), default="landau")
    cfg["fluxes_rad"] = ck.grid(raw, "fluxes_rad", "config",
                                {"start": -math.pi, "stop": math.pi,
                                 "num": 13})
    cfg["fields"] = ck.grid(raw, "fields", "config",
                            {"start": -0.2, "stop": 0.2, "num": 9})
    cfg["t_window_ns"] = ck.number(raw, "t_window_ns", "config",
                                   default=None, minv=1e-3)
    cfg["n_times"] = ck.integer(raw, "n_times", "config", default=41,
                                minv=2)
    if cfg["variant"] == "H1" and cfg["fields"] is not None:
        if np.any(_grid_values(cfg["fields"]) != 0.0):
            ck.error("config.fields",
                     "lab-frame hall supports zero field only")


def _resolve_semiclassical(ck, raw, cfg):
    ck.reject_unknown(raw, "config", _COMMON_KEYS + (
        "block", "e0", "bz", "rate_mhz", "times_ns"))
    block = raw.get("block", {"nx": 4, "ny": 4})
    if not isinstance(block, dict):
        ck.error("config.block", "expected an object")
        block = {"nx": 4, "ny": 4}
    ck.reject_unknown(block, "config.block", ("nx", "ny"))
    cfg["block"] = {
        "nx": ck.integer(block, "nx", "config.block", default=4, minv=1),
        "ny": ck.integer(block, "ny", "config.block", default=4, minv=1),
    }
    cfg["e0"] = ck.number(raw, "e0", "config", default=0.1)
    cfg["bz"] = ck.number(raw, "bz", "config", default=0.02)
    cfg["rate_mhz"] = ck.number(raw, "rate_mhz", "config", default=2.0,
                                minv=1e-6)
    cfg["times_ns"] = ck.grid(raw, "times_ns", "config",
                              {"start": 0.0, "stop": 160.0, "num": 81})


def config_hash(cfg):
    """sha256 over the semantic fields (location/parallelism excluded)."""
    semantic = {k: v for k, v in cfg.items() if k not in ("out", "threads")}
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _json_text(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _noise_spec(cfg):
    if cfg.get("noise") is None:
        return None
    return NoiseSpec(t1=cfg["noise"]["t1_us"], tphi=cfg["noise"]["tphi_us"])


def _map_cells(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=1))


def _run_two_site(cfg, threads):
    delta = TWO_PI * cfg["detuning_mhz"]
    j0 = TWO_PI * cfg["bare_rate_mhz"]
    lat = build_lattice(1, 2)
    tones = [Tone(site=1, amp=cfg["drive_ratio"] * abs(delta), freq=delta,
                  phase=tone_phase_for_target(0.0, delta), bonds=((1, 2),))]
    if cfg["second_tone"]:
        d2 = TWO_PI * cfg["second_tone"]["detuning_mhz"]
        tones.append(Tone(site=2, amp=cfg["second_tone"]["drive_ratio"]
                          * abs(d2), freq=d2))
    model = ModelSpec("H1", lat, onsite=np.array([0.0, -delta]),
                      rates={(1, 2): j0}, tones=tones)
    times = _times_us(cfg["times_ns"])
    noise = _noise_spec(cfg)
    if noise is not None:
        res = evolve_lindblad(model, 1, times, noise,
                              tol=max(cfg["tolerance"], 1e-10))
    else:
        res = evolve_schrodinger(model, 1, times, tol=cfg["tolerance"])
    fit = fit_hopping_rate(times, res.site_population(2))
    summary = {
        "rate_mhz": fit.rate / TWO_PI,
        "rate_rad_us": fit.rate,
        "amplitude": fit.amplitude,
        "offset": fit.offset,
        "phase": fit.phase,
        "rms": fit.rms,
    }
    return {"trace.csv": result_to_csv(res),
            "fit.json": _json_text(summary)}


def _ab_geometry(cfg):
    lat = build_lattice(
        cfg["lattice"]["rows"], cfg["lattice"]["cols"],
        set(cfg["lattice"]["active"]) if cfg["lattice"]["active"] else None)
    cycle = list(cfg["cycle"])
    placement = {tuple(int(x) for x in k.split("-")): w
                 for k, w in cfg["placement"].items()}
    return lat, cycle, placement


def _scan_rate(cfg):
    if cfg["variant"] in ("H1", "H2"):
        return TWO_PI * cfg["bare_rate_mhz"]
    return TWO_PI * cfg["rate_mhz"]


def _ab_cell(args):
    cfg, ph = args
    lat, cycle, placement = _ab_geometry(cfg)
    pat = aharonov_bohm_scan(
        cfg["variant"], lat, cycle, placement, [ph],
        _times_us(cfg["times_ns"]), rate=_scan_rate(cfg),
        ratio=cfg["drive_ratio"], tol=cfg["tolerance"])
    return pat.populations[0]


def _run_ab_scan(cfg, threads):
    phases = _grid_values(cfg["phases_rad"])
    rows = _map_cells(_ab_cell, [(cfg, ph) for ph in phases], threads)
    lat, cycle, placement = _ab_geometry(cfg)
    pattern = InterferencePattern(
        phases=phases, times=_times_us(cfg["times_ns"]),
        populations=np.stack(rows), source=cycle[0],
        target=cycle[len(cycle) // 2],
        meta={"variant": cfg["variant"]})
    summary = {
        "source": pattern.source,
        "target": pattern.target,
        "n_phases": int(phases.size),
        "n_times": int(pattern.times.size),
        "max_population": float(pattern.populations.max()),
    }
    return {"pattern.csv": pattern_to_csv(pattern),
            "summary.json": _json_text(summary)}


def _gauge_cell(args):
    cfg, name, ph = args
    lat, cycle = ab_ring_lattice()
    placement = {tuple(int(x) for x in k.split("-")): w
                 for k, w in cfg["placements"][name].items()}
    pat = aharonov_bohm_scan(
        cfg["variant"], lat, cycle, placement, [ph],
        _times_us(cfg["times_ns"]), rate=_scan_rate(cfg),
        ratio=cfg["drive_ratio"], tol=cfg["tolerance"])
    return pat.populations[0]


def _run_gauge_check(cfg, threads):
    phases = _grid_values(cfg["phases_rad"])
    times = _times_us(cfg["times_ns"])
    names = sorted(cfg["placements"])
    items = [(cfg, name, ph) for name in names for ph in phases]
    rows = _map_cells(_gauge_cell, items, threads)
    _, cycle = ab_ring_lattice()
    artifacts = {}
    stacks = []
    for k, name in enumerate(names):
        pops = np.stack(rows[k * phases.size:(k + 1) * phases.size])
        stacks.append(pops)
        pattern = InterferencePattern(
            phases=phases, times=times, populations=pops,
            source=cycle[0], target=cycle[len(cycle) // 2],
            meta={"variant": cfg["variant"], "placement": name})
        artifacts["pattern_%s.csv" % name] = pattern_to_csv(pattern)
    cube = np.stack(stacks)
    spread = float(np.max(cube.max(axis=0) - cube.min(axis=0)))
    artifacts["summary.json"] = _json_text({
        "placements": names,
        "max_spread": spread,
        "n_phases": int(phases.size),
        "n_times": int(times.size),
    })
    return artifacts


def _run_wannier_stark(cfg, threads):
    rate = TWO_PI * cfg["rate_mhz"]
    ws = wannier_stark_chain(
        cfg["field"] * rate, n_sites=cfg["n_sites"], rate=rate,
        times=_times_us(cfg["times_ns"]), variant=cfg["variant"],
        j0=TWO_PI * cfg["bare_rate_mhz"], ratio=cfg["drive_ratio"],
        noise=_noise_spec(cfg), tol=cfg["tolerance"])
    summary = {
        "field_rad_us": ws.field,
        "beyond_3_max": float(ws.beyond(3).max()),
        "revival_time_us": None if ws.field == 0.0 else ws.revival_time,
    }
    if ws.field != 0.0 and ws.revival_time <= ws.result.times[-1]:
        k = int(np.argmin(np.abs(ws.result.times - ws.revival_time)))
        src = ws.meta["source"]
        summary["revival_population"] = float(
            ws.result.site_population(src)[k])
    return {"populations.csv": result_to_csv(ws.result),
            "summary.json": _json_text(summary)}


def _hall_cell(args):
    cfg, flux, fieldv = args
    rate = TWO_PI * cfg["rate_mhz"]
    tw = None if cfg["t_window_ns"] is None else cfg["t_window_ns"] / 1000.0
    scan = hall_experiment(
        [flux], [fieldv], variant=cfg["variant"], rate=rate,
        layout=cfg["layout"], t_window=tw, n_times=cfg["n_times"],
        seed=cfg["seed"], tol=cfg["tolerance"])
    r = scan.records[0]
    return (r.flux, r.field, r.xbar, r.ybar, scan.t_window)


def _run_hall(cfg, threads):
    fluxes = _grid_values(cfg["fluxes_rad"])
    fields = _grid_values(cfg["fields"])
    items = [(cfg, ph, f) for ph in fluxes for f in fields]
    cells = _map_cells(_hall_cell, items, threads)
    records = [HallRecord(flux=c[0], field=c[1], xbar=c[2], ybar=c[3])
               for c in cells]
    scan = HallScan(records=records, t_window=cells[0][4],
                    rate=TWO_PI * cfg["rate_mhz"],
                    meta={"variant": cfg["variant"],
                          "layout": cfg["layout"], "seed": cfg["seed"]})
    artifacts = {"hall.csv": hall_to_csv(scan)}
    summary = {
        "n_records": len(records),
        "t_window_us": scan.t_window,
        "variant": cfg["variant"],
    }
    if fields.size >= 2:
        coef = hall_coefficient(scan)
        summary["coefficients"] = {repr(k): v for k, v in coef.items()}
    artifacts["coefficients.json"] = _json_text(summary)
    return artifacts


def _run_semiclassical(cfg, threads):
    rate = TWO_PI * cfg["rate_mhz"]
    nx, ny = cfg["block"]["nx"], cfg["block"]["ny"]
    times = _times_us(cfg["times_ns"])
    hv = hall_velocity_ensemble(cfg["e0"] * rate, cfg["bz"], nx, ny, rate,
                                times)
    lines = ["time_us,v_long,v_hall"]
    for k, t in enumerate(times):
        lines.append("%s,%s,%s" % (repr(float(t)), repr(float(hv.v_long[k])),
                                   repr(float(hv.v_hall[k]))))
    summary = {
        "nx": nx, "ny": ny,
        "n_modes": int(obc_modes(nx, ny, rate).kx.size),
        "max_v_hall": float(np.abs(hv.v_hall).max()),
        "max_v_long": float(np.abs(hv.v_long).max()),
    }
    return {"velocities.csv": "\n".join(lines) + "\n",
            "summary.json": _json_text(summary)}


_RUNNERS = {
    "two_site": _run_two_site,
    "ab_scan": _run_ab_scan,
    "gauge_check": _run_gauge_check,
    "wannier_stark": _run_wannier_stark,
    "hall": _run_hall,
    "semiclassical": _run_semiclassical,
}


def execute(cfg, threads=1):
    """Run a resolved config; returns {filename: text} artifacts."""
    return _RUNNERS[cfg["kind"]](cfg, threads)


def _load_raw(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(["config: cannot read %s (%s)" % (path, exc)])
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(["config: invalid JSON (%s)" % exc])


def _versions():
    out = {
        "gaugesim": __version__,
        "python": "%d.%d.%d" % sys.version_info[:3],
        "numpy": np.__version__,
    }
    if BACKEND == "numba":
        import numba
        out["numba"] = numba.__version__
    return out


def cmd_run(args):
    try:
        cfg = resolve_config(_load_raw(args.config))
    except ConfigError as exc:
        for e in exc.errors:
            print("config error: %s" % e, file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["out"] = args.out
    try:
        threads = thread_count(args.threads, cfg.get("threads"))
    except ValueError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2

    try:
        artifacts = execute(cfg, threads)
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3

    manifest = {
        "artifacts": sorted(artifacts),
        "backend": BACKEND,
        "config_sha256": config_hash(cfg),
        "kind": cfg["kind"],
        "seed": cfg["seed"],
        "threads": threads,
        "versions": _versions(),
    }
    artifacts["manifest.json"] = _json_text(manifest)

    outdir = cfg.get("out") or "gaugesim-run"
    try:
        os.makedirs(outdir, exist_ok=True)
        for name in sorted(artifacts):
            with open(os.path.join(outdir, name), "w", newline="") as fh:
                fh.write(artifacts[name])
    except OSError as exc:
        print("i/o failure: %s" % exc, file=sys.stderr)
        return 4
    for name in sorted(artifacts):
        print(os.path.join(outdir, name))
    return 0


def cmd_validate(args):
    try:
        resolve_config(_load_raw(args.config))
    except ConfigError as exc:
        for e in exc.errors:
            print("config error: %s" % e, file=sys.stderr)
        return 2
    print("ok")
    return 0


def cmd_plot(args):
    try:
        with open(args.csv) as fh:
            text = fh.read()
    except OSError as exc:
        print("plot error: cannot read %s (%s)" % (args.csv, exc),
              file=sys.stderr)
        return 2
    try:
        svg = heatmap_svg(text)
    except ValueError as exc:
        print("plot error: %s" % exc, file=sys.stderr)
        return 2
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(svg)
    except OSError as exc:
        print("i/o failure: %s" % exc, file=sys.stderr)
        return 4
    print(args.out)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="gaugesim",
        description="Synthetic-gauge-field lattice simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="path to a JSON config")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--threads", type=int, help="worker process count")

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config", help="path to a JSON config")

    p_plot = sub.add_parser("plot", help="render a pattern CSV as SVG")
    p_plot.add_argument("csv", help="pattern CSV produced by a run")
    p_plot.add_argument("--out", required=True, help="output SVG path")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "validate":
        return cmd_validate(args)
    return cmd_plot(args)


if __name__ == "__main__":
    sys.exit(main())
