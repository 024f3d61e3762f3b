"""Interference, localization, and transport experiments.

Each routine assembles a model from the building blocks in
:mod:`gaugesim.model`, runs it, and reduces the state histories to the
observable the experiment is after: an interference pattern versus
programmed loop phase, site populations resolved by distance along a
tilted chain, or the time-averaged transverse displacement that signals
a Hall response.  Lab-frame (H1/H2) and effective (H3/H4) variants share
one code path wherever the observable is the same.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import device as _dev
from .evolve import DEFAULT_TOL, evolve_lindblad, evolve_schrodinger
from .lattice import (GaugeField, build_lattice, linear_potential,
                      uniform_field_gauge)
from .model import (ModelSpec, chain_tone_layout, device_tone_set,
                    ring_tone_layout, synthetic_efield_tones)

TWO_PI = 2.0 * math.pi


def plaquette_lattice():
    """Smallest closed loop: a 2x2 plaquette and its boundary cycle."""
    return build_lattice(2, 2), [1, 2, 4, 3]


def ab_ring_lattice():
    """Eight-site ring: a 3x3 grid with the center site removed."""
    lat = build_lattice(3, 3, active_sites=set(range(1, 10)) - {5})
    return lat, [1, 2, 3, 6, 9, 8, 7, 4]


def perimeter_ring_lattice():
    """Twelve-site ring around the full 4x4 array."""
    lat = build_lattice(4, 4)
    return lat, [1, 2, 3, 4, 8, 12, 16, 15, 14, 13, 9, 5]


def _cycle_bonds(cycle):
    n = len(cycle)
    return [(cycle[k], cycle[(k + 1) % n]) for k in range(n)]


def _check_placement(cycle, placement):
    bonds = set(_cycle_bonds(cycle))
    for b in placement:
        if tuple(b) not in bonds:
            raise ValueError(
                "placement bond %s is not a forward bond of the cycle" % (b,))
    total = sum(placement.values())
    if abs(total - 1.0) > 1e-12:
        raise ValueError("placement weights must sum to 1, got %g" % total)


@dataclass
class InterferencePattern:
    """Target-site population on a (loop phase) x (time) grid."""

    phases: np.ndarray
    times: np.ndarray
    populations: np.ndarray
    source: int
    target: int
    meta: dict = field(default_factory=dict)


def aharonov_bohm_scan(variant, lattice, cycle, placement, phases, times,
                       rate=None, bare_rates=None, ratio=0.94, source=None,
                       target=None, tol=DEFAULT_TOL):
    """Interference pattern of a ring versus programmed loop phase.

    ``placement`` maps forward bonds of ``cycle`` to weights summing to
    one; each scanned phase value is distributed over those bonds, so
    different placements realize the same loop phase in different
    gauges.  ``variant`` selects how the phases are realized: "H4"/"H3"
    stamp them into a static gauge field (uniform ``rate`` or per-bond
    ``bare_rates``), "H1"/"H2" program the modulation tones of a
    lab-frame model with bare rate(s) ``rate``/``bare_rates`` and drive
    ratio ``ratio``.

    Returns the population of ``target`` (default: the site opposite
    the source on the cycle) for every phase and time.
    """
    placement = dict(placement)
    _check_placement(cycle, placement)
    if rate is None and bare_rates is None:
        raise ValueError("provide rate or bare_rates")
    phases = np.asarray(phases, dtype=float)
    times = np.asarray(times, dtype=float)
    if source is None:
        source = cycle[0]
    if target is None:
        target = cycle[len(cycle) // 2]

    nn_keys = [b.key for b in lattice.bonds]
    pops = np.empty((phases.size, times.size))
    for k, ph in enumerate(phases):
        weighted = {b: w * ph for b, w in placement.items()}
        if variant in ("H4", "H3"):
            gauge = GaugeField(weighted)
            if variant == "H4":
                m = ModelSpec("H4", lattice, rate=rate, gauge=gauge)
            else:
                rates = dict(bare_rates) if bare_rates else \
                    {key: rate for key in nn_keys}
                m = ModelSpec("H3", lattice, rates=rates, gauge=gauge)
        elif variant in ("H1", "H2"):
            onsite, tones = ring_tone_layout(lattice, cycle, weighted,
                                             ratio=ratio)
            if variant == "H2":
                m = ModelSpec("H2", lattice, onsite=onsite, rate=rate,
                              tones=list(tones))
            else:
                rates = dict(bare_rates) if bare_rates else \
                    {key: rate for key in nn_keys}
                m = ModelSpec("H1", lattice, onsite=onsite, rates=rates,
                              tones=list(tones))
        else:
            raise ValueError("unknown variant %r" % variant)
        res = evolve_schrodinger(m, source, times, tol=tol)
        pops[k] = res.site_population(target)
    return InterferencePattern(
        phases=phases, times=times, populations=pops,
        source=source, target=target,
        meta={"variant": variant, "cycle": list(cycle),
              "placement": {tuple(b): w for b, w in placement.items()}},
    )


def pattern_to_csv(pattern):
    lines = ["phase,time_us,population"]
    for k, ph in enumerate(pattern.phases):
        for j, t in enumerate(pattern.times):
            lines.append("%s,%s,%s" % (repr(float(ph)), repr(float(t)),
                                       repr(float(pattern.populations[k, j]))))
    return "\n".join(lines) + "\n"


DEFAULT_PLACEMENTS = {
    "lower": {(2, 3): 1.0},
    "upper": {(8, 7): 1.0},
    "split": {(1, 2): 1.0 / 3.0, (3, 6): 1.0 / 3.0, (9, 8): 1.0 / 3.0},
}


@dataclass
class GaugeCheck:
    patterns: dict
    max_spread: float
    meta: dict = field(default_factory=dict)


def gauge_check(placements=None, phases=None, times=None, variant="H4",
                rate=TWO_PI * 2.0, ratio=0.94, tol=DEFAULT_TOL):
    """Same loop phase, different bond placements: patterns must agree.

    Runs the eight-site ring scan once per placement and reports the
    worst pointwise disagreement across the common grid.  Physical
    observables depend on bond phases only through the loop sum, so any
    spread beyond integrator error means the phase bookkeeping is
    broken.
    """
    lat, cycle = ab_ring_lattice()
    if placements is None:
        placements = DEFAULT_PLACEMENTS
    if phases is None:
        phases = np.linspace(0.0, TWO_PI, 41)
    if times is None:
        times = np.linspace(0.0, 8.0 / rate, 121)
    patterns = {}
    for name, pl in placements.items():
        patterns[name] = aharonov_bohm_scan(
            variant, lat, cycle, pl, phases, times,
            rate=rate, ratio=ratio, tol=tol)
    stack = np.stack([p.populations for p in patterns.values()])
    spread = float(np.max(stack.max(axis=0) - stack.min(axis=0)))
    return GaugeCheck(patterns=patterns, max_spread=spread,
                      meta={"variant": variant, "rate": rate})


@dataclass
class StarkResult:
    """Tilted-chain evolution resolved by distance from the source."""

    result: object
    distances: np.ndarray
    field: float
    rate: float
    meta: dict = field(default_factory=dict)

    @property
    def revival_time(self):
        if self.field == 0.0:
            return math.inf
        return TWO_PI / abs(self.field)

    def beyond(self, cutoff):
        """Total population at sites farther than ``cutoff`` hops."""
        mask = np.abs(self.distances) > cutoff
        return self.result.populations[:, mask].sum(axis=1)


def wannier_stark_chain(field_strength, n_sites=11, rate=TWO_PI * 2.0,
                        times=None, variant="H4", j0=TWO_PI * 5.9,
                        ratio=0.94, source=None, noise=None,
                        tol=DEFAULT_TOL):
    """Chain under a uniform site-to-site energy tilt.

    The tilt ``field_strength`` (rad/us per hop) localizes transport:
    spread is confined to roughly 4 J / F hops and the initial site
    revives at multiples of 2 pi / F.  "H4" applies the tilt as a
    static potential; "H1" programs it as per-tone frequency drifts on
    a modulated chain, the synthetic electric field.  A NoiseSpec in
    ``noise`` switches to dissipative evolution.
    """
    lat = build_lattice(1, n_sites)
    chain = list(lat.sites)
    if source is None:
        source = chain[n_sites // 2]
    if times is None:
        times = np.linspace(0.0, 5.0 / rate, 201)
    pot = linear_potential(lat, field_strength, (1.0, 1.0))
    if variant == "H4":
        m = ModelSpec("H4", lat, rate=rate, potential=pot)
    elif variant == "H1":
        onsite, tones = chain_tone_layout(lat, chain, ratio=ratio)
        tones = synthetic_efield_tones(tones, pot)
        rates = {b.key: j0 for b in lat.bonds}
        m = ModelSpec("H1", lat, onsite=onsite, rates=rates,
                      tones=list(tones))
    else:
        raise ValueError("variant must be 'H4' or 'H1', got %r" % variant)
    if noise is not None:
        res = evolve_lindblad(m, source, times, noise, tol=max(tol, 1e-10))
    else:
        res = evolve_schrodinger(m, source, times, tol=tol)
    j_source = chain.index(source)
    dist = np.array([chain.index(s) - j_source for s in res.sites], float)
    return StarkResult(result=res, distances=dist, field=float(field_strength),
                       rate=float(rate),
                       meta={"variant": variant, "source": source,
                             "n_sites": n_sites})


def mean_positions(result, lattice):
    """Population-weighted mean rotated-frame coordinates per time."""
    coords = np.array([lattice.position(s) for s in result.sites])
    tot = result.populations.sum(axis=1)
    xbar = result.populations @ coords[:, 0] / tot
    ybar = result.populations @ coords[:, 1] / tot
    return xbar, ybar


@dataclass
class HallRecord:
    flux: float
    field: float
    xbar: float
    ybar: float


@dataclass
class HallScan:
    records: list
    t_window: float
    rate: float
    meta: dict = field(default_factory=dict)

    def ybar_grid(self):
        """(fluxes, fields, ybar[i, j]) from the flat record list."""
        fluxes = sorted({r.flux for r in self.records})
        fields = sorted({r.field for r in self.records})
        grid = np.full((len(fluxes), len(fields)), np.nan)
        for r in self.records:
            grid[fluxes.index(r.flux), fields.index(r.field)] = r.ybar
        return np.array(fluxes), np.array(fields), grid


def hall_experiment(fluxes, fields, variant="H4", rate=TWO_PI * 2.0,
                    layout="landau", t_window=None, n_times=41, source=None,
                    seed=None, amplitudes=None, tol=DEFAULT_TOL):
    """Transverse drift under crossed flux and in-plane force.

    For every (flux, field) pair the 4x4 array is prepared in a single
    site on the symmetry diagonal, evolved over a short window, and the
    time-averaged transverse displacement <ybar> is recorded.  Fields
    are given in units of the hopping rate; the potential drops along
    the longitudinal (rotated x) axis.  <ybar> vanishes when either
    knob is zero and is odd under flipping either sign, the transport
    signature of a synthetic Lorentz force.

    variant "H4" uses a static gauge field with uniform hopping;
    variant "H1" programs the flux through the device tone set with
    seeded bare-rate disorder, and supports zero field only (a 2D tilt
    has no one-dimensional drift realization).
    """
    if variant == "H1":
        lat = _dev.device_lattice()
    else:
        lat = build_lattice(4, 4)
    if t_window is None:
        t_window = 0.25 / rate
    times = np.linspace(0.0, t_window, n_times)
    if source is None:
        source = lat.site_at(1, 1)

    records = []
    for ph in fluxes:
        for f in fields:
            strength = f * rate
            if variant == "H4":
                gauge = uniform_field_gauge(lat, ph, layout=layout)
                pot = linear_potential(lat, strength, (1.0, 0.0)) \
                    if f != 0.0 else None
                m = ModelSpec("H4", lat, rate=rate, gauge=gauge,
                              potential=pot)
            elif variant == "H1":
                if f != 0.0:
                    raise ValueError(
                        "lab-frame Hall runs support zero field only")
                onsite = _dev.onsite_frequencies()
                rates = _dev.bare_rates(seed, lat)
                tones = device_tone_set(ph, amplitudes)
                m = ModelSpec("H1", lat, onsite=onsite, rates=rates,
                              tones=list(tones))
            else:
                raise ValueError("variant must be 'H4' or 'H1', got %r"
                                 % variant)
            res = evolve_schrodinger(m, source, times, tol=tol)
            xs, ys = mean_positions(res, lat)
            xbar = float(np.trapezoid(xs, times) / t_window)
            ybar = float(np.trapezoid(ys, times) / t_window)
            records.append(HallRecord(flux=float(ph), field=float(f),
                                      xbar=xbar, ybar=ybar))
    return HallScan(records=records, t_window=float(t_window),
                    rate=float(rate),
                    meta={"variant": variant, "layout": layout,
                          "seed": seed, "source": source})


def hall_coefficient(scan):
    """Least-squares slope of <ybar> versus field, one value per flux.

    The abscissa is the field in units of the hopping rate, matching
    ``hall_experiment``; a symmetric field grid makes the fit immune to
    any even-in-field contamination.
    """
    fluxes, fields, grid = scan.ybar_grid()
    if fields.size < 2:
        raise ValueError("need at least two field values per flux")
    out = {}
    x = fields - fields.mean()
    for i, ph in enumerate(fluxes):
        out[float(ph)] = float((x @ grid[i]) / (x @ x))
    return out


def hall_to_csv(scan):
    lines = ["flux,field,xbar,ybar"]
    for r in scan.records:
        lines.append("%s,%s,%s,%s" % (repr(r.flux), repr(r.field),
                                      repr(r.xbar), repr(r.ybar)))
    return "\n".join(lines) + "\n"


@dataclass
class ShotSample:
    """Finite-shot readout with vacuum post-selection."""

    times: np.ndarray
    sites: tuple
    frequencies: np.ndarray
    stderr: np.ndarray
    kept: np.ndarray
    n_shots: int
    seed: int


def sample_shots(result, n_shots, seed):
    """Multinomial readout of an evolution, vacuum shots discarded.

    Each time point draws ``n_shots`` outcomes over the site
    populations plus a vacuum category absorbing the missing weight
    (decay during a dissipative run, or trace leakage).  Vacuum counts
    are dropped and the remaining shots renormalized, the standard
    post-selection; the binomial standard error uses the kept count.
    Raises if every shot at some time lands in vacuum.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    pops = np.clip(result.populations, 0.0, None)
    if result.vacuum is not None:
        vac = np.clip(result.vacuum, 0.0, None)
    else:
        vac = np.clip(1.0 - pops.sum(axis=1), 0.0, None)
    probs = np.concatenate([pops, vac[:, None]], axis=1)
    probs /= probs.sum(axis=1, keepdims=True)

    rng = np.random.default_rng(seed)
    nt, ns = pops.shape
    freqs = np.empty((nt, ns))
    errs = np.empty((nt, ns))
    kept = np.empty(nt, dtype=int)
    for i in range(nt):
        counts = rng.multinomial(n_shots, probs[i])
        k = n_shots - counts[-1]
        if k == 0:
            raise RuntimeError(
                "all %d shots vacuumed at t=%g" % (n_shots, result.times[i]))
        kept[i] = k
        freqs[i] = counts[:-1] / k
        errs[i] = np.sqrt(freqs[i] * (1.0 - freqs[i]) / k)
    return ShotSample(times=result.times, sites=result.sites,
                      frequencies=freqs, stderr=errs, kept=kept,
                      n_shots=int(n_shots), seed=int(seed))
