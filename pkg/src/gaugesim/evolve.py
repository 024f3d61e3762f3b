"""Time evolution of lattice models.

Static effective models are propagated exactly through their
eigendecomposition.  Anything time dependent (lab-frame tones, drifting
bond phases, open-system dynamics) goes through the adaptive
Dormand-Prince kernels, with the step size capped well below the fastest
angular scale in the problem: the cap is ``1 / (step_divisor * scale)``
with ``scale`` the largest of the static level offsets, tone frequencies
plus amplitudes, and total hopping strength per site.

Open-system evolution appends a vacuum level to the site basis: decay
channels empty each site into it at 1/T1, and pure dephasing removes
coherence at 1/Tphi per site without moving population.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._backend import BACKEND
from .model import build_hamiltonian

DEFAULT_TOL = 1e-10
DEFAULT_DIVISOR = 50.0


@dataclass
class NoiseSpec:
    """Per-site decay and dephasing times in us.

    Scalars broadcast over all sites.  ``t1`` is the energy relaxation
    time (site population leaks to the vacuum level at 1/t1); ``tphi`` the
    pure dephasing time: the site's coherence with any other level loses
    an extra factor exp(-t/tphi).
    """

    t1: object = None
    tphi: object = None

    def _per_site(self, value, n):
        if value is None:
            return np.zeros(n)
        arr = np.asarray(value, dtype=float)
        if arr.ndim == 0:
            arr = np.full(n, float(arr))
        if arr.shape != (n,):
            raise ValueError("need one time constant per site")
        if np.any(arr <= 0):
            raise ValueError("time constants must be positive")
        return 1.0 / arr

    def rates(self, n_sites):
        """(gamma1, gamma_phi) arrays; gamma_phi is the coherence rate."""
        g1 = self._per_site(self.t1, n_sites)
        gphi = self._per_site(self.tphi, n_sites)
        return g1, gphi


@dataclass
class EvolutionResult:
    """Sampled trajectory of site populations.

    ``populations[m, k]`` is the population of ``sites[k]`` at
    ``times[m]``; ``total`` sums them (loss shows up as total < 1).
    Schrodinger runs keep the complex amplitudes in ``states``; open
    runs keep density matrices in ``rhos`` (vacuum level last) and the
    vacuum population in ``vacuum``.
    """

    times: np.ndarray
    sites: list
    populations: np.ndarray
    total: np.ndarray
    states: np.ndarray = None
    rhos: np.ndarray = None
    vacuum: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def site_population(self, site):
        return self.populations[:, self.sites.index(site)]


def _as_state(psi0, sites):
    idx = {s: k for k, s in enumerate(sites)}
    if isinstance(psi0, (int, np.integer)):
        if psi0 not in idx:
            raise ValueError("site %d is not active" % psi0)
        v = np.zeros(len(sites), dtype=complex)
        v[idx[psi0]] = 1.0
        return v
    if isinstance(psi0, dict):
        v = np.zeros(len(sites), dtype=complex)
        for s, a in psi0.items():
            if s not in idx:
                raise ValueError("site %d is not active" % s)
            v[idx[s]] = a
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("initial state has zero norm")
        return v / n
    v = np.asarray(psi0, dtype=complex)
    if v.shape != (len(sites),):
        raise ValueError("state length %d != %d active sites" % (v.size, len(sites)))
    return v.copy()


def _tone_arrays(model):
    sites = model.sites
    idx = {s: k for k, s in enumerate(sites)}
    tones = [t for t in model.tones if t.site in idx]
    ts = np.array([idx[t.site] for t in tones], dtype=np.int64)
    ta = np.array([t.amp for t in tones], dtype=float)
    tf = np.array([t.freq + t.drift for t in tones], dtype=float)
    tp = np.array([t.phase for t in tones], dtype=float)
    return ts, ta, tf, tp


def _offdiagonal(model):
    h = build_hamiltonian(model, 0.0)
    np.fill_diagonal(h, 0.0)
    return np.ascontiguousarray(h)


def rate_scale(model):
    """Largest angular rate in the model, rad/us."""
    cands = [1e-6]
    sd = model.static_diagonal()
    if sd.size:
        cands.append(np.abs(sd).max())
    for tone in model.tones:
        cands.append(abs(tone.freq + tone.drift) + abs(tone.amp))
    off = np.abs(_offdiagonal(model))
    if off.size:
        cands.append(off.sum(axis=1).max())
    if model.gauge is not None:
        for v in model.gauge.drift.values():
            cands.append(abs(v))
    return float(max(cands))


def step_cap(model, step_divisor=DEFAULT_DIVISOR):
    return 1.0 / (step_divisor * rate_scale(model))


def _needs_kernel(model):
    if model.is_lab_frame:
        return bool(model.tones)
    return not model.gauge.is_static


def evolve_schrodinger(model, psi0, times, tol=DEFAULT_TOL,
                       step_divisor=DEFAULT_DIVISOR):
    """Closed-system evolution; returns an EvolutionResult.

    ``psi0`` may be a site id, a {site: amplitude} dict (normalized), or
    an amplitude vector over the active sites.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a nonempty 1-d array")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be nondecreasing")
    sites = model.sites
    psi = _as_state(psi0, sites)

    if not _needs_kernel(model):
        h = build_hamiltonian(model, 0.0)
        w, v = np.linalg.eigh(h)
        c0 = v.conj().T @ psi
        phases = np.exp(-1j * np.outer(times - times[0], w)) * c0[None, :]
        states = phases @ v.T
        # states[m] = v @ (exp(-i w t) c0)
    elif model.is_lab_frame:
        ts, ta, tf, tp = _tone_arrays(model)
        hoff = _offdiagonal(model)
        diag0 = model.static_diagonal()
        states = _kernels.dp45_tones(
            diag0, ts, ta, tf, tp, hoff, psi, times, tol,
            step_cap(model, step_divisor),
        )
    else:
        sites_idx = {s: k for k, s in enumerate(sites)}
        hbase = _offdiagonal(model)
        drift = np.zeros(hbase.shape, dtype=float)
        for (i, j), d in model.gauge.drift.items():
            if i in sites_idx and j in sites_idx and d != 0.0:
                drift[sites_idx[i], sites_idx[j]] = d
                drift[sites_idx[j], sites_idx[i]] = -d
        diagv = model.static_diagonal()
        states = _kernels.dp45_drift(
            hbase, drift, diagv, psi, times, tol,
            step_cap(model, step_divisor),
        )

    pops = np.abs(states) ** 2
    return EvolutionResult(
        times=times,
        sites=list(sites),
        populations=pops,
        total=pops.sum(axis=1),
        states=states,
        meta={"backend": BACKEND, "tol": tol},
    )


def _as_density(rho0, sites, dim):
    idx = {s: k for k, s in enumerate(sites)}
    if isinstance(rho0, (int, np.integer)):
        rho = np.zeros((dim, dim), dtype=complex)
        rho[idx[rho0], idx[rho0]] = 1.0
        return rho
    arr = np.asarray(rho0, dtype=complex)
    if arr.ndim == 1:
        v = np.zeros(dim, dtype=complex)
        v[: arr.size] = arr
        return np.outer(v, v.conj())
    rho = np.zeros((dim, dim), dtype=complex)
    rho[: arr.shape[0], : arr.shape[1]] = arr
    return rho


def evolve_lindblad(model, rho0, times, noise, tol=1e-9,
                    step_divisor=DEFAULT_DIVISOR):
    """Open-system evolution with decay into a vacuum level.

    ``noise`` is a NoiseSpec; the density matrix gains a final row and
    column for the vacuum.  The trace is conserved exactly by the
    generator (population lost from the sites accumulates in the
    vacuum), so trace drift measures integration error.
    """
    times = np.asarray(times, dtype=float)
    sites = model.sites
    ns = len(sites)
    dim = ns + 1
    vac = dim - 1

    g1, gphi = noise.rates(ns)
    g1 = np.concatenate([g1, [0.0]])
    gphi = np.concatenate([gphi, [0.0]])

    # elementwise decoherence coefficients: diagonal loses population at
    # gamma1, off-diagonal (j, k) decays at the half-sum of the two
    # levels' gamma1 plus the full sum of their dephasing rates
    decay = np.zeros((dim, dim))
    for a in range(dim):
        for b in range(dim):
            if a == b:
                decay[a, b] = -g1[a]
            else:
                decay[a, b] = -0.5 * (g1[a] + g1[b]) - (gphi[a] + gphi[b])
    feed = g1.copy()

    hoff_s = _offdiagonal(model)
    hoff = np.zeros((dim, dim), dtype=complex)
    hoff[:ns, :ns] = hoff_s
    diag0 = np.zeros(dim)
    diag0[:ns] = model.static_diagonal()
    ts, ta, tf, tp = _tone_arrays(model)

    rho = _as_density(rho0, sites, dim)
    rhos = _kernels.dp45_lindblad(
        diag0, ts, ta, tf, tp, np.ascontiguousarray(hoff), decay, feed,
        vac, rho, times, tol, step_cap(model, step_divisor),
    )

    diag = np.real(np.einsum("mii->mi", rhos))
    pops = diag[:, :ns]
    return EvolutionResult(
        times=times,
        sites=list(sites),
        populations=pops,
        total=pops.sum(axis=1),
        rhos=rhos,
        vacuum=diag[:, vac],
        meta={
            "backend": BACKEND,
            "tol": tol,
            "trace": diag.sum(axis=1),
        },
    )


def disorder_average(model, psi0, times, sigma, n_samples, seed,
                     tol=DEFAULT_TOL, step_divisor=DEFAULT_DIVISOR):
    """Average closed-system populations over quasi-static detuning noise.

    Each sample shifts every active site's diagonal by an independent
    Normal(0, sigma) offset (rad/us); offsets are drawn up front from a
    single seeded generator, so results do not depend on execution
    order.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    sites = model.sites
    draws = rng.normal(0.0, sigma, size=(n_samples, len(sites)))

    acc = None
    for k in range(n_samples):
        offsets = np.zeros(model.lattice.n_total)
        for c, s in enumerate(sites):
            offsets[s - 1] = draws[k, c]
        res = evolve_schrodinger(
            model.with_diagonal_offsets(offsets), psi0, times,
            tol=tol, step_divisor=step_divisor,
        )
        if acc is None:
            acc = res.populations.copy()
        else:
            acc += res.populations
    pops = acc / n_samples
    return EvolutionResult(
        times=np.asarray(times, dtype=float),
        sites=list(sites),
        populations=pops,
        total=pops.sum(axis=1),
        meta={"sigma": sigma, "n_samples": n_samples, "seed": seed},
    )


def result_to_csv(result):
    """Serialize populations as CSV: time_us, site_<id>..., total."""
    cols = ["time_us"] + ["site_%d" % s for s in result.sites] + ["total"]
    lines = [",".join(cols)]
    for m, t in enumerate(result.times):
        vals = [repr(float(t))]
        vals += [repr(float(p)) for p in result.populations[m]]
        vals.append(repr(float(result.total[m])))
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"
