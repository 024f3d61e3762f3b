"""Model hierarchy for parametrically coupled lattices.

Four model variants share one container:

* ``H1`` -- lab frame: static on-site frequencies, flux-pulse tones that
  modulate those frequencies sinusoidally, and static real couplings on
  every stored bond, including beyond-nearest-neighbour ones.
* ``H2`` -- lab frame with a single uniform nearest-neighbour coupling
  and no longer-range terms; the idealized version of H1.
* ``H3`` -- effective rotating frame: per-bond hopping rates with Peierls
  phases from a GaugeField, optional on-site potential.
* ``H4`` -- effective frame with one uniform hopping rate; the textbook
  flux lattice.

The bridge between the frames is the usual sideband picture: modulating
the frequency of site m as ``amp * sin(freq*t + phase)`` against a
static coupling J0 to a neighbour detuned by exactly ``freq`` produces
an effective hopping of magnitude ``J0 * J1(amp/freq)``.  The realized
hopping phase on the owned bond (m -> n) is

    phase + sign(freq) * pi/2    (up to a site-local gauge term),

so a tone that should imprint a target phase ``target`` is programmed
with ``phase = target - sign(freq) * pi/2``.  The pi/2 offsets are pure
gauge whenever every closed loop crosses as many positive-frequency
owners as negative ones, which all layouts built here arrange.

All rates and frequencies are angular (rad/us); times are us.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import GaugeField, reduce_phase
from . import device as _dev

HALF_PI = 0.5 * math.pi

_SERIES_CUTOFF = 12.0
_MILLER_RESCALE = 1e10


def _bessel_series(n, x):
    # ascending power series; adequate to ~1e-13 absolute for |x| <= 12
    half = 0.5 * x
    term = 1.0
    for k in range(1, n + 1):
        term *= half / k
    total = term
    for k in range(1, 60):
        term *= -(half * half) / (k * (n + k))
        total += term
        if abs(term) < 1e-18 * abs(total) + 1e-300:
            break
    return total


def _bessel_miller(n, x):
    # downward recurrence from above, normalized via J0 + 2*sum J_2k = 1;
    # only called for |x| > _SERIES_CUTOFF so the 2k/x factors are tame
    m = max(n + 20, int(1.25 * x) + 25)
    if m % 2:
        m += 1
    jp = 0.0
    jc = 1e-30
    even_sum = 0.0
    result = 0.0
    for k in range(m, 0, -1):
        jm = (2.0 * k / x) * jc - jp
        jp = jc
        jc = jm
        if k - 1 == n:
            result = jc
        if (k - 1) % 2 == 0 and k - 1 > 0:
            even_sum += jc
        if abs(jc) > _MILLER_RESCALE:
            jc /= _MILLER_RESCALE
            jp /= _MILLER_RESCALE
            even_sum /= _MILLER_RESCALE
            result /= _MILLER_RESCALE
    norm = jc + 2.0 * even_sum
    return result / norm


def _bessel_scalar(n, x):
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -sign
    if x < 0.0:
        x = -x
        if n % 2:
            sign = -sign
    if x <= _SERIES_CUTOFF:
        return sign * _bessel_series(n, x)
    return sign * _bessel_miller(n, x)


def bessel_j(n, x):
    """Bessel function of the first kind, integer order.

    Accepts scalar or array ``x``; negative order and argument follow
    from the reflection identities J_{-n} = (-1)^n J_n and
    J_n(-x) = (-1)^n J_n(x).
    """
    n = int(n)
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return _bessel_scalar(n, float(arr))
    out = np.empty(arr.shape, dtype=float)
    flat_in = arr.ravel()
    flat_out = out.ravel()
    for k in range(flat_in.size):
        flat_out[k] = _bessel_scalar(n, flat_in[k])
    return out


def effective_rate(j0, amp, freq):
    """Resonant parametric hopping rate: j0 * J1(amp/freq).

    Odd in ``amp`` and invariant under flipping both amp and freq.
    """
    if freq == 0.0:
        raise ValueError("modulation frequency must be nonzero")
    return j0 * bessel_j(1, amp / freq)


def effective_rate_dual(j0, amp, freq, other_amp, other_freq):
    """Hopping rate on a bond whose owner also drives a second tone.

    The spectator tone at ``other_freq`` spreads the owner's sideband
    weight, reducing the resonant rate by J0(other_amp/other_freq).
    """
    if other_freq == 0.0:
        raise ValueError("modulation frequency must be nonzero")
    return effective_rate(j0, amp, freq) * bessel_j(0, other_amp / other_freq)


def frequency_shift_factor(theta, dtheta):
    """Renormalization of a static coupling between two modulated sites.

    ``theta`` and ``dtheta`` are the common (sum) and differential
    frequency-excursion indices of the pair; the static rate is rescaled
    by J0(theta/2) * J0(dtheta/2).
    """
    return bessel_j(0, 0.5 * theta) * bessel_j(0, 0.5 * dtheta)


@dataclass(frozen=True)
class Tone:
    """One parametric modulation tone.

    ``freq`` is signed: its sign is the sign of the frequency step the
    tone bridges, and enters the programmed-phase rule.  ``drift`` adds a
    linear phase ramp (rad/us), the lab-frame knob for synthetic electric
    fields.  ``bonds`` records the owned bonds (owner first) the tone is
    resonant with; it is bookkeeping, not physics.
    """

    site: int
    amp: float
    freq: float
    phase: float
    drift: float = 0.0
    bonds: tuple = ()


def tone_phase_for_target(target, freq):
    """Programmed tone phase that realizes ``target`` on the owned bond."""
    return float(reduce_phase(target - math.copysign(HALF_PI, freq)))


def realized_bond_phase(tone):
    """Loop-relevant phase the tone imprints on its owned bond(s)."""
    return float(reduce_phase(tone.phase + math.copysign(HALF_PI, tone.freq)))


@dataclass
class ModelSpec:
    """A concrete lattice model, one of the four variants.

    Lab-frame variants (H1, H2) use ``onsite`` plus ``tones``; effective
    variants (H3, H4) use ``gauge``.  ``rates`` carries per-bond rates
    (bare for H1, effective for H3); ``rate`` is the uniform coupling of
    H2 (bare) and H4 (effective).  ``potential`` adds to the diagonal in
    any variant.
    """

    variant: str
    lattice: object
    onsite: np.ndarray = None
    rates: dict = None
    rate: float = None
    tones: list = field(default_factory=list)
    gauge: GaugeField = None
    potential: object = None
    extra_diag: np.ndarray = None

    def __post_init__(self):
        if self.variant not in ("H1", "H2", "H3", "H4"):
            raise ValueError("unknown variant %r" % self.variant)
        lab = self.variant in ("H1", "H2")
        if lab and self.onsite is None:
            raise ValueError("%s needs on-site frequencies" % self.variant)
        if not lab and self.gauge is None:
            self.gauge = GaugeField()
        if self.variant in ("H1", "H3") and self.rates is None:
            raise ValueError("%s needs per-bond rates" % self.variant)
        if self.variant in ("H2", "H4") and self.rate is None:
            raise ValueError("%s needs a uniform rate" % self.variant)
        if self.variant == "H1":
            missing = [b.key for b in self.lattice.bonds if b.key not in self.rates]
            if missing:
                raise ValueError("missing rates for bonds %s" % missing)

    @property
    def is_lab_frame(self):
        return self.variant in ("H1", "H2")

    @property
    def sites(self):
        return self.lattice.sites

    def bond_rate(self, i, j):
        key = (i, j) if i < j else (j, i)
        if self.rates is not None:
            if key in self.rates:
                return float(self.rates[key])
            if self.variant == "H3":
                return 0.0
            # H1: beyond-NN bonds default to zero unless listed
            return 0.0
        return float(self.rate)

    def static_diagonal(self):
        """Time-independent diagonal (rad/us) over active sites."""
        sites = self.sites
        d = np.zeros(len(sites), dtype=float)
        for k, s in enumerate(sites):
            if self.onsite is not None:
                d[k] += self.onsite[s - 1]
            if self.potential is not None:
                d[k] += self.potential.values[s - 1]
            if self.extra_diag is not None:
                d[k] += self.extra_diag[s - 1]
        return d

    def diagonal(self, t=0.0):
        """Instantaneous diagonal (rad/us) over active sites."""
        sites = self.sites
        idx = {s: k for k, s in enumerate(sites)}
        d = self.static_diagonal()
        if self.is_lab_frame:
            for tone in self.tones:
                k = idx.get(tone.site)
                if k is None:
                    continue
                d[k] += tone.amp * math.sin(
                    (tone.freq + tone.drift) * t + tone.phase
                )
        return d

    def with_diagonal_offsets(self, offsets):
        """Copy of the model with per-site (id-indexed) diagonal shifts."""
        extra = np.asarray(offsets, dtype=float)
        if self.extra_diag is not None:
            extra = extra + self.extra_diag
        return replace(self, extra_diag=extra)


def build_hamiltonian(model, t=0.0):
    """Dense instantaneous Hamiltonian over the active-site basis.

    The basis is ``model.lattice.sites`` in ascending order.  Element
    [i_row, j_col] multiplies the amplitude on site j; hopping phases
    enter as ``J * exp(-1i * phi_ij)`` with phi evaluated at time t.
    """
    sites = model.sites
    idx = {s: k for k, s in enumerate(sites)}
    n = len(sites)
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = model.diagonal(t)

    if model.is_lab_frame:
        bond_lists = [model.lattice.bonds]
        if model.variant == "H1":
            bond_lists.append(model.lattice.nnn_bonds)
        for bonds in bond_lists:
            for b in bonds:
                i, j = b.key
                val = model.bond_rate(i, j)
                if val == 0.0:
                    continue
                h[idx[i], idx[j]] += val
                h[idx[j], idx[i]] += val
        return h

    for b in model.lattice.bonds:
        i, j = b.key
        val = model.bond_rate(i, j)
        if val == 0.0:
            continue
        phi = model.gauge.phase(i, j, t)
        h[idx[i], idx[j]] = val * np.exp(-1j * phi)
        h[idx[j], idx[i]] = val * np.exp(1j * phi)
    return h


def hamiltonian_to_csv(h):
    """Serialize a Hamiltonian snapshot as CSV (row, col, re, im)."""
    h = np.asarray(h)
    lines = ["row,col,re,im"]
    for r in range(h.shape[0]):
        for c in range(h.shape[1]):
            v = complex(h[r, c])
            lines.append("%d,%d,%s,%s" % (r, c, repr(v.real), repr(v.imag)))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# tone layout builders

# frequency-step palette, MHz; adjacent magnitudes always differ so a
# site's tone is never resonant with its other bond
_STEP_PALETTE_MHZ = (155.0, 115.0, 165.0, 105.0, 170.0, 120.0)


def _ring_steps(n):
    # steps around the ring, rad/us: first half alternates sign through
    # the palette, second half is the negation, so the walk closes and
    # the signed pi/2 offsets cancel around the loop
    if n % 2 or n < 4:
        raise ValueError("ring length must be even and at least 4")
    half = n // 2
    if half > len(_STEP_PALETTE_MHZ):
        raise ValueError("ring length %d exceeds the step palette" % n)
    first = [
        (1 if k % 2 == 0 else -1) * _STEP_PALETTE_MHZ[k] for k in range(half)
    ]
    steps = first + [-v for v in first]
    return [2.0 * math.pi * v for v in steps]


def ring_tone_layout(lattice, ring, bond_targets=None, ratio=_dev.DRIVE_RATIO):
    """On-site frequencies and tones realizing a ring of parametric bonds.

    ``ring`` lists the site ids around the cycle; site ``ring[k]`` owns
    the bond to ``ring[k+1]``.  ``bond_targets`` maps an owned bond
    (owner, neighbour) to the hopping phase it should realize; unlisted
    bonds get phase zero.  Returns ``(onsite, tones)`` with ``onsite``
    indexed by site id - 1.

    The frequency steps are chosen so that equal numbers of positive and
    negative modulation frequencies sit on the loop, making the pi/2
    programming offsets cancel from the enclosed flux.
    """
    n = len(ring)
    if len(set(ring)) != n:
        raise ValueError("ring sites must be distinct")
    steps = _ring_steps(n)
    onsite = np.zeros(lattice.n_total, dtype=float)
    level = 0.0
    for k in range(n):
        onsite[ring[k] - 1] = level
        if k < n - 1:
            level += steps[k]
    targets = dict(bond_targets or {})
    tones = []
    for k in range(n):
        a = ring[k]
        b = ring[(k + 1) % n]
        freq = onsite[a - 1] - onsite[b - 1]
        target = targets.pop((a, b), 0.0)
        tones.append(
            Tone(
                site=a,
                amp=ratio * abs(freq),
                freq=freq,
                phase=tone_phase_for_target(target, freq),
                bonds=((a, b),),
            )
        )
    if targets:
        raise ValueError("targets on unowned bonds: %s" % sorted(targets))
    return onsite, tones


def chain_tone_layout(lattice, chain, bond_targets=None, ratio=_dev.DRIVE_RATIO):
    """Like ring_tone_layout for an open chain; the last site owns nothing."""
    n = len(chain)
    if n < 2 or len(set(chain)) != n:
        raise ValueError("chain sites must be distinct, length >= 2")
    palette = _STEP_PALETTE_MHZ
    steps = [
        2.0 * math.pi * (1 if k % 2 == 0 else -1) * palette[k % len(palette)]
        for k in range(n - 1)
    ]
    onsite = np.zeros(lattice.n_total, dtype=float)
    level = 0.0
    for k, s in enumerate(chain):
        onsite[s - 1] = level
        if k < n - 1:
            level += steps[k]
    targets = dict(bond_targets or {})
    tones = []
    for k in range(n - 1):
        a, b = chain[k], chain[k + 1]
        freq = onsite[a - 1] - onsite[b - 1]
        target = targets.pop((a, b), 0.0)
        tones.append(
            Tone(
                site=a,
                amp=ratio * abs(freq),
                freq=freq,
                phase=tone_phase_for_target(target, freq),
                bonds=((a, b),),
            )
        )
    if targets:
        raise ValueError("targets on unowned bonds: %s" % sorted(targets))
    return onsite, tones


def device_tone_set(flux, amplitudes=None, ratio=_dev.DRIVE_RATIO):
    """Tones for the 16-site reference layout at a programmed flux.

    Phase targets follow the striped pattern of the device tables, so
    every plaquette of the 4x4 lattice encloses ``flux``.  ``amplitudes``
    optionally maps site -> drive amplitude (rad/us), overriding the
    default ``ratio * |freq|``.
    """
    tones = []
    for owner in sorted(_dev.OWNED_BONDS):
        freq = _dev.modulation_frequency(owner)
        target = _dev.PHASE_SIGN[owner - 1] * _dev.PHASE_COEFF[owner - 1] * flux
        amp = None if amplitudes is None else amplitudes.get(owner)
        if amp is None:
            amp = ratio * abs(freq)
        tones.append(
            Tone(
                site=owner,
                amp=float(amp),
                freq=freq,
                phase=tone_phase_for_target(target, freq),
                bonds=tuple(_dev.OWNED_BONDS[owner]),
            )
        )
    return tones


def synthetic_efield_tones(tones, potential):
    """Add the phase drifts that realize an on-site potential.

    A bond phase drifting at rate d is gauge-equivalent to a potential
    difference ``V_j - V_i = d`` across the oriented bond (i -> j), so
    each tone owning (m -> n) gets ``drift = V_n - V_m``.  A tone owning
    two bonds with conflicting differences cannot realize the field and
    raises; chains and rings with per-bond owners are always fine.
    """
    out = []
    for tone in tones:
        if not tone.bonds:
            out.append(tone)
            continue
        drifts = {
            round(potential.values[nb - 1] - potential.values[m - 1], 12)
            for (m, nb) in tone.bonds
        }
        if len(drifts) > 1:
            raise ValueError(
                "site %d owns bonds with conflicting potential drops %s"
                % (tone.site, sorted(drifts))
            )
        out.append(replace(tone, drift=float(drifts.pop())))
    return out


def gauge_with_drift(gauge, potential, lattice):
    """Effective-frame counterpart of synthetic_efield_tones.

    Returns a copy of ``gauge`` whose bond phases drift at the potential
    difference across each bond, which reproduces the same physics as
    keeping the potential on the diagonal.
    """
    out = gauge.copy()
    for b in lattice.bonds:
        i, j = b.key
        d = potential.values[j - 1] - potential.values[i - 1]
        if d != 0.0:
            out.drift[(i, j)] = out.drift.get((i, j), 0.0) + d
    return out
