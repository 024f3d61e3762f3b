"""Reference 16-site device layout.

Calibration tables for a 4x4 lattice of tunable two-level sites with
parametric couplers.  Sites are numbered 1..16 row-major from the
bottom-left corner.  Frequencies are stored as offsets from a common
mid-band reference (4670 MHz) in ordinary MHz; multiply by 2*pi to get
rad/us.

Each modulated site "owns" one or two of the bonds it touches: its single
modulation tone is resonant with the frequency difference across exactly
those bonds, and the tone phase programs their hopping phases.  Site 4
carries no tone; its two bonds are owned by the neighbours (3 and 8).
Frequency offsets are laid out so that each tone is resonant only with
its owned bonds, and sites along the same grid diagonal sit at the same
frequency (which makes diagonal next-nearest pairs resonant without any
tone).

``PHASE_COEFF`` gives the per-site tone-phase multiplier used by the
striped uniform-flux pattern: when each owner programs its owned bonds to
the loop phase ``PHASE_SIGN * PHASE_COEFF * flux``, every plaquette of
the 4x4 lattice encloses the same flux.  ``PHASE_SIGN`` is the sign of
the owner's modulation frequency, which fixes how a programmed tone
phase maps onto the realized bond phase (see gaugesim.model).
"""

import math

import numpy as np

from .lattice import build_lattice

N_SITES = 16

REFERENCE_MHZ = 4670.0

# Static frequency setpoints, MHz offset from REFERENCE_MHZ.
SETPOINT_MHZ = [
    -15.0, -170.0, -55.0, 110.0,
    -120.0, -15.0, -170.0, -55.0,
    50.0, -120.0, -15.0, -170.0,
    170.0, 50.0, -120.0, -15.0,
]

# Signed modulation frequency of each site's tone, MHz; None = no tone.
# The sign equals sign(own frequency - neighbour frequency) across every
# owned bond, which the setpoint layout makes consistent.
MOD_FREQ_MHZ = [
    155.0, -115.0, -165.0, None,
    -105.0, 155.0, -115.0, -165.0,
    170.0, -105.0, 155.0, -115.0,
    120.0, 170.0, -105.0, 155.0,
]

PHASE_SIGN = [
    1.0, -1.0, -1.0, 0.0,
    -1.0, 1.0, -1.0, -1.0,
    1.0, -1.0, 1.0, -1.0,
    1.0, 1.0, -1.0, 1.0,
]

# Tone-phase multiplier (units of the programmed flux) per owning site.
PHASE_COEFF = [
    1.5, -1.0, -0.5, 0.0,
    -1.0, 0.5, 0.0, 0.5,
    0.5, 0.0, -0.5, 1.0,
    0.0, -0.5, 1.0, -1.5,
]

# owner -> list of (owner, neighbour) bonds programmed by its tone; each
# of the 24 nearest-neighbour bonds appears exactly once.
OWNED_BONDS = {
    1: [(1, 2)],
    2: [(2, 3)],
    3: [(3, 4)],
    5: [(5, 1), (5, 6)],
    6: [(6, 2), (6, 7)],
    7: [(7, 3), (7, 8)],
    8: [(8, 4)],
    9: [(9, 5), (9, 10)],
    10: [(10, 6), (10, 11)],
    11: [(11, 7), (11, 12)],
    12: [(12, 8)],
    13: [(13, 9), (13, 14)],
    14: [(14, 10), (14, 15)],
    15: [(15, 11), (15, 16)],
    16: [(16, 12)],
}

# Bare coupler rates, ordinary MHz: mean and site-to-site spread.
J0_NN_MHZ = 5.9
J0_NN_SIGMA_MHZ = 0.4
J0_NNN_MHZ = 0.43
J0_NNN_SIGMA_MHZ = 0.23

# Coherence times, us (device means).
T1_US = 16.7
TPHI_US = 10.0
T_RAMSEY_US = 2.61

# Default drive amplitude as a fraction of the modulation frequency,
# near the first maximum of the relevant Bessel envelope.
DRIVE_RATIO = 0.94

# Calibration targets, ordinary MHz: single-tone bonds and the reduced
# rate used when both tones of a dual-owner site are on.
TARGET_RATE_MHZ = 2.5
LATTICE_RATE_MHZ = 2.0


def device_lattice():
    """The full 4x4 lattice."""
    return build_lattice(4, 4)


def onsite_frequencies():
    """Setpoint offsets in rad/us, indexed by site - 1."""
    return 2.0 * math.pi * np.asarray(SETPOINT_MHZ, dtype=float)


def modulation_frequency(site):
    """Signed tone frequency of a site in rad/us (None if unmodulated)."""
    f = MOD_FREQ_MHZ[site - 1]
    return None if f is None else 2.0 * math.pi * f


def bond_owner(i, j):
    """Owning site of nearest-neighbour bond (i, j), or None."""
    for owner, bonds in OWNED_BONDS.items():
        for (m, nb) in bonds:
            if {m, nb} == {i, j}:
                return owner
    return None


def bare_rates(seed=None, lattice=None):
    """Per-bond bare rates J0 in rad/us, keyed by canonical bond.

    With ``seed=None`` every nearest-neighbour bond gets the mean NN rate
    and every next-nearest bond the mean NNN rate.  With an integer seed
    the rates are drawn from the measured spread (clipped to stay
    positive), giving a reproducible disordered sample.
    """
    lat = lattice if lattice is not None else device_lattice()
    two_pi = 2.0 * math.pi
    rates = {}
    if seed is None:
        for b in lat.bonds:
            rates[b.key] = two_pi * J0_NN_MHZ
        for b in lat.nnn_bonds:
            rates[b.key] = two_pi * J0_NNN_MHZ
        return rates
    rng = np.random.default_rng(seed)
    for b in lat.bonds:
        val = rng.normal(J0_NN_MHZ, J0_NN_SIGMA_MHZ)
        rates[b.key] = two_pi * max(val, 0.1 * J0_NN_MHZ)
    for b in lat.nnn_bonds:
        val = rng.normal(J0_NNN_MHZ, J0_NNN_SIGMA_MHZ)
        rates[b.key] = two_pi * max(val, 0.1 * J0_NNN_MHZ)
    return rates


def ramsey_disorder_sigma():
    """On-site disorder width (rad/us) implied by the Ramsey time.

    Quasi-static Gaussian detuning noise of width sigma damps a Ramsey
    fringe like exp(-(sigma*t)^2/2); equating the 1/e point with the
    measured Ramsey time gives sigma = sqrt(2)/T_Ramsey.
    """
    return math.sqrt(2.0) / T_RAMSEY_US
