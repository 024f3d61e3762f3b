"""Square-lattice geometry, Peierls phases, and gauge bookkeeping.

Sites live on a ``rows x cols`` grid and are numbered 1..rows*cols row-major
starting from the bottom-left corner, so on a 4x4 lattice site 1 is the
bottom-left corner, site 4 the bottom-right, and site 16 the top-right.
A boolean mask can deactivate sites, which is how rings and chains are
carved out of a rectangular grid.

Two coordinate frames are used throughout:

* grid coordinates ``(col, row)`` with site 1 at (0, 0);
* a frame rotated 45 degrees, ``x = (col + row)/sqrt(2)`` and
  ``y = (col - row)/sqrt(2)``, so the main diagonal of the grid becomes the
  x axis.  Linear potentials and mean displacements are expressed here.

Hopping phases are stored per oriented bond with the convention that the
Hamiltonian matrix element from column j to row i is
``J_ij * exp(-1i * phi_ij)`` and ``phi_ji = -phi_ij``.  The flux through a
plaquette is the counterclockwise oriented sum of its bond phases, reduced
to the interval (-pi, pi].
"""

import math
from dataclasses import dataclass, field

import numpy as np

SQRT2 = math.sqrt(2.0)


def reduce_phase(x):
    """Map an angle (scalar or array) to the half-open interval (-pi, pi]."""
    return np.pi - (np.pi - np.asarray(x)) % (2.0 * np.pi)


@dataclass(frozen=True)
class Bond:
    """An unordered pair of site ids with a range tag ("nn" or "nnn")."""

    i: int
    j: int
    kind: str = "nn"

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("bond endpoints must differ")

    @property
    def key(self):
        return (self.i, self.j) if self.i < self.j else (self.j, self.i)


@dataclass
class LatticeSpec:
    """Geometry of a (possibly masked) rectangular lattice.

    Coordinate arrays are indexed by ``site - 1`` and cover inactive sites
    too; bonds only ever join active sites.
    """

    rows: int
    cols: int
    active: np.ndarray
    grid_coords: np.ndarray
    rot_coords: np.ndarray
    bonds: list = field(default_factory=list)
    nnn_bonds: list = field(default_factory=list)

    @property
    def n_total(self):
        return self.rows * self.cols

    @property
    def sites(self):
        """Active site ids, ascending."""
        return [s + 1 for s in range(self.n_total) if self.active[s]]

    @property
    def n_active(self):
        return int(self.active.sum())

    def site_at(self, col, row):
        """Site id at grid position (col, row), active or not."""
        if not (0 <= col < self.cols and 0 <= row < self.rows):
            raise ValueError("grid position (%d, %d) out of range" % (col, row))
        return row * self.cols + col + 1

    def position(self, site):
        """Rotated-frame (x, y) of a site."""
        return tuple(self.rot_coords[site - 1])

    def index_map(self):
        """Map site id -> dense index over active sites (ascending order)."""
        return {s: k for k, s in enumerate(self.sites)}

    def plaquettes(self):
        """All unit squares whose four corners are active.

        Returns a list of (bl, br, tr, tl) tuples in counterclockwise
        order starting from the bottom-left corner.
        """
        out = []
        for r in range(self.rows - 1):
            for c in range(self.cols - 1):
                quad = (
                    self.site_at(c, r),
                    self.site_at(c + 1, r),
                    self.site_at(c + 1, r + 1),
                    self.site_at(c, r + 1),
                )
                if all(self.active[s - 1] for s in quad):
                    out.append(quad)
        return out


def build_lattice(rows, cols, active_sites=None):
    """Construct a LatticeSpec for a rows x cols grid.

    ``active_sites`` restricts the lattice to the listed site ids; by
    default every site is active.  Nearest-neighbour bonds connect
    horizontally and vertically adjacent active sites; next-nearest bonds
    connect active diagonal pairs of a unit square.
    """
    if rows < 1 or cols < 1:
        raise ValueError("lattice dimensions must be positive")
    n = rows * cols
    active = np.zeros(n, dtype=bool)
    if active_sites is None:
        active[:] = True
    else:
        for s in active_sites:
            if not 1 <= s <= n:
                raise ValueError("site %d outside 1..%d" % (s, n))
            active[s - 1] = True

    grid = np.empty((n, 2), dtype=float)
    rot = np.empty((n, 2), dtype=float)
    for s in range(n):
        row, col = divmod(s, cols)
        grid[s] = (col, row)
        rot[s] = ((col + row) / SQRT2, (col - row) / SQRT2)

    lat = LatticeSpec(rows, cols, active, grid, rot)

    def on(c, r):
        return 0 <= c < cols and 0 <= r < rows and active[r * cols + c]

    for r in range(rows):
        for c in range(cols):
            if not on(c, r):
                continue
            s = lat.site_at(c, r)
            if on(c + 1, r):
                lat.bonds.append(Bond(s, lat.site_at(c + 1, r), "nn"))
            if on(c, r + 1):
                lat.bonds.append(Bond(s, lat.site_at(c, r + 1), "nn"))
            if on(c + 1, r + 1):
                lat.nnn_bonds.append(Bond(s, lat.site_at(c + 1, r + 1), "nnn"))
            if c > 0 and on(c - 1, r + 1):
                lat.nnn_bonds.append(Bond(s, lat.site_at(c - 1, r + 1), "nnn"))
    return lat


@dataclass
class GaugeField:
    """Peierls phases on the bonds of a lattice.

    ``phases`` maps canonically oriented bond keys ``(i, j)`` with
    ``i < j`` to the phase picked up hopping i -> j; the reverse hop gets
    the opposite sign.  Bonds absent from the map carry zero phase.

    A nonzero ``drift`` makes the stored phases time dependent,
    ``phi_ij(t) = phi_ij + drift_ij * t``, which is how a synthetic
    electric field enters the effective models.  ``drift`` uses the same
    canonical keying as ``phases`` and is expressed in rad/us.
    """

    phases: dict = field(default_factory=dict)
    drift: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phases = dict(self._canon_items(self.phases))
        self.drift = dict(self._canon_items(self.drift))

    @staticmethod
    def _canon_items(mapping):
        # keys keep their orientation meaning: {(j, i): v} stores (i, j): -v
        for (i, j), v in mapping.items():
            if i == j:
                raise ValueError("bond endpoints must differ")
            yield ((i, j), v) if i < j else ((j, i), -v)

    def phase(self, i, j, t=0.0):
        """Phase for hopping i -> j at time t, reduced to (-pi, pi]."""
        sign = 1.0
        if i > j:
            i, j, sign = j, i, -1.0
        val = self.phases.get((i, j), 0.0) + self.drift.get((i, j), 0.0) * t
        return float(reduce_phase(sign * val))

    def drift_rate(self, i, j):
        """Phase drift rate (rad/us) for hopping i -> j."""
        sign = 1.0
        if i > j:
            i, j, sign = j, i, -1.0
        return sign * self.drift.get((i, j), 0.0)

    @property
    def is_static(self):
        return not any(abs(v) > 0.0 for v in self.drift.values())

    def copy(self):
        return GaugeField(dict(self.phases), dict(self.drift))


def plaquette_flux(lattice, gauge, plaquette=None, t=0.0):
    """Flux through one plaquette, or an array over all of them.

    The flux is the counterclockwise sum of bond phases around the unit
    square, reduced to (-pi, pi].
    """
    if plaquette is not None:
        a, b, c, d = plaquette
        total = (
            gauge.phase(a, b, t)
            + gauge.phase(b, c, t)
            + gauge.phase(c, d, t)
            + gauge.phase(d, a, t)
        )
        return float(reduce_phase(total))
    return np.array(
        [plaquette_flux(lattice, gauge, p, t) for p in lattice.plaquettes()]
    )


def gauge_transform(gauge, lam):
    """Apply a site-local gauge transformation.

    ``lam`` maps site id -> angle; missing sites transform trivially.  The
    phase on each stored bond (i, j) becomes
    ``phi_ij + lam[j] - lam[i]``, which leaves every loop sum unchanged.
    """
    out = gauge.copy()
    # only stored bonds are rewritten; run complete_gauge first if the
    # transformation must touch implicit zero-phase bonds
    out.phases = {
        (i, j): float(reduce_phase(v + lam.get(j, 0.0) - lam.get(i, 0.0)))
        for (i, j), v in out.phases.items()
    }
    return out


def complete_gauge(lattice, gauge, include_nnn=False):
    """Return an equal gauge with every lattice bond stored explicitly.

    Useful before a gauge transformation, which only rewrites stored
    bonds: implicit zero-phase bonds would otherwise be skipped.
    """
    out = gauge.copy()
    bonds = list(lattice.bonds) + (list(lattice.nnn_bonds) if include_nnn else [])
    for b in bonds:
        out.phases.setdefault(b.key, 0.0)
    return out


def uniform_field_gauge(lattice, flux, layout="landau"):
    """Gauge field threading the same flux through every plaquette.

    layout="landau" phases only the bonds along +x: a hop from column c
    to c+1 in row r picks up ``-flux * r``.  Works for any active mask.

    layout="striped" reproduces the phase pattern of the reference
    16-site device, where each bond's phase is a half-integer multiple of
    the flux set by its owning site; 4x4 lattices only.
    """
    gf = GaugeField()
    if layout == "landau":
        for b in lattice.bonds:
            i, j = b.key
            ci, ri = lattice.grid_coords[i - 1]
            cj, rj = lattice.grid_coords[j - 1]
            if ri == rj and cj == ci + 1:
                gf.phases[(i, j)] = float(reduce_phase(-flux * ri))
        return gf
    if layout == "striped":
        if (lattice.rows, lattice.cols) != (4, 4):
            raise ValueError("striped layout is defined for 4x4 lattices")
        from .device import OWNED_BONDS, PHASE_SIGN, PHASE_COEFF

        for owner, bonds in OWNED_BONDS.items():
            for (m, nb) in bonds:
                val = PHASE_SIGN[owner - 1] * PHASE_COEFF[owner - 1] * flux
                if m < nb:
                    gf.phases[(m, nb)] = float(reduce_phase(val))
                else:
                    gf.phases[(nb, m)] = float(reduce_phase(-val))
        return gf
    raise ValueError("unknown layout %r" % layout)


@dataclass
class ScalarField:
    """Per-site real values (rad/us), indexed by site id - 1."""

    values: np.ndarray

    def value(self, site):
        return float(self.values[site - 1])


@dataclass
class PotentialField(ScalarField):
    """A linear on-site potential V_i = F * (r_i . direction).

    ``direction`` is a unit vector in the rotated frame and ``strength``
    the gradient F in rad/us per unit length, so along the direction the
    potential grows by F per rotated-frame unit.
    """

    strength: float = 0.0
    direction: tuple = (1.0, 0.0)


def linear_potential(lattice, strength, direction=(1.0, 0.0)):
    """Linear potential along ``direction`` in the rotated frame.

    With direction (1, 1) on a 1 x N chain the site potentials come out
    as exactly ``strength * j`` for chain index j, because each chain
    step advances the rotated position by (1/sqrt2, 1/sqrt2).
    """
    d = np.asarray(direction, dtype=float)
    norm = math.hypot(d[0], d[1])
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    d = d / norm
    vals = np.where(
        lattice.active, lattice.rot_coords @ d * float(strength), 0.0
    )
    return PotentialField(values=vals, strength=float(strength), direction=(d[0], d[1]))


def gauge_to_csv(lattice, gauge):
    """Serialize stored bond phases as CSV text (i, j, phase), sorted."""
    lines = ["i,j,phase"]
    for (i, j) in sorted(gauge.phases):
        lines.append("%d,%d,%s" % (i, j, repr(float(gauge.phases[(i, j)]))))
    return "\n".join(lines) + "\n"
