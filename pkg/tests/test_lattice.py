import math

import numpy as np
import pytest

from gaugesim import (
    GaugeField,
    build_lattice,
    complete_gauge,
    gauge_to_csv,
    gauge_transform,
    linear_potential,
    plaquette_flux,
    reduce_phase,
    uniform_field_gauge,
)

SQRT2 = math.sqrt(2.0)


class TestGeometry:
    def test_full_4x4_counts(self):
        lat = build_lattice(4, 4)
        assert len(lat.bonds) == 24
        assert len(lat.nnn_bonds) == 18
        assert len(lat.plaquettes()) == 9
        assert lat.sites == list(range(1, 17))

    def test_site_numbering(self):
        lat = build_lattice(4, 4)
        assert lat.site_at(0, 0) == 1
        assert lat.site_at(3, 0) == 4
        assert lat.site_at(0, 1) == 5
        assert lat.site_at(3, 3) == 16
        with pytest.raises(ValueError):
            lat.site_at(4, 0)

    def test_rotated_coordinates(self):
        lat = build_lattice(4, 4)
        assert lat.position(1) == (0.0, 0.0)
        x16, y16 = lat.position(16)
        assert x16 == pytest.approx(3 * SQRT2, abs=1e-12)
        assert y16 == pytest.approx(0.0, abs=1e-12)
        # bottom-right corner sits on the positive-y side
        x4, y4 = lat.position(4)
        assert x4 == pytest.approx(3 / SQRT2)
        assert y4 == pytest.approx(3 / SQRT2)
        x13, y13 = lat.position(13)
        assert y13 == pytest.approx(-3 / SQRT2)

    def test_masked_ring(self):
        # 3x3 grid with the center removed: a ring of 8 sites
        ring = [1, 2, 3, 4, 6, 7, 8, 9]
        lat = build_lattice(3, 3, active_sites=ring)
        assert lat.sites == ring
        assert len(lat.bonds) == 8
        assert len(lat.plaquettes()) == 0
        # only the four diagonal pairs that skirt the hole remain
        assert sorted(b.key for b in lat.nnn_bonds) == [
            (2, 4), (2, 6), (4, 8), (6, 8)]

    def test_chain(self):
        lat = build_lattice(1, 11)
        assert len(lat.bonds) == 10
        assert len(lat.nnn_bonds) == 0
        pot = linear_potential(lat, 2.5, direction=(1.0, 1.0))
        for j in range(11):
            assert pot.values[j] == pytest.approx(2.5 * j, abs=1e-12)

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            build_lattice(0, 4)
        with pytest.raises(ValueError):
            build_lattice(2, 2, active_sites=[5])


class TestReduce:
    def test_branch_points(self):
        assert reduce_phase(math.pi) == pytest.approx(math.pi)
        assert reduce_phase(-math.pi) == pytest.approx(math.pi)
        assert reduce_phase(2 * math.pi) == pytest.approx(0.0, abs=1e-12)
        assert reduce_phase(1.5 * math.pi) == pytest.approx(-0.5 * math.pi)

    def test_random_angles(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(-50, 50, size=500)
        r = reduce_phase(x)
        assert np.all(r > -math.pi - 1e-12)
        assert np.all(r <= math.pi + 1e-12)
        np.testing.assert_allclose(np.exp(1j * r), np.exp(1j * x), atol=1e-9)


class TestGaugeField:
    def test_antisymmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            i, j = rng.integers(1, 17, size=2)
            if i == j:
                continue
            val = rng.uniform(-3, 3)
            g = GaugeField(phases={(i, j): val})
            assert g.phase(i, j) == pytest.approx(float(reduce_phase(val)))
            assert np.exp(1j * g.phase(j, i)) == pytest.approx(
                np.exp(-1j * g.phase(i, j)))

    def test_reverse_key_storage(self):
        g = GaugeField(phases={(5, 2): 0.4})
        assert (2, 5) in g.phases
        assert g.phase(5, 2) == pytest.approx(0.4)
        assert g.phase(2, 5) == pytest.approx(-0.4)

    def test_drift(self):
        g = GaugeField(phases={(1, 2): 0.1}, drift={(1, 2): 2.0})
        assert not g.is_static
        assert g.phase(1, 2, t=0.5) == pytest.approx(1.1)
        assert g.phase(2, 1, t=0.5) == pytest.approx(-1.1)
        assert g.drift_rate(2, 1) == pytest.approx(-2.0)
        assert GaugeField(phases={(1, 2): 0.1}).is_static

    def test_self_bond_rejected(self):
        with pytest.raises(ValueError):
            GaugeField(phases={(3, 3): 0.1})


class TestFlux:
    def test_hand_built_plaquette(self):
        lat = build_lattice(2, 2)
        g = GaugeField(phases={(1, 2): 0.3, (2, 4): 0.5,
                               (3, 4): 0.2, (1, 3): 0.1})
        # counterclockwise 1 -> 2 -> 4 -> 3 -> 1
        expected = 0.3 + 0.5 - 0.2 - 0.1
        assert plaquette_flux(lat, g, (1, 2, 4, 3)) == pytest.approx(expected)
        assert plaquette_flux(lat, g)[0] == pytest.approx(expected)

    def test_gauge_transform_preserves_flux(self):
        lat = build_lattice(4, 4)
        rng = np.random.default_rng(11)
        for trial in range(10):
            g = GaugeField(phases={
                b.key: rng.uniform(-math.pi, math.pi) for b in lat.bonds})
            lam = {s: rng.uniform(-10, 10) for s in lat.sites}
            g2 = gauge_transform(complete_gauge(lat, g), lam)
            np.testing.assert_allclose(
                plaquette_flux(lat, g2), plaquette_flux(lat, g), atol=1e-12)

    def test_transform_shifts_bond_phases(self):
        lat = build_lattice(1, 2)
        g = complete_gauge(lat, GaugeField())
        g2 = gauge_transform(g, {2: 0.7})
        assert g2.phase(1, 2) == pytest.approx(0.7)

    def test_uniform_striped_layout(self):
        lat = build_lattice(4, 4)
        for flux in np.linspace(-3.0, 3.0, 13):
            g = uniform_field_gauge(lat, flux, layout="striped")
            np.testing.assert_allclose(
                plaquette_flux(lat, g), reduce_phase(flux), atol=1e-12)

    def test_uniform_landau_layout(self):
        lat = build_lattice(4, 4)
        for flux in (-2.0, -0.5, 0.9, math.pi):
            g = uniform_field_gauge(lat, flux, layout="landau")
            np.testing.assert_allclose(
                plaquette_flux(lat, g), reduce_phase(flux), atol=1e-12)

    def test_landau_perimeter_encloses_nine_plaquettes(self):
        lat = build_lattice(4, 4)
        flux = 0.37
        g = uniform_field_gauge(lat, flux, layout="landau")
        loop = [1, 2, 3, 4, 8, 12, 16, 15, 14, 13, 9, 5]
        total = sum(g.phase(loop[k], loop[(k + 1) % len(loop)])
                    for k in range(len(loop)))
        assert float(reduce_phase(total)) == pytest.approx(
            float(reduce_phase(9 * flux)), abs=1e-12)

    def test_striped_requires_4x4(self):
        with pytest.raises(ValueError):
            uniform_field_gauge(build_lattice(2, 2), 0.3, layout="striped")
        with pytest.raises(ValueError):
            uniform_field_gauge(build_lattice(4, 4), 0.3, layout="nope")


class TestPotential:
    def test_diagonal_gradient_on_grid(self):
        lat = build_lattice(4, 4)
        pot = linear_potential(lat, 1.3, direction=(1.0, 0.0))
        assert pot.values[0] == pytest.approx(0.0)
        assert pot.values[5] == pytest.approx(1.3 * SQRT2)      # site 6
        assert pot.values[15] == pytest.approx(1.3 * 3 * SQRT2)  # site 16
        assert pot.values[12] == pytest.approx(1.3 * 3 / SQRT2)  # site 13

    def test_direction_normalized(self):
        lat = build_lattice(4, 4)
        a = linear_potential(lat, 0.9, direction=(1.0, 0.0))
        b = linear_potential(lat, 0.9, direction=(7.0, 0.0))
        np.testing.assert_allclose(a.values, b.values, atol=1e-12)
        with pytest.raises(ValueError):
            linear_potential(lat, 1.0, direction=(0.0, 0.0))

    def test_transverse_direction(self):
        lat = build_lattice(4, 4)
        pot = linear_potential(lat, 2.0, direction=(0.0, 1.0))
        # site 4 sits at y = +3/sqrt2, site 13 at -3/sqrt2
        assert pot.values[3] == pytest.approx(6.0 / SQRT2)
        assert pot.values[12] == pytest.approx(-6.0 / SQRT2)


def test_gauge_csv_stable():
    lat = build_lattice(2, 2)
    g = uniform_field_gauge(lat, 0.25, layout="landau")
    text = gauge_to_csv(lat, g)
    assert text.splitlines()[0] == "i,j,phase"
    assert text == gauge_to_csv(lat, g)
    rows = [ln.split(",") for ln in text.splitlines()[1:]]
    assert [(r[0], r[1]) for r in rows] == [("1", "2"), ("3", "4")]
