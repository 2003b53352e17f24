import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cldsim.constants import EARTH_RADIUS_M, MU_EARTH
from cldsim.orbit import (
    Epoch,
    FrameError,
    OrbitalElements,
    PropagationError,
    ecef_to_eci,
    eci_to_ecef,
    geodetic_to_ecef,
    gmst_deg,
    ned_basis,
    parse_tle,
    propagate_circular,
    tle_checksum,
)

J2000 = Epoch(0.0)
SIDEREAL_DAY_S = 86164.1


def circular(a, inc=0.0, raan=0.0, u0=0.0, epoch=J2000):
    return OrbitalElements(
        semi_major_axis=a, inclination=inc, raan=raan,
        arg_latitude_at_epoch=u0, eccentricity=0.0, epoch=epoch,
    )


# Kepler's third law, used as the independent oracle for semi-major axes.
def a_from_period(period_s: float) -> float:
    return (MU_EARTH * (period_s / (2.0 * math.pi)) ** 2) ** (1.0 / 3.0)


class TestEpoch:
    def test_from_utc_is_j2000_relative(self):
        assert Epoch.from_utc("2000-01-01 12:00:00").utc_seconds == 0.0
        assert Epoch.from_utc("2000-01-01 12:00:10").utc_seconds == 10.0

    def test_ordering_and_difference(self):
        a = Epoch.from_utc("2022-09-01 01:00:00")
        b = a.plus(172.8)
        assert b > a
        # Sub-microsecond exactness at mission magnitudes (ULP ~1e-7 s here).
        assert b - a == pytest.approx(172.8, abs=1e-6)
        # Exact when the quantities are representable.
        assert Epoch(172.8) - Epoch(0.0) == 172.8

    def test_iso8601(self):
        t = Epoch.from_utc("2022-09-01 01:00:00").plus(172.8)
        assert t.iso8601() == "2022-09-01T01:02:52.800Z"


class TestPropagateCircular:
    def test_geosynchronous_period_closes_orbit(self):
        # Oracle: the radius whose two-body period is one sidereal day.
        a_geo = a_from_period(SIDEREAL_DAY_S)
        assert a_geo == pytest.approx(42_164.2e3, abs=60e3)
        elems = circular(a_geo)
        p0 = propagate_circular(elems, J2000)
        p1 = propagate_circular(elems, J2000.plus(SIDEREAL_DAY_S))
        assert np.linalg.norm(p1 - p0) < 1e3

    def test_radius_preserved_on_circular_orbit(self):
        elems = circular(EARTH_RADIUS_M + 1015e3, inc=math.radians(99.5))
        r = propagate_circular(elems, J2000.plus(12345.6))
        assert np.linalg.norm(r) == pytest.approx(7386.0e3, abs=1.0)

    def test_element_axes(self):
        elems = circular(7000e3, inc=math.radians(90.0), raan=0.0, u0=0.0)
        r = propagate_circular(elems, J2000)
        assert r == pytest.approx([7000e3, 0.0, 0.0], abs=1e-6)

    def test_rejects_eccentric_elements(self):
        elems = OrbitalElements(
            semi_major_axis=7000e3, inclination=0.0, raan=0.0,
            arg_latitude_at_epoch=0.0, eccentricity=0.01, epoch=J2000,
        )
        with pytest.raises(PropagationError):
            propagate_circular(elems, J2000)

    @settings(deadline=None)
    @given(
        a=st.floats(min_value=6.8e6, max_value=9.9e7),
        inc=st.floats(min_value=0.0, max_value=math.pi),
        raan=st.floats(min_value=0.0, max_value=2 * math.pi),
        u0=st.floats(min_value=0.0, max_value=2 * math.pi),
        dt=st.floats(min_value=-1e6, max_value=1e6),
    )
    def test_radius_and_period_properties(self, a, inc, raan, u0, dt):
        elems = circular(a, inc, raan, u0)
        t = J2000.plus(dt)
        pos = propagate_circular(elems, t)
        assert abs(np.linalg.norm(pos) - a) < 1.0
        again = propagate_circular(elems, t.plus(elems.period))
        assert np.linalg.norm(again - pos) < 1.0


def make_tle(satnum, inc_deg, raan_deg, ecc, argp_deg, m_deg, n_rev_day,
             epoch_field="22244.04166667"):
    line1 = f"1 {satnum:05d}U 13001A   {epoch_field:>14s}  .00000000  00000-0  00000-0 0  999"
    line2 = (
        f"2 {satnum:05d} {inc_deg:8.4f} {raan_deg:8.4f} {round(ecc * 1e7):07d}"
        f" {argp_deg:8.4f} {m_deg:8.4f} {n_rev_day:11.8f}    1"
    )
    return line1 + str(tle_checksum(line1)), line2 + str(tle_checksum(line2))


class TestParseTle:
    def test_geosynchronous_mean_motion_to_semi_major_axis(self):
        l1, l2 = make_tle(10001, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0027)
        result = parse_tle("\n".join([l1, l2]))
        assert not result.errors
        # Oracle: Kepler's third law on the written mean motion.
        expected = a_from_period(86400.0 / 1.0027)
        assert result.elements[0].semi_major_axis == pytest.approx(expected, rel=1e-9)
        assert abs(result.elements[0].semi_major_axis - 42_164e3) < 50e3

    def test_empty_input(self):
        result = parse_tle("")
        assert result.elements == () and result.errors == ()

    def test_checksum_error_names_line(self):
        l1, l2 = make_tle(10001, 53.0, 10.0, 0.001, 30.0, 40.0, 15.05)
        bad2 = l2[:-1] + str((int(l2[-1]) + 1) % 10)
        result = parse_tle("\n".join([l1, bad2]))
        assert result.partial
        assert result.errors[0].line_number == 1
        assert "checksum" in result.errors[0].message
        assert "line 2" in result.errors[0].message

    def test_records_survive_a_bad_neighbour(self):
        g1 = make_tle(10001, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0)
        g2 = make_tle(10002, 0.0, 0.0, 0.0, 0.0, 18.0, 5.0)
        bad = (g1[0], g1[1][:30] + "x" + g1[1][31:])
        text = "\n".join(["SAT-A", *g1, "SAT-BAD", *bad, "SAT-C", *g2])
        result = parse_tle(text)
        assert len(result.elements) == 2
        assert result.partial and len(result.errors) == 1
        assert result.names == ("SAT-A", "SAT-C")

    def test_named_records_and_angle_fields(self):
        l1, l2 = make_tle(10001, 87.9, 123.4, 0.0012, 45.0, 90.0, 13.1)
        result = parse_tle("\n".join(["ONEWEB-0001", l1, l2]))
        (elems,) = result.elements
        assert result.names == ("ONEWEB-0001",)
        assert elems.inclination == pytest.approx(math.radians(87.9))
        assert elems.raan == pytest.approx(math.radians(123.4))
        assert elems.eccentricity == pytest.approx(0.0012)
        assert elems.arg_latitude_at_epoch == pytest.approx(math.radians(135.0))
        # The 8-decimal day field quantises the epoch to ~0.3 ms.
        reference = Epoch.from_utc("2022-09-01 01:00:00")
        assert abs(elems.epoch - reference) < 1e-3

    def test_shipped_files_parse_clean(self, table1):
        assert table1.constellation.layer_size(3) == 20
        assert table1.constellation.layer_size(4) == 3


class TestFrames:
    def test_gmst_reference_value(self):
        assert gmst_deg(J2000) == pytest.approx(280.46061837)

    def test_eci_to_ecef_at_j2000(self):
        g = math.radians(gmst_deg(J2000))
        expected = np.array([math.cos(g), -math.sin(g), 0.0]) * 7000e3
        assert eci_to_ecef(np.array([7000e3, 0.0, 0.0]), J2000) == pytest.approx(expected)

    def test_z_axis_fixed_point(self):
        p = np.array([0.0, 0.0, 4242e3])
        assert eci_to_ecef(p, Epoch(1234.5)) == pytest.approx(p)

    @settings(deadline=None)
    @given(
        xyz=st.tuples(*[st.floats(min_value=-1e8, max_value=1e8)] * 3),
        dt=st.floats(min_value=-1e8, max_value=1e8),
    )
    def test_rotation_preserves_norm_and_inverts(self, xyz, dt):
        p = np.array(xyz)
        t = Epoch(dt)
        q = eci_to_ecef(p, t)
        assert np.linalg.norm(q) == pytest.approx(np.linalg.norm(p), rel=1e-9, abs=1e-9)
        assert ecef_to_eci(q, t) == pytest.approx(p, abs=1e-6)


class TestGeodetic:
    def test_reference_points(self):
        assert geodetic_to_ecef(0.0, 0.0, 0.0) == pytest.approx([6371e3, 0.0, 0.0])
        assert geodetic_to_ecef(90.0, -45.0, 0.0) == pytest.approx(
            [0.0, 0.0, 6371e3], abs=1e-6
        )

    def test_ground_station_z_component(self):
        # Hand evaluation of the spherical formula at the station latitude.
        z = geodetic_to_ecef(51.0447, -114.0719, 0.0)[2]
        assert z == pytest.approx(6371e3 * math.sin(math.radians(51.0447)))
        assert z == pytest.approx(4954.1e3, abs=1e3)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            geodetic_to_ecef(91.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            geodetic_to_ecef(0.0, 200.0, 0.0)


class TestNedBasis:
    def test_x_axis_origin(self):
        frame = ned_basis(np.array([6371e3, 0.0, 0.0]))
        assert frame.down == pytest.approx([-1.0, 0.0, 0.0])
        assert frame.east == pytest.approx([0.0, 1.0, 0.0])
        assert frame.north == pytest.approx([0.0, 0.0, 1.0])

    def test_polar_origin_degenerate(self):
        with pytest.raises(FrameError):
            ned_basis(np.array([0.0, 0.0, 6371e3]))

    @settings(deadline=None)
    @given(
        lat=st.floats(min_value=-89.0, max_value=89.0),
        lng=st.floats(min_value=-180.0, max_value=180.0),
        alt=st.floats(min_value=0.0, max_value=1e6),
    )
    def test_orthonormal_right_handed(self, lat, lng, alt):
        frame = ned_basis(geodetic_to_ecef(lat, lng, alt))
        basis = np.stack([frame.north, frame.east, frame.down])
        assert np.allclose(basis @ basis.T, np.eye(3), atol=1e-9)
        # Right-handedness: north x east points down (to the geocentre).
        assert np.allclose(np.cross(frame.north, frame.east), frame.down, atol=1e-9)
