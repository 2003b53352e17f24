"""Time handling, two-body orbit propagation, and coordinate frames.

Positions are Cartesian metres in either an inertial frame (ECI, x toward
the vernal equinox at J2000) or the Earth-fixed frame (ECEF, x through the
Greenwich meridian).  The two frames are related by a rotation about z by
the Greenwich mean sidereal time, using the standard linear approximation.

All operations are pure functions over immutable values and are safe to
call concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .constants import (
    EARTH_RADIUS_M,
    GMST_AT_J2000_DEG,
    GMST_RATE_DEG_PER_DAY,
    MU_EARTH,
    SECONDS_PER_DAY,
)

TWO_PI = 2.0 * math.pi

# Reference instant for Epoch: J2000 = 2000-01-01T12:00:00 UTC.
_J2000 = datetime(2000, 1, 1, 12, 0, 0, tzinfo=timezone.utc)


class PropagationError(ValueError):
    """Raised for element sets a propagator does not support."""


class FrameError(ValueError):
    """Raised for degenerate frame constructions."""


@dataclass(frozen=True, order=True)
class Epoch:
    """An instant in time, stored as seconds since J2000 (UTC treated as uniform).

    Differences of two Epochs are exact in double precision for spans below
    ~1e9 s, which covers any mission this simulator handles.
    """

    utc_seconds: float

    @classmethod
    def from_utc(cls, text: str) -> "Epoch":
        """Parse a 'YYYY-MM-DD HH:MM:SS' UTC timestamp."""
        dt = datetime.strptime(text, "%Y-%m-%d %H:%M:%S").replace(tzinfo=timezone.utc)
        return cls.from_datetime(dt)

    @classmethod
    def from_datetime(cls, dt: datetime) -> "Epoch":
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return cls((dt - _J2000).total_seconds())

    def plus(self, seconds: float) -> "Epoch":
        return Epoch(self.utc_seconds + seconds)

    def __sub__(self, other: "Epoch") -> float:
        return self.utc_seconds - other.utc_seconds

    def to_datetime(self) -> datetime:
        return _J2000 + timedelta(seconds=self.utc_seconds)

    def iso8601(self) -> str:
        """ISO-8601 UTC string with millisecond resolution, e.g. 2022-09-01T01:02:52.800Z."""
        dt = self.to_datetime()
        return dt.strftime("%Y-%m-%dT%H:%M:%S") + ".%03dZ" % round(dt.microsecond / 1000.0)


def _normalize_angle(angle: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    wrapped = math.fmod(angle, TWO_PI)
    return wrapped + TWO_PI if wrapped < 0.0 else wrapped


@dataclass(frozen=True)
class OrbitalElements:
    """Mean orbital elements for two-body propagation.

    ``arg_latitude_at_epoch`` is the mean argument of latitude (argument of
    perigee plus mean anomaly); for the circular shells used here it is the
    in-plane angle from the ascending node.  ``arg_perigee`` carries the
    split needed to propagate eccentric element sets parsed from TLEs.
    """

    semi_major_axis: float  # metres
    inclination: float  # radians
    raan: float  # radians
    arg_latitude_at_epoch: float  # radians
    eccentricity: float
    epoch: Epoch
    arg_perigee: float = 0.0  # radians

    def __post_init__(self) -> None:
        if self.semi_major_axis <= EARTH_RADIUS_M:
            raise ValueError(
                f"semi-major axis {self.semi_major_axis} m must exceed the "
                f"Earth radius {EARTH_RADIUS_M} m"
            )
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError(f"eccentricity {self.eccentricity} outside [0, 1)")
        for field in ("inclination", "raan", "arg_latitude_at_epoch", "arg_perigee"):
            object.__setattr__(self, field, _normalize_angle(getattr(self, field)))

    @property
    def mean_motion(self) -> float:
        """Mean motion n = sqrt(mu / a^3) (rad/s)."""
        return math.sqrt(MU_EARTH / self.semi_major_axis**3)

    @property
    def period(self) -> float:
        """Orbital period 2*pi/n (s)."""
        return TWO_PI / self.mean_motion


def _solve_kepler(mean_anomaly: np.ndarray, eccentricity: np.ndarray) -> np.ndarray:
    """Solve E - e*sin(E) = M by Newton iteration (vectorised)."""
    ecc_anom = mean_anomaly.copy()
    for _ in range(12):
        delta = (ecc_anom - eccentricity * np.sin(ecc_anom) - mean_anomaly) / (
            1.0 - eccentricity * np.cos(ecc_anom)
        )
        ecc_anom -= delta
        if np.max(np.abs(delta)) < 1e-14:
            break
    return ecc_anom


def propagate_arrays(
    semi_major_axis: np.ndarray,
    eccentricity: np.ndarray,
    inclination: np.ndarray,
    raan: np.ndarray,
    arg_perigee: np.ndarray,
    mean_anomaly_at_epoch: np.ndarray,
    elapsed_seconds: np.ndarray,
) -> np.ndarray:
    """Two-body ECI positions for many satellites at once.

    Args:
        semi_major_axis: (N,) metres.
        eccentricity: (N,) in [0, 1).
        inclination, raan, arg_perigee, mean_anomaly_at_epoch: (N,) radians.
        elapsed_seconds: scalar or (N,) seconds since each element epoch.

    Returns:
        (N, 3) ECI positions in metres.
    """
    a = np.asarray(semi_major_axis, dtype=float)
    ecc = np.asarray(eccentricity, dtype=float)
    mean_motion = np.sqrt(MU_EARTH / a**3)
    mean_anom = np.asarray(mean_anomaly_at_epoch, dtype=float) + mean_motion * elapsed_seconds
    ecc_anom = _solve_kepler(mean_anom, ecc)
    true_anom = np.arctan2(
        np.sqrt(1.0 - ecc**2) * np.sin(ecc_anom), np.cos(ecc_anom) - ecc
    )
    radius = a * (1.0 - ecc * np.cos(ecc_anom))
    arg_lat = np.asarray(arg_perigee, dtype=float) + true_anom

    cos_raan, sin_raan = np.cos(raan), np.sin(raan)
    cos_inc, sin_inc = np.cos(inclination), np.sin(inclination)
    cos_u, sin_u = np.cos(arg_lat), np.sin(arg_lat)

    x = radius * (cos_raan * cos_u - sin_raan * sin_u * cos_inc)
    y = radius * (sin_raan * cos_u + cos_raan * sin_u * cos_inc)
    z = radius * (sin_u * sin_inc)
    return np.stack([x, y, z], axis=-1)


def propagate_twobody(elements: OrbitalElements, t: Epoch) -> np.ndarray:
    """Two-body ECI position of one satellite at time t (any eccentricity < 1)."""
    mean_anom0 = elements.arg_latitude_at_epoch - elements.arg_perigee
    return propagate_arrays(
        np.array([elements.semi_major_axis]),
        np.array([elements.eccentricity]),
        np.array([elements.inclination]),
        np.array([elements.raan]),
        np.array([elements.arg_perigee]),
        np.array([mean_anom0]),
        t - elements.epoch,
    )[0]

def propagate_circular(elements: OrbitalElements, t: Epoch) -> np.ndarray:
    """ECI position on a circular orbit at time t.

    The argument of latitude advances by the mean motion n = sqrt(mu/a^3);
    the radius equals the semi-major axis exactly.  Deterministic and
    bitwise-stable for equal inputs.

    Raises:
        PropagationError: if the element set is not circular.
    """
    if elements.eccentricity != 0.0:
        raise PropagationError(
            f"circular propagator requires eccentricity 0, got {elements.eccentricity}"
        )
    return propagate_twobody(elements, t)


# --- TLE parsing -----------------------------------------------------------

@dataclass(frozen=True)
class TleRecordError:
    """A per-record parse failure, carrying the offending 1-based line number."""

    line_number: int
    message: str


@dataclass(frozen=True)
class TleParseResult:
    """Parsed TLE records plus any per-record errors.

    ``elements`` holds every record parsed before (and after) failures;
    ``partial`` is True when at least one record failed.
    """

    elements: tuple[OrbitalElements, ...]
    names: tuple[str, ...]
    errors: tuple[TleRecordError, ...]

    @property
    def partial(self) -> bool:
        return len(self.errors) > 0


def tle_checksum(line: str) -> int:
    """Modulo-10 checksum over the first 68 characters (digits count, '-' is 1)."""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


def _tle_epoch(year_field: str, day_field: str) -> Epoch:
    year = int(year_field)
    year += 2000 if year < 57 else 1900
    day = float(day_field)
    dt = datetime(year, 1, 1, tzinfo=timezone.utc) + timedelta(days=day - 1.0)
    return Epoch.from_datetime(dt)


def _check_tle_line(line: str, expected_first: str, line_number: int) -> None:
    if len(line) != 69:
        raise ValueError(f"line {line_number}: length {len(line)}, expected 69")
    if not line.startswith(expected_first + " "):
        raise ValueError(f"line {line_number}: expected a line starting '{expected_first} '")
    expected = tle_checksum(line)
    actual = line[68]
    if not actual.isdigit() or int(actual) != expected:
        raise ValueError(
            f"line {line_number}: checksum mismatch (computed {expected}, found {actual!r})"
        )


def parse_tle(text: str) -> TleParseResult:
    """Parse two-line element sets (optionally preceded by a name line).

    Mean motion is converted to a semi-major axis via Kepler's third law;
    angle fields are read from the standard fixed columns and the modulo-10
    checksum of each line is enforced.  Records that fail to parse are
    reported in ``errors`` with their line numbers; good records on either
    side of a failure are still returned.
    """
    elements: list[OrbitalElements] = []
    names: list[str] = []
    errors: list[TleRecordError] = []

    lines = [(idx + 1, raw.rstrip("\r\n")) for idx, raw in enumerate(text.splitlines())]
    lines = [(no, ln) for no, ln in lines if ln.strip()]

    i = 0
    while i < len(lines):
        number, line = lines[i]
        name = ""
        if not line.startswith("1 "):
            name = line.strip()
            i += 1
            if i >= len(lines):
                errors.append(TleRecordError(number, f"dangling name line {name!r}"))
                break
            number, line = lines[i]
        if i + 1 >= len(lines):
            errors.append(TleRecordError(number, "record truncated: missing line 2"))
            break
        number2, line2 = lines[i + 1]
        i += 2
        try:
            _check_tle_line(line, "1", number)
            _check_tle_line(line2, "2", number2)
            epoch = _tle_epoch(line[18:20], line[20:32])
            inclination = math.radians(float(line2[8:16]))
            raan = math.radians(float(line2[17:25]))
            eccentricity = float("0." + line2[26:33].strip())
            arg_perigee = math.radians(float(line2[34:42]))
            mean_anomaly = math.radians(float(line2[43:51]))
            revs_per_day = float(line2[52:63])
            if revs_per_day <= 0.0:
                raise ValueError(f"line {number2}: non-positive mean motion {revs_per_day}")
            period = SECONDS_PER_DAY / revs_per_day
            semi_major = (MU_EARTH * (period / TWO_PI) ** 2) ** (1.0 / 3.0)
            elements.append(
                OrbitalElements(
                    semi_major_axis=semi_major,
                    inclination=inclination,
                    raan=raan,
                    arg_latitude_at_epoch=arg_perigee + mean_anomaly,
                    eccentricity=eccentricity,
                    epoch=epoch,
                    arg_perigee=arg_perigee,
                )
            )
            names.append(name)
        except ValueError as exc:
            errors.append(TleRecordError(number, str(exc)))

    return TleParseResult(tuple(elements), tuple(names), tuple(errors))


# --- Frames ----------------------------------------------------------------

def gmst_deg(t: Epoch) -> float:
    """Greenwich mean sidereal time in degrees, linear approximation."""
    days = t.utc_seconds / SECONDS_PER_DAY
    return (GMST_AT_J2000_DEG + GMST_RATE_DEG_PER_DAY * days) % 360.0


def _rot_z(vectors: np.ndarray, angle_rad: float) -> np.ndarray:
    cos_a, sin_a = math.cos(angle_rad), math.sin(angle_rad)
    v = np.asarray(vectors, dtype=float)
    x = cos_a * v[..., 0] - sin_a * v[..., 1]
    y = sin_a * v[..., 0] + cos_a * v[..., 1]
    return np.stack([x, y, v[..., 2]], axis=-1)


def eci_to_ecef(position_eci: np.ndarray, t: Epoch) -> np.ndarray:
    """Rotate ECI coordinates into the Earth-fixed frame at time t.

    Accepts a single (3,) vector or an (N, 3) array.
    """
    return _rot_z(position_eci, -math.radians(gmst_deg(t)))


def ecef_to_eci(position_ecef: np.ndarray, t: Epoch) -> np.ndarray:
    """Inverse of :func:`eci_to_ecef`."""
    return _rot_z(position_ecef, math.radians(gmst_deg(t)))


def geodetic_to_ecef(lat_deg: float, lng_deg: float, alt_m: float = 0.0) -> np.ndarray:
    """Spherical-Earth geodetic-to-ECEF conversion.

    Raises:
        ValueError: for latitude outside [-90, 90] or longitude outside [-180, 180].
    """
    if not -90.0 <= lat_deg <= 90.0:
        raise ValueError(f"latitude {lat_deg} outside [-90, 90]")
    if not -180.0 <= lng_deg <= 180.0:
        raise ValueError(f"longitude {lng_deg} outside [-180, 180]")
    radius = EARTH_RADIUS_M + alt_m
    lat = math.radians(lat_deg)
    lng = math.radians(lng_deg)
    return radius * np.array(
        [math.cos(lat) * math.cos(lng), math.cos(lat) * math.sin(lng), math.sin(lat)]
    )


@dataclass(frozen=True)
class NedFrame:
    """Local North-East-Down basis at an ECEF point (right-handed orthonormal)."""

    origin: np.ndarray
    north: np.ndarray
    east: np.ndarray
    down: np.ndarray


def ned_basis(origin_ecef: np.ndarray) -> NedFrame:
    """Construct the local NED frame at an ECEF point.

    down points to the geocentre; east = normalize(z x up); north completes
    the right-handed triple (north x east = down).

    Raises:
        FrameError: when the origin lies on the +-z axis (east undefined).
    """
    origin = np.asarray(origin_ecef, dtype=float)
    norm = np.linalg.norm(origin)
    if norm == 0.0:
        raise FrameError("NED frame undefined at the geocentre")
    up = origin / norm
    east_raw = np.cross(np.array([0.0, 0.0, 1.0]), up)
    east_norm = np.linalg.norm(east_raw)
    if east_norm < 1e-12:
        raise FrameError("NED frame degenerate on the polar axis (east undefined)")
    east = east_raw / east_norm
    down = -up
    north = np.cross(east, down)
    return NedFrame(origin=origin, north=north, east=east, down=down)
