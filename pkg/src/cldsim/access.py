"""Visibility geometry over frozen position snapshots.

Everything here is pure computation on ECEF positions: slant ranges,
elevation angles, ground-station access tests, the cross-layer candidate
sets used by descent routing, and the signed directional angles that decide
which candidates lie on the destination's side of the ascent axis.

Two readings of the cross-layer feasibility constraint are implemented:

* ``lower_horizon`` - the upper satellite must sit at least the minimum
  elevation above the *lower* satellite's local horizon.  For shells only a
  few hundred kilometres apart this produces a very narrow footprint.
* ``nadir_cone`` - the lower satellite must lie inside the upper satellite's
  downward antenna cone (half-angle 90 deg minus the minimum elevation) with
  the connecting chord clearing the Earth's limb.

The snapshot for one sample instant is quasi-static: route computation
treats all positions as frozen while a telecommand is in flight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import EARTH_RADIUS_M
from .constellation import Constellation, SatelliteId
from .orbit import Epoch, eci_to_ecef, propagate_arrays

RULE_LOWER_HORIZON = "lower_horizon"
RULE_NADIR_CONE = "nadir_cone"
FEASIBILITY_RULES = (RULE_LOWER_HORIZON, RULE_NADIR_CONE)


@dataclass(frozen=True)
class StateAtT:
    """ECEF positions of every satellite plus the SC at one instant."""

    t: Epoch
    positions: np.ndarray  # (N, 3) metres, row g-1 holds global id g
    sc_position: np.ndarray  # (3,) metres

    def position_of(self, global_id: int) -> np.ndarray:
        return self.positions[global_id - 1]


def snapshot(c: Constellation, t: Epoch, sc_position: np.ndarray) -> StateAtT:
    """Propagate every satellite to t and rotate the set into ECEF."""
    eci = propagate_arrays(
        c.semi_major,
        c.eccentricity,
        c.inclination,
        c.raan,
        c.arg_perigee,
        c.mean_anomaly,
        t.utc_seconds - c.epoch_seconds,
    )
    return StateAtT(t=t, positions=eci_to_ecef(eci, t), sc_position=np.asarray(sc_position))


def slant_range(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance between two positions (m)."""
    return float(np.linalg.norm(np.asarray(b, dtype=float) - np.asarray(a, dtype=float)))


def elevation(observer: np.ndarray, target: np.ndarray) -> float:
    """Elevation of target above the observer's local horizontal plane (deg).

    asin of the projection of the unit line-of-sight onto the observer's
    local vertical; ranges over [-90, 90].

    Raises:
        ValueError: if observer is at the geocentre or coincides with target.
    """
    obs = np.asarray(observer, dtype=float)
    los = np.asarray(target, dtype=float) - obs
    obs_norm = np.linalg.norm(obs)
    los_norm = np.linalg.norm(los)
    if obs_norm == 0.0:
        raise ValueError("observer at the geocentre has no horizon")
    if los_norm == 0.0:
        raise ValueError("elevation undefined for coincident points")
    sin_el = float(np.dot(los / los_norm, obs / obs_norm))
    return math.degrees(math.asin(min(1.0, max(-1.0, sin_el))))


def elevations_from(observer: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Vectorised :func:`elevation`: one observer against (M, 3) targets (deg)."""
    obs = np.asarray(observer, dtype=float)
    los = np.asarray(targets, dtype=float) - obs
    sin_el = (los @ (obs / np.linalg.norm(obs))) / np.linalg.norm(los, axis=-1)
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def is_accessible_by_sc(sc: np.ndarray, sat: np.ndarray, min_elev_deg: float) -> bool:
    """True iff the satellite sits at or above the SC's minimum elevation."""
    return elevation(sc, sat) >= min_elev_deg


def chord_clears_earth(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Whether the segment a-b stays outside the Earth sphere.

    ``a`` is one (3,) point, ``b`` one point or an (M, 3) array; returns a
    boolean (array).  Endpoints are assumed to be at or above the surface.
    """
    a = np.asarray(a, dtype=float)
    b_in = np.asarray(b, dtype=float)
    b2 = np.atleast_2d(b_in)
    ab = b2 - a
    ab_sq = np.einsum("ij,ij->i", ab, ab)
    # Parameter of the point closest to the geocentre, clamped to the segment.
    t = np.clip(np.where(ab_sq > 0.0, -(ab @ a) / np.where(ab_sq > 0.0, ab_sq, 1.0), 0.0), 0.0, 1.0)
    closest = a + t[:, None] * ab
    clear = np.linalg.norm(closest, axis=-1) >= EARTH_RADIUS_M
    return clear if b_in.ndim > 1 else bool(clear[0])


def off_nadir_deg(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """Angle at the upper satellite between its nadir and the line to lower (deg)."""
    upper = np.asarray(upper, dtype=float)
    lower = np.atleast_2d(np.asarray(lower, dtype=float))
    nadir = -upper / np.linalg.norm(upper)
    los = lower - upper
    cos_a = (los @ nadir) / np.linalg.norm(los, axis=-1)
    angles = np.degrees(np.arccos(np.clip(cos_a, -1.0, 1.0)))
    return angles if angles.size > 1 else float(angles[0])


def descent_feasible_mask(
    upper_position: np.ndarray,
    lower_positions: np.ndarray,
    min_elev_deg: float,
    rule: str,
) -> np.ndarray:
    """Feasibility of the upper->lower cross-layer link for many lower satellites.

    Args:
        upper_position: (3,) ECEF of the descending satellite.
        lower_positions: (M, 3) ECEF of the candidate layer.
        min_elev_deg: the satellite minimum elevation constraint.
        rule: one of :data:`FEASIBILITY_RULES`.

    Returns:
        (M,) boolean mask.
    """
    lower = np.atleast_2d(np.asarray(lower_positions, dtype=float))
    if rule == RULE_LOWER_HORIZON:
        upper = np.asarray(upper_position, dtype=float)
        los = upper - lower
        radial = lower / np.linalg.norm(lower, axis=-1, keepdims=True)
        sin_el = np.einsum("ij,ij->i", los, radial) / np.linalg.norm(los, axis=-1)
        elev = np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))
        return elev >= min_elev_deg
    if rule == RULE_NADIR_CONE:
        cone = np.atleast_1d(off_nadir_deg(upper_position, lower)) <= 90.0 - min_elev_deg
        clear = np.atleast_1d(chord_clears_earth(upper_position, lower))
        return cone & clear
    raise ValueError(f"unknown cross-layer feasibility rule {rule!r}")


def descent_candidates(
    upper_gid: int,
    lower_layer: int,
    state: StateAtT,
    c: Constellation,
    min_elev_deg: float,
    rule: str,
) -> np.ndarray:
    """Feasible descent targets on one layer, as 1-based global ids (sorted)."""
    sl = c.layer_slice(lower_layer)
    mask = descent_feasible_mask(
        state.position_of(upper_gid), state.positions[sl], min_elev_deg, rule
    )
    return np.nonzero(mask)[0] + sl.start + 1


def cross_layer_candidates(
    ssn: SatelliteId,
    state: StateAtT,
    c: Constellation,
    min_elev_deg: float = 10.0,
    rule: str = RULE_LOWER_HORIZON,
) -> set[SatelliteId]:
    """The candidate set on the layer immediately below an upper satellite.

    Raises:
        ValueError: if the satellite is already on the lowest layer.
    """
    if ssn.layer < 2:
        raise ValueError("layer 1 has no lower layer to descend to")
    gids = descent_candidates(ssn.global_id, ssn.layer - 1, state, c, min_elev_deg, rule)
    return {c.satellite_id(int(g)) for g in gids}


@dataclass(frozen=True)
class DirectionalAngles:
    """Signed angles of the candidate and destination directions off the ascent axis.

    theta2 (towards the destination) carries the positive reference sign;
    theta1 is positive exactly when the candidate lies on the same side of
    the plane spanned by the ascent axis and the destination direction.
    """

    theta1: float  # radians, signed
    theta2: float  # radians, >= 0

    @property
    def same_sign(self) -> bool:
        # Sign-bit test so a candidate exactly on the axis (theta1 = +-0.0)
        # still matches the side predicate that produced it.
        return math.copysign(1.0, self.theta1) > 0.0


def directional_angles(
    sc: np.ndarray,
    ssn: np.ndarray,
    candidate: np.ndarray,
    dsn: np.ndarray,
) -> DirectionalAngles:
    """Directional angles of a descent candidate relative to the SC->SSN axis.

    With x1 = candidate - ssn, x2 = dsn - ssn and x3 = ssn - sc, the angle
    magnitudes are the angles between x3 and x1/x2; the candidate's sign is
    the sign of dot(x3 x x1, x3 x x2).  The same-sign predicate depends only
    on directions, so it is invariant under uniform scaling about the SSN.

    Raises:
        ValueError: if any of x1, x2, x3 has zero length.
    """
    x1 = np.asarray(candidate, dtype=float) - np.asarray(ssn, dtype=float)
    x2 = np.asarray(dsn, dtype=float) - np.asarray(ssn, dtype=float)
    x3 = np.asarray(ssn, dtype=float) - np.asarray(sc, dtype=float)
    for name, vec in (("candidate-ssn", x1), ("dsn-ssn", x2), ("ssn-sc", x3)):
        if np.linalg.norm(vec) == 0.0:
            raise ValueError(f"directional angles undefined: zero-length {name} vector")

    def angle_to_axis(v: np.ndarray) -> float:
        cos_a = np.dot(x3, v) / (np.linalg.norm(x3) * np.linalg.norm(v))
        return math.acos(min(1.0, max(-1.0, float(cos_a))))

    side = float(np.dot(np.cross(x3, x1), np.cross(x3, x2)))
    theta1 = angle_to_axis(x1)
    if side <= 0.0:
        theta1 = -theta1
    return DirectionalAngles(theta1=theta1, theta2=angle_to_axis(x2))


def same_sign_mask(
    sc: np.ndarray,
    ssn: np.ndarray,
    candidates: np.ndarray,
    dsn: np.ndarray,
) -> np.ndarray:
    """Vectorised same-sign predicate over (M, 3) candidate positions."""
    ssn = np.asarray(ssn, dtype=float)
    x1 = np.atleast_2d(np.asarray(candidates, dtype=float)) - ssn
    x2 = np.asarray(dsn, dtype=float) - ssn
    x3 = ssn - np.asarray(sc, dtype=float)
    return np.cross(np.broadcast_to(x3, x1.shape), x1) @ np.cross(x3, x2) > 0.0


def accessible_set(
    state: StateAtT,
    layers_in_scheme: set[int],
    min_elev_deg: float,
    c: Constellation,
) -> set[SatelliteId]:
    """G(t): every satellite of the given layers visible from the SC.

    The boundary is inclusive: a satellite at exactly the minimum elevation
    is accessible.
    """
    result: set[SatelliteId] = set()
    for u in sorted(layers_in_scheme):
        sl = c.layer_slice(u)
        elev = elevations_from(state.sc_position, state.positions[sl])
        for offset in np.nonzero(elev >= min_elev_deg)[0]:
            result.add(c.satellite_id(sl.start + int(offset) + 1))
    return result
