"""Telecommand route computation over one quasi-static snapshot.

Node roles along a route: the SC (source ground station) uplinks to the SSN
(source satellite node, the first satellite reached); a descent across
layers ends at the TSN (the entry node on the destination's layer); ISNs
are the intermediate grid hops from the TSN to the DSN (destination).

Three cross-layer-descent schemes differ only in which layers they may use;
the two baselines reconstruct simpler strategies: always entering via the
MEO layer with nearest-neighbour handoff, or bent-piping through the GEO
ring straight to the destination.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .access import (
    RULE_LOWER_HORIZON,
    RULE_NADIR_CONE,
    StateAtT,
    chord_clears_earth,
    descent_candidates,
    descent_feasible_mask,
    elevations_from,
    same_sign_mask,
)
from .constellation import Constellation

GROUND_SPACE = "ground-space"
ISL = "isl"


class Unreachable(Exception):
    """No feasible route exists at this sample instant (data, not a fault)."""

    def __init__(self, reason: str, layer: Optional[int] = None):
        super().__init__(reason if layer is None else f"{reason} (layer {layer})")
        self.reason = reason
        self.layer = layer


@dataclass(frozen=True)
class Scheme:
    """A routing scheme: which layers carry traffic and which grant SC access."""

    name: str
    layers_used: frozenset[int]
    access_layers: frozenset[int]


SCHEMES: dict[str, Scheme] = {
    "CLD-I": Scheme("CLD-I", frozenset({1, 2, 3, 4}), frozenset({1, 2, 3, 4})),
    "CLD-II": Scheme("CLD-II", frozenset({1, 3}), frozenset({1, 3})),
    "CLD-III": Scheme("CLD-III", frozenset({1, 4}), frozenset({1, 4})),
    "NONCLD-MEO": Scheme("NONCLD-MEO", frozenset({1, 3}), frozenset({3})),
    "NONCLD-GEO": Scheme("NONCLD-GEO", frozenset({1, 4}), frozenset({4})),
}
SCHEME_ORDER = ("CLD-I", "CLD-II", "CLD-III", "NONCLD-MEO", "NONCLD-GEO")


def scheme_by_name(name: str) -> Scheme:
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; expected one of {sorted(SCHEMES)}") from None


@dataclass(frozen=True)
class RoutingPolicy:
    """Elevation thresholds and the cross-layer feasibility rule.

    ``sc_min_elev_deg`` is the ground antenna mask applied to the mission's
    target layer; SC access to the relay layers above it uses
    ``relay_min_elev_deg`` (the satellite minimum elevation), since a 25 deg
    ground mask would rule out the equatorial MEO shell entirely from
    mid-latitude stations.  ``isl_min_elev_deg`` constrains cross-layer ISLs.

    CLD descent links follow ``feasibility_rule``; the non-CLD baselines
    reconstruct conventional relay services, whose handoff to a target-layer
    terminal must clear that terminal's own horizon mask, so they use
    ``baseline_rule`` instead.
    """

    sc_min_elev_deg: float = 25.0
    relay_min_elev_deg: float = 10.0
    isl_min_elev_deg: float = 10.0
    feasibility_rule: str = RULE_NADIR_CONE
    baseline_rule: str = RULE_LOWER_HORIZON

    def sc_threshold(self, layer: int, target_layer: int) -> float:
        return self.sc_min_elev_deg if layer == target_layer else self.relay_min_elev_deg


@dataclass(frozen=True)
class Hop:
    """One link of a route: class, endpoints (0 = the SC), and length at t."""

    kind: str
    from_node: int
    to_node: int
    length_m: float


@dataclass(frozen=True)
class Route:
    """An SC-to-DSN route partitioned into segments R1/R2/R3.

    Exactly one of R1 (pure target-layer route) or R2+R3 (descent then
    target-layer tail) is populated.  R2 runs from the SSN down to the TSN
    inclusive; R3 holds the nodes strictly after the TSN through the DSN.
    ``hops`` includes the SC->SSN uplink, so the hop count n_h equals the
    number of satellites on the route.
    """

    scheme: str
    t_seconds: float
    dsn: int
    ssn: int
    tsn: Optional[int]
    r1: tuple[int, ...]
    r2: tuple[int, ...]
    r3: tuple[int, ...]
    hops: tuple[Hop, ...]
    fallback: bool = False

    @property
    def nodes(self) -> tuple[int, ...]:
        return self.r1 + self.r2 + self.r3

    @property
    def n_h(self) -> int:
        return len(self.hops)


class SampleAccess:
    """Per-snapshot SC access cache: elevations, slants, per-layer visible sets."""

    def __init__(self, state: StateAtT, c: Constellation, policy: RoutingPolicy, target_layer: int):
        self.state = state
        self.elevations = elevations_from(state.sc_position, state.positions)
        self.slants = np.linalg.norm(state.positions - state.sc_position, axis=-1)
        self._c = c
        self._policy = policy
        self._target_layer = target_layer
        self._visible: dict[int, np.ndarray] = {}

    def visible_gids(self, layer: int) -> np.ndarray:
        """Sorted global ids of the layer's satellites at/above the SC threshold."""
        cached = self._visible.get(layer)
        if cached is None:
            sl = self._c.layer_slice(layer)
            threshold = self._policy.sc_threshold(layer, self._target_layer)
            cached = np.nonzero(self.elevations[sl] >= threshold)[0] + sl.start + 1
            self._visible[layer] = cached
        return cached


def get_closest_sat_to_sc(
    candidate_gids: np.ndarray,
    sc_position: np.ndarray,
    layer: int,
    state: StateAtT,
    c: Constellation,
) -> int:
    """The candidate with minimum slant range to the SC; ties take the lowest id.

    Raises:
        Unreachable: for an empty candidate set.
    """
    gids = np.sort(np.atleast_1d(np.asarray(candidate_gids, dtype=int)))
    if gids.size == 0:
        raise Unreachable("no SC-accessible satellite", layer)
    sl = c.layer_slice(layer)
    if gids[0] < sl.start + 1 or gids[-1] > sl.stop:
        bad = gids[0] if gids[0] < sl.start + 1 else gids[-1]
        raise ValueError(f"candidate {bad} is not on layer {layer}")
    slants = np.linalg.norm(state.positions[gids - 1] - sc_position, axis=-1)
    return int(gids[int(np.argmin(slants))])  # argmin takes the first (lowest id) on ties


def get_best_under_layer_sat(
    ssn: int,
    dsn: int,
    state: StateAtT,
    c: Constellation,
    policy: RoutingPolicy,
    lower_layer: Optional[int] = None,
    reference_position: Optional[np.ndarray] = None,
) -> tuple[int, bool]:
    """Select the descent target one boundary below an upper-layer node.

    The feasible set on the lower layer is filtered to candidates lying on
    the destination's side of the ascent axis (same-sign directional
    angles); the nearest survivor by slant range wins.  When the
    destination itself belongs to the node's immediate-lower candidate set
    (the candidate sets are defined one layer down, so only an
    adjacent-layer descent can take this shortcut), it is returned
    outright.  An empty same-sign set falls
    back to the nearest feasible candidate and flags the route.

    Args:
        reference_position: the node the current hop was reached from (the
            SC for the first boundary); defines the ascent axis.

    Returns:
        (selected global id, fallback flag).

    Raises:
        Unreachable: when no lower-layer satellite is feasible at all.
    """
    ssn_layer = c.layer_of(ssn)[0]
    if lower_layer is None:
        lower_layer = ssn_layer - 1
    if lower_layer >= ssn_layer:
        raise ValueError(f"descent goes down: layer {lower_layer} not below {ssn_layer}")
    reference = state.sc_position if reference_position is None else reference_position

    cand = descent_candidates(
        ssn, lower_layer, state, c, policy.isl_min_elev_deg, policy.feasibility_rule
    )
    if cand.size == 0:
        raise Unreachable("descent blocked: no feasible under-layer satellite", lower_layer)

    dsn_layer = c.layer_of(dsn)[0]
    if dsn_layer == lower_layer == ssn_layer - 1 and dsn in cand:
        return dsn, False

    ssn_pos = state.position_of(ssn)
    positions = state.positions[cand - 1]
    keep = same_sign_mask(reference, ssn_pos, positions, state.position_of(dsn))
    fallback = not bool(keep.any())
    pool = cand if fallback else cand[keep]
    pool_pos = positions if fallback else positions[keep]
    slants = np.linalg.norm(pool_pos - ssn_pos, axis=-1)
    return int(pool[int(np.argmin(slants))]), fallback


def _ring_steps(src: int, dst: int, ring: int) -> list[int]:
    """Positions visited moving src -> dst the short way (ties go increasing)."""
    delta = (dst - src) % ring
    if delta == 0:
        return []
    step = 1 if delta <= ring - delta else -1
    count = delta if step == 1 else ring - delta
    return [(src + step * k) % ring for k in range(1, count + 1)]


def get_intra_layer_route(src: int, dst: int, layer: int, c: Constellation) -> tuple[int, ...]:
    """Dimension-ordered route on the walker grid, src through dst inclusive.

    Messages advance along the in-plane ring first, then across planes, each
    taking the shorter way around (ties resolved towards increasing index).
    The hop count equals the sum of the two ring distances, which is the
    graph distance on the 4-neighbour torus.
    """
    u_src, i_src = c.layer_of(src)
    u_dst, i_dst = c.layer_of(dst)
    if u_src != layer or u_dst != layer:
        raise ValueError(f"route endpoints must both be on layer {layer}, got {u_src}/{u_dst}")
    spec = c.layer_spec(layer)
    if spec.kind != "walker":
        raise ValueError(f"layer {layer} has no walker grid to route on")

    p_src, q_src = c.plane_slot(layer, i_src)
    p_dst, q_dst = c.plane_slot(layer, i_dst)
    nodes = [src]
    for q in _ring_steps(q_src, q_dst, spec.sats_per_plane):
        nodes.append(c.global_id(layer, c.local_index(layer, p_src, q)))
    for p in _ring_steps(p_src, p_dst, spec.planes):
        nodes.append(c.global_id(layer, c.local_index(layer, p, q_dst)))
    return tuple(nodes)


def get_cross_layer_route(
    ssn: int,
    dsn: int,
    state: StateAtT,
    c: Constellation,
    scheme: Scheme,
    policy: RoutingPolicy,
) -> tuple[tuple[int, ...], bool]:
    """Descend boundary-by-boundary through the scheme's layers to the TSN.

    Every layer the scheme includes between the SSN and the destination
    layer is visited; excluded layers are spanned by a single cross-layer
    hop under the same feasibility rule.  The ascent axis for each
    boundary's directional-angle test is anchored at the node the previous
    hop arrived from (the SC for the first boundary).

    Returns:
        (the node chain SSN..TSN inclusive, fallback flag).
    """
    u_start = c.layer_of(ssn)[0]
    u_target = c.layer_of(dsn)[0]
    if u_start <= u_target:
        raise ValueError(f"cross-layer route needs ssn above the target layer ({u_start} <= {u_target})")
    descent_layers = sorted((u for u in scheme.layers_used if u_target <= u < u_start), reverse=True)
    if not descent_layers or descent_layers[-1] != u_target:
        raise ValueError(f"scheme {scheme.name} cannot reach layer {u_target}")

    chain = [ssn]
    reference = state.sc_position
    current = ssn
    fallback = False
    for lower in descent_layers:
        best, fb = get_best_under_layer_sat(
            current, dsn, state, c, policy,
            lower_layer=lower, reference_position=reference,
        )
        fallback = fallback or fb
        reference = state.position_of(current)
        chain.append(best)
        current = best
    return tuple(chain), fallback


def _hops_for(nodes: tuple[int, ...], state: StateAtT) -> tuple[Hop, ...]:
    """Uplink plus one ISL hop per consecutive node pair."""
    positions = state.positions[np.asarray(nodes) - 1]
    hops = [
        Hop(GROUND_SPACE, 0, nodes[0], float(np.linalg.norm(positions[0] - state.sc_position)))
    ]
    for k in range(len(nodes) - 1):
        hops.append(
            Hop(ISL, nodes[k], nodes[k + 1], float(np.linalg.norm(positions[k + 1] - positions[k])))
        )
    return tuple(hops)


def cld_prepare(
    c: Constellation,
    state: StateAtT,
    scheme: Scheme,
    dsn: int,
    policy: RoutingPolicy,
    access: Optional[SampleAccess] = None,
) -> Route:
    """Compute a cross-layer-descent route for one destination at one instant.

    Scans the scheme's layers upward from the destination's layer for SC
    access.  If the lowest available layer is the destination's own, the
    route is a pure grid route from the closest visible satellite (R1).
    Otherwise the closest satellite of the lowest available upper layer
    becomes the SSN, descends to a TSN (R2), and the grid tail finishes the
    job (R3).

    Raises:
        Unreachable: no scheme layer offers SC access, or a descent boundary
            has no feasible candidate.
    """
    u_target = c.layer_of(dsn)[0]
    if access is None:
        access = SampleAccess(state, c, policy, u_target)

    u_min = None
    for u in sorted(u for u in scheme.layers_used if u >= u_target):
        if access.visible_gids(u).size > 0:
            u_min = u
            break
    if u_min is None:
        raise Unreachable(f"no SC access on any layer of scheme {scheme.name}")

    ssn = get_closest_sat_to_sc(access.visible_gids(u_min), state.sc_position, u_min, state, c)
    if u_min == u_target:
        r1 = get_intra_layer_route(ssn, dsn, u_target, c)
        return Route(
            scheme=scheme.name, t_seconds=state.t.utc_seconds, dsn=dsn,
            ssn=ssn, tsn=None, r1=r1, r2=(), r3=(),
            hops=_hops_for(r1, state),
        )

    chain, fallback = get_cross_layer_route(ssn, dsn, state, c, scheme, policy)
    tsn = chain[-1]
    tail = get_intra_layer_route(tsn, dsn, u_target, c)
    nodes = chain + tail[1:]
    return Route(
        scheme=scheme.name, t_seconds=state.t.utc_seconds, dsn=dsn,
        ssn=ssn, tsn=tsn, r1=(), r2=chain, r3=tail[1:],
        hops=_hops_for(nodes, state), fallback=fallback,
    )


def route_non_cld_meo(
    c: Constellation,
    state: StateAtT,
    dsn: int,
    policy: RoutingPolicy,
    access: Optional[SampleAccess] = None,
) -> Route:
    """Baseline: always enter via the MEO layer, hand off to the nearest feasible
    target-layer satellite (no directional-angle filtering), then grid-route.

    Raises:
        Unreachable: no SC-accessible MEO satellite, or no feasible handoff.
    """
    scheme = SCHEMES["NONCLD-MEO"]
    meo_layer = max(scheme.access_layers)
    u_target = c.layer_of(dsn)[0]
    if access is None:
        access = SampleAccess(state, c, policy, u_target)

    visible = access.visible_gids(meo_layer)
    if visible.size == 0:
        raise Unreachable("no SC-accessible MEO satellite", meo_layer)
    ssn = get_closest_sat_to_sc(visible, state.sc_position, meo_layer, state, c)

    cand = descent_candidates(
        ssn, u_target, state, c, policy.isl_min_elev_deg, policy.baseline_rule
    )
    if cand.size == 0:
        raise Unreachable("no target-layer satellite feasible from the MEO node", u_target)
    ssn_pos = state.position_of(ssn)
    slants = np.linalg.norm(state.positions[cand - 1] - ssn_pos, axis=-1)
    tsn = int(cand[int(np.argmin(slants))])

    tail = get_intra_layer_route(tsn, dsn, u_target, c)
    nodes = (ssn,) + tail
    return Route(
        scheme=scheme.name, t_seconds=state.t.utc_seconds, dsn=dsn,
        ssn=ssn, tsn=tsn, r1=(), r2=(ssn, tsn), r3=tail[1:],
        hops=_hops_for(nodes, state),
    )


def route_non_cld_geo(
    c: Constellation,
    state: StateAtT,
    dsn: int,
    policy: RoutingPolicy,
    access: Optional[SampleAccess] = None,
) -> Route:
    """Baseline: bent-pipe through the GEO ring straight to the destination.

    The SC uplinks to its closest visible GEO satellite; if that satellite
    cannot see the destination, the message crosses the GEO ring (one
    line-of-sight ISL) to a GEO satellite that can.  No target-layer grid
    routing is used.

    Raises:
        Unreachable: no SC-visible GEO satellite, or no GEO satellite (direct
            or one relay away) can reach the destination.
    """
    scheme = SCHEMES["NONCLD-GEO"]
    geo_layer = max(scheme.access_layers)
    u_target = c.layer_of(dsn)[0]
    if access is None:
        access = SampleAccess(state, c, policy, u_target)

    visible = access.visible_gids(geo_layer)
    if visible.size == 0:
        raise Unreachable("no SC-accessible GEO satellite", geo_layer)
    ssn = get_closest_sat_to_sc(visible, state.sc_position, geo_layer, state, c)
    ssn_pos = state.position_of(ssn)
    dsn_pos = state.position_of(dsn)

    def sees_dsn(gid: int) -> bool:
        mask = descent_feasible_mask(
            state.position_of(gid), dsn_pos[None, :],
            policy.isl_min_elev_deg, policy.baseline_rule,
        )
        return bool(mask[0])

    if sees_dsn(ssn):
        nodes = (ssn, dsn)
        return Route(
            scheme=scheme.name, t_seconds=state.t.utc_seconds, dsn=dsn,
            ssn=ssn, tsn=dsn, r1=(), r2=nodes, r3=(),
            hops=_hops_for(nodes, state),
        )

    sl = c.layer_slice(geo_layer)
    best_relay = None
    best_cost = np.inf
    for g in range(sl.start + 1, sl.stop + 1):
        if g == ssn or not sees_dsn(g):
            continue
        g_pos = state.position_of(g)
        if not chord_clears_earth(ssn_pos, g_pos[None, :])[0]:
            continue
        cost = float(np.linalg.norm(g_pos - ssn_pos) + np.linalg.norm(dsn_pos - g_pos))
        if cost < best_cost:
            best_cost = cost
            best_relay = g
    if best_relay is None:
        raise Unreachable("destination invisible from every reachable GEO satellite", geo_layer)

    nodes = (ssn, best_relay, dsn)
    return Route(
        scheme=scheme.name, t_seconds=state.t.utc_seconds, dsn=dsn,
        ssn=ssn, tsn=dsn, r1=(), r2=nodes, r3=(),
        hops=_hops_for(nodes, state),
    )


def route_for_scheme(
    c: Constellation,
    state: StateAtT,
    scheme: Scheme,
    dsn: int,
    policy: RoutingPolicy,
    access: Optional[SampleAccess] = None,
) -> Route:
    """Dispatch one (scheme, destination, snapshot) to its route builder."""
    if scheme.name.startswith("CLD"):
        return cld_prepare(c, state, scheme, dsn, policy, access)
    if scheme.name == "NONCLD-MEO":
        return route_non_cld_meo(c, state, dsn, policy, access)
    if scheme.name == "NONCLD-GEO":
        return route_non_cld_geo(c, state, dsn, policy, access)
    raise ValueError(f"no route builder for scheme {scheme.name!r}")
