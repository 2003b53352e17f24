"""Deterministic multi-layer satellite network simulator.

Builds layered constellations (Walker shells and TLE-loaded shells),
computes cross-layer-descent telecommand routes against two non-CLD
baselines, and scores latency, path length, and mission resilience over a
sampled mission clock.
"""

from .access import (
    DirectionalAngles,
    StateAtT,
    accessible_set,
    cross_layer_candidates,
    directional_angles,
    elevation,
    is_accessible_by_sc,
    slant_range,
    snapshot,
)
from .constellation import (
    Constellation,
    LayerSpec,
    SatelliteId,
    assign_global_ids,
    build_tle_layer,
    build_walker,
)
from .metrics import (
    LINK_CONFIGS,
    LinkConfig,
    MissionResult,
    aggregate,
    latency,
    link_config_by_name,
    path_length,
    q_indicator,
    resilience,
)
from .orbit import (
    Epoch,
    NedFrame,
    OrbitalElements,
    eci_to_ecef,
    ecef_to_eci,
    geodetic_to_ecef,
    gmst_deg,
    ned_basis,
    parse_tle,
    propagate_circular,
    propagate_twobody,
)
from .routing import (
    SCHEME_ORDER,
    SCHEMES,
    Route,
    RoutingPolicy,
    Scheme,
    Unreachable,
    cld_prepare,
    get_best_under_layer_sat,
    get_closest_sat_to_sc,
    get_cross_layer_route,
    get_intra_layer_route,
    route_for_scheme,
    route_non_cld_geo,
    route_non_cld_meo,
    scheme_by_name,
)
from .scenario import (
    MissionRun,
    MissionSpec,
    default_targets,
    recompute_route,
    run_mission,
    sample_times,
)

__version__ = "0.1.0"
