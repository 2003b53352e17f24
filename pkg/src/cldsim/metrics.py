"""Per-route and per-mission performance measures.

Latency per hop is propagation (d/c) plus transmission (frame bits over the
hop's link rate) plus fixed per-hop queuing and processing constants.  Path
length is pure geometry and therefore identical across link configurations.
Mission resilience divides the fraction of reachable sample instants by the
mean hop count over the reachable ones, so short reliable routes score
highest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .access import StateAtT, elevations_from
from .constants import SPEED_OF_LIGHT
from .constellation import Constellation
from .routing import GROUND_SPACE, Route, RoutingPolicy, Scheme


@dataclass(frozen=True)
class LinkConfig:
    """Link rates and per-hop delay constants for one configuration."""

    name: str
    ground_space_rate_bps: float
    isl_rate_bps: float
    frame_size_bytes: int = 1024
    processing_delay_s: float = 100e-6
    queuing_delay_s: float = 100e-6

    def __post_init__(self) -> None:
        if self.ground_space_rate_bps <= 0 or self.isl_rate_bps <= 0:
            raise ValueError(f"link rates must be positive in configuration {self.name}")

    @property
    def frame_bits(self) -> float:
        return 8.0 * self.frame_size_bytes

    def rate_for(self, hop_kind: str) -> float:
        return self.ground_space_rate_bps if hop_kind == GROUND_SPACE else self.isl_rate_bps


LINK_CONFIGS: dict[str, LinkConfig] = {
    "I": LinkConfig("I", ground_space_rate_bps=324e6, isl_rate_bps=324e6),
    "II": LinkConfig("II", ground_space_rate_bps=1.8e9, isl_rate_bps=10e9),
    "III": LinkConfig("III", ground_space_rate_bps=619.2e6, isl_rate_bps=10e9),
}
CONFIG_ORDER = ("I", "II", "III")


def link_config_by_name(name: str) -> LinkConfig:
    try:
        return LINK_CONFIGS[name]
    except KeyError:
        raise ValueError(f"unknown configuration {name!r}; expected one of {sorted(LINK_CONFIGS)}") from None


def path_segments(route: Route) -> dict[str, float]:
    """Geometric length of each path segment (m): uplink, descent, target-layer."""
    segments = {"uplink": route.hops[0].length_m if route.hops else 0.0}
    isl_hops = route.hops[1:]
    if route.r1:
        segments["target_layer"] = float(sum(h.length_m for h in isl_hops))
    else:
        descent_count = max(len(route.r2) - 1, 0)
        segments["descent"] = float(sum(h.length_m for h in isl_hops[:descent_count]))
        segments["target_layer"] = float(sum(h.length_m for h in isl_hops[descent_count:]))
    return segments


def path_length(route: Route) -> float:
    """Total geometric path length (m): the sum over all hops including the uplink.

    The hop-wise sum and the per-segment decomposition are computed
    independently and must agree; a mismatch indicates a malformed route.
    """
    by_hops = float(sum(h.length_m for h in route.hops))
    by_segments = float(sum(path_segments(route).values()))
    if by_hops > 0.0 and abs(by_hops - by_segments) > 1e-6 * by_hops:
        raise ValueError(
            f"segment decomposition {by_segments} disagrees with hop sum {by_hops}"
        )
    return by_hops


def latency(route: Route, link: LinkConfig) -> float:
    """End-to-end latency (s) of a route under one link configuration.

    Per hop: d/c propagation, frame transmission at the hop's rate, plus the
    queuing and processing constants.  A degenerate route with no hops takes
    zero time.
    """
    total = 0.0
    for hop in route.hops:
        total += (
            hop.length_m / SPEED_OF_LIGHT
            + link.frame_bits / link.rate_for(hop.kind)
            + link.queuing_delay_s
            + link.processing_delay_s
        )
    return total


def latency_from_scalars(n_h: np.ndarray, path_m: np.ndarray, link: LinkConfig) -> np.ndarray:
    """Vectorised latency for routes whose only ground-space hop is the uplink."""
    n = np.asarray(n_h, dtype=float)
    per_hop_fixed = link.queuing_delay_s + link.processing_delay_s
    transmission = link.frame_bits * (
        1.0 / link.ground_space_rate_bps + (n - 1.0) / link.isl_rate_bps
    )
    return np.asarray(path_m, dtype=float) / SPEED_OF_LIGHT + n * per_hop_fixed + transmission


def q_indicator(
    scheme: Scheme,
    state: StateAtT,
    c: Constellation,
    policy: Optional[RoutingPolicy] = None,
    target_layer: int = 1,
) -> int:
    """1 iff the SC can see at least one satellite of the scheme's access layers."""
    policy = policy or RoutingPolicy()
    for u in sorted(scheme.access_layers):
        sl = c.layer_slice(u)
        elev = elevations_from(state.sc_position, state.positions[sl])
        if bool(np.any(elev >= policy.sc_threshold(u, target_layer))):
            return 1
    return 0


def resilience(per_sample_q: Sequence[int], mean_hop_count: Optional[float]) -> float:
    """Mission resilience: reachable-sample fraction discounted by mean hop count.

    R = (sum of Q over samples) / (mean_hop_count * T).  With no reachable
    samples the mean hop count is undefined and R is 0 by convention.
    """
    total = len(per_sample_q)
    if total < 1:
        raise ValueError("resilience needs at least one sample")
    q_sum = float(np.sum(np.asarray(per_sample_q, dtype=float)))
    if mean_hop_count is None or not math.isfinite(mean_hop_count):
        return 0.0
    if mean_hop_count < 1.0:
        raise ValueError(f"mean hop count {mean_hop_count} below 1")
    return q_sum / (mean_hop_count * total)


@dataclass(frozen=True)
class MissionResult:
    """Per-(scheme, configuration, target) records and their aggregates.

    The per-sample arrays share one index; unreachable samples carry zero
    hops/path/latency and are excluded from the means.  ``mean_latency_s``
    is NaN when no sample was reachable.
    """

    scheme: str
    configuration: str
    dsn: int
    t_seconds: np.ndarray
    reachable: np.ndarray
    hops: np.ndarray
    path_m: np.ndarray
    latency_s: np.ndarray
    mean_latency_s: float
    mean_path_m: float
    mean_hops: float
    resilience: float


def build_mission_result(
    scheme: str,
    configuration: str,
    dsn: int,
    t_seconds: np.ndarray,
    reachable: np.ndarray,
    hops: np.ndarray,
    path_m: np.ndarray,
    latency_s: np.ndarray,
    mission_mean_hops: Optional[float] = None,
) -> MissionResult:
    """Assemble one target's result, computing masked means and resilience.

    ``mission_mean_hops`` is the scheme's single hop-count divisor for the
    resilience measure (the mission-wide mean over reachable samples); when
    omitted, this target's own mean is used instead.
    """
    mask = reachable.astype(bool)
    if mask.any():
        mean_latency = float(np.mean(latency_s[mask]))
        mean_path = float(np.mean(path_m[mask]))
        mean_hops = float(np.mean(hops[mask]))
        divisor = mission_mean_hops if mission_mean_hops is not None else mean_hops
        r_value = resilience(reachable.tolist(), divisor)
    else:
        mean_latency = math.nan
        mean_path = math.nan
        mean_hops = math.nan
        r_value = 0.0
    return MissionResult(
        scheme=scheme, configuration=configuration, dsn=dsn,
        t_seconds=t_seconds, reachable=reachable, hops=hops,
        path_m=path_m, latency_s=latency_s,
        mean_latency_s=mean_latency, mean_path_m=mean_path,
        mean_hops=mean_hops, resilience=r_value,
    )


@dataclass(frozen=True)
class OverallStats:
    """Scheme-level aggregates: the mean over targets of the per-target means."""

    scheme: str
    configuration: str
    mean_latency_s: float
    mean_path_m: float
    mean_hops: float
    mean_resilience: float
    min_latency_s: float
    targets: int


def aggregate(results: Sequence[MissionResult]) -> list[OverallStats]:
    """Fold per-target results into per-(scheme, configuration) overall means.

    Output rows are ordered by (scheme, configuration).  Targets without a
    single reachable sample contribute to resilience (as zero) but are
    excluded from latency/path means.
    """
    groups: dict[tuple[str, str], list[MissionResult]] = {}
    for res in results:
        groups.setdefault((res.scheme, res.configuration), []).append(res)

    overall: list[OverallStats] = []
    for (scheme, config) in sorted(groups):
        members = sorted(groups[(scheme, config)], key=lambda r: r.dsn)
        lat = [r.mean_latency_s for r in members if not math.isnan(r.mean_latency_s)]
        path = [r.mean_path_m for r in members if not math.isnan(r.mean_path_m)]
        hops = [r.mean_hops for r in members if not math.isnan(r.mean_hops)]
        minima = [
            float(np.min(r.latency_s[r.reachable.astype(bool)]))
            for r in members
            if r.reachable.any()
        ]
        overall.append(
            OverallStats(
                scheme=scheme,
                configuration=config,
                mean_latency_s=float(np.mean(lat)) if lat else math.nan,
                mean_path_m=float(np.mean(path)) if path else math.nan,
                mean_hops=float(np.mean(hops)) if hops else math.nan,
                mean_resilience=float(np.mean([r.resilience for r in members])),
                min_latency_s=float(np.min(minima)) if minima else math.nan,
                targets=len(members),
            )
        )
    return overall
