"""Multi-layer constellation assembly and intra-layer grid topology.

Layers are altitude shells indexed from 1 (lowest) upward.  Walker layers
place P planes of sigma satellites each on a torus of inter-plane and
in-plane rings; TLE layers load their element sets from two-line element
files.  Global satellite IDs are layer-contiguous, lowest layer first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import EARTH_RADIUS_M
from .orbit import Epoch, OrbitalElements, TleParseResult


@dataclass(frozen=True)
class LayerSpec:
    """Configuration of one altitude shell.

    For walker layers ``planes * sats_per_plane`` satellites are generated;
    TLE layers take their size and geometry from the file instead and may
    leave ``altitude_m`` unset (it is then derived from the parsed elements).
    ``min_elevation_deg`` is the intra-layer ISL elevation constraint carried
    for completeness; the 4-neighbour grid itself is fixed by construction.
    """

    index: int
    kind: str  # "walker" | "tle"
    planes: int = 0
    sats_per_plane: int = 0
    altitude_m: Optional[float] = None
    inclination_deg: float = 0.0
    raan_spread_deg: float = 360.0
    phasing_deg: float = 0.0
    min_elevation_deg: float = 10.0
    tle_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in ("walker", "tle"):
            raise ValueError(f"layer {self.index}: unknown kind {self.kind!r}")
        if self.index < 1:
            raise ValueError(f"layer index {self.index} must be >= 1")
        if self.kind == "walker":
            if self.planes < 1 or self.sats_per_plane < 1:
                raise ValueError(
                    f"layer {self.index}: walker layer needs planes >= 1 and "
                    f"sats_per_plane >= 1, got {self.planes}x{self.sats_per_plane}"
                )
            if self.altitude_m is None:
                raise ValueError(f"layer {self.index}: walker layer needs an altitude")


@dataclass(frozen=True)
class SatelliteId:
    """Identity of one satellite: global ID plus (layer, local index), all 1-based."""

    global_id: int
    layer: int
    local_index: int


@dataclass(frozen=True)
class BuiltLayer:
    """A layer's spec together with its generated or loaded element sets."""

    spec: LayerSpec
    elements: tuple[OrbitalElements, ...]
    names: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def altitude_m(self) -> float:
        if self.spec.altitude_m is not None:
            return self.spec.altitude_m
        mean_a = sum(e.semi_major_axis for e in self.elements) / len(self.elements)
        return mean_a - EARTH_RADIUS_M


def build_walker(spec: LayerSpec, epoch: Epoch) -> BuiltLayer:
    """Generate a walker shell's element sets.

    Plane p (0-based) gets RAAN p * raan_spread / P; slot q gets argument of
    latitude q * 360/sigma plus the per-plane cumulative phasing offset.
    Local indices enumerate plane-major: i = p * sigma + q + 1.
    """
    if spec.kind != "walker":
        raise ValueError(f"layer {spec.index} is not a walker layer")
    semi_major = EARTH_RADIUS_M + float(spec.altitude_m)
    inclination = math.radians(spec.inclination_deg)
    raan_step = math.radians(spec.raan_spread_deg) / spec.planes
    slot_step = 2.0 * math.pi / spec.sats_per_plane
    phasing = math.radians(spec.phasing_deg)

    elements = []
    names = []
    for p in range(spec.planes):
        for q in range(spec.sats_per_plane):
            elements.append(
                OrbitalElements(
                    semi_major_axis=semi_major,
                    inclination=inclination,
                    raan=p * raan_step,
                    arg_latitude_at_epoch=q * slot_step + p * phasing,
                    eccentricity=0.0,
                    epoch=epoch,
                )
            )
            names.append(f"L{spec.index}-P{p + 1}-S{q + 1}")
    return BuiltLayer(spec=spec, elements=tuple(elements), names=tuple(names))


def build_tle_layer(spec: LayerSpec, parsed: TleParseResult) -> BuiltLayer:
    """Wrap parsed TLE records as a layer, rejecting parse errors."""
    if spec.kind != "tle":
        raise ValueError(f"layer {spec.index} is not a TLE layer")
    if parsed.errors:
        first = parsed.errors[0]
        raise ValueError(
            f"layer {spec.index}: TLE parse failed at line {first.line_number}: {first.message}"
        )
    if not parsed.elements:
        raise ValueError(f"layer {spec.index}: TLE file holds no records")
    names = tuple(
        name if name else f"L{spec.index}-T{i + 1}" for i, name in enumerate(parsed.names)
    )
    return BuiltLayer(spec=spec, elements=parsed.elements, names=names)


class Constellation:
    """All satellites of every layer with layer-contiguous global IDs.

    Immutable after assembly; every query is pure.  Columnar element arrays
    are exposed for vectorised propagation.
    """

    def __init__(self, built_layers: list[BuiltLayer]):
        if not built_layers:
            raise ValueError("constellation needs at least one layer")
        indices = [b.spec.index for b in built_layers]
        if indices != list(range(1, len(built_layers) + 1)):
            raise ValueError(f"layer indices must be consecutive from 1, got {indices}")
        altitudes = [b.altitude_m for b in built_layers]
        for lower, upper in zip(altitudes, altitudes[1:]):
            if upper <= lower:
                raise ValueError(
                    f"layer altitudes must strictly increase with the index, got {altitudes}"
                )

        self._layers = tuple(built_layers)
        sizes = [b.size for b in built_layers]
        self._sizes = tuple(sizes)
        self._offsets = tuple(int(x) for x in np.concatenate([[0], np.cumsum(sizes)]))

        all_elements = [e for b in built_layers for e in b.elements]
        self._elements = tuple(all_elements)
        self.names = tuple(n for b in built_layers for n in b.names)
        self.semi_major = np.array([e.semi_major_axis for e in all_elements])
        self.eccentricity = np.array([e.eccentricity for e in all_elements])
        self.inclination = np.array([e.inclination for e in all_elements])
        self.raan = np.array([e.raan for e in all_elements])
        self.arg_perigee = np.array([e.arg_perigee for e in all_elements])
        self.mean_anomaly = np.array(
            [e.arg_latitude_at_epoch - e.arg_perigee for e in all_elements]
        )
        self.epoch_seconds = np.array([e.epoch.utc_seconds for e in all_elements])

    # -- sizes and identity --------------------------------------------------

    @property
    def layers(self) -> tuple[BuiltLayer, ...]:
        return self._layers

    @property
    def n_layers(self) -> int:
        return len(self._layers)

    @property
    def total(self) -> int:
        return self._offsets[-1]

    def layer_size(self, u: int) -> int:
        self._check_layer(u)
        return self._sizes[u - 1]

    def layer_spec(self, u: int) -> LayerSpec:
        self._check_layer(u)
        return self._layers[u - 1].spec

    def layer_slice(self, u: int) -> slice:
        """Zero-based slice of layer u's satellites in the global arrays."""
        self._check_layer(u)
        return slice(self._offsets[u - 1], self._offsets[u])

    def _check_layer(self, u: int) -> None:
        if not 1 <= u <= self.n_layers:
            raise ValueError(f"layer {u} outside [1, {self.n_layers}]")

    def global_id(self, u: int, local_index: int) -> int:
        self._check_layer(u)
        if not 1 <= local_index <= self._sizes[u - 1]:
            raise ValueError(
                f"local index {local_index} outside [1, {self._sizes[u - 1]}] for layer {u}"
            )
        return self._offsets[u - 1] + local_index

    def layer_of(self, global_id: int) -> tuple[int, int]:
        """Inverse of the prefix-sum ID assignment: global id -> (layer, local index)."""
        if not 1 <= global_id <= self.total:
            raise ValueError(f"global id {global_id} outside [1, {self.total}]")
        u = int(np.searchsorted(self._offsets, global_id, side="left"))
        return u, global_id - self._offsets[u - 1]

    def satellite_id(self, global_id: int) -> SatelliteId:
        u, i = self.layer_of(global_id)
        return SatelliteId(global_id=global_id, layer=u, local_index=i)

    def elements_of(self, global_id: int) -> OrbitalElements:
        self.layer_of(global_id)  # range check
        return self._elements[global_id - 1]

    # -- walker grid topology --------------------------------------------------

    def is_walker(self, u: int) -> bool:
        return self.layer_spec(u).kind == "walker"

    def plane_slot(self, u: int, local_index: int) -> tuple[int, int]:
        """Local index -> (plane, slot), both 0-based, walker layers only."""
        spec = self._walker_spec(u)
        if not 1 <= local_index <= self._sizes[u - 1]:
            raise ValueError(f"local index {local_index} out of range for layer {u}")
        return divmod(local_index - 1, spec.sats_per_plane)

    def local_index(self, u: int, plane: int, slot: int) -> int:
        spec = self._walker_spec(u)
        return plane % spec.planes * spec.sats_per_plane + slot % spec.sats_per_plane + 1

    def _walker_spec(self, u: int) -> LayerSpec:
        spec = self.layer_spec(u)
        if spec.kind != "walker":
            raise ValueError(f"layer {u} is a {spec.kind} layer, not walker")
        return spec

    def intra_layer_neighbors(self, u: int, local_index: int) -> frozenset[int]:
        """The four +grid neighbours of a walker-layer satellite.

        In-plane neighbours are the slots above and below on the same ring;
        inter-plane neighbours hold the same slot on the adjacent planes,
        both with wraparound.  The relation is symmetric by construction.

        Raises:
            ValueError: for degenerate layers (fewer than 3 planes or 3 slots
                per plane, where the four neighbours would not be distinct).
        """
        spec = self._walker_spec(u)
        if spec.planes < 3 or spec.sats_per_plane < 3:
            raise ValueError(
                f"layer {u}: neighbour grid needs >= 3 planes and >= 3 sats per "
                f"plane, got {spec.planes}x{spec.sats_per_plane}"
            )
        plane, slot = self.plane_slot(u, local_index)
        return frozenset(
            (
                self.local_index(u, plane, slot - 1),
                self.local_index(u, plane, slot + 1),
                self.local_index(u, plane - 1, slot),
                self.local_index(u, plane + 1, slot),
            )
        )


def assign_global_ids(built_layers: list[BuiltLayer]) -> Constellation:
    """Assemble layers (sorted by index, altitudes ascending) into a Constellation."""
    ordered = sorted(built_layers, key=lambda b: b.spec.index)
    seen = [b.spec.index for b in ordered]
    if len(set(seen)) != len(seen):
        raise ValueError(f"duplicate layer indices: {seen}")
    return Constellation(ordered)
