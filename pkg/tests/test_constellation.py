import math
from collections import deque

import numpy as np
import pytest

from cldsim.constants import EARTH_RADIUS_M
from cldsim.constellation import (
    LayerSpec,
    assign_global_ids,
    build_walker,
)
from cldsim.orbit import Epoch

EPOCH = Epoch(0.0)


def walker(index, planes, sats, altitude_km=1000.0, inclination=60.0, **kw):
    return build_walker(
        LayerSpec(
            index=index, kind="walker", planes=planes, sats_per_plane=sats,
            altitude_m=altitude_km * 1000.0, inclination_deg=inclination, **kw,
        ),
        EPOCH,
    )


def torus_neighbors(planes, sats, local_index):
    """Independent +grid adjacency from plain index arithmetic (1-based)."""
    p, q = divmod(local_index - 1, sats)
    return {
        p * sats + (q - 1) % sats + 1,
        p * sats + (q + 1) % sats + 1,
        (p - 1) % planes * sats + q + 1,
        (p + 1) % planes * sats + q + 1,
    }


def bfs_distances(planes, sats, source):
    """Breadth-first distances over the independent adjacency."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nxt in torus_neighbors(planes, sats, node):
            if nxt not in dist:
                dist[nxt] = dist[node] + 1
                queue.append(nxt)
    return dist


class TestBuildWalker:
    def test_plane_major_indexing(self):
        layer = walker(1, 6, 13, altitude_km=1015.0, inclination=99.5)
        assert layer.size == 78
        c = assign_global_ids([layer])
        assert c.plane_slot(1, 14) == (1, 0)

    def test_single_plane_even_spacing(self):
        layer = walker(1, 1, 20, inclination=0.0)
        args = [e.arg_latitude_at_epoch for e in layer.elements]
        steps = np.diff(args)
        assert np.allclose(steps, math.radians(18.0))
        assert all(e.inclination == 0.0 for e in layer.elements)

    def test_raan_step(self):
        layer = walker(1, 18, 40)
        raans = sorted({e.raan for e in layer.elements})
        assert len(raans) == 18
        assert np.allclose(np.diff(raans), math.radians(20.0))

    def test_phasing_accumulates_per_plane(self):
        layer = walker(1, 4, 5, phasing_deg=7.5)
        c = assign_global_ids([layer])
        for plane in range(4):
            first = layer.elements[c.local_index(1, plane, 0) - 1]
            assert first.arg_latitude_at_epoch == pytest.approx(
                math.radians(7.5 * plane)
            )

    def test_rejects_empty_geometry(self):
        with pytest.raises(ValueError):
            LayerSpec(index=1, kind="walker", planes=0, sats_per_plane=13,
                      altitude_m=1000e3)


class TestGlobalIds:
    def test_table1_totals(self, table1):
        c = table1.constellation
        assert c.total == 821
        assert [c.layer_size(u) for u in (1, 2, 3, 4)] == [78, 720, 20, 3]
        assert c.global_id(2, 1) == 79
        assert c.global_id(3, 1) == 799
        assert c.global_id(4, 1) == 819

    def test_single_layer(self):
        c = assign_global_ids([walker(1, 1, 5)])
        assert [c.satellite_id(g).global_id for g in range(1, 6)] == [1, 2, 3, 4, 5]

    def test_layer_of_examples(self, table1):
        c = table1.constellation
        assert c.layer_of(33) == (1, 33)
        assert c.layer_of(79) == (2, 1)
        assert c.layer_of(821) == (4, 3)

    def test_layer_of_rejects_out_of_range(self, table1):
        with pytest.raises(ValueError):
            table1.constellation.layer_of(0)
        with pytest.raises(ValueError):
            table1.constellation.layer_of(822)

    def test_id_assignment_is_a_bijection(self):
        c = assign_global_ids([walker(1, 4, 5), walker(2, 3, 3, altitude_km=1500.0)])
        seen = set()
        for g in range(1, c.total + 1):
            u, i = c.layer_of(g)
            assert c.global_id(u, i) == g
            seen.add((u, i))
        assert len(seen) == c.total == 29

    def test_duplicate_layer_indices_rejected(self):
        with pytest.raises(ValueError):
            assign_global_ids([walker(1, 3, 3), walker(1, 3, 3, altitude_km=2000.0)])

    def test_non_ascending_altitudes_rejected(self):
        with pytest.raises(ValueError):
            assign_global_ids(
                [walker(1, 3, 3, altitude_km=2000.0), walker(2, 3, 3, altitude_km=1000.0)]
            )


class TestNeighbors:
    def test_corner_wraparound_examples(self, table1):
        c = table1.constellation
        # 66 = 5*13 + 0 + 1: same slot on the last plane.
        assert c.intra_layer_neighbors(1, 1) == {2, 13, 14, 66}
        assert c.intra_layer_neighbors(1, 13) == {12, 1, 26, 78}

    def test_symmetry_and_degree(self, table1):
        c = table1.constellation
        for i in range(1, 79):
            neighbors = c.intra_layer_neighbors(1, i)
            assert len(neighbors) == 4
            for j in neighbors:
                assert i in c.intra_layer_neighbors(1, j)

    def test_degenerate_layer_rejected(self):
        c = assign_global_ids([walker(1, 1, 20)])
        with pytest.raises(ValueError, match="3 planes"):
            c.intra_layer_neighbors(1, 1)

    def test_matches_independent_adjacency_4x5(self):
        c = assign_global_ids([walker(1, 4, 5)])
        for i in range(1, 21):
            assert c.intra_layer_neighbors(1, i) == torus_neighbors(4, 5, i)

    def test_torus_distances_4x5(self):
        # The neighbour graph is the 4x5 torus: BFS eccentricities match
        # the sum of the two ring distances everywhere.
        for src in range(1, 21):
            dist = bfs_distances(4, 5, src)
            assert len(dist) == 20
            p0, q0 = divmod(src - 1, 5)
            for dst, d in dist.items():
                p1, q1 = divmod(dst - 1, 5)
                ring = min((q1 - q0) % 5, (q0 - q1) % 5) + min((p1 - p0) % 4, (p0 - p1) % 4)
                assert d == ring
