import numpy as np
import pytest
from dataclasses import replace

from cldsim.orbit import Epoch
from cldsim.scenario import (
    MissionSpec,
    default_targets,
    recompute_route,
    run_mission,
    sample_times,
)


def small_spec(table1, samples=5, targets=(1, 5), schemes=("CLD-I", "NONCLD-GEO"),
               configurations=("I", "II")):
    return replace(
        table1.spec,
        sample_count=samples,
        targets=tuple(targets),
        schemes=tuple(schemes),
        configurations=tuple(configurations),
    )


class TestSampleTimes:
    def test_five_hundred_over_a_day(self, table1):
        times = sample_times(table1.spec)
        assert len(times) == 500
        assert times[0] == table1.spec.t_start
        assert times[1] - times[0] == pytest.approx(172.8, abs=1e-6)
        assert times[-1].utc_seconds < table1.spec.t_stop.utc_seconds

    def test_single_sample(self, table1):
        spec = replace(table1.spec, sample_count=1)
        assert sample_times(spec) == [spec.t_start]

    def test_hourly_sampling_mode(self, table1):
        spec = replace(table1.spec, sample_count=24)
        times = sample_times(spec)
        assert len(times) == 24
        assert times[1] - times[0] == pytest.approx(3600.0, abs=1e-6)


class TestDefaultTargets:
    def test_every_fourth_satellite(self):
        targets = default_targets()
        assert targets[0] == 1 and targets[-1] == 77
        assert len(targets) == 20
        assert all(b - a == 4 for a, b in zip(targets, targets[1:]))

    def test_all_on_layer_one(self, table1):
        c = table1.constellation
        assert all(c.layer_of(g)[0] == 1 for g in default_targets())

    def test_stride_override(self):
        assert len(default_targets(stride=1)) == 78


class TestMissionSpec:
    def test_rejects_inverted_clock(self, table1):
        with pytest.raises(ValueError):
            replace(table1.spec, t_stop=Epoch(table1.spec.t_start.utc_seconds - 1.0))

    def test_rejects_targets_off_layer_one(self, table1):
        spec = replace(table1.spec, targets=(100,), sample_count=1)
        with pytest.raises(ValueError, match="layer 1"):
            run_mission(table1.constellation, spec)


class TestRunMission:
    def test_result_cardinality(self, table1):
        spec = small_spec(table1)
        run = run_mission(table1.constellation, spec)
        assert len(run.results) == 2 * 2 * 2  # schemes * configs * targets
        for res in run.results:
            assert len(res.latency_s) == 5
        total_cells = sum(len(r.latency_s) for r in run.results)
        assert total_cells == 2 * 2 * 2 * 5

    def test_rerun_identical(self, table1):
        spec = small_spec(table1)
        a = run_mission(table1.constellation, spec)
        b = run_mission(table1.constellation, spec)
        for ra, rb in zip(a.results, b.results):
            assert ra.scheme == rb.scheme and ra.dsn == rb.dsn
            np.testing.assert_array_equal(ra.latency_s, rb.latency_s)
            np.testing.assert_array_equal(ra.hops, rb.hops)

    def test_shuffled_work_order_identical(self, table1):
        spec = small_spec(table1, samples=8)
        a = run_mission(table1.constellation, spec)
        b = run_mission(table1.constellation, spec, shuffle_seed=1234)
        for ra, rb in zip(a.results, b.results):
            np.testing.assert_array_equal(ra.latency_s, rb.latency_s)
            np.testing.assert_array_equal(ra.path_m, rb.path_m)

    def test_latency_differs_by_configuration_only_in_rates(self, table1):
        spec = small_spec(table1, schemes=("CLD-I",), configurations=("I", "II"))
        run = run_mission(table1.constellation, spec)
        by_cfg = {r.configuration: r for r in run.results if r.dsn == 1}
        # Geometry is shared: paths and hop counts identical across configs.
        np.testing.assert_array_equal(by_cfg["I"].path_m, by_cfg["II"].path_m)
        np.testing.assert_array_equal(by_cfg["I"].hops, by_cfg["II"].hops)
        reachable = by_cfg["I"].reachable.astype(bool)
        assert np.all(
            by_cfg["I"].latency_s[reachable] > by_cfg["II"].latency_s[reachable]
        )

    def test_recompute_route_matches_run(self, table1):
        spec = small_spec(table1, samples=3, schemes=("CLD-I",), configurations=("I",))
        run = run_mission(table1.constellation, spec)
        res = run.results[0]
        for k in range(3):
            if not res.reachable[k]:
                continue
            route = recompute_route(table1.constellation, spec, "CLD-I", res.dsn, k)
            assert route.n_h == res.hops[k]
            assert sum(h.length_m for h in route.hops) == pytest.approx(
                res.path_m[k], rel=1e-12
            )
