"""Command-line front-end: scenario files in, CSV/JSON artifacts out.

Subcommands:

* ``run`` - execute a mission and write ``per_target_latency.csv``,
  ``per_sample.csv`` and ``summary.json`` into the output directory.
* ``validate`` - parse and semantically check a scenario file.
* ``access-report`` - emit per-sample, per-layer SC visibility counts.

Exit codes: 0 success, 1 usage error, 2 scenario error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .access import FEASIBILITY_RULES
from .constellation import (
    BuiltLayer,
    Constellation,
    LayerSpec,
    assign_global_ids,
    build_tle_layer,
    build_walker,
)
from .metrics import CONFIG_ORDER, LINK_CONFIGS, LinkConfig
from .orbit import Epoch, parse_tle
from .routing import SCHEME_ORDER, RoutingPolicy
from .scenario import MissionRun, MissionSpec, default_targets, run_mission, sample_times

DEFAULT_SCENARIO = Path(__file__).parent / "data" / "table1.toml"


class ScenarioError(ValueError):
    """A scenario file failed parsing or semantic validation."""


@dataclass(frozen=True)
class Scenario:
    """A fully validated scenario: constellation, mission, link configs, output dir."""

    constellation: Constellation
    spec: MissionSpec
    link_configs: dict[str, LinkConfig]
    output_dir: str


def _require_keys(table: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ScenarioError(f"{path}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")


def _need(table: dict, key: str, path: str):
    if key not in table:
        raise ScenarioError(f"{path}: missing mandatory key {key!r}")
    return table[key]


def _parse_layer(table: dict, position: int, base_dir: Path, epoch: Epoch) -> BuiltLayer:
    path = f"layers[{position}]"
    _require_keys(
        table,
        {
            "index", "kind", "planes", "sats_per_plane", "altitude_km",
            "inclination_deg", "raan_spread_deg", "phasing_deg",
            "min_elevation_deg", "tle",
        },
        path,
    )
    kind = _need(table, "kind", path)
    altitude_km = table.get("altitude_km")
    try:
        spec = LayerSpec(
            index=_need(table, "index", path),
            kind=kind,
            planes=table.get("planes", 0),
            sats_per_plane=table.get("sats_per_plane", 0),
            altitude_m=None if altitude_km is None else float(altitude_km) * 1000.0,
            inclination_deg=table.get("inclination_deg", 0.0),
            raan_spread_deg=table.get("raan_spread_deg", 360.0),
            phasing_deg=table.get("phasing_deg", 0.0),
            min_elevation_deg=table.get("min_elevation_deg", 10.0),
            tle_path=table.get("tle"),
        )
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc

    if spec.kind == "walker":
        return build_walker(spec, epoch)
    if spec.tle_path is None:
        raise ScenarioError(f"{path}: TLE layer needs a 'tle' file reference")
    tle_file = base_dir / spec.tle_path
    if not tle_file.exists():
        raise ScenarioError(f"{path}: TLE file {tle_file} does not exist")
    try:
        return build_tle_layer(spec, parse_tle(tle_file.read_text()))
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _parse_link_overrides(table: dict) -> dict[str, LinkConfig]:
    overrides: dict[str, LinkConfig] = {}
    for name, fields in table.items():
        base = LINK_CONFIGS.get(name)
        path = f"links.{name}"
        if base is None:
            raise ScenarioError(f"{path}: unknown configuration name")
        allowed = {
            "ground_space_rate_bps", "isl_rate_bps", "frame_size_bytes",
            "processing_delay_s", "queuing_delay_s",
        }
        _require_keys(fields, allowed, path)
        try:
            overrides[name] = replace(base, **fields)
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
    return overrides


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a TOML scenario file.

    Unknown keys are rejected everywhere (strict mode); semantic failures
    name the offending field.  TLE file references resolve relative to the
    scenario file's directory.
    """
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ScenarioError(f"scenario file {path} does not exist") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: TOML parse error: {exc}") from exc

    _require_keys(raw, {"model", "sc", "mission", "layers", "links", "output"}, str(path))

    model = raw.get("model", {})
    _require_keys(
        model,
        {"cross_layer_rule", "baseline_cross_layer_rule", "satellite_min_elevation_deg"},
        "model",
    )
    rule = model.get("cross_layer_rule", "nadir_cone")
    baseline_rule = model.get("baseline_cross_layer_rule", "lower_horizon")
    for key, value in (("cross_layer_rule", rule), ("baseline_cross_layer_rule", baseline_rule)):
        if value not in FEASIBILITY_RULES:
            raise ScenarioError(f"model.{key}: {value!r} not in {FEASIBILITY_RULES}")

    sc = _need(raw, "sc", str(path))
    _require_keys(
        sc,
        {"lat_deg", "lng_deg", "alt_m", "min_elevation_deg", "relay_min_elevation_deg"},
        "sc",
    )
    mission = _need(raw, "mission", str(path))
    _require_keys(
        mission,
        {"t_start", "t_stop", "samples", "targets", "schemes", "configurations"},
        "mission",
    )

    try:
        t_start = Epoch.from_utc(_need(mission, "t_start", "mission"))
        t_stop = Epoch.from_utc(_need(mission, "t_stop", "mission"))
    except ValueError as exc:
        raise ScenarioError(f"mission: bad timestamp: {exc}") from exc

    layer_tables = _need(raw, "layers", str(path))
    if not isinstance(layer_tables, list) or not layer_tables:
        raise ScenarioError("layers: expected a non-empty array of layer tables")
    built = [
        _parse_layer(t, i, path.parent, t_start) for i, t in enumerate(layer_tables)
    ]
    try:
        constellation = assign_global_ids(built)
    except ValueError as exc:
        raise ScenarioError(f"layers: {exc}") from exc

    policy = RoutingPolicy(
        sc_min_elev_deg=float(_need(sc, "min_elevation_deg", "sc")),
        relay_min_elev_deg=float(sc.get("relay_min_elevation_deg", 10.0)),
        isl_min_elev_deg=float(model.get("satellite_min_elevation_deg", 10.0)),
        feasibility_rule=rule,
        baseline_rule=baseline_rule,
    )

    targets = mission.get("targets") or list(default_targets(constellation.layer_size(1)))
    schemes = tuple(mission.get("schemes") or SCHEME_ORDER)
    configurations = tuple(mission.get("configurations") or CONFIG_ORDER)
    try:
        spec = MissionSpec(
            t_start=t_start,
            t_stop=t_stop,
            sample_count=int(_need(mission, "samples", "mission")),
            sc_lat_deg=float(_need(sc, "lat_deg", "sc")),
            sc_lng_deg=float(_need(sc, "lng_deg", "sc")),
            sc_alt_m=float(sc.get("alt_m", 0.0)),
            schemes=schemes,
            configurations=configurations,
            targets=tuple(int(t) for t in targets),
            policy=policy,
        )
    except ValueError as exc:
        raise ScenarioError(f"mission: {exc}") from exc

    for scheme in spec.schemes:
        if scheme not in SCHEME_ORDER:
            raise ScenarioError(f"mission.schemes: unknown scheme {scheme!r}")
    link_overrides = _parse_link_overrides(raw.get("links", {}))
    for config in spec.configurations:
        if config not in LINK_CONFIGS and config not in link_overrides:
            raise ScenarioError(f"mission.configurations: unknown configuration {config!r}")
    for target in spec.targets:
        try:
            layer, _ = constellation.layer_of(target)
        except ValueError as exc:
            raise ScenarioError(f"mission.targets: {exc}") from exc
        if layer != 1:
            raise ScenarioError(
                f"mission.targets: target {target} not on layer 1 (found layer {layer})"
            )

    output = raw.get("output", {})
    _require_keys(output, {"dir"}, "output")
    return Scenario(
        constellation=constellation,
        spec=spec,
        link_configs=link_overrides,
        output_dir=output.get("dir", "results"),
    )


# --- emission ----------------------------------------------------------------

def _fmt(value: float) -> str:
    return "%.9g" % value


def _json_safe(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return float(_fmt(value))
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _scheme_key(name: str) -> str:
    return name.lower().replace("-", "_")


def emit_results(run: MissionRun, out_dir: str | Path) -> list[Path]:
    """Write the mission artifacts; returns the written paths.

    ``per_target_latency.csv`` holds one row per (scheme, configuration,
    target); ``per_sample.csv`` one row per sample cell; ``summary.json``
    the overall means, pairwise latency ratios, and the effective mission
    parameters.  Output is byte-stable across reruns.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    times = [t.iso8601() for t in run.times]

    per_target = out / "per_target_latency.csv"
    with per_target.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["scheme", "configuration", "dsn_id", "mean_latency_s",
             "mean_path_m", "mean_hops", "resilience"]
        )
        for res in run.results:
            writer.writerow(
                [res.scheme, res.configuration, res.dsn, _fmt(res.mean_latency_s),
                 _fmt(res.mean_path_m), _fmt(res.mean_hops), _fmt(res.resilience)]
            )

    per_sample = out / "per_sample.csv"
    with per_sample.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["scheme", "configuration", "dsn_id", "t_iso8601", "reachable",
             "hops", "path_m", "latency_s"]
        )
        for res in run.results:
            for k in range(len(times)):
                writer.writerow(
                    [res.scheme, res.configuration, res.dsn, times[k],
                     int(res.reachable[k]), int(res.hops[k]),
                     _fmt(float(res.path_m[k])), _fmt(float(res.latency_s[k]))]
                )

    summary = out / "summary.json"
    overall: dict[str, dict[str, dict]] = {}
    for stats in run.overall:
        overall.setdefault(stats.scheme, {})[stats.configuration] = {
            "mean_latency_s": stats.mean_latency_s,
            "mean_path_m": stats.mean_path_m,
            "mean_hops": stats.mean_hops,
            "mean_resilience": stats.mean_resilience,
            "min_latency_s": stats.min_latency_s,
            "targets": stats.targets,
        }

    ratios: dict[str, dict] = {}
    for config in run.spec.configurations:
        of_config = {
            s: overall[s][config]["mean_latency_s"]
            for s in overall
            if config in overall[s]
        }
        pairwise = {}
        for a in sorted(of_config):
            for b in sorted(of_config):
                if a == b or not of_config[b]:
                    continue
                if of_config[a] is None or of_config[b] is None:
                    continue
                pairwise[f"{_scheme_key(a)}_over_{_scheme_key(b)}"] = (
                    of_config[a] / of_config[b]
                )
        entry: dict = {"pairwise": pairwise}
        geo_over_cld_i = pairwise.get("noncld_geo_over_cld_i")
        if geo_over_cld_i is not None:
            entry["ratio_noncld_geo_over_cld_i"] = geo_over_cld_i
        ratios[config] = entry

    payload = {
        "effective_spec": {
            "t_start": run.spec.t_start.iso8601(),
            "t_stop": run.spec.t_stop.iso8601(),
            "samples": run.spec.sample_count,
            "sc": {
                "lat_deg": run.spec.sc_lat_deg,
                "lng_deg": run.spec.sc_lng_deg,
                "alt_m": run.spec.sc_alt_m,
                "min_elevation_deg": run.spec.policy.sc_min_elev_deg,
                "relay_min_elevation_deg": run.spec.policy.relay_min_elev_deg,
            },
            "model": {
                "cross_layer_rule": run.spec.policy.feasibility_rule,
                "baseline_cross_layer_rule": run.spec.policy.baseline_rule,
                "satellite_min_elevation_deg": run.spec.policy.isl_min_elev_deg,
            },
            "schemes": list(run.spec.schemes),
            "configurations": list(run.spec.configurations),
            "targets": list(run.spec.targets),
        },
        "overall": overall,
        "ratios": ratios,
        "fallback_routes": run.fallback_routes,
    }
    summary.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")
    return [per_target, per_sample, summary]


def emit_access_report(scenario: Scenario, out_dir: str | Path) -> Path:
    """Write per-sample, per-layer counts of SC-visible satellites."""
    from .access import elevations_from, snapshot

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    c = scenario.constellation
    spec = scenario.spec
    sc = spec.sc_position()
    report = out / "access_report.csv"
    with report.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_iso8601", "layer", "accessible_count", "min_elevation_deg"])
        for t in sample_times(spec):
            state = snapshot(c, t, sc)
            for u in range(1, c.n_layers + 1):
                sl = c.layer_slice(u)
                threshold = spec.policy.sc_threshold(u, 1)
                count = int(
                    np.sum(elevations_from(state.sc_position, state.positions[sl]) >= threshold)
                )
                writer.writerow([t.iso8601(), u, count, _fmt(threshold)])
    return report


# --- argument handling --------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cldsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a mission and write artifacts")
    run_p.add_argument("--scenario", default=str(DEFAULT_SCENARIO), help="scenario TOML file")
    run_p.add_argument("--out", default=None, help="output directory (default: scenario's)")
    run_p.add_argument("--schemes", default=None, help="comma-separated scheme subset")
    run_p.add_argument("--configs", default=None, help="comma-separated configuration subset")
    run_p.add_argument("--targets", default=None, help="comma-separated target ids")
    run_p.add_argument("--samples", type=int, default=None, help="sample count override")

    val_p = sub.add_parser("validate", help="parse and check a scenario file")
    val_p.add_argument("--scenario", default=str(DEFAULT_SCENARIO))

    acc_p = sub.add_parser("access-report", help="emit per-layer SC visibility counts")
    acc_p.add_argument("--scenario", default=str(DEFAULT_SCENARIO))
    acc_p.add_argument("--out", default=None)
    return parser


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    spec = scenario.spec
    updates: dict = {}
    if args.schemes:
        updates["schemes"] = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
        for s in updates["schemes"]:
            if s not in SCHEME_ORDER:
                raise ScenarioError(f"--schemes: unknown scheme {s!r}")
    if args.configs:
        updates["configurations"] = tuple(
            s.strip() for s in args.configs.split(",") if s.strip()
        )
        for s in updates["configurations"]:
            if s not in LINK_CONFIGS and s not in scenario.link_configs:
                raise ScenarioError(f"--configs: unknown configuration {s!r}")
    if args.targets:
        try:
            updates["targets"] = tuple(int(x) for x in args.targets.split(",") if x.strip())
        except ValueError as exc:
            raise ScenarioError(f"--targets: {exc}") from exc
        for target in updates["targets"]:
            layer, _ = scenario.constellation.layer_of(target)
            if layer != 1:
                raise ScenarioError(f"--targets: target {target} not on layer 1")
    if args.samples is not None:
        if args.samples < 1:
            raise ScenarioError("--samples must be >= 1")
        spec = replace(spec, sample_count=args.samples)
    if updates:
        spec = replace(spec, **updates)
    return Scenario(
        constellation=scenario.constellation,
        spec=spec,
        link_configs=scenario.link_configs,
        output_dir=args.out or scenario.output_dir,
    )


def cli_main(argv: Optional[list[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1

    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "validate":
            print(
                f"{args.scenario}: ok "
                f"({scenario.constellation.total} satellites, "
                f"{scenario.constellation.n_layers} layers, "
                f"{len(scenario.spec.targets)} targets)"
            )
            return 0
        if args.command == "access-report":
            report = emit_access_report(scenario, args.out or scenario.output_dir)
            print(f"wrote {report}")
            return 0
        scenario = _apply_overrides(scenario, args)
        run = run_mission(
            scenario.constellation, scenario.spec, link_configs=scenario.link_configs
        )
        for path in emit_results(run, scenario.output_dir):
            print(f"wrote {path}")
        return 0
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:  # console-script shim
    raise SystemExit(cli_main())
