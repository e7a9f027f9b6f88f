"""Command-line front end: config-driven runs, system catalog, plot data.

Subcommands:
  run <config.json>      execute the configured analyses, write a JSON
                         report plus CSV side files into the output dir
  systems                print the machine-readable family catalog
  plotdata <report> <analysis>
                         extract plot-ready CSV from an existing report

Exit codes: 0 done, 2 config/usage error (message names the offending
field), 3 resource budget exceeded. The report is deterministic for a
fixed config and seed except for its timestamp field. The environment
variable SEMICASCADE_OUTPUT_DIR overrides the configured output
directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import ergodic, measures, systems, tame, topology, ulam
from .errors import InputError, ResourceBudgetError

CONFIG_SCHEMA = "semicascade-config-v1"
REPORT_SCHEMA = "semicascade-report-v1"
OUTPUT_DIR_ENV = "SEMICASCADE_OUTPUT_DIR"

ANALYSES = ("convergence", "unique_minimal_set", "proximality", "measures",
            "tameness", "covering", "kernel_projection", "limit_measures")

DEFAULTS = {
    "horizons": {"orbit_n": 4096, "schedule_lengths": [64, 128, 256, 512, 1024, 2048, 4096],
                 "proximality_horizon": 1024, "covering_horizon": 256},
    "tolerances": {"tol": 1e-2, "eps": 1e-3, "support_threshold": 1e-12},
    "banks": {"test_functions": 8, "grid_size": 256},
    "options": {"max_period": 2, "proximality_points": 100,
                "tameness_k_max": 6, "tameness_strategy": "fixed",
                "covering_eps": [0.5, 0.2, 0.1, 0.05, 0.02],
                "kernel_rounds": 64, "convergence_probe": 0.3,
                "limit_probe_count": 16},
    "seed": 0,
    "output_dir": ".",
}


class ConfigError(Exception):
    """Config rejected; message names the field."""


def _require(cond, field, message):
    if not cond:
        raise ConfigError("config field %s %s" % (field, message))


def _check_keys(obj, field, allowed):
    _require(isinstance(obj, dict), field, "must be an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError("config field %s.%s is not recognized (allowed: %s)"
                              % (field, key, ", ".join(sorted(allowed))))


def _positive_int(obj, field):
    _require(isinstance(obj, int) and not isinstance(obj, bool) and obj > 0,
             field, "must be a positive integer")
    return obj


def _positive_number(obj, field):
    _require(isinstance(obj, (int, float)) and not isinstance(obj, bool)
             and math.isfinite(obj) and obj > 0, field, "must be a positive number")
    return float(obj)


def _merged_section(config, name):
    merged = dict(DEFAULTS[name])
    merged.update(config.get(name, {}))
    return merged


def _build_system(section):
    _check_keys(section, "system", {"family", "params"})
    family = section.get("family")
    _require(isinstance(family, str), "system.family", "must be a string")
    params = section.get("params", {})
    _require(isinstance(params, dict), "system.params", "must be an object")
    try:
        if family == "circle_rotation":
            _check_keys(params, "system.params", {"alpha"})
            _require("alpha" in params, "system.params.alpha", "is required")
            return systems.circle_rotation(params["alpha"])
        if family == "doubling":
            _check_keys(params, "system.params", set())
            return systems.doubling_map()
        if family == "north_south":
            _check_keys(params, "system.params", {"kappa"})
            _require("kappa" in params, "system.params.kappa", "is required")
            return systems.north_south(params["kappa"])
        if family == "tent":
            _check_keys(params, "system.params", {"slope"})
            _require("slope" in params, "system.params.slope", "is required")
            return systems.tent_map(params["slope"])
        if family == "toral_automorphism":
            _check_keys(params, "system.params", {"m11", "m12", "m21", "m22"})
            for key in ("m11", "m12", "m21", "m22"):
                _require(key in params, "system.params.%s" % key, "is required")
                _require(isinstance(params[key], int) and not isinstance(params[key], bool),
                         "system.params.%s" % key, "must be an integer")
            return systems.toral_automorphism(params["m11"], params["m12"],
                                              params["m21"], params["m22"])
    except InputError as exc:
        raise ConfigError("config field system.params is invalid: %s" % exc)
    raise ConfigError("config field system.family has unknown value %r (see the "
                      "systems subcommand for the catalog)" % family)


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config file %s does not exist" % path)
    except json.JSONDecodeError as exc:
        raise ConfigError("config file %s is not valid JSON: %s" % (path, exc))
    return validate_config(raw)


def validate_config(raw):
    """Normalize a raw config dict; unknown keys anywhere are rejected."""
    _check_keys(raw, "(top level)", {"schema", "system", "partition", "analyses",
                                     "horizons", "tolerances", "banks", "options",
                                     "seed", "output_dir"})
    _require(raw.get("schema") == CONFIG_SCHEMA, "schema",
             "must equal %r" % CONFIG_SCHEMA)
    _require("system" in raw, "system", "is required")
    _require("partition" in raw, "partition", "is required")
    _require("analyses" in raw, "analyses", "is required")

    spec = _build_system(raw["system"])

    part_sec = raw["partition"]
    _check_keys(part_sec, "partition", {"cells_per_axis", "samples_per_cell"})
    m = _positive_int(part_sec.get("cells_per_axis", 0), "partition.cells_per_axis")
    s = _positive_int(part_sec.get("samples_per_cell", 3), "partition.samples_per_cell")

    analyses = raw["analyses"]
    _require(isinstance(analyses, list) and analyses, "analyses",
             "must be a nonempty list")
    for a in analyses:
        _require(a in ANALYSES, "analyses",
                 "contains unknown analysis %r (allowed: %s)" % (a, ", ".join(ANALYSES)))

    horizons = _merged_section(raw, "horizons")
    _check_keys(horizons, "horizons", set(DEFAULTS["horizons"]))
    _positive_int(horizons["orbit_n"], "horizons.orbit_n")
    _require(isinstance(horizons["schedule_lengths"], list) and
             len(horizons["schedule_lengths"]) >= 2,
             "horizons.schedule_lengths", "must be a list of at least two lengths")
    for i, n in enumerate(horizons["schedule_lengths"]):
        _positive_int(n, "horizons.schedule_lengths[%d]" % i)
    _positive_int(horizons["proximality_horizon"], "horizons.proximality_horizon")
    _positive_int(horizons["covering_horizon"], "horizons.covering_horizon")

    tolerances = _merged_section(raw, "tolerances")
    _check_keys(tolerances, "tolerances", set(DEFAULTS["tolerances"]))
    for key in ("tol", "eps"):
        _positive_number(tolerances[key], "tolerances.%s" % key)
    _require(isinstance(tolerances["support_threshold"], (int, float))
             and tolerances["support_threshold"] >= 0,
             "tolerances.support_threshold", "must be a nonnegative number")

    banks = _merged_section(raw, "banks")
    _check_keys(banks, "banks", set(DEFAULTS["banks"]))
    _positive_int(banks["test_functions"], "banks.test_functions")
    _positive_int(banks["grid_size"], "banks.grid_size")

    options = _merged_section(raw, "options")
    _check_keys(options, "options", set(DEFAULTS["options"]))
    _positive_int(options["max_period"], "options.max_period")
    _positive_int(options["proximality_points"], "options.proximality_points")
    _require(options["tameness_k_max"] >= 2 and isinstance(options["tameness_k_max"], int),
             "options.tameness_k_max", "must be an integer >= 2")
    _require(options["tameness_strategy"] in ("fixed", "adversarial"),
             "options.tameness_strategy", "must be fixed or adversarial")
    _require(isinstance(options["covering_eps"], list) and options["covering_eps"],
             "options.covering_eps", "must be a nonempty list")
    for i, e in enumerate(options["covering_eps"]):
        _positive_number(e, "options.covering_eps[%d]" % i)
    _positive_int(options["kernel_rounds"], "options.kernel_rounds")
    probe = options["convergence_probe"]
    probe_list = probe if isinstance(probe, list) else [probe]
    _require(len(probe_list) == spec.dimension, "options.convergence_probe",
             "must have one coordinate per dimension (%d)" % spec.dimension)
    for c in probe_list:
        _require(isinstance(c, (int, float)) and 0.0 <= c < 1.0,
                 "options.convergence_probe", "coordinates must lie in [0,1)")
    _positive_int(options["limit_probe_count"], "options.limit_probe_count")

    seed = raw.get("seed", DEFAULTS["seed"])
    _require(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
             "seed", "must be a nonnegative integer")
    output_dir = raw.get("output_dir", DEFAULTS["output_dir"])
    _require(isinstance(output_dir, str) and output_dir, "output_dir",
             "must be a nonempty string")

    return {
        "schema": CONFIG_SCHEMA,
        "system": raw["system"],
        "spec": spec,
        "partition": {"cells_per_axis": m, "samples_per_cell": s},
        "analyses": list(analyses),
        "horizons": horizons,
        "tolerances": tolerances,
        "banks": banks,
        "options": options,
        "seed": seed,
        "output_dir": output_dir,
    }


# ---------------------------------------------------------------------------
# analysis orchestration


def _context(m, horizon, tol):
    return {"resolution": m, "horizon": horizon, "tolerance": tol}


def _probe_grid(count, dimension):
    if dimension == 1:
        return systems.equispaced_points(count, 1)
    side = max(2, int(round(math.sqrt(count))))
    return systems.equispaced_points(side, 2)


def run_analyses(config):
    """Execute the configured analyses; returns (report dict, side tables)."""
    spec = config["spec"]
    m = config["partition"]["cells_per_axis"]
    s = config["partition"]["samples_per_cell"]
    horizons = config["horizons"]
    tolerances = config["tolerances"]
    banks = config["banks"]
    options = config["options"]
    wanted = config["analyses"]

    partition = ulam.build_partition(spec, m, s, seed=config["seed"])
    tm = ulam.build_transfer_matrix(partition, spec)
    graph = topology.graph_from_transfer(tm)
    bank = ulam.sample_test_bank(partition, banks["test_functions"])

    results = {}
    verdicts = []
    side_tables = {}

    if "convergence" in wanted:
        schedules = [ergodic.cesaro_schedule(n) for n in horizons["schedule_lengths"]]
        probe = options["convergence_probe"]
        coords = np.asarray(probe if isinstance(probe, list) else [probe])
        mu0 = np.zeros(tm.n_cells)
        mu0[int(partition.cell_of_points(coords[None, :])[0])] = 1.0
        report = ergodic.convergence_diagnostic(tm, schedules, mu0, bank,
                                                tol=tolerances["tol"])
        outputs = ergodic.apply_schedules_batch(tm, schedules, mu0)
        series = [[schedules[i + 1].max_power + 1,
                   ergodic.weakstar_distance(outputs[i], outputs[i + 1], bank)]
                  for i in range(len(outputs) - 1)]
        entry = report.as_jsonable()
        entry.pop("limit")  # vectors live in CSV side files, not the report
        entry["defect_vs_n"] = [[int(n), float(d)] for n, d in series]
        entry["context"] = _context(m, max(horizons["schedule_lengths"]),
                                    tolerances["tol"])
        results["convergence"] = entry
        verdicts.append("schedule convergence: %s (tol=%g)"
                        % (report.verdict, tolerances["tol"]))
        side_tables["convergence_defects.csv"] = [["n", "defect"]] + entry["defect_vs_n"]

    if "unique_minimal_set" in wanted:
        check = topology.unique_minimal_set_check(spec, partition,
                                                  max_period=options["max_period"],
                                                  graph=graph)
        entry = check.as_jsonable()
        entry["context"] = _context(m, None, None)
        results["unique_minimal_set"] = entry
        verdicts.append("unique minimal set per orbit closure: %s (backend %s)"
                        % (str(check.verdict).lower(), check.backend_used))
        if "convergence" in results:
            consistent = (check.verdict and
                          results["convergence"]["verdict"] == "converged") or \
                         (not check.verdict)
            verdicts.append("uniqueness %s alongside convergence %s -- %s"
                            % (str(check.verdict).lower(),
                               results["convergence"]["verdict"],
                               "consistent" if consistent else "tension"))

    if "proximality" in wanted:
        pts = _probe_grid(options["proximality_points"], spec.dimension)
        pg = topology.proximality_graph(spec, pts, horizons["proximality_horizon"],
                                        tolerances["eps"])
        trep = topology.transitivity_defect(pg)
        entry = trep.as_jsonable()
        entry["n_points"] = int(pts.shape[0])
        entry["context"] = _context(m, horizons["proximality_horizon"],
                                    tolerances["eps"])
        results["proximality"] = entry
        verdicts.append("proximality transitivity defect: %g%s"
                        % (trep.defect, " (vacuous)" if trep.vacuous else ""))

    if "measures" in wanted:
        mset = measures.stationary_measures(tm, graph)
        minimality = measures.support_minimality_check(
            mset, threshold=tolerances["support_threshold"])
        center = measures.attraction_center_vs_minimal_union(
            mset, threshold=tolerances["support_threshold"])
        entry = mset.as_jsonable()
        entry["support_minimality"] = [bool(v) for v in minimality]
        entry["attraction_center"] = center.as_jsonable()
        entry["context"] = _context(m, None, tolerances["support_threshold"])
        results["measures"] = entry
        verdicts.append("stationary supports minimal: %s; support union equals "
                        "terminal-class union: %s"
                        % (str(all(minimality)).lower(), str(center.equal).lower()))
        for i, mu in enumerate(mset.measures):
            side_tables["measure_%d.csv" % i] = \
                [["cell", "weight"]] + [[int(c), "%.17g" % w]
                                        for c, w in enumerate(mu)]

    if "tameness" in wanted:
        fn_entry = ulam.trig_bank(2, spec.dimension)[1]  # first nonconstant
        grid = _probe_grid(banks["grid_size"], spec.dimension)
        trep = tame.tameness_profile(spec, fn_entry, options["tameness_k_max"],
                                     grid, strategy=options["tameness_strategy"])
        entry = trep.as_jsonable()
        entry["context"] = _context(m, options["tameness_k_max"], None)
        results["tameness"] = entry
        last_k = max(trep.defect_per_k)
        verdicts.append("cancellation defect at K=%d: %.3g (%s strategy)"
                        % (last_k, trep.defect_per_k[last_k], trep.strategy))
        side_tables["tameness.csv"] = [["K", "defect"]] + \
            [[k, "%.17g" % trep.defect_per_k[k]] for k in sorted(trep.defect_per_k)]

    if "covering" in wanted:
        profile = tame.covering_profile(spec, horizons["covering_horizon"],
                                        options["covering_eps"])
        entry = profile.as_jsonable()
        entry["context"] = _context(m, horizons["covering_horizon"], None)
        results["covering"] = entry
        verdicts.append("covering counts at horizon %d: %s"
                        % (profile.horizon, list(profile.counts)))
        side_tables["covering.csv"] = [["horizon", "epsilon", "count"]] + \
            [[profile.horizon, "%.17g" % e, c]
             for e, c in zip(profile.eps_list, profile.counts)]

    if "kernel_projection" in wanted:
        est = ergodic.kernel_projection_estimate(tm, options["kernel_rounds"])
        results["kernel_projection"] = {
            "residual_vq": est.residual_vq,
            "residual_idem": est.residual_idem,
            "rounds": est.rounds,
            "represented_length": str(est.represented_length),
            "stop_reason": est.stop_reason,
            "context": _context(m, options["kernel_rounds"], None),
        }
        verdicts.append("projection residuals: vq=%.3g idem=%.3g after %d rounds"
                        % (est.residual_vq, est.residual_idem, est.rounds))

    if "limit_measures" in wanted:
        minimal_report = topology.minimal_invariant_sets(graph)
        probes = _probe_grid(options["limit_probe_count"], spec.dimension)
        rows = []
        for pt in probes:
            res = ergodic.limit_measure_per_point(tm, partition, spec, pt,
                                                  horizons["orbit_n"],
                                                  minimal_report=minimal_report)
            rows.append({"probe": [float(c) for c in pt],
                         "ergodic": res.ergodic,
                         "dominant_class": res.dominant_class,
                         "mass_in_class": res.mass_in_class,
                         "route": res.route})
        results["limit_measures"] = {
            "probes": rows,
            "context": _context(m, horizons["orbit_n"], None),
        }
        flags = [r["ergodic"] for r in rows]
        verdicts.append("single-class limit measures: %d of %d probes"
                        % (sum(flags), len(flags)))

    report = {
        "schema": REPORT_SCHEMA,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": {k: config[k] for k in ("schema", "system", "partition",
                                          "analyses", "horizons", "tolerances",
                                          "banks", "options", "seed",
                                          "output_dir")},
        "system_description": spec.describe(),
        "results": results,
        "verdict_lines": verdicts,
    }
    return report, side_tables


def _resolve_output_dir(config):
    return os.environ.get(OUTPUT_DIR_ENV) or config["output_dir"]


def _write_csv_rows(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def cmd_run(args):
    config = load_config(args.config)
    report, side_tables = run_analyses(config)
    out_dir = _resolve_output_dir(config)
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, rows in side_tables.items():
        _write_csv_rows(os.path.join(out_dir, name), rows)
    for line in report["verdict_lines"]:
        print(line)
    print("report written to %s" % report_path)
    return 0


def cmd_systems(_args):
    print(json.dumps(systems.systems_catalog(), indent=2, sort_keys=True))
    return 0


def cmd_plotdata(args):
    try:
        with open(args.report) as fh:
            report = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("report file %s does not exist" % args.report)
    except json.JSONDecodeError as exc:
        raise ConfigError("report file %s is not valid JSON: %s" % (args.report, exc))
    results = report.get("results", {})
    if args.analysis not in results:
        raise ConfigError("analysis %r is not present in the report (has: %s)"
                          % (args.analysis, ", ".join(sorted(results)) or "none"))
    entry = results[args.analysis]
    out_dir = os.environ.get(OUTPUT_DIR_ENV) or args.output_dir
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "plot_%s.csv" % args.analysis)
    if args.analysis == "convergence":
        rows = [["n", "defect"]] + entry["defect_vs_n"]
    elif args.analysis == "tameness":
        rows = [["K", "defect"]] + [[int(k), "%.17g" % v]
                                    for k, v in sorted(entry["defect_per_k"].items(),
                                                       key=lambda kv: int(kv[0]))]
    elif args.analysis == "covering":
        rows = [["horizon", "epsilon", "count"]] + \
            [[entry["horizon"], "%.17g" % e, c]
             for e, c in zip(entry["eps_list"], entry["counts"])]
    elif args.analysis == "measures":
        rows = [["measure", "class_id", "index"]] + \
            [[i, cid, i] for i, cid in enumerate(entry["class_ids"])]
    elif args.analysis == "limit_measures":
        rows = [["probe", "ergodic", "mass_in_class"]] + \
            [["%r" % r["probe"], int(r["ergodic"]), "%.17g" % r["mass_in_class"]]
             for r in entry["probes"]]
    elif args.analysis == "proximality":
        rows = [["defect", "n_two_step_triples", "n_violations"],
                [entry["defect"], entry["n_two_step_triples"], entry["n_violations"]]]
    elif args.analysis == "unique_minimal_set":
        rows = [["verdict", "graph_verdict", "backend"],
                [entry["verdict"], entry["graph_verdict"], entry["backend_used"]]]
    else:  # kernel_projection
        rows = [["residual_vq", "residual_idem", "rounds"],
                [entry["residual_vq"], entry["residual_idem"], entry["rounds"]]]
    _write_csv_rows(path, rows)
    print("plot data written to %s" % path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="semicascade",
        description="Discretized analyses of iterated interval and torus maps.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the analyses described by a JSON config")
    p_run.add_argument("config", help="path to a %s file" % CONFIG_SCHEMA)
    p_run.set_defaults(func=cmd_run)
    p_sys = sub.add_parser("systems", help="print the bundled system catalog")
    p_sys.set_defaults(func=cmd_systems)
    p_plot = sub.add_parser("plotdata", help="extract plot CSV from a report")
    p_plot.add_argument("report", help="path to a report.json from a run")
    p_plot.add_argument("analysis", help="analysis id, e.g. convergence")
    p_plot.add_argument("--output-dir", default=".", dest="output_dir")
    p_plot.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except InputError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except ResourceBudgetError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
