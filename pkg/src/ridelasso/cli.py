"""Command-line entry point.

Every subcommand reads its settings from built-in defaults, then an
optional ``--config`` file of ``key=value`` lines, then command-line flags,
later sources overriding earlier ones. Each run writes its CSV artifacts
and a ``manifest.json`` holding the resolved configuration and the SHA-256
of every artifact.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .graph import build_knn_graph, distance_matrix, spatial_components
from .lasso_admm import AdmmConfig, lambda_max, lambda_sweep
from .network_lasso import (
    DEFAULT_EPS,
    DEFAULT_MU,
    NETWORK_CONFIG,
    NetworkProblem,
    forcing_level,
    load_solution,
    predict_fares,
    regularization_path,
)
from .trip_data import (
    STAT_KINDS,
    FeatureStats,
    NodeProblem,
    SchemaError,
    Table,
    emit_stats,
    featurize,
    generate_synthetic_lasso,
    hourly_counts,
    load_trips,
    read_schema_map,
    split_train_test,
)

log = logging.getLogger("ridelasso")

FIXTURE = "green_tripdata_2015-01_sample.csv"
DEFAULT_NETWORK_GRID = (0.0,) + tuple(float(v) for v in np.geomspace(1e-3, 1e3, 9))


class ConfigError(ValueError):
    def __init__(self, name, message):
        super().__init__(f"invalid value for '{name}': {message}")
        self.name = name


class NoRecordsError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# field parsing

def _int(lo=None):
    def conv(s):
        try:
            v = int(str(s).strip())
        except ValueError:
            raise ValueError(f"expected an integer, got {s!r}") from None
        if lo is not None and v < lo:
            raise ValueError(f"must be at least {lo}, got {v}")
        return v
    return conv


def _float(lo=None, hi=None, strict_lo=False, strict_hi=False):
    def conv(s):
        try:
            v = float(str(s).strip())
        except ValueError:
            raise ValueError(f"expected a number, got {s!r}") from None
        if not np.isfinite(v):
            raise ValueError(f"must be finite, got {s!r}")
        if lo is not None and (v <= lo if strict_lo else v < lo):
            raise ValueError(f"must be {'>' if strict_lo else '>='} {lo}, got {v}")
        if hi is not None and (v >= hi if strict_hi else v > hi):
            raise ValueError(f"must be {'<' if strict_hi else '<='} {hi}, got {v}")
        return v
    return conv


def _float_list(s):
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    parts = [p.strip() for p in str(s).split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    out = []
    for p in parts:
        try:
            v = float(p)
        except ValueError:
            raise ValueError(f"{p!r} is not a number") from None
        if not np.isfinite(v) or v < 0:
            raise ValueError(f"penalties must be finite and non-negative, got {p}")
        out.append(v)
    return out


def _choice(*options):
    def conv(s):
        s = str(s).strip()
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s
    return conv


def _path(s):
    s = str(s).strip()
    if not s:
        raise ValueError("empty path")
    return s


# name -> (converter, help)
FIELDS = {
    "trips": (_path, "trip CSV (defaults to the bundled sample)"),
    "schema": (_path, "key=value file mapping canonical names to CSV headers"),
    "out": (_path, "output directory"),
    "seed": (_int(0), "random seed"),
    "n": (_int(1), "rows of the synthetic design"),
    "d": (_int(1), "columns of the synthetic design"),
    "density": (_float(0, 1, strict_lo=True), "nonzero density of the design and the truth"),
    "noise": (_float(0), "noise standard deviation"),
    "k": (_int(1), "neighbors per node in the similarity graph"),
    "weight_scale": (_float(0, strict_lo=True), "edge weight length scale in km"),
    "cut_km": (_float(0), "edge length cut for the spatial component export"),
    "lambdas": (_float_list, "comma-separated penalty grid"),
    "lambda_scale": (_choice("relative", "absolute"),
                     "relative: multiply the grid by lambda_max (synth-lasso) "
                     "or the forcing level (pipeline)"),
    "rho": (_float(0, strict_lo=True), "ADMM penalty parameter"),
    "alpha": (_float(1, 2), "over-relaxation in [1, 2] (Lasso only)"),
    "max_iters": (_int(1), "ADMM iteration cap"),
    "eps_abs": (_float(0, strict_lo=True), "absolute stopping tolerance"),
    "eps_rel": (_float(0), "relative stopping tolerance"),
    "mu": (_float(0), "per-node ridge weight"),
    "eps": (_float(0, strict_lo=True), "consensus and cluster tolerance"),
    "train": (_int(1), "training nodes (default: 3/4 of the records)"),
    "test": (_int(1), "test nodes (default: the remaining records)"),
    "k_assign": (_int(1), "training neighbors voting on a test node's cluster"),
    "model": (_path, "pipeline output directory holding the saved solution"),
}

_NET = NETWORK_CONFIG
_DEFAULTS = {
    "synth-lasso": {
        "out": None, "seed": None, "n": 150, "d": 500, "density": 0.02,
        "noise": float(np.sqrt(1e-3)), "lambdas": [1e-4, 1e-3, 1e-2],
        "lambda_scale": "relative", "rho": 1.2, "alpha": 1.8, "max_iters": 1000,
        "eps_abs": 1e-4, "eps_rel": 1e-3,
    },
    "pipeline": {
        "trips": None, "schema": None, "out": None, "seed": None, "k": 5,
        "weight_scale": 2.0, "cut_km": 2.0, "lambdas": list(DEFAULT_NETWORK_GRID),
        "lambda_scale": "relative", "rho": _NET.rho, "max_iters": _NET.max_iters,
        "eps_abs": _NET.eps_abs, "eps_rel": _NET.eps_rel, "mu": DEFAULT_MU,
        "eps": DEFAULT_EPS, "train": None, "test": None, "k_assign": 5,
    },
    "stats": {"trips": None, "schema": None, "out": None},
    "graph": {
        "trips": None, "schema": None, "out": None, "k": 5, "weight_scale": 2.0,
        "cut_km": 2.0,
    },
    "predict": {
        "trips": None, "schema": None, "out": None, "model": None, "k_assign": 5,
    },
}
_REQUIRED = {
    "synth-lasso": ("out", "seed"),
    "pipeline": ("out", "seed"),
    "stats": ("out",),
    "graph": ("out",),
    "predict": ("out", "model", "trips"),
}


def read_config_file(path):
    """``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve_config(command, file_values, flag_values):
    """Merge defaults, file values and flags, converting and validating each field."""
    defaults = _DEFAULTS[command]
    conf = dict(defaults)
    raw_values = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    for name, raw in raw_values.items():
        if name not in defaults:
            raise ConfigError(name, f"not a setting of '{command}'")
        try:
            conf[name] = FIELDS[name][0](raw)
        except ValueError as exc:
            raise ConfigError(name, str(exc)) from None
    for name in _REQUIRED[command]:
        if conf.get(name) is None:
            raise ConfigError(name, "required but not given")
    if "lambdas" in conf and command == "pipeline":
        lams = conf["lambdas"]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ConfigError("lambdas", "the network path grid must be strictly increasing")
    return conf


# --------------------------------------------------------------------------
# artifacts

class Artifacts:
    """Collects written files for the manifest."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.names = []

    def table(self, name, table):
        table.write_csv(self.dir / name)
        self.names.append(name)

    def json(self, name, obj):
        with open(self.dir / name, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.names.append(name)

    def manifest(self, command, conf):
        checksums = {}
        for name in sorted(self.names):
            checksums[name] = hashlib.sha256((self.dir / name).read_bytes()).hexdigest()
        doc = {
            "command": command,
            # the output directory is where this file lives; echoing it would
            # make otherwise identical runs differ
            "config": {k: v for k, v in conf.items() if k != "out"},
            "seed": conf.get("seed"),
            "backend": kernels.BACKEND,
            "version": __version__,
            "artifacts": checksums,
        }
        with open(self.dir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return doc


def bundled_fixture():
    """Path of the sample trip file shipped with the package."""
    return resources.files("ridelasso") / "data" / FIXTURE


def _load(conf):
    path = conf["trips"] or bundled_fixture()
    schema = read_schema_map(conf["schema"]) if conf.get("schema") else None
    records, report = load_trips(path, schema)
    for reason, count in sorted(report.dropped.items()):
        log.info("dropped %d rows: %s", count, reason)
    if not records:
        raise NoRecordsError(f"no valid records in {path} ({report.rows_read} rows read)")
    log.info("loaded %d of %d rows from %s", len(records), report.rows_read, path)
    return records


def _stats_tables(records, art, prefix=""):
    for kind in STAT_KINDS:
        art.table(f"{prefix}{kind}.csv", emit_stats(records, kind))


def _nodes_table(nodes):
    p = len(nodes[0].features)
    rows = [[n.node_id, n.pickup_lat, n.pickup_lon, n.response] + [float(v) for v in n.features]
            for n in nodes]
    return Table(["node_id", "pickup_lat", "pickup_lon", "response"]
                 + [f"f_{t}" for t in range(p)], rows)


def _stats_to_json(stats):
    return {
        "columns": list(stats.columns),
        "means": [float(v) for v in stats.means],
        "stds": [float(v) for v in stats.stds],
        "pay_types": list(stats.pay_types),
        "trip_types": list(stats.trip_types),
        "excluded": list(stats.excluded),
    }


def _stats_from_json(doc):
    return FeatureStats(
        doc["columns"], np.array(doc["means"], dtype=float), np.array(doc["stds"], dtype=float),
        doc["pay_types"], doc["trip_types"], doc["excluded"],
    )


def _write_graph(graph, nodes, conf, art):
    art.table("graph_edges.csv", graph.edge_table())
    art.table("components.csv", spatial_components(graph, nodes, conf["cut_km"]))
    art.table("distance_matrix.csv", distance_matrix(nodes))


# --------------------------------------------------------------------------
# commands

def cmd_synth_lasso(conf):
    problem, x_true = generate_synthetic_lasso(
        conf["n"], conf["d"], conf["density"], conf["noise"], conf["seed"]
    )
    config = AdmmConfig(conf["rho"], conf["alpha"], conf["max_iters"],
                        conf["eps_abs"], conf["eps_rel"])
    scale = lambda_max(problem.A, problem.b) if conf["lambda_scale"] == "relative" else 1.0
    lams = [v * scale for v in conf["lambdas"]]
    sols = lambda_sweep(problem, lams, config)

    art = Artifacts(conf["out"])
    summary = []
    for i, (rel, sol) in enumerate(zip(conf["lambdas"], sols)):
        hist = [[t + 1, o, r, s] for t, (o, r, s) in enumerate(
            zip(sol.objective_history, sol.primal_residuals, sol.dual_residuals))]
        art.table(f"objective_history_{i}.csv",
                  Table(["iteration", "objective", "primal_residual", "dual_residual"], hist))
        summary.append([i, rel, sol.lam, sol.nonzero_count, sol.iterations,
                        int(sol.converged), sol.objective])
        log.info("lambda %.4g: %d nonzeros after %d iterations%s", sol.lam,
                 sol.nonzero_count, sol.iterations, "" if sol.converged else " (not converged)")
    art.table("nonzero_counts.csv", Table(
        ["index", "lambda_setting", "lambda", "nonzero_count", "iterations", "converged",
         "objective"], summary))
    art.table("ground_truth.csv", Table(
        ["index", "value"], [[j, float(v)] for j, v in enumerate(x_true) if v != 0]))
    return art


def cmd_stats(conf):
    records = _load(conf)
    art = Artifacts(conf["out"])
    _stats_tables(records, art)
    return art


def cmd_graph(conf):
    records = _load(conf)
    nodes, _ = featurize(records)
    graph = build_knn_graph(nodes, conf["k"], conf["weight_scale"])
    log.info("graph: %d nodes, %d edges", graph.node_count, graph.edge_count)
    art = Artifacts(conf["out"])
    _write_graph(graph, nodes, conf, art)
    return art


def cmd_pipeline(conf):
    records = _load(conf)
    problems, stats = featurize(records)
    n = len(problems)
    train = conf["train"] if conf["train"] is not None else (3 * n) // 4
    test = conf["test"] if conf["test"] is not None else n - train
    if train + test > n:
        raise ConfigError("train", f"train ({train}) + test ({test}) exceeds the {n} valid records")
    if test < 1:
        raise ConfigError("test", "at least one test node is needed")
    if conf["k"] >= train:
        raise ConfigError("k", f"must be smaller than the training set size {train}")
    split = split_train_test(problems, train, test, hourly_counts(records), conf["seed"])

    graph = build_knn_graph(split.train, conf["k"], conf["weight_scale"])
    problem = NetworkProblem(split.train, graph, mu=conf["mu"])
    scale = forcing_level(problem) if conf["lambda_scale"] == "relative" else 1.0
    lams = [v * scale for v in conf["lambdas"]]
    config = AdmmConfig(conf["rho"], 1.0, conf["max_iters"], conf["eps_abs"], conf["eps_rel"])
    path = regularization_path(problem, lams, split.test, config,
                               k_assign=conf["k_assign"], eps=conf["eps"])
    for e in path.entries:
        msg = "lambda %.4g: %d clusters, consensus %.3f, test mse %.4g, %d iterations"
        args = (e.lam, e.num_clusters, e.consensus_fraction, e.test_mse, e.solution.iterations)
        if e.solution.converged:
            log.info(msg, *args)
        else:
            log.warning(msg + " (not converged)", *args)

    art = Artifacts(conf["out"])
    _stats_tables(records, art)
    _write_graph(graph, split.train, conf, art)
    art.table("path.csv", path.table())
    best = path.best()
    train_ids = [nd.node_id for nd in split.train]
    art.table("solution.csv", best.solution.table(train_ids))
    art.table("predictions.csv", best.predictions.table())
    art.table("path_predictions.csv", Table(
        ["lambda", "node_id", "cluster_id", "predicted", "actual"],
        [[e.lam, nid, int(c), float(pr), float(ac)]
         for e in path.entries
         for nid, c, pr, ac in zip(e.predictions.node_ids, e.predictions.cluster_ids,
                                   e.predictions.predicted, e.predictions.actual)]))
    art.table("train_nodes.csv", _nodes_table(split.train))
    art.table("test_nodes.csv", _nodes_table(split.test))
    art.json("feature_stats.json", _stats_to_json(stats))
    log.info("best lambda %.4g: %d clusters, test mse %.4g",
             best.lam, best.num_clusters, best.test_mse)
    return art


def _read_nodes(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [NodeProblem(int(r[0]), np.array([float(v) for v in r[4:]]), float(r[3]),
                            float(r[1]), float(r[2])) for r in reader]


def cmd_predict(conf):
    model = Path(conf["model"])
    for name in ("solution.csv", "train_nodes.csv", "feature_stats.json"):
        if not (model / name).is_file():
            raise ConfigError("model", f"{model} has no {name}; run the pipeline first")
    ids, clusters, x = load_solution(model / "solution.csv")
    train = _read_nodes(model / "train_nodes.csv")
    if [nd.node_id for nd in train] != ids:
        raise ConfigError("model", "solution.csv and train_nodes.csv list different nodes")
    stats = _stats_from_json(json.loads((model / "feature_stats.json").read_text("utf-8")))
    records = _load(conf)
    test, _ = featurize(records, stats)
    preds = predict_fares((x, clusters), train, test, conf["k_assign"])
    log.info("predicted %d trips, mse %.4g", len(test), preds.mse)
    art = Artifacts(conf["out"])
    art.table("predictions.csv", preds.table())
    return art


COMMANDS = {
    "synth-lasso": (cmd_synth_lasso, "synthetic Lasso sweep: objective histories and sparsity"),
    "pipeline": (cmd_pipeline, "trip CSV to graph, regularization path and fare predictions"),
    "stats": (cmd_stats, "descriptive statistics tables for a trip CSV"),
    "graph": (cmd_graph, "build and export the similarity graph"),
    "predict": (cmd_predict, "predict fares for a trip CSV with a saved pipeline solution"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="ridelasso", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="key=value settings file; flags override it")
        p.add_argument("-q", "--quiet", action="store_true", help="only report warnings")
        for field_name, default in _DEFAULTS[name].items():
            flag = "--" + field_name.replace("_", "-")
            shown = "" if default is None else f" (default: {_echo(default)})"
            p.add_argument(flag, dest=field_name, default=argparse.SUPPRESS,
                           help=FIELDS[field_name][1] + shown)
    return parser


def _echo(v):
    if isinstance(v, list):
        return ",".join(repr(x) for x in v)
    return v


def main(argv=None):
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    quiet = args.pop("quiet")
    config_path = args.pop("config", None)
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        file_values = read_config_file(config_path) if config_path else {}
        conf = resolve_config(command, file_values, args)
        art = COMMANDS[command][0](conf)
        doc = art.manifest(command, conf)
    except ConfigError as exc:
        print(f"ridelasso {command}: {exc}", file=sys.stderr)
        return 2
    except NoRecordsError as exc:
        print(f"ridelasso {command}: {exc}", file=sys.stderr)
        return 1
    except (SchemaError, OSError, ValueError) as exc:
        print(f"ridelasso {command}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(doc['artifacts'])} artifacts and manifest.json to {conf['out']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
