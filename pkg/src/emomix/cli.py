"""Experiment orchestration CLI.

Eight subcommands chain persisted stages: ingest -> cluster -> split ->
search -> evaluate / sweep / baseline -> report.  Every stage validates its
config up front, reads only prior-stage artifacts, and writes a manifest
with content hashes of its inputs and outputs, so deleting outputs and
re-running reproduces them bit-exactly for a fixed seed.
"""

import argparse
import copy
import hashlib
import json
import sys
from pathlib import Path

from ._seeding import derive_seed, rng_for
from .dataset import (
    LabelScale,
    exclude_by_category,
    load_dataset,
    load_dataset_npz,
    save_dataset_npz,
)
from .errors import ConfigInvalid, EmomixError, MissingPriorStage
from .evaluation import (
    TSV_HEADER,
    aggregate_table,
    cross_validate,
    dataset_checksum,
    default_folds,
    run_kp_sweep,
    sweep_tsv_lines,
)
from .mixing import MixSpec, mix_datasets
from .pipeline import PipelineConfig
from .search import (
    HalvingSchedule,
    SearchRecipe,
    default_candidates,
    ensemble_recipe,
    greedy_ensemble,
    successive_halving,
)
from .stratification import (
    export_assignment_csv,
    export_fold_csv,
    import_assignment_csv,
    import_fold_csv,
    ward_cluster,
)

TARGETS = ("valence", "arousal")

DEFAULT_PIPELINE = {
    "model": "svr",
    "pca_threshold": 0.95,
    "model_params": {"C": 10.0, "epsilon": 0.1, "kernel": "rbf", "gamma_scale": 1.0},
}

DEFAULTS = {
    "seed": 0,
    "out": "runs/exp",
    "n_folds": 5,
    "min_cluster_size": 25,
    "kp_grid": [
        [1.0, 0.0],
        [1.0, 0.2],
        [1.0, 0.4],
        [1.0, 0.6],
        [1.0, 0.8],
        [1.0, 1.0],
        [0.8, 1.0],
        [0.6, 1.0],
        [0.4, 1.0],
        [0.2, 1.0],
        [0.0, 1.0],
    ],
    "eval_specs": [[1.0, 1.0]],
    "baseline_specs": [[1.0, 1.0]],
    "recipe": {"source": "config", "config": DEFAULT_PIPELINE, "ensemble": True},
    "search": {
        "spec": [1.0, 1.0],
        "eta": 3.0,
        "min_resource": 0.0,
        "budget": 0,
        "max_members": 10,
        "pca_thresholds": [0.8, 0.9, 0.95, 0.99],
    },
}

_DATASET_KEYS = {"name", "features", "labels", "scale", "exclude_category"}


def resolve_config(raw: dict) -> dict:
    """Fill defaults and validate; raises ConfigInvalid before any compute."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("<root>", "config must be a JSON object")
    known = set(DEFAULTS) | {"datasets"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(sorted(unknown)[0], "unknown config field")

    cfg = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if isinstance(cfg.get(key), dict) and isinstance(value, dict):
            sub = dict(cfg[key])
            extra = set(value) - set(sub)
            if extra:
                raise ConfigInvalid(f"{key}.{sorted(extra)[0]}", "unknown config field")
            sub.update(value)
            cfg[key] = sub
        else:
            cfg[key] = copy.deepcopy(value)

    if "datasets" not in cfg:
        raise ConfigInvalid("datasets", "missing; need roles 'a' and 'b'")
    ds = cfg["datasets"]
    if not isinstance(ds, dict) or set(ds) != {"a", "b"}:
        raise ConfigInvalid("datasets", "must map exactly the roles 'a' and 'b'")
    for role, entry in ds.items():
        if not isinstance(entry, dict):
            raise ConfigInvalid(f"datasets.{role}", "must be an object")
        extra = set(entry) - _DATASET_KEYS
        if extra:
            raise ConfigInvalid(f"datasets.{role}.{sorted(extra)[0]}", "unknown field")
        for field in ("name", "features", "labels", "scale"):
            if field not in entry:
                raise ConfigInvalid(f"datasets.{role}.{field}", "missing")
        scale = entry["scale"]
        if not (isinstance(scale, (list, tuple)) and len(scale) == 2):
            raise ConfigInvalid(f"datasets.{role}.scale", "must be [lo, hi]")
        try:
            LabelScale(float(scale[0]), float(scale[1]))
        except Exception as exc:
            raise ConfigInvalid(f"datasets.{role}.scale", str(exc)) from exc
        entry.setdefault("exclude_category", None)
    if ds["a"]["name"] == ds["b"]["name"]:
        raise ConfigInvalid("datasets.b.name", "roles must use distinct names")

    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
        raise ConfigInvalid("seed", "must be an integer")
    if not (isinstance(cfg["n_folds"], int) and cfg["n_folds"] >= 2):
        raise ConfigInvalid("n_folds", "must be an integer >= 2")
    if not (isinstance(cfg["min_cluster_size"], int) and cfg["min_cluster_size"] >= 1):
        raise ConfigInvalid("min_cluster_size", "must be an integer >= 1")

    for field in ("kp_grid", "eval_specs", "baseline_specs"):
        grid = cfg[field]
        if not (isinstance(grid, list) and grid):
            raise ConfigInvalid(field, "must be a non-empty list of [k, p] pairs")
        for cell in grid:
            if not (isinstance(cell, (list, tuple)) and len(cell) == 2):
                raise ConfigInvalid(field, f"bad cell {cell!r}")
            try:
                MixSpec(float(cell[0]), float(cell[1]))
            except Exception as exc:
                raise ConfigInvalid(field, str(exc)) from exc

    recipe = cfg["recipe"]
    if recipe["source"] not in ("config", "search", "fold-search"):
        raise ConfigInvalid("recipe.source", "must be config, search, or fold-search")
    if recipe["source"] == "config":
        try:
            PipelineConfig.from_dict(recipe["config"])
        except ConfigInvalid:
            raise
        except Exception as exc:
            raise ConfigInvalid("recipe.config", str(exc)) from exc

    search = cfg["search"]
    try:
        MixSpec(float(search["spec"][0]), float(search["spec"][1]))
    except Exception as exc:
        raise ConfigInvalid("search.spec", str(exc)) from exc
    if not float(search["eta"]) > 1.0:
        raise ConfigInvalid("search.eta", "must be > 1")
    if not (isinstance(search["budget"], int) and search["budget"] >= 0):
        raise ConfigInvalid("search.budget", "must be an integer (0 = full grid)")
    if not (isinstance(search["max_members"], int) and search["max_members"] >= 1):
        raise ConfigInvalid("search.max_members", "must be an integer >= 1")
    for thr in search["pca_thresholds"]:
        if not (0.0 < float(thr) <= 1.0):
            raise ConfigInvalid("search.pca_thresholds", f"threshold {thr} outside (0, 1]")
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid("--config", f"no such file: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("--config", f"invalid JSON: {exc}") from exc
    return resolve_config(raw)


# --- artifact plumbing ---

def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _stage_dir(out: Path, stage: str) -> Path:
    d = out / stage
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_manifest(out: Path, stage: str, cfg: dict, inputs, outputs) -> None:
    manifest = {
        "stage": stage,
        "seed": cfg["seed"],
        "inputs": {str(Path(p)): _sha256_file(p) for p in inputs},
        "outputs": {str(Path(p)): _sha256_file(p) for p in outputs},
    }
    _write_json(out / stage / "manifest.json", manifest)
    _write_json(out / "config.resolved.json", cfg)


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise MissingPriorStage(f"{path} not found; run `emomix {producer}` first")
    return path


def _load_ingested(cfg: dict, out: Path):
    a = load_dataset_npz(_require(out / "ingest" / "a.npz", "ingest"))
    b = load_dataset_npz(_require(out / "ingest" / "b.npz", "ingest"))
    return a, b


def _load_assignments(out: Path, a, b):
    pa = _require(out / "cluster" / "a.csv", "cluster")
    pb = _require(out / "cluster" / "b.csv", "cluster")
    return (
        import_assignment_csv(pa, a.ids, domain=a.domain),
        import_assignment_csv(pb, b.ids, domain=b.domain),
    )


def _load_folds(cfg: dict, out: Path, a, b):
    pa = _require(out / "splits" / "a.csv", "split")
    pb = _require(out / "splits" / "b.csv", "split")
    fa = import_fold_csv(pa, a.ids, seed=cfg["seed"])
    fb = import_fold_csv(pb, b.ids, seed=cfg["seed"])
    for name, plan in (("a", fa), ("b", fb)):
        if plan.n_folds != cfg["n_folds"]:
            raise MissingPriorStage(
                f"splits/{name}.csv has {plan.n_folds} folds, config wants {cfg['n_folds']}"
            )
    return fa, fb


def _candidates(cfg: dict):
    search = cfg["search"]
    cands = default_candidates(tuple(float(t) for t in search["pca_thresholds"]))
    budget = search["budget"]
    if budget and budget < len(cands):
        # Deterministic subset: seeded permutation, original grid order kept.
        order = rng_for(cfg["seed"], "candidate-budget").permutation(len(cands))[:budget]
        cands = [cands[i] for i in sorted(order)]
    return cands


def _resolve_recipe(cfg: dict, out: Path):
    """Turn the config's recipe block into what cross_validate consumes."""
    recipe = cfg["recipe"]
    if recipe["source"] == "config":
        return PipelineConfig.from_dict(recipe["config"])
    if recipe["source"] == "search":
        per_target = {}
        for target in TARGETS:
            path = _require(out / "search" / f"{target}_recipe.json", "search")
            payload = json.loads(path.read_text(encoding="utf-8"))
            if recipe.get("ensemble", True):
                per_target[target] = payload["ensemble"]
            else:
                per_target[target] = PipelineConfig.from_dict(payload["best"])
        return per_target
    search = cfg["search"]
    return SearchRecipe(
        candidates=tuple(_candidates(cfg)),
        eta=float(search["eta"]),
        min_resource=float(search["min_resource"]),
        max_members=search["max_members"],
        ensemble=recipe.get("ensemble", True),
    )


def _spec_tag(spec: MixSpec) -> str:
    return f"k{spec.k:g}_p{spec.p:g}"


# --- subcommands ---

def cmd_ingest(cfg: dict, out: Path, jobs: int) -> None:
    stage = _stage_dir(out, "ingest")
    inputs, outputs, summary = [], [], {}
    for role in ("a", "b"):
        entry = cfg["datasets"][role]
        scale = LabelScale(float(entry["scale"][0]), float(entry["scale"][1]))
        ds = load_dataset(entry["features"], entry["labels"], entry["name"], scale)
        if entry["exclude_category"]:
            ds = exclude_by_category(ds, entry["exclude_category"])
        path = stage / f"{role}.npz"
        save_dataset_npz(ds, path)
        inputs += [entry["features"], entry["labels"]]
        outputs.append(path)
        summary[role] = {
            "domain": ds.domain,
            "n_samples": len(ds),
            "n_features": ds.n_features,
            "checksum": dataset_checksum(ds),
        }
    _write_json(stage / "datasets.json", summary)
    outputs.append(stage / "datasets.json")
    _write_manifest(out, "ingest", cfg, inputs, outputs)
    print(f"ingest: {summary['a']['n_samples']} + {summary['b']['n_samples']} samples")


def cmd_cluster(cfg: dict, out: Path, jobs: int) -> None:
    a, b = _load_ingested(cfg, out)
    stage = _stage_dir(out, "cluster")
    outputs, summary = [], {}
    for role, ds in (("a", a), ("b", b)):
        assign = ward_cluster(ds.labels(), cfg["min_cluster_size"], domain=ds.domain)
        path = stage / f"{role}.csv"
        export_assignment_csv(path, ds.ids, assign)
        outputs.append(path)
        summary[role] = {
            "domain": ds.domain,
            "n_clusters": assign.n_clusters,
            "cluster_sizes": list(assign.cluster_sizes),
        }
    _write_json(stage / "clusters.json", summary)
    outputs.append(stage / "clusters.json")
    _write_manifest(
        out, "cluster", cfg, [out / "ingest" / "a.npz", out / "ingest" / "b.npz"], outputs
    )
    print(
        "cluster: "
        + ", ".join(f"{v['domain']}: {v['n_clusters']} clusters" for v in summary.values())
    )


def cmd_split(cfg: dict, out: Path, jobs: int) -> None:
    a, b = _load_ingested(cfg, out)
    a_assign, b_assign = _load_assignments(out, a, b)
    stage = _stage_dir(out, "splits")
    outputs = []
    for role, ds, assign in (("a", a, a_assign), ("b", b, b_assign)):
        plan = default_folds(assign, cfg["n_folds"], cfg["seed"])
        path = stage / f"{role}.csv"
        export_fold_csv(path, ds.ids, plan)
        outputs.append(path)
    _write_manifest(
        out,
        "splits",
        cfg,
        [out / "ingest" / "a.npz", out / "ingest" / "b.npz",
         out / "cluster" / "a.csv", out / "cluster" / "b.csv"],
        outputs,
    )
    print(f"split: {cfg['n_folds']} folds per domain")


def cmd_search(cfg: dict, out: Path, jobs: int) -> None:
    a, b = _load_ingested(cfg, out)
    a_assign, b_assign = _load_assignments(out, a, b)
    stage = _stage_dir(out, "search")
    search = cfg["search"]
    spec = MixSpec(float(search["spec"][0]), float(search["spec"][1]))
    mixed = mix_datasets(
        a, a_assign, b, b_assign, spec,
        derive_seed(cfg["seed"], "search-mix", spec.label()),
    )
    cands = _candidates(cfg)
    schedule = HalvingSchedule(
        n_candidates=len(cands),
        eta=float(search["eta"]),
        min_resource=float(search["min_resource"]),
    )
    outputs = []
    for target in TARGETS:
        result = successive_halving(
            cands,
            mixed,
            target,
            schedule=schedule,
            seed=derive_seed(cfg["seed"], "search", target),
            jobs=jobs,
        )
        selected = greedy_ensemble(
            result.survivors, result.val_y, max_members=search["max_members"]
        )
        recipe = ensemble_recipe(result.survivors, selected)
        payload = {
            "target": target,
            "spec": {"k": spec.k, "p": spec.p},
            "best": result.best_config.as_dict(),
            "ensemble": recipe,
        }
        files = {
            f"{target}_recipe.json": payload,
            f"{target}_ranking.json": [
                {"config": c.as_dict(), "score": s} for c, s in result.ranked
            ],
            f"{target}_trace.json": result.trace_payload(),
        }
        for name, obj in files.items():
            _write_json(stage / name, obj)
            outputs.append(stage / name)
        best = result.ranked[0]
        print(f"search[{target}]: best {best[0].label()} val-mse {best[1]:.5f}")
    _write_manifest(
        out,
        "search",
        cfg,
        [out / "ingest" / "a.npz", out / "ingest" / "b.npz",
         out / "cluster" / "a.csv", out / "cluster" / "b.csv"],
        outputs,
    )


def _evaluation_inputs(cfg, out):
    paths = [
        out / "ingest" / "a.npz", out / "ingest" / "b.npz",
        out / "cluster" / "a.csv", out / "cluster" / "b.csv",
        out / "splits" / "a.csv", out / "splits" / "b.csv",
    ]
    if cfg["recipe"]["source"] == "search":
        paths += [out / "search" / f"{t}_recipe.json" for t in TARGETS]
    return paths


def _run_reports(cfg: dict, out: Path, jobs: int, specs, baseline: bool, stage_name: str):
    a, b = _load_ingested(cfg, out)
    a_assign, b_assign = _load_assignments(out, a, b)
    a_folds, b_folds = _load_folds(cfg, out, a, b)
    recipe = _resolve_recipe(cfg, out)
    reports = [
        cross_validate(
            a, b, spec, recipe,
            n_folds=cfg["n_folds"],
            seed=cfg["seed"],
            a_assign=a_assign, b_assign=b_assign,
            a_folds=a_folds, b_folds=b_folds,
            baseline=baseline,
            jobs=jobs,
        )
        for spec in specs
    ]
    stage = _stage_dir(out, stage_name)
    outputs = []
    for spec, report in zip(specs, reports):
        tag = _spec_tag(spec)
        _write_json(stage / f"{tag}.json", report.as_dict())
        _write_text(stage / f"{tag}.tsv", "\n".join(report.tsv_lines()) + "\n")
        outputs += [stage / f"{tag}.json", stage / f"{tag}.tsv"]
    _write_text(stage / "table.txt", aggregate_table(reports) + "\n")
    outputs.append(stage / "table.txt")
    _write_manifest(out, stage_name, cfg, _evaluation_inputs(cfg, out), outputs)
    return reports


def cmd_evaluate(cfg: dict, out: Path, jobs: int) -> None:
    specs = [MixSpec(float(k), float(p)) for k, p in cfg["eval_specs"]]
    reports = _run_reports(cfg, out, jobs, specs, baseline=False, stage_name="evaluate")
    print(aggregate_table(reports))


def cmd_sweep(cfg: dict, out: Path, jobs: int) -> None:
    a, b = _load_ingested(cfg, out)
    a_assign, b_assign = _load_assignments(out, a, b)
    a_folds, b_folds = _load_folds(cfg, out, a, b)
    recipe = _resolve_recipe(cfg, out)
    grid = [MixSpec(float(k), float(p)) for k, p in cfg["kp_grid"]]
    reports = run_kp_sweep(
        a, b, grid, recipe,
        seed=cfg["seed"],
        n_folds=cfg["n_folds"],
        jobs=jobs,
        a_assign=a_assign, b_assign=b_assign,
        a_folds=a_folds, b_folds=b_folds,
    )
    stage = _stage_dir(out, "sweep")
    _write_text(stage / "records.tsv", "\n".join(sweep_tsv_lines(reports)) + "\n")
    _write_json(stage / "reports.json", [r.as_dict() for r in reports])
    _write_text(stage / "table.txt", aggregate_table(reports) + "\n")
    outputs = [stage / "records.tsv", stage / "reports.json", stage / "table.txt"]
    _write_manifest(out, "sweep", cfg, _evaluation_inputs(cfg, out), outputs)
    print(f"sweep: {len(reports)} cells x {cfg['n_folds']} folds -> {stage / 'records.tsv'}")


def cmd_baseline(cfg: dict, out: Path, jobs: int) -> None:
    specs = [MixSpec(float(k), float(p)) for k, p in cfg["baseline_specs"]]
    reports = _run_reports(cfg, out, jobs, specs, baseline=True, stage_name="baseline")
    print(aggregate_table(reports))


def _parse_tsv(path: Path) -> list:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != TSV_HEADER:
        raise MissingPriorStage(f"{path} is not a records TSV")
    cols = TSV_HEADER.split("\t")
    rows = []
    for line in lines[1:]:
        parts = line.split("\t")
        row = dict(zip(cols, parts))
        for key in ("spec_k", "spec_p", "rmse", "mse", "r2"):
            row[key] = float(row[key])
        row["fold"] = int(row["fold"])
        rows.append(row)
    return rows


def cmd_report(cfg: dict, out: Path, jobs: int) -> None:
    tsvs = sorted((out / "sweep").glob("records.tsv"))
    tsvs += sorted((out / "evaluate").glob("*.tsv"))
    tsvs += sorted((out / "baseline").glob("*.tsv"))
    if not tsvs:
        raise MissingPriorStage(
            "no records found; run `emomix evaluate`, `emomix sweep`, or `emomix baseline` first"
        )
    rows = []
    for path in tsvs:
        stage = path.parent.name
        for row in _parse_tsv(path):
            row["stage"] = stage
            rows.append(row)

    groups = {}
    for row in rows:
        key = (row["stage"], row["spec_k"], row["spec_p"], row["model"],
               row["test_domain"], row["target"])
        groups.setdefault(key, []).append(row)

    aggregates = []
    for key in sorted(groups):
        vals = groups[key]
        entry = {
            "stage": key[0],
            "spec_k": key[1],
            "spec_p": key[2],
            "model": key[3],
            "test_domain": key[4],
            "target": key[5],
            "n_folds": len(vals),
        }
        for metric in ("rmse", "mse", "r2"):
            xs = [v[metric] for v in vals]
            n = len(xs)
            mean = sum(xs) / n
            var = sum((x - mean) ** 2 for x in xs) / (n - 1) if n > 1 else 0.0
            entry[metric] = {"mean": mean, "std": var**0.5}
        aggregates.append(entry)

    lines = [
        f"{'stage':<10} {'k':>5} {'p':>5} {'model':<10} {'test domain':<18} "
        f"{'target':<8} {'RMSE':>24} {'R2':>24}"
    ]
    for e in aggregates:
        rmse_s = f"{e['rmse']['mean']:.3e} ± {e['rmse']['std']:.2e}"
        r2_s = f"{e['r2']['mean']:.3f} ± {e['r2']['std']:.3f}"
        lines.append(
            f"{e['stage']:<10} {e['spec_k']:>5g} {e['spec_p']:>5g} {e['model']:<10} "
            f"{e['test_domain']:<18} {e['target']:<8} {rmse_s:>24} {r2_s:>24}"
        )
    stage = _stage_dir(out, "report")
    _write_json(stage / "aggregates.json", aggregates)
    _write_text(stage / "tables.txt", "\n".join(lines) + "\n")
    _write_manifest(out, "report", cfg, tsvs, [stage / "aggregates.json", stage / "tables.txt"])
    print("\n".join(lines))


COMMANDS = {
    "ingest": cmd_ingest,
    "cluster": cmd_cluster,
    "split": cmd_split,
    "search": cmd_search,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "baseline": cmd_baseline,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emomix",
        description="Two-domain emotion-regression experiments: mixing, search, CV reporting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--jobs", type=int, default=1, help="max concurrent fits")
        p.add_argument("--out", default=None, help="override output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.out is not None:
            cfg["out"] = args.out
        if args.jobs < 1:
            raise ConfigInvalid("--jobs", "must be >= 1")
        out = Path(cfg["out"])
        COMMANDS[args.command](cfg, out, args.jobs)
        return 0
    except (EmomixError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
