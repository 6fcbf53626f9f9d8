"""Command-line client for the scatterogram service.

All computation happens behind the HTTP API in service.py. By default each
command routes its request through an in-process ASGI transport, so no
server needs to be running; point --server at a deployed instance to use a
remote one. File reading/writing always happens on the client side.

Dataset arguments accept the names `wine` / `satimage` (resolved inside
$BBC_DATA_DIR, default ./data) or a path: *.data parses as the wine format,
*.trn as the satimage format, anything else as generic CSV with the label
in the last column.

Exit codes: 0 success, 2 data/format error, 3 optimization error.
"""

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

import httpx

from .data import (Dataset, load_csv, load_satimage, load_wine,
                   materialize_synthetic_satimage, materialize_wine, save_csv)
from .errors import DataError, OptimizationError, VizError
from .pipelines import SCENARIOS, scenario_dataset_name, stable_json

_TIMEOUT = 600.0


class ServiceError(VizError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def data_dir() -> Path:
    return Path(os.environ.get("BBC_DATA_DIR", "data"))


def resolve_dataset(value: str) -> Dataset:
    if value == "wine":
        return load_wine(data_dir() / "wine.data")
    if value == "satimage":
        real = data_dir() / "sat.trn"
        if real.exists():
            return load_satimage(real)
        synthetic = data_dir() / "sat.synthetic.trn"
        if synthetic.exists():
            print("note: using synthetic satimage stand-in "
                  f"({synthetic}); supply {real} for the real data", file=sys.stderr)
            return load_satimage(synthetic)
        raise DataError(f"dataset file not found: {real} "
                        "(run `bbviz fetch-data` for offline stand-ins)")
    path = Path(value)
    if path.suffix == ".data":
        return load_wine(path)
    if path.suffix == ".trn":
        return load_satimage(path)
    return load_csv(path, label_col=-1)


def _dataset_payload(dataset: Dataset) -> dict:
    return {"features": dataset.features.tolist(),
            "labels": [int(l) for l in dataset.labels],
            "class_names": list(dataset.class_names)}


async def _asgi_request(method: str, path: str, payload):
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(transport=transport, base_url="http://bbviz.local",
                                 timeout=_TIMEOUT) as client:
        return await client.request(method, path, json=payload)


def request(server: str | None, method: str, path: str, payload=None) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=_TIMEOUT) as client:
            resp = client.request(method, path, json=payload)
    else:
        resp = asyncio.run(_asgi_request(method, path, payload))
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail")
    except ValueError:
        detail = None
    if isinstance(detail, dict) and "kind" in detail:
        raise ServiceError(detail["kind"], detail.get("message", "service error"))
    raise ServiceError("data" if resp.status_code in (400, 422) else "internal",
                       f"service returned {resp.status_code}: {detail}")


def _write_text(path, text: str):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _check_format(value: str | None, supported: str, command: str):
    if value is not None and value != supported:
        raise DataError(f"{command} only supports --format {supported}, got {value}")


def _load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from exc


def cmd_train(args) -> int:
    dataset = resolve_dataset(args.data)
    payload = {"dataset": _dataset_payload(dataset), "model": args.model,
               "hidden": args.hidden, "centers": args.centers,
               "alpha": args.alpha, "iterations": args.iters,
               "restarts": args.restarts, "seed": args.seed,
               "error_fn": args.error_fn, "ridge": args.ridge,
               "standardize": True}
    result = request(args.server, "POST", "/train", payload)
    _write_text(args.out, stable_json(result["model"]))
    report_path = args.report or str(Path(args.out).with_suffix("")) + "_report.json"
    _write_text(report_path, stable_json(result["report"]))
    rep = result["report"]
    print(f"trained {args.model} on {dataset.n} samples: "
          f"{rep['training_errors']} training errors "
          f"(restart {rep['chosen_restart']}) -> {args.out}")
    return 0


def cmd_project(args) -> int:
    _check_format(args.format, "json", "project")
    dataset = resolve_dataset(args.data)
    model_doc = _load_json(args.model)
    payload = {"model": model_doc, "features": dataset.features.tolist(),
               "labels": [int(l) for l in dataset.labels], "kind": args.kind}
    result = request(args.server, "POST", "/project", payload)
    _write_text(args.out, stable_json(result))
    print(f"projected {len(result['points'])} points (k={result['k']}) -> {args.out}")
    return 0


def cmd_render(args) -> int:
    _check_format(args.format, "svg", "render")
    docs = []
    for path in args.points:
        doc = _load_json(path)
        if not isinstance(doc, dict) or "k" not in doc or "points" not in doc:
            raise DataError(f"{path}: not a points document (missing k/points)")
        docs.append(doc)
    if not docs:
        raise DataError("render needs at least one --points file")
    k = docs[0]["k"]
    segments = []
    for spec in args.segment:
        try:
            start, end = spec.split(":")
            segments.append({"start": [float(v) for v in start.split(",")],
                             "end": [float(v) for v in end.split(",")]})
        except ValueError as exc:
            raise DataError(f"bad --segment {spec!r}, expected 'a,b,c:d,e,f'") from exc
    payload = {"k": k, "layers": docs, "edges": not args.no_edges,
               "hull": args.hull, "segments": segments,
               "vertex_labels": not args.no_labels,
               "class_names": args.class_names.split(",") if args.class_names else None,
               "mono": args.mono, "width": args.width, "height": args.height,
               "margin": args.margin}
    result = request(args.server, "POST", "/render", payload)
    _write_text(args.out, result["svg"])
    print(f"rendered {sum(len(d.get('points', [])) for d in docs)} points -> {args.out}")
    return 0


def cmd_perturb(args) -> int:
    _check_format(args.format, "csv", "perturb")
    dataset = resolve_dataset(args.data)
    selection = None
    if args.select not in (None, "all"):
        try:
            selection = [int(v) for v in args.select.split(",")]
        except ValueError as exc:
            raise DataError(f"bad --select {args.select!r}, expected comma-separated "
                            "indices or 'all'") from exc
    payload = {"dataset": _dataset_payload(dataset), "fraction": args.fraction,
               "per_point": args.per_point, "seed": args.seed,
               "selection": selection}
    result = request(args.server, "POST", "/perturb", payload)
    out = result["dataset"]
    perturbed = Dataset(out["features"], out["labels"], tuple(out["class_names"]))
    save_csv(perturbed, args.out)
    print(f"perturbed {dataset.n} rows -> {perturbed.n} replicas "
          f"(fraction {args.fraction}) -> {args.out}")
    return 0


def cmd_report(args) -> int:
    _check_format(args.format, "json", "report")
    dataset = resolve_dataset(args.data)
    model_doc = _load_json(args.model)
    payload = {"model": model_doc, "dataset": _dataset_payload(dataset),
               "threshold": args.threshold}
    result = request(args.server, "POST", "/report", payload)
    _write_text(args.out, stable_json(result))
    print(f"report: {result['errors']} errors on {result['samples']} samples -> {args.out}")
    return 0


def cmd_reproduce(args) -> int:
    if args.scenario not in SCENARIOS:
        raise DataError(f"unknown scenario {args.scenario!r}; "
                        f"valid: {', '.join(sorted(SCENARIOS))}")
    dataset = resolve_dataset(args.data or scenario_dataset_name(args.scenario))
    payload = {"scenario": args.scenario, "seed": args.seed,
               "dataset": _dataset_payload(dataset)}
    result = request(args.server, "POST", "/reproduce", payload)
    out_dir = Path(args.out or f"reproduce-{args.scenario}")
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in result["files"].items():
        (out_dir / name).write_text(content)
    (out_dir / "manifest.json").write_text(stable_json(result["manifest"]))
    print(f"scenario {args.scenario}: wrote {len(result['files'])} artifacts "
          f"+ manifest.json -> {out_dir}/")
    return 0


def cmd_scenarios(args) -> int:
    result = request(args.server, "GET", "/scenarios")
    for info in result["scenarios"]:
        print(f"{info['name']:12s} dataset={info['dataset']}")
    return 0


def cmd_fetch_data(args) -> int:
    target = Path(args.out) if args.out else data_dir()
    wine_path = materialize_wine(target / "wine.data")
    print(f"wrote {wine_path} (bundled copy of the canonical 178-sample table)")
    sat_path = materialize_synthetic_satimage(target / "sat.synthetic.trn")
    print(f"wrote {sat_path} (SYNTHETIC stand-in with canonical class counts; "
          f"place the real file at {target / 'sat.trn'} to use it instead)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("bbviz.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbviz",
        description="Polygon scatterograms of classifier outputs")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train an MLP or RBF classifier")
    train.add_argument("--data", required=True)
    train.add_argument("--model", choices=["mlp", "rbf"], default="mlp")
    train.add_argument("--hidden", type=int, default=3)
    train.add_argument("--centers", type=int, default=6)
    train.add_argument("--alpha", type=float, default=0.0)
    train.add_argument("--iters", type=int, default=100)
    train.add_argument("--restarts", type=int, default=1)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--error-fn", choices=["cross-entropy", "sum-of-squares"],
                       default="cross-entropy")
    train.add_argument("--ridge", type=float, default=1e-8)
    train.add_argument("--select", choices=["best"], default="best",
                       help="restart selection policy (only 'best' exists)")
    train.add_argument("--out", default="model.json")
    train.add_argument("--report", default=None,
                       help="fit report path (default <out>_report.json)")
    train.set_defaults(fn=cmd_train)

    project = sub.add_parser("project", help="project model outputs to points JSON")
    project.add_argument("--model", required=True, help="model JSON file")
    project.add_argument("--data", required=True)
    project.add_argument("--kind", choices=["train", "test", "perturbed", "new"],
                         default="train")
    project.add_argument("--format", default=None)
    project.add_argument("--out", default="points.json")
    project.set_defaults(fn=cmd_project)

    render = sub.add_parser("render", help="render points JSON to SVG")
    render.add_argument("--points", action="append", default=[],
                        help="points JSON file; repeat for layered scenes")
    render.add_argument("--hull", action="store_true",
                        help="overlay the binary-corner hull")
    render.add_argument("--segment", action="append", default=[],
                        help="characteristic segment 'a,b,c:d,e,f' in output space")
    render.add_argument("--no-edges", action="store_true")
    render.add_argument("--no-labels", action="store_true")
    render.add_argument("--class-names", default=None, help="comma-separated")
    render.add_argument("--mono", action="store_true")
    render.add_argument("--width", type=int, default=560)
    render.add_argument("--height", type=int, default=560)
    render.add_argument("--margin", type=int, default=40)
    render.add_argument("--format", default=None)
    render.add_argument("--out", default="scatter.svg")
    render.set_defaults(fn=cmd_render)

    perturb = sub.add_parser("perturb", help="write Gaussian replicas as CSV")
    perturb.add_argument("--data", required=True)
    perturb.add_argument("--fraction", type=float, required=True)
    perturb.add_argument("--per-point", type=int, default=1)
    perturb.add_argument("--seed", type=int, default=0)
    perturb.add_argument("--select", default="all",
                         help="'all' or comma-separated source row indices")
    perturb.add_argument("--format", default=None)
    perturb.add_argument("--out", default="perturbed.csv")
    perturb.set_defaults(fn=cmd_perturb)

    report = sub.add_parser("report", help="metrics JSON for a model on a dataset")
    report.add_argument("--model", required=True)
    report.add_argument("--data", required=True)
    report.add_argument("--threshold", type=float, default=None)
    report.add_argument("--format", default=None)
    report.add_argument("--out", default="report.json")
    report.set_defaults(fn=cmd_report)

    reproduce = sub.add_parser("reproduce", help="regenerate a figure-family scenario")
    reproduce.add_argument("scenario")
    reproduce.add_argument("--seed", type=int, default=1)
    reproduce.add_argument("--data", default=None,
                           help="override the scenario's dataset path")
    reproduce.add_argument("--out", default=None)
    reproduce.set_defaults(fn=cmd_reproduce)

    scenarios = sub.add_parser("scenarios", help="list reproduction scenarios")
    scenarios.set_defaults(fn=cmd_scenarios)

    fetch = sub.add_parser("fetch-data", help="write offline dataset files")
    fetch.add_argument("--out", default=None, help="target dir (default $BBC_DATA_DIR)")
    fetch.set_defaults(fn=cmd_fetch_data)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3 if exc.kind == "optimization" else 2
    except OptimizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
