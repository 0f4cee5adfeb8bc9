"""Command-line surface: synthesis, embedding, cutoff search, clustering,
oracle dumps, metrics, and counter-based benchmarking.

Every command writes deterministic CSV artifacts (given ``--seed``) plus a
``report.json`` validated against the schema shipped with the package.
Exit codes: 0 success, 2 usage/configuration error, 1 runtime failure;
both failure paths emit a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import kernels
from .eigencount import estimate_lambda_k_dichotomy, estimate_lambda_k_fast
from .graphs import (
    build_knn_graph,
    cycle_graph,
    generate_sbm,
    generate_sensor_cloud,
    generate_swissroll,
    laplacian,
    load_graph,
    save_graph,
)
from .metrics import Partition, adjusted_rand, kmeans, mean_energy, modularity
from .oracle import dense_eigendecomposition, true_count
from .sketch import approximate_eigenspace

SCHEMA_VERSION = 1


class UsageError(ValueError):
    """Bad input file or invalid parameter combination."""


def load_report_schema() -> dict:
    with resources.files("specsketch").joinpath("report_schema.json").open() as fh:
        return json.load(fh)


def _validate_report(report: dict) -> None:
    import jsonschema

    jsonschema.validate(report, load_report_schema())


def _write_report(out_dir: Path, command: str, config: dict, timings: dict,
                  outputs: dict, counters=None, lambda_k=None, metrics=None) -> Path:
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "timings_s": {k: float(v) for k, v in timings.items()},
        "outputs": {k: str(v) for k, v in outputs.items()},
    }
    if counters is not None:
        report["counters"] = counters
    if lambda_k is not None:
        report["lambda_k"] = lambda_k
    if metrics is not None:
        report["metrics"] = metrics
    _validate_report(report)
    path = out_dir / "report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path


def _write_csv(path: Path, array, fmt="%.17g", header: str | None = None) -> None:
    kw = {"comments": ""}
    if header:
        kw["header"] = header
    np.savetxt(path, array, delimiter=",", fmt=fmt, **kw)


def _config_dict(args) -> dict:
    skip = {"func"}
    out = {}
    for key, val in vars(args).items():
        if key in skip:
            continue
        out[key] = str(val) if isinstance(val, Path) else val
    return out


def _synth_graph(args, seed):
    """Build the requested synthetic graph; returns (graph, labels, extras)."""
    kind = args.synth if getattr(args, "synth", None) else args.kind
    n = args.n
    if n is None:
        raise UsageError("--n is required for synthetic graphs")
    if kind == "sbm":
        graph, labels = generate_sbm(n, args.classes, args.eps, args.s, seed)
        return graph, labels, {}
    if kind == "sensor":
        cloud = generate_sensor_cloud(n, seed)
        graph = build_knn_graph(cloud, args.knn, args.kernel, args.sigma)
        return graph, None, {"points": cloud.points}
    if kind == "swissroll":
        cloud = generate_swissroll(n, args.a, args.b, seed)
        graph = build_knn_graph(cloud, args.knn, args.kernel, args.sigma)
        return graph, None, {"points": cloud.points, "theta": cloud.labels}
    if kind == "cycle":
        return cycle_graph(n), None, {}
    raise UsageError(f"unknown synthetic graph kind {kind!r}")


def _resolve_graph(args, seed):
    if getattr(args, "input", None):
        path = Path(args.input)
        if not path.exists():
            raise UsageError(f"input graph not found: {path}")
        return load_graph(path), None, {}
    if getattr(args, "synth", None) or getattr(args, "kind", None):
        return _synth_graph(args, seed)
    raise UsageError("provide --input PATH or --synth KIND")


def _lambda_mode_params(args):
    mode = args.lambda_mode
    if mode == "fixed":
        if args.lambda_k is None:
            raise UsageError("--lambda-mode fixed requires --lambda-k")
        return {"lambda_k": args.lambda_k}
    if mode == "exact-oracle":
        return {"lambda_method": "exact"}
    if mode in ("fast", "dichotomy"):
        return {"lambda_method": mode}
    raise UsageError(f"unknown lambda mode {mode!r}")


def cmd_synth(args, seed, out_dir):
    timings, outputs = {}, {}
    t0 = time.perf_counter()
    graph, labels, extras = _synth_graph(args, seed)
    timings["synth"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    graph_path = out_dir / "graph.mtx"
    save_graph(graph, graph_path)
    outputs["graph"] = graph_path
    if labels is not None:
        lab_path = out_dir / "labels.csv"
        _write_csv(lab_path, np.column_stack([np.arange(labels.size), labels]),
                   fmt="%d", header="vertex_id,label")
        outputs["labels"] = lab_path
    if "points" in extras:
        pts_path = out_dir / "points.csv"
        _write_csv(pts_path, extras["points"])
        outputs["points"] = pts_path
    timings["write"] = time.perf_counter() - t0
    metrics = {"n_vertices": graph.n_vertices, "n_edges": graph.n_edges}
    return {"outputs": outputs, "timings": timings, "metrics": metrics}


def _run_embedding(args, seed, graph):
    op = laplacian(graph, args.variant)
    approx = approximate_eigenspace(
        op, args.k, d=args.d, m=args.m, seed=seed, max_iter=args.max_iter,
        tol_eps=args.tol_eps, damping=args.damping, **_lambda_mode_params(args),
    )
    return op, approx


def _lambda_report(approx) -> dict:
    return {
        "lambda_est": float(approx.lambda_k_used),
        "count_est": float(approx.diagnostics["lambda_history"][-1][1])
        if approx.diagnostics["lambda_history"] else float("nan"),
        "iterations": approx.diagnostics["lambda_iterations"],
        "converged": approx.diagnostics["lambda_converged"],
        "method": approx.diagnostics["lambda_method"],
    }


def _counters_report(diag) -> dict:
    return {key: diag[key] for key in
            ("spmm_blocks", "spmm_columns", "svd_calls", "svd_cost_units")}


def cmd_embed(args, seed, out_dir):
    timings, outputs = {}, {}
    t0 = time.perf_counter()
    graph, _, _ = _resolve_graph(args, seed)
    timings["graph"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    op, approx = _run_embedding(args, seed, graph)
    timings["pipeline"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    emb_path = out_dir / "embedding.csv"
    _write_csv(emb_path, approx.basis)
    outputs["embedding"] = emb_path
    if args.dump_coeffs:
        from .filters import ideal_lowpass_coeffs

        filt = ideal_lowpass_coeffs(
            min(approx.lambda_k_used, op.lambda_max_bound * (1 - 1e-12)),
            op.lambda_max_bound, args.m, args.damping)
        co_path = out_dir / "coeffs.csv"
        _write_csv(co_path, np.column_stack([np.arange(filt.coeffs.size), filt.coeffs]),
                   header="j,coeff")
        outputs["coeffs"] = co_path
    timings["write"] = time.perf_counter() - t0
    return {
        "outputs": outputs, "timings": timings,
        "counters": _counters_report(approx.diagnostics),
        "lambda_k": _lambda_report(approx),
        "metrics": {"singular_values": [float(s) for s in approx.singular_values]},
    }


def cmd_lambdak(args, seed, out_dir):
    timings, outputs = {}, {}
    t0 = time.perf_counter()
    graph, _, _ = _resolve_graph(args, seed)
    op = laplacian(graph, args.variant)
    timings["graph"] = time.perf_counter() - t0

    from .counters import OpCounter

    counter = OpCounter()
    t0 = time.perf_counter()
    if args.method == "fast":
        est = estimate_lambda_k_fast(op, args.k, args.d, args.m, args.max_iter, seed,
                                     counter=counter)
    else:
        est = estimate_lambda_k_dichotomy(op, args.k, args.d, args.m, args.tol_eps,
                                          seed, counter=counter)
    timings["search"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    hist_path = out_dir / "lambda_history.csv"
    rows = np.array([[i + 1, lam, cnt] for i, (lam, cnt) in enumerate(est.history)])
    if rows.size == 0:
        rows = rows.reshape(0, 3)
    _write_csv(hist_path, rows, header="iter,lambda,count")
    outputs["history"] = hist_path
    timings["write"] = time.perf_counter() - t0
    lam = {"lambda_est": float(est.lambda_est), "count_est": float(est.count_est),
           "iterations": est.iterations, "converged": est.converged,
           "method": args.method}
    return {"outputs": outputs, "timings": timings, "counters": counter.as_dict(),
            "lambda_k": lam}


def cmd_cluster(args, seed, out_dir):
    timings, outputs = {}, {}
    t0 = time.perf_counter()
    graph, truth, _ = _resolve_graph(args, seed)
    if args.truth:
        data = np.loadtxt(args.truth, delimiter=",", skiprows=1, dtype=np.int64)
        truth = data[:, 1] if data.ndim == 2 else data
    timings["graph"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    _, approx = _run_embedding(args, seed, graph)
    timings["pipeline"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    part = kmeans(approx.basis, args.k, seed=seed, restarts=args.restarts)
    timings["kmeans"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    part_path = out_dir / "partition.csv"
    _write_csv(part_path, np.column_stack([np.arange(part.n), part.labels]),
               fmt="%d", header="vertex_id,label")
    outputs["partition"] = part_path
    timings["write"] = time.perf_counter() - t0

    metrics = {"modularity": modularity(graph, part)}
    if truth is not None:
        truth_part = Partition(truth, int(truth.max()) + 1)
        metrics["ari_vs_truth"] = adjusted_rand(part, truth_part)
    return {"outputs": outputs, "timings": timings,
            "counters": _counters_report(approx.diagnostics),
            "lambda_k": _lambda_report(approx), "metrics": metrics}


def cmd_oracle(args, seed, out_dir):
    timings, outputs = {}, {}
    t0 = time.perf_counter()
    graph, _, _ = _resolve_graph(args, seed)
    op = laplacian(graph, args.variant)
    timings["graph"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    spectrum = dense_eigendecomposition(op)
    timings["eigendecomposition"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ev_path = out_dir / "eigenvalues.csv"
    _write_csv(ev_path, spectrum.eigenvalues[:, None], header="eigenvalue")
    outputs["eigenvalues"] = ev_path
    if args.save_basis:
        b_path = out_dir / "basis.csv"
        _write_csv(b_path, spectrum.basis(args.save_basis))
        outputs["basis"] = b_path
    timings["write"] = time.perf_counter() - t0

    metrics = {"lambda_max": float(spectrum.eigenvalues[-1]),
               "lambda_max_bound": float(op.lambda_max_bound)}
    if args.count_at:
        metrics["counts"] = {str(lam): true_count(spectrum, lam) for lam in args.count_at}
    return {"outputs": outputs, "timings": timings, "metrics": metrics}


def cmd_metrics(args, seed, out_dir):
    timings, outputs = {}, {}
    metrics = {}
    t0 = time.perf_counter()
    if args.me:
        basis = np.loadtxt(args.me[0], delimiter=",")
        ref = np.loadtxt(args.me[1], delimiter=",")
        metrics["mean_energy"] = mean_energy(np.atleast_2d(basis), np.atleast_2d(ref))
    if args.ari:
        parts = []
        for path in args.ari:
            data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64)
            labels = data[:, 1] if data.ndim == 2 else data
            parts.append(Partition(labels, int(labels.max()) + 1))
        metrics["adjusted_rand"] = adjusted_rand(parts[0], parts[1])
    if args.modularity:
        graph = load_graph(args.modularity[0])
        data = np.loadtxt(args.modularity[1], delimiter=",", skiprows=1, dtype=np.int64)
        labels = data[:, 1] if data.ndim == 2 else data
        metrics["modularity"] = modularity(graph, Partition(labels, int(labels.max()) + 1))
    if not metrics:
        raise UsageError("metrics needs at least one of --me / --ari / --modularity")
    timings["metrics"] = time.perf_counter() - t0
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return {"outputs": outputs, "timings": timings, "metrics": metrics}


def _bench_sizes(n_min, n_max):
    sizes = []
    n = max(n_min, 2)
    while n < n_max:
        sizes.append(int(n))
        n *= 2
    sizes.append(int(n_max))
    return sizes


def cmd_bench(args, seed, out_dir):
    timings, outputs = {}, {}
    rows = []
    header = "regime,backend,n,k,m,wall_time_s,spmm_columns,svd_cost_units,lambda_iterations"
    t_all = time.perf_counter()
    if args.regime == "kernels":
        from scipy import sparse

        from .filters import apply_filter, gaussian_signals, ideal_lowpass_coeffs
        from .graphs import sensor_graph

        for n in _bench_sizes(args.n_min, args.n_max):
            graph = sensor_graph(n, seed=seed)
            op = laplacian(graph, args.variant)
            filt = ideal_lowpass_coeffs(0.1 * op.lambda_max_bound, op.lambda_max_bound,
                                        args.m)
            x = gaussian_signals(n, args.k, seed)
            for backend in kernels.available_backends():
                kernels.warmup(backend)
                best = np.inf
                for _ in range(args.repeats):
                    t0 = time.perf_counter()
                    apply_filter(op, filt, x, backend=backend)
                    best = min(best, time.perf_counter() - t0)
                rows.append((args.regime, backend, n, args.k, args.m, best,
                             args.m * args.k, 0, 0))
    else:
        for n in _bench_sizes(args.n_min, args.n_max):
            if args.regime == "logN":
                k = max(2, int(round(np.log(n))))
            elif args.regime == "sqrtN":
                k = max(2, int(round(np.sqrt(n))))
            elif args.regime == "fixedk":
                k = args.k
            else:
                raise UsageError(f"unknown bench regime {args.regime!r}")
            from .graphs import sensor_graph

            graph = sensor_graph(n, seed=seed)
            op = laplacian(graph, args.variant)
            kernels.warmup()
            t0 = time.perf_counter()
            approx = approximate_eigenspace(op, k, m=args.m, seed=seed,
                                            lambda_method="fast")
            wall = time.perf_counter() - t0
            diag = approx.diagnostics
            rows.append((args.regime, kernels.default_backend(), n, k, args.m, wall,
                         diag["spmm_columns"], diag["svd_cost_units"],
                         diag["lambda_iterations"]))
    timings["bench"] = time.perf_counter() - t_all

    bench_path = out_dir / "bench.csv"
    with open(bench_path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(
                f"{v:.6f}" if isinstance(v, float) else str(v) for v in row) + "\n")
    outputs["bench"] = bench_path
    return {"outputs": outputs, "timings": timings}


def _add_synth_options(sub, as_kind=False):
    if as_kind:
        sub.add_argument("--kind", required=True,
                         choices=["sbm", "sensor", "swissroll", "cycle"])
    else:
        sub.add_argument("--synth", choices=["sbm", "sensor", "swissroll", "cycle"],
                         help="generate the input graph instead of reading a file")
        sub.add_argument("--input", help="graph file (Matrix Market or edge list)")
    sub.add_argument("--n", type=int, help="number of vertices / points")
    sub.add_argument("--classes", type=int, default=10, help="SBM class count")
    sub.add_argument("--eps", type=float, default=0.1, help="SBM q/p ratio")
    sub.add_argument("--s", type=float, default=16.0, help="SBM expected mean degree")
    sub.add_argument("--knn", type=int, default=10, help="neighbors for knn graphs")
    sub.add_argument("--kernel", choices=["binary", "gaussian"], default="binary")
    sub.add_argument("--sigma", type=float, default=None,
                     help="gaussian kernel width (default: mean knn-th distance)")
    sub.add_argument("--a", type=float, default=1.0, help="swissroll angle start (x pi)")
    sub.add_argument("--b", type=float, default=4.0, help="swissroll angle end (x pi)")


def _add_pipeline_options(sub):
    sub.add_argument("--k", type=int, required=True, help="eigenspace dimension")
    sub.add_argument("--d", type=int, default=None, help="random signals (default k)")
    sub.add_argument("--m", type=int, default=500, help="polynomial order")
    sub.add_argument("--variant", choices=["normalized", "combinatorial"],
                     default="normalized")
    sub.add_argument("--lambda-mode", dest="lambda_mode", default="fast",
                     choices=["fast", "dichotomy", "exact-oracle", "fixed"])
    sub.add_argument("--lambda-k", dest="lambda_k", type=float, default=None,
                     help="cutoff value for --lambda-mode fixed")
    sub.add_argument("--max-iter", dest="max_iter", type=int, default=10)
    sub.add_argument("--tol-eps", dest="tol_eps", type=float, default=0.1)
    sub.add_argument("--damping", choices=["jackson", "none"], default="jackson")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specsketch",
        description="Spectral sketching of sparse graph Laplacians",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out-dir", dest="out_dir", type=Path, default=Path("."))
    common.add_argument("--threads", type=int, default=None,
                        help="cap the numba worker count")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic graph")
    _add_synth_options(p, as_kind=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("embed", parents=[common], help="compute the spectral embedding")
    _add_synth_options(p)
    _add_pipeline_options(p)
    p.add_argument("--dump-coeffs", dest="dump_coeffs", action="store_true",
                   help="also write the filter coefficients CSV")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("lambdak", parents=[common], help="estimate the k-th eigenvalue")
    _add_synth_options(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--method", choices=["fast", "dichotomy"], default="fast")
    p.add_argument("--variant", choices=["normalized", "combinatorial"],
                   default="normalized")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=10)
    p.add_argument("--tol-eps", dest="tol_eps", type=float, default=0.1)
    p.set_defaults(func=cmd_lambdak)

    p = sub.add_parser("cluster", parents=[common],
                       help="embed and assign clusters with k-means")
    _add_synth_options(p)
    _add_pipeline_options(p)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--truth", help="ground-truth labels CSV (vertex_id,label)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("oracle", parents=[common],
                       help="dense eigendecomposition (small N debugging)")
    _add_synth_options(p)
    p.add_argument("--variant", choices=["normalized", "combinatorial"],
                   default="normalized")
    p.add_argument("--count-at", dest="count_at", type=float, nargs="*", default=None,
                   help="report exact eigenvalue counts at these thresholds")
    p.add_argument("--save-basis", dest="save_basis", type=int, default=None,
                   help="write the first K eigenvectors to basis.csv")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("metrics", parents=[common], help="score embeddings/partitions")
    p.add_argument("--me", nargs=2, metavar=("BASIS", "REFERENCE"),
                   help="mean projection energy between two bases (CSV)")
    p.add_argument("--ari", nargs=2, metavar=("PART_A", "PART_B"),
                   help="adjusted Rand index between two partitions (CSV)")
    p.add_argument("--modularity", nargs=2, metavar=("GRAPH", "PARTITION"))
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", parents=[common], help="counter-based benchmarks")
    p.add_argument("--regime", choices=["logN", "sqrtN", "fixedk", "kernels"],
                   required=True)
    p.add_argument("--n-min", dest="n_min", type=int, default=1000)
    p.add_argument("--n-max", dest="n_max", type=int, required=True)
    p.add_argument("--k", type=int, default=25)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--variant", choices=["normalized", "combinatorial"],
                   default="normalized")
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    seed = args.seed
    if seed is None:
        seed = 0
        if args.command != "bench":
            print("warning: --seed not given, defaulting to 0", file=sys.stderr)
    if args.threads:
        kernels.set_num_threads(args.threads)

    out_dir = args.out_dir
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        result = args.func(args, seed, out_dir)
        _write_report(out_dir, args.command, _config_dict(args),
                      result.get("timings", {}), result.get("outputs", {}),
                      counters=result.get("counters"),
                      lambda_k=result.get("lambda_k"),
                      metrics=result.get("metrics"))
        return 0
    except UsageError as exc:
        print(json.dumps({"error": str(exc), "type": "usage"}), file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(json.dumps({"error": str(exc), "type": "usage",
                          "class": type(exc).__name__}), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures become exit 1
        print(json.dumps({"error": str(exc), "type": "runtime",
                          "class": type(exc).__name__}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
