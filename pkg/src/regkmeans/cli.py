"""Command-line interface: regkmeans {gen,solve,round,certify,sweep,baseline,eval,clique}.

Exit codes: 0 ok, 1 usage or I/O error, 2 solver did not converge,
3 certificate failed.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import io as rio
from .baseline import LloydConfig, lloyd_result
from .certificate import certify_sdp, lp_certificate, thresholds
from .cliquered import Graph, build_instance, brute_force_reg_1means, clique_decision, clique_threshold, has_clique, read_edge_list
from .core import NOISE, Clustering, clustering_distance, pair_metrics, restrict
from .relax import LP, SDP, SolverConfig, build_problem, solve
from .rounding import RoundingConfig, assign_noise_to_clusters, round_solution
from .synth import BallModelConfig, NoiseConfig, PackingError, RejectionError, generate

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED, EXIT_CERT_FAILED = 0, 1, 2, 3

log = logging.getLogger("regkmeans")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _lambda_arg(s):
    try:
        v = rio.parse_float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid lambda {s!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("lambda must be positive (or inf)")
    return v


def _kind_arg(s):
    t = s.upper()
    if t not in (SDP, LP):
        raise argparse.ArgumentTypeError("kind must be SDP or LP")
    return t


# gen

BALL_KEYS = {f.name for f in fields(BallModelConfig)}
NOISE_KEYS = {f.name for f in fields(NoiseConfig)}


def _load_config(path):
    if path is None:
        return {}
    try:
        doc = rio.read_json(path)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    flat = {}
    for key, val in doc.items():
        if key == "ball" and isinstance(val, dict):
            flat.update(val)
        elif key == "noise" and isinstance(val, dict):
            flat.update({("noise_seed" if k == "seed" else k): v for k, v in val.items()})
        else:
            flat[key] = val
    unknown = set(flat) - BALL_KEYS - NOISE_KEYS - {"noise_seed"}
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return flat


def cmd_gen(args):
    if args.idx_images:
        return _gen_idx(args)
    conf = _load_config(args.config)
    for key in BALL_KEYS | NOISE_KEYS | {"noise_seed"}:
        v = getattr(args, key, None)
        if v is not None:
            conf[key] = v
    missing = [k for k in ("k", "d", "n", "delta") if k not in conf]
    if missing:
        raise ValueError(f"missing instance parameters: {', '.join(missing)}")
    ball = BallModelConfig(**{k: conf[k] for k in BALL_KEYS if k in conf})
    nkw = {k: conf[k] for k in NOISE_KEYS if k in conf and k != "seed"}
    if "noise_seed" in conf:
        nkw["seed"] = conf["noise_seed"]
    noise = NoiseConfig(**nkw)
    inst = generate(ball, noise)
    st = inst.stats()
    eps = len(inst.truth.near_noise) / st.n_min
    extra = {"thresholds": thresholds(st, eps, ball.delta, ball.d, ball.k).to_dict()}
    rio.save_bundle(args.out, inst, extra)
    log.info("wrote %d points to %s", inst.points.n_points, args.out)
    return EXIT_OK


def _gen_idx(args):
    X = rio.load_idx(args.idx_images).points
    seed = 0 if args.seed is None else args.seed
    doc = {"source": "idx", "images": os.path.basename(args.idx_images), "seed": seed}
    rng = np.random.default_rng(seed)
    labels = None
    if args.idx_labels:
        y = rio.load_idx_labels(args.idx_labels)
        if y.shape[0] != X.shape[0]:
            raise ValueError("IDX image and label files disagree on the number of items")
        doc["labels_file"] = os.path.basename(args.idx_labels)
        classes = [int(c) for c in args.classes.split(",")] if args.classes else sorted(set(y.tolist()))
        doc["classes"] = classes
        pool = np.flatnonzero(np.isin(y, classes))
        labels = y
    else:
        if args.classes:
            raise ValueError("--classes needs --idx-labels")
        pool = np.arange(X.shape[0])
    if args.sample is not None and args.sample < pool.size:
        pool = np.sort(rng.choice(pool, size=args.sample, replace=False))
    doc["indices"] = pool.tolist()
    os.makedirs(args.out, exist_ok=True)
    rio.write_points_csv(os.path.join(args.out, "points.csv"), X[pool])
    doc["points"] = "points.csv"
    if labels is not None:
        pos = {c: i for i, c in enumerate(doc["classes"])}
        lab = np.array([pos[int(v)] for v in labels[pool]], dtype=np.int64)
        rio.write_labels_csv(os.path.join(args.out, "labels.csv"), Clustering(lab, len(pos)))
        doc["labels"] = "labels.csv"
    rio.write_json(os.path.join(args.out, "dataset.json"), doc)
    return EXIT_OK


# solve / round / certify

def _solver_config(args):
    return SolverConfig(tol=args.tol, max_iter=args.max_iter)


def _write_matrix(path_base, M, fmt):
    if fmt == "npy":
        path = path_base + ".npy"
        np.save(path, M)
    else:
        path = path_base + ".csv"
        rio.write_points_csv(path, np.atleast_2d(M) if M.ndim == 2 else M[:, None])
    return os.path.basename(path)


def _read_matrix(path):
    if path.endswith(".npy"):
        return np.load(path)
    return np.loadtxt(path, delimiter=",", ndmin=2)


def cmd_solve(args):
    pts = rio.read_points_csv(args.points, args.skip_header)
    problem = build_problem(pts, args.k, args.lam, args.kind)
    sol = solve(problem, _solver_config(args))
    os.makedirs(args.out, exist_ok=True)
    doc = {
        "kind": args.kind, "k": args.k, "lambda": args.lam, "n_points": pts.n_points,
        "objective": sol.objective, "lower_bound": sol.lower_bound,
        "primal_residual": sol.primal_residual, "iterations": sol.iterations, "converged": sol.converged,
        "Z": _write_matrix(os.path.join(args.out, "Z"), sol.Z, args.format),
        "y": None if sol.y is None else _write_matrix(os.path.join(args.out, "y"), sol.y, args.format),
    }
    rio.write_json(os.path.join(args.out, "solution.json"), doc)
    if not sol.converged:
        log.warning("solver stopped after %d iterations without converging", sol.iterations)
        return EXIT_NONCONVERGED
    return EXIT_OK


def load_solution(path):
    if os.path.isdir(path):
        path = os.path.join(path, "solution.json")
    doc = rio.read_json(path)
    base = os.path.dirname(path)
    Z = _read_matrix(os.path.join(base, doc["Z"]))
    y = None if doc.get("y") is None else _read_matrix(os.path.join(base, doc["y"])).ravel()
    return doc, Z, y


def cmd_round(args):
    pts = rio.read_points_csv(args.points, args.skip_header)
    doc, Z, y = load_solution(args.solution)
    k = args.k if args.k is not None else int(doc["k"])
    cfg = RoundingConfig(threshold=args.threshold, restarts=args.restarts, seed=args.seed)
    result = round_solution(pts, Z, y, k, cfg)
    if args.reassign_noise:
        result = assign_noise_to_clusters(pts, result)
    rio.write_labels_csv(args.out, result)
    return EXIT_OK


def cmd_certify(args):
    pts = rio.read_points_csv(args.points, args.skip_header)
    part = rio.read_labels_csv(args.labels, args.k)
    if part.n_points != pts.n_points:
        raise ValueError(f"{args.labels} has {part.n_points} labels for {pts.n_points} points")
    if args.kind == LP:
        rep = lp_certificate(pts, part, args.lam)
    else:
        rep = certify_sdp(pts, part, args.lam, args.delta)
    doc = rep.to_dict()
    doc.update({"kind": args.kind, "lambda": args.lam, "k": part.k})
    if args.out:
        rio.write_json(args.out, doc)
    else:
        sys.stdout.write(rio.dumps_json(doc))
    if args.dump_matrices and args.kind == SDP:
        from .certificate import construct_dual_regularised

        cert = construct_dual_regularised(pts, part, args.lam)
        os.makedirs(args.dump_matrices, exist_ok=True)
        np.save(os.path.join(args.dump_matrices, "Q.npy"), cert.Q)
        np.save(os.path.join(args.dump_matrices, "beta.npy"), cert.beta)
    return EXIT_OK if rep.certified else EXIT_CERT_FAILED


# sweep

SWEEP_PARAMS = BALL_KEYS - {"seed"} | NOISE_KEYS - {"seed"} | {"lambda", "tol", "max_iter", "threshold", "restarts"}


@dataclass
class SweepSpec:
    axis1: tuple  # (name, values)
    axis2: tuple
    fixed: dict = field(default_factory=dict)
    trials: int = 50
    seed: int = 0
    kind: str = SDP
    gamma: object = None  # None = exact recovery; a float switches to delta <= gamma

    def __post_init__(self):
        for name, vals in (self.axis1, self.axis2):
            if name is not None and name not in SWEEP_PARAMS:
                raise ValueError(f"unknown sweep parameter {name!r}")
            if len(vals) == 0:
                raise ValueError("sweep grids must be nonempty")
        bad = set(self.fixed) - SWEEP_PARAMS
        if bad:
            raise ValueError(f"unknown fixed parameters {sorted(bad)}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.kind not in (SDP, LP):
            raise ValueError("kind must be SDP or LP")

    def cells(self):
        out = []
        for v1 in self.axis1[1]:
            for v2 in self.axis2[1]:
                params = dict(self.fixed)
                params[self.axis1[0]] = v1
                if self.axis2[0] is not None:
                    params[self.axis2[0]] = v2
                out.append((v1, v2, params))
        return out


def _parse_value(s):
    t = str(s).strip()
    if t.lower() in ("auto",):
        return "auto"
    v = rio.parse_float(t)
    return int(v) if v.is_integer() and "." not in t and "e" not in t.lower() else v


def _parse_axis(s):
    if "=" not in s:
        raise ValueError(f"axis must look like name=v1,v2,...; got {s!r}")
    name, vals = s.split("=", 1)
    return name.strip(), [_parse_value(v) for v in vals.split(",") if v.strip()]


def _resolve_lambda(params):
    lam = params.get("lambda", "auto")
    has_noise = any(params.get(k, 0) for k in ("m_far", "m_near", "m_uniform"))
    if lam == "auto":
        return (params["delta"] - 1.0) ** 2 + 1.0 if has_noise else math.inf
    return float(lam)


def trial_seeds(master, cell, trial):
    state = np.random.SeedSequence([int(master), int(cell), int(trial)]).generate_state(2)
    return int(state[0]), int(state[1])


def run_trial(params, kind, master, cell, trial, gamma=None, timings=False):
    """One sweep trial. Never raises; infeasible configurations record a failure."""
    t0 = time.perf_counter()
    ball_seed, noise_seed = trial_seeds(master, cell, trial)
    rec = {"cell": cell, "trial": trial, "seeds": {"ball": ball_seed, "noise": noise_seed},
           "recovered": False, "delta_distance": None, "f1": None, "objective": None,
           "converged": None, "verdict": None, "error": None}
    try:
        ball = BallModelConfig(k=int(params["k"]), d=int(params["d"]), n=int(params["n"]),
                               delta=float(params["delta"]), seed=ball_seed)
        nkw = {k: params[k] for k in NOISE_KEYS - {"seed"} if k in params}
        for key in ("m_far", "m_near", "m_uniform"):
            if key in nkw:
                nkw[key] = int(nkw[key])
        noise = NoiseConfig(seed=noise_seed, **nkw)
        lam = _resolve_lambda(params)
        rec["lambda"] = lam
        inst = generate(ball, noise)
        pts, truth = inst.points, inst.truth
        planted = inst.planted_labels()
        prob = build_problem(pts, ball.k, lam, kind)
        sol = solve(prob, SolverConfig(tol=float(params.get("tol", 1e-5)),
                                       max_iter=int(params.get("max_iter", 20000))))
        rec["objective"] = sol.objective
        rec["converged"] = sol.converged
        rcfg = RoundingConfig(threshold=float(params.get("threshold", 0.5)),
                              restarts=int(params.get("restarts", 10)), seed=0)
        rounded = round_solution(pts, sol.Z, sol.y, ball.k, rcfg)

        core_idx = np.sort(np.concatenate([truth.structured, truth.far_noise]))
        dist = clustering_distance(restrict(rounded, core_idx), restrict(planted, core_idx))
        rec["delta_distance"] = dist
        ok = dist == 0.0 if gamma is None else dist <= gamma
        if gamma is None and len(truth.uniform_noise) == 0:
            ok &= np.array_equal(np.flatnonzero(rounded.labels == NOISE), np.sort(truth.far_noise))
        rec["recovered"] = bool(ok)

        s = truth.structured
        ref = restrict(planted, s)
        cand = restrict(assign_noise_to_clusters(pts, rounded), s)
        rec["f1"] = pair_metrics(cand, ref).f1

        try:
            if kind == LP:
                rep = lp_certificate(pts, planted, lam)
            else:
                rep = certify_sdp(pts, planted, lam)
            rec["verdict"] = rep.verdict
        except ValueError as exc:
            rec["verdict"] = f"N/A({exc})"
    except (ValueError, ArithmeticError, PackingError, RejectionError, np.linalg.LinAlgError) as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
    if timings:
        rec["wall_time"] = time.perf_counter() - t0
    return rec


def _run_trial_tuple(job):
    return run_trial(*job)


def run_sweep(spec: SweepSpec, jobs=1, timings=False):
    """Returns (grid rows, per-trial records). Order is independent of jobs."""
    cells = spec.cells()
    work = [(params, spec.kind, spec.seed, ci, t, spec.gamma, timings)
            for ci, (_, _, params) in enumerate(cells) for t in range(spec.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_run_trial_tuple, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        records = [_run_trial_tuple(w) for w in work]
    records.sort(key=lambda r: (r["cell"], r["trial"]))
    rows = []
    for ci, (v1, v2, params) in enumerate(cells):
        recs = [r for r in records if r["cell"] == ci]
        succ = sum(r["recovered"] for r in recs)
        for r in recs:
            r["config"] = params
        rows.append({"axis1": v1, "axis2": v2, "trials": len(recs), "successes": succ,
                     "fraction": succ / len(recs), "errors": sum(r["error"] is not None for r in recs)})
    return rows, records


def _spec_from_args(args):
    doc = {}
    if args.spec:
        try:
            doc = rio.read_json(args.spec)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{args.spec}: malformed JSON ({exc})") from None

    def axis(key, flag):
        if flag:
            return _parse_axis(flag)
        a = doc.get(key)
        if a is None:
            return (None, [None])
        return (a["name"], list(a["values"]))

    fixed = dict(doc.get("fixed", {}))
    for item in args.fixed or []:
        name, val = item.split("=", 1) if "=" in item else (item, "")
        fixed[name.strip()] = _parse_value(val)
    a1 = axis("axis1", args.axis1)
    if a1[0] is None:
        raise ValueError("sweep needs at least axis1")
    rule = doc.get("success_rule", {}) or {}
    return SweepSpec(
        axis1=a1, axis2=axis("axis2", args.axis2), fixed=fixed,
        trials=args.trials if args.trials is not None else int(doc.get("trials", 50)),
        seed=args.seed if args.seed is not None else int(doc.get("seed", 0)),
        kind=args.kind or doc.get("kind", SDP).upper(),
        gamma=args.gamma if args.gamma is not None else rule.get("gamma"),
    )


def _fmt_cell(v):
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def cmd_sweep(args):
    spec = _spec_from_args(args)
    for key in ("k", "d", "n", "delta"):
        if key not in spec.fixed and key not in (spec.axis1[0], spec.axis2[0]):
            raise ValueError(f"sweep parameter {key!r} is neither fixed nor an axis")
    rows, records = run_sweep(spec, jobs=args.jobs, timings=args.timings)
    os.makedirs(args.out, exist_ok=True)
    n1 = spec.axis1[0]
    n2 = spec.axis2[0] or "axis2"
    with open(os.path.join(args.out, "grid.csv"), "w") as fh:
        fh.write(f"{n1},{n2},trials,successes,fraction,errors\n")
        for r in rows:
            fh.write(f"{_fmt_cell(r['axis1'])},{_fmt_cell(r['axis2'])},{r['trials']},"
                     f"{r['successes']},{r['fraction']!r},{r['errors']}\n")
    grid = np.array([r["fraction"] for r in rows]).reshape(len(spec.axis1[1]), len(spec.axis2[1]))
    rio.write_pgm(os.path.join(args.out, "heatmap.ppm"), grid)
    with open(os.path.join(args.out, "runs.jsonl"), "w") as fh:
        for r in records:
            fh.write(json.dumps(rio._clean(r), sort_keys=True) + "\n")
    snapshot = asdict(spec)
    rio.write_json(os.path.join(args.out, "sweep.json"), snapshot)
    return EXIT_OK


# baseline / eval / clique

def cmd_baseline(args):
    pts = rio.read_points_csv(args.points, args.skip_header)
    res = lloyd_result(pts, LloydConfig(k=args.k, restarts=args.restarts, max_iter=args.max_iter, seed=args.seed))
    rio.write_labels_csv(args.out, res.clustering)
    if args.report:
        rio.write_json(args.report, {"cost": res.cost, "best_restart": res.best_restart,
                                     "restart_costs": res.restart_costs, "k": args.k, "seed": args.seed})
    return EXIT_OK


def _noise_as_cluster(c: Clustering):
    lab = np.where(c.labels == NOISE, c.k, c.labels)
    return Clustering(lab, c.k + 1)


def cmd_eval(args):
    cand = rio.read_labels_csv(args.candidate)
    ref = rio.read_labels_csv(args.reference)
    if cand.n_points != ref.n_points:
        raise ValueError("candidate and reference label different numbers of points")
    doc = {"n_points": cand.n_points, "delta": clustering_distance(cand, ref)}
    noisy = cand.noise_mask.any() or ref.noise_mask.any()
    if noisy and args.points:
        pts = rio.read_points_csv(args.points, args.skip_header)
        pc, pr = assign_noise_to_clusters(pts, cand), assign_noise_to_clusters(pts, ref)
        doc["noise_handling"] = "reassigned"
    else:
        pc, pr = _noise_as_cluster(cand), _noise_as_cluster(ref)
        doc["noise_handling"] = "as_cluster" if noisy else "none"
    m = pair_metrics(pc, pr)
    doc.update({"precision": m.precision, "recall": m.recall, "f1": m.f1})
    if args.out:
        rio.write_json(args.out, doc)
    else:
        sys.stdout.write(rio.dumps_json(doc))
    return EXIT_OK


def cmd_clique(args):
    g = read_edge_list(args.graph)
    inst = build_instance(g)
    cost, subset = brute_force_reg_1means(inst.points, inst.lambda0)
    doc = {"n_vertices": g.n_vertices, "n_edges": len(g.edges), "lambda0": inst.lambda0,
           "optimum": cost, "optimal_subset": [i + 1 for i in subset]}
    if args.q is not None:
        doc["q"] = args.q
        doc["threshold"] = clique_threshold(g.n_vertices, args.q, inst.lambda0)
        doc["decision"] = clique_decision(g, args.q)
        if args.check:
            doc["exhaustive"] = has_clique(g, args.q)
    else:
        best = max(q for q in range(1, g.n_vertices + 1) if clique_decision(g, q))
        doc["max_clique_size"] = best
        if args.check:
            doc["exhaustive"] = max(q for q in range(1, g.n_vertices + 1) if has_clique(g, q))
    if args.out:
        rio.write_json(args.out, doc)
    else:
        sys.stdout.write(rio.dumps_json(doc))
    return EXIT_OK


def build_parser():
    p = _Parser(prog="regkmeans", description="Regularised k-means via convex relaxations.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a planted instance bundle or ingest an IDX dataset")
    g.add_argument("--config", help="JSON config; flags override its values")
    for name, typ in (("k", int), ("d", int), ("n", int), ("delta", float), ("seed", int),
                      ("m_far", int), ("far_factor", float), ("m_near", int), ("margin_alpha", float),
                      ("m_uniform", int), ("box_scale", float), ("noise_seed", int)):
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)
    g.add_argument("--idx-images")
    g.add_argument("--idx-labels")
    g.add_argument("--classes", help="comma-separated class ids to keep (IDX mode)")
    g.add_argument("--sample", type=int, help="subsample size (IDX mode)")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    def points_args(sp):
        sp.add_argument("--points", required=True)
        sp.add_argument("--skip-header", action="store_true")

    s = sub.add_parser("solve", help="solve the SDP or LP relaxation")
    points_args(s)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=_lambda_arg, required=True, help="penalty, or inf")
    s.add_argument("--kind", type=_kind_arg, default=SDP)
    s.add_argument("--tol", type=float, default=1e-5)
    s.add_argument("--max-iter", type=int, default=20000)
    s.add_argument("--format", choices=("csv", "npy"), default="csv")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("round", help="round a relaxed solution to labels")
    points_args(r)
    r.add_argument("--solution", required=True, help="solution directory or solution.json")
    r.add_argument("--k", type=int)
    r.add_argument("--threshold", type=float, default=0.5)
    r.add_argument("--restarts", type=int, default=10)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--reassign-noise", action="store_true")
    r.add_argument("--out", required=True, help="labels CSV")
    r.set_defaults(func=cmd_round)

    c = sub.add_parser("certify", help="check the dual certificate of a labelled partition")
    points_args(c)
    c.add_argument("--labels", required=True)
    c.add_argument("--k", type=int)
    c.add_argument("--lambda", dest="lam", type=_lambda_arg, default=math.inf)
    c.add_argument("--kind", type=_kind_arg, default=SDP)
    c.add_argument("--delta", type=float, help="also check lambda against the window for this separation")
    c.add_argument("--dump-matrices", help="directory for Q.npy and beta.npy (SDP)")
    c.add_argument("--out", help="report JSON (stdout if omitted)")
    c.set_defaults(func=cmd_certify)

    w = sub.add_parser("sweep", help="success-probability grid over two parameters")
    w.add_argument("--spec", help="JSON sweep spec; flags override")
    w.add_argument("--axis1", help="name=v1,v2,...")
    w.add_argument("--axis2", help="name=v1,v2,...")
    w.add_argument("--fixed", action="append", help="name=value (repeatable)")
    w.add_argument("--trials", type=int)
    w.add_argument("--seed", type=int)
    w.add_argument("--kind", type=_kind_arg)
    w.add_argument("--gamma", type=float, help="count Delta <= gamma as success instead of exact recovery")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--timings", action="store_true", help="record wall time per trial (not reproducible)")
    w.add_argument("--out", required=True, help="output directory")
    w.set_defaults(func=cmd_sweep)

    b = sub.add_parser("baseline", help="k-means++ with Lloyd iterations")
    points_args(b)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--restarts", type=int, default=10)
    b.add_argument("--max-iter", type=int, default=300)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--report", help="optional JSON with costs")
    b.add_argument("--out", required=True, help="labels CSV")
    b.set_defaults(func=cmd_baseline)

    e = sub.add_parser("eval", help="compare two label files")
    e.add_argument("--candidate", required=True)
    e.add_argument("--reference", required=True)
    e.add_argument("--points", help="points CSV, used to reassign noise before pair metrics")
    e.add_argument("--skip-header", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    q = sub.add_parser("clique", help="decide clique existence through the 1-means reduction")
    q.add_argument("--graph", required=True, help="edge list: 'n m' then 1-indexed 'u v' lines")
    q.add_argument("--q", type=int)
    q.add_argument("--check", action="store_true", help="also run exhaustive clique search")
    q.add_argument("--out")
    q.set_defaults(func=cmd_clique)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, IndexError, PackingError, RejectionError) as exc:
        print(f"regkmeans {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
