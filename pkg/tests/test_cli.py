import json
import struct

import numpy as np
import pytest

from regkmeans import io as rio
from regkmeans.cli import SweepSpec, main, run_sweep, trial_seeds
from regkmeans.core import Clustering, NOISE

from conftest import pair_oracle


def run(*argv):
    with pytest.raises(SystemExit) as exc:
        main(list(argv))
    return exc.value.code


@pytest.fixture
def bundle(tmp_path):
    out = tmp_path / "inst"
    assert main(["gen", "--k", "2", "--d", "6", "--n", "10", "--delta", "4", "--m-far", "3",
                 "--seed", "3", "--out", str(out)]) == 0
    return out


def test_gen_bundle(bundle):
    doc = json.loads((bundle / "instance.json").read_text())
    assert doc["audit"] == "passed" and doc["points"] == "points.csv"
    assert "lambda_window" in doc["thresholds"]
    inst = rio.load_bundle(bundle)
    assert inst.points.n_points == 23
    labels = rio.read_labels_csv(bundle / "labels.csv")
    assert (labels.labels == NOISE).sum() == 3


def test_gen_k1_and_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"ball": {"k": 1, "d": 2, "n": 1, "delta": 1.0}, "noise": {"seed": 5}}))
    assert main(["gen", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert rio.load_bundle(tmp_path / "b").noise.seed == 5


def test_gen_bad_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["gen", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 1
    cfg.write_text(json.dumps({"k": 2, "bogus": 1}))
    assert main(["gen", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 1


def test_gen_reproducible(tmp_path):
    args = ["gen", "--k", "3", "--d", "4", "--n", "5", "--delta", "3", "--m-uniform", "4"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    for name in ("points.csv", "labels.csv", "instance.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_pipeline(bundle, tmp_path):
    pts = str(bundle / "points.csv")
    lam = str((4 - 1) ** 2 + 1)
    assert main(["solve", "--points", pts, "--k", "2", "--lambda", lam, "--out", str(tmp_path / "s")]) == 0
    doc = json.loads((tmp_path / "s" / "solution.json").read_text())
    assert doc["converged"] and doc["Z"] == "Z.csv"
    assert main(["round", "--points", pts, "--solution", str(tmp_path / "s"), "--out", str(tmp_path / "r.csv")]) == 0
    assert main(["certify", "--points", pts, "--labels", str(tmp_path / "r.csv"), "--lambda", lam,
                 "--delta", "4", "--out", str(tmp_path / "rep.json")]) == 0
    assert json.loads((tmp_path / "rep.json").read_text())["verdict"] == "CERTIFIED"
    assert main(["eval", "--candidate", str(tmp_path / "r.csv"), "--reference", str(bundle / "labels.csv"),
                 "--out", str(tmp_path / "m.json")]) == 0
    m = json.loads((tmp_path / "m.json").read_text())
    assert m["delta"] == 0.0 and m["f1"] == 1.0


def test_solve_npy_and_inf(bundle, tmp_path):
    pts = str(bundle / "points.csv")
    assert main(["solve", "--points", pts, "--k", "2", "--lambda", "inf", "--format", "npy", "--kind", "lp",
                 "--out", str(tmp_path / "s")]) == 0
    doc = json.loads((tmp_path / "s" / "solution.json").read_text())
    assert doc["y"] is None and doc["lambda"] == "inf"
    assert np.load(tmp_path / "s" / "Z.npy").shape == (23, 23)


def test_solve_requires_lambda(bundle, tmp_path):
    assert run("solve", "--points", str(bundle / "points.csv"), "--k", "2", "--out", str(tmp_path / "s")) == 1
    assert run("solve", "--points", str(bundle / "points.csv"), "--k", "2", "--lambda", "-1",
               "--out", str(tmp_path / "s")) == 1


def test_nonconvergence_exit(bundle, tmp_path):
    code = main(["solve", "--points", str(bundle / "points.csv"), "--k", "2", "--lambda", "10",
                 "--max-iter", "2", "--out", str(tmp_path / "s")])
    assert code == 2
    assert json.loads((tmp_path / "s" / "solution.json").read_text())["converged"] is False


def test_certify_failure_exit(bundle, tmp_path):
    lab = rio.read_labels_csv(bundle / "labels.csv").labels.copy()
    lab[0] = 1 - lab[0]
    rio.write_labels_csv(tmp_path / "bad.csv", Clustering(lab, 2))
    code = main(["certify", "--points", str(bundle / "points.csv"), "--labels", str(tmp_path / "bad.csv"),
                 "--lambda", "10", "--out", str(tmp_path / "rep.json")])
    assert code == 3
    assert json.loads((tmp_path / "rep.json").read_text())["verdict"].startswith("FAILED(")


def test_certify_lp(bundle, tmp_path):
    code = main(["certify", "--points", str(bundle / "points.csv"), "--labels", str(bundle / "labels.csv"),
                 "--kind", "LP", "--lambda", "10", "--out", str(tmp_path / "rep.json")])
    assert code in (0, 3)
    assert "verdict" in json.loads((tmp_path / "rep.json").read_text())


def test_baseline(bundle, tmp_path):
    assert main(["baseline", "--points", str(bundle / "points.csv"), "--k", "2", "--out", str(tmp_path / "b.csv"),
                 "--report", str(tmp_path / "b.json")]) == 0
    assert rio.read_labels_csv(tmp_path / "b.csv").n_points == 23


def test_eval_scrambled(tmp_path, rng):
    a, b = rng.integers(0, 3, 15), rng.integers(0, 3, 15)
    a[:3] = b[:3] = [0, 1, 2]
    rio.write_labels_csv(tmp_path / "a.csv", Clustering(a, 3))
    rio.write_labels_csv(tmp_path / "b.csv", Clustering(b, 3))
    main(["eval", "--candidate", str(tmp_path / "a.csv"), "--reference", str(tmp_path / "b.csv"),
          "--out", str(tmp_path / "m.json")])
    m = json.loads((tmp_path / "m.json").read_text())
    ta, tb, both, total = pair_oracle(a, b)
    assert m["precision"] == both / ta and m["recall"] == both / tb
    assert m["delta"] == (ta + tb - 2 * both) / total


def test_eval_missing_file(tmp_path):
    assert main(["eval", "--candidate", str(tmp_path / "nope.csv"), "--reference", str(tmp_path / "x.csv")]) == 1


def test_clique(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("4 4\n1 2\n2 3\n1 3\n3 4\n")
    assert main(["clique", "--graph", str(g), "--check"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["max_clique_size"] == 3 == doc["exhaustive"]
    assert main(["clique", "--graph", str(g), "--q", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["decision"] is False


def test_unknown_command():
    assert run("frobnicate") == 1


def _idx(path, magic, dims, payload):
    with open(path, "wb") as fh:
        fh.write(struct.pack(">I" + "I" * len(dims), magic, *dims))
        fh.write(bytes(payload))


def test_gen_idx(tmp_path, rng):
    n = 40
    _idx(tmp_path / "img", 0x803, (n, 4, 4), rng.integers(0, 256, n * 16).tolist())
    _idx(tmp_path / "lab", 0x801, (n,), rng.integers(0, 10, n).tolist())
    out = tmp_path / "ds"
    assert main(["gen", "--idx-images", str(tmp_path / "img"), "--idx-labels", str(tmp_path / "lab"),
                 "--classes", "1,3,5", "--sample", "5", "--seed", "2", "--out", str(out)]) == 0
    doc = json.loads((out / "dataset.json").read_text())
    assert doc["classes"] == [1, 3, 5]
    pts = rio.read_points_csv(out / "points.csv")
    assert pts.dim == 16 and pts.n_points == len(doc["indices"]) <= 5
    assert pts.points.max() <= 1.0


def test_gen_idx_bad_magic(tmp_path):
    _idx(tmp_path / "img", 0x801, (2,), [0, 0])
    assert main(["gen", "--idx-images", str(tmp_path / "img"), "--out", str(tmp_path / "o")]) == 1


class TestSweep:
    def test_single_cell_certified(self):
        spec = SweepSpec(axis1=("delta", [4.0]), axis2=(None, [None]),
                         fixed={"k": 2, "d": 6, "n": 10, "m_far": 3}, trials=1, seed=0)
        rows, recs = run_sweep(spec)
        assert rows[0]["fraction"] == 1.0
        assert recs[0]["verdict"] == "CERTIFIED"

    def test_low_delta(self):
        spec = SweepSpec(axis1=("delta", [0.5]), axis2=(None, [None]),
                         fixed={"k": 3, "d": 4, "n": 8}, trials=4, seed=1)
        rows, _ = run_sweep(spec)
        assert rows[0]["fraction"] <= 0.25

    def test_seeds_independent(self):
        seeds = {trial_seeds(0, c, t) for c in range(3) for t in range(5)}
        assert len(seeds) == 15

    def test_validation(self):
        with pytest.raises(ValueError):
            SweepSpec(axis1=("delta", []), axis2=(None, [None]))
        with pytest.raises(ValueError):
            SweepSpec(axis1=("bogus", [1]), axis2=(None, [None]))
        with pytest.raises(ValueError):
            SweepSpec(axis1=("delta", [1]), axis2=(None, [None]), trials=0)

    def test_infeasible_cell_recorded(self):
        spec = SweepSpec(axis1=("n", [1]), axis2=(None, [None]), fixed={"k": 3, "d": 2, "delta": 3.0, "m_far": 1,
                                                                        "threshold": 0.0}, trials=1)
        rows, recs = run_sweep(spec)
        assert rows[0]["fraction"] == 0.0 and rows[0]["errors"] == 1
        assert "empty structured set" in recs[0]["error"]

    def test_cli_outputs_reproducible(self, tmp_path):
        args = ["sweep", "--axis1", "delta=1.0,4.0", "--axis2", "lambda=auto,inf", "--fixed", "k=2",
                "--fixed", "d=4", "--fixed", "n=6", "--fixed", "m_far=2", "--trials", "2", "--seed", "7"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
        for name in ("grid.csv", "heatmap.ppm", "runs.jsonl", "sweep.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        lines = (tmp_path / "a" / "grid.csv").read_text().splitlines()
        assert len(lines) == 1 + 4
        assert len((tmp_path / "a" / "runs.jsonl").read_text().splitlines()) == 8
        img = rio.read_pgm(tmp_path / "a" / "heatmap.ppm")
        fr = [float(line.split(",")[4]) for line in lines[1:]]
        assert img[0, 0] == round(fr[0] * 255) and img[-1, -1] == round(fr[3] * 255)

    def test_spec_file(self, tmp_path):
        spec = {"axis1": {"name": "delta", "values": [4.0]}, "fixed": {"k": 2, "d": 4, "n": 6},
                "trials": 1, "kind": "LP", "success_rule": {"gamma": 0.1}}
        (tmp_path / "s.json").write_text(json.dumps(spec))
        assert main(["sweep", "--spec", str(tmp_path / "s.json"), "--out", str(tmp_path / "o")]) == 0
        assert json.loads((tmp_path / "o" / "sweep.json").read_text())["gamma"] == 0.1

    def test_timings_flag(self, tmp_path):
        args = ["sweep", "--axis1", "delta=4", "--fixed", "k=1", "--fixed", "d=2", "--fixed", "n=3",
                "--trials", "1", "--timings", "--out", str(tmp_path / "o")]
        assert main(args) == 0
        rec = json.loads((tmp_path / "o" / "runs.jsonl").read_text())
        assert rec["wall_time"] >= 0
