import struct

import numpy as np
import pytest

from regkmeans import io as rio
from regkmeans.core import NOISE, Clustering, PointSet
from regkmeans.synth import BallModelConfig, NoiseConfig, generate


def _write_idx(path, magic, dims, payload):
    # independent writer: big-endian header then raw bytes
    with open(path, "wb") as fh:
        fh.write(struct.pack(">I", magic))
        for d in dims:
            fh.write(struct.pack(">I", d))
        fh.write(bytes(payload))


def test_points_round_trip(tmp_path, rng):
    X = rng.normal(size=(7, 3)) * 1e3
    p = tmp_path / "p.csv"
    rio.write_points_csv(p, PointSet(X))
    assert np.array_equal(rio.read_points_csv(p).points, X)


def test_points_header(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("x,y\n1,2\n3,4\n")
    with pytest.raises(ValueError):
        rio.read_points_csv(p)
    assert rio.read_points_csv(p, skip_header=True).points.tolist() == [[1, 2], [3, 4]]


def test_ragged_rows(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(ValueError):
        rio.read_points_csv(p)


def test_labels_round_trip(tmp_path):
    c = Clustering([0, NOISE, 2, 1], 3)
    p = tmp_path / "l.csv"
    rio.write_labels_csv(p, c)
    assert p.read_text() == "1\nnoise\n3\n2\n"
    back = rio.read_labels_csv(p)
    assert back.k == 3 and np.array_equal(back.labels, c.labels)


def test_labels_reject_zero(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("0\n1\n")
    with pytest.raises(ValueError):
        rio.read_labels_csv(p)


def test_json_special_floats():
    text = rio.dumps_json({"a": float("inf"), "b": np.int64(3), "c": np.array([1.5])})
    assert '"inf"' in text and '"b": 3' in text


def test_idx_round_trip(tmp_path):
    imgs = tmp_path / "img.idx"
    _write_idx(imgs, 0x803, (2, 2, 3), [0, 255, 51, 102, 0, 0, 1, 2, 3, 4, 5, 255])
    ps = rio.load_idx(imgs)
    assert ps.points.shape == (2, 6)
    assert ps.points[0].tolist() == [0.0, 1.0, 0.2, 0.4, 0.0, 0.0]
    assert ps.points[1, -1] == 1.0
    labs = tmp_path / "lab.idx"
    _write_idx(labs, 0x801, (2,), [7, 3])
    assert rio.load_idx_labels(labs).tolist() == [7, 3]


def test_idx_errors(tmp_path):
    bad = tmp_path / "bad.idx"
    _write_idx(bad, 0x801, (2, 2, 2), [0] * 8)
    with pytest.raises(ValueError, match="magic"):
        rio.load_idx(bad)
    short = tmp_path / "short.idx"
    _write_idx(short, 0x803, (2, 2, 2), [0] * 5)
    with pytest.raises(ValueError, match="truncated"):
        rio.load_idx(short)


def test_idx_zero_images(tmp_path):
    p = tmp_path / "z.idx"
    _write_idx(p, 0x803, (0, 28, 28), [])
    ps = rio.load_idx(p)
    assert ps.n_points == 0 and ps.dim == 784


def test_pgm(tmp_path):
    p = tmp_path / "h.ppm"
    rio.write_pgm(p, [[0.0, 1.0], [0.5, 0.25]], cell=2)
    raw = p.read_bytes()
    assert raw.startswith(b"P5\n4 4\n255\n")
    img = rio.read_pgm(p)
    assert img[0, 0] == 0 and img[0, 3] == 255 and img[2, 0] == 128 and img[3, 3] == 64


def test_bundle_round_trip(tmp_path):
    inst = generate(BallModelConfig(k=2, d=3, n=5, delta=3.0, seed=2), NoiseConfig(m_far=2, m_uniform=1))
    rio.save_bundle(tmp_path / "b", inst)
    back = rio.load_bundle(tmp_path / "b")
    assert np.array_equal(back.points.points, inst.points.points)
    assert np.array_equal(back.truth.far_noise, inst.truth.far_noise)
    assert back.config == inst.config and back.noise == inst.noise
    assert np.array_equal(back.planted_labels().labels, inst.planted_labels().labels)


def test_bundle_k1(tmp_path):
    inst = generate(BallModelConfig(k=1, d=2, n=1, delta=1.0))
    doc = rio.save_bundle(tmp_path / "b", inst)
    assert doc["audit"] == "passed"
    assert rio.load_bundle(tmp_path / "b" / "instance.json").points.n_points == 1
