"""Input files and argument lists for exercising every CLI subcommand."""

import io
import json

import numpy as np

from dtmi.cli import run
from dtmi.pipelines.classify import make_blobs

BSC_CONFIG = {
    "state_space": {"labels": ["a", "b"], "prior": [0.5, 0.5]},
    "encoder": {"codewords": [[0, 1, 1], [1, 0, 0]], "alphabet_size": 2, "repeat": 2},
    "channel": {"type": "bsc", "crossover": 0.1},
    "decoder": {"kind": "ml", "epsilon": 0.1},
}


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def write_matrix(path, m):
    path.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in np.atleast_2d(m)) + "\n")
    return str(path)


def invoke(*argv):
    buf = io.StringIO()
    code = run([str(a) for a in argv], stdout=buf)
    return code, buf.getvalue()


def make_inputs(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.standard_normal(400)
    y = x + 0.5 * rng.standard_normal(400)
    ds = make_blobs(m=3, per_class=20, n_features=5, seed=1)
    rows = ["label," + ",".join(f"f{j}" for j in range(5))]
    rows += [lab + "," + ",".join(repr(float(v)) for v in f) for lab, f in zip(ds.labels, ds.features)]
    (tmp_path / "data.csv").write_text("\n".join(rows) + "\n")
    csi = 20 + rng.standard_normal((4, 40))
    return {
        "x": write_matrix(tmp_path / "x.csv", x[:, None]),
        "y": write_matrix(tmp_path / "y.csv", y[:, None]),
        "cfg": write_json(tmp_path / "cfg.json", BSC_CONFIG),
        "typ": write_json(tmp_path / "typ.json", {**BSC_CONFIG, "encoder": {
            "codewords": [[0, 1], [1, 0]], "alphabet_size": 2, "repeat": 100}}),
        "aoa": write_json(tmp_path / "aoa.json", {"sweep": {"axis": "snr_db", "values": [-10, 0, 10, 20]}}),
        "data": str(tmp_path / "data.csv"),
        "csi": write_matrix(tmp_path / "csi.csv", csi),
        "rssi": write_matrix(tmp_path / "rssi.csv", [[0.0, 0.0], [0.0, 0.0], [9.0, 9.0]]),
        "base": write_matrix(tmp_path / "base.csv", [[0.0], [0.0], [0.0]]),
    }


def commands(f):
    return {
        "mi-estimate": ["mi-estimate", "--x", f["x"], "--y", f["y"]],
        "bounds": ["bounds", "--config", f["cfg"]],
        "simulate": ["simulate", "--config", f["cfg"], "--trials", 5000],
        "typicality": ["typicality", "--config", f["typ"], "--trials", 2000],
        "aoa-sweep": ["aoa-sweep", "--config", f["aoa"], "--trials", 200],
        "classify": ["classify", "--data", f["data"], "--folds", 4],
        "detect": ["detect", "--mode", "cov", "--data", f["csi"], "--window", 20],
        "correlate": ["correlate", "--a", f["x"], "--b", f["y"]],
    }
