import json
import struct

import numpy as np
import pytest

from chi3 import __version__, export
from chi3.sde import TrajectoryEnsemble


def test_csv_roundtrip(tmp_path):
    meta = export.metadata(seed=3, params={"a0": 1.5}, model="hm")
    cols = {"omega_bar": np.linspace(0, 1, 5), "g": np.array([0.1, -2e-17, 3.0, 1 / 3, 0])}
    path = export.write_csv(tmp_path / "x.csv", ("omega_bar", "g"), cols, meta)
    m, data = export.read_csv(path)
    assert m["version"] == __version__ and m["seed"] == 3
    assert m["schema_version"] == export.SCHEMA_VERSION
    assert m["params"] == {"a0": 1.5}
    for k in cols:
        assert np.array_equal(data[k], cols[k])    # repr floats round-trip exactly
    with pytest.raises(ValueError):
        export.write_csv(tmp_path / "y.csv", ("omega_bar", "g"),
                         {"omega_bar": [1, 2], "g": [1]}, meta)


def test_json_is_deterministic_and_handles_complex(tmp_path):
    rec = {"z": 1 + 2j, "arr": np.arange(3.0), "inf": float("inf"), "n": np.int64(4)}
    a = export.write_json(tmp_path / "a.json", rec, export.metadata(seed=1))
    b = export.write_json(tmp_path / "b.json", rec, export.metadata(seed=1))
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    assert d["z"] == {"re": 1.0, "im": 2.0} and d["arr"] == [0.0, 1.0, 2.0]
    assert d["inf"] == "inf" and d["n"] == 4 and d["meta"]["tool"] == "chi3"


def test_svg_is_well_formed(tmp_path):
    import xml.etree.ElementTree as ET
    x = np.linspace(-2, 2, 30)
    p = export.write_svg(tmp_path / "s.svg", x, {"a": x ** 2, "b": -x}, title="t",
                         meta={"seed": 0})
    root = ET.parse(p).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polyline")) == 2
    export.write_svg(tmp_path / "l.svg", x, {"a": np.exp(x)}, logy=True)
    export.write_svg(tmp_path / "c.svg", x, {"flat": np.zeros_like(x)})


def test_dump_raw_layout(tmp_path):
    x = (np.arange(12.0) + 1j * np.arange(12.0)[::-1]).reshape(2, 3, 2)
    ens = TrajectoryEnsemble(samples=x, dt=0.01, dt_sample=0.1, t_max=0.3, rng_seed=9,
                             n_traj=2)
    raw = export.dump_raw(tmp_path / "e.raw", ens).read_bytes()
    (n,) = struct.unpack("<I", raw[:4])
    header = raw[4:4 + n].decode().split()
    assert header[:3] == ["chi3-raw", "2", "3"] and header[-1] == "9"
    body = np.frombuffer(raw[4 + n:], dtype="<f8").reshape(2, 3, 2, 2)
    assert np.array_equal(body[..., 0] + 1j * body[..., 1], x)
