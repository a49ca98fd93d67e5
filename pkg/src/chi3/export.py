"""CSV / JSON / SVG writers.  Every file carries a metadata block with the
package version, seed, schema version and the resolved parameters; no
timestamps, so reruns are byte-identical."""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA_VERSION = 1
SPECTRUM_COLUMNS = ("omega_bar", "g_amplitude", "g_phase", "g_opt_minus", "g_opt_plus")
Y_COLUMNS = ("omega_bar", "Y_amplitude", "Y_phase")


def metadata(*, seed=None, params=None, **extra) -> dict:
    meta = {"tool": "chi3", "version": __version__, "schema_version": SCHEMA_VERSION,
            "seed": seed, "params": params or {}}
    meta.update(extra)
    return meta


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, data: dict, meta: dict) -> Path:
    """Columns in the given order, one ``# key: json`` comment line per
    metadata entry above the header."""
    path = Path(path)
    n = {len(np.atleast_1d(data[c])) for c in columns}
    if len(n) != 1:
        raise ValueError("columns differ in length")
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]
    lines.append(",".join(columns))
    cols = [np.atleast_1d(data[c]) for c in columns]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_csv`: ``(meta, columns)``."""
    meta, rows, header = {}, [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    arr = np.array(rows).reshape(-1, len(header))
    return meta, {h: arr[:, i] for i, h in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path, record: dict, meta: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps({"meta": _jsonable(meta), **_jsonable(record)},
                               indent=2, sort_keys=True) + "\n")
    return path


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#17becf", "#7f7f7f")


def write_svg(path, x, series: dict, *, title: str = "", xlabel: str = "omega_bar",
              ylabel: str = "g", reference: float | None = 0.0, logy: bool = False,
              meta: dict | None = None, width: int = 640, height: int = 400) -> Path:
    """Polyline plot of ``series`` (label -> y values) against ``x``."""
    path = Path(path)
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    if logy:
        ys = {k: np.log10(np.clip(np.abs(v), 1e-300, None)) for k, v in ys.items()}
        ylabel = f"log10 |{ylabel}|"
    allv = np.concatenate([v[np.isfinite(v)] for v in ys.values()] or [np.zeros(1)])
    if reference is not None and not logy:
        allv = np.append(allv, reference)
    lo, hi = float(allv.min()), float(allv.max())
    if hi == lo:
        lo, hi = lo - 1, hi + 1
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    ml, mr, mt, mb = 70, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    xr = (x.min(), x.max()) if x.max() > x.min() else (x.min() - 1, x.max() + 1)

    def px(v):
        return ml + (v - xr[0]) / (xr[1] - xr[0]) * pw

    def py(v):
        return mt + (hi - v) / (hi - lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">']
    if meta:
        out.append(f"<desc>{json.dumps(_jsonable(meta), sort_keys=True)}</desc>")
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
               'stroke="black"/>')
    for frac in np.linspace(0, 1, 5):
        xv = xr[0] + frac * (xr[1] - xr[0])
        yv = lo + frac * (hi - lo)
        out.append(f'<text x="{px(xv):.1f}" y="{mt + ph + 15}" '
                   f'text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{ml - 5}" y="{py(yv) + 4:.1f}" '
                   f'text-anchor="end">{yv:.3g}</text>')
    if reference is not None and not logy and lo <= reference <= hi:
        out.append(f'<line x1="{ml}" x2="{ml + pw}" y1="{py(reference):.2f}" '
                   f'y2="{py(reference):.2f}" stroke="gray" stroke-dasharray="4 3"/>')
    for i, (label, y) in enumerate(ys.items()):
        col = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y)
                       if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" '
                   f'points="{pts}"/>')
        out.append(f'<text x="{ml + pw - 5}" y="{mt + 14 + 14 * i}" fill="{col}" '
                   f'text-anchor="end">{label}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 8}" text-anchor="middle">'
               f"{xlabel}</text>")
    out.append(f'<text x="14" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {mt + ph / 2})">{ylabel}</text>')
    if title:
        out.append(f'<text x="{ml + pw / 2}" y="18" text-anchor="middle">{title}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")
    return path


def dump_raw(path, ens) -> Path:
    """Raw trajectories as little-endian float64 (re, im) pairs after a
    header line ``n_traj n_samples dt t_max seed``."""
    path = Path(path)
    x = np.asarray(ens.samples, dtype=complex)
    header = (f"chi3-raw {ens.n_traj} {x.shape[1]} {ens.dt_sample!r} "
              f"{ens.t_max!r} {ens.rng_seed}\n").encode()
    body = np.empty(x.shape + (2,), dtype="<f8")
    body[..., 0], body[..., 1] = x.real, x.imag
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(body.tobytes())
    return path
