"""Text file formats: calibration scans, model files, reports and loss curves.

Floats are written with ``repr`` (shortest round-tripping decimal), so every
format reloads bit-exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .array_model import ArrayGeometry
from .errors import InvalidArgumentError
from .mlp import MlpModel, param_shapes
from .signal_synth import ScanDataset

MODEL_TAG = "beamdoa-mlp v1"
SCAN_HEADER = ["alpha_deg", "beam_index", "beam_angle_deg", "power"]
REPORT_HEADER = ["b", "snr_db", "method", "mean_abs_error_deg", "trials", "seed"]
LOSS_HEADER = ["iter", "lr", "loss"]


class FormatError(InvalidArgumentError):
    """A file does not follow its expected layout."""


def _f(x: float) -> str:
    return repr(float(x))


def write_scan(scan: ScanDataset, path) -> None:
    g = scan.geom
    with open(path, "w", newline="") as fh:
        fh.write(f"# snr_db={_f(scan.snr_db)}\n")
        fh.write(f"# seed={int(scan.seed)}\n")
        fh.write(f"# num_elements={g.num_elements}\n")
        fh.write(f"# spacing={_f(g.element_spacing)}\n")
        fh.write(f"# scan_min={_f(g.scan_min)}\n")
        fh.write(f"# scan_max={_f(g.scan_max)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for i, alpha in enumerate(scan.alpha_grid):
            for j, beta in enumerate(scan.full_beam_angles):
                w.writerow([_f(alpha), j, _f(beta), _f(scan.powers[i, j])])


def read_scan(path) -> ScanDataset:
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        text = fh.read()
    if not text.endswith("\n"):
        raise FormatError("file does not end with a newline (truncated?)")
    lines = text.split("\n")
    body = []
    for line in lines:
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if not sep:
                raise FormatError(f"malformed comment line {line!r}")
            meta[key.strip()] = value.strip()
        elif line:
            body.append(line)
    if not body or next(csv.reader([body[0]])) != SCAN_HEADER:
        raise FormatError(f"missing header {','.join(SCAN_HEADER)}")
    for lineno, fields in enumerate(csv.reader(body[1:]), start=2):
        if len(fields) != 4:
            raise FormatError(f"data row {lineno}: expected 4 fields, got {len(fields)}")
        try:
            rows.append((float(fields[0]), int(fields[1]), float(fields[2]), float(fields[3])))
        except ValueError as exc:
            raise FormatError(f"data row {lineno}: {exc}") from None
    for key in ("snr_db", "seed", "num_elements", "spacing"):
        if key not in meta:
            raise FormatError(f"missing '# {key}=' metadata line")
    try:
        geom = ArrayGeometry(
            num_elements=int(meta["num_elements"]),
            element_spacing=float(meta["spacing"]),
            scan_min=float(meta.get("scan_min", -45.0)),
            scan_max=float(meta.get("scan_max", 45.0)),
        )
        snr, seed = float(meta["snr_db"]), int(meta["seed"])
    except ValueError as exc:
        raise FormatError(f"bad metadata: {exc}") from None

    alphas = sorted({r[0] for r in rows})
    beams = sorted({(r[1], r[2]) for r in rows})
    if len(rows) != len(alphas) * len(beams) or not rows:
        raise FormatError(
            f"expected a full grid of {len(alphas)}x{len(beams)} cells, found {len(rows)} rows"
        )
    if [b[0] for b in beams] != list(range(len(beams))):
        raise FormatError("beam indices must be 0..n-1 with one angle each")
    a_index = {a: i for i, a in enumerate(alphas)}
    powers = np.full((len(alphas), len(beams)), np.nan)
    for alpha, j, _, power in rows:
        powers[a_index[alpha], j] = power
    if np.isnan(powers).any():
        raise FormatError("duplicate or missing grid cells")
    return ScanDataset(np.array(alphas), np.array([b[1] for b in beams]), powers, snr, seed, geom)


def write_model(model: MlpModel, path) -> None:
    """Line format: tag, ``B``, ``H``, placement, input_norm, then ``param NAME ROWS COLS`` blocks."""
    lines = [MODEL_TAG, f"B {model.input_dim}", f"H {model.hidden_dim}", f"placement {model.ln_placement}",
             f"input_norm {model.input_norm}"]
    for name in param_shapes(model.input_dim, model.hidden_dim, model.ln_placement):
        arr = model.params[name]
        mat = arr.reshape(arr.shape[0], -1)
        lines.append(f"param {name} {mat.shape[0]} {mat.shape[1]}")
        lines.extend(" ".join(_f(x) for x in row) for row in mat)
    Path(path).write_text("\n".join(lines) + "\n")


def read_model(path) -> MlpModel:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != MODEL_TAG:
        raise FormatError(f"not a model file (expected first line {MODEL_TAG!r})")
    try:
        b = int(lines[1].split()[1]) if lines[1].startswith("B ") else None
        h = int(lines[2].split()[1]) if lines[2].startswith("H ") else None
        placement = lines[3].split()[1] if lines[3].startswith("placement ") else None
        norm = lines[4].split()[1] if lines[4].startswith("input_norm ") else None
    except (IndexError, ValueError):
        raise FormatError("malformed model header") from None
    if b is None or h is None or placement is None or norm is None:
        raise FormatError("malformed model header")
    shapes = param_shapes(b, h, placement)
    params = {}
    pos = 5
    while pos < len(lines):
        parts = lines[pos].split()
        if len(parts) != 4 or parts[0] != "param":
            raise FormatError(f"line {pos + 1}: expected a param header")
        try:
            name, rows, cols = parts[1], int(parts[2]), int(parts[3])
        except ValueError:
            raise FormatError(f"line {pos + 1}: bad param header") from None
        block = lines[pos + 1: pos + 1 + rows]
        if len(block) != rows:
            raise FormatError(f"param {name}: truncated block")
        try:
            mat = np.array([[float(t) for t in row.split()] for row in block])
        except ValueError as exc:
            raise FormatError(f"param {name}: {exc}") from None
        if mat.shape != (rows, cols) or name not in shapes:
            raise FormatError(f"param {name}: bad shape or unknown name")
        params[name] = mat.reshape(shapes[name])
        pos += 1 + rows
    return MlpModel(b, h, params, placement, norm)


def write_report(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in records:
            w.writerow([r.b, _f(r.snr_db), r.method, _f(r.mean_abs_error_deg), r.trials, r.seed])


def write_loss_history(lrs, losses, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOSS_HEADER)
        for i, (lr, loss) in enumerate(zip(lrs, losses)):
            w.writerow([i, _f(lr), _f(loss)])
