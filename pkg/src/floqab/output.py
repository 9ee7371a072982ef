"""File emission: CSV spectra, JSON sidecars and the run manifest.

CSV is the data contract; JSON sidecars carry metadata; SVG plots are
conveniences.  All files are written atomically (temp file + rename) and
the manifest records a checksum for every artifact it accompanies.
"""

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

__all__ = [
    "atomic_write_text",
    "write_spectrum_csv",
    "write_json",
    "write_matrix_csv",
    "write_manifest",
    "block_dump_dict",
]

_FLOAT_FMT = "%.12g"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def atomic_write_text(path: str, text: str):
    """Write text to ``path`` via a temp file in the same directory plus
    ``os.replace``, so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_spectrum_csv(path: str, grid, stderr=None):
    """Spectrum as ``omega_cm1,value[,stderr]`` rows."""
    lines = ["omega_cm1,value" + (",stderr" if stderr is not None else "")]
    if stderr is None:
        for w, v in zip(grid.omega, grid.values):
            lines.append(f"{_FLOAT_FMT % w},{_FLOAT_FMT % v}")
    else:
        for w, v, s in zip(grid.omega, grid.values, stderr):
            lines.append(f"{_FLOAT_FMT % w},{_FLOAT_FMT % v},{_FLOAT_FMT % s}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: str, obj):
    atomic_write_text(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_matrix_csv(path: str, row_name: str, row_values, omega, matrix):
    """2-D signal (rows x frequency grid) with the grid in the header."""
    header = row_name + "," + ",".join(_FLOAT_FMT % w for w in omega)
    lines = [header]
    for rv, row in zip(row_values, matrix):
        lines.append(
            (_FLOAT_FMT % rv) + "," + ",".join(_FLOAT_FMT % v for v in row)
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def _sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: str, scenario_text: str, seed, command: str, output_names):
    """Run manifest alongside the outputs: tool version, scenario hash, seed,
    timestamp and a checksum per emitted file."""
    from . import __version__

    manifest = {
        "tool": "floqab",
        "version": __version__,
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "scenario_sha256": hashlib.sha256(scenario_text.encode()).hexdigest(),
        "seed": seed,
        "outputs": {
            name: _sha256_file(os.path.join(out_dir, name)) for name in sorted(output_names)
        },
    }
    write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return manifest


def block_dump_dict(block) -> dict:
    """Floquet block as a JSON-ready structure (labels + Re/Im entries)."""
    entries = block.matrix.entries
    return {
        "block_kind": block.block_kind,
        "omega_drive_cm1": block.omega_drive,
        "photon_index": block.photon_index,
        "n_max": block.n_max,
        "labels": [str(label) for label in block.matrix.labels],
        "re": entries.real.tolist(),
        "im": entries.imag.tolist(),
    }
