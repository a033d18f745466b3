"""Sample files and run manifests.

Samples are CSV with one row per draw: ``theta_0 .. theta_{d-1}`` and, for
weighted posteriors, a final ``weight`` column.  Reals are written with 17
significant digits, which round-trips every double.  The manifest is a
sidecar JSON object; its wall-clock timestamp sits in its own field so the
rest of the file is reproducible.
"""

from __future__ import annotations

import io
import json
import platform
from datetime import datetime, timezone
from pathlib import Path
from typing import Union

import numpy as np

from .types import DrawBatch, UnweightedPosterior, WeightedPosterior

FLOAT_FMT = "%.17g"


def _header(dim: int, weighted: bool) -> list[str]:
    cols = [f"theta_{j}" for j in range(dim)]
    return cols + ["weight"] if weighted else cols


def samples_to_csv(post: Union[WeightedPosterior, UnweightedPosterior]) -> str:
    if isinstance(post, WeightedPosterior):
        table = np.column_stack([post.draws, post.weights])
        header = _header(post.batch.dim, True)
    else:
        table = post.draws
        header = _header(post.source.dim, False)
    buf = io.StringIO()
    np.savetxt(buf, table, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")
    return buf.getvalue().replace("\r\n", "\n")


def samples_to_json(post: Union[WeightedPosterior, UnweightedPosterior]) -> str:
    if isinstance(post, WeightedPosterior):
        table = np.column_stack([post.draws, post.weights])
        header = _header(post.batch.dim, True)
    else:
        table = post.draws
        header = _header(post.source.dim, False)
    return json.dumps({"columns": header, "rows": table.tolist()}) + "\n"


def write_samples(path, post) -> Path:
    """Write ``post`` as CSV, or as JSON when ``path`` ends in ``.json``."""
    path = Path(path)
    text = samples_to_json(post) if path.suffix == ".json" else samples_to_csv(post)
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def read_samples(path) -> Union[WeightedPosterior, UnweightedPosterior]:
    """Rebuild the posterior measure stored by :func:`write_samples`.

    Weighted files come back with the stored weights bit for bit (their
    log-likelihoods are set to ``log(weight)``); unweighted files come back
    as a bag over their own rows.
    """
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        header = doc["columns"]
        table = np.asarray(doc["rows"], dtype=float).reshape(-1, len(header))
    else:
        with path.open(encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if header and header[-1] == "weight":
        draws, w = table[:, :-1], table[:, -1]
        with np.errstate(divide="ignore"):
            ll = np.log(w)
        return WeightedPosterior(DrawBatch(draws), w, ll, 0.0)
    batch = DrawBatch(table)
    return UnweightedPosterior(batch, np.arange(batch.n))


def run_manifest(config: dict, extra: dict | None = None) -> dict:
    from . import __version__

    manifest = {
        "config": config,
        "versions": {
            "priorsample": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    if extra:
        manifest.update(extra)
    manifest["created_at"] = datetime.now(timezone.utc).isoformat()
    return manifest


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=float) + "\n", encoding="utf-8")
    return path
