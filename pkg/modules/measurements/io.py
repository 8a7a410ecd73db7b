from __future__ import annotations

from pathlib import Path

import numpy as np

from core.errors import FitError

from .rbf import RbfField


# ASCII "n eps" header, then one "c_x c_y [c_z] w" line per center
def write_rbf(field: RbfField, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{len(field.weights)} {field.eps!r}"]
    lines += [" ".join(repr(float(v)) for v in c) + f" {float(w)!r}" for c, w in zip(field.centers, field.weights)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_rbf(path: str | Path) -> RbfField:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"RBF file not found: {path}")
    rows = [ln.split() for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    try:
        n, eps = int(rows[0][0]), float(rows[0][1])
        data = np.array([[float(t) for t in r] for r in rows[1: n + 1]])
    except (ValueError, IndexError) as exc:
        raise FitError(f"malformed RBF file {path}: {exc}") from exc
    if data.shape[0] != n:
        raise FitError(f"RBF file {path} lists {data.shape[0]} centers, header says {n}")
    return RbfField(centers=data[:, :-1], eps=eps, weights=data[:, -1])
