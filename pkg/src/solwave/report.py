"""Artifact emission: schema-stable CSV/JSON files and run manifests.

Outputs are deterministic for a fixed (config, seed) on one platform;
the manifest records content hashes so a run can be re-executed and
compared either bitwise or within per-field tolerances.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path


def emit_csv(path: str | Path, header: list[str], rows: list) -> Path:
    """Write rows with a fixed header; floats use repr (deterministic)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(x) for x in row])
    return path


def _format(x):
    if isinstance(x, float):
        return repr(x)
    if hasattr(x, "item"):
        return repr(x.item())
    return x


def emit_json(path: str | Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    return repr(obj)


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def sha256_of(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(_jsonable(config_dict), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(out_dir: str | Path, config_dict: dict, seed: int,
                   outputs: list[Path]) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "config_hash": config_hash(config_dict),
        "config": _jsonable(config_dict),
        "seed": seed,
        "outputs": {p.name: sha256_of(p) for p in outputs},
    }
    path = out_dir / "manifest.json"
    emit_json(path, manifest)
    return path


class ReproduceMismatch(RuntimeError):
    pass


def compare_csv_tolerant(path_a: str | Path, path_b: str | Path,
                         rel_tol: float = 1e-9) -> list[str]:
    """Field-by-field numeric comparison; returns mismatch descriptions."""
    ha, ra = read_csv(path_a)
    hb, rb = read_csv(path_b)
    problems = []
    if ha != hb:
        problems.append(f"headers differ: {ha} vs {hb}")
        return problems
    if len(ra) != len(rb):
        problems.append(f"row counts differ: {len(ra)} vs {len(rb)}")
        return problems
    for i, (rowa, rowb) in enumerate(zip(ra, rb)):
        for name, xa, xb in zip(ha, rowa, rowb):
            try:
                fa, fb = float(xa), float(xb)
            except ValueError:
                if xa != xb:
                    problems.append(f"row {i} field {name}: {xa!r} != {xb!r}")
                continue
            scale = max(abs(fa), abs(fb), 1e-300)
            if abs(fa - fb) > rel_tol * scale + 1e-300:
                problems.append(
                    f"row {i} field {name}: {fa} vs {fb} "
                    f"(rel {abs(fa-fb)/scale:.2e})")
    return problems


def verify_manifest(manifest_path: str | Path, rerun_dir: str | Path,
                    tolerant: bool = False, rel_tol: float = 1e-9) -> dict:
    """Compare a fresh run directory against a stored manifest."""
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    rerun_dir = Path(rerun_dir)
    report = {"match": True, "details": []}
    for name, digest in manifest["outputs"].items():
        candidate = rerun_dir / name
        if not candidate.exists():
            report["match"] = False
            report["details"].append(f"{name}: missing from rerun")
            continue
        if sha256_of(candidate) == digest:
            report["details"].append(f"{name}: hash match")
            continue
        if tolerant and candidate.suffix == ".csv":
            original = Path(manifest_path).parent / name
            problems = compare_csv_tolerant(original, candidate, rel_tol)
            if not problems:
                report["details"].append(f"{name}: tolerant match")
                continue
            report["details"].extend(f"{name}: {p}" for p in problems[:5])
        report["match"] = False
        report["details"].append(f"{name}: hash mismatch")
    return report
