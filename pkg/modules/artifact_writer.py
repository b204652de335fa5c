"""Writes run manifests and result tables."""

import hashlib
import json
import logging
from datetime import datetime
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import pandas as pd

from models.experiment import ExperimentConfig, ModeResult, RunManifest

logger = logging.getLogger(__name__)

PACKAGE_NAME = "gp-trajectories"
MANIFEST_NAME = "manifest.json"
HASH_PREFIX = "# manifest_sha256="


def code_version() -> str:
    try:
        return version(PACKAGE_NAME)
    except PackageNotFoundError:
        return "0+unknown"


def provenance_hash(config: ExperimentConfig, code: str | None = None) -> str:
    """sha256 over the canonical JSON of the config and the code version."""
    payload = {
        "config": config.model_dump(mode="json"),
        "code_version": code or code_version(),
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def write_table(df: pd.DataFrame, path: Path, digest: str, fmt: str = "csv") -> Path:
    """
    Write one table.

    CSV files start with a ``# manifest_sha256=<hash>`` line followed by the header;
    JSON files hold ``{"manifest_sha256": ..., "rows": [...]}``.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(path, "w", newline="") as f:
            f.write(f"{HASH_PREFIX}{digest}\n")
            df.to_csv(f, index=False, float_format="%.12g")
    elif fmt == "json":
        rows = json.loads(df.to_json(orient="records", double_precision=12))
        with open(path, "w") as f:
            json.dump({"manifest_sha256": digest, "rows": rows}, f, indent=2)
    else:
        raise ValueError(f"unknown table format {fmt!r}")
    return path


def read_table(path: Path) -> tuple[str, pd.DataFrame]:
    """Read a CSV table back; returns (hash, table)."""
    with open(path) as f:
        first = f.readline().strip()
        if not first.startswith(HASH_PREFIX):
            raise ValueError(f"{path} does not start with a manifest hash line")
        return first[len(HASH_PREFIX) :], pd.read_csv(f)


def write_artifacts(
    config: ExperimentConfig,
    result: ModeResult,
    started_at: datetime,
    wall_time_s: float,
    workers: int,
) -> RunManifest:
    """
    Write every table of a mode result plus the JSON manifest.

    Returns:
        The manifest that was written
    """
    out_dir = Path(config.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    code = code_version()
    digest = provenance_hash(config, code)

    written = []
    for name, table in result.tables.items():
        path = write_table(table, out_dir / f"{name}.{config.output.format}", digest, config.output.format)
        written.append(path.name)
        logger.info(f"wrote {path} ({len(table)} rows)")

    manifest = RunManifest(
        mode=config.mode,
        config=config.model_dump(mode="json"),
        seed=config.params.seed,
        code_version=code,
        provenance_hash=digest,
        started_at=started_at.isoformat(),
        wall_time_s=wall_time_s,
        workers=workers,
        mean_jumps=result.mean_jumps,
        n_total=result.n_total,
        n_excluded=result.n_excluded,
        summary=result.summary,
        tables=written,
    )
    manifest_path = out_dir / MANIFEST_NAME
    manifest_path.write_text(manifest.model_dump_json(indent=2))
    logger.info(f"wrote {manifest_path}")
    return manifest
