# apps/schrotbc/writers.py
"""Per-run result files: errors.csv, summary.json, timing.json, snapshots."""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np


def _g17(x: float) -> str:
    return "%.17g" % x


class CompositeWriter:
    def __init__(self, *writers):
        self.writers = writers
        required = {"record_step", "record_snapshot", "finish"}
        for w in writers:
            missing = required - set(dir(w))
            if missing:
                raise AttributeError(f"{w} missing {missing}")

    def close(self) -> None:
        for w in self.writers:
            closer = getattr(w, "close", None)
            if closer is not None:
                closer()

    def __enter__(self) -> "CompositeWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __getattr__(self, name):
        def _wrapper(*args, **kwargs):
            result = getattr(self.writers[0], name)(*args, **kwargs)
            for w in self.writers[1:]:
                getattr(w, name)(*args, **kwargs)
            return result
        return _wrapper


class CsvSeriesWriter:
    """errors.csv: one `t,e,E` row per time level, 17 significant digits."""

    fields = ["t", "e", "E"]

    def __init__(self, directory: str | Path):
        self.path = Path(directory) / "errors.csv"
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fp = self.path.open("w", newline="", encoding="utf-8")
        self._csv = csv.DictWriter(self._fp, fieldnames=self.fields, lineterminator="\n")
        self._csv.writeheader()

    def record_step(self, j: int, t: float, e: float, energy: float) -> None:
        self._csv.writerow({"t": _g17(t), "e": _g17(e), "E": _g17(energy)})

    def record_snapshot(self, *args, **kwargs) -> None:
        return None

    def finish(self, result) -> None:
        self.close()

    def close(self) -> None:
        if not self._fp.closed:
            self._fp.close()


def dump_json(path: Path, payload: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fp:
        json.dump(payload, fp, indent=2, sort_keys=True)
        fp.write("\n")


class SummaryWriter:
    """summary.json (deterministic digest) plus timing.json (wall clock)."""

    def __init__(self, directory: str | Path):
        self.base_dir = Path(directory)

    def record_step(self, *args, **kwargs) -> None:
        return None

    def record_snapshot(self, *args, **kwargs) -> None:
        return None

    def finish(self, result) -> None:
        dump_json(self.base_dir / "summary.json", result.summary())
        dump_json(self.base_dir / "timing.json", {"wall_clock_s": result.wall_clock,
                                                  "steps": int(result.times.size - 1)})


class SnapshotWriter:
    """snap_<j>.bin as little-endian complex64 with a snap_<j>.json sidecar."""

    def __init__(self, directory: str | Path):
        self.log = logging.getLogger("SnapshotWriter")
        self.base_dir = Path(directory)
        self.base_dir.mkdir(parents=True, exist_ok=True)
        self.count = 0

    def record_step(self, *args, **kwargs) -> None:
        return None

    def record_snapshot(self, j: int, t: float, samples: np.ndarray, setup) -> None:
        stem = self.base_dir / f"snap_{j:06d}"
        np.ascontiguousarray(samples, dtype="<c8").tofile(stem.with_suffix(".bin"))
        grids = [setup.domain.J1 * setup.grid.lgl.nodes + setup.domain.center]
        grids += [J * y for J, y in zip(setup.domain.J_perp, setup.grid.perp_nodes())]
        dump_json(stem.with_suffix(".json"), {
            "step": j, "t": t, "shape": list(samples.shape), "dtype": "complex64-le",
            "order": "C", "grids": [g.tolist() for g in grids],
        })
        self.count += 1
        self.log.debug("SNAPSHOT j=%d t=%.4f file=%s", j, t, stem.name)

    def finish(self, result) -> None:
        self.log.info("SNAPSHOTS-DONE count=%d dir=%s", self.count, self.base_dir)


def run_writer(directory: str | Path, snapshots: bool = False) -> CompositeWriter:
    writers = [CsvSeriesWriter(directory), SummaryWriter(directory)]
    if snapshots:
        writers.append(SnapshotWriter(directory))
    return CompositeWriter(*writers)
