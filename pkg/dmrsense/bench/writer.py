"""Result file writing module"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from dmrsense import __version__
from dmrsense.bench.sweep import SweepResult
from dmrsense.config.settings import OfdmParams
from dmrsense.sensing.crlb import CrlbReport
from dmrsense.sensing.estimator import SensingEstimate
from dmrsense.waveform.ofdm import SampleStream, write_samples
from dmrsense.waveform.refsig import ResourceGrid, write_grid_csv

logger = logging.getLogger(__name__)

SWEEP_HEADER = [
    "axis_value",
    "rmse_range_m",
    "rmse_velocity_mps",
    "root_crlb_range_m",
    "root_crlb_velocity_mps",
    "fail_fraction",
    "trials",
]
COMPARE_HEADER = ["signal"] + SWEEP_HEADER
CRLB_HEADER = ["snr_db", "root_crlb_range_m", "root_crlb_velocity_mps", "method"]
PROFILE_HEADER = ["bin", "magnitude"]


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def estimate_record(est: SensingEstimate, target, seed: int) -> Dict[str, Any]:
    """Summary record of one simulated trial

    in_window is False when the true target lies outside the unambiguous
    window, so the estimate is an alias.
    """
    return {
        "true_range": target.range_m,
        "est_range": est.range_m,
        "range_index": est.range_index,
        "true_velocity": target.velocity_mps,
        "est_velocity": est.velocity_mps,
        "velocity_index": est.velocity_index,
        "in_window": target.within(est.bounds.r_max, est.bounds.v_max),
        "snr_db": target.snr_db,
        "seed": seed,
    }


class ResultWriter:
    """Writes CSV, JSON and raw result files into one output directory"""

    def __init__(self, out_dir: Union[str, Path] = "."):
        self.out_dir = Path(out_dir)

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def _write_csv(self, name: str, header: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
        path = self._path(name)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(header))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _jsonable(v) for k, v in row.items()})
        logger.info("wrote %s", path)
        return path

    def write_json(self, name: str, record: Mapping[str, Any]) -> Path:
        path = self._path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_jsonable(dict(record)), f, indent=2, sort_keys=False)
            f.write("\n")
        logger.info("wrote %s", path)
        return path

    def write_grid(self, grid: ResourceGrid, name: str = "grid.csv") -> Path:
        path = write_grid_csv(grid, self._path(name))
        logger.info("wrote %s", path)
        return path

    def write_samples(self, stream: SampleStream, name: str = "samples.bin") -> Path:
        path = write_samples(stream, self._path(name))
        logger.info("wrote %s", path)
        return path

    def write_profiles(self, est: SensingEstimate) -> List[Path]:
        """range_profile.csv and doppler_profile.csv as bin,magnitude"""
        return [
            self._write_csv(
                f"{label}_profile.csv",
                PROFILE_HEADER,
                ({"bin": i, "magnitude": float(v)} for i, v in enumerate(profile)),
            )
            for label, profile in (("range", est.range_profile), ("doppler", est.doppler_profile))
        ]

    def write_estimate(self, record: Mapping[str, Any], name: str = "estimate.json") -> Path:
        return self.write_json(name, record)

    def write_sweep(self, result: SweepResult, name: str = "sweep.csv") -> Path:
        return self._write_csv(name, SWEEP_HEADER, (p.as_row() for p in result.points))

    def write_comparison(self, results: Mapping[str, SweepResult], name: str = "compare.csv") -> Path:
        """Both signal curves in one file, interleaved per axis value"""
        rows = []
        by_kind = {kind: result.points for kind, result in results.items()}
        n_points = min(len(points) for points in by_kind.values())
        for i in range(n_points):
            for kind, points in by_kind.items():
                rows.append(dict(signal=kind, **points[i].as_row()))
        return self._write_csv(name, COMPARE_HEADER, rows)

    def write_crlb(self, reports: Iterable[CrlbReport], name: str = "crlb.csv") -> Path:
        rows = (
            {
                "snr_db": round(r.inputs.snr_db, 10),
                "root_crlb_range_m": r.root_crlb_range_m,
                "root_crlb_velocity_mps": r.root_crlb_velocity_mps,
                "method": r.method,
            }
            for r in reports
        )
        return self._write_csv(name, CRLB_HEADER, rows)

    def write_manifest(
        self,
        command: str,
        config: Mapping[str, Any],
        params: Optional[OfdmParams] = None,
        seeds: Optional[Mapping[str, Any]] = None,
        extra: Optional[Mapping[str, Any]] = None,
        name: str = "manifest.json",
    ) -> Path:
        """Record everything needed to reproduce a run"""
        manifest = {
            "dmrsense_version": __version__,
            "command": command,
            "config": dict(config),
            "seeds": dict(seeds or {}),
        }
        if params is not None:
            manifest["derived"] = params.as_dict()
        if extra:
            manifest.update(extra)
        return self.write_json(name, manifest)
