"""Workload ingestion, layer tiling onto the 64x64 array, and report emission.

A workload file is JSON with a single top-level key "layers"; each layer
carries exactly the LayerSpec fields as lowercase keys.  Layers are treated
as integer GEMMs: the reduction dimension is split into 64-row tiles whose
partial sums accumulate host-side, and output features are split by the
array's per-tile weight capacity.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from . import array, golden, numeric, perf
from .errors import ParseError, ValidationError, VerificationFailed

REPORT_VERSION = 1

LAYER_FIELDS = {
    "name": str,
    "out_features": int,
    "in_features": int,
    "batch": int,
    "w_precision": int,
    "a_precision": int,
    "w_signed": bool,
    "a_signed": bool,
}


@dataclass(frozen=True)
class LayerSpec:
    name: str
    out_features: int
    in_features: int
    batch: int
    w_precision: int
    a_precision: int
    w_signed: bool
    a_signed: bool


@dataclass(frozen=True)
class TileSchedule:
    """Coverage of one layer by (output-tile, reduction-tile) pairs."""

    layer: LayerSpec
    weight_capacity: int
    out_tiles: tuple[tuple[int, int], ...]  # (start, count) over out_features
    reduction_tiles: tuple[tuple[int, int], ...]  # (start, count) over in_features

    @property
    def num_tiles(self) -> int:
        return len(self.out_tiles) * len(self.reduction_tiles)


def _validate_layer(index: int, entry: dict) -> LayerSpec:
    if not isinstance(entry, dict):
        raise ValidationError(f"layer {index}: expected an object")
    unknown = set(entry) - set(LAYER_FIELDS)
    if unknown:
        raise ValidationError(
            f"layer {index}: unknown field(s) {sorted(unknown)}"
        )
    missing = set(LAYER_FIELDS) - set(entry)
    if missing:
        raise ValidationError(f"layer {index}: missing field(s) {sorted(missing)}")
    for key, kind in LAYER_FIELDS.items():
        value = entry[key]
        if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            raise ValidationError(f"layer {index}: field '{key}' must be an integer")
        if kind is bool and not isinstance(value, bool):
            raise ValidationError(f"layer {index}: field '{key}' must be true or false")
        if kind is str and not isinstance(value, str):
            raise ValidationError(f"layer {index}: field '{key}' must be a string")
    for key in ("out_features", "in_features", "batch"):
        if entry[key] < 1:
            raise ValidationError(f"layer {index}: field '{key}' must be >= 1")
    for key in ("w_precision", "a_precision"):
        if not numeric.MIN_PRECISION <= entry[key] <= numeric.MAX_PRECISION:
            raise ValidationError(
                f"layer {index}: field '{key}' must be in "
                f"{numeric.MIN_PRECISION}..{numeric.MAX_PRECISION}, got {entry[key]}"
            )
    return LayerSpec(**entry)


def parse_workload(path) -> list[LayerSpec]:
    """Load and validate a workload file; rejects unknown keys."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read workload file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("workload root must be an object")
    unknown = set(doc) - {"layers"}
    if unknown:
        raise ValidationError(f"unknown top-level key(s) {sorted(unknown)}")
    if "layers" not in doc or not isinstance(doc["layers"], list):
        raise ValidationError("workload must contain a 'layers' list")
    layers = [_validate_layer(i, entry) for i, entry in enumerate(doc["layers"])]
    if not layers:
        warnings.warn("workload contains no layers", stacklevel=2)
    return layers


def _split(total: int, chunk: int) -> tuple[tuple[int, int], ...]:
    return tuple((start, min(chunk, total - start)) for start in range(0, total, chunk))


def tile_layer(layer: LayerSpec, independent_paths: bool) -> TileSchedule:
    """Split a layer into reduction tiles of 64 rows and capacity-sized output tiles."""
    cap = array.capacity(layer.w_precision, layer.w_signed, independent_paths)
    return TileSchedule(
        layer=layer,
        weight_capacity=cap,
        out_tiles=_split(layer.out_features, cap),
        reduction_tiles=_split(layer.in_features, array.ROWS),
    )


def random_matrix(rng, shape, precision, signed) -> np.ndarray:
    """Uniform stimulus over the representable values."""
    lo, hi = numeric.value_range(precision, signed)
    return rng.integers(lo, hi + 1, size=shape, dtype=np.int64)


def _run_layer(
    layer: LayerSpec,
    rng,
    independent_paths: bool,
    verify: bool,
    sparsity: float,
    collect_toggles: bool,
    trace: Optional[TextIO],
) -> dict:
    schedule = tile_layer(layer, independent_paths)
    w = random_matrix(rng, (layer.out_features, layer.in_features),
                      layer.w_precision, layer.w_signed)
    if sparsity > 0.0:
        w[rng.random(w.shape) < sparsity] = 0
    a = random_matrix(rng, (layer.in_features, layer.batch),
                      layer.a_precision, layer.a_signed)

    result = np.zeros((layer.out_features, layer.batch), dtype=np.int64)
    clk_cycles = 0
    clk_sa_ops = 0
    preload_cycles = 0
    energy = 0.0
    tile_index = 0
    for out_start, out_count in schedule.out_tiles:
        state = array.map_weights(
            range(out_count), layer.w_precision, layer.w_signed, independent_paths
        )
        for red_start, red_count in schedule.reduction_tiles:
            rows = np.zeros((array.ROWS, out_count), dtype=np.int64)
            rows[:red_count, :] = w[
                out_start : out_start + out_count,
                red_start : red_start + red_count,
            ].T
            array.preload(state, rows)
            padded = np.zeros((array.ROWS, layer.batch), dtype=np.int64)
            padded[:red_count, :] = a[red_start : red_start + red_count, :]
            acts = [
                numeric.activation_bitplanes(
                    padded[:, k], layer.a_precision, layer.a_signed
                )
                for k in range(layer.batch)
            ]
            if trace is not None:
                trace.write(json.dumps({"layer": layer.name, "tile": tile_index}) + "\n")
            tile = array.run_tile(
                state, acts, collect_toggles=collect_toggles, trace=trace
            )
            result[out_start : out_start + out_count, :] += tile.outputs
            clk_cycles += tile.stats.clk_cycles
            clk_sa_ops += tile.stats.clk_sa_ops
            preload_cycles += tile.stats.preload_cycles
            energy += perf.energy_proxy(
                tile.stats.clk_sa_ops, tile.tree_toggles, tile.acc_bit_toggles
            )
            tile_index += 1

    verified = False
    if verify:
        spec = golden.GemmSpec(
            layer.out_features, layer.in_features, layer.batch,
            layer.w_precision, layer.a_precision,
            layer.w_signed, layer.a_signed,
        )
        reference = golden.gemm_reference(spec, w, a)
        if not np.array_equal(result, reference):
            i, j = map(int, np.argwhere(result != reference)[0])
            raise VerificationFailed(
                f"layer '{layer.name}' output[{i},{j}] = {int(result[i, j])}, "
                f"reference {int(reference[i, j])}"
            )
        verified = True

    eff_w = numeric.effective_weight_precision(layer.w_precision, layer.w_signed)
    util = perf.utilization(eff_w, independent_paths)
    macs = layer.out_features * layer.in_features * layer.batch
    return {
        "name": layer.name,
        "out_features": layer.out_features,
        "in_features": layer.in_features,
        "batch": layer.batch,
        "w_precision": layer.w_precision,
        "a_precision": layer.a_precision,
        "w_signed": layer.w_signed,
        "a_signed": layer.a_signed,
        "effective_w_precision": eff_w,
        "tiles": schedule.num_tiles,
        "weight_capacity": schedule.weight_capacity,
        "macs": macs,
        "clk_cycles": clk_cycles,
        "clk_sa_ops": clk_sa_ops,
        "preload_cycles": preload_cycles,
        "utilization": float(util),
        "energy_proxy": energy,
        "verified": verified,
    }


def run_workload(
    layers: Sequence[LayerSpec],
    *,
    clk_mhz: float = 1000.0,
    independent_paths: bool = True,
    verify: bool = False,
    seed: int = 0,
    sparsity: float = 0.0,
    collect_toggles: bool = True,
    trace: Optional[TextIO] = None,
) -> dict:
    """Run every layer with seeded random stimulus and aggregate a report.

    Deterministic for a fixed seed and flags.  With `verify` each layer's
    tiled result is checked against the exact reference GEMM; the first
    mismatch raises VerificationFailed with its coordinate.
    """
    if not 0.0 <= sparsity < 1.0:
        raise ValidationError(f"sparsity must be in [0, 1), got {sparsity}")
    rng = np.random.default_rng(seed)
    layer_reports = [
        _run_layer(layer, rng, independent_paths, verify, sparsity,
                   collect_toggles, trace)
        for layer in layers
    ]
    clk_hz = clk_mhz * 1e6
    for entry in layer_reports:
        seconds = entry["clk_cycles"] / clk_hz
        entry["effective_tops"] = (
            perf.OPS_PER_MAC * entry["macs"] / seconds / 1e12 if seconds else 0.0
        )
    totals = {
        key: sum(entry[key] for entry in layer_reports)
        for key in ("macs", "clk_cycles", "clk_sa_ops", "preload_cycles", "energy_proxy")
    }
    total_seconds = totals["clk_cycles"] / clk_hz
    totals["effective_tops"] = (
        perf.OPS_PER_MAC * totals["macs"] / total_seconds / 1e12 if total_seconds else 0.0
    )
    return {
        "report_version": REPORT_VERSION,
        "clk_mhz": clk_mhz,
        "independent_paths": independent_paths,
        "seed": seed,
        "sparsity": sparsity,
        "verify": verify,
        "verified": bool(layer_reports) and all(e["verified"] for e in layer_reports),
        "layers": layer_reports,
        "totals": totals,
    }


def format_report(report: dict) -> str:
    """Stable-key-order JSON text; identical runs serialize byte-identically."""
    return json.dumps(report, indent=2) + "\n"


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_report(report))
