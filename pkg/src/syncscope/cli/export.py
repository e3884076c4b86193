"""JSON reports and CSV tables.

Floats are written with Python's shortest round-trip repr, so the same result always
produces the same bytes. Non-finite values become null in JSON.
"""
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..analysis.stability import StabilityReport, sigma_max
from ..network.model import SynchronizationModel
from ..simulation.simulator import SimulationTrace

logger = logging.getLogger("syncscope")

def real(value) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None

def cplx(value) -> Dict[str, Optional[float]]:
    value = complex(value)
    return {"re": real(value.real), "im": real(value.imag)}

def matrix(values: np.ndarray) -> List[List[Any]]:
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return [[cplx(v) for v in row] for row in values]
    return [[real(v) for v in row] for row in values]

def modes_payload(model: SynchronizationModel, meta: Dict) -> Dict:
    """Modal report. gamma, gamma_h_phi and sigma_max describe the channels alone; the
    damping excess and the sigma_max the criterion uses are reported beside them."""
    network_gamma_h_phi = model.network_gamma_h_phi()
    return {
        **meta,
        "node_ids": list(model.node_ids),
        "xi": [cplx(x) for x in model.xi],
        "condition_number": real(model.condition_number),
        "eigen_residual": real(model.eigen_residual),
        "gamma_residual": real(model.gamma_residual),
        "kernel_residual": real(model.kernel_residual),
        "mode_shape_magnitudes": matrix(model.mode_shape_magnitudes()),
        "participation_factors": matrix(model.participation_factors()),
        "gamma": matrix(model.network_gamma),
        "damping_excess": [real(v) for v in model.damping_excess],
        "gamma_h_phi": matrix(network_gamma_h_phi),
        "sigma_max": real(sigma_max(network_gamma_h_phi)),
        "criterion_sigma_max": real(sigma_max(model.gamma_h_phi)),
    }

def analyze_payload(report: StabilityReport, model: SynchronizationModel, meta: Dict) -> Dict:
    return {
        **meta,
        "verdict": report.verdict.value,
        "damping": real(report.damping),
        "sigma_max": real(report.sigma_max),
        "margin": real(report.margin),
        "zeta_min": real(report.zeta_min),
        "zeta_max": real(report.zeta_max),
        "margin_max": real(report.margin_max),
        "small_gain_peak": real(report.small_gain_peak),
        "modes": [
            {
                "index": mode.index,
                "xi": cplx(mode.xi),
                "zeta": real(mode.zeta),
                "argmin": None if mode.argmin is None else cplx(mode.argmin),
                "passed": mode.passed,
                "interior_zero": mode.interior_zero,
            }
            for mode in report.modes
        ],
        "forbidden_region_samples": [cplx(z) for z in report.forbidden_region],
        "node_ids": list(model.node_ids),
        "K": matrix(model.K),
        "gamma": matrix(model.network_gamma),
        "damping_excess": [real(v) for v in model.damping_excess],
        "network_sigma_max": real(sigma_max(model.network_gamma_h_phi())),
    }

def trace_payload(trace: SimulationTrace) -> Dict:
    return {
        **{key: value for key, value in trace.metadata.items()},
        "diverged": trace.diverged,
        "divergence_time": None if trace.divergence_time is None else real(trace.divergence_time),
        "samples": len(trace),
        "node_ids": list(trace.node_ids),
        "channels": [[m, n] for m, n in trace.channel_pairs],
        "t": [real(t) for t in trace.times],
        "theta": matrix(trace.theta),
        "omega": matrix(trace.omega),
        "power": matrix(trace.power),
        "hybrid_power": matrix(trace.hybrid),
        "gains": matrix(trace.gains),
    }

def trace_frame(trace: SimulationTrace) -> pd.DataFrame:
    """One row per sample."""
    columns: Dict[str, np.ndarray] = {"t": trace.times}
    for i, node_id in enumerate(trace.node_ids):
        columns[f"theta_{node_id}"] = trace.theta[:, i]
        columns[f"omega_{node_id}"] = trace.omega[:, i]
        columns[f"P_{node_id}"] = trace.power[:, i].real
        columns[f"Q_{node_id}"] = trace.power[:, i].imag
        columns[f"W_{node_id}"] = trace.hybrid[:, i]
    for c, (m, n) in enumerate(trace.channel_pairs):
        columns[f"g_{m}_{n}_re"] = trace.gains[:, c].real
        columns[f"g_{m}_{n}_im"] = trace.gains[:, c].imag
    return pd.DataFrame(columns)

def sweep_frame(omegas: np.ndarray, loop_gain_norms: np.ndarray, boundary: np.ndarray) -> pd.DataFrame:
    """Loop-gain norm and per-mode |xi/s + 1/T(s)| along s = j*omega."""
    columns: Dict[str, np.ndarray] = {"omega": omegas, "loop_gain_norm": loop_gain_norms}
    for m in range(boundary.shape[1]):
        columns[f"mode_{m}_distance"] = boundary[:, m]
    return pd.DataFrame(columns)

def region_frame(omegas: np.ndarray, region: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"omega": omegas, "re": region.real, "im": region.imag})

def dumps(payload: Dict) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"

def write_json(payload: Dict, path: Optional[Path] = None) -> None:
    text = dumps(payload)
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"Report written to {path}")

def write_csv(frame: pd.DataFrame, path: Path, header: Sequence[str] = ()) -> None:
    """CSV with '#'-prefixed metadata lines before the column row."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for line in header:
            handle.write(f"# {line}\n")
        frame.to_csv(handle, index=False, float_format="%.17g")
    logger.info(f"Table written to {path} ({len(frame)} rows)")
