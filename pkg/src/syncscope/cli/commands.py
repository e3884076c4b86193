import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Tuple

import numpy as np
import pandas as pd

from ..analysis.stability import Verdict, evaluate_criterion, loop_gain_sweep
from ..control.phase_locking import InertiaDynamics
from ..network.graph import compute_equilibrium
from ..network.model import build_synchronization_model, shared_damping
from ..simulation.simulator import GainMode, IsomorphicSimulator
from .config import SystemConfig
from .export import analyze_payload, modes_payload, region_frame, sweep_frame, trace_frame, trace_payload
from .parser import build_graph, build_grid, build_perturbations, config_hash

logger = logging.getLogger("syncscope")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CERTIFIED = 2
EXIT_DIVERGED = 3

@dataclass
class CommandResult:
    exit_code: int
    payload: Dict[str, Any]
    # name suffix -> (table, '#' header lines)
    tables: Dict[str, Tuple[pd.DataFrame, List[str]]] = field(default_factory=dict)

class Command(Protocol):
    """Protocol for CLI commands."""
    def execute(self, config: SystemConfig, **kwargs) -> CommandResult:
        pass

def _meta(command: str, config: SystemConfig) -> Dict[str, Any]:
    return {"command": command, "config_hash": config_hash(config), "omega0": config.system.omega0}

def _prepare(config: SystemConfig):
    graph = build_graph(config)
    eq = compute_equilibrium(graph, config.system.omega0)
    damping = shared_damping(graph)
    model = build_synchronization_model(graph, eq, damping)
    return graph, eq, damping, model

class AnalyzeCommand:
    def execute(self, config: SystemConfig, threads: int = 1, csv: bool = False) -> CommandResult:
        graph, _, damping, model = _prepare(config)
        T = InertiaDynamics(damping)
        grid = build_grid(config)
        report = evaluate_criterion(model, T, grid, threads=threads)

        meta = _meta("analyze", config)
        payload = analyze_payload(report, model, meta)
        payload["damping_uniform"] = bool(np.allclose(graph.damping, damping, rtol=0.0, atol=1e-12))
        payload["gamma_diagonal_defaulted"] = graph.nodes_without_self_channel()
        exit_code = EXIT_OK if report.verdict is Verdict.CERTIFIED_STABLE else EXIT_NOT_CERTIFIED

        tables = {}
        if csv:
            omegas = grid.positive()
            s = 1j * omegas
            boundary = np.abs(model.xi[None, :] / s[:, None] + T.inverse(s)[:, None])
            header = [f"config_hash: {meta['config_hash']}", f"damping: {damping!r}",
                      f"sigma_max: {report.sigma_max!r}", "boundary values along s = j*omega"]
            tables["sweep"] = (sweep_frame(omegas, loop_gain_sweep(model, T, omegas), boundary), header)
            region_omegas = np.logspace(np.log10(grid.omega_lo), np.log10(grid.omega_hi),
                                        report.forbidden_region.size)
            tables["region"] = (
                region_frame(region_omegas, report.forbidden_region),
                [f"config_hash: {meta['config_hash']}", "forbidden region -s/T(s) at s = j*omega"],
            )
        return CommandResult(exit_code, payload, tables)

class ModesCommand:
    def execute(self, config: SystemConfig, csv: bool = False) -> CommandResult:
        _, _, _, model = _prepare(config)
        payload = modes_payload(model, _meta("modes", config))
        return CommandResult(EXIT_OK, payload)

class SimulateCommand:
    def execute(self, config: SystemConfig, gain_mode: Optional[str] = None, dt: Optional[float] = None,
                duration: Optional[float] = None, csv: bool = False) -> CommandResult:
        system = config.system
        graph = build_graph(config)
        eq = compute_equilibrium(graph, system.omega0)
        meta = _meta("simulate", config)

        simulator = IsomorphicSimulator(graph, eq, GainMode(gain_mode or system.gain_mode),
                                        config_hash=meta["config_hash"])
        trace = simulator.run(
            build_perturbations(config),
            duration=duration if duration is not None else system.duration,
            dt=dt if dt is not None else system.dt,
            dt_out=system.dt_out,
        )
        payload = {"command": "simulate", **trace_payload(trace)}
        exit_code = EXIT_DIVERGED if trace.diverged else EXIT_OK

        tables = {}
        if csv:
            header = [f"{key}: {value}" for key, value in trace.metadata.items()]
            header.append(f"diverged: {trace.diverged}")
            if trace.diverged:
                header.append(f"divergence_time: {trace.divergence_time!r}")
            header.append("columns: t, then per node theta (rad, omega0 frame), omega, P, Q, W, "
                          "then per channel g re/im")
            tables["trace"] = (trace_frame(trace), header)
        return CommandResult(exit_code, payload, tables)

COMMANDS: Dict[str, Command] = {
    "analyze": AnalyzeCommand(),
    "simulate": SimulateCommand(),
    "modes": ModesCommand(),
}
