"""Turning JSON documents into validated configs, and configs into network graphs."""
import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from ..analysis.stability import FrequencyGrid
from ..errors import (
    ConfigError,
    ConfigSyntaxError,
    ConfigValidationError,
    DuplicateIdError,
    UnknownReferenceError,
)
from ..network.branch import Branch, reduce_branch_network
from ..network.graph import Edge, NetworkGraph, Node
from ..signal.channel import Channel, RationalChannel, StaticChannel
from ..signal.envelope import ComplexAngle
from ..simulation.simulator import Perturbation
from .config import ChannelSpec, SystemConfig, as_complex

logger = logging.getLogger("syncscope")

# Entries of a reduced branch network below this fraction of the largest one are not edges
COUPLING_TOLERANCE = 1e-12

def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc)

def parse_config(document: str) -> SystemConfig:
    """Validate a JSON document; defaults are filled in on the returned config."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise ConfigSyntaxError(
            f"Invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", line=e.lineno, column=e.colno
        ) from e

    if not isinstance(data, dict):
        raise ConfigValidationError("The document must be a JSON object", field="")

    try:
        config = SystemConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = _field_path(first["loc"])
        raise ConfigValidationError(f"{field or 'document'}: {first['msg']}", field=field) from e

    _check_references(config)
    return config

def load_config(path) -> SystemConfig:
    path = Path(path)
    try:
        document = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    config = parse_config(document)
    logger.info(f"Loaded config {path} ({len(config.nodes)} nodes)")
    return config

def _check_references(config: SystemConfig) -> None:
    node_ids: List[str] = []
    for i, node in enumerate(config.nodes):
        if node.id in node_ids:
            raise DuplicateIdError(f"nodes.{i}.id: duplicate node id {node.id!r}")
        node_ids.append(node.id)
    declared = set(node_ids)

    if config.channels is not None:
        pairs = set()
        for i, edge in enumerate(config.channels):
            for end in (edge.m, edge.n):
                if end not in declared:
                    raise UnknownReferenceError(f"channels.{i}: unknown node {end!r}")
            if edge.m == edge.n:
                raise ConfigValidationError(
                    f"channels.{i}: a channel from {edge.m!r} to itself belongs in its self_channel",
                    field=f"channels.{i}",
                )
            key = frozenset((edge.m, edge.n))
            if key in pairs:
                raise DuplicateIdError(f"channels.{i}: duplicate channel between {edge.m!r} and {edge.n!r}")
            pairs.add(key)

    if config.network is not None:
        for i, passive in enumerate(config.network.passive_nodes):
            if passive in declared:
                raise DuplicateIdError(f"network.passive_nodes.{i}: id {passive!r} is already used")
            declared.add(passive)
        for i, branch in enumerate(config.network.branches):
            for end in (branch.frm, branch.to):
                if end not in declared:
                    raise UnknownReferenceError(f"network.branches.{i}: unknown node {end!r}")
        for i, node in enumerate(config.nodes):
            if node.self_channel is not None:
                raise ConfigValidationError(
                    f"nodes.{i}.self_channel: self-channels come from the branch network",
                    field=f"nodes.{i}.self_channel",
                )

    for i, perturbation in enumerate(config.perturbations):
        if perturbation.node not in node_ids:
            raise UnknownReferenceError(f"perturbations.{i}: unknown node {perturbation.node!r}")

def config_document(config: SystemConfig) -> Dict:
    return config.model_dump(mode="json", by_alias=True, exclude_none=True)

def serialize_config(config: SystemConfig) -> str:
    """JSON text that parses back to an equal config."""
    return json.dumps(config_document(config), indent=2)

def config_hash(config: SystemConfig) -> str:
    """SHA-256 of the canonical (sorted, compact) form of the validated config."""
    canonical = json.dumps(config_document(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

def build_channel(spec: ChannelSpec) -> Channel:
    if spec.gain is not None:
        return StaticChannel(as_complex(spec.gain))
    return RationalChannel.from_poles(
        [as_complex(p) for p in spec.poles],
        [as_complex(r) for r in spec.residues],
    )

def build_graph(config: SystemConfig) -> NetworkGraph:
    """Nodes and channels; a branch network is reduced and every non-zero coupling
    at j*omega0 becomes an edge, with the diagonal as self-channels."""
    network = None
    if config.network is not None:
        network = reduce_branch_network(
            [Branch(b.frm, b.to, b.resistance, b.inductance) for b in config.network.branches],
            {node.id: node.kind for node in config.nodes},
            config.network.passive_nodes,
        )

    nodes = []
    for spec in config.nodes:
        if network is not None:
            self_channel: Optional[Channel] = network.channel(spec.id, spec.id)
        elif spec.self_channel is not None:
            self_channel = build_channel(spec.self_channel)
        else:
            self_channel = None
        nodes.append(Node(
            id=spec.id,
            kind=spec.kind,
            inertia=spec.inertia,
            damping=spec.damping,
            epsilon=spec.epsilon,
            angle=ComplexAngle.from_polar(spec.amplitude, spec.angle),
            self_channel=self_channel,
        ))

    if network is None:
        edges = [Edge(e.m, e.n, build_channel(e)) for e in config.channels]
    else:
        G = network.matrix(1j * config.system.omega0)
        scale = float(np.max(np.abs(G))) if G.size else 0.0
        ids = network.active
        edges = [
            Edge(ids[i], ids[j], network.channel(ids[i], ids[j]))
            for i in range(len(ids))
            for j in range(i + 1, len(ids))
            if abs(G[i, j]) > COUPLING_TOLERANCE * scale
        ]
    return NetworkGraph(nodes, edges)

def build_perturbations(config: SystemConfig) -> List[Perturbation]:
    return [Perturbation(p.node, p.delta_theta, p.delta_omega) for p in config.perturbations]

def build_grid(config: SystemConfig) -> FrequencyGrid:
    grid = config.system.zeta_grid
    return FrequencyGrid(grid.omega_lo, grid.omega_hi, grid.points)
