"""Nodes, channels and the operating point of a power-communication network."""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..control.phase_locking import hybrid_power
from ..errors import DegenerateChannelError, NetworkError, PoleProximityError
from ..signal.channel import Channel
from ..signal.envelope import ComplexAngle, ComplexPower, complex_power

logger = logging.getLogger("syncscope")

Pair = Tuple[str, str]

class NodeKind(str, Enum):
    VOLTAGE = "voltage"
    CURRENT = "current"

    @property
    def default_epsilon(self) -> float:
        # voltage nodes lock on real power, current nodes on reactive power
        return 0.0 if self is NodeKind.VOLTAGE else 0.5 * math.pi

@dataclass(frozen=True)
class Node:
    """An apparatus: hybrid inertia H, damping D, displacement angle eps and its
    equilibrium complex angle. `self_channel` is the optional g_mm path."""
    id: str
    kind: NodeKind
    inertia: float
    damping: float = 0.0
    epsilon: Optional[float] = None
    angle: ComplexAngle = field(default_factory=lambda: ComplexAngle(0.0, 0.0))
    self_channel: Optional[Channel] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NodeKind(self.kind))
        if not self.inertia > 0:
            raise NetworkError(f"Node {self.id!r}: inertia must be positive, got {self.inertia}")
        if not self.damping >= 0:
            raise NetworkError(f"Node {self.id!r}: damping must be non-negative, got {self.damping}")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", self.kind.default_epsilon)

@dataclass(frozen=True)
class Edge:
    """Undirected channel between m and n; G_mn = G_nm."""
    m: str
    n: str
    channel: Channel

    def __post_init__(self):
        if self.m == self.n:
            raise NetworkError(f"Self-edge on {self.m!r}; use the node's self_channel instead")

class NetworkGraph:
    """Immutable node/edge description."""

    def __init__(self, nodes: Sequence[Node], edges: Sequence[Edge] = ()):
        self._nodes = tuple(nodes)
        self._edges = tuple(edges)
        self._index: Dict[str, int] = {}
        for i, node in enumerate(self._nodes):
            if node.id in self._index:
                raise NetworkError(f"Duplicate node id {node.id!r}")
            self._index[node.id] = i

        seen = set()
        for edge in self._edges:
            for end in (edge.m, edge.n):
                if end not in self._index:
                    raise NetworkError(f"Edge ({edge.m}, {edge.n}) references unknown node {end!r}")
            key = frozenset((edge.m, edge.n))
            if key in seen:
                raise NetworkError(f"Duplicate edge between {edge.m!r} and {edge.n!r}")
            seen.add(key)

    @property
    def nodes(self) -> Tuple[Node, ...]:
        return self._nodes

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self._edges

    @property
    def node_ids(self) -> List[str]:
        return [node.id for node in self._nodes]

    def __len__(self) -> int:
        return len(self._nodes)

    def index(self, node_id: str) -> int:
        return self._index[node_id]

    def node(self, node_id: str) -> Node:
        return self._nodes[self._index[node_id]]

    @property
    def inertia(self) -> np.ndarray:
        return np.array([node.inertia for node in self._nodes], dtype=float)

    @property
    def damping(self) -> np.ndarray:
        return np.array([node.damping for node in self._nodes], dtype=float)

    @property
    def epsilon(self) -> np.ndarray:
        return np.array([node.epsilon for node in self._nodes], dtype=float)

    def directed_channels(self) -> List[Tuple[str, str, Channel]]:
        """(receiver m, transmitter n, G_mn) for every directed use of an edge, plus
        self-channels (m, m). Grouped by receiver in node order; this is also the
        summation order of received powers."""
        incoming: Dict[str, List[Tuple[str, str, Channel]]] = {node.id: [] for node in self._nodes}
        for edge in self._edges:
            incoming[edge.m].append((edge.m, edge.n, edge.channel))
            incoming[edge.n].append((edge.n, edge.m, edge.channel))
        ordered = []
        for node in self._nodes:
            ordered.extend(incoming[node.id])
            if node.self_channel is not None:
                ordered.append((node.id, node.id, node.self_channel))
        return ordered

    def nodes_without_self_channel(self) -> List[str]:
        return [node.id for node in self._nodes if node.self_channel is None]

@dataclass(frozen=True)
class Equilibrium:
    """Operating point: angles, channel gains and powers at varpi0 = j*omega0.

    Pair-keyed maps use (receiver m, transmitter n); (m, m) is a self-channel.
    """
    omega0: float
    angles: Dict[str, ComplexAngle]
    gains: Dict[Pair, complex]
    gain_derivatives: Dict[Pair, complex]
    powers: Dict[Pair, ComplexPower]
    loaded_powers: Dict[Pair, ComplexPower]
    node_powers: Dict[str, ComplexPower]
    hybrid_powers: Dict[str, float]
    setpoints: Dict[str, float]

def compute_equilibrium(graph: NetworkGraph, omega0: float) -> Equilibrium:
    """Evaluate every channel at j*omega0 and sum the received powers.

    The setpoint W*_m is set to the equilibrium hybrid power so that the configured
    angles are an exact fixed point of the closed loop.
    """
    s0 = 1j * omega0
    angles = {node.id: node.angle for node in graph.nodes}
    gains: Dict[Pair, complex] = {}
    derivatives: Dict[Pair, complex] = {}
    powers: Dict[Pair, ComplexPower] = {}
    loaded: Dict[Pair, ComplexPower] = {}
    received = {node.id: 0j for node in graph.nodes}

    for m, n, channel in graph.directed_channels():
        try:
            gain = channel.evaluate(s0)
            derivative = channel.derivative(s0)
        except PoleProximityError as e:
            raise DegenerateChannelError(f"Channel {n}->{m} has a pole at j*omega0: {e}") from e
        S = complex_power(angles[n], angles[m])
        gains[(m, n)] = gain
        derivatives[(m, n)] = derivative
        powers[(m, n)] = S
        loaded[(m, n)] = ComplexPower(gain * S.value)
        received[m] += gain * S.value

    node_powers = {node_id: ComplexPower(value) for node_id, value in received.items()}
    hybrid = {node.id: hybrid_power(node_powers[node.id], node.epsilon) for node in graph.nodes}

    logger.info(f"Equilibrium built for {len(graph)} nodes, {len(graph.edges)} edges at omega0={omega0:.6g}")
    return Equilibrium(
        omega0=omega0,
        angles=angles,
        gains=gains,
        gain_derivatives=derivatives,
        powers=powers,
        loaded_powers=loaded,
        node_powers=node_powers,
        hybrid_powers=hybrid,
        setpoints=dict(hybrid),
    )
