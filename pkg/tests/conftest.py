import json

import pytest

from src.syncscope.network.branch import Branch, reduce_branch_network
from src.syncscope.network.graph import Edge, NetworkGraph, Node, NodeKind
from src.syncscope.signal.channel import RationalChannel
from src.syncscope.signal.envelope import ComplexAngle

OMEGA0 = 10.0

def inductive_channel(alpha: float = 1000.0, reactance: float = 1.0, omega0: float = OMEGA0) -> RationalChannel:
    """One-pole channel b/(s + alpha) with G(j*omega0) = -j/reactance exactly."""
    residue = -1j / reactance * (alpha + 1j * omega0)
    return RationalChannel.from_poles([-alpha], [residue])

def build_two_node(inertia=1.0, damping=0.5, alpha=1000.0, reactance=1.0, angle2=0.0,
                   omega0=OMEGA0, kinds=("voltage", "voltage")) -> NetworkGraph:
    nodes = [
        Node("A", NodeKind(kinds[0]), inertia, damping),
        Node("B", NodeKind(kinds[1]), inertia, damping, angle=ComplexAngle(0.0, angle2)),
    ]
    return NetworkGraph(nodes, [Edge("A", "B", inductive_channel(alpha, reactance, omega0))])

def build_three_node(inertias=(1.0, 2.0, 1.5), damping=1.0, alpha=500.0, angles=(0.0, 0.1, -0.05),
                     reactances=(1.0, 2.0, 1.5), omega0=OMEGA0) -> NetworkGraph:
    """Ring of three voltage nodes."""
    ids = ["A", "B", "C"]
    nodes = [
        Node(node_id, NodeKind.VOLTAGE, h, damping, angle=ComplexAngle(0.0, angle))
        for node_id, h, angle in zip(ids, inertias, angles)
    ]
    edges = [
        Edge(ids[k], ids[(k + 1) % 3], inductive_channel(alpha, reactances[k], omega0))
        for k in range(3)
    ]
    return NetworkGraph(nodes, edges)

def build_lossless_pair(inertia=1.0, damping=0.0, inductance=0.1, angle2=0.0) -> NetworkGraph:
    """Two voltage nodes on one lossless branch; self-channels from the reduced network."""
    network = reduce_branch_network(
        [Branch("A", "B", 0.0, inductance)],
        {"A": NodeKind.VOLTAGE, "B": NodeKind.VOLTAGE},
    )
    nodes = [
        Node("A", NodeKind.VOLTAGE, inertia, damping, self_channel=network.channel("A", "A")),
        Node("B", NodeKind.VOLTAGE, inertia, damping, angle=ComplexAngle(0.0, angle2),
             self_channel=network.channel("B", "B")),
    ]
    return NetworkGraph(nodes, [Edge("A", "B", network.channel("A", "B"))])

def benchmark_document(damping=0.5, perturbations=None, **system) -> dict:
    """Two voltage nodes, omega0 = 10, G(j*omega0) = -j; certified when damping > ~1e-3."""
    residue = -1j * (1000.0 + 1j * OMEGA0)
    return {
        "system": {"omega0": OMEGA0, **system},
        "nodes": [
            {"id": "A", "kind": "voltage", "inertia": 1.0, "damping": damping},
            {"id": "B", "kind": "voltage", "inertia": 1.0, "damping": damping},
        ],
        "channels": [
            {"m": "A", "n": "B", "poles": [-1000.0], "residues": [[residue.real, residue.imag]]},
        ],
        "perturbations": perturbations if perturbations is not None else [],
    }

def divergent_document() -> dict:
    """One node whose own channel feeds surplus power back with its frequency (Gamma = -5, D = 0)."""
    return {
        "system": {"omega0": 1.0, "dt": 1e-3, "dt_out": 1e-2, "duration": 2.0, "gain_mode": "quasistatic"},
        "nodes": [
            {
                "id": "G",
                "kind": "voltage",
                "inertia": 0.1,
                "self_channel": {"poles": [-1.0], "residues": [-10.0]},
            }
        ],
        "channels": [],
        "perturbations": [{"node": "G", "delta_omega": 0.01}],
    }

@pytest.fixture
def two_node():
    return build_two_node

@pytest.fixture
def three_node():
    return build_three_node

@pytest.fixture
def lossless_pair():
    return build_lossless_pair

@pytest.fixture
def write_config(tmp_path):
    def _write(document: dict, name: str = "system.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    return _write

@pytest.fixture
def benchmark():
    return benchmark_document

@pytest.fixture
def divergent():
    return divergent_document

@pytest.fixture
def omega0():
    return OMEGA0
