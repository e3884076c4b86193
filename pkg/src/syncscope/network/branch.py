"""Channels of an R-L branch network via Kron reduction and mixed hybrid parameters.

Voltage nodes transmit a voltage and receive the current flowing into them from the
network; current nodes transmit an injected current and receive their voltage.
Passive nodes inject nothing and are eliminated. The result is G(s) with
received = G(s) @ transmitted over the active nodes, symmetric by reciprocity.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import ConnectivityError, NetworkError, PoleProximityError
from .graph import NodeKind

logger = logging.getLogger("syncscope")

# Above this condition number an elimination step is treated as singular at s
SINGULAR_CONDITION = 1e12

@dataclass(frozen=True)
class Branch:
    """Series R-L branch between two nodes (per-unit R, per-unit*s L)."""
    frm: str
    to: str
    resistance: float
    inductance: float

    def __post_init__(self):
        if self.frm == self.to:
            raise NetworkError(f"Branch {self.frm}-{self.to} connects a node to itself")
        if not self.resistance >= 0:
            raise NetworkError(f"Branch {self.frm}-{self.to}: R must be >= 0, got {self.resistance}")
        if not self.inductance > 0:
            raise NetworkError(f"Branch {self.frm}-{self.to}: L must be > 0, got {self.inductance}")

    def admittance(self, s: complex) -> Tuple[complex, complex]:
        """(y, dy/ds) of 1/(R + L*s)."""
        impedance = self.resistance + self.inductance * s
        if abs(impedance) < 1e-12 * (self.resistance + self.inductance * (1.0 + abs(s))):
            raise PoleProximityError(f"Branch {self.frm}-{self.to} is short-circuited at s={s}")
        y = 1.0 / impedance
        return y, -self.inductance * y * y

def _solve_checked(A: np.ndarray, B: np.ndarray, what: str, s: complex) -> np.ndarray:
    if A.size and np.linalg.cond(A) > SINGULAR_CONDITION:
        raise PoleProximityError(f"{what} is singular at s={s}")
    return np.linalg.solve(A, B)

class HybridNetwork:
    """Evaluator of the reduced hybrid-parameter matrix G(s) and its s-derivative."""

    def __init__(self, branches: Sequence[Branch], node_kinds: Mapping[str, NodeKind],
                 passive_nodes: Sequence[str] = ()):
        self.branches = tuple(branches)
        self.active = list(node_kinds.keys())
        self.kinds = {node_id: NodeKind(kind) for node_id, kind in node_kinds.items()}
        self.passive = list(passive_nodes)
        if not self.active:
            raise NetworkError("A branch network needs at least one active node")

        all_nodes = self.active + self.passive
        self._index: Dict[str, int] = {}
        for i, node_id in enumerate(all_nodes):
            if node_id in self._index:
                raise NetworkError(f"Node {node_id!r} is declared twice in the branch network")
            self._index[node_id] = i

        for branch in self.branches:
            for end in (branch.frm, branch.to):
                if end not in self._index:
                    raise NetworkError(f"Branch {branch.frm}-{branch.to} references unknown node {end!r}")

        self._check_connected(len(all_nodes))

        n_active = len(self.active)
        self._v = np.array([i for i, node_id in enumerate(self.active)
                            if self.kinds[node_id] is NodeKind.VOLTAGE], dtype=int)
        self._c = np.array([i for i, node_id in enumerate(self.active)
                            if self.kinds[node_id] is NodeKind.CURRENT], dtype=int)
        self._a = np.arange(n_active)
        self._p = np.arange(n_active, len(all_nodes))
        self._cache: Dict[complex, Tuple[np.ndarray, np.ndarray]] = {}

    def _check_connected(self, n_nodes: int) -> None:
        rows = [self._index[b.frm] for b in self.branches]
        cols = [self._index[b.to] for b in self.branches]
        adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n_nodes, n_nodes))
        _, labels = connected_components(adjacency, directed=False)
        reference = labels[0]
        stranded = [node_id for node_id, i in self._index.items() if labels[i] != reference]
        if stranded:
            raise ConnectivityError(f"Nodes not connected to {self.active[0]!r}: {stranded}")

    def admittance(self, s: complex) -> Tuple[np.ndarray, np.ndarray]:
        """Full nodal admittance Y(s) and dY/ds (current injected into the network)."""
        n = len(self._index)
        Y = np.zeros((n, n), dtype=complex)
        dY = np.zeros((n, n), dtype=complex)
        for branch in self.branches:
            i, j = self._index[branch.frm], self._index[branch.to]
            y, dy = branch.admittance(s)
            Y[i, i] += y
            Y[j, j] += y
            Y[i, j] -= y
            Y[j, i] -= y
            dY[i, i] += dy
            dY[j, j] += dy
            dY[i, j] -= dy
            dY[j, i] -= dy
        return Y, dY

    def kron_reduce(self, s: complex) -> Tuple[np.ndarray, np.ndarray]:
        """Admittance over the active nodes with passive nodes eliminated, and its derivative."""
        Y, dY = self.admittance(s)
        a, p = self._a, self._p
        Y_aa, dY_aa = Y[np.ix_(a, a)], dY[np.ix_(a, a)]
        if p.size == 0:
            return Y_aa, dY_aa

        Y_ap, Y_pa, Y_pp = Y[np.ix_(a, p)], Y[np.ix_(p, a)], Y[np.ix_(p, p)]
        dY_ap, dY_pa, dY_pp = dY[np.ix_(a, p)], dY[np.ix_(p, a)], dY[np.ix_(p, p)]
        M = _solve_checked(Y_pp, Y_pa, "Passive-node block", s)
        reduced = Y_aa - Y_ap @ M
        d_reduced = dY_aa - dY_ap @ M - M.T @ dY_pa + M.T @ dY_pp @ M
        return 0.5 * (reduced + reduced.T), 0.5 * (d_reduced + d_reduced.T)

    def matrix_with_derivative(self, s: complex) -> Tuple[np.ndarray, np.ndarray]:
        """G(s) and dG/ds over the active nodes (in declaration order)."""
        s = complex(s)
        cached = self._cache.get(s)
        if cached is not None:
            return cached

        Y, dY = self.kron_reduce(s)
        v, c = self._v, self._c
        n = len(self.active)
        G = np.zeros((n, n), dtype=complex)
        dG = np.zeros((n, n), dtype=complex)

        if c.size == 0:
            G, dG = -Y, -dY
        else:
            Y_cc, dY_cc = Y[np.ix_(c, c)], dY[np.ix_(c, c)]
            Y_cv, dY_cv = Y[np.ix_(c, v)], dY[np.ix_(c, v)]
            Y_vc, dY_vc = Y[np.ix_(v, c)], dY[np.ix_(v, c)]
            Y_vv, dY_vv = Y[np.ix_(v, v)], dY[np.ix_(v, v)]

            Z = _solve_checked(Y_cc, np.eye(c.size, dtype=complex), "Current-node block", s)
            G_cc = Z
            dG_cc = -Z @ dY_cc @ Z
            G_cv = -Z @ Y_cv
            dG_cv = Z @ dY_cc @ Z @ Y_cv - Z @ dY_cv
            G_vv = -Y_vv - Y_vc @ G_cv
            dG_vv = -dY_vv - dY_vc @ G_cv - Y_vc @ dG_cv

            G[np.ix_(c, c)], dG[np.ix_(c, c)] = G_cc, dG_cc
            G[np.ix_(c, v)], dG[np.ix_(c, v)] = G_cv, dG_cv
            G[np.ix_(v, c)], dG[np.ix_(v, c)] = G_cv.T, dG_cv.T
            G[np.ix_(v, v)], dG[np.ix_(v, v)] = G_vv, dG_vv

        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[s] = (G, dG)
        return G, dG

    def matrix(self, s: complex) -> np.ndarray:
        return self.matrix_with_derivative(s)[0]

    def position(self, node_id: str) -> int:
        return self.active.index(node_id)

    def channel(self, m: str, n: str) -> "BranchChannel":
        """Channel from transmitter n to receiver m (m == n gives the self-channel)."""
        return BranchChannel(self, self.position(m), self.position(n))

class BranchChannel:
    """One entry G_mn(s) of a reduced branch network."""

    def __init__(self, network: HybridNetwork, row: int, col: int):
        self.network = network
        self.row = row
        self.col = col

    def evaluate(self, s: complex) -> complex:
        return complex(self.network.matrix(s)[self.row, self.col])

    def derivative(self, s: complex) -> complex:
        return complex(self.network.matrix_with_derivative(s)[1][self.row, self.col])

    def __repr__(self) -> str:
        return f"BranchChannel({self.network.active[self.row]!r} <- {self.network.active[self.col]!r})"

def reduce_branch_network(branches: Sequence[Branch], node_kinds: Mapping[str, NodeKind],
                          passive_nodes: Sequence[str] = ()) -> HybridNetwork:
    """Build the hybrid-parameter evaluator of an R-L network over its active nodes."""
    network = HybridNetwork(branches, node_kinds, passive_nodes)
    logger.info(
        f"Branch network: {len(network.active)} active, {len(network.passive)} passive nodes, "
        f"{len(network.branches)} branches"
    )
    return network
