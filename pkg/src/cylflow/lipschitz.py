"""Exact minimisation of vertex weight over 1-Lipschitz height functions.

The minimiser is a layered min-cut: one arc chain per base point with arc
cost t(u,h) for cutting at height h, infinite reverse arcs so each chain is
cut exactly once, and infinite arcs between adjacent chains enforcing
|psi(u) - psi(v)| <= 1.  The returned surface is the source-side cut, i.e.
the lowest optimal one.  brute_force_lipschitz is the independent oracle:
exhaustive enumeration with constraint pruning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .capacity import TwoPointDist
from .errors import CapacityLimitError, ConfigError, GuardError
from .lattice import CylinderSpec, get_lattice
from .rng import uniforms

_INT32_MAX = 2**31 - 1
_BRUTE_GUARD = 10**7


@dataclass(frozen=True)
class VertexWeightField:
    """Two-valued i.i.d. weights on the lattice vertices."""

    values: np.ndarray
    dist: TwoPointDist
    seed: int
    sample_index: int
    spec: CylinderSpec

    def __post_init__(self):
        if self.values.size != self.spec.vertex_count:
            raise ConfigError("weight array size does not match the lattice")


def sample_vertex_field(
    spec: CylinderSpec, dist: TwoPointDist, seed: int, sample_index: int
) -> VertexWeightField:
    lat = get_lattice(spec)
    u = uniforms(seed, sample_index, "vertex_weight", lat.num_vertices)
    values = np.where(u < float(dist.p_a), dist.a, dist.b)
    values.flags.writeable = False
    return VertexWeightField(values, dist, seed, sample_index, spec)


def _base_adjacency(spec: CylinderSpec) -> list[tuple[int, int]]:
    """Adjacent base-point pairs, as base indices (= height-0 vertex ids)."""
    lat = get_lattice(spec)
    mask = (lat.edge_axis < spec.d) & (lat.edge_h_lo == 0)
    return [(int(u), int(v)) for u, v in zip(lat.edge_u[mask], lat.edge_v[mask])]


def _boundary_bases(spec: CylinderSpec) -> list[int]:
    lat = get_lattice(spec)
    out = []
    for b in range(spec.base_count):
        c = lat.coords[b][: spec.d - 1]
        if (c == 0).any() or (c == spec.n).any():
            out.append(b)
    return out


class _ChainNetwork:
    """Layered graph for one (spec, boundary pin) pair; weights vary per solve."""

    def __init__(self, spec: CylinderSpec, boundary_height: int | None):
        self.spec = spec
        B, H = spec.base_count, spec.H
        V = spec.vertex_count
        self.s_node, self.t_node = V, V + 1
        n_nodes = V + 2

        arcs: dict[tuple[int, int], int] = {}  # (row, col) -> data vertex id or -1 for inf

        def put_inf(r, c):
            arcs[(r, c)] = -1

        def put_data(r, c, vid):
            if arcs.get((r, c), 0) != -1:  # inf arcs dominate parallel data arcs
                arcs[(r, c)] = vid

        for u in range(B):
            put_inf(self.s_node, u)
            for h in range(H + 1):
                vid = h * B + u
                target = vid + B if h < H else self.t_node
                put_data(vid, target, vid)
                if h < H:
                    put_inf(vid + B, vid)
        for u, v in _base_adjacency(spec):
            for h in range(2, H + 1):
                put_inf(h * B + u, (h - 1) * B + v)
                put_inf(h * B + v, (h - 1) * B + u)
        if boundary_height is not None:
            bh = boundary_height
            for u in _boundary_bases(spec):
                put_inf(self.s_node, bh * B + u)
                if bh < H:
                    put_inf((bh + 1) * B + u, self.t_node)

        # scipy's flow matrix carries both arc directions: make the
        # structure symmetric with zero-capacity reverses (-2 markers)
        for r, c in list(arcs):
            arcs.setdefault((c, r), -2)

        keys = sorted(arcs)
        self.n_nodes = n_nodes
        self.indices = np.array([c for _, c in keys], dtype=np.int32)
        self.indptr = np.zeros(n_nodes + 1, dtype=np.int32)
        rows = np.array([r for r, _ in keys], dtype=np.int64)
        np.add.at(self.indptr, rows + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.data_vid = np.array([arcs[k] for k in keys], dtype=np.int64)

    def solve(self, weights: np.ndarray) -> tuple[int, np.ndarray]:
        weights = np.asarray(weights, dtype=np.int64)
        inf = 1 + int(weights.sum())
        if inf > _INT32_MAX:
            raise CapacityLimitError("total weight exceeds 32-bit solver range")
        caps = np.where(
            self.data_vid >= 0, weights[np.maximum(self.data_vid, 0)], inf
        ).astype(np.int32)
        caps[self.data_vid == -2] = 0
        graph = csr_matrix((caps, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes))
        res = maximum_flow(graph, self.s_node, self.t_node)
        residual = caps.astype(np.int64) - res.flow.data
        # eliminate_zeros mutates the index arrays, so the graph gets copies
        rgraph = csr_matrix(
            (residual, self.indices.copy(), self.indptr.copy()),
            shape=(self.n_nodes, self.n_nodes),
        )
        rgraph.eliminate_zeros()
        reach = np.zeros(self.n_nodes, dtype=bool)
        reach[breadth_first_order(rgraph, self.s_node, return_predecessors=False)] = True
        B = self.spec.base_count
        chain = reach[: self.spec.vertex_count].reshape(self.spec.H + 1, B)
        psi = chain.sum(axis=0) - 1  # heights form a prefix: psi = max reachable layer
        return int(res.flow_value), psi.astype(np.int64)


_NETWORKS: dict = {}


def _network(spec: CylinderSpec, boundary_height: int | None) -> _ChainNetwork:
    key = (spec, boundary_height)
    net = _NETWORKS.get(key)
    if net is None:
        net = _NETWORKS[key] = _ChainNetwork(spec, boundary_height)
    return net


def solve_lipschitz(field: VertexWeightField) -> tuple[int, np.ndarray]:
    """Exact global minimum of sum_u t(u, psi(u)) and its lowest minimiser."""
    return _network(field.spec, None).solve(field.values)


def solve_anchored_lipschitz(
    field: VertexWeightField, boundary_height: int
) -> tuple[int, np.ndarray]:
    """Same minimisation with psi pinned to boundary_height on the base boundary."""
    if not (0 <= boundary_height <= field.spec.H):
        raise ConfigError(f"boundary height {boundary_height} outside [0,{field.spec.H}]")
    return _network(field.spec, boundary_height).solve(field.values)


def brute_force_lipschitz(field: VertexWeightField, pins: dict[int, int] | None = None) -> int:
    """Exhaustive minimum over all Lipschitz height assignments (oracle)."""
    spec = field.spec
    B, H = spec.base_count, spec.H
    if (H + 1) ** B > _BRUTE_GUARD:
        raise GuardError(f"(H+1)^B = {(H + 1) ** B} candidates exceed guard {_BRUTE_GUARD}")
    lat = get_lattice(spec)
    # neighbours with smaller base index: assigned before us in the scan
    prev = [[] for _ in range(B)]
    for u, v in _base_adjacency(spec):
        prev[max(u, v)].append(min(u, v))
    values = field.values
    pins = pins or {}
    best = [None]

    psi = [0] * B

    def rec(i: int, cost: int):
        if best[0] is not None and cost >= best[0]:
            return
        if i == B:
            best[0] = cost
            return
        lo, hi = 0, H
        for j in prev[i]:
            lo = max(lo, psi[j] - 1)
            hi = min(hi, psi[j] + 1)
        if i in pins:
            lo = max(lo, pins[i])
            hi = min(hi, pins[i])
        for h in range(lo, hi + 1):
            psi[i] = h
            rec(i + 1, cost + int(values[h * B + i]))

    rec(0, 0)
    if best[0] is None:
        raise ConfigError("no feasible Lipschitz function under the given pins")
    return best[0]


def lipschitz_cost(field: VertexWeightField, psi: np.ndarray) -> int:
    """Evaluate sum_u t(u, psi(u)); validates the Lipschitz constraint."""
    B = field.spec.base_count
    for u, v in _base_adjacency(field.spec):
        if abs(int(psi[u]) - int(psi[v])) > 1:
            raise ConfigError(f"psi violates the Lipschitz constraint at pair ({u},{v})")
    return int(sum(int(field.values[int(psi[u]) * B + u]) for u in range(B)))


def psi_to_csv(spec: CylinderSpec, psi: np.ndarray, path) -> None:
    """Export a height function as a CSV grid (one row per base point)."""
    lat = get_lattice(spec)
    header = [f"x{j + 1}" for j in range(spec.d - 1)] + ["psi"]
    lines = [",".join(header)]
    for u in range(spec.base_count):
        c = lat.coords[u][: spec.d - 1]
        lines.append(",".join(str(int(x)) for x in c) + f",{int(psi[u])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
