"""Exact maximum flow / minimum cut between vertex sets of the cylinder.

Undirected lattice edges become two antiparallel arcs of capacity t_e; a
super source/sink with uncuttable arcs handles vertex-set terminals.  The
solver is scipy's integer Dinic implementation; everything downstream
(canonical cut, pivotal and essential edges) only uses residual
reachability, which is identical for every maximum flow, so results do not
depend on which maximum flow the solver happens to return.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .capacity import CapacityField, flip_edge
from .errors import CapacityLimitError, ConfigError
from .lattice import CylinderSpec, Lattice, boundary_sets, get_lattice, lateral_split

_INT32_MAX = 2**31 - 1


@dataclass(frozen=True)
class CutSet:
    """A set of lattice edges with its capacity and vertical extent."""

    edges: tuple[int, ...]
    capacity: int
    h_min: int
    h_max: int

    def to_json(self) -> dict:
        return {
            "edges": list(self.edges),
            "capacity": self.capacity,
            "h_min": self.h_min,
            "h_max": self.h_max,
        }


class FlowNetwork:
    """Reusable s-t network for one (lattice, sources, sinks) triple."""

    def __init__(self, lattice: Lattice, sources: frozenset, sinks: frozenset):
        if not sources or not sinks:
            raise ConfigError("sources and sinks must be nonempty")
        if sources & sinks:
            raise ConfigError("sources and sinks must be disjoint")
        self.lattice = lattice
        self.sources = sources
        self.sinks = sinks
        V = lattice.num_vertices
        self.s_node = V
        self.t_node = V + 1
        n_nodes = V + 2

        src = np.fromiter(sorted(sources), dtype=np.int64)
        snk = np.fromiter(sorted(sinks), dtype=np.int64)
        eu, ev = lattice.edge_u, lattice.edge_v
        rows = np.concatenate(
            [eu, ev, np.full(src.size, self.s_node), src, snk, np.full(snk.size, self.t_node)]
        )
        cols = np.concatenate(
            [ev, eu, src, np.full(src.size, self.s_node), np.full(snk.size, self.t_node), snk]
        )
        n_arcs = rows.size
        # kind: 0/1 forward/backward lattice arc, 2 super arc, 3 zero reverse
        E = lattice.num_edges
        kind = np.concatenate(
            [
                np.zeros(E, dtype=np.int8),
                np.ones(E, dtype=np.int8),
                np.full(src.size, 2, dtype=np.int8),
                np.full(src.size, 3, dtype=np.int8),
                np.full(snk.size, 2, dtype=np.int8),
                np.full(snk.size, 3, dtype=np.int8),
            ]
        )
        keys = rows * n_nodes + cols
        order = np.argsort(keys, kind="stable")  # CSR slot order
        sorted_keys = keys[order]
        if sorted_keys.size > 1 and (np.diff(sorted_keys) == 0).any():
            raise ConfigError("duplicate arcs in flow network")
        self.indices = cols[order].astype(np.int32)
        self.indptr = np.zeros(n_nodes + 1, dtype=np.int32)
        np.add.at(self.indptr, rows[order] + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.n_nodes = n_nodes

        slot_of_arc = np.empty(n_arcs, dtype=np.int64)
        slot_of_arc[order] = np.arange(n_arcs)
        self.fwd_slot = slot_of_arc[:E]
        self.bwd_slot = slot_of_arc[E : 2 * E]
        self.kind = kind[order]
        rev_keys = cols * n_nodes + rows
        self.rev_slot = np.searchsorted(sorted_keys, rev_keys[order])
        assert (sorted_keys[self.rev_slot] == rev_keys[order]).all()

    def capacities(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.int64)
        if values.size != self.lattice.num_edges:
            raise ConfigError("capacity array size does not match lattice")
        inf = 1 + int(values.sum())
        if inf > _INT32_MAX:
            raise CapacityLimitError("total capacity exceeds 32-bit solver range")
        caps = np.zeros(self.indices.size, dtype=np.int32)
        caps[self.fwd_slot] = values
        caps[self.bwd_slot] = values
        caps[self.kind == 2] = inf
        return caps

    def solve(self, values: np.ndarray) -> "FlowResult":
        caps = self.capacities(values)
        graph = csr_matrix(
            (caps, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes)
        )
        res = maximum_flow(graph, self.s_node, self.t_node)
        return FlowResult(
            value=int(res.flow_value),
            network=self,
            values=np.asarray(values, dtype=np.int64),
            _caps=caps,
            _flows=res.flow.data,
        )


_NETWORKS: dict = {}


def get_network(lattice: Lattice, sources: frozenset, sinks: frozenset) -> FlowNetwork:
    key = (lattice.spec, sources, sinks)
    net = _NETWORKS.get(key)
    if net is None:
        net = _NETWORKS[key] = FlowNetwork(lattice, frozenset(sources), frozenset(sinks))
    return net


@dataclass
class FlowResult:
    """Max-flow value, per-edge net flows, and residual reachability labels."""

    value: int
    network: FlowNetwork
    values: np.ndarray
    _caps: np.ndarray
    _flows: np.ndarray

    @property
    def lattice(self) -> Lattice:
        return self.network.lattice

    @property
    def edge_flows(self) -> np.ndarray:
        """Net flow per lattice edge, signed along the base->base+axis arc."""
        return self._flows[self.network.fwd_slot].astype(np.int64)

    @cached_property
    def _residual(self) -> np.ndarray:
        return (self._caps - self._flows).astype(np.int64)

    def _reach(self, start: int, backward: bool) -> np.ndarray:
        net = self.network
        data = self._residual[net.rev_slot] if backward else self._residual
        # eliminate_zeros mutates the index arrays, so the graph gets copies
        graph = csr_matrix(
            (data.astype(np.int64), net.indices.copy(), net.indptr.copy()),
            shape=(net.n_nodes, net.n_nodes),
        )
        graph.eliminate_zeros()
        order = breadth_first_order(graph, start, directed=True, return_predecessors=False)
        out = np.zeros(net.n_nodes, dtype=bool)
        out[order] = True
        return out

    @cached_property
    def source_reachable(self) -> np.ndarray:
        """Residual reachability from the super source, per lattice vertex."""
        return self._reach(self.network.s_node, backward=False)[: self.lattice.num_vertices]

    @cached_property
    def sink_reaching(self) -> np.ndarray:
        """Vertices with a residual path to the super sink."""
        return self._reach(self.network.t_node, backward=True)[: self.lattice.num_vertices]

    def to_json(self) -> dict:
        cut = canonical_min_cut(self)
        return {"value": self.value, "cut": cut.to_json()}


def max_flow(lattice: Lattice, field: CapacityField, sources, sinks) -> FlowResult:
    """Exact integer max flow from `sources` to `sinks` under `field`."""
    net = get_network(lattice, frozenset(sources), frozenset(sinks))
    return net.solve(field.values)


def bottom_top_flow(lattice: Lattice, field: CapacityField) -> FlowResult:
    """The vertical flow: bottom layer to top layer of the cylinder."""
    bottom, top = boundary_sets(lattice.spec)
    return max_flow(lattice, field, bottom, top)


def anchored_flow(lattice: Lattice, field: CapacityField) -> FlowResult:
    """Flow between the lower and upper halves of the cylinder boundary.

    Terminals are cylinder-boundary vertices strictly below / above the
    meridian height H/2; vertices exactly on the meridian join neither side.
    """
    if lattice.spec.H < 2:
        raise ConfigError("anchored flow needs H >= 2")
    below, above = lateral_split(lattice.spec)
    return max_flow(lattice, field, below, above)


def canonical_min_cut(flow: FlowResult) -> CutSet:
    """Source-side minimum cut: edges with exactly one endpoint reachable.

    This is the unique inclusion-minimal source side over all minimum cuts;
    it is deterministic, independent of the particular maximum flow, and
    covariant under vertical translation of the capacity field.
    """
    lat = flow.lattice
    rs = flow.source_reachable
    mask = rs[lat.edge_u] != rs[lat.edge_v]
    edges = np.flatnonzero(mask)
    capacity = int(flow.values[edges].sum())
    h_min = int(lat.edge_h_lo[edges].min())
    h_max = int(lat.edge_h_hi[edges].max())
    return CutSet(tuple(edges.tolist()), capacity, h_min, h_max)


def essential_set(lattice: Lattice, field: CapacityField, sources, sinks) -> frozenset:
    """Edges belonging to every minimum cut.

    Characterisation: {u,v} is essential iff the residual graph of any max
    flow has s~>u and v~>t (or symmetrically); equivalently, raising t_e by
    one scaled unit strictly raises the flow value.
    """
    res = max_flow(lattice, field, sources, sinks)
    return _essential_from_result(res)


def _essential_from_result(res: FlowResult) -> frozenset:
    lat = res.lattice
    rs = res.source_reachable
    rt = res.sink_reaching
    u, v = lat.edge_u, lat.edge_v
    mask = (rs[u] & rt[v]) | (rs[v] & rt[u])
    return frozenset(np.flatnonzero(mask).tolist())


def pivotal_set(lattice: Lattice, field: CapacityField, sources, sinks) -> frozenset:
    """Edges whose upgrade from a to b strictly raises the flow value."""
    return classify_edges(lattice, field, sources, sinks)[0]


def classify_edges(
    lattice: Lattice, field: CapacityField, sources, sinks
) -> tuple[frozenset, frozenset]:
    """(pivotal, essential) from a single flow computation.

    Essential edges pass the residual test directly.  For pivotal edges
    currently at a the same residual test applies (the field already has
    t_e = a); edges at b are re-solved with the edge forced to a.  Both
    branches equal the definitional recomputation.
    """
    res = max_flow(lattice, field, sources, sinks)
    essential = _essential_from_result(res)
    a = field.dist.a
    at_a = field.values == a
    rs = res.source_reachable
    rt = res.sink_reaching
    u, v = lattice.edge_u, lattice.edge_v
    residual_test = (rs[u] & rt[v]) | (rs[v] & rt[u])
    out = set(np.flatnonzero(at_a & residual_test).tolist())
    net = res.network
    for e in np.flatnonzero(~at_a):
        lowered = flip_edge(field, int(e), a)
        if net.solve(lowered.values).value < res.value:
            out.add(int(e))
    return frozenset(out), essential
