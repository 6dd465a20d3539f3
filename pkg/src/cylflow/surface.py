"""Cut-set validation and chimney-scan diagnostics.

The chimney scan walks the horizontal layers of a minimum cut from its top
(and bottom), computing for each layer the blocked set A(i) — points whose
every path to the top of the sub-cylinder crosses the cut — its edge
boundary, the patched cut-sets, the layer constraint a|E\\F_i| <= b|A(i)|,
and the stopping layers at which the blocked set nearly fills the slab.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .capacity import CapacityField
from .errors import ConfigError
from .lattice import Lattice, boundary_sets


def _incident(lattice: Lattice, vid: int):
    """(neighbor, edge id) pairs around a vertex, by stride arithmetic."""
    spec = lattice.spec
    out = []
    c = lattice.coords[vid]
    for axis in range(1, spec.d + 1):
        limit = spec.n if axis < spec.d else spec.H
        stride = int(lattice.strides[axis - 1])
        if c[axis - 1] > 0:
            w = vid - stride
            out.append((w, int(lattice.edge_of[w, axis - 1])))
        if c[axis - 1] < limit:
            out.append((vid + stride, int(lattice.edge_of[vid, axis - 1])))
    return out


def validate_cutset(lattice: Lattice, edges, sources, sinks) -> bool:
    """True iff no path from sources to sinks survives removing `edges`."""
    blocked = set(int(e) for e in edges)
    sinks = set(sinks)
    visited = np.zeros(lattice.num_vertices, dtype=bool)
    queue = [int(s) for s in sources]
    visited[queue] = True
    while queue:
        v = queue.pop()
        if v in sinks:
            return False
        for w, e in _incident(lattice, v):
            if not visited[w] and e not in blocked:
                visited[w] = True
                queue.append(w)
    return True


def vertical_extent(lattice: Lattice, edges) -> tuple[int, int]:
    """(h_min, h_max) over the endpoint heights of the given edges."""
    idx = np.fromiter((int(e) for e in edges), dtype=np.int64)
    if idx.size == 0:
        raise ConfigError("vertical_extent of an empty edge set")
    return int(lattice.edge_h_lo[idx].min()), int(lattice.edge_h_hi[idx].max())


def _blocked_profile(lattice: Lattice, cut_edges) -> tuple[int, int, list[frozenset]]:
    """h_min, h_max and A(j) for j=0..h_max-h_min by incremental reachability.

    A(j) is the set of layer-(h_max-j) vertices from which every path to the
    top layer inside the sub-cylinder of heights [h_max-j, H] crosses the cut.
    """
    blocked = set(int(e) for e in cut_edges)
    h_min, h_max = vertical_extent(lattice, blocked)
    B = lattice.base_count
    heights = lattice.v_height
    visited = np.zeros(lattice.num_vertices, dtype=bool)

    def expand(seeds, floor):
        queue = list(seeds)
        for v in queue:
            visited[v] = True
        while queue:
            v = queue.pop()
            for w, e in _incident(lattice, v):
                if not visited[w] and heights[w] >= floor and e not in blocked:
                    visited[w] = True
                    queue.append(w)

    top = list(range(lattice.spec.H * B, (lattice.spec.H + 1) * B))
    expand(top, h_max)
    a_sets = []
    for j in range(0, h_max - h_min + 1):
        floor = h_max - j
        if j > 0:
            layer = range(floor * B, (floor + 1) * B)
            seeds = [
                x
                for x in layer
                if any(visited[w] and e not in blocked for w, e in _incident(lattice, x))
            ]
            expand(seeds, floor)
        layer = range(floor * B, (floor + 1) * B)
        a_sets.append(frozenset(x for x in layer if not visited[x]))
    return h_min, h_max, a_sets


def _layer_boundary_edges(lattice: Lattice, a_set: frozenset, height: int) -> frozenset:
    """Horizontal edges at `height` crossing between a_set and its layer complement."""
    out = set()
    for x in a_set:
        for w, e in _incident(lattice, x):
            if lattice.v_height[w] == height and w not in a_set:
                out.add(e)
    return frozenset(out)


@dataclass
class ChimneyScan:
    """Per-layer diagnostics of one minimum cut (indices i = 1..extent)."""

    h_min: int
    h_max: int
    extent: int
    A_sets: tuple[frozenset, ...]
    boundary_sizes: tuple[int, ...]
    boundary_subset_ok: tuple[bool, ...]
    E_minus_F: tuple[int, ...]
    constraint_ok: tuple[bool, ...]
    constraint_slack: tuple[int, ...]
    T_stop: int | None
    hatA_sets: tuple[frozenset, ...]
    hatT_stop: int | None
    a: int
    b: int

    def to_json(self) -> dict:
        return {
            "h_min": self.h_min,
            "h_max": self.h_max,
            "extent": self.extent,
            "A_sizes": [len(s) for s in self.A_sets],
            "boundary_sizes": list(self.boundary_sizes),
            "boundary_subset_ok": list(self.boundary_subset_ok),
            "E_minus_F": list(self.E_minus_F),
            "constraint_ok": list(self.constraint_ok),
            "constraint_slack": list(self.constraint_slack),
            "T_stop": self.T_stop,
            "hatA_sizes": [len(s) for s in self.hatA_sets],
            "hatT_stop": self.hatT_stop,
        }


def chimney_scan(lattice: Lattice, field: CapacityField, cut_edges) -> ChimneyScan:
    """Scan the horizontal slices of a validated minimum cut."""
    sources, sinks = boundary_sets(lattice.spec)
    edges = frozenset(int(e) for e in cut_edges)
    if not validate_cutset(lattice, edges, sources, sinks):
        raise ConfigError("chimney_scan requires a valid cut-set")
    h_min, h_max, a_all = _blocked_profile(lattice, edges)
    extent = h_max - h_min
    a, b = field.dist.a, field.dist.b
    B = lattice.base_count
    idx = np.fromiter(edges, dtype=np.int64)

    a_sets, bsizes, bok, emf, cok, slack = [], [], [], [], [], []
    for i in range(1, extent + 1):
        height = h_max - i
        A = a_all[i]
        a_sets.append(A)
        boundary = _layer_boundary_edges(lattice, A, height)
        bsizes.append(len(boundary))
        layer_cut = {
            int(e)
            for e in idx
            if lattice.edge_axis[e] < lattice.spec.d and lattice.edge_h_lo[e] == height
        }
        bok.append(boundary <= layer_cut)
        f_i = int((lattice.edge_h_hi[idx] <= height).sum())
        rest = len(edges) - f_i
        emf.append(rest)
        cok.append(a * rest <= b * len(A))
        slack.append(b * len(A) - a * rest)

    threshold = (10 * b - a, 10 * b)  # |A| >= (1 - a/10b) B, exactly
    T_stop = next(
        (
            i
            for i in range(1, extent + 1)
            if threshold[1] * len(a_sets[i - 1]) >= threshold[0] * B
        ),
        None,
    )
    hat_sets = [a_all[extent - i] for i in range(1, extent + 1)]
    hatT_stop = next(
        (
            i
            for i in range(1, extent + 1)
            if threshold[1] * (B - len(hat_sets[i - 1])) >= threshold[0] * B
        ),
        None,
    )
    return ChimneyScan(
        h_min=h_min,
        h_max=h_max,
        extent=extent,
        A_sets=tuple(a_sets),
        boundary_sizes=tuple(bsizes),
        boundary_subset_ok=tuple(bok),
        E_minus_F=tuple(emf),
        constraint_ok=tuple(cok),
        constraint_slack=tuple(slack),
        T_stop=T_stop,
        hatA_sets=tuple(hat_sets),
        hatT_stop=hatT_stop,
        a=a,
        b=b,
    )


def patched_cutsets(lattice: Lattice, cut_edges, i: int) -> tuple[frozenset, frozenset]:
    """The two patched cut-sets at layer i (upper and lower scan).

    Upper: edges of the cut at or below layer h_max-i, plus the vertical
    edges hanging below the blocked set A(i).  Lower: edges at or above
    layer h_min+i, plus vertical edges rising from the complement of the
    lower blocked set.  Layers where the added vertical edges would leave
    the cylinder degenerate to the cut itself.
    """
    edges = frozenset(int(e) for e in cut_edges)
    h_min, h_max, a_all = _blocked_profile(lattice, edges)
    extent = h_max - h_min
    B = lattice.base_count
    idx = np.fromiter(edges, dtype=np.int64)
    d = lattice.spec.d

    if 1 <= i <= extent and h_max - i >= 1:
        f_i = {int(e) for e in idx if lattice.edge_h_hi[e] <= h_max - i}
        hanging = {
            int(lattice.edge_of[x - B, d - 1]) for x in a_all[i]
        }  # vertical edge {x, x - e_d}
        upper = frozenset(f_i | hanging)
    else:
        upper = edges

    if 1 <= i <= extent and h_min + i <= lattice.spec.H - 1:
        g_i = {int(e) for e in idx if lattice.edge_h_lo[e] >= h_min + i}
        hat_a = a_all[extent - i]
        layer = range((h_min + i) * B, (h_min + i + 1) * B)
        rising = {
            int(lattice.edge_of[x, d - 1]) for x in layer if x not in hat_a
        }  # vertical edge {x, x + e_d}
        lower = frozenset(g_i | rising)
    else:
        lower = edges
    return upper, lower
