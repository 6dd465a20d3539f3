"""Cylinder lattice geometry.

The lattice is the closed box [0,n]^{d-1} x [0,H] of Z^d with nearest
neighbour edges.  Vertices and edges get dense integer ids so capacity
fields are plain arrays; neighbour moves are stride arithmetic, no stored
adjacency lists.  Everything here is deterministic and immutable after
construction, so a single Lattice can be shared across workers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityLimitError, ConfigError

MAX_VERTICES = 1 << 28


@dataclass(frozen=True)
class CylinderSpec:
    """Dimensions of the cylinder: ambient dimension d, side n, height H."""

    d: int
    n: int
    H: int

    def __post_init__(self):
        if self.d < 2:
            raise ConfigError(f"dimension d must be >= 2, got {self.d}")
        if self.n < 0:
            raise ConfigError(f"side n must be >= 0, got {self.n}")
        if self.H < 1:
            raise ConfigError(f"height H must be >= 1, got {self.H}")

    @property
    def base_count(self) -> int:
        return (self.n + 1) ** (self.d - 1)

    @property
    def vertex_count(self) -> int:
        return self.base_count * (self.H + 1)

    @property
    def edge_count(self) -> int:
        d, n, H = self.d, self.n, self.H
        horizontal = (d - 1) * n * (n + 1) ** (d - 2) * (H + 1)
        vertical = (n + 1) ** (d - 1) * H
        return horizontal + vertical


@dataclass(frozen=True)
class Plaquette:
    """Unit (d-1)-hypersquare dual to an edge, normal to it at its midpoint."""

    center: tuple[float, ...]
    normal_axis: int
    corners: tuple[tuple[float, ...], ...]


class Lattice:
    """Dense id tables for one CylinderSpec.

    Vertex ids are row-major with x_d slowest: id = x_d * (n+1)^{d-1} + base
    index, the base index running fastest in x_{d-1}.  Edge ids are grouped
    by axis (1..d-1 horizontal, d vertical), sorted by base vertex id inside
    each group; an edge is identified by its lower endpoint (base) and axis.
    """

    def __init__(self, spec: CylinderSpec):
        if spec.vertex_count > MAX_VERTICES:
            raise CapacityLimitError(
                f"vertex count {spec.vertex_count} exceeds dense-index limit {MAX_VERTICES}"
            )
        self.spec = spec
        d, n, H = spec.d, spec.n, spec.H
        self.num_vertices = spec.vertex_count
        self.base_count = spec.base_count

        # coords[:, j] = x_{j+1}; the last column is the height x_d.
        dims = (H + 1,) + (n + 1,) * (d - 1)
        grids = np.indices(dims).reshape(d, -1)
        self.coords = np.empty((self.num_vertices, d), dtype=np.int64)
        self.coords[:, d - 1] = grids[0]
        for j in range(d - 1):
            self.coords[:, j] = grids[j + 1]
        self.v_height = self.coords[:, d - 1]

        # vid stride of a +1 move along each axis
        self.strides = np.empty(d, dtype=np.int64)
        for axis in range(1, d):
            self.strides[axis - 1] = (n + 1) ** (d - 1 - axis)
        self.strides[d - 1] = self.base_count

        edge_u, edge_axis = [], []
        for axis in range(1, d + 1):
            limit = n if axis < d else H
            mask = self.coords[:, axis - 1] < limit
            base = np.flatnonzero(mask)
            edge_u.append(base)
            edge_axis.append(np.full(base.shape, axis, dtype=np.int64))
        self.edge_u = np.concatenate(edge_u)
        self.edge_axis = np.concatenate(edge_axis)
        self.edge_v = self.edge_u + self.strides[self.edge_axis - 1]
        self.num_edges = int(self.edge_u.shape[0])
        assert self.num_edges == spec.edge_count

        self.edge_of = np.full((self.num_vertices, d), -1, dtype=np.int64)
        self.edge_of[self.edge_u, self.edge_axis - 1] = np.arange(self.num_edges)

        self.edge_h_lo = self.v_height[self.edge_u]
        self.edge_h_hi = self.v_height[self.edge_v]

    # -- id maps ---------------------------------------------------------

    def vertex_id(self, coords) -> int:
        c = np.asarray(coords, dtype=np.int64)
        return int(c @ self.strides)

    def vertex_coords(self, vid: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.coords[vid])

    def edge_id(self, base_vid: int, axis: int) -> int:
        e = int(self.edge_of[base_vid, axis - 1])
        if e < 0:
            raise ConfigError(f"no edge with base {base_vid} along axis {axis}")
        return e

    def edge_endpoints(self, e: int) -> tuple[int, int]:
        return int(self.edge_u[e]), int(self.edge_v[e])

    def neighbors(self, vid: int):
        """Adjacent vertex ids, by stride arithmetic."""
        out = []
        c = self.coords[vid]
        n, H, d = self.spec.n, self.spec.H, self.spec.d
        for axis in range(1, d + 1):
            limit = n if axis < d else H
            if c[axis - 1] > 0:
                out.append(vid - int(self.strides[axis - 1]))
            if c[axis - 1] < limit:
                out.append(vid + int(self.strides[axis - 1]))
        return out

    # -- geometry ops ----------------------------------------------------

    def shift_edge(self, e: int, k: int) -> int | None:
        """Edge translated by k*e_d, or None if it leaves the cylinder."""
        if k == 0:
            return e
        axis = int(self.edge_axis[e])
        base = int(self.edge_u[e])
        h = int(self.v_height[base])
        top = self.spec.H - (1 if axis == self.spec.d else 0)
        if not (0 <= h + k <= top):
            return None
        return int(self.edge_of[base + k * self.base_count, axis - 1])

    def dual_plaquette(self, e: int) -> Plaquette:
        d = self.spec.d
        u = self.coords[self.edge_u[e]].astype(float)
        axis = int(self.edge_axis[e])
        center = u.copy()
        center[axis - 1] += 0.5
        others = [j for j in range(d) if j != axis - 1]
        if d == 2:
            signs = [(-0.5,), (0.5,)]
        elif d == 3:
            signs = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]  # cyclic
        else:
            signs = list(itertools.product((-0.5, 0.5), repeat=d - 1))
        corners = []
        for sg in signs:
            c = center.copy()
            for j, s in zip(others, sg):
                c[j] += s
            corners.append(tuple(c.tolist()))
        return Plaquette(tuple(center.tolist()), axis, tuple(corners))


@lru_cache(maxsize=None)
def get_lattice(spec: CylinderSpec) -> Lattice:
    return Lattice(spec)


def build_lattice(spec: CylinderSpec) -> Lattice:
    return get_lattice(spec)


def boundary_sets(spec: CylinderSpec) -> tuple[frozenset, frozenset]:
    """(bottom, top) vertex layers: x_d = 0 and x_d = H."""
    lat = get_lattice(spec)
    b = lat.base_count
    bottom = frozenset(range(b))
    top = frozenset(range(spec.H * b, (spec.H + 1) * b))
    return bottom, top


def lateral_split(spec: CylinderSpec) -> tuple[frozenset, frozenset]:
    """Cylinder-boundary vertices strictly below / above the meridian H/2."""
    lat = get_lattice(spec)
    c = lat.coords
    on_boundary = (c[:, spec.d - 1] == 0) | (c[:, spec.d - 1] == spec.H)
    for j in range(spec.d - 1):
        on_boundary |= (c[:, j] == 0) | (c[:, j] == spec.n)
    below = on_boundary & (2 * c[:, spec.d - 1] < spec.H)
    above = on_boundary & (2 * c[:, spec.d - 1] > spec.H)
    return frozenset(np.flatnonzero(below).tolist()), frozenset(np.flatnonzero(above).tolist())


def slab_edge_boundary(spec: CylinderSpec, subset) -> int:
    """|ΔA|: unordered adjacent pairs of [0,n]^{d-1} crossing the subset boundary."""
    pts = set(tuple(int(x) for x in p) for p in subset)
    n, d = spec.n, spec.d
    for p in pts:
        if len(p) != d - 1 or any(not (0 <= x <= n) for x in p):
            raise ConfigError(f"subset point {p} outside [0,{n}]^{d-1}")
    count = 0
    for p in pts:
        for j in range(d - 1):
            for s in (-1, 1):
                q = p[:j] + (p[j] + s,) + p[j + 1 :]
                if 0 <= q[j] <= n and q not in pts:
                    count += 1
    return count


@lru_cache(maxsize=None)
def sub_edge_map(
    spec: CylinderSpec,
    sub_spec: CylinderSpec,
    base_offset: tuple[int, ...],
    height_offset: int,
) -> np.ndarray:
    """Map sub-lattice edge ids to parent edge ids under a rigid translation.

    The sub-cylinder occupies [o, o + n'] per horizontal axis and
    [height_offset, height_offset + H'] vertically inside the parent.
    """
    if sub_spec.d != spec.d:
        raise ConfigError("sub-lattice must share the ambient dimension")
    if len(base_offset) != spec.d - 1:
        raise ConfigError("base_offset must have d-1 entries")
    for o, lim in zip(base_offset, (spec.n,) * (spec.d - 1)):
        if not (0 <= o and o + sub_spec.n <= lim):
            raise ConfigError("sub-cylinder leaves the parent horizontally")
    if not (0 <= height_offset and height_offset + sub_spec.H <= spec.H):
        raise ConfigError("sub-cylinder leaves the parent vertically")
    parent = get_lattice(spec)
    sub = get_lattice(sub_spec)
    offset = np.array(list(base_offset) + [height_offset], dtype=np.int64)
    base_coords = sub.coords[sub.edge_u] + offset
    parent_vids = base_coords @ parent.strides
    mapping = parent.edge_of[parent_vids, sub.edge_axis - 1]
    assert (mapping >= 0).all()
    mapping.flags.writeable = False
    return mapping


# -- geometry export ------------------------------------------------------


def export_plaquettes_csv(lattice: Lattice, edges, path) -> None:
    """One plaquette per row: edge id, normal axis, then corner coordinates."""
    d = lattice.spec.d
    ncorners = 2 if d == 2 else 2 ** (d - 1)
    header = ["edge_id", "normal_axis"]
    for k in range(ncorners):
        header += [f"c{k}_x{j + 1}" for j in range(d)]
    lines = [",".join(header)]
    for e in sorted(int(x) for x in edges):
        p = lattice.dual_plaquette(e)
        row = [str(e), str(p.normal_axis)]
        for corner in p.corners:
            row += [f"{x:.1f}" for x in corner]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def export_plaquettes_polygons(lattice: Lattice, edges, path) -> None:
    """Indexed-polygon text: counts, vertex lines, then per-plaquette index lines."""
    verts: dict[tuple, int] = {}
    polys = []
    for e in sorted(int(x) for x in edges):
        p = lattice.dual_plaquette(e)
        idx = []
        for corner in p.corners:
            if corner not in verts:
                verts[corner] = len(verts)
            idx.append(verts[corner])
        polys.append(idx)
    lines = [f"{len(verts)} {len(polys)}"]
    for corner in verts:
        lines.append(" ".join(f"{x:.1f}" for x in corner))
    for idx in polys:
        lines.append(f"{len(idx)} " + " ".join(str(i) for i in idx))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
