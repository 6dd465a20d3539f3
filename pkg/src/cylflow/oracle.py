"""Brute-force ground truth on tiny instances.

Everything here is computed by enumeration with exact rational arithmetic
and never calls the flow engine: cut values come from the list of all
source-side bipartition boundaries (every inclusion-minimal cutset is the
edge boundary of a closed source side), Lipschitz values from exhaustive
height enumeration.  This keeps the oracle an independent check on the
production path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .capacity import CapacityField, TwoPointDist
from .errors import ConfigError, GuardError
from .flow import CutSet
from .lattice import CylinderSpec, Lattice, boundary_sets, get_lattice, lateral_split

_CHUNK = 1 << 14


@dataclass(frozen=True)
class EnumerationGuard:
    max_configs: int = 1 << 24
    max_cut_subsets: int = 1 << 22


DEFAULT_GUARD = EnumerationGuard()


class CutBasis:
    """All distinct bipartition boundaries separating sinks from sources."""

    def __init__(self, lattice: Lattice, sources: frozenset, sinks: frozenset, guard: EnumerationGuard):
        free = sorted(set(range(lattice.num_vertices)) - sources - sinks)
        if 2 ** len(free) > guard.max_cut_subsets:
            raise GuardError(
                f"2^{len(free)} source-side bipartitions exceed guard {guard.max_cut_subsets}"
            )
        if lattice.num_edges > 63:
            raise GuardError("cut enumeration needs <= 63 edges for bitmask arithmetic")
        u, v = lattice.edge_u, lattice.edge_v
        side = np.zeros(lattice.num_vertices, dtype=bool)
        side[list(sources)] = True
        free_idx = np.array(free, dtype=np.int64)
        seen: dict[int, np.ndarray] = {}
        for bits in range(2 ** len(free)):
            if free_idx.size:
                side[free_idx] = False
                chosen = [free[j] for j in range(len(free)) if (bits >> j) & 1]
                side[chosen] = True
            boundary = np.flatnonzero(side[u] != side[v])
            mask = 0
            for e in boundary:
                mask |= 1 << int(e)
            if mask and mask not in seen:
                seen[mask] = boundary.copy()
        self.lattice = lattice
        self.masks = sorted(seen)
        self.edge_arrays = [seen[m] for m in self.masks]
        self.sizes = np.array([arr.size for arr in self.edge_arrays], dtype=np.int64)
        # (M, E) bit matrix for vectorised capacity evaluation
        E = lattice.num_edges
        self.bit_matrix = np.zeros((len(self.masks), E), dtype=np.int64)
        for i, arr in enumerate(self.edge_arrays):
            self.bit_matrix[i, arr] = 1

    def value(self, values: np.ndarray) -> int:
        """Minimum cutset capacity under the given edge values."""
        return int(min(int(values[arr].sum()) for arr in self.edge_arrays))


_BASES: dict = {}


def cut_basis(
    lattice: Lattice, sources, sinks, guard: EnumerationGuard = DEFAULT_GUARD
) -> CutBasis:
    key = (lattice.spec, frozenset(sources), frozenset(sinks))
    basis = _BASES.get(key)
    if basis is None:
        basis = _BASES[key] = CutBasis(lattice, frozenset(sources), frozenset(sinks), guard)
    return basis


def _terminals(spec: CylinderSpec, quantity: str):
    if quantity == "flow":
        return boundary_sets(spec)
    if quantity == "anchored":
        return lateral_split(spec)
    raise ConfigError(f"unsupported oracle quantity {quantity!r}")


def enumerate_min_cuts(
    lattice: Lattice,
    field: CapacityField,
    sources=None,
    sinks=None,
    guard: EnumerationGuard = DEFAULT_GUARD,
) -> list[CutSet]:
    """All inclusion-minimal minimum-capacity cutsets, deterministically sorted."""
    if sources is None or sinks is None:
        sources, sinks = boundary_sets(lattice.spec)
    basis = cut_basis(lattice, sources, sinks, guard)
    caps = [int(field.values[arr].sum()) for arr in basis.edge_arrays]
    best = min(caps)
    out = []
    for cap, arr in zip(caps, basis.edge_arrays):
        if cap == best:
            h = lattice.v_height
            lo = int(min(h[lattice.edge_u[arr]].min(), h[lattice.edge_v[arr]].min()))
            hi = int(max(h[lattice.edge_u[arr]].max(), h[lattice.edge_v[arr]].max()))
            out.append(CutSet(tuple(int(e) for e in arr), best, lo, hi))
    out.sort(key=lambda c: c.edges)
    return out


def _value_table(basis: CutBasis, dist: TwoPointDist, guard: EnumerationGuard) -> np.ndarray:
    """Min-cut value for every capacity configuration (bit e set => t_e = b)."""
    E = basis.lattice.num_edges
    n_configs = 1 << E
    if n_configs > guard.max_configs:
        raise GuardError(f"2^{E} configurations exceed guard {guard.max_configs}")
    base = basis.sizes * dist.a  # capacity of each cut with all edges at a
    step = dist.b - dist.a
    values = np.empty(n_configs, dtype=np.int64)
    shifts = np.arange(E, dtype=np.uint64)
    for lo in range(0, n_configs, _CHUNK):
        hi = min(lo + _CHUNK, n_configs)
        cfg = np.arange(lo, hi, dtype=np.uint64)
        bits = ((cfg[:, None] >> shifts[None, :]) & 1).astype(np.int64)
        counts = bits @ basis.bit_matrix.T  # (chunk, M) popcount(mask & config)
        values[lo:hi] = (base[None, :] + step * counts).min(axis=1)
    return values


def _config_weight_factors(dist: TwoPointDist, E: int) -> list[Fraction]:
    """weight(k) for a configuration with k edges at value b."""
    p, q = dist.p_a, 1 - dist.p_a
    return [p ** (E - k) * q**k for k in range(E + 1)]


def _popcounts(E: int) -> np.ndarray:
    n = 1 << E
    out = np.zeros(n, dtype=np.int64)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        cfg = np.arange(lo, hi, dtype=np.uint64)
        bits = (cfg[:, None] >> np.arange(E, dtype=np.uint64)[None, :]) & 1
        out[lo:hi] = bits.sum(axis=1)
    return out


def exact_moments(
    spec: CylinderSpec,
    dist: TwoPointDist,
    quantity: str = "flow",
    guard: EnumerationGuard = DEFAULT_GUARD,
) -> tuple[Fraction, Fraction]:
    """(E[f], Var[f]) as exact rationals by full configuration enumeration."""
    if quantity == "lipschitz":
        return _exact_moments_lipschitz(spec, dist, guard)
    lat = get_lattice(spec)
    sources, sinks = _terminals(spec, quantity)
    basis = cut_basis(lat, sources, sinks, guard)
    values = _value_table(basis, dist, guard)
    E = lat.num_edges
    k = _popcounts(E)
    s1 = np.zeros(E + 1, dtype=object)
    s2 = np.zeros(E + 1, dtype=object)
    for kk in range(E + 1):
        sel = values[k == kk]
        s1[kk] = int(sel.sum())
        s2[kk] = int((sel.astype(object) ** 2).sum())
    w = _config_weight_factors(dist, E)
    mean = sum(w[kk] * s1[kk] for kk in range(E + 1))
    second = sum(w[kk] * s2[kk] for kk in range(E + 1))
    return mean, second - mean**2


def _exact_moments_lipschitz(spec, dist, guard) -> tuple[Fraction, Fraction]:
    from .lipschitz import VertexWeightField, brute_force_lipschitz

    lat = get_lattice(spec)
    V = lat.num_vertices
    if 2**V > guard.max_configs:
        raise GuardError(f"2^{V} vertex configurations exceed guard {guard.max_configs}")
    w = _config_weight_factors(dist, V)
    mean = Fraction(0)
    second = Fraction(0)
    weights = np.empty(V, dtype=np.int64)
    for cfg in range(2**V):
        for i in range(V):
            weights[i] = dist.b if (cfg >> i) & 1 else dist.a
        val = brute_force_lipschitz(VertexWeightField(weights, dist, -1, -1, spec))
        k = cfg.bit_count()
        mean += w[k] * val
        second += w[k] * val * val
    return mean, second - mean**2


def oracle_value(lattice: Lattice, field: CapacityField, quantity: str = "flow",
                 guard: EnumerationGuard = DEFAULT_GUARD) -> int:
    """Min-cut value of one field by enumeration (never via the flow engine)."""
    sources, sinks = _terminals(lattice.spec, quantity)
    return cut_basis(lattice, sources, sinks, guard).value(field.values)


def _field_config(field: CapacityField) -> int:
    cfg = 0
    b = field.dist.b
    for e, val in enumerate(field.values):
        if val == b:
            cfg |= 1 << e
    return cfg


def exact_pivotal_set(
    lattice: Lattice,
    field: CapacityField,
    sources=None,
    sinks=None,
    guard: EnumerationGuard = DEFAULT_GUARD,
) -> frozenset:
    """Definitional pivotal set from the enumerated value table."""
    if sources is None or sinks is None:
        sources, sinks = boundary_sets(lattice.spec)
    basis = cut_basis(lattice, sources, sinks, guard)
    values = _value_table(basis, field.dist, guard)
    cfg = _field_config(field)
    out = set()
    for e in range(lattice.num_edges):
        if values[cfg | (1 << e)] > values[cfg & ~(1 << e)]:
            out.add(e)
    return frozenset(out)


def exact_essential_set(
    lattice: Lattice,
    field: CapacityField,
    sources=None,
    sinks=None,
    guard: EnumerationGuard = DEFAULT_GUARD,
) -> frozenset:
    """Intersection of all enumerated minimum cuts."""
    cuts = enumerate_min_cuts(lattice, field, sources, sinks, guard)
    out = set(cuts[0].edges)
    for c in cuts[1:]:
        out &= set(c.edges)
    return frozenset(out)


def _pivotal_masks(basis: CutBasis, dist: TwoPointDist, guard: EnumerationGuard) -> list[int]:
    values = _value_table(basis, dist, guard)
    E = basis.lattice.num_edges
    masks = [0] * (1 << E)
    for cfg in range(1 << E):
        m = 0
        for e in range(E):
            if values[cfg | (1 << e)] > values[cfg & ~(1 << e)]:
                m |= 1 << e
        masks[cfg] = m
    return masks


def exact_chaos_integral(
    spec: CylinderSpec,
    dist: TwoPointDist,
    quantity: str = "flow",
    guard: EnumerationGuard = DEFAULT_GUARD,
) -> Fraction:
    """Var(t_e) * integral over t of E|P_0 ∩ P_t|, as an exact rational.

    Joint enumeration of the base and fresh configurations; for each pair
    only the differing edges matter, and the t-integral of the resampled
    subset weight is a Beta integral, so the whole curve integrates in
    closed form.

    Equals the exact variance whenever the capacity gap b - a is one unit
    (then every single-edge increment is 0 or b-a); for wider gaps an edge
    upgrade may be only partially usable and the pivotal-indicator form is
    an upper bound on the variance.
    """
    lat = get_lattice(spec)
    E = lat.num_edges
    if 4**E > guard.max_configs:
        raise GuardError(f"4^{E} joint configurations exceed guard {guard.max_configs}")
    sources, sinks = _terminals(spec, quantity)
    basis = cut_basis(lat, sources, sinks, guard)
    piv = _pivotal_masks(basis, dist, guard)
    w = _config_weight_factors(dist, E)
    # integer accumulator per (k_base, k_fresh, |S|, |D|) probability class
    acc: dict[tuple[int, int, int, int], int] = {}
    full = (1 << E) - 1
    for c in range(1 << E):
        pc = piv[c]
        kc = c.bit_count()
        for c2 in range(1 << E):
            kc2 = c2.bit_count()
            diff = c ^ c2
            dsz = diff.bit_count()
            # iterate submasks S of diff (including 0)
            s = diff
            while True:
                mixed = (c & ~s) | (c2 & s)
                hits = (pc & piv[mixed]).bit_count()
                if hits:
                    key = (kc, kc2, s.bit_count(), dsz)
                    acc[key] = acc.get(key, 0) + hits
                if s == 0:
                    break
                s = (s - 1) & diff
    total = Fraction(0)
    beta_cache: dict[tuple[int, int], Fraction] = {}
    for (kc, kc2, ssz, dsz), hits in acc.items():
        beta = beta_cache.get((ssz, dsz))
        if beta is None:
            beta = Fraction(factorial(ssz) * factorial(dsz - ssz), factorial(dsz + 1))
            beta_cache[(ssz, dsz)] = beta
        total += w[kc] * w[kc2] * beta * hits
    return dist.variance * total


def exact_derivative_norms(
    spec: CylinderSpec,
    dist: TwoPointDist,
    quantity: str = "flow",
    guard: EnumerationGuard = DEFAULT_GUARD,
) -> tuple[list[Fraction], list[Fraction]]:
    """Per-edge (L1 norm, squared L2 norm) of the discrete derivative.

    The derivative magnitude |f(sigma_e^b w) - f(sigma_e^a w)|/2 does not
    depend on w_e, so averaging over all configurations gives the exact
    conditional norms.
    """
    lat = get_lattice(spec)
    sources, sinks = _terminals(spec, quantity)
    basis = cut_basis(lat, sources, sinks, guard)
    values = _value_table(basis, dist, guard)
    E = lat.num_edges
    w = _config_weight_factors(dist, E)
    l1 = [Fraction(0)] * E
    l2sq = [Fraction(0)] * E
    for e in range(E):
        counts: dict[tuple[int, int], int] = {}
        for cfg in range(1 << E):
            delta = int(values[cfg | (1 << e)] - values[cfg & ~(1 << e)])
            key = (cfg.bit_count(), delta)
            counts[key] = counts.get(key, 0) + 1
        for (k, delta), cnt in counts.items():
            l1[e] += w[k] * cnt * Fraction(delta, 2)
            l2sq[e] += w[k] * cnt * Fraction(delta, 2) ** 2
    return l1, l2sq


def guarded_tiny_instances(max_edges: int = 13, unit_gap_only: bool = False):
    """Deterministic list of guarded (spec, dist) pairs used by the test suite.

    unit_gap_only keeps distributions with b - a = 1, the regime where the
    chaos integral identity is exact.
    """
    specs = [
        CylinderSpec(2, 0, 1),
        CylinderSpec(2, 0, 2),
        CylinderSpec(2, 0, 3),
        CylinderSpec(2, 0, 4),
        CylinderSpec(2, 0, 5),
        CylinderSpec(2, 0, 6),
        CylinderSpec(2, 1, 1),
        CylinderSpec(2, 1, 2),
        CylinderSpec(2, 2, 1),
        CylinderSpec(2, 1, 3),
        CylinderSpec(3, 1, 1),
    ]
    dists = [
        TwoPointDist(1, 2, Fraction(1, 2)),
        TwoPointDist(1, 3, Fraction(1, 3)),
        TwoPointDist(2, 3, Fraction(3, 4)),
        TwoPointDist(1, 2, Fraction(1, 4)),
    ]
    out = []
    for spec, dist in itertools.product(specs, dists):
        if unit_gap_only and dist.b - dist.a != 1:
            continue
        if spec.edge_count <= max_edges:
            out.append((spec, dist))
    return out
