"""Sliced flows and the penalised minimum.

X_i is the exact bottom-to-top flow of the slab [0,n]^{d-1} x [i, i+s]; the
penalty family Y_i vanishes in a wide window around a randomised centre and
grows linearly outside, repelling the argmin from the cylinder ends.  The
penalised minimum returns the smallest argmin index and the canonical cut
of the winning slab (translation covariant by construction).

Slab index 0 is admitted alongside the usual 1..H-s, with its penalty
clamped to Y_1: this keeps Phi = min_i X_i an identity even when every
minimum cut touches the bottom layer, while preserving the exact
|penalised - plain| <= n^{(d-1)/2}/log n bound whenever M = floor(n^eps)
is 1 (true for all n below 2^{1/eps}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .capacity import CapacityField, TwoPointDist, sample_field
from .errors import ConfigError
from .flow import CutSet, FlowResult, bottom_top_flow, canonical_min_cut, get_network
from .lattice import CylinderSpec, boundary_sets, get_lattice, sub_edge_map
from .rng import uniforms


def floor_power(n: int, exponent: Fraction) -> int:
    """Largest integer m with m <= n**exponent, by exact integer comparison."""
    p, q = exponent.numerator, exponent.denominator
    target = n**p
    m = 0
    while (m + 1) ** q <= target:
        m += 1
    return m


@dataclass(frozen=True)
class PenaltyParams:
    epsilon: Fraction
    delta: Fraction
    slab_height: int
    M: int

    def __post_init__(self):
        if not (0 < self.epsilon < self.delta < Fraction(1, 4)):
            raise ConfigError(
                f"need 0 < epsilon < delta < 1/4, got {self.epsilon}, {self.delta}"
            )
        if self.slab_height < 1:
            raise ConfigError("slab_height must be >= 1")
        if self.M < 1:
            raise ConfigError("M must be >= 1")

    @classmethod
    def for_cylinder(
        cls,
        spec: CylinderSpec,
        slab_height: int,
        epsilon: Fraction = Fraction(1, 10),
        delta: Fraction = Fraction(1, 5),
    ) -> "PenaltyParams":
        if slab_height > spec.H:
            raise ConfigError("slab_height exceeds the cylinder height")
        return cls(Fraction(epsilon), Fraction(delta), slab_height, floor_power(spec.n, Fraction(epsilon)))


@dataclass(frozen=True)
class PenaltyProfile:
    """Randomised centre i0 and the penalty family Y_i (index 0..H)."""

    i0: int
    Y: np.ndarray
    Z: np.ndarray
    S_M: int


def _y_family(i0: int, spec: CylinderSpec, params: PenaltyParams) -> np.ndarray:
    n, H, d = spec.n, spec.H, spec.d
    nd = float(n) ** float(params.delta)
    slope = float(n) ** ((d - 1) / 2) / (nd * math.log(n))
    i = np.arange(H + 1, dtype=float)
    excess = np.abs(i0 - i) - (H / 2 - nd)
    y = np.where(excess <= 0.0, 0.0, slope * excess)
    y.flags.writeable = False
    return y


def profile_from_Z(params: PenaltyParams, spec: CylinderSpec, Z: np.ndarray) -> PenaltyProfile:
    if spec.n < 2:
        raise ConfigError("penalty profile needs n >= 2 (log n > 0)")
    Z = np.asarray(Z, dtype=np.int64)
    if Z.size != params.M or not np.isin(Z, (-1, 1)).all():
        raise ConfigError("Z must be M draws from {-1,+1}")
    s_m = int(Z.sum())
    i0 = spec.H // 2 + s_m
    return PenaltyProfile(i0=i0, Y=_y_family(i0, spec, params), Z=Z, S_M=s_m)


def penalty_profile(
    params: PenaltyParams,
    spec: CylinderSpec,
    dist: TwoPointDist,
    seed: int,
    sample_index: int,
) -> PenaltyProfile:
    """Draw Z_1..Z_M (-1 with probability p_a, the capacity parameter) and build Y."""
    u = uniforms(seed, sample_index, "penalty", params.M)
    Z = np.where(u < float(dist.p_a), -1, 1)
    return profile_from_Z(params, spec, Z)


# -- sliced flows ----------------------------------------------------------

_SLABS: dict = {}


def _slab_problem(spec: CylinderSpec, slab_height: int):
    key = (spec, slab_height)
    got = _SLABS.get(key)
    if got is None:
        sub_spec = CylinderSpec(spec.d, spec.n, slab_height)
        net = get_network(get_lattice(sub_spec), *boundary_sets(sub_spec))
        zeros = (0,) * (spec.d - 1)
        maps = [
            sub_edge_map(spec, sub_spec, zeros, i) for i in range(spec.H - slab_height + 1)
        ]
        got = _SLABS[key] = (sub_spec, net, maps)
    return got


def sliced_flow_result(
    lattice, field: CapacityField, i: int, slab_height: int
) -> tuple[FlowResult, np.ndarray]:
    """Flow result of the slab sub-problem at base height i, plus its edge map."""
    spec = lattice.spec
    if not (1 <= slab_height <= spec.H):
        raise ConfigError(f"slab_height {slab_height} outside [1,{spec.H}]")
    if not (0 <= i <= spec.H - slab_height):
        raise ConfigError(f"slab index {i} outside [0,{spec.H - slab_height}]")
    _, net, maps = _slab_problem(spec, slab_height)
    return net.solve(field.values[maps[i]]), maps[i]


def sliced_flow(lattice, field: CapacityField, i: int, slab_height: int) -> int:
    return sliced_flow_result(lattice, field, i, slab_height)[0].value


def sliced_flows(lattice, field: CapacityField, slab_height: int) -> np.ndarray:
    """X_i for every slab position i = 0..H-slab_height."""
    spec = lattice.spec
    _, net, maps = _slab_problem(spec, slab_height)
    return np.array([net.solve(field.values[m]).value for m in maps], dtype=np.int64)


def effective_penalty(profile: PenaltyProfile, spec: CylinderSpec, slab_height: int) -> np.ndarray:
    """Y over the admissible slab indices, with the index-0 boundary clamp."""
    y = profile.Y[: spec.H - slab_height + 1].astype(float).copy()
    y[0] = profile.Y[1]
    return y


@dataclass
class PenalizedResult:
    value: float
    j0: int
    cut: CutSet
    X: np.ndarray
    Y_used: np.ndarray
    i0: int


def penalized_minimum(
    lattice, field: CapacityField, profile: PenaltyProfile, params: PenaltyParams
) -> PenalizedResult:
    """min_i (X_i + Y_i), smallest argmin, and the canonical cut of that slab."""
    spec = lattice.spec
    s = params.slab_height
    if s > spec.H:
        raise ConfigError("slab_height exceeds the cylinder height")
    if profile.Y.size != spec.H + 1:
        raise ConfigError("profile does not match the cylinder height")
    X = sliced_flows(lattice, field, s)
    y = effective_penalty(profile, spec, s)
    scores = X + y
    j0 = int(np.argmin(scores))  # first minimum: the smallest index
    res, mapping = sliced_flow_result(lattice, field, j0, s)
    sub_cut = canonical_min_cut(res)
    parent_edges = np.sort(mapping[np.array(sub_cut.edges, dtype=np.int64)])
    cut = CutSet(
        tuple(int(e) for e in parent_edges),
        int(field.values[parent_edges].sum()),
        int(lattice.edge_h_lo[parent_edges].min()),
        int(lattice.edge_h_hi[parent_edges].max()),
    )
    return PenalizedResult(
        value=float(scores[j0]), j0=j0, cut=cut, X=X, Y_used=y, i0=profile.i0
    )


def penalized_value_flipped(
    lattice,
    field: CapacityField,
    profile: PenaltyProfile,
    params: PenaltyParams,
    e: int,
    value: int,
    base_X: np.ndarray,
) -> float:
    """Penalised value after forcing edge e to `value`, reusing unaffected X_i."""
    spec = lattice.spec
    s = params.slab_height
    _, net, maps = _slab_problem(spec, s)
    lo = max(0, int(lattice.edge_h_hi[e]) - s)
    hi = min(int(lattice.edge_h_lo[e]), spec.H - s)
    values = field.values.copy()
    values[e] = value
    X = base_X.copy()
    for i in range(lo, hi + 1):
        X[i] = net.solve(values[maps[i]]).value
    return float((X + effective_penalty(profile, spec, s)).min())


def measure_slab_height(
    spec: CylinderSpec, dist: TwoPointDist, seed: int, n_instances: int, factor: int = 2
) -> int:
    """factor x (max canonical-cut extent over sampled instances), clipped to [2, H]."""
    lat = get_lattice(spec)
    worst = 1
    for i in range(n_instances):
        cut = canonical_min_cut(bottom_top_flow(lat, sample_field(spec, dist, seed, i)))
        worst = max(worst, cut.h_max - cut.h_min)
    return max(2, min(spec.H, factor * worst))
