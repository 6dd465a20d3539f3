"""Two-valued i.i.d. edge capacities with exact integer arithmetic.

Capacities are pre-scaled to coprime integers 0 < a < b so every flow value
is an exact integer; min-cut ties and pivotality tests never touch floats.
Sampling is counter-based (see rng): a field is a pure function of
(spec, dist, seed, sample_index).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from .errors import ConfigError
from .lattice import CylinderSpec, get_lattice
from .rng import uniforms

_MAGIC = b"CYLF1\n"


@dataclass(frozen=True)
class TwoPointDist:
    """Distribution taking value a with probability p_a, else b."""

    a: int
    b: int
    p_a: Fraction

    def __post_init__(self):
        if not (isinstance(self.a, int) and isinstance(self.b, int)):
            raise ConfigError("a, b must be integers; use from_rationals to scale")
        if not (0 < self.a < self.b):
            raise ConfigError(f"need 0 < a < b, got a={self.a}, b={self.b}")
        if not (0 <= self.p_a <= 1):
            raise ConfigError(f"p_a must lie in [0,1], got {self.p_a}")

    @classmethod
    def from_rationals(cls, a, b, p_a) -> "TwoPointDist":
        fa, fb = Fraction(a), Fraction(b)
        scale = lcm(fa.denominator, fb.denominator)
        ia, ib = int(fa * scale), int(fb * scale)
        g = gcd(ia, ib)
        return cls(ia // g, ib // g, Fraction(p_a))

    @property
    def mean(self) -> Fraction:
        return self.p_a * self.a + (1 - self.p_a) * self.b

    @property
    def variance(self) -> Fraction:
        return (self.b - self.a) ** 2 * self.p_a * (1 - self.p_a)


DEFAULT_DIST = TwoPointDist(1, 2, Fraction(1, 2))


class CapacityField:
    """Immutable array of edge capacities plus its provenance."""

    __slots__ = ("values", "dist", "seed", "sample_index")

    def __init__(self, values: np.ndarray, dist: TwoPointDist, seed: int, sample_index: int):
        values = np.asarray(values, dtype=np.int64)
        values.flags.writeable = False
        self.values = values
        self.dist = dist
        self.seed = seed
        self.sample_index = sample_index

    def __eq__(self, other):
        return (
            isinstance(other, CapacityField)
            and self.dist == other.dist
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return (
            f"CapacityField(n_edges={self.values.size}, dist=({self.dist.a},{self.dist.b},"
            f"{self.dist.p_a}), seed={self.seed}, sample_index={self.sample_index})"
        )


def sample_field(spec: CylinderSpec, dist: TwoPointDist, seed: int, sample_index: int) -> CapacityField:
    lat = get_lattice(spec)
    u = uniforms(seed, sample_index, "capacity", lat.num_edges)
    values = np.where(u < float(dist.p_a), dist.a, dist.b)
    return CapacityField(values, dist, seed, sample_index)


def flip_edge(field: CapacityField, e: int, value: int) -> CapacityField:
    """Copy-on-write flip of a single edge to a or b."""
    if value not in (field.dist.a, field.dist.b):
        raise ConfigError(f"flip value {value} not in {{a,b}} = {{{field.dist.a},{field.dist.b}}}")
    if not (0 <= e < field.values.size):
        raise ConfigError(f"edge id {e} out of range")
    values = field.values.copy()
    values[e] = value
    return CapacityField(values, field.dist, field.seed, field.sample_index)


@dataclass(frozen=True)
class NoiseCoupling:
    """Base field, an independent fresh field, and per-edge uniform thresholds."""

    base: CapacityField
    fresh: CapacityField
    thresholds: np.ndarray


def sample_noise_coupling(
    spec: CylinderSpec, dist: TwoPointDist, seed: int, sample_index: int
) -> NoiseCoupling:
    lat = get_lattice(spec)
    base = sample_field(spec, dist, seed, sample_index)
    u_fresh = uniforms(seed, sample_index, "fresh_capacity", lat.num_edges)
    fresh = CapacityField(
        np.where(u_fresh < float(dist.p_a), dist.a, dist.b), dist, seed, sample_index
    )
    thresholds = uniforms(seed, sample_index, "noise_threshold", lat.num_edges)
    thresholds.flags.writeable = False
    return NoiseCoupling(base, fresh, thresholds)


def realize_noise(coupling: NoiseCoupling, t) -> CapacityField:
    """Field X^t: fresh value exactly where the threshold is below t."""
    t = Fraction(t)
    if not (0 <= t <= 1):
        raise ConfigError(f"noise level t={t} outside [0,1]")
    resample = coupling.thresholds < float(t)
    values = np.where(resample, coupling.fresh.values, coupling.base.values)
    base = coupling.base
    return CapacityField(values, base.dist, base.seed, base.sample_index)


# -- dump / load -----------------------------------------------------------


def _header(spec: CylinderSpec, field: CapacityField) -> dict:
    return {
        "d": spec.d,
        "n": spec.n,
        "H": spec.H,
        "a": field.dist.a,
        "b": field.dist.b,
        "p_a": str(field.dist.p_a),
        "seed": field.seed,
        "sample_index": field.sample_index,
        "count": int(field.values.size),
    }


def save_field(field: CapacityField, spec: CylinderSpec, path) -> None:
    header = json.dumps(_header(spec, field), sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(len(header).to_bytes(8, "little"))
        fh.write(header)
        fh.write(field.values.astype("<i8").tobytes())


def load_field(path) -> tuple[CylinderSpec, CapacityField]:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ConfigError(f"{path}: not a capacity field dump")
        hlen = int.from_bytes(fh.read(8), "little")
        h = json.loads(fh.read(hlen))
        values = np.frombuffer(fh.read(8 * h["count"]), dtype="<i8")
    spec = CylinderSpec(h["d"], h["n"], h["H"])
    dist = TwoPointDist(h["a"], h["b"], Fraction(h["p_a"]))
    return spec, CapacityField(values, dist, h["seed"], h["sample_index"])


def save_field_csv(field: CapacityField, spec: CylinderSpec, path) -> None:
    lines = [f"# {json.dumps(_header(spec, field), sort_keys=True)}", "edge_id,value"]
    lines += [f"{e},{int(v)}" for e, v in enumerate(field.values)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field_csv(path) -> tuple[CylinderSpec, CapacityField]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ConfigError(f"{path}: missing capacity CSV header")
    h = json.loads(lines[0][2:])
    values = np.empty(h["count"], dtype=np.int64)
    for row in lines[2:]:
        if not row:
            continue
        e, v = row.split(",")
        values[int(e)] = int(v)
    spec = CylinderSpec(h["d"], h["n"], h["H"])
    dist = TwoPointDist(h["a"], h["b"], Fraction(h["p_a"]))
    return spec, CapacityField(values, dist, h["seed"], h["sample_index"])
