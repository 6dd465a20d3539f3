"""Monte Carlo estimators for variances, influences, bounds and chaos curves.

Sample i always uses sample_index = i of the plan's master seed, so shards
are reproducible and identical plans give bit-identical reports no matter
how samples are scheduled.  Worker-pool parallelism returns per-sample rows
that are folded in index order, keeping multi-job runs bit-identical to
sequential ones.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .capacity import (
    CapacityField,
    TwoPointDist,
    flip_edge,
    realize_noise,
    sample_field,
    sample_noise_coupling,
)
from .errors import ConfigError
from .flow import (
    anchored_flow,
    bottom_top_flow,
    canonical_min_cut,
    classify_edges,
    get_network,
)
from .lattice import CylinderSpec, boundary_sets, get_lattice, sub_edge_map
from .lipschitz import VertexWeightField, sample_vertex_field, solve_lipschitz
from .penalized import (
    PenaltyParams,
    effective_penalty,
    penalized_minimum,
    penalized_value_flipped,
    penalty_profile,
    profile_from_Z,
    sliced_flows,
)
from .rng import generator

QUANTITIES = ("flow", "penalized", "lipschitz", "anchored")


@dataclass(frozen=True)
class MonteCarloPlan:
    spec: CylinderSpec
    dist: TwoPointDist
    quantity: str
    n_samples: int
    master_seed: int
    params: PenaltyParams | None = None

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ConfigError(f"unknown quantity {self.quantity!r}; expected one of {QUANTITIES}")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if self.quantity == "penalized" and self.params is None:
            raise ConfigError("penalized plans need PenaltyParams")


@dataclass(frozen=True)
class Estimate:
    """Mean/variance of a sampled quantity with exact-two-pass moments."""

    mean: float
    variance: float | None
    stderr_of_variance: float | None
    stderr_of_mean: float
    n_samples: int
    master_seed: int

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "stderr_of_variance": self.stderr_of_variance,
            "stderr_of_mean": self.stderr_of_mean,
            "n_samples": self.n_samples,
            "master_seed": self.master_seed,
        }


def _fold_estimate(values: np.ndarray, plan: MonteCarloPlan) -> Estimate:
    n = values.size
    if n < 2:
        raise ConfigError("need at least two samples for a variance")
    mean = float(values.mean())
    centered = values - mean
    var = float((centered**2).sum() / (n - 1))
    m4 = float((centered**4).mean())
    var_of_var = max(0.0, (m4 - (n - 3) / (n - 1) * var * var) / n)
    return Estimate(
        mean=mean,
        variance=var,
        stderr_of_variance=math.sqrt(var_of_var),
        stderr_of_mean=math.sqrt(var / n) if var > 0 else 0.0,
        n_samples=n,
        master_seed=plan.master_seed,
    )


# -- sample scheduling -----------------------------------------------------


def _collect(rows_fn, plan: MonteCarloPlan, args: tuple, jobs: int):
    """Run a rows function over all sample indices, optionally in a pool.

    rows functions return tuples of arrays whose first axis is the sample;
    chunks are concatenated in index order so results never depend on jobs.
    """
    n = plan.n_samples
    if jobs <= 1:
        return rows_fn(plan, 0, n, *args)
    bounds = np.linspace(0, n, jobs + 1, dtype=int)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(rows_fn, plan, int(lo), int(hi), *args)
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        parts = [f.result() for f in futures]
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(len(parts[0])))


def _profile_for(plan: MonteCarloPlan, i: int):
    return penalty_profile(plan.params, plan.spec, plan.dist, plan.master_seed, i)


def instance_value(plan: MonteCarloPlan, i: int) -> float:
    lat = get_lattice(plan.spec)
    q = plan.quantity
    if q == "flow":
        return float(bottom_top_flow(lat, sample_field(plan.spec, plan.dist, plan.master_seed, i)).value)
    if q == "anchored":
        return float(anchored_flow(lat, sample_field(plan.spec, plan.dist, plan.master_seed, i)).value)
    if q == "lipschitz":
        return float(solve_lipschitz(sample_vertex_field(plan.spec, plan.dist, plan.master_seed, i))[0])
    field = sample_field(plan.spec, plan.dist, plan.master_seed, i)
    return penalized_minimum(lat, field, _profile_for(plan, i), plan.params).value


def _value_rows(plan, lo, hi):
    return (np.array([instance_value(plan, i) for i in range(lo, hi)], dtype=float),)


def estimate_variance(plan: MonteCarloPlan, jobs: int = 1) -> Estimate:
    """Unbiased sample variance of the plan's quantity."""
    (values,) = _collect(_value_rows, plan, (), jobs)
    return _fold_estimate(values, plan)


# -- Efron-Stein -----------------------------------------------------------


def _es_statistic(plan: MonteCarloPlan, i: int) -> float:
    spec, dist, q = plan.spec, plan.dist, plan.quantity
    lat = get_lattice(spec)
    gcoord = generator(plan.master_seed, i, "es_coordinate")
    gval = generator(plan.master_seed, i, "es_value")

    def fresh_two_point():
        return dist.a if gval.random() < float(dist.p_a) else dist.b

    if q == "lipschitz":
        fld = sample_vertex_field(spec, dist, plan.master_seed, i)
        n_coords = lat.num_vertices
        f0 = float(solve_lipschitz(fld)[0])
        j = int(gcoord.integers(n_coords))
        vals = fld.values.copy()
        vals[j] = fresh_two_point()
        f1 = float(solve_lipschitz(VertexWeightField(vals, dist, plan.master_seed, i, spec))[0])
    elif q == "penalized":
        fld = sample_field(spec, dist, plan.master_seed, i)
        prof = _profile_for(plan, i)
        s = plan.params.slab_height
        X = sliced_flows(lat, fld, s)
        f0 = float((X + effective_penalty(prof, spec, s)).min())
        n_coords = lat.num_edges + plan.params.M
        j = int(gcoord.integers(n_coords))
        if j < lat.num_edges:
            f1 = penalized_value_flipped(lat, fld, prof, plan.params, j, fresh_two_point(), X)
        else:
            z = prof.Z.copy()
            z[j - lat.num_edges] = -1 if gval.random() < float(dist.p_a) else 1
            prof2 = profile_from_Z(plan.params, spec, z)
            f1 = float((X + effective_penalty(prof2, spec, s)).min())
    else:
        solver = bottom_top_flow if q == "flow" else anchored_flow
        fld = sample_field(spec, dist, plan.master_seed, i)
        n_coords = lat.num_edges
        f0 = float(solver(lat, fld).value)
        j = int(gcoord.integers(n_coords))
        f1 = float(solver(lat, flip_edge(fld, j, fresh_two_point())).value)
    neg_part = max(f1 - f0, 0.0)  # (f(X) - f(X^{(j)}))_-
    return n_coords * neg_part * neg_part


def _es_rows(plan, lo, hi):
    return (np.array([_es_statistic(plan, i) for i in range(lo, hi)], dtype=float),)


def efron_stein_rhs(plan: MonteCarloPlan, jobs: int = 1) -> Estimate:
    """Estimate of sum_j E[(f(X) - f(X^{(j)}))^2_-] by one-coordinate resampling."""
    (stats,) = _collect(_es_rows, plan, (), jobs)
    est = _fold_estimate(stats, plan)
    return est


# -- Newman-Piza lower bound -------------------------------------------------


def _np_rows(plan, lo, hi):
    lat = get_lattice(plan.spec)
    out = np.zeros((hi - lo, lat.num_edges), dtype=np.uint8)
    solver = bottom_top_flow if plan.quantity == "flow" else anchored_flow
    b = plan.dist.b
    for k, i in enumerate(range(lo, hi)):
        fld = sample_field(plan.spec, plan.dist, plan.master_seed, i)
        cut = canonical_min_cut(solver(lat, fld))
        edges = np.array(cut.edges, dtype=np.int64)
        hit = edges[fld.values[edges] == b]
        out[k, hit] = 1
    return (out,)


def newman_piza_lhs(plan: MonteCarloPlan, jobs: int = 1) -> Estimate:
    """Var(t_e) * sum_e P(e in canonical cut, t_e = b)^2."""
    if plan.quantity not in ("flow", "anchored"):
        raise ConfigError("newman_piza_lhs needs a flow-type quantity")
    (members,) = _collect(_np_rows, plan, (), jobs)
    n = plan.n_samples
    p_hat = members.mean(axis=0)
    var_te = float(plan.dist.variance)
    value = var_te * float((p_hat**2).sum())
    # delta method on the per-edge squared frequencies
    var_sum = float(((2 * p_hat) ** 2 * p_hat * (1 - p_hat) / n).sum())
    stderr = var_te * math.sqrt(var_sum)
    return Estimate(
        mean=value,
        variance=None,
        stderr_of_variance=None,
        stderr_of_mean=stderr,
        n_samples=n,
        master_seed=plan.master_seed,
    )


# -- influence profile -------------------------------------------------------


@dataclass
class InfluenceProfile:
    """Per-edge hit frequencies of the canonical penalised cut, plus norms."""

    spec: CylinderSpec
    dist: TwoPointDist
    params: PenaltyParams
    n_samples: int
    master_seed: int
    hit_freq: np.ndarray
    j0_counts: dict[int, int]
    l1: np.ndarray | None = None
    l2: np.ndarray | None = None

    def threshold_counts(self, exponents) -> dict[float, int]:
        """#edges with hit frequency >= n^-x, per requested exponent x."""
        n = self.spec.n
        return {float(x): int((self.hit_freq >= n ** (-float(x))).sum()) for x in exponents}

    def to_json(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "master_seed": self.master_seed,
            "hit_freq": self.hit_freq.tolist(),
            "j0_counts": {str(k): v for k, v in sorted(self.j0_counts.items())},
            "l1": None if self.l1 is None else self.l1.tolist(),
            "l2": None if self.l2 is None else self.l2.tolist(),
        }


def _influence_rows(plan, lo, hi, with_norms):
    lat = get_lattice(plan.spec)
    E = lat.num_edges
    member = np.zeros((hi - lo, E), dtype=np.uint8)
    j0s = np.zeros(hi - lo, dtype=np.int64)
    absd = np.zeros((hi - lo, E if with_norms else 0), dtype=float)
    for k, i in enumerate(range(lo, hi)):
        fld = sample_field(plan.spec, plan.dist, plan.master_seed, i)
        prof = _profile_for(plan, i)
        pen = penalized_minimum(lat, fld, prof, plan.params)
        member[k, list(pen.cut.edges)] = 1
        j0s[k] = pen.j0
        if with_norms:
            for e in range(E):
                fa = penalized_value_flipped(lat, fld, prof, plan.params, e, plan.dist.a, pen.X)
                fb = penalized_value_flipped(lat, fld, prof, plan.params, e, plan.dist.b, pen.X)
                absd[k, e] = abs(fb - fa) / 2.0
    return member, j0s, absd


def influence_profile(
    plan: MonteCarloPlan, derivative_norms: bool = False, jobs: int = 1
) -> InfluenceProfile:
    if plan.quantity != "penalized":
        raise ConfigError("influence_profile runs on the penalized quantity")
    member, j0s, absd = _collect(_influence_rows, plan, (derivative_norms,), jobs)
    counts: dict[int, int] = {}
    for j in j0s.tolist():
        counts[j] = counts.get(j, 0) + 1
    l1 = l2 = None
    if derivative_norms:
        l1 = absd.mean(axis=0)
        l2 = np.sqrt((absd**2).mean(axis=0))
    return InfluenceProfile(
        spec=plan.spec,
        dist=plan.dist,
        params=plan.params,
        n_samples=plan.n_samples,
        master_seed=plan.master_seed,
        hit_freq=member.mean(axis=0),
        j0_counts=counts,
        l1=l1,
        l2=l2,
    )


def shift_regularity(profile: InfluenceProfile) -> tuple[float, float]:
    """max_e |p(e) - p(e + 2 e_d)| and the binomial stderr at the argmax pair."""
    lat = get_lattice(profile.spec)
    p = profile.hit_freq
    n = profile.n_samples
    best, best_err = 0.0, 0.0
    for e in range(lat.num_edges):
        e2 = lat.shift_edge(e, 2)
        if e2 is None:
            continue
        diff = abs(float(p[e] - p[e2]))
        if diff >= best:
            best = diff
            best_err = math.sqrt((p[e] * (1 - p[e]) + p[e2] * (1 - p[e2])) / n)
    return best, best_err


def talagrand_rhs(profile: InfluenceProfile, include_penalty_bits: bool = True) -> float:
    """Constant-free Talagrand sum from estimated (or exact) derivative norms.

    Penalty bits enter with the deterministic bound
    |d_j| <= 2 n^{(d-1)/2} / (n^delta log n), for which L1 = L2 so their
    denominator is 1.
    """
    if profile.l1 is None or profile.l2 is None:
        raise ConfigError("talagrand_rhs needs derivative norms in the profile")
    total = 0.0
    for l1, l2 in zip(profile.l1, profile.l2):
        if l2 > 0:
            total += float(l2) ** 2 / (1.0 + math.log(float(l2) / float(l1)))
    if include_penalty_bits:
        spec, params = profile.spec, profile.params
        nd = float(spec.n) ** float(params.delta)
        bound = 2.0 * float(spec.n) ** ((spec.d - 1) / 2) / (nd * math.log(spec.n))
        total += params.M * bound * bound
    return total


# -- chaos ------------------------------------------------------------------


@dataclass
class ChaosCurve:
    t_grid: tuple[float, ...]
    p_mean: np.ndarray
    p_stderr: np.ndarray
    i_mean: np.ndarray
    i_stderr: np.ndarray
    pair_diff_mean: np.ndarray
    pair_diff_stderr: np.ndarray
    integral: float
    integral_stderr: float
    var_te: float
    n_samples: int
    master_seed: int

    def to_json(self) -> dict:
        return {
            "t_grid": list(self.t_grid),
            "p_mean": self.p_mean.tolist(),
            "p_stderr": self.p_stderr.tolist(),
            "i_mean": self.i_mean.tolist(),
            "i_stderr": self.i_stderr.tolist(),
            "pair_diff_mean": self.pair_diff_mean.tolist(),
            "pair_diff_stderr": self.pair_diff_stderr.tolist(),
            "integral": self.integral,
            "integral_stderr": self.integral_stderr,
            "var_te": self.var_te,
            "n_samples": self.n_samples,
            "master_seed": self.master_seed,
        }


def _chaos_rows(plan, lo, hi, t_grid):
    lat = get_lattice(plan.spec)
    src, snk = boundary_sets(plan.spec)
    T = len(t_grid)
    p_sizes = np.zeros((hi - lo, T), dtype=np.int64)
    i_sizes = np.zeros((hi - lo, T), dtype=np.int64)
    for k, i in enumerate(range(lo, hi)):
        coupling = sample_noise_coupling(plan.spec, plan.dist, plan.master_seed, i)
        p0, i0 = classify_edges(lat, coupling.base, src, snk)
        for ti, t in enumerate(t_grid):
            if t == 0.0:
                pt, it = p0, i0
            else:
                pt, it = classify_edges(lat, realize_noise(coupling, t), src, snk)
            p_sizes[k, ti] = len(p0 & pt)
            i_sizes[k, ti] = len(i0 & it)
    return p_sizes, i_sizes


def chaos_curve(plan: MonteCarloPlan, t_grid, jobs: int = 1) -> ChaosCurve:
    """Pivotal/essential intersection sizes along the noise parameter."""
    if plan.quantity != "flow":
        raise ConfigError("chaos_curve runs on the plain flow quantity")
    t_grid = tuple(float(t) for t in t_grid)
    if any(not (0 <= t <= 1) for t in t_grid) or list(t_grid) != sorted(t_grid):
        raise ConfigError("t_grid must be sorted within [0,1]")
    p_sizes, i_sizes = _collect(_chaos_rows, plan, (t_grid,), jobs)
    n = plan.n_samples

    def stats(mat):
        mean = mat.mean(axis=0)
        err = mat.std(axis=0, ddof=1) / math.sqrt(n)
        return mean, err

    p_mean, p_err = stats(p_sizes.astype(float))
    i_mean, i_err = stats(i_sizes.astype(float))
    diffs = p_sizes[:, :-1] - p_sizes[:, 1:]  # paired per sample
    d_mean, d_err = stats(diffs.astype(float))
    var_te = float(plan.dist.variance)
    per_sample_integral = var_te * np.trapezoid(p_sizes.astype(float), t_grid, axis=1)
    integral = float(per_sample_integral.mean())
    integral_err = float(per_sample_integral.std(ddof=1) / math.sqrt(n))
    return ChaosCurve(
        t_grid=t_grid,
        p_mean=p_mean,
        p_stderr=p_err,
        i_mean=i_mean,
        i_stderr=i_err,
        pair_diff_mean=d_mean,
        pair_diff_stderr=d_err,
        integral=integral,
        integral_stderr=integral_err,
        var_te=var_te,
        n_samples=n,
        master_seed=plan.master_seed,
    )


# -- boundary avoidance and anchored localisation ----------------------------


@dataclass
class BoundaryLocalizationReport:
    quantity: str
    n_samples: int
    master_seed: int
    j0_counts: dict[int, int] | None = None
    p_first2: float | None = None
    p_first2_stderr: float | None = None
    p_top2: float | None = None
    p_top2_stderr: float | None = None
    p_first3: float | None = None
    bound_2_over_sqrt_n: float | None = None
    c_grid: tuple[int, ...] | None = None
    outside_fraction_mean: np.ndarray | None = None
    outside_fraction_stderr: np.ndarray | None = None

    def to_json(self) -> dict:
        out = {"quantity": self.quantity, "n_samples": self.n_samples, "master_seed": self.master_seed}
        if self.j0_counts is not None:
            out.update(
                {
                    "j0_counts": {str(k): v for k, v in sorted(self.j0_counts.items())},
                    "p_first2": self.p_first2,
                    "p_first2_stderr": self.p_first2_stderr,
                    "p_top2": self.p_top2,
                    "p_top2_stderr": self.p_top2_stderr,
                    "p_first3": self.p_first3,
                    "bound_2_over_sqrt_n": self.bound_2_over_sqrt_n,
                }
            )
        if self.c_grid is not None:
            out.update(
                {
                    "c_grid": list(self.c_grid),
                    "outside_fraction_mean": self.outside_fraction_mean.tolist(),
                    "outside_fraction_stderr": self.outside_fraction_stderr.tolist(),
                }
            )
        return out


def _j0_rows(plan, lo, hi):
    lat = get_lattice(plan.spec)
    out = np.zeros(hi - lo, dtype=np.int64)
    for k, i in enumerate(range(lo, hi)):
        fld = sample_field(plan.spec, plan.dist, plan.master_seed, i)
        out[k] = penalized_minimum(lat, fld, _profile_for(plan, i), plan.params).j0
    return (out,)


def _localization_rows(plan, lo, hi, c_grid):
    lat = get_lattice(plan.spec)
    half = plan.spec.H / 2.0
    out = np.zeros((hi - lo, len(c_grid)), dtype=float)
    for k, i in enumerate(range(lo, hi)):
        fld = sample_field(plan.spec, plan.dist, plan.master_seed, i)
        cut = canonical_min_cut(anchored_flow(lat, fld))
        edges = np.array(cut.edges, dtype=np.int64)
        mid = (lat.edge_h_lo[edges] + lat.edge_h_hi[edges]) / 2.0
        for ci, c in enumerate(c_grid):
            out[k, ci] = float((np.abs(mid - half) > c).mean())
    return (out,)


def boundary_and_localization(
    plan: MonteCarloPlan, c_grid=None, j0_values: np.ndarray | None = None, jobs: int = 1
) -> BoundaryLocalizationReport:
    """Boundary-avoidance frequencies (penalized) or cut localisation (anchored)."""
    n = plan.n_samples
    if plan.quantity == "penalized":
        if j0_values is None:
            (j0_values,) = _collect(_j0_rows, plan, (), jobs)
        counts: dict[int, int] = {}
        for j in j0_values.tolist():
            counts[j] = counts.get(j, 0) + 1
        imax = plan.spec.H - plan.params.slab_height

        def freq(idx_set):
            p = sum(counts.get(j, 0) for j in idx_set) / n
            return p, math.sqrt(p * (1 - p) / n)

        p12, e12 = freq({1, 2})
        ptop, etop = freq({imax, imax - 1})
        p012, _ = freq({0, 1, 2})
        return BoundaryLocalizationReport(
            quantity="penalized",
            n_samples=n,
            master_seed=plan.master_seed,
            j0_counts=counts,
            p_first2=p12,
            p_first2_stderr=e12,
            p_top2=ptop,
            p_top2_stderr=etop,
            p_first3=p012,
            bound_2_over_sqrt_n=2.0 / math.sqrt(plan.spec.n),
        )
    if plan.quantity == "anchored":
        if c_grid is None:
            c_grid = [0, 1, 2, 4, 8]
        c_grid = tuple(int(c) for c in c_grid)
        (fractions,) = _collect(_localization_rows, plan, (c_grid,), jobs)
        return BoundaryLocalizationReport(
            quantity="anchored",
            n_samples=n,
            master_seed=plan.master_seed,
            c_grid=c_grid,
            outside_fraction_mean=fractions.mean(axis=0),
            outside_fraction_stderr=fractions.std(axis=0, ddof=1) / math.sqrt(n),
        )
    raise ConfigError("boundary_and_localization runs on penalized or anchored plans")


# -- sub-cylinder subadditivity ----------------------------------------------


@dataclass
class SubadditivityReport:
    estimate: Estimate
    violations: int
    k_per_axis: int
    block_side: int
    normalized_mean: float

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate.to_json(),
            "violations": self.violations,
            "k_per_axis": self.k_per_axis,
            "block_side": self.block_side,
            "normalized_mean": self.normalized_mean,
        }


def _subadd_rows(plan, lo, hi, m):
    spec = plan.spec
    lat = get_lattice(spec)
    sub_spec = CylinderSpec(spec.d, m, spec.H)
    k = (spec.n + 1) // (m + 1)
    net = get_network(get_lattice(sub_spec), *boundary_sets(sub_spec))
    maps = [
        sub_edge_map(spec, sub_spec, tuple(j * (m + 1) for j in block), 0)
        for block in product(range(k), repeat=spec.d - 1)
    ]
    out = np.zeros(hi - lo, dtype=np.int64)
    for kk, i in enumerate(range(lo, hi)):
        fld = sample_field(spec, plan.dist, plan.master_seed, i)
        phi = bottom_top_flow(lat, fld).value
        total = sum(net.solve(fld.values[mp]).value for mp in maps)
        out[kk] = phi - total
    return (out,)


def subadditivity_defect(plan: MonteCarloPlan, m: int, jobs: int = 1) -> SubadditivityReport:
    """Phi(A,H) - sum of disjoint sub-cylinder flows; nonnegative per instance.

    Sub-bases are disjoint blocks of m+1 consecutive points per axis,
    k = floor((n+1)/(m+1)) blocks per axis, remainder uncovered.
    """
    if not (1 <= m <= plan.spec.n):
        raise ConfigError(f"block side m={m} outside [1,{plan.spec.n}]")
    (defects,) = _collect(_subadd_rows, plan, (m,), jobs)
    violations = int((defects < 0).sum())
    est = _fold_estimate(defects.astype(float), plan)
    return SubadditivityReport(
        estimate=est,
        violations=violations,
        k_per_axis=(plan.spec.n + 1) // (m + 1),
        block_side=m,
        normalized_mean=est.mean / plan.spec.n ** (plan.spec.d - 1),
    )


def _penalized_log_rows(plan, lo, hi):
    lat = get_lattice(plan.spec)
    out = np.zeros((hi - lo, 7), dtype=float)
    for k, i in enumerate(range(lo, hi)):
        fld = sample_field(plan.spec, plan.dist, plan.master_seed, i)
        phi = bottom_top_flow(lat, fld).value
        pen = penalized_minimum(lat, fld, _profile_for(plan, i), plan.params)
        out[k] = (
            i,
            phi,
            int(pen.X.min()),
            pen.value,
            pen.j0,
            len(pen.cut.edges),
            pen.cut.h_max - pen.cut.h_min,
        )
    return (out,)


PENALIZED_LOG_COLUMNS = ("sample_index", "phi", "min_X", "phi_tilde", "j0", "cut_size", "extent")


def penalized_instance_rows(plan: MonteCarloPlan, jobs: int = 1) -> np.ndarray:
    """Per-instance penalisation record: (i, Phi, min_i X_i, penalised value,
    argmin index, cut size, cut extent).  One row per sample."""
    if plan.quantity != "penalized":
        raise ConfigError("penalized_instance_rows needs a penalized plan")
    (rows,) = _collect(_penalized_log_rows, plan, (), jobs)
    return rows


def variance_trend(
    d: int, n_values, aspect: int, dist: TwoPointDist, n_samples: int, master_seed: int
) -> list[dict]:
    """Var(Phi) * log n / n^{d-1} over an n-sweep (report only, no assertion)."""
    rows = []
    for n in n_values:
        spec = CylinderSpec(d, int(n), aspect * int(n))
        plan = MonteCarloPlan(spec, dist, "flow", n_samples, master_seed)
        est = estimate_variance(plan)
        rows.append(
            {
                "d": d,
                "n": int(n),
                "H": spec.H,
                "n_samples": n_samples,
                "var": est.variance,
                "stderr_of_variance": est.stderr_of_variance,
                "scaled": est.variance * math.log(n) / n ** (d - 1),
            }
        )
    return rows
