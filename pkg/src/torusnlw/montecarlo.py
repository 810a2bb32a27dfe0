"""Monte Carlo verification experiments over the Gaussian ensembles.

Every experiment reduces to the same primitive: draw states by counter
index, evaluate one or more named scalar functionals on each, and form
weighted empirical L^p norms (the weights are the energy-cutoff
indicators, so a cutoff radius of infinity reproduces plain averages).
Per-sample values are pure functions of (master seed, index), the
reduction runs over index-ordered arrays, and bootstrap resampling draws
from its own tagged stream, so results are bitwise independent of how
the index range is split across workers.

Functionals are addressed by name (plus a small parameter dict) so they
can cross process boundaries; see FUNCTIONALS for the registry.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .energy import (
    UnsupportedParameterError,
    chaos_components,
    energy_rate_terms,
    quartic_correction,
    truncated_energy,
    wick_renormalized_mass,
)
from .measures import weighted_density
from .sampling import EnsembleSpec, sample
from .spectral import (
    PhaseState,
    apply_multiplier,
    derivative,
    dyadic_block,
    grid_sup_norm,
    integrate,
    project_ball,
)

MAX_P = 16.0  # empirical L^p beyond this is extreme-value dominated
BOOTSTRAP_RESAMPLES = 200
_MASK64 = (1 << 64) - 1


class DegenerateEnsembleError(RuntimeError):
    """The energy cutoff rejected every sample."""


def _tag64(tag: str) -> int:
    """Stable 64-bit integer from a label, for derived RNG streams."""
    return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "little")


def _tagged_rng(master_seed: int, tag: str) -> np.random.Generator:
    key = np.array([master_seed & _MASK64, _tag64(tag)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# -- result containers --------------------------------------------------------


@dataclass(frozen=True)
class LpEstimate:
    """Weighted empirical L^p norm with a percentile bootstrap interval."""

    p: float
    value: float
    samples: int
    ci_low: float
    ci_high: float
    effective_samples: int  # samples passing the energy cutoff

    @property
    def rel_ci_width(self) -> float:
        return (self.ci_high - self.ci_low) / abs(self.value) if self.value else math.inf


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log abscissa, log ordinate) pairs."""

    abscissae: tuple
    ordinates: tuple
    slope: float
    intercept: float
    residual: float  # rms deviation of log ordinates from the fit


def fit_rate(abscissae, ordinates) -> RateFit:
    xs = np.asarray(abscissae, dtype=float)
    ys = np.asarray(ordinates, dtype=float)
    if xs.size != ys.size or xs.size < 2:
        raise ValueError("rate fit needs at least two (x, y) pairs")
    if not (np.all(xs > 0) and np.all(ys > 0)):
        raise ValueError("rate fit needs positive abscissae and ordinates")
    lx, ly = np.log(xs), np.log(ys)
    design = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return RateFit(
        abscissae=tuple(float(x) for x in xs),
        ordinates=tuple(float(y) for y in ys),
        slope=float(slope),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid**2))),
    )


# -- functional registry -------------------------------------------------------

# name -> polynomial chaos degree in the Gaussian coordinates, where one
# is defined (needed by chaos_growth_check); None means not homogeneous.
FUNCTIONALS: dict = {
    "energy_rate_total": 4,
    "energy_rate_highlow": 4,
    "energy_rate_mass": 4,
    "energy_rate_leibniz": 4,
    "quartic_correction": 4,
    "quartic_correction_gap": 4,
    "chaos_double_pair_renorm_gap": 4,
    "chaos_single_pair_gap": 4,
    "chaos_no_pair_gap": 4,
    "wick_mass": 2,
    "block_sup_norm": None,
    "density_weight": None,
    "scalar_gaussian": 1,
}


class _StateEvaluator:
    """Evaluates registry functionals on one state, sharing repeated work
    (rate terms, per-cutoff quartic corrections) between them."""

    def __init__(self, state: PhaseState, ens: EnsembleSpec):
        self.state = state
        self.ens = ens
        self._cache: dict = {}

    def _memo(self, key, thunk):
        if key not in self._cache:
            self._cache[key] = thunk()
        return self._cache[key]

    def rate(self):
        e = self.ens
        return self._memo("rate", lambda: energy_rate_terms(
            self.state, e.s, e.truncation_N, e.equation, e.beta))

    def quartic(self, cutoff: int) -> float:
        e = self.ens
        return self._memo(("quartic", cutoff), lambda: quartic_correction(
            self.state.u, e.s, cutoff, e.equation))

    def chaos(self, cutoff: int):
        e = self.ens
        return self._memo(("chaos", cutoff), lambda: chaos_components(
            self.state.u, e.s, cutoff, e.equation))

    def cutoff_indicator(self) -> float:
        e = self.ens
        if math.isinf(e.energy_cutoff_r):
            return 1.0
        energy = self._memo("trunc_energy", lambda: truncated_energy(
            self.state, e.truncation_N, e.equation, e.beta))
        return 1.0 if energy <= e.energy_cutoff_r else 0.0

    def value(self, name: str, params: dict) -> float:
        e = self.ens
        n_default = e.truncation_N
        if name == "energy_rate_total":
            return self.rate().total
        if name == "energy_rate_highlow":
            return self.rate().highlow
        if name == "energy_rate_mass":
            return self.rate().mass
        if name == "energy_rate_leibniz":
            return self.rate().leibniz
        if name == "quartic_correction":
            return self.quartic(int(params.get("cutoff", n_default)))
        if name == "quartic_correction_gap":
            hi = self.quartic(int(params.get("cutoff", n_default)))
            return hi - self.quartic(int(params["lower_cutoff"]))
        if name in ("chaos_double_pair_renorm_gap", "chaos_single_pair_gap",
                    "chaos_no_pair_gap"):
            hi = self.chaos(int(params.get("cutoff", n_default)))
            lo = self.chaos(int(params["lower_cutoff"]))
            attr = {"chaos_double_pair_renorm_gap": "double_pair_renorm",
                    "chaos_single_pair_gap": "single_pair",
                    "chaos_no_pair_gap": "no_pair"}[name]
            return getattr(hi, attr) - getattr(lo, attr)
        if name == "wick_mass":
            return wick_renormalized_mass(
                self.state.u, e.s, int(params.get("cutoff", n_default)), e.equation)
        if name == "block_sup_norm":
            field = self.state.u if params.get("field", "u") == "u" else self.state.v
            g = project_ball(field, int(params.get("cutoff", n_default)))
            g = apply_multiplier(g, dyadic_block(int(params["block"])))
            o1, o2 = params.get("order", (0, 0))
            if (o1, o2) != (0, 0):
                g = apply_multiplier(g, derivative(int(o1), int(o2)))
            return grid_sup_norm(g)
        if name == "density_weight":
            return weighted_density(
                self.state, e.s, int(params.get("cutoff", n_default)),
                float(params["radius"]), e.equation, e.beta).weight
        if name == "scalar_gaussian":
            return integrate(self.state.u)
        raise UnsupportedParameterError(f"unknown functional {name!r}")


def _eval_block(ens: EnsembleSpec, funcs: tuple, start: int, stop: int) -> np.ndarray:
    """Evaluate every functional plus the cutoff weight on indices
    [start, stop); module-level so worker processes can import it."""
    out = np.empty((stop - start, len(funcs) + 1))
    for row, index in enumerate(range(start, stop)):
        ev = _StateEvaluator(sample(ens, index), ens)
        for col, (name, params) in enumerate(funcs):
            out[row, col] = ev.value(name, params)
        out[row, len(funcs)] = ev.cutoff_indicator()
    return out


def collect_values(ens: EnsembleSpec, funcs, samples: int, *,
                   workers: int = 1, sampler: Callable | None = None):
    """(values, weights): values has one column per (name, params) pair.

    Identical output for every worker count; `sampler` overrides state
    generation for tests (index -> PhaseState, forces inline evaluation).
    """
    funcs = tuple((name, dict(params or {})) for name, params in funcs)
    for name, _ in funcs:
        if name not in FUNCTIONALS:
            raise UnsupportedParameterError(f"unknown functional {name!r}")
    if sampler is not None:
        out = np.empty((samples, len(funcs) + 1))
        for index in range(samples):
            ev = _StateEvaluator(sampler(index), ens)
            for col, (name, params) in enumerate(funcs):
                out[index, col] = ev.value(name, params)
            out[index, len(funcs)] = ev.cutoff_indicator()
    elif workers <= 1 or samples < 2 * workers:
        out = _eval_block(ens, funcs, 0, samples)
    else:
        bounds = np.linspace(0, samples, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_eval_block, ens, funcs, int(a), int(b))
                       for a, b in zip(bounds[:-1], bounds[1:])]
            out = np.concatenate([f.result() for f in futures], axis=0)
    return out[:, :-1], out[:, -1]


# -- the L^p estimator ---------------------------------------------------------


def _weighted_norm(abs_pow: np.ndarray, weights: np.ndarray, p: float) -> float:
    total = weights.sum()
    if total <= 0:
        return math.nan
    return float((float(abs_pow @ weights) / total) ** (1.0 / p))


def _estimate_from_values(values: np.ndarray, weights: np.ndarray, p: float,
                          ens: EnsembleSpec, tag: str,
                          resamples: int = BOOTSTRAP_RESAMPLES) -> LpEstimate:
    n = values.size
    effective = int(round(weights.sum()))
    if effective == 0:
        raise DegenerateEnsembleError(
            f"energy cutoff r={ens.energy_cutoff_r} rejected all {n} samples")
    abs_pow = np.abs(values) ** p
    value = _weighted_norm(abs_pow, weights, p)
    rng = _tagged_rng(ens.master_seed, f"bootstrap:{tag}:p={p!r}:n={n}")
    norms = np.empty(resamples)
    for b in range(resamples):
        idx = rng.integers(0, n, size=n)
        norm = _weighted_norm(abs_pow[idx], weights[idx], p)
        while math.isnan(norm):  # resample hit only rejected states; redraw
            idx = rng.integers(0, n, size=n)
            norm = _weighted_norm(abs_pow[idx], weights[idx], p)
        norms[b] = norm
    lo, hi = np.percentile(norms, [2.5, 97.5])
    return LpEstimate(
        p=p,
        value=value,
        samples=n,
        ci_low=float(min(lo, value)),
        ci_high=float(max(hi, value)),
        effective_samples=effective,
    )


def _check_p_samples(p: float, samples: int, max_p: float) -> None:
    if not 1.0 <= p <= max_p:
        raise ValueError(f"p must lie in [1, {max_p}], got {p}")
    if samples < 100:
        raise ValueError(f"need at least 100 samples, got {samples}")


def estimate_lp(functional: str, ens: EnsembleSpec, p: float, samples: int, *,
                params: dict | None = None, workers: int = 1,
                sampler: Callable | None = None, max_p: float = MAX_P) -> LpEstimate:
    """Weighted empirical L^p norm of one functional under the cutoff
    ensemble.  Deterministic given (ens, p, samples)."""
    _check_p_samples(p, samples, max_p)
    values, weights = collect_values(ens, [(functional, params)], samples,
                                     workers=workers, sampler=sampler)
    return _estimate_from_values(values[:, 0], weights, p, ens,
                                 f"{functional}:{sorted((params or {}).items())}")


# -- cutoff radius resolution --------------------------------------------------


def resolve_radius(radius, ens: EnsembleSpec, *, pilot_samples: int = 1000,
                   quantile: float = 0.9) -> float:
    """Turn a configured radius into a number.

    Numbers pass through; "auto" draws a pilot ensemble from a seed
    derived from the master seed (so it never reuses the estimate
    indices) and returns the requested quantile of the truncated energy.
    """
    if radius != "auto":
        r = float(radius)
        if not r > 0:
            raise ValueError(f"cutoff radius must be positive, got {r}")
        return r
    pilot = replace(ens, master_seed=_tag64(f"pilot-radius:{ens.master_seed}"),
                    energy_cutoff_r=math.inf)
    energies = [
        truncated_energy(sample(pilot, i), pilot.truncation_N, pilot.equation, pilot.beta)
        for i in range(pilot_samples)
    ]
    return float(np.quantile(energies, quantile))


# -- experiments ---------------------------------------------------------------


@dataclass(frozen=True)
class EstimateRow:
    cutoff: int
    p: float
    estimate: LpEstimate


@dataclass(frozen=True)
class GrowthStudyResult:
    """L^p norms of the energy-rate total across cutoffs, with growth
    fits in p and the spread across cutoffs at each fixed p."""

    rows: tuple            # EstimateRow per (cutoff, p)
    p_fits: tuple          # (cutoff, RateFit of value against p)
    spread_by_p: tuple     # (p, max value / min value over cutoffs)
    radii: tuple           # (cutoff, resolved radius)
    raw: tuple = ()        # optional ((label, values, weights), ...)


def lp_growth_experiment(s: float, cutoff_list, p_list, radius, samples: int, *,
                              functional: str = "energy_rate_total",
                              variant: str = "mu_s", beta: float = 0.0,
                              master_seed: int = 0, workers: int = 1,
                              keep_raw: bool = False) -> GrowthStudyResult:
    """Growth of the L^p norms in p and their uniformity in the cutoff.

    One ensemble per cutoff (sampling window = cutoff); values are drawn
    once per cutoff and reused across all p.
    """
    if not cutoff_list or not p_list:
        raise ValueError("cutoff_list and p_list must be nonempty")
    for p in p_list:
        _check_p_samples(p, samples, MAX_P)
    rows = []
    fits = []
    radii = []
    raw = []
    for cutoff in cutoff_list:
        ens = EnsembleSpec(variant=variant, s=s, sample_max_mode=cutoff,
                           truncation_N=cutoff, master_seed=master_seed, beta=beta)
        r = resolve_radius(radius, ens)
        ens = replace(ens, energy_cutoff_r=r)
        radii.append((cutoff, r))
        values, weights = collect_values(ens, [(functional, None)], samples,
                                         workers=workers)
        if keep_raw:
            raw.append((f"{functional}:N={cutoff}", values[:, 0].copy(), weights.copy()))
        ests = [
            _estimate_from_values(values[:, 0], weights, p, ens, f"{functional}:N={cutoff}")
            for p in p_list
        ]
        rows.extend(EstimateRow(cutoff, p, e) for p, e in zip(p_list, ests))
        fits.append((cutoff, fit_rate(p_list, [e.value for e in ests])))
    spread = []
    for p in p_list:
        vals = [row.estimate.value for row in rows if row.p == p]
        spread.append((p, max(vals) / min(vals)))
    return GrowthStudyResult(rows=tuple(rows), p_fits=tuple(fits),
                             spread_by_p=tuple(spread), radii=tuple(radii),
                             raw=tuple(raw))


@dataclass(frozen=True)
class ConvergenceStudyResult:
    """Decay of ||F_ref - F_M||_{L^p} as the lower cutoff M grows."""

    reference_cutoff: int
    rows: tuple            # EstimateRow per M (cutoff field holds M)
    fit: RateFit
    component_fits: tuple  # (component name, RateFit), empty unless requested
    raw: tuple = ()


def convergence_rate_study(s: float, lower_cutoffs, p: float, samples: int, *,
                           reference_cutoff: int | None = None,
                           variant: str = "mu_s", beta: float = 0.0,
                           master_seed: int = 0, workers: int = 1,
                           components: bool = False,
                           keep_raw: bool = False) -> ConvergenceStudyResult:
    """Rate at which the quartic correction at a frozen reference cutoff
    is approximated by lower cutoffs, in L^p of the plain ensemble."""
    lower = sorted(int(m) for m in lower_cutoffs)
    if not lower:
        raise ValueError("need at least one lower cutoff")
    n_ref = int(reference_cutoff) if reference_cutoff is not None else 2 * max(lower)
    if max(lower) >= n_ref:
        raise ValueError(f"every lower cutoff must be < reference {n_ref}")
    _check_p_samples(p, samples, MAX_P)
    ens = EnsembleSpec(variant=variant, s=s, sample_max_mode=n_ref,
                       truncation_N=n_ref, master_seed=master_seed, beta=beta)
    funcs = [("quartic_correction_gap", {"lower_cutoff": m}) for m in lower]
    comp_names = ("chaos_double_pair_renorm_gap", "chaos_single_pair_gap",
                  "chaos_no_pair_gap")
    if components:
        funcs += [(name, {"lower_cutoff": m}) for name in comp_names for m in lower]
    values, weights = collect_values(ens, funcs, samples, workers=workers)
    rows = []
    raw = []
    for col, m in enumerate(lower):
        est = _estimate_from_values(values[:, col], weights, p, ens,
                                    f"quartic_correction_gap:M={m}")
        rows.append(EstimateRow(m, p, est))
        if keep_raw:
            raw.append((f"quartic_correction_gap:M={m}", values[:, col].copy(),
                        weights.copy()))
    fit = fit_rate(lower, [row.estimate.value for row in rows])
    comp_fits = []
    if components:
        col = len(lower)
        for name in comp_names:
            vals = []
            for m in lower:
                est = _estimate_from_values(values[:, col], weights, p, ens,
                                            f"{name}:M={m}")
                vals.append(est.value)
                col += 1
            comp_fits.append((name, fit_rate(lower, vals)))
    return ConvergenceStudyResult(reference_cutoff=n_ref, rows=tuple(rows), fit=fit,
                                  component_fits=tuple(comp_fits), raw=tuple(raw))


@dataclass(frozen=True)
class ChaosGrowthRow:
    p: float
    norm: float
    ratio: float           # ||X||_p / ||X||_2
    bound: float           # (p-1)^(degree/2)
    rel_ci_width: float    # combined relative bootstrap widths
    within_bound: bool     # ratio <= bound * (1 + 3 * rel_ci_width)


@dataclass(frozen=True)
class ChaosGrowthResult:
    degree: int
    base_norm: float       # ||X||_2
    rows: tuple
    raw: tuple = ()


def chaos_growth_check(functional: str, ens: EnsembleSpec, p_list, samples: int, *,
                       params: dict | None = None, workers: int = 1,
                       keep_raw: bool = False) -> ChaosGrowthResult:
    """Hypercontractive growth check: for a functional of declared chaos
    degree k, ||X||_p / ||X||_2 must stay below (p-1)^(k/2)."""
    degree = FUNCTIONALS.get(functional)
    if degree is None:
        raise UnsupportedParameterError(
            f"functional {functional!r} has no declared chaos degree")
    for p in p_list:
        _check_p_samples(p, samples, MAX_P)
    values, weights = collect_values(ens, [(functional, params)], samples,
                                     workers=workers)
    tag = f"{functional}:{sorted((params or {}).items())}"
    base = _estimate_from_values(values[:, 0], weights, 2.0, ens, tag)
    rows = []
    for p in p_list:
        est = _estimate_from_values(values[:, 0], weights, p, ens, tag)
        ratio = est.value / base.value
        bound = (p - 1.0) ** (degree / 2.0)
        rel_w = est.rel_ci_width + base.rel_ci_width
        rows.append(ChaosGrowthRow(
            p=p, norm=est.value, ratio=ratio, bound=bound, rel_ci_width=rel_w,
            within_bound=bool(ratio <= bound * (1.0 + 3.0 * rel_w)),
        ))
    raw = ((tag, values[:, 0].copy(), weights.copy()),) if keep_raw else ()
    return ChaosGrowthResult(degree=degree, base_norm=base.value, rows=tuple(rows),
                             raw=raw)


@dataclass(frozen=True)
class SupNormStudyResult:
    """L^p moments of dyadic-block sup norms across block frequencies."""

    order: tuple
    field: str
    rows: tuple            # EstimateRow per block (cutoff field holds M)
    fit: RateFit
    raw: tuple = ()


def sup_norm_moment_study(s: float, order, block_list, cutoff: int, p: float,
                          samples: int, *, field: str = "u", variant: str = "mu_s",
                          beta: float = 0.0, master_seed: int = 0,
                          workers: int = 1, keep_raw: bool = False) -> SupNormStudyResult:
    """Sup norms of derivative dyadic blocks of the low-pass field: the
    L^p moments should grow at most sub-polynomially in the block
    frequency when the derivative order is admissible."""
    o1, o2 = (int(order[0]), int(order[1]))
    if o1 < 0 or o2 < 0:
        raise ValueError(f"derivative order must be nonnegative, got {(o1, o2)}")
    total = o1 + o2
    limit = s if field == "u" else s - 1
    if field not in ("u", "v"):
        raise ValueError(f"field must be 'u' or 'v', got {field!r}")
    if total > limit:
        raise UnsupportedParameterError(
            f"derivative order {total} exceeds the admissible {limit} for field {field!r}")
    _check_p_samples(p, samples, MAX_P)
    blocks = sorted(int(m) for m in block_list)
    ens = EnsembleSpec(variant=variant, s=s, sample_max_mode=cutoff,
                       truncation_N=cutoff, master_seed=master_seed, beta=beta)
    funcs = [("block_sup_norm", {"order": (o1, o2), "block": m, "field": field})
             for m in blocks]
    values, weights = collect_values(ens, funcs, samples, workers=workers)
    rows = []
    raw = []
    for col, m in enumerate(blocks):
        est = _estimate_from_values(values[:, col], weights, p, ens,
                                    f"block_sup_norm:M={m}:{field}:{(o1, o2)}")
        rows.append(EstimateRow(m, p, est))
        if keep_raw:
            raw.append((f"block_sup_norm:M={m}", values[:, col].copy(), weights.copy()))
    positive = [(m, row.estimate.value) for m, row in zip(blocks, rows)
                if row.estimate.value > 0]
    if len(positive) < 2:
        raise ValueError("too few nonzero block moments to fit a rate")
    fit = fit_rate([m for m, _ in positive], [v for _, v in positive])
    return SupNormStudyResult(order=(o1, o2), field=field, rows=tuple(rows), fit=fit,
                              raw=tuple(raw))


@dataclass(frozen=True)
class TailRow:
    lower_cutoff: int
    threshold: float
    exceedances: int
    probability: float     # exceedances / samples, or the 1/samples bound
    is_upper_bound: bool   # true when no exceedance was observed


@dataclass(frozen=True)
class TailStudyResult:
    reference_cutoff: int
    rows: tuple
    threshold_monotone: bool  # within each M, probability non-increasing in threshold
    cutoff_monotone: bool     # at each threshold, probability non-increasing in M
    raw: tuple = ()


def tail_estimate_study(s: float, reference_cutoff: int, lower_cutoffs, thresholds,
                        samples: int, *, variant: str = "mu_s", beta: float = 0.0,
                        master_seed: int = 0, workers: int = 1,
                        keep_raw: bool = False) -> TailStudyResult:
    """Empirical exceedance probabilities P(|F_ref - F_M| > threshold).

    Tail decay in the threshold and improvement with growing M are the
    two testable signatures; zero observed exceedances are reported as
    the 1/samples resolution bound and flagged."""
    lower = sorted(int(m) for m in lower_cutoffs)
    if not lower or max(lower) >= reference_cutoff:
        raise ValueError("lower cutoffs must be nonempty and < reference cutoff")
    if samples < 100:
        raise ValueError(f"need at least 100 samples, got {samples}")
    thresholds = [float(a) for a in thresholds]
    if any(a < 0 for a in thresholds):
        raise ValueError("thresholds must be nonnegative")
    ens = EnsembleSpec(variant=variant, s=s, sample_max_mode=reference_cutoff,
                       truncation_N=reference_cutoff, master_seed=master_seed,
                       beta=beta)
    funcs = [("quartic_correction_gap", {"lower_cutoff": m}) for m in lower]
    values, weights = collect_values(ens, funcs, samples, workers=workers)
    rows = []
    prob_table = {}
    raw = []
    for col, m in enumerate(lower):
        gaps = np.abs(values[:, col])
        if keep_raw:
            raw.append((f"quartic_correction_gap:M={m}", values[:, col].copy(),
                        weights.copy()))
        for a in thresholds:
            count = int((gaps > a).sum())
            flagged = count == 0
            prob = (1.0 / samples) if flagged else count / samples
            rows.append(TailRow(lower_cutoff=m, threshold=a, exceedances=count,
                                probability=prob, is_upper_bound=flagged))
            prob_table[(m, a)] = prob
    thr_sorted = sorted(thresholds)
    threshold_monotone = all(
        prob_table[(m, lo)] >= prob_table[(m, hi)]
        for m in lower for lo, hi in zip(thr_sorted, thr_sorted[1:]))
    cutoff_monotone = all(
        prob_table[(m_small, a)] >= prob_table[(m_big, a)]
        for a in thresholds for m_small, m_big in zip(lower, lower[1:]))
    return TailStudyResult(reference_cutoff=reference_cutoff, rows=tuple(rows),
                           threshold_monotone=threshold_monotone,
                           cutoff_monotone=cutoff_monotone, raw=tuple(raw))
