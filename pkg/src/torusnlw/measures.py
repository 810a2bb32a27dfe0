"""Weighted-measure densities and Gaussian-equivalence diagnostics.

The weighted measures of interest are absolutely continuous with respect
to a reference Gaussian: an energy cutoff indicator times the exponential
of minus the quartic correction (for the wave family the plain quartic
rides along too).  Everything here is unnormalized; downstream statistics
are ratios of weighted Monte Carlo sums, so normalization constants
cancel and are never computed.

The mode-by-mode equivalence diagnostic compares the two candidate
reference Gaussians for one marginal.  For each frequency the two
variances lambda and lambda_tilde produce the scale-free statistic

    ((lambda - lambda_tilde) / (lambda + lambda_tilde))^2

whose summability over the lattice decides equivalence versus mutual
singularity.  The statistic depends only on |n|^2, so the summation
runs over squared-modulus classes with multiplicities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import EQUATIONS, UnsupportedParameterError, quartic_correction, truncated_energy
from .spectral import PhaseState, pointwise_product, inner_product, project_ball

MARGINALS = ("position", "velocity")


@dataclass(frozen=True)
class DensityValue:
    """Unnormalized density of the weighted measure at one state."""

    weight: float      # indicator * exp(log_weight), 0 when rejected
    indicator: bool    # energy cutoff passed
    log_weight: float  # always finite; meaningful when indicator is true


def weighted_density(p: PhaseState, s: float, cutoff: int, radius: float,
                     equation: str = "nlkg", beta: float = 0.0) -> DensityValue:
    """Density of the cutoff weighted measure against the reference Gaussian.

    indicator = (truncated energy <= radius); log_weight = minus the
    quartic correction, with the plain low-pass quartic included as well
    for the wave equation (its conserved energy is carried inside the
    modified one, bringing the extra factor along).
    """
    if equation not in EQUATIONS:
        raise UnsupportedParameterError(
            f"equation must be one of {EQUATIONS}, got {equation!r}")
    if not radius > 0:
        raise ValueError(f"cutoff radius must be positive (or inf), got {radius}")
    log_weight = -quartic_correction(p.u, s, cutoff, equation)
    if equation == "nlw":
        uN = project_ball(p.u, cutoff)
        sq = pointwise_product(uN, uN)
        log_weight -= 0.25 * inner_product(sq, sq)
    indicator = truncated_energy(p, cutoff, equation, beta) <= radius
    with np.errstate(over="ignore"):
        weight = float(np.exp(log_weight)) if indicator else 0.0
    return DensityValue(weight=weight, indicator=indicator, log_weight=log_weight)


# -- mode-by-mode Gaussian comparison -----------------------------------------


def _variance_pair(sq_mod, s: float, marginal: str, scale_power: float = 0.0):
    """Per-mode variances of the two reference Gaussians, both multiplied
    by the common factor (1+|n|^2)^scale_power (which must cancel in the
    comparison statistic)."""
    sq_mod = np.asarray(sq_mod, dtype=float)
    common = (1.0 + sq_mod) ** scale_power
    if marginal == "position":
        lam = (1.0 + sq_mod) ** (-(s + 1.0))
        lam_t = 1.0 / (1.0 + sq_mod + sq_mod ** (s + 1.0))
    elif marginal == "velocity":
        lam = (1.0 + sq_mod) ** (-s)
        lam_t = 1.0 / (1.0 + sq_mod ** s)
    else:
        raise ValueError(f"marginal must be one of {MARGINALS}, got {marginal!r}")
    return common * lam, common * lam_t


def comparison_statistic(sq_mod, s: float, marginal: str = "position"):
    """S = ((lam - lam_t)/(lam + lam_t))^2 for squared modulus |n|^2.

    Scale-free: computed at two unrelated common-factor powers and checked
    to agree to 1e-14 before returning (the factor must cancel exactly).
    """
    lam, lam_t = _variance_pair(sq_mod, s, marginal)
    stat = ((lam - lam_t) / (lam + lam_t)) ** 2
    lam2, lam_t2 = _variance_pair(sq_mod, s, marginal, scale_power=1.7)
    stat2 = ((lam2 - lam_t2) / (lam2 + lam_t2)) ** 2
    if not np.allclose(stat, stat2, rtol=1e-14, atol=1e-14):
        raise AssertionError("common scale factor failed to cancel in the statistic")
    return stat


@dataclass(frozen=True)
class KakutaniSummary:
    """Comparison statistics aggregated over squared-modulus classes
    for all |n| <= max_norm, plus the full partial sum."""

    s: float
    max_norm: int
    marginal: str
    class_sq_modulus: tuple    # distinct |n|^2 values, ascending
    class_multiplicity: tuple  # number of lattice points in each class
    class_statistic: tuple     # S for a single mode of the class
    class_cumulative: tuple    # running multiplicity-weighted sum
    partial_sum: float         # statistic summed over all |n| <= max_norm

    def rows(self):
        """(sq_modulus, multiplicity, statistic, weighted, cumulative)."""
        for q, m, v, c in zip(self.class_sq_modulus, self.class_multiplicity,
                              self.class_statistic, self.class_cumulative):
            yield q, m, v, m * v, c


def kakutani_terms(s: float, max_norm: int, marginal: str = "position") -> KakutaniSummary:
    """Evaluate the equivalence statistic for every |n| <= max_norm.

    A finite limit of partial_sum as max_norm grows means the two
    Gaussians are equivalent; unbounded growth means mutual singularity.
    """
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    if max_norm < 0:
        raise ValueError(f"max_norm must be nonnegative, got {max_norm}")
    if marginal not in MARGINALS:
        raise ValueError(f"marginal must be one of {MARGINALS}, got {marginal!r}")
    axis = np.arange(-max_norm, max_norm + 1)
    sq = axis[:, None] ** 2 + axis[None, :] ** 2
    sq = sq[sq <= max_norm ** 2]
    classes, mult = np.unique(sq, return_counts=True)
    stat = comparison_statistic(classes, s, marginal)
    weighted = mult * stat
    cumulative = np.cumsum(weighted)
    return KakutaniSummary(
        s=s,
        max_norm=max_norm,
        marginal=marginal,
        class_sq_modulus=tuple(int(q) for q in classes),
        class_multiplicity=tuple(int(m) for m in mult),
        class_statistic=tuple(float(v) for v in stat),
        class_cumulative=tuple(float(c) for c in cumulative),
        partial_sum=float(weighted.sum()),
    )
