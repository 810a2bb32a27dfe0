"""Coefficient-space fields on the two-dimensional torus.

A real field f(x) = sum_n c_n e^{i n.x}, n in Z^2, is stored as the finite
coefficient block {|n_1| <= max_mode, |n_2| <= max_mode} of a complex array
kept Hermitian (c_{-n} = conj(c_n)), so the field it represents is real.
The torus is normalized to unit volume: integrate(f) returns c_0 and
inner_product(f, g) = sum_n f_n g_{-n} is the L^2 pairing (Parseval).

Products are never computed on an under-resolved grid.  The fast path
evaluates both factors on a grid large enough that every retained mode of
the product is exact; the direct path convolves coefficient arrays and is
kept as an independent oracle.

Fields are immutable after construction and every operation is a pure
function of its inputs, so values can be shared freely across threads and
worker processes.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import fft2, ifft2, next_fast_len
from scipy.signal import convolve2d

_HERMITIAN_TOL = 1e-12


class SpectralError(ValueError):
    """A field or multiplier violated its domain contract."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=128)
def _mode_axis(max_mode: int) -> np.ndarray:
    return _frozen(np.arange(-max_mode, max_mode + 1))


@lru_cache(maxsize=128)
def _sq_modulus(max_mode: int) -> np.ndarray:
    # |n|^2 on the coefficient block
    ax = _mode_axis(max_mode).astype(float)
    return _frozen(ax[:, None] ** 2 + ax[None, :] ** 2)


@lru_cache(maxsize=128)
def _sq_bracket(max_mode: int) -> np.ndarray:
    # 1 + |n|^2
    return _frozen(1.0 + _sq_modulus(max_mode))


def _hermitian_defect(coeffs: np.ndarray) -> float:
    return float(np.abs(coeffs - np.conj(coeffs[::-1, ::-1])).max())


def _hermitify(coeffs: np.ndarray) -> np.ndarray:
    # Exact symmetrization; changes values only at rounding level.
    return 0.5 * (coeffs + np.conj(coeffs[::-1, ::-1]))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Real field on the torus, stored as its centered coefficient block.

    coeffs[i, j] is the coefficient of e^{i n.x} with n = (i - max_mode,
    j - max_mode).  Coefficients outside the block are implicitly zero.
    """

    max_mode: int
    coeffs: np.ndarray
    _trusted: InitVar[bool] = False

    def __post_init__(self, _trusted: bool) -> None:
        if _trusted:
            # Freshly built by an internal op: already Hermitian, not shared.
            self.coeffs.flags.writeable = False
            return
        if self.max_mode < 0:
            raise SpectralError(f"max_mode must be >= 0, got {self.max_mode}")
        c = np.array(self.coeffs, dtype=np.complex128)
        side = 2 * self.max_mode + 1
        if c.shape != (side, side):
            raise SpectralError(
                f"coefficient block must have shape {(side, side)}, got {c.shape}"
            )
        scale = max(float(np.abs(c).max()), 1.0)
        if _hermitian_defect(c) > _HERMITIAN_TOL * scale:
            raise SpectralError("coefficients are not Hermitian-symmetric")
        object.__setattr__(self, "coeffs", _frozen(c))

    # -- small algebra, mainly for tests and integrators ------------------

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if not isinstance(other, SpectralField):
            return NotImplemented
        a, b = self, other
        if a.max_mode < b.max_mode:
            a = embed_window(a, b.max_mode)
        elif b.max_mode < a.max_mode:
            b = embed_window(b, a.max_mode)
        return SpectralField(a.max_mode, a.coeffs + b.coeffs, _trusted=True)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if not isinstance(other, SpectralField):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "SpectralField":
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return SpectralField(self.max_mode, self.coeffs * float(scalar), _trusted=True)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return (-1.0) * self

    def mode(self, n1: int, n2: int) -> complex:
        """Coefficient of e^{i n.x}; zero outside the stored block."""
        K = self.max_mode
        if abs(n1) > K or abs(n2) > K:
            return 0.0 + 0.0j
        return complex(self.coeffs[n1 + K, n2 + K])


@dataclass(frozen=True, eq=False)
class PhaseState:
    """A point (u, v) of phase space; both components share one window."""

    u: SpectralField
    v: SpectralField

    def __post_init__(self) -> None:
        if self.u.max_mode != self.v.max_mode:
            raise SpectralError(
                "phase-space components must share max_mode, got "
                f"{self.u.max_mode} and {self.v.max_mode}"
            )

    @property
    def max_mode(self) -> int:
        return self.u.max_mode


# -- constructors ----------------------------------------------------------


def zero_field(max_mode: int) -> SpectralField:
    return SpectralField(max_mode, np.zeros((2 * max_mode + 1,) * 2, np.complex128),
                         _trusted=True)


def constant_field(value: float, max_mode: int = 0) -> SpectralField:
    c = np.zeros((2 * max_mode + 1,) * 2, np.complex128)
    c[max_mode, max_mode] = value
    return SpectralField(max_mode, c, _trusted=True)


def field_from_modes(max_mode: int, modes: dict) -> SpectralField:
    """Build a field from {(n1, n2): coefficient}, filling conjugates.

    Each listed mode also sets its mirror -n to the conjugate value, so
    passing {(1, 0): 0.5} yields cos(x_1).
    """
    K = max_mode
    c = np.zeros((2 * K + 1, 2 * K + 1), np.complex128)
    for (n1, n2), val in modes.items():
        if abs(n1) > K or abs(n2) > K:
            raise SpectralError(f"mode {(n1, n2)} outside window {K}")
        c[n1 + K, n2 + K] = val
        c[-n1 + K, -n2 + K] = np.conj(val)
    return SpectralField(K, c)


def embed_window(f: SpectralField, max_mode: int) -> SpectralField:
    """Same field on a wider coefficient block."""
    if max_mode < f.max_mode:
        raise SpectralError("embed_window cannot shrink the block")
    if max_mode == f.max_mode:
        return f
    pad = max_mode - f.max_mode
    c = np.pad(f.coeffs, pad)
    return SpectralField(max_mode, c, _trusted=True)


# -- Fourier multipliers ----------------------------------------------------


@dataclass(frozen=True)
class Multiplier:
    """Diagonal operator c_n -> symbol(n) c_n; build via the factories below."""

    kind: str
    exponent: float = 0.0
    cutoff: int = 0
    order: tuple = (0, 0)


def bessel_power(sigma: float) -> Multiplier:
    """Symbol (1 + |n|^2)^(sigma/2): smoothing for sigma < 0."""
    if not math.isfinite(sigma):
        raise SpectralError("bessel_power exponent must be finite")
    return Multiplier("bessel_power", exponent=float(sigma))


def riesz_power(sigma: float) -> Multiplier:
    """Symbol |n|^sigma with the zero mode annihilated for sigma > 0.

    For sigma < 0 the operator is only defined on mean-zero fields;
    apply_multiplier raises on a field with nonzero mean.
    """
    if not math.isfinite(sigma):
        raise SpectralError("riesz_power exponent must be finite")
    return Multiplier("riesz_power", exponent=float(sigma))


def low_pass(cutoff: int) -> Multiplier:
    """Sharp projection onto the Euclidean ball |n| <= cutoff."""
    if cutoff < 0:
        raise SpectralError("low_pass cutoff must be >= 0")
    return Multiplier("low_pass", cutoff=int(cutoff))


def high_pass(cutoff: int) -> Multiplier:
    """Complement of low_pass: keeps |n| > cutoff."""
    if cutoff < 0:
        raise SpectralError("high_pass cutoff must be >= 0")
    return Multiplier("high_pass", cutoff=int(cutoff))


def dyadic_block(block: int) -> Multiplier:
    """Keeps the shell block <= (1 + |n|^2)^(1/2) < 2 * block."""
    if block < 0:
        raise SpectralError("dyadic_block parameter must be >= 0")
    return Multiplier("dyadic_block", cutoff=int(block))


def remove_mean() -> Multiplier:
    """Zeroes the n = 0 coefficient."""
    return Multiplier("remove_mean")


def derivative(order1: int, order2: int) -> Multiplier:
    """Partial derivative of multi-order (order1, order2): symbol (i n)^order."""
    if order1 < 0 or order2 < 0:
        raise SpectralError("derivative orders must be >= 0")
    return Multiplier("derivative", order=(int(order1), int(order2)))


@lru_cache(maxsize=512)
def _symbol(m: Multiplier, max_mode: int) -> np.ndarray:
    sq_mod = _sq_modulus(max_mode)
    if m.kind == "bessel_power":
        sym = _sq_bracket(max_mode) ** (m.exponent / 2.0)
    elif m.kind == "riesz_power":
        if m.exponent == 0.0:
            sym = np.ones_like(sq_mod)
        else:
            with np.errstate(divide="ignore"):
                sym = sq_mod ** (m.exponent / 2.0)
            # |0|^sigma = 0 for sigma > 0; the sigma < 0 mean check happens
            # in apply_multiplier before this symbol is used.
            sym[max_mode, max_mode] = 0.0
    elif m.kind == "low_pass":
        sym = (sq_mod <= m.cutoff**2).astype(float)
    elif m.kind == "high_pass":
        sym = (sq_mod > m.cutoff**2).astype(float)
    elif m.kind == "dyadic_block":
        br = _sq_bracket(max_mode)
        sym = ((br >= m.cutoff**2) & (br < 4 * m.cutoff**2)).astype(float)
    elif m.kind == "remove_mean":
        sym = np.ones_like(sq_mod)
        sym[max_mode, max_mode] = 0.0
    elif m.kind == "derivative":
        ax = _mode_axis(max_mode).astype(float)
        a1, a2 = m.order
        sym = (1j * ax[:, None]) ** a1 * (1j * ax[None, :]) ** a2
    else:
        raise SpectralError(f"unknown multiplier kind {m.kind!r}")
    return _frozen(sym)


def apply_multiplier(f: SpectralField, m: Multiplier) -> SpectralField:
    """Multiply coefficients by the symbol of m; same window as f."""
    K = f.max_mode
    if m.kind == "riesz_power" and m.exponent < 0 and f.coeffs[K, K] != 0:
        raise SpectralError(
            "riesz_power with negative exponent needs a mean-zero field "
            "(the zero mode would divide by |0|)"
        )
    return SpectralField(K, f.coeffs * _symbol(m, K), _trusted=True)


def project_ball(f: SpectralField, cutoff: int) -> SpectralField:
    """low_pass(cutoff) with the block shrunk to min(max_mode, cutoff).

    Same operator as apply_multiplier(f, low_pass(cutoff)); the smaller
    block keeps downstream product grids tight.
    """
    K = min(f.max_mode, cutoff)
    c = _crop(f.coeffs, f.max_mode, K) * (_sq_modulus(K) <= cutoff**2)
    return SpectralField(K, c, _trusted=True)


def _crop(coeffs: np.ndarray, K: int, K_new: int) -> np.ndarray:
    lo, hi = K - K_new, K + K_new + 1
    return coeffs[lo:hi, lo:hi]


# -- grid transport ---------------------------------------------------------


def _to_grid(coeffs: np.ndarray, max_mode: int, grid: int) -> np.ndarray:
    """Values of the field on the grid x_j = 2 pi j / grid (real part).

    Requires grid >= 2 * max_mode + 1 so modes occupy distinct bins.
    """
    spec = np.zeros((grid, grid), np.complex128)
    idx = _mode_axis(max_mode) % grid
    spec[np.ix_(idx, idx)] = coeffs
    return ifft2(spec).real * (grid * grid)


def _from_grid(values: np.ndarray, max_mode: int) -> np.ndarray:
    grid = values.shape[0]
    spec = fft2(values) / (grid * grid)
    idx = _mode_axis(max_mode) % grid
    return spec[np.ix_(idx, idx)]


# -- products, integrals, norms ---------------------------------------------


def pointwise_product(f: SpectralField, g: SpectralField,
                      method: str = "fft") -> SpectralField:
    """Exact coefficients of the pointwise product f * g.

    The block widens to the sum of the factors' blocks, so no mode is
    truncated.  method="fft" samples both factors on a grid with
    2 * (K_f + K_g) + 1 or more points per direction (alias-free for every
    retained mode); method="direct" convolves coefficient arrays and serves
    as the independent oracle for the fast path.
    """
    K_out = f.max_mode + g.max_mode
    if method == "direct":
        c = convolve2d(f.coeffs, g.coeffs, mode="full")
    elif method == "fft":
        grid = next_fast_len(2 * K_out + 1)
        fg = _to_grid(f.coeffs, f.max_mode, grid)
        gg = fg if g is f else _to_grid(g.coeffs, g.max_mode, grid)
        vals = fg * gg
        c = _from_grid(vals, K_out)
    else:
        raise SpectralError(f"unknown product method {method!r}")
    return SpectralField(K_out, _hermitify(c), _trusted=True)


def truncated_cube(u: SpectralField, cutoff: int) -> SpectralField:
    """low_pass(cutoff) of (low_pass(cutoff) u)^3, evaluated alias-free.

    The working grid has at least 4 * cutoff + 2 points per direction
    (rounded up to an FFT-friendly size): folding from the cube's support
    then cannot reach any retained mode.
    """
    w = project_ball(u, cutoff)
    Kw = w.max_mode
    K_out = min(cutoff, 3 * Kw)
    grid = next_fast_len(max(4 * cutoff + 2, 3 * Kw + K_out + 2))
    vals = _to_grid(w.coeffs, Kw, grid)
    c = _from_grid(vals * vals * vals, K_out)
    c = _hermitify(c) * (_sq_modulus(K_out) <= cutoff**2)
    return SpectralField(K_out, c, _trusted=True)


def integrate(f: SpectralField) -> float:
    """Integral over the unit-volume torus: the zero-mode coefficient."""
    return float(f.coeffs[f.max_mode, f.max_mode].real)


def inner_product(f: SpectralField, g: SpectralField) -> float:
    """L^2 pairing: integral of f g = sum_n f_n g_{-n} (Parseval)."""
    K = min(f.max_mode, g.max_mode)
    a = _crop(f.coeffs, f.max_mode, K)
    b = _crop(g.coeffs, g.max_mode, K)
    # g_{-n} = conj(g_n), so the pairing is the standard complex dot product.
    return float(np.vdot(b, a).real)


def sobolev_norm(p: PhaseState, sigma: float) -> float:
    """Norm of (u, v) in H^sigma x H^(sigma-1) via bracket-weighted sums."""
    K = p.max_mode
    br = _sq_bracket(K)
    uu = np.sum(br ** sigma * np.abs(p.u.coeffs) ** 2)
    vv = np.sum(br ** (sigma - 1.0) * np.abs(p.v.coeffs) ** 2)
    return float(np.sqrt(uu + vv))


def grid_sup_norm(f: SpectralField, oversample: int = 4) -> float:
    """Max of |f| over an equispaced grid with oversample * (2K+1) points
    per direction.  oversample must be at least 2."""
    if oversample < 2:
        raise SpectralError("oversample must be >= 2")
    grid = oversample * (2 * f.max_mode + 1)
    return float(np.abs(_to_grid(f.coeffs, f.max_mode, grid)).max())


# -- serialization ----------------------------------------------------------


def _half_lattice(max_mode: int):
    """Lexicographic (n1, n2) over the stored half: n2 > 0, or n2 = 0 and
    n1 >= 0.  The mirror coefficients are implied by Hermitian symmetry."""
    K = max_mode
    for n1 in range(-K, K + 1):
        for n2 in range(-K, K + 1):
            if n2 > 0 or (n2 == 0 and n1 >= 0):
                yield n1, n2


def field_to_dict(f: SpectralField) -> dict:
    K = f.max_mode
    rows = []
    for n1, n2 in _half_lattice(K):
        c = f.coeffs[n1 + K, n2 + K]
        rows.append([n1, n2, float(c.real), float(c.imag)])
    return {"max_mode": K, "coeffs": rows}


def field_from_dict(d: dict) -> SpectralField:
    K = int(d["max_mode"])
    c = np.zeros((2 * K + 1, 2 * K + 1), np.complex128)
    for n1, n2, re, im in d["coeffs"]:
        n1, n2 = int(n1), int(n2)
        if not (n2 > 0 or (n2 == 0 and n1 >= 0)):
            raise SpectralError(f"serialized mode {(n1, n2)} is not in the stored half")
        if abs(n1) > K or abs(n2) > K:
            raise SpectralError(f"serialized mode {(n1, n2)} outside window {K}")
        c[n1 + K, n2 + K] = complex(re, im)
        c[-n1 + K, -n2 + K] = complex(re, -im)
    return SpectralField(K, c)


def state_to_dict(p: PhaseState) -> dict:
    return {"u": field_to_dict(p.u), "v": field_to_dict(p.v)}


def state_from_dict(d: dict) -> PhaseState:
    return PhaseState(field_from_dict(d["u"]), field_from_dict(d["v"]))
