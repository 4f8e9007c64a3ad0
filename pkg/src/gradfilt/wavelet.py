"""Periodized multilevel 1-D discrete wavelet transform with a Daubechies-4 basis.

The transform is orthonormal on any even signal length because boundary
handling is circular: analysis correlates the signal with the filter taps
modulo the signal length, synthesis is the exact adjoint (upsample by two,
circular convolution with the synthesis taps). Coefficient count therefore
always equals the input length and reconstruction is exact to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "WaveletBasis",
    "WaveletCoeffs",
    "db4_basis",
    "dwt_single",
    "idwt_single",
    "dwt_multilevel",
    "idwt_multilevel",
    "soft_threshold",
]


@dataclass(frozen=True)
class WaveletBasis:
    """Analysis/synthesis filter taps of an orthonormal wavelet pair.

    For an orthonormal family the synthesis taps equal the analysis taps;
    both are stored so the inverse transform never assumes orthogonality.
    """

    lowpass_analysis: tuple[float, ...]
    highpass_analysis: tuple[float, ...]
    lowpass_synthesis: tuple[float, ...]
    highpass_synthesis: tuple[float, ...]


@dataclass
class WaveletCoeffs:
    """Multilevel decomposition: one lowpass band plus K highpass bands.

    ``highpass`` is ordered coarsest to finest, so ``highpass[0]`` has the
    same length as ``lowpass`` and each following band doubles in length.
    """

    lowpass: np.ndarray
    highpass: list[np.ndarray]

    def total_count(self) -> int:
        return self.lowpass.shape[0] + sum(h.shape[0] for h in self.highpass)


def _daubechies_lowpass(moments: int) -> np.ndarray:
    """Derive the minimum-phase Daubechies scaling filter with the given
    number of vanishing moments (2*moments taps) by spectral factorization.

    The half-band polynomial P(y) = sum_k C(moments-1+k, k) y^k is factored
    over y = (2 - z - 1/z)/4; keeping the z-roots inside the unit circle and
    multiplying by ((1+z)/2)^moments yields the filter, normalized so the
    taps sum to sqrt(2).
    """
    n = moments
    # P(y) coefficients, ascending powers of y.
    p = [math.comb(n - 1 + k, k) for k in range(n)]
    yroots = np.roots(p[::-1])
    zroots = []
    for y in yroots:
        # y = (2 - z - 1/z)/4  <=>  z^2 - (2 - 4y) z + 1 = 0
        b = 2.0 - 4.0 * y
        disc = np.sqrt(b * b - 4.0 + 0j)
        for z in ((b + disc) / 2.0, (b - disc) / 2.0):
            if abs(z) < 1.0:
                zroots.append(z)
    if len(zroots) != n - 1:
        raise ArithmeticError("spectral factorization lost a root")
    q = np.poly(zroots).real  # conjugate pairs -> real coefficients
    h = q
    for _ in range(n):
        h = np.convolve(h, [0.5, 0.5])
    h = h * (math.sqrt(2.0) / h.sum())
    # Minimum phase front-loads the energy; normalize orientation so the
    # derivation is reproducible regardless of root ordering.
    if abs(h[0]) < abs(h[-1]):
        h = h[::-1]
    return h


def _quadrature_mirror(lowpass: np.ndarray) -> np.ndarray:
    # g[k] = (-1)^k h[F-1-k]
    signs = np.where(np.arange(lowpass.size) % 2 == 0, 1.0, -1.0)
    return signs * lowpass[::-1]


def _verify_orthonormal(lowpass: np.ndarray, moments: int) -> None:
    """Independent conditions any usable basis must satisfy; raises if the
    derivation produced garbage rather than letting bad taps leak out."""
    if abs(lowpass.sum() - math.sqrt(2.0)) > 1e-10:
        raise ArithmeticError("lowpass taps do not sum to sqrt(2)")
    if abs(np.dot(lowpass, lowpass) - 1.0) > 1e-10:
        raise ArithmeticError("lowpass taps are not unit-energy")
    for m in range(1, lowpass.size // 2):
        if abs(np.dot(lowpass[: -2 * m], lowpass[2 * m:])) > 1e-10:
            raise ArithmeticError("double-shift orthogonality violated")
    high = _quadrature_mirror(lowpass)
    k = np.arange(high.size, dtype=float)
    for m in range(moments):
        if abs(np.dot(k**m, high)) > 1e-8:
            raise ArithmeticError(f"vanishing moment {m} violated")


@lru_cache(maxsize=None)
def db4_basis() -> WaveletBasis:
    """The 8-tap, 4-vanishing-moment Daubechies orthonormal filter bank.

    Taps are derived by spectral factorization and checked against the
    orthonormality and vanishing-moment conditions on first use.
    """
    low = _daubechies_lowpass(4)
    _verify_orthonormal(low, 4)
    high = _quadrature_mirror(low)
    return WaveletBasis(
        lowpass_analysis=tuple(low),
        highpass_analysis=tuple(high),
        lowpass_synthesis=tuple(low),
        highpass_synthesis=tuple(high),
    )


def dwt_single(signal, basis: WaveletBasis):
    """One analysis level: periodized correlation with the analysis taps,
    downsampled by two. Returns (lowpass, highpass), each half the input
    length. Extra trailing axes are transformed independently.
    """
    x = np.asarray(signal, dtype=float)
    n = x.shape[0]
    if n < 2 or n % 2:
        raise ValueError(f"signal length must be even and >= 2, got {n}")
    half = n // 2
    # Analysis windows start one sample past the even grid.  Any fixed
    # circular offset gives an orthonormal periodized transform; this one
    # keeps the last element of a time-ordered window on the decimation
    # lattice, so a smoother built on the transform tracks the newest
    # sample instead of the one before it.
    starts = 2 * np.arange(half) + 1
    lo = np.zeros((half,) + x.shape[1:])
    hi = np.zeros_like(lo)
    # Accumulate tap by tap in a fixed order: output bits do not depend on
    # how many columns ride along, which the layout-independence contract
    # of the filters requires.
    for m, (cl, ch) in enumerate(
        zip(basis.lowpass_analysis, basis.highpass_analysis)
    ):
        rows = x[(starts + m) % n]
        lo += cl * rows
        hi += ch * rows
    return lo, hi


def idwt_single(lowpass, highpass, basis: WaveletBasis):
    """One synthesis level: upsample both bands by two and circularly
    convolve with the synthesis taps. Exact inverse of ``dwt_single``.
    """
    lo = np.asarray(lowpass, dtype=float)
    hi = np.asarray(highpass, dtype=float)
    if lo.shape != hi.shape:
        raise ValueError(
            f"band shapes differ: lowpass {lo.shape} vs highpass {hi.shape}"
        )
    half = lo.shape[0]
    if half < 1:
        raise ValueError("bands must be non-empty")
    n = 2 * half
    out = np.zeros((n,) + lo.shape[1:])
    # Mirror the analysis offset exactly; synthesis is the adjoint.
    starts = 2 * np.arange(half) + 1
    for m, (cl, ch) in enumerate(
        zip(basis.lowpass_synthesis, basis.highpass_synthesis)
    ):
        # (starts + m) % n hits distinct outputs for a fixed tap, so the
        # fancy-indexed += below never collides.
        out[(starts + m) % n] += cl * lo + ch * hi
    return out


def dwt_multilevel(signal, levels: int, basis: WaveletBasis) -> WaveletCoeffs:
    """Recursively split the lowpass band ``levels`` times.

    Requires the signal length to be a power of two with 2**levels <= length
    so every level stays even.
    """
    x = np.asarray(signal, dtype=float)
    n = x.shape[0]
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"signal length must be a power of two, got {n}")
    if levels < 0 or 2**levels > n:
        raise ValueError(
            f"invalid decomposition depth: levels={levels} needs 2**levels <= {n}"
        )
    highs = []
    approx = x
    for _ in range(levels):
        approx, detail = dwt_single(approx, basis)
        highs.append(detail)
    highs.reverse()  # coarsest first
    return WaveletCoeffs(lowpass=approx, highpass=highs)


def idwt_multilevel(coeffs: WaveletCoeffs, basis: WaveletBasis):
    """Invert ``dwt_multilevel`` exactly (up to floating-point rounding)."""
    x = np.asarray(coeffs.lowpass, dtype=float)
    for detail in coeffs.highpass:
        d = np.asarray(detail, dtype=float)
        if d.shape[0] != x.shape[0]:
            raise ValueError(
                f"band lengths inconsistent: {x.shape[0]} lowpass vs "
                f"{d.shape[0]} highpass"
            )
        x = idwt_single(x, d, basis)
    return x


def soft_threshold(values, lam: float):
    """Element-wise shrinkage sign(x) * max(|x| - lam, 0)."""
    if lam < 0:
        raise ValueError(f"threshold must be >= 0, got {lam}")
    v = np.asarray(values, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)
