"""The four GCC-PHAT back-ends and peak picking.

Given a PHAT-normalized cross-spectrum X12, every back-end produces the same
quantity: a correlation curve over the Q grid angles,

    x12[q] = Re( sum_k g[k] * X12[k] * exp(j * 2*pi * k * tau_q / N) )

- "mm"       evaluates it exactly as one complex matrix-vector product.
- "fftNN"    zero-pads the spectrum by a factor i = NN, takes one real
             inverse FFT of length i*N, and reads the nearest lag per angle.
- "fftNN-qi" additionally corrects each read with a quadratic fit through
             the three neighboring lags, evaluated at the fractional offset.
- "svd"      replaces the exact product with two skinny real products from
             the offline low-rank factorization.

Each back-end also exists as a prepared-state class with a common
``estimate(x12) -> DoaEstimate`` call shape, so the benchmark harness times
identical interfaces. Prepared state is immutable; estimate calls allocate
their own scratch and are reentrant.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from .core import (AngularGrid, GccParams, SteeringMatrix, normalization_gains,
                   steering_matrix, theta_grid)
from .errors import ConfigurationError, DimensionError, InputError
from .factorization import LowRankFactors, factorize


@dataclass(frozen=True)
class DoaEstimate:
    """Peak of a correlation curve: grid index, angle (radians), and energy."""

    q_max: int
    theta_est: float
    energy: float


@dataclass(frozen=True)
class InterpolatedLags:
    """Time-domain correlation on the zero-padded lag grid of length factor*N."""

    samples: np.ndarray
    factor: int


def _round_half_away(x: np.ndarray) -> np.ndarray:
    # nearest integer, ties away from zero (not banker's rounding)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _check_spectrum(x12: np.ndarray, half_bins: int) -> np.ndarray:
    x12 = np.asarray(x12)
    if x12.shape != (half_bins,):
        raise DimensionError(f"cross-spectrum shape {x12.shape}, expected ({half_bins},)")
    return x12


def mm_correlate(w: SteeringMatrix, x12: np.ndarray) -> np.ndarray:
    """Exact correlation curve: Re(W @ X12)."""
    x12 = _check_spectrum(x12, w.entries.shape[1])
    return (w.entries @ x12).real


def _padded_gains(gains: np.ndarray, interp: int) -> np.ndarray:
    """Gains pre-scaled so one irfft of length i*N yields the weighted sum.

    The real inverse transform doubles every interior bin and divides by the
    length, so interior gains carry i*N/2 and the DC (and, for i=1, Nyquist)
    edge carries i*N.
    """
    i_n = interp * (2 * (len(gains) - 1))
    gs = gains * float(i_n)
    gs[1:] *= 0.5
    if interp == 1:
        gs[-1] *= 2.0
    return gs


def fft_correlate(x12: np.ndarray, params: GccParams) -> InterpolatedLags:
    """Zero-padded inverse transform of the g-weighted cross-spectrum."""
    x12 = _check_spectrum(x12, params.half_bins)
    i_n = params.interp * params.n
    gs = _padded_gains(normalization_gains(params.n), params.interp)
    buf = np.zeros(i_n // 2 + 1, dtype=np.complex128)
    np.multiply(gs, x12, out=buf[: params.half_bins])
    # the one-sided convention keeps only the real part at the spectrum edges
    buf[0] = gs[0] * x12[0].real
    if params.interp == 1:
        buf[-1] = gs[-1] * x12[-1].real
    return InterpolatedLags(samples=np.fft.irfft(buf, i_n), factor=params.interp)


def _check_lags(y: InterpolatedLags, grid: AngularGrid, params: GccParams) -> None:
    if y.factor != params.interp:
        raise ConfigurationError(f"lags built at factor {y.factor}, params.interp={params.interp}")
    if len(y.samples) != params.interp * params.n:
        raise DimensionError(f"{len(y.samples)} lag samples, expected {params.interp * params.n}")


def map_lags(y: InterpolatedLags, grid: AngularGrid, params: GccParams) -> np.ndarray:
    """Nearest-lag readout: values[q] = samples[round(i * tau_q) mod i*N]."""
    _check_lags(y, grid, params)
    i_n = len(y.samples)
    idx = _round_half_away(params.interp * grid.taus).astype(np.int64) % i_n
    return y.samples[idx]


def qi_correlate(y: InterpolatedLags, grid: AngularGrid, params: GccParams) -> np.ndarray:
    """Quadratic-corrected readout at the fractional lag offsets.

    For each angle, fit a parabola through the three lags around
    round(i * tau_q) and evaluate it at the remaining fractional offset
    delta in [-0.5, 0.5].
    """
    _check_lags(y, grid, params)
    i_n = len(y.samples)
    r = params.interp * grid.taus
    t0 = _round_half_away(r)
    delta = r - t0
    base = t0.astype(np.int64)
    y_m = y.samples[(base - 1) % i_n]
    y_0 = y.samples[base % i_n]
    y_p = y.samples[(base + 1) % i_n]
    a = 0.5 * (y_m - 2.0 * y_0 + y_p)
    b = 0.5 * (y_p - y_m)
    return a * delta**2 + b * delta + y_0


def svd_correlate(factors: LowRankFactors, x12: np.ndarray) -> np.ndarray:
    """Low-rank curve: U_R (T_R Re X12) - U_I (T_I Im X12)."""
    x12 = _check_spectrum(x12, factors.t_r.shape[1])
    re = np.ascontiguousarray(x12.real)
    im = np.ascontiguousarray(x12.imag)
    return factors.u_r @ (factors.t_r @ re) - factors.u_i @ (factors.t_i @ im)


def pick_peak(curve: np.ndarray, grid: AngularGrid) -> DoaEstimate:
    """First index attaining the maximum; energy is the curve value there."""
    values = np.asarray(curve)
    if values.size == 0:
        raise DimensionError("empty correlation curve")
    if values.shape != grid.thetas.shape:
        raise DimensionError(f"curve has {values.shape[0]} values for {grid.thetas.shape[0]} angles")
    q = int(np.argmax(values))
    return DoaEstimate(q_max=q, theta_est=float(grid.thetas[q]), energy=float(values[q]))


# ---------------------------------------------------------------------------
# prepared estimators (one state build, many estimate calls)

class MatrixEstimator:
    """Exact back-end: one complex matrix-vector product per frame."""

    def __init__(self, params: GccParams):
        self.params = params
        self.grid = theta_grid(params)
        self.name = "mm"
        self._entries = steering_matrix(params, self.grid).entries
        self._thetas = self.grid.thetas

    def estimate(self, x12: np.ndarray) -> DoaEstimate:
        values = (self._entries @ x12).real
        q = int(np.argmax(values))
        return DoaEstimate(q, float(self._thetas[q]), float(values[q]))


class FftEstimator:
    """Zero-padded-IFFT back-end, optionally with quadratic correction."""

    def __init__(self, params: GccParams, qi: bool = False):
        self.params = params
        self.grid = theta_grid(params)
        self.qi = qi
        self.name = f"fft{params.interp:02d}" + ("-qi" if qi else "")
        interp, n = params.interp, params.n
        self._interp = interp
        self._i_n = interp * n
        self._nb = self._i_n // 2 + 1
        self._k = params.half_bins
        self._gs = _padded_gains(normalization_gains(n), interp)
        self._g0 = float(self._gs[0])
        self._g_nyq = float(self._gs[-1]) if interp == 1 else 0.0
        r = interp * self.grid.taus
        t0 = _round_half_away(r)
        base = t0.astype(np.int64)
        self._idx = base % self._i_n
        if qi:
            delta = r - t0
            self._idx3 = np.stack([(base - 1) % self._i_n, self._idx, (base + 1) % self._i_n])
            # parabola through (y-, y0, y+) evaluated at delta, as lag weights
            self._wts = np.stack([0.5 * (delta * delta - delta),
                                  1.0 - delta * delta,
                                  0.5 * (delta * delta + delta)])
        self._thetas = self.grid.thetas

    def estimate(self, x12: np.ndarray) -> DoaEstimate:
        buf = np.zeros(self._nb, dtype=np.complex128)
        np.multiply(self._gs, x12, out=buf[: self._k])
        buf[0] = self._g0 * x12[0].real
        if self._interp == 1:
            buf[-1] = self._g_nyq * x12[-1].real
        y = np.fft.irfft(buf, self._i_n)
        if self.qi:
            values = np.einsum("ij,ij->j", self._wts, y[self._idx3])
        else:
            values = y[self._idx]
        q = int(np.argmax(values))
        return DoaEstimate(q, float(self._thetas[q]), float(values[q]))


class SvdEstimator:
    """Low-rank back-end using offline factors (built here if not supplied)."""

    def __init__(self, params: GccParams, factors: LowRankFactors | None = None):
        self.params = params
        self.grid = theta_grid(params)
        self.name = "svd"
        if factors is None:
            factors = factorize(steering_matrix(params, self.grid), params.delta)
        if factors.u_r.shape[0] != params.q or factors.t_r.shape[1] != params.half_bins:
            raise DimensionError(
                f"factors are {factors.u_r.shape[0]} x {factors.t_r.shape[1]}, "
                f"params need {params.q} x {params.half_bins}")
        self.factors = factors
        self._ur, self._tr = factors.u_r, factors.t_r
        self._ui, self._ti = factors.u_i, factors.t_i
        self._thetas = self.grid.thetas

    def estimate(self, x12: np.ndarray) -> DoaEstimate:
        re = np.ascontiguousarray(x12.real)
        im = np.ascontiguousarray(x12.imag)
        values = self._ur @ (self._tr @ re) - self._ui @ (self._ti @ im)
        q = int(np.argmax(values))
        return DoaEstimate(q, float(self._thetas[q]), float(values[q]))


# ---------------------------------------------------------------------------
# method registry

_FFT_NAME = re.compile(r"fft(\d{2})(-qi)?\Z")


def method_names() -> list[str]:
    """All 14 back-end names in roster order."""
    from .core import ALLOWED_INTERP
    names = ["mm"]
    names += [f"fft{i:02d}" for i in ALLOWED_INTERP]
    names += [f"fft{i:02d}-qi" for i in ALLOWED_INTERP]
    names.append("svd")
    return names


def parse_method(name: str) -> tuple[str, int, bool]:
    """Split a method name into (kind, interp, qi); rejects unknown names."""
    if name == "mm":
        return "mm", 1, False
    if name == "svd":
        return "svd", 1, False
    m = _FFT_NAME.match(name)
    if m:
        from .core import ALLOWED_INTERP
        interp = int(m.group(1))
        if interp in ALLOWED_INTERP:
            return "fft", interp, m.group(2) is not None
    raise InputError(f"unknown method {name!r}; expected one of {', '.join(method_names())}")


def build_estimator(name: str, params: GccParams,
                    factors: LowRankFactors | None = None):
    """Prepared estimator for a method name; interp in the name wins."""
    kind, interp, qi = parse_method(name)
    if kind == "mm":
        return MatrixEstimator(params)
    if kind == "svd":
        return SvdEstimator(params, factors)
    return FftEstimator(replace(params, interp=interp), qi=qi)
