"""Uniform scalar quantizer for complex interference terms.

The real and imaginary parts are quantized independently with a uniform
quantizer over ``[-c*sigma, c*sigma]`` where ``sigma**2`` is half the
expected power of the complex input and ``c`` is ``clip_sigmas``.  A
budget of ``B`` bits gives ``ceil(B/2)`` bits to the real part and
``floor(B/2)`` to the imaginary part.  Out-of-range inputs saturate at the
outermost cell.

Coarse codes may use a narrower range.  Each part spans the widest range
within ``c * sigma`` whose mean-square error on a Gaussian input is at most
``MARGIN`` times that of the code with one bit less, so distortion never
grows with the budget.  For ``c = 4`` this only bites at 1 bit, where
levels at ``+-2 sigma`` do worse than sending nothing.  From 2 bits on the
full range is used and the distortion constant ``D * 4**b / sigma**2``
stays near its fine-resolution value ``16/3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

# each extra bit must cut the Gaussian error to at most this fraction
MARGIN = 0.9
# finer parts keep the range of this many bits (the error then falls ~4x per bit)
LOADING_BITS = 8


@dataclass(frozen=True)
class QuantizerConfig:
    bits: int
    expected_power: float
    clip_sigmas: float = 4.0

    def __post_init__(self):
        if self.bits < 0 or int(self.bits) != self.bits:
            raise ValueError("bits must be a nonnegative integer")
        if not self.clip_sigmas > 0:
            raise ValueError("clip_sigmas must be positive")
        object.__setattr__(self, "bits", int(self.bits))

    @property
    def bits_re(self) -> int:
        return (self.bits + 1) // 2

    @property
    def bits_im(self) -> int:
        return self.bits // 2


@dataclass(frozen=True)
class QuantizedValue:
    payload: int
    reconstruction: complex


def bits_for_budget(alpha: float, P: float) -> int:
    """Integer bit budget ``ceil(alpha * log2 P)`` (never negative)."""
    b = alpha * math.log2(P)
    return max(int(math.ceil(b - 1e-9)), 0)


def _sigma(expected_power):
    return np.sqrt(np.asarray(expected_power, dtype=float) / 2.0)


def _gaussian_mse(half: float, bits: int) -> float:
    """Mean-square error of the ``bits``-bit mid-rise quantizer on N(0, 1)."""
    levels = 1 << bits
    step = 2.0 * half / levels
    q = -half + (np.arange(levels) + 0.5) * step
    edges = -half + step * np.arange(levels + 1.0)
    edges[0], edges[-1] = -np.inf, np.inf
    pdf = np.exp(-0.5 * edges**2) / np.sqrt(2 * np.pi)
    xpdf = np.where(np.isfinite(edges), edges, 0.0) * pdf
    m0 = np.diff(special.ndtr(edges))
    m1 = pdf[:-1] - pdf[1:]
    m2 = m0 + xpdf[:-1] - xpdf[1:]
    return float(np.sum(m2 - 2 * q * m1 + q * q * m0))


@lru_cache(maxsize=None)
def part_loading(bits: int, clip_sigmas: float = 4.0) -> float:
    """Half-range, in sigmas, used by a ``bits``-bit part."""
    if bits == 0:
        return clip_sigmas
    if bits > LOADING_BITS:
        return part_loading(LOADING_BITS, clip_sigmas)
    cap = _gaussian_mse(part_loading(bits - 1, clip_sigmas), bits - 1)
    if _gaussian_mse(clip_sigmas, bits) <= MARGIN * cap:
        return clip_sigmas
    # below the MSE-optimal loading the error only grows, so search above it
    opt = optimize.minimize_scalar(_gaussian_mse, bounds=(1e-3, clip_sigmas), args=(bits,), method="bounded",
                                   options={"xatol": 1e-12}).x
    if _gaussian_mse(opt, bits) > MARGIN * cap:
        # a very small clip_sigmas cannot reach the margin; take the best range it allows
        return float(opt)
    return float(optimize.brentq(lambda h: _gaussian_mse(h, bits) - MARGIN * cap, opt, clip_sigmas, xtol=1e-12))


def _part_half(bits: int, sigma, clip_sigmas: float):
    return part_loading(bits, float(clip_sigmas)) * sigma


def _quantize_part(v, bits: int, half):
    levels = 1 << bits
    step = 2.0 * half / levels
    with np.errstate(divide="ignore", invalid="ignore"):
        idx = np.floor((v + half) / step)
    idx = np.where(np.isfinite(idx), idx, 0)
    code = np.clip(idx, 0, levels - 1).astype(np.int64)
    recon = -half + (code + 0.5) * step
    return code, recon


def quantize_array(x, bits: int, expected_power, clip_sigmas: float = 4.0):
    """Vectorized quantization.

    ``expected_power`` broadcasts against ``x`` so every term can carry its
    own anticipated power.  Returns ``(payload, reconstruction, clipped)``.
    """
    x = np.asarray(x, dtype=complex)
    sigma = _sigma(expected_power)
    if np.any(sigma <= 0):
        raise ValueError("expected_power must be positive")
    b_re, b_im = (bits + 1) // 2, bits // 2
    h_re, h_im = _part_half(b_re, sigma, clip_sigmas), _part_half(b_im, sigma, clip_sigmas)
    c_re, r_re = _quantize_part(x.real, b_re, h_re)
    c_im, r_im = _quantize_part(x.imag, b_im, h_im)
    payload = (c_re << b_im) | c_im
    # a 0-bit part has no range to leave
    clipped = (b_re > 0) & (np.abs(x.real) > h_re) | (b_im > 0) & (np.abs(x.imag) > h_im)
    return payload, r_re + 1j * r_im, clipped


def quantize(x: complex, cfg: QuantizerConfig) -> QuantizedValue:
    if not cfg.expected_power > 0:
        raise ValueError("expected_power must be positive")
    payload, recon, _ = quantize_array(x, cfg.bits, cfg.expected_power, cfg.clip_sigmas)
    return QuantizedValue(int(payload), complex(recon))


def dequantize(payload: int, cfg: QuantizerConfig) -> complex:
    sigma = float(_sigma(cfg.expected_power))
    c_re, c_im = payload >> cfg.bits_im, payload & ((1 << cfg.bits_im) - 1)
    parts = []
    for code, b in ((c_re, cfg.bits_re), (c_im, cfg.bits_im)):
        half = _part_half(b, sigma, cfg.clip_sigmas)
        parts.append(-half + (code + 0.5) * (2.0 * half / (1 << b)))
    return complex(*parts)


@dataclass(frozen=True)
class DistortionStats:
    mean_distortion: float
    clipped_fraction: float
    samples: int


def distortion_stats(x, cfg: QuantizerConfig) -> DistortionStats:
    x = np.asarray(x, dtype=complex)
    _, recon, clipped = quantize_array(x, cfg.bits, cfg.expected_power, cfg.clip_sigmas)
    return DistortionStats(float(np.mean(np.abs(x - recon) ** 2)), float(np.mean(clipped)), x.size)
