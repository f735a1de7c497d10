import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcsit.analysis import fit_exponent
from dcsit.quantization import (
    QuantizerConfig,
    bits_for_budget,
    dequantize,
    distortion_stats,
    quantize,
    part_loading,
    quantize_array,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def gaussian(seed, n, power):
    rng = np.random.default_rng(seed)
    return np.sqrt(power / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        QuantizerConfig(-1, 1.0)
    with pytest.raises(ValueError):
        QuantizerConfig(2.5, 1.0)
    with pytest.raises(ValueError):
        QuantizerConfig(4, 1.0, clip_sigmas=0.0)
    with pytest.raises(ValueError):
        quantize(1.0, QuantizerConfig(4, 0.0))


def test_odd_budget_gives_extra_bit_to_real_part():
    cfg = QuantizerConfig(5, 1.0)
    assert (cfg.bits_re, cfg.bits_im) == (3, 2)
    assert (QuantizerConfig(4, 1.0).bits_re, QuantizerConfig(4, 1.0).bits_im) == (2, 2)


@pytest.mark.parametrize("bits", [2, 3, 4, 8, 13])
def test_zero_input_within_half_step(bits):
    cfg = QuantizerConfig(bits, 2.0)
    q = quantize(0.0, cfg)
    half = cfg.clip_sigmas * np.sqrt(cfg.expected_power / 2)
    assert abs(q.reconstruction.real) <= half / (1 << cfg.bits_re) + 1e-15
    assert abs(q.reconstruction.imag) <= half / (1 << cfg.bits_im) + 1e-15


@given(finite, finite)
def test_zero_bits_reconstruct_zero(re, im):
    x = complex(re, im)
    cfg = QuantizerConfig(0, 3.0)
    q = quantize(x, cfg)
    assert q.payload == 0 and q.reconstruction == 0
    assert distortion_stats([x], cfg).mean_distortion == pytest.approx(abs(x) ** 2)


@given(finite, finite, st.integers(0, 24), st.floats(1e-3, 1e3))
def test_payload_decodes_to_reconstruction(re, im, bits, power):
    cfg = QuantizerConfig(bits, power)
    q = quantize(complex(re, im), cfg)
    assert 0 <= q.payload < 1 << bits
    assert dequantize(q.payload, cfg) == pytest.approx(q.reconstruction, rel=1e-12, abs=1e-12)


@given(finite, finite, st.integers(1, 16))
def test_quantize_is_deterministic(re, im, bits):
    cfg = QuantizerConfig(bits, 1.0)
    assert quantize(complex(re, im), cfg) == quantize(complex(re, im), cfg)


@pytest.mark.parametrize("bits", [2, 6, 10, 30])
def test_in_range_error_within_half_step(bits):
    cfg = QuantizerConfig(bits, 1.0)
    x = gaussian(0, 5000, 1.0)
    _, recon, clipped = quantize_array(x, cfg.bits, cfg.expected_power)
    sigma = np.sqrt(0.5)
    for v, r, b, c in ((x.real, recon.real, cfg.bits_re, np.abs(x.real)), (x.imag, recon.imag, cfg.bits_im, np.abs(x.imag))):
        half = part_loading(b, cfg.clip_sigmas) * sigma
        inside = c <= half
        assert np.all(np.abs(v - r)[inside] <= half / (1 << b) + 1e-12)


def test_loading_shrinks_only_where_full_range_loses():
    # 1 bit at +-2 sigma is worse than 0 bits; the full range is kept from 2 bits
    from dcsit.quantization import MARGIN, _gaussian_mse

    assert _gaussian_mse(4.0, 1) > 1.0
    assert _gaussian_mse(part_loading(1), 1) == pytest.approx(MARGIN, rel=1e-9)
    assert [part_loading(b) for b in (0, 2, 3, 8, 20)] == [4.0] * 5
    assert part_loading(3, 1.0) == 1.0


@given(st.integers(1, 8), st.floats(0.3, 8.0))
def test_part_mse_nonincreasing(bits, clip):
    from dcsit.quantization import _gaussian_mse

    prev = _gaussian_mse(part_loading(bits - 1, clip), bits - 1)
    assert _gaussian_mse(part_loading(bits, clip), bits) <= prev


def test_fine_cells_reconstruct_at_midpoints():
    cfg = QuantizerConfig(30, 1.0)
    half = cfg.clip_sigmas * np.sqrt(0.5)
    step = 2 * half / (1 << 15)
    assert dequantize(0, cfg) == pytest.approx(complex(-half + step / 2, -half + step / 2), rel=1e-12)


def test_out_of_range_input_saturates_and_is_counted():
    cfg = QuantizerConfig(4, 1.0)
    stats = distortion_stats([100.0 + 0j, 0.1 + 0j], cfg)
    assert stats.clipped_fraction == 0.5
    assert quantize(100.0, cfg).reconstruction.real < cfg.clip_sigmas * np.sqrt(0.5)


def test_distortion_monotone_in_bits():
    x = gaussian(1, 20_000, 1.0)
    d = [distortion_stats(x, QuantizerConfig(b, 1.0)).mean_distortion for b in range(0, 21)]
    assert all(b <= a for a, b in zip(d, d[1:]))


def test_per_term_power_broadcasts():
    x = np.array([0.3 + 0.1j, 30.0 - 10.0j])
    _, a, _ = quantize_array(x, 8, np.array([1.0, 1e4]))
    _, b0, _ = quantize_array(x[:1], 8, 1.0)
    _, b1, _ = quantize_array(x[1:], 8, 1e4)
    assert a[0] == b0[0] and a[1] == b1[0]


def test_bits_for_budget():
    assert bits_for_budget(0.2, 1e6) == 4
    assert bits_for_budget(0.25, 2.0**8) == 2
    assert bits_for_budget(0.0, 1e6) == 0
    assert bits_for_budget(0.5, 0.5) == 0


def test_noise_floor_distortion_exponent():
    grid = [10.0**e for e in range(2, 9)]
    samples = []
    for P in grid:
        power = P**0.2
        x = gaussian(2, 20_000, power)
        samples.append((P, distortion_stats(x, QuantizerConfig(bits_for_budget(0.2, P), power)).mean_distortion))
    assert fit_exponent(samples).slope <= 0.1
