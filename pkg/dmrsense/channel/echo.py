"""Single point-target echo channel"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dmrsense.config.settings import DmrsConfig, OfdmParams, TargetScenario
from dmrsense.exceptions import ConfigurationError, OutOfWindowError, ShapeError
from dmrsense.waveform.ofdm import SampleStream
from dmrsense.waveform.refsig import ResourceGrid

logger = logging.getLogger(__name__)

DOPPLER_TIMINGS = ("actual", "uniform")


@dataclass(frozen=True)
class ChannelOptions:
    """Channel switches

    doppler_timing "actual" puts symbol m at m * T_s. "uniform" puts the
    j-th occupied symbol at j * comb_symbol * T_s, i.e. as if the DMRS
    symbols were equally spaced.
    """
    noise: bool = True
    noise_on_empty: bool = False
    doppler_timing: str = "actual"

    def __post_init__(self):
        if self.doppler_timing not in DOPPLER_TIMINGS:
            raise ConfigurationError(
                f"doppler_timing must be one of {DOPPLER_TIMINGS}, got {self.doppler_timing!r}"
            )


def complex_awgn(shape, variance: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian noise with total variance `variance`"""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _noise_variance(tgt: TargetScenario, options: ChannelOptions) -> Optional[float]:
    if not options.noise or tgt.noiseless:
        return None
    return tgt.noise_variance


def symbol_times(
    grid: ResourceGrid,
    params: OfdmParams,
    cfg: Optional[DmrsConfig] = None,
    timing: str = "actual"
) -> np.ndarray:
    """Start time assigned to each grid column for the Doppler ramp"""
    times = np.arange(grid.m_symbols) * params.t_total
    if timing == "uniform":
        stride = cfg.comb_symbol if cfg is not None else grid.symbol_stride
        times[grid.symbols] = np.arange(grid.m_j) * stride * params.t_total
    return times


def apply_symbol_domain(
    grid: ResourceGrid,
    params: OfdmParams,
    cfg: Optional[DmrsConfig],
    tgt: TargetScenario,
    noise_seed: Optional[int] = None,
    options: Optional[ChannelOptions] = None
) -> ResourceGrid:
    """Apply attenuation, delay and Doppler phase ramps and AWGN per resource element

    Args:
        grid: Transmitted grid
        params: OFDM numerology
        cfg: DMRS configuration of the grid, None for data grids
        tgt: Point target
        noise_seed: Seed for the noise generator
        options: Channel switches

    Returns:
        Received grid with the transmit lattice
    """
    options = options or ChannelOptions()
    if grid.shape != (params.n_subcarriers, params.m_symbols):
        raise ShapeError(
            f"grid {grid.shape} does not match params ({params.n_subcarriers}, {params.m_symbols})"
        )
    c = params.speed_of_light
    tau = tgt.delay(c)
    f_d = tgt.doppler(params.f_c, c)

    k = np.arange(grid.n_subcarriers)
    t = symbol_times(grid, params, cfg, options.doppler_timing)
    delay_ramp = np.exp(-2j * np.pi * k * params.delta_f * tau)
    doppler_ramp = np.exp(2j * np.pi * f_d * t)
    rx = tgt.attenuation * grid.cells * np.outer(delay_ramp, doppler_ramp)

    variance = _noise_variance(tgt, options)
    if variance is not None:
        rng = np.random.default_rng(noise_seed)
        noise = complex_awgn(rx.shape, variance, rng)
        if not options.noise_on_empty:
            noise = noise * grid.occupancy
        rx = rx + noise

    return grid.with_cells(rx, kind="rx")


def apply_time_domain_oracle(
    stream: SampleStream,
    params: OfdmParams,
    tgt: TargetScenario,
    noise_seed: Optional[int] = None,
    options: Optional[ChannelOptions] = None
) -> SampleStream:
    """Integer-sample delay, continuous Doppler rotation and AWGN on raw samples

    The delay is rounded to whole samples; the received stream keeps the
    transmit length with a zero-filled head.
    """
    options = options or ChannelOptions()
    c = params.speed_of_light
    ts = stream.sample_interval
    exact = tgt.delay(c) / ts
    delay = int(round(exact))
    if abs(delay - exact) > 1e-9:
        logger.info("delay rounded from %.4f to %d samples", exact, delay)
    if delay >= len(stream):
        raise OutOfWindowError(f"delay of {delay} samples exceeds stream length {len(stream)}")
    if delay > stream.n_cp:
        logger.debug("delay of %d samples exceeds the %d-sample CP", delay, stream.n_cp)

    delayed = np.zeros(len(stream), dtype=np.complex128)
    delayed[delay:] = stream.samples[:len(stream) - delay]
    n = np.arange(len(stream))
    rx = tgt.attenuation * delayed * np.exp(2j * np.pi * tgt.doppler(params.f_c, c) * n * ts)

    variance = _noise_variance(tgt, options)
    if variance is not None:
        rx = rx + complex_awgn(rx.shape, variance, np.random.default_rng(noise_seed))
    return stream.with_samples(rx)
