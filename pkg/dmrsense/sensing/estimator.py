"""2D-FFT range/velocity estimation"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from dmrsense.config.settings import DmrsConfig, OfdmParams
from dmrsense.exceptions import ConfigurationError, NoPeakError, ShapeError
from dmrsense.waveform.refsig import ResourceGrid

logger = logging.getLogger(__name__)

DOPPLER_PATHS = ("full", "uniform")
COMBINING_MODES = ("incoherent", "single")
QUOTIENT_METHODS = ("divide", "conjugate")
ZERO_PADDING_FACTORS = (1, 2, 4, 8)


@dataclass(frozen=True)
class EstimatorOptions:
    """Estimator switches

    doppler_path "full" places the DMRS columns at their true symbol index
    in a zero-filled row of m_symbols entries; "uniform" treats them as
    equally spaced by comb_symbol. combining "single" uses only the first
    DMRS column for range and the first DMRS row for Doppler.
    """
    doppler_path: str = "full"
    combining: str = "incoherent"
    zero_padding: int = 1
    range_fft_size: Optional[int] = None
    doppler_fft_size: Optional[int] = None
    signed_velocity: bool = False
    interpolate: bool = False
    quotient: str = "divide"

    def __post_init__(self):
        if self.doppler_path not in DOPPLER_PATHS:
            raise ConfigurationError(f"doppler_path must be one of {DOPPLER_PATHS}, got {self.doppler_path!r}")
        if self.combining not in COMBINING_MODES:
            raise ConfigurationError(f"combining must be one of {COMBINING_MODES}, got {self.combining!r}")
        if self.quotient not in QUOTIENT_METHODS:
            raise ConfigurationError(f"quotient must be one of {QUOTIENT_METHODS}, got {self.quotient!r}")
        if self.zero_padding not in ZERO_PADDING_FACTORS:
            raise ConfigurationError(
                f"zero_padding must be one of {ZERO_PADDING_FACTORS}, got {self.zero_padding}"
            )
        for name in ("range_fft_size", "doppler_fft_size"):
            size = getattr(self, name)
            if size is not None and size <= 0:
                raise ConfigurationError(f"{name} must be positive, got {size}")


@dataclass(frozen=True, eq=False)
class QuotientGrid:
    """rx/tx on the occupied lattice, n_j rows by m_j columns"""
    cells: np.ndarray
    subcarriers: np.ndarray
    symbols: np.ndarray
    carrier_stride: int
    symbol_stride: int
    m_symbols: int
    method: str = "divide"
    cfg: Optional[DmrsConfig] = None

    @property
    def n_j(self) -> int:
        return self.cells.shape[0]

    @property
    def m_j(self) -> int:
        return self.cells.shape[1]

    def full_time_rows(self) -> np.ndarray:
        """Rows zero-filled to m_symbols with each column at its true symbol index"""
        rows = np.zeros((self.n_j, self.m_symbols), dtype=np.complex128)
        rows[:, self.symbols] = self.cells
        return rows


@dataclass(frozen=True)
class SensingBounds:
    """Unambiguous window and bin width for one FFT layout"""
    r_max: float
    v_max: float
    delta_r: float
    delta_v: float
    n_fft: int
    m_fft: int
    range_spacing: float  # K_c * delta_f, Hz
    doppler_spacing: float  # K_t * T_s, seconds


@dataclass(frozen=True, eq=False)
class SensingEstimate:
    """Peak indices, physical estimates and the profiles they came from"""
    range_index: int
    velocity_index: int
    range_m: float
    velocity_mps: float
    peak_magnitude: float
    range_profile: np.ndarray
    doppler_profile: np.ndarray
    bounds: SensingBounds


def extract_quotient(
    rx: ResourceGrid,
    tx: ResourceGrid,
    cfg: Optional[DmrsConfig] = None,
    method: str = "divide"
) -> QuotientGrid:
    """Remove the known transmit symbols from the received ones

    Args:
        rx: Received grid
        tx: Transmitted grid
        cfg: DMRS configuration, kept for provenance and checked against tx
        method: "divide" for rx / tx, "conjugate" for rx * conj(tx)

    Returns:
        QuotientGrid on the transmit lattice
    """
    if method not in QUOTIENT_METHODS:
        raise ConfigurationError(f"quotient method must be one of {QUOTIENT_METHODS}, got {method!r}")
    if rx.shape != tx.shape:
        raise ShapeError(f"rx {rx.shape} and tx {tx.shape} differ in shape")
    if not np.array_equal(rx.occupancy, tx.occupancy):
        raise ShapeError("rx and tx occupancy differ")
    if not tx.is_lattice:
        raise ShapeError("tx occupancy is not a subcarrier x symbol lattice")
    if cfg is not None and tx.kind == "dmrs" and cfg.comb_carrier != tx.carrier_stride:
        raise ShapeError(f"tx carrier stride {tx.carrier_stride} does not match comb_carrier {cfg.comb_carrier}")

    tx_cells = tx.lattice_cells()
    rx_cells = rx.lattice_cells()
    if method == "divide":
        if np.any(tx_cells == 0):
            raise ShapeError("tx has zero-valued occupied cells")
        cells = rx_cells / tx_cells
    else:
        cells = rx_cells * np.conj(tx_cells)

    return QuotientGrid(
        cells=cells,
        subcarriers=tx.subcarriers,
        symbols=tx.symbols,
        carrier_stride=tx.carrier_stride,
        symbol_stride=tx.symbol_stride,
        m_symbols=tx.m_symbols,
        method=method,
        cfg=cfg,
    )


def _layout(
    params: OfdmParams,
    n_j: int,
    m_j: int,
    carrier_stride: int,
    symbol_stride: int,
    opts: EstimatorOptions
) -> SensingBounds:
    """FFT sizes, bin widths and unambiguous window for a lattice"""
    c = params.speed_of_light
    pad = opts.zero_padding

    n_fft = opts.range_fft_size or n_j * pad
    if opts.doppler_path == "full":
        m_fft = opts.doppler_fft_size or params.m_symbols * pad
        time_stride = 1
    else:
        m_fft = opts.doppler_fft_size or m_j * pad
        time_stride = symbol_stride
    if n_fft <= 0 or m_fft <= 0:
        raise ConfigurationError(f"empty DMRS lattice ({n_j} subcarriers x {m_j} symbols)")

    range_spacing = carrier_stride * params.delta_f
    doppler_spacing = time_stride * params.t_total
    delta_r = c / (2.0 * n_fft * range_spacing)
    delta_v = c / (2.0 * m_fft * doppler_spacing * params.f_c)
    return SensingBounds(
        r_max=n_fft * delta_r,
        v_max=m_fft * delta_v,
        delta_r=delta_r,
        delta_v=delta_v,
        n_fft=n_fft,
        m_fft=m_fft,
        range_spacing=range_spacing,
        doppler_spacing=doppler_spacing,
    )


def bounds(
    params: OfdmParams,
    cfg: DmrsConfig,
    opts: Optional[EstimatorOptions] = None
) -> SensingBounds:
    """Maximum range/velocity and resolution of a DMRS configuration

    r_max = c / (2 K_c delta_f), delta_r = r_max / n_fft, and likewise for
    velocity with the time stride of the chosen Doppler path.
    """
    return _layout(
        params,
        cfg.n_dmrs_subcarriers(params.n_subcarriers),
        cfg.n_dmrs_symbols,
        cfg.comb_carrier,
        cfg.comb_symbol,
        opts or EstimatorOptions(),
    )


def lattice_bounds(params: OfdmParams, lattice, opts: Optional[EstimatorOptions] = None) -> SensingBounds:
    """Bounds for a ResourceGrid or QuotientGrid lattice"""
    return _layout(
        params,
        lattice.n_j,
        lattice.m_j,
        lattice.carrier_stride,
        lattice.symbol_stride,
        opts or EstimatorOptions(),
    )


def parabolic_offset(profile: np.ndarray, index: int) -> float:
    """Sub-bin peak offset from a parabola through the peak and its circular neighbours"""
    if profile.size < 3:
        return 0.0
    left = profile[(index - 1) % profile.size]
    centre = profile[index]
    right = profile[(index + 1) % profile.size]
    denominator = left - 2.0 * centre + right
    if denominator == 0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denominator, -0.5, 0.5))


def range_profile(q: QuotientGrid, n_fft: int, combining: str = "incoherent") -> np.ndarray:
    """IFFT down each column, magnitudes summed across columns"""
    columns = q.cells[:, :1] if combining == "single" else q.cells
    return np.abs(np.fft.ifft(columns, n=n_fft, axis=0)).sum(axis=1)


def doppler_profile(q: QuotientGrid, m_fft: int, opts: EstimatorOptions) -> np.ndarray:
    """FFT along each row, magnitudes summed across rows"""
    rows = q.full_time_rows() if opts.doppler_path == "full" else q.cells
    if opts.combining == "single":
        rows = rows[:1]
    return np.abs(np.fft.fft(rows, n=m_fft, axis=1)).sum(axis=0)


def _peak(profile: np.ndarray, interpolate: bool) -> Tuple[int, float]:
    index = int(np.argmax(profile))
    offset = parabolic_offset(profile, index) if interpolate else 0.0
    return index, offset


def estimate(
    q: QuotientGrid,
    params: OfdmParams,
    cfg: Optional[DmrsConfig] = None,
    opts: Optional[EstimatorOptions] = None
) -> SensingEstimate:
    """Locate the range and Doppler peaks of a quotient grid

    Args:
        q: Quotient grid from extract_quotient
        params: OFDM numerology
        cfg: DMRS configuration; the lattice carried by q takes precedence
        opts: Estimator switches

    Returns:
        SensingEstimate with integer indices and physical estimates
    """
    opts = opts or EstimatorOptions()
    if q.cells.size == 0:
        raise NoPeakError("quotient grid is empty")
    if not np.any(q.cells):
        raise NoPeakError("quotient grid is all zero")

    layout = lattice_bounds(params, q, opts)
    if layout.n_fft < q.n_j:
        raise ConfigurationError(f"range_fft_size {layout.n_fft} is smaller than the {q.n_j} DMRS subcarriers")
    full_length = q.m_symbols if opts.doppler_path == "full" else q.m_j
    if layout.m_fft < full_length:
        raise ConfigurationError(f"doppler_fft_size {layout.m_fft} is smaller than the {full_length} Doppler samples")

    r_profile = range_profile(q, layout.n_fft, opts.combining)
    d_profile = doppler_profile(q, layout.m_fft, opts)

    range_index, range_offset = _peak(r_profile, opts.interpolate)
    velocity_index, velocity_offset = _peak(d_profile, opts.interpolate)

    velocity_bin = velocity_index + velocity_offset
    if opts.signed_velocity and velocity_index > layout.m_fft // 2:
        velocity_bin -= layout.m_fft

    logger.debug("peaks: range bin %d, Doppler bin %d", range_index, velocity_index)
    return SensingEstimate(
        range_index=range_index,
        velocity_index=velocity_index,
        range_m=(range_index + range_offset) * layout.delta_r,
        velocity_mps=velocity_bin * layout.delta_v,
        peak_magnitude=float(r_profile[range_index]),
        range_profile=r_profile,
        doppler_profile=d_profile,
        bounds=layout,
    )
