"""DMRS sequence generation and resource-grid mapping

The DMRS bits come from the NR length-31 Gold construction:

    x1(n + 31) = (x1(n + 3) + x1(n)) mod 2,                 x1 = [1, 0, ..., 0]
    x2(n + 31) = (x2(n + 3) + x2(n + 2) + x2(n + 1) + x2(n)) mod 2
    c(n) = (x1(n + Nc) + x2(n + Nc)) mod 2,                  Nc = 1600

with x2 initialised from the bits of the seed, least significant first.
Each DMRS-bearing symbol m draws its own sequence from seed + m.
"""

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from dmrsense.config.settings import DmrsConfig, OfdmParams
from dmrsense.exceptions import ConfigurationError, EmptyRequestError, ShapeError

logger = logging.getLogger(__name__)

GOLD_REGISTER_LENGTH = 31
GOLD_WARMUP = 1600
X1_TAPS = (0, 3)
X2_TAPS = (0, 1, 2, 3)

GRID_CSV_HEADER = ["k", "m", "re", "im", "occupied"]


def _run_register(initial: np.ndarray, taps: Sequence[int], total: int) -> np.ndarray:
    """Run a length-31 binary recurrence out to `total` bits

    The largest tap is 3, so 28 new bits depend only on bits that already
    exist and can be produced in one vectorised step.
    """
    x = np.zeros(total, dtype=np.uint8)
    x[:GOLD_REGISTER_LENGTH] = initial
    block = GOLD_REGISTER_LENGTH - max(taps)
    for start in range(0, total - GOLD_REGISTER_LENGTH, block):
        stop = min(start + block, total - GOLD_REGISTER_LENGTH)
        acc = np.zeros(stop - start, dtype=np.uint8)
        for tap in taps:
            acc ^= x[start + tap:stop + tap]
        x[start + GOLD_REGISTER_LENGTH:stop + GOLD_REGISTER_LENGTH] = acc
    return x


def gold_sequence(seed: int, length: int) -> np.ndarray:
    """Generate pseudo-random bits from the NR Gold sequence

    Args:
        seed: Second-register initialisation value, 0 <= seed < 2**31
        length: Number of output bits

    Returns:
        uint8 array of 0/1 bits
    """
    if length <= 0:
        raise EmptyRequestError(f"gold_sequence length must be positive, got {length}")
    seed = int(seed)
    if not 0 <= seed < 2 ** GOLD_REGISTER_LENGTH:
        raise ConfigurationError(f"Gold seed must be in [0, 2**31), got {seed}")

    total = GOLD_WARMUP + length + GOLD_REGISTER_LENGTH
    x1_init = np.zeros(GOLD_REGISTER_LENGTH, dtype=np.uint8)
    x1_init[0] = 1
    x2_init = np.array([(seed >> i) & 1 for i in range(GOLD_REGISTER_LENGTH)], dtype=np.uint8)

    x1 = _run_register(x1_init, X1_TAPS, total)
    x2 = _run_register(x2_init, X2_TAPS, total)
    return x1[GOLD_WARMUP:GOLD_WARMUP + length] ^ x2[GOLD_WARMUP:GOLD_WARMUP + length]


def qpsk_map(bits: Sequence[int]) -> np.ndarray:
    """Map bit pairs to unit-energy QPSK symbols

    Args:
        bits: Even-length bit sequence

    Returns:
        Complex symbols (1/sqrt(2)) * ((1 - 2 b0) + j (1 - 2 b1))
    """
    bits = np.asarray(bits, dtype=np.int8)
    if bits.ndim != 1 or bits.size % 2:
        raise ShapeError(f"qpsk_map needs an even number of bits, got {bits.size}")
    pairs = 1 - 2 * bits.reshape(-1, 2).astype(np.float64)
    return (pairs[:, 0] + 1j * pairs[:, 1]) / np.sqrt(2.0)


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ResourceGrid:
    """N x M frequency-by-time grid of modulation symbols

    `subcarriers` and `symbols` list the rows and columns of the occupied
    lattice; `carrier_stride` and `symbol_stride` are the nominal spacings
    used to convert FFT bins into physical units.
    """
    cells: np.ndarray
    occupancy: np.ndarray
    subcarriers: np.ndarray
    symbols: np.ndarray
    carrier_stride: int = 1
    symbol_stride: int = 1
    kind: str = "dmrs"

    def __post_init__(self):
        cells = _frozen(self.cells, np.complex128)
        occupancy = _frozen(self.occupancy, bool)
        if cells.ndim != 2 or cells.shape != occupancy.shape:
            raise ShapeError(
                f"cells {cells.shape} and occupancy {occupancy.shape} must be matching 2-D arrays"
            )
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "occupancy", occupancy)
        object.__setattr__(self, "subcarriers", _frozen(self.subcarriers, np.int64))
        object.__setattr__(self, "symbols", _frozen(self.symbols, np.int64))

    @property
    def shape(self):
        return self.cells.shape

    @property
    def n_subcarriers(self) -> int:
        return self.cells.shape[0]

    @property
    def m_symbols(self) -> int:
        return self.cells.shape[1]

    @property
    def n_j(self) -> int:
        """Occupied subcarrier count"""
        return int(self.subcarriers.size)

    @property
    def m_j(self) -> int:
        """Occupied symbol count"""
        return int(self.symbols.size)

    @property
    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    @property
    def is_lattice(self) -> bool:
        """True when occupancy is exactly subcarriers x symbols"""
        expected = np.zeros_like(self.occupancy)
        expected[np.ix_(self.subcarriers, self.symbols)] = True
        return bool(np.array_equal(expected, self.occupancy))

    def occupancy_density(self, symbol: Optional[int] = None) -> float:
        """Fraction of occupied cells, over the grid or on one symbol"""
        if symbol is None:
            return float(np.mean(self.occupancy))
        return float(np.mean(self.occupancy[:, symbol]))

    def lattice_cells(self) -> np.ndarray:
        """Occupied cells as an n_j x m_j matrix"""
        return self.cells[np.ix_(self.subcarriers, self.symbols)]

    def with_cells(self, cells: np.ndarray, kind: Optional[str] = None) -> "ResourceGrid":
        """Same lattice, new cell values"""
        cells = np.asarray(cells)
        if cells.shape != self.shape:
            raise ShapeError(f"replacement cells {cells.shape} do not match grid {self.shape}")
        return replace(self, cells=cells, kind=kind or self.kind)


def build_dmrs_grid(params: OfdmParams, cfg: DmrsConfig) -> ResourceGrid:
    """Place QPSK-modulated Gold sequences on the DMRS comb

    Args:
        params: Grid dimensions
        cfg: Comb, symbol positions and seed

    Returns:
        ResourceGrid with DMRS on (k, m), k = offset (mod comb_carrier), m in symbol_positions
    """
    cfg.validate_for(params)
    n, m = params.n_subcarriers, params.m_symbols
    subcarriers = np.arange(cfg.carrier_offset, n, cfg.comb_carrier)
    symbols = np.asarray(cfg.symbol_positions, dtype=np.int64)

    cells = np.zeros((n, m), dtype=np.complex128)
    occupancy = np.zeros((n, m), dtype=bool)
    for symbol in symbols:
        bits = gold_sequence(cfg.seed + int(symbol), 2 * subcarriers.size)
        cells[subcarriers, symbol] = qpsk_map(bits)
        occupancy[subcarriers, symbol] = True

    logger.debug("DMRS grid %dx%d: N_J=%d, M_J=%d", n, m, subcarriers.size, symbols.size)
    return ResourceGrid(
        cells=cells,
        occupancy=occupancy,
        subcarriers=subcarriers,
        symbols=symbols,
        carrier_stride=cfg.comb_carrier,
        symbol_stride=cfg.comb_symbol,
        kind="dmrs",
    )


def build_data_grid(params: OfdmParams, seed: Optional[int] = None) -> ResourceGrid:
    """Random QPSK on every resource element"""
    n, m = params.n_subcarriers, params.m_symbols
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=2 * n * m, dtype=np.uint8)
    cells = qpsk_map(bits).reshape(n, m)
    return ResourceGrid(
        cells=cells,
        occupancy=np.ones((n, m), dtype=bool),
        subcarriers=np.arange(n),
        symbols=np.arange(m),
        carrier_stride=1,
        symbol_stride=1,
        kind="data",
    )


def write_grid_csv(grid: ResourceGrid, path: Union[str, Path]) -> Path:
    """Dump every cell as k,m,re,im,occupied, rows ordered by (m, k)"""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(GRID_CSV_HEADER)
        for m in range(grid.m_symbols):
            column = grid.cells[:, m]
            occupied = grid.occupancy[:, m]
            for k in range(grid.n_subcarriers):
                writer.writerow([k, m, repr(float(column[k].real)), repr(float(column[k].imag)), int(occupied[k])])
    return path


def _stride(indices: np.ndarray) -> int:
    if indices.size < 2:
        return 1
    return int(np.min(np.diff(indices)))


def read_grid_csv(path: Union[str, Path], kind: str = "dmrs") -> ResourceGrid:
    """Load a grid written by write_grid_csv; the lattice is inferred from occupancy"""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != GRID_CSV_HEADER:
            raise ShapeError(f"{path}: expected header {','.join(GRID_CSV_HEADER)}, got {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise ShapeError(f"{path}: grid file has no cells")

    k = np.array([int(r["k"]) for r in rows])
    m = np.array([int(r["m"]) for r in rows])
    cells = np.zeros((k.max() + 1, m.max() + 1), dtype=np.complex128)
    occupancy = np.zeros(cells.shape, dtype=bool)
    cells[k, m] = [float(r["re"]) + 1j * float(r["im"]) for r in rows]
    occupancy[k, m] = [r["occupied"] == "1" for r in rows]

    subcarriers = np.flatnonzero(occupancy.any(axis=1))
    symbols = np.flatnonzero(occupancy.any(axis=0))
    return ResourceGrid(
        cells=cells,
        occupancy=occupancy,
        subcarriers=subcarriers,
        symbols=symbols,
        carrier_stride=_stride(subcarriers),
        symbol_stride=_stride(symbols),
        kind=kind,
    )
