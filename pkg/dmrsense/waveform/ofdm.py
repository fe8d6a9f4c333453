"""OFDM modulation and demodulation

Both transforms are unitary (norm="ortho"), so a grid and the useful part
of its sample stream carry the same energy.
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from dmrsense.config.settings import OfdmParams
from dmrsense.exceptions import ShapeError
from dmrsense.waveform.refsig import ResourceGrid

logger = logging.getLogger(__name__)

SAMPLE_DUMP_MAGIC = b"DMRS"
SAMPLE_DUMP_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True, eq=False)
class SampleStream:
    """Time-domain baseband samples of consecutive CP-OFDM symbols"""
    samples: np.ndarray
    sample_interval: float
    n_ifft: int
    n_cp: int
    m_symbols: int

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128, copy=True).ravel()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def symbol_length(self) -> int:
        """Samples per OFDM symbol including the cyclic prefix"""
        return self.n_ifft + self.n_cp

    @property
    def symbol_boundaries(self) -> np.ndarray:
        return np.arange(self.m_symbols) * self.symbol_length

    def __len__(self) -> int:
        return self.samples.size

    def with_samples(self, samples: np.ndarray) -> "SampleStream":
        return SampleStream(
            samples=samples,
            sample_interval=self.sample_interval,
            n_ifft=self.n_ifft,
            n_cp=self.n_cp,
            m_symbols=self.m_symbols,
        )

    def useful_samples(self) -> np.ndarray:
        """Samples with every cyclic prefix removed, one row per symbol"""
        return self.samples.reshape(self.m_symbols, self.symbol_length)[:, self.n_cp:]


def modulate(grid: ResourceGrid, params: OfdmParams) -> SampleStream:
    """IFFT each symbol column and prepend its cyclic prefix

    Args:
        grid: Resource grid of shape (n_subcarriers, m_symbols)
        params: OFDM numerology

    Returns:
        SampleStream of m_symbols * (n_ifft + n_cp) samples
    """
    if grid.shape != (params.n_subcarriers, params.m_symbols):
        raise ShapeError(
            f"grid {grid.shape} does not match params "
            f"({params.n_subcarriers}, {params.m_symbols})"
        )
    n_ifft, n_cp = params.n_ifft, params.n_cp
    if params.cp_discrepancy:
        logger.info(
            "CP quantised to %d samples (%.4g s off the configured %.4g s)",
            n_cp, params.cp_discrepancy, params.t_cp,
        )

    padded = np.zeros((n_ifft, params.m_symbols), dtype=np.complex128)
    padded[:params.n_subcarriers] = grid.cells
    time = np.fft.ifft(padded, axis=0, norm="ortho")
    with_cp = np.concatenate([time[n_ifft - n_cp:], time], axis=0)

    return SampleStream(
        samples=with_cp.T.ravel(),
        sample_interval=params.sample_interval,
        n_ifft=n_ifft,
        n_cp=n_cp,
        m_symbols=params.m_symbols,
    )


def demodulate(
    stream: SampleStream,
    params: OfdmParams,
    reference: Optional[ResourceGrid] = None
) -> ResourceGrid:
    """Strip cyclic prefixes, FFT each symbol and keep the first N bins

    Args:
        stream: Received samples
        params: OFDM numerology the stream was produced with
        reference: Transmit grid whose occupancy and lattice are copied

    Returns:
        ResourceGrid of received symbols; fully occupied without a reference
    """
    expected = params.m_symbols * (params.n_ifft + params.n_cp)
    if len(stream) != expected:
        raise ShapeError(f"stream has {len(stream)} samples, expected {expected}")

    blocks = stream.samples.reshape(params.m_symbols, params.n_ifft + params.n_cp)[:, params.n_cp:]
    cells = np.fft.fft(blocks, axis=1, norm="ortho")[:, :params.n_subcarriers].T

    if reference is not None:
        if reference.shape != cells.shape:
            raise ShapeError(f"reference grid {reference.shape} does not match {cells.shape}")
        return reference.with_cells(cells, kind="rx")

    n, m = cells.shape
    return ResourceGrid(
        cells=cells,
        occupancy=np.ones((n, m), dtype=bool),
        subcarriers=np.arange(n),
        symbols=np.arange(m),
        kind="rx",
    )


def write_samples(stream: SampleStream, path: Union[str, Path]) -> Path:
    """Raw dump: 16-byte header then interleaved float64 re/im, little endian"""
    path = Path(path)
    header = SAMPLE_DUMP_HEADER.pack(SAMPLE_DUMP_MAGIC, stream.n_ifft, stream.n_cp, stream.m_symbols)
    payload = stream.samples.astype("<c16").view("<f8").tobytes()
    path.write_bytes(header + payload)
    return path


def read_samples(path: Union[str, Path], params: OfdmParams) -> SampleStream:
    """Load a dump written by write_samples and check it against params"""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < SAMPLE_DUMP_HEADER.size:
        raise ShapeError(f"{path}: too short for a sample dump header")
    magic, n_ifft, n_cp, m_symbols = SAMPLE_DUMP_HEADER.unpack_from(data)
    if magic != SAMPLE_DUMP_MAGIC:
        raise ShapeError(f"{path}: bad magic {magic!r}")
    if (n_ifft, n_cp, m_symbols) != (params.n_ifft, params.n_cp, params.m_symbols):
        raise ShapeError(
            f"{path}: dump has n_ifft={n_ifft}, n_cp={n_cp}, m_symbols={m_symbols}; "
            f"params give {params.n_ifft}, {params.n_cp}, {params.m_symbols}"
        )
    values = np.frombuffer(data, dtype="<f8", offset=SAMPLE_DUMP_HEADER.size)
    if values.size != 2 * m_symbols * (n_ifft + n_cp):
        raise ShapeError(f"{path}: payload holds {values.size // 2} samples, header implies more or fewer")
    return SampleStream(
        samples=values.view("<c16"),
        sample_interval=params.sample_interval,
        n_ifft=n_ifft,
        n_cp=n_cp,
        m_symbols=m_symbols,
    )
