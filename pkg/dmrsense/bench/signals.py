"""Transmit signal sources for Monte Carlo trials"""

from abc import ABC, abstractmethod
from typing import Optional

from dmrsense.config.settings import DmrsConfig, OfdmParams
from dmrsense.exceptions import ConfigurationError
from dmrsense.sensing.crlb import CrlbInputs
from dmrsense.sensing.estimator import EstimatorOptions, SensingBounds, lattice_bounds
from dmrsense.waveform.refsig import ResourceGrid, build_data_grid, build_dmrs_grid

SIGNAL_KINDS = ("dmrs", "data")


class BaseSignal(ABC):
    """Base class for all transmit signals"""

    kind = ""

    def __init__(self, params: OfdmParams, cfg: DmrsConfig):
        self.params = params
        self.cfg = cfg

    @abstractmethod
    def build(self, grid_seed: int) -> ResourceGrid:
        """Build the transmit grid for one trial

        Args:
            grid_seed: Per-trial seed for random payloads

        Returns:
            ResourceGrid
        """
        pass

    @property
    def channel_cfg(self) -> Optional[DmrsConfig]:
        """DMRS configuration handed to the channel, None when not a DMRS grid"""
        return None

    def reference_grid(self) -> ResourceGrid:
        """A representative grid; every trial grid shares its lattice"""
        return self.build(0)

    def bounds(self, opts: Optional[EstimatorOptions] = None) -> SensingBounds:
        return lattice_bounds(self.params, self.reference_grid(), opts)

    def crlb_inputs(
        self,
        snr_db: float,
        attenuation: float = 1.0,
        bare_dims: str = "total",
        centered: bool = False
    ) -> CrlbInputs:
        return CrlbInputs.from_grid(
            self.reference_grid(),
            self.params,
            snr_db,
            attenuation=attenuation,
            bare_dims=bare_dims,
            centered=centered,
        )


class DmrsSignal(BaseSignal):
    """DMRS comb; the same grid in every trial"""

    kind = "dmrs"

    def __init__(self, params: OfdmParams, cfg: DmrsConfig):
        super().__init__(params, cfg)
        self._grid = build_dmrs_grid(params, cfg)

    def build(self, grid_seed: int) -> ResourceGrid:
        return self._grid

    @property
    def channel_cfg(self) -> Optional[DmrsConfig]:
        return self.cfg


class DataSignal(BaseSignal):
    """Random QPSK on every resource element, redrawn per trial"""

    kind = "data"

    def build(self, grid_seed: int) -> ResourceGrid:
        return build_data_grid(self.params, grid_seed)


def make_signal(kind: str, params: OfdmParams, cfg: DmrsConfig) -> BaseSignal:
    """Select a signal source by name"""
    if kind == "dmrs":
        return DmrsSignal(params, cfg)
    elif kind == "data":
        return DataSignal(params, cfg)
    raise ConfigurationError(f"signal must be one of {SIGNAL_KINDS}, got {kind!r}")
