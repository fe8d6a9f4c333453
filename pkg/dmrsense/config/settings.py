"""Configuration settings for dmrsense"""

import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from scipy.constants import speed_of_light as SPEED_OF_LIGHT

from dmrsense.exceptions import ConfigurationError

# Rounded propagation speed; the reference figures (48.83 m, 5.0048 m/s)
# are all computed with it. speed_of_light = physical selects SPEED_OF_LIGHT.
NOMINAL_SPEED_OF_LIGHT = 3.0e8

# NR FR2 numerology, 120 kHz subcarrier spacing at 24 GHz
DEFAULT_DELTA_F = 120e3
DEFAULT_T_TOTAL = 8.92e-6
DEFAULT_F_C = 24e9

# NR normal cyclic prefix: 144 of 2048 samples
NR_CP_FRACTION = 144 / 2048

ALLOWED_CARRIER_COMBS = (2, 4)
ALLOWED_SYMBOL_COMBS = (3, 4, 6, 12)

SLOT_LENGTH = 14
# Extra DMRS symbols per 14-symbol slot, mapping type A, single-symbol DMRS,
# keyed by the number of additional positions
ADDITIONAL_DMRS_SYMBOLS = {
    0: (),
    1: (11,),
    2: (7, 11),
    3: (5, 8, 11),
}


def next_power_of_two(n: int) -> int:
    """Smallest power of two that is >= n"""
    return 1 << max(0, int(n) - 1).bit_length()


@dataclass(frozen=True)
class OfdmParams:
    """OFDM numerology and resource-grid dimensions

    The cyclic prefix duration is the stored quantity; the useful symbol
    duration, total symbol duration, sampling interval and CP sample count
    are derived from it and from the IFFT length.
    """
    delta_f: float = DEFAULT_DELTA_F
    n_subcarriers: int = 256
    m_symbols: int = 140
    t_cp: float = DEFAULT_T_TOTAL - 1 / DEFAULT_DELTA_F
    f_c: float = DEFAULT_F_C
    n_ifft: Optional[int] = None
    speed_of_light: float = NOMINAL_SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.delta_f > 0:
            raise ConfigurationError(f"delta_f must be positive, got {self.delta_f}")
        if self.n_subcarriers <= 0:
            raise ConfigurationError(f"n_subcarriers must be positive, got {self.n_subcarriers}")
        if self.m_symbols <= 0:
            raise ConfigurationError(f"m_symbols must be positive, got {self.m_symbols}")
        if not self.f_c > 0:
            raise ConfigurationError(f"f_c must be positive, got {self.f_c}")
        if not self.speed_of_light > 0:
            raise ConfigurationError(f"speed_of_light must be positive, got {self.speed_of_light}")
        # Allow a rounding-level negative CP from t_total - 1/delta_f
        if self.t_cp < -1e-12 * self.t_symbol:
            raise ConfigurationError(
                f"t_cp must be non-negative, got {self.t_cp} "
                f"(t_total shorter than the useful symbol 1/delta_f = {self.t_symbol})"
            )
        if self.t_cp < 0:
            object.__setattr__(self, "t_cp", 0.0)
        if self.n_ifft is None:
            object.__setattr__(self, "n_ifft", next_power_of_two(self.n_subcarriers))
        if self.n_ifft < self.n_subcarriers:
            raise ConfigurationError(
                f"n_ifft ({self.n_ifft}) must be >= n_subcarriers ({self.n_subcarriers})"
            )

    @property
    def t_symbol(self) -> float:
        """Useful OFDM symbol duration T = 1/delta_f"""
        return 1.0 / self.delta_f

    @property
    def t_total(self) -> float:
        """Total symbol duration T_s = T + T_cp"""
        return self.t_symbol + self.t_cp

    @property
    def sample_interval(self) -> float:
        return self.t_symbol / self.n_ifft

    @property
    def n_cp(self) -> int:
        """Cyclic prefix length in samples"""
        return int(round(self.t_cp / self.sample_interval))

    @property
    def cp_discrepancy(self) -> float:
        """Quantized CP duration minus configured CP duration, seconds"""
        return self.n_cp * self.sample_interval - self.t_cp

    @classmethod
    def from_t_total(cls, t_total: float, delta_f: float = DEFAULT_DELTA_F, **kwargs) -> "OfdmParams":
        """Build params from a total symbol duration instead of a CP duration"""
        return cls(delta_f=delta_f, t_cp=t_total - 1.0 / delta_f, **kwargs)

    def with_delta_f(self, delta_f: float) -> "OfdmParams":
        """Change the subcarrier spacing, keeping the CP fraction of the symbol"""
        cp_fraction = self.t_cp / self.t_symbol
        return replace(self, delta_f=delta_f, t_cp=cp_fraction / delta_f)

    def with_t_total(self, t_total: float) -> "OfdmParams":
        return replace(self, t_cp=t_total - self.t_symbol)

    def as_dict(self) -> Dict[str, float]:
        """Stored and derived quantities, for run manifests"""
        return {
            "delta_f": self.delta_f,
            "n_subcarriers": self.n_subcarriers,
            "m_symbols": self.m_symbols,
            "f_c": self.f_c,
            "speed_of_light": self.speed_of_light,
            "t_symbol": self.t_symbol,
            "t_cp": self.t_cp,
            "t_total": self.t_total,
            "n_ifft": self.n_ifft,
            "n_cp": self.n_cp,
            "sample_interval": self.sample_interval,
            "cp_discrepancy": self.cp_discrepancy,
        }


@dataclass(frozen=True)
class DmrsConfig:
    """DMRS comb pattern, symbol placement and sequence seed"""
    comb_carrier: int = 2
    comb_symbol: int = 3
    symbol_positions: Tuple[int, ...] = (2, 5, 8, 11)
    carrier_offset: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.comb_carrier not in ALLOWED_CARRIER_COMBS:
            raise ConfigurationError(
                f"comb_carrier must be one of {ALLOWED_CARRIER_COMBS}, got {self.comb_carrier}"
            )
        if self.comb_symbol not in ALLOWED_SYMBOL_COMBS:
            raise ConfigurationError(
                f"comb_symbol must be one of {ALLOWED_SYMBOL_COMBS}, got {self.comb_symbol}"
            )
        if not 0 <= self.carrier_offset < self.comb_carrier:
            raise ConfigurationError(
                f"carrier_offset must be in [0, {self.comb_carrier}), got {self.carrier_offset}"
            )
        positions = tuple(int(p) for p in self.symbol_positions)
        if any(p < 0 for p in positions):
            raise ConfigurationError(f"symbol_positions must be non-negative, got {positions}")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ConfigurationError(f"symbol_positions must be strictly increasing, got {positions}")
        object.__setattr__(self, "symbol_positions", positions)
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")

    @classmethod
    def mapping_type_a(
        cls,
        m_symbols: int,
        additional_positions: int = 3,
        first_symbol: int = 2,
        slot_length: int = SLOT_LENGTH,
        **kwargs
    ) -> "DmrsConfig":
        """Mapping type A pattern repeated over every slot of the grid

        Args:
            m_symbols: Total number of OFDM symbols in the grid
            additional_positions: Number of additional DMRS symbols per slot (0-3)
            first_symbol: Front-loaded DMRS symbol within the slot (2 or 3)
            slot_length: Symbols per slot
            **kwargs: Remaining DmrsConfig fields

        Returns:
            DmrsConfig with explicit symbol positions
        """
        if additional_positions not in ADDITIONAL_DMRS_SYMBOLS:
            raise ConfigurationError(
                f"additional_positions must be one of {sorted(ADDITIONAL_DMRS_SYMBOLS)}, "
                f"got {additional_positions}"
            )
        if first_symbol not in (2, 3):
            raise ConfigurationError(f"first_symbol must be 2 or 3 for mapping type A, got {first_symbol}")
        pattern = (first_symbol,) + ADDITIONAL_DMRS_SYMBOLS[additional_positions]
        if pattern[-1] >= slot_length:
            raise ConfigurationError(f"slot_length {slot_length} too short for DMRS pattern {pattern}")

        positions = []
        for slot_start in range(0, m_symbols, slot_length):
            positions.extend(slot_start + p for p in pattern if slot_start + p < m_symbols)
        return cls(symbol_positions=tuple(positions), **kwargs)

    def retile(self, m_symbols: int, slot_length: int = SLOT_LENGTH) -> "DmrsConfig":
        """Repeat the first-slot pattern over a grid of a different length"""
        pattern = [p for p in self.symbol_positions if p < slot_length]
        positions = []
        for slot_start in range(0, m_symbols, slot_length):
            positions.extend(slot_start + p for p in pattern if slot_start + p < m_symbols)
        return replace(self, symbol_positions=tuple(positions))

    def validate_for(self, params: OfdmParams) -> None:
        """Check that the pattern fits the grid described by params"""
        out_of_range = [p for p in self.symbol_positions if p >= params.m_symbols]
        if out_of_range:
            raise ConfigurationError(
                f"DMRS symbol positions {out_of_range} exceed m_symbols={params.m_symbols}"
            )
        if self.carrier_offset >= params.n_subcarriers:
            raise ConfigurationError(
                f"carrier_offset {self.carrier_offset} leaves no DMRS subcarrier "
                f"in a grid of {params.n_subcarriers}"
            )

    def n_dmrs_subcarriers(self, n_subcarriers: int) -> int:
        """N_J: DMRS-bearing subcarriers in a grid of the given height"""
        return len(range(self.carrier_offset, n_subcarriers, self.comb_carrier))

    @property
    def n_dmrs_symbols(self) -> int:
        """M_J: DMRS-bearing OFDM symbols"""
        return len(self.symbol_positions)


@dataclass(frozen=True)
class TargetScenario:
    """Single point target seen by the sensing receiver

    snr_db of None means a noiseless echo (gamma -> infinity).
    """
    range_m: float = 48.0
    velocity_mps: float = 18.0
    attenuation: float = 1.0
    snr_db: Optional[float] = 10.0

    def __post_init__(self):
        if self.range_m < 0:
            raise ConfigurationError(f"range_m must be non-negative, got {self.range_m}")
        if not self.attenuation > 0:
            raise ConfigurationError(f"attenuation must be positive, got {self.attenuation}")
        if self.snr_db is not None and math.isnan(self.snr_db):
            raise ConfigurationError("snr_db must not be NaN")
        if self.snr_db is not None and math.isinf(self.snr_db) and self.snr_db > 0:
            object.__setattr__(self, "snr_db", None)

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None

    @property
    def snr_linear(self) -> float:
        """gamma = A^2 / sigma^2 as a linear ratio"""
        if self.snr_db is None:
            return math.inf
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def noise_variance(self) -> float:
        """Total complex noise variance sigma^2 for unit-amplitude symbols"""
        gamma = self.snr_linear
        if gamma <= 0:
            raise ConfigurationError(f"SNR must be positive in linear units, got {gamma}")
        return 1.0 / gamma

    def delay(self, speed_of_light: float = NOMINAL_SPEED_OF_LIGHT) -> float:
        """Two-way delay tau = 2R/c, seconds"""
        return 2.0 * self.range_m / speed_of_light

    def doppler(self, f_c: float, speed_of_light: float = NOMINAL_SPEED_OF_LIGHT) -> float:
        """Doppler shift f_d = 2 v f_c / c, Hz"""
        return 2.0 * self.velocity_mps * f_c / speed_of_light

    def within(self, r_max: float, v_max: float) -> bool:
        """True when the target lies inside the unambiguous window"""
        return self.range_m < r_max and abs(self.velocity_mps) < v_max


# Named overlays of RunConfig keys
PRESETS = {
    "default": {},
    "short": {
        "m_symbols": 28,
    },
    # Equally spaced DMRS timing, processed from the first DMRS column and row only
    "single-path": {
        "doppler_timing": "uniform",
        "doppler_path": "uniform",
        "combining": "single",
    },
}


def get_preset(name: str) -> dict:
    """Get the key overlay for a named preset"""
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}"
        ) from None
