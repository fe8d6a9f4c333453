"""Flat key = value run configuration"""

import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from dmrsense.config.settings import (
    NOMINAL_SPEED_OF_LIGHT,
    SPEED_OF_LIGHT,
    DEFAULT_DELTA_F,
    DEFAULT_F_C,
    DEFAULT_T_TOTAL,
    DmrsConfig,
    OfdmParams,
    TargetScenario,
    get_preset,
)
from dmrsense.exceptions import ConfigSyntaxError, ConfigurationError

logger = logging.getLogger(__name__)

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}
_NONE = {"none", "null", ""}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int(text: str) -> int:
    # Accept 1e3-style integers as well as 1000
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


_NAMED_SPEEDS = {"nominal": NOMINAL_SPEED_OF_LIGHT, "physical": SPEED_OF_LIGHT}


def _parse_speed(text: str) -> float:
    """A propagation speed in m/s, or nominal (3e8) or physical (exact)"""
    lowered = text.strip().lower()
    if lowered in _NAMED_SPEEDS:
        return _NAMED_SPEEDS[lowered]
    return float(text)


def _optional(parser: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str):
        if text.strip().lower() in _NONE:
            return None
        return parser(text)
    return parse


def _list_of(parser: Callable[[str], Any]) -> Callable[[str], Tuple]:
    def parse(text: str):
        if text.strip().lower() in _NONE:
            return None
        return tuple(parser(item) for item in text.split(",") if item.strip())
    return parse


def _choice(*allowed: str) -> Callable[[str], str]:
    def parse(text: str):
        value = text.strip()
        if value not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}, got {value!r}")
        return value
    parse.allowed = allowed
    return parse


def _key(default, parser: Callable[[str], Any]):
    return field(default=default, metadata={"parser": parser})


@dataclass
class RunConfig:
    """All run parameters, NR FR2 defaults. Units are SI except snr_* (dB)."""
    preset: Optional[str] = _key(None, _optional(str.strip))

    # OFDM numerology
    delta_f: float = _key(DEFAULT_DELTA_F, float)
    n_subcarriers: int = _key(256, _parse_int)
    m_symbols: int = _key(140, _parse_int)
    t_total: float = _key(DEFAULT_T_TOTAL, float)
    t_cp: Optional[float] = _key(None, _optional(float))  # overrides t_total when set
    f_c: float = _key(DEFAULT_F_C, float)
    n_ifft: Optional[int] = _key(None, _optional(_parse_int))
    speed_of_light: float = _key(NOMINAL_SPEED_OF_LIGHT, _parse_speed)

    # DMRS pattern
    comb_carrier: int = _key(2, _parse_int)
    comb_symbol: int = _key(3, _parse_int)
    carrier_offset: int = _key(0, _parse_int)
    dmrs_first_symbol: int = _key(2, _parse_int)
    dmrs_additional: int = _key(3, _parse_int)
    dmrs_positions: Optional[Tuple[int, ...]] = _key(None, _list_of(_parse_int))
    dmrs_seed: int = _key(0, _parse_int)

    # Target and channel
    range_m: float = _key(48.0, float)
    velocity_mps: float = _key(18.0, float)
    attenuation: float = _key(1.0, float)
    snr_db: float = _key(10.0, float)
    noise: bool = _key(True, _parse_bool)
    noise_on_empty: bool = _key(False, _parse_bool)
    doppler_timing: str = _key("actual", _choice("actual", "uniform"))

    # Estimator
    doppler_path: str = _key("full", _choice("full", "uniform"))
    combining: str = _key("incoherent", _choice("incoherent", "single"))
    quotient: str = _key("divide", _choice("divide", "conjugate"))
    signed_velocity: bool = _key(False, _parse_bool)
    interpolate: bool = _key(False, _parse_bool)
    zero_padding: int = _key(1, _parse_int)
    range_fft_size: Optional[int] = _key(None, _optional(_parse_int))
    doppler_fft_size: Optional[int] = _key(None, _optional(_parse_int))

    # Bounds
    crlb_method: str = _key("numeric_fisher", _choice("closed_form", "numeric_fisher"))
    crlb_dims: str = _key("total", _choice("total", "extracted"))
    crlb_centered: bool = _key(False, _parse_bool)

    # Monte Carlo
    sweep_axis: str = _key(
        "snr_db", _choice("snr_db", "delta_f", "t_total", "n_subcarriers", "m_symbols")
    )
    sweep_values: Optional[Tuple[float, ...]] = _key(None, _list_of(float))
    trials: int = _key(1000, _parse_int)
    seed: int = _key(0, _parse_int)
    signal: str = _key("dmrs", _choice("dmrs", "data", "both"))
    workers: int = _key(1, _parse_int)
    exclude_failures: bool = _key(False, _parse_bool)
    snr_min: float = _key(-15.0, float)
    snr_max: float = _key(10.0, float)
    snr_step: float = _key(1.0, float)

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def set(self, key: str, value: Any) -> None:
        """Set one key from a typed value or from its text form"""
        spec = _FIELDS.get(key)
        if spec is None:
            raise ConfigurationError(f"unknown config key {key!r}")
        if isinstance(value, str):
            try:
                value = spec.metadata["parser"](value)
            except ValueError as e:
                raise ConfigurationError(f"invalid value for {key}: {e}") from None
        setattr(self, key, value)

    def update(self, values: Mapping[str, Any]) -> None:
        for key, value in values.items():
            self.set(key, value)

    def validate(self) -> None:
        """Cross-field checks that single-key parsing cannot do"""
        for f in fields(self):
            allowed = getattr(f.metadata["parser"], "allowed", None)
            value = getattr(self, f.name)
            if allowed is not None and value not in allowed:
                raise ConfigurationError(f"{f.name} must be one of {', '.join(allowed)}, got {value!r}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.zero_padding not in (1, 2, 4, 8):
            raise ConfigurationError(f"zero_padding must be 1, 2, 4 or 8, got {self.zero_padding}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if not self.snr_step > 0:
            raise ConfigurationError(f"snr_step must be positive, got {self.snr_step}")
        if self.snr_max < self.snr_min:
            raise ConfigurationError(f"snr_max ({self.snr_max}) is below snr_min ({self.snr_min})")
        if self.sweep_values is not None:
            if not self.sweep_values:
                raise ConfigurationError("sweep_values must not be empty")
            if not all(np.isfinite(v) for v in self.sweep_values):
                raise ConfigurationError(f"sweep_values must be finite, got {self.sweep_values}")
        if self.sweep_axis != "snr_db" and self.sweep_values is None:
            raise ConfigurationError(f"sweep_axis {self.sweep_axis} requires sweep_values")

    def ofdm_params(self) -> OfdmParams:
        t_cp = self.t_cp if self.t_cp is not None else self.t_total - 1.0 / self.delta_f
        return OfdmParams(
            delta_f=self.delta_f,
            n_subcarriers=self.n_subcarriers,
            m_symbols=self.m_symbols,
            t_cp=t_cp,
            f_c=self.f_c,
            n_ifft=self.n_ifft,
            speed_of_light=self.speed_of_light,
        )

    def dmrs_config(self, params: Optional[OfdmParams] = None) -> DmrsConfig:
        params = params or self.ofdm_params()
        common = dict(
            comb_carrier=self.comb_carrier,
            comb_symbol=self.comb_symbol,
            carrier_offset=self.carrier_offset,
            seed=self.dmrs_seed,
        )
        if self.dmrs_positions is not None:
            cfg = DmrsConfig(symbol_positions=self.dmrs_positions, **common)
        else:
            cfg = DmrsConfig.mapping_type_a(
                params.m_symbols,
                additional_positions=self.dmrs_additional,
                first_symbol=self.dmrs_first_symbol,
                **common
            )
        cfg.validate_for(params)
        return cfg

    def target(self) -> TargetScenario:
        return TargetScenario(
            range_m=self.range_m,
            velocity_mps=self.velocity_mps,
            attenuation=self.attenuation,
            snr_db=self.snr_db,
        )

    def channel_options(self):
        from dmrsense.channel.echo import ChannelOptions

        return ChannelOptions(
            noise=self.noise,
            noise_on_empty=self.noise_on_empty,
            doppler_timing=self.doppler_timing,
        )

    def estimator_options(self):
        from dmrsense.sensing.estimator import EstimatorOptions

        return EstimatorOptions(
            doppler_path=self.doppler_path,
            combining=self.combining,
            zero_padding=self.zero_padding,
            range_fft_size=self.range_fft_size,
            doppler_fft_size=self.doppler_fft_size,
            signed_velocity=self.signed_velocity,
            interpolate=self.interpolate,
            quotient=self.quotient,
        )

    def snr_grid(self) -> List[float]:
        """snr_min..snr_max inclusive in snr_step increments"""
        count = int(np.floor((self.snr_max - self.snr_min) / self.snr_step + 1e-9)) + 1
        return [round(self.snr_min + i * self.snr_step, 10) for i in range(count)]

    def axis_values(self) -> List[float]:
        if self.sweep_values is not None:
            return [float(v) for v in self.sweep_values]
        return self.snr_grid()

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_FIELDS = {f.name: f for f in fields(RunConfig)}


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """Split key = value lines into a raw mapping

    Args:
        text: Config file contents
        source: Name used in error messages

    Returns:
        Mapping of key to unparsed value text, in file order
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigSyntaxError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELDS:
            raise ConfigurationError(f"{source}:{lineno}: unknown config key {key!r}")
        try:
            _FIELDS[key].metadata["parser"](value)
        except ValueError as e:
            raise ConfigurationError(f"{source}:{lineno}: invalid value for {key}: {e}") from None
        raw[key] = value
    return raw


def load_config(
    path: Optional[Union[str, Path]] = None,
    preset: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Build a RunConfig from defaults, a preset, a config file and overrides

    Precedence, lowest first: defaults, preset overlay (the explicit
    argument wins over a `preset` key in the file), file keys, overrides.
    """
    raw = {}
    if path is not None:
        path = Path(path)
        raw = parse_config_text(path.read_text(encoding="utf-8"), source=str(path))
        logger.info("loaded %d config keys from %s", len(raw), path)

    config = RunConfig()
    preset_name = preset or (_FIELDS["preset"].metadata["parser"](raw["preset"]) if "preset" in raw else None)
    if preset_name:
        config.update(get_preset(preset_name))
        config.preset = preset_name
        logger.info("applied preset %s", preset_name)

    raw.pop("preset", None)
    config.update(raw)
    if overrides:
        config.update(overrides)
    config.validate()
    return config
