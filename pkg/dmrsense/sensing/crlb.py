"""Cramer-Rao lower bounds for range and velocity

Two evaluations are provided:

- ``closed_form``: the closed-form expressions, including the comb factors,
  bare N/M and the unsquared f_c of the velocity bound.
- ``numeric_fisher``: builds the 2x2 Fisher matrix of (tau, f_d) for the
  actual occupied lattice and inverts it. This is the reference value.

Both assume unit-magnitude symbols (A = 1, gamma = 1 / sigma^2) and a known
attenuation xi.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
import scipy.linalg

from dmrsense.config.settings import DmrsConfig, OfdmParams
from dmrsense.exceptions import ConfigurationError, DegenerateConfigurationError
from dmrsense.waveform.refsig import ResourceGrid

logger = logging.getLogger(__name__)

BARE_DIMS = ("total", "extracted")
# Largest condition number of the normalised Fisher matrix still inverted
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class CrlbInputs:
    """Everything the bounds depend on

    `subcarriers` and `symbols` are the absolute indices of the occupied
    lattice; n_j and m_j are their counts.
    """
    gamma: float
    xi: float
    delta_f: float
    t_total: float
    f_c: float
    n_subcarriers: int
    m_symbols: int
    comb_carrier: int
    comb_symbol: int
    subcarriers: Tuple[int, ...]
    symbols: Tuple[int, ...]
    speed_of_light: float
    bare_dims: str = "total"
    centered: bool = False

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ConfigurationError(f"gamma must be positive and finite, got {self.gamma}")
        if not self.xi > 0:
            raise ConfigurationError(f"xi must be positive, got {self.xi}")
        if self.bare_dims not in BARE_DIMS:
            raise ConfigurationError(f"bare_dims must be one of {BARE_DIMS}, got {self.bare_dims!r}")
        object.__setattr__(self, "subcarriers", tuple(int(k) for k in self.subcarriers))
        object.__setattr__(self, "symbols", tuple(int(m) for m in self.symbols))

    @property
    def n_j(self) -> int:
        return len(self.subcarriers)

    @property
    def m_j(self) -> int:
        return len(self.symbols)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.gamma)

    @classmethod
    def from_config(
        cls,
        params: OfdmParams,
        cfg: DmrsConfig,
        snr_db: float,
        attenuation: float = 1.0,
        bare_dims: str = "total",
        centered: bool = False
    ) -> "CrlbInputs":
        return cls(
            gamma=10.0 ** (snr_db / 10.0),
            xi=attenuation,
            delta_f=params.delta_f,
            t_total=params.t_total,
            f_c=params.f_c,
            n_subcarriers=params.n_subcarriers,
            m_symbols=params.m_symbols,
            comb_carrier=cfg.comb_carrier,
            comb_symbol=cfg.comb_symbol,
            subcarriers=tuple(range(cfg.carrier_offset, params.n_subcarriers, cfg.comb_carrier)),
            symbols=cfg.symbol_positions,
            speed_of_light=params.speed_of_light,
            bare_dims=bare_dims,
            centered=centered,
        )

    @classmethod
    def from_grid(
        cls,
        grid: ResourceGrid,
        params: OfdmParams,
        snr_db: float,
        attenuation: float = 1.0,
        bare_dims: str = "total",
        centered: bool = False
    ) -> "CrlbInputs":
        """Inputs for whatever lattice a grid occupies (DMRS or data)"""
        return cls(
            gamma=10.0 ** (snr_db / 10.0),
            xi=attenuation,
            delta_f=params.delta_f,
            t_total=params.t_total,
            f_c=params.f_c,
            n_subcarriers=grid.n_subcarriers,
            m_symbols=grid.m_symbols,
            comb_carrier=grid.carrier_stride,
            comb_symbol=grid.symbol_stride,
            subcarriers=tuple(grid.subcarriers),
            symbols=tuple(grid.symbols),
            speed_of_light=params.speed_of_light,
            bare_dims=bare_dims,
            centered=centered,
        )

    def with_snr(self, snr_db: float) -> "CrlbInputs":
        return replace(self, gamma=10.0 ** (snr_db / 10.0))


@dataclass(frozen=True, eq=False)
class CrlbReport:
    """Range and velocity bounds from one method"""
    crlb_range_m2: float
    crlb_velocity_mps2: float
    method: str
    inputs: CrlbInputs
    condition_number: Optional[float] = None
    fisher: Optional[np.ndarray] = None
    notes: Tuple[str, ...] = ()

    @property
    def root_crlb_range_m(self) -> float:
        return math.sqrt(self.crlb_range_m2)

    @property
    def root_crlb_velocity_mps(self) -> float:
        return math.sqrt(self.crlb_velocity_mps2)


def _require_lattice(inputs: CrlbInputs) -> None:
    if inputs.m_j < 2 or inputs.n_j < 2:
        raise DegenerateConfigurationError(
            f"bounds need at least 2 DMRS subcarriers and 2 DMRS symbols, "
            f"got N_J={inputs.n_j}, M_J={inputs.m_j}"
        )


def crlb_closed_form(inputs: CrlbInputs) -> CrlbReport:
    """Evaluate the closed-form range and velocity bounds

    CRLB(R) = c^2 / (xi^2 gamma (2 pi delta_f)^2 K_symbol)
              * 12 / (M_J N (N_J - 1)(7 N_J + 1))
    CRLB(v) = c^2 / (xi^2 gamma (2 pi T_s)^2 f_c K_carrier)
              * 12 / (N_J M (M_J - 1)(7 M_J + 1))

    N and M are the total grid dimensions, or N_J and M_J when
    bare_dims is "extracted".
    """
    _require_lattice(inputs)
    c = inputs.speed_of_light
    n_j, m_j = inputs.n_j, inputs.m_j
    if inputs.bare_dims == "total":
        bare_n, bare_m = inputs.n_subcarriers, inputs.m_symbols
    else:
        bare_n, bare_m = n_j, m_j
    snr = inputs.xi ** 2 * inputs.gamma

    crlb_r = (
        c ** 2 / (snr * (2 * math.pi * inputs.delta_f) ** 2 * inputs.comb_symbol)
        * 12.0 / (m_j * bare_n * (n_j - 1) * (7 * n_j + 1))
    )
    crlb_v = (
        c ** 2 / (snr * (2 * math.pi * inputs.t_total) ** 2 * inputs.f_c * inputs.comb_carrier)
        * 12.0 / (n_j * bare_m * (m_j - 1) * (7 * m_j + 1))
    )
    return CrlbReport(
        crlb_range_m2=crlb_r,
        crlb_velocity_mps2=crlb_v,
        method="closed_form",
        inputs=inputs,
        notes=("velocity bound divides by f_c, not f_c^2",),
    )


def fisher_matrix(inputs: CrlbInputs) -> np.ndarray:
    """Fisher information of (tau, f_d) summed over the occupied lattice

    With s(k, m) = xi x(k, m) exp(-j 2 pi f_k tau) exp(j 2 pi f_d t_m):
        F_tt = 2 xi^2 gamma (2 pi)^2 sum f_k^2
        F_ff = 2 xi^2 gamma (2 pi)^2 sum t_m^2
        F_tf = -2 xi^2 gamma (2 pi)^2 sum f_k t_m
    """
    f = np.asarray(inputs.subcarriers, dtype=np.float64) * inputs.delta_f
    t = np.asarray(inputs.symbols, dtype=np.float64) * inputs.t_total
    if inputs.centered:
        f = f - f.mean()
        t = t - t.mean()

    scale = 2.0 * inputs.xi ** 2 * inputs.gamma * (2 * math.pi) ** 2
    f_grid, t_grid = np.meshgrid(f, t, indexing="ij")
    f_tt = scale * math.fsum((f_grid ** 2).ravel())
    f_ff = scale * math.fsum((t_grid ** 2).ravel())
    f_tf = -scale * math.fsum((f_grid * t_grid).ravel())
    return np.array([[f_tt, f_tf], [f_tf, f_ff]])


def crlb_numeric_fisher(inputs: CrlbInputs) -> CrlbReport:
    """Invert the lattice Fisher matrix and convert to range/velocity

    CRLB(R) = c^2 / 4 * CRLB(tau), CRLB(v) = c^2 / (4 f_c^2) * CRLB(f_d)
    """
    _require_lattice(inputs)
    fisher = fisher_matrix(inputs)

    # Delay and Doppler entries differ by ~20 orders of magnitude; normalise first
    diagonal = np.sqrt(np.diag(fisher))
    if not np.all(diagonal > 0):
        raise DegenerateConfigurationError(f"Fisher matrix has a zero diagonal: {np.diag(fisher)}")
    normalised = fisher / np.outer(diagonal, diagonal)
    condition = float(np.linalg.cond(normalised))
    if not math.isfinite(condition) or condition > MAX_CONDITION:
        raise DegenerateConfigurationError(f"Fisher matrix is singular (condition number {condition:.3g})")
    try:
        inverse = scipy.linalg.inv(normalised) / np.outer(diagonal, diagonal)
    except scipy.linalg.LinAlgError as e:
        raise DegenerateConfigurationError(
            f"Fisher matrix inversion failed (condition number {condition:.3g}): {e}"
        ) from None

    c = inputs.speed_of_light
    logger.debug("Fisher condition number %.4g", condition)
    return CrlbReport(
        crlb_range_m2=c ** 2 / 4.0 * inverse[0, 0],
        crlb_velocity_mps2=c ** 2 / (4.0 * inputs.f_c ** 2) * inverse[1, 1],
        method="numeric_fisher",
        inputs=inputs,
        condition_number=condition,
        fisher=fisher,
    )


CRLB_METHODS: Dict[str, Callable[[CrlbInputs], CrlbReport]] = {
    "closed_form": crlb_closed_form,
    "numeric_fisher": crlb_numeric_fisher,
}


def get_crlb_method(name: str) -> Callable[[CrlbInputs], CrlbReport]:
    try:
        return CRLB_METHODS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown CRLB method {name!r}; choose from {', '.join(CRLB_METHODS)}"
        ) from None


def crlb_curve(inputs: CrlbInputs, snr_db_values: Iterable[float], method: str = "numeric_fisher") -> List[CrlbReport]:
    """One report per SNR value"""
    compute = get_crlb_method(method)
    return [compute(inputs.with_snr(snr_db)) for snr_db in snr_db_values]


def crlb_ratio(inputs: CrlbInputs) -> Tuple[float, float]:
    """numeric_fisher / closed_form for (range, velocity)

    Both bounds scale as 1/gamma, so the ratios do not depend on SNR.
    """
    closed = crlb_closed_form(inputs)
    numeric = crlb_numeric_fisher(inputs)
    return (
        numeric.crlb_range_m2 / closed.crlb_range_m2,
        numeric.crlb_velocity_mps2 / closed.crlb_velocity_mps2,
    )
