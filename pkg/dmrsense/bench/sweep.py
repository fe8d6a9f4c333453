"""Monte Carlo RMSE sweeps"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from dmrsense.bench.signals import SIGNAL_KINDS, BaseSignal, make_signal
from dmrsense.channel.echo import ChannelOptions, apply_symbol_domain
from dmrsense.config.settings import DmrsConfig, OfdmParams, TargetScenario
from dmrsense.exceptions import ConfigurationError
from dmrsense.sensing.crlb import get_crlb_method
from dmrsense.sensing.estimator import EstimatorOptions, SensingBounds, estimate, extract_quotient

logger = logging.getLogger(__name__)

SWEEP_AXES = ("snr_db", "delta_f", "t_total", "n_subcarriers", "m_symbols")

# A trial fails when its error exceeds this fraction of the unambiguous window
FAILURE_FRACTION = 0.25


def trial_seeds(master_seed: int, point_index: int, trial_index: int) -> Tuple[int, int]:
    """(grid_seed, noise_seed) for one trial, independent of signal kind and worker count"""
    state = np.random.SeedSequence([master_seed, point_index, trial_index]).generate_state(2)
    return int(state[0]), int(state[1])


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: base configuration, swept axis and trial settings"""
    params: OfdmParams
    dmrs: DmrsConfig
    target: TargetScenario
    axis: str = "snr_db"
    values: Tuple[float, ...] = tuple(float(v) for v in range(-15, 11))
    trials: int = 1000
    master_seed: int = 0
    signal_kind: str = "dmrs"
    channel: ChannelOptions = ChannelOptions()
    estimator: EstimatorOptions = EstimatorOptions()
    crlb_method: str = "numeric_fisher"
    crlb_dims: str = "total"
    crlb_centered: bool = False
    workers: int = 1
    exclude_failures: bool = False

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigurationError(f"sweep axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigurationError("sweep values must not be empty")
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError(f"sweep values must be finite, got {values}")
        object.__setattr__(self, "values", values)
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.signal_kind not in SIGNAL_KINDS:
            raise ConfigurationError(f"signal_kind must be one of {SIGNAL_KINDS}, got {self.signal_kind!r}")
        get_crlb_method(self.crlb_method)

    @classmethod
    def from_config(cls, config, signal_kind: Optional[str] = None) -> "SweepSpec":
        """Build a spec from a RunConfig

        Args:
            config: RunConfig
            signal_kind: Overrides config.signal ("both" is resolved by the caller)
        """
        params = config.ofdm_params()
        kind = signal_kind or config.signal
        if kind == "both":
            kind = "dmrs"
        return cls(
            params=params,
            dmrs=config.dmrs_config(params),
            target=config.target(),
            axis=config.sweep_axis,
            values=tuple(config.axis_values()),
            trials=config.trials,
            master_seed=config.seed,
            signal_kind=kind,
            channel=config.channel_options(),
            estimator=config.estimator_options(),
            crlb_method=config.crlb_method,
            crlb_dims=config.crlb_dims,
            crlb_centered=config.crlb_centered,
            workers=config.workers,
            exclude_failures=config.exclude_failures,
        )

    def point(self, value: float) -> Tuple[OfdmParams, DmrsConfig, TargetScenario]:
        """Configuration at one value of the swept axis"""
        params, cfg, target = self.params, self.dmrs, self.target
        if self.axis == "snr_db":
            target = replace(target, snr_db=value)
        elif self.axis == "delta_f":
            params = params.with_delta_f(value)
        elif self.axis == "t_total":
            params = params.with_t_total(value)
        elif self.axis == "n_subcarriers":
            params = replace(params, n_subcarriers=int(value), n_ifft=None)
        else:
            params = replace(params, m_symbols=int(value))
            cfg = cfg.retile(int(value))
        cfg.validate_for(params)
        return params, cfg, target


@dataclass(frozen=True)
class TrialOutcome:
    range_error: float
    velocity_error: float
    failed: bool


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated statistics at one axis value"""
    axis_value: float
    rmse_range_m: float
    rmse_velocity_mps: float
    root_crlb_range_m: float
    root_crlb_velocity_mps: float
    fail_fraction: float
    trials: int
    delta_r: float
    delta_v: float
    in_window: bool = True

    def as_row(self) -> Dict[str, float]:
        return {
            "axis_value": self.axis_value,
            "rmse_range_m": self.rmse_range_m,
            "rmse_velocity_mps": self.rmse_velocity_mps,
            "root_crlb_range_m": self.root_crlb_range_m,
            "root_crlb_velocity_mps": self.root_crlb_velocity_mps,
            "fail_fraction": self.fail_fraction,
            "trials": self.trials,
        }


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    signal_kind: str
    points: Tuple[SweepPoint, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points])

    def out_of_window(self) -> List[float]:
        """Axis values whose target lies outside the unambiguous window"""
        return [p.axis_value for p in self.points if not p.in_window]


class TrialRunner:
    """Runs the trials of one sweep point"""

    def __init__(
        self,
        signal: BaseSignal,
        target: TargetScenario,
        channel: ChannelOptions,
        estimator: EstimatorOptions,
    ):
        self.signal = signal
        self.target = target
        self.channel = channel
        self.estimator = estimator
        self.window = signal.bounds(estimator)

    def run_trial(self, master_seed: int, point_index: int, trial_index: int) -> TrialOutcome:
        """One grid -> channel -> quotient -> estimate pass

        Args:
            master_seed: Sweep master seed
            point_index: Index of the sweep point
            trial_index: Index of the trial within the point

        Returns:
            Signed errors and the gross-failure flag
        """
        grid_seed, noise_seed = trial_seeds(master_seed, point_index, trial_index)
        logger.debug("point %d trial %d: grid seed %d, noise seed %d", point_index, trial_index, grid_seed, noise_seed)

        params = self.signal.params
        tx = self.signal.build(grid_seed)
        rx = apply_symbol_domain(tx, params, self.signal.channel_cfg, self.target, noise_seed, self.channel)
        q = extract_quotient(rx, tx, self.signal.channel_cfg, self.estimator.quotient)
        est = estimate(q, params, self.signal.channel_cfg, self.estimator)

        range_error = est.range_m - self.target.range_m
        velocity_error = est.velocity_mps - self.target.velocity_mps
        failed = (
            abs(range_error) > FAILURE_FRACTION * self.window.r_max
            or abs(velocity_error) > FAILURE_FRACTION * self.window.v_max
        )
        return TrialOutcome(range_error, velocity_error, failed)

    def run_trials(self, master_seed: int, point_index: int, trials: int, workers: int = 1) -> List[TrialOutcome]:
        """All trials of a point, in trial order whatever the worker count"""
        def run(trial_index: int) -> TrialOutcome:
            return self.run_trial(master_seed, point_index, trial_index)

        if workers <= 1:
            return [run(i) for i in range(trials)]
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(run, range(trials)))


def _rmse(errors: List[float]) -> float:
    if not errors:
        return math.nan
    return math.sqrt(math.fsum(e * e for e in errors) / len(errors))


def aggregate(
    outcomes: List[TrialOutcome],
    axis_value: float,
    window: SensingBounds,
    root_crlb: Tuple[float, float],
    exclude_failures: bool = False,
    in_window: bool = True,
) -> SweepPoint:
    """Reduce trial outcomes to RMSE and failure fraction"""
    fail_count = sum(o.failed for o in outcomes)
    used = [o for o in outcomes if not (exclude_failures and o.failed)]
    return SweepPoint(
        axis_value=axis_value,
        rmse_range_m=_rmse([o.range_error for o in used]),
        rmse_velocity_mps=_rmse([o.velocity_error for o in used]),
        root_crlb_range_m=root_crlb[0],
        root_crlb_velocity_mps=root_crlb[1],
        fail_fraction=fail_count / len(outcomes),
        trials=len(used),
        delta_r=window.delta_r,
        delta_v=window.delta_v,
        in_window=in_window,
    )


def _root_crlb(spec: SweepSpec, signal: BaseSignal, target: TargetScenario) -> Tuple[float, float]:
    if target.noiseless:
        return 0.0, 0.0
    inputs = signal.crlb_inputs(
        target.snr_db,
        attenuation=target.attenuation,
        bare_dims=spec.crlb_dims,
        centered=spec.crlb_centered,
    )
    report = get_crlb_method(spec.crlb_method)(inputs)
    return report.root_crlb_range_m, report.root_crlb_velocity_mps


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run every point of a sweep

    Args:
        spec: Sweep specification

    Returns:
        SweepResult with one SweepPoint per axis value
    """
    logger.info(
        "sweep %s over %d values, %d trials each, signal %s",
        spec.axis, len(spec.values), spec.trials, spec.signal_kind,
    )
    points = []
    for point_index, value in enumerate(spec.values):
        params, cfg, target = spec.point(value)
        signal = make_signal(spec.signal_kind, params, cfg)
        runner = TrialRunner(signal, target, spec.channel, spec.estimator)
        in_window = target.within(runner.window.r_max, runner.window.v_max)
        if not in_window:
            logger.warning(
                "%s=%g: target (%g m, %g m/s) outside the unambiguous window (R_max %.4g m, v_max %.4g m/s)",
                spec.axis, value, target.range_m, target.velocity_mps, runner.window.r_max, runner.window.v_max,
            )
        outcomes = runner.run_trials(spec.master_seed, point_index, spec.trials, spec.workers)
        point = aggregate(
            outcomes, value, runner.window, _root_crlb(spec, signal, target), spec.exclude_failures, in_window
        )
        logger.info(
            "%s=%g: rmse %.4g m / %.4g m/s, fail %.3f",
            spec.axis, value, point.rmse_range_m, point.rmse_velocity_mps, point.fail_fraction,
        )
        points.append(point)
    return SweepResult(spec=spec, signal_kind=spec.signal_kind, points=tuple(points))


def compare_signals(spec: SweepSpec) -> Dict[str, SweepResult]:
    """Run the same sweep, with the same trial seeds, for every signal kind"""
    return {kind: run_sweep(replace(spec, signal_kind=kind)) for kind in SIGNAL_KINDS}
