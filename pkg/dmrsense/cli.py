"""Command-line interface for dmrsense"""

import functools
import logging
import sys
from dataclasses import replace

import click

from dmrsense import __version__
from dmrsense.config.loader import load_config
from dmrsense.config.settings import PRESETS
from dmrsense.exceptions import VALIDATION_ERRORS, ConfigSyntaxError, DmrsenseError

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _parse_assignments(ctx, param, values):
    overrides = {}
    for item in values:
        if "=" not in item:
            raise click.BadParameter(f"expected KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def common_options(func):
    """Options every subcommand accepts"""
    options = [
        click.option(
            "-c", "--config", "config_path",
            type=click.Path(exists=True, dir_okay=False),
            default=None,
            help="key = value config file"
        ),
        click.option(
            "--preset",
            type=click.Choice(sorted(PRESETS)),
            default=None,
            help="Named parameter overlay"
        ),
        click.option(
            "-s", "--set", "assignments",
            multiple=True,
            callback=_parse_assignments,
            metavar="KEY=VALUE",
            help="Override a config key (repeatable)"
        ),
        click.option(
            "--seed",
            type=click.IntRange(min=0),
            default=None,
            help="Master seed (overrides the config)"
        ),
        click.option(
            "-o", "--out",
            type=click.Path(file_okay=False),
            default=".",
            help="Output directory"
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def handle_errors(func):
    """Map library errors to exit codes and a one-line message"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigSyntaxError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_USAGE)
        except VALIDATION_ERRORS as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_VALIDATION)
        except (DmrsenseError, OSError) as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_RUNTIME)
    return wrapper


def _load(config_path, preset, assignments, seed=None, **extra):
    overrides = dict(assignments)
    overrides.update({k: v for k, v in extra.items() if v is not None})
    if seed is not None:
        overrides["seed"] = seed
    return load_config(config_path, preset=preset, overrides=overrides)


@click.group()
@click.version_option(__version__, prog_name="dmrsense")
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG")
def main(verbose):
    """dmrsense - DMRS-based OFDM range/velocity sensing simulator"""
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


@main.command()
@common_options
@click.option(
    "--signal",
    type=click.Choice(["dmrs", "data"]),
    default="dmrs",
    help="Grid to dump"
)
@handle_errors
def grid(config_path, preset, assignments, seed, out, signal):
    """Dump the transmit resource grid as CSV"""
    from dmrsense.bench.sweep import trial_seeds
    from dmrsense.bench.writer import ResultWriter
    from dmrsense.waveform.refsig import build_data_grid, build_dmrs_grid

    config = _load(config_path, preset, assignments, seed)
    params = config.ofdm_params()
    if signal == "dmrs":
        tx = build_dmrs_grid(params, config.dmrs_config(params))
    else:
        tx = build_data_grid(params, trial_seeds(config.seed, 0, 0)[0])

    writer = ResultWriter(out)
    path = writer.write_grid(tx)
    writer.write_manifest("grid", config.to_dict(), params, seeds={"seed": config.seed})
    click.echo(f"N_J={tx.n_j} M_J={tx.m_j} occupied={tx.occupied_count} density={tx.occupancy_density():.4f}")
    click.echo(f"Grid saved to: {path}")


@main.command()
@common_options
@click.option(
    "--signal",
    type=click.Choice(["dmrs", "data"]),
    default=None,
    help="Transmit signal"
)
@click.option("--no-noise", is_flag=True, help="Noiseless echo")
@click.option(
    "--channel",
    type=click.Choice(["symbol", "time"]),
    default="symbol",
    help="Per-symbol channel or integer-sample time-domain channel"
)
@click.option("--dump-samples", is_flag=True, help="Also write the received raw samples (time channel)")
@handle_errors
def simulate(config_path, preset, assignments, seed, out, signal, no_noise, channel, dump_samples):
    """Run one end-to-end trial and print the estimate"""
    from dmrsense.bench.signals import make_signal
    from dmrsense.bench.sweep import trial_seeds
    from dmrsense.bench.writer import ResultWriter, estimate_record
    from dmrsense.channel.echo import apply_symbol_domain, apply_time_domain_oracle
    from dmrsense.sensing.estimator import estimate, extract_quotient
    from dmrsense.waveform.ofdm import demodulate, modulate

    config = _load(config_path, preset, assignments, seed, signal=signal, noise=False if no_noise else None)
    params = config.ofdm_params()
    source = make_signal("data" if config.signal == "data" else "dmrs", params, config.dmrs_config(params))
    target = config.target()
    channel_opts = config.channel_options()
    estimator_opts = config.estimator_options()

    grid_seed, noise_seed = trial_seeds(config.seed, 0, 0)
    tx = source.build(grid_seed)
    writer = ResultWriter(out)
    if channel == "symbol":
        rx = apply_symbol_domain(tx, params, source.channel_cfg, target, noise_seed, channel_opts)
    else:
        stream = apply_time_domain_oracle(modulate(tx, params), params, target, noise_seed, channel_opts)
        if dump_samples:
            writer.write_samples(stream)
        rx = demodulate(stream, params, reference=tx)

    q = extract_quotient(rx, tx, source.channel_cfg, estimator_opts.quotient)
    est = estimate(q, params, source.channel_cfg, estimator_opts)
    record = estimate_record(est, target if channel_opts.noise else replace(target, snr_db=None), config.seed)
    if not record["in_window"]:
        logger.warning(
            "target (%g m, %g m/s) outside the unambiguous window (R_max %.4g m, v_max %.4g m/s)",
            target.range_m, target.velocity_mps, est.bounds.r_max, est.bounds.v_max,
        )

    writer.write_estimate(record)
    writer.write_profiles(est)
    writer.write_manifest(
        "simulate",
        config.to_dict(),
        params,
        seeds={"seed": config.seed, "grid_seed": grid_seed, "noise_seed": noise_seed},
        extra={"channel": channel, "signal": source.kind, "in_window": record["in_window"]},
    )

    click.echo(f"est_range: {est.range_m:.2f} m (index {est.range_index}, true {target.range_m:g})")
    click.echo(f"est_velocity: {est.velocity_mps:.2f} m/s (index {est.velocity_index}, true {target.velocity_mps:g})")
    click.echo(f"delta_r: {est.bounds.delta_r:.4f} m, delta_v: {est.bounds.delta_v:.4f} m/s")
    if not record["in_window"]:
        click.echo(
            f"Warning: target out of unambiguous window "
            f"(R_max {est.bounds.r_max:.4f} m, v_max {est.bounds.v_max:.4f} m/s)"
        )


@main.command()
@common_options
@handle_errors
def bounds(config_path, preset, assignments, seed, out):
    """Print maximum range/velocity and resolution"""
    from dmrsense.bench.writer import ResultWriter
    from dmrsense.sensing.estimator import bounds as sensing_bounds

    config = _load(config_path, preset, assignments, seed)
    params = config.ofdm_params()
    result = sensing_bounds(params, config.dmrs_config(params), config.estimator_options())

    record = {
        "r_max": result.r_max,
        "delta_r": result.delta_r,
        "v_max": result.v_max,
        "delta_v": result.delta_v,
        "n_fft": result.n_fft,
        "m_fft": result.m_fft,
    }
    ResultWriter(out).write_json("bounds.json", record)
    click.echo(f"R_max: {result.r_max:.4f} m")
    click.echo(f"delta_R: {result.delta_r:.4f} m")
    click.echo(f"v_max: {result.v_max:.4f} m/s")
    click.echo(f"delta_v: {result.delta_v:.4f} m/s")


@main.command()
@common_options
@click.option(
    "--method",
    type=click.Choice(["both", "closed_form", "numeric_fisher"]),
    default="both",
    help="Which bound to evaluate"
)
@handle_errors
def crlb(config_path, preset, assignments, seed, out, method):
    """Root-CRLB curves over the configured SNR range"""
    from dmrsense.bench.writer import ResultWriter
    from dmrsense.sensing.crlb import CRLB_METHODS, CrlbInputs, crlb_curve, crlb_ratio

    config = _load(config_path, preset, assignments, seed)
    params = config.ofdm_params()
    inputs = CrlbInputs.from_config(
        params,
        config.dmrs_config(params),
        config.snr_min,
        attenuation=config.attenuation,
        bare_dims=config.crlb_dims,
        centered=config.crlb_centered,
    )
    methods = list(CRLB_METHODS) if method == "both" else [method]
    reports = []
    for name in methods:
        reports.extend(crlb_curve(inputs, config.snr_grid(), name))

    writer = ResultWriter(out)
    path = writer.write_crlb(reports)
    ratio_r, ratio_v = crlb_ratio(inputs)
    writer.write_manifest(
        "crlb",
        config.to_dict(),
        params,
        extra={"numeric_over_closed_form": {"range": ratio_r, "velocity": ratio_v}},
    )
    click.echo(f"numeric/closed-form ratio: range {ratio_r:.6g}, velocity {ratio_v:.6g}")
    click.echo(f"CRLB curves saved to: {path}")


@main.command()
@common_options
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Trials per sweep point")
@click.option(
    "--signal",
    type=click.Choice(["dmrs", "data", "both"]),
    default=None,
    help="Transmit signal; both writes a comparison"
)
@click.option("--no-noise", is_flag=True, help="Noiseless echo")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker threads")
@handle_errors
def sweep(config_path, preset, assignments, seed, out, trials, signal, no_noise, workers):
    """Monte Carlo RMSE curves against root CRLB"""
    from dmrsense.bench.sweep import SweepSpec, compare_signals, run_sweep
    from dmrsense.bench.writer import ResultWriter

    config = _load(
        config_path, preset, assignments, seed,
        trials=trials, signal=signal, workers=workers, noise=False if no_noise else None,
    )
    spec = SweepSpec.from_config(config)
    writer = ResultWriter(out)

    click.echo(
        f"Sweeping {spec.axis} over {len(spec.values)} values, {spec.trials} trials each "
        f"({config.signal})"
    )
    if config.signal == "both":
        results = compare_signals(spec)
        path = writer.write_comparison(results)
    else:
        results = {spec.signal_kind: run_sweep(spec)}
        path = writer.write_sweep(results[spec.signal_kind])

    writer.write_manifest(
        "sweep",
        config.to_dict(),
        spec.params,
        seeds={"master_seed": spec.master_seed, "derivation": "SeedSequence([master, point, trial])"},
        extra={
            "signals": list(results),
            "out_of_window": {kind: result.out_of_window() for kind, result in results.items()},
        },
    )
    for kind, result in results.items():
        if result.out_of_window():
            click.echo(f"Warning: {kind} target out of unambiguous window at {spec.axis} = {result.out_of_window()}")
    click.echo(f"Done! Results saved to: {path}")


if __name__ == "__main__":
    main()
