import logging
import sys
from typing import Optional

import click

from src.algebra.degree import NEG_INF
from src.config.experiment import load_config
from src.config.settings import settings
from src.services import pipeline

# Configure logging
environment = settings.NODE_ENV
LOG_LEVEL = logging.DEBUG if environment == "development" else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)

# Configure root logger
root_logger = logging.getLogger()
root_logger.setLevel(LOG_LEVEL)

# Create handler with formatter
handler = logging.StreamHandler()
formatter = logging.Formatter(
    '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
handler.setFormatter(formatter)
root_logger.addHandler(handler)

# Add file handler for production
if environment == "production" or settings.LOG_FILE:
    file_handler = logging.FileHandler(settings.LOG_FILE or "app.log")
    file_handler.setFormatter(formatter)
    root_logger.addHandler(file_handler)

# Reduce third-party noise
logging.getLogger("numpy").setLevel(logging.WARNING)
logging.getLogger("matplotlib").setLevel(logging.WARNING)

logger = logging.getLogger(__name__)


def _config(ctx: click.Context):
    """Experiment config from the shared options; flags win over the document."""
    opts = ctx.obj
    overrides = {
        "output_dir": opts["out"],
        "construction.seed": opts["seed"],
        "construction.threads": opts["threads"],
    }
    try:
        return load_config(opts["config"], opts["preset"], overrides)
    except (ValueError, FileNotFoundError) as e:
        raise click.ClickException(str(e))


def _point(config, x_text, builtin, point_file, floor):
    try:
        return pipeline.resolve_point(config, x_text, builtin, point_file, floor)
    except (ValueError, FileNotFoundError) as e:
        raise click.ClickException(str(e))


def _finish(code: int):
    if code:
        logger.error(f"Exiting with code {code}")
    sys.exit(code)


def _point_options(f):
    f = click.option("--x", "x_text", default=None, help="Point literal, coordinates separated by ';'")(f)
    f = click.option("--builtin", type=click.Choice(["zero", "xstar", "random"]), default=None,
                     help="Named point")(f)
    f = click.option("--point", "point_file", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="File with one point per line (the first is used)")(f)
    f = click.option("--precision", type=int, default=None,
                     help="Precision floor for builtins (negative exponent)")(f)
    return f


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Experiment document (JSON)")
@click.option("--preset", type=click.Choice(["paper", "desk"]), default=None, help="Constants preset")
@click.option("--out", default=None, help="Output directory")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Frontier chooser seed")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads")
@click.pass_context
def cli(ctx, config_path: Optional[str], preset: Optional[str], out: Optional[str],
        seed: Optional[int], threads: Optional[int]):
    """Exactly psi-approximable points over F_q((1/X)): trajectories, schedules and Cantor constructions."""
    settings.validate_required_fields()
    ctx.ensure_object(dict)
    ctx.obj.update({
        "config": config_path,
        "preset": preset or (None if config_path else settings.DEFAULT_PRESET),
        "out": out,
        "seed": seed if seed is not None else (None if config_path else settings.DEFAULT_SEED),
        "threads": threads if threads is not None else (None if config_path else settings.MAX_THREADS),
    })


@cli.command()
@_point_options
@click.option("--horizon", type=click.IntRange(min=0), default=None, help="Last flow time")
@click.pass_context
def trajectory(ctx, x_text, builtin, point_file, precision, horizon):
    """Write c_x(t) against r_psi(t) and the template."""
    config = _config(ctx)
    horizon = horizon if horizon is not None else (config.schedule.horizon or 30)
    floor = precision if precision is not None else -(config.psi.n + 1) * horizon
    x = _point(config, x_text, builtin, point_file, floor)
    _finish(pipeline.run_command("trajectory", config, lambda w: pipeline.cmd_trajectory(config, w, x, horizon)))


@cli.command()
@click.pass_context
def template(ctx):
    """Write the template breakpoints."""
    config = _config(ctx)
    _finish(pipeline.run_command("template", config, lambda w: pipeline.cmd_template(config, w)))


@cli.command()
@click.pass_context
def schedule(ctx):
    """Choose and validate the epoch schedule."""
    config = _config(ctx)
    _finish(pipeline.run_command("schedule", config, lambda w: pipeline.cmd_schedule(config, w)))


@cli.command()
@click.option("--depth", type=click.IntRange(min=0), default=None, help="Last level (default l_K^+)")
@click.pass_context
def construct(ctx, depth):
    """Build the Cantor tree, verify it and report dimensions."""
    config = _config(ctx)
    if depth is not None:
        config.construction.depth = depth
    _finish(pipeline.run_command("construct", config, lambda w: pipeline.cmd_construct(config, w)))


@cli.command()
@_point_options
@click.option("--d-max", type=click.IntRange(min=0), default=None, help="Largest height checked")
@click.pass_context
def verify(ctx, x_text, builtin, point_file, precision, d_max):
    """Decide exact psi-approximability on a finite height range."""
    config = _config(ctx)
    if d_max is not None:
        config.verification.d_max = d_max
    floor = precision if precision is not None else -64
    x = _point(config, x_text, builtin, point_file, floor)
    if x.floor is NEG_INF and config.verification.d_max is None:
        raise click.ClickException("exact points need --d-max")
    _finish(pipeline.run_command("verify", config, lambda w: pipeline.cmd_verify(config, w, x)))


@cli.command()
@_point_options
@click.option("--d-max", type=click.IntRange(min=0), required=True, help="Largest denominator degree")
@click.pass_context
def bestapprox(ctx, x_text, builtin, point_file, precision, d_max):
    """Write the best-approximation table."""
    config = _config(ctx)
    floor = precision if precision is not None else -(2 * d_max + 2)
    x = _point(config, x_text, builtin, point_file, floor)
    _finish(pipeline.run_command("bestapprox", config, lambda w: pipeline.cmd_bestapprox(config, w, x, d_max)))


@cli.command()
@click.option("--depth", type=click.IntRange(min=0), default=None, help="Last level (default l_K^+)")
@click.option("--point", "point_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Points to box-count in addition to the level counts")
@click.pass_context
def dimension(ctx, depth, point_file):
    """Branching counts, mass-distribution exponents and box-counting slopes."""
    config = _config(ctx)
    if depth is not None:
        config.construction.depth = depth
    _finish(pipeline.run_command("dimension", config, lambda w: pipeline.cmd_dimension(config, w, point_file)))


if __name__ == "__main__":
    cli(obj={})
