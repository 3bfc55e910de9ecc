"""
Command pipelines

Each cmd_* function computes one subcommand's artifacts and hands them to an
OutputWriter. run_command wraps a pipeline: it owns the writer, converts
library errors into an error report plus exit code, and writes run.json.
"""

import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional

from src.algebra.degree import NEG_INF, format_degree
from src.algebra.field import FieldSpec
from src.algebra.laurent import LaurentVector
from src.algebra.text import format_vector, parse_vector
from src.cantor.approximation import best_approx_table, builtin_point, verify_exact_membership
from src.cantor.construction import build_cantor
from src.config.experiment import VERSION, ExperimentConfig, config_hash
from src.config.settings import settings
from src.dimension.report import box_dimension, dimension_report
from src.dynamics.trajectory import trajectory
from src.exceptions import ApproximationError, UnsatisfiablePredicate, VerificationFailure
from src.services.output_writer import OutputWriter
from src.template.schedule import default_t0, preset_constants, schedule_document, validate_schedule
from src.template.template import build_template, template_rows

logger = logging.getLogger(__name__)

EXIT_OK = 0


def load_points(path: str, field_spec: FieldSpec) -> List[LaurentVector]:
    """One point per non-empty line in the text grammar; '#' starts a comment."""
    file = Path(path)
    if not file.exists():
        raise FileNotFoundError(f"point file not found: {path}")
    points = []
    with open(file, "r") as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                points.append(parse_vector(line, field_spec))
    if not points:
        raise ValueError(f"no points in {path}")
    return points


def resolve_point(
    config: ExperimentConfig,
    x: Optional[str] = None,
    builtin: Optional[str] = None,
    point_file: Optional[str] = None,
    floor=NEG_INF,
) -> LaurentVector:
    """
    The point a command works on: a literal, the first point of a file, or a builtin

    Builtins other than 'zero' are truncated at `floor`.
    """
    field_spec = config.field.spec()
    n = config.psi.n
    if sum(v is not None for v in (x, builtin, point_file)) != 1:
        raise ValueError("give exactly one of --x, --builtin, --point")
    if x is not None:
        point = parse_vector(x, field_spec)
    elif point_file is not None:
        point = load_points(point_file, field_spec)[0]
    else:
        point = builtin_point(builtin, n=n, floor=floor, field_spec=field_spec, seed=config.construction.seed)
    if point.n != n:
        raise ValueError(f"point has {point.n} coordinates, config has n={n}")
    return point


def _default_h0(config: ExperimentConfig) -> int:
    """ceil((n+1) t0 / s): heights below it correspond to times before t0."""
    if config.verification.h0 is not None:
        return config.verification.h0
    psi = config.psi.build()
    _, M = preset_constants(config.constants.preset, psi, config.constants.overrides())
    M = config.constants.M or M
    t0 = config.schedule.t0 if config.schedule.t0 is not None else default_t0(psi, M)
    return math.ceil(Fraction((psi.n + 1) * t0) / psi.s)


def cmd_trajectory(config: ExperimentConfig, writer: OutputWriter, x: LaurentVector, horizon: int) -> Dict:
    """Trajectory CSV (t, c_x, r_psi, T) and the slack summary."""
    psi = config.psi.build()
    traj = trajectory(x, 0, horizon, witnesses=True, show_progress=settings.SHOW_PROGRESS)
    template = None
    try:
        schedule = config.build_schedule()
        end = max(Fraction(horizon), schedule.epochs[-1].t_plus_template)
        template = build_template(schedule, horizon=end)
    except UnsatisfiablePredicate as e:
        logger.warning(f"No template for this config: {e}")
    writer.write_csv(
        "trajectory.csv", traj.rows(psi, template),
        columns=["t", "c_x", "r_psi_num", "r_psi_den", "template", "witness"],
    )
    summary = traj.slack_summary(psi)
    summary.update({"x": format_vector(x), "horizon": horizon})
    writer.write_json("trajectory_summary.json", summary)
    return summary


def cmd_template(config: ExperimentConfig, writer: OutputWriter) -> Dict:
    schedule = config.build_schedule()
    template = build_template(schedule, horizon=config.schedule.horizon)
    rows = template_rows(template, schedule.psi)
    writer.write_csv("template.csv", rows, columns=["t", "T", "r_psi"])
    return {"breakpoints": len(rows), "horizon": format_degree(template.horizon)}


def cmd_schedule(config: ExperimentConfig, writer: OutputWriter) -> Dict:
    schedule = config.build_schedule()
    document = schedule_document(schedule)
    writer.write_json("schedule.json", document)
    failed = [p for p in validate_schedule(schedule) if not p.holds]
    if failed:
        raise UnsatisfiablePredicate(failed[0].name, failed[0].epoch, failed[0].detail)
    return {"K": schedule.K, "last_level": schedule.last_level, "t": [e.t for e in schedule.epochs]}


def cmd_construct(config: ExperimentConfig, writer: OutputWriter) -> Dict:
    """
    Build the tree, verify leaves, extract points and report dimensions

    Raises:
        UnsatisfiablePredicate: no schedule
        VerificationFailure: a construction inequality failed, or after the
            report is written, a Case-1 level kept fewer children than the
            branching threshold
    """
    schedule = config.build_schedule()
    writer.write_json("schedule.json", schedule_document(schedule))
    c = config.construction
    try:
        tree = build_cantor(
            schedule,
            depth=c.depth,
            seed=c.seed,
            width=c.width,
            fallback_depth=c.fallback_depth,
            threads=c.threads,
            verify=c.verify_leaves > 0,
            verify_leaves=c.verify_leaves,
            field_spec=config.field.spec(),
            show_progress=settings.SHOW_PROGRESS,
        )
    except ApproximationError as e:
        logger.error(f"Construction failed: {e}")
        raise
    writer.write_json("tree_manifest.json", tree.manifest())
    writer.write_text("points.txt", "".join(f"{format_vector(leaf.as_vector())}\n" for leaf in tree.leaves))
    report = dimension_report(tree)
    payload = report.to_dict()
    try:
        leaf_box = box_dimension([leaf.as_vector() for leaf in tree.leaves])
    except ValueError as e:
        logger.warning(f"No box count of the extracted points: {e}")
        leaf_box = None
    payload["point_box_counting"] = leaf_box.to_dict() if leaf_box else None
    writer.write_json("dimension.json", payload)
    writer.write_csv("levels.csv", report.level_rows(), columns=["l", "b_l", "alpha_l", "alpha_l_approx"])
    if report.box is not None:
        writer.write_csv("box_counts.csv", report.box.rows(), columns=["m", "log_q_count"])
    if leaf_box is not None:
        writer.write_csv("point_box_counts.csv", leaf_box.rows(), columns=["m", "log_q_count"])
    failed = next((b for b in report.branching if not b.holds), None)
    if failed is not None:
        raise VerificationFailure(
            "branching", epoch=schedule.epoch_at_level(failed.level)[0], level=failed.level,
            detail=f"{failed.min_included} children kept, threshold {failed.threshold}",
        )
    return {
        "leaves": len(tree.leaves),
        "witnesses": len(tree.witnesses),
        "checks": len(tree.verification),
        "final_alpha": report.final_alpha.ratio.text() if report.final_alpha else None,
    }


def cmd_verify(config: ExperimentConfig, writer: OutputWriter, x: LaurentVector) -> Dict:
    """
    Exact(psi) verdict with evidence

    Raises:
        VerificationFailure: after the report is written, when the verdict is negative
    """
    psi = config.psi.build()
    v = config.verification
    min_equalities = v.min_equalities if v.min_equalities is not None else config.schedule.K
    verdict = verify_exact_membership(
        x, psi, d_max=v.d_max, h0=_default_h0(config), min_equalities=min_equalities,
        method=v.method, budget=settings.BEST_APPROX_BUDGET,
    )
    writer.write_json("verdict.json", {"x": format_vector(x), **verdict.to_dict()})
    if not verdict.holds:
        clause = "lower bound" if not verdict.clause_lower_bound else "equalities"
        raise VerificationFailure(f"exact approximation ({clause})", detail=verdict.summary())
    return {"holds": True, "equality_heights": verdict.equality_heights}


def cmd_bestapprox(config: ExperimentConfig, writer: OutputWriter, x: LaurentVector, d_max: int) -> Dict:
    table = best_approx_table(x, d_max, budget=settings.BEST_APPROX_BUDGET, strict=False,
                              method="table" if config.verification.method == "table" else "auto")
    writer.write_csv("best_approx.csv", table.rows(), columns=["d", "min_dist_exponent", "certified", "g", "f"])
    return {"method": table.method, "d_max": d_max,
            "uncertified": [e.d for e in table.entries if not e.certified]}


def cmd_dimension(config: ExperimentConfig, writer: OutputWriter, point_file: Optional[str] = None) -> Dict:
    """Dimension report of an unverified construction, plus a box count of a point file when given."""
    schedule = config.build_schedule()
    c = config.construction
    tree = build_cantor(
        schedule, depth=c.depth, seed=c.seed, width=c.width, fallback_depth=c.fallback_depth,
        threads=c.threads, verify=False, field_spec=config.field.spec(), show_progress=settings.SHOW_PROGRESS,
    )
    report = dimension_report(tree)
    payload = report.to_dict()
    if point_file is not None:
        points = load_points(point_file, config.field.spec())
        estimate = box_dimension(points)
        writer.write_csv("point_box_counts.csv", estimate.rows(), columns=["m", "log_q_count"])
        payload["point_box_counting"] = estimate.to_dict()
    writer.write_json("dimension.json", payload)
    writer.write_csv("levels.csv", report.level_rows(), columns=["l", "b_l", "alpha_l", "alpha_l_approx"])
    return {"final_alpha": payload["final_alpha"], "target": payload["target"]}


def run_command(command: str, config: ExperimentConfig, body: Callable[[OutputWriter], Dict]) -> int:
    """
    Run one pipeline with its own output directory

    Returns:
        Process exit code: 0, or the exit code of the library error raised
    """
    digest = config_hash(config)
    writer = OutputWriter(config.output_dir or settings.OUTPUT_DIR, command, digest, VERSION)
    document = config.model_dump(mode="json")
    try:
        summary = body(writer)
    except ApproximationError as e:
        logger.error(f"{command} failed: {e}")
        writer.write_json("error.json", {"error": type(e).__name__, "message": str(e), "exit_code": e.exit_code})
        writer.finish("failed", e.exit_code, document)
        return e.exit_code
    writer.finish("ok", EXIT_OK, document, summary)
    return EXIT_OK
