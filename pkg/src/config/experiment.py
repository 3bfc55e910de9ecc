"""
Experiment documents

A JSON document with nested sections (field, psi, constants, schedule,
construction, verification). Rationals are written as "num/den" strings.
"""

import hashlib
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, field_validator

from src.algebra.degree import as_fraction
from src.algebra.field import FieldSpec
from src.algebra.text import parse_field
from src.config.settings import settings
from src.template.psi import PsiFunction, slope_conditions
from src.template.schedule import Schedule, choose_schedule, fraction_text, preset_constants

logger = logging.getLogger(__name__)

VERSION = "1.0.0"

Rational = Annotated[Fraction, BeforeValidator(as_fraction), PlainSerializer(fraction_text, return_type=str)]


class _Section(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")


class FieldConfig(_Section):
    q: int = 2
    modulus: Optional[str] = None

    def spec(self) -> FieldSpec:
        text = f"q={self.q}" + (f"; modulus={self.modulus}" if self.modulus else "")
        return parse_field(text)


class PsiConfig(_Section):
    n: int = Field(default=1, ge=1)
    s: Rational = Fraction(3)
    family: Literal["power", "affine"] = "power"
    c0: Rational = Fraction(0)

    def build(self) -> PsiFunction:
        return PsiFunction(n=self.n, s=self.s, family=self.family, c0=self.c0)


class ConstantsConfig(_Section):
    preset: Literal["paper", "desk"] = "desk"
    M: Optional[int] = Field(default=None, ge=1)
    R0: Optional[Rational] = None
    R1: Optional[Rational] = None
    R2: Optional[Rational] = None
    R3: Optional[Rational] = None
    C1: Optional[Rational] = None

    def overrides(self) -> Dict[str, Fraction]:
        return {k: getattr(self, k) for k in ("R0", "R1", "R2", "R3", "C1") if getattr(self, k) is not None}


class ScheduleConfig(_Section):
    K: int = Field(default=2, ge=1)
    t0: Optional[int] = None
    t1: Optional[int] = None
    growth: Rational = Fraction(60)
    times: Optional[List[int]] = None
    epsilon: Rational = Fraction(1, 10)
    budget: int = Field(default=32, ge=1)
    horizon: Optional[int] = Field(default=None, ge=0)

    @field_validator("growth")
    @classmethod
    def _growth_above_one(cls, value: Fraction) -> Fraction:
        if value <= 1:
            raise ValueError(f"growth factor must be > 1, got {fraction_text(value)}")
        return value


class ConstructionConfig(_Section):
    depth: Optional[int] = Field(default=None, ge=0)
    seed: int = Field(default=0, ge=0)
    width: int = Field(default_factory=lambda: settings.FRONTIER_WIDTH, ge=1)
    fallback_depth: int = Field(default_factory=lambda: settings.FALLBACK_DEPTH, ge=0)
    threads: int = Field(default=1, ge=1)
    verify_leaves: int = Field(default=1, ge=0)


class VerificationConfig(_Section):
    d_max: Optional[int] = Field(default=None, ge=0)
    h0: Optional[int] = Field(default=None, ge=0)
    min_equalities: Optional[int] = Field(default=None, ge=0)
    method: Literal["auto", "table", "sweep"] = "auto"


class ExperimentConfig(_Section):
    """Everything a run depends on; hashed into every output."""

    name: str = "experiment"
    field: FieldConfig = Field(default_factory=FieldConfig)
    psi: PsiConfig = Field(default_factory=PsiConfig)
    constants: ConstantsConfig = Field(default_factory=ConstantsConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    construction: ConstructionConfig = Field(default_factory=ConstructionConfig)
    verification: VerificationConfig = Field(default_factory=VerificationConfig)
    output_dir: Optional[str] = None

    def build_schedule(self) -> Schedule:
        """
        Validate psi and pick the epoch schedule

        Raises:
            ValueError: psi fails the template slope conditions
            UnsatisfiablePredicate: no schedule meets the predicates
        """
        psi = self.psi.build()
        verdict = slope_conditions(psi)
        if not verdict.holds:
            raise ValueError(f"psi fails the slope condition '{verdict.violation}' at t={verdict.t}: {verdict.detail}")
        constants, M = preset_constants(self.constants.preset, psi, self.constants.overrides())
        if self.constants.M is not None:
            M = self.constants.M
        return choose_schedule(
            psi,
            q=self.field.q,
            M=M,
            constants=constants,
            K=self.schedule.K,
            t1=self.schedule.t1,
            growth=self.schedule.growth,
            times=self.schedule.times,
            t0=self.schedule.t0,
            epsilon=self.schedule.epsilon,
            budget=self.schedule.budget,
        )


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON (sorted keys), first 16 hex digits; output_dir and threads excluded."""
    data = config.model_dump(mode="json", exclude={"output_dir": True, "construction": {"threads"}})
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def load_config(
    path: Optional[str] = None, preset: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Read an experiment document and apply CLI flags

    Args:
        path: JSON document; defaults only when omitted
        preset: Replaces constants.preset
        overrides: Dotted keys ('construction.seed') set after the document

    Raises:
        FileNotFoundError: path does not exist
        pydantic.ValidationError: invalid document
    """
    data: Dict[str, Any] = {}
    if path is not None:
        file = Path(path)
        if not file.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        with open(file, "r") as f:
            data = json.load(f)
        logger.debug(f"Loaded config document {file}")
    if preset is not None:
        data.setdefault("constants", {})["preset"] = preset
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, leaf = key.rpartition(".")
        target = data.setdefault(section, {}) if section else data
        target[leaf] = value
    config = ExperimentConfig.model_validate(data)
    logger.info(f"Experiment '{config.name}' (hash {config_hash(config)}), preset {config.constants.preset}")
    return config