"""
Experiment configuration: sectioned ``key = value`` files validated into frozen models.

    [lattice]   d, N, L, metric (flat or bump)
    [time]      cfl or dt, steps
    [run]       degrees, suites, seed, modes, n_max
    [tolerances] overrides of the named defaults
"""
import configparser
import logging
import re
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import ConfigError

logger = logging.getLogger(__name__)

SUITES = ("identities", "evolution", "green", "gauge", "phase", "quantum", "appendix")
SECTIONS = ("lattice", "time", "run", "tolerances")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LatticeSection(_Section):
    d: int = Field(1, ge=1, le=3)
    N: int = Field(8, ge=2, le=32)
    L: float = Field(1.0, gt=0)
    metric: Literal["flat", "bump"] = "flat"


class TimeSection(_Section):
    cfl: Optional[float] = Field(None, gt=0, le=1.8)
    dt: Optional[float] = Field(None, gt=0)
    steps: int = Field(64, ge=2)

    @model_validator(mode="after")
    def _one_step_rule(self):
        if self.cfl is not None and self.dt is not None:
            raise ValueError("give either cfl or dt, not both")
        return self

    @property
    def cfl_fraction(self):
        return 0.5 if self.cfl is None and self.dt is None else self.cfl


class RunSection(_Section):
    degrees: tuple[int, ...] = (1,)
    suites: tuple[str, ...] = ("all",)
    seed: int = Field(0, ge=0)
    modes: int = Field(2, ge=1, le=3)
    n_max: int = Field(6, ge=2, le=6)

    @field_validator("degrees", "suites", mode="before")
    @classmethod
    def _split(cls, value):
        if isinstance(value, str):
            return tuple(item.strip() for item in value.split(",") if item.strip())
        return value

    @field_validator("suites")
    @classmethod
    def _known_suites(cls, value):
        unknown = [s for s in value if s != "all" and s not in SUITES]
        if unknown:
            raise ValueError(f"unknown suite(s) {unknown}, expected any of {('all',) + SUITES}")
        return value

    def selected_suites(self):
        if "all" in self.suites:
            return SUITES
        return tuple(s for s in SUITES if s in self.suites)


class TolerancesSection(_Section):
    identity: float = Field(1e-12, gt=0)
    green_commutation: float = Field(1e-10, gt=0)
    exact_identity: float = Field(1e-9, gt=0)
    energy_drift: float = Field(1e-8, gt=0)
    convergence_order: float = Field(0.2, gt=0)
    lorenz: float = Field(1e-6, gt=0)
    gauge: float = Field(1e-6, gt=0)
    field_invariance: float = Field(1e-10, gt=0)
    symplectic: float = Field(1e-6, gt=0)
    degeneracy: float = Field(1e-10, gt=0)
    pairing: float = Field(5e-3, gt=0)
    spacelike: float = Field(1e-8, gt=0)
    quantum_structure: float = Field(1e-12, gt=0)
    saturation: float = Field(1e-8, gt=0)
    ccr: float = Field(5e-3, gt=0)
    weyl: float = Field(1e-6, gt=0)
    weak_maxwell: float = Field(1e-6, gt=0)
    appendix: float = Field(1e-6, gt=0)


class ExperimentConfig(_Section):
    lattice: LatticeSection = LatticeSection()
    time: TimeSection = TimeSection()
    run: RunSection = RunSection()
    tolerances: TolerancesSection = TolerancesSection()

    @model_validator(mode="after")
    def _degrees_fit(self):
        bad = [p for p in self.run.degrees if not 0 <= p <= self.lattice.d]
        if bad:
            raise ValueError(f"degrees {bad} outside 0..{self.lattice.d}")
        return self

    def echo(self):
        return self.model_dump(mode="json")


def _key_line(text, section, key):
    """Line number of ``key`` inside ``[section]``, or of the section header."""
    current, header = None, None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        match = re.match(r"^\[(.+)\]$", stripped)
        if match:
            current = match.group(1).strip()
            if current == section:
                header = number
            continue
        if current == section and key is not None and re.match(rf"^{re.escape(str(key))}\s*[=:]", stripped):
            return number
    return header


def _parse(text, source):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line) from exc
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ConfigError(exc.message, exc.lineno) from exc
    data = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}], expected one of {SECTIONS}", _key_line(text, section, None))
        data[section] = dict(parser.items(section))
    return data


def load_config(path=None, overrides=None):
    """Read and validate a config file; ``overrides`` maps (section, key) to a value.

    Without a path the defaults are used.
    """
    text = Path(path).read_text() if path is not None else ""
    data = _parse(text, str(path) if path else "<defaults>")
    for (section, key), value in (overrides or {}).items():
        if value is not None:
            data.setdefault(section, {})[key] = value
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = [str(part) for part in error["loc"]]
        section = loc[0] if loc else None
        key = loc[1] if len(loc) > 1 else None
        where = ".".join(loc) if loc else "config"
        line = _key_line(text, section, key) if section else None
        raise ConfigError(f"{where}: {error['msg']}", line) from exc
    logger.debug("config loaded from %s: %s", path or "defaults", config.echo())
    return config
