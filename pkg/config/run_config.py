"""
INI run configurations: parsing, command-line overrides, validation and
canonical re-serialization.

    [source]
    a0 = 10
    r0 = 5
    x0 = 20

    [waveguide]
    n0 = 1.5
    omega = 0.007
    lambda = 0.63
"""

import configparser
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

from pydantic import BaseModel, ValidationError

from models import RunConfig, SECTION_ORDER
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def _new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep I0 and lambda as written
    return parser


def _section_fields(section: str) -> set:
    model = RunConfig.model_fields[section].annotation
    names = set()
    for name, field in model.model_fields.items():
        names.add(name)
        if field.alias:
            names.add(field.alias)
    return names


def apply_overrides(parser: configparser.ConfigParser, overrides: Optional[Iterable[str]]) -> None:
    """
    Apply 'section.key=value' overrides in order.

    Raises:
        ConfigError: malformed override
    """
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"Override '{item}' must look like section.key=value")
        target, value = item.split("=", 1)
        if "." not in target:
            raise ConfigError(f"Override '{item}' must name a section, e.g. source.a0=10")
        section, key = (part.strip() for part in target.split(".", 1))
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value.strip())


def _to_mapping(parser: configparser.ConfigParser) -> Dict[str, Dict[str, str]]:
    mapping: Dict[str, Dict[str, str]] = {}
    for section in parser.sections():
        if section not in SECTION_ORDER:
            raise ConfigError(f"Unknown section [{section}] (expected one of: {', '.join(SECTION_ORDER)})")
        known = _section_fields(section)
        values = dict(parser.items(section))
        for key in values:
            if key not in known:
                raise ConfigError(f"{section}.{key}: unknown key")
        mapping[section] = values
    return mapping


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        field = ".".join(str(loc) for loc in item["loc"])
        parts.append(f"{field}: {item['msg']}")
    return "; ".join(parts)


def parse_run_config(text: str, overrides: Optional[Iterable[str]] = None, origin: str = "<string>") -> RunConfig:
    """
    Parse INI text into a validated RunConfig.

    Raises:
        ConfigError: syntax errors, unknown sections/keys or invalid values;
            the message names the offending field
    """
    parser = _new_parser()
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as e:
        raise ConfigError(f"{origin}: {e}") from e

    apply_overrides(parser, overrides)
    mapping = _to_mapping(parser)

    try:
        return RunConfig.model_validate(mapping)
    except ValidationError as e:
        raise ConfigError(_validation_message(e)) from e


def load_run_config(path: Union[str, Path], overrides: Optional[Iterable[str]] = None) -> RunConfig:
    """Read and validate a run configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    config = parse_run_config(path.read_text(encoding="utf-8"), overrides, origin=str(path))
    logger.debug(f"Loaded run config from {path}")
    return config


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def dump_run_config(config: RunConfig) -> str:
    """Canonical INI text; parse_run_config(dump_run_config(c)) == c."""
    lines = []
    for section in SECTION_ORDER:
        block: BaseModel = getattr(config, section)
        lines.append(f"[{section}]")
        for key, value in block.model_dump(by_alias=True).items():
            lines.append(f"{key} = {_format(value)}")
        lines.append("")
    return "\n".join(lines)


__all__ = [
    "apply_overrides",
    "parse_run_config",
    "load_run_config",
    "dump_run_config",
]
