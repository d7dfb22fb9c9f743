__module_name__ = "config"

"""
Run manifest files: INI-style text with one section per RunManifest section.

    [benchmark]
    name = elliptic
    nu =
    [grid]
    shape = 35,35
    ...

Empty values mean "unset" (benchmark default); lists are comma-separated and
floats are written with ``repr`` so that reading a written manifest gives
back an equal one.
"""

import configparser
import io
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from backend.config import (
    SECTION_NAMES,
    RunManifest,
    build_manifest,
    get_run_manifest_config,
    merge_sections,
)
from backend.exceptions import ConfigurationError, ManifestError

logger = logging.getLogger(__name__)

Overrides = Mapping[str, Mapping[str, Any]]


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_manifest(manifest: RunManifest) -> str:
    """Serialize a manifest to INI text."""
    parser = configparser.ConfigParser(interpolation=None)
    for section, fields in manifest.model_dump().items():
        parser[section] = {name: _format_value(v) for name, v in fields.items()}
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()


def parse_manifest(text: str, source: str = "<string>") -> RunManifest:
    """
    Parse INI text into a validated manifest.

    Raises:
        ManifestError: malformed text, unknown sections or invalid values;
            the error names the offending field as ``section.field``
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ManifestError(f"{source}: {e}") from e

    data: Dict[str, Dict[str, str]] = {}
    for section in parser.sections():
        if section not in SECTION_NAMES:
            raise ManifestError(f"{source}: unknown section [{section}]", section)
        data[section] = dict(parser[section])
    return build_manifest(data)


def load_manifest(path: Union[str, Path]) -> RunManifest:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    logger.info(f"{__module_name__} - Loading manifest from {path}")
    return parse_manifest(path.read_text(encoding="utf-8"), source=str(path))


def write_manifest(manifest: RunManifest, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_manifest(manifest), encoding="utf-8")
    return path


def resolve_manifest(
    config_path: Optional[Union[str, Path]] = None,
    cli_overrides: Optional[Overrides] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunManifest:
    """
    Layer the manifest sources, lowest precedence first: model defaults,
    the config file, ``KRONSOLVE_<SECTION>__<FIELD>`` variables, CLI flags.
    Benchmark defaults fill whatever is still unset when the run is prepared.
    """
    manifest = load_manifest(config_path) if config_path else RunManifest()
    manifest = get_run_manifest_config(manifest, environ)
    if cli_overrides:
        manifest = merge_sections(manifest, cli_overrides)
    return manifest


__all__ = [
    "emit_manifest",
    "parse_manifest",
    "load_manifest",
    "write_manifest",
    "resolve_manifest",
]
