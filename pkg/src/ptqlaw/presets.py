"""Shipped parameter presets and the key-value parameter file format.

The registry ships as a human-readable text file (``data/presets.txt``). The
same ``key = value`` format, without the section headers, is accepted
anywhere a ``--params-file`` is: a fit report written by this package can be
replayed directly as a prediction source.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import ValidationError
from .model import (
    EXPONENT_FIELDS,
    FACTOR_ORDER,
    ScalingLawParams,
    mask_to_text,
    parse_mask,
)

#: Keys holding the model constants, in canonical write order.
_PARAM_KEYS = ("task", "mask", "c", "alpha", "beta", "gamma", "delta")


@dataclass(frozen=True)
class PresetEntry:
    """A named, shipped fit with a one-line provenance note."""

    name: str
    params: ScalingLawParams
    provenance: str


class PresetRegistry:
    """Read-only name -> fitted-parameters map."""

    def __init__(self, entries: dict[str, PresetEntry]):
        self._entries = dict(entries)

    def names(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def entries(self) -> tuple[PresetEntry, ...]:
        return tuple(self._entries.values())

    def get(self, name: str) -> ScalingLawParams:
        try:
            return self._entries[name].params
        except KeyError:
            available = ", ".join(self.names())
            raise ValidationError(f"unknown preset {name!r}; available: {available}") from None

    def provenance(self, name: str) -> str:
        if name not in self._entries:
            self.get(name)  # raises with the available names
        return self._entries[name].provenance

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)


def _parse_blocks(text: str, source: str) -> list[tuple[str | None, dict[str, str]]]:
    """Split key-value text into (section name, key->value) blocks.

    Lines are ``key = value``; ``#`` starts a comment; ``[name]`` opens a new
    block. Text before the first section header forms an anonymous block.
    """
    blocks: list[tuple[str | None, dict[str, str]]] = []
    current: dict[str, str] = {}
    current_name: str | None = None
    started = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            if started:
                blocks.append((current_name, current))
            current_name = line[1:-1].strip()
            if not current_name:
                raise ValidationError(f"{source}:{lineno}: empty section name")
            current = {}
            started = True
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not key:
            raise ValidationError(f"{source}:{lineno}: missing key before '='")
        if key in current:
            raise ValidationError(f"{source}:{lineno}: duplicate key {key!r}")
        current[key] = value
        started = True
    if started:
        blocks.append((current_name, current))
    return blocks


def _params_from_block(block: dict[str, str], source: str) -> ScalingLawParams:
    """Build ScalingLawParams from one key-value block.

    ``c`` is required. The mask defaults to the factors whose exponent keys
    are present. Unknown keys (fit diagnostics, provenance) are ignored so
    that fit reports parse as parameter files.
    """
    if "c" not in block:
        raise ValidationError(f"{source}: missing required key 'c'")
    task = block.get("task", "custom")
    exponents: dict[str, float] = {}
    for factor in FACTOR_ORDER:
        key = EXPONENT_FIELDS[factor]
        if key in block:
            try:
                exponents[key] = float(block[key])
            except ValueError:
                raise ValidationError(f"{source}: {key} is not a number: {block[key]!r}") from None
    if "mask" in block:
        mask = parse_mask(block["mask"])
    else:
        mask = frozenset(f for f in FACTOR_ORDER if EXPONENT_FIELDS[f] in exponents)
    try:
        c = float(block["c"])
    except ValueError:
        raise ValidationError(f"{source}: c is not a number: {block['c']!r}") from None
    return ScalingLawParams(task=task, c=c, mask=mask, **exponents)


def params_to_text(
    params: ScalingLawParams,
    provenance: str | None = None,
    extras: dict[str, object] | None = None,
) -> str:
    """Render parameters in the canonical key-value form.

    Floats are written with ``repr`` so values survive a write/load/write
    cycle byte-identically. Only masked-in exponents are written. ``extras``
    (fit diagnostics and the like) are appended after the model constants.
    """
    lines = []
    if provenance:
        lines.append(f"provenance = {provenance}")
    lines.append(f"task = {params.task}")
    lines.append(f"mask = {mask_to_text(params.mask)}")
    lines.append(f"c = {params.c!r}")
    for factor in params.masked_factors:
        key = EXPONENT_FIELDS[factor]
        lines.append(f"{key} = {params.exponent(factor)!r}")
    for key, value in (extras or {}).items():
        rendered = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def parse_params_text(text: str, source: str = "<params>") -> ScalingLawParams:
    """Parse a single parameter block (a ``--params-file`` payload).

    Accepts either a bare key-value block or exactly one ``[section]``.
    """
    blocks = _parse_blocks(text, source)
    if not blocks:
        raise ValidationError(f"{source}: no parameters found")
    if len(blocks) > 1:
        raise ValidationError(
            f"{source}: expected a single parameter block, found {len(blocks)} sections"
        )
    return _params_from_block(blocks[0][1], source)


def load_params_file(path) -> ScalingLawParams:
    """Load a single-parameter key-value file."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_params_text(handle.read(), source=str(path))


def write_params_file(params: ScalingLawParams, path, provenance: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(params_to_text(params, provenance=provenance))


def registry_text() -> str:
    """Raw text of the shipped registry file."""
    return resources.files("ptqlaw").joinpath("data/presets.txt").read_text(encoding="utf-8")


def _registry_from_text(text: str, source: str) -> PresetRegistry:
    entries: dict[str, PresetEntry] = {}
    for name, block in _parse_blocks(text, source):
        if name is None:
            raise ValidationError(f"{source}: registry entries must have a [name] section")
        if name in entries:
            raise ValidationError(f"{source}: duplicate preset {name!r}")
        params = _params_from_block(block, f"{source}[{name}]")
        entries[name] = PresetEntry(
            name=name, params=params, provenance=block.get("provenance", "")
        )
    if not entries:
        raise ValidationError(f"{source}: registry is empty")
    return PresetRegistry(entries)


_REGISTRY: PresetRegistry | None = None


def load_registry() -> PresetRegistry:
    """The shipped preset registry (parsed once, cached)."""
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _registry_from_text(registry_text(), "presets.txt")
    return _REGISTRY
