from __future__ import annotations

from typing import Generic, Mapping, TypeVar

TValue = TypeVar("TValue")


def normalize_name(value: str) -> str:
    return value.strip().lower().replace("_", "-")


class NameResolver(Generic[TValue]):
    """Map user-facing names (case-insensitive, `_` or `-`, with aliases) onto configured values."""

    def __init__(
        self,
        values: Mapping[str, TValue],
        *,
        aliases: Mapping[str, str] | None = None,
        default_key: str | None = None,
        error_message: str = "Unsupported name: {value} (choices: {choices})",
    ) -> None:
        self._values = dict(values)
        self._aliases = {normalize_name(alias): key for alias, key in (aliases or {}).items()}
        unknown = sorted(key for key in self._aliases.values() if key not in self._values)
        if unknown:
            raise ValueError(f"aliases point at unknown keys: {', '.join(unknown)}")
        if default_key is not None and default_key not in self._values:
            raise ValueError(f"default_key '{default_key}' is not a configured name")
        self._default_key = default_key
        self._error_message = error_message

    def canonical(self, name: str | None) -> str:
        """Canonical key for `name`; None selects the default. Unknown names raise ValueError."""
        if name is None:
            if self._default_key is None:
                raise ValueError("A name is required")
            return self._default_key
        normalized = normalize_name(name)
        key = self._aliases.get(normalized, normalized)
        if key not in self._values:
            raise ValueError(self._error_message.format(value=name, choices=", ".join(sorted(self._values))))
        return key

    def resolve(self, name: str | None) -> TValue:
        return self._values[self.canonical(name)]


__all__ = ["NameResolver", "normalize_name"]
