"""Size-cap handling for level enumerations and per-level arrays.

Everything that materialises a full tree level goes through
:func:`check_level_size` so that an accidental ``m**n`` blow-up fails fast
with a clear message instead of exhausting memory.  The default cap of
``2**31`` values can be overridden per call or globally through the
``PHTREE_SIZE_CAP`` environment variable.
"""

from __future__ import annotations

import os

from .errors import CapacityError, ValidationError

DEFAULT_SIZE_CAP = 2**31

_ENV_VAR = "PHTREE_SIZE_CAP"


def size_cap(override: int | None = None) -> int:
    """Resolve the active size cap: explicit override, else env var, else default."""
    if override is not None:
        if override < 1:
            raise ValidationError(f"size cap must be positive, got {override}")
        return int(override)
    env = os.environ.get(_ENV_VAR)
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ValidationError(f"{_ENV_VAR} must be an integer, got {env!r}") from exc
        if value < 1:
            raise ValidationError(f"{_ENV_VAR} must be positive, got {value}")
        return value
    return DEFAULT_SIZE_CAP


def check_level_size(m: int, k: int, cap: int | None = None) -> int:
    """Return ``m**k`` if it fits under the cap, else raise CapacityError."""
    active = size_cap(cap)
    count = m**k
    if count > active:
        raise CapacityError(
            f"level {k} of the {m}-branching tree has {count} vertices, "
            f"exceeding the size cap of {active} (set {_ENV_VAR} to raise it)"
        )
    return count
