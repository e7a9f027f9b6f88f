"""Error taxonomy shared across the package.

Three failure modes are distinguished so callers (and the CLI) can react
differently: bad caller input, a request outside what a backend can do,
and a request that would exceed the configured resource budget.
"""


class InputError(ValueError):
    """Malformed or out-of-contract input (dimensions, ranges, shapes)."""


class CapabilityError(RuntimeError):
    """The requested backend cannot handle this system; the message names the fallback."""


class ResourceBudgetError(RuntimeError):
    """The request exceeds the configured size/time budget; the message names the cap."""
