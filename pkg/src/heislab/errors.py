"""Exception taxonomy shared by the library and the CLI exit codes."""


class ValidationError(ValueError):
    """Malformed or out-of-contract input (CLI exit code 2)."""


class ResourceCapError(RuntimeError):
    """A computation refused to exceed its memory budget (CLI exit code 3)."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its cap without converging (CLI exit code 4)."""
