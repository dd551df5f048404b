from pathlib import Path

from assembly.errors import HarnessError
from settings import get_settings


def under_results_root(requested: str) -> Path:
    """Resolve a client path against the results root, refusing anything outside it."""
    root = get_settings().results_root.resolve()
    path = (root / requested).resolve()
    if not path.is_relative_to(root):
        raise HarnessError("PATH_FORBIDDEN", f"{requested} is outside the results root")
    return path
