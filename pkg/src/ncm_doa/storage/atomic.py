"""Atomic file replacement.

Every artifact the library writes goes through :func:`atomic_path`, which
hands out a temporary file in the destination directory and moves it into
place only when the write finished without raising.
"""

import logging
import os
import tempfile
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

logger = logging.getLogger(__name__)


@contextmanager
def atomic_path(path: Path) -> Iterator[Path]:
    """Yield a temporary sibling of ``path`` and rename it over ``path`` on success.

    Args:
        path: Final destination. Parent directories are created.

    Yields:
        Path: Temporary path with the same suffix as ``path``.

    Raises:
        OSError: If the directory cannot be created or the rename fails.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.stem}.", suffix=path.suffix
    )
    os.close(fd)
    temporary = Path(name)
    try:
        yield temporary
        os.replace(temporary, path)
        logger.debug(f"Wrote {path}")
    finally:
        if temporary.exists():
            temporary.unlink()


__all__ = ["atomic_path"]
