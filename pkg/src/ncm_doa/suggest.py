"""Fuzzy "did you mean" hints for unknown names."""

import logging
from collections.abc import Iterable

logger = logging.getLogger(__name__)


def closest(query: str, choices: Iterable[str], *, threshold: int = 60) -> str | None:
    """Return the registered name closest to ``query``.

    Args:
        query: Name that failed to resolve.
        choices: Registered names.
        threshold: Minimum fuzzy score (0-100).

    Returns:
        str | None: Best match above the threshold, or None.

    Raises:
        ImportError: If rapidfuzz is not installed.
    """
    try:
        from rapidfuzz import fuzz, process
    except ImportError:
        raise ImportError(
            "Suggestions require rapidfuzz as additional dependency. "
            "Please install extra -> ncm-doa[suggest]"
        )

    match = process.extractOne(
        query, list(choices), scorer=fuzz.WRatio, score_cutoff=threshold
    )
    return match[0] if match else None


def did_you_mean(query: str, choices: Iterable[str]) -> str:
    """Format a hint sentence for an error message, or an empty string."""
    choices = list(choices)
    try:
        match = closest(query, choices)
    except ImportError as e:
        logger.debug(f"No suggestion for {query!r}: {e}")
        match = None
    if match is None:
        return f" Known names: {', '.join(sorted(choices))}."
    return f" Did you mean {match!r}?"


__all__ = ["closest", "did_you_mean"]
