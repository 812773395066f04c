"""Operation counters for verifying search and preprocessing cost.

Detector code calls :func:`tally` at the points that matter (inner products,
candidate evaluations, slicing). Nothing is recorded unless a caller has
opened a :func:`count_ops` scope, so the production path pays one context
variable lookup per call site.
"""

from __future__ import annotations

import contextlib
import contextvars
from collections import Counter
from collections.abc import Iterator

_active: contextvars.ContextVar[Counter | None] = contextvars.ContextVar(
    "lordmimo_op_counter", default=None
)


def tally(name: str, amount: int = 1) -> None:
    counter = _active.get()
    if counter is not None:
        counter[name] += int(amount)


@contextlib.contextmanager
def count_ops() -> Iterator[Counter]:
    """Record operation counts for the duration of the ``with`` block.

    Example:
        >>> with count_ops() as ops:
        ...     lord_hard(model, qam16)
        >>> ops["candidates"]
        16
    """
    counter: Counter = Counter()
    token = _active.set(counter)
    try:
        yield counter
    finally:
        _active.reset(token)
