"""Worker pool shared by the experiments.

The pool size comes from ``TMK_THREADS`` (default 1) unless overridden with
:func:`set_threads`.  Results are always returned in input order, so
reductions over them are deterministic whatever the pool size.
"""

import os
from concurrent.futures import ThreadPoolExecutor

_threads = None


def threads() -> int:
    if _threads is not None:
        return _threads
    try:
        return max(1, int(os.environ.get("TMK_THREADS", "1")))
    except ValueError:
        return 1


def set_threads(n) -> None:
    global _threads
    _threads = None if n is None else max(1, int(n))


def pmap(fn, items):
    """Ordered map over ``items``; threaded when more than one worker is configured."""
    items = list(items)
    nt = threads()
    if nt == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(nt, len(items))) as ex:
        return list(ex.map(fn, items))
