# -*- coding: utf-8 -*-
"""
Index-range partitioning with an ordered, partition independent reduction
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence, Tuple

from .settings import settings

__all__ = ("blocks", "partition", "map_blocks", "fsum_complex")

logger = logging.getLogger(__file__)

Span = Tuple[int, int]


def blocks(total: int, block: int | None = None) -> List[Span]:
    """fixed-size [lo, hi) spans covering range(total)"""
    block = block or settings.int("KERNEX_BLOCK_SIZE")
    return [(lo, min(lo + block, total)) for lo in range(0, total, block)]


def partition(spans: Sequence[Span], parts: int) -> List[List[Span]]:
    """split spans into at most `parts` contiguous groups"""
    parts = max(1, min(parts, len(spans) or 1))
    size = math.ceil(len(spans) / parts) if spans else 0
    return [list(spans[i : i + size]) for i in range(0, len(spans), size or 1)]


def _run_group(func: Callable[[int, int], Any], group: Sequence[Span]) -> List[Any]:
    return [func(lo, hi) for lo, hi in group]


def map_blocks(
    func: Callable[[int, int], Any],
    total: int,
    block: int | None = None,
    workers: int | None = None,
    parts: int | None = None,
) -> List[Any]:
    """
    Evaluate func on every block of range(total), results in block order

    The block grid does not depend on workers or parts, so any reduction over the
    returned list is the same however the work was distributed.
    :param func: picklable callable (lo, hi) -> partial result
    :param total: size of the index space
    :param block: block size, KERNEX_BLOCK_SIZE by default
    :param workers: process count, KERNEX_WORKERS by default
    :param parts: number of contiguous groups (defaults to workers)
    """
    spans = blocks(total, block)
    workers = workers or settings.int("KERNEX_WORKERS")
    groups = partition(spans, parts or workers)
    logger.debug(f"{total} terms in {len(spans)} blocks, {len(groups)} groups, {workers} workers")
    if workers <= 1:
        results = [_run_group(func, group) for group in groups]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_group, [func] * len(groups), groups))
    return [item for group in results for item in group]


def fsum_complex(values) -> complex:
    """correctly rounded complex sum, independent of summation order"""
    values = list(values)
    return complex(
        math.fsum(v.real for v in values), math.fsum(v.imag for v in values)
    )
