# -*- coding: utf-8 -*-
import pytest

from kernex.parallel import blocks, fsum_complex, map_blocks, partition


def span_sum(lo: int, hi: int) -> int:
    return sum(range(lo, hi))


def test_blocks(monkeypatch):
    assert blocks(10, 4) == [(0, 4), (4, 8), (8, 10)]
    assert blocks(0, 4) == []
    monkeypatch.setenv("KERNEX_BLOCK_SIZE", "5")
    assert blocks(10) == [(0, 5), (5, 10)]


@pytest.mark.parametrize("parts, sizes", [(1, [5]), (2, [3, 2]), (5, [1] * 5), (9, [1] * 5)])
def test_partition(parts, sizes):
    spans = blocks(10, 2)
    groups = partition(spans, parts)
    assert [len(g) for g in groups] == sizes
    assert [s for g in groups for s in g] == spans


def test_map_blocks_order():
    serial = map_blocks(span_sum, 100, block=7, workers=1)
    assert sum(serial) == sum(range(100))
    assert map_blocks(span_sum, 100, block=7, workers=1, parts=4) == serial
    assert map_blocks(span_sum, 100, block=7, workers=2) == serial


def test_fsum_complex():
    values = [1e16 + 1j, 1.0, -1e16 - 1j, 1.0]
    assert fsum_complex(values) == 2.0
    assert fsum_complex(reversed(values)) == 2.0
    assert fsum_complex([]) == 0j
