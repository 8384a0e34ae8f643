import os
import struct
import sys

import numpy as np
import pytest

# 自动将项目根目录加入路径
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from services.common.errors import BudgetExceededError, InvalidInputError
from services.common.models import Octuple
from services.enumeration.oracle import enumerate_exhaustive, oracle_curvatures
from services.enumeration.service import EnumerationService, enumerate_curvatures, required_bytes
from services.enumeration.table import BITMAP_MAGIC, UINT64_MAX, CurvatureTable
from services.enumeration.traversal import children, exceeds_bound, partition, plan_frontier, root_node

REFERENCE = Octuple(0, 0, 1, 1, 1)
SHIFTED = Octuple(-1, 2, 2, 3, 3)
ORACLE_ROOTS = [
    REFERENCE,
    SHIFTED,
    Octuple(-2, 4, 5, 5, 5),
    Octuple(-2, 3, 6, 7, 7),
    Octuple(-3, 5, 8, 8, 9),
]

# ==========================================
# 曲率表
# ==========================================


def test_table_record_and_contains():
    table = CurvatureTable.empty(10)
    table.record([0, -1, 3, 3, 11, 10])
    assert table.present_values() == [3, 10]
    assert table.nonpositive == {0: 1, -1: 1}
    assert int(table.multiplicity[3]) == 2
    assert table.contains(-1)
    assert not table.contains(11)
    assert table.curvature_set() == {-1, 0, 3, 10}


def test_table_rejects_bad_bound():
    with pytest.raises(InvalidInputError):
        CurvatureTable.empty(0)


def test_table_merge_is_commutative():
    left = CurvatureTable.empty(8)
    right = CurvatureTable.empty(8)
    left.record([1, 2, 2])
    right.record([2, 5, 0])
    one = left.merge(right)
    two = right.merge(left)
    assert np.array_equal(one.present, two.present)
    assert np.array_equal(one.multiplicity, two.multiplicity)
    assert one.present_values() == [1, 2, 5]
    assert int(one.multiplicity[2]) == 3
    assert one.nonpositive == {0: 1}
    with pytest.raises(InvalidInputError):
        left.merge(CurvatureTable.empty(9))


def test_table_counters_saturate():
    left = CurvatureTable.empty(2)
    left.multiplicity[1] = UINT64_MAX - 1
    right = CurvatureTable.empty(2)
    right.record([1, 1, 1])
    merged = left.merge(right)
    assert int(merged.multiplicity[1]) == int(UINT64_MAX)


def test_table_restrict():
    table = CurvatureTable.empty(10)
    table.record([1, 4, 9])
    small = table.restrict(5)
    assert small.bound == 5
    assert small.present_values() == [1, 4]
    with pytest.raises(InvalidInputError):
        table.restrict(20)


def test_bitmap_layout():
    table = CurvatureTable.empty(9)
    table.record([1, 8, 9])
    payload = table.to_bitmap()
    assert payload[:8] == BITMAP_MAGIC
    assert struct.unpack("<Q", payload[8:16]) == (9,)
    # 位 k 对应曲率 k，小端位序
    assert payload[16:] == bytes([0b0000_0010, 0b0000_0011])
    restored = CurvatureTable.from_bitmap(payload)
    assert restored.present_values() == [1, 8, 9]
    with pytest.raises(InvalidInputError):
        CurvatureTable.from_bitmap(b"NOTMAGIC" + payload[8:])


def test_csv_header_and_rows():
    table = CurvatureTable.empty(3)
    table.record([0, 1, 1, 3])
    lines = table.to_csv().splitlines()
    assert lines[0] == "curvature,present,multiplicity"
    assert lines[1:] == ["0,1,1", "1,1,2", "2,0,0", "3,1,1"]


# ==========================================
# 树遍历
# ==========================================


def test_exceeds_bound_matches_real_inequality():
    factor = (3 - 3 ** 0.5) / 2
    for bound in (1, 6, 50, 1000):
        for x in range(1, 4 * bound):
            if abs(factor * x - bound) > 1e-9:
                assert exceeds_bound(x, bound) == (factor * x > bound)


def test_children_of_reference_root():
    node = root_node(REFERENCE)
    assert node == (0, 0, 1, 1, 1)
    result = dict(children(node))
    assert result == {(0, 1, 1, 2, 3): (6, 4, 5, 5), (1, 1, 2, 2, 5): (8, 8, 9, 9)}


def test_partition_round_robin():
    nodes = [(0, 0, 0, 0, k) for k in range(5)]
    parts = partition(nodes, 2)
    assert parts == [[nodes[0], nodes[2], nodes[4]], [nodes[1], nodes[3]]]
    assert partition(nodes[:1], 4) == [[nodes[0]]]


def test_plan_frontier_counts_root():
    plan = plan_frontier(REFERENCE, 100, 0)
    assert plan.frontier == [(0, 0, 1, 1, 1)]
    assert plan.stats.nodes == 1
    assert plan.table.present_values() == [1, 2]


# ==========================================
# 枚举结果
# ==========================================


def test_reference_small_bound():
    table, stats = enumerate_curvatures(REFERENCE, 6)
    assert table.curvature_set() == {0, 1, 2, 4, 5, 6}
    assert not table.contains(3)
    assert stats.nodes >= 2


def test_bound_one_sets_only_bit_one():
    table, _ = enumerate_curvatures(REFERENCE, 1)
    assert table.present_values() == [1]
    assert table.to_bitmap() == BITMAP_MAGIC + struct.pack("<Q", 1) + b"\x02"


def test_scaled_packing_doubles_curvatures():
    base, _ = enumerate_curvatures(REFERENCE, 30)
    doubled, _ = enumerate_curvatures(Octuple(0, 0, 2, 2, 2), 60)
    assert doubled.present_values() == [2 * v for v in base.present_values()]


@pytest.mark.parametrize("seed", ORACLE_ROOTS)
@pytest.mark.parametrize("bound", [50, 100, 200])
def test_matches_exhaustive_oracle(seed, bound):
    table, _ = enumerate_curvatures(seed, bound)
    assert table.curvature_set() == oracle_curvatures(seed, bound)


@pytest.mark.parametrize("dedup_depth", [0, 1, 3, 6])
def test_dedup_depth_does_not_change_set(dedup_depth):
    reference, _ = enumerate_curvatures(REFERENCE, 200, dedup_depth=4)
    table, _ = enumerate_curvatures(REFERENCE, 200, dedup_depth=dedup_depth)
    assert table.present_values() == reference.present_values()


def test_exhaustive_depth_one():
    vectors = enumerate_exhaustive(REFERENCE, 1)
    assert vectors == {Octuple(0, 0, 1, 1, 1), Octuple(0, 1, 1, 2, 1)}
    with pytest.raises(InvalidInputError):
        enumerate_exhaustive(REFERENCE)
    with pytest.raises(InvalidInputError):
        enumerate_exhaustive(REFERENCE, 9)


def test_budget_rejection():
    with pytest.raises(BudgetExceededError) as info:
        enumerate_curvatures(REFERENCE, 10_000, budget_bytes=1_000)
    assert info.value.required == required_bytes(10_000, 1)
    assert info.value.exit_code == 3


def test_invalid_arguments():
    with pytest.raises(InvalidInputError):
        enumerate_curvatures(REFERENCE, 0)
    with pytest.raises(InvalidInputError):
        enumerate_curvatures(REFERENCE, 10, dedup_depth=-1)
    with pytest.raises(InvalidInputError):
        enumerate_curvatures(Octuple(1, 1, 1, 1, 1), 10)
    with pytest.raises(InvalidInputError):
        EnumerationService(executor="fiber")


# ==========================================
# 并行枚举
# ==========================================


@pytest.mark.asyncio
async def test_threads_give_identical_output():
    single, _ = enumerate_curvatures(REFERENCE, 500, dedup_depth=4)
    outputs = []
    for threads in (1, 4, 8):
        service = EnumerationService(threads=threads, dedup_depth=3, executor="thread")
        result = await service.enumerate(REFERENCE, 500)
        assert result.workers == threads
        outputs.append(result)
    for result in outputs:
        assert result.table.to_bitmap() == single.to_bitmap()
        assert result.table.to_csv() == single.to_csv()


@pytest.mark.asyncio
async def test_service_result_payload():
    service = EnumerationService(threads=2, dedup_depth=2)
    result = await service.enumerate(SHIFTED, 30)
    body = result.to_json()
    assert body["root"] == {"a": -1, "b": 2, "c": 2, "d": 3, "omega": 3}
    assert body["bound"] == 30
    assert body["nonpositive"] == {"-1": 1}
    assert body["count"] == len(body["curvatures"])
    assert 2 in body["curvatures"] and 3 in body["curvatures"]
