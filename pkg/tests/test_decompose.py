import pytest

from pgas_euler.euler_core import GridSpec
from pgas_euler.strategies import PATCHES, ROWS, TooManyWorkers, decompose, patch_factors


def test_row_bands():
    plan = decompose(GridSpec(1024, 512), 4, ROWS)
    assert [plan.extent(w)[:2] for w in range(4)] == [(0, 128), (128, 256), (256, 384), (384, 512)]
    assert all(plan.extent(w)[2:] == (0, 1024) for w in range(4))
    assert plan.neighbors[0].down is None and plan.neighbors[3].up is None
    assert [(n.down, n.up) for n in plan.neighbors[1:3]] == [(0, 2), (1, 3)]


def test_rows_periodic_wrap():
    plan = decompose(GridSpec(8, 8), 4, ROWS, y_periodic=True)
    assert plan.neighbors[0].down == 3 and plan.neighbors[3].up == 0
    assert all(n.left == w and n.right == w for w, n in enumerate(plan.neighbors))


def test_patches_sixteen():
    plan = decompose(GridSpec(64, 64), 16, PATCHES)
    assert plan.distribution.pr == 4 and plan.distribution.pc == 4
    n5 = plan.neighbors[5]
    assert (n5.down, n5.up, n5.left, n5.right) == (1, 9, 4, 6)
    assert plan.neighbors[0].left == 3  # x wraps


@pytest.mark.parametrize("n,want", [(1, (1, 1)), (2, (1, 2)), (4, (2, 2)), (6, (2, 3)), (8, (2, 4)), (7, (1, 7)), (16, (4, 4))])
def test_patch_factors(n, want):
    assert patch_factors(n) == want


def test_too_many_workers():
    with pytest.raises(TooManyWorkers):
        decompose(GridSpec(8, 8), 16, ROWS)
    with pytest.raises(TooManyWorkers):
        decompose(GridSpec(3, 64), 8, PATCHES)
