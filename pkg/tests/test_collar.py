import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from sizefit import make_fixture, virtual_size
from sizefit.collar import CollarRect, collar_rect, erode, erode_collar
from sizefit.exceptions import EmptyClothing, InvalidSpec, UndetectedKeypoint
from sizefit.geometry import VirtualSize
from sizefit.segmap import SegMap, default_palette

from conftest import brute_erode, pose_from

CLOTH, SKIN, BG = 3, 7, 0


def test_rect_example():
    rect = collar_rect(pose_from({1: (100, 80)}), VirtualSize(240.0, 160.0, 300.0))
    assert (rect.s_x, rect.s_y) == (120.0, 180.0)
    assert rect.bounds == (40.0, -10.0, 160.0, 170.0)
    assert rect.pixel_bounds((100, 300)) == (40, 0, 160, 99)


def test_rect_near_edge_is_clipped():
    rect = collar_rect(pose_from({1: (2, 1)}), VirtualSize(40.0, 40.0, 60.0))
    assert rect.pixel_bounds((50, 50)) == (0, 0, 17, 16)
    off = collar_rect(pose_from({1: (-100, -100)}), VirtualSize(4.0, 4.0, 6.0))
    assert off.pixel_bounds((50, 50)) is None
    assert not off.mask((50, 50)).any()


def test_rect_needs_neck():
    with pytest.raises(UndetectedKeypoint):
        collar_rect(pose_from({2: (1, 1)}), VirtualSize(4.0, 4.0, 6.0))


def test_rect_rejects_zero_extent():
    with pytest.raises(InvalidSpec):
        CollarRect((5, 5), 0.0, 3.0)


def test_custom_fractions():
    rect = collar_rect(pose_from({1: (0, 0)}), VirtualSize(100.0, 80.0, 90.0), 0.5, 0.25)
    assert (rect.s_x, rect.s_y) == (40.0, 25.0)


masks = arrays(bool, st.tuples(st.integers(1, 14), st.integers(1, 14)))


@settings(max_examples=120, deadline=None)
@given(masks, st.integers(0, 14), st.integers(0, 14), st.integers(0, 10), st.integers(0, 10),
       st.integers(1, 3))
def test_confined_erosion_matches_bruteforce(mask, x0, y0, w, h, iterations):
    eligible = np.zeros_like(mask)
    eligible[y0:y0 + h, x0:x0 + w] = True
    assert np.array_equal(erode(mask, eligible, iterations), brute_erode(mask, eligible, iterations))


@settings(max_examples=60, deadline=None)
@given(masks, st.integers(1, 3))
def test_full_erosion_agrees_with_scipy(mask, iterations):
    ref = ndimage.binary_erosion(mask, structure=np.ones((3, 3)), iterations=iterations, border_value=0)
    assert np.array_equal(erode(mask, None, iterations), ref)


def _block_map():
    labels = np.zeros((30, 30), dtype=np.uint8)
    labels[5:25, 5:25] = CLOTH
    return SegMap(labels, default_palette())


def test_clothing_outside_rect_unchanged():
    segmap = _block_map()
    rect = CollarRect((28.0, 2.0), 2.0, 2.0)
    assert erode_collar(segmap, rect, 3) is segmap


def test_one_iteration_removes_in_rect_layer():
    segmap = _block_map()
    rect = CollarRect((15.0, 5.0), 10.0, 10.0)        # x 10..20, y 0..10
    out = erode_collar(segmap, rect, 1)
    clothing = segmap.labels == CLOTH
    expected = brute_erode(clothing, rect.mask(segmap.shape), 1)
    assert np.array_equal(out.labels == CLOTH, expected)
    removed = clothing & ~(out.labels == CLOTH)
    assert set(zip(*np.nonzero(removed))) == {(5, x) for x in range(10, 21)}
    assert (out.labels[removed] == BG).all()


def test_exhausting_iterations():
    segmap = _block_map()
    rect = CollarRect((15.0, 5.0), 10.0, 10.0)
    out = erode_collar(segmap, rect, 30)
    inside = rect.mask(segmap.shape)
    assert not (out.labels[inside] == CLOTH).any()
    assert np.array_equal(out.labels[~inside], segmap.labels[~inside])


def test_removed_pixels_become_skin_when_touching_neck():
    labels = np.zeros((30, 30), dtype=np.uint8)
    labels[10:25, 5:25] = CLOTH
    labels[6:10, 13:17] = SKIN
    segmap = SegMap(labels, default_palette())
    out = erode_collar(segmap, CollarRect((15.0, 10.0), 8.0, 6.0), 1)
    removed = (labels == CLOTH) & (out.labels != CLOTH)
    assert removed.any()
    assert (out.labels[removed] == SKIN).all()


def test_empty_clothing():
    with pytest.raises(EmptyClothing):
        erode_collar(SegMap(np.zeros((5, 5)), default_palette()), CollarRect((2, 2), 2, 2))


def test_iterations_must_be_positive():
    with pytest.raises(ValueError):
        erode_collar(_block_map(), CollarRect((2, 2), 2, 2), 0)


@pytest.mark.parametrize("seed", range(4))
def test_locality_monotonicity_confinement_on_fixtures(seed):
    segmap, pose, spec = make_fixture("crossing-arm" if seed % 2 else "default", seed=seed)
    rect = collar_rect(pose, virtual_size(spec, pose))
    inside = rect.mask(segmap.shape)
    counts = []
    for it in range(1, 6):
        out = erode_collar(segmap, rect, it)
        assert np.array_equal(out.labels[~inside], segmap.labels[~inside])
        counts.append(int((out.labels == CLOTH).sum()))
    assert counts == sorted(counts, reverse=True)
    clothing = segmap.labels == CLOTH
    assert (clothing & ~inside).any()
    for it in (1, 2, 3):
        confined = int((clothing & ~erode(clothing, inside, it)).sum())
        full = int((clothing & ~erode(clothing, None, it)).sum())
        assert confined < full
