import math
from collections import deque

import numpy as np
import pytest

from sizefit import Pose, make_fixture
from sizefit.segmap import default_palette


@pytest.fixture
def palette():
    return default_palette()


@pytest.fixture(scope="session")
def default_fixture():
    return make_fixture("default", seed=0)


@pytest.fixture(scope="session")
def crossing_fixture():
    return make_fixture("crossing-arm", seed=0)


def pose_from(points):
    """Pose with only the given ``{index: (x, y)}`` keypoints detected."""
    return Pose.from_points(points)


# --- independent oracles ----------------------------------------------------

def flood_fill_components(mask):
    """8-connected components by explicit BFS; returns a list of pixel sets."""
    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    comps = []
    for y in range(h):
        for x in range(w):
            if mask[y, x] and not seen[y, x]:
                comp, queue = set(), deque([(x, y)])
                seen[y, x] = True
                while queue:
                    cx, cy = queue.popleft()
                    comp.add((cx, cy))
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            nx, ny = cx + dx, cy + dy
                            if 0 <= nx < w and 0 <= ny < h and mask[ny, nx] and not seen[ny, nx]:
                                seen[ny, nx] = True
                                queue.append((nx, ny))
                comps.append(comp)
    return comps


def brute_contour(pixels):
    pixels = set(pixels)
    return {(x, y) for x, y in pixels
            if any((x + dx, y + dy) not in pixels for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)))}


def brute_closest(a_pixels, b_pixels):
    """All pixel pairs; tie-break on (a.y, a.x, b.y, b.x)."""
    best = None
    for ax, ay in a_pixels:
        for bx, by in b_pixels:
            key = ((ax - bx) ** 2 + (ay - by) ** 2, ay, ax, by, bx)
            if best is None or key < best:
                best = key
    d2, ay, ax, by, bx = best
    return (ax, ay), (bx, by), math.sqrt(d2)


def brute_erode(mask, eligible, iterations):
    """Pixel-by-pixel 3x3 erosion; outside the raster counts as unset."""
    h, w = mask.shape
    cur = mask.copy()
    for _ in range(iterations):
        nxt = cur.copy()
        for y in range(h):
            for x in range(w):
                if cur[y, x] and eligible[y, x]:
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            ny, nx = y + dy, x + dx
                            if not (0 <= ny < h and 0 <= nx < w) or not cur[ny, nx]:
                                nxt[y, x] = False
        cur = nxt
    return cur


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
