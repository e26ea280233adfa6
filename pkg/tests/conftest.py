import numpy as np
import pytest
from hypothesis import settings

from spaceform.core import SpaceForm, TotallyGeodesic

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

CURVATURES = (0.0, 1.0, -1.0, 4.0, -2.0)


def random_W(space: SpaceForm, rng: np.random.Generator, j: int) -> TotallyGeodesic:
    p = space.random_point(rng, 1.0)
    dirs = [space.random_tangent(p, rng) for _ in range(j)]
    return TotallyGeodesic.through(space, p, dirs)


def near_point(space: SpaceForm, p, rng, scale=1.0):
    return space.exp_map(p, space.random_tangent(p, rng), scale * rng.uniform(0.05, 1.0) / np.sqrt(space.ambient_dim))


@pytest.fixture(params=CURVATURES, ids=lambda c: f"c={c:g}")
def space(request):
    return SpaceForm(3, request.param)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
