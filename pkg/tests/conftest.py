import os
import sys
from pathlib import Path

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=50, deadline=None, derandomize=True)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ring():
    from lattice import build_complex

    return build_complex(1, 8, 1.0)


@pytest.fixture
def torus():
    from lattice import build_complex

    return build_complex(2, 4, 1.0)


@pytest.fixture
def spacetime(ring):
    from evolve import Spacetime

    return Spacetime.from_cfl(ring, cfl=0.5, steps=32)


@pytest.fixture
def spacetime2d(torus):
    from evolve import Spacetime

    return Spacetime.from_cfl(torus, cfl=0.5, steps=24)
