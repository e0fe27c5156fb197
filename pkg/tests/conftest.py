import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import toricost as tc


@pytest.fixture(scope="session")
def s2_spin():
    return tc.build("s2-spin")


@pytest.fixture(scope="session")
def s2_halfspeed():
    return tc.build("s2-spin-halfspeed")


@pytest.fixture(scope="session")
def s2_perturbed():
    return tc.build("s2-spin-perturbed", {"eps": 0.1})


@pytest.fixture(scope="session")
def t2_cos():
    return tc.build("t2-cos")


@pytest.fixture(scope="session")
def s2xs2():
    return tc.build("s2xs2-toric")


@pytest.fixture(scope="session")
def s2_xspin():
    return tc.build("s2-xspin")


@pytest.fixture(scope="session")
def crossfield():
    from toricost.systems import crossfield_torus_system

    return crossfield_torus_system()


@pytest.fixture(scope="session")
def crossed_pair():
    from toricost.systems import crossed_product_system

    return crossed_product_system()


def chordal_sq(system):
    return tc.make_cost("chordal-sq", system.chart)


@pytest.fixture(scope="session", autouse=True)
def _warm_numba():
    # compile the encoded kernel once so per-test timings are clean
    if tc.active_backend() == "numba":
        sys_ = tc.build("s2-spin")
        tc.flow_component(sys_, 0, 0.01, np.array([[1.0, 0.2]]),
                          force_numeric=True)
    yield
