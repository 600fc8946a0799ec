import pytest

import percolab as pl
from percolab.estimate import MCConfig, estimate_probability


@pytest.fixture(scope="session")
def chain():
    return pl.make_lattice_spec(1, [(1,), (-1,)])


@pytest.fixture(scope="session")
def square():
    return pl.make_lattice_spec(2, [(1, 0), (-1, 0), (0, 1), (0, -1)])


@pytest.fixture(scope="session", autouse=True)
def warm_kernels(chain):
    # compile the numba kernels once so timing assertions see steady state
    model = pl.bernoulli(chain, 0.5)
    event = pl.point_event(pl.direction([1.0]), 2, chain, coarse=False)
    estimate_probability(model, event, MCConfig(10, 1))
    pl.exact_probability(model, pl.escape_event(chain, [(-1,), (0,), (1,)]))
    yield
