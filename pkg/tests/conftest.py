import numpy as np
import pytest

import graphonlearn as gl

SEED = 7


@pytest.fixture(scope="session")
def triple_setup():
    graphon = gl.triple_peak()
    profile = gl.degree_profile(graphon)
    return {
        "graphon": graphon,
        "profile": profile,
        "stationary": gl.invariant_density(profile),
        "density": gl.transition_density(graphon, profile),
    }


@pytest.fixture(scope="session")
def triple_walk(triple_setup):
    return gl.walk(triple_setup["density"], 20000, seed=SEED, burn_in=100)


@pytest.fixture(scope="session")
def quad_setup():
    graphon = gl.quadruple_peak()
    return {"graphon": graphon, "density": gl.transition_density(graphon)}


@pytest.fixture(scope="session")
def quad_walk(quad_setup):
    return gl.walk(quad_setup["density"], 20000, seed=SEED, burn_in=100)


@pytest.fixture(scope="session")
def lemon_walk():
    return gl.sde_walk(gl.lemon_slice_config(), 20000, seed=SEED, burn_in=100)


@pytest.fixture(scope="session")
def grid1000():
    return (np.arange(1000) + 0.5) / 1000
