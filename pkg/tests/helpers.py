import numpy as np

from oqhobound import oqho
from oqhobound.certificate import make_certificate

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def random_pipeline(rng, n=None, m=None):
    n = n or int(rng.choice([2, 4]))
    m = m or int(rng.choice([2, 4]))
    params = oqho.random_params(rng, n, m)
    ss = oqho.build_state_space(params)
    inv = oqho.invariant_model(params, ss)
    return params, ss, inv


def random_certificate(rng):
    params, ss, inv = random_pipeline(rng)
    mu = float(rng.uniform(0.1, 0.9)) * -ss.spectral_abscissa
    return params, make_certificate(ss, inv, params, mu)
