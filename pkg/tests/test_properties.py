import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qcollide import (
    GaussianPacket,
    SystemSpec,
    broad_ensemble_diagonal,
    effusion_pdf,
    maxwell_boltzmann_pdf,
    narrow_map,
    narrowness_ratio,
    population_map,
    scattering_matrix,
    transition_probabilities,
)
from qcollide.scatmap import choi_min_eigenvalue
from qcollide.thermo import explicit_entropy_production

finite = st.floats(-3.0, 3.0, allow_nan=False)


@st.composite
def specs(draw, max_dim=4):
    n = draw(st.integers(1, max_dim))
    gaps = draw(arrays(float, n, elements=st.floats(0.05, 2.0)))
    e = np.concatenate([[0.0], np.cumsum(gaps[1:])])
    a = draw(arrays(float, (n, n), elements=finite))
    V = 0.5 * (a + a.T)
    g = draw(st.floats(0.1, 3.0))
    mass = draw(st.floats(0.3, 2.0))
    return SystemSpec(e, V, g=g, mass=mass)


def _off_threshold(spec, E):
    return np.min(np.abs(E - spec.energies)) > 1e-6


@settings(max_examples=60, deadline=None)
@given(specs(), st.floats(0.01, 20.0))
def test_scattering_matrix_is_unitary_and_symmetric(spec, offset):
    E = spec.energies[0] + offset
    assume(_off_threshold(spec, E))
    sm = scattering_matrix(spec, E)
    assert sm.unitarity_residual() < 1e-9
    assert sm.symmetry_residual() < 1e-9


@settings(max_examples=60, deadline=None)
@given(specs(), st.floats(0.01, 20.0))
def test_transition_probabilities_column_stochastic(spec, offset):
    E = spec.energies[0] + offset
    assume(_off_threshold(spec, E))
    pl, pr, p = transition_probabilities(scattering_matrix(spec, E))
    for m in (pl, pr, p):
        assert m.min() >= -1e-12
        assert np.allclose(m.sum(axis=0), 1.0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(specs(max_dim=3), st.floats(0.2, 6.0), st.sampled_from(["left", "right"]))
def test_narrow_map_is_a_channel(spec, p0, side):
    E = p0**2 / (2 * spec.mass) + spec.energies
    assume(all(_off_threshold(spec, x) for x in E))
    S = narrow_map(spec, p0, side)
    assert S.trace_residual() < 1e-9
    assert S.hermiticity_residual() < 1e-12
    assert choi_min_eigenvalue(S) >= -1e-9
    assert S.max_entry() <= 1.0 + 1e-12
    t = S.tensor()
    g = spec.gaps
    unequal = np.abs(g[:, None, :, None] - g[None, :, None, :]) > 1e-9
    assert np.all(t[unequal] == 0)
    W = population_map(S).W
    assert np.allclose(W.sum(axis=0), 1.0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(specs(), st.floats(0.001, 1.0), st.floats(1.01, 5.0))
def test_narrowness_ratio_monotone_in_sigma(spec, sigma, factor):
    assume(spec.dim > 1)
    a = narrowness_ratio(GaussianPacket(50.0, 0.0, sigma), spec)
    b = narrowness_ratio(GaussianPacket(50.0, 0.0, sigma * factor), spec)
    assert b > a


@st.composite
def balanced_chains(draw):
    n = draw(st.integers(2, 5))
    e = np.sort(draw(arrays(float, n, elements=st.floats(0.0, 3.0))))
    beta = draw(st.floats(0.1, 3.0))
    a = draw(arrays(float, (n, n), elements=st.floats(0.01, 1.0)))
    pi = np.exp(-beta * (e - e.min()))
    W = 0.5 * (a + a.T) * pi[:, None]
    np.fill_diagonal(W, 0.0)
    W /= W.sum(axis=0).max() * 1.05
    W += np.diag(1.0 - W.sum(axis=0))
    p = draw(arrays(float, n, elements=st.floats(0.01, 1.0)))
    return W, p / p.sum()


@settings(max_examples=80, deadline=None)
@given(balanced_chains())
def test_entropy_production_nonnegative(chain):
    W, p = chain
    assert explicit_entropy_production(W, p) >= -1e-12


@given(st.floats(0.1, 10.0), st.floats(0.1, 5.0), arrays(float, 8, elements=st.floats(-10.0, 10.0)))
def test_densities_nonnegative(beta, mass, p):
    assert np.all(effusion_pdf(beta, mass, np.abs(p)) >= 0)
    assert np.all(maxwell_boltzmann_pdf(beta, mass, np.abs(p)) >= 0)
    assert np.all(broad_ensemble_diagonal(beta, mass, 0.3, p) >= 0)
