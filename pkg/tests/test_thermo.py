import numpy as np
import pytest

from qcollide import DetailedBalanceViolated, population_map, thermal_state
from qcollide.thermo import (
    entropy_production,
    explicit_entropy_production,
    heat,
    shannon_entropy,
    trajectory_records,
)

# Heat of the first collision on the five-level system, effusion map at
# beta=3, starting from the Gibbs state at beta'=1.
FIRST_COLLISION_HEAT = -0.046555631095177297


def _gibbs(beta, e):
    w = np.exp(-beta * (e - e.min()))
    return w / w.sum()


def test_identity_map_gives_zeros():
    e = np.array([0.0, 1.0, 3.0])
    rec = entropy_production(np.eye(3), [0.2, 0.3, 0.5], 1.0, e)
    assert (rec.Q, rec.dS, rec.flow, rec.Sigma) == (0.0, 0.0, 0.0, 0.0)


def test_stationary_state_has_no_heat(ladder_spec, ladder_effusion_map):
    W = population_map(ladder_effusion_map)
    p = W.stationary()
    rec = entropy_production(W, p, 3.0, ladder_spec.energies)
    assert abs(rec.Q) < 1e-12 and abs(rec.Sigma) < 1e-10


def test_first_collision_heat(ladder_spec, ladder_effusion_map):
    W = population_map(ladder_effusion_map)
    p = np.real(np.diag(thermal_state(ladder_spec, 1.0)))
    rec = entropy_production(W, p, 3.0, ladder_spec.energies)
    # a hot system in a cold bath gives its energy away
    assert rec.Q < 0
    assert rec.Q == pytest.approx(FIRST_COLLISION_HEAT, rel=1e-6)
    assert rec.Sigma > 0
    assert rec.dS == pytest.approx(rec.flow + rec.Sigma, abs=1e-15)


def test_explicit_formula_matches_decomposition(ladder_spec, ladder_effusion_map):
    W = population_map(ladder_effusion_map)
    e = ladder_spec.energies
    rng = np.random.default_rng(7)
    for _ in range(5):
        p = rng.dirichlet(np.ones(5))
        rec = entropy_production(W, p, 3.0, e)
        # the explicit sum equals dS - beta Q up to the DB residual of W
        assert explicit_entropy_production(W, p) == pytest.approx(rec.Sigma, abs=1e-7)


def test_explicit_formula_on_exact_gibbs_chain():
    e = np.array([0.0, 0.7, 2.0])
    beta = 1.3
    pi = _gibbs(beta, e)
    A = np.array([[0, 0.3, 0.2], [0.3, 0, 0.5], [0.2, 0.5, 0]])
    W = A * pi[:, None]
    W += np.diag(1.0 - W.sum(axis=0))
    p = np.array([0.1, 0.5, 0.4])
    rec = entropy_production(W, p, beta, e)
    assert explicit_entropy_production(W, p) == pytest.approx(rec.Sigma, abs=1e-12)
    assert rec.Sigma >= 0


def test_infinite_entropy_production():
    W = np.array([[1.0, 1.0], [0.0, 0.0]])  # 2 -> 1 with no way back
    assert explicit_entropy_production(W, [0.5, 0.5]) == np.inf


def test_detailed_balance_required(ladder_spec, ladder_mb_map):
    W = population_map(ladder_mb_map)
    p = np.real(np.diag(thermal_state(ladder_spec, 1.0)))
    with pytest.raises(DetailedBalanceViolated) as info:
        entropy_production(W, p, 3.0, ladder_spec.energies)
    assert info.value.residual > 1e-4
    # heat is still defined
    assert np.isfinite(heat(W, p, ladder_spec.energies))


def test_trajectory_records_index_pre_collision_state():
    e = np.array([0.0, 1.0])
    W = np.array([[0.9, 0.1 * np.e], [0.1, 1.0 - 0.1 * np.e]])
    pops = [np.array([0.5, 0.5]), W @ np.array([0.5, 0.5])]
    recs = trajectory_records(W, pops, 1.0, e)
    assert [r.step for r in recs] == [0, 1]
    assert recs[1].Q == pytest.approx(heat(W, pops[1], e))


def test_shannon_entropy():
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert shannon_entropy([0.25] * 4) == pytest.approx(np.log(4))
