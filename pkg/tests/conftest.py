import numpy as np
import pytest

from uarank import PopulationModel, PredictionMatrix


def random_prediction(rng, n, L):
    rows = rng.random((n, L)) + 1e-9
    rows /= rows.sum(axis=1, keepdims=True)
    return PredictionMatrix(rows)


def random_population(rng, T, L):
    w = rng.random(T) + 0.1
    w /= w.sum()
    gt = rng.random((T, L)) + 1e-6
    gt /= gt.sum(axis=1, keepdims=True)
    # Predictor = ground truth plus a small renormalized perturbation.
    pred = gt + rng.uniform(-0.05, 0.05, size=(T, L))
    pred = np.clip(pred, 1e-9, None)
    pred /= pred.sum(axis=1, keepdims=True)
    groups = {f"g{t}": (t,) for t in range(T)}
    if T >= 3:
        groups["pair"] = (0, 1)
    return PopulationModel(
        type_names=tuple(f"t{t}" for t in range(T)),
        weights=w,
        ground_truth=gt,
        predicted=pred,
        groups=groups,
    )


@pytest.fixture
def stab_lb():
    """The three-label instance pair achieving the 1/2 stability lower bound."""
    P = PredictionMatrix(np.array([[0.5, 0.0, 0.5], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0]]))
    P2 = PredictionMatrix(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0]]))
    return P, P2


def eps_pair(eps):
    """Two-individual binary pair whose utility-optimal rankings swap."""
    P = PredictionMatrix(np.array([[0.5 + eps, 0.5 - eps], [0.5 - eps, 0.5 + eps]]))
    P2 = PredictionMatrix(np.array([[0.5 - eps, 0.5 + eps], [0.5 + eps, 0.5 - eps]]))
    return P, P2
