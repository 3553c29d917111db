import numpy as np
import pytest

from ddcsolve import ModelSpec


@pytest.fixture
def two_state_model():
    """|X|=2, J=2, beta=0.9, uniform transitions; used by hand-worked examples."""
    return ModelSpec(
        n_states=2,
        n_choices=2,
        beta=0.9,
        utility=np.array([[1.0, 0.0], [0.0, 1.0]]),
        transitions=np.full((2, 2, 2), 0.5),
    )


@pytest.fixture
def constant_model():
    """
    u == 0 with one shared transition matrix: fixed point is
    ln(J)/(1-beta) times the ones vector, and the W operator is affine
    (log-sum-exp of J identical values), so Newton is one-shot exact.
    """
    f = np.array([[0.3, 0.7], [0.6, 0.4]])
    return ModelSpec(
        n_states=2,
        n_choices=2,
        beta=0.9,
        utility=np.zeros((2, 2)),
        transitions=np.stack([f, f]),
    )
