"""Invariant extended Kalman filter on SO(3) with an identity process model.

The state is a rotation estimate with a 3x3 covariance in the Lie algebra.
Error convention: left-invariant error, innovation log(x^-1 Z), correction
applied multiplicatively on the right (x <- x exp(K nu)). Left-translating
the whole observation stream by a fixed rotation therefore left-translates
every estimate, which is the invariance property the tests pin down.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from groundline import _kernels

__all__ = ["FilterParams", "FilterState", "predict", "update", "step"]


@dataclass(frozen=True)
class FilterParams:
    """Noise scales: process variance per frame and measurement variance.

    Defaults follow the reference operating point: process 1e-2, unit
    measurement variance.
    """

    process_var: float = 1e-2
    meas_var: float = 1.0

    def __post_init__(self):
        if not self.process_var > 0.0:
            raise ValueError(f"process_var must be > 0, got {self.process_var}")
        if not self.meas_var > 0.0:
            raise ValueError(f"meas_var must be > 0, got {self.meas_var}")


@dataclass(frozen=True)
class FilterState:
    """Rotation estimate and its covariance (radians^2, symmetric PD)."""

    estimate: np.ndarray
    covariance: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(
            self, "estimate", np.asarray(self.estimate, dtype=np.float64).reshape(3, 3)
        )
        object.__setattr__(
            self,
            "covariance",
            np.asarray(self.covariance, dtype=np.float64).reshape(3, 3),
        )

    @staticmethod
    def initial(estimate=None) -> "FilterState":
        """Unit-covariance state; identity estimate unless one is given."""
        return FilterState(np.eye(3) if estimate is None else estimate, np.eye(3))

    def check_valid(self, tol: float = 1e-12) -> None:
        """Raise if the covariance is asymmetric or not positive definite."""
        c = self.covariance
        if not np.all(np.abs(c - c.T) < tol):
            raise ValueError("covariance not symmetric")
        np.linalg.cholesky(c)


def predict(state: FilterState, params: FilterParams) -> tuple[np.ndarray, FilterState]:
    """Constant process model: the predicted rotation is the estimate itself.

    Returns the predicted rotation and the state with inflated covariance
    C + p*I.
    """
    cov = state.covariance + params.process_var * np.eye(3)
    return state.estimate, FilterState(state.estimate, cov)


def update(state: FilterState, observation, params: FilterParams) -> FilterState:
    """Fold one observed rotation into the state.

    Gain K = C (C + m I)^-1; estimate x exp(K log(x^-1 Z)); covariance
    (I - K) C re-symmetrized.
    """
    observation = np.asarray(observation, dtype=np.float64).reshape(3, 3)
    est, cov = _kernels.iekf_update(
        state.estimate, state.covariance, observation, params.meas_var
    )
    return FilterState(est, cov)


def step(
    state: FilterState, observation, params: FilterParams
) -> tuple[np.ndarray, FilterState]:
    """predict followed by update; returns (predicted rotation, new state)."""
    predicted, state = predict(state, params)
    return predicted, update(state, observation, params)
