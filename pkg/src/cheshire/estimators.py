"""scikit-learn style front end.

``PostSelectionModel`` carries the model parameters as estimator params, so
``get_params``/``set_params``/``clone`` work as usual. ``PostSelectedMoments``
fits conditioned moments to recorded readouts and ``NoiseCenterCalibrator``
fits noise parameters to target averages.
"""
from __future__ import annotations

from typing import Mapping, Optional, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_consistent_length

from . import analytic, calibration, simulation
from .model import PAPER_PARAMS, ModelParams, validate


def check_params(params) -> ModelParams:
    """Coerce a ModelParams, a parameter mapping or a PostSelectionModel and validate it."""
    if isinstance(params, PostSelectionModel):
        params = params.to_params()
    elif isinstance(params, Mapping):
        params = ModelParams.from_dict(params)
    elif not isinstance(params, ModelParams):
        raise TypeError(f"expected model parameters, got {type(params).__name__}")
    return validate(params)


def check_readouts(X, b=None):
    """Validate an ``(n, 2)`` array of ``(x, y)`` readouts and optional boolean flags."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (x, y), got {X.shape[1]}")
    if b is None:
        return X
    b = np.asarray(b)
    if b.ndim != 1:
        raise ValueError("b must be one-dimensional")
    check_consistent_length(X, b)
    if b.dtype != bool:
        if not np.isin(b, (0, 1)).all():
            raise ValueError("b must contain only post-selection flags (0/1 or bool)")
        b = b.astype(bool)
    return X, b


class PostSelectionModel(BaseEstimator):
    """The classical cat model as an estimator-like object.

    Defaults reproduce the reference configuration (Delta=1000, delta=10).
    """

    def __init__(self, Delta=PAPER_PARAMS.Delta, delta=PAPER_PARAMS.delta,
                 eps_c=PAPER_PARAMS.eps_c, eps_t=PAPER_PARAMS.eps_t,
                 u=PAPER_PARAMS.u, v=PAPER_PARAMS.v, p=PAPER_PARAMS.p, q=None):
        self.Delta = Delta
        self.delta = delta
        self.eps_c = eps_c
        self.eps_t = eps_t
        self.u = u
        self.v = v
        self.p = p
        self.q = q

    @classmethod
    def from_params(cls, params: ModelParams) -> "PostSelectionModel":
        return cls(**params.to_dict())

    def to_params(self) -> ModelParams:
        return validate(ModelParams(self.Delta, self.delta, self.eps_c, self.eps_t,
                                    self.u, self.v, self.p, self.q))

    def report(self, method="exact", tol: float = 1e-8) -> analytic.AnalyticReport:
        return analytic.analytic_report(self.to_params(), method, tol)

    def density(self, X) -> np.ndarray:
        """Joint density of each readout row together with a successful post-selection."""
        X = check_readouts(X)
        return analytic.joint_density(X[:, 0], X[:, 1], self.to_params())

    def sample(self, n_events: int, random_state=None):
        """Draw ``n_events`` runs; returns readouts ``X`` (n, 2) and flags ``b``."""
        rng = np.random.default_rng(random_state)
        ev = simulation.sample_events(rng, self.to_params(), int(n_events))
        return np.column_stack([ev["x"], ev["y"]]), ev["b"]

    def simulate(self, n_events: int, seed: int = 0, n_chunks: int = 1,
                 n_jobs: int = 1) -> simulation.EstimateSet:
        config = simulation.SimConfig(int(n_events), int(seed), int(n_chunks))
        return simulation.run(self.to_params(), config, n_jobs=n_jobs)


class PostSelectedMoments(BaseEstimator):
    """Estimate post-selected and unconditioned moments from recorded data.

    ``fit(X, b)`` takes readouts ``X[:, 0] = x``, ``X[:, 1] = y`` and the
    post-selection flags ``b``.
    """

    def fit(self, X, b):
        X, b = check_readouts(X, b)
        est = simulation.estimate_moments(X[:, 0], X[:, 1], b)
        self.estimates_ = est
        self.n_features_in_ = 2
        self.prob_b_ = est.prob_b_hat.value
        self.mean_b_ = np.array([_value(est.mean_x_b), _value(est.mean_y_b)])
        self.crossmoment_b_ = _value(est.crossmoment_b)
        self.signed_crossmoment_ = _value(est.signed_crossmoment)
        return self


def _value(estimate: simulation.Estimate) -> float:
    return float("nan") if estimate.value is None else estimate.value


class NoiseCenterCalibrator(BaseEstimator):
    """Fit noise parameters so that the exact post-selected averages hit the targets.

    ``fit(base)`` takes the fixed parameters (a ModelParams, mapping or
    PostSelectionModel). With ``policy="fix-eps"`` only the centres ``u`` and
    ``v`` move; ``policy="solve-both"`` also moves the amplitudes and needs
    ``prob_b_noise_c`` and ``prob_b_noise_t``.
    """

    def __init__(self, target_mean_x_b: float = 1.0, target_mean_y_b: float = 1.0,
                 policy: str = "fix-eps", prob_b_noise_c: Optional[float] = None,
                 prob_b_noise_t: Optional[float] = None, tol: float = 1e-12):
        self.target_mean_x_b = target_mean_x_b
        self.target_mean_y_b = target_mean_y_b
        self.policy = policy
        self.prob_b_noise_c = prob_b_noise_c
        self.prob_b_noise_t = prob_b_noise_t
        self.tol = tol

    def fit(self, base: Union[ModelParams, Mapping, PostSelectionModel], y=None):
        target = calibration.CalibrationTarget(
            float(self.target_mean_x_b), float(self.target_mean_y_b), check_params(base),
            calibration.Policy(self.policy), self.prob_b_noise_c, self.prob_b_noise_t)
        self.result_ = calibration.fit(target, tol=self.tol)
        self.params_ = self.result_.params
        self.n_iter_ = self.result_.iterations
        self.model_ = PostSelectionModel.from_params(self.params_)
        return self
