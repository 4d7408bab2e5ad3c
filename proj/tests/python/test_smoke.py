# Copyright 2026 The MPIP Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import math

import numpy as np
import pytest

import mpip


def test_squared_integral_matches_trapezoid():
    mu, sigma = 0.4, 0.08
    grid = np.linspace(0.1, 0.7, 200001)
    phi = np.exp(-(((grid - mu) / (2 * sigma)) ** 2)) / (sigma * math.sqrt(2 * math.pi))
    reference = getattr(np, "trapezoid", getattr(np, "trapz", None))(phi**2, grid)
    assert mpip.squared_basis_integral(mu, sigma, 0.1, 0.7) == pytest.approx(reference, rel=1e-8)


def test_fit_reconstruct_round_trip():
    basis = mpip.BasisModel.uniform("gaussian", 1, 10)
    phases = mpip.linear_phases(120)
    weights = np.random.default_rng(0).normal(size=10)
    x = mpip.reconstruct(weights, phases, basis)
    back = mpip.reconstruct(mpip.fit_weights(x, phases, basis, 0, 0.0), phases, basis)
    assert np.sqrt(np.mean((back - x) ** 2)) <= 1e-8


def test_generate_train_and_control():
    demos = mpip.generate_session(6, 3, '{"noise_std": 0.01}')
    assert len(demos) == 6
    assert "knee_force" in demos[0].names
    model = mpip.train(demos, '{"ridge": 0.1}')
    assert model.ensemble_size == 6
    again = mpip.Model.from_json(model.to_json())
    assert again.to_json() == model.to_json()

    session = mpip.ControlSession(model, "minimize", seed=1)
    observed = [i for i, r in enumerate(model.roles) if r == "observed"]
    demo = demos[0]
    for t in range(20):
        result = session.step(observed, demo.samples[t, observed], 0.0 if t == 0 else 0.01)
        assert result.cost_achieved <= result.cost_reactive + 1e-12
        assert math.isfinite(result.control)


def test_errors_are_typed():
    with pytest.raises(mpip.ConfigError):
        mpip.generate_demonstration(1, '{"coupling_gain": -1}')
    with pytest.raises(mpip.FormatError):
        mpip.Model.from_json("{}")
    with pytest.raises(mpip.DomainError):
        mpip.squared_basis_integral(0.5, 0.1, 0.6, 0.4)


def test_metrics():
    assert mpip.impulse([1.0, 1.0, 1.0], 0.5) == pytest.approx(1.0)
    assert mpip.peak([0.0, 3.0, 2.0]) == 3.0
    x = [0.3141]
    for _ in range(9999):
        x.append(4 * x[-1] * (1 - x[-1]))
    estimate = mpip.lyapunov_exponent(x, embed_dim=2, delay=1, fit_window=4, theiler_window=0)
    assert abs(estimate - math.log(2)) <= 0.05
