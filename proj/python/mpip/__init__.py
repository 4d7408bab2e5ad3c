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

"""Interaction primitives with model predictive control."""

from ._mpip import (
    BasisModel,
    ConfigError,
    ControlSession,
    Demonstration,
    DomainError,
    Error,
    FormatError,
    Model,
    NumericalError,
    StepResult,
    fit_weights,
    generate_demonstration,
    generate_session,
    impulse,
    linear_phases,
    lyapunov_exponent,
    peak,
    read_session,
    reconstruct,
    squared_basis_integral,
    train,
)

__all__ = [
    "BasisModel",
    "ConfigError",
    "ControlSession",
    "Demonstration",
    "DomainError",
    "Error",
    "FormatError",
    "Model",
    "NumericalError",
    "StepResult",
    "fit_weights",
    "generate_demonstration",
    "generate_session",
    "impulse",
    "linear_phases",
    "lyapunov_exponent",
    "peak",
    "read_session",
    "reconstruct",
    "squared_basis_integral",
    "train",
]
