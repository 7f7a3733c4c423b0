# Copyright The eulerci Authors
# SPDX-License-Identifier: Apache-2.0
"""Python bindings for the eulerci convex integration engine."""

from ._core import (
    __version__,
    div_inverse,
    divergence,
    fit_scaling,
    lattice_sphere,
    leray_p,
    leray_q,
    plan_system,
    run_command,
)

__all__ = [
    "__version__",
    "div_inverse",
    "divergence",
    "fit_scaling",
    "lattice_sphere",
    "leray_p",
    "leray_q",
    "plan_system",
    "run_command",
]
