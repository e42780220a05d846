"""Certified dual bounds for toy scattering design problems."""

import json

from . import _core
from ._core import *  # noqa: F401,F403


def solve(problem, kind=None, backgrounds=(), eps_factor=1e-6):
    """Minimize the dual over the default constraint family.

    Returns (LagrangianProblem, DualSolution, Certificate).
    """
    kind = _core.ObjectiveKind.Extinction if kind is None else kind
    L = _core.LagrangianProblem.with_eps_factor(
        _core.make_objective(problem, kind),
        _core.default_family(problem, list(backgrounds)),
        eps_factor,
    )
    sol = _core.minimize_dual(L)
    return L, sol, _core.certify(sol.state, L, sol.scale)


def as_dict(obj):
    """Parsed JSON form of any object with a to_json method."""
    return json.loads(obj.to_json())
