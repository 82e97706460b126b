"""Mean-field occupation-fraction ODE f' = -f + a*f*(1-f), f(0) = 1, a = lam*d*p.

Closed-form solution of the logistic (Bernoulli) equation plus a classical
RK4 integrator for cross-validation.  Subcritical a < 1 decays to 0;
supercritical a > 1 converges to (a-1)/a.
"""

from __future__ import annotations

import math


def solve_closed_form(a: float, t: float) -> float:
    """Exact solution; for a = 1 it degenerates to 1/(1+t)."""
    if a <= 0:
        raise ValueError("coefficient a must be positive")
    if t < 0:
        raise ValueError("time must be nonnegative")
    if a == 1.0:
        return 1.0 / (1.0 + t)
    # f(t) = (a-1) / (a - e^{-(a-1)t}), from separating variables with f(0)=1
    return (a - 1.0) / (a - math.exp(-(a - 1.0) * t))


def fixed_point(a: float) -> float:
    """Stable equilibrium: 0 for a <= 1, else (a-1)/a."""
    return 0.0 if a <= 1.0 else (a - 1.0) / a


def _rhs(a: float, f: float) -> float:
    return (a - 1.0) * f - a * f * f


def integrate_numeric(a: float, t: float, step: float) -> float:
    """RK4 integration from f(0) = 1; global error O(step^4)."""
    if step <= 0:
        raise ValueError("step must be positive")
    n = max(1, int(math.ceil(t / step)))
    h = t / n
    f = 1.0
    for _ in range(n):
        k1 = _rhs(a, f)
        k2 = _rhs(a, f + 0.5 * h * k1)
        k3 = _rhs(a, f + 0.5 * h * k2)
        k4 = _rhs(a, f + h * k3)
        f += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return f


def trajectory(a: float, t_max: float, dt: float):
    """(t, f) samples of the closed-form solution on a uniform grid."""
    n = int(round(t_max / dt))
    return [(i * dt, solve_closed_form(a, i * dt)) for i in range(n + 1)]
