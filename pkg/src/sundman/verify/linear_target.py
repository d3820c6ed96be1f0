"""Closed-form solution of y'' + alpha y' + B y + C = 0."""

from __future__ import annotations

import math

import numpy as np

from ..numerics.quadrature import quad_with_error

CLOSED_FORM_MIN_B = 1e-3


class LinearTarget:
    """y(tau) with y(0) = y0 and y'(0) = w0.

    The homogeneous part is written as exp(-alpha tau / 2) u(tau) with
    u'' = D u, D = alpha^2/4 - B, which covers distinct real, repeated and
    complex characteristic roots with one formula that stays accurate as D
    passes through zero.  The constant forcing enters as -C E(tau), where E
    is the zero-data response to unit forcing.  E is (1 - E1)/B when B is
    well away from zero and a quadrature of the impulse response otherwise,
    since the closed form cancels catastrophically as B -> 0.
    """

    def __init__(self, alpha: float, B: float, C: float, y0: float, w0: float):
        self.alpha, self.B, self.C = float(alpha), float(B), float(C)
        self.y0, self.w0 = float(y0), float(w0)
        self.D = self.alpha**2 / 4.0 - self.B
        self.mu = math.sqrt(abs(self.D))

    @property
    def regime(self) -> str:
        if self.D > 0:
            return "distinct real roots"
        if self.D < 0:
            return "complex roots"
        return "repeated root"

    def _cs(self, tau):
        """u-basis c (c(0)=1, c'(0)=0) and S (S(0)=0, S'(0)=1)."""
        mu = self.mu
        if self.D > 0:
            return np.cosh(mu * tau), np.sinh(mu * tau) / mu
        if self.D < 0:
            return np.cos(mu * tau), np.sin(mu * tau) / mu
        return np.ones_like(tau), tau.copy()

    def _homogeneous(self, tau, y0, w0):
        """Free solution and its derivative for data (y0, w0)."""
        a = self.alpha
        c, S = self._cs(tau)
        k = w0 + a * y0 / 2.0
        u = y0 * c + k * S
        du = y0 * self.D * S + k * c
        decay = np.exp(-a * tau / 2.0)
        return decay * u, decay * (du - a * u / 2.0)

    def _impulse(self, tau):
        return self._homogeneous(np.asarray(tau, dtype=float), 0.0, 1.0)[0]

    def _forced(self, tau):
        if abs(self.B) >= CLOSED_FORM_MIN_B:
            return (1.0 - self._homogeneous(tau, 1.0, 0.0)[0]) / self.B
        flat = tau.ravel()
        out = np.array([quad_with_error(self._impulse, 0.0, float(t), 1e-12)[0] if t else 0.0 for t in flat])
        return out.reshape(tau.shape)

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        out, _ = self._homogeneous(tau, self.y0, self.w0)
        if self.C:
            out = out - self.C * self._forced(tau)
        return float(out) if out.ndim == 0 else out

    def derivative(self, tau):
        tau = np.asarray(tau, dtype=float)
        _, out = self._homogeneous(tau, self.y0, self.w0)
        if self.C:
            out = out - self.C * self._impulse(tau)
        return float(out) if out.ndim == 0 else out

    def second_derivative(self, tau):
        """From the equation itself: -alpha y' - B y - C."""
        return -self.alpha * self.derivative(tau) - self.B * self(tau) - self.C


def solve_linear_target(alpha: float, B: float, C: float, y0: float, w0: float) -> LinearTarget:
    """``solve_linear_target(0, 0, 1, 0, 0)(t) == -t**2 / 2``."""
    return LinearTarget(alpha, B, C, y0, w0)
