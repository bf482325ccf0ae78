"""Quadrature rules and frequency grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spdcsim.errors import ConfigError

MIN_GRID_POINTS = 16


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrals of the form ``int exp(-t^2) f(t) dt``."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    kind: str = "hermite"

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def __hash__(self):
        return hash((self.kind, self.order, self.nodes.tobytes()))

    def __eq__(self, other):
        return (isinstance(other, QuadratureRule) and self.kind == other.kind
                and np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self.weights, other.weights))


def hermite_rule(order: int) -> QuadratureRule:
    """Gauss-Hermite rule of the given order (exact for polynomials of degree < 2*order)."""
    if int(order) != order or order < 2:
        raise ConfigError(f"Hermite order must be an integer >= 2, got {order}")
    nodes, weights = np.polynomial.hermite.hermgauss(int(order))
    return QuadratureRule(nodes, weights, int(order), "hermite")


def trapezoid_rule(order: int, half_width: float = 6.0) -> QuadratureRule:
    """Uniform trapezoid rule on [-half_width, half_width] with the Gaussian weight folded in."""
    if int(order) != order or order < 2:
        raise ConfigError(f"trapezoid order must be an integer >= 2, got {order}")
    nodes = np.linspace(-half_width, half_width, int(order))
    h = nodes[1] - nodes[0]
    weights = np.full(nodes.size, h)
    weights[[0, -1]] *= 0.5
    return QuadratureRule(nodes, weights * np.exp(-nodes**2), int(order), "trapezoid")


def integrate_2d(rule_x: QuadratureRule, rule_y: QuadratureRule, f) -> float:
    """Tensor-product quadrature of ``f(x, y)`` against ``exp(-x^2 - y^2)``.

    ``f`` is evaluated once on the full node mesh (``indexing='ij'``); the
    sum runs over y first, then x, in ascending node order.
    """
    X, Y = np.meshgrid(rule_x.nodes, rule_y.nodes, indexing="ij")
    values = np.asarray(f(X, Y), dtype=float)
    inner = np.array([np.dot(row, rule_y.weights) for row in values])
    return float(np.dot(rule_x.weights, inner))


@dataclass(frozen=True)
class FrequencyGrid:
    """Rectangular signal/idler frequency grid (rad/s)."""

    omega_s: np.ndarray
    omega_i: np.ndarray

    def __post_init__(self):
        for name, ax in (("omega_s", self.omega_s), ("omega_i", self.omega_i)):
            if ax.ndim != 1 or ax.size < MIN_GRID_POINTS:
                raise ConfigError(f"{name} needs at least {MIN_GRID_POINTS} points")
            if not np.all(np.diff(ax) > 0):
                raise ConfigError(f"{name} must be strictly increasing")

    @property
    def shape(self) -> tuple[int, int]:
        return self.omega_s.size, self.omega_i.size

    @property
    def d_omega_s(self) -> float:
        return float(self.omega_s[1] - self.omega_s[0])

    @property
    def d_omega_i(self) -> float:
        return float(self.omega_i[1] - self.omega_i[0])

    @property
    def cell_area(self) -> float:
        return self.d_omega_s * self.d_omega_i

    @property
    def shares_spacing(self) -> bool:
        """True when both axes have the same uniform step (pump sums align)."""
        return bool(np.isclose(self.d_omega_s, self.d_omega_i, rtol=1e-12, atol=0.0)
                    and np.allclose(np.diff(self.omega_s), self.d_omega_s, rtol=1e-9, atol=0.0)
                    and np.allclose(np.diff(self.omega_i), self.d_omega_i, rtol=1e-9, atol=0.0))

    def mesh(self):
        return np.meshgrid(self.omega_s, self.omega_i, indexing="ij")


def make_frequency_grid(omega0: float, half_width: float, n_s: int = 256,
                        n_i: int | None = None) -> FrequencyGrid:
    """Uniform grid spanning ``omega0 +/- half_width`` on both axes."""
    if not half_width > 0:
        raise ConfigError("grid half-width must be positive")
    n_i = n_s if n_i is None else n_i
    return FrequencyGrid(np.linspace(omega0 - half_width, omega0 + half_width, n_s),
                         np.linspace(omega0 - half_width, omega0 + half_width, n_i))
