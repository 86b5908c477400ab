import numpy as np
import pytest

from stateamp._optimize import golden_minimize, grid_then_golden


def test_golden_quadratic():
    x, fx = golden_minimize(lambda t: (t - 0.3) ** 2 + 1.0, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(1.0, abs=1e-12)


def test_grid_then_golden_multimodal():
    f = lambda t: np.cos(6 * np.pi * t) + 0.5 * t  # noqa: E731
    x, fx = grid_then_golden(f, 0.0, 1.0)
    xs = np.linspace(0, 1, 200001)
    assert fx <= f(xs).min() + 1e-9
