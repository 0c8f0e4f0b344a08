import io
import math

import mpmath
import numpy as np
import pytest

from fracbvp.fraccalc import SampledFn, UniformGrid, caputo_deriv
from fracbvp.kernels import (
    _G_lower,
    _G_upper,
    _H_lower,
    _H_upper,
    analytic_bounds,
    boundary_profile,
    green_G,
    green_G_gamma,
    green_H,
    green_H_gamma,
    kernel_bounds_check,
    kernel_max,
    tabulate,
)

G = math.gamma


def caputo_of_G(t, s, a, g):
    """Independent oracle: quadrature of the Caputo integral of t -> G(t, s)."""
    mpmath.mp.dps = 25

    def dG(tau):
        head = (a - 1) * (tau - s) ** (a - 2) / mpmath.gamma(a) if tau > s else 0
        return head - float(boundary_profile(s, a))

    pts = [0, s, t] if 0 < s < t else [0, t]
    return float(mpmath.quad(lambda tau: (t - tau) ** (-g) * dG(tau), pts) / mpmath.gamma(1 - g))


class TestG:
    @pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
    def test_vanishes_at_s_one(self, t):
        assert green_G(t, 1.0, 2.5) == 0.0

    def test_values(self):
        assert green_G(1.0, 0.5, 2.5) == pytest.approx(0.5**1.5 / G(2.5), abs=1e-15)
        assert green_G(1.0, 0.5, 2.5) == pytest.approx(0.265962, abs=1e-6)
        assert green_G(0.0, 0.0, 2.5) == pytest.approx(1 / G(2.5) + 1 / G(1.5), abs=1e-14)

    def test_domain(self):
        for t, s in [(-0.1, 0.5), (0.5, 1.1)]:
            with pytest.raises(ValueError):
                green_G(t, s, 2.5)
        with pytest.raises(ValueError):
            green_G(0.5, 0.5, 3.0)

    @pytest.mark.parametrize("alpha", [2.1, 2.5, 2.9])
    def test_diagonal_continuity(self, alpha):
        t = UniformGrid(64).nodes
        assert np.array_equal(_G_lower(t, t, alpha), _G_upper(t, t, alpha))
        assert np.array_equal(_H_lower(t, t), _H_upper(t, t))


class TestH:
    def test_values(self):
        assert green_H(0.0, 0.0) == 2.0
        s = np.linspace(0, 1, 11)
        np.testing.assert_allclose(green_H(1.0, s), 1 - s, atol=1e-15)
        assert green_H(0.5, 0.25) == pytest.approx(1.125, abs=1e-15)

    def test_domain(self):
        with pytest.raises(ValueError):
            green_H(1.5, 0.0)


class TestGGamma:
    def test_vanishes_at_s_one(self):
        t = np.linspace(0, 1, 17)
        assert np.all(green_G_gamma(t, 1.0, 2.5, 0.5) == 0.0)

    def test_corner_value(self):
        # 1/Gamma(alpha - gamma) - B(0)/Gamma(2 - gamma) with alpha=2.5, gamma=0.5
        expected = 1 / G(2.0) - (1 / G(1.5)) * (1 / G(2.5) + 1 / G(1.5))
        assert green_G_gamma(1.0, 0.0, 2.5, 0.5) == pytest.approx(expected, abs=1e-14)
        assert green_G_gamma(1.0, 0.0, 2.5, 0.5) == pytest.approx(caputo_of_G(1.0, 0.0, 2.5, 0.5), abs=1e-9)

    def test_upper_branch_value(self):
        expected = -(0.5**0.5 / G(1.5)) * (0.25**1.5 / G(2.5) + 0.25**0.5 / G(1.5))
        assert green_G_gamma(0.5, 0.75, 2.5, 0.5) == pytest.approx(expected, abs=1e-14)

    @pytest.mark.parametrize(
        "t, s, a, g",
        [(1.0, 0.0, 2.5, 0.5), (0.5, 0.75, 2.5, 0.5), (0.8, 0.3, 2.7, 0.7), (0.6, 0.2, 2.1, 0.3), (0.9, 0.5, 2.9, 0.4)],
    )
    def test_matches_quadrature_oracle(self, t, s, a, g):
        assert green_G_gamma(t, s, a, g) == pytest.approx(caputo_of_G(t, s, a, g), abs=1e-6)

    @pytest.mark.parametrize("s", [0.0, 0.25, 0.5, 0.75])
    @pytest.mark.parametrize("a, g", [(2.5, 0.5), (2.1, 0.3), (2.9, 0.7)])
    def test_matches_l1_scheme(self, s, a, g):
        grid = UniformGrid(1024)
        t = grid.nodes
        col = SampledFn(grid, green_G(t, s, a))
        err = np.max(np.abs(caputo_deriv(col, g).values - green_G_gamma(t, s, a, g)))
        assert err < 5e-4

    def test_order_one_is_ordinary_derivative(self):
        t, s, a = 0.7, 0.2, 2.5
        eps = 1e-6
        fd = (green_G(t + eps, s, a) - green_G(t - eps, s, a)) / (2 * eps)
        assert green_G_gamma(t, s, a, 1.0) == pytest.approx(fd, abs=1e-7)


class TestHGamma:
    def test_order_one(self):
        s = np.linspace(0, 1, 9)
        for t in (0.0, 0.4, 1.0):
            expected = (s <= t).astype(float) - (2 - s)
            np.testing.assert_allclose(green_H_gamma(t, s, 1.0), expected, atol=1e-15)

    def test_values(self):
        assert green_H_gamma(1.0, 1.0, 0.5) == pytest.approx(-1 / G(1.5), abs=1e-14)
        assert green_H_gamma(0.0, 0.3, 0.5) == 0.0
        assert green_H_gamma(0.5, 0.75, 0.5) == pytest.approx(-(0.5**0.5) / G(1.5) * 1.25, abs=1e-14)
        assert green_H_gamma(0.5, 0.75, 0.5) == pytest.approx(-0.997356, abs=1e-6)

    def test_matches_l1_scheme_away_from_kink(self):
        # the column has a derivative jump at t = s, where the scheme is only O(h^(1-gamma))
        grid = UniformGrid(1024)
        t = grid.nodes
        for s in (0.0, 0.3, 0.6):
            col = SampledFn(grid, green_H(t, s))
            err = np.abs(caputo_deriv(col, 0.6).values - green_H_gamma(t, s, 0.6))
            assert np.max(err[np.abs(t - s) > 0.05]) < 1e-4


class TestTables:
    def test_spot_entries(self):
        grid = UniformGrid(16)
        tab = tabulate("Ggamma", 2.5, 0.5, grid)
        assert tab.values.shape == (17, 17)
        for i, j in [(0, 0), (3, 11), (16, 0), (9, 9)]:
            ref = green_G_gamma(grid.nodes[i], grid.nodes[j], 2.5, 0.5)
            assert tab.values[i, j] == pytest.approx(ref, rel=1e-14, abs=1e-15)

    def test_g_column_at_s_one(self):
        tab = tabulate("G", 2.5, None, UniformGrid(16))
        assert np.all(tab.values[:, -1] == 0.0)

    def test_h_corner(self):
        tab = tabulate("H", None, None, UniformGrid(16))
        assert tab.values[0, 0] == 2.0
        assert kernel_max(tab) == 2.0
        assert np.unravel_index(np.argmax(np.abs(tab.values)), tab.values.shape) == (0, 0)

    def test_zero_table_max(self):
        tab = tabulate("H", None, None, UniformGrid(4))
        zero = type(tab)("H", None, None, tab.grid, np.zeros_like(tab.values))
        assert kernel_max(zero) == 0.0

    def test_ggamma_max_below_bound(self):
        tab = tabulate("Ggamma", 2.5, 0.5, UniformGrid(1024))
        assert kernel_max(tab) <= 3.8758
        assert analytic_bounds(2.5, 0.5)["Ggamma"] == pytest.approx(3.87582, abs=1e-5)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            tabulate("K", 2.5, 0.5, UniformGrid(4))

    def test_csv(self):
        tab = tabulate("H", None, None, UniformGrid(2))
        buf = io.StringIO()
        text = tab.to_csv(buf)
        lines = text.splitlines()
        assert buf.getvalue() == text
        assert lines[0] == "t,s,value"
        assert len(lines) == 1 + 9
        assert lines[1] == "0,0,2"
        assert lines[2] == "0,0.5,1.5"
        t, s, v = map(float, lines[6].split(","))
        assert (t, s) == (0.5, 1.0) and v == green_H(0.5, 1.0)


class TestBounds:
    @pytest.mark.parametrize("a, g", [(2.5, 0.5), (2.7, 0.7)])
    def test_examples_pass(self, a, g):
        rep = kernel_bounds_check(a, g, UniformGrid(256))
        assert rep.all_ok
        assert rep["H"].observed_max == 2.0 and rep["H"].bound == 3.0

    def test_bound_values(self):
        b = analytic_bounds(2.5, 0.5)
        assert b["G"] == pytest.approx(3 / G(1.5))
        assert b["Hgamma"] == pytest.approx(3 / G(1.5))
        assert b["Ggamma"] == pytest.approx(G(2.5) / G(2.0) + 2 / (G(1.5) * G(1.5)))
