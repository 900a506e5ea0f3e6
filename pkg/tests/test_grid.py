import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxlim.grid import (
    FaceData,
    Field,
    divergence,
    face_gradient,
    integrate,
    load_snapshot,
    make_grid,
    radius_squared,
    save_snapshot,
)


class TestMakeGrid:
    def test_1d_spacing(self):
        g = make_grid(1, 5.0, 1000)
        assert g.spacing == (0.01,)
        assert g.origin == (-5.0,)
        assert g.shape == (1000,)

    def test_2d_spacing(self):
        g = make_grid(2, 4.0, 256)
        assert g.spacing == (0.03125, 0.03125)
        assert g.shape == (256, 256)

    def test_invalid_dimension(self):
        with pytest.raises(ValueError, match="invalid dimension"):
            make_grid(3, 1.0, 10)

    def test_invalid_extent(self):
        with pytest.raises(ValueError, match="invalid extent"):
            make_grid(1, -1.0, 10)
        with pytest.raises(ValueError, match="invalid extent"):
            make_grid(1, 0.0, 10)

    def test_too_few_cells(self):
        with pytest.raises(ValueError, match="cell count"):
            make_grid(1, 1.0, 2)

    def test_measures(self):
        g = make_grid(2, 3.0, (6, 12))
        assert g.cell_volume == pytest.approx(1.0 * 0.5)
        assert g.total_measure == pytest.approx(36.0)

    def test_centers_cover_box(self):
        g = make_grid(1, 5.0, 10)
        x = g.axis_centers(0)
        assert x[0] == pytest.approx(-4.5)
        assert x[-1] == pytest.approx(4.5)
        assert np.allclose(np.diff(x), 1.0)


class TestField:
    def test_rejects_nan(self):
        g = make_grid(1, 1.0, 4)
        with pytest.raises(ValueError, match="finite"):
            Field(g, np.array([1.0, np.nan, 0.0, 0.0]))

    def test_density_rejects_negative(self):
        g = make_grid(1, 1.0, 4)
        with pytest.raises(ValueError, match="nonnegative"):
            Field.density(g, np.array([1.0, -0.1, 0.0, 0.0]))

    def test_values_frozen(self):
        g = make_grid(1, 1.0, 4)
        f = Field(g, np.ones(4))
        with pytest.raises(ValueError):
            f.values[0] = 2.0

    def test_shape_mismatch(self):
        g = make_grid(1, 1.0, 4)
        with pytest.raises(ValueError, match="shape"):
            Field(g, np.ones(5))


class TestFaceGradient:
    def test_constant_field(self):
        g = make_grid(2, 1.0, 8)
        fds = face_gradient(Field(g, np.full(g.shape, 3.0)))
        for fd in fds:
            assert np.all(fd.normal == 0.0)
            for t in fd.tangential:
                assert np.all(t == 0.0)

    def test_1d_linear_exact(self):
        g = make_grid(1, 2.0, 16)
        x, = g.centers()
        fd, = face_gradient(Field(g, x))
        assert np.allclose(fd.normal, 1.0, rtol=0, atol=1e-13)
        assert fd.tangential == ()

    def test_2d_affine_hand_stencil(self):
        # rho = x + 2y on a 5x5 grid: normals and tangentials are exact
        g = make_grid(2, 2.0, 5)
        X, Y = g.centers()
        fds = face_gradient(Field(g, X + 2.0 * Y))
        assert np.allclose(fds[0].normal, 1.0, atol=1e-13)
        assert np.allclose(fds[0].tangential[0], 2.0, atol=1e-13)
        assert np.allclose(fds[1].normal, 2.0, atol=1e-13)
        assert np.allclose(fds[1].tangential[0], 1.0, atol=1e-13)

    @pytest.mark.parametrize("a,b,c", [(0.3, -1.2, 2.0), (1.0, 0.0, -4.0), (-0.7, 0.4, 0.0)])
    def test_affine_reproduction(self, a, b, c):
        g = make_grid(2, 1.5, 9)
        X, Y = g.centers()
        fds = face_gradient(Field(g, a * X + b * Y + c))
        assert np.allclose(fds[0].normal, a, atol=1e-12)
        assert np.allclose(fds[0].tangential[0], b, atol=1e-12)
        assert np.allclose(fds[1].normal, b, atol=1e-12)
        assert np.allclose(fds[1].tangential[0], a, atol=1e-12)

    def test_norm_combines_components(self):
        g = make_grid(2, 1.5, 9)
        X, Y = g.centers()
        fds = face_gradient(Field(g, 3.0 * X + 4.0 * Y))
        assert np.allclose(fds[0].norm(), 5.0, atol=1e-12)


class TestDivergence:
    def test_zero_flux(self):
        g = make_grid(1, 1.0, 10)
        fd = FaceData(grid=g, axis=0, normal=np.zeros(9))
        assert np.all(divergence([fd]).values == 0.0)

    def test_constant_interior_flux_telescopes(self):
        g = make_grid(1, 1.0, 10)
        fd = FaceData(grid=g, axis=0, normal=np.full(9, 2.0))
        div = divergence([fd]).values
        h = g.spacing[0]
        assert div[0] == pytest.approx(2.0 / h)
        assert div[-1] == pytest.approx(-2.0 / h)
        assert np.all(div[1:-1] == 0.0)
        assert abs(np.sum(div) * g.cell_volume) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_divergence_theorem_1d(self, seed):
        rng = np.random.default_rng(seed)
        g = make_grid(1, 3.0, 33)
        fd = FaceData(grid=g, axis=0, normal=rng.uniform(-5, 5, 32))
        total = integrate(divergence([fd]))
        scale = np.sum(np.abs(fd.normal))  # h^(d-1) = 1 in 1D
        assert abs(total) <= 1e-12 * max(scale, 1.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_divergence_theorem_2d(self, seed):
        rng = np.random.default_rng(seed)
        g = make_grid(2, 2.0, 12)
        h = g.spacing[0]
        fx = FaceData(grid=g, axis=0, normal=rng.uniform(-5, 5, (11, 12)))
        fy = FaceData(grid=g, axis=1, normal=rng.uniform(-5, 5, (12, 11)))
        total = integrate(divergence([fx, fy]))
        scale = (np.sum(np.abs(fx.normal)) + np.sum(np.abs(fy.normal))) * h
        assert abs(total) <= 1e-12 * max(scale, 1.0)

    def test_heat_stencil_sign(self):
        # a peak must decay: div of the gradient flux is negative at the peak
        g = make_grid(1, 1.5, 3)
        f = Field(g, np.array([0.0, 1.0, 0.0]))
        fd, = face_gradient(f)
        div = divergence([fd]).values
        assert div[1] < 0 < div[0]


class TestIntegrate:
    def test_constant(self):
        g = make_grid(1, 5.0, 250)
        assert integrate(Field(g, np.ones(250))) == pytest.approx(10.0, rel=1e-14)

    def test_exponential_mass_closed_form(self):
        # oracle: integral of (chi/2) e^(-chi|x|) over [-L, L] is 1 - e^(-chi L)
        g = make_grid(1, 5.0, 2000)
        x, = g.centers()
        val = integrate(Field(g, 0.5 * np.exp(-np.abs(x))))
        assert val == pytest.approx(1.0 - np.exp(-5.0), abs=5e-6)

    def test_weighted_second_moment_closed_form(self):
        # oracle: integral of x^2 (1/2) e^(-|x|) over [-L, L] is 2 - e^(-L)(L^2+2L+2)
        L, n = 10.0, 4000
        g = make_grid(1, L, n)
        x, = g.centers()
        f = Field(g, 0.5 * np.exp(-np.abs(x)))
        exact = (1.0 - np.exp(-L)) + (2.0 - np.exp(-L) * (L * L + 2 * L + 2))
        val = integrate(f, weight=1.0 + radius_squared(g))
        assert val == pytest.approx(exact, abs=5e-6)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity(self, seed, a, b):
        rng = np.random.default_rng(seed)
        g = make_grid(1, 1.0, 16)
        u = rng.uniform(0, 1, 16)
        v = rng.uniform(0, 1, 16)
        lhs = integrate(Field(g, a * u + b * v))
        rhs = a * integrate(Field(g, u)) + b * integrate(Field(g, v))
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_positive_for_nonnegative(self):
        g = make_grid(1, 1.0, 16)
        vals = np.zeros(16)
        vals[3] = 0.5
        assert integrate(Field.density(g, vals)) > 0.0


class TestSnapshot:
    def test_roundtrip_1d_bitwise(self, tmp_path):
        g = make_grid(1, 5.0, 17)
        rng = np.random.default_rng(3)
        f = Field(g, rng.uniform(0, 1, 17))
        path = tmp_path / "snap.txt"
        save_snapshot(f, path)
        back = load_snapshot(path)
        assert back.grid == g
        assert np.array_equal(back.values, f.values)

    def test_roundtrip_2d_bitwise(self, tmp_path):
        g = make_grid(2, 2.0, (5, 7))
        rng = np.random.default_rng(4)
        f = Field(g, rng.uniform(0, 1, (5, 7)))
        path = tmp_path / "snap2.txt"
        save_snapshot(f, path)
        back = load_snapshot(path)
        assert back.grid == g
        assert np.array_equal(back.values, f.values)

    def test_header_layout(self, tmp_path):
        g = make_grid(2, 2.0, (4, 3))
        f = Field(g, np.zeros((4, 3)))
        path = tmp_path / "snap.txt"
        save_snapshot(f, path)
        head = path.read_text().splitlines()[0].split()
        assert head[0] == "2"
        assert head[1:3] == ["4", "3"]
        assert float(head[3]) == g.spacing[0] and float(head[4]) == g.spacing[1]
        assert float(head[5]) == -2.0 and float(head[6]) == -2.0

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 4\n")
        with pytest.raises(ValueError, match="header"):
            load_snapshot(path)
