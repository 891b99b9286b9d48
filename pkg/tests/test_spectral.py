import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsist.spectral import (
    SampledFn,
    SampledMatrixFn,
    TruncationWarning,
    UniformGrid,
    ad_sigma,
    cauchy_boundary,
    cauchy_offcontour,
    cauchy_projector,
    check_decay,
    exp_ad_sigma,
    fourier_pair,
    hilbert,
)
from nlsist.verify import band_limited_samples


@pytest.fixture
def grid():
    return UniformGrid.symmetric(40.0, 4096)


def packets(grid, seed):
    return band_limited_samples(grid, np.random.default_rng(seed))


# grids and sampled functions

def test_symmetric_grid_layout():
    g = UniformGrid.symmetric(3.0, 7)
    assert g.step == pytest.approx(1.0)
    assert g.min == pytest.approx(-3.0)
    assert g.max == pytest.approx(3.0)
    assert g.point(2) == pytest.approx(-1.0)
    np.testing.assert_allclose(g.points, np.arange(-3, 4))


@pytest.mark.parametrize("kwargs", [dict(min=0, step=0, n=4), dict(min=0, step=-1, n=4),
                                    dict(min=0, step=1, n=1), dict(min=np.nan, step=1, n=4)])
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        UniformGrid(**kwargs)


def test_grid_point_out_of_range():
    with pytest.raises(IndexError):
        UniformGrid(0.0, 1.0, 4).point(4)


def test_sampled_rejects_nonfinite_and_wrong_length():
    g = UniformGrid(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        SampledFn(g, [0, np.nan, 1])
    with pytest.raises(ValueError):
        SampledFn(g, [0, np.inf, 1])
    with pytest.raises(ValueError):
        SampledFn(g, [0, 1])


def test_sampled_values_are_immutable():
    s = SampledFn(UniformGrid(0.0, 1.0, 3), [1, 2, 3])
    with pytest.raises(ValueError):
        s.values[0] = 5


def test_json_roundtrip_exact(grid):
    f = packets(grid, 3)
    back = SampledFn.from_json(f.to_json())
    assert back.grid == f.grid
    np.testing.assert_allclose(back.values, f.values, rtol=1e-15, atol=0)
    d = json.loads(f.to_json())
    assert set(d) == {"grid", "re", "im"}
    assert set(d["grid"]) == {"min", "step", "n"}


def test_matrix_json_roundtrip():
    g = UniformGrid(-1.0, 0.5, 5)
    rng = np.random.default_rng(1)
    m = SampledMatrixFn(g, rng.normal(size=(5, 2, 2)) + 1j * rng.normal(size=(5, 2, 2)))
    back = SampledMatrixFn.from_json(m.to_json())
    np.testing.assert_allclose(back.values, m.values, rtol=1e-15, atol=0)
    assert set(json.loads(m.to_json())) == {"grid", "11", "12", "21", "22"}


def test_matrix_shape_checked():
    with pytest.raises(ValueError):
        SampledMatrixFn(UniformGrid(0.0, 1.0, 3), np.zeros((3, 2)))


def test_interpolation_is_linear_and_zero_outside():
    s = SampledFn(UniformGrid(0.0, 1.0, 3), [0, 2, 4j])
    assert s(0.5) == pytest.approx(1.0)
    assert s(1.5) == pytest.approx(1 + 2j)
    assert s(-1.0) == 0
    assert s(5.0) == 0


# Pauli operators

def test_ad_sigma_action():
    a = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    np.testing.assert_array_equal(ad_sigma(a), [[0, 2], [-3, 0]])


def test_exp_ad_sigma_entries():
    a = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    out = exp_ad_sigma(0.3, a)
    np.testing.assert_allclose(out, [[1, 2 * np.exp(0.3)], [3 * np.exp(-0.3), 4]])


@given(st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_exp_ad_sigma_inverse(theta, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    back = exp_ad_sigma(theta, exp_ad_sigma(-theta, a))
    np.testing.assert_allclose(back, a, rtol=1e-14, atol=1e-14)


# Fourier pair

def test_fourier_zero():
    g = UniformGrid.symmetric(20.0, 64)
    assert np.all(fourier_pair(SampledFn.zeros(g)).values == 0)


def test_fourier_gaussian_closed_form():
    g = UniformGrid(-20.0, 40.0 / 2048, 2048)
    f = SampledFn.from_function(g, lambda z: np.exp(-z * z / 2))
    out = fourier_pair(f, "forward")
    xi = out.grid.points
    np.testing.assert_allclose(out.values, np.exp(-xi * xi / 2), atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_fourier_roundtrip(seed):
    g = UniformGrid.symmetric(40.0, 1024)
    f = packets(g, seed)
    back = fourier_pair(fourier_pair(f, "forward"), "inverse", grid=g)
    assert np.linalg.norm(back.values - f.values) <= 1e-12 * np.linalg.norm(f.values)


@pytest.mark.parametrize("seed", range(5))
def test_plancherel(seed):
    f = packets(UniformGrid.symmetric(40.0, 2048), seed)
    assert fourier_pair(f).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)


def test_fourier_bad_direction():
    with pytest.raises(ValueError):
        fourier_pair(SampledFn.zeros(UniformGrid(0.0, 1.0, 4)), "sideways")


# Cauchy operators

def test_cauchy_zero(grid):
    z = SampledFn.zeros(grid)
    assert np.all(cauchy_boundary(z, "plus").values == 0)
    assert np.all(hilbert(z).values == 0)


@pytest.mark.parametrize("kernel", ["periodic", "line"])
def test_cauchy_upper_hardy_function(kernel):
    g = UniformGrid.symmetric(400.0, 2**15)
    z = g.points
    h = SampledFn(g, 1 / (z + 1j))
    with pytest.warns(TruncationWarning):
        plus = cauchy_boundary(h, "plus", kernel=kernel).values
    with pytest.warns(TruncationWarning):
        minus = cauchy_boundary(h, "minus", kernel=kernel).values
    inner = np.abs(z) <= 5
    # truncating the slow 1/z tail costs O(1/Z)
    assert np.max(np.abs(plus - h.values)[inner]) < 2e-3
    assert np.max(np.abs(minus)[inner]) < 2e-3


def test_cauchy_partial_fractions():
    g = UniformGrid.symmetric(400.0, 2**15)
    z = g.points
    h = SampledFn(g, 1 / (1 + z * z))
    with pytest.warns(TruncationWarning):
        plus = cauchy_boundary(h, "plus", kernel="line").values
    inner = np.abs(z) <= 5
    np.testing.assert_allclose(plus[inner], (1j / (2 * (z + 1j)))[inner], atol=1e-7)


def test_hilbert_residue_oracle():
    g = UniformGrid.symmetric(400.0, 2**15)
    z = g.points
    h = SampledFn(g, 1 / (1 + z * z))
    with pytest.warns(TruncationWarning):
        hv = hilbert(h, kernel="line").values
    inner = np.abs(z) <= 5
    np.testing.assert_allclose(hv[inner], (-1j * z / (1 + z * z))[inner], atol=1e-7)


@pytest.mark.parametrize("kernel", ["periodic", "line"])
@pytest.mark.parametrize("seed", range(4))
def test_projection_identities(grid, seed, kernel):
    h = packets(grid, seed)
    n = h.l2_norm()
    plus = cauchy_boundary(h, "plus", kernel=kernel)
    minus = cauchy_boundary(h, "minus", kernel=kernel)
    assert np.linalg.norm(plus.values - minus.values - h.values) * np.sqrt(grid.step) <= 1e-10 * n
    assert plus.l2_norm() <= n + 1e-12
    assert minus.l2_norm() <= n + 1e-12
    hv = hilbert(h, kernel=kernel)
    assert SampledFn(grid, hv.values + plus.values + minus.values).l2_norm() <= 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_idempotence(grid, seed):
    h = packets(grid, seed)
    n = h.l2_norm()
    plus = cauchy_boundary(h, "plus")
    twice = cauchy_boundary(plus, "plus", decay_tol=np.inf)
    assert SampledFn(grid, twice.values - plus.values).l2_norm() <= 1e-10 * n
    cross = cauchy_boundary(cauchy_boundary(h, "minus"), "plus", decay_tol=np.inf)
    assert cross.l2_norm() <= 1e-10 * n


def test_zero_bin_goes_to_plus():
    v = np.ones(8, dtype=complex)
    np.testing.assert_allclose(cauchy_projector(v, "plus"), v)
    np.testing.assert_allclose(cauchy_projector(v, "minus"), 0, atol=1e-15)


def test_projector_matches_dense_line_kernel():
    rng = np.random.default_rng(7)
    n = 16
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    k = np.arange(n)
    m = k[:, None] - k[None, :]
    kern = np.where(m % 2 != 0, 2 / (np.pi * np.where(m == 0, 1, m)), 0.0)
    dense = 0.5 * f + 0.5j * kern @ f
    np.testing.assert_allclose(cauchy_projector(f, "plus", kernel="line"), dense, atol=1e-13)


def test_projector_rejects_unknown_side_and_kernel():
    with pytest.raises(ValueError):
        cauchy_projector(np.ones(4), "up")
    with pytest.raises(ValueError):
        cauchy_projector(np.ones(4), "plus", kernel="circle")


def test_decay_warning_carries_magnitude():
    g = UniformGrid.symmetric(5.0, 64)
    h = SampledFn(g, np.ones(64))
    with pytest.warns(TruncationWarning) as rec:
        cauchy_boundary(h, "plus")
    assert rec[0].message.magnitude == pytest.approx(1.0)


def test_check_decay_quiet_for_decaying_data():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_decay(np.exp(-np.linspace(-10, 10, 101) ** 2))


# off-contour Cauchy integral

def test_offcontour_residue():
    g = UniformGrid.symmetric(200.0, 40001)
    h = SampledFn.from_function(g, lambda s: 1 / (1 + s * s))
    with pytest.warns(TruncationWarning):
        val = cauchy_offcontour(h, 2j)
    # residues at s = i (1/2) and s = z (-1/3); equals i/(2(z + i)) at z = 2i
    assert val == pytest.approx(1 / 6, abs=1e-6)


def test_offcontour_zero_and_far_field():
    g = UniformGrid.symmetric(20.0, 2001)
    assert cauchy_offcontour(SampledFn.zeros(g), 1j) == 0
    h = SampledFn.from_function(g, lambda s: np.exp(-s * s))
    l1 = np.sqrt(np.pi)
    assert abs(cauchy_offcontour(h, 1e6j)) <= 1e-5 * l1


def test_offcontour_rejects_real_z():
    g = UniformGrid.symmetric(20.0, 201)
    h = SampledFn.from_function(g, lambda s: np.exp(-s * s))
    with pytest.raises(ValueError):
        cauchy_offcontour(h, 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_contraction_property(seed):
    g = UniformGrid.symmetric(40.0, 512)
    h = band_limited_samples(g, np.random.default_rng(seed), packets=3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for kernel in ("periodic", "line"):
            for side in ("plus", "minus"):
                assert cauchy_boundary(h, side, kernel=kernel).l2_norm() <= h.l2_norm() + 1e-12
