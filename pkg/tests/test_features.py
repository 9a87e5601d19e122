import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from knnsvm.features import (
    SOBEL_X, SOBEL_Y, FeatureConfigError, GradientConfig, HogConfig, binarize, decompose_to_planes,
    direction_unit, extract_gradient_features, extract_hog, magnitude_phase, pool_blocks, read_feature_csv,
    sobel_gradients, write_feature_csv,
)

from oracles import naive_gradient_features, naive_hog


def digit_like(rng, side=16):
    img = np.zeros((side, side), np.uint8)
    r0, c0 = rng.integers(2, side // 3, size=2)
    img[r0:side - r0, c0:c0 + 3] = 255
    img[r0:r0 + 3, c0:side - 2] = rng.integers(100, 256)
    return img


# -- binarize ---------------------------------------------------------------

def test_binarize():
    assert binarize(np.zeros((3, 3)), 128).sum() == 0
    assert binarize(np.full((3, 3), 255), 128).min() == 1
    assert binarize(np.array([[127, 128]]), 128).tolist() == [[0, 1]]


# -- sobel --------------------------------------------------------------------

def test_sobel_constant_interior_zero():
    gx, gy = sobel_gradients(np.ones((6, 6)))
    assert np.all(gx[1:-1, 1:-1] == 0) and np.all(gy[1:-1, 1:-1] == 0)


def _direct_correlation(img, k):
    h, w = img.shape
    out = np.zeros((h, w))
    for r in range(h):
        for c in range(w):
            for a in range(3):
                for b in range(3):
                    rr, cc = r + a - 1, c + b - 1
                    if 0 <= rr < h and 0 <= cc < w:
                        out[r, c] += k[a][b] * img[rr, cc]
    return out


def test_sobel_vertical_step():
    img = np.zeros((6, 6))
    img[:, 3:] = 1
    gx, gy = sobel_gradients(img)
    kx = [[1, 2, 1], [0, 0, 0], [-1, -2, -1]]
    ky = [[1, 0, -1], [2, 0, -2], [1, 0, -1]]
    assert np.array_equal(gx, _direct_correlation(img, kx))
    assert np.array_equal(gy, _direct_correlation(img, ky))
    assert np.all(gx[1:-1, 1:-1] == 0)
    assert np.all(gy[1:-1, 2:4] == -4)
    assert np.all(gy[1:-1, [1, 4]] == 0)


def test_sobel_impulse_response_is_flipped_kernel():
    img = np.zeros((5, 5))
    img[2, 2] = 1
    gx, gy = sobel_gradients(img)
    assert np.array_equal(gx[1:4, 1:4], SOBEL_X[::-1, ::-1])
    assert np.array_equal(gy[1:4, 1:4], SOBEL_Y[::-1, ::-1])


def test_sobel_too_small():
    with pytest.raises(FeatureConfigError):
        sobel_gradients(np.zeros((2, 5)))


# -- magnitude / phase --------------------------------------------------------

@pytest.mark.parametrize("x, y, mag, phase", [
    (3, 4, 5.0, math.degrees(math.atan2(4, 3))),
    (0, 0, 0.0, 0.0),
    (-1, 0, 1.0, 180.0),
    (0, -2, 2.0, 270.0),
])
def test_magnitude_phase(x, y, mag, phase):
    m, p = magnitude_phase(np.array([[x]]), np.array([[y]]))
    assert m[0, 0] == pytest.approx(mag)
    assert p[0, 0] == pytest.approx(phase)
    assert 0 <= p[0, 0] < 360


def test_phase_never_reaches_360():
    _, p = magnitude_phase(np.array([1.0]), np.array([-1e-300]))
    assert 0 <= p[0] < 360


# -- decomposition ------------------------------------------------------------

def test_decompose_axis_aligned():
    planes = decompose_to_planes(np.array([[2.0]]), np.array([[0.0]]))
    assert planes[:, 0, 0].tolist() == [2.0, 0, 0, 0, 0, 0, 0, 0]


def test_decompose_half_angle():
    planes = decompose_to_planes(np.array([[1.0]]), np.array([[22.5]]))
    expected = math.sin(math.radians(22.5)) / math.sin(math.radians(45))
    assert planes[0, 0, 0] == pytest.approx(expected, abs=1e-12)
    assert planes[1, 0, 0] == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.5412, abs=1e-4)
    recon = planes[0, 0, 0] * direction_unit(0) + planes[1, 0, 0] * direction_unit(1)
    assert np.allclose(recon, [math.cos(math.radians(22.5)), math.sin(math.radians(22.5))], atol=1e-12)


def reconstruct(planes):
    units = np.array([direction_unit(k) for k in range(8)])
    return np.einsum("khw,kd->hwd", planes, units)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (4, 5), elements=st.floats(-50, 50)),
       arrays(np.float64, (4, 5), elements=st.floats(-50, 50)))
def test_decomposition_reconstructs_vector(gx, gy):
    planes = decompose_to_planes(*magnitude_phase(gx, gy))
    assert (planes >= 0).all()
    assert ((planes > 0).sum(axis=0) <= 2).all()
    recon = reconstruct(planes)
    assert np.abs(recon[..., 0] - gx).max() <= 1e-9
    assert np.abs(recon[..., 1] - gy).max() <= 1e-9


# -- pooling ------------------------------------------------------------------

def test_pool_zero_and_single_block():
    assert np.array_equal(pool_blocks(np.zeros((8, 4, 4)), 2), np.zeros(32))
    planes = np.random.default_rng(0).random((8, 4, 4))
    assert np.allclose(pool_blocks(planes, 1), planes.sum(axis=(1, 2)))


def test_pool_uniform_plane_layout():
    planes = np.zeros((8, 4, 4))
    planes[0] = 1
    out = pool_blocks(planes, 2)
    assert out.reshape(4, 8)[:, 0].tolist() == [4.0] * 4
    assert out.reshape(4, 8)[:, 1:].sum() == 0


def test_pool_block_order_is_row_major():
    planes = np.zeros((8, 4, 4))
    planes[3, 0:2, 2:4] = 1  # top-right block
    out = pool_blocks(planes, 2).reshape(4, 8)
    assert out[1, 3] == 4 and out.sum() == 4


def test_pool_not_divisible():
    with pytest.raises(FeatureConfigError):
        pool_blocks(np.zeros((8, 5, 5)), 2)


# -- full gradient extractor ----------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
def test_gradient_length(n):
    img = digit_like(np.random.default_rng(n))
    assert extract_gradient_features(img, GradientConfig(n)).shape == (8 * n * n,)


def test_gradient_blank_is_zero():
    assert not extract_gradient_features(np.zeros((16, 16)), GradientConfig(4)).any()


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    img = digit_like(rng)
    img[rng.random(img.shape) < 0.1] = 200
    fast = extract_gradient_features(img, GradientConfig(4))
    assert fast.shape == (128,)
    assert np.allclose(fast, naive_gradient_features(img, 4), atol=1e-9)


def test_gradient_binarize_idempotent():
    img = digit_like(np.random.default_rng(3))
    binary = np.where(img >= 128, 255, 0)
    cfg = GradientConfig(4, 128)
    assert np.array_equal(extract_gradient_features(img, cfg), extract_gradient_features(binary, cfg))


@pytest.mark.parametrize("seed", range(4))
def test_rotation_shifts_planes_by_two(seed):
    img = digit_like(np.random.default_rng(seed))
    base = extract_gradient_features(img, GradientConfig(1))
    # np.rot90 turns the picture counter-clockwise; with rows growing downward
    # that carries each gradient direction two 45-degree steps around
    rotated = extract_gradient_features(np.rot90(img), GradientConfig(1))
    assert np.allclose(rotated, np.roll(base, 2), atol=1e-9)


# -- HOG ----------------------------------------------------------------------

def test_hog_length_mnist():
    img = np.random.default_rng(0).integers(0, 256, (28, 28))
    assert extract_hog(img, HogConfig(cell_size=4)).shape == (1296,)


@pytest.mark.parametrize("shape, cell", [((16, 16), 4), ((28, 28), 7), ((20, 12), 4), ((30, 29), 5), ((8, 8), 4)])
def test_hog_length_formula(shape, cell):
    img = np.random.default_rng(1).integers(0, 256, shape)
    cfg = HogConfig(cell_size=cell)
    cy, cx = shape[0] // cell, shape[1] // cell
    out = extract_hog(img, cfg)
    assert out.shape == ((cx - 1) * (cy - 1) * 36,) == (cfg.output_length(*shape),)
    assert (out >= 0).all() and (out <= 1).all()


@pytest.mark.parametrize("value", [0, 77, 255])
def test_hog_constant_is_zero(value):
    out = extract_hog(np.full((28, 28), value), HogConfig())
    assert np.all(out == 0) and np.all(np.isfinite(out))


def test_hog_vertical_edge_mass_in_zero_bin():
    img = np.zeros((8, 8))
    img[:, 4:] = 255
    out = extract_hog(img, HogConfig(cell_size=4))
    assert np.allclose(out, naive_hog(img), atol=1e-12)
    by_bin = out.reshape(-1, 9).sum(axis=0)
    assert by_bin[0] > 0
    assert np.allclose(by_bin[1:], 0)


@pytest.mark.parametrize("seed", range(3))
def test_hog_matches_loop_oracle(seed):
    img = np.random.default_rng(seed).integers(0, 256, (12, 16))
    assert np.allclose(extract_hog(img, HogConfig()), naive_hog(img), atol=1e-12)


def test_hog_too_small():
    with pytest.raises(FeatureConfigError):
        extract_hog(np.zeros((7, 28)), HogConfig(cell_size=4))


def test_hog_fixed_parameters():
    with pytest.raises(FeatureConfigError):
        HogConfig(bins=8)


def test_feature_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    feats, labels = rng.random((3, 5)), np.array([1, 0, 9])
    path = tmp_path / "f.csv"
    with open(path, "w") as f:
        write_feature_csv(feats, labels, f)
    with open(path) as f:
        back, back_labels = read_feature_csv(f)
    assert np.array_equal(back, feats) and np.array_equal(back_labels, labels)
