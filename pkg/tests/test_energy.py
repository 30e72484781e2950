import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from handscroll.energy import (
    binomial_blur5,
    ft_saliency,
    fuse_energy,
    gradient_energy,
    luminance,
    normalize,
    saliency_from_lab,
    srgb_to_lab,
)


def _rand_img(rng, h=16, w=16):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


# ---------------------------------------------------------------------------
# normalization


def test_normalize_constant_is_zero():
    out = normalize(np.full((4, 5), 3.7))
    assert np.array_equal(out, np.zeros((4, 5)))


def test_normalize_range():
    rng = np.random.default_rng(0)
    out = normalize(rng.normal(size=(10, 10)))
    assert out.min() == 0.0 and out.max() == 1.0


def test_normalize_rejects_nan():
    with pytest.raises(ValueError):
        normalize(np.array([[1.0, np.nan]]))


# ---------------------------------------------------------------------------
# gradient energy


def test_constant_image_zero_gradient():
    img = np.full((6, 8, 3), 200, dtype=np.uint8)
    assert np.array_equal(gradient_energy(img), np.zeros((6, 8)))


def test_vertical_step_edge():
    img = np.zeros((8, 10, 3), dtype=np.uint8)
    img[:, 5:] = 255
    e = gradient_energy(img)
    # maxima hug the edge columns, zero far away
    assert np.all(e[:, 4] == 1.0) and np.all(e[:, 5] == 1.0)
    assert np.all(e[:, 0] == 0.0) and np.all(e[:, 9] == 0.0)


def _sobel_oracle(lum):
    """Hand-applied 3x3 stencil with replicate borders."""
    h, w = lum.shape
    kx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=float)
    ky = kx.T
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            gx = gy = 0.0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    gx += kx[dy + 1, dx + 1] * lum[yy, xx]
                    gy += ky[dy + 1, dx + 1] * lum[yy, xx]
            out[y, x] = abs(gx) + abs(gy)
    lo, hi = out.min(), out.max()
    return np.zeros_like(out) if hi == lo else (out - lo) / (hi - lo)


def test_single_bright_pixel_matches_stencil():
    img = np.zeros((5, 5, 3), dtype=np.uint8)
    img[2, 2] = 255
    expected = _sobel_oracle(luminance(img))
    np.testing.assert_allclose(gradient_energy(img), expected, atol=1e-12)


def test_random_images_match_stencil_oracle():
    rng = np.random.default_rng(7)
    for _ in range(5):
        img = _rand_img(rng, 7, 9)
        np.testing.assert_allclose(
            gradient_energy(img), _sobel_oracle(luminance(img)), atol=1e-9
        )


# ---------------------------------------------------------------------------
# FT saliency


def test_constant_color_zero_saliency():
    img = np.full((5, 7, 3), 130, dtype=np.uint8)
    assert np.array_equal(ft_saliency(img, blur="none"), np.zeros((5, 7)))
    assert np.array_equal(ft_saliency(img, blur="binomial5"), np.zeros((5, 7)))


def test_two_equidistant_lab_pixels_normalize_to_zero():
    # Lab colors (50,0,0) and (50,10,0) with mean (50,5,0): raw squared
    # distances are both 25, so the constant-map rule yields all zeros.
    lab = np.array([[[50.0, 0.0, 0.0], [50.0, 10.0, 0.0]]])
    mu = lab.reshape(-1, 3).mean(axis=0)
    raw = ((mu - lab) ** 2).sum(axis=2)
    np.testing.assert_allclose(raw, [[25.0, 25.0]], atol=1e-12)
    assert np.array_equal(saliency_from_lab(lab, mu), np.zeros((1, 2)))


def test_mirror_symmetry():
    rng = np.random.default_rng(3)
    half = rng.integers(0, 256, size=(6, 5, 3), dtype=np.uint8)
    img = np.concatenate([half, half[:, ::-1]], axis=1)
    sal = ft_saliency(img, blur="none")
    np.testing.assert_allclose(sal, sal[:, ::-1], atol=1e-12)


def _ft_oracle(img):
    """Direct per-pixel formula, blur disabled."""
    lab = srgb_to_lab(img)
    mu = lab.reshape(-1, 3).mean(axis=0)
    h, w = img.shape[:2]
    raw = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            d = mu - lab[y, x]
            raw[y, x] = float(d @ d)
    lo, hi = raw.min(), raw.max()
    return np.zeros_like(raw) if hi == lo else (raw - lo) / (hi - lo)


def test_ft_matches_direct_formula():
    rng = np.random.default_rng(11)
    for _ in range(5):
        img = _rand_img(rng)
        np.testing.assert_allclose(
            ft_saliency(img, blur="none"), _ft_oracle(img), atol=1e-6
        )


def test_blur_is_binomial():
    img = np.zeros((1, 7, 3), dtype=np.float64)
    img[0, 3] = 16.0
    out = binomial_blur5(img)
    np.testing.assert_allclose(out[0, :, 0], [0, 1, 4, 6, 4, 1, 0], atol=1e-12)


def test_unknown_blur_option():
    with pytest.raises(ValueError):
        ft_saliency(np.zeros((2, 2, 3), dtype=np.uint8), blur="box")


# ---------------------------------------------------------------------------
# fusion


def test_alpha_only_is_normalized_gradient():
    rng = np.random.default_rng(5)
    g = rng.random((6, 6))
    s = rng.random((6, 6))
    out = fuse_energy(g, s, alpha=1.0, beta=0.0)
    assert np.array_equal(out, normalize(g))  # bit-for-bit


def test_beta_only_is_normalized_saliency():
    rng = np.random.default_rng(6)
    g = rng.random((6, 6))
    s = rng.random((6, 6))
    assert np.array_equal(fuse_energy(g, s, alpha=0.0, beta=1.0), normalize(s))


def test_default_weights_on_two_cell_fixture():
    grad = np.array([[0.0, 1.0]])
    sal = np.array([[1.0, 0.0]])
    fused_pre = 0.7 * normalize(grad) + 0.3 * normalize(sal)
    np.testing.assert_allclose(fused_pre, [[0.3, 0.7]], atol=1e-15)
    np.testing.assert_allclose(fuse_energy(grad, sal, 0.7, 0.3), [[0.0, 1.0]], atol=1e-15)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        fuse_energy(np.zeros((2, 2)), np.zeros((3, 3)))


def test_bad_weights_rejected():
    z = np.zeros((2, 2))
    with pytest.raises(ValueError):
        fuse_energy(z, z, alpha=-0.1, beta=0.5)
    with pytest.raises(ValueError):
        fuse_energy(z, z, alpha=0.0, beta=0.0)


@given(
    hnp.arrays(np.float64, (4, 4), elements=st.floats(0, 100)),
    hnp.arrays(np.float64, (4, 4), elements=st.floats(0, 100)),
    st.integers(0, 3), st.integers(0, 3),
    st.floats(min_value=0.1, max_value=50.0),
)
@settings(max_examples=40)
def test_fusion_monotone_pre_normalization(g, s, y, x, bump):
    # Raising one input cell never lowers that cell before the final
    # renormalization.
    before = 0.7 * normalize(g) + 0.3 * normalize(s)
    g2 = g.copy()
    g2[y, x] += bump
    after = 0.7 * normalize(g2) + 0.3 * normalize(s)
    assert after[y, x] >= before[y, x] - 1e-12


def test_energy_in_unit_range():
    rng = np.random.default_rng(8)
    img = _rand_img(rng, 12, 20)
    for m in (gradient_energy(img), ft_saliency(img),
              fuse_energy(gradient_energy(img), ft_saliency(img))):
        assert m.min() >= 0.0 and m.max() <= 1.0
        assert np.all(np.isfinite(m))
