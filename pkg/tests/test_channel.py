import numpy as np
import pytest
from hypothesis import given, strategies as st

from wpnoma.channel import (
    R_MIN_KM,
    ChannelDraw,
    DegenerateDistance,
    clamp_distance,
    draw_channel,
    draw_fading,
    path_loss,
    received_power,
)


def test_path_loss_reference_points():
    assert path_loss(1.0, 4.0) == pytest.approx(1.0, rel=1e-15)
    assert path_loss(2.0, 4.0) == pytest.approx(0.0625, rel=1e-15)
    assert path_loss(0.01, 4.0) == pytest.approx(1e8, rel=1e-12)


def test_path_loss_scalar_and_array():
    assert np.isscalar(path_loss(1.0, 4.0)) or np.ndim(path_loss(1.0, 4.0)) == 0
    out = path_loss(np.array([1.0, 2.0, 4.0]), 2.5)
    assert out.shape == (3,)
    assert np.all(np.diff(out) < 0)


def test_path_loss_rejects_sub_floor():
    with pytest.raises(DegenerateDistance):
        path_loss(R_MIN_KM / 2, 4.0)
    with pytest.raises(DegenerateDistance):
        path_loss(np.array([1.0, 0.0]), 4.0)


def test_path_loss_floor_itself_is_legal():
    assert path_loss(R_MIN_KM, 4.0) == pytest.approx(R_MIN_KM**-4, rel=1e-12)


@given(
    r=st.floats(1e-3, 1e3),
    c=st.floats(1.0, 20.0),
    alpha=st.floats(2.1, 6.0),
)
def test_path_loss_power_law_scaling(r, c, alpha):
    assert path_loss(c * r, alpha) == pytest.approx(
        c**-alpha * path_loss(r, alpha), rel=1e-9
    )


def test_clamp_distance():
    r, n = clamp_distance(np.array([0.5, 1e-5, 0.0, R_MIN_KM]))
    assert n == 2
    assert np.all(r >= R_MIN_KM)
    assert r[0] == 0.5
    r2, n2 = clamp_distance(np.array([1.0, 2.0]))
    assert n2 == 0
    np.testing.assert_array_equal(r2, [1.0, 2.0])


def test_received_power_reference():
    # 0.2 mW at 10 m with alpha=4 and unit gain: 2e-4 * (0.01)^-4 = 2e4
    assert received_power(2e-4, 1.0, 0.01, 4.0) == pytest.approx(2e4, rel=1e-12)
    assert received_power(1.0, 0.0, 0.5, 4.0) == 0.0


def test_received_power_linear_in_gain_and_power():
    base = received_power(1e-3, 1.0, 0.3, 3.5)
    assert received_power(2e-3, 1.0, 0.3, 3.5) == pytest.approx(2 * base, rel=1e-12)
    assert received_power(1e-3, 3.0, 0.3, 3.5) == pytest.approx(3 * base, rel=1e-12)


def test_draw_fading_empty():
    out = draw_fading(np.random.default_rng(0), 0)
    assert out.shape == (0,)


def test_draw_fading_moments():
    rng = np.random.default_rng(7)
    h = draw_fading(rng, 1_000_000)
    assert np.all(h >= 0)
    assert h.mean() == pytest.approx(1.0, abs=0.01)
    assert h.var() == pytest.approx(1.0, abs=0.02)
    # exponential tail: P(h > 3) = e^-3
    assert np.mean(h > 3.0) == pytest.approx(np.exp(-3.0), abs=0.002)


def test_draw_fading_deterministic():
    a = draw_fading(np.random.default_rng(42), 100)
    b = draw_fading(np.random.default_rng(42), 100)
    np.testing.assert_array_equal(a, b)


def test_draw_channel_split_and_independence():
    rng = np.random.default_rng(3)
    n = 50_000
    draws = [draw_channel(rng) for _ in range(n)]
    assert all(isinstance(d, ChannelDraw) for d in draws[:10])
    hs = np.array([d.h for d in draws])
    gs = np.array([d.g for d in draws])
    assert np.all(hs >= 0) and np.all(gs >= 0)
    assert hs.mean() == pytest.approx(1.0, abs=0.02)
    assert gs.mean() == pytest.approx(1.0, abs=0.02)
    rho = np.corrcoef(hs, gs)[0, 1]
    assert abs(rho) < 0.015
