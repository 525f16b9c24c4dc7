import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rydress.dressing import LaserDrive
from rydress.errors import DomainError, NotFoundError
from rydress.pairpotential import (
    BLOCKADED,
    Blockaded,
    ForsterTwoChannel,
    PerfectBlockade,
    VanDerWaals,
    blockade_radius,
    u_dd,
)


def forster_oracle(c3, defect, r):
    v = c3 / r**3
    w, vec = np.linalg.eigh(np.array([[0.0, v], [v, defect]]))
    return w[np.argmax(np.abs(vec[0]))]


def test_vdw_power_law():
    assert u_dd(VanDerWaals(1e5), 10.0) == pytest.approx(-0.1, rel=1e-14)


def test_vdw_array_input():
    r = np.array([1.0, 2.0, 4.0])
    np.testing.assert_allclose(u_dd(VanDerWaals(64.0), r), -64.0 / r**6, rtol=1e-14)


def test_perfect_blockade_sentinel():
    assert u_dd(PerfectBlockade(), 3.0) is BLOCKADED
    assert Blockaded() is BLOCKADED
    with pytest.raises(TypeError):
        float(BLOCKADED)


@pytest.mark.parametrize("r", [0.0, -1.0, np.nan])
def test_nonpositive_distance_rejected(r):
    with pytest.raises(DomainError):
        u_dd(VanDerWaals(), r)


def test_forster_zero_defect_rejected():
    with pytest.raises(ValueError):
        ForsterTwoChannel(3e3, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 50.0), st.sampled_from([100.0, -100.0, 7.0, -0.5]))
def test_forster_matches_two_level_eigensolve(r, defect):
    m = ForsterTwoChannel(3e3, defect)
    assert u_dd(m, r) == pytest.approx(forster_oracle(3e3, defect, r), rel=1e-9, abs=1e-12)


def test_forster_long_range_asymptote():
    c3, defect = 3e3, 100.0
    r = (c3 / (defect / 100)) ** (1 / 3)  # c3/r^3 = |defect|/100
    expected = -((c3 / r**3) ** 2) / defect
    assert u_dd(ForsterTwoChannel(c3, defect), r) == pytest.approx(expected, rel=0.01)


@pytest.mark.parametrize("defect,sign", [(100.0, -1.0), (-100.0, 1.0)])
def test_forster_short_range_resonant(defect, sign):
    c3 = 3e3
    r = (c3 / (100 * abs(defect))) ** (1 / 3)  # c3/r^3 = 100 |defect|
    assert u_dd(ForsterTwoChannel(c3, defect), r) / (c3 / r**3) == pytest.approx(sign, abs=0.01)


def test_forster_reduces_to_vdw_in_tail():
    c3, defect = 3e3, 100.0
    f = ForsterTwoChannel(c3, defect)
    v = VanDerWaals(c3**2 / defect)
    r0 = 3 * (c3 / abs(defect)) ** (1 / 3) * 10 ** (2 / 3)
    r = np.geomspace(r0, 10 * r0, 50)
    rel = np.abs(u_dd(f, r) - u_dd(v, r)) / np.abs(u_dd(v, r))
    assert rel.max() < 1e-2


@pytest.mark.parametrize("model", [VanDerWaals(), ForsterTwoChannel(), ForsterTwoChannel(3e3, -100.0)])
def test_monotone_on_log_grid(model):
    r = np.logspace(-1, 2, 3 * 200 + 1)
    u = u_dd(model, r)
    du = np.diff(u)
    assert np.all(du > 0) or np.all(du < 0)


@pytest.mark.parametrize("model", [VanDerWaals(), ForsterTwoChannel(), ForsterTwoChannel(3e3, -100.0)])
def test_vanishes_at_large_distance(model):
    assert abs(u_dd(model, 1e4)) < 1e-10


def test_blockade_radius_value():
    d = LaserDrive(4.3, 1.3)
    target = np.sqrt(1.3**2 + 2 * 4.3**2)
    assert target == pytest.approx(6.218, abs=1e-3)
    rb = blockade_radius(VanDerWaals(1e5), d)
    assert rb == pytest.approx((1e5 / target) ** (1 / 6), abs=2e-4)
    assert rb == pytest.approx(5.02, abs=0.01)


def test_blockade_radius_c6_scaling():
    d = LaserDrive(4.3, 1.3)
    r1 = blockade_radius(VanDerWaals(1e5), d, tol=1e-8)
    r2 = blockade_radius(VanDerWaals(64e5), d, tol=1e-8)
    assert r2 / r1 == pytest.approx(2.0, rel=1e-6)


def test_blockade_radius_decreases_with_drive():
    radii = [blockade_radius(VanDerWaals(), LaserDrive(om, 1.3)) for om in (1, 10, 100, 1000)]
    assert all(a > b for a, b in zip(radii, radii[1:]))
    assert radii[-1] > 0


def test_blockade_radius_errors():
    with pytest.raises(DomainError):
        blockade_radius(PerfectBlockade(), LaserDrive(4.3, 1.3))
    with pytest.raises(NotFoundError):
        blockade_radius(VanDerWaals(1e-12), LaserDrive(4.3, 1.3))
