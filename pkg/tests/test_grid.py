import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracground import (Field, Grid, ParameterError, SnapshotError, TruncationWarning, dilate, embed, inner,
                        load_snapshot, lp_norm, refine, save_snapshot, symmetric_decreasing_rearrangement, tail_mass)
from fracground.grid import SNAPSHOT_MAGIC, radial_profile


def gauss(grid, w=1.0):
    return grid.sample(lambda *x: np.exp(-sum(c * c for c in x) / w**2))


@pytest.mark.parametrize("dim,n,L", [(0, 64, 1.0), (4, 64, 1.0), (2, 48, 1.0), (2, 8, 1.0), (2, 64, 0.0),
                                     (2, 64, -1.0), (2, 64, np.inf)])
def test_grid_rejects_bad_arguments(dim, n, L):
    with pytest.raises(ParameterError):
        Grid(dim, n, L)


def test_grid_geometry():
    g = Grid(2, 64, 4.0)
    assert g.spacing == 0.125
    assert g.shape == (64, 64)
    assert g.axis[0] == -4.0 and g.axis[32] == 0.0
    assert g.radius[32, 32] == 0.0
    assert g.measure == 64.0


def test_field_rejects_nonfinite_and_bad_shape():
    g = Grid(1, 16, 1.0)
    with pytest.raises(ParameterError):
        Field(g, np.full(16, np.nan))
    with pytest.raises(ParameterError):
        Field(g, np.zeros(17))


def test_norms_gaussian_oracle():
    # int exp(-2 r^2) over R^2 = pi / 2
    g = Grid(2, 128, 8.0)
    u = gauss(g)
    assert lp_norm(u, 2) ** 2 == pytest.approx(np.pi / 2, rel=1e-12)
    assert inner(u, u) == pytest.approx(np.pi / 2, rel=1e-12)
    assert tail_mass(u) < 1e-12


def test_snapshot_round_trip_bit_exact(tmp_path):
    g = Grid(2, 32, 3.5)
    rng = np.random.default_rng(1)
    u = Field(g, rng.standard_normal(g.shape))
    p = tmp_path / "u.bin"
    save_snapshot(p, u, 0.37)
    v, s = load_snapshot(p)
    assert s == 0.37
    assert v.grid == g
    assert np.array_equal(u.values, v.values)


def test_snapshot_errors(tmp_path):
    g = Grid(1, 16, 1.0)
    p = tmp_path / "u.bin"
    save_snapshot(p, g.zeros(), 0.5)
    raw = p.read_bytes()
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(SnapshotError, match="magic"):
        load_snapshot(bad)
    bad.write_bytes(raw[:4] + (99).to_bytes(4, "little") + raw[8:])
    with pytest.raises(SnapshotError, match="version"):
        load_snapshot(bad)
    bad.write_bytes(raw[:-8])
    with pytest.raises(SnapshotError, match="bytes"):
        load_snapshot(bad)
    bad.write_bytes(SNAPSHOT_MAGIC)
    with pytest.raises(SnapshotError, match="truncated"):
        load_snapshot(bad)


def test_dilate_matches_analytic_gaussian():
    g = Grid(2, 128, 8.0)
    u = gauss(g)
    for sigma in (0.5, 1.7):
        w = dilate(u, sigma)
        exact = gauss(g, sigma)
        assert np.max(np.abs(w.values - exact.values)) < 1e-10


def test_dilate_warns_on_truncation():
    g = Grid(1, 64, 3.0)
    with pytest.warns(TruncationWarning):
        dilate(gauss(g), 4.0)


def test_refine_is_spectral_interpolation():
    g = Grid(2, 32, 6.0)
    u = gauss(g)
    r = refine(u, 4)
    assert r.grid == Grid(2, 128, 6.0)
    assert np.max(np.abs(r.values - gauss(r.grid).values)) < 1e-8
    assert np.allclose(r.values[::4, ::4], u.values, rtol=0, atol=1e-14)


def test_embed_preserves_samples_and_integrals():
    g = Grid(2, 32, 4.0)
    u = gauss(g, 0.7)
    e = embed(u, 2)
    assert e.grid == Grid(2, 64, 8.0)
    assert lp_norm(e, 2) == pytest.approx(lp_norm(u, 2), rel=1e-14)
    assert np.max(np.abs(e.values - gauss(e.grid, 0.7).values)) < 1e-12


def test_rearrangement_radial_profile_monotone():
    g = Grid(2, 64, 6.0)
    rng = np.random.default_rng(3)
    u = Field(g, rng.standard_normal(g.shape))
    r = symmetric_decreasing_rearrangement(u)
    _, prof = radial_profile(r)
    assert np.all(np.diff(prof) <= 0)
    assert r.values[32, 32] == np.max(np.abs(u.values))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([1, 2]))
def test_rearrangement_idempotent_and_norm_preserving(seed, dim):
    g = Grid(dim, 32, 3.0)
    u = Field(g, np.random.default_rng(seed).standard_normal(g.shape))
    r = symmetric_decreasing_rearrangement(u)
    assert np.array_equal(symmetric_decreasing_rearrangement(r).values, r.values)
    for p in (2.0, 3.0, 4.0):
        assert lp_norm(r, p) == pytest.approx(lp_norm(u, p), rel=1e-12)
