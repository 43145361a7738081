"""Mesh generation tests: classification, volumes, faces, closure."""

import numpy as np
import pytest

from srdfv import geometry as geo
from srdfv import mesh as msh
from srdfv.mesh import GHOST, SOLID, FULL, CUT


def cylinder_geom():
    return geo.Circle(center=(0.5, 0.5), radius=0.15, keep="outside")


def make(geom, nx, ny, bounds=(0.0, 1.0, 0.0, 1.0)):
    grid = msh.BaseGrid.from_bounds(bounds[0], bounds[1], bounds[2], bounds[3], nx, ny)
    return msh.generate_mesh(grid, geom)


def test_full_domain_mesh():
    m = make(geo.FullDomain(), 8, 6)
    assert m.n_cut == 0
    assert (m.interior_cls == FULL).all()
    assert m.flow_volume == pytest.approx(1.0, rel=1e-14)
    # all interior faces fully wetted
    assert np.all(m.fx_len[GHOST:GHOST + 9, GHOST:GHOST + 6] == pytest.approx(1.0 / 6.0))
    assert np.all(m.fy_len[GHOST:GHOST + 8, GHOST:GHOST + 7] == pytest.approx(1.0 / 8.0))


def test_cell_volume_invariants():
    m = make(cylinder_geom(), 64, 64)
    dxdy = m.grid.dx * m.grid.dy
    cls_i = m.interior_cls
    vol_i = m.vol[m.isl]
    assert (vol_i[cls_i == FULL] == dxdy).all()
    assert (vol_i[cls_i == SOLID] == 0.0).all()
    cut_v = vol_i[cls_i == CUT]
    assert m.n_cut > 40
    assert np.all(cut_v > 0) and np.all(cut_v <= dxdy)


def test_flow_area_matches_analytic():
    m = make(cylinder_geom(), 108, 108)
    exact = 1.0 - np.pi * 0.15 ** 2
    assert m.flow_volume == pytest.approx(exact, rel=1e-4)

    qa = geo.QuarterAnnulus((0.0, 0.0), 1.0, 1.384)
    m2 = make(qa, 108, 108, bounds=(0.0, 1.43, 0.0, 1.4301))
    exact2 = 0.25 * np.pi * (1.384 ** 2 - 1.0 ** 2)
    assert m2.flow_volume == pytest.approx(exact2, rel=1e-3)


def test_cut_cell_closure():
    """Own wetted faces plus chord close each cut cell: sum n*len = 0."""
    m = make(cylinder_geom(), 48, 48)
    for k, (I, J) in enumerate(m.cut_ij):
        sx = m.fx_len[I + 1, J] - m.fx_len[I, J] + m.b_len[k] * m.b_nrm[k, 0]
        sy = m.fy_len[I, J + 1] - m.fy_len[I, J] + m.b_len[k] * m.b_nrm[k, 1]
        per = 2 * (m.grid.dx + m.grid.dy)
        assert abs(sx) < 1e-12 * per and abs(sy) < 1e-12 * per


def test_mesh_agrees_with_standalone_clip():
    m = make(cylinder_geom(), 32, 32)
    g = m.grid
    for (I, J) in m.cut_ij:
        i, j = I - GHOST, J - GHOST
        x0, y0 = g.x_lo + i * g.dx, g.y_lo + j * g.dy
        kind, poly = geo.clip_cell(m.geom, x0, y0, x0 + g.dx, y0 + g.dy)
        assert kind == CUT
        assert poly.area == m.vol[I, J]  # identical arithmetic path
        np.testing.assert_array_equal(poly.centroid, m.cent[I, J])


def test_face_wetting_consistent_with_polygons():
    """Wetted lattice-face length equals the matching polygon edge length."""
    m = make(cylinder_geom(), 32, 32)
    for (I, J), poly in m.polys.items():
        v = poly.verts
        nxt = np.roll(v, -1, axis=0)
        for L, fl in ((I, m.fx_len[I, J]), (I + 1, m.fx_len[I + 1, J])):
            x_line = m.grid.corner_x(L)
            onl = (np.abs(v[:, 0] - x_line) < 1e-12) & (np.abs(nxt[:, 0] - x_line) < 1e-12)
            expect = np.abs(nxt[onl, 1] - v[onl, 1]).sum()
            assert fl == pytest.approx(expect, abs=1e-13)


def test_flow_neighbors_bruteforce():
    m = make(cylinder_geom(), 20, 20)
    cls_i = m.interior_cls
    rng = np.random.default_rng(7)
    for _ in range(60):
        i, j = rng.integers(0, 20, size=2)
        for hw in (1, 2):
            got = msh.flow_neighbors(m, i, j, half_width=hw)
            want = [(a, b)
                    for a in range(max(0, i - hw), min(20, i + hw + 1))
                    for b in range(max(0, j - hw), min(20, j + hw + 1))
                    if cls_i[a, b] != SOLID]
            assert got == want
    with pytest.raises(IndexError):
        msh.flow_neighbors(m, 20, 0)


def test_degenerate_sliver_reclassified_solid():
    g = geo.HalfPlane(point=(0.5 + 1e-15, 0.0), normal=(-1.0, 0.0))
    m = make(g, 8, 8)
    assert m.n_cut == 0
    assert (m.interior_cls[4:, :] == SOLID).all()
    assert (m.interior_cls[:4, :] == FULL).all()
    # no flux through the wall line
    assert np.all(m.fx_len[GHOST + 4, GHOST:GHOST + 8] == 0.0)


def test_multiple_crossings_raises_on_coarse_grid():
    # 3-cell-wide grid over a small disk: the middle column's edges see the
    # disk twice
    g = geo.Circle((0.5, 0.5), 0.12, keep="inside")
    with pytest.raises(msh.MultipleCrossings):
        make(g, 3, 3)


def test_generation_is_deterministic():
    m1 = make(cylinder_geom(), 40, 40)
    m2 = make(cylinder_geom(), 40, 40)
    np.testing.assert_array_equal(m1.vol, m2.vol)
    np.testing.assert_array_equal(m1.cent, m2.cent)
    np.testing.assert_array_equal(m1.fx_len, m2.fx_len)
    np.testing.assert_array_equal(m1.b_mid, m2.b_mid)


def test_strip_mesh_layout():
    m = msh.strip_mesh(alpha=0.1, n_pad=3)
    assert m.synthetic
    assert m.grid.nx == 13 and m.grid.ny == 3
    cls_i = m.interior_cls
    assert (cls_i[:, 0] == SOLID).all() and (cls_i[:, 2] == SOLID).all()
    I, J = msh.strip_model_index(m, -1)
    assert m.cls[I, J] == CUT
    assert m.vol[I, J] == pytest.approx(0.1)
    I0, J0 = msh.strip_model_index(m, 0)
    assert m.cls[I0, J0] == FULL and m.vol[I0, J0] == 1.0
    assert m.min_vfrac() == pytest.approx(0.1)


def test_summary_counts():
    m = make(cylinder_geom(), 64, 64)
    s = m.summary()
    assert s["n_flow"] + s["n_solid"] == 64 * 64
    assert s["n_cut"] == m.n_cut
    assert 0 < s["min_vfrac"] <= 1.0
