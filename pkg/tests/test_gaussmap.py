import numpy as np
import pytest

from rcsurf import expr, extrinsic, gaussmap, scenes
from rcsurf.errors import AxisNotNormal, NotClosed, NotWeitzenboeck

V3 = {"x", "y", "z"}


def grid_all(name, n=12, m=12, **params):
    sc = scenes.builtin(name, **params)
    g = scenes.make_grid(sc, n, m)
    return sc, g


def test_gauss_map_catenoid_frame_plane():
    sc, g = grid_all("catenoid_frame_plane")
    n = g.gauss["n"]
    want = np.stack([np.cos(g.U) / np.cosh(g.V),
                     np.sin(g.U) / np.cosh(g.V),
                     -np.tanh(g.V)], axis=-1)
    assert np.max(np.abs(n - want)) <= 1e-12
    assert np.max(np.abs(g.gauss["n_exact"] - want)) <= 1e-12


def test_gauss_map_trivial_scenes():
    sc, g = grid_all("euclidean_plane")
    assert np.max(np.abs(g.gauss["n"] - np.array([0.0, 0.0, 1.0]))) <= 1e-14
    sc, g = grid_all("round_sphere_standard")
    assert np.max(np.abs(g.gauss["n"] - g.base["p"])) <= 1e-12


def test_gauss_map_requires_frame_ambient():
    sc, g = grid_all("cartan_schouten_sphere")
    with pytest.raises(NotWeitzenboeck):
        gaussmap.gauss_field(sc.surface, g.base)


def test_gauss_field_invariants():
    sc, g = grid_all("torus_standard")
    gf = g.gauss
    assert np.max(np.abs(np.linalg.norm(gf["n"], axis=-1) - 1.0)) <= 1e-10
    base = g.base
    for i in range(3):
        dot = np.einsum("nab,na,nb->n", base["g"], gf["e_top"][:, :, i], base["N"])
        assert np.max(np.abs(dot)) <= 1e-10
    # sum_i n^i E_i^T = 0
    s = np.einsum("ni,nci->nc", gf["n"], gf["e_top"])
    assert np.max(np.abs(s)) <= 1e-10


def test_div_curl_values_rotated_plane():
    sc, g = grid_all("rotated_frame_plane")      # theta = x*y, e = (-1,0,0)
    dc = gaussmap.div_curl(sc.surface, g.base, g.gauss)
    # H = u, *tau = v here
    assert np.max(np.abs(dc["div_top"] + g.U)) <= 1e-12
    assert np.max(np.abs(dc["div_cross"] - g.V)) <= 1e-12


def test_div_curl_ladder_all_frame_builtins():
    for name in ("euclidean_plane", "rotated_frame_plane", "catenoid_frame_plane",
                 "catenoid_frame_cylinder", "round_sphere_standard", "torus_standard"):
        sc, g = grid_all(name)
        ext, gf = g.ext, g.gauss
        dc = gaussmap.div_curl(sc.surface, g.base, gf)
        n = gf["n"]
        m = g.interior_mask
        assert np.max(np.abs(dc["div_top"] + ext["H"])[m]) <= 1e-7, name
        assert np.max(np.abs(dc["div_cross"] - ext["star_tau"])[m]) <= 1e-7, name
        assert np.max(np.abs(dc["curl_top"] + ext["star_tau"][:, None] * n)[m]) <= 1e-7, name
        assert np.max(np.abs(dc["curl_cross"] + ext["H"][:, None] * n)[m]) <= 1e-7, name


def test_weingarten_via_gauss_map():
    for name in ("catenoid_frame_plane", "round_sphere_standard", "torus_standard"):
        sc, g = grid_all(name)
        W_gm = gaussmap.weingarten_from_gauss_map(g.base, g.gauss)
        assert np.max(np.abs(W_gm - g.ext["W"])) <= 1e-7, name


def test_area_form_pullback_identity():
    for name in ("catenoid_frame_plane", "round_sphere_standard", "torus_standard"):
        sc, g = grid_all(name)
        res = gaussmap.area_form_pullback_residual(g.base, g.ext, g.gauss)
        assert np.max(res) <= 1e-7, name


def test_apply_gauge_zero_angle_is_identity():
    sc, g = grid_all("catenoid_frame_plane", 6, 6)
    gauge = gaussmap.GaugeField(expr.con(0.0), sc.normal_axis)
    amb2 = gaussmap.apply_gauge(sc.ambient, gauge)
    pts = g.base["p"]
    b = sc.ambient.bindings(pts)
    F1 = expr.eval_table(sc.ambient.frame, b)
    F2 = expr.eval_table(amb2.frame, b)
    assert np.max(np.abs(F1 - F2)) <= 1e-15


def test_constant_gauge_preserves_extrinsic_scalars():
    sc, g = grid_all("catenoid_frame_cylinder", 8, 8)
    axis = tuple(expr.con(c) for c in (0.0, 0.6, 0.8))
    gauge = gaussmap.GaugeField(expr.con(0.9), axis)
    gsurf = gaussmap.gauged_surface(sc.surface, gauge)
    e1 = g.ext
    e2 = extrinsic.extrinsic_fields(gsurf.base_fields(g.U, g.V))
    for key in ("H", "star_tau", "K_e"):
        assert np.max(np.abs(e1[key] - e2[key])) <= 1e-10, key


def test_gauging_standard_frame_reproduces_rotated_plane():
    # Ex of the rotated frame: standard frame gauged by theta about e
    theta_text, e = "0.4*x*y + 0.1*y^2", (0.0, 0.6, 0.8)
    plane = scenes.builtin("euclidean_plane")
    gauge = gaussmap.GaugeField(expr.parse(theta_text, V3),
                                tuple(expr.con(c) for c in e))
    gsurf = gaussmap.gauged_surface(plane.surface, gauge)
    U = np.linspace(0.05, 0.95, 7)
    UU, VV = [a.ravel() for a in np.meshgrid(U, U, indexing="ij")]
    ext = extrinsic.extrinsic_fields(gsurf.base_fields(UU, VV))
    th_x = 0.4 * VV
    th_y = 0.4 * UU + 0.2 * VV
    W = ext["W"]
    assert np.max(np.abs(W[:, 0, 0] - th_x * e[1])) <= 1e-12
    assert np.max(np.abs(W[:, 0, 1] - th_y * e[1])) <= 1e-12
    assert np.max(np.abs(W[:, 1, 0] + th_x * e[0])) <= 1e-12
    assert np.max(np.abs(W[:, 1, 1] + th_y * e[0])) <= 1e-12


def test_gauge_theorem_quarter_turn_multiplies_by_i():
    sc, g = grid_all("rotated_frame_plane", 8, 8)
    gauge = gaussmap.GaugeField(expr.con(np.pi / 2), sc.normal_axis)
    res = gaussmap.gauge_theorem_residual(sc.surface, g.base, gauge, g.ext)
    assert res <= 1e-7
    gsurf = gaussmap.gauged_surface(sc.surface, gauge)
    ext_g = extrinsic.extrinsic_fields(gsurf.base_fields(g.U, g.V))
    assert np.max(np.abs(ext_g["bold_H"] - 1j * g.ext["bold_H"])) <= 1e-12


def test_gauge_theorem_random_fields():
    from rcsurf.verify import random_gauge_fields
    for name in ("catenoid_frame_plane", "torus_standard"):
        sc, g = grid_all(name, 8, 8)
        for gauge in random_gauge_fields(sc, 3, seed=99):
            res = gaussmap.gauge_theorem_residual(sc.surface, g.base, gauge, g.ext)
            assert res <= 1e-6, name


def test_gauge_theorem_rejects_wrong_axis():
    sc, g = grid_all("catenoid_frame_plane", 6, 6)
    gauge = gaussmap.GaugeField(expr.con(0.5), tuple(expr.con(c) for c in (0, 0, 1)))
    with pytest.raises(AxisNotNormal):
        gaussmap.gauge_theorem_residual(sc.surface, g.base, gauge, g.ext)


def test_general_gauge_random_fields():
    from rcsurf.verify import random_gauge_fields
    for name in ("rotated_frame_plane", "catenoid_frame_cylinder"):
        sc, g = grid_all(name, 8, 8)
        for gauge in random_gauge_fields(sc, 3, seed=7, about_normal=False):
            res = gaussmap.general_gauge_residual(sc.surface, g.base, gauge, g.ext)
            assert res <= 1e-5, name


def test_general_gauge_specializes_to_theorem():
    sc, g = grid_all("catenoid_frame_plane", 8, 8)
    from rcsurf.verify import random_gauge_fields
    gauge = random_gauge_fields(sc, 1, seed=5)[0]     # axis = Gauss map
    r_general = gaussmap.general_gauge_residual(sc.surface, g.base, gauge, g.ext)
    r_theorem = gaussmap.gauge_theorem_residual(sc.surface, g.base, gauge, g.ext)
    assert abs(r_general - r_theorem) <= 1e-9


def test_same_gauss_map_frames_share_abs_bold_h():
    # normal-axis gauges keep the Gauss map, so |bold_H| must match
    sc, g = grid_all("torus_standard", 8, 8)
    from rcsurf.verify import random_gauge_fields
    gauge = random_gauge_fields(sc, 1, seed=11)[0]
    gsurf = gaussmap.gauged_surface(sc.surface, gauge)
    ext_g = extrinsic.extrinsic_fields(gsurf.base_fields(g.U, g.V))
    gf_g = gaussmap.gauss_field(gsurf, gsurf.base_fields(g.U, g.V))
    assert np.max(np.abs(gf_g["n"] - g.gauss["n"])) <= 1e-8
    assert np.max(np.abs(np.abs(ext_g["bold_H"]) - np.abs(g.ext["bold_H"]))) <= 1e-8


def test_conformality_catenoid_everywhere():
    sc, g = grid_all("catenoid_frame_plane")
    conf = gaussmap.conformality_test(sc.surface, g.base, g.gauss)
    assert conf["conformal"].all()
    assert np.max(np.abs(conf["k"] - 1 / np.cosh(g.V) ** 2)) <= 1e-7


def test_conformality_trivial_cases():
    sc, g = grid_all("euclidean_plane")
    conf = gaussmap.conformality_test(sc.surface, g.base, g.gauss)
    assert not conf["conformal"].any()          # dn = 0: geodesic plane
    sc, g = grid_all("round_sphere_standard")
    conf = gaussmap.conformality_test(sc.surface, g.base, g.gauss)
    assert conf["conformal"].all()              # totally umbilic, never geodesic


def test_degree_round_sphere_and_torus():
    sc, g = grid_all("round_sphere_standard", 24, 48)
    d = scenes.gauss_degree(g)
    assert d["degree"] == 1 and d["residual"] <= 1e-3
    assert 2 * d["degree"] == sc.chi
    sc, g = grid_all("torus_standard", 24, 24)
    d = scenes.gauss_degree(g)
    assert d["degree"] == 0 and d["residual"] <= 1e-3


def test_degree_requires_closed_chart():
    sc, g = grid_all("catenoid_frame_plane")
    with pytest.raises(NotClosed):
        scenes.gauss_degree(g)
