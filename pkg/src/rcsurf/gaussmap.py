"""Gauss map of surfaces in frame-defined (Weitzenboeck) ambients: frame
projections, the divergence/curl description of H and *tau, gauge
transformations of the global frame, conformality, and mapping degree.

The Gauss map n collects the frame components of the unit normal.  Its
parameter derivatives come from the surface's exact expression pipeline, so
the divergence/curl ladder holds to round-off rather than stencil accuracy.
All directional derivatives along projected frame vectors stay on the
surface: tangent vectors are expanded in (X_u, X_v) and applied to the
(u, v)-dependence through the chain rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr
from .ambient import frame_ambient
from .errors import AxisNotNormal, NonUnitAxis, NotWeitzenboeck
from .so3 import matmul_exprs, rodrigues_exprs
from .surface import Surface, cross_metric_batch
from . import extrinsic

__all__ = [
    "GaugeField", "gauss_field", "div_curl", "apply_gauge", "gauged_surface",
    "gauge_theorem_residual", "general_gauge_residual", "conformality_test",
    "degree_integrand", "weingarten_from_gauss_map", "area_form_pullback_residual",
]


@dataclass(frozen=True)
class GaugeField:
    """Pointwise rotation of the global frame: angle theta about the axis e,
    both given as chart expressions (the axis in frame components, unit
    wherever it is evaluated)."""
    theta: object
    axis: tuple

    def values_at(self, bindings, memo=None):
        th = expr.evaluate(self.theta, bindings, memo)
        ax = expr.eval_table(list(self.axis), bindings, memo)
        return th, ax


def _require_frame(surface):
    if surface.ambient.kind != "frame":
        raise NotWeitzenboeck("operation needs a frame-defined ambient")


def gauss_field(surface, fields):
    """Per-sample Gauss map data for a batch of surface samples.

    Returns frame components n of the normal with exact parameter
    derivatives, plus the projected frame directions E_i^T (tangential
    part) and E_i^x (normal cross frame vector) as both chart vectors and
    (u, v)-components.
    """
    _require_frame(surface)
    amb = surface.ambient
    pb = amb.bindings(fields["p"])
    memo = {}
    F = expr.eval_table(amb.frame, pb, memo)        # (n,3,3): E_i = F[:, i]
    Finv = expr.eval_table(amb.frame_inv, pb, memo)
    N, g = fields["N"], fields["g"]
    n = np.einsum("nij,nj->ni", Finv, N)

    ge = surface.gauss_exprs()
    uv_bind = {"u": fields["u"], "v": fields["v"]}
    umemo = {}
    n_exact = expr.eval_table(ge["n"], uv_bind, umemo)
    dn_du = expr.eval_table(ge["dn_du"], uv_bind, umemo)
    dn_dv = expr.eval_table(ge["dn_dv"], uv_bind, umemo)

    e_top = np.empty_like(F)        # e_top[:, :, i] = E_i - n^i N
    e_cross = np.empty_like(F)
    for i in range(3):
        Ei = F[:, :, i]
        e_top[:, :, i] = Ei - n[:, i, None] * N
        e_cross[:, :, i] = cross_metric_batch(g, N, Ei)
    top_comp = np.stack([extrinsic.tangent_components(fields, e_top[:, :, i])
                         for i in range(3)], axis=-1)    # (n, 2, 3)
    cross_comp = np.stack([extrinsic.tangent_components(fields, e_cross[:, :, i])
                           for i in range(3)], axis=-1)
    return {
        "n": n, "n_exact": n_exact, "dn_du": dn_du, "dn_dv": dn_dv,
        "e_top": e_top, "e_cross": e_cross,
        "top_comp": top_comp, "cross_comp": cross_comp,
        "frame": F, "frame_inv": Finv,
    }


def _directional(gf, comp, j):
    """Directional derivative of n^j along the tangent vector with
    (u, v)-components comp: comp_u dn/du + comp_v dn/dv."""
    return comp[:, 0] * gf["dn_du"][:, j] + comp[:, 1] * gf["dn_dv"][:, j]


def div_curl(surface, fields, gf=None):
    """The four divergence/curl scalars of the Gauss map.

    Identities they satisfy: Div_top = -H, Div_cross = *tau,
    Curl_top = -*tau n, Curl_cross = -H n.  The full curl vectors are
    returned as well for the ladder checks.
    """
    if gf is None:
        gf = gauss_field(surface, fields)
    nsamp = fields["u"].shape[0]
    D = np.empty((nsamp, 3, 3, 2))     # D[:, i, j, which]: E_i^top/cross (n^j)
    for i in range(3):
        for j in range(3):
            D[:, i, j, 0] = _directional(gf, gf["top_comp"][:, :, i], j)
            D[:, i, j, 1] = _directional(gf, gf["cross_comp"][:, :, i], j)
    div_top = D[:, 0, 0, 0] + D[:, 1, 1, 0] + D[:, 2, 2, 0]
    div_cross = D[:, 0, 0, 1] + D[:, 1, 1, 1] + D[:, 2, 2, 1]
    curl_top = np.stack([D[:, 1, 2, 0] - D[:, 2, 1, 0],
                         D[:, 2, 0, 0] - D[:, 0, 2, 0],
                         D[:, 0, 1, 0] - D[:, 1, 0, 0]], axis=-1)
    curl_cross = np.stack([D[:, 1, 2, 1] - D[:, 2, 1, 1],
                           D[:, 2, 0, 1] - D[:, 0, 2, 1],
                           D[:, 0, 1, 1] - D[:, 1, 0, 1]], axis=-1)
    n = gf["n"]
    return {
        "div_top": div_top,
        "div_cross": div_cross,
        "curl_top_dot_n": np.einsum("ni,ni->n", curl_top, n),
        "curl_cross_dot_n": np.einsum("ni,ni->n", curl_cross, n),
        "curl_top": curl_top,
        "curl_cross": curl_cross,
    }


# --- gauge transformations ---------------------------------------------------


def apply_gauge(amb, gauge: GaugeField):
    """New frame-defined ambient with frame F' = F . rodrigues(axis, theta),
    composed at the expression level."""
    if amb.kind != "frame":
        raise NotWeitzenboeck("gauge transformations act on frame-defined ambients")
    R = rodrigues_exprs(gauge.theta, gauge.axis)
    return frame_ambient(matmul_exprs(amb.frame, R), chart_domain=amb.chart_domain)


def gauged_surface(surf: Surface, gauge: GaugeField) -> Surface:
    return Surface(apply_gauge(surf.ambient, gauge), surf.X, surf.domain,
                   surf.periodic, surf.declared_isothermal)


def _axis_unit_check(gauge, fields):
    p = fields["p"]
    ax = expr.eval_table(list(gauge.axis),
                         {"x": p[:, 0], "y": p[:, 1], "z": p[:, 2]})
    norms = np.linalg.norm(ax, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise NonUnitAxis("gauge axis is not unit on the surface")
    return ax


def gauge_theorem_residual(surf: Surface, fields, gauge: GaugeField,
                           ext=None):
    """max |bold_H(s.g) - bold_H(s) e^{i theta}| over the samples, for a
    gauge rotating about the Gauss-map axis.

    Raises AxisNotNormal when the gauge axis differs from the Gauss map on
    the surface beyond 1e-8.
    """
    _require_frame(surf)
    if ext is None:
        ext = extrinsic.extrinsic_fields(fields)
    gf = gauss_field(surf, fields)
    ax = _axis_unit_check(gauge, fields)
    if np.max(np.linalg.norm(ax - gf["n"], axis=-1)) > 1e-8:
        raise AxisNotNormal("gauge axis differs from the Gauss map on S")
    pb = surf.ambient.bindings(fields["p"])
    theta = expr.evaluate(gauge.theta, pb)
    theta = np.broadcast_to(theta, fields["u"].shape)
    gsurf = gauged_surface(surf, gauge)
    ext_g = extrinsic.extrinsic_fields(gsurf.base_fields(fields["u"], fields["v"]))
    predicted = ext["bold_H"] * np.exp(1j * theta)
    return float(np.max(np.abs(ext_g["bold_H"] - predicted)))


def general_gauge_residual(surf: Surface, fields, gauge: GaugeField, ext=None):
    """Residual of the arbitrary-rotation gauge formulas.

    H'  = H  - e.Grad_x(theta) - sin(theta) Div_x(e) + (1-cos) Curl_x(e).e
    t'  = t  - e.Grad_T(theta) - sin(theta) Div_T(e) + (1-cos) Curl_T(e).e

    with Grad/Div/Curl taken along the projected frames and e given in
    frame components.  Both predicted scalars are compared against a full
    recomputation in the gauged frame; the max of the two sups is returned.
    """
    _require_frame(surf)
    if ext is None:
        ext = extrinsic.extrinsic_fields(fields)
    gf = gauss_field(surf, fields)
    ax = _axis_unit_check(gauge, fields)
    pb = surf.ambient.bindings(fields["p"])
    memo = {}
    theta = np.broadcast_to(expr.evaluate(gauge.theta, pb, memo),
                            fields["u"].shape).astype(float)

    # chart gradients of theta and the axis components (exact)
    vars3 = ("x", "y", "z")
    dtheta = expr.eval_table([expr.diff(gauge.theta, w) for w in vars3], pb, memo)
    dax = expr.eval_table([[expr.diff(c, w) for w in vars3] for c in gauge.axis],
                          pb, memo)          # (n, 3 comp, 3 chart)

    def along(vec_coords, grad_chart):
        return np.einsum("nc,nc->n", grad_chart, vec_coords)

    out = {}
    for which, comp_key in (("top", "e_top"), ("cross", "e_cross")):
        E = gf[comp_key]                      # (n, 3 chart, 3 frame index)
        grad_theta = np.stack([along(E[:, :, i], dtheta) for i in range(3)], axis=-1)
        div_e = np.zeros_like(theta)
        curl_e = np.zeros((theta.shape[0], 3))
        De = np.empty((theta.shape[0], 3, 3))     # De[i, j] = E_i^.(e^j)
        for i in range(3):
            for j in range(3):
                De[:, i, j] = along(E[:, :, i], dax[:, j, :])
        div_e = De[:, 0, 0] + De[:, 1, 1] + De[:, 2, 2]
        curl_e = np.stack([De[:, 1, 2] - De[:, 2, 1],
                           De[:, 2, 0] - De[:, 0, 2],
                           De[:, 0, 1] - De[:, 1, 0]], axis=-1)
        out[which] = (
            np.einsum("ni,ni->n", ax, grad_theta)
            + np.sin(theta) * div_e
            - (1.0 - np.cos(theta)) * np.einsum("ni,ni->n", curl_e, ax)
        )

    H_pred = ext["H"] - out["cross"]
    st_pred = ext["star_tau"] - out["top"]
    gsurf = gauged_surface(surf, gauge)
    ext_g = extrinsic.extrinsic_fields(gsurf.base_fields(fields["u"], fields["v"]))
    res_h = np.max(np.abs(ext_g["H"] - H_pred))
    res_t = np.max(np.abs(ext_g["star_tau"] - st_pred))
    return float(max(res_h, res_t))


# --- conformality and degree ---------------------------------------------------


def conformality_test(surface, fields, gf=None, tol=1e-7):
    """Pullback-metric conformality of the Gauss map at each sample.

    G_n is the Gram matrix of (dn/du, dn/dv) in the round-sphere (ambient
    R^3) inner product; the verdict is |G_n - k G_S| <= tol |G_n| with
    k = tr(G_S^-1 G_n) / 2, and k must exceed tol.
    """
    if gf is None:
        gf = gauss_field(surface, fields)
    du, dv = gf["dn_du"], gf["dn_dv"]
    G_n = np.empty(fields["G_S"].shape)
    G_n[:, 0, 0] = np.einsum("ni,ni->n", du, du)
    G_n[:, 0, 1] = G_n[:, 1, 0] = np.einsum("ni,ni->n", du, dv)
    G_n[:, 1, 1] = np.einsum("ni,ni->n", dv, dv)
    k = 0.5 * np.trace(np.linalg.solve(fields["G_S"], G_n), axis1=-2, axis2=-1)
    scale = np.max(np.abs(G_n), axis=(-2, -1))
    defect = np.max(np.abs(G_n - k[:, None, None] * fields["G_S"]), axis=(-2, -1))
    conformal = (defect <= tol * np.maximum(scale, 1e-300)) & (k > tol)
    return {"conformal": conformal, "k": k, "defect": defect, "G_n": G_n}


def degree_integrand(gf):
    """Pullback of the unit-sphere area form through the Gauss map, as a
    density against du dv: sum_cyc n^i (d_u n^j d_v n^k - d_v n^j d_u n^k)."""
    n, du, dv = gf["n"], gf["dn_du"], gf["dn_dv"]
    out = np.zeros(n.shape[0])
    for (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        out += n[:, i] * (du[:, j] * dv[:, k] - dv[:, j] * du[:, k])
    return out


def weingarten_from_gauss_map(fields, gf):
    """W = -sum_i dN^i (x) E_i expressed in the (X_u, X_v) basis; agrees
    with the algebraic Weingarten map on frame-defined ambients."""
    n = fields["u"].shape[0]
    W = np.empty((n, 2, 2))
    for a, dn in enumerate((gf["dn_du"], gf["dn_dv"])):
        vec = -np.einsum("nji,ni->nj", gf["frame"], dn)   # -sum_i dn^i E_i
        W[:, :, a] = extrinsic.tangent_components(fields, vec)
    return W


def area_form_pullback_residual(fields, ext, gf):
    """|K_e sqrt(det G_S) - degree integrand| pointwise (area-form pullback)."""
    return np.abs(ext["K_e"] * fields["area"] - degree_integrand(gf))
