"""Second/third fundamental forms, Weingarten map and the complex-valued
mean curvature H + i*tau, plus the Gauss-equation and curvature-splitting
residuals and the pointwise classifiers.

II is stored unsymmetrized throughout: its antisymmetric part carries the
normal component of the ambient torsion, which is the whole point.  The
matrix convention is II[a, b] = <N, cov. derivative of X_b along X_a> and
W[r, c] gives W(X_c) = sum_r W[r, c] X_r.
"""

from __future__ import annotations

import numpy as np

from .surface import cross_metric_batch

__all__ = [
    "extrinsic_fields", "weingarten_cross_check", "gauss_equation_residual",
    "curvature_decomposition", "classify", "l_tensor",
]

AMBIENT_FLAT_TOL = 1e-9


def extrinsic_fields(base):
    """Extend a base-field dict with the extrinsic quantities.

    Adds: W (tangent basis), W_on (orthonormal basis), H, K_e, star_tau
    (from the torsion 2-form), star_tau_w (from the Weingarten matrix),
    star_tau_agreement, bold_H, III, phi-ready data.
    """
    II = base["II"]
    Ginv = base["Ginv_S"]
    W = np.swapaxes(II @ Ginv, -2, -1)          # W[r, c]: W(X_c) = W[r,c] X_r
    W_on = base["Binv"] @ W @ base["B"]
    H = np.trace(W, axis1=-2, axis2=-1)
    K_e = W[:, 0, 0] * W[:, 1, 1] - W[:, 0, 1] * W[:, 1, 0]
    star_tau = base["tau_uv"] / base["area"]    # tau on the oriented orthonormal pair
    star_tau_w = W_on[:, 1, 0] - W_on[:, 0, 1]
    III = np.einsum("nra,nrs,nsb->nab", W, base["G_S"], W)
    out = dict(base)
    out.update({
        "W": W, "W_on": W_on, "H": H, "K_e": K_e,
        "star_tau": star_tau, "star_tau_w": star_tau_w,
        "star_tau_agreement": np.abs(star_tau - star_tau_w),
        "bold_H": H + 1j * star_tau,
        "III": III,
    })
    return out


def weingarten_cross_check(surface, fields, h_scale=1e-5):
    """Residual between the algebraic Weingarten map (II times the inverse
    induced metric) and the covariant derivative of any normal extension,
    W(X_a) = -(d_a N^k + Gamma^k_ij X_a^i N^j) d_k.

    The normal derivative uses a small central stencil in (u, v); the
    returned residual adds the magnitude of the normal component of the
    covariant path, which must vanish.
    """
    U, V = fields["u"], fields["v"]
    hu = surface._fd_steps(U, 0, h_scale * surface.extent(0))
    hv = surface._fd_steps(V, 1, h_scale * surface.extent(1))
    dN_u = (surface.normal_at(U + hu, V) - surface.normal_at(U - hu, V)) / (2 * hu)[:, None]
    dN_v = (surface.normal_at(U, V + hv) - surface.normal_at(U, V - hv)) / (2 * hv)[:, None]
    g, gamma, N = fields["g"], fields["gamma"], fields["N"]
    out = np.zeros(U.shape)
    for a, (Xa, dNa) in enumerate(((fields["Xu"], dN_u), (fields["Xv"], dN_v))):
        path2 = -(dNa + np.einsum("nkij,ni,nj->nk", gamma, Xa, N))
        path1 = (fields["W"][:, 0, a, None] * fields["Xu"]
                 + fields["W"][:, 1, a, None] * fields["Xv"])
        out = np.maximum(out, np.max(np.abs(path1 - path2), axis=-1))
        normal_part = np.abs(np.einsum("nkl,nk,nl->n", g, path2, N))
        out = out + normal_part
    return out


def surface_curvature_lowered(surface, fields, h_scale=1e-3):
    """R_S(X_u, X_v, X_v, X_u) of the induced connection (FD in (u, v))."""
    K = surface.intrinsic_curvature(fields["u"], fields["v"], h_scale=h_scale,
                                    base=fields)
    return K * fields["area"] ** 2


def gauss_equation_residual(surface, fields):
    """|ambient R4(Xu,Xv,Xv,Xu) - [R_S - II(u,u)II(v,v) + II(u,v)II(v,u)]|."""
    if "r4" not in fields:
        raise KeyError("fields must be built with with_curvature=True")
    lhs = np.einsum("nijkm,ni,nj,nk,nm->n", fields["r4"],
                    fields["Xu"], fields["Xv"], fields["Xv"], fields["Xu"])
    II = fields["II"]
    rs = surface_curvature_lowered(surface, fields)
    rhs = rs - II[:, 0, 0] * II[:, 1, 1] + II[:, 0, 1] * II[:, 1, 0]
    return np.abs(lhs - rhs)


def curvature_decomposition(surface, fields):
    """Theorema-Egregium and sectional-splitting residuals.

    egregium = |K_e - K_intrinsic| (meaningful when the ambient is flat;
    the caller masks by flatness), sectional_split = |sec~ - (K - K_e)|.
    """
    K_int = surface.intrinsic_curvature(fields["u"], fields["v"], base=fields)
    lhs = np.einsum("nijkm,ni,nj,nk,nm->n", fields["r4"],
                    fields["Xu"], fields["Xv"], fields["Xv"], fields["Xu"])
    sec_tilde = lhs / fields["area"] ** 2
    ambient_flat = float(np.max(np.abs(fields["r4"]))) <= AMBIENT_FLAT_TOL
    return {
        "K_intrinsic": K_int,
        "egregium": np.abs(fields["K_e"] - K_int),
        "sectional_split": np.abs(sec_tilde - (K_int - fields["K_e"])),
        "ambient_flat": ambient_flat,
        "sec_tilde": sec_tilde,
    }


def classify(fields, tol=1e-7):
    """Pointwise classifiers: umbilic, minimal_point, geodesic_point.

    Umbilic compares W in the oriented orthonormal basis against the matrix
    form (1/2) [[H, -tau], [tau, H]]; the test is basis-dependent otherwise.
    """
    W_on, H, st = fields["W_on"], fields["H"], fields["star_tau"]
    model = np.empty_like(W_on)
    model[:, 0, 0] = model[:, 1, 1] = 0.5 * H
    model[:, 0, 1] = -0.5 * st
    model[:, 1, 0] = 0.5 * st
    umbilic = np.max(np.abs(W_on - model), axis=(-2, -1)) <= tol
    minimal = np.abs(fields["bold_H"]) <= tol
    geodesic = np.max(np.abs(fields["II"]), axis=(-2, -1)) <= tol
    return {"umbilic": umbilic, "minimal_point": minimal, "geodesic_point": geodesic}


def tangent_components(fields, vec):
    """(u, v)-components of tangent coordinate vectors vec (n, 3)."""
    g = fields["g"]
    rhs = np.stack([
        np.einsum("nkl,nk,nl->n", g, vec, fields["Xu"]),
        np.einsum("nkl,nk,nl->n", g, vec, fields["Xv"]),
    ], axis=-1)
    return np.linalg.solve(fields["G_S"], rhs[..., None])[..., 0]


def apply_weingarten(fields, comp):
    """Apply W to tangent vectors given by (u, v)-components (n, 2)."""
    return np.einsum("nrc,nc->nr", fields["W"], comp)


def l_tensor(fields):
    """L(E1bar, E2bar) = R(E1bar, E2bar) N - J W J T_S(E1bar, E2bar), as a
    chart-coordinate vector.  Vanishing of L is the hypothesis tying
    holomorphicity of bold H to that of the Hopf differential."""
    if "rm" not in fields:
        raise KeyError("fields must be built with with_curvature=True")
    g = fields["g"]
    e1, e2, N = fields["E1bar"], fields["E2bar"], fields["N"]
    # R(E1, E2) N: rm[l, k, i, j] with i <- E1, j <- E2, k <- N
    RN = np.einsum("nlkij,nk,ni,nj->nl", fields["rm"], N, e1, e2)
    # tangential torsion on the orthonormal pair = T_S(Xu, Xv) / area
    TS = fields["T_S"] / fields["area"][:, None]
    JT = cross_metric_batch(g, N, TS)
    WJT_comp = apply_weingarten(fields, tangent_components(fields, JT))
    WJT = WJT_comp[:, 0, None] * fields["Xu"] + WJT_comp[:, 1, None] * fields["Xv"]
    JWJT = cross_metric_batch(g, N, WJT)
    return RN - JWJT
