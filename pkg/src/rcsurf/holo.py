"""Complex-analytic layer on isothermal charts: Hopf differential phi,
quadratic differential psi built from the third fundamental form,
Cauchy-Riemann residuals and the curvature identity for d/dzbar of phi.

The chart identification is z = u + i v; with the package's normal
convention (N from X_u x X_v) an isothermal chart is automatically
positively oriented, so J(d/du) = d/dv.  All tensors are extended
complex-bilinearly, never sesquilinearly.
"""

from __future__ import annotations

import numpy as np

from . import extrinsic
from .surface import cross_metric_batch

__all__ = [
    "holo_fields", "phi_at", "bold_h_at", "dbar", "cr_residual",
    "hopf_identity_residual",
]


def holo_fields(surface, fields, ext=None, tol_iso=1e-8):
    """phi and psi coefficients, the isothermal factor, and the residual of
    psi = bold_H * phi at each sample.  Raises NotIsothermal off isothermal
    charts."""
    if ext is None:
        ext = extrinsic.extrinsic_fields(fields)
    lam = surface.isothermal_factor(fields["u"], fields["v"], tol=tol_iso, base=fields)
    II, III = ext["II"], ext["III"]
    phi = 0.25 * ((II[:, 0, 0] - II[:, 1, 1]) - 1j * (II[:, 0, 1] + II[:, 1, 0]))
    psi = 0.25 * ((III[:, 0, 0] - III[:, 1, 1]) - 2j * III[:, 0, 1])
    lam2 = lam * lam
    bold_h_iso = ((II[:, 0, 0] + II[:, 1, 1]) + 1j * (II[:, 0, 1] - II[:, 1, 0])) / lam2
    return {
        "lam": lam,
        "phi": phi,
        "psi": psi,
        "psi_identity_residual": np.abs(psi - ext["bold_H"] * phi),
        "bold_h_isothermal": bold_h_iso,
        "bold_h_agreement": np.abs(bold_h_iso - ext["bold_H"]),
    }


def phi_at(surface, U, V):
    """Hopf-differential coefficient as a pointwise function of (u, v)."""
    ext = extrinsic.extrinsic_fields(surface.base_fields(U, V))
    II = ext["II"]
    return 0.25 * ((II[:, 0, 0] - II[:, 1, 1]) - 1j * (II[:, 0, 1] + II[:, 1, 0]))


def bold_h_at(surface, U, V):
    ext = extrinsic.extrinsic_fields(surface.base_fields(U, V))
    return ext["bold_H"]


def dbar(surface, U, V, func, h_scale=None):
    """d/dzbar = (d/du + i d/dv) / 2 by 4th-order central differences.

    func maps (U, V) arrays to a complex array.  Steps shrink near
    non-periodic edges so the +-2h stencil stays inside the domain;
    boundary samples raise StencilOutsideDomain.
    """
    U = np.atleast_1d(np.asarray(U, dtype=float))
    V = np.atleast_1d(np.asarray(V, dtype=float))
    if h_scale is None:
        h_scale = 1.0 / 64.0
    hu = surface._fd_steps(U, 0, 0.5 * h_scale * surface.extent(0))
    hv = surface._fd_steps(V, 1, 0.5 * h_scale * surface.extent(1))

    def d4(axis, hs):
        if axis == 0:
            f = lambda s: func(U + s * hs, V)
        else:
            f = lambda s: func(U, V + s * hs)
        return (-f(2.0) + 8.0 * f(1.0) - 8.0 * f(-1.0) + f(-2.0)) / (12.0 * hs)

    return 0.5 * (d4(0, hu) + 1j * d4(1, hv))


def cr_residual(surface, U, V, func, h_scale=None):
    """|d func / d zbar|: the pointwise holomorphicity defect."""
    return np.abs(dbar(surface, U, V, func, h_scale))


def hopf_identity_residual(surface, fields, ext=None, holo=None, h_scale=None):
    """Residual of the curvature identity for the Hopf coefficient:

        dbar II(dz, dz) = (lam^2/4) conj(dbar bold_H)
                          - (i/2) R(Xu, Xv, dz, N) - (1/2) II(J T_S(Xu,Xv), dz)

    with dz = (Xu - i Xv)/2 extended complex-bilinearly.  Left side and the
    bold_H derivative use 4th-order stencils; everything else is assembled
    pointwise from exact data.
    """
    if ext is None:
        ext = extrinsic.extrinsic_fields(fields)
    if holo is None:
        holo = holo_fields(surface, fields, ext)
    if "r4" not in fields:
        raise KeyError("fields must be built with with_curvature=True")
    U, V = fields["u"], fields["v"]
    lhs = dbar(surface, U, V, lambda uu, vv: phi_at(surface, uu, vv), h_scale)
    dbar_H = dbar(surface, U, V, lambda uu, vv: bold_h_at(surface, uu, vv), h_scale)
    lam2 = holo["lam"] ** 2

    r4, Xu, Xv, N = fields["r4"], fields["Xu"], fields["Xv"], fields["N"]
    r_u = np.einsum("nijkm,ni,nj,nk,nm->n", r4, Xu, Xv, Xu, N)
    r_v = np.einsum("nijkm,ni,nj,nk,nm->n", r4, Xu, Xv, Xv, N)
    r_term = 0.5 * (r_u - 1j * r_v)

    II = ext["II"]
    # J T_S(Xu, Xv): tangential torsion rotated by the complex structure
    JT = cross_metric_batch(fields["g"], fields["N"], fields["T_S"])
    comp = extrinsic.tangent_components(fields, JT)
    ii_u = comp[:, 0] * II[:, 0, 0] + comp[:, 1] * II[:, 1, 0]
    ii_v = comp[:, 0] * II[:, 0, 1] + comp[:, 1] * II[:, 1, 1]
    ii_term = 0.5 * (ii_u - 1j * ii_v)

    rhs = 0.25 * lam2 * np.conj(dbar_H) - 0.5j * r_term - 0.5 * ii_term
    return np.abs(lhs - rhs)
