"""Parameterized surfaces embedded in an ambient Riemann-Cartan 3-manifold.

A Surface is a closed-form map X(u, v) with exact partial derivatives.  The
batch entry point base_fields evaluates everything needed at arrays of
parameter points: tangents, oriented unit normal, induced metric, induced
connection coefficients, the almost complex structure, and the second
fundamental form (computed here because the induced connection needs the
same covariant derivatives).

Orientation: N = (X_u x_g X_v) / |.|, so (N, X_u, X_v) is positively
oriented in the chart and the surface orientation is the (X_u, X_v) order.
Index conventions for the induced connection mirror the ambient module.
"""

from __future__ import annotations

import numpy as np

from . import expr
from .ambient import _det3, _inv3
from .errors import (
    DegenerateParameterization, NotIsothermal, NotWeitzenboeck, OutsideChart,
    StencilOutsideDomain,
)

__all__ = ["Surface", "SurfaceSample", "cross_metric_batch"]

AREA_DENSITY_TOL = 1e-9

_EPS = np.zeros((3, 3, 3))
_EPS[0, 1, 2] = _EPS[1, 2, 0] = _EPS[2, 0, 1] = 1.0
_EPS[0, 2, 1] = _EPS[2, 1, 0] = _EPS[1, 0, 2] = -1.0


def cross_metric_batch(g, u, v):
    """Metric cross product for stacked points: g (n,3,3), u, v (n,3)."""
    det = np.linalg.det(g)
    w = np.sqrt(det)[..., None] * np.cross(u, v)
    return np.linalg.solve(g, w[..., None])[..., 0]


class SurfaceSample:
    """Everything computed at one (u, v); thin view of a batch of size 1."""

    __slots__ = ("surface", "uv", "fields")

    def __init__(self, surface, uv, fields):
        self.surface = surface
        self.uv = uv
        self.fields = fields

    def __getattr__(self, name):
        try:
            val = self.fields[name]
        except KeyError:
            raise AttributeError(name) from None
        return val[0]


class Surface:
    """Immutable parameterized surface.

    Parameters
    ----------
    amb : Ambient
    X : triple of Exprs in (u, v)
    domain : ((u0, u1), (v0, v1))
    periodic : (bool, bool)
    declared_isothermal : bool
    """

    def __init__(self, amb, X, domain, periodic=(False, False),
                 declared_isothermal=False):
        self.ambient = amb
        self.X = list(X)
        self.domain = tuple((float(a), float(b)) for a, b in domain)
        self.periodic = tuple(bool(p) for p in periodic)
        self.declared_isothermal = bool(declared_isothermal)
        self.Xu = [expr.diff(c, "u") for c in self.X]
        self.Xv = [expr.diff(c, "v") for c in self.X]
        self.Xuu = [expr.diff(c, "u") for c in self.Xu]
        self.Xuv = [expr.diff(c, "v") for c in self.Xu]
        self.Xvv = [expr.diff(c, "v") for c in self.Xv]
        self._gauss = None

    # --- domain bookkeeping ---------------------------------------------------

    def extent(self, axis):
        lo, hi = self.domain[axis]
        return hi - lo

    def contains(self, u, v):
        for val, (lo, hi), per in zip((u, v), self.domain, self.periodic):
            if not per and not (lo - 1e-12 <= np.min(val) and np.max(val) <= hi + 1e-12):
                return False
        return True

    def require_inside(self, u, v):
        if not self.contains(u, v):
            raise OutsideChart(f"(u, v) = ({u!r}, {v!r}) outside surface domain")

    # --- pointwise batch fields -------------------------------------------------

    def base_fields(self, U, V, with_curvature=False):
        """Evaluate the first-order geometry at flat arrays U, V.

        Returns a dict of stacked arrays keyed by field name.  Everything
        downstream (extrinsic forms, Gauss map, holomorphic layer) starts
        from this dict.
        """
        U = np.atleast_1d(np.asarray(U, dtype=float))
        V = np.atleast_1d(np.asarray(V, dtype=float))
        uv_bind = {"u": U, "v": V}
        memo = {}
        p = expr.eval_table(self.X, uv_bind, memo)          # (n, 3)
        Xu = expr.eval_table(self.Xu, uv_bind, memo)
        Xv = expr.eval_table(self.Xv, uv_bind, memo)
        Xuu = expr.eval_table(self.Xuu, uv_bind, memo)
        Xuv = expr.eval_table(self.Xuv, uv_bind, memo)
        Xvv = expr.eval_table(self.Xvv, uv_bind, memo)

        amb = self.ambient
        pb = amb.bindings(p)
        amb_memo = {}
        g = amb.metric_at(pb, amb_memo)
        gamma = amb.christoffel_at(pb, amb_memo)
        tor = gamma - np.swapaxes(gamma, -2, -1)

        E = np.einsum("nab,na,nb->n", g, Xu, Xu)
        F = np.einsum("nab,na,nb->n", g, Xu, Xv)
        G = np.einsum("nab,na,nb->n", g, Xv, Xv)
        det2 = E * G - F * F
        if np.any(det2 <= AREA_DENSITY_TOL ** 2):
            raise DegenerateParameterization(
                "tangents linearly dependent (area density below 1e-9)")
        area = np.sqrt(det2)
        N = cross_metric_batch(g, Xu, Xv) / area[:, None]

        # induced metric, its inverse and the orthonormal tangent frame
        G_S = np.empty(p.shape[:1] + (2, 2))
        G_S[:, 0, 0], G_S[:, 0, 1] = E, F
        G_S[:, 1, 0], G_S[:, 1, 1] = F, G
        Ginv = np.empty_like(G_S)
        Ginv[:, 0, 0] = G / det2
        Ginv[:, 0, 1] = Ginv[:, 1, 0] = -F / det2
        Ginv[:, 1, 1] = E / det2
        sqrtE = np.sqrt(E)
        s = np.sqrt(det2 / E)
        B = np.zeros_like(G_S)              # columns: E1bar, E2bar in (Xu, Xv)
        B[:, 0, 0] = 1.0 / sqrtE
        B[:, 0, 1] = -F / (E * s)
        B[:, 1, 1] = 1.0 / s
        Binv = np.linalg.inv(B)
        E1b = B[:, 0, 0, None] * Xu
        E2b = B[:, 0, 1, None] * Xu + B[:, 1, 1, None] * Xv

        # ambient covariant derivatives of the tangent fields, and II
        tang = np.stack([Xu, Xv], axis=1)            # (n, 2, 3)
        second = np.empty(p.shape[:1] + (2, 2, 3))
        second[:, 0, 0] = Xuu
        second[:, 0, 1] = Xuv
        second[:, 1, 0] = Xuv
        second[:, 1, 1] = Xvv
        cov = second + np.einsum("nkij,nai,nbj->nabk", gamma, tang, tang)
        II = np.einsum("nkl,nabk,nl->nab", g, cov, N)
        tangential = cov - II[..., None] * N[:, None, None, :]
        rhs = np.einsum("nkl,nabk,ncl->nabc", g, tangential, tang)  # (n,2,2,2): last = (Xu,Xv)
        gammaS = np.linalg.solve(G_S[:, None, None, :, :],
                                 rhs[..., None])[..., 0]            # coords in (Xu, Xv)
        gammaS = np.einsum("nabc->ncab", gammaS)                    # gammaS[c][a][b]

        # torsion 2-form on the tangent pair, tangential torsion, J
        TXuXv = np.einsum("nkij,ni,nj->nk", tor, Xu, Xv)
        tau_uv = np.einsum("nkl,nk,nl->n", g, N, TXuXv)
        T_S = TXuXv - tau_uv[:, None] * N
        JXu = cross_metric_batch(g, N, Xu)
        JXv = cross_metric_batch(g, N, Xv)

        out = {
            "u": U, "v": V, "p": p, "Xu": Xu, "Xv": Xv,
            "Xuu": Xuu, "Xuv": Xuv, "Xvv": Xvv,
            "g": g, "gamma": gamma, "torsion": tor,
            "E": E, "F": F, "G": G, "G_S": G_S, "Ginv_S": Ginv,
            "area": area, "N": N, "B": B, "Binv": Binv,
            "E1bar": E1b, "E2bar": E2b,
            "cov": cov, "II": II, "gammaS": gammaS,
            "tau_uv": tau_uv, "T_S": T_S, "JXu": JXu, "JXv": JXv,
        }
        if with_curvature:
            cur = amb.curvature_at(pb, amb_memo)
            out["r4"] = cur["r4"]
            out["rm"] = cur["rm"]
        return out

    def sample(self, u, v):
        """SurfaceSample at one parameter point."""
        self.require_inside(u, v)
        if self.ambient.chart_domain is not None:
            pt = expr.eval_table(self.X, {"u": float(u), "v": float(v)})
            self.ambient.check_inside(pt)
        fields = self.base_fields(np.array([u], dtype=float), np.array([v], dtype=float))
        return SurfaceSample(self, (float(u), float(v)), fields)

    def normal_at(self, U, V):
        """Numeric unit normal only (used by finite-difference cross checks)."""
        U = np.atleast_1d(np.asarray(U, dtype=float))
        V = np.atleast_1d(np.asarray(V, dtype=float))
        uv_bind = {"u": U, "v": V}
        memo = {}
        p = expr.eval_table(self.X, uv_bind, memo)
        Xu = expr.eval_table(self.Xu, uv_bind, memo)
        Xv = expr.eval_table(self.Xv, uv_bind, memo)
        g = self.ambient.metric_at(self.ambient.bindings(p))
        raw = cross_metric_batch(g, Xu, Xv)
        E = np.einsum("nab,na,nb->n", g, Xu, Xu)
        F = np.einsum("nab,na,nb->n", g, Xu, Xv)
        G = np.einsum("nab,na,nb->n", g, Xv, Xv)
        return raw / np.sqrt(E * G - F * F)[:, None]

    # --- intrinsic curvature ----------------------------------------------------

    def _fd_steps(self, U, axis, h):
        """Central-difference abscissae along one axis, shrinking h near
        non-periodic edges; raises when a point sits on the edge itself."""
        lo, hi = self.domain[axis]
        if self.periodic[axis]:
            return np.full_like(U, h)
        dist = np.minimum(U - lo, hi - U)
        if np.any(dist < 0):
            raise StencilOutsideDomain("sample outside the non-periodic domain")
        if np.any(dist == 0.0):
            raise StencilOutsideDomain(
                "stencil for a boundary sample of a non-periodic axis")
        return np.minimum(h, dist / 2.0)

    def gammaS_at(self, U, V):
        return self.base_fields(U, V)["gammaS"]

    def intrinsic_curvature(self, U, V, h_scale=1e-3, base=None):
        """Gaussian curvature of the induced connection, K = Scal_S / 2.

        The induced coefficients have no closed form, so their (u, v)
        derivatives use central differences (step h_scale * extent) with
        one Richardson extrapolation.
        """
        U = np.atleast_1d(np.asarray(U, dtype=float))
        V = np.atleast_1d(np.asarray(V, dtype=float))
        if base is None:
            base = self.base_fields(U, V)
        hu = self._fd_steps(U, 0, h_scale * self.extent(0))
        hv = self._fd_steps(V, 1, h_scale * self.extent(1))

        def d_gamma(axis, hs):
            def probe(sign, scale):
                if axis == 0:
                    return self.gammaS_at(U + sign * scale * hs, V)
                return self.gammaS_at(U, V + sign * scale * hs)
            d_h = (probe(+1, 1.0) - probe(-1, 1.0)) / (2.0 * hs)[:, None, None, None]
            d_h2 = (probe(+1, 0.5) - probe(-1, 0.5)) / hs[:, None, None, None]
            return (4.0 * d_h2 - d_h) / 3.0

        dG_u = d_gamma(0, hu)      # d/du gammaS[c][a][b]
        dG_v = d_gamma(1, hv)
        gS = base["gammaS"]
        # R_S(d_u, d_v) d_v = (d_u G^d_vv - d_v G^d_uv + G^d_um G^m_vv - G^d_vm G^m_uv) d_d
        vec = (dG_u[:, :, 1, 1] - dG_v[:, :, 0, 1]
               + np.einsum("ndm,nm->nd", gS[:, :, 0, :], gS[:, :, 1, 1])
               - np.einsum("ndm,nm->nd", gS[:, :, 1, :], gS[:, :, 0, 1]))
        lowered = np.einsum("nd,nd->n", vec, base["G_S"][:, :, 0])
        det2 = base["area"] ** 2
        return lowered / det2

    # --- isothermal charts --------------------------------------------------------

    def isothermal_factor(self, u, v, tol=1e-8, base=None):
        """sqrt(E) when the chart is isothermal at the sample, else raises."""
        if base is None:
            base = self.base_fields(np.atleast_1d(u), np.atleast_1d(v))
        E, F, G = base["E"], base["F"], base["G"]
        scale = np.maximum(np.abs(E), np.abs(G))
        if np.any(np.abs(E - G) > tol * scale) or np.any(np.abs(F) > tol * scale):
            i = int(np.argmax(np.abs(E - G) / scale + np.abs(F) / scale))
            raise NotIsothermal(float(E[i]), float(F[i]), float(G[i]))
        lam = np.sqrt(E)
        return lam

    # --- symbolic Gauss-map pipeline ------------------------------------------------

    def gauss_exprs(self):
        """Exact (u, v)-expressions for the Gauss map n and its derivatives.

        Frame components of the unit normal, built by composing the chart
        fields with X(u, v) and differentiating symbolically.  Only
        available for frame-defined ambients.
        """
        if self._gauss is not None:
            return self._gauss
        amb = self.ambient
        if amb.kind != "frame":
            raise NotWeitzenboeck("Gauss map needs a frame-defined ambient")
        sub = {"x": self.X[0], "y": self.X[1], "z": self.X[2]}
        cmemo = {}
        g_uv = [[expr.compose(amb.g[a][b], sub, cmemo) for b in range(3)]
                for a in range(3)]
        finv_uv = [[expr.compose(amb.frame_inv[i][j], sub, cmemo) for j in range(3)]
                   for i in range(3)]
        Xu, Xv = self.Xu, self.Xv

        def dot(vec_a, vec_b):
            acc = expr.con(0.0)
            for a in range(3):
                for b in range(3):
                    acc = expr.add(acc, expr.mul(g_uv[a][b], expr.mul(vec_a[a], vec_b[b])))
            return acc

        E = dot(Xu, Xu)
        F = dot(Xu, Xv)
        G = dot(Xv, Xv)
        area = expr.call("sqrt", expr.sub(expr.mul(E, G), expr.mul(F, F)))
        detg = _det3(g_uv)
        ginv = _inv3(g_uv, detg)
        sq = expr.call("sqrt", detg)
        lowered = []
        for l in range(3):
            i, j = (l + 1) % 3, (l + 2) % 3
            lowered.append(expr.mul(sq, expr.sub(expr.mul(Xu[i], Xv[j]),
                                                 expr.mul(Xu[j], Xv[i]))))
        n = []
        for i in range(3):
            acc = expr.con(0.0)
            for j in range(3):
                raised_j = expr.con(0.0)
                for l in range(3):
                    raised_j = expr.add(raised_j, expr.mul(ginv[j][l], lowered[l]))
                acc = expr.add(acc, expr.mul(finv_uv[i][j], raised_j))
            n.append(expr.div(acc, area))
        self._gauss = {
            "n": n,
            "dn_du": [expr.diff(c, "u") for c in n],
            "dn_dv": [expr.diff(c, "v") for c in n],
        }
        return self._gauss
