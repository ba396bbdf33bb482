"""Riemann-Cartan 3-manifolds on a coordinate chart of R^3.

An ambient manifold carries a metric and a metric-compatible connection in
chart components, built either from a global frame field (the flat
connection making the frame parallel, with the metric that declares the
frame orthonormal) or from explicit coefficients g_ij and Gamma^k_ij.

Index conventions, fixed here once for the whole package:

    nabla_{d_i} d_j = Gamma^k_ij d_k            gamma[k][i][j]
    T^k_ij  = Gamma^k_ij - Gamma^k_ji           torsion, antisym in (i,j)
    R(d_i, d_j) d_k = R^l_kij d_l               rm[l,k,i,j]
    R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik
              + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    R4[i,j,k,m] = <R(d_i,d_j) d_k, d_m>         lowered curvature
    Ric_ij  = sum_l R^l_jli                     trace over the first slot
    Scal    = g^ij Ric_ij

Ric need not be symmetric when torsion is present.  All connection
derivatives are exact (symbolic differentiation of the coefficient
expressions); finite differences appear only in test oracles.
"""

from __future__ import annotations

import numpy as np

from . import expr
from .errors import (
    DegeneratePlane, IncompatibleConnection, OutsideChart, SingularFrame,
)

__all__ = ["Ambient", "frame_ambient", "coefficient_ambient", "CHART_VARS"]

CHART_VARS = ("x", "y", "z")

FRAME_DET_TOL = 1e-9
COMPAT_HARD_TOL = 1e-6


def _det3(M):
    """Symbolic determinant of a 3x3 nested list of Exprs."""
    a, b, c = M[0]
    d, e, f = M[1]
    g, h, i = M[2]
    t1 = expr.mul(a, expr.sub(expr.mul(e, i), expr.mul(f, h)))
    t2 = expr.mul(b, expr.sub(expr.mul(d, i), expr.mul(f, g)))
    t3 = expr.mul(c, expr.sub(expr.mul(d, h), expr.mul(e, g)))
    return expr.add(expr.sub(t1, t2), t3)


def _inv3(M, det):
    """Symbolic inverse via adjugate / determinant."""
    def cof(r, c):
        rows = [i for i in range(3) if i != r]
        cols = [j for j in range(3) if j != c]
        minor = expr.sub(
            expr.mul(M[rows[0]][cols[0]], M[rows[1]][cols[1]]),
            expr.mul(M[rows[0]][cols[1]], M[rows[1]][cols[0]]))
        return minor if (r + c) % 2 == 0 else expr.neg(minor)

    # adj = cofactor transpose
    return [[expr.div(cof(j, i), det) for j in range(3)] for i in range(3)]


class Ambient:
    """Immutable chart-level Riemann-Cartan structure.

    Use frame_ambient or coefficient_ambient to construct.  Evaluation
    bindings map 'x', 'y', 'z' to floats or equally-shaped arrays.
    """

    def __init__(self, kind, g, gamma, frame=None, frame_inv=None,
                 frame_det=None, chart_domain=None):
        self.kind = kind                  # "frame" | "coefficients"
        self.g = g                        # g[i][j] Exprs
        self.gamma = gamma                # gamma[k][i][j] Exprs
        self.frame = frame                # frame[i][j]: coord i of frame vector j
        self.frame_inv = frame_inv
        self.frame_det = frame_det
        self.chart_domain = chart_domain  # optional {var: (lo, hi)}
        self._dgamma = None
        self._dg = None

    # --- symbolic lazies ---------------------------------------------------

    @property
    def dgamma(self):
        """dgamma[m][k][i][j] = d_m Gamma^k_ij (exact)."""
        if self._dgamma is None:
            self._dgamma = [
                [[[expr.diff(self.gamma[k][i][j], v) for j in range(3)]
                  for i in range(3)] for k in range(3)]
                for v in CHART_VARS]
        return self._dgamma

    @property
    def dg(self):
        """dg[m][a][b] = d_m g_ab (exact)."""
        if self._dg is None:
            self._dg = [
                [[expr.diff(self.g[a][b], v) for b in range(3)]
                 for a in range(3)] for v in CHART_VARS]
        return self._dg

    # --- chart handling ------------------------------------------------------

    def check_inside(self, p):
        if self.chart_domain is None:
            return
        for k, name in enumerate(CHART_VARS):
            box = self.chart_domain.get(name)
            if box is None:
                continue
            lo, hi = box
            if not (lo <= p[k] <= hi):
                raise OutsideChart(f"{name} = {p[k]!r} outside [{lo}, {hi}]")

    @staticmethod
    def bindings(points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            return {"x": pts[0], "y": pts[1], "z": pts[2]}
        return {"x": pts[..., 0], "y": pts[..., 1], "z": pts[..., 2]}

    # --- batch field evaluation ----------------------------------------------

    def metric_at(self, bindings, memo=None):
        return expr.eval_table(self.g, bindings, memo)

    def christoffel_at(self, bindings, memo=None):
        if self.kind == "frame":
            det = expr.eval_table(self.frame_det, bindings, memo)
            if np.any(np.abs(det) < FRAME_DET_TOL):
                raise SingularFrame(f"|det F| fell below {FRAME_DET_TOL}")
            if np.any(det < 0.0):
                raise SingularFrame("frame is negatively oriented (det F < 0)")
        return expr.eval_table(self.gamma, bindings, memo)

    def torsion_at(self, bindings, memo=None):
        G = self.christoffel_at(bindings, memo)
        return G - np.swapaxes(G, -2, -1)

    def curvature_at(self, bindings, memo=None):
        """Returns dict with rm, r4 (lowered), ric, scal for batched points."""
        if memo is None:
            memo = {}
        G = self.christoffel_at(bindings, memo)
        D = expr.eval_table(self.dgamma, bindings, memo)
        g = self.metric_at(bindings, memo)
        return self._curvature_from(G, D, g)

    @staticmethod
    def _curvature_from(G, D, g):
        term1 = D.transpose(0, 2, 4, 1, 3)
        term2 = D.transpose(0, 2, 4, 3, 1)
        term3 = np.einsum("nlim,nmjk->nlkij", G, G)
        term4 = np.einsum("nljm,nmik->nlkij", G, G)
        rm = term1 - term2 + term3 - term4
        r4 = np.einsum("nlkij,nlm->nijkm", rm, g)
        ric = np.einsum("nljli->nij", rm)
        ginv = np.linalg.inv(g)
        scal = np.einsum("nij,nij->n", ginv, ric)
        return {"rm": rm, "r4": r4, "ric": ric, "scal": scal}

    def dmetric_at(self, bindings, memo=None):
        return expr.eval_table(self.dg, bindings, memo)

    def metric_compat_residual_at(self, bindings, memo=None):
        if memo is None:
            memo = {}
        G = self.christoffel_at(bindings, memo)
        g = self.metric_at(bindings, memo)
        dg = self.dmetric_at(bindings, memo)
        single = G.ndim == 3
        if single:
            G, g, dg = G[None], g[None], dg[None]
        t1 = np.einsum("nlma,nlb->nmab", G, g)
        t2 = np.einsum("nlmb,nal->nmab", G, g)
        res = np.max(np.abs(dg - t1 - t2), axis=(1, 2, 3))
        return float(res[0]) if single else res

    # --- point-level operations ------------------------------------------------

    def christoffel(self, p):
        self.check_inside(p)
        return self.christoffel_at(self.bindings(p))

    def torsion(self, p):
        self.check_inside(p)
        return self.torsion_at(self.bindings(p))

    def curvature(self, p):
        self.check_inside(p)
        b = self.bindings(p)
        memo = {}
        G = self.christoffel_at(b, memo)
        D = expr.eval_table(self.dgamma, b, memo)
        g = self.metric_at(b, memo)
        out = self._curvature_from(G[None], D[None], g[None])
        return {k: (v[0] if hasattr(v, "ndim") else v) for k, v in out.items()}

    def metric_compat_residual(self, p):
        self.check_inside(p)
        return self.metric_compat_residual_at(self.bindings(p))

    def sectional(self, p, u, v):
        """Sectional curvature of span{u, v}: R(u,v,v,u) / gram determinant."""
        self.check_inside(p)
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        cur = self.curvature(p)
        g = self.metric_at(self.bindings(p))
        den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
        if den < 1e-12:
            raise DegeneratePlane(f"gram determinant {den!r} below 1e-12")
        num = np.einsum("ijkm,i,j,k,m->", cur["r4"], u, v, v, u)
        return float(num / den)

    def sufficient_condition_check(self, p, tol=1e-8):
        """Tests Ric proportional to g and torsion proportional to the
        metric cross product, the hypothesis making the L tensor vanish."""
        self.check_inside(p)
        b = self.bindings(p)
        memo = {}
        cur = self.curvature(p)
        g = self.metric_at(b, memo)
        T = self.torsion_at(b, memo)
        ric_dev = np.max(np.abs(cur["ric"] - (cur["scal"] / 3.0) * g))
        # cross tensor C^k_ij = sqrt(det g) g^kl eps_lij
        eps = np.zeros((3, 3, 3))
        eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
        eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
        ginv = np.linalg.inv(g)
        C = np.sqrt(np.linalg.det(g)) * np.einsum("kl,lij->kij", ginv, eps)
        cc = np.sum(C * C)
        kappa = np.sum(T * C) / cc if cc > 0 else 0.0
        tor_dev = np.max(np.abs(T - kappa * C))
        return {
            "ricci_proportional": bool(ric_dev <= tol),
            "torsion_proportional": bool(tor_dev <= tol),
            "ricci_deviation": float(ric_dev),
            "torsion_deviation": float(tor_dev),
            "kappa": float(kappa),
        }

    # --- validation ---------------------------------------------------------------

    def validate(self, points):
        """Run the construction-time guards at the given sample points."""
        b = self.bindings(np.atleast_2d(np.asarray(points, dtype=float)))
        memo = {}
        if self.kind == "frame":
            det = expr.eval_table(self.frame_det, b, memo)
            if np.any(np.abs(det) < FRAME_DET_TOL):
                raise SingularFrame(
                    f"frame determinant within {FRAME_DET_TOL} of zero at a sample")
            if np.any(det < 0.0):
                raise SingularFrame("frame is negatively oriented at a sample")
        g = self.metric_at(b, memo)
        sym = np.max(np.abs(g - np.swapaxes(g, -2, -1)))
        if sym > 1e-12:
            raise IncompatibleConnection(f"metric not symmetric (deviation {sym:.3e})")
        eig = np.linalg.eigvalsh(g)
        if np.any(eig <= 0.0):
            raise IncompatibleConnection("metric not positive definite at a sample")
        res = self.metric_compat_residual_at(b, memo)
        worst = float(np.max(res))
        if worst > COMPAT_HARD_TOL:
            raise IncompatibleConnection(
                f"metric compatibility residual {worst:.3e} exceeds {COMPAT_HARD_TOL}")
        return worst


def frame_ambient(F, chart_domain=None) -> Ambient:
    """Ambient defined by a global frame field.

    F is a 3x3 nested list of Exprs; column j holds the chart components of
    the j-th frame vector.  The metric makes the frame orthonormal,
    g = (F^-1)^T (F^-1), and the connection coefficients are
    Gamma^k_ij = sum_m F[k][m] d_i (F^-1)[m][j], the flat connection whose
    parallel fields have constant frame components.
    """
    det = _det3(F)
    Finv = _inv3(F, det)
    cols = [[Finv[i][a] for i in range(3)] for a in range(3)]
    g = [[_dot3(cols[a], cols[b]) for b in range(3)] for a in range(3)]
    gamma = [
        [[_sum3([expr.mul(F[k][m], expr.diff(Finv[m][j], CHART_VARS[i]))
                 for m in range(3)]) for j in range(3)] for i in range(3)]
        for k in range(3)]
    return Ambient("frame", g, gamma, frame=F, frame_inv=Finv,
                   frame_det=det, chart_domain=chart_domain)


def coefficient_ambient(g, gamma, chart_domain=None) -> Ambient:
    """Ambient defined directly by metric and connection coefficient Exprs;
    gamma is indexed gamma[k][i][j] with nabla_{d_i} d_j = Gamma^k_ij d_k."""
    return Ambient("coefficients", g, gamma, chart_domain=chart_domain)


def _dot3(u, v):
    return _sum3([expr.mul(u[i], v[i]) for i in range(3)])


def _sum3(terms):
    out = terms[0]
    for t in terms[1:]:
        out = expr.add(out, t)
    return out
