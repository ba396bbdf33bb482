"""Scene definitions, built-in scenes, sample grids, quadrature and export.

A scene document is a JSON object (extension .rcscene) with keys::

    name                  string
    ambient               {"type": "frame", "F": [[expr x3] x3]}
                          | {"type": "coefficients", "g": [[expr x3] x3],
                             "Gamma": [[[expr x3] x3] x3]}   # Gamma[k][i][j]
      .chart_domain       optional {"x": [lo, hi], ...}
    surface               {"X": [expr, expr, expr],
                           "domain": [[u0, u1], [v0, v1]],
                           "periodic": [bool, bool],
                           "isothermal": bool}
    gauge                 optional {"theta": expr, "axis": [expr x3]}
    closed                optional bool (chart covers a closed surface)
    euler_characteristic  optional int
    normal_axis           optional [expr x3]: Gauss map in frame components,
                          extended off the surface (used by gauge suites)
    tolerances            optional {suite-entry name: float}
    goldens               optional {name: expr in (u, v)}, informational

Ambient expressions use variables x, y, z; surface expressions use u, v.
Grids place uniform nodes on periodic axes (trapezoid weights) and
composite Gauss-Legendre nodes (16-point panels) on non-periodic axes, so
open-interval charts such as polar sphere coordinates never sample their
degenerate edges.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import expr, extrinsic, gaussmap, holo
from .ambient import coefficient_ambient, frame_ambient
from .errors import (
    IoError, NotClosed, NotIsothermal, NotWeitzenboeck, SceneFormatError,
    UndefinedField, UnknownScene,
)
from .gaussmap import GaugeField
from .surface import Surface

__all__ = [
    "Scene", "load_scene", "save_scene", "build_scene", "builtin",
    "builtin_names", "builtin_provenance", "SampleGrid", "make_grid",
    "integrate", "gauss_degree", "export_fields", "EXPORT_COLUMNS",
]

AMBIENT_VARS = {"x", "y", "z"}
SURFACE_VARS = {"u", "v"}

GL_PANEL = 16
DENSITY_MASK_TOL = 1e-6


class Scene:
    """A fully built scene: ambient + surface + optional gauge + metadata."""

    def __init__(self, name, amb, surf, gauge=None, closed=False, chi=None,
                 normal_axis=None, tolerances=None, goldens=None, doc=None):
        self.name = name
        self.ambient = amb
        self.surface = surf
        self.gauge = gauge
        self.closed = closed
        self.chi = chi
        self.normal_axis = normal_axis
        self.tolerances = dict(tolerances or {})
        self.goldens = dict(goldens or {})
        self.doc = doc or {}

    def to_dict(self):
        return json.loads(json.dumps(self.doc))

    def golden(self, key):
        """Evaluate a golden expression over (u, v) arrays; returns a callable."""
        e = expr.parse(self.goldens[key], SURFACE_VARS)
        return lambda U, V: expr.evaluate(e, {"u": np.asarray(U, dtype=float),
                                              "v": np.asarray(V, dtype=float)})


# --- document handling -----------------------------------------------------------


def _need(doc, field, path, kind=None):
    if field not in doc:
        raise SceneFormatError(f"{path}.{field}" if path else field, "required")
    val = doc[field]
    if kind is not None and not isinstance(val, kind):
        raise SceneFormatError(f"{path}.{field}" if path else field,
                               f"expected {kind.__name__}")
    return val


def _parse_field(text, allowed, path):
    if not isinstance(text, str):
        raise SceneFormatError(path, "expected an expression string")
    try:
        return expr.parse(text, allowed)
    except Exception as err:
        raise SceneFormatError(path, str(err)) from err


def _parse_matrix(rows, allowed, path, shape):
    if not isinstance(rows, list) or len(rows) != shape[0]:
        raise SceneFormatError(path, f"expected a list of {shape[0]} rows")
    out = []
    for i, row in enumerate(rows):
        if len(shape) == 1:
            out.append(_parse_field(rows[i], allowed, f"{path}[{i}]"))
            continue
        out.append(_parse_matrix(row, allowed, f"{path}[{i}]", shape[1:]))
    return out


def build_scene(doc) -> Scene:
    """Validate a scene document and construct the Scene."""
    name = doc.get("name", "unnamed")
    adoc = _need(doc, "ambient", "", dict)
    kind = _need(adoc, "type", "ambient", str)
    chart_domain = None
    if adoc.get("chart_domain") is not None:
        chart_domain = {k: (float(v[0]), float(v[1]))
                        for k, v in adoc["chart_domain"].items()}
    if kind == "frame":
        F = _parse_matrix(_need(adoc, "F", "ambient"), AMBIENT_VARS,
                          "ambient.F", (3, 3))
        amb = frame_ambient(F, chart_domain=chart_domain)
    elif kind == "coefficients":
        g = _parse_matrix(_need(adoc, "g", "ambient"), AMBIENT_VARS,
                          "ambient.g", (3, 3))
        gamma = _parse_matrix(_need(adoc, "Gamma", "ambient"), AMBIENT_VARS,
                              "ambient.Gamma", (3, 3, 3))
        amb = coefficient_ambient(g, gamma, chart_domain=chart_domain)
    else:
        raise SceneFormatError("ambient.type", f"unknown ambient type {kind!r}")

    sdoc = _need(doc, "surface", "", dict)
    X = _parse_matrix(_need(sdoc, "X", "surface"), SURFACE_VARS, "surface.X", (3,))
    domain = _need(sdoc, "domain", "surface", list)
    try:
        domain = ((float(domain[0][0]), float(domain[0][1])),
                  (float(domain[1][0]), float(domain[1][1])))
    except (TypeError, IndexError, ValueError) as err:
        raise SceneFormatError("surface.domain", "expected [[u0,u1],[v0,v1]]") from err
    periodic = sdoc.get("periodic", [False, False])
    surf = Surface(amb, X, domain, periodic, bool(sdoc.get("isothermal", False)))

    gauge = None
    if doc.get("gauge") is not None:
        gdoc = doc["gauge"]
        theta = _parse_field(_need(gdoc, "theta", "gauge"), AMBIENT_VARS, "gauge.theta")
        axis = _parse_matrix(_need(gdoc, "axis", "gauge"), AMBIENT_VARS,
                             "gauge.axis", (3,))
        gauge = GaugeField(theta, tuple(axis))

    normal_axis = None
    if doc.get("normal_axis") is not None:
        normal_axis = tuple(_parse_matrix(doc["normal_axis"], AMBIENT_VARS,
                                          "normal_axis", (3,)))

    scene = Scene(
        name, amb, surf, gauge=gauge,
        closed=bool(doc.get("closed", False)),
        chi=doc.get("euler_characteristic"),
        normal_axis=normal_axis,
        tolerances=doc.get("tolerances"),
        goldens=doc.get("goldens"),
        doc=doc,
    )
    _validate_scene(scene)
    return scene


def _validate_scene(scene, n=5):
    """Cheap structural validation at a coarse grid of surface samples."""
    (u0, u1), (v0, v1) = scene.surface.domain
    us = np.linspace(u0, u1, n + 2)[1:-1]
    vs = np.linspace(v0, v1, n + 2)[1:-1]
    U, V = [a.ravel() for a in np.meshgrid(us, vs, indexing="ij")]
    pts = expr.eval_table(scene.surface.X, {"u": U, "v": V})
    scene.ambient.validate(pts)
    scene.surface.base_fields(U, V)


def load_scene(path) -> Scene:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise IoError(f"cannot read scene file {path!r}: {err}") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SceneFormatError("", f"not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise SceneFormatError("", "top level must be an object")
    return build_scene(doc)


def save_scene(scene: Scene, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(scene.doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as err:
        raise IoError(f"cannot write scene file {path!r}: {err}") from err


# --- built-in scenes ---------------------------------------------------------------

_TWO_PI = 2.0 * math.pi

_BUILTINS = {}
_PROVENANCE = {}


def _register(name, provenance):
    def deco(fn):
        _BUILTINS[name] = fn
        _PROVENANCE[name] = provenance
        return fn
    return deco


def builtin_names():
    return sorted(_BUILTINS)


def builtin_provenance(name):
    return _PROVENANCE[name]


def builtin(name, **params) -> Scene:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownScene(f"no builtin scene named {name!r}; "
                           f"known: {', '.join(builtin_names())}") from None
    try:
        doc = factory(**params)
    except TypeError as err:
        raise SceneFormatError("params", f"bad parameters for {name}: {err}") from err
    return build_scene(doc)


_IDENTITY_F = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]


@_register("euclidean_plane", "flat plane in the standard Euclidean frame")
def _euclidean_plane():
    return {
        "name": "euclidean_plane",
        "ambient": {"type": "frame", "F": _IDENTITY_F},
        "surface": {"X": ["u", "v", "0"], "domain": [[0.0, 1.0], [0.0, 1.0]],
                    "periodic": [False, False], "isothermal": True},
        "normal_axis": ["0", "0", "1"],
        "goldens": {"H": "0", "star_tau": "0", "K_e": "0", "area": "1"},
    }


@_register("rotated_frame_plane",
           "plane z=0 seen through a frame rotated by angle theta(x,y,z) about a fixed axis")
def _rotated_frame_plane(theta="x*y", e=(-1.0, 0.0, 0.0)):
    e = tuple(float(c) for c in e)
    norm = math.sqrt(sum(c * c for c in e))
    if abs(norm - 1.0) > 1e-12:
        e = tuple(c / norm for c in e)
    theta_e = expr.parse(theta, AMBIENT_VARS)
    F = gaussmap.rodrigues_exprs(theta_e, tuple(expr.con(c) for c in e))
    on_surface = {"x": expr.var("u"), "y": expr.var("v"), "z": expr.con(0.0)}
    th_x = expr.compose(expr.diff(theta_e, "x"), on_surface)
    th_y = expr.compose(expr.diff(theta_e, "y"), on_surface)
    e1, e2 = expr.con(e[0]), expr.con(e[1])
    golden_H = expr.sub(expr.mul(th_x, e2), expr.mul(th_y, e1))
    golden_st = expr.neg(expr.add(expr.mul(th_x, e1), expr.mul(th_y, e2)))
    golden_phi_re = expr.mul(expr.con(0.25),
                             expr.add(expr.mul(th_y, e1), expr.mul(th_x, e2)))
    golden_phi_im = expr.mul(expr.con(0.25),
                             expr.sub(expr.mul(th_x, e1), expr.mul(th_y, e2)))
    return {
        "name": "rotated_frame_plane",
        "ambient": {"type": "frame", "F": [[str(c) for c in row] for row in F]},
        "surface": {"X": ["u", "v", "0"], "domain": [[-2.0, 2.0], [-2.0, 2.0]],
                    "periodic": [False, False], "isothermal": True},
        "normal_axis": [str(F[2][0]), str(F[2][1]), str(F[2][2])],
        "goldens": {
            "H": str(golden_H), "star_tau": str(golden_st),
            "phi_re": str(golden_phi_re), "phi_im": str(golden_phi_im),
            "K_e": "0",
        },
    }


_CATENOID_G_ROWS = [
    ["-sin(x)", "tanh(y)*cos(x)", "sech(y)*cos(x)"],
    ["cos(x)", "tanh(y)*sin(x)", "sech(y)*sin(x)"],
    ["0", "sech(y)", "-tanh(y)"],
]


@_register("catenoid_frame_plane",
           "plane z=0 seen through the orthonormal frame of a catenoid")
def _catenoid_frame_plane():
    # frame matrix is the transpose (inverse) of the catenoid frame matrix G
    F = [[_CATENOID_G_ROWS[j][i] for j in range(3)] for i in range(3)]
    return {
        "name": "catenoid_frame_plane",
        "ambient": {"type": "frame", "F": F},
        "surface": {"X": ["u", "v", "0"], "domain": [[0.0, _TWO_PI], [-2.0, 2.0]],
                    "periodic": [True, False], "isothermal": True},
        "normal_axis": ["sech(y)*cos(x)", "sech(y)*sin(x)", "-tanh(y)"],
        "goldens": {
            "H": "0", "star_tau": "0", "K_e": "-sech(v)^2",
            "W_diag_1": "-sech(v)", "W_diag_2": "sech(v)",
            "conformal_factor": "sech(v)^2",
            "phi_re": "-sech(v)/2", "phi_im": "0",
        },
    }


@_register("catenoid_frame_cylinder",
           "unit cylinder seen through a catenoid frame transported to cylindrical angles")
def _catenoid_frame_cylinder():
    F = [
        ["(y^2 + sech(z)*x^2)/(x^2 + y^2)",
         "x*y*(sech(z) - 1)/(x^2 + y^2)",
         "-tanh(z)*x/sqrt(x^2 + y^2)"],
        ["x*y*(sech(z) - 1)/(x^2 + y^2)",
         "(x^2 + sech(z)*y^2)/(x^2 + y^2)",
         "-tanh(z)*y/sqrt(x^2 + y^2)"],
        ["tanh(z)*x/sqrt(x^2 + y^2)",
         "tanh(z)*y/sqrt(x^2 + y^2)",
         "sech(z)"],
    ]
    return {
        "name": "catenoid_frame_cylinder",
        "ambient": {"type": "frame", "F": F},
        "surface": {"X": ["cos(u)", "sin(u)", "v"],
                    "domain": [[0.0, _TWO_PI], [-2.0, 2.0]],
                    "periodic": [True, False], "isothermal": True},
        "normal_axis": ["sech(z)*x/sqrt(x^2 + y^2)",
                        "sech(z)*y/sqrt(x^2 + y^2)",
                        "-tanh(z)"],
        "goldens": {
            "H": "0", "star_tau": "0", "K_e": "-sech(v)^2",
            "W_diag_1": "-sech(v)", "W_diag_2": "sech(v)",
        },
    }


@_register("cartan_schouten_sphere",
           "unit sphere in flat space with the torsionful constant-lambda connection")
def _cartan_schouten_sphere(lam=0.3):
    lam = float(lam)
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
           (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}
    gamma = [[[str(lam * eps.get((i, j, k), 0)) if eps.get((i, j, k), 0) else "0"
               for j in range(3)] for i in range(3)] for k in range(3)]
    lam_s = repr(lam)
    return {
        "name": "cartan_schouten_sphere",
        "ambient": {"type": "coefficients", "g": _IDENTITY_F, "Gamma": gamma},
        "surface": {"X": ["sin(u)*cos(v)", "sin(u)*sin(v)", "cos(u)"],
                    "domain": [[0.0, math.pi], [0.0, _TWO_PI]],
                    "periodic": [False, True], "isothermal": False},
        "closed": True,
        "euler_characteristic": 2,
        "goldens": {
            "H": "-2", "star_tau": f"2*({lam_s})",
            "K_e": f"1 + ({lam_s})^2", "K": "1",
            "sec_ambient": f"-(({lam_s})^2)",
            "area": "4*pi", "total_curvature": "4*pi",
            "W_on_00": "-1", "W_on_01": f"-({lam_s})",
            "W_on_10": lam_s, "W_on_11": "-1",
        },
    }


@_register("round_sphere_standard",
           "round unit sphere in the standard Euclidean frame")
def _round_sphere_standard():
    r = "sqrt(x^2 + y^2 + z^2)"
    return {
        "name": "round_sphere_standard",
        "ambient": {"type": "frame", "F": _IDENTITY_F},
        "surface": {"X": ["sin(u)*cos(v)", "sin(u)*sin(v)", "cos(u)"],
                    "domain": [[0.0, math.pi], [0.0, _TWO_PI]],
                    "periodic": [False, True], "isothermal": False},
        "closed": True,
        "euler_characteristic": 2,
        "normal_axis": [f"x/{r}", f"y/{r}", f"z/{r}"],
        "goldens": {"H": "-2", "star_tau": "0", "K_e": "1", "K": "1",
                    "area": "4*pi", "area_density": "sin(u)"},
    }


@_register("torus_standard",
           "torus of revolution in the standard Euclidean frame")
def _torus_standard(R=2.0, r=0.5):
    R, r = float(R), float(r)
    Rs, rs = repr(R), repr(r)
    rho = "sqrt(x^2 + y^2)"
    d = f"sqrt(({rho} - {Rs})^2 + z^2)"
    return {
        "name": "torus_standard",
        "ambient": {"type": "frame", "F": _IDENTITY_F},
        "surface": {
            "X": [f"(({Rs}) + ({rs})*cos(v))*cos(u)",
                  f"(({Rs}) + ({rs})*cos(v))*sin(u)",
                  f"({rs})*sin(v)"],
            "domain": [[0.0, _TWO_PI], [0.0, _TWO_PI]],
            "periodic": [True, True], "isothermal": False},
        "closed": True,
        "euler_characteristic": 0,
        "normal_axis": [f"({rho} - {Rs})/({d})*x/{rho}",
                        f"({rho} - {Rs})/({d})*y/{rho}",
                        f"z/({d})"],
        "goldens": {"star_tau": "0",
                    "K_e": f"cos(v)/(({rs})*(({Rs}) + ({rs})*cos(v)))",
                    "area": f"4*pi^2*({Rs})*({rs})"},
    }


# --- sample grids -------------------------------------------------------------------


def _axis_nodes(lo, hi, n, periodic):
    """Quadrature nodes/weights on one axis.

    Periodic: n uniform nodes, spacing weights (the periodic trapezoid
    rule).  Non-periodic: composite Gauss-Legendre with ceil(n/16)-panel
    split of n nodes, which keeps open-interval charts off their edges.
    """
    n = int(n)
    if n < 2:
        raise ValueError("grid resolution must be at least 2 per axis")
    if periodic:
        h = (hi - lo) / n
        return lo + h * np.arange(n), np.full(n, h)
    panels = max(1, math.ceil(n / GL_PANEL))
    counts = [n // panels + (1 if i < n % panels else 0) for i in range(panels)]
    width = (hi - lo) / panels
    nodes, weights = [], []
    for i, c in enumerate(counts):
        x, w = np.polynomial.legendre.leggauss(c)
        a = lo + i * width
        nodes.append(a + (x + 1.0) * 0.5 * width)
        weights.append(w * 0.5 * width)
    return np.concatenate(nodes), np.concatenate(weights)


class SampleGrid:
    """Deterministic tensor grid of surface samples with lazy field caches.

    Row-major ordering: flat index = iu * nv + iv.  The interior mask
    excludes two grid-stencil widths at non-periodic edges and samples
    whose area density falls below 1e-6 (chart poles).
    """

    def __init__(self, scene, nu, nv):
        self.scene = scene
        self.surface = scene.surface
        (u0, u1), (v0, v1) = self.surface.domain
        self.u_nodes, self.u_weights = _axis_nodes(u0, u1, nu, self.surface.periodic[0])
        self.v_nodes, self.v_weights = _axis_nodes(v0, v1, nv, self.surface.periodic[1])
        self.nu, self.nv = len(self.u_nodes), len(self.v_nodes)
        UU, VV = np.meshgrid(self.u_nodes, self.v_nodes, indexing="ij")
        self.U, self.V = UU.ravel(), VV.ravel()
        self.weights = np.outer(self.u_weights, self.v_weights).ravel()
        self.requested = (int(nu), int(nv))
        self._cache = {}

    # lazy heavy blocks --------------------------------------------------------

    @property
    def base(self):
        if "base" not in self._cache:
            self._cache["base"] = self.surface.base_fields(self.U, self.V,
                                                           with_curvature=True)
        return self._cache["base"]

    @property
    def ext(self):
        if "ext" not in self._cache:
            self._cache["ext"] = extrinsic.extrinsic_fields(self.base)
        return self._cache["ext"]

    @property
    def gauss(self):
        if "gauss" not in self._cache:
            self._cache["gauss"] = gaussmap.gauss_field(self.surface, self.base)
        return self._cache["gauss"]

    @property
    def holo(self):
        if "holo" not in self._cache:
            self._cache["holo"] = holo.holo_fields(self.surface, self.base, self.ext)
        return self._cache["holo"]

    @property
    def interior_mask(self):
        if "interior" not in self._cache:
            mask = self.base["area"] >= DENSITY_MASK_TOL
            for axis, (nodes, req) in enumerate(
                    ((self.U, self.requested[0]), (self.V, self.requested[1]))):
                if self.surface.periodic[axis]:
                    continue
                lo, hi = self.surface.domain[axis]
                margin = 2.0 * (hi - lo) / req
                mask &= (nodes - lo >= margin) & (hi - nodes >= margin)
            self._cache["interior"] = mask
        return self._cache["interior"]

    @property
    def intrinsic_K(self):
        if "K" not in self._cache:
            self._cache["K"] = self.surface.intrinsic_curvature(
                self.U, self.V, base=self.base)
        return self._cache["K"]

    # named scalar fields -----------------------------------------------------

    def field(self, name):
        if name in ("one", "1"):
            return np.ones_like(self.U)
        if name == "K":
            return self.intrinsic_K
        simple = {
            "K_e": lambda: self.ext["K_e"],
            "H": lambda: self.ext["H"],
            "star_tau": lambda: self.ext["star_tau"],
            "abs_H": lambda: np.abs(self.ext["bold_H"]),
            "area_density": lambda: self.base["area"],
            "abs_phi": lambda: np.abs(self.holo["phi"]),
            "abs_psi": lambda: np.abs(self.holo["psi"]),
            "degree_integrand": lambda: gaussmap.degree_integrand(self.gauss),
        }
        if name not in simple:
            raise UndefinedField(f"no field named {name!r}")
        return simple[name]()


def make_grid(scene, nu, nv) -> SampleGrid:
    return SampleGrid(scene, nu, nv)


def integrate(grid: SampleGrid, field) -> float:
    """Integral of the named scalar field against the surface area form."""
    f = grid.field(field) if isinstance(field, str) else np.asarray(field)
    vals = grid.weights * f * grid.base["area"]
    return float(np.sum(vals))


def gauss_degree(grid: SampleGrid):
    """Mapping degree of the Gauss map on a closed chart.

    Requires both axes periodic, or the scene declared closed with the
    area density vanishing at the non-periodic edges (polar charts).
    Returns {degree, residual, raw}; residual beyond 1e-3 fails loudly.
    """
    scene = grid.scene
    surf = grid.surface
    if not all(surf.periodic):
        if not scene.closed:
            raise NotClosed("Gauss-map degree needs a closed surface chart")
        for axis in (0, 1):
            if surf.periodic[axis]:
                continue
            lo, hi = surf.domain[axis]
            for edge in (lo, hi):
                uv = [0.5 * sum(surf.domain[0]), 0.5 * sum(surf.domain[1])]
                uv[axis] = edge + (1e-7 if edge == lo else -1e-7) * surf.extent(axis)
                probe = surf.base_fields(np.array([uv[0]]), np.array([uv[1]]))
                if probe["area"][0] > 1e-3:
                    raise NotClosed(
                        "non-periodic axis without vanishing density at its edge")
    raw = float(np.sum(grid.weights * gaussmap.degree_integrand(grid.gauss))
                / (4.0 * math.pi))
    degree = int(round(raw))
    residual = abs(raw - degree)
    if residual > 1e-3:
        raise NotClosed(
            f"degree integral {raw!r} is not within 1e-3 of an integer")
    return {"degree": degree, "residual": residual, "raw": raw}


# --- field export --------------------------------------------------------------------

EXPORT_COLUMNS = [
    "u", "v", "p_x", "p_y", "p_z", "H", "star_tau", "K_e", "K_intrinsic",
    "abs_phi", "abs_psi", "n_1", "n_2", "n_3", "flags",
]


def _fmt(x):
    return f"{x:.17g}"


def export_fields(grid: SampleGrid, path, classify_tol=None):
    """Tabular export: one row per sample, 17 significant digits, LF line
    endings, deterministic row-major ordering.

    abs_phi/abs_psi are blank (nan) off isothermal charts, n_i off
    frame-defined ambients.  flags packs the classifiers as bit 1 =
    umbilic, 2 = minimal, 4 = geodesic.
    """
    if classify_tol is None:
        classify_tol = grid.scene.tolerances.get("classify", 1e-7)
    base, ext = grid.base, grid.ext
    n = grid.U.shape[0]
    K = grid.intrinsic_K
    try:
        hol = grid.holo
        abs_phi, abs_psi = np.abs(hol["phi"]), np.abs(hol["psi"])
    except NotIsothermal:
        abs_phi = abs_psi = np.full(n, np.nan)
    try:
        nf = grid.gauss["n"]
    except NotWeitzenboeck:
        nf = np.full((n, 3), np.nan)
    cls = extrinsic.classify(ext, tol=classify_tol)
    flags = (cls["umbilic"].astype(int)
             + 2 * cls["minimal_point"].astype(int)
             + 4 * cls["geodesic_point"].astype(int))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(EXPORT_COLUMNS) + "\n")
            for i in range(n):
                row = [
                    _fmt(grid.U[i]), _fmt(grid.V[i]),
                    _fmt(base["p"][i, 0]), _fmt(base["p"][i, 1]), _fmt(base["p"][i, 2]),
                    _fmt(ext["H"][i]), _fmt(ext["star_tau"][i]), _fmt(ext["K_e"][i]),
                    _fmt(K[i]), _fmt(abs_phi[i]), _fmt(abs_psi[i]),
                    _fmt(nf[i, 0]), _fmt(nf[i, 1]), _fmt(nf[i, 2]),
                    str(int(flags[i])),
                ]
                fh.write(",".join(row) + "\n")
    except OSError as err:
        raise IoError(f"cannot write field export {path!r}: {err}") from err
