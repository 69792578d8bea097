"""
Nodal discontinuous Galerkin discretization of the acoustic wave equation on (curved)
triangles.

The reference element is the triangle with vertices (-1,-1), (1,-1), (-1,1) carrying
warp-and-blend nodes and an orthonormal modal basis. Mass and stiffness-like matrices
are integrated with a collapsed-coordinate cubature, and edge terms with Gauss points.
Local edges are parametrized counter-clockwise by t in [-1, 1]:

    edge 0: (t, -1)      edge 1: (-t, t)      edge 2: (-1, -t)

The right half of the domain is meshed by splitting a structured quad grid in the
parameter square of the right-half transform. Edges on the curved interface are moved to
the curve and the interior nodes of their elements are blended; all other elements stay
straight-sided.
"""

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy import special

from sbpglue.fd_solver import BlockState, FacePenalty, FaceTrace, Material, boundary_penalty
from sbpglue.geometry import RightTransform, Transform
from sbpglue.sbpglue_exceptions import (
    GridTooSmall,
    NegativeAlpha,
    NonPositiveJacobian,
    ShapeMismatch,
    SingularMass,
    UnresolvedFace,
    UnsupportedOrder,
)
from sbpglue.sbpglue_logger import SbpGlueLogger
from sbpglue.sbpglue_types import DgEdge

_LOGGER = SbpGlueLogger()

# warp-and-blend optimized blending parameters for q = 1..5
WARP_ALPHA = (0.0, 0.0, 1.4152, 0.1001, 0.2751)

# d(r, s)/dt along each local edge
EDGE_DIRECTIONS = np.array([[1.0, 0.0], [-1.0, 1.0], [0.0, -1.0]])

# (start vertex, end vertex, opposite vertex) of each local edge
EDGE_VERTICES = ((0, 1, 2), (1, 2, 0), (2, 0, 1))

BASE_INTERFACE_RESOLUTION = 64

DgState = BlockState


def jacobi_p(x, alpha: float, beta: float, n: int) -> np.ndarray:
    """Orthonormal Jacobi polynomial of type (alpha, beta) and degree n."""
    x = np.asarray(x, dtype=float)
    gamma = (
        2.0 ** (alpha + beta + 1) / (2 * n + alpha + beta + 1)
        * special.gamma(n + alpha + 1) * special.gamma(n + beta + 1)
        / (special.gamma(n + alpha + beta + 1) * math.factorial(n))
    )
    return special.eval_jacobi(n, alpha, beta, x) / np.sqrt(gamma)


def grad_jacobi_p(x, alpha: float, beta: float, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.zeros_like(x)
    return np.sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(x, alpha + 1, beta + 1, n - 1)


def gauss_lobatto(n: int) -> np.ndarray:
    """The n+1 Legendre-Gauss-Lobatto points on [-1, 1]."""
    if n == 1:
        return np.array([-1.0, 1.0])
    interior, _ = special.roots_jacobi(n - 1, 1.0, 1.0)
    return np.concatenate([[-1.0], np.sort(interior), [1.0]])


def warp_factor(q: int, rout: np.ndarray) -> np.ndarray:
    """Scaled one-dimensional warp from equidistant to Gauss-Lobatto points, evaluated at rout."""
    lgl = gauss_lobatto(q)
    equidistant = np.linspace(-1.0, 1.0, q + 1)
    v_eq = np.stack([jacobi_p(equidistant, 0, 0, i) for i in range(q + 1)], axis=1)
    p_mat = np.stack([jacobi_p(rout, 0, 0, i) for i in range(q + 1)], axis=0)
    lagrange = np.linalg.solve(v_eq.T, p_mat)
    warp = lagrange.T @ (lgl - equidistant)
    interior = np.abs(rout) < 1.0 - 1.0e-10
    scale = 1.0 - (interior * rout) ** 2
    return warp / scale + warp * (interior - 1.0)


def warp_blend_nodes(q: int) -> Tuple[np.ndarray, np.ndarray]:
    """Warp-and-blend nodes of order q in (r, s) on the reference triangle."""
    alpha = WARP_ALPHA[q - 1]
    L1, L3 = [], []
    for n in range(q + 1):
        for m in range(q + 1 - n):
            L1.append(n / q)
            L3.append(m / q)
    L1 = np.array(L1)
    L3 = np.array(L3)
    L2 = 1.0 - L1 - L3
    x = -L2 + L3
    y = (-L2 - L3 + 2.0 * L1) / np.sqrt(3.0)

    warp1 = 4 * L2 * L3 * warp_factor(q, L3 - L2) * (1 + (alpha * L1) ** 2)
    warp2 = 4 * L1 * L3 * warp_factor(q, L1 - L3) * (1 + (alpha * L2) ** 2)
    warp3 = 4 * L1 * L2 * warp_factor(q, L2 - L1) * (1 + (alpha * L3) ** 2)
    x = x + warp1 + np.cos(2 * np.pi / 3) * warp2 + np.cos(4 * np.pi / 3) * warp3
    y = y + np.sin(2 * np.pi / 3) * warp2 + np.sin(4 * np.pi / 3) * warp3

    # equilateral -> reference triangle
    l1 = (np.sqrt(3.0) * y + 1.0) / 3.0
    l2 = (-3.0 * x - np.sqrt(3.0) * y + 2.0) / 6.0
    l3 = (3.0 * x - np.sqrt(3.0) * y + 2.0) / 6.0
    return -l2 + l3 - l1, -l2 - l3 + l1


def _collapse(r: np.ndarray, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    singular = np.abs(1.0 - s) < 1e-14
    a = np.where(singular, -1.0, 2.0 * (1.0 + r) / np.where(singular, 1.0, 1.0 - s) - 1.0)
    return a, s


def _modes(q: int):
    return [(i, j) for i in range(q + 1) for j in range(q + 1 - i)]


def vandermonde_2d(q: int, r, s) -> np.ndarray:
    """V[n, m] = phi_m(r_n, s_n) for the orthonormal simplex basis."""
    a, b = _collapse(r, s)
    columns = [np.sqrt(2.0) * jacobi_p(a, 0, 0, i) * jacobi_p(b, 2 * i + 1, 0, j) * (1 - b) ** i for i, j in _modes(q)]
    return np.stack(columns, axis=1)


def grad_vandermonde_2d(q: int, r, s) -> Tuple[np.ndarray, np.ndarray]:
    a, b = _collapse(r, s)
    dr_columns, ds_columns = [], []
    for i, j in _modes(q):
        fa = jacobi_p(a, 0, 0, i)
        dfa = grad_jacobi_p(a, 0, 0, i)
        gb = jacobi_p(b, 2 * i + 1, 0, j)
        dgb = grad_jacobi_p(b, 2 * i + 1, 0, j)

        dmode_dr = dfa * gb
        dmode_ds = dfa * gb * 0.5 * (1 + a)
        if i > 0:
            dmode_dr = dmode_dr * (0.5 * (1 - b)) ** (i - 1)
            dmode_ds = dmode_ds * (0.5 * (1 - b)) ** (i - 1)
        tmp = dgb * (0.5 * (1 - b)) ** i
        if i > 0:
            tmp = tmp - 0.5 * i * gb * (0.5 * (1 - b)) ** (i - 1)
        dmode_ds = dmode_ds + fa * tmp
        dr_columns.append(2 ** (i + 0.5) * dmode_dr)
        ds_columns.append(2 ** (i + 0.5) * dmode_ds)
    return np.stack(dr_columns, axis=1), np.stack(ds_columns, axis=1)


def edge_points(edge: int, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(r, s) of the parameter values t on a local edge."""
    t = np.asarray(t, dtype=float)
    if edge == DgEdge.BOTTOM:
        return t, -np.ones_like(t)
    if edge == DgEdge.HYPOTENUSE:
        return -t, t.copy()
    return -np.ones_like(t), -t


@dataclass(frozen=True)
class RefTriangle:
    """
    Reference element data for polynomial order q. Interpolation matrices map nodal values
    to cubature points (``Pc``) and to the Gauss points of each edge (``edge_interp``, the
    composition of edge extraction and the edge projector).
    """

    q: int
    r: np.ndarray
    s: np.ndarray
    V: np.ndarray
    Dr: np.ndarray
    Ds: np.ndarray
    cubature_r: np.ndarray
    cubature_s: np.ndarray
    cubature_weights: np.ndarray
    Pc: np.ndarray
    Pc_r: np.ndarray
    Pc_s: np.ndarray
    edge_t: np.ndarray
    edge_weights: np.ndarray
    edge_interp: np.ndarray
    edge_dr: np.ndarray
    edge_ds: np.ndarray

    @property
    def Np(self) -> int:
        return self.r.size

    @property
    def Nq(self) -> int:
        return self.edge_t.size

    def interpolation(self, r, s) -> np.ndarray:
        """Matrix evaluating the nodal interpolant at the points (r, s)."""
        return scipy.linalg.solve(self.V.T, vandermonde_2d(self.q, r, s).T).T


@functools.lru_cache(maxsize=None)
def build_ref_triangle(q: int) -> RefTriangle:
    if q not in range(1, 6):
        _LOGGER.log(f"Unsupported DG order q={q}", logging.ERROR)
        raise UnsupportedOrder(f"DG order must be in 1..5, got {q}")
    r, s = warp_blend_nodes(q)
    V = vandermonde_2d(q, r, s)
    V_inv = np.linalg.inv(V)
    Vr, Vs = grad_vandermonde_2d(q, r, s)

    # collapsed cubature, exact to degree 2q+3
    a, wa = special.roots_legendre(q + 2)
    b, wb = special.roots_jacobi(q + 2, 1.0, 0.0)
    A, B = np.meshgrid(a, b, indexing="ij")
    cub_r = ((1 + A) * (1 - B) / 2 - 1).ravel()
    cub_s = B.ravel()
    cub_w = (np.outer(wa, wb) / 2).ravel()
    Pc = vandermonde_2d(q, cub_r, cub_s) @ V_inv
    Vr_c, Vs_c = grad_vandermonde_2d(q, cub_r, cub_s)

    t, wt = special.roots_legendre(q + 2)
    interp, dr, ds = [], [], []
    for edge in DgEdge:
        er, es = edge_points(edge, t)
        interp.append(vandermonde_2d(q, er, es) @ V_inv)
        Vr_e, Vs_e = grad_vandermonde_2d(q, er, es)
        dr.append(Vr_e @ V_inv)
        ds.append(Vs_e @ V_inv)

    ref = RefTriangle(
        q=q,
        r=r,
        s=s,
        V=V,
        Dr=Vr @ V_inv,
        Ds=Vs @ V_inv,
        cubature_r=cub_r,
        cubature_s=cub_s,
        cubature_weights=cub_w,
        Pc=Pc,
        Pc_r=Vr_c @ V_inv,
        Pc_s=Vs_c @ V_inv,
        edge_t=t,
        edge_weights=wt,
        edge_interp=np.stack(interp),
        edge_dr=np.stack(dr),
        edge_ds=np.stack(ds),
    )
    _LOGGER.log(f"Reference triangle q={q}: {ref.Np} nodes, {cub_w.size} cubature points, {t.size} edge points", logging.DEBUG)
    return ref


@dataclass(frozen=True)
class DgMesh:
    """
    Curved triangle mesh with the geometric factors of every element. Per-element matrices
    have shape (K, Np, Np); edge quantities have shape (K, 3, Nq) ordered by edge
    parameter t. ``neighbors[k, e]`` holds (element, edge) of the adjacent element or
    (-1, -1).
    """

    ref: RefTriangle
    level: int
    vertices: np.ndarray
    parameter_vertices: np.ndarray
    elements: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    curved: np.ndarray
    J: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    mass_inv: np.ndarray = field(repr=False)
    M11: np.ndarray = field(repr=False)
    M12: np.ndarray = field(repr=False)
    M21: np.ndarray = field(repr=False)
    M22: np.ndarray = field(repr=False)
    edge_S: np.ndarray = field(repr=False)
    edge_n1: np.ndarray = field(repr=False)
    edge_n2: np.ndarray = field(repr=False)
    neighbors: np.ndarray = field(repr=False)
    interface_edges: List[Tuple[int, int]] = field(default_factory=list)
    boundary_edges: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def q(self) -> int:
        return self.ref.q

    @property
    def K(self) -> int:
        return self.elements.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.K, self.ref.Np)

    @property
    def n_unknowns(self) -> int:
        return 3 * self.K * self.ref.Np

    @property
    def h_min(self) -> float:
        """Shortest straight edge over all elements."""
        corners = self.vertices[self.elements]
        lengths = np.linalg.norm(corners - np.roll(corners, -1, axis=1), axis=2)
        return float(lengths.min())

    def interface_range(self, element: int, edge: int) -> Tuple[float, float, int]:
        """
        (lo, hi, orientation) of an interface edge in the interface coordinate x2;
        orientation is +1 when x2 increases with the edge parameter t.
        """
        start, end, _ = EDGE_VERTICES[edge]
        x_start = self.vertices[self.elements[element, start], 1]
        x_end = self.vertices[self.elements[element, end], 1]
        return min(x_start, x_end), max(x_start, x_end), 1 if x_end > x_start else -1

    def edge_trace(self, p_edge: np.ndarray, v_edge: np.ndarray, element: int, edge: int) -> FaceTrace:
        return FaceTrace(p=p_edge[element, edge], v=v_edge[element, edge], S_J=self.edge_S[element, edge])


def dg_mesh_resolution(q: int, N: int) -> Tuple[int, int]:
    """
    (base interface edges, refinement levels) matching an SBP interface with N cells: the
    base mesh has ceil(64/(q+1)) edges when N/64 is a power of two, ceil(N/(q+1)) otherwise.
    """
    ratio = N / BASE_INTERFACE_RESOLUTION
    if ratio >= 1 and float(ratio).is_integer() and (int(ratio) & (int(ratio) - 1)) == 0:
        return math.ceil(BASE_INTERFACE_RESOLUTION / (q + 1)), int(ratio).bit_length() - 1
    return math.ceil(N / (q + 1)), 0


def interface_edge_count(q: int, N: int) -> int:
    base, levels = dg_mesh_resolution(q, N)
    return base * 2 ** levels


def _structured_triangles(columns: int, rows: int) -> Tuple[np.ndarray, np.ndarray]:
    u, w = np.meshgrid(np.linspace(-1.0, 1.0, columns + 1), np.linspace(-1.0, 1.0, rows + 1), indexing="ij")
    points = np.stack([u.ravel(), w.ravel()], axis=1)

    def index(i, j):
        return i * (rows + 1) + j

    triangles = []
    for i in range(columns):
        for j in range(rows):
            A, B, C, D = index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1)
            triangles.append((A, B, D))
            triangles.append((B, C, D))
    return points, np.array(triangles, dtype=int)


def _split(points: np.ndarray, triangles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Splits every triangle into four by its edge midpoints."""
    points = list(map(tuple, points))
    midpoints: Dict[Tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        if key not in midpoints:
            midpoints[key] = len(points)
            points.append(tuple((np.array(points[a]) + np.array(points[b])) / 2.0))
        return midpoints[key]

    children = []
    for a, b, c in triangles:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        children.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    return np.array(points), np.array(children, dtype=int)


def _on_interface(parameter_vertices: np.ndarray, a: int, b: int) -> bool:
    return abs(parameter_vertices[a, 0] + 1.0) < 1e-12 and abs(parameter_vertices[b, 0] + 1.0) < 1e-12


def _curved_nodes(
    ref: RefTriangle,
    transform: Transform,
    vertices: np.ndarray,
    parameter_vertices: np.ndarray,
    triangle: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, bool]:
    """Nodal coordinates of one element, with any interface edge moved to the curve."""
    lam = np.stack([-(ref.r + ref.s) / 2.0, (1.0 + ref.r) / 2.0, (1.0 + ref.s) / 2.0])
    corners = vertices[triangle]
    x = lam.T @ corners
    curved = False
    for start, end, _ in EDGE_VERTICES:
        a, b = triangle[start], triangle[end]
        if not _on_interface(parameter_vertices, a, b):
            continue
        curved = True
        la, lb = lam[start], lam[end]
        weight = la + lb
        t = np.where(weight > 1e-12, (lb - la) / np.where(weight > 1e-12, weight, 1.0), 0.0)
        w = ((1 - t) * parameter_vertices[a, 1] + (1 + t) * parameter_vertices[b, 1]) / 2.0
        c1, c2 = transform.map(-np.ones_like(w), w)
        chord = ((1 - t)[:, None] * vertices[a] + (1 + t)[:, None] * vertices[b]) / 2.0
        x = x + weight[:, None] * (np.stack([c1, c2], axis=1) - chord)
    return x[:, 0], x[:, 1], curved


def _connect(triangles: np.ndarray) -> np.ndarray:
    neighbors = -np.ones((triangles.shape[0], 3, 2), dtype=int)
    owners: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for k, triangle in enumerate(triangles):
        for e, (start, end, _) in enumerate(EDGE_VERTICES):
            key = (min(triangle[start], triangle[end]), max(triangle[start], triangle[end]))
            if key in owners:
                other = owners.pop(key)
                neighbors[k, e] = other
                neighbors[other[0], other[1]] = (k, e)
            else:
                owners[key] = (k, e)
    return neighbors


def build_dg_mesh(
    q: int,
    base_edges: int,
    levels: int = 0,
    transform: Optional[Transform] = None,
    logger: Optional[SbpGlueLogger] = None,
) -> DgMesh:
    """
    Meshes the image of ``transform`` (the right half of the domain by default) with
    ``base_edges`` triangle edges along its west face, refined ``levels`` times.
    Raises NonPositiveJacobian if curving inverts an element and SingularMass if an
    element mass matrix is not positive definite.
    """
    logger = logger or _LOGGER
    if base_edges < 1 or levels < 0:
        logger.log(f"Cannot mesh {base_edges} base edge(s) with {levels} level(s)", logging.ERROR)
        raise GridTooSmall(f"build_dg_mesh needs base_edges >= 1 and levels >= 0, got {base_edges}, {levels}")
    transform = transform or RightTransform()
    ref = build_ref_triangle(q)

    parameter_vertices, triangles = _structured_triangles(math.ceil(base_edges / 2), base_edges)
    for _ in range(levels):
        parameter_vertices, triangles = _split(parameter_vertices, triangles)
    vx, vy = transform.map(parameter_vertices[:, 0], parameter_vertices[:, 1])
    vertices = np.stack([vx, vy], axis=1)

    K = triangles.shape[0]
    x1 = np.zeros((K, ref.Np))
    x2 = np.zeros((K, ref.Np))
    curved = np.zeros(K, dtype=bool)
    for k in range(K):
        x1[k], x2[k], curved[k] = _curved_nodes(ref, transform, vertices, parameter_vertices, triangles[k])

    xr, xs = x1 @ ref.Pc_r.T, x1 @ ref.Pc_s.T
    yr, ys = x2 @ ref.Pc_r.T, x2 @ ref.Pc_s.T
    J = xr * ys - xs * yr
    if np.any(J <= 0):
        k, c = np.unravel_index(np.argmin(J), J.shape)
        logger.log(f"DG element {k} has J = {J[k, c]:.3e} at a cubature point", logging.ERROR)
        raise NonPositiveJacobian(f"DG element {k} has non-positive Jacobian {J[k, c]:.3e}")

    def weighted(values: np.ndarray) -> np.ndarray:
        return np.einsum("cn,kc,cm->knm", ref.Pc, values * ref.cubature_weights, ref.Pc)

    mass = weighted(J)
    try:
        np.linalg.cholesky(mass)
    except np.linalg.LinAlgError:
        logger.log("A DG element mass matrix is not positive definite", logging.ERROR)
        raise SingularMass("a DG element mass matrix is not positive definite") from None
    mass_inv = np.linalg.inv(mass)

    edge_S = np.zeros((K, 3, ref.Nq))
    edge_n1 = np.zeros_like(edge_S)
    edge_n2 = np.zeros_like(edge_S)
    for e in DgEdge:
        dr_dt, ds_dt = EDGE_DIRECTIONS[e]
        xt = (x1 @ ref.edge_dr[e].T) * dr_dt + (x1 @ ref.edge_ds[e].T) * ds_dt
        yt = (x2 @ ref.edge_dr[e].T) * dr_dt + (x2 @ ref.edge_ds[e].T) * ds_dt
        S = np.hypot(xt, yt)
        edge_S[:, e], edge_n1[:, e], edge_n2[:, e] = S, yt / S, -xt / S

    neighbors = _connect(triangles)
    interface_edges, boundary_edges = [], []
    for k in range(K):
        for e, (start, end, _) in enumerate(EDGE_VERTICES):
            if neighbors[k, e, 0] >= 0:
                continue
            if _on_interface(parameter_vertices, triangles[k, start], triangles[k, end]):
                interface_edges.append((k, e))
            else:
                boundary_edges.append((k, e))

    mesh = DgMesh(
        ref=ref,
        level=levels,
        vertices=vertices,
        parameter_vertices=parameter_vertices,
        elements=triangles,
        x1=x1,
        x2=x2,
        curved=curved,
        J=J,
        mass=mass,
        mass_inv=mass_inv,
        M11=weighted(ys),
        M12=weighted(-xs),
        M21=weighted(-yr),
        M22=weighted(xr),
        edge_S=edge_S,
        edge_n1=edge_n1,
        edge_n2=edge_n2,
        neighbors=neighbors,
        interface_edges=[],
        boundary_edges=boundary_edges,
    )
    interface_edges.sort(key=lambda ke: mesh.interface_range(*ke)[0])
    mesh.interface_edges.extend(interface_edges)
    logger.log(
        f"DG mesh q={q}: {K} elements ({int(curved.sum())} curved), {len(interface_edges)} interface edges, level {levels}",
        logging.INFO,
    )
    return mesh


def _check_state(mesh: DgMesh, state: DgState) -> None:
    for name in ("v1", "v2", "p"):
        if getattr(state, name).shape != mesh.shape:
            _LOGGER.log(f"DG {name} has shape {getattr(state, name).shape}, expected {mesh.shape}", logging.ERROR)
            raise ShapeMismatch(f"DG {name} has shape {getattr(state, name).shape}, expected {mesh.shape}")


def dg_traces(mesh: DgMesh, state: DgState) -> Tuple[np.ndarray, np.ndarray]:
    """Pressure and outward normal velocity at the edge quadrature points of all edges."""
    _check_state(mesh, state)
    interp = mesh.ref.edge_interp
    p = np.einsum("eqn,kn->keq", interp, state.p)
    v = mesh.edge_n1 * np.einsum("eqn,kn->keq", interp, state.v1) + mesh.edge_n2 * np.einsum(
        "eqn,kn->keq", interp, state.v2
    )
    return p, v


def dg_dg_flux(minus: FaceTrace, plus: FaceTrace, alpha: float, material: Material) -> FacePenalty:
    """
    Flux between two DG elements on the minus side, returned as (p* - p-, v* - v-) with
    p* = (p+ + p-)/2 + alpha Z/2 (v+ + v-) and v* - v- = -(v+ + v-)/2 - alpha/(2Z) (p+ - p-).
    Traces must be sampled at matching points.
    """
    if alpha < 0:
        _LOGGER.log(f"penalty parameter alpha must be non-negative, got {alpha}", logging.ERROR)
        raise NegativeAlpha(f"penalty parameter alpha must be non-negative, got {alpha}")
    if minus.p.shape != plus.p.shape:
        _LOGGER.log(f"DG traces have {minus.p.size} and {plus.p.size} points", logging.ERROR)
        raise ShapeMismatch(f"DG traces have {minus.p.size} and {plus.p.size} points")
    Z = material.Z
    p_star = 0.5 * (plus.p + minus.p) + alpha * Z / 2.0 * (plus.v + minus.v)
    dv = -0.5 * (plus.v + minus.v) - alpha / (2.0 * Z) * (plus.p - minus.p)
    return FacePenalty(p_star - minus.p, dv)


def dg_boundary_flux(trace: FaceTrace, alpha: float, material: Material) -> FacePenalty:
    """Free surface: p* = 0 and v* - v = alpha p / Z."""
    return boundary_penalty(trace, alpha, material)


def dg_edge_penalties(
    mesh: DgMesh,
    state: DgState,
    alpha: float,
    material: Material,
    interface_penalties: Mapping[Tuple[int, int], FacePenalty],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (p* - p, v* - v) on every edge: DG-DG fluxes between neighbors, free surface fluxes on
    the outer boundary and the supplied penalties on the interface edges.
    """
    p_edge, v_edge = dg_traces(mesh, state)
    dp = np.zeros_like(p_edge)
    dv = np.zeros_like(v_edge)
    for k in range(mesh.K):
        for e in range(3):
            k_n, e_n = mesh.neighbors[k, e]
            if k_n < 0:
                continue
            # the shared edge is traversed in opposite directions
            plus = FaceTrace(p_edge[k_n, e_n, ::-1], v_edge[k_n, e_n, ::-1], mesh.edge_S[k_n, e_n, ::-1])
            flux = dg_dg_flux(mesh.edge_trace(p_edge, v_edge, k, e), plus, alpha, material)
            dp[k, e], dv[k, e] = flux.dp, flux.dv
    for k, e in mesh.boundary_edges:
        flux = dg_boundary_flux(mesh.edge_trace(p_edge, v_edge, k, e), alpha, material)
        dp[k, e], dv[k, e] = flux.dp, flux.dv
    missing = [ke for ke in mesh.interface_edges if ke not in interface_penalties]
    if missing:
        _LOGGER.log(f"{len(missing)} DG interface edge(s) have no penalty", logging.ERROR)
        raise UnresolvedFace(f"no penalty for {len(missing)} DG interface edge(s), first {missing[0]}")
    for (k, e), penalty in interface_penalties.items():
        if penalty.dp.shape != (mesh.ref.Nq,):
            _LOGGER.log(f"DG edge ({k}, {e}) penalty has {penalty.dp.size} points", logging.ERROR)
            raise ShapeMismatch(f"DG edge ({k}, {e}): penalty has {penalty.dp.size} points, expected {mesh.ref.Nq}")
        dp[k, e], dv[k, e] = penalty.dp, penalty.dv
    return dp, dv


def dg_rhs(mesh: DgMesh, state: DgState, dp: np.ndarray, dv: np.ndarray, material: Material) -> DgState:
    """
    Time derivative of all elements given (p* - p, v* - v) on every edge:

        rho M_J dv_i/dt = D1^T M_1i p + D2^T M_2i p - sum_K E_K^T n_i W S p*
            M_J dp/dt   = -lam (M_11 D1 v1 + M_21 D2 v1 + M_12 D1 v2 + M_22 D2 v2)
                          - lam sum_K E_K^T W S (v* - v)
    """
    _check_state(mesh, state)
    if dp.shape != mesh.edge_S.shape or dv.shape != mesh.edge_S.shape:
        _LOGGER.log(f"DG edge penalties have shapes {dp.shape} and {dv.shape}", logging.ERROR)
        raise ShapeMismatch(f"DG edge penalties must have shape {mesh.edge_S.shape}")
    ref = mesh.ref
    p_edge, _ = dg_traces(mesh, state)
    surface = ref.edge_weights * mesh.edge_S
    p_star = surface * (p_edge + dp)

    def lift(values: np.ndarray) -> np.ndarray:
        return np.einsum("eqn,keq->kn", ref.edge_interp, values)

    def apply(matrices: np.ndarray, values: np.ndarray) -> np.ndarray:
        return np.einsum("knm,km->kn", matrices, values)

    def weak_gradient(M_1: np.ndarray, M_2: np.ndarray) -> np.ndarray:
        return apply(M_1, state.p) @ ref.Dr + apply(M_2, state.p) @ ref.Ds

    rhs_v1 = weak_gradient(mesh.M11, mesh.M21) - lift(mesh.edge_n1 * p_star)
    rhs_v2 = weak_gradient(mesh.M12, mesh.M22) - lift(mesh.edge_n2 * p_star)
    dr_v1, ds_v1 = state.v1 @ ref.Dr.T, state.v1 @ ref.Ds.T
    dr_v2, ds_v2 = state.v2 @ ref.Dr.T, state.v2 @ ref.Ds.T
    divergence = apply(mesh.M11, dr_v1) + apply(mesh.M21, ds_v1) + apply(mesh.M12, dr_v2) + apply(mesh.M22, ds_v2)
    rhs_p = -material.lam * (divergence + lift(surface * dv))

    return DgState(
        apply(mesh.mass_inv, rhs_v1) / material.rho,
        apply(mesh.mass_inv, rhs_v2) / material.rho,
        apply(mesh.mass_inv, rhs_p),
    )


def dg_energy(mesh: DgMesh, state: DgState, material: Material) -> float:
    """rho/2 (v1^T M_J v1 + v2^T M_J v2) + 1/(2 lam) p^T M_J p summed over elements."""
    _check_state(mesh, state)

    def norm(values: np.ndarray) -> float:
        return float(np.einsum("kn,knm,km->", values, mesh.mass, values))

    return material.rho / 2.0 * (norm(state.v1) + norm(state.v2)) + norm(state.p) / (2.0 * material.lam)


def dg_edge_dissipation(weights: np.ndarray, trace: FaceTrace, penalty: FacePenalty) -> float:
    """-v^T W S p* - p^T W S (v* - v) of one edge with quadrature weights ``weights``."""
    weight = weights * trace.S_J
    return float(-np.sum(weight * trace.v * (trace.p + penalty.dp)) - np.sum(weight * trace.p * penalty.dv))


def dg_dissipation(mesh: DgMesh, state: DgState, dp: np.ndarray, dv: np.ndarray) -> float:
    """Sum of the edge dissipations of all elements."""
    p_edge, v_edge = dg_traces(mesh, state)
    total = 0.0
    for k in range(mesh.K):
        for e in range(3):
            trace = mesh.edge_trace(p_edge, v_edge, k, e)
            total += dg_edge_dissipation(mesh.ref.edge_weights, trace, FacePenalty(dp[k, e], dv[k, e]))
    return total
