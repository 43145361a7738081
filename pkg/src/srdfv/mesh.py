"""Cut-cell mesh generation on a uniform Cartesian base grid.

All cell-indexed arrays are padded with GHOST=2 layers per side; interior
cell (i, j) lives at padded index (i+2, j+2).  Ghost cells are classified
Full (they carry boundary-condition data), solid cells keep zero volume and
are never read by the solver (their state is a harmless dummy).

Edge crossings with the embedded boundary are located once per lattice
edge (canonical low-to-high bisection) and reused for both the cut-cell
polygons and the face wetted lengths, so shared faces are bitwise
consistent and every cut cell closes exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import DegenerateCut, MultipleCrossings

log = logging.getLogger(__name__)

GHOST = 2
SOLID, FULL, CUT = geo.SOLID, geo.FULL, geo.CUT


@dataclass(frozen=True)
class BaseGrid:
    """Uniform Cartesian background grid (interior extent only)."""

    x_lo: float
    y_lo: float
    nx: int
    ny: int
    dx: float
    dy: float

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grid needs nx, ny >= 3")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("grid spacing must be positive")

    @classmethod
    def from_bounds(cls, x_lo, x_hi, y_lo, y_hi, nx, ny):
        return cls(x_lo, y_lo, nx, ny, (x_hi - x_lo) / nx, (y_hi - y_lo) / ny)

    # padded lattice coordinates (corner L=2 sits at x_lo)
    def corner_x(self, L):
        return self.x_lo + (np.asarray(L) - GHOST) * self.dx

    def corner_y(self, M):
        return self.y_lo + (np.asarray(M) - GHOST) * self.dy

    def center_x(self, I):
        return self.x_lo + (np.asarray(I) - GHOST + 0.5) * self.dx

    def center_y(self, J):
        return self.y_lo + (np.asarray(J) - GHOST + 0.5) * self.dy


@dataclass(eq=False)
class CutCellMesh:
    grid: BaseGrid
    geom: object
    cls: np.ndarray            # (nxg, nyg) int8, ghost ring forced FULL
    vol: np.ndarray            # (nxg, nyg) cell volumes, 0 on solid
    cent: np.ndarray           # (nxg, nyg, 2) centroids
    smom: np.ndarray           # (nxg, nyg, 3) central moments (Sxx, Sxy, Syy)
    fx_len: np.ndarray         # (nxg+1, nyg) wetted x-face lengths on line L
    fx_mid: np.ndarray         # (nxg+1, nyg, 2)
    fy_len: np.ndarray         # (nxg, nyg+1)
    fy_mid: np.ndarray         # (nxg, nyg+1, 2)
    cut_ij: np.ndarray         # (k, 2) padded indices of cut cells, row-major
    b_len: np.ndarray          # (k,) boundary chord lengths
    b_mid: np.ndarray          # (k, 2) chord midpoints
    b_nrm: np.ndarray          # (k, 2) unit outward normals (flow -> solid)
    b_param: np.ndarray        # (k,) geometry arc parameter at chord midpoint
    polys: dict                # padded (I, J) -> CellPolygon
    synthetic: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    # ---- convenience ----
    @property
    def nxg(self):
        return self.cls.shape[0]

    @property
    def nyg(self):
        return self.cls.shape[1]

    @property
    def isl(self):
        """Slices selecting the interior window of padded arrays."""
        return (slice(GHOST, GHOST + self.grid.nx), slice(GHOST, GHOST + self.grid.ny))

    @property
    def interior_cls(self):
        return self.cls[self.isl]

    @property
    def n_cut(self):
        return len(self.cut_ij)

    @property
    def flow_volume(self):
        return float(self.vol[self.isl].sum())

    def vfrac(self):
        """Interior volume fractions (nx, ny); 0 on solid cells."""
        return self.vol[self.isl] / (self.grid.dx * self.grid.dy)

    def min_vfrac(self):
        v = self.vfrac()
        flow = self.interior_cls != SOLID
        return float(v[flow].min()) if flow.any() else float("nan")

    def summary(self):
        cls_i = self.interior_cls
        v = self.vfrac()
        flow = cls_i != SOLID
        return {
            "nx": self.grid.nx,
            "ny": self.grid.ny,
            "n_flow": int(flow.sum()),
            "n_full": int((cls_i == FULL).sum()),
            "n_cut": int((cls_i == CUT).sum()),
            "n_solid": int((cls_i == SOLID).sum()),
            "min_vfrac": self.min_vfrac(),
            "median_cut_vfrac": float(np.median(v[cls_i == CUT])) if (cls_i == CUT).any() else float("nan"),
            "flow_volume": self.flow_volume,
        }


def flow_neighbors(mesh, i, j, half_width=1):
    """Flow cells of the (2*half_width+1)^2 tile around interior cell
    (i, j), clipped at domain edges, row-major, including (i, j)."""
    nx, ny = mesh.grid.nx, mesh.grid.ny
    if not (0 <= i < nx and 0 <= j < ny):
        raise IndexError(f"cell ({i},{j}) outside interior grid")
    out = []
    cls_i = mesh.interior_cls
    for ii in range(max(0, i - half_width), min(nx, i + half_width + 1)):
        for jj in range(max(0, j - half_width), min(ny, j + half_width + 1)):
            if cls_i[ii, jj] != SOLID:
                out.append((ii, jj))
    return out


# ---------------------------------------------------------------------------
# generation


def _edge_sample_flags(geom, p_lo, edge_vec):
    """Inside flags at EDGE_SAMPLES points per edge.

    p_lo: (..., 2) low endpoints; edge_vec: (2,) edge vector.  Returns a
    boolean array (..., K)."""
    t = np.linspace(0.0, 1.0, geo.EDGE_SAMPLES)
    pts = p_lo[..., None, :] + t[:, None] * np.asarray(edge_vec)[None, :]
    return geom.phi(pts) < 0.0


def _batch_bisect(geom, p0, d, lo, hi, lo_inside):
    """Vector bisection of phi sign changes on p0 + t*d, t in [lo, hi]."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        pm = p0 + mid[:, None] * d
        same = (geom.phi(pm) < 0.0) == lo_inside
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    t = 0.5 * (lo + hi)
    return p0 + t[:, None] * d


def _edge_roots(geom, p_lo, edge_vec, flags):
    """Per-edge crossing counts and root points.

    flags: (..., K) inside flags.  Returns (trans, root) with trans the
    transition count per edge and root (..., 2) the crossing point (NaN
    where the count is not exactly 1)."""
    flips = flags[..., :-1] != flags[..., 1:]
    trans = flips.sum(axis=-1)
    root = np.full(p_lo.shape, np.nan)
    idx = np.nonzero(trans == 1)
    if idx[0].size:
        k = np.argmax(flips[idx], axis=-1)
        t = np.linspace(0.0, 1.0, geo.EDGE_SAMPLES)
        p0 = p_lo[idx]
        d = np.broadcast_to(np.asarray(edge_vec, dtype=float), p0.shape)
        lo_inside = flags[idx][np.arange(len(k)), k]
        pts = _batch_bisect(geom, p0, d, t[k], t[k + 1], lo_inside)
        root[idx] = pts
    return trans, root


def generate_mesh(grid, geom):
    """Intersect the geometry with the padded base grid."""
    nxg, nyg = grid.nx + 2 * GHOST, grid.ny + 2 * GHOST
    dx, dy = grid.dx, grid.dy

    cx = grid.corner_x(np.arange(nxg + 1))
    cy = grid.corner_y(np.arange(nyg + 1))
    corner = np.stack(np.meshgrid(cx, cy, indexing="ij"), axis=-1)
    inside_c = geom.phi(corner) < 0.0

    # vertical edges (x-face lines): from corner (L, M) to (L, M+1)
    v_lo = corner[:, :-1, :]
    v_flags = _edge_sample_flags(geom, v_lo, (0.0, dy))
    v_trans, v_root = _edge_roots(geom, v_lo, (0.0, dy), v_flags)
    # horizontal edges (y-face lines): from corner (L, M) to (L+1, M)
    h_lo = corner[:-1, :, :]
    h_flags = _edge_sample_flags(geom, h_lo, (dx, 0.0))
    h_trans, h_root = _edge_roots(geom, h_lo, (dx, 0.0), h_flags)

    # reject double dips on any edge touching an interior cell
    for trans, Lmax, Mmax, name in (
            (v_trans, GHOST + grid.nx, GHOST + grid.ny - 1, "x"),
            (h_trans, GHOST + grid.nx - 1, GHOST + grid.ny, "y")):
        bad = np.argwhere(trans > 1)
        for L, M in bad:
            if GHOST <= L <= Lmax and GHOST <= M <= Mmax:
                raise MultipleCrossings(
                    f"boundary enters one {name}-edge at lattice ({L - GHOST},"
                    f"{M - GHOST}) {trans[L, M]} times (refine the mesh)")

    cls = np.full((nxg, nyg), FULL, dtype=np.int8)
    vol = np.full((nxg, nyg), dx * dy)
    cent = np.empty((nxg, nyg, 2))
    cent[..., 0] = grid.center_x(np.arange(nxg))[:, None]
    cent[..., 1] = grid.center_y(np.arange(nyg))[None, :]
    smom = np.empty((nxg, nyg, 3))
    smom[..., 0] = dx * dx / 12.0
    smom[..., 1] = 0.0
    smom[..., 2] = dy * dy / 12.0

    polys = {}
    ii = slice(GHOST, GHOST + grid.nx)
    jj = slice(GHOST, GHOST + grid.ny)
    # per-interior-cell crossing count over the 4 edges
    ncross = (
        (v_trans[GHOST:GHOST + grid.nx, jj] == 1).astype(int)
        + (v_trans[GHOST + 1:GHOST + grid.nx + 1, jj] == 1)
        + (h_trans[ii, GHOST:GHOST + grid.ny] == 1)
        + (h_trans[ii, GHOST + 1:GHOST + grid.ny + 1] == 1))
    ll = inside_c[GHOST:GHOST + grid.nx, GHOST:GHOST + grid.ny]
    lr = inside_c[GHOST + 1:GHOST + grid.nx + 1, GHOST:GHOST + grid.ny]
    ur = inside_c[GHOST + 1:GHOST + grid.nx + 1, GHOST + 1:GHOST + grid.ny + 1]
    ul = inside_c[GHOST:GHOST + grid.nx, GHOST + 1:GHOST + grid.ny + 1]
    corners_in = ll & lr & ur & ul
    corners_out = ~(ll | lr | ur | ul)

    interior_cls = np.full((grid.nx, grid.ny), FULL, dtype=np.int8)
    interior_cls[corners_out & (ncross == 0)] = SOLID
    cut_cells = np.argwhere(~((corners_in | corners_out) & (ncross == 0)))

    for i, j in cut_cells:
        I, J = i + GHOST, j + GHOST
        nc = ncross[i, j]
        if nc != 2:
            raise MultipleCrossings(
                f"cell ({i},{j}): boundary crosses its edges {nc} times; "
                "single-chord clipping needs exactly 2 (refine the mesh)")
        corners4 = np.array([corner[I, J], corner[I + 1, J],
                             corner[I + 1, J + 1], corner[I, J + 1]])
        in4 = [inside_c[I, J], inside_c[I + 1, J],
               inside_c[I + 1, J + 1], inside_c[I, J + 1]]
        cross4 = [
            h_root[I, J] if h_trans[I, J] == 1 else None,          # bottom
            v_root[I + 1, J] if v_trans[I + 1, J] == 1 else None,  # right
            h_root[I, J + 1] if h_trans[I, J + 1] == 1 else None,  # top
            v_root[I, J] if v_trans[I, J] == 1 else None,          # left
        ]
        try:
            poly = geo.build_cut_polygon(corners4, in4, cross4, cell_tag=f"({i},{j})")
            if poly.area < geo.DEGENERATE_REL_VOLUME * dx * dy:
                raise DegenerateCut("sliver")
        except DegenerateCut:
            log.info("degenerate cut at (%d,%d) reclassified as solid", i, j)
            interior_cls[i, j] = SOLID
            continue
        interior_cls[i, j] = CUT
        polys[(I, J)] = poly

    cls[ii, jj] = interior_cls
    solid = cls == SOLID
    vol[solid] = 0.0

    for (I, J), poly in polys.items():
        vol[I, J] = poly.area
        cent[I, J] = poly.centroid
        smom[I, J] = poly.smom

    # ---- face arrays from the shared edge data ----
    fx_len, fx_mid = _face_arrays(v_trans, v_root, corner, inside_c, axis=0,
                                  dlen=dy, nxg=nxg, nyg=nyg)
    fy_len, fy_mid = _face_arrays(h_trans, h_root, corner, inside_c, axis=1,
                                  dlen=dx, nxg=nxg, nyg=nyg)
    # no flux into (reclassified) solid cells
    fx_len[1:-1, :][solid[:-1, :] | solid[1:, :]] = 0.0
    fy_len[:, 1:-1][solid[:, :-1] | solid[:, 1:]] = 0.0

    cut_idx = np.argwhere(cls == CUT)
    b_len = np.array([polys[(I, J)].b_len for I, J in cut_idx])
    b_mid = (np.array([polys[(I, J)].b_mid for I, J in cut_idx])
             if len(cut_idx) else np.zeros((0, 2)))
    b_nrm = (np.array([polys[(I, J)].b_normal for I, J in cut_idx])
             if len(cut_idx) else np.zeros((0, 2)))
    b_param = geom.wall_param(b_mid) if len(cut_idx) else np.zeros(0)

    return CutCellMesh(
        grid=grid, geom=geom, cls=cls, vol=vol, cent=cent, smom=smom,
        fx_len=fx_len, fx_mid=fx_mid, fy_len=fy_len, fy_mid=fy_mid,
        cut_ij=cut_idx.reshape(-1, 2), b_len=b_len, b_mid=b_mid,
        b_nrm=b_nrm, b_param=np.asarray(b_param), polys=polys)


def _face_arrays(trans, root, corner, inside_c, axis, dlen, nxg, nyg):
    """Wetted lengths/midpoints for one face family.

    axis=0: x-faces on vertical edges, array (nxg+1, nyg);
    axis=1: y-faces on horizontal edges, array (nxg, nyg+1)."""
    if axis == 0:
        shape = (nxg + 1, nyg)
        lo_corner = corner[:, :-1, :]
        hi_corner = corner[:, 1:, :]
        lo_in = inside_c[:, :-1]
        hi_in = inside_c[:, 1:]
    else:
        shape = (nxg, nyg + 1)
        lo_corner = corner[:-1, :, :]
        hi_corner = corner[1:, :, :]
        lo_in = inside_c[:-1, :]
        hi_in = inside_c[1:, :]
    length = np.where(lo_in & hi_in, dlen, 0.0)
    mid = 0.5 * (lo_corner + hi_corner)
    one = trans == 1
    if one.any():
        r = root[one]
        lc = lo_corner[one]
        hc = hi_corner[one]
        li = lo_in[one]
        wet_len = np.where(li, r[:, 1 - axis] - lc[:, 1 - axis],
                           hc[:, 1 - axis] - r[:, 1 - axis])
        wet_mid = np.where(li[:, None], 0.5 * (lc + r), 0.5 * (r + hc))
        length[one] = wet_len
        mid[one] = wet_mid
    # edges sampled as multi-dip deep in the ghost ring: treat like their
    # endpoint signs suggest (never consumed by the interior residual)
    assert length.shape == shape
    return length, mid


# ---------------------------------------------------------------------------
# synthetic 1D-analog strip


def strip_mesh(alpha, n_pad=3, h=1.0):
    """Single-row strip with two narrow cells, mimicking the 1D model grid
    (sizes ..., h, h, alpha*h, h, alpha*h, h, h, ...).

    The strip cannot be produced by chord clipping of a uniform grid, so it
    is assembled directly: one flow row between two solid rows; the narrow
    cells are marked cut with volume alpha*h^2 and an inward normal pointing
    at the solid row (so normal merging falls through to the centered
    ladder, giving the {left, self, right} neighborhoods of the 1D model).
    Face data is not populated; the strip supports merging-plan and
    redistribution paths only.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha in (0, 1] required")
    if n_pad < 2:
        raise ValueError("need n_pad >= 2")
    nx, ny = 7 + 2 * n_pad, 3
    grid = BaseGrid(x_lo=0.0, y_lo=0.0, nx=nx, ny=ny, dx=h, dy=h)
    nxg, nyg = nx + 2 * GHOST, ny + 2 * GHOST
    cls = np.full((nxg, nyg), FULL, dtype=np.int8)
    isl = (slice(GHOST, GHOST + nx), slice(GHOST, GHOST + ny))
    interior = np.full((nx, ny), SOLID, dtype=np.int8)
    interior[:, 1] = FULL
    small_i = [n_pad + 2, n_pad + 4]  # cells -1 and +1 of the model strip
    for i in small_i:
        interior[i, 1] = CUT
    cls[isl] = interior

    vol = np.full((nxg, nyg), h * h)
    cent = np.empty((nxg, nyg, 2))
    cent[..., 0] = grid.center_x(np.arange(nxg))[:, None]
    cent[..., 1] = grid.center_y(np.arange(nyg))[None, :]
    smom = np.empty((nxg, nyg, 3))
    smom[..., 0] = h * h / 12.0
    smom[..., 1] = 0.0
    smom[..., 2] = h * h / 12.0
    vol[cls == SOLID] = 0.0
    cut_idx = []
    for i in small_i:
        I, J = i + GHOST, 1 + GHOST
        vol[I, J] = alpha * h * h
        cut_idx.append((I, J))
    cut_idx = np.array(cut_idx, dtype=int)

    return CutCellMesh(
        grid=grid, geom=geo.FullDomain(), cls=cls, vol=vol, cent=cent,
        smom=smom,
        fx_len=np.zeros((nxg + 1, nyg)), fx_mid=np.zeros((nxg + 1, nyg, 2)),
        fy_len=np.zeros((nxg, nyg + 1)), fy_mid=np.zeros((nxg, nyg + 1, 2)),
        cut_ij=cut_idx, b_len=np.full(2, h),
        b_mid=cent[cut_idx[:, 0], cut_idx[:, 1]] + np.array([0.0, 0.4 * h]),
        b_nrm=np.array([[0.0, 1.0], [0.0, 1.0]]),
        b_param=np.zeros(2), polys={}, synthetic=True)


def strip_model_index(mesh, k):
    """Padded (I, J) of model-strip cell k (k=0 is the central full cell)."""
    n_pad = (mesh.grid.nx - 7) // 2
    return (n_pad + 3 + k + GHOST, 1 + GHOST)
