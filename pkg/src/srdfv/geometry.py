"""Implicit flow-domain geometry and single-chord cell clipping.

A geometry is described by a scalar function phi(x, y) that is negative in
the flow region, positive in the solid, and zero on the embedded boundary.
Within one grid cell the boundary is approximated by the straight chord
between its two edge crossings; the flow part of the cell is then a convex
polygon whose vertices are grid-cell corners and edge crossing points.

Conventions:
  * polygons are counterclockwise, so the outward normal of a directed
    edge (dx, dy) is (dy, -dx)/len and the chord normal points out of the
    flow (into the solid);
  * edge roots are located by bisection on a canonical low-to-high
    parametrization, so the two cells sharing an edge obtain bitwise
    identical crossing points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCut, MultipleCrossings

# Samples per edge when scanning for sign changes. Double dips between
# adjacent samples are undetectable by any finite scan; the remedy is mesh
# refinement.
EDGE_SAMPLES = 9
# Relative volume below which a cut is treated as degenerate.
DEGENERATE_REL_VOLUME = 1e-14


# ---------------------------------------------------------------------------
# geometry variants


@dataclass(frozen=True)
class FullDomain:
    """No embedded boundary: the whole grid is flow."""

    def phi(self, pts):
        pts = np.asarray(pts, dtype=float)
        return -np.ones(pts.shape[:-1])

    def wall_param(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.zeros(pts.shape[:-1])


@dataclass(frozen=True)
class Circle:
    """Circular boundary. keep='inside' flows inside the circle,
    keep='outside' flows around it."""

    center: tuple
    radius: float
    keep: str = "outside"

    def __post_init__(self):
        if self.keep not in ("inside", "outside"):
            raise ValueError(f"keep must be inside/outside, got {self.keep!r}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def phi(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = np.hypot(pts[..., 0] - self.center[0], pts[..., 1] - self.center[1])
        return d - self.radius if self.keep == "inside" else self.radius - d

    def wall_param(self, pts):
        """Angle around the circle in [0, 2*pi)."""
        pts = np.asarray(pts, dtype=float)
        ang = np.arctan2(pts[..., 1] - self.center[1], pts[..., 0] - self.center[0])
        return np.mod(ang, 2.0 * np.pi)


@dataclass(frozen=True)
class HalfPlane:
    """Straight wall through `point`; `normal` points into the flow."""

    point: tuple
    normal: tuple

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = float(np.hypot(n[0], n[1]))
        if norm == 0.0:
            raise ValueError("normal must be nonzero")
        object.__setattr__(self, "normal", (n[0] / norm, n[1] / norm))

    def phi(self, pts):
        pts = np.asarray(pts, dtype=float)
        nx, ny = self.normal
        return -((pts[..., 0] - self.point[0]) * nx + (pts[..., 1] - self.point[1]) * ny)

    def wall_param(self, pts):
        """Signed distance along the wall from its anchor point."""
        pts = np.asarray(pts, dtype=float)
        nx, ny = self.normal
        # wall tangent, oriented so that (tangent, normal) is right handed
        tx, ty = ny, -nx
        return (pts[..., 0] - self.point[0]) * tx + (pts[..., 1] - self.point[1]) * ty


@dataclass(frozen=True)
class QuarterAnnulus:
    """Flow between two concentric circles; the quarter aspect comes from
    the bounding box of the grid, not from phi."""

    center: tuple
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not 0 < self.r_inner < self.r_outer:
            raise ValueError("need 0 < r_inner < r_outer")

    def phi(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = np.hypot(pts[..., 0] - self.center[0], pts[..., 1] - self.center[1])
        return np.maximum(self.r_inner - d, d - self.r_outer)

    def wall_param(self, pts):
        pts = np.asarray(pts, dtype=float)
        ang = np.arctan2(pts[..., 1] - self.center[1], pts[..., 0] - self.center[0])
        return np.mod(ang, 2.0 * np.pi)


@dataclass(frozen=True)
class Intersection:
    """Flow region = intersection of two geometries (max of the phis)."""

    a: object
    b: object

    def phi(self, pts):
        return np.maximum(self.a.phi(pts), self.b.phi(pts))

    def wall_param(self, pts):
        # attribute each point to whichever boundary it is closer to
        pa = np.abs(self.a.phi(pts))
        return np.where(pa <= np.abs(self.b.phi(pts)),
                        self.a.wall_param(pts), self.b.wall_param(pts))


def signed_distance(geom, pts):
    """Evaluate the geometry's level-set function (< 0 in the flow)."""
    return geom.phi(pts)


# ---------------------------------------------------------------------------
# polygon measures


def polygon_area_centroid(verts):
    """Shoelace area and centroid of a CCW polygon, (m, 2) array."""
    v = np.asarray(verts, dtype=float)
    # shift for conditioning; area/centroid are translation covariant
    origin = v[0].copy()
    x = v[:, 0] - origin[0]
    y = v[:, 1] - origin[1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    if area <= 0.0:
        raise ValueError(f"polygon is degenerate or clockwise (area={area})")
    cx = np.sum((x + xn) * cross) / (6.0 * area)
    cy = np.sum((y + yn) * cross) / (6.0 * area)
    return area, cx + origin[0], cy + origin[1]


def polygon_second_moments(verts, center):
    """Area-averaged second moments about `center`:
    (Sxx, Sxy, Syy) = (1/A) * integral of ((x-cx)^2, (x-cx)(y-cy), (y-cy)^2).
    Unit cell about its centroid gives (1/12, 0, 1/12)."""
    v = np.asarray(verts, dtype=float)
    x = v[:, 0] - center[0]
    y = v[:, 1] - center[1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    ixx = np.sum((x * x + x * xn + xn * xn) * cross) / 12.0
    ixy = np.sum((2.0 * x * y + x * yn + xn * y + 2.0 * xn * yn) * cross) / 24.0
    iyy = np.sum((y * y + y * yn + yn * yn) * cross) / 12.0
    return ixx / area, ixy / area, iyy / area


# ---------------------------------------------------------------------------
# cell clipping

SOLID, FULL, CUT = 0, 1, 2


@dataclass
class CellPolygon:
    """Flow part of one cut cell."""

    verts: np.ndarray          # (m, 2), CCW
    area: float
    centroid: np.ndarray       # (2,)
    smom: np.ndarray           # (Sxx, Sxy, Syy) about the centroid
    b_p1: np.ndarray           # chord start (flow exit point, CCW order)
    b_p2: np.ndarray           # chord end (flow entry point)
    b_len: float
    b_mid: np.ndarray
    b_normal: np.ndarray       # unit, points out of the flow


def _edge_scan(geom, p0, p1):
    """Sample phi along the segment p0->p1 (canonical order expected).
    Returns (n_crossings, root point or None)."""
    t = np.linspace(0.0, 1.0, EDGE_SAMPLES)
    pts = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    inside = geom.phi(pts) < 0.0
    flips = np.nonzero(inside[:-1] != inside[1:])[0]
    if flips.size == 0:
        return 0, None
    if flips.size > 1:
        return int(flips.size), None
    k = flips[0]
    lo, hi = t[k], t[k + 1]
    root = _bisect_edge(geom, p0, p1, lo, hi, bool(inside[k]))
    return 1, root


def _bisect_edge(geom, p0, p1, lo, hi, lo_inside):
    """Bisect phi's sign change on p0 + t*(p1-p0), t in [lo, hi]."""
    d = p1 - p0
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        pm = p0 + mid * d
        if (float(geom.phi(pm)) < 0.0) == lo_inside:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    return p0 + t * d


def build_cut_polygon(corners, inside, cross_pts, cell_tag=""):
    """Assemble the flow polygon of a cut cell.

    corners: (4, 2) CCW from the low corner; inside: (4,) bool flags;
    cross_pts: 4-list of crossing points (or None), entry k lying on the
    CCW edge corners[k] -> corners[(k+1) % 4].
    """
    n_cross = sum(p is not None for p in cross_pts)
    if n_cross != 2:
        raise MultipleCrossings(
            f"cell {cell_tag}: boundary crosses cell edges {n_cross} times; "
            "single-chord clipping needs exactly 2 (refine the mesh)")
    verts = []
    exit_pt = entry_pt = None
    for k in range(4):
        if inside[k]:
            verts.append(corners[k])
        p = cross_pts[k]
        if p is not None:
            verts.append(p)
            if inside[k] and not inside[(k + 1) % 4]:
                exit_pt = p
            elif not inside[k] and inside[(k + 1) % 4]:
                entry_pt = p
            else:
                raise MultipleCrossings(
                    f"cell {cell_tag}: crossing on an edge without a sign "
                    "change (double dip); refine the mesh")
    if exit_pt is None or entry_pt is None or len(verts) < 3:
        raise MultipleCrossings(f"cell {cell_tag}: inconsistent crossing pattern")
    verts = np.asarray(verts, dtype=float)
    try:
        area, cx, cy = polygon_area_centroid(verts)
    except ValueError as exc:
        raise DegenerateCut(f"cell {cell_tag}: zero-area flow polygon") from exc
    centroid = np.array([cx, cy])
    smom = np.asarray(polygon_second_moments(verts, centroid))
    d = entry_pt - exit_pt
    b_len = float(np.hypot(d[0], d[1]))
    normal = np.array([d[1], -d[0]]) / b_len
    return CellPolygon(
        verts=verts, area=area, centroid=centroid, smom=smom,
        b_p1=np.asarray(exit_pt), b_p2=np.asarray(entry_pt), b_len=b_len,
        b_mid=0.5 * (np.asarray(exit_pt) + np.asarray(entry_pt)),
        b_normal=normal)


def clip_cell(geom, x0, y0, x1, y1):
    """Classify one grid cell against the geometry.

    Returns (kind, polygon) with kind in {SOLID, FULL, CUT}; polygon is a
    CellPolygon for CUT, else None.  Raises MultipleCrossings when the
    boundary cannot be represented by a single chord and DegenerateCut when
    the flow sliver is below 1e-14 of the cell area.
    """
    corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    inside = geom.phi(corners) < 0.0
    # canonical (low-to-high) endpoints per CCW edge; bottom and right edges
    # already run low to high, top and left are reversed
    edges = [
        (corners[0], corners[1], False),  # bottom, +x
        (corners[1], corners[2], False),  # right, +y
        (corners[3], corners[2], True),   # top, canonical +x
        (corners[0], corners[3], True),   # left, canonical +y
    ]
    cross_pts = []
    tag = f"[{x0:.6g},{x1:.6g}]x[{y0:.6g},{y1:.6g}]"
    for (a, b, _reversed) in edges:
        n, root = _edge_scan(geom, a, b)
        if n > 1:
            raise MultipleCrossings(
                f"cell {tag}: boundary enters one edge {n} times (refine the mesh)")
        cross_pts.append(root if n == 1 else None)
    n_cross = sum(p is not None for p in cross_pts)
    if n_cross == 0:
        return (FULL, None) if bool(inside.all()) else (SOLID, None)
    poly = build_cut_polygon(corners, inside, cross_pts, cell_tag=tag)
    cell_area = (x1 - x0) * (y1 - y0)
    if poly.area < DEGENERATE_REL_VOLUME * cell_area:
        raise DegenerateCut(
            f"cell {tag}: flow sliver {poly.area:.3e} below "
            f"{DEGENERATE_REL_VOLUME:g} of cell area")
    return CUT, poly
