"""Exact geometry of planar disk intersections.

The intersection of finitely many closed disks is a convex region
bounded by circular arcs. This module computes the boundary exactly:
arc decomposition, area and perimeter via Green's theorem, support
function, and point-to-region distance. It is the independent oracle
against which the Monte-Carlo estimators are checked, and the fast
path for planar experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTangency, EmptyIntersection
from .geometry import BallPolyhedron

TWO_PI = 2.0 * np.pi

# Tangency window (relative to the radius scale) in which the arc
# decomposition becomes ill-defined.
TANGENCY_RTOL = 1e-12
# Membership slack (relative) used when filtering candidate vertices.
FEAS_RTOL = 1e-9
# At most this many disks use the scalar decomposition (numpy call
# overhead dominates tiny configurations).
SMALL_N = 8


@dataclass
class DiskRegion:
    """Arc decomposition of an intersection of closed disks.

    ``arcs`` has one row per boundary arc: (cx, cy, r, a0, da) with the
    arc running counterclockwise from angle a0 over da > 0. An empty
    region has no arcs and zero area/perimeter; a region bounded by one
    whole circle is a single arc with da = 2*pi.
    """

    centers: np.ndarray
    radii: np.ndarray
    empty: bool
    area: float
    perimeter: float
    arcs: np.ndarray = field(default_factory=lambda: np.empty((0, 5)))
    vertices: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def contains(self, points: np.ndarray, slack: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(points)
        if self.empty:
            return np.zeros(pts.shape[0], dtype=bool)
        inside = np.ones(pts.shape[0], dtype=bool)
        for c, r in zip(self.centers, self.radii):
            inside &= np.sum((pts - c) ** 2, axis=1) <= (r + slack) ** 2
        return inside


def _feasible_mask(points: np.ndarray, centers: np.ndarray, radii: np.ndarray,
                   slack: float, chunk: int = 8192) -> np.ndarray:
    """Which points lie in every disk, allowing ``slack`` per radius.

    A coarse pre-filter against a spread subsample of disks rejects
    most candidates cheaply when there are many disks (dense grids of
    tangent balls)."""
    pts = points
    m = pts.shape[0]
    n = centers.shape[0]
    keep = np.ones(m, dtype=bool)
    if n > 24 and m > 64:
        sub = np.arange(0, n, max(n // 16, 1))
        rr_sub = (radii[sub] + slack) ** 2
        for lo in range(0, m, chunk):
            hi = min(lo + chunk, m)
            d2 = np.sum((pts[lo:hi, None, :] - centers[None, sub, :]) ** 2, axis=-1)
            keep[lo:hi] = np.all(d2 <= rr_sub[None, :], axis=1)
    rr = (radii + slack) ** 2
    idx = np.flatnonzero(keep)
    for lo in range(0, idx.size, chunk):
        sel = idx[lo:lo + chunk]
        d2 = np.sum((pts[sel, None, :] - centers[None, :, :]) ** 2, axis=-1)
        keep[sel] = np.all(d2 <= rr[None, :], axis=1)
    return keep


def _whole_disk_region(centers, radii, i) -> DiskRegion:
    (cx, cy), r = centers[i], radii[i]
    return DiskRegion(
        centers, radii, False, float(np.pi * r * r), float(TWO_PI * r),
        arcs=np.array([[cx, cy, r, 0.0, TWO_PI]]),
    )


def _disk_region_small(centers: np.ndarray, radii: np.ndarray,
                       tang: float, feas: float) -> DiskRegion:
    """Scalar-arithmetic twin of the vectorized decomposition; for a
    handful of disks the numpy call overhead dominates, and dominance
    experiments evaluate millions of 2-6 disk configurations."""
    from math import atan2, cos, hypot, pi, sin, sqrt

    n = centers.shape[0]
    cx = centers[:, 0].tolist()
    cy = centers[:, 1].tolist()
    rr = radii.tolist()
    two_pi = 2.0 * pi

    px, py, owner_i, owner_j = [], [], [], []
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = cx[j] - cx[i], cy[j] - cy[i]
            d = hypot(dx, dy)
            if d <= tang:
                continue
            sep = d - (rr[i] + rr[j])
            nest = abs(rr[i] - rr[j]) - d
            if abs(sep) <= tang or abs(nest) <= tang:
                raise DegenerateTangency(
                    f"circles {i} and {j} tangent within {TANGENCY_RTOL:g} relative"
                )
            if sep > 0 or nest > 0:
                continue
            a = (d * d + rr[i] * rr[i] - rr[j] * rr[j]) / (2.0 * d)
            h = sqrt(max(rr[i] * rr[i] - a * a, 0.0))
            ux, uy = dx / d, dy / d
            mx, my = cx[i] + a * ux, cy[i] + a * uy
            for sgn in (1.0, -1.0):
                qx, qy = mx - sgn * h * uy, my + sgn * h * ux
                ok = True
                for k in range(n):
                    ddx, ddy = qx - cx[k], qy - cy[k]
                    rk = rr[k] + feas
                    if ddx * ddx + ddy * ddy > rk * rk:
                        ok = False
                        break
                if ok:
                    px.append(qx)
                    py.append(qy)
                    owner_i.append(i)
                    owner_j.append(j)

    if not px:
        for i in range(n):
            inside_all = True
            for k in range(n):
                d = hypot(cx[i] - cx[k], cy[i] - cy[k])
                if d + rr[i] > rr[k] + feas:
                    inside_all = False
                    break
            if inside_all:
                return _whole_disk_region(centers, radii, i)
        return DiskRegion(centers, radii, True, 0.0, 0.0)

    arcs = []
    area = 0.0
    perimeter = 0.0
    for i in set(owner_i) | set(owner_j):
        ang = sorted(
            atan2(py[t] - cy[i], px[t] - cx[i]) % two_pi
            for t in range(len(px))
            if owner_i[t] == i or owner_j[t] == i
        )
        merged = [ang[0]]
        for a in ang[1:]:
            if a - merged[-1] > 1e-12:
                merged.append(a)
        if len(merged) > 1 and (two_pi - (merged[-1] - merged[0])) <= 1e-12:
            merged.pop()
        m = len(merged)
        r = rr[i]
        for t in range(m):
            a0 = merged[t]
            da = two_pi if m == 1 else (merged[(t + 1) % m] - a0) % two_pi
            if da <= 1e-12:
                continue
            mid = a0 + da / 2.0
            qx, qy = cx[i] + r * cos(mid), cy[i] + r * sin(mid)
            ok = True
            for k in range(n):
                if k == i:
                    continue
                ddx, ddy = qx - cx[k], qy - cy[k]
                rk = rr[k] + feas
                if ddx * ddx + ddy * ddy > rk * rk:
                    ok = False
                    break
            if ok:
                a1 = a0 + da
                area += 0.5 * (
                    r * r * da
                    + r * cx[i] * (sin(a1) - sin(a0))
                    - r * cy[i] * (cos(a1) - cos(a0))
                )
                perimeter += r * da
                arcs.append((cx[i], cy[i], r, a0, da))

    verts = np.column_stack([px, py]) if px else np.empty((0, 2))
    if not arcs:
        return DiskRegion(centers, radii, True, 0.0, 0.0, vertices=verts)
    return DiskRegion(centers, radii, False, max(area, 0.0), perimeter,
                      arcs=np.array(arcs), vertices=verts)


def disk_region(centers: np.ndarray, radii: np.ndarray) -> DiskRegion:
    """Arc decomposition of the intersection of closed disks.

    Enumerates pairwise circle intersection points, keeps those inside
    every disk (the region's vertices), and splits each circle at its
    vertices into candidate arcs kept when their midpoints are
    feasible. Area and perimeter follow from Green's theorem on the
    counterclockwise arc chain.

    Raises DegenerateTangency when two circles are tangent within
    1e-12 (relative); callers may perturb and retry.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.asarray(radii, dtype=float)
    n = centers.shape[0]
    scale = float(np.max(radii))
    tang = TANGENCY_RTOL * scale
    feas = FEAS_RTOL * scale

    if n == 1:
        return _whole_disk_region(centers, radii, 0)
    if n <= SMALL_N:
        return _disk_region_small(centers, radii, tang, feas)

    # Pairwise circle intersections, vectorized over all pairs.
    iu, ju = np.triu_indices(n, 1)
    dvec = centers[ju] - centers[iu]
    d = np.hypot(dvec[:, 0], dvec[:, 1])
    ri, rj = radii[iu], radii[ju]
    separated = d - (ri + rj)
    nested = np.abs(ri - rj) - d
    concentric = d <= tang
    tangent = ~concentric & ((np.abs(separated) <= tang) | (np.abs(nested) <= tang))
    if np.any(tangent):
        k = int(np.flatnonzero(tangent)[0])
        raise DegenerateTangency(
            f"circles {iu[k]} and {ju[k]} tangent within {TANGENCY_RTOL:g} relative"
        )
    crossing = ~concentric & (separated < 0) & (nested < 0)

    if np.any(crossing):
        dvc = dvec[crossing]
        dc = d[crossing]
        ric, rjc = ri[crossing], rj[crossing]
        a = (dc * dc + ric * ric - rjc * rjc) / (2.0 * dc)
        h = np.sqrt(np.maximum(ric * ric - a * a, 0.0))
        u = dvc / dc[:, None]
        mid = centers[iu[crossing]] + a[:, None] * u
        off = h[:, None] * np.column_stack([-u[:, 1], u[:, 0]])
        P = np.vstack([mid + off, mid - off])
        owners = np.vstack([
            np.column_stack([iu[crossing], ju[crossing]]),
            np.column_stack([iu[crossing], ju[crossing]]),
        ])
        keep = _feasible_mask(P, centers, radii, feas)
        P, owners = P[keep], owners[keep]
    else:
        P = np.empty((0, 2))
        owners = np.empty((0, 2), dtype=int)

    if P.shape[0] == 0:
        # No boundary crossings: the region is a whole disk or empty.
        dists = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
        contained = np.all(dists + radii[:, None] <= radii[None, :] + feas, axis=1)
        if np.any(contained):
            idx = np.flatnonzero(contained)
            return _whole_disk_region(centers, radii, idx[np.argmin(radii[idx])])
        return DiskRegion(centers, radii, True, 0.0, 0.0)

    # Split each contributing circle at its vertices into candidate arcs.
    cand = []
    for i in np.unique(owners.ravel()):
        rel = P[(owners[:, 0] == i) | (owners[:, 1] == i)] - centers[i]
        ang = np.sort(np.arctan2(rel[:, 1], rel[:, 0]) % TWO_PI)
        if ang.size > 1:
            distinct = np.concatenate([[True], np.diff(ang) > 1e-12])
            ang = ang[distinct]
            if ang.size > 1 and (TWO_PI - (ang[-1] - ang[0])) <= 1e-12:
                ang = ang[:-1]
        m = ang.size
        a0 = ang
        da = (np.roll(ang, -1) - ang) % TWO_PI
        if m == 1:
            da = np.array([TWO_PI])
        for t in range(m):
            if da[t] > 1e-12:
                cand.append((i, a0[t], da[t]))

    if not cand:
        return DiskRegion(centers, radii, True, 0.0, 0.0, vertices=P)

    circ = np.array([c[0] for c in cand], dtype=int)
    a0 = np.array([c[1] for c in cand])
    da = np.array([c[2] for c in cand])
    r = radii[circ]
    mid = a0 + da / 2.0
    probes = centers[circ] + r[:, None] * np.column_stack([np.cos(mid), np.sin(mid)])
    ok = _feasible_mask(probes, centers, radii, feas)

    if not np.any(ok):
        return DiskRegion(centers, radii, True, 0.0, 0.0, vertices=P)

    circ, a0, da, r = circ[ok], a0[ok], da[ok], r[ok]
    cx, cy = centers[circ, 0], centers[circ, 1]
    a1 = a0 + da
    area = 0.5 * np.sum(
        r * r * da + r * cx * (np.sin(a1) - np.sin(a0)) - r * cy * (np.cos(a1) - np.cos(a0))
    )
    perimeter = float(np.sum(r * da))
    arcs = np.column_stack([cx, cy, r, a0, da])
    return DiskRegion(centers, radii, False, float(max(area, 0.0)), perimeter,
                      arcs=arcs, vertices=P)


def region_of(P: BallPolyhedron) -> DiskRegion:
    """Arc decomposition of a 2D ball-polyhedron."""
    if P.dimension != 2:
        raise ValueError("exact arc decomposition is 2D only")
    return disk_region(P.centers, P.radii)


def exact_disk_intersection_2d(P: BallPolyhedron):
    """(area, perimeter) of a planar ball-polyhedron, exactly.

    On a tangency the radii are nudged by 1e-10 (relative, staggered
    per ball so both external and internal tangencies break) and the
    decomposition retried once before the error propagates.
    """
    try:
        reg = region_of(P)
    except DegenerateTangency:
        bump = 1.0 + 1e-10 * (1.0 + np.arange(len(P)))
        reg = disk_region(P.centers, P.radii * bump)
    return reg.area, reg.perimeter


def support_from_region(region: DiskRegion, dirs: np.ndarray) -> np.ndarray:
    """Support function of the region on unit direction rows.

    The maximizer of <y, u> over the region sits on the boundary: on an
    arc where the outward normal equals u, or at an arc endpoint.
    """
    if region.empty:
        raise EmptyIntersection("support function of an empty region")
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    phi = np.arctan2(dirs[:, 1], dirs[:, 0]) % TWO_PI
    A = region.arcs
    cx, cy, r, a0, da = A[:, 0], A[:, 1], A[:, 2], A[:, 3], A[:, 4]
    proj_c = dirs[:, 0][:, None] * cx[None, :] + dirs[:, 1][:, None] * cy[None, :]
    on_arc = ((phi[:, None] - a0[None, :]) % TWO_PI) <= da[None, :]
    a1 = a0 + da
    end0 = (dirs[:, 0][:, None] * np.cos(a0)[None, :]
            + dirs[:, 1][:, None] * np.sin(a0)[None, :]) * r[None, :]
    end1 = (dirs[:, 0][:, None] * np.cos(a1)[None, :]
            + dirs[:, 1][:, None] * np.sin(a1)[None, :]) * r[None, :]
    best = np.where(on_arc, r[None, :], np.maximum(end0, end1))
    return np.max(proj_c + best, axis=1)


def distance_from_region(region: DiskRegion, points: np.ndarray) -> np.ndarray:
    """Euclidean distance from points to the region (0 inside)."""
    if region.empty:
        raise EmptyIntersection("distance to an empty region")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dist = np.zeros(pts.shape[0])
    outside = ~region.contains(pts)
    if not np.any(outside):
        return dist
    Q = pts[outside]
    best = np.full(Q.shape[0], np.inf)
    for cx, cy, r, a0, da in region.arcs:
        rel = Q - np.array([cx, cy])
        rho = np.linalg.norm(rel, axis=1)
        ang = np.arctan2(rel[:, 1], rel[:, 0]) % TWO_PI
        on_arc = ((ang - a0) % TWO_PI) <= da
        d_arc = np.abs(rho - r)
        p0 = np.array([cx + r * np.cos(a0), cy + r * np.sin(a0)])
        p1 = np.array([cx + r * np.cos(a0 + da), cy + r * np.sin(a0 + da)])
        d_end = np.minimum(
            np.linalg.norm(Q - p0, axis=1), np.linalg.norm(Q - p1, axis=1)
        )
        best = np.minimum(best, np.where(on_arc, d_arc, d_end))
    dist[outside] = best
    return dist
