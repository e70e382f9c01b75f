"""Vortex detection, square classification, vorticity, measure comparison.

Zeros of the order parameter are located as connected components of
{|u| < threshold}, wrapped periodically across the seams.  Each component is
covered by its minimal enclosing disk; intersecting disks are merged until
the collection is pairwise disjoint, and each ball gets an integer degree
from the winding of u/|u| along a surrounding lattice loop.  The cell tiles
into N congruent squares of area 2*pi which are classified good or bad by
their local energy, and the vorticity measure mu = curl j + curl A0 always
carries total mass 2*pi*N by telescoping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

import numpy as np
from scipy import ndimage

from .energy import DiscreteField, covariant_differences
from .grid import TWO_PI, link_phases, plaquette_fluxes, wrap_value


class VortexError(ValueError):
    pass


@dataclass(frozen=True)
class VortexBall:
    """Disk with |u| >= threshold on its sampled boundary, and its winding."""

    center: tuple[float, float]
    radius: float
    degree: int


@dataclass
class SquareReport:
    """One congruent sub-square Q_j of area 2*pi and its vortex bookkeeping."""

    index: int
    bounds: tuple[float, float, float, float]  # (x1_lo, x1_hi, x2_lo, x2_hi)
    energy: float            # b * kinetic + potential restricted to Q_j
    good: bool               # energy / b <= C_star * |log b|
    balls: list = dfield(default_factory=list)
    d_plus: int = 0          # sum of positive degrees of contained balls
    d_minus: int = 0         # sum of |negative degrees|
    d_total: int = 0         # d_plus + d_minus
    radius_total: float = 0.0
    radius_budget_exceeded: bool = False


@dataclass
class VorticityField:
    mu: np.ndarray = dfield(repr=False)  # (n, n) per-plaquette vorticity mass
    total_mass: float = 0.0
    h: float = 0.0
    R: float = 0.0


@dataclass
class DiscreteMeasure:
    """Atoms plus an optional uniform background density on the domain."""

    points: np.ndarray = dfield(repr=False)   # (k, 2)
    weights: np.ndarray = dfield(repr=False)  # (k,)
    uniform_density: float = 0.0

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))


@dataclass
class MeasureDistanceReport:
    estimate: float
    dictionary: str
    witness: tuple[float, float, float]  # (center_x, center_y, scale)
    depth: int


def winding(field: DiscreteField, loop) -> int:
    """Winding of u/|u| along a closed lattice path of integer (i, j) pairs.

    Indices may lie outside the fundamental cell; ghost values then pick up
    the wrap phases, so the total winding along the cell boundary counts the
    quantized flux.
    """
    pts = list(loop)
    if len(pts) < 3:
        raise VortexError("loop too short")
    if pts[0] != pts[-1]:
        pts = pts + [pts[0]]
    vals = np.array([wrap_value(field.u, field.wrap, i, j) for i, j in pts])
    if np.min(np.abs(vals)) < 1e-12:
        raise VortexError("degree undefined: loop touches a zero")
    total = float(np.sum(np.angle(vals[1:] / vals[:-1])))
    w = total / TWO_PI
    deg = int(round(w))
    if abs(w - deg) > 1e-6:
        raise VortexError(f"winding not integral: {w}")
    return deg


def cell_boundary_loop(n: int) -> list[tuple[int, int]]:
    """Counterclockwise lattice loop along the cell boundary (uses ghosts)."""
    loop = [(i, 0) for i in range(n + 1)]
    loop += [(n, j) for j in range(1, n + 1)]
    loop += [(i, n) for i in range(n - 1, -1, -1)]
    loop += [(0, j) for j in range(n - 1, -1, -1)]
    return loop


def _torus_delta(p, q, R):
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return (d + R / 2.0) % R - R / 2.0


def _circumcircle(a, b, c):
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-14:
        # collinear: fall back to the diameter of the extreme pair
        pts = [a, b, c]
        best = None
        for i in range(3):
            for j in range(i + 1, 3):
                dist = math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1])
                if best is None or dist > best[0]:
                    mid = ((pts[i][0] + pts[j][0]) / 2, (pts[i][1] + pts[j][1]) / 2)
                    best = (dist, mid)
        return best[1], best[0] / 2.0
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
          + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
          + (cx**2 + cy**2) * (bx - ax)) / d
    return (ux, uy), math.hypot(ax - ux, ay - uy)


def enclosing_disk(points, rng=None) -> tuple[tuple[float, float], float]:
    """Minimal enclosing disk (randomized incremental construction)."""
    pts = [tuple(p) for p in points]
    if not pts:
        raise VortexError("empty point set")
    rng = rng or np.random.default_rng(0)
    rng.shuffle(pts)
    eps = 1e-12

    def inside(p, c, r):
        return math.hypot(p[0] - c[0], p[1] - c[1]) <= r + eps

    c, r = pts[0], 0.0
    for i, p in enumerate(pts):
        if inside(p, c, r):
            continue
        c, r = p, 0.0
        for j in range(i):
            q = pts[j]
            if inside(q, c, r):
                continue
            c = ((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0)
            r = math.hypot(p[0] - q[0], p[1] - q[1]) / 2.0
            for k in range(j):
                s = pts[k]
                if inside(s, c, r):
                    continue
                c, r = _circumcircle(p, q, s)
    return c, r


def _components(mask: np.ndarray) -> list[np.ndarray]:
    """Connected components of a boolean mask, periodic across both seams."""
    labels, nlab = ndimage.label(mask)
    if nlab == 0:
        return []
    parent = list(range(nlab + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for a, b in zip(labels[-1, :], labels[0, :]):
        if a and b:
            union(int(a), int(b))
    for a, b in zip(labels[:, -1], labels[:, 0]):
        if a and b:
            union(int(a), int(b))
    groups: dict[int, list] = {}
    idx = np.argwhere(labels > 0)
    for i, j in idx:
        groups.setdefault(find(int(labels[i, j])), []).append((int(i), int(j)))
    return [np.array(g) for g in groups.values()]


def _component_disk(comp: np.ndarray, grid) -> tuple[tuple[float, float], float]:
    n, h, R = grid.n, grid.h, grid.R
    ref = comp[0]
    # unwrap indices to the nearest periodic image of the reference site
    di = (comp[:, 0] - ref[0] + n // 2) % n - n // 2
    dj = (comp[:, 1] - ref[1] + n // 2) % n - n // 2
    xs = -R / 2 + (ref[0] + di) * h
    ys = -R / 2 + (ref[1] + dj) * h
    c, r = enclosing_disk(np.column_stack([xs, ys]))
    # reduce the center back into the fundamental cell
    cx = (c[0] + R / 2.0) % R - R / 2.0
    cy = (c[1] + R / 2.0) % R - R / 2.0
    return (cx, cy), r


def _merge_disks(disks, R, clearance):
    disks = list(disks)
    changed = True
    while changed:
        changed = False
        out = []
        while disks:
            c1, r1 = disks.pop()
            merged = False
            for k, (c2, r2) in enumerate(out):
                d = _torus_delta(c1, c2, R)
                dist = math.hypot(d[0], d[1])
                if dist < r1 + r2 + clearance:
                    if dist + min(r1, r2) <= max(r1, r2):
                        c, r = (c1, r1) if r1 >= r2 else (c2, r2)
                    else:
                        t = (dist + r1 - r2) / (2.0 * max(dist, 1e-300))
                        c = (c2[0] + t * d[0], c2[1] + t * d[1])
                        c = ((c[0] + R / 2) % R - R / 2, (c[1] + R / 2) % R - R / 2)
                        r = (dist + r1 + r2) / 2.0
                    out[k] = (c, r)
                    merged = changed = True
                    break
            if not merged:
                out.append((c1, r1))
        disks = out
    return disks


def _square_loop(center, radius, grid) -> list[tuple[int, int]]:
    h, R = grid.h, grid.R
    ic = int(round((center[0] + R / 2) / h))
    jc = int(round((center[1] + R / 2) / h))
    rs = max(1, int(math.ceil(radius / h)) + 1)
    lo_i, hi_i = ic - rs, ic + rs
    lo_j, hi_j = jc - rs, jc + rs
    loop = [(i, lo_j) for i in range(lo_i, hi_i + 1)]
    loop += [(hi_i, j) for j in range(lo_j + 1, hi_j + 1)]
    loop += [(i, hi_j) for i in range(hi_i - 1, lo_i - 1, -1)]
    loop += [(lo_i, j) for j in range(hi_j - 1, lo_j - 1, -1)]
    return loop


def _ball_degree(field: DiscreteField, center, radius, threshold) -> int:
    for grow in range(8):
        loop = _square_loop(center, radius + grow * field.grid.h, field.grid)
        vals = [abs(wrap_value(field.u, field.wrap, i, j)) for i, j in loop]
        if min(vals) >= threshold:
            return winding(field, loop)
    # no clean contour found at moderate growth: accept any nonzero contour
    return winding(field, loop)


def find_balls(
    field: DiscreteField,
    b: float,
    threshold: float = 0.5,
    target_total_radius: float | None = None,
) -> list[VortexBall]:
    """Disjoint vortex balls covering {|u| < threshold}, with degrees.

    target_total_radius (default |log b|^-2) is the per-square radius budget
    used by classify_squares for reporting; it is not enforced here.
    """
    g = field.grid
    mask = np.abs(field.u) < threshold
    comps = _components(mask)
    disks = [_component_disk(c, g) for c in comps]
    # clearance h keeps the sampled boundary circles off the support sites
    disks = [(c, r + g.h) for c, r in disks]
    disks = _merge_disks(disks, g.R, clearance=g.h)
    balls = []
    for c, r in disks:
        deg = _ball_degree(field, c, r, threshold)
        balls.append(VortexBall(center=(float(c[0]), float(c[1])), radius=float(r),
                                degree=deg))
    return balls


def radius_budget(b: float) -> float:
    return 1.0 / math.log(b) ** 2


def _square_grid(grid):
    k = int(round(math.sqrt(grid.N)))
    if k * k != grid.N:
        raise VortexError(
            f"square decomposition needs N to be a perfect square, got N={grid.N}"
        )
    if grid.n % k != 0:
        raise VortexError(f"n={grid.n} not divisible by sqrt(N)={k}")
    return k, grid.n // k


def square_of_point(p, grid) -> int:
    """Index of the area-2*pi sub-square containing the point."""
    k, _ = _square_grid(grid)
    side = grid.R / k
    si = int((p[0] + grid.R / 2) // side) % k
    sj = int((p[1] + grid.R / 2) // side) % k
    return si * k + sj


def classify_squares(
    field: DiscreteField,
    b: float,
    C_star: float = 4.0 * math.pi,
    balls: list[VortexBall] | None = None,
) -> list[SquareReport]:
    """Partition the cell into N squares of area 2*pi and classify them.

    A square is good when its local energy (kinetic + potential/b form)
    stays below C_star * |log b|.  Ball degrees only count toward a square
    when the ball sits inside the inner margin, at distance > sqrt(b) from
    the square boundary; other balls are listed with degree contribution 0.
    """
    g = field.grid
    k, m = _square_grid(g)
    side = g.R / k
    if balls is None:
        balls = find_balls(field, b)
    dx, dy = covariant_differences(field)
    kin_site = np.abs(dx) ** 2 + np.abs(dy) ** 2
    pot_site = 0.5 * g.h**2 * (1.0 - np.abs(field.u) ** 2) ** 2
    local = b * kin_site + pot_site
    margin = math.sqrt(b)
    budget = radius_budget(b)
    reports = []
    for si in range(k):
        for sj in range(k):
            j_idx = si * k + sj
            block = local[si * m:(si + 1) * m, sj * m:(sj + 1) * m]
            e = float(np.sum(block))
            lo1 = -g.R / 2 + si * side
            lo2 = -g.R / 2 + sj * side
            rep = SquareReport(
                index=j_idx,
                bounds=(lo1, lo1 + side, lo2, lo2 + side),
                energy=e,
                good=(e / b) <= C_star * abs(math.log(b)),
            )
            reports.append(rep)
    for ball in balls:
        j_idx = square_of_point(ball.center, g)
        rep = reports[j_idx]
        rep.balls.append(ball)
        rep.radius_total += ball.radius
        lo1, hi1, lo2, hi2 = rep.bounds
        inside_margin = (
            lo1 + margin < ball.center[0] - ball.radius
            and ball.center[0] + ball.radius < hi1 - margin
            and lo2 + margin < ball.center[1] - ball.radius
            and ball.center[1] + ball.radius < hi2 - margin
        )
        if inside_margin:
            rep.d_plus += max(ball.degree, 0)
            rep.d_minus += max(-ball.degree, 0)
    for rep in reports:
        rep.d_total = rep.d_plus + rep.d_minus
        rep.radius_budget_exceeded = rep.radius_total > budget
    return reports


def coverage_gaps(field: DiscreteField, balls, b: float) -> int:
    """Sites with ||u| - 1| >= b^(1/16), inside the inner square margins,
    not covered by any ball.  Returns the count of uncovered sites."""
    g = field.grid
    k, m = _square_grid(g)
    side = g.R / k
    margin = math.sqrt(b)
    absu = np.abs(field.u)
    flagged = np.argwhere(np.abs(absu - 1.0) >= b ** (1.0 / 16.0))
    count = 0
    for i, j in flagged:
        x = -g.R / 2 + i * g.h
        y = -g.R / 2 + j * g.h
        dx1 = (x + g.R / 2) % side
        dx2 = (y + g.R / 2) % side
        if min(dx1, side - dx1, dx2, side - dx2) <= margin:
            continue
        covered = False
        for ball in balls:
            d = _torus_delta((x, y), ball.center, g.R)
            if math.hypot(d[0], d[1]) <= ball.radius:
                covered = True
                break
        if not covered:
            count += 1
    return count


def supercurrent(field: DiscreteField) -> tuple[np.ndarray, np.ndarray]:
    """Per-link current j = Im(conj(u) * D u) / h; gauge invariant, periodic."""
    dx, dy = covariant_differences(field)
    h = field.grid.h
    jx = (np.conj(field.u) * dx).imag / h
    jy = (np.conj(field.u) * dy).imag / h
    return jx, jy


def vorticity(field: DiscreteField) -> VorticityField:
    """Vorticity mu = curl j + curl A0 per plaquette; total mass 2*pi*N.

    curl j telescopes to zero over the periodic cell, so the total is the
    quantized flux R^2 = 2*pi*N for every field.
    """
    g = field.grid
    jx, jy = supercurrent(field)
    circ = g.h * (
        jx + np.roll(jy, -1, axis=0) - np.roll(jx, -1, axis=1) - jy
    )
    flux = plaquette_fluxes(field.link_phases(), g, field.wrap)
    mu = circ + flux
    return VorticityField(mu=mu, total_mass=math.fsum(np.sum(mu, axis=0)),
                          h=g.h, R=g.R)


def vorticity_measure(vf: VorticityField) -> DiscreteMeasure:
    """Vorticity field as atoms at plaquette centers."""
    n = vf.mu.shape[0]
    x = -vf.R / 2 + vf.h * (np.arange(n) + 0.5)
    X, Y = np.meshgrid(x, x, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return DiscreteMeasure(points=pts, weights=vf.mu.ravel().astype(float))


def ball_measure(balls, weight_scale: float = TWO_PI) -> DiscreteMeasure:
    """Sum of weight_scale * degree * delta at ball centers."""
    if not balls:
        return DiscreteMeasure(points=np.zeros((0, 2)), weights=np.zeros(0))
    pts = np.array([b.center for b in balls], dtype=float)
    w = weight_scale * np.array([b.degree for b in balls], dtype=float)
    return DiscreteMeasure(points=pts, weights=w)


def uniform_measure(domain, density: float) -> DiscreteMeasure:
    """Uniform background measure on the rectangular domain (handled exactly)."""
    return DiscreteMeasure(points=np.zeros((0, 2)), weights=np.zeros(0),
                           uniform_density=density)


def _tent_pairing(mu: DiscreteMeasure, c, s) -> float:
    total = 0.0
    if mu.points.shape[0]:
        r = np.hypot(mu.points[:, 0] - c[0], mu.points[:, 1] - c[1])
        total += float(np.sum(mu.weights * np.maximum(0.0, s - r)))
    if mu.uniform_density:
        # exact cone integral: int (s - |x - c|)_+ dx = pi s^3 / 3
        total += mu.uniform_density * math.pi * s**3 / 3.0
    return total


def lipschitz_dual_distance(
    mu_a: DiscreteMeasure,
    mu_b: DiscreteMeasure,
    domain: tuple[float, float, float, float],
    dictionary_depth: int = 6,
) -> MeasureDistanceReport:
    """Lower bound of the Lipschitz-dual distance between two measures.

    The test dictionary holds radial tents f(x) = max(0, s - |x - c|), which
    have Lipschitz constant exactly 1 and compact support, centered on dyadic
    grids over the domain at scales down to side / 2^dictionary_depth.  The
    scale is clamped to the distance to the boundary so supports stay inside
    the open domain; the estimate is monotone in dictionary_depth.
    """
    if dictionary_depth < 0:
        raise VortexError("empty dictionary")
    x_lo, x_hi, y_lo, y_hi = domain
    Lx, Ly = x_hi - x_lo, y_hi - y_lo
    best = 0.0
    witness = (0.0, 0.0, 0.0)
    count = 0
    for depth in range(dictionary_depth + 1):
        nx = 2**depth
        sx, sy = Lx / nx, Ly / nx
        scale = min(sx, sy)
        for ii in range(nx):
            for jj in range(nx):
                cx = x_lo + (ii + 0.5) * sx
                cy = y_lo + (jj + 0.5) * sy
                s = min(scale, cx - x_lo, x_hi - cx, cy - y_lo, y_hi - cy)
                if s <= 0.0:
                    continue
                count += 1
                val = abs(_tent_pairing(mu_a, (cx, cy), s)
                          - _tent_pairing(mu_b, (cx, cy), s))
                if val > best:
                    best = val
                    witness = (cx, cy, s)
    if count == 0:
        raise VortexError("empty dictionary")
    return MeasureDistanceReport(
        estimate=best,
        dictionary=f"radial tents, dyadic depths 0..{dictionary_depth}, {count} elements",
        witness=witness,
        depth=dictionary_depth,
    )
