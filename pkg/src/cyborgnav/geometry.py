"""Reference-path geometry for the sine-path navigation task.

All lengths are millimetres and all angles degrees. The path is the graph of
``y = amplitude * sin(2*pi*x / wavelength)`` restricted to ``[x_start, x_end]``,
so the x-coordinate doubles as the path parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._accel import njit
from .errors import DegenerateTargetError, GeometryError

__all__ = [
    "Pose2D",
    "PathSpec",
    "ArenaSpec",
    "wrap_deg",
    "path_point",
    "project_onto_path",
    "carrot_target",
    "heading_error",
    "area_between",
    "arc_length",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
PROJECTION_TOL = 1e-6
# coarse seed grid for projection, as a fraction of the wavelength
COARSE_FRACTION = 0.01


def wrap_deg(angle: float) -> float:
    """Wrap an angle in degrees to (-180, 180]."""
    return _wrap_deg(float(angle))


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise GeometryError("pose coordinates must be finite")
        object.__setattr__(self, "heading", wrap_deg(self.heading))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class PathSpec:
    amplitude: float = 170.0
    wavelength: float = 850.0
    x_start: float = 0.0
    x_end: float = 850.0
    endpoint_radius: float = 40.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise GeometryError("wavelength must be positive")
        if not self.endpoint_radius > 0:
            raise GeometryError("endpoint_radius must be positive")
        if not self.x_start < self.x_end:
            raise GeometryError("x_start must be less than x_end")

    def y(self, x):
        """Path ordinate at ``x`` (scalar or array)."""
        return self.amplitude * np.sin(2.0 * np.pi * np.asarray(x, dtype=float) / self.wavelength)

    def slope(self, x):
        k = 2.0 * np.pi / self.wavelength
        return self.amplitude * k * np.cos(k * np.asarray(x, dtype=float))

    def origin(self, direction: int = 1) -> tuple[float, float]:
        """Centre of the start circle for a run in ``direction`` (+1 or -1)."""
        x = self.x_start if direction > 0 else self.x_end
        return path_point(self, x)

    def destination(self, direction: int = 1) -> tuple[float, float]:
        return self.origin(-direction)

    def tangent_heading(self, x: float, direction: int = 1) -> float:
        """Heading (deg) of the path tangent at ``x`` when travelling in ``direction``."""
        dy = float(self.slope(x))
        if direction > 0:
            return math.degrees(math.atan2(dy, 1.0))
        return math.degrees(math.atan2(-dy, -1.0))


@dataclass(frozen=True)
class ArenaSpec:
    width: float = 1200.0
    height: float = 600.0
    center: tuple[float, float] | None = field(default=None)

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise GeometryError("arena dimensions must be positive")

    def bounds(self, path: PathSpec) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax); centred on the path unless ``center`` is set."""
        if self.center is None:
            cx, cy = 0.5 * (path.x_start + path.x_end), 0.0
        else:
            cx, cy = self.center
        return (cx - self.width / 2, cx + self.width / 2, cy - self.height / 2, cy + self.height / 2)

    def contains(self, path: PathSpec, x: float, y: float) -> bool:
        xmin, xmax, ymin, ymax = self.bounds(path)
        return xmin <= x <= xmax and ymin <= y <= ymax


# --------------------------------------------------------------------------
# scalar kernels (shared with the trial loop)


@njit
def _wrap_deg(a):
    r = a - 360.0 * math.floor((a + 180.0) / 360.0)
    if r <= -180.0:
        r += 360.0
    return r


@njit
def _path_y(amp, lam, x):
    return amp * math.sin(2.0 * math.pi * x / lam)


@njit
def _dist2(amp, lam, px, py, x):
    dx = px - x
    dy = py - _path_y(amp, lam, x)
    return dx * dx + dy * dy


@njit
def _golden_min(amp, lam, px, py, a, b, tol):
    g = INV_PHI
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc = _dist2(amp, lam, px, py, c)
    fd = _dist2(amp, lam, px, py, d)
    while b - a > tol:
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = b - g * (b - a)
            fc = _dist2(amp, lam, px, py, c)
        else:
            a = c
            c = d
            fc = fd
            d = a + g * (b - a)
            fd = _dist2(amp, lam, px, py, d)
    x = 0.5 * (a + b)
    # the bracket ends may beat the interior when the minimum sits on a bound
    best = x
    fbest = _dist2(amp, lam, px, py, x)
    fa = _dist2(amp, lam, px, py, a)
    if fa < fbest:
        best, fbest = a, fa
    fb = _dist2(amp, lam, px, py, b)
    if fb < fbest:
        best, fbest = b, fb
    return best, fbest


@njit
def _project(amp, lam, x0, x1, px, py):
    """Closest path point to (px, py) on [x0, x1]: returns (foot_x, foot_y, distance)."""
    step = lam * COARSE_FRACTION
    n = int(math.ceil((x1 - x0) / step)) + 1
    if n < 3:
        n = 3
    h = (x1 - x0) / (n - 1)
    prev2 = _dist2(amp, lam, px, py, x0)
    cur = _dist2(amp, lam, px, py, x0 + h)
    best_x = x0
    best_f = prev2
    # left endpoint as a candidate
    if prev2 <= cur:
        bx, bf = _golden_min(amp, lam, px, py, x0, x0 + h, PROJECTION_TOL)
        if bf < best_f:
            best_x, best_f = bx, bf
    for i in range(1, n - 1):
        xi = x0 + i * h
        nxt = _dist2(amp, lam, px, py, x0 + (i + 1) * h)
        if cur <= prev2 and cur <= nxt:
            bx, bf = _golden_min(amp, lam, px, py, xi - h, xi + h, PROJECTION_TOL)
            if bf < best_f:
                best_x, best_f = bx, bf
        prev2 = cur
        cur = nxt
    # right endpoint
    if cur <= prev2:
        bx, bf = _golden_min(amp, lam, px, py, x1 - h, x1, PROJECTION_TOL)
        if bf < best_f:
            best_x, best_f = bx, bf
    fe = _dist2(amp, lam, px, py, x1)
    if fe < best_f:
        best_x, best_f = x1, fe
    return best_x, _path_y(amp, lam, best_x), math.sqrt(best_f)


@njit
def _carrot(amp, lam, x0, x1, fx, fy, lookahead, direction):
    """Forward intersection of the lookahead circle around (fx, fy) with the path.

    Returns (tx, ty, clamped); clamped=True means no intersection exists before
    the path end in ``direction`` and the end point is returned instead.
    """
    end = x1 if direction > 0 else x0
    step = lookahead / 16.0
    if step > 1.0:
        step = 1.0
    xa = fx
    while True:
        b = xa + direction * step
        past = (direction > 0 and b >= end) or (direction < 0 and b <= end)
        if past:
            b = end
        gb = math.sqrt(_dist2(amp, lam, fx, fy, b)) - lookahead
        if gb >= 0.0:
            lo = xa
            hi = b
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                gm = math.sqrt(_dist2(amp, lam, fx, fy, mid)) - lookahead
                if gm >= 0.0:
                    hi = mid
                else:
                    lo = mid
                if abs(hi - lo) < 1e-12:
                    break
            return hi, _path_y(amp, lam, hi), False
        if past:
            return end, _path_y(amp, lam, end), True
        xa = b


@njit
def _heading_error(x, y, heading, tx, ty):
    bearing = math.degrees(math.atan2(ty - y, tx - x))
    return _wrap_deg(bearing - heading)


# --------------------------------------------------------------------------
# public operations


def path_point(spec: PathSpec, x: float) -> tuple[float, float]:
    """Point of the path at abscissa ``x``."""
    x = float(x)
    if not math.isfinite(x):
        raise GeometryError("x must be finite")
    return (x, _path_y(spec.amplitude, spec.wavelength, x))


def project_onto_path(spec: PathSpec, p) -> tuple[tuple[float, float], float, float]:
    """Closest point of the path segment to ``p``.

    Coarse sampling at 1/100 of the wavelength seeds a golden-section search
    around every local minimum; the best refined candidate wins.

    Returns:
        ``(foot, distance, arc_param)`` where ``arc_param`` is the foot's x.
    """
    px, py = float(p[0]), float(p[1])
    if not (math.isfinite(px) and math.isfinite(py)):
        raise GeometryError("point must be finite")
    fx, fy, d = _project(spec.amplitude, spec.wavelength, spec.x_start, spec.x_end, px, py)
    return (fx, fy), d, fx


def carrot_target(spec: PathSpec, foot, lookahead: float, direction: int = 1) -> tuple[float, float]:
    """Virtual target ``lookahead`` mm ahead of ``foot`` along the path.

    ``direction`` is +1 when travelling toward ``x_end`` and -1 toward
    ``x_start``. When the circle no longer meets the path ahead, the end
    point (destination centre) is returned.
    """
    if not lookahead > 0:
        raise GeometryError("lookahead must be positive")
    fx, fy = float(foot[0]), float(foot[1])
    tx, ty, _ = _carrot(spec.amplitude, spec.wavelength, spec.x_start, spec.x_end, fx, fy,
                        float(lookahead), 1 if direction > 0 else -1)
    return (tx, ty)


def heading_error(pose: Pose2D, target) -> float:
    """Signed angle (deg) from the pose heading to the bearing of ``target``.

    Positive means the target lies counter-clockwise (to the left).
    """
    tx, ty = float(target[0]), float(target[1])
    if math.hypot(tx - pose.x, ty - pose.y) < 1e-9:
        raise DegenerateTargetError("degenerate target")
    return _heading_error(pose.x, pose.y, pose.heading, tx, ty)


def arc_length(spec: PathSpec, a: float | None = None, b: float | None = None) -> float:
    """Arc length of the path between abscissae ``a`` and ``b`` (defaults: whole path)."""
    a = spec.x_start if a is None else a
    b = spec.x_end if b is None else b
    k = 2.0 * math.pi / spec.wavelength
    ak = spec.amplitude * k

    def integrand(x):
        return math.sqrt(1.0 + (ak * math.cos(k * x)) ** 2)

    n_periods = max(1, int(math.ceil(abs(b - a) / spec.wavelength)))
    value, _ = integrate.quad(integrand, a, b, limit=100 * n_periods, epsabs=1e-10, epsrel=1e-12)
    return value


def _closing_integral(spec: PathSpec, x):
    """Antiderivative of ``x*f'(x) - f(x)``: twice the swept area term along the path."""
    k = 2.0 * np.pi / spec.wavelength
    x = np.asarray(x, dtype=float)
    return spec.amplitude * (x * np.sin(k * x) + 2.0 * np.cos(k * x) / k)


def _cross(p, q):
    return p[..., 0] * q[..., 1] - q[..., 0] * p[..., 1]


def _crossings(spec: PathSpec, p0: np.ndarray, p1: np.ndarray, s0: np.ndarray) -> np.ndarray:
    """Points where segments p0->p1 meet the path, found by bisection (vectorised)."""
    lo = np.zeros(len(p0))
    hi = np.ones(len(p0))
    up = s0 > 0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        q = p0 + mid[:, None] * (p1 - p0)
        same = (q[:, 1] - spec.y(q[:, 0]) > 0) == up
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    q = p0 + hi[:, None] * (p1 - p0)
    return np.column_stack([q[:, 0], spec.y(q[:, 0])])


def area_between(trajectory, spec: PathSpec) -> float:
    """Unsigned area enclosed between a trajectory polyline and the path.

    The trajectory is split wherever it crosses or touches the path. Each piece
    is closed by straight segments to the projections of its ends and by the
    exact curve between them; the absolute areas of the pieces are summed.

    Args:
        trajectory: ``(n, 2)`` array-like of x, y points (extra columns
            ignored) or a sequence of :class:`Pose2D`.
        spec: reference path.
    """
    if len(trajectory) and isinstance(trajectory[0], Pose2D):
        trajectory = [(p.x, p.y) for p in trajectory]
    pts = np.asarray(trajectory, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise GeometryError("insufficient trajectory")
    pts = pts[:, :2]
    n = len(pts)
    side = pts[:, 1] - spec.y(pts[:, 0])
    seg = np.nonzero(side[:-1] * side[1:] < 0)[0]
    touch = np.nonzero(side[1:-1] == 0)[0] + 1

    # split events ordered along the trajectory: (last index before, split point, first index after)
    hits = _crossings(spec, pts[seg], pts[seg + 1], side[seg])
    order = np.argsort(np.concatenate([seg + 0.5, touch.astype(float)]), kind="stable")
    split = np.vstack([hits, np.column_stack([pts[touch, 0], spec.y(pts[touch, 0])])])[order]
    before = np.concatenate([seg, touch])[order]
    after = np.concatenate([seg + 1, touch])[order]

    # running sum of edge terms along the trajectory
    edge = np.concatenate([[0.0], np.cumsum(_cross(pts[:-1], pts[1:]))])

    (sx, sy), _, _ = project_onto_path(spec, pts[0])
    (ex, ey), _, _ = project_onto_path(spec, pts[-1])
    start = np.vstack([[sx, sy], split])           # path point opening each piece
    end = np.vstack([split, [ex, ey]])             # path point closing each piece
    first = np.concatenate([[0], after])           # first trajectory index of each piece
    last = np.concatenate([before, [n - 1]])       # last trajectory index of each piece

    twice = (_cross(start, pts[first])
             + edge[last] - edge[first]
             + _cross(pts[last], end)
             + _closing_integral(spec, start[:, 0]) - _closing_integral(spec, end[:, 0]))
    return 0.5 * float(np.abs(twice).sum())
