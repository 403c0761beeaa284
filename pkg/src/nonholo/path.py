"""Planar reference paths and Earth-frame <-> path-frame conversion.

A path is generated by integrating the Frenet equations

    dx/ds = cos(psi),  dy/ds = sin(psi),  dpsi/ds = kappa(s)

for a prescribed curvature profile, and stored as a uniformly sampled table.
Positions and headings are interpolated with cubic Hermite polynomials (the
exact derivatives cos(psi), sin(psi) and kappa are known at every sample),
which keeps interpolation error far below integrator truncation error at the
default 0.1 m step. Curvature itself is interpolated linearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousProjection, NonClosure, TubeSingularity

DEFAULT_STEP = 0.1
TUBE_EPS = 1e-9
CLOSURE_RTOL = 1e-6
_TIE_DIST = 1e-9          # equidistance tolerance for ambiguity detection
_TIE_SEPARATION = 1e-3    # fraction of perimeter separating distinct minima


def wrap_angle(angle: float) -> float:
    """Wrap an angle to [-pi, pi), rounding to the nearest whole turn.

    Half-turn ties resolve deterministically: exactly +pi maps to -pi (and
    -pi stays), which keeps every output inside the half-open interval.
    """
    return angle - 2.0 * math.pi * math.floor(angle / (2.0 * math.pi) + 0.5)


@dataclass(frozen=True)
class CurvatureProfile:
    """Curvature as a function of arc length: straight, circle or periodic.

    The periodic profile is kappa(s) = kappa_max/2 * (1 - cos(2*pi*s/s_T));
    with kappa_max*s_T = 4*pi/N it generates a closed figure with N corners
    and perimeter N*s_T.
    """

    kind: str
    kappa_const: float = 0.0
    kappa_max: float = 0.0
    s_T: float = 0.0
    N: int = 0

    def __post_init__(self):
        if self.kind not in ("straight", "circle", "periodic"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "periodic":
            if self.N < 2 or self.s_T <= 0.0 or self.kappa_max < 0.0:
                raise ValueError("periodic profile needs N >= 2, s_T > 0, kappa_max >= 0")
            closure = self.kappa_max * self.s_T
            target = 4.0 * math.pi / self.N
            if abs(closure - target) > 1e-12 * target:
                raise ValueError(
                    f"closure condition violated: kappa_max*s_T = {closure:.15g}, "
                    f"expected 4*pi/N = {target:.15g}")

    @classmethod
    def straight(cls) -> "CurvatureProfile":
        return cls(kind="straight")

    @classmethod
    def circle(cls, radius: float) -> "CurvatureProfile":
        return cls(kind="circle", kappa_const=1.0 / radius)

    @classmethod
    def periodic(cls, N: int, s_T: float) -> "CurvatureProfile":
        return cls(kind="periodic", kappa_max=4.0 * math.pi / (N * s_T),
                   s_T=s_T, N=N)

    def kappa(self, s: float) -> float:
        if self.kind == "straight":
            return 0.0
        if self.kind == "circle":
            return self.kappa_const
        return 0.5 * self.kappa_max * (1.0 - math.cos(2.0 * math.pi * s / self.s_T))

    def kappa_prime(self, s: float) -> float:
        """d kappa / d s."""
        if self.kind != "periodic":
            return 0.0
        return self.kappa_max * math.pi / self.s_T * math.sin(2.0 * math.pi * s / self.s_T)

    def kappa_second(self, s: float) -> float:
        """d^2 kappa / d s^2."""
        if self.kind != "periodic":
            return 0.0
        return (2.0 * self.kappa_max * (math.pi / self.s_T) ** 2
                * math.cos(2.0 * math.pi * s / self.s_T))

    def natural_length(self) -> float | None:
        """Length closing the figure, if the profile defines one."""
        if self.kind == "periodic":
            return self.N * self.s_T
        if self.kind == "circle":
            return 2.0 * math.pi / self.kappa_const
        return None


def curvature_at(profile: CurvatureProfile, s: float) -> float:
    """Curvature of the profile at arc length s (total function)."""
    return profile.kappa(s)


@dataclass(frozen=True)
class PathQuery:
    """Result of projecting a pose onto a path."""

    s_C: float       # arc length of the closest path point
    e_C: float       # signed lateral deviation, positive left of the path
    psi_C: float     # path heading at the closest point
    kappa_C: float   # path curvature at the closest point
    theta_C: float   # relative yaw, wrapped to [-pi, pi)
    x_C: float = 0.0
    y_C: float = 0.0


class PathTable:
    """Arc-length sampled path with pose lookup and closest-point projection.

    Immutable after construction; all queries are re-entrant.
    """

    def __init__(self, s, x, y, psi, kappa, closed: bool):
        self.s = np.asarray(s, dtype=float)
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.psi = np.asarray(psi, dtype=float)
        self.kappa = np.asarray(kappa, dtype=float)
        if not (len(self.s) == len(self.x) == len(self.y)
                == len(self.psi) == len(self.kappa)):
            raise ValueError("sample arrays must have equal length")
        if len(self.s) < 2:
            raise ValueError("path table needs at least two samples")
        steps = np.diff(self.s)
        if np.any(steps <= 0.0):
            raise ValueError("s must be strictly increasing")
        self.step = float(steps[0])
        if np.max(np.abs(steps - self.step)) > 1e-9 * self.step:
            raise ValueError("s must be uniformly sampled")
        self.closed = closed
        self.length = float(self.s[-1] - self.s[0])
        self.perimeter = self.length if closed else 0.0
        if closed:
            gap = math.hypot(self.x[-1] - self.x[0], self.y[-1] - self.y[0])
            if gap > CLOSURE_RTOL * self.perimeter:
                raise NonClosure(
                    f"endpoint misses start by {gap:.3e} m "
                    f"(> {CLOSURE_RTOL:g} * perimeter); integration step too coarse")

    # -- lookup ----------------------------------------------------------

    def _reduce(self, s: float) -> float:
        if self.closed:
            return (s - self.s[0]) % self.perimeter + self.s[0]
        return min(max(s, self.s[0]), self.s[-1])

    def _segment(self, s: float) -> tuple[int, float]:
        sr = self._reduce(s)
        i = int((sr - self.s[0]) / self.step)
        i = min(max(i, 0), len(self.s) - 2)
        u = (sr - self.s[i]) / self.step
        return i, u

    def kappa_at(self, s: float) -> float:
        """Curvature at arc length s, linearly interpolated."""
        i, u = self._segment(s)
        return (1.0 - u) * self.kappa[i] + u * self.kappa[i + 1]

    def pose_at(self, s: float) -> tuple[float, float, float]:
        """(x, y, psi) at arc length s via cubic Hermite interpolation."""
        i, u = self._segment(s)
        h = self.step
        h00 = (1.0 + 2.0 * u) * (1.0 - u) ** 2
        h10 = u * (1.0 - u) ** 2
        h01 = u * u * (3.0 - 2.0 * u)
        h11 = u * u * (u - 1.0)
        c0, c1 = math.cos(self.psi[i]), math.cos(self.psi[i + 1])
        s0, s1 = math.sin(self.psi[i]), math.sin(self.psi[i + 1])
        x = h00 * self.x[i] + h10 * h * c0 + h01 * self.x[i + 1] + h11 * h * c1
        y = h00 * self.y[i] + h10 * h * s0 + h01 * self.y[i + 1] + h11 * h * s1
        psi = (h00 * self.psi[i] + h10 * h * self.kappa[i]
               + h01 * self.psi[i + 1] + h11 * h * self.kappa[i + 1])
        return x, y, psi

    def pose_at_many(self, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized :meth:`pose_at` for an array of arc lengths."""
        s = np.asarray(s, dtype=float)
        if self.closed:
            sr = (s - self.s[0]) % self.perimeter + self.s[0]
        else:
            sr = np.clip(s, self.s[0], self.s[-1])
        i = np.clip(((sr - self.s[0]) / self.step).astype(int), 0, len(self.s) - 2)
        u = (sr - self.s[i]) / self.step
        h = self.step
        h00 = (1.0 + 2.0 * u) * (1.0 - u) ** 2
        h10 = u * (1.0 - u) ** 2
        h01 = u * u * (3.0 - 2.0 * u)
        h11 = u * u * (u - 1.0)
        c0, c1 = np.cos(self.psi[i]), np.cos(self.psi[i + 1])
        s0, s1 = np.sin(self.psi[i]), np.sin(self.psi[i + 1])
        x = h00 * self.x[i] + h10 * h * c0 + h01 * self.x[i + 1] + h11 * h * c1
        y = h00 * self.y[i] + h10 * h * s0 + h01 * self.y[i + 1] + h11 * h * s1
        psi = (h00 * self.psi[i] + h10 * h * self.kappa[i]
               + h01 * self.psi[i + 1] + h11 * h * self.kappa[i + 1])
        return x, y, psi

    # -- projection ------------------------------------------------------

    def project(self, x: float, y: float, psi: float,
                hint: float | None = None, window: float = 5.0) -> PathQuery:
        """Closest-point projection of a pose onto the path.

        Without a hint the whole table is searched and a tie between two
        distinct minima raises :class:`AmbiguousProjection`. With a hint only
        a local window of the table is searched (the closest point moves
        continuously along a trajectory) and the returned s_C is continuous
        with the hint, i.e. not reduced modulo the perimeter.
        """
        if hint is None:
            i0 = self._global_nearest(x, y)
            s_guess = self.s[i0]
        else:
            i0 = self._local_nearest(x, y, hint, window)
            s_guess = self.s[0] + i0 * self.step

        s_star = self._refine(x, y, s_guess)
        xc, yc, psic = self.pose_at(s_star)
        e = -(x - xc) * math.sin(psic) + (y - yc) * math.cos(psic)
        theta = wrap_angle(psi - psic)
        kap = self.kappa_at(s_star)
        if hint is not None and self.closed:
            # unwrap next to the hint so s_C stays monotone along a run
            delta = (s_star - hint + 0.5 * self.perimeter) % self.perimeter \
                - 0.5 * self.perimeter
            s_out = hint + delta
        else:
            s_out = s_star
        return PathQuery(s_C=s_out, e_C=e, psi_C=psic, kappa_C=kap,
                         theta_C=theta, x_C=xc, y_C=yc)

    def _global_nearest(self, x: float, y: float) -> int:
        pts = self.x[:-1] if self.closed else self.x
        d2 = (pts - x) ** 2 + ((self.y[:-1] if self.closed else self.y) - y) ** 2
        dist = np.sqrt(d2)
        dmin = float(dist.min())
        ties = np.nonzero(dist <= dmin + _TIE_DIST)[0]
        if len(ties) > 1:
            span = self.perimeter if self.closed else self.length
            tied_s = self.s[ties]
            if self.closed:
                # arc extent of the tied set, allowing it to cross the seam
                gaps = np.diff(np.append(tied_s, tied_s[0] + span))
                extent = span - float(np.max(gaps))
            else:
                extent = float(tied_s[-1] - tied_s[0])
            if extent > _TIE_SEPARATION * span:
                raise AmbiguousProjection(
                    f"equidistant path points ({dmin:.6g} m) spread over "
                    f"{extent:.3g} m of arc from ({x:.6g}, {y:.6g}); "
                    f"closest point is not unique")
        return int(ties[0])

    def _local_nearest(self, x: float, y: float, hint: float, window: float) -> int:
        n = len(self.s)
        ic = int(round((self._reduce(hint) - self.s[0]) / self.step))
        k = max(1, int(math.ceil(window / self.step)))
        if self.closed:
            idx = (np.arange(ic - k, ic + k + 1)) % (n - 1)
        else:
            idx = np.arange(max(0, ic - k), min(n, ic + k + 1))
        d2 = (self.x[idx] - x) ** 2 + (self.y[idx] - y) ** 2
        return int(idx[int(np.argmin(d2))])

    def _refine(self, x: float, y: float, s0: float) -> float:
        # Newton iteration on the tangency condition (P - C(s)) . t(s) = 0,
        # equivalently on the derivative of the squared distance.
        s = s0
        for _ in range(12):
            xc, yc, psic = self.pose_at(s)
            tx, ty = math.cos(psic), math.sin(psic)
            rx, ry = x - xc, y - yc
            g = rx * tx + ry * ty
            if abs(g) < 1e-12:
                break
            kap = self.kappa_at(s)
            # d/ds [(P-C).t] = -|t|^2 + (P-C).(kappa*n) = -(1 - kappa*e)
            e_loc = -rx * ty + ry * tx
            gp = -(1.0 - kap * e_loc)
            if abs(gp) < TUBE_EPS:
                break
            ds = -g / gp
            ds = max(-self.step, min(self.step, ds))
            s += ds
            if abs(ds) < 1e-13 * max(1.0, abs(s)):
                break
        if not self.closed:
            s = min(max(s, self.s[0]), self.s[-1])
        return self._reduce(s)

    # -- CSV -------------------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("s,x,y,psi,kappa\n")
            for row in zip(self.s, self.x, self.y, self.psi, self.kappa):
                fh.write(",".join(f"{v:.12g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path, closed: bool = False) -> "PathTable":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3], data[:, 4],
                   closed=closed)


def build_path(profile: CurvatureProfile, step: float = DEFAULT_STEP,
               length: float | None = None,
               x0: float = 0.0, y0: float = 0.0, psi0: float = 0.0) -> PathTable:
    """Integrate the Frenet equations with fixed-step RK4 in arc length.

    For periodic (and circular) profiles the generated table covers one full
    closed figure by default and is checked for closure.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    if length is None:
        length = profile.natural_length()
        if length is None:
            raise ValueError("length is required for a straight profile")
    n = max(1, int(round(length / step)))
    h = length / n

    s = np.empty(n + 1)
    x = np.empty(n + 1)
    y = np.empty(n + 1)
    psi = np.empty(n + 1)
    kap = np.empty(n + 1)
    xi, yi, pi_ = x0, y0, psi0
    kfun = profile.kappa
    for i in range(n + 1):
        si = i * h
        s[i] = si
        x[i], y[i], psi[i] = xi, yi, pi_
        kap[i] = kfun(si)
        if i == n:
            break
        # RK4 stages for (x', y', psi') = (cos psi, sin psi, kappa(s))
        k1p = kfun(si)
        p2 = pi_ + 0.5 * h * k1p
        k2p = kfun(si + 0.5 * h)
        p3 = pi_ + 0.5 * h * k2p
        k3p = kfun(si + 0.5 * h)
        p4 = pi_ + h * k3p
        k4p = kfun(si + h)
        xi += h / 6.0 * (math.cos(pi_) + 2.0 * math.cos(p2)
                         + 2.0 * math.cos(p3) + math.cos(p4))
        yi += h / 6.0 * (math.sin(pi_) + 2.0 * math.sin(p2)
                         + 2.0 * math.sin(p3) + math.sin(p4))
        pi_ += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)

    closed = profile.kind in ("circle", "periodic") and \
        abs(length - (profile.natural_length() or -1.0)) <= 1e-9 * length
    return PathTable(s, x, y, psi, kap, closed=closed)


# -- differential transformation ------------------------------------------

def frame_rates(xdot: float, ydot: float, psidot: float,
                query: PathQuery) -> tuple[float, float, float]:
    """Map Earth-frame rates to path-frame rates (s_C', e_C', theta_C')."""
    denom = 1.0 - query.kappa_C * query.e_C
    if abs(denom) < TUBE_EPS:
        raise TubeSingularity(
            f"1 - kappa*e = {denom:.3e}: point at the path's curvature center")
    c, s = math.cos(query.psi_C), math.sin(query.psi_C)
    sdot = (c * xdot + s * ydot) / denom
    edot = -xdot * s + ydot * c
    thetadot = psidot - query.kappa_C * sdot
    return sdot, edot, thetadot


def frame_rates_inverse(sdot: float, edot: float, thetadot: float,
                        query: PathQuery) -> tuple[float, float, float]:
    """Map path-frame rates back to Earth-frame rates (x', y', psi')."""
    c, s = math.cos(query.psi_C), math.sin(query.psi_C)
    factor = (1.0 - query.kappa_C * query.e_C) * sdot
    xdot = factor * c - edot * s
    ydot = factor * s + edot * c
    psidot = query.kappa_C * sdot + thetadot
    return xdot, ydot, psidot


def reconstruct_pose(table: PathTable, s: float, e: float,
                     theta: float) -> tuple[float, float, float]:
    """Earth-frame pose (x, y, psi) of a point given its path coordinates."""
    xc, yc, psic = table.pose_at(s)
    return (xc - e * math.sin(psic), yc + e * math.cos(psic), psic + theta)
