"""The universal three-parameter family ``G(mu; alpha) = G0(mu) + alpha . mu``.

``G0 = a x^2 + b y^2 + c z^2`` with ``a > b > c``.  Relative equilibria of
``G_alpha`` are the points where ``d(G_alpha, j)`` has rank <= 1, i.e. where
``grad G_alpha`` is parallel to ``mu``.  Away from ``mu = 0`` this is the
Lagrange condition ``grad G_alpha = lam * mu`` which solves componentwise as
``mu_i = alpha_i / (lam - 2 a_i)``, so every branch is an explicit curve in
the multiplier ``lam``.  Components with ``alpha_i = 0`` contribute the
extra straight lines ``lam = 2 a_i`` that cross the multiplier curve at the
pitchfork points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateModel, PoleHit, WrongStratum
from .so3 import as_vector

DELTA0 = "Delta0"
DELTA1 = "Delta1"
DELTA2 = "Delta2"
GENERIC = "Generic"

AXES = "xyz"


@dataclass(frozen=True)
class QuadraticModel:
    """Coefficients of the organizing quadratic ``a x^2 + b y^2 + c z^2``."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        vals = (self.a, self.b, self.c)
        if not all(np.isfinite(vals)):
            raise DegenerateModel(f"coefficients must be finite, got {vals}")
        if len(set(vals)) < 3:
            raise DegenerateModel(f"coefficients must be distinct, got {vals}")
        if not (self.a > self.b > self.c):
            raise DegenerateModel(f"coefficients must satisfy a > b > c, got {vals}")

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=float)

    @property
    def poles(self) -> np.ndarray:
        return 2.0 * self.coeffs


@dataclass(frozen=True)
class Stratum:
    """Discriminant stratum of an unfolding parameter.

    ``zero_axes`` lists the components that vanish and ``signs`` the sign
    pattern of all three; together they name the connected component.
    """

    tag: str
    zero_axes: tuple[int, ...]
    signs: tuple[int, int, int]

    @property
    def component(self) -> str:
        sym = {1: "+", -1: "-", 0: "0"}
        return "(" + ",".join(sym[s] for s in self.signs) + ")"


@dataclass
class Marker:
    """A distinguished point on a branch (bifurcation or zero momentum)."""

    kind: str
    lam: float
    mu: np.ndarray
    param: float
    index: int = -1
    partner: Optional[int] = None


@dataclass
class REBranch:
    """One connected curve of relative equilibria, sampled inside a window.

    ``param`` is the curve parameter: the multiplier ``lam`` on bounded
    pieces, ``t`` with ``lam = m + 1/t`` on the piece through the origin and
    the free coordinate on straight lines.  Samples are ordered along the
    curve.
    """

    branch_id: int
    kind: str
    lam_interval: tuple[float, float]
    param: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    j: np.ndarray
    h: np.ndarray
    tangent: np.ndarray
    contains_origin: bool = False
    markers: list[Marker] = field(default_factory=list)
    stability: Optional[list[str]] = None
    shape: Optional[np.ndarray] = None
    wraps_infinity: bool = False

    def __len__(self):
        return len(self.param)

    def marker_kinds(self):
        return [m.kind for m in self.markers]


@dataclass(frozen=True)
class SaddleCentre:
    lam: float
    mu: np.ndarray
    j: float


@dataclass(frozen=True)
class Pitchfork:
    """Crossing of the multiplier curve with the line ``lam = 2 a_axis``."""

    mu: np.ndarray
    axis: int
    lam: float
    branch_pair: tuple[int, int] = (-1, -1)


def _alpha(alpha) -> np.ndarray:
    return as_vector(alpha, "alpha")


def g_value(model: QuadraticModel, alpha, mu) -> float:
    mu = as_vector(mu)
    return float(model.coeffs @ mu**2 + _alpha(alpha) @ mu)


def g_gradient(model: QuadraticModel, alpha, mu) -> np.ndarray:
    return 2.0 * model.coeffs * as_vector(mu) + _alpha(alpha)


def jacobian_f(model: QuadraticModel, alpha, mu) -> np.ndarray:
    """Jacobian of ``(G_alpha, j)``: rows ``grad G_alpha`` and ``mu``."""
    mu = as_vector(mu)
    return np.vstack([g_gradient(model, alpha, mu), mu])


def minors(model: QuadraticModel, alpha, mu) -> np.ndarray:
    """The three 2x2 minors ``(A, B, C)`` of :func:`jacobian_f`.

    ``A = 2(b-c)yz + beta z - gamma y`` and cyclically; ``xA + yB + zC = 0``.
    """
    a, b, c = model.coeffs
    al, be, ga = _alpha(alpha)
    x, y, z = as_vector(mu)
    return np.array([
        2 * (b - c) * y * z + be * z - ga * y,
        2 * (c - a) * z * x + ga * x - al * z,
        2 * (a - b) * x * y + al * y - be * x,
    ])


def minors_jacobian(model: QuadraticModel, alpha, mu) -> np.ndarray:
    """Derivative of :func:`minors` with respect to ``mu`` (rows A, B, C)."""
    a, b, c = model.coeffs
    al, be, ga = _alpha(alpha)
    x, y, z = as_vector(mu)
    return np.array([
        [0.0, 2 * (b - c) * z - ga, 2 * (b - c) * y + be],
        [2 * (c - a) * z + ga, 0.0, 2 * (c - a) * x - al],
        [2 * (a - b) * y - be, 2 * (a - b) * x + al, 0.0],
    ])


def minors_residual(model, alpha, mu) -> float:
    """Max-norm of the minors scaled by ``1 + |mu|^2``."""
    mu = as_vector(mu)
    return float(np.max(np.abs(minors(model, alpha, mu))) / (1.0 + mu @ mu))


def point_from_multiplier(model: QuadraticModel, alpha, lam: float) -> np.ndarray:
    """Solve ``grad G_alpha(mu) = lam * mu``: ``mu_i = alpha_i / (lam - 2 a_i)``.

    A component whose numerator vanishes is set to zero, also at its own pole.
    """
    alpha = _alpha(alpha)
    out = np.zeros(3)
    for i, p in enumerate(model.poles):
        if alpha[i] == 0.0:
            continue
        if lam == p:
            raise PoleHit(f"lambda = {lam} is the pole 2{'abc'[i]} with non-zero numerator")
        out[i] = alpha[i] / (lam - p)
    return out


def p_value(model, alpha, lam) -> float:
    """``j`` along the multiplier curve: ``sum alpha_i^2 / (2 (lam - 2a_i)^2)``."""
    mu = point_from_multiplier(model, alpha, lam)
    return 0.5 * float(mu @ mu)


def _p_prime_kernel(model, alpha, lam):
    # p'(lam) = -sum alpha_i^2/(lam-2a_i)^3 ; returns the sum and its derivative
    alpha = _alpha(alpha)
    active = alpha != 0
    d = lam - model.poles[active]
    w = alpha[active] ** 2
    return float(np.sum(w / d**3)), float(-3.0 * np.sum(w / d**4))


def p_prime(model, alpha, lam) -> float:
    return -_p_prime_kernel(model, alpha, lam)[0]


def classify_stratum(alpha, threshold: float = 0.0) -> Stratum:
    """Stratum of ``alpha`` by its zero pattern (``|alpha_i| <= threshold``)."""
    alpha = _alpha(alpha)
    zero = np.abs(alpha) <= threshold
    signs = tuple(0 if z else int(np.sign(v)) for z, v in zip(zero, alpha))
    nz = int(zero.sum())
    tag = {3: DELTA0, 2: DELTA1, 1: DELTA2, 0: GENERIC}[nz]
    return Stratum(tag, tuple(int(i) for i in np.flatnonzero(zero)), signs)


def _clean_alpha(alpha, threshold):
    alpha = _alpha(alpha).copy()
    alpha[np.abs(alpha) <= threshold] = 0.0
    return alpha


def line_offset(model: QuadraticModel, alpha, axis: int) -> np.ndarray:
    """Foot point of the line ``lam = 2 a_axis`` (needs ``alpha_axis = 0``)."""
    alpha = _alpha(alpha)
    p = model.poles
    c = np.zeros(3)
    for k in range(3):
        if k != axis:
            c[k] = alpha[k] / (p[axis] - p[k])
    return c


# ---------------------------------------------------------------------------
# parametrized pieces of the RE set
# ---------------------------------------------------------------------------


class _Piece:
    kind = ""
    wraps = False

    def point(self, u):
        raise NotImplementedError

    def deriv(self, u):
        raise NotImplementedError

    def deriv2(self, u):
        raise NotImplementedError

    def lam(self, u):
        raise NotImplementedError

    def jval(self, u):
        m = self.point(u)
        return 0.5 * float(m @ m)


class _BoundedPiece(_Piece):
    """Multiplier curve on a bounded interval between two active poles."""

    kind = "bounded"

    def __init__(self, model, alpha, lo, hi):
        self.model, self.alpha = model, alpha
        self.lo, self.hi = lo, hi
        self.active = alpha != 0

    def point(self, u):
        return point_from_multiplier(self.model, self.alpha, u)

    def deriv(self, u):
        out = np.zeros(3)
        a = self.active
        out[a] = -self.alpha[a] / (u - self.model.poles[a]) ** 2
        return out

    def deriv2(self, u):
        out = np.zeros(3)
        a = self.active
        out[a] = 2 * self.alpha[a] / (u - self.model.poles[a]) ** 3
        return out

    def lam(self, u):
        return float(u)

    def lam_interval(self):
        return (self.lo, self.hi)


class _WrapPiece(_Piece):
    """Multiplier curve through ``lam = infinity``, i.e. through ``mu = 0``.

    Parametrized by ``t`` with ``lam = m + 1/t`` where ``m`` is the midpoint of
    the outermost active poles; ``t`` ranges over ``(-1/w, 1/w)`` with ``w``
    their half distance (the whole line when only one pole is active).
    """

    kind = "origin"
    wraps = True

    def __init__(self, model, alpha, pmin, pmax):
        self.model, self.alpha = model, alpha
        self.m = 0.5 * (pmin + pmax)
        self.w = 0.5 * (pmax - pmin)
        self.k = self.m - model.poles
        self.pmin, self.pmax = pmin, pmax

    @property
    def tmax(self):
        return np.inf if self.w == 0 else 1.0 / self.w

    def _den(self, u):
        # inactive components stay at zero even where their denominator vanishes
        d = 1.0 + self.k * u
        return np.where(self.alpha != 0, d, 1.0)

    def point(self, u):
        return self.alpha * u / self._den(u)

    def deriv(self, u):
        return self.alpha / self._den(u) ** 2

    def deriv2(self, u):
        return -2.0 * self.alpha * self.k / self._den(u) ** 3

    def lam(self, u):
        return np.inf if u == 0 else float(self.m + 1.0 / u)

    def param_of_lam(self, lam):
        return 1.0 / (lam - self.m)

    def lam_interval(self):
        return (self.pmax, self.pmin)


class _LinePiece(_Piece):
    """Straight line ``lam = 2 a_axis`` present when ``alpha_axis = 0``."""

    kind = "line"

    def __init__(self, model, alpha, axis):
        self.axis = axis
        self.offset = line_offset(model, alpha, axis)
        self.e = np.eye(3)[axis]
        self.lam_value = float(model.poles[axis])

    def point(self, u):
        return self.offset + u * self.e

    def deriv(self, u):
        return self.e.copy()

    def deriv2(self, u):
        return np.zeros(3)

    def lam(self, u):
        return self.lam_value

    def lam_interval(self):
        return (self.lam_value, self.lam_value)


def _pieces(model: QuadraticModel, alpha: np.ndarray) -> list[_Piece]:
    poles = model.poles
    active = sorted(poles[alpha != 0])
    pieces: list[_Piece] = []
    if active:
        pieces.append(_WrapPiece(model, alpha, active[0], active[-1]))
        for lo, hi in zip(active[:-1], active[1:]):
            pieces.append(_BoundedPiece(model, alpha, lo, hi))
    for i in range(3):
        if alpha[i] == 0:
            pieces.append(_LinePiece(model, alpha, i))
    return pieces


def _newton_bisect(f, df, lo, hi, tol=1e-15, max_iter=200):
    """Root of a strictly decreasing ``f`` in ``(lo, hi)`` with ``f(lo) > 0 > f(hi)``."""
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx, dfx = f(x), df(x)
        if fx == 0.0:
            return x
        if fx > 0:
            lo = x
        else:
            hi = x
        step_ok = dfx != 0.0
        if step_ok:
            xn = x - fx / dfx
            step_ok = lo < xn < hi
        x_new = xn if step_ok else 0.5 * (lo + hi)
        if abs(x_new - x) <= tol * (1.0 + abs(x)) or hi - lo <= tol * (1.0 + abs(x)):
            return x_new
        x = x_new
    return x


def _bounded_minimizer(model, alpha, lo, hi) -> float:
    """Multiplier in ``(lo, hi)`` where ``p'`` vanishes (``p`` is convex there)."""

    def f(lam):
        return _p_prime_kernel(model, alpha, lam)[0]

    def df(lam):
        return _p_prime_kernel(model, alpha, lam)[1]

    width = hi - lo
    off = 0.25 * width
    while f(lo + off) <= 0:
        off *= 0.1
    a = lo + off
    off = 0.25 * width
    while f(hi - off) >= 0:
        off *= 0.1
    b = hi - off
    return _newton_bisect(f, df, a, b)


def saddle_centre_points(model: QuadraticModel, alpha) -> list[SaddleCentre]:
    """Closest points to the origin on the two branches missing it (generic alpha)."""
    alpha = _alpha(alpha)
    if classify_stratum(alpha).tag != GENERIC:
        raise WrongStratum("saddle-centre points need alpha off the discriminant")
    out = []
    poles = np.sort(model.poles)
    for lo, hi in zip(poles[:-1], poles[1:]):
        lam = _bounded_minimizer(model, alpha, lo, hi)
        mu = point_from_multiplier(model, alpha, lam)
        out.append(SaddleCentre(lam, mu, 0.5 * float(mu @ mu)))
    return out


def pitchfork_points(model: QuadraticModel, alpha, threshold: float = 0.0) -> list[Pitchfork]:
    """Singular points of the RE set for ``alpha`` in Delta1 or Delta2.

    For each vanishing component ``i`` the line ``lam = 2 a_i`` crosses the
    multiplier curve at ``mu_k = alpha_k / (2a_i - 2a_k)`` (``k != i``),
    ``mu_i = 0``.  Generic ``alpha`` gives an empty list.
    """
    alpha = _clean_alpha(alpha, threshold)
    st = classify_stratum(alpha)
    if st.tag == GENERIC:
        return []
    if st.tag == DELTA0:
        raise WrongStratum("at alpha = 0 the origin is a triple point, not a pitchfork pair")
    return [Pitchfork(line_offset(model, alpha, i), i, float(model.poles[i])) for i in st.zero_axes]


def equilibrium(model: QuadraticModel, alpha) -> Optional[np.ndarray]:
    """Critical point of ``G_alpha`` itself (``lam = 0``); None if a coefficient is 0."""
    if np.any(model.coeffs == 0):
        return None
    return -_alpha(alpha) / (2.0 * model.coeffs)


# ---------------------------------------------------------------------------
# windowed enumeration
# ---------------------------------------------------------------------------


def _radius_crossing(piece, r2, u0, u1):
    """Parameter between ``u0`` and ``u1`` (one inside, one outside) with j = r2/2."""
    return brentq(lambda u: piece.jval(u) - 0.5 * r2, u0, u1, xtol=1e-15, rtol=1e-15, maxiter=500)


def _outside_toward(piece, r2, u_in, u_limit):
    """Walk geometrically from ``u_in`` toward ``u_limit`` until |mu|^2 > r2."""
    if np.isinf(u_limit):
        step = 1.0 if u_limit > 0 else -1.0
        u = u_in + step
        while piece.jval(u) <= 0.5 * r2:
            step *= 2.0
            u = u_in + step
        return u
    gap = u_limit - u_in
    offset = 0.5 * gap
    while piece.jval(u_limit - offset) <= 0.5 * r2:
        offset *= 0.5
        if abs(offset) < 1e-300:
            raise RuntimeError("window boundary not bracketed")
    return u_limit - offset


def _window_interval(piece, R):
    """Closed parameter interval of the piece inside ``|mu| <= R`` (or None)."""
    r2 = R * R
    if isinstance(piece, _LinePiece):
        rest = r2 - piece.offset @ piece.offset
        if rest <= 0:
            return None
        s = np.sqrt(rest)
        return (-s, s), 0.0
    if isinstance(piece, _WrapPiece):
        centre = 0.0
        lo_lim, hi_lim = -piece.tmax, piece.tmax
    else:
        centre = _bounded_minimizer(piece.model, piece.alpha, piece.lo, piece.hi)
        if piece.jval(centre) >= 0.5 * r2:
            return None
        lo_lim, hi_lim = piece.lo, piece.hi
    out_hi = _outside_toward(piece, r2, centre, hi_lim)
    out_lo = _outside_toward(piece, r2, centre, lo_lim)
    u_hi = _radius_crossing(piece, r2, centre, out_hi)
    u_lo = _radius_crossing(piece, r2, out_lo, centre)
    return (u_lo, u_hi), centre


def _sample_params(piece, lo, hi, special, max_step, n_initial=65, max_rounds=40):
    u = np.linspace(lo, hi, n_initial)
    extra = [s for s in special if lo < s < hi]
    u = np.unique(np.concatenate([u, extra]))
    for _ in range(max_rounds):
        pts = np.array([piece.point(v) for v in u])
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        bad = np.flatnonzero(seg > max_step)
        if not len(bad):
            break
        mids = 0.5 * (u[bad] + u[bad + 1])
        u = np.unique(np.concatenate([u, mids]))
    return u


def enumerate_branches(model: QuadraticModel, alpha, window_radius: float,
                       max_step: Optional[float] = None, threshold: float = 0.0) -> list[REBranch]:
    """All branches of relative equilibria of ``G_alpha`` inside ``|mu| <= R``.

    Generic alpha yields the branch through the origin plus the two bounded
    multiplier intervals; on the discriminant the straight lines of vanishing
    components are added and their crossings recorded as pitchfork markers.
    """
    if not window_radius > 0:
        raise ValueError("window_radius must be positive")
    alpha = _clean_alpha(alpha, threshold)
    R = float(window_radius)
    max_step = R / 100.0 if max_step is None else max_step
    pieces = _pieces(model, alpha)
    line_axes = {p.axis: p for p in pieces if isinstance(p, _LinePiece)}
    branches: list[REBranch] = []
    for piece in pieces:
        win = _window_interval(piece, R)
        if win is None:
            continue
        (lo, hi), centre = win
        special = [centre]
        crossings = []
        if not isinstance(piece, _LinePiece):
            for ax in line_axes:
                lam_c = model.poles[ax]
                if isinstance(piece, _WrapPiece):
                    if piece.pmin < lam_c < piece.pmax:
                        continue
                    uc = piece.param_of_lam(lam_c)
                else:
                    if not (piece.lo < lam_c < piece.hi):
                        continue
                    uc = lam_c
                if lo <= uc <= hi:
                    crossings.append((uc, ax))
                    special.append(uc)
        u = _sample_params(piece, lo, hi, special, max_step)
        mu = np.array([piece.point(v) for v in u])
        tan = np.array([piece.deriv(v) for v in u])
        tan /= np.linalg.norm(tan, axis=1, keepdims=True)
        lam = np.array([piece.lam(v) for v in u])
        br = REBranch(
            branch_id=len(branches),
            kind=piece.kind,
            lam_interval=piece.lam_interval(),
            param=u,
            lam=lam,
            mu=mu,
            j=0.5 * np.einsum("ij,ij->i", mu, mu),
            h=mu**2 @ model.coeffs + mu @ alpha,
            tangent=tan,
            wraps_infinity=piece.wraps,
        )
        br._piece = piece  # kept for exact re-evaluation
        idx = {float(v): k for k, v in enumerate(u)}
        if isinstance(piece, _WrapPiece):
            br.contains_origin = True
            br.markers.append(Marker("zero_momentum", np.inf, np.zeros(3), 0.0, idx[0.0]))
        elif isinstance(piece, _BoundedPiece):
            br.markers.append(Marker("saddle_centre", centre, piece.point(centre), centre, idx[float(centre)]))
        else:
            br.contains_origin = bool(np.all(piece.offset == 0))
            kind = "triple_point" if br.contains_origin else "pitchfork"
            br.markers.append(Marker(kind, piece.lam_value, piece.point(0.0), 0.0, idx[0.0]))
            br.axis = piece.axis
        for uc, ax in crossings:
            br.markers.append(Marker("pitchfork", model.poles[ax], piece.point(uc), uc, idx[float(uc)]))
            br._crossing_axes = getattr(br, "_crossing_axes", []) + [ax]
        branches.append(br)
    # link pitchfork partners between the curve pieces and the lines
    by_axis = {getattr(b, "axis", None): b for b in branches if b.kind == "line"}
    for b in branches:
        if b.kind == "line":
            continue
        for m in b.markers:
            if m.kind != "pitchfork":
                continue
            ax = int(np.argmin(np.abs(model.poles - m.lam)))
            line = by_axis.get(ax)
            if line is None:
                continue
            m.partner = line.branch_id
            for lm in line.markers:
                if lm.kind == "pitchfork":
                    lm.partner = b.branch_id
    return branches


def crossing_points(branches: list[REBranch], tol: float = 1e-9) -> list[np.ndarray]:
    """Distinct points where two different branches meet (from shared samples)."""
    pts: list[np.ndarray] = []
    for i, bi in enumerate(branches):
        for bj in branches[i + 1:]:
            d = np.linalg.norm(bi.mu[:, None, :] - bj.mu[None, :, :], axis=2)
            for k, l in zip(*np.nonzero(d < tol)):
                p = bi.mu[k]
                if not any(np.linalg.norm(p - q) < tol for q in pts):
                    pts.append(p)
    return pts


def min_branch_distance(bi: REBranch, bj: REBranch) -> float:
    """Smallest distance between sample points of two branches."""
    d = np.linalg.norm(bi.mu[:, None, :] - bj.mu[None, :, :], axis=2)
    return float(d.min())


# ---------------------------------------------------------------------------
# counts and critical points of j
# ---------------------------------------------------------------------------


def re_on_sphere(model: QuadraticModel, alpha, j0: float, threshold: float = 0.0) -> list[np.ndarray]:
    """Relative equilibria on the sphere ``j = j0``, i.e. at radius ``sqrt(2 j0)``."""
    if not j0 > 0:
        raise ValueError("j0 must be positive")
    alpha = _clean_alpha(alpha, threshold)
    r2 = 2.0 * j0
    pts: list[np.ndarray] = []
    for piece in _pieces(model, alpha):
        if isinstance(piece, _LinePiece):
            rest = r2 - piece.offset @ piece.offset
            if rest > 0:
                s = np.sqrt(rest)
                pts.extend([piece.point(-s), piece.point(s)])
            elif rest == 0:
                pts.append(piece.point(0.0))
            continue
        if isinstance(piece, _WrapPiece):
            centre, lims = 0.0, (-piece.tmax, piece.tmax)
        else:
            centre = _bounded_minimizer(model, alpha, piece.lo, piece.hi)
            jc = piece.jval(centre)
            if abs(jc - j0) <= 1e-14 * j0:
                pts.append(piece.point(centre))
                continue
            if jc > j0:
                continue
            lims = (piece.lo, piece.hi)
        for lim in lims:
            out = _outside_toward(piece, r2, centre, lim)
            a, b = sorted((centre, out))
            u = brentq(lambda v: piece.jval(v) - j0, a, b, xtol=1e-15, rtol=1e-15, maxiter=500)
            pts.append(piece.point(u))
    uniq: list[np.ndarray] = []
    scale = np.sqrt(r2)
    for p in pts:
        if not any(np.linalg.norm(p - q) <= 1e-12 * scale for q in uniq):
            uniq.append(p)
    return uniq


def count_re_on_sphere(model: QuadraticModel, alpha, j0: float, threshold: float = 0.0) -> int:
    """Number of relative equilibria on the momentum sphere ``j = j0``."""
    return len(re_on_sphere(model, alpha, j0, threshold))


@dataclass(frozen=True)
class JCritical:
    """Critical point of ``j`` restricted to a branch."""

    branch_id: int
    mu: np.ndarray
    j: float
    curvature: float  # d^2 j / ds^2 along arclength

    @property
    def nondegenerate(self) -> bool:
        return abs(self.curvature) > 1e-8


def j_critical_points(model: QuadraticModel, alpha, window_radius: float) -> list[JCritical]:
    """Critical points of ``j`` on the RE set inside the window.

    These are the origin on the branch through it, the saddle-centre points
    on bounded pieces and the feet of the straight lines.
    """
    alpha = _alpha(alpha)
    out = []
    for b in enumerate_branches(model, alpha, window_radius):
        piece = b._piece
        if isinstance(piece, _WrapPiece):
            u = 0.0
        elif isinstance(piece, _BoundedPiece):
            u = _bounded_minimizer(model, alpha, piece.lo, piece.hi)
        else:
            u = 0.0
        mu = piece.point(u)
        d1 = piece.deriv(u)
        d2 = piece.deriv2(u)
        jpp = (d1 @ d1 + mu @ d2) / (d1 @ d1)
        out.append(JCritical(b.branch_id, mu, 0.5 * float(mu @ mu), float(jpp)))
    # the axes at alpha = 0 all share the origin: count it once
    uniq = []
    for c in out:
        if not any(np.allclose(c.mu, d.mu, atol=1e-14) for d in uniq):
            uniq.append(c)
    return uniq


# ---------------------------------------------------------------------------
# energy-momentum discriminant
# ---------------------------------------------------------------------------


@dataclass
class EMPolyline:
    """Image ``(j, h)`` of one branch under the energy-momentum map."""

    branch_id: int
    j: np.ndarray
    h: np.ndarray
    folds: list[tuple[float, float, str]]
    crossings: list[tuple[float, float]]


def em_discriminant(model: QuadraticModel, alpha, window_radius: float,
                    branches: Optional[list[REBranch]] = None) -> list[EMPolyline]:
    """Energy-momentum discriminant of ``G_alpha`` restricted to the window.

    Folds are the interior points where ``dj`` vanishes along a branch
    (saddle-centres, feet of lines, and the origin); crossings are images of
    pitchfork points.
    """
    if branches is None:
        branches = enumerate_branches(model, alpha, window_radius)
    out = []
    for b in branches:
        folds, crossings = [], []
        for m in b.markers:
            jv = 0.5 * float(m.mu @ m.mu)
            hv = g_value(model, alpha, m.mu)
            if m.kind == "pitchfork":
                crossings.append((jv, hv))
                if b.kind == "line":
                    folds.append((jv, hv, "line_foot"))
            elif m.kind in ("saddle_centre", "zero_momentum", "triple_point"):
                folds.append((jv, hv, m.kind))
        out.append(EMPolyline(b.branch_id, b.j.copy(), b.h.copy(), folds, crossings))
    return out
