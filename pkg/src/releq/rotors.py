"""Rigid body carrying three rotors aligned with its principal axes.

``II`` is the locked inertia tensor (body plus rotors) and ``II_r`` the
diagonal matrix of rotor moments.  With free rotors the gyrostatic momentum
``sigma = II_r (omega + theta_dot)`` is conserved and the reduced energy is
``H_sigma(mu) = (mu - sigma)^T (II - II_r)^{-1} (mu - sigma) / 2``.  With
rotor rates ``u`` held fixed the energy is
``mu^T II^{-1} mu / 2 - mu^T II^{-1} II_r u``.

Both are quadratic plus linear in ``mu``, so they are members of the
universal family after sorting the axes by decreasing inverse inertia.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import AtBifurcation, DegenerateInertia, DegenerateModel
from .polynomial import Polynomial
from .reduction import ReducedSystem
from .so3 import as_vector
from .stability import AT_BIFURCATION, classify
from .universal import (
    QuadraticModel,
    classify_stratum,
    g_value,
    pitchfork_points,
    re_on_sphere,
    saddle_centre_points,
    GENERIC,
    DELTA0,
)

FREE = "free"
CONTROLLED = "controlled"


def _matrix(m, name):
    arr = np.asarray(m, dtype=float)
    if arr.shape == (3,):
        arr = np.diag(arr)
    if arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a 3-vector (diagonal) or a 3x3 matrix")
    return arr


@dataclass
class RotorBodySystem:
    II: np.ndarray
    II_r: np.ndarray
    mode: str = FREE
    sigma: np.ndarray = field(default_factory=lambda: np.zeros(3))
    u: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.II = _matrix(self.II, "II")
        self.II_r = _matrix(self.II_r, "II_r")
        if not np.allclose(self.II, self.II.T):
            raise ValueError("II must be symmetric")
        if np.any(self.II_r != np.diag(np.diag(self.II_r))):
            raise ValueError("II_r must be diagonal")
        if self.mode not in (FREE, CONTROLLED):
            raise ValueError(f"mode must be '{FREE}' or '{CONTROLLED}'")
        self.sigma = as_vector(self.sigma, "sigma")
        self.u = as_vector(self.u, "u")
        D = self.II - self.II_r
        if abs(np.linalg.det(D)) < 1e-14 * max(1.0, np.linalg.norm(D)) ** 3:
            raise DegenerateInertia("II - II_r must be invertible")

    @classmethod
    def from_config(cls, cfg):
        """``{"II": [...], "II_r": [...], "mode": "free"|"controlled", "sigma"|"u": [...]}``."""
        if isinstance(cfg, (str, Path)):
            cfg = json.loads(Path(cfg).read_text())
        mode = cfg.get("mode", FREE)
        return cls(cfg["II"], cfg["II_r"], mode,
                   sigma=cfg.get("sigma", [0.0, 0.0, 0.0]), u=cfg.get("u", [0.0, 0.0, 0.0]))

    @property
    def quad_matrix(self) -> np.ndarray:
        """Matrix ``M`` of the quadratic part ``mu^T M mu / 2``."""
        return np.linalg.inv(self.II - self.II_r) if self.mode == FREE else np.linalg.inv(self.II)

    @property
    def alpha_bar(self) -> np.ndarray:
        return self.II_r @ self.u

    def gradient(self, mu, s=None) -> np.ndarray:
        mu = np.asarray(mu, dtype=float)
        M = self.quad_matrix
        if self.mode == FREE:
            return M @ (mu - self.sigma)
        return M @ mu - M @ self.alpha_bar

    def energy(self, mu) -> float:
        return hamiltonian_free(self, mu) if self.mode == FREE else hamiltonian_controlled(self, mu)


def legendre(II, II_r, omega, theta_dot):
    """Body momentum ``mu = II omega + II_r theta_dot`` and ``sigma = II_r (omega + theta_dot)``."""
    II = _matrix(II, "II")
    II_r = _matrix(II_r, "II_r")
    omega = as_vector(omega, "omega")
    theta_dot = as_vector(theta_dot, "theta_dot")
    return II @ omega + II_r @ theta_dot, II_r @ (omega + theta_dot)


def hamiltonian_free(sys: RotorBodySystem, mu, include_constant: bool = False) -> float:
    if sys.mode != FREE:
        raise ValueError("system is not in free mode")
    d = as_vector(mu) - sys.sigma
    val = 0.5 * float(d @ np.linalg.solve(sys.II - sys.II_r, d))
    if include_constant:
        val += 0.5 * float(sys.sigma @ np.linalg.solve(sys.II_r, sys.sigma))
    return val


def hamiltonian_controlled(sys: RotorBodySystem, mu) -> float:
    if sys.mode != CONTROLLED:
        raise ValueError("system is not in controlled mode")
    mu = as_vector(mu)
    Iinv = np.linalg.inv(sys.II)
    return 0.5 * float(mu @ Iinv @ mu) - float(mu @ Iinv @ sys.alpha_bar)


@dataclass(frozen=True)
class UniversalMap:
    """``H(mu_body) = G_alpha(mu_model) + offset`` with ``mu_model = mu_body[perm]``."""

    model: QuadraticModel
    alpha: np.ndarray
    offset: float
    perm: tuple[int, int, int]

    def to_model(self, mu_body) -> np.ndarray:
        return np.asarray(mu_body, dtype=float)[list(self.perm)]

    def to_body(self, mu_model) -> np.ndarray:
        out = np.zeros(3)
        out[list(self.perm)] = mu_model
        return out


def to_universal(sys: RotorBodySystem) -> UniversalMap:
    """Exact coefficient matching of the rotor energy with ``G_alpha``.

    ``H = sum d_i mu_i^2 / 2 - d_i sigma_i mu_i + const`` gives
    ``a_i = d_i / 2`` and ``alpha_i = -d_i sigma_i``.
    """
    M = sys.quad_matrix
    if np.max(np.abs(M - np.diag(np.diag(M)))) > 1e-14 * np.max(np.abs(M)):
        raise ValueError("inertia must be diagonal in the body frame")
    d = np.diag(M).copy()
    if len(set(np.round(d, 12))) < 3 or len(set(d)) < 3:
        raise DegenerateInertia(f"inverse inertia entries must be distinct, got {d}")
    shift = sys.sigma if sys.mode == FREE else sys.alpha_bar
    alpha = -d * shift
    offset = 0.5 * float(d @ shift**2) if sys.mode == FREE else 0.0
    perm = tuple(int(i) for i in np.argsort(-d, kind="stable"))
    a = d[list(perm)] / 2.0
    try:
        model = QuadraticModel(*a)
    except DegenerateModel as exc:
        raise DegenerateInertia(str(exc)) from exc
    return UniversalMap(model, alpha[list(perm)], offset, perm)


def reduced_system(sys: RotorBodySystem) -> ReducedSystem:
    """The rotor energy as a polynomial :class:`ReducedSystem` in body coordinates."""
    M = sys.quad_matrix
    lin = -(M @ (sys.sigma if sys.mode == FREE else sys.alpha_bar))
    terms = {}
    for i in range(3):
        for j in range(3):
            e = [0, 0, 0]
            e[i] += 1
            e[j] += 1
            terms[tuple(e)] = terms.get(tuple(e), 0.0) + 0.5 * M[i, j]
        e = [0, 0, 0]
        e[i] = 1
        terms[tuple(e)] = terms.get(tuple(e), 0.0) + lin[i]
    if sys.mode == FREE:
        terms[(0, 0, 0)] = 0.5 * float(sys.sigma @ M @ sys.sigma)
    return ReducedSystem.from_polynomial(Polynomial(3, terms), 0, name="rotor")


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


@dataclass
class ReducedTrajectory:
    t: np.ndarray
    mu: np.ndarray
    h: np.ndarray
    j: np.ndarray
    s: Optional[np.ndarray] = None

    @property
    def h_drift(self) -> float:
        return float(np.max(np.abs(self.h - self.h[0])))

    @property
    def j_drift(self) -> float:
        return float(np.max(np.abs(self.j - self.j[0])))

    def rows(self):
        for k in range(len(self.t)):
            yield (self.t[k], *self.mu[k], self.h[k], self.j[k])


def characteristic_period(sys, mu0) -> float:
    """``2 pi / omega`` with ``omega = |grad h(mu0)| + |Hess h| |mu0|``."""
    rsys = sys if isinstance(sys, ReducedSystem) else reduced_system(sys)
    mu0 = as_vector(mu0)
    g = rsys.gradient(mu0)
    Hm = rsys.hessian(mu0)
    w = np.linalg.norm(g[:3]) + np.linalg.norm(Hm, 2) * np.linalg.norm(mu0)
    if rsys.n:
        w = max(w, np.linalg.norm(Hm[3:, 3:], 2))
    return 2 * np.pi / w if w > 0 else np.inf


def _cross(a, b):
    out = np.empty_like(a)
    out[:, 0] = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    out[:, 1] = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    out[:, 2] = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return out


DT_FRACTION = 3e-3


def integrate_reduced(sys, mu0, T: float, dt: Optional[float] = None, s0=None,
                      record_every: int = 1):
    """Classical RK4 for ``mu' = mu x grad_mu H`` and ``s' = J grad_s H``.

    ``sys`` is a :class:`RotorBodySystem` or a :class:`ReducedSystem`.  The
    default step is ``DT_FRACTION`` of :func:`characteristic_period`.  A 2-D
    ``mu0`` of shape ``(N, 3)`` integrates N trajectories in lockstep (with
    the smallest default step among them) and returns a list.
    """
    rsys = sys if isinstance(sys, ReducedSystem) else reduced_system(sys)
    mu0 = np.asarray(mu0, dtype=float)
    batch = mu0.ndim == 2
    M0 = np.atleast_2d(mu0)
    if M0.shape[1] != 3 or not np.all(np.isfinite(M0)):
        raise ValueError("mu0 must be finite with 3 components")
    N = len(M0)
    n = rsys.n
    if s0 is None:
        S0 = np.zeros((N, 2 * n))
    else:
        S0 = np.atleast_2d(np.asarray(s0, dtype=float)).reshape(N, 2 * n)
    if dt is None:
        pers = [characteristic_period(rsys, m) for m in M0]
        per = min(pers)
        dt = DT_FRACTION * per if np.isfinite(per) else T / 1000.0
        dt = min(dt, T)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if T < dt:
        raise ValueError("T must be at least dt")
    steps = int(np.ceil(T / dt - 1e-9))
    dt = T / steps
    Jm = np.zeros((2 * n, 2 * n))
    Jm[:n, n:] = np.eye(n)
    Jm[n:, :n] = -np.eye(n)
    if isinstance(sys, RotorBodySystem):
        Mq = sys.quad_matrix
        shift = Mq @ (sys.sigma if sys.mode == FREE else sys.alpha_bar)

        def grad(Z):
            return Z @ Mq.T - shift
    else:
        grad = rsys.gradient_batch

    def rhs(Z):
        g = grad(Z)
        out = np.empty_like(Z)
        out[:, :3] = _cross(Z[:, :3], g[:, :3])
        if n:
            out[:, 3:] = g[:, 3:] @ Jm.T
        return out

    Z = np.hstack([M0, S0])
    ts, zs = [0.0], [Z.copy()]
    for k in range(1, steps + 1):
        k1 = rhs(Z)
        k2 = rhs(Z + 0.5 * dt * k1)
        k3 = rhs(Z + 0.5 * dt * k2)
        k4 = rhs(Z + dt * k3)
        Z = Z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if k % record_every == 0 or k == steps:
            ts.append(k * dt)
            zs.append(Z.copy())
    A = np.array(zs)  # (T, N, dim)
    t = np.array(ts)
    out = []
    for i in range(N):
        Zi = A[:, i, :]
        mu = Zi[:, :3]
        h = rsys.H_batch(Zi)
        out.append(ReducedTrajectory(t, mu, h, 0.5 * np.einsum("ij,ij->i", mu, mu),
                                     Zi[:, 3:] if n else None))
    return out if batch else out[0]


def growth_rate(traj: ReducedTrajectory, mu_ref, lo: float = 1e-5, hi: float = 1e-2) -> float:
    """Slope of ``log |mu(t) - mu_ref|`` over the window where it lies in ``[lo, hi]``."""
    d = np.linalg.norm(traj.mu - np.asarray(mu_ref), axis=1)
    mask = (d > lo) & (d < hi)
    if mask.sum() < 5:
        raise ValueError("trajectory does not pass through the fitting window")
    first = np.flatnonzero(mask)
    # use the first contiguous run only
    run = first[: np.argmax(np.diff(np.concatenate([first, [first[-1] + 2]])) > 1) + 1]
    slope, _ = np.polyfit(traj.t[run], np.log(d[run]), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# scenario report
# ---------------------------------------------------------------------------


@dataclass
class ScenarioEvent:
    kind: str
    j: float
    mu_model: np.ndarray
    mu_body: np.ndarray
    energy_rank: str
    before: str
    after: str

    def to_dict(self):
        return {
            "kind": self.kind,
            "j": self.j,
            "mu_model": [float(v) for v in self.mu_model],
            "mu_body": [float(v) for v in self.mu_body],
            "energy_rank": self.energy_rank,
            "stability_before": self.before,
            "stability_after": self.after,
        }


@dataclass
class ScenarioReport:
    mapping: UniversalMap
    stratum: str
    events: list[ScenarioEvent]
    sweep: list[dict]
    simultaneous: bool

    def first(self) -> ScenarioEvent:
        return self.events[0]

    def to_dict(self):
        return {
            "model": [self.mapping.model.a, self.mapping.model.b, self.mapping.model.c],
            "alpha": [float(v) for v in self.mapping.alpha],
            "offset": self.mapping.offset,
            "axis_permutation": list(self.mapping.perm),
            "stratum": self.stratum,
            "events": [e.to_dict() for e in self.events],
            "sweep": self.sweep,
            "simultaneous_pitchforks": self.simultaneous,
        }


def _label(rsys, mu):
    try:
        return classify(rsys, mu).label
    except AtBifurcation:
        return AT_BIFURCATION


def _wrap_partner(model, alpha, mu):
    """Point on the branch through 0 at the same ``j`` but on the other side of 0."""
    j0 = 0.5 * float(mu @ mu)
    side = np.sign(mu @ alpha)
    cands = [p for p in re_on_sphere(model, alpha, j0)
             if _on_wrap(model, alpha, p) and np.sign(p @ alpha) == -side]
    if not cands:
        return None
    return min(cands, key=lambda p: np.linalg.norm(p + mu))


def _on_wrap(model, alpha, p, tol=1e-12):
    """True if ``p`` lies on the multiplier curve outside the bounded pole gaps."""
    scale = tol * (1.0 + np.linalg.norm(p))
    if np.any(np.abs(p[alpha == 0]) > scale):
        return False
    lam = float((2 * model.coeffs * p + alpha) @ p / (p @ p))
    poles = model.poles[alpha != 0]
    return lam > poles.max() - tol or lam < poles.min() + tol


def scenario_report(sys: RotorBodySystem, j_max: float, n_sweep: int = 200,
                    rel_step: float = 1e-3) -> ScenarioReport:
    """Bifurcation storyline of the rotor system for ``0 < j <= j_max``.

    Events are pitchforks on the discriminant and saddle-centres otherwise,
    sorted by ``j``.  For pitchforks on the branch through the origin the
    report states whether the bifurcating RE is the lower- or higher-energy
    member of the pair sharing its momentum sphere, together with its class
    just before and after the event.
    """
    mp = to_universal(sys)
    model, alpha = mp.model, mp.alpha
    st = classify_stratum(alpha)
    rsys = ReducedSystem.from_family(model, alpha)
    events: list[ScenarioEvent] = []
    if st.tag == GENERIC:
        for sc in saddle_centre_points(model, alpha):
            if sc.j > j_max:
                continue
            after = re_on_sphere(model, alpha, sc.j * (1 + rel_step))
            near = sorted(after, key=lambda p: np.linalg.norm(p - sc.mu))[:2]
            labels = "/".join(sorted(_label(rsys, p) for p in near))
            events.append(ScenarioEvent("saddle_centre", sc.j, sc.mu, mp.to_body(sc.mu), "n/a", "absent", labels))
    elif st.tag != DELTA0:
        for pf in pitchfork_points(model, alpha):
            mu = pf.mu
            jv = 0.5 * float(mu @ mu)
            if jv > j_max:
                continue
            rank = "n/a"
            on_wrap = _on_wrap(model, alpha, mu) if np.any(mu) else False
            if on_wrap:
                partner = _wrap_partner(model, alpha, mu)
                if partner is not None:
                    rank = "lower" if g_value(model, alpha, mu) < g_value(model, alpha, partner) else "higher"
            before = _label(rsys, _slide(model, alpha, mu, 1 - rel_step))
            after = _label(rsys, _slide(model, alpha, mu, 1 + rel_step))
            events.append(ScenarioEvent("pitchfork", jv, mu, mp.to_body(mu), rank, before, after))
    events.sort(key=lambda e: e.j)
    sweep = []
    for jv in np.linspace(j_max / n_sweep, j_max, n_sweep):
        pts = re_on_sphere(model, alpha, jv)
        labels = [_label(rsys, p) for p in pts]
        counts = {k: labels.count(k) for k in sorted(set(labels))}
        sweep.append({"j": float(jv), "count": len(pts), "classes": counts})
    pf = [e for e in events if e.kind == "pitchfork"]
    simultaneous = len(pf) >= 2 and abs(pf[0].j - pf[1].j) <= 1e-10 * max(1.0, pf[0].j)
    return ScenarioReport(mp, st.tag, events, sweep, simultaneous)


def _slide(model, alpha, mu, factor):
    """RE on the branch through the origin near ``mu`` with ``|mu|`` scaled by ``factor``."""
    j0 = 0.5 * float(mu @ mu) * factor**2
    pts = re_on_sphere(model, alpha, j0)
    return min(pts, key=lambda p: np.linalg.norm(p - mu * factor))
