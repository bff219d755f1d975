"""Linear stability of relative equilibria of the reduced flow.

The reduced equations on ``so(3)* x R^{2n}`` are ``mu' = mu x grad_mu H`` and
``s' = J grad_s H`` with ``J = [[0, I], [-I, 0]]`` for ``s = (q, p)``.  At a
relative equilibrium with ``mu != 0`` the linearization is restricted to the
tangent plane of the momentum sphere plus the shape space.

Classification order:

* projected Hessian of ``H - lam j`` definite  -> ``LyapunovStable``
  (energy-Casimir / Dirichlet test);
* an eigenvalue with real part above ``spec_tol`` -> ``LinearlyUnstable``;
* pure imaginary and semisimple -> ``Elliptic`` (``LyapunovStable`` when
  ``n = 0``: on a 2-sphere an elliptic point is a centre of a conserved
  energy);
* otherwise ``SpectrallyStableDegenerate``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AtBifurcation, ReleqError
from .reduction import ReducedSystem, solve_slice
from .so3 import as_vector, hat, sphere_tangent_frame


class StabilityClass(str, enum.Enum):
    LYAPUNOV = "LyapunovStable"
    ELLIPTIC = "Elliptic"
    STRONGLY_LINEARLY_STABLE = "StronglyLinearlyStable"
    DEGENERATE = "SpectrallyStableDegenerate"
    UNSTABLE = "LinearlyUnstable"

    def __str__(self):
        return self.value


AT_BIFURCATION = "at_bifurcation"

COLORS = {
    StabilityClass.LYAPUNOV.value: "red",
    StabilityClass.ELLIPTIC.value: "green",
    StabilityClass.UNSTABLE.value: "brown",
    StabilityClass.DEGENERATE.value: "grey",
    StabilityClass.STRONGLY_LINEARLY_STABLE.value: "green",
    AT_BIFURCATION: "black",
}


def symplectic_J(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


@dataclass
class Linearization:
    """Linearized reduced flow at a relative equilibrium.

    For ``mu != 0``, ``L`` acts on (sphere tangent basis ``frame``) + shape and
    ``K`` is the projected Hessian of ``H - lam j`` in the same basis.  At
    ``mu = 0``, ``L`` is the full ``(3 + 2n)`` block matrix
    ``[[-hat(xi), 0], [J H_smu, J H_ss]]`` and ``K`` is ``H_ss``.
    """

    mu: np.ndarray
    s: np.ndarray
    L: np.ndarray
    K: np.ndarray
    lam: float
    xi: np.ndarray
    zero_momentum: bool
    frame: Optional[tuple] = None
    rotation_spectrum: Optional[np.ndarray] = None
    shape_spectrum: Optional[np.ndarray] = None

    @property
    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvals(self.L) if self.L.size else np.zeros(0, complex)

    @property
    def n(self) -> int:
        return len(self.s) // 2


@dataclass
class StabilityResult:
    cls: StabilityClass
    spectrum: np.ndarray
    hessian_eigs: np.ndarray
    zero_momentum: bool = False
    krein_signs: list = field(default_factory=list)
    note: str = ""

    @property
    def label(self) -> str:
        return self.cls.value


def linearize_at(sys: ReducedSystem, mu, s=None) -> Linearization:
    """Linearization of the reduced flow at the relative equilibrium ``(mu, s)``.

    ``s`` defaults to the slice critical point ``s(mu)``.
    """
    mu = as_vector(mu)
    if s is None:
        s = solve_slice(sys, mu).s
    s = np.asarray(s, dtype=float)
    n = sys.n
    g = sys.gradient(mu, s)
    xi = g[:3]
    Hm = sys.hessian(mu, s)
    Hmm, Hms, Hss = Hm[:3, :3], Hm[:3, 3:], Hm[3:, 3:]
    J = symplectic_J(n)
    r2 = float(mu @ mu)
    if r2 == 0.0:
        rot = -hat(xi)
        L = np.zeros((3 + 2 * n, 3 + 2 * n))
        L[:3, :3] = rot
        if n:
            L[3:, :3] = J @ Hms.T
            L[3:, 3:] = J @ Hss
        rspec = np.linalg.eigvals(rot)
        sspec = np.linalg.eigvals(J @ Hss) if n else np.zeros(0, complex)
        return Linearization(mu, s, L, Hss.copy(), float("nan"), xi, True,
                             rotation_spectrum=rspec, shape_spectrum=sspec)
    lam = float(xi @ mu / r2)
    e1, e2 = sphere_tangent_frame(mu)
    P = np.zeros((3 + 2 * n, 2 + 2 * n))
    P[:3, 0], P[:3, 1] = e1, e2
    P[3:, 2:] = np.eye(2 * n)
    Lfull = np.zeros((3 + 2 * n, 3 + 2 * n))
    Lfull[:3, :3] = -hat(xi) + hat(mu) @ Hmm
    if n:
        Lfull[:3, 3:] = hat(mu) @ Hms
        Lfull[3:, :3] = J @ Hms.T
        Lfull[3:, 3:] = J @ Hss
    L = P.T @ Lfull @ P
    A = Hm.copy()
    A[:3, :3] -= lam * np.eye(3)
    K = P.T @ A @ P
    return Linearization(mu, s, L, 0.5 * (K + K.T), lam, xi, False, frame=(e1, e2))


def spec_tol_for(L: np.ndarray) -> float:
    return 1e-8 * (1.0 + (np.linalg.norm(L, 2) if L.size else 0.0))


def _semisimple(L, eigs, tol):
    """Geometric multiplicity equals algebraic multiplicity for every cluster."""
    scale = 1.0 + np.linalg.norm(L, 2)
    cluster_tol = 1e-6 * scale
    used = np.zeros(len(eigs), bool)
    for i, ev in enumerate(eigs):
        if used[i]:
            continue
        group = np.abs(eigs - ev) < cluster_tol
        used |= group
        m = int(group.sum())
        if m == 1:
            continue
        centre = eigs[group].mean()
        sv = np.linalg.svd(L - centre * np.eye(len(L)), compute_uv=False)
        geo = int(np.sum(sv < 1e-5 * scale))
        if geo < m:
            return False
    return True


def krein_signs(L: np.ndarray, K: np.ndarray, tol: float) -> list[tuple[float, int]]:
    """Sign of ``v* K v`` for eigenvectors of the eigenvalues ``i omega``, ``omega > 0``.

    Informational only.
    """
    if not L.size:
        return []
    w, V = np.linalg.eig(L)
    out = []
    for k, ev in enumerate(w):
        if abs(ev.real) <= tol and ev.imag > tol:
            v = V[:, k]
            q = float(np.real(np.conj(v) @ K @ v))
            out.append((float(ev.imag), int(np.sign(q))))
    out.sort()
    return out


def classify_matrix(L: np.ndarray, K: Optional[np.ndarray] = None, spec_tol: Optional[float] = None) -> StabilityClass:
    """Spectral class of a standalone Hamiltonian matrix.

    Pure imaginary, semisimple spectrum with simple eigenvalues (or with a
    definite ``K``) is ``StronglyLinearlyStable``, since every nearby
    Hamiltonian matrix keeps it.  Other pure imaginary semisimple spectra are
    ``Elliptic``.
    """
    L = np.asarray(L, dtype=float)
    if not L.size:
        return StabilityClass.STRONGLY_LINEARLY_STABLE
    tol = spec_tol_for(L) if spec_tol is None else spec_tol
    eigs = np.linalg.eigvals(L)
    if np.max(np.abs(eigs.real)) > tol:
        return StabilityClass.UNSTABLE
    if not _semisimple(L, eigs, tol):
        return StabilityClass.DEGENERATE
    if K is not None:
        ke = np.linalg.eigvalsh(0.5 * (K + K.T))
        if np.all(ke > tol) or np.all(ke < -tol):
            return StabilityClass.STRONGLY_LINEARLY_STABLE
    d = np.abs(eigs[:, None] - eigs[None, :])
    np.fill_diagonal(d, np.inf)
    if np.all(np.abs(eigs) > 1e-6 * (1 + np.linalg.norm(L, 2))) and d.min() > 1e-6 * (1 + np.linalg.norm(L, 2)):
        return StabilityClass.STRONGLY_LINEARLY_STABLE
    return StabilityClass.ELLIPTIC


def classify(sys: ReducedSystem, mu, s=None, hessian_tol: float = 1e-9,
             spec_tol: Optional[float] = None) -> StabilityResult:
    """Stability class of the relative equilibrium at ``mu``.

    Raises :class:`AtBifurcation` when the projected Hessian has an
    eigenvalue within ``hessian_tol * (1 + |K|)`` of zero.
    """
    lin = linearize_at(sys, mu, s)
    if lin.zero_momentum:
        return _classify_zero(lin, spec_tol)
    K = lin.K
    ke = np.linalg.eigvalsh(K)
    scale = 1.0 + np.max(np.abs(ke))
    spectrum = lin.spectrum
    if np.min(np.abs(ke)) < hessian_tol * scale:
        raise AtBifurcation(f"degenerate projected Hessian at mu={lin.mu} (eigenvalues {ke})")
    tol = spec_tol_for(lin.L) if spec_tol is None else spec_tol
    ks = krein_signs(lin.L, K, tol)
    if np.all(ke > 0) or np.all(ke < 0):
        return StabilityResult(StabilityClass.LYAPUNOV, spectrum, ke, krein_signs=ks)
    if np.max(np.abs(spectrum.real)) > tol:
        return StabilityResult(StabilityClass.UNSTABLE, spectrum, ke, krein_signs=ks)
    if _semisimple(lin.L, spectrum, tol):
        if sys.n == 0:
            return StabilityResult(StabilityClass.LYAPUNOV, spectrum, ke, krein_signs=ks,
                                   note="elliptic point on a 2-sphere")
        return StabilityResult(StabilityClass.ELLIPTIC, spectrum, ke, krein_signs=ks)
    return StabilityResult(StabilityClass.DEGENERATE, spectrum, ke, krein_signs=ks)


def _classify_zero(lin: Linearization, spec_tol):
    """Zero momentum: the momentum sphere is a point, only the shape block matters."""
    n = lin.n
    K = lin.K
    spectrum = lin.spectrum
    if n == 0:
        return StabilityResult(StabilityClass.LYAPUNOV, spectrum, np.zeros(0), zero_momentum=True,
                               note="reduced space is a point")
    ke = np.linalg.eigvalsh(K)
    J = symplectic_J(n)
    L0 = J @ K
    tol = spec_tol_for(L0) if spec_tol is None else spec_tol
    if np.all(ke > tol) or np.all(ke < -tol):
        return StabilityResult(StabilityClass.LYAPUNOV, spectrum, ke, zero_momentum=True,
                               note="definite shape block")
    shape_cls = classify_matrix(L0, spec_tol=tol)
    if shape_cls == StabilityClass.STRONGLY_LINEARLY_STABLE:
        shape_cls = StabilityClass.ELLIPTIC
    return StabilityResult(shape_cls, spectrum, ke, zero_momentum=True, note="shape block class")


def resonance_check(sys: ReducedSystem, mu=None, s=None, resonance_tol: float = 1e-8) -> bool:
    """Rotation-vibration resonance at the zero-momentum RE.

    True iff an eigenvalue of ``J H_ss`` lies within ``resonance_tol`` of
    ``+-i |xi|`` with ``xi = grad_mu H`` at ``mu = 0``.
    """
    if sys.n == 0:
        return False
    mu = np.zeros(3) if mu is None else as_vector(mu)
    lin = linearize_at(sys, mu, s)
    w = np.linalg.norm(lin.xi)
    if w == 0:
        return False
    shape = lin.shape_spectrum if lin.shape_spectrum is not None else np.zeros(0)
    targets = np.array([1j * w, -1j * w])
    d = np.abs(shape[:, None] - targets[None, :])
    return bool(d.size and d.min() < resonance_tol)


def classify_branch(sys: ReducedSystem, branch, **kw):
    """Attach per-sample stability labels to ``branch`` (in place) and return it.

    Samples at a degenerate projected Hessian are labelled ``at_bifurcation``;
    other numerical failures are labelled ``error``.
    """
    labels = []
    shapes = []
    s_prev = None
    for mu in branch.mu:
        try:
            sp = solve_slice(sys, mu, s_prev)
        except (ReleqError, np.linalg.LinAlgError):
            labels.append("error")
            shapes.append(np.full(2 * sys.n, np.nan))
            continue
        s_prev = sp.s
        shapes.append(sp.s)
        try:
            labels.append(classify(sys, mu, sp.s, **kw).label)
        except AtBifurcation:
            labels.append(AT_BIFURCATION)
        except (ReleqError, np.linalg.LinAlgError):
            labels.append("error")
    branch.stability = labels
    if sys.n:
        branch.shape = np.array(shapes)
    return branch


def transitions(labels: list[str]) -> list[tuple[int, int]]:
    """Index pairs of adjacent samples whose labels differ."""
    return [(k, k + 1) for k in range(len(labels) - 1) if labels[k] != labels[k + 1]]
