"""Reduction of an invariant Hamiltonian ``H(mu, s)`` to ``h(mu)`` and its RE set.

The shape variable ``s`` lives in ``R^{2n}``.  The slice critical point
``s(mu)`` solves ``grad_s H(mu, s) = 0`` and ``h(mu) = H(mu, s(mu))``.  By the
envelope identity ``grad h = grad_mu H`` at ``s(mu)`` and the Hessian of ``h``
is the Schur complement ``H_mumu - H_mus H_ss^{-1} H_smu``.

Relative equilibria of ``h`` are the zeros of ``F(mu) = grad h(mu) x mu``;
:func:`re_set_general` traces them by pseudo-arclength continuation.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import NoConvergence, SingularHessian
from .polynomial import CompiledPolynomial, Polynomial
from .so3 import as_vector, hat
from .universal import Marker, QuadraticModel, REBranch

log = logging.getLogger(__name__)

FD_STEP = np.cbrt(np.finfo(float).eps)


def _fd_gradient(f, x):
    g = np.zeros_like(x)
    for i in range(len(x)):
        h = FD_STEP * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _fd_jacobian(g, x):
    n = len(x)
    J = np.zeros((len(g(x)), n))
    for i in range(n):
        h = FD_STEP * (1.0 + abs(x[i]))
        e = np.zeros(n)
        e[i] = h
        J[:, i] = (g(x + e) - g(x - e)) / (2 * h)
    return J


class ReducedSystem:
    """Invariant Hamiltonian on ``so(3)* x R^{2n}`` with derivative access.

    ``H``, ``gradient`` and ``hessian`` take the stacked vector
    ``z = (mu, s)`` of length ``3 + 2n``.  Missing derivatives fall back to
    central differences with step ``cbrt(eps) * (1 + |z_i|)``; the gradient
    fallback is accurate to about 1e-10 and the Hessian fallback to about 1e-5.
    """

    def __init__(self, n: int, H: Callable, gradient: Optional[Callable] = None,
                 hessian: Optional[Callable] = None, name: str = ""):
        if n < 0:
            raise ValueError("shape dimension n must be >= 0")
        self.n = int(n)
        self.dim = 3 + 2 * self.n
        self._H = H
        self._grad = gradient
        self._hess = hessian
        self.name = name
        self.polynomial: Optional[Polynomial] = None
        self.compiled: Optional[CompiledPolynomial] = None

    def gradient_batch(self, Z) -> np.ndarray:
        """Gradients at the rows of ``Z`` (shape ``(N, 3 + 2n)``)."""
        Z = np.asarray(Z, dtype=float)
        if self.compiled is not None:
            return self.compiled.gradient_batch(Z)
        return np.array([self.gradient(z[:3], z[3:]) for z in Z])

    def H_batch(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        if self.compiled is not None:
            return self.compiled.value_batch(Z)
        return np.array([self.H(z[:3], z[3:]) for z in Z])

    # constructors
    @classmethod
    def from_polynomial(cls, poly: Polynomial, n: Optional[int] = None, name: str = "polynomial"):
        if n is None:
            if (poly.nvars - 3) % 2:
                raise ValueError("polynomial must have 3 + 2n variables")
            n = (poly.nvars - 3) // 2
        if poly.nvars != 3 + 2 * n:
            raise ValueError(f"polynomial has {poly.nvars} variables, expected {3 + 2 * n}")
        cp = CompiledPolynomial(poly)
        sys = cls(n, cp.value, cp.gradient, cp.hessian, name=name)
        sys.polynomial = poly
        sys.compiled = cp
        return sys

    @classmethod
    def from_family(cls, model: QuadraticModel, alpha, shape: Optional[Polynomial] = None,
                    extra: Optional[Polynomial] = None):
        """``G_alpha(mu)`` plus an optional shape polynomial in ``(mu, s)``.

        ``shape`` and ``extra`` must use ``3 + 2n`` variables (mu first).
        """
        alpha = as_vector(alpha, "alpha")
        nv = 3 if shape is None else shape.nvars
        terms = {}
        for i, (c, a) in enumerate(zip(model.coeffs, alpha)):
            e2 = [0] * nv
            e2[i] = 2
            terms[tuple(e2)] = c
            e1 = [0] * nv
            e1[i] = 1
            terms[tuple(e1)] = a
        poly = Polynomial(nv, terms)
        if shape is not None:
            poly = poly + shape
        if extra is not None:
            poly = poly + extra
        return cls.from_polynomial(poly, name="family")

    @classmethod
    def from_json(cls, source):
        """Build from ``{"n": n, "terms": [{"coef": c, "powers": [...]}, ...]}``.

        ``source`` may be a dict, a JSON string or a path.  The alternative
        form ``{"abc": [a, b, c], "alpha": [...]}`` gives the universal family.
        """
        if isinstance(source, (str, Path)) and Path(source).exists():
            data = json.loads(Path(source).read_text())
        elif isinstance(source, str):
            data = json.loads(source)
        else:
            data = dict(source)
        if "abc" in data:
            model = QuadraticModel(*[float(v) for v in data["abc"]])
            return cls.from_family(model, data.get("alpha", [0.0, 0.0, 0.0]))
        if "n" not in data or "terms" not in data:
            raise ValueError("system JSON needs 'n' and 'terms' (or 'abc')")
        n = int(data["n"])
        poly = Polynomial.from_list(3 + 2 * n, data["terms"])
        return cls.from_polynomial(poly, n, name=data.get("name", "polynomial"))

    # evaluators
    def H(self, mu, s=None) -> float:
        return float(self._H(self._stack(mu, s)))

    def _stack(self, mu, s):
        mu = np.asarray(mu, dtype=float)
        s = np.zeros(2 * self.n) if s is None else np.asarray(s, dtype=float)
        if s.shape != (2 * self.n,):
            raise ValueError(f"s must have {2 * self.n} components")
        return np.concatenate([mu, s])

    def gradient(self, mu, s=None) -> np.ndarray:
        z = self._stack(mu, s)
        if self._grad is not None:
            return np.asarray(self._grad(z), dtype=float)
        return _fd_gradient(self._H, z)

    def hessian(self, mu, s=None) -> np.ndarray:
        z = self._stack(mu, s)
        if self._hess is not None:
            return np.asarray(self._hess(z), dtype=float)
        if self._grad is not None:
            Hm = _fd_jacobian(lambda v: np.asarray(self._grad(v), dtype=float), z)
        else:
            Hm = _fd_jacobian(lambda v: _fd_gradient(self._H, v), z)
        return 0.5 * (Hm + Hm.T)

    def blocks(self, mu, s=None):
        """Return ``(H_mumu, H_mus, H_ss)``."""
        Hm = self.hessian(mu, s)
        return Hm[:3, :3], Hm[:3, 3:], Hm[3:, 3:]


@dataclass
class SlicePoint:
    mu: np.ndarray
    s: np.ndarray
    residual: float
    iterations: int = 0


def solve_slice(sys: ReducedSystem, mu, s_guess=None, tol: Optional[float] = None,
                max_iter: int = 50) -> SlicePoint:
    """Solve ``grad_s H(mu, s) = 0`` by damped Newton from ``s_guess``."""
    mu = as_vector(mu)
    if sys.n == 0:
        return SlicePoint(mu, np.zeros(0), 0.0, 0)
    s = np.zeros(2 * sys.n) if s_guess is None else np.array(s_guess, dtype=float)
    for it in range(max_iter + 1):
        g = sys.gradient(mu, s)[3:]
        Hss = sys.hessian(mu, s)[3:, 3:]
        scale = 1.0 + np.linalg.norm(Hss, 2) * (1.0 + np.linalg.norm(s))
        thr = 1e-12 * scale if tol is None else tol
        r = np.linalg.norm(g)
        if r < thr:
            return SlicePoint(mu, s, float(r), it)
        if it == max_iter:
            break
        if np.linalg.cond(Hss) > 1e12:
            raise SingularHessian(f"shape Hessian is singular at mu={mu}")
        step = np.linalg.solve(Hss, -g)
        t = 1.0
        for _ in range(30):
            s_new = s + t * step
            if np.linalg.norm(sys.gradient(mu, s_new)[3:]) < r:
                break
            t *= 0.5
        else:
            s_new = s + step
        if np.allclose(s_new, s, rtol=0, atol=1e-17):
            break
        s = s_new
    raise NoConvergence(f"slice Newton failed at mu={mu}: residual {r:.3e}")


class Reduced:
    """Reduced function ``h`` of a system, warm-starting the slice solve."""

    def __init__(self, sys: ReducedSystem):
        self.sys = sys
        self._s = np.zeros(2 * sys.n)

    def slice(self, mu) -> SlicePoint:
        sp = solve_slice(self.sys, mu, self._s)
        self._s = sp.s
        return sp

    def value(self, mu) -> float:
        sp = self.slice(mu)
        return self.sys.H(sp.mu, sp.s)

    def gradient(self, mu) -> np.ndarray:
        sp = self.slice(mu)
        return self.sys.gradient(sp.mu, sp.s)[:3]

    def hessian(self, mu) -> np.ndarray:
        sp = self.slice(mu)
        Hmm, Hms, Hss = self.sys.blocks(sp.mu, sp.s)
        if self.sys.n == 0:
            return Hmm
        return Hmm - Hms @ np.linalg.solve(Hss, Hms.T)


def reduced_h(sys: ReducedSystem, mu, s_guess=None) -> float:
    sp = solve_slice(sys, mu, s_guess)
    return sys.H(sp.mu, sp.s)


def reduced_gradient(sys: ReducedSystem, mu, s_guess=None) -> np.ndarray:
    sp = solve_slice(sys, mu, s_guess)
    return sys.gradient(sp.mu, sp.s)[:3]


def reduced_hessian(sys: ReducedSystem, mu, s_guess=None) -> np.ndarray:
    r = Reduced(sys)
    if s_guess is not None:
        r._s = np.asarray(s_guess, dtype=float)
    return r.hessian(mu)


def re_residual(sys_or_reduced, mu) -> float:
    """``|grad h(mu) x mu|``."""
    red = sys_or_reduced if isinstance(sys_or_reduced, Reduced) else Reduced(sys_or_reduced)
    return float(np.linalg.norm(np.cross(red.gradient(mu), mu)))


def multiplier(sys_or_reduced, mu) -> float:
    """Least-squares ``lam`` with ``grad h = lam * mu`` (nan at ``mu = 0``)."""
    red = sys_or_reduced if isinstance(sys_or_reduced, Reduced) else Reduced(sys_or_reduced)
    mu = as_vector(mu)
    m2 = mu @ mu
    if m2 == 0:
        return float("nan")
    return float(red.gradient(mu) @ mu / m2)


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------


@dataclass
class ContinuationOptions:
    initial_step: float = 1e-2   # times window radius
    max_step: float = 1e-2       # times window radius
    min_step: float = 1e-8       # times window radius
    easy_steps: int = 4
    max_points: int = 20000
    n_seed_starts: int = 200
    corrector_iter: int = 12
    re_tol: Optional[float] = None


@dataclass
class _Trace:
    mu: list = field(default_factory=list)
    tangent: list = field(default_factory=list)
    markers: list = field(default_factory=list)
    exited: bool = False
    end_seed: Optional[int] = None


class _Continuation:
    def __init__(self, sys: ReducedSystem, R: float, opts: ContinuationOptions):
        self.red = Reduced(sys)
        self.R = R
        self.opts = opts

    # residual and Jacobian of F = grad h x mu
    def F(self, mu):
        return np.cross(self.red.gradient(mu), mu)

    def DF(self, mu):
        g = self.red.gradient(mu)
        Hh = self.red.hessian(mu)
        return -hat(mu) @ Hh + hat(g)

    def tol(self, mu):
        if self.opts.re_tol is not None:
            return self.opts.re_tol
        g = self.red.gradient(mu)
        return 1e-10 * (1 + np.linalg.norm(mu)) * (1 + np.linalg.norm(g))

    def tangent(self, mu, prev=None):
        _, _, vt = np.linalg.svd(self.DF(mu))
        v = vt[-1]
        if prev is not None and v @ prev < 0:
            v = -v
        return v

    def correct(self, mu0, row, target, polish=1):
        """Gauss-Newton on ``F = 0`` with one extra equation ``row . mu = target``.

        ``polish`` extra iterations are taken after convergence: one by default,
        more near singular points where a small residual still allows a large error.
        """
        mu = mu0.copy()
        for it in range(self.opts.corrector_iter):
            F = self.F(mu)
            extra = row @ mu - target
            if np.linalg.norm(F) < self.tol(mu) and abs(extra) < 1e-13 * (1 + self.R):
                for _ in range(polish):
                    A = np.vstack([self.DF(mu), row])
                    d, *_ = np.linalg.lstsq(A, -np.concatenate([self.F(mu), [row @ mu - target]]), rcond=None)
                    if not np.all(np.isfinite(d)):
                        break
                    mu = mu + d
                return mu, it
            A = np.vstack([self.DF(mu), row])
            rhs = -np.concatenate([F, [extra]])
            d, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            mu = mu + d
            if not np.all(np.isfinite(mu)):
                return None, it
        if np.linalg.norm(self.F(mu)) < self.tol(mu):
            return mu, self.opts.corrector_iter
        return None, self.opts.corrector_iter

    def correct_on_sphere(self, mu0, v):
        """Project onto ``F = 0`` and ``|mu| = R`` starting near ``mu0``."""
        mu = mu0.copy()
        for _ in range(30):
            F = self.F(mu)
            extra = 0.5 * (mu @ mu - self.R**2)
            if np.linalg.norm(F) < self.tol(mu) and abs(extra) < 1e-14 * self.R**2:
                return mu
            A = np.vstack([self.DF(mu), mu])
            d, *_ = np.linalg.lstsq(A, -np.concatenate([F, [extra]]), rcond=None)
            mu = mu + d
        return mu

    def bordered_det(self, mu, v, pair):
        J = self.DF(mu)[list(pair)]
        return float(np.linalg.det(np.vstack([J, v])))

    def best_pair(self, mu):
        # on the curve mu^T DF = 0, so the row of the largest |mu_i| is redundant
        if np.linalg.norm(mu) > 1e-8 * self.R:
            drop = int(np.argmax(np.abs(mu)))
            return tuple(k for k in range(3) if k != drop)
        J = self.DF(mu)
        best, val = (0, 1), -1.0
        for pair in ((0, 1), (0, 2), (1, 2)):
            s = np.linalg.svd(J[list(pair)], compute_uv=False)[-1]
            if s > val:
                best, val = pair, s
        return best

    # seeds: critical points of h on the sphere |mu| = R
    def seeds(self):
        n = self.opts.n_seed_starts
        k = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * k / n)
        theta = np.pi * (1 + 5**0.5) * k
        starts = self.R * np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], 1)
        found: list[np.ndarray] = []
        for p in starts:
            mu = p.copy()
            lam = self.red.gradient(mu) @ mu / self.R**2
            ok = False
            for _ in range(60):
                g = self.red.gradient(mu)
                r = np.concatenate([g - lam * mu, [0.5 * (mu @ mu - self.R**2)]])
                if np.linalg.norm(r[:3]) < 1e-13 * (1 + np.linalg.norm(g)) and abs(r[3]) < 1e-14 * self.R**2:
                    ok = True
                    break
                Hh = self.red.hessian(mu)
                A = np.zeros((4, 4))
                A[:3, :3] = Hh - lam * np.eye(3)
                A[:3, 3] = -mu
                A[3, :3] = mu
                try:
                    d = np.linalg.solve(A, -r)
                except np.linalg.LinAlgError:
                    break
                mu = mu + d[:3]
                lam = lam + d[3]
            if not ok:
                continue
            mu = self.correct_on_sphere(mu, None)
            if np.linalg.norm(self.F(mu)) >= self.tol(mu):
                continue
            if not any(np.linalg.norm(mu - q) < 1e-6 * self.R for q in found):
                found.append(mu)
        found.sort(key=lambda m: tuple(np.round(m / self.R, 9)))
        return found

    def trace(self, mu0, v0, seeds, consumed, stop_near=None):
        """Follow the curve from ``mu0`` in direction ``v0`` until it leaves the ball."""
        o = self.opts
        R = self.R
        out = _Trace()
        mu = mu0
        v = self.tangent(mu, v0)
        out.mu.append(mu)
        out.tangent.append(v)
        step = o.initial_step * R
        easy = 0
        while len(out.mu) < o.max_points:
            pair = self.best_pair(mu)
            det0 = self.bordered_det(mu, v, pair)
            pred = mu + step * v
            new, its = self.correct(pred, v, v @ pred)
            if new is not None:
                dist = np.linalg.norm(new - mu)
                if dist > 2.0 * step or (new - mu) @ v <= 0:
                    new = None
            if new is None:
                step *= 0.5
                easy = 0
                if step < o.min_step * R:
                    raise NoConvergence(f"continuation step underflow near mu={mu}")
                continue
            v_new = self.tangent(new, v)
            if np.linalg.norm(new) > R:
                end = self.correct_on_sphere(mu + (new - mu) * self._exit_fraction(mu, new), v)
                out.mu.append(end)
                out.tangent.append(self.tangent(end, v))
                out.exited = True
                idx = self._match_seed(end, seeds)
                if idx is not None:
                    consumed.add(idx)
                    out.end_seed = idx
                return out
            det1 = self.bordered_det(new, v_new, pair)
            if det0 * det1 < 0:
                mk = self._refine_bifurcation(mu, new, v, pair)
                if mk is not None:
                    out.markers.append((len(out.mu), mk))
            mu, v = new, v_new
            out.mu.append(mu)
            out.tangent.append(v)
            if stop_near is not None and np.linalg.norm(mu - stop_near) < 0.5 * step:
                return out
            if its <= 3:
                easy += 1
                if easy >= o.easy_steps:
                    step = min(2 * step, o.max_step * R)
                    easy = 0
            else:
                easy = 0
        raise NoConvergence("continuation exceeded max_points")

    def _exit_fraction(self, a, b):
        # fraction s in [0,1] where |a + s(b-a)| = R
        d = b - a
        A, B, C = d @ d, 2 * a @ d, a @ a - self.R**2
        disc = max(B * B - 4 * A * C, 0.0)
        return float((-B + np.sqrt(disc)) / (2 * A))

    def _match_seed(self, mu, seeds):
        if not seeds:
            return None
        d = [np.linalg.norm(mu - s) for s in seeds]
        k = int(np.argmin(d))
        return k if d[k] < 1e-5 * self.R else None

    def _refine_bifurcation(self, a, b, v, pair):
        """Bisect the bordered determinant between two accepted points."""
        lo, hi = a, b
        dlo = self.bordered_det(lo, v, pair)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            vm = self.tangent(mid, v)
            mid, _ = self.correct(mid, vm, vm @ mid, polish=3)
            if mid is None:
                return None
            dm = self.bordered_det(mid, self.tangent(mid, v), pair)
            if dm == 0:
                lo = hi = mid
                break
            if dm * dlo < 0:
                hi = mid
            else:
                lo, dlo = mid, dm
            if np.linalg.norm(hi - lo) < 1e-14 * (1 + self.R):
                break
        p = 0.5 * (lo + hi)
        s = np.linalg.svd(self.DF(p), compute_uv=False)
        rank_drop = s[1] <= 1e-6 * max(s[0], 1e-300)
        return {"mu": p, "rank_drop": bool(rank_drop), "singular_values": s}


def re_set_general(sys: ReducedSystem, window: float, options: Optional[ContinuationOptions] = None,
                   branch_switch: bool = True) -> list[REBranch]:
    """Relative equilibria of the reduced ``h`` inside ``|mu| <= window``.

    Branches are traced between their exit points on the window sphere
    (critical points of ``h`` there).  A degenerate critical origin
    (``grad h(0) = 0``) is resolved by starting along the eigenvectors of
    the Hessian of ``h``.  Sign changes of the bordered determinant are
    refined and recorded as ``bifurcation`` markers; with ``branch_switch``
    the crossing branch is traced along the second kernel direction.
    """
    if not window > 0:
        raise ValueError("window must be positive")
    opts = options or ContinuationOptions()
    C = _Continuation(sys, float(window), opts)
    R = float(window)
    seeds = C.seeds()
    consumed: set[int] = set()
    traces: list[list[_Trace]] = []

    g0 = C.red.gradient(np.zeros(3))
    H0 = C.red.hessian(np.zeros(3))
    singular_origin = np.linalg.norm(g0) <= 1e-12 * (1 + np.linalg.norm(H0))
    if singular_origin:
        w, vecs = np.linalg.eigh(H0)
        delta = 1e-3 * R
        for k in range(3):
            e = vecs[:, k]
            parts = []
            for sgn in (-1.0, 1.0):
                start, _ = C.correct(sgn * delta * e, sgn * e, delta)
                if start is None:
                    raise NoConvergence("cannot leave the singular origin")
                tr = C.trace(start, sgn * e, seeds, consumed)
                tr.mu.insert(0, np.zeros(3))
                tr.tangent.insert(0, sgn * e)
                parts.append(tr)
            traces.append(parts)

    pending_switch = []
    for k, seed in enumerate(seeds):
        if k in consumed:
            continue
        consumed.add(k)
        v = C.tangent(seed)
        if v @ seed > 0:
            v = -v
        tr = C.trace(seed, v, seeds, consumed)
        traces.append([tr])
        pending_switch.extend(m for _, m in tr.markers if m["rank_drop"])

    if branch_switch:
        done = []
        while pending_switch:
            mk = pending_switch.pop(0)
            p = mk["mu"]
            if any(np.linalg.norm(p - q) < 1e-8 * R for q in done):
                continue
            done.append(p)
            _, _, vt = np.linalg.svd(C.DF(p))
            kernel = vt[-2:]
            # existing directions through p
            existing = []
            for group in traces:
                pts, tans = _merge(group)
                d = np.linalg.norm(pts - p, axis=1)
                i = int(np.argmin(d))
                if d[i] < 1e-2 * R:
                    existing.append(tans[i])
            for w in kernel:
                w = w - sum((w @ t) * t for t in existing)
                if np.linalg.norm(w) < 0.5:
                    continue
                w /= np.linalg.norm(w)
                delta = 1e-3 * R
                parts = []
                for sgn in (-1.0, 1.0):
                    start, _ = C.correct(p + sgn * delta * w, sgn * w, sgn * w @ p + delta)
                    if start is None:
                        continue
                    tr = C.trace(start, sgn * w, seeds, consumed)
                    tr.mu.insert(0, p)
                    tr.tangent.insert(0, sgn * w)
                    parts.append(tr)
                if len(parts) == 2:
                    parts[0].markers.append((0, mk))
                    traces.append([parts[0], parts[1]])
                    existing.append(w)
                    for part in parts:
                        pending_switch.extend(m for _, m in part.markers if m["rank_drop"])
                break

    branches = []
    for group in traces:
        pts, tans = _merge(group)
        markers = [Marker("bifurcation" if mk["rank_drop"] else "bifurcation_candidate",
                          float("nan"), mk["mu"], float("nan"))
                   for part in group for _, mk in part.markers]
        branches.append([pts, tans, markers])
    if not singular_origin:
        _insert_origin(branches, g0, R)
    out = [_to_branch(C, k, *b) for k, b in enumerate(branches)]
    for b in out:
        b.contains_origin = bool(np.any(np.all(b.mu == 0.0, axis=1)))
        if b.contains_origin:
            kind = "triple_point" if singular_origin else "zero_momentum"
            b.markers.append(Marker(kind, np.inf, np.zeros(3), float("nan")))
    return out


def _merge(group):
    if len(group) == 1:
        pts = np.array(group[0].mu)
        tans = np.array(group[0].tangent)
    else:
        a, b = group
        pa = np.array(a.mu)[::-1]
        ta = -np.array(a.tangent)[::-1]
        pb = np.array(b.mu)
        tb = np.array(b.tangent)
        if np.linalg.norm(pa[-1] - pb[0]) < 1e-12:
            pb, tb = pb[1:], tb[1:]
        pts = np.vstack([pa, pb])
        tans = np.vstack([ta, tb])
    return pts, tans


def _to_branch(C: _Continuation, bid, pts, tans, markers):
    red = C.red
    lam, h = [], []
    for p in pts:
        g = red.gradient(p)
        m2 = p @ p
        lam.append(g @ p / m2 if m2 > 0 else np.inf)
        h.append(red.value(p))
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    lam = np.array(lam)
    finite = lam[np.isfinite(lam)]
    interval = (float(finite.min()), float(finite.max())) if len(finite) else (np.nan, np.nan)
    br = REBranch(
        branch_id=bid,
        kind="continuation",
        lam_interval=interval,
        param=arc,
        lam=lam,
        mu=pts,
        j=0.5 * np.einsum("ij,ij->i", pts, pts),
        h=np.array(h),
        tangent=tans,
        markers=markers,
    )
    return br


def _insert_origin(branches, g0, R):
    """Put the regular RE ``mu = 0`` exactly onto the branch passing through it."""
    from .curves import distance_to_polyline

    if not branches:
        return
    d = [distance_to_polyline(p, t, np.zeros(3)) for p, t, _ in branches]
    k = int(np.argmin(d))
    if d[k] > 1e-4 * R:
        return
    pts, tans, mk = branches[k]
    v = g0 / np.linalg.norm(g0)
    # consecutive samples straddle the plane through 0 normal to grad h(0)
    side = pts @ v
    cross = np.flatnonzero(side[:-1] * side[1:] <= 0)
    if not len(cross):
        return
    i = int(cross[np.argmin(np.linalg.norm(pts[cross], axis=1))])
    if np.all(pts[i] == 0) or np.all(pts[i + 1] == 0):
        return
    if v @ tans[i] < 0:
        v = -v
    branches[k][0] = np.vstack([pts[: i + 1], np.zeros((1, 3)), pts[i + 1:]])
    branches[k][1] = np.vstack([tans[: i + 1], v[None], tans[i + 1:]])
