"""Jet-level tangent spaces for contact equivalence preserving rank <= 1 matrices.

For ``F = d(h, j) = [[h_x, h_y, h_z], [x, y, z]]`` every entry is truncated
to total degree ``d`` and a 2x3 polynomial matrix becomes a coefficient
vector of length ``6 M(d)`` (``M(d)`` monomials in three variables).  The
vector index is ``monomial * 6 + row * 3 + col`` with monomials in graded
order, so the constant matrices come first.

Tangent vectors to the orbit of ``F`` come from two sources:

* the liftable fields of the variety, applied to ``F``: left multiplication
  by elementary 2x2 matrices (a row placed into a row) and right
  multiplication by elementary 3x3 matrices (a column placed into a column);
  the sum of the diagonal row moves equals the sum of the diagonal column
  moves, so one column template is dropped, leaving 12;
* the partial derivatives ``dF/dx_i`` (coordinate changes of the source).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .polynomial import Polynomial, monomials

ROWS, COLS = 2, 3
NV = 3


@dataclass
class PolyMatrix:
    """2x3 matrix of polynomials in ``(x, y, z)``, truncated at degree ``d``."""

    entries: list  # 2 lists of 3 Polynomial
    degree: int

    def __post_init__(self):
        self.entries = [[p.truncate(self.degree) for p in row] for row in self.entries]

    @classmethod
    def zeros(cls, degree):
        return cls([[Polynomial(NV) for _ in range(COLS)] for _ in range(ROWS)], degree)

    @classmethod
    def constant(cls, values, degree):
        values = np.asarray(values, dtype=float)
        return cls([[Polynomial.constant(NV, values[r, c]) for c in range(COLS)] for r in range(ROWS)], degree)

    def __mul__(self, p: Polynomial):
        return PolyMatrix([[e * p for e in row] for row in self.entries], self.degree)

    def __add__(self, other):
        return PolyMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)], self.degree)

    def left(self, E):
        """``E @ self`` for a constant 2x2 matrix."""
        E = np.asarray(E, dtype=float)
        rows = []
        for i in range(ROWS):
            rows.append([sum((self.entries[k][c] * float(E[i, k]) for k in range(ROWS)), Polynomial(NV))
                         for c in range(COLS)])
        return PolyMatrix(rows, self.degree)

    def right(self, E):
        """``self @ E`` for a constant 3x3 matrix."""
        E = np.asarray(E, dtype=float)
        rows = []
        for r in range(ROWS):
            rows.append([sum((self.entries[r][k] * float(E[k, c]) for k in range(COLS)), Polynomial(NV))
                         for c in range(COLS)])
        return PolyMatrix(rows, self.degree)

    def __call__(self, point) -> np.ndarray:
        return np.array([[p(point) for p in row] for row in self.entries])

    def vector(self) -> np.ndarray:
        mons = monomials(NV, self.degree)
        index = {m: k for k, m in enumerate(mons)}
        v = np.zeros(6 * len(mons))
        for r in range(ROWS):
            for c in range(COLS):
                for e, coef in self.entries[r][c].terms.items():
                    v[index[e] * 6 + r * 3 + c] = coef
        return v

    @classmethod
    def from_vector(cls, v, degree):
        mons = monomials(NV, degree)
        rows = [[{} for _ in range(COLS)] for _ in range(ROWS)]
        for k, m in enumerate(mons):
            for r in range(ROWS):
                for c in range(COLS):
                    val = v[k * 6 + r * 3 + c]
                    if val != 0:
                        rows[r][c][m] = val
        return cls([[Polynomial(NV, t) for t in row] for row in rows], degree)


def jet_dimension(d: int) -> int:
    return 6 * len(monomials(NV, d))


def f_matrix(h: Polynomial, d: int) -> PolyMatrix:
    """``F = [[h_x, h_y, h_z], [x, y, z]]`` truncated at degree ``d``."""
    grads = h.gradient()
    return PolyMatrix([grads, [Polynomial.variable(NV, i) for i in range(NV)]], d)


@dataclass(frozen=True)
class Template:
    """A liftable vector field of the variety, acting on ``F`` linearly."""

    kind: str  # "row" or "col"
    src: int
    dst: int

    def apply(self, F: PolyMatrix) -> PolyMatrix:
        if self.kind == "row":
            E = np.zeros((ROWS, ROWS))
            E[self.dst, self.src] = 1.0
            return F.left(E)
        E = np.zeros((COLS, COLS))
        E[self.src, self.dst] = 1.0
        return F.right(E)

    def apply_matrix(self, A: np.ndarray) -> np.ndarray:
        A = np.asarray(A, dtype=float)
        out = np.zeros_like(A)
        if self.kind == "row":
            out[self.dst] = A[self.src]
        else:
            out[:, self.dst] = A[:, self.src]
        return out


def theta_v_generators() -> list[Template]:
    """The 12 templates: 4 row moves then 8 of the 9 column moves.

    Row move ``(src, dst)`` copies row ``src`` of ``F`` into row ``dst``;
    column moves likewise.  The column move ``(2, 2)`` is omitted since it
    equals the sum of the two diagonal row moves minus the other two
    diagonal column moves.
    """
    rows = [Template("row", src, dst) for dst in range(ROWS) for src in range(ROWS)]
    cols = [Template("col", src, dst) for src in range(COLS) for dst in range(COLS)
            if not (src == dst == COLS - 1)]
    return rows + cols


def tf_generators(h: Polynomial, d: int) -> list[PolyMatrix]:
    """``dF/dx_i`` for ``i = x, y, z``."""
    F = f_matrix(h, d + 1)
    out = []
    for i in range(NV):
        out.append(PolyMatrix([[p.diff(i) for p in row] for row in F.entries], d))
    return out


@dataclass
class JetModuleSpan:
    """Linear span of a set of jet vectors, with an orthonormal basis."""

    degree: int
    generators: np.ndarray  # rows
    basis: np.ndarray  # orthonormal rows
    singular_values: np.ndarray
    threshold: float

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def ambient(self) -> int:
        return jet_dimension(self.degree)

    @property
    def codim(self) -> int:
        return self.ambient - self.dim

    @property
    def margin(self) -> float:
        """Ratio of the smallest kept to the largest dropped singular value."""
        s = self.singular_values
        kept = s[s > self.threshold]
        dropped = s[s <= self.threshold]
        if not len(dropped) or not len(kept):
            return float("inf")
        return float(kept.min() / max(dropped.max(), 1e-300))

    def contains(self, v, rtol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0:
            return True
        r = v - self.basis.T @ (self.basis @ v) if self.dim else v
        return bool(np.linalg.norm(r) <= rtol * max(nv, 1.0))

    def complement_basis(self) -> list[np.ndarray]:
        """Greedy standard-basis complement, scanning indices in order."""
        basis = list(self.basis)
        out = []
        n = self.ambient
        for k in range(n):
            if len(basis) == n:
                break
            e = np.zeros(n)
            e[k] = 1.0
            Q = np.array(basis) if basis else np.zeros((0, n))
            r = e - Q.T @ (Q @ e) if len(Q) else e
            if np.linalg.norm(r) > 1e-6:
                basis.append(r / np.linalg.norm(r))
                out.append(e)
        return out


def span_of(vectors: Sequence[np.ndarray], degree: int, rel_threshold: float = 1e-9) -> JetModuleSpan:
    n = jet_dimension(degree)
    G = np.array(vectors, dtype=float).reshape(-1, n)
    if not len(G):
        return JetModuleSpan(degree, G, np.zeros((0, n)), np.zeros(0), 0.0)
    _, s, vt = np.linalg.svd(G, full_matrices=False)
    thr = rel_threshold * (s[0] if len(s) and s[0] > 0 else 1.0)
    r = int(np.sum(s > thr))
    return JetModuleSpan(degree, G, vt[:r], s, thr)


def _module_vectors(gens: Sequence[PolyMatrix], d: int, min_degree: int) -> list[np.ndarray]:
    vecs = []
    for m in monomials(NV, d):
        if sum(m) < min_degree:
            continue
        mono = Polynomial(NV, {m: 1.0})
        for g in gens:
            v = (g * mono).vector()
            if np.any(v):
                vecs.append(v)
    return vecs


def tangent_space_span(h: Polynomial, d: int, extended: bool = False,
                       rel_threshold: float = 1e-9) -> JetModuleSpan:
    """Jet of the tangent space ``tF(m_X theta_X) + F* theta`` (or its extended form).

    The derivative part is multiplied by monomials of degree >= 1, or >= 0
    when ``extended`` is set; the template part always by degree >= 0.
    """
    if d < 1:
        raise ValueError("jet degree must be >= 1")
    F = f_matrix(h, d)
    lift = [t.apply(F) for t in theta_v_generators()]
    vecs = _module_vectors(lift, d, 0)
    vecs += _module_vectors(tf_generators(h, d), d, 0 if extended else 1)
    return span_of(vecs, d, rel_threshold)


def maximal_ideal_vectors(d: int) -> list[np.ndarray]:
    """Standard basis vectors of ``m_X theta(F)``: entries without constant term."""
    n = jet_dimension(d)
    out = []
    for k in range(6, n):
        e = np.zeros(n)
        e[k] = 1.0
        out.append(e)
    return out


def family_derivatives_g(d: int) -> list[PolyMatrix]:
    """Derivatives of ``F`` along the three unfolding parameters: first-row constants."""
    out = []
    for c in range(COLS):
        A = np.zeros((ROWS, COLS))
        A[0, c] = 1.0
        out.append(PolyMatrix.constant(A, d))
    return out


@dataclass
class CodimReport:
    degree: int
    dim_jet_space: int
    dim_tangent: int
    codim: int
    complement_basis: list
    margin: float
    generators: str = "theta_prime_V (12 templates)"
    versal: Optional[bool] = None
    codim_with_family: Optional[int] = None
    determined: Optional[bool] = None

    def to_dict(self):
        out = {
            "degree": self.degree,
            "dim_jet_space": self.dim_jet_space,
            "dim_tangent": self.dim_tangent,
            "codim": self.codim,
            "complement_basis": self.complement_basis,
            "rank_margin": self.margin,
            "generators": self.generators,
        }
        if self.versal is not None:
            out["versal"] = self.versal
            out["codim_with_family"] = self.codim_with_family
        if self.determined is not None:
            out["determined"] = self.determined
        return out


def _describe(v, d):
    """Complement vector as a nested list 2x3 of {monomial: coef} strings."""
    pm = PolyMatrix.from_vector(v, d)
    out = []
    for row in pm.entries:
        out.append([_poly_str(p) for p in row])
    return out


def _poly_str(p: Polynomial):
    if not p.terms:
        return "0"
    parts = []
    for e, c in sorted(p.terms.items()):
        mono = "*".join(f"{'xyz'[i]}^{k}" if k > 1 else "xyz"[i] for i, k in enumerate(e) if k)
        coef = f"{c:g}"
        parts.append(coef if not mono else (mono if c == 1 else f"{coef}*{mono}"))
    return " + ".join(parts)


def versality_check(h: Polynomial, family_derivatives: Sequence[PolyMatrix], d: int,
                    rel_threshold: float = 1e-9) -> tuple[bool, CodimReport]:
    """Extended tangent space plus family derivatives fill the jet space."""
    T = tangent_space_span(h, d, extended=True, rel_threshold=rel_threshold)
    vecs = list(T.generators) + [g.vector() for g in family_derivatives]
    full = span_of(vecs, d, rel_threshold)
    ok = full.codim == 0
    rep = codimension_report(h, d, rel_threshold, span=T)
    rep.versal = ok
    rep.codim_with_family = full.codim
    return ok, rep


def determinacy_check(h: Polynomial, d: int, rel_threshold: float = 1e-9) -> bool:
    """``m_X theta(F)`` (jet level) lies in the non-extended tangent space."""
    T = tangent_space_span(h, d, extended=False, rel_threshold=rel_threshold)
    return all(T.contains(v) for v in maximal_ideal_vectors(d))


def codimension_report(h: Polynomial, d: int, rel_threshold: float = 1e-9,
                       span: Optional[JetModuleSpan] = None) -> CodimReport:
    T = span if span is not None else tangent_space_span(h, d, extended=True, rel_threshold=rel_threshold)
    comp = [_describe(v, d) for v in T.complement_basis()]
    return CodimReport(d, T.ambient, T.dim, T.codim, comp, T.margin)


def quadratic_h(a: float, b: float, c: float) -> Polynomial:
    """``a x^2 + b y^2 + c z^2`` (no ordering or distinctness imposed)."""
    return Polynomial(NV, {(2, 0, 0): a, (0, 2, 0): b, (0, 0, 2): c})


def rank_one_tangent_check(A: np.ndarray, B: np.ndarray) -> float:
    """``|q B K|`` for the left null row ``q`` and kernel basis ``K`` of rank-1 ``A``."""
    u, s, vt = np.linalg.svd(A)
    q = u[:, -1]
    K = vt[1:].T
    return float(np.max(np.abs(q @ B @ K)))
