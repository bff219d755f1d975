"""Sparse multivariate polynomials with real coefficients.

A polynomial is a mapping from exponent tuples to coefficients.  It is
small on purpose: evaluation, differentiation, products and truncation by
total degree are all the reduction backend and the jet computations need.
"""

from __future__ import annotations

from itertools import combinations_with_replacement
from typing import Iterable, Mapping

import numpy as np


class Polynomial:
    """Polynomial in ``nvars`` variables stored as ``{exponents: coefficient}``.

    Example
    -------
    >>> p = Polynomial(3, {(2, 0, 0): 3.0, (0, 1, 0): -1.0})   # 3x^2 - y
    >>> p([1.0, 2.0, 0.0])
    1.0
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, float] | None = None):
        self.nvars = int(nvars)
        self.terms: dict[tuple, float] = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise ValueError(f"exponent {exps} has wrong length for {self.nvars} variables")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if coef != 0:
                self.terms[exps] = self.terms.get(exps, 0.0) + float(coef)
        self.terms = {k: v for k, v in self.terms.items() if v != 0}

    # construction helpers
    @classmethod
    def constant(cls, nvars, value):
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars, index):
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1.0})

    @classmethod
    def from_list(cls, nvars, items: Iterable):
        """Build from ``[(coef, [e0, e1, ...]), ...]`` or dicts with those keys."""
        terms: dict[tuple, float] = {}
        for item in items:
            if isinstance(item, Mapping):
                coef, exps = item["coef"], item["powers"]
            else:
                coef, exps = item
            exps = tuple(int(e) for e in exps)
            terms[exps] = terms.get(exps, 0.0) + float(coef)
        return cls(nvars, terms)

    def to_list(self):
        return [{"coef": c, "powers": list(e)} for e, c in sorted(self.terms.items())]

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Polynomial.constant(self.nvars, float(other))

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: dict[tuple, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "Polynomial(0)"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"v{i}^{k}" if k > 1 else f"v{i}" for i, k in enumerate(e) if k)
            parts.append(f"{c:g}" + (f"*{mono}" if mono else ""))
        return "Polynomial(" + " + ".join(parts) + ")"

    # calculus
    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def diff(self, index: int) -> "Polynomial":
        terms = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                ne = list(e)
                ne[index] -= 1
                terms[tuple(ne)] = c * k
        return Polynomial(self.nvars, terms)

    def truncate(self, degree: int) -> "Polynomial":
        return Polynomial(self.nvars, {e: c for e, c in self.terms.items() if sum(e) <= degree})

    def homogeneous_part(self, degree: int) -> "Polynomial":
        return Polynomial(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == degree})

    def __call__(self, point) -> float:
        point = np.asarray(point, dtype=float)
        total = 0.0
        for e, c in self.terms.items():
            total += c * float(np.prod(point ** np.asarray(e)))
        return total

    def gradient(self):
        return [self.diff(i) for i in range(self.nvars)]

    def hessian(self):
        grads = self.gradient()
        return [[g.diff(j) for j in range(self.nvars)] for g in grads]


def monomials(nvars: int, degree: int) -> list[tuple]:
    """Exponent tuples of total degree <= ``degree``, graded then lexicographic."""
    out = []
    for d in range(degree + 1):
        block = set()
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            block.add(tuple(e))
        out.extend(sorted(block, reverse=True))
    return out


class CompiledPolynomial:
    """Vectorised evaluator for a fixed polynomial and its derivatives.

    The value, all first partials and all second partials are each stored as
    one flat table of (component, coefficient, exponents), so an evaluation
    is a single power-product followed by a ``bincount``.
    """

    def __init__(self, poly: Polynomial):
        self.poly = poly
        n = poly.nvars
        self.nvars = n
        self._val = self._table([((), poly)], n)
        grads = poly.gradient()
        self._grad = self._table([((i,), g) for i, g in enumerate(grads)], n)
        hess = []
        for i in range(n):
            for j in range(i, n):
                hess.append(((i * n + j,), grads[i].diff(j)))
        self._hess = self._table(hess, n)
        # quadratic polynomials have an affine gradient; batch calls use it
        self._affine = None
        if poly.degree <= 2:
            z = np.zeros(n)
            self._affine = (self.hessian(z), self.gradient(z))

    @staticmethod
    def _table(items, n):
        comp, coef, exps = [], [], []
        for key, p in items:
            k = key[0] if key else 0
            for e, c in p.terms.items():
                comp.append(k)
                coef.append(c)
                exps.append(e)
        return (np.array(comp, dtype=int), np.array(coef, dtype=float),
                np.array(exps, dtype=int).reshape(-1, n))

    def _eval(self, table, x, size):
        comp, coef, exps = table
        if not len(coef):
            return np.zeros(size)
        vals = coef * np.prod(np.power(x[None, :], exps), axis=1)
        return np.bincount(comp, weights=vals, minlength=size)

    def _eval_batch(self, table, X, size):
        comp, coef, exps = table
        if not len(coef):
            return np.zeros((len(X), size))
        vals = coef * np.prod(np.power(X[:, None, :], exps[None]), axis=2)
        out = np.zeros((len(X), size))
        for k in range(size):
            sel = comp == k
            if sel.any():
                out[:, k] = vals[:, sel].sum(axis=1)
        return out

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self._eval(self._val, x, 1)[0])

    def value_batch(self, X) -> np.ndarray:
        return self._eval_batch(self._val, np.asarray(X, dtype=float), 1)[:, 0]

    def gradient_batch(self, X) -> np.ndarray:
        """Gradients at the rows of ``X`` (shape ``(N, nvars)``)."""
        X = np.asarray(X, dtype=float)
        if self._affine is not None:
            H, g0 = self._affine
            return X @ H.T + g0
        return self._eval_batch(self._grad, X, self.nvars)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self._eval(self._grad, x, self.nvars)

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = self.nvars
        H = self._eval(self._hess, x, n * n).reshape(n, n)
        iu = np.triu_indices(n, 1)
        H[iu[1], iu[0]] = H[iu]
        return H
