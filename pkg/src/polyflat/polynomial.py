"""Small multivariate polynomials with closed-form derivatives.

Used for the smooth correction added to the canonical affine-log potential.
Terms map exponent tuples to float coefficients; everything is dense-free and
sized for a handful of monomials of low degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInputError


def _normalized(nvars, terms):
    out = {}
    for exps, coeff in terms:
        exps = tuple(int(e) for e in exps)
        if len(exps) != nvars or any(e < 0 for e in exps):
            raise InvalidInputError(f"bad exponent tuple {exps} for {nvars} variables")
        c = out.get(exps, 0.0) + float(coeff)
        if c != 0.0:
            out[exps] = c
        elif exps in out:
            del out[exps]
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class Polynomial:
    nvars: int
    terms: tuple[tuple[tuple[int, ...], float], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "terms", _normalized(self.nvars, self.terms))

    @classmethod
    def zero(cls, nvars):
        return cls(nvars=nvars)

    @classmethod
    def from_monomials(cls, nvars, monomials):
        """monomials: iterable of (exponents, coeff) pairs."""
        return cls(nvars=nvars, terms=tuple(monomials))

    @property
    def is_zero(self):
        return not self.terms

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for exps, coeff in self.terms:
            term = coeff
            for xi, e in zip(x, exps):
                if e:
                    term *= xi**e
            total += term
        return total

    def partial(self, i):
        terms = []
        for exps, coeff in self.terms:
            if exps[i] == 0:
                continue
            new = list(exps)
            new[i] -= 1
            terms.append((tuple(new), coeff * exps[i]))
        return Polynomial(nvars=self.nvars, terms=tuple(terms))

    @cached_property
    def partials(self):
        return tuple(self.partial(i) for i in range(self.nvars))

    def gradient(self, x):
        return np.array([p(x) for p in self.partials])

    def hessian(self, x):
        h = np.empty((self.nvars, self.nvars))
        for i in range(self.nvars):
            row = self.partials[i]
            for j in range(i, self.nvars):
                h[i, j] = h[j, i] = row.partial(j)(x)
        return h

    def compose_affine(self, origin, basis):
        """The polynomial u -> self(origin + basis @ u) in k = basis.shape[1] variables."""
        origin = np.asarray(origin, dtype=float)
        basis = np.asarray(basis, dtype=float)
        n, k = basis.shape
        if n != self.nvars:
            raise InvalidInputError("affine map does not match variable count")
        # linear forms origin_j + sum_m basis[j, m] u_m, as monomial dicts
        zero_exp = (0,) * k
        lin = []
        for j in range(n):
            d = {}
            if origin[j] != 0.0:
                d[zero_exp] = origin[j]
            for m in range(k):
                if basis[j, m] != 0.0:
                    e = [0] * k
                    e[m] = 1
                    d[tuple(e)] = basis[j, m]
            lin.append(d)
        total = {}
        for exps, coeff in self.terms:
            acc = {zero_exp: coeff}
            for j, e in enumerate(exps):
                for _ in range(e):
                    acc = _mul(acc, lin[j])
            for key, val in acc.items():
                total[key] = total.get(key, 0.0) + val
        return Polynomial(nvars=k, terms=tuple(total.items()))

    def as_dict(self):
        return {
            "monomials": [
                {"exponents": list(exps), "coeff": coeff} for exps, coeff in self.terms
            ]
        }


def _mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0.0) + ca * cb
    return out
