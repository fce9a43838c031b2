"""Mixture families on a finite outcome set and the torification dictionary.

A polytope whose primitive facet normals sum to zero carries the family
p(r | xi) = l_r(xi) / sum(lambda) of categorical distributions; conversely a
mixture family p(r | xi) = xi . alpha_r + beta_r determines a candidate
polytope by clearing denominators.  The canonical-potential Bregman
divergence and the Kullback-Leibler divergence of the family agree up to the
exact factor scale * sum(lambda).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import intlattice
from .errors import DegenerateError, DomainError, InvalidInputError, NotTorifiableError
from .polytope import (
    DelzantReport,
    HalfSpace,
    Polytope,
    _drop_redundant,
    as_fraction,
    validate_delzant,
)


@dataclass(frozen=True)
class MixtureFamily:
    """Affine probability weights p(r | xi) = xi . alpha_r + beta_r over [N]."""

    alphas: tuple[tuple[Fraction, ...], ...]
    betas: tuple[Fraction, ...]

    def __post_init__(self):
        alphas = tuple(tuple(as_fraction(a) for a in row) for row in self.alphas)
        betas = tuple(as_fraction(b) for b in self.betas)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        if len(alphas) != len(betas) or not alphas:
            raise InvalidInputError("alphas and betas must have equal, positive length")
        dim = len(alphas[0])
        if any(len(row) != dim for row in alphas):
            raise InvalidInputError("alpha vectors must share a common length")
        for i in range(dim):
            if sum(row[i] for row in alphas) != 0:
                raise InvalidInputError("alpha vectors must sum to zero exactly")
        if sum(betas) != 1:
            raise InvalidInputError("betas must sum to one exactly")

    @property
    def size(self):
        return len(self.alphas)

    @property
    def dim(self):
        return len(self.alphas[0])

    @cached_property
    def _alpha_array(self):
        a = np.array([[float(v) for v in row] for row in self.alphas])
        a.flags.writeable = False
        return a

    @cached_property
    def _beta_array(self):
        a = np.array([float(b) for b in self.betas])
        a.flags.writeable = False
        return a

    def probabilities(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self._alpha_array @ xi + self._beta_array

    def as_dict(self):
        return {
            "alphas": [[str(a) for a in row] for row in self.alphas],
            "betas": [str(b) for b in self.betas],
        }


def zero_sum_check(P: Polytope) -> bool:
    """True iff the facet normals sum to zero (exact integer sum)."""
    return all(
        sum(hs.normal[i] for hs in P.halfspaces) == 0 for i in range(P.dim)
    )


def to_mixture(P: Polytope) -> MixtureFamily:
    """The mixture family p(r | xi) = l_r(xi) / sum(lambda) carried by P."""
    if not zero_sum_check(P):
        raise NotTorifiableError(
            "facet normals do not sum to zero; the polytope carries no mixture family"
        )
    total = sum(hs.offset for hs in P.halfspaces)
    if total <= 0:
        raise DegenerateError(f"offset sum {total} must be positive")
    alphas = tuple(tuple(Fraction(v) / total for v in hs.normal) for hs in P.halfspaces)
    betas = tuple(hs.offset / total for hs in P.halfspaces)
    return MixtureFamily(alphas=alphas, betas=betas)


def kl(theta: MixtureFamily, xi, xi2) -> float:
    """Kullback-Leibler divergence sum_r p(r|xi) log(p(r|xi) / p(r|xi2)).

    Follows the standard zero conventions: a zero weight at xi contributes
    nothing; a positive weight against a zero weight at xi2 yields math.inf.
    """
    p = theta.probabilities(xi)
    q = theta.probabilities(xi2)
    if np.any(p < -1e-12) or np.any(q < -1e-12):
        raise DomainError("probabilities are negative; point outside the closed domain")
    p = np.maximum(p, 0.0)
    q = np.maximum(q, 0.0)
    total = 0.0
    for pi, qi in zip(p, q):
        if pi == 0.0:
            continue
        if qi == 0.0:
            return math.inf
        total += pi * math.log(pi / qi)
    return total


@dataclass(frozen=True)
class TorificationReport:
    polytope: Polytope
    delzant: DelzantReport
    bounded: bool

    @property
    def torifiable(self):
        """Whether a compact torification of the family exists."""
        return self.bounded and self.delzant.valid

    def as_dict(self):
        return {
            "check": "torification",
            "polytope": {
                "dim": self.polytope.dim,
                "bounded": self.polytope.bounded,
                "halfspaces": [
                    {"normal": list(hs.normal), "offset": str(hs.offset)}
                    for hs in self.polytope.halfspaces
                ],
            },
            "delzant": self.delzant.as_dict(),
            "bounded": self.bounded,
            "pass": self.torifiable,
        }


def from_mixture(theta: MixtureFamily) -> TorificationReport:
    """Candidate polytope of a mixture family and its Delzant verdict.

    Clears the common denominator of the alpha entries, re-primitivizes each
    normal, drops redundant constraints, and validates.  A compact
    torification exists exactly when the closure is a bounded Delzant
    polytope.
    """
    lcm = 1
    for row in theta.alphas:
        for a in row:
            lcm = lcm * a.denominator // math.gcd(lcm, a.denominator)
    constraints = []
    for row, beta in zip(theta.alphas, theta.betas):
        scaled = tuple(int(a * lcm) for a in row)
        if all(v == 0 for v in scaled):
            if beta <= 0:
                raise DegenerateError("constant outcome weight is nonpositive")
            continue
        prim, g = intlattice.primitivize(scaled)
        constraints.append((prim, beta * lcm / g))
    seen = {}
    for prim, off in constraints:
        if prim not in seen or off < seen[prim]:
            seen[prim] = off
    unique = sorted(seen.items())
    kept = _drop_redundant(unique, theta.dim)
    if not kept:
        raise DegenerateError("mixture family has no defining constraints")
    bounded = not intlattice.cone_rays([c for c, _ in kept], theta.dim)
    P = Polytope(
        dim=theta.dim,
        halfspaces=tuple(HalfSpace(normal=prim, offset=off) for prim, off in kept),
        bounded=bounded,
    )
    return TorificationReport(polytope=P, delzant=validate_delzant(P), bounded=bounded)
