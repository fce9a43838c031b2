"""Symplectic potentials: scaled affine-log sums plus a polynomial correction.

A potential has the form

    phi(xi) = scale * sum_r  w_r * L_r(xi) log L_r(xi)  +  f(xi)

with affine forms L_r(xi) = xi . normal_r + offset_r and a polynomial f that
is smooth on all of R^n.  With weight-1 terms taken from the facets of a
polytope, zero correction and scale 1/2 this is the Guillemin potential.
Value, gradient and Hessian are closed-form; the value extends continuously
to the closed polytope with the convention 0 log 0 = 0 applied termwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, InvalidInputError
from .polynomial import Polynomial
from .polytope import FaceChart, Polytope, restrict_polytope, vertices

# facet values inside [-EXTENDED_TOL, 0] are treated as exact zeros of the
# continuous extension; anything more negative is outside the closed domain
EXTENDED_TOL = 1e-12


@dataclass(frozen=True)
class AffineLogTerm:
    """One summand weight * L(xi) log L(xi) with L(xi) = xi . normal + offset."""

    normal: tuple[float, ...]
    offset: float
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(float(v) for v in self.normal))
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "weight", float(self.weight))


@dataclass(frozen=True)
class SymplecticPotential:
    dim: int
    scale: float = 0.5
    log_terms: tuple[AffineLogTerm, ...] = ()
    correction: Polynomial | None = None

    def __post_init__(self):
        if self.correction is None:
            object.__setattr__(self, "correction", Polynomial.zero(self.dim))
        if self.correction.nvars != self.dim:
            raise InvalidInputError("correction polynomial has wrong variable count")
        for term in self.log_terms:
            if len(term.normal) != self.dim:
                raise InvalidInputError("log term normal has wrong length")

    @cached_property
    def _normals(self):
        a = np.array([t.normal for t in self.log_terms], dtype=float)
        a = a.reshape(len(self.log_terms), self.dim)
        a.flags.writeable = False
        return a

    @cached_property
    def _offsets(self):
        a = np.array([t.offset for t in self.log_terms])
        a.flags.writeable = False
        return a

    @cached_property
    def _weights(self):
        a = np.array([t.weight for t in self.log_terms])
        a.flags.writeable = False
        return a

    def term_values(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.dim,):
            raise InvalidInputError(f"point has shape {xi.shape}, expected ({self.dim},)")
        if not self.log_terms:
            return np.zeros(0)
        return self._normals @ xi + self._offsets

    def _strict_values(self, xi):
        z = self.term_values(xi)
        bad = np.nonzero(z <= 0)[0]
        if bad.size:
            raise DomainError(
                f"log argument {z[bad[0]]:.3e} of term {bad[0] + 1} is not positive"
            )
        return z

    def value(self, xi) -> float:
        """phi(xi) on the interior; raises DomainError on a nonpositive log argument."""
        z = self._strict_values(xi)
        out = float(self.scale * np.dot(self._weights, z * np.log(z))) if z.size else 0.0
        return out + self.correction(xi)

    def value_extended(self, xi) -> float:
        """Continuous extension of phi to the closed domain (0 log 0 = 0 termwise)."""
        z = self.term_values(xi)
        if np.any(z < -EXTENDED_TOL):
            bad = int(np.argmin(z))
            raise DomainError(f"term {bad + 1} is negative ({z[bad]:.3e}); point not in domain")
        z = np.maximum(z, 0.0)
        zlogz = np.where(z > 0.0, z * np.log(np.where(z > 0.0, z, 1.0)), 0.0)
        out = float(self.scale * np.dot(self._weights, zlogz)) if z.size else 0.0
        return out + self.correction(xi)

    def gradient(self, xi) -> np.ndarray:
        """scale * sum w_r nu_r (log L_r + 1) + grad f."""
        z = self._strict_values(xi)
        g = self.correction.gradient(np.asarray(xi, dtype=float))
        if z.size:
            g = g + self.scale * (self._weights * (np.log(z) + 1.0)) @ self._normals
        return g

    def hessian(self, xi) -> np.ndarray:
        """scale * sum w_r nu_r nu_r^T / L_r + Hess f; symmetric by construction."""
        z = self._strict_values(xi)
        h = self.correction.hessian(np.asarray(xi, dtype=float))
        if z.size:
            scaled = self._normals * (self._weights / z)[:, None]
            h = h + self.scale * scaled.T @ self._normals
        return 0.5 * (h + h.T)

    def as_dict(self):
        return {
            "scale": self.scale,
            "log_terms": [
                {"normal": list(t.normal), "offset": t.offset, "weight": t.weight}
                for t in self.log_terms
            ],
            "correction": self.correction.as_dict(),
        }


def guillemin(P: Polytope, scale: float = 0.5) -> SymplecticPotential:
    """The canonical potential scale * sum_r l_r log l_r over the facets of P."""
    terms = tuple(
        AffineLogTerm(normal=tuple(float(v) for v in hs.normal), offset=float(hs.offset))
        for hs in P.halfspaces
    )
    return SymplecticPotential(dim=P.dim, scale=float(scale), log_terms=terms)


def restrict_potential(phi: SymplecticPotential, chart: FaceChart) -> SymplecticPotential:
    """Pull the potential back to a face through its chart.

    Terms that vanish identically on the face contribute 0 log 0 = 0 and are
    dropped; the remaining terms and the correction are composed with the
    affine chart map u -> origin + basis @ u.
    """
    B = chart.basis_array
    origin = chart.origin_array
    kept = []
    for idx, term in enumerate(phi.log_terms):
        nu = np.array(term.normal)
        pulled_normal = B.T @ nu
        pulled_offset = float(nu @ origin) + term.offset
        if np.max(np.abs(pulled_normal), initial=0.0) <= 1e-12:
            if abs(pulled_offset) <= 1e-12:
                continue  # identically zero on the face: extended term vanishes
            if pulled_offset < 0:
                raise DomainError(f"log term {idx + 1} is negative on the face")
        kept.append(
            AffineLogTerm(
                normal=tuple(pulled_normal), offset=pulled_offset, weight=term.weight
            )
        )
    _check_positive_on_face(kept, chart)
    return SymplecticPotential(
        dim=chart.dim_face,
        scale=phi.scale,
        log_terms=tuple(kept),
        correction=phi.correction.compose_affine(origin, B),
    )


def _check_positive_on_face(terms, chart):
    """Reject pulled-back log terms that go negative on the face."""
    if not terms:
        return
    face_poly = restrict_polytope(chart.polytope, chart)
    if not face_poly.bounded:
        return  # desk-scale check is vertex-based; unbounded faces checked at eval time
    for v in vertices(face_poly):
        u = v.array
        for idx, term in enumerate(terms):
            val = float(np.dot(term.normal, u) + term.offset) if len(u) else term.offset
            if val < -1e-9:
                raise DomainError(f"log term {idx + 1} is negative on the face interior")


@dataclass(frozen=True)
class ValidityReport:
    passed: bool
    samples: int
    min_eigenvalue: float
    det_product_min: float
    det_product_max: float
    failures: tuple[dict, ...] = field(default=())

    def as_dict(self):
        return {
            "passed": self.passed,
            "samples": self.samples,
            "min_eigenvalue": self.min_eigenvalue,
            "det_product_min": self.det_product_min,
            "det_product_max": self.det_product_max,
            "failures": list(self.failures),
        }


def _is_positive_definite(H, rel_tol=1e-12):
    """Symmetric factorization with pivots required to exceed rel_tol * max diagonal."""
    H = np.array(H, dtype=float)
    n = H.shape[0]
    tol = rel_tol * max(np.max(np.abs(np.diag(H))), 1.0)
    for i in range(n):
        pivot = H[i, i]
        if pivot <= tol:
            return False
        H[i + 1 :, i + 1 :] -= np.outer(H[i + 1 :, i], H[i + 1 :, i]) / pivot
    return True


def validity_scan(
    phi: SymplecticPotential, P: Polytope, samples: int = 200, seed: int = 0
) -> ValidityReport:
    """Sample-based check of positive definiteness and of det(G) * prod l_r > 0.

    Draws interior points stratified toward each facet (distances down to
    1e-6 of the inradius scale).  A heuristic, not a proof: it certifies the
    sampled points only.
    """
    if not P.bounded:
        raise InvalidInputError("validity scan requires a bounded polytope")
    rng = np.random.default_rng(seed)
    verts = np.array([v.array for v in vertices(P)])
    base_count = max(samples // 8, 1)
    points = []
    for _ in range(base_count):
        w = rng.dirichlet(np.ones(len(verts)))
        points.append(w @ verts)
    ladder = 10.0 ** np.arange(-1, -7, -1)
    while len(points) < samples:
        z = rng.dirichlet(np.ones(len(verts))) @ verts
        r = int(rng.integers(P.n_facets))
        delta = float(rng.choice(ladder))
        d = -P.normal_matrix[r]
        rates = P.normal_matrix @ d
        vals = P.facet_values(z)
        with np.errstate(divide="ignore"):
            exit_ts = np.where(rates < 0, vals / -rates, np.inf)
        t_exit = float(np.min(exit_ts))
        if not np.isfinite(t_exit):
            continue
        points.append(z + (1.0 - delta) * t_exit * d)
    min_eig = np.inf
    prod_min, prod_max = np.inf, -np.inf
    failures = []
    for x in points:
        vals = P.facet_values(x)
        if np.any(vals <= 0):
            continue
        H = phi.hessian(x)
        eig = float(np.min(np.linalg.eigvalsh(H)))
        det_prod = float(np.linalg.det(H) * np.prod(vals))
        min_eig = min(min_eig, eig)
        prod_min = min(prod_min, det_prod)
        prod_max = max(prod_max, det_prod)
        if not _is_positive_definite(H) or det_prod <= 0:
            failures.append(
                {"point": [float(c) for c in x], "min_eigenvalue": eig, "det_product": det_prod}
            )
    return ValidityReport(
        passed=not failures,
        samples=len(points),
        min_eigenvalue=min_eig,
        det_product_min=prod_min,
        det_product_max=prod_max,
        failures=tuple(failures[:10]),
    )
