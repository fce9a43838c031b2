"""Dually flat structure on polytope faces.

A face carries its own Hesse structure: the potential restricted through a
lattice chart.  Two divergences live here:

* the face divergence D_F between two points of the open face, the Bregman
  divergence of the restricted potential, and
* the limit divergence D'_F(eta || xi') of a face point against an interior
  point, the continuous extension of the three-term Bregman form::

      D'_F(eta || xi') = phi_ext(eta) - phi(xi') - (eta - xi') . grad phi(xi')

The closed form keeps the per-facet terms that the one-sided limit picks up
from the facets active at eta; it is validated against numeric limits and is
the version for which the boundary Pythagorean identities hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .dually_flat import _newton_inverse, bregman
from .errors import DomainError, FaceBoundaryError, InvalidInputError, NumericalError
from .polytope import FaceChart, HalfSpace, Polytope, product, restrict_polytope, vertices
from .potential import SymplecticPotential, guillemin, restrict_potential

ACTIVE_TOL = 1e-12   # |facet value| below this counts as "on the face"
INTERIOR_TOL = 1e-8  # inactive facet values must exceed this on the open face


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the open face, carried in both ambient and chart coordinates."""

    chart: FaceChart
    ambient: tuple[float, ...]
    chart_coords: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "ambient", tuple(float(v) for v in self.ambient))
        object.__setattr__(self, "chart_coords", tuple(float(v) for v in self.chart_coords))

    @cached_property
    def ambient_array(self):
        a = np.array(self.ambient)
        a.flags.writeable = False
        return a

    @cached_property
    def chart_array(self):
        a = np.array(self.chart_coords)
        a.flags.writeable = False
        return a


def boundary_point(chart: FaceChart, ambient=None, chart_coords=None) -> BoundaryPoint:
    """Build a validated point of the open face from either coordinate system."""
    if (ambient is None) == (chart_coords is None):
        raise InvalidInputError("give exactly one of ambient or chart coordinates")
    if ambient is None:
        chart_coords = np.asarray(chart_coords, dtype=float)
        ambient = chart.to_ambient(chart_coords)
    else:
        ambient = np.asarray(ambient, dtype=float)
        chart_coords = chart.to_chart(ambient)
    recon = chart.to_ambient(chart_coords)
    if float(np.max(np.abs(recon - ambient), initial=0.0)) > ACTIVE_TOL:
        raise DomainError("point is not on the affine hull of the face")
    P = chart.polytope
    values = P.facet_values(ambient)
    for r, v in enumerate(values, start=1):
        if r in chart.vanishing:
            if abs(v) > ACTIVE_TOL:
                raise DomainError(f"active facet {r} has value {v:.3e} at the point")
        elif v <= INTERIOR_TOL:
            raise DomainError(
                f"facet {r} has value {v:.3e}; point is not in the open face"
            )
    return BoundaryPoint(chart=chart, ambient=tuple(ambient), chart_coords=tuple(chart_coords))


@lru_cache(maxsize=64)
def _restricted(phi: SymplecticPotential, chart: FaceChart):
    return restrict_potential(phi, chart), restrict_polytope(chart.polytope, chart)


def boundary_divergence(
    phi: SymplecticPotential, chart: FaceChart, eta: BoundaryPoint, eta2: BoundaryPoint
) -> float:
    """Face divergence D_F: Bregman divergence of the restricted potential."""
    if eta.chart != chart or eta2.chart != chart:
        raise InvalidInputError("boundary points must use the given chart")
    phi_f, _ = _restricted(phi, chart)
    return bregman(phi_f, eta.chart_array, eta2.chart_array)


def extended_divergence(phi: SymplecticPotential, xi_closure, xi2) -> float:
    """Continuous extension of the divergence in its first argument.

    Equals the Bregman divergence for interior xi_closure and the limit of
    D(xi || xi2) as xi approaches a boundary point.
    """
    xi_closure = np.asarray(xi_closure, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    return float(
        phi.value_extended(xi_closure)
        - phi.value(xi2)
        - (xi_closure - xi2) @ phi.gradient(xi2)
    )


def limit_divergence(
    phi: SymplecticPotential, chart: FaceChart, eta: BoundaryPoint, xi2
) -> float:
    """Limit divergence D'_F(eta || xi2) of a face point against an interior point."""
    if eta.chart != chart:
        raise InvalidInputError("boundary point must use the given chart")
    xi2 = np.asarray(xi2, dtype=float)
    values = chart.polytope.facet_values(xi2)
    if np.any(values <= 0):
        raise DomainError("second argument must be interior")
    return extended_divergence(phi, eta.ambient_array, xi2)


@dataclass(frozen=True)
class ContinuityReport:
    target: float
    estimates: tuple[float, ...]
    gaps: tuple[float, ...]
    passed: bool
    tolerance: float

    def as_dict(self):
        return {
            "check": "boundary-continuity",
            "target": self.target,
            "estimates": list(self.estimates),
            "gaps": list(self.gaps),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def continuity_check(
    phi: SymplecticPotential,
    chart: FaceChart,
    eta: BoundaryPoint,
    eta2: BoundaryPoint,
    k_max: int = 8,
    tolerance: float = 1e-5,
) -> ContinuityReport:
    """Iterated-limit estimate of the divergence against the face divergence.

    Approaches eta and eta2 along segments toward an interior anchor, with the
    inner (first-limit) point two decades closer to the face than the outer
    one; reports the gap to D_F at facet distances 10^-1 .. 10^-k_max.
    """
    P = chart.polytope
    target = boundary_divergence(phi, chart, eta, eta2)
    anchor = np.array([float(c) for c in P.interior_point])
    active = sorted(chart.vanishing)

    def approach(point, delta):
        w = anchor - point
        rates = [
            float(np.dot(P.halfspaces[r - 1].normal, w)) for r in active
        ]
        s = delta / min(rates)
        return point + s * w

    estimates = []
    for k in range(1, k_max + 1):
        inner = approach(eta.ambient_array, 10.0 ** (-(k + 2)))
        outer = approach(eta2.ambient_array, 10.0**-k)
        estimates.append(bregman(phi, inner, outer))
    gaps = tuple(abs(e - target) for e in estimates)
    tail = gaps[-4:]
    decreasing = all(a > b for a, b in zip(tail, tail[1:]))
    passed = gaps[-1] <= tolerance and decreasing
    return ContinuityReport(
        target=target, estimates=tuple(estimates), gaps=gaps, passed=passed,
        tolerance=tolerance,
    )


def project_to_face(phi: SymplecticPotential, chart: FaceChart, xi2) -> BoundaryPoint:
    """The face point minimizing the limit divergence against xi2.

    Solved by Newton on the chart: the first-order condition equates the
    chart gradient of the restricted potential with the pullback of
    grad phi(xi2).  Initialized at the Euclidean projection of xi2 onto the
    affine hull of the face.
    """
    xi2 = np.asarray(xi2, dtype=float)
    P = chart.polytope
    if np.any(P.facet_values(xi2) <= 0):
        raise DomainError("projection argument must be interior")
    phi_f, face_poly = _restricted(phi, chart)
    if chart.dim_face == 0:
        return boundary_point(chart, chart_coords=())
    target = chart.basis_array.T @ phi.gradient(xi2)
    u0 = chart.to_chart(xi2)
    if float(np.min(face_poly.facet_values(u0), initial=np.inf)) <= 1e-9:
        u0 = None  # Euclidean projection is outside the face; use the centroid start
    u, residual, status = _newton_inverse(phi_f, face_poly, target, x0=u0)
    if status != "converged":
        raise FaceBoundaryError(
            f"projection minimizer lies on the face boundary or did not converge "
            f"({status}, residual {residual:.3e})"
        )
    return boundary_point(chart, chart_coords=u)


@dataclass(frozen=True)
class PythagorasReport:
    residual: float
    perp_value: float
    terms: tuple[float, ...]
    tolerance: float

    @property
    def passed(self):
        return abs(self.residual) <= self.tolerance

    def as_dict(self):
        return {
            "check": "pythagoras",
            "residual": self.residual,
            "perp_value": self.perp_value,
            "terms": list(self.terms),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def pythagoras_boundary_foot(
    phi: SymplecticPotential,
    chart: FaceChart,
    eta: BoundaryPoint,
    eta2: BoundaryPoint,
    xi2,
    tolerance: float = 1e-8,
) -> PythagorasReport:
    """Additivity D_F(eta||eta2) + D'_F(eta2||xi2) = D'_F(eta||xi2).

    The hypothesis is that eta2 is the foot of the dual geodesic from xi2,
    certified first-order: perp_value reports the infinity norm of the chart
    gradient mismatch at eta2, which vanishes exactly when eta2 is the
    projection of xi2 onto the face.
    """
    xi2 = np.asarray(xi2, dtype=float)
    a = boundary_divergence(phi, chart, eta, eta2)
    b = limit_divergence(phi, chart, eta2, xi2)
    c = limit_divergence(phi, chart, eta, xi2)
    phi_f, _ = _restricted(phi, chart)
    mismatch = phi_f.gradient(eta2.chart_array) - chart.basis_array.T @ phi.gradient(xi2)
    perp_defect = float(np.max(np.abs(mismatch), initial=0.0))
    return PythagorasReport(
        residual=a + b - c, perp_value=perp_defect, terms=(a, b, c), tolerance=tolerance
    )


def pythagoras_interior_foot(
    phi: SymplecticPotential,
    chart: FaceChart,
    eta: BoundaryPoint,
    xi,
    xi2,
    tolerance: float = 1e-9,
) -> PythagorasReport:
    """Additivity D'_F(eta||xi) + D(xi||xi2) = D'_F(eta||xi2).

    perp_value is the mixed pairing (eta - xi) . (y(xi2) - y(xi)) expressing
    metric orthogonality at xi of the straight segment toward eta and the dual
    geodesic toward xi2; the residual equals it identically, so the additivity
    holds exactly when the two directions are perpendicular.
    """
    xi = np.asarray(xi, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    a = limit_divergence(phi, chart, eta, xi)
    b = bregman(phi, xi, xi2)
    c = limit_divergence(phi, chart, eta, xi2)
    pairing = float((eta.ambient_array - xi) @ (phi.gradient(xi2) - phi.gradient(xi)))
    return PythagorasReport(
        residual=a + b - c, perp_value=pairing, terms=(a, b, c), tolerance=tolerance
    )


@dataclass(frozen=True)
class ProductBoundaryReport:
    samples: int
    additivity_max: float
    side_face_max: float
    bottom_face_max: float
    tolerance_additivity: float
    tolerance_pythagoras: float

    @property
    def passed(self):
        return (
            self.additivity_max <= self.tolerance_additivity
            and self.side_face_max <= self.tolerance_pythagoras
            and self.bottom_face_max <= self.tolerance_pythagoras
        )

    def as_dict(self):
        return {
            "check": "product-boundary",
            "samples": self.samples,
            "additivity_max": self.additivity_max,
            "side_face_max": self.side_face_max,
            "bottom_face_max": self.bottom_face_max,
            "tolerances": {
                "additivity": self.tolerance_additivity,
                "pythagoras": self.tolerance_pythagoras,
            },
            "pass": self.passed,
        }


def _random_interior(P, rng, margin=1e-3):
    verts = np.array([v.array for v in vertices(P)])
    for _ in range(200):
        x = rng.dirichlet(np.ones(len(verts))) @ verts
        if float(np.min(P.facet_values(x))) > margin:
            return x
    raise NumericalError("failed to draw an interior point with the requested margin")


def _random_face_point(chart, rng, margin=1e-3):
    P = chart.polytope
    verts = [v for v in vertices(P) if set(chart.face_active) <= set(v.active)]
    arr = np.array([v.array for v in verts])
    for _ in range(200):
        x = rng.dirichlet(np.ones(len(arr))) @ arr
        values = P.facet_values(x)
        ok = all(
            values[r - 1] > margin
            for r in range(1, P.n_facets + 1)
            if r not in chart.vanishing
        )
        if ok:
            return boundary_point(chart, ambient=x)
    raise NumericalError("failed to draw a face-interior point")


def product_boundary_check(
    P: Polytope,
    scale: float = 1.0,
    samples: int = 100,
    seed: int = 0,
    tolerance_additivity: float = 1e-10,
    tolerance_pythagoras: float = 1e-9,
) -> ProductBoundaryReport:
    """Boundary behavior of the product with a half-line factor.

    Forms P~ = P x [0, inf) with the canonical potential and verifies, over
    random configurations: divergence additivity across the factors, the
    Pythagorean identity with the corner on a side face (a facet of P crossed
    with the ray), and the one with the corner on the bottom face P x {0}.
    """
    if not P.bounded:
        raise InvalidInputError("the bounded factor must be a bounded polytope")
    ray = Polytope(dim=1, halfspaces=(HalfSpace(normal=(1,), offset=0),), bounded=False)
    P_prod = product(P, ray)
    phi_prod = guillemin(P_prod, scale)
    phi_base = guillemin(P, scale)
    phi_ray = guillemin(ray, scale)
    rng = np.random.default_rng(seed)
    add_max = side_max = bottom_max = 0.0
    n = P.dim
    for _ in range(samples):
        x1 = _random_interior(P, rng)
        x1b = _random_interior(P, rng)
        t1, t2 = rng.uniform(0.2, 3.0, size=2)
        joint = bregman(phi_prod, np.append(x1, t1), np.append(x1b, t2))
        split = bregman(phi_base, x1, x1b) + bregman(phi_ray, (t1,), (t2,))
        add_max = max(add_max, abs(joint - split))

        # corner on a side face: (eta, t1) with eta on a random facet of P
        facet = int(rng.integers(P.n_facets)) + 1
        chart = _face_chart_cached(P, (facet,))
        eta = _random_face_point(chart, rng)
        lhs = extended_divergence(phi_prod, np.append(eta.ambient_array, t1), np.append(x1, t2))
        rhs = extended_divergence(
            phi_prod, np.append(eta.ambient_array, t1), np.append(x1, t1)
        ) + bregman(phi_prod, np.append(x1, t1), np.append(x1, t2))
        side_max = max(side_max, abs(lhs - rhs))

        # corner on the bottom face: (x1, 0) against interior points
        lhs = extended_divergence(phi_prod, np.append(x1, 0.0), np.append(x1b, t2))
        rhs = extended_divergence(
            phi_prod, np.append(x1, 0.0), np.append(x1, t2)
        ) + bregman(phi_prod, np.append(x1, t2), np.append(x1b, t2))
        bottom_max = max(bottom_max, abs(lhs - rhs))
    return ProductBoundaryReport(
        samples=samples,
        additivity_max=add_max,
        side_face_max=side_max,
        bottom_face_max=bottom_max,
        tolerance_additivity=tolerance_additivity,
        tolerance_pythagoras=tolerance_pythagoras,
    )


@lru_cache(maxsize=64)
def _face_chart_cached(P, active):
    from .polytope import face_chart

    return face_chart(P, active)
