"""Legendre duality, Bregman divergence and geodesics of a Hesse structure.

The polytope coordinate x and its image y = grad phi(x) form a pair of dual
affine coordinates.  Divergences are computed in the cancellation-safe
three-term form D(xi||xi') = phi(xi) - phi(xi') - (xi - xi') . grad phi(xi');
the dual potential exists for identity testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DomainError,
    InvalidInputError,
    NoSolutionError,
    NumericalError,
)
from .polytope import Polytope
from .potential import SymplecticPotential

NEWTON_TOL = 1e-10
NEWTON_MARGIN = 1e-15
NEWTON_MAX_ITER = 200


@dataclass(frozen=True)
class DualPair:
    """A point in both coordinate systems: x in the polytope, y = grad phi(x)."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))

    @cached_property
    def x_array(self):
        a = np.array(self.x)
        a.flags.writeable = False
        return a

    @cached_property
    def y_array(self):
        a = np.array(self.y)
        a.flags.writeable = False
        return a


@dataclass(frozen=True)
class GeodesicSpec:
    kind: str  # "flat" (straight in x) or "dual" (straight in y)
    start: tuple[float, ...]
    direction: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("flat", "dual"):
            raise InvalidInputError(f"geodesic kind {self.kind!r} must be 'flat' or 'dual'")
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "direction", tuple(float(v) for v in self.direction))
        if all(v == 0 for v in self.direction):
            raise InvalidInputError("geodesic direction must be nonzero")


def to_dual(phi: SymplecticPotential, xi) -> DualPair:
    """Pair an interior point with its dual coordinate grad phi(xi)."""
    xi = np.asarray(xi, dtype=float)
    return DualPair(x=tuple(xi), y=tuple(phi.gradient(xi)))


def _newton_start(P: Polytope):
    if P.bounded:
        return np.array([float(c) for c in P.centroid])
    return np.array([float(c) for c in P.interior_point])


def _newton_inverse(phi, P, y_target, x0=None, margin=NEWTON_MARGIN, tol=NEWTON_TOL,
                    max_iter=NEWTON_MAX_ITER):
    """Damped Newton solve of grad phi(x) = y_target.

    Iterates are kept strictly inside P (facet margin >= `margin`) by step
    halving, and a step is only accepted if it decreases the residual.
    Returns (x, residual, status) with status one of "converged", "stalled",
    "diverged", "maxiter".
    """
    y_target = np.asarray(y_target, dtype=float)
    x = np.asarray(x0, dtype=float) if x0 is not None else _newton_start(P)
    residual = phi.gradient(x) - y_target
    res_norm = float(np.max(np.abs(residual)))
    for _ in range(max_iter):
        if res_norm <= tol:
            return x, res_norm, "converged"
        try:
            step = np.linalg.solve(phi.hessian(x), -residual)
        except np.linalg.LinAlgError:
            return x, res_norm, "stalled"
        alpha = 1.0
        accepted = False
        for _ in range(60):
            cand = x + alpha * step
            if np.min(P.facet_values(cand), initial=np.inf) >= margin:
                try:
                    cand_res = phi.gradient(cand) - y_target
                except DomainError:
                    cand_res = None
                if cand_res is not None:
                    cand_norm = float(np.max(np.abs(cand_res)))
                    if cand_norm < res_norm:
                        x, residual, res_norm = cand, cand_res, cand_norm
                        accepted = True
                        break
            alpha *= 0.5
        if not accepted:
            return x, res_norm, "stalled"
        if np.max(np.abs(x)) > 1e12:
            return x, res_norm, "diverged"
    return x, res_norm, "maxiter"


def from_dual(phi: SymplecticPotential, P: Polytope, y, x0=None) -> DualPair:
    """Invert the gradient map: the point x with grad phi(x) = y.

    Starts from the vertex centroid (or an exact interior point for unbounded
    polyhedra) and converges to infinity-norm residual <= 1e-10.
    """
    y = np.asarray(y, dtype=float)
    x, res, status = _newton_inverse(phi, P, y, x0=x0)
    if status == "converged":
        return DualPair(x=tuple(x), y=tuple(y))
    if not P.bounded and (
        status == "diverged"
        or (status == "stalled" and float(np.min(P.facet_values(x))) <= 10 * NEWTON_MARGIN)
    ):
        raise NoSolutionError(
            f"dual coordinate {y.tolist()} is not attained by the gradient map "
            f"(iterate escaped toward the boundary or infinity)",
            residual=res,
        )
    raise NumericalError(
        f"gradient-map inversion did not converge ({status}) with residual {res:.3e}",
        residual=res,
    )


def dual_potential(phi: SymplecticPotential, xi) -> float:
    """Legendre dual psi at y(xi): -phi(xi) + xi . grad phi(xi)."""
    xi = np.asarray(xi, dtype=float)
    return float(-phi.value(xi) + xi @ phi.gradient(xi))


def bregman(phi: SymplecticPotential, xi, xi2) -> float:
    """Bregman divergence D(xi || xi2) of the potential; nonnegative."""
    xi = np.asarray(xi, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    return float(phi.value(xi) - phi.value(xi2) - (xi - xi2) @ phi.gradient(xi2))


def _match_facet_terms(phi: SymplecticPotential, P: Polytope):
    """Indices pairing each facet of P with a weight-1 log term of phi, or None."""
    if len(phi.log_terms) != P.n_facets:
        return None
    used = set()
    pairing = []
    for hs in P.halfspaces:
        normal = tuple(float(v) for v in hs.normal)
        offset = float(hs.offset)
        found = None
        for idx, term in enumerate(phi.log_terms):
            if idx in used:
                continue
            if (
                term.weight == 1.0
                and max(abs(a - b) for a, b in zip(term.normal, normal)) <= 1e-12
                and abs(term.offset - offset) <= 1e-12
            ):
                found = idx
                break
        if found is None:
            return None
        used.add(found)
        pairing.append(found)
    return pairing


def bregman_expanded(phi: SymplecticPotential, P: Polytope, xi, xi2) -> float:
    """Divergence via the facet-wise expansion

        s * sum_r ( l_r(xi) log(l_r(xi)/l_r(xi2)) - (xi - xi2) . nu_r )
          + (xi2 - xi) . grad f(xi2) + f(xi) - f(xi2)

    valid when the log terms of phi are exactly the facets of P with unit
    weights (plus the polynomial correction f).
    """
    if _match_facet_terms(phi, P) is None:
        raise InvalidInputError(
            "potential does not decompose over the facets of this polytope"
        )
    xi = np.asarray(xi, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    l1 = P.facet_values(xi)
    l2 = P.facet_values(xi2)
    if np.any(l1 <= 0) or np.any(l2 <= 0):
        raise DomainError("both points must be interior")
    diff = xi - xi2
    total = float(np.sum(l1 * np.log(l1 / l2) - P.normal_matrix @ diff))
    f = phi.correction
    return phi.scale * total + float(-diff @ f.gradient(xi2)) + f(xi) - f(xi2)


def cosine_residual(phi: SymplecticPotential, p, q, r) -> float:
    """The three-point combination D(p||q) + D(q||r) - D(p||r) as a pairing.

    Returns (x_p - x_q) . (y_r - y_q) and verifies it agrees with the
    divergence combination to 1e-9; a mismatch raises NumericalError.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    pairing = float((p - q) @ (phi.gradient(r) - phi.gradient(q)))
    combo = bregman(phi, p, q) + bregman(phi, q, r) - bregman(phi, p, r)
    if abs(pairing - combo) > 1e-9:
        raise NumericalError(
            f"pairing {pairing:.12e} and divergence combination {combo:.12e} disagree",
            residual=abs(pairing - combo),
        )
    return pairing


def metric_pair(phi: SymplecticPotential, xi):
    """The Hesse metric block G = Hess phi and its inverse at an interior point."""
    G = phi.hessian(xi)
    try:
        G_inv = np.linalg.inv(G)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hessian is singular at {np.asarray(xi).tolist()}") from exc
    defect = float(np.max(np.abs(G @ G_inv - np.eye(G.shape[0]))))
    if defect > 1e-10:
        raise NumericalError(f"Hessian inversion defect {defect:.3e} exceeds 1e-10")
    return G, G_inv


def flat_exit_time(P: Polytope, start, direction) -> float:
    """Smallest t > 0 at which start + t*direction leaves P (inf if never)."""
    start = np.asarray(start, dtype=float)
    direction = np.asarray(direction, dtype=float)
    rates = P.normal_matrix @ direction
    vals = P.facet_values(start)
    with np.errstate(divide="ignore"):
        ts = np.where(rates < 0, vals / -rates, np.inf)
    return float(np.min(ts, initial=np.inf))


def geodesic_point(phi: SymplecticPotential, P: Polytope, spec: GeodesicSpec, t: float):
    """Point at time t: straight in x for flat geodesics, straight in y for dual."""
    start = np.array(spec.start)
    direction = np.array(spec.direction)
    if spec.kind == "flat":
        point = start + t * direction
        if np.min(P.facet_values(point), initial=np.inf) <= 0:
            exit_t = flat_exit_time(P, start, direction)
            raise DomainError(f"flat geodesic leaves the polytope at t = {exit_t:.12g}")
        return point
    y0 = phi.gradient(start)
    return from_dual(phi, P, y0 + t * direction).x_array


@dataclass(frozen=True)
class GeodesicLimit:
    point: tuple[float, ...]
    face: tuple[int, ...]  # 1-based facet indices active at the limit
    t_converged: float
    steps: int

    def as_dict(self):
        return {
            "point": list(self.point),
            "face": list(self.face),
            "t_converged": self.t_converged,
            "steps": self.steps,
        }


FACE_CLASSIFY_TOL = 1e-8
LIMIT_DIFF_TOL = 1e-12
DIRECTION_TIE_TOL = 1e-12


def _snap_ties(direction, tol=DIRECTION_TIE_TOL):
    """Merge direction components that agree within tol.

    A tie in the direction components steers the geodesic into a
    higher-dimensional face; gaps below tol cannot be resolved within the
    time schedule, so they are treated as exact ties.
    """
    direction = np.array(direction, dtype=float)
    order = np.argsort(direction)
    snapped = direction.copy()
    group_start = 0
    for i in range(1, len(order) + 1):
        if i == len(order) or snapped[order[i]] - snapped[order[i - 1]] > tol:
            value = snapped[order[group_start]]
            snapped[order[group_start:i]] = value
            group_start = i
    return snapped


def dual_geodesic_limit(phi: SymplecticPotential, P: Polytope, spec: GeodesicSpec) -> GeodesicLimit:
    """Limit point of a dual geodesic as t -> infinity, with its face.

    Follows the geodesic along t = 1, 2, 4, ..., 2^20 until two consecutive
    points differ by less than 1e-12 in the infinity norm.  Near the boundary
    the gradient inversion saturates at the interior margin, which is accepted
    as a best-effort evaluation; a Richardson step in u = e^(-ct) (the decay
    variable of the approach) then refines the estimate, and the result is
    projected onto the affine hull of the face found by thresholding facet
    values at 1e-8.
    """
    if spec.kind != "dual":
        raise InvalidInputError("limits are defined for dual geodesics")
    if not P.bounded:
        raise InvalidInputError("dual geodesic limits require a bounded polytope")
    start = np.array(spec.start)
    direction = _snap_ties(spec.direction)
    y0 = phi.gradient(start)
    trace = [(0.0, start)]
    prev = start
    small_diffs = 0
    x_guess = start
    for k in range(21):
        t = float(2**k)
        x_guess, _, _ = _newton_inverse(phi, P, y0 + t * direction, x0=x_guess)
        trace.append((t, x_guess))
        diff = float(np.max(np.abs(x_guess - prev)))
        prev = x_guess
        small_diffs = small_diffs + 1 if diff < LIMIT_DIFF_TOL else 0
        if small_diffs >= 2:
            break
    else:
        raise NumericalError(
            "dual geodesic did not settle within the time schedule",
            trace=[(t, x.tolist()) for t, x in trace],
        )
    point = _richardson_refine([x for _, x in trace[-4:]])
    active = tuple(
        r for r, v in enumerate(P.facet_values(point), start=1) if v < FACE_CLASSIFY_TOL
    )
    # a genuine limit face has the direction constant along it (the direction
    # lies in the span of its normals); otherwise the geodesic is still
    # drifting too slowly for the schedule to resolve
    if active:
        A = np.array([P.halfspaces[r - 1].normal for r in active], dtype=float)
        coeffs, *_ = np.linalg.lstsq(A.T, direction, rcond=None)
        tangential = direction - A.T @ coeffs
        if float(np.max(np.abs(tangential))) > 1e-10 * max(
            float(np.max(np.abs(direction))), 1.0
        ):
            raise NumericalError(
                "direction drifts along the limiting face too slowly to resolve "
                "within the time schedule",
                trace=[(t, x.tolist()) for t, x in trace],
            )
    point = _snap_to_face(P, point, active)
    return GeodesicLimit(
        point=tuple(float(v) for v in point),
        face=active,
        t_converged=trace[-1][0],
        steps=len(trace) - 1,
    )


def _richardson_refine(points):
    """One extrapolation step for x(t) = x* + C u with u squaring each step."""
    if len(points) < 3:
        return points[-1]
    x1, x2, x3 = points[-3], points[-2], points[-1]
    d1 = x2 - x1
    d2 = x3 - x2
    n1 = float(np.max(np.abs(d1)))
    n2 = float(np.max(np.abs(d2)))
    if n1 < 1e-13 or n2 < 1e-300:
        return x3  # already at float saturation
    lead = int(np.argmax(np.abs(d1)))
    u = d2[lead] / d1[lead]
    if not 0.0 < u < 0.5:
        return x3
    return x3 + d2 * u**2 / (1.0 - u**2)


def _snap_to_face(P, point, active):
    if not active:
        return point
    A = np.array([P.halfspaces[r - 1].normal for r in active], dtype=float)
    offs = np.array([float(P.halfspaces[r - 1].offset) for r in active])
    res = A @ point + offs
    correction, *_ = np.linalg.lstsq(A, res, rcond=None)
    return point - correction
