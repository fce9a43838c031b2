"""Convex polytopes in half-space form with exact lattice data.

A polytope is stored as the intersection of half-spaces
``l_r(xi) = xi . nu_r + lambda_r >= 0`` with primitive integer normals ``nu_r``
and exact rational offsets ``lambda_r``.  All combinatorial computations
(vertices, faces, Delzant validation) are exact; only metric evaluations
elsewhere in the package use floating point.

Facet indices are 1-based everywhere in the public API, matching the
numbering of the defining inequalities in input files.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import gcd

import numpy as np

from . import intlattice
from .errors import (
    EmptyFaceError,
    InconsistencyError,
    InvalidInputError,
    NonSmoothFaceError,
)


def as_fraction(value):
    """Coerce ints, strings like '3/4', and Fractions to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float) and value == int(value):
        return Fraction(int(value))
    raise InvalidInputError(f"offset {value!r} is not an exact rational")


@dataclass(frozen=True)
class HalfSpace:
    """One defining inequality xi . normal + offset >= 0."""

    normal: tuple[int, ...]
    offset: Fraction

    def __post_init__(self):
        if not self.normal or all(v == 0 for v in self.normal):
            raise InvalidInputError("half-space normal must be nonzero")
        if any(not isinstance(v, int) for v in self.normal):
            raise InvalidInputError("half-space normal must be integral")
        g = 0
        for v in self.normal:
            g = gcd(g, abs(v))
        if g != 1:
            raise InvalidInputError(f"normal {self.normal} is not primitive (gcd {g})")
        if not isinstance(self.offset, Fraction):
            object.__setattr__(self, "offset", as_fraction(self.offset))

    def value(self, point):
        """Exact facet value at a point with rational coordinates."""
        return sum(Fraction(x) * v for x, v in zip(point, self.normal)) + self.offset


def halfspace(normal, offset):
    return HalfSpace(tuple(int(v) for v in normal), as_fraction(offset))


@dataclass(frozen=True)
class Vertex:
    coords: tuple[Fraction, ...]
    active: tuple[int, ...]  # sorted, 1-based facet indices

    @cached_property
    def array(self):
        a = np.array([float(c) for c in self.coords])
        a.flags.writeable = False
        return a


@dataclass(frozen=True)
class Polytope:
    """Intersection of half-spaces; immutable after construction.

    ``bounded`` is a stored claim; it is verified lazily by ``vertices`` for
    bounded polytopes.  dim == 0 represents a single point (no half-spaces),
    which arises as a product factor.
    """

    dim: int
    halfspaces: tuple[HalfSpace, ...]
    bounded: bool = True

    def __post_init__(self):
        if self.dim < 0:
            raise InvalidInputError("dimension must be nonnegative")
        if self.dim == 0 and self.halfspaces:
            raise InvalidInputError("a 0-dimensional polytope has no half-spaces")
        for hs in self.halfspaces:
            if len(hs.normal) != self.dim:
                raise InvalidInputError(
                    f"normal {hs.normal} does not match dimension {self.dim}"
                )
        seen = set()
        for hs in self.halfspaces:
            key = (hs.normal, hs.offset)
            if key in seen:
                raise InvalidInputError(f"duplicate half-space {key}")
            seen.add(key)

    @property
    def n_facets(self):
        return len(self.halfspaces)

    @cached_property
    def normal_matrix(self):
        a = np.array([hs.normal for hs in self.halfspaces], dtype=float)
        a = a.reshape(self.n_facets, self.dim)
        a.flags.writeable = False
        return a

    @cached_property
    def offset_array(self):
        a = np.array([float(hs.offset) for hs in self.halfspaces])
        a.flags.writeable = False
        return a

    def facet_values(self, point):
        """Float facet values l_r at a point, in input order."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise InvalidInputError(f"point of length {point.shape} in dimension {self.dim}")
        if self.dim == 0:
            return np.zeros(0)
        return self.normal_matrix @ point + self.offset_array

    @cached_property
    def vertex_list(self):
        return _enumerate_vertices(self)

    @cached_property
    def centroid(self):
        """Mean of the vertices (exact); the Newton start point for bounded polytopes."""
        verts = self.vertex_list
        if not verts:
            raise InconsistencyError("polytope has no vertices")
        n = len(verts)
        return tuple(sum(v.coords[i] for v in verts) / n for i in range(self.dim))

    @cached_property
    def interior_point(self):
        """An exact strictly interior point (Fourier-Motzkin for unbounded polyhedra)."""
        if self.dim == 0:
            return ()
        if self.bounded:
            return self.centroid
        point = intlattice.strict_interior_point(
            [(hs.normal, hs.offset) for hs in self.halfspaces], self.dim
        )
        if point is None:
            raise InconsistencyError("polytope has empty interior")
        return point


def facet_value(P: Polytope, r: int, point) -> float:
    """Value of the r-th defining inequality (1-based) at a point."""
    if not 1 <= r <= P.n_facets:
        raise InvalidInputError(f"facet index {r} out of range 1..{P.n_facets}")
    point = np.asarray(point, dtype=float)
    if point.shape != (P.dim,):
        raise InvalidInputError(f"point has shape {point.shape}, expected ({P.dim},)")
    hs = P.halfspaces[r - 1]
    return float(np.dot(point, np.array(hs.normal, dtype=float)) + float(hs.offset))


def contains(P: Polytope, point, strict: bool = False) -> bool:
    """Membership test; strict requires every facet value positive."""
    if P.dim == 0:
        return len(point) == 0
    values = P.facet_values(point)
    return bool(np.all(values > 0)) if strict else bool(np.all(values >= 0))


def _recession_rays(P: Polytope):
    if P.dim == 0:
        return []
    return intlattice.cone_rays([hs.normal for hs in P.halfspaces], P.dim)


def is_bounded(P: Polytope) -> bool:
    """Exact boundedness of the feasible region (ignores the stored flag)."""
    return not _recession_rays(P)


def _enumerate_vertices(P: Polytope):
    if P.dim == 0:
        return (Vertex(coords=(), active=()),)
    if P.bounded and not is_bounded(P):
        raise InconsistencyError("polytope marked bounded but has a recession direction")
    n, N = P.dim, P.n_facets
    found = {}
    for subset in combinations(range(N), n):
        rows = [P.halfspaces[i].normal for i in subset]
        rhs = [-P.halfspaces[i].offset for i in subset]
        point = intlattice.solve_square(rows, rhs)
        if point is None:
            continue
        values = [hs.value(point) for hs in P.halfspaces]
        if any(v < 0 for v in values):
            continue
        if point not in found:
            active = tuple(i + 1 for i, v in enumerate(values) if v == 0)
            found[point] = Vertex(coords=point, active=active)
    if P.bounded and not found:
        raise InconsistencyError("bounded polytope without vertices (empty or degenerate)")
    return tuple(sorted(found.values(), key=lambda v: v.coords))


def vertices(P: Polytope):
    """All vertices, solved exactly; sorted by coordinates for determinism."""
    return P.vertex_list


@dataclass(frozen=True)
class DelzantFailure:
    vertex: tuple[Fraction, ...]
    active: tuple[int, ...]
    determinant: int | None  # None when the vertex is not simple

    def as_dict(self):
        return {
            "vertex": [str(c) for c in self.vertex],
            "active": list(self.active),
            "determinant": self.determinant,
        }


@dataclass(frozen=True)
class DelzantReport:
    simple: bool
    rational: bool
    smooth: bool
    partial: bool
    failures: tuple[DelzantFailure, ...]

    @property
    def valid(self):
        return self.simple and self.rational and self.smooth

    def as_dict(self):
        return {
            "simple": self.simple,
            "rational": self.rational,
            "smooth": self.smooth,
            "partial": self.partial,
            "valid": self.valid,
            "failures": [f.as_dict() for f in self.failures],
        }


def validate_delzant(P: Polytope) -> DelzantReport:
    """Check simplicity and lattice smoothness at every vertex.

    Smoothness is tested on the active facet normals (|det| = 1), which for a
    simple polytope is equivalent to the edge-vector lattice-basis condition.
    For unbounded polyhedra only the existing vertices are certified and the
    report is marked partial.
    """
    simple = True
    smooth = True
    failures = []
    for v in vertices(P):
        if len(v.active) != P.dim:
            simple = False
            smooth = False
            failures.append(DelzantFailure(v.coords, v.active, None))
            continue
        rows = [P.halfspaces[r - 1].normal for r in v.active]
        det = intlattice.determinant(rows)
        if abs(det) != 1:
            smooth = False
            failures.append(DelzantFailure(v.coords, v.active, int(det)))
    return DelzantReport(
        simple=simple,
        rational=True,  # integer normals by construction
        smooth=smooth,
        partial=not P.bounded,
        failures=tuple(failures),
    )


@dataclass(frozen=True)
class FaceChart:
    """Lattice-adapted affine parametrization of a face.

    Maps chart coordinates u in R^k to ambient points origin + basis @ u.
    The basis columns span the lattice directions of the face and extend to a
    Z-basis of the ambient lattice.
    """

    polytope: Polytope
    face_active: tuple[int, ...]  # sorted, 1-based
    origin: tuple[Fraction, ...]
    basis: tuple[tuple[int, ...], ...]  # k columns, each of length n
    dim_face: int

    @cached_property
    def basis_array(self):
        a = np.array([[float(col[i]) for col in self.basis] for i in range(self.polytope.dim)])
        a = a.reshape(self.polytope.dim, self.dim_face)
        a.flags.writeable = False
        return a

    @cached_property
    def origin_array(self):
        a = np.array([float(c) for c in self.origin])
        a.flags.writeable = False
        return a

    @cached_property
    def vanishing(self):
        """Facets identically zero on the face (includes face_active)."""
        out = set(self.face_active)
        for r, hs in enumerate(self.polytope.halfspaces, start=1):
            if r in out:
                continue
            pulled = [sum(c * v for c, v in zip(col, hs.normal)) for col in self.basis]
            if all(p == 0 for p in pulled) and hs.value(self.origin) == 0:
                out.add(r)
        return frozenset(out)

    def to_ambient(self, u):
        u = np.asarray(u, dtype=float)
        return self.origin_array + self.basis_array @ u

    def to_chart(self, point):
        """Chart coordinates of an ambient point on (or near) the face."""
        point = np.asarray(point, dtype=float)
        if self.dim_face == 0:
            return np.zeros(0)
        u, *_ = np.linalg.lstsq(self.basis_array, point - self.origin_array, rcond=None)
        return u


def face_chart(P: Polytope, active) -> FaceChart:
    """Chart for the face cut out by the given facet indices (1-based).

    The origin is a rational relative-interior point (the mean of the face's
    vertices when the face is bounded); the basis is the Hermite-canonical
    basis of the integer kernel of the active normals, so charts are
    deterministic.
    """
    active = tuple(sorted(set(int(r) for r in active)))
    for r in active:
        if not 1 <= r <= P.n_facets:
            raise InvalidInputError(f"facet index {r} out of range 1..{P.n_facets}")
    rows = [P.halfspaces[r - 1].normal for r in active]
    if rows and intlattice.rank(rows) != len(rows):
        raise EmptyFaceError("active facet normals are linearly dependent")
    k = P.dim - len(active)
    basis = intlattice.integer_kernel(rows, P.dim)
    if len(basis) != k:
        raise EmptyFaceError("active normals do not cut a face of the expected codimension")
    divisors = intlattice.snf_diagonal(basis, P.dim)
    if any(d != 1 for d in divisors):
        raise NonSmoothFaceError(
            f"face basis has elementary divisors {divisors}; lattice is not saturated"
        )
    origin = _face_origin(P, active, basis)
    return FaceChart(polytope=P, face_active=active, origin=origin, basis=tuple(basis), dim_face=k)


def _face_origin(P, active, basis):
    active_set = set(active)
    if not active:
        return P.interior_point
    face_vertices = [v for v in vertices(P) if active_set <= set(v.active)]
    # pulled-back inactive constraints, used both for the bounded test and FM
    pulled = []
    part = intlattice.solve_particular(
        [P.halfspaces[r - 1].normal for r in active],
        [-P.halfspaces[r - 1].offset for r in active],
    )
    if part is None:
        raise EmptyFaceError("active facet equations are inconsistent")
    for r, hs in enumerate(P.halfspaces, start=1):
        if r in active_set:
            continue
        coeffs = [sum(c * v for c, v in zip(col, hs.normal)) for col in basis]
        off = hs.value(part)
        if all(c == 0 for c in coeffs):
            if off < 0:
                raise EmptyFaceError(f"facet {r} excludes the face")
            continue  # constant positive or identically-zero facet
        pulled.append((coeffs, off))
    k = len(basis)
    face_bounded = not intlattice.cone_rays([c for c, _ in pulled], k) if k else True
    if face_bounded and face_vertices:
        m = len(face_vertices)
        return tuple(sum(v.coords[i] for v in face_vertices) / m for i in range(P.dim))
    u = intlattice.strict_interior_point(pulled, k)
    if u is None:
        raise EmptyFaceError("face has empty relative interior")
    return tuple(
        part[i] + sum(basis[j][i] * u[j] for j in range(k)) for i in range(P.dim)
    )


def _drop_redundant(constraints, k):
    """Remove constraints that do not cut the feasible region; exact."""
    kept = list(constraints)
    i = 0
    while i < len(kept):
        others = kept[:i] + kept[i + 1 :]
        if others and _is_redundant(kept[i], others, k):
            kept.pop(i)
        else:
            i += 1
    return kept


def _is_redundant(cons, others, k):
    coeffs, off = cons
    if k == 0:
        return off >= 0
    # minimum over the others-region: vertices plus recession rays
    normals = [c for c, _ in others]
    for ray in intlattice.cone_rays(normals, k):
        if sum(a * u for a, u in zip(coeffs, ray)) < 0:
            return False
    found_vertex = False
    for subset in combinations(range(len(others)), k):
        rows = [others[i][0] for i in subset]
        rhs = [-others[i][1] for i in subset]
        point = intlattice.solve_square(rows, rhs)
        if point is None:
            continue
        if any(sum(a * u for a, u in zip(c, point)) + o < 0 for c, o in others):
            continue
        found_vertex = True
        if sum(a * u for a, u in zip(coeffs, point)) + off < 0:
            return False
    if not found_vertex:
        # others-region has no vertex (e.g. no constraints): probe the cons itself
        probe = intlattice.strict_interior_point(
            [(tuple(-c for c in coeffs), -off)] + list(others), k
        )
        return probe is None
    return True


def restrict_polytope(P: Polytope, chart: FaceChart) -> Polytope:
    """The face as a polytope in chart coordinates.

    Inactive facets are pulled back through the chart, re-primitivized, and
    redundant constraints are dropped.
    """
    if chart.polytope is not P and chart.polytope != P:
        raise InvalidInputError("chart does not belong to this polytope")
    k = chart.dim_face
    pulled = []
    for r, hs in enumerate(P.halfspaces, start=1):
        if r in chart.vanishing:
            continue
        coeffs = tuple(sum(c * v for c, v in zip(col, hs.normal)) for col in chart.basis)
        off = hs.value(chart.origin)
        if all(c == 0 for c in coeffs):
            if off < 0:
                raise EmptyFaceError(f"facet {r} excludes the face")
            continue
        prim, g = intlattice.primitivize(coeffs)
        pulled.append((prim, off / g))
    # identical normals: keep the tightest offset
    tightest = {}
    for prim, off in pulled:
        if prim not in tightest or off < tightest[prim]:
            tightest[prim] = off
    unique = [(prim, off) for prim, off in tightest.items()]
    unique.sort(key=lambda c: (c[0], c[1]))
    kept = _drop_redundant(unique, k)
    halfspaces = tuple(HalfSpace(normal=prim, offset=off) for prim, off in kept)
    bounded = not intlattice.cone_rays([hs.normal for hs in halfspaces], k) if k else True
    return Polytope(dim=k, halfspaces=halfspaces, bounded=bounded)


def product(P1: Polytope, P2: Polytope) -> Polytope:
    """Cartesian product; normals are block-padded with zeros."""
    n1, n2 = P1.dim, P2.dim
    halfspaces = [
        HalfSpace(normal=hs.normal + (0,) * n2, offset=hs.offset) for hs in P1.halfspaces
    ] + [HalfSpace(normal=(0,) * n1 + hs.normal, offset=hs.offset) for hs in P2.halfspaces]
    return Polytope(dim=n1 + n2, halfspaces=tuple(halfspaces), bounded=P1.bounded and P2.bounded)
