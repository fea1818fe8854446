"""Fixed-point side of the magnification invariant.

Builds the fixed-point map f(z) = z - eta(z) + zeta, homogenizes it to a
degree-m self-map of projective 2-space, locates the fixed points on the
line at infinity with their multipliers, and certifies the decomposition
(affine index sum) + (infinity index sum) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import imaging
from .catalog import CatastropheModel, ModelId
from .errors import (DegenerateMultiplier, DegenerateSystem, Incomplete,
                     UnequalDegrees)
from .polycore import BiPoly, UniPoly, aberth_roots

MULTIPLIER_GUARD = 1e-10


@dataclass(frozen=True)
class FixedPointMap:
    """f(z) = z - eta(z) + zeta; Fix(f) is the image multiplet of eta at y."""

    f: tuple                 # pair of BiPoly
    model_id: ModelId
    m: int
    zeta: tuple
    eta: tuple
    degrees: tuple
    df: tuple                # ((df1/dz1, df1/dz2), (df2/dz1, df2/dz2))
    det_i_minus_df: BiPoly


@dataclass(frozen=True)
class HomPoly:
    """Homogeneous trivariate polynomial: terms maps (e0, e1, e2) -> coeff."""

    terms: tuple
    degree: int

    @classmethod
    def from_dict(cls, d, degree):
        items = tuple(sorted((k, complex(c)) for k, c in d.items() if c != 0))
        for (e0, e1, e2), _ in items:
            if e0 + e1 + e2 != degree:
                raise ValueError("non-homogeneous term")
        return cls(items, degree)

    def __call__(self, z0, z1, z2):
        acc = 0j
        for (e0, e1, e2), c in self.terms:
            acc += c * z0**e0 * z1**e1 * z2**e2
        return acc

    def restrict_affine(self) -> BiPoly:
        """Set Z0 = 1; a bivariate polynomial in (z1, z2)."""
        out = {}
        for (_, e1, e2), c in self.terms:
            out[(e1, e2)] = out.get((e1, e2), 0j) + c
        return BiPoly(out)

    def restrict_infinity(self) -> "BinForm":
        """Set Z0 = 0; a binary form in (Z1, Z2) of the same degree."""
        cs = [0j] * (self.degree + 1)
        for (e0, e1, e2), c in self.terms:
            if e0 == 0:
                cs[e2] += c
        return BinForm(tuple(cs), self.degree)


@dataclass(frozen=True)
class BinForm:
    """Binary form of fixed degree; coeffs[j] multiplies Z1**(deg-j) * Z2**j."""

    coeffs: tuple
    degree: int

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __call__(self, z1, z2):
        acc = 0j
        for j, c in enumerate(self.coeffs):
            acc += c * z1 ** (self.degree - j) * z2**j
        return acc

    def dehom_u(self) -> UniPoly:
        """At Z1 = 1, in the chart coordinate u = Z2/Z1."""
        return UniPoly(self.coeffs)

    def dehom_v(self) -> UniPoly:
        """At Z2 = 1, in the chart coordinate v = Z1/Z2."""
        return UniPoly(tuple(reversed(self.coeffs)))


@dataclass(frozen=True)
class ProjectiveMap:
    components: tuple        # (F0, F1, F2) HomPoly of common degree m
    m: int
    equal_degrees: bool


@dataclass(frozen=True)
class InfinityFixedPoint:
    point: tuple             # projective pair (Z1, Z2), max-modulus coordinate 1
    multiplier: complex
    index: complex


@dataclass(frozen=True)
class LefschetzReport:
    affine_sum: complex
    infinity_sum: complex
    total: complex
    expected: float
    infinity_points: tuple
    n_images: int


def fixed_point_map(model: CatastropheModel, zeta=None) -> FixedPointMap:
    """The map whose fixed points are exactly the solutions of eta(z) = y.

    zeta defaults to the model's real source pair; a complex pair may be
    passed for exploratory use.  The identity det(I - Df) = det J_eta is
    checked at the coefficient level on construction.
    """
    if zeta is None:
        zeta = (complex(model.params.y[0]), complex(model.params.y[1]))
    z1 = BiPoly.monomial(1, 0)
    z2 = BiPoly.monomial(0, 1)
    f1 = z1 - model.eta[0] + zeta[0]
    f2 = z2 - model.eta[1] + zeta[1]
    df = ((f1.partial(0), f1.partial(1)), (f2.partial(0), f2.partial(1)))
    one = BiPoly.constant(1.0)
    det = (one - df[0][0]) * (one - df[1][1]) - df[0][1] * df[1][0]
    if not det.allclose(model.det_jac, tol=1e-13):
        raise AssertionError("det(I - Df) != det J_eta at coefficient level")
    return FixedPointMap(
        f=(f1, f2),
        model_id=model.id,
        m=model.m,
        zeta=(complex(zeta[0]), complex(zeta[1])),
        eta=model.eta,
        degrees=model.degrees,
        df=df,
        det_i_minus_df=det,
    )


def affine_lefschetz_sum(fm: FixedPointMap, ss: imaging.SolutionSet) -> complex:
    """Sum of 1/det(I - Df) over the affine fixed points, computed from the
    derivative matrix of f itself; cross-checked against the magnification
    sum from imaging."""
    if not ss.complete:
        raise Incomplete("affine Lefschetz sum needs a complete solution set")
    total = 0j
    for s in ss.solutions:
        w1, w2 = s.position
        a = fm.df[0][0](w1, w2)
        b = fm.df[0][1](w1, w2)
        c = fm.df[1][0](w1, w2)
        d = fm.df[1][1](w1, w2)
        det = (1.0 - a) * (1.0 - d) - b * c
        total += 1.0 / det
    if abs(total - ss.sum_all) > 1e-10:
        raise AssertionError(
            f"affine Lefschetz sum {total} disagrees with magnification sum {ss.sum_all}")
    return total


def homogenize(fm: FixedPointMap) -> ProjectiveMap:
    """Degree-m extension of f to projective 2-space, F0 = Z0**m."""
    m = fm.m
    f0 = HomPoly.from_dict({(m, 0, 0): 1.0}, m)
    comps = [f0]
    for k in (0, 1):
        d = {}
        # Z_k * Z0^(m-1)
        key = (m - 1, 1, 0) if k == 0 else (m - 1, 0, 1)
        d[key] = d.get(key, 0j) + 1.0
        # - Z0^(m - deg eta_k) * homogenized eta_k
        for (i, j), c in fm.eta[k].terms.items():
            key = (m - i - j, i, j)
            d[key] = d.get(key, 0j) - c
        # + zeta_k * Z0^m
        key = (m, 0, 0)
        d[key] = d.get(key, 0j) + fm.zeta[k]
        comps.append(HomPoly.from_dict(d, m))
    equal = fm.degrees[0] == fm.degrees[1] == m
    return ProjectiveMap(components=tuple(comps), m=m, equal_degrees=equal)


def _binform_projective_zeros(form: BinForm, tol=1e-9):
    """Projective zeros of a binary form, as (Z1, Z2) pairs normalized to
    max-modulus coordinate 1; includes (0, 1) when the degree drops."""
    ru = form.dehom_u()
    zeros = []
    if ru.degree >= 1 and not ru.is_zero:
        for cl in aberth_roots(ru, tol=1e-12, max_iter=400):
            zeros.append(_normalize_pair((1.0, cl.value)))
    if ru.degree < form.degree or ru.is_zero:
        zeros.append((0j, 1.0 + 0j))
    return zeros


def _normalize_pair(pair):
    a, b = complex(pair[0]), complex(pair[1])
    div = a if abs(a) >= abs(b) else b
    return (a / div, b / div)


def indeterminacy_points(pm: ProjectiveMap, tol: float = 1e-9):
    """Points on the infinity line where all three components vanish.

    Empty for equal-degree maps at generic parameters; the unequal-degree
    maps always carry one such point."""
    a = pm.components[1].restrict_infinity()
    b = pm.components[2].restrict_infinity()
    if a.is_zero and b.is_zero:
        raise DegenerateSystem("both components vanish on the infinity line")
    if a.is_zero:
        return _binform_projective_zeros(b)
    if b.is_zero:
        return _binform_projective_zeros(a)
    scale_b = max(abs(c) for c in b.coeffs)
    pts = []
    for z1, z2 in _binform_projective_zeros(a):
        if abs(b(z1, z2)) <= tol * scale_b:
            pts.append((z1, z2))
    return pts


def _multiplier_at(a: BinForm, b: BinForm, point) -> complex:
    """Chart derivative of the induced sphere map at a fixed point; the chart
    is picked by the larger denominator modulus."""
    z1, z2 = point
    if abs(z1) >= abs(z2):
        u = z2 / z1
        num, den = b.dehom_u(), a.dehom_u()
    else:
        u = z1 / z2
        num, den = a.dehom_v(), b.dehom_v()
    nv, ndv = num.eval_with_deriv(u)
    dv, ddv = den.eval_with_deriv(u)
    return (ndv * dv - nv * ddv) / (dv * dv)


def infinity_fixed_points(pm: ProjectiveMap, tol: float = MULTIPLIER_GUARD):
    """Fixed points of the induced degree-m map on the line at infinity.

    Solves the binary form Z2*F1 - Z1*F2 restricted to Z0 = 0 (degree m+1)
    and attaches the chart multiplier and index 1/(1 - lambda) to each point.
    """
    if not pm.equal_degrees:
        raise UnequalDegrees(
            "infinity analysis requires deg(eta1) = deg(eta2)",
            indeterminacy=indeterminacy_points(pm))
    indet = indeterminacy_points(pm)
    if indet:
        raise DegenerateSystem(f"indeterminacy on the infinity line: {indet}")
    a = pm.components[1].restrict_infinity()
    b = pm.components[2].restrict_infinity()
    m = pm.m
    # R = Z2*A - Z1*B, a binary form of degree m+1
    rc = [0j] * (m + 2)
    for j, c in enumerate(a.coeffs):
        rc[j + 1] += c
    for j, c in enumerate(b.coeffs):
        rc[j] -= c
    rform = BinForm(tuple(rc), m + 1)
    ru = rform.dehom_u()
    if ru.is_zero:
        raise DegenerateSystem("fixed-point form vanishes identically")
    points = []
    for cl in aberth_roots(ru, tol=1e-12, max_iter=400):
        points.append(_normalize_pair((1.0, cl.value)))
    if ru.degree < m + 1:
        points.append((0j, 1.0 + 0j))
    out = []
    for pt in points:
        lam = _multiplier_at(a, b, pt)
        if abs(1.0 - lam) <= tol:
            raise DegenerateMultiplier(f"multiplier 1 at infinity point {pt}")
        out.append(InfinityFixedPoint(point=pt, multiplier=lam, index=1.0 / (1.0 - lam)))
    return out


def lefschetz_total(model: CatastropheModel) -> LefschetzReport:
    """Certify affine + infinity = 1 for an equal-degree model."""
    fm = fixed_point_map(model)
    pm = homogenize(fm)
    if not pm.equal_degrees:
        raise UnequalDegrees(
            f"{model.id.value} has component degrees {model.degrees}",
            indeterminacy=indeterminacy_points(pm))
    ss = imaging.solve_images(model)
    affine = affine_lefschetz_sum(fm, ss)
    inf_pts = infinity_fixed_points(pm)
    inf_sum = sum((p.index for p in inf_pts), 0j)
    return LefschetzReport(
        affine_sum=affine,
        infinity_sum=inf_sum,
        total=affine + inf_sum,
        expected=1.0,
        infinity_points=tuple(inf_pts),
        n_images=len(ss.solutions),
    )


def rational_fixed_point_check(g: UniPoly, tol: float = MULTIPLIER_GUARD) -> complex:
    """Index sum over all fixed points of the polynomial sphere map u -> g(u).

    For deg g >= 2 the chart-boundary point is always fixed and
    superattracting (multiplier 0, index 1); the returned sum equals 1 for
    simple fixed points.
    """
    m = g.degree
    if m < 2:
        raise ValueError("map degree must be >= 2")
    fixc = list(g.coeffs)
    fixc[1] -= 1.0
    pfix = UniPoly(tuple(fixc))
    dg = g.deriv()
    total = 1.0 + 0j  # index of the superattracting point at infinity
    for cl in aberth_roots(pfix, tol=1e-12, max_iter=400):
        lam = dg(cl.value)
        if abs(1.0 - lam) <= tol:
            raise DegenerateMultiplier(f"multiplier 1 at fixed point {cl.value}")
        total += cl.multiplicity_estimate / (1.0 - lam)
    return total
