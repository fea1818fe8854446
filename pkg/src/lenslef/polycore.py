"""Complex polynomial arithmetic and root finding.

Dense univariate polynomials, sparse bivariate polynomials, Aberth-Ehrlich
simultaneous root iteration with multiplicity-aware clustering, 2-d Newton
refinement, and Sylvester resultants computed by evaluation at unit roots
followed by interpolation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSystem, NonConvergence, SingularJacobian

DEFAULT_ROOT_TOL = 1e-12
DEFAULT_NEWTON_TOL = 1e-13
SINGULAR_GUARD = 1e-10
CLUSTER_RADIUS = 1e-6
ABERTH_SEED = 12358
# golden angle: offsets on the initial circle never coincide for small degrees
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class UniPoly:
    """Dense univariate polynomial; coeffs[k] multiplies z**k."""

    coeffs: tuple

    def __post_init__(self):
        cs = [complex(c) for c in self.coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [0j]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def max_coeff(self) -> float:
        return max(abs(c) for c in self.coeffs)

    def __call__(self, z: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def eval_with_deriv(self, z: complex):
        p = self.coeffs[-1]
        dp = 0j
        for c in reversed(self.coeffs[:-1]):
            dp = dp * z + p
            p = p * z + c
        return p, dp

    def eval_full(self, z: complex):
        """Value, derivative, and the rounding-floor scale sum |c_k| |z|^k."""
        p = self.coeffs[-1]
        dp = 0j
        az = abs(z)
        s = abs(p)
        for c in reversed(self.coeffs[:-1]):
            dp = dp * z + p
            p = p * z + c
            s = s * az + abs(c)
        return p, dp, s

    def deriv(self) -> "UniPoly":
        if self.degree == 0:
            return UniPoly((0j,))
        return UniPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def __neg__(self):
        return UniPoly(tuple(-c for c in self.coeffs))

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = UniPoly((other,))
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0j] * (n - len(other.coeffs))
        return UniPoly(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = UniPoly((other,))
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return UniPoly(tuple(other * c for c in self.coeffs))
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = UniPoly((1.0,))
        for _ in range(n):
            out = out * self
        return out

    def allclose(self, other: "UniPoly", tol: float = 1e-12) -> bool:
        scale = max(self.max_coeff(), other.max_coeff(), 1.0)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0j] * (n - len(other.coeffs))
        return all(abs(x - y) <= tol * scale for x, y in zip(a, b))


class BiPoly:
    """Sparse bivariate polynomial over the complex numbers.

    terms maps (i, j) to the coefficient of z1**i * z2**j; zero coefficients
    are never stored.  Axis 0 is z1, axis 1 is z2.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        t = {}
        if terms:
            for (i, j), c in terms.items():
                c = complex(c)
                if c != 0:
                    t[(int(i), int(j))] = c
        self.terms = t

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i, j, c=1.0):
        return cls({(i, j): c})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(i + j for i, j in self.terms)

    def degree_in(self, axis: int) -> int:
        if not self.terms:
            return 0
        return max(k[axis] for k in self.terms)

    def __call__(self, z1, z2):
        acc = 0j
        for (i, j), c in self.terms.items():
            acc += c * z1**i * z2**j
        return acc

    def partial(self, axis: int) -> "BiPoly":
        out = {}
        for (i, j), c in self.terms.items():
            e = (i, j)[axis]
            if e == 0:
                continue
            key = (i - 1, j) if axis == 0 else (i, j - 1)
            out[key] = out.get(key, 0j) + e * c
        return BiPoly(out)

    def __neg__(self):
        return BiPoly({k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = BiPoly.constant(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0j) + c
        return BiPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = BiPoly.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return BiPoly({k: other * c for k, c in self.terms.items()})
        out = {}
        for (i1, j1), a in self.terms.items():
            for (i2, j2), b in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0j) + a * b
        return BiPoly(out)

    __rmul__ = __mul__

    def subs(self, axis: int, value) -> UniPoly:
        """Substitute a constant for one variable; returns a UniPoly in the other."""
        deg = self.degree_in(1 - axis)
        out = [0j] * (deg + 1)
        for (i, j), c in self.terms.items():
            fixed, free = (i, j) if axis == 0 else (j, i)
            out[free] += c * value**fixed
        return UniPoly(tuple(out))

    def coeff_unipolys(self, axis: int):
        """Coefficients wrt the given axis, each a UniPoly in the other variable."""
        d = self.degree_in(axis)
        rows = [dict() for _ in range(d + 1)]
        for (i, j), c in self.terms.items():
            power, other = (i, j) if axis == 0 else (j, i)
            rows[power][other] = c
        out = []
        for row in rows:
            deg = max(row) if row else 0
            out.append(UniPoly(tuple(row.get(k, 0j) for k in range(deg + 1))))
        return out

    def as_unipoly(self, axis: int) -> UniPoly:
        """View as univariate in the given axis; other axis must not occur."""
        if self.degree_in(1 - axis) != 0:
            raise ValueError("polynomial involves both variables")
        deg = self.degree_in(axis)
        out = [0j] * (deg + 1)
        for (i, j), c in self.terms.items():
            out[(i, j)[axis]] += c
        return UniPoly(tuple(out))

    def top_form(self) -> dict:
        """Terms of total degree equal to total_degree (the homogeneous top)."""
        d = self.total_degree
        return {k: c for k, c in self.terms.items() if k[0] + k[1] == d}

    def max_coeff(self) -> float:
        if not self.terms:
            return 0.0
        return max(abs(c) for c in self.terms.values())

    def allclose(self, other: "BiPoly", tol: float = 1e-12) -> bool:
        scale = max(self.max_coeff(), other.max_coeff(), 1.0)
        keys = set(self.terms) | set(other.terms)
        return all(
            abs(self.terms.get(k, 0j) - other.terms.get(k, 0j)) <= tol * scale
            for k in keys
        )

    def __repr__(self):
        if not self.terms:
            return "BiPoly(0)"
        parts = [
            f"({c.real:+g}{c.imag:+g}j)*z1^{i}*z2^{j}"
            for (i, j), c in sorted(self.terms.items())
        ]
        return "BiPoly(" + " ".join(parts) + ")"


@dataclass(frozen=True)
class RootCluster:
    """A root of a univariate polynomial with estimated multiplicity."""

    value: complex
    multiplicity_estimate: int
    radius: float
    residual: float


def _polish_on_derivative(derivs, z0, k, max_iter=60):
    """Newton-refine a k-fold cluster center as a simple root of p^(k-1)."""
    q, dq = derivs[k - 1], derivs[k]
    w = z0
    for _ in range(max_iter):
        dv = dq(w)
        if dv == 0:
            break
        step = q(w) / dv
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


def aberth_roots(p: UniPoly, tol: float = DEFAULT_ROOT_TOL, max_iter: int = 200,
                 seed: int = ABERTH_SEED):
    """All complex roots of p by simultaneous Aberth-Ehrlich iteration.

    Returns RootClusters whose multiplicities sum to deg(p); every cluster
    value satisfies |p(value)| <= tol * (1 + max|coeff|).  Deterministic for
    a fixed seed (the seed only places the initial circle).
    """
    n = p.degree
    if n < 1 or p.coeffs[-1] == 0:
        raise ValueError("aberth_roots requires degree >= 1 with nonzero leading coefficient")
    scale = p.max_coeff()
    pn = UniPoly(tuple(c / scale for c in p.coeffs))

    if n == 1:
        r = -pn.coeffs[0] / pn.coeffs[1]
        r = _polish_on_derivative([pn, pn.deriv()], r, 1)
        return [RootCluster(r, 1, 0.0, abs(pn(r)) * scale)]

    lead = abs(pn.coeffs[-1])
    cauchy = 1.0 + max(abs(c) for c in pn.coeffs[:-1]) / lead
    rng = np.random.default_rng(seed)
    theta0 = rng.uniform(0.0, 2.0 * math.pi)
    z = [cauchy * cmath.exp(1j * (theta0 + GOLDEN_ANGLE * k)) for k in range(n)]

    # stop each approximant at the residual contract or, for large-modulus
    # roots, at the Horner rounding floor
    eps = 2.220446049250313e-16
    thresh = tol * (1.0 + scale) / scale

    def _settled(pv, s):
        return abs(pv) <= max(thresh, 8.0 * eps * s)

    for it in range(max_iter):
        done = True
        for k in range(n):
            pv, dv, serr = pn.eval_full(z[k])
            if _settled(pv, serr):
                continue
            done = False
            if dv == 0:
                z[k] += 1e-6 * (1.0 + abs(z[k])) * cmath.exp(1j * GOLDEN_ANGLE * (k + it + 1))
                continue
            ratio = pv / dv
            s = 0j
            for j in range(n):
                if j == k:
                    continue
                dz = z[k] - z[j]
                if dz == 0:
                    dz = 1e-12 * (1.0 + abs(z[k]))
                s += 1.0 / dz
            denom = 1.0 - ratio * s
            z[k] -= ratio if denom == 0 else ratio / denom
        if done:
            break
    else:
        worst = 0.0
        bad = False
        for zk in z:
            pv, _, serr = pn.eval_full(zk)
            worst = max(worst, abs(pv))
            bad = bad or not _settled(pv, serr)
        if bad:
            raise NonConvergence(max_iter, worst)

    # derivative-chain is used to polish k-fold cluster centers on p^(k-1)
    derivs = [pn]
    for _ in range(n):
        derivs.append(derivs[-1].deriv())

    # stage 1: merge approximants within the base cluster radius
    groups = []
    for w in sorted(z, key=lambda v: (v.real, v.imag)):
        for g in groups:
            cmean = sum(g) / len(g)
            if abs(w - cmean) <= CLUSTER_RADIUS * (1.0 + abs(cmean)):
                g.append(w)
                break
        else:
            groups.append([w])

    # stage 2: a k-fold root blurs the approximants over a radius ~ tol**(1/k);
    # the pairwise radius anticipates one extra hidden multiplicity, and a
    # merge is accepted only if the polished center stays nearby and still
    # meets the residual contract
    changed = True
    while changed:
        changed = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                gi, gj = groups[i], groups[j]
                k = len(gi) + len(gj)
                ci = sum(gi) / len(gi)
                cj = sum(gj) / len(gj)
                rad = 3.0 * tol ** (1.0 / min(n, k + 2)) * (1.0 + max(abs(ci), abs(cj)))
                if abs(ci - cj) > rad:
                    continue
                mean = (sum(gi) + sum(gj)) / k
                cand = _polish_on_derivative(derivs, mean, k)
                pv, _, serr = pn.eval_full(cand)
                if abs(cand - mean) <= rad and _settled(pv, serr):
                    groups[i] = gi + gj
                    del groups[j]
                    changed = True
                    break
            if changed:
                break

    out = []
    for g in groups:
        k = len(g)
        center = _polish_on_derivative(derivs, sum(g) / k, k)
        pv, _, serr = pn.eval_full(center)
        if not _settled(pv, serr):
            center = min(g, key=lambda w: abs(pn(w)))
        radius = max(abs(w - center) for w in g)
        out.append(RootCluster(center, k, radius, abs(pn(center)) * scale))
    out.sort(key=lambda rc: (rc.value.real, rc.value.imag))
    return out


@dataclass
class PolishResult:
    point: tuple
    residual: float
    converged: bool
    history: list


def newton_polish2(f1: BiPoly, f2: BiPoly, x0, tol: float = DEFAULT_NEWTON_TOL,
                   max_iter: int = 50, singular_guard: float = SINGULAR_GUARD) -> PolishResult:
    """Refine a solution of f1 = f2 = 0 by 2-d Newton iteration.

    Raises SingularJacobian when |det| drops below the guard (the iterate
    sits on or near the critical set).  On non-convergence the best iterate
    is returned with converged=False.
    """
    d11, d12 = f1.partial(0), f1.partial(1)
    d21, d22 = f2.partial(0), f2.partial(1)
    z1, z2 = complex(x0[0]), complex(x0[1])
    best = (z1, z2)
    best_r = math.inf
    history = []
    for _ in range(max_iter + 1):
        v1 = f1(z1, z2)
        v2 = f2(z1, z2)
        r = max(abs(v1), abs(v2))
        history.append(r)
        if r < best_r:
            best, best_r = (z1, z2), r
        if r <= tol:
            return PolishResult((z1, z2), r, True, history)
        a, b = d11(z1, z2), d12(z1, z2)
        c, d = d21(z1, z2), d22(z1, z2)
        det = a * d - b * c
        if abs(det) < singular_guard:
            raise SingularJacobian(
                f"|det J| = {abs(det):.3e} below guard at ({z1}, {z2})")
        z1 -= (d * v1 - b * v2) / det
        z2 -= (a * v2 - c * v1) / det
    return PolishResult(best, best_r, False, history)


def _axis_of(tag) -> int:
    if tag in (0, "z1"):
        return 0
    if tag in (1, "z2"):
        return 1
    raise ValueError(f"unknown variable tag {tag!r}")


def sylvester_resultant(p: BiPoly, q: BiPoly, eliminate, trim_rel: float = 1e-10) -> UniPoly:
    """Resultant of p and q wrt the eliminated variable, as a UniPoly in the other.

    Computed by evaluating the Sylvester determinant at unit roots (one node
    per possible coefficient) and interpolating by FFT.  Roots of the result
    contain the projections of all common solutions.  If one input has degree
    zero in the eliminated variable the classical convention Res = p**deg(q)
    (resp. q**deg(p)) applies.
    """
    ax = _axis_of(eliminate)
    other = 1 - ax
    dp = p.degree_in(ax)
    dq = q.degree_in(ax)
    if dp == 0 and dq == 0:
        raise ValueError("neither polynomial involves the eliminated variable")
    if dp == 0:
        return p.as_unipoly(other) ** dq
    if dq == 0:
        return q.as_unipoly(other) ** dp

    acoef = p.coeff_unipolys(ax)
    bcoef = q.coeff_unipolys(ax)
    dega = max(u.degree for u in acoef)
    degb = max(u.degree for u in bcoef)
    bound = dq * dega + dp * degb
    nnodes = bound + 1
    size = dp + dq
    vals = np.empty(nnodes, dtype=complex)
    hadamard = 0.0
    for knode in range(nnodes):
        t = cmath.exp(2j * math.pi * knode / nnodes)
        arow = [u(t) for u in acoef]
        brow = [u(t) for u in bcoef]
        s = np.zeros((size, size), dtype=complex)
        for r in range(dq):
            for i in range(dp + 1):
                s[r, r + i] = arow[dp - i]
        for r in range(dp):
            for i in range(dq + 1):
                s[dq + r, r + i] = brow[dq - i]
        vals[knode] = np.linalg.det(s)
        hadamard = max(hadamard, float(np.prod(np.linalg.norm(s, axis=1))))
    coeffs = np.fft.fft(vals) / nnodes
    mx = max(abs(c) for c in coeffs)
    # a true resultant sits far above the determinant rounding floor, which
    # scales with the Hadamard bound of the Sylvester matrix
    if mx <= 1e-12 * max(hadamard, 1e-300):
        raise DegenerateSystem("resultant vanishes identically (common factor)")
    cleaned = tuple(c if abs(c) > trim_rel * mx else 0j for c in coeffs)
    res = UniPoly(cleaned)
    if res.is_zero:
        raise DegenerateSystem("resultant vanishes identically (common factor)")
    return res
