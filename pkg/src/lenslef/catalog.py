"""The seven catastrophe models: five generic normal forms plus the two
lensing umbilic maps.

Each model carries its generating potential phi, the map eta, exact symbolic
Jacobian, and a closed-form elimination recipe reducing eta(x) = y to a
univariate eliminant of degree equal to the Bezout number.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateParameters, InvalidParams
from .polycore import BiPoly, UniPoly


class ModelId(str, Enum):
    FOLD = "fold"
    CUSP = "cusp"
    SWALLOWTAIL = "swallowtail"
    ELLIPTIC_UMBILIC = "elliptic-umbilic"
    HYPERBOLIC_UMBILIC = "hyperbolic-umbilic"
    ELLIPTIC_UMBILIC_LENSING = "elliptic-umbilic-lensing"
    HYPERBOLIC_UMBILIC_LENSING = "hyperbolic-umbilic-lensing"

    @classmethod
    def parse(cls, name: str) -> "ModelId":
        for m in cls:
            if m.value == name:
                return m
        raise InvalidParams(f"unknown model {name!r}")


# models carrying the shape modulus c, and the lensing parameter p
C_MODELS = {ModelId.SWALLOWTAIL, ModelId.ELLIPTIC_UMBILIC, ModelId.HYPERBOLIC_UMBILIC}
P_MODELS = {ModelId.ELLIPTIC_UMBILIC_LENSING, ModelId.HYPERBOLIC_UMBILIC_LENSING}

# (deg eta1, deg eta2) and Bezout count, fixed per model
DEGREE_TABLE = {
    ModelId.FOLD: ((1, 2), 2),
    ModelId.CUSP: ((1, 3), 3),
    ModelId.SWALLOWTAIL: ((4, 1), 4),
    ModelId.ELLIPTIC_UMBILIC: ((2, 2), 4),
    ModelId.HYPERBOLIC_UMBILIC: ((2, 2), 4),
    ModelId.ELLIPTIC_UMBILIC_LENSING: ((2, 2), 4),
    ModelId.HYPERBOLIC_UMBILIC_LENSING: ((2, 2), 4),
}

GRAD_FD_STEP = 1e-6
HESS_FD_STEP = 1e-4
_MODULUS_GUARD = 1e-9
_BRANCH_GUARD = 1e-8


@dataclass(frozen=True)
class ControlParams:
    """Source position plus the modulus parameter belonging to the model."""

    y: tuple = (0.0, 0.0)
    c: float | None = None
    p: float | None = None


@dataclass(frozen=True)
class CatastropheModel:
    id: ModelId
    params: ControlParams
    eta: tuple                 # pair of BiPoly in (z1, z2)
    phi: BiPoly                # generating potential with (y, c/p) substituted
    grad_phi: tuple            # symbolic gradient of phi
    stationarity: tuple        # the rearrangement A(x) @ (eta - y), equal to grad_phi
    jac: tuple                 # ((J11, J12), (J21, J22)) as BiPoly
    det_jac: BiPoly
    degrees: tuple
    bezout: int
    m: int

    def __post_init__(self):
        expect = DEGREE_TABLE[self.id]
        if self.degrees != expect[0] or self.bezout != expect[1]:
            raise AssertionError(
                f"{self.id.value}: degree table mismatch {self.degrees}/{self.bezout}")
        if self.bezout != self.degrees[0] * self.degrees[1] or self.m < 2:
            raise AssertionError(f"{self.id.value}: inconsistent degrees")


@dataclass
class EliminationRecipe:
    """Closed-form reduction of eta(x) = y to one univariate eliminant.

    back_substitute(root, multiplicity) returns exactly `multiplicity`
    candidate pairs; when the recipe's guard fails at a root it switches to
    the alternate branch that solves the other coordinate directly.
    """

    eliminated_variable: str
    eliminant: UniPoly
    guard: str
    back_substitute: object = field(repr=False)


def _mono(i, j, c=1.0):
    return BiPoly.monomial(i, j, c)


def _validate(id: ModelId, params: ControlParams) -> None:
    if params.c is not None and id not in C_MODELS:
        raise InvalidParams(f"{id.value} takes no parameter c")
    if params.p is not None and id not in P_MODELS:
        raise InvalidParams(f"{id.value} takes no parameter p")
    if id in C_MODELS and params.c is None:
        raise InvalidParams(f"{id.value} requires parameter c")
    if id in P_MODELS and params.p is None:
        raise InvalidParams(f"{id.value} requires parameter p")
    if len(params.y) != 2:
        raise InvalidParams("y must be a pair")


def _build_eta_phi(id: ModelId, params: ControlParams):
    """eta and phi exactly as printed for the generic forms; the lensing
    potentials come from the Fermat split phi = (x-y)^2/2 - psi with
    grad psi = x - eta (both lensing maps are curl-free)."""
    y1, y2 = (float(params.y[0]), float(params.y[1]))
    c = params.c
    p = params.p
    x1, x2 = _mono(1, 0), _mono(0, 1)
    if id is ModelId.FOLD:
        eta = (x1, _mono(0, 2))
        phi = y1 * x1 + y2 * x2 - 0.5 * _mono(2, 0) - (1.0 / 3.0) * _mono(0, 3)
        amat = ((-1.0, 0.0), (0.0, -1.0))
    elif id is ModelId.CUSP:
        eta = (x1, _mono(1, 1) + _mono(0, 3))
        phi = (y1 * x1 + y2 * x2 - 0.5 * _mono(2, 0)
               - 0.5 * y1 * _mono(0, 2) - 0.25 * _mono(0, 4))
        amat = ((-1.0, 0.0), (x2, -1.0))
    elif id is ModelId.SWALLOWTAIL:
        eta = (_mono(1, 1) + c * _mono(2, 0) + _mono(4, 0), x2)
        phi = (y1 * x1 + y2 * x2 - 0.5 * y2 * _mono(2, 0) - 0.5 * _mono(0, 2)
               - (c / 3.0) * _mono(3, 0) - 0.2 * _mono(5, 0))
        amat = ((-1.0, x1), (0.0, -1.0))
    elif id is ModelId.ELLIPTIC_UMBILIC:
        eta = (3.0 * _mono(0, 2) - 3.0 * _mono(2, 0) - 2.0 * c * x1,
               6.0 * _mono(1, 1) - 2.0 * c * x2)
        phi = (y1 * x1 + y2 * x2 + c * (_mono(2, 0) + _mono(0, 2))
               + _mono(3, 0) - 3.0 * _mono(1, 2))
        amat = ((-1.0, 0.0), (0.0, -1.0))
    elif id is ModelId.HYPERBOLIC_UMBILIC:
        eta = (-3.0 * _mono(2, 0) - c * x2, -3.0 * _mono(0, 2) - c * x1)
        phi = (y1 * x1 + y2 * x2 + c * _mono(1, 1) + _mono(3, 0) + _mono(0, 3))
        amat = ((-1.0, 0.0), (0.0, -1.0))
    elif id is ModelId.ELLIPTIC_UMBILIC_LENSING:
        eta = (_mono(2, 0) - _mono(0, 2), -2.0 * _mono(1, 1) + 4.0 * p * x2)
        phi = (-y1 * x1 - y2 * x2 + (1.0 / 3.0) * _mono(3, 0) - _mono(1, 2)
               + 2.0 * p * _mono(0, 2) + 0.5 * (y1 * y1 + y2 * y2))
        amat = ((1.0, 0.0), (0.0, 1.0))
    elif id is ModelId.HYPERBOLIC_UMBILIC_LENSING:
        eta = (_mono(2, 0) + 2.0 * p * x2, _mono(0, 2) + 2.0 * p * x1)
        phi = (-y1 * x1 - y2 * x2 + (1.0 / 3.0) * _mono(3, 0)
               + 2.0 * p * _mono(1, 1) + (1.0 / 3.0) * _mono(0, 3)
               + 0.5 * (y1 * y1 + y2 * y2))
        amat = ((1.0, 0.0), (0.0, 1.0))
    else:  # pragma: no cover
        raise InvalidParams(f"unknown model {id!r}")
    return eta, phi, amat


def instantiate(id: ModelId, params: ControlParams) -> CatastropheModel:
    """Build a model with exact coefficients for the given parameters."""
    if not isinstance(id, ModelId):
        id = ModelId.parse(id)
    _validate(id, params)
    eta, phi, amat = _build_eta_phi(id, params)
    y1, y2 = float(params.y[0]), float(params.y[1])
    r1 = eta[0] - y1
    r2 = eta[1] - y2

    def _lift(a):
        return BiPoly.constant(a) if isinstance(a, (int, float, complex)) else a

    stationarity = (
        _lift(amat[0][0]) * r1 + _lift(amat[0][1]) * r2,
        _lift(amat[1][0]) * r1 + _lift(amat[1][1]) * r2,
    )
    jac = ((eta[0].partial(0), eta[0].partial(1)),
           (eta[1].partial(0), eta[1].partial(1)))
    det_jac = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
    degrees = (eta[0].total_degree, eta[1].total_degree)
    return CatastropheModel(
        id=id,
        params=params,
        eta=eta,
        phi=phi,
        grad_phi=(phi.partial(0), phi.partial(1)),
        stationarity=stationarity,
        jac=jac,
        det_jac=det_jac,
        degrees=degrees,
        bezout=degrees[0] * degrees[1],
        m=max(degrees),
    )


def fermat_potential(model: CatastropheModel, x) -> float:
    """Evaluate the generating potential at a real lens-plane point."""
    return model.phi(complex(x[0]), complex(x[1])).real


def gradient_check(model: CatastropheModel, x) -> float:
    """Max component of |FD-gradient of phi - stationarity form of eta - y|.

    The stationarity form vanishes exactly where eta(x) = y, so at any
    solution the returned residual is at the finite-difference noise floor.
    """
    h = GRAD_FD_STEP
    x1, x2 = float(x[0]), float(x[1])
    g1 = (fermat_potential(model, (x1 + h, x2)) - fermat_potential(model, (x1 - h, x2))) / (2 * h)
    g2 = (fermat_potential(model, (x1, x2 + h)) - fermat_potential(model, (x1, x2 - h))) / (2 * h)
    s1 = model.stationarity[0](x1, x2).real
    s2 = model.stationarity[1](x1, x2).real
    return max(abs(g1 - s1), abs(g2 - s2))


def jacobian(model: CatastropheModel, x):
    """Exact symbolic-derivative Jacobian of eta at a complex point."""
    z1, z2 = complex(x[0]), complex(x[1])
    j = np.array(
        [[model.jac[0][0](z1, z2), model.jac[0][1](z1, z2)],
         [model.jac[1][0](z1, z2), model.jac[1][1](z1, z2)]],
        dtype=complex,
    )
    det = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
    return j, det


def hessian_phi(model: CatastropheModel, x):
    """Hessian of phi by central finite differences (step 1e-4).

    At any real solution of eta(x) = y its determinant matches det J_eta;
    this is the curvature form of the signed magnification.
    """
    h = HESS_FD_STEP
    x1, x2 = float(x[0]), float(x[1])

    def f(a, b):
        return fermat_potential(model, (a, b))

    f0 = f(x1, x2)
    h11 = (f(x1 + h, x2) - 2 * f0 + f(x1 - h, x2)) / (h * h)
    h22 = (f(x1, x2 + h) - 2 * f0 + f(x1, x2 - h)) / (h * h)
    h12 = (f(x1 + h, x2 + h) - f(x1 + h, x2 - h)
           - f(x1 - h, x2 + h) + f(x1 - h, x2 - h)) / (4 * h * h)
    mat = np.array([[h11, h12], [h12, h22]], dtype=float)
    det = h11 * h22 - h12 * h12
    return mat, det


def _repeat(pair, mult):
    return [pair] * mult


def _branch_pairs(root, splus, sminus, mult, residual_of):
    """Distribute alternate-branch candidates over a cluster's multiplicity."""
    if mult == 1:
        pp = (root, splus)
        pm = (root, sminus)
        return [pp if residual_of(pp) <= residual_of(pm) else pm]
    out = [(root, splus), (root, sminus)]
    out.extend([(root, splus)] * (mult - 2))
    return out


def eliminate(model: CatastropheModel) -> EliminationRecipe:
    """Closed-form elimination recipe for the model's system eta(x) = y.

    Raises DegenerateParameters when the recipe cannot be formed at all
    (hyperbolic maps with vanishing modulus); per-root guard failures are
    handled inside back_substitute via the alternate branch.
    """
    y1, y2 = float(model.params.y[0]), float(model.params.y[1])
    id = model.id
    r1 = model.eta[0] - y1
    r2 = model.eta[1] - y2

    def system_residual(pair):
        return max(abs(r1(pair[0], pair[1])), abs(r2(pair[0], pair[1])))

    if id is ModelId.FOLD:
        elim = UniPoly((-y2, 0.0, 1.0))
        return EliminationRecipe(
            "z1", elim, "none",
            lambda root, mult: _repeat((complex(y1), root), mult))

    if id is ModelId.CUSP:
        elim = UniPoly((-y2, y1, 0.0, 1.0))
        return EliminationRecipe(
            "z1", elim, "none",
            lambda root, mult: _repeat((complex(y1), root), mult))

    if id is ModelId.SWALLOWTAIL:
        c = float(model.params.c)
        elim = UniPoly((-y1, y2, c, 0.0, 1.0))
        return EliminationRecipe(
            "z2", elim, "none",
            lambda root, mult: _repeat((root, complex(y2)), mult))

    if id is ModelId.ELLIPTIC_UMBILIC:
        c = float(model.params.c)
        q1 = UniPoly((y1, 2.0 * c, 3.0))       # 3 z^2 + 2c z + y1
        q2 = UniPoly((-2.0 * c, 6.0))          # 6 z - 2c
        elim = UniPoly((3.0 * y2 * y2,)) - q1 * q2 * q2
        guard = 1.0 + abs(c)

        def back_eu(root, mult):
            den = 6.0 * root - 2.0 * c
            if abs(den) > _BRANCH_GUARD * guard:
                return _repeat((root, y2 / den), mult)
            s = cmath.sqrt((y1 + 3.0 * root * root + 2.0 * c * root) / 3.0)
            return _branch_pairs(root, s, -s, mult, system_residual)

        return EliminationRecipe("z2", elim, "back-substitution divides by 6*z1 - 2c", back_eu)

    if id is ModelId.HYPERBOLIC_UMBILIC:
        c = float(model.params.c)
        if abs(c) < _MODULUS_GUARD:
            raise DegenerateParameters("hyperbolic umbilic recipe needs c != 0")
        elim = UniPoly((3.0 * y1 * y1 + c * c * y2, c ** 3, 18.0 * y1, 0.0, 27.0))
        return EliminationRecipe(
            "z2", elim, "requires c != 0",
            lambda root, mult: _repeat((root, -(y1 + 3.0 * root * root) / c), mult))

    if id is ModelId.ELLIPTIC_UMBILIC_LENSING:
        p = float(model.params.p)
        q1 = UniPoly((-y1, 0.0, 1.0))          # z^2 - y1
        q2 = UniPoly((4.0 * p, -2.0))          # 4p - 2z
        elim = q1 * q2 * q2 - UniPoly((y2 * y2,))
        guard = 1.0 + abs(p)

        def back_eul(root, mult):
            den = 4.0 * p - 2.0 * root
            if abs(den) > _BRANCH_GUARD * guard:
                return _repeat((root, y2 / den), mult)
            s = cmath.sqrt(root * root - y1)
            return _branch_pairs(root, s, -s, mult, system_residual)

        return EliminationRecipe("z2", elim, "back-substitution divides by 4p - 2*z1", back_eul)

    if id is ModelId.HYPERBOLIC_UMBILIC_LENSING:
        p = float(model.params.p)
        if abs(p) < _MODULUS_GUARD:
            raise DegenerateParameters("hyperbolic lensing recipe needs p != 0")
        elim = UniPoly((y1 * y1 - 4.0 * p * p * y2, 8.0 * p ** 3, -2.0 * y1, 0.0, 1.0))
        return EliminationRecipe(
            "z2", elim, "requires p != 0",
            lambda root, mult: _repeat((root, (y1 - root * root) / (2.0 * p)), mult))

    raise InvalidParams(f"unknown model {id!r}")  # pragma: no cover
