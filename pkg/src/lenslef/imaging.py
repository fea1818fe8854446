"""Solve eta(x) = y over C^2, classify real images, and certify that the
signed magnifications of a full multiplet sum to zero.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import catalog
from .catalog import CatastropheModel, ControlParams, ModelId
from .errors import (CausticSource, DegenerateParameters, Incomplete,
                     IncompleteSolve, LensError, SingularJacobian)
from .polycore import aberth_roots, newton_polish2, sylvester_resultant

SOLVE_TOL = 1e-10
REALITY_TOL = 1e-8
CAUSTIC_TOL = 1e-6
REJECT_TOL = 1e-4
RNG_NAME = "numpy-pcg64"


def thread_count() -> int:
    raw = os.environ.get("LEFSCHETZ_LENS_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_indexed(fn, items):
    """Apply fn over items, optionally on a thread pool; order is preserved
    so results are schedule-independent."""
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class Solution:
    position: tuple            # (z1, z2) complex
    residual: float            # max(|eta1 - y1|, |eta2 - y2|)
    is_real: bool
    det_jacobian: complex
    magnification: complex     # 1 / det J_eta


@dataclass(frozen=True)
class SolutionSet:
    model_id: ModelId
    params: ControlParams
    y: tuple
    solutions: tuple
    complete: bool
    min_abs_det: float

    @property
    def bezout(self) -> int:
        return catalog.DEGREE_TABLE[self.model_id][1]

    @property
    def n_real(self) -> int:
        return sum(1 for s in self.solutions if s.is_real)

    @property
    def sum_all(self) -> complex:
        return sum((s.magnification for s in self.solutions), 0j)

    @property
    def sum_real(self) -> float:
        return float(sum(s.magnification.real for s in self.solutions if s.is_real))


@dataclass(frozen=True)
class InvariantReport:
    sum_all: complex
    sum_real: float
    n_real: int
    residual_scale: float      # sum of |mu|
    normalized_defect: float   # |sum_all| / max(1, residual_scale)
    caustic_proximity: float   # min |det J| over the multiplet


def _is_real(z: complex) -> bool:
    return abs(z.imag) <= REALITY_TOL * (1.0 + abs(z.real))


def _make_solution(model: CatastropheModel, pair, residual: float) -> Solution:
    z1, z2 = pair
    _, det = catalog.jacobian(model, (z1, z2))
    det = complex(det)
    # a vanishing determinant means the image sits on the critical set; the
    # caustic guard rejects the multiplet downstream
    mu = 1.0 / det if det != 0 else complex(math.inf, 0.0)
    return Solution(
        position=(z1, z2),
        residual=residual,
        is_real=_is_real(z1) and _is_real(z2),
        det_jacobian=det,
        magnification=mu,
    )


def _polish_candidates(model, r1, r2, candidates, tol):
    good = []
    for cand in candidates:
        try:
            res = newton_polish2(r1, r2, cand, tol=tol * 1e-3, max_iter=60)
        except SingularJacobian:
            # keep the unpolished candidate; the caustic guard decides later
            resid = max(abs(r1(cand[0], cand[1])), abs(r2(cand[0], cand[1])))
            if resid <= tol:
                good.append((cand, resid))
            continue
        if res.residual <= tol:
            good.append((res.point, res.residual))
    return good


DUP_RADIUS = 1e-8


def _same_point(p, q) -> bool:
    return (abs(p[0] - q[0]) <= DUP_RADIUS * (1.0 + abs(q[0]))
            and abs(p[1] - q[1]) <= DUP_RADIUS * (1.0 + abs(q[1])))


def _dedupe(scored):
    """Collapse coincident polished solutions, keeping the best residual;
    iteration order is fixed so results are deterministic."""
    out = []
    for pair, resid in sorted(scored, key=lambda t: (t[1], t[0][0].real,
                                                     t[0][0].imag, t[0][1].real,
                                                     t[0][1].imag)):
        if not any(_same_point(pair, rep) for rep, _ in out):
            out.append((pair, resid))
    return out


def _direction_candidates(r1, r2, eliminate):
    """Candidate pairs from the resultant eliminating the given variable.

    Every (projection root, fiber root) combination is offered; polishing
    plus deduplication sorts out which are genuine.  Trying both directions
    matters near cusps, where one projection has a cluster of unresolvable
    nearly-multiple roots while the transversal one separates cleanly."""
    ax = 0 if eliminate == "z1" else 1
    res = sylvester_resultant(r1, r2, eliminate)
    first, second = ((r1, r2) if r1.degree_in(ax) >= r2.degree_in(ax)
                     else (r2, r1))
    out = []
    for cl in aberth_roots(res, tol=1e-12, max_iter=400):
        a = cl.value
        sub = first.subs(1 - ax, a)
        if sub.degree < 1:
            sub = second.subs(1 - ax, a)
            if sub.degree < 1:
                continue
        for zc in aberth_roots(sub, tol=1e-12, max_iter=400):
            out.append((zc.value, a) if ax == 0 else (a, zc.value))
    return out


def solve_images(model: CatastropheModel, tol: float = SOLVE_TOL,
                 caustic_tol: float = CAUSTIC_TOL) -> SolutionSet:
    """All Bezout-many complex solutions of eta(x) = y, Newton-polished.

    The closed-form elimination recipe drives the generic case; whenever it
    fails to isolate the full count of distinct solutions (e.g. the source
    sits close to a cusp and one projection cannot resolve the cluster),
    resultant elimination is retried in both variable directions.  A deficit
    that survives all routes is padded with on-caustic multiple solutions
    when those exist, otherwise reported as IncompleteSolve.

    Output order is lexicographic by (Re z1, Im z1, Re z2, Im z2), so repeat
    runs are byte-stable.  Raises CausticSource when the smallest |det J|
    over the multiplet falls below caustic_tol.
    """
    y = (float(model.params.y[0]), float(model.params.y[1]))
    r1 = model.eta[0] - y[0]
    r2 = model.eta[1] - y[1]

    candidates = []
    try:
        recipe = catalog.eliminate(model)
        clusters = aberth_roots(recipe.eliminant, tol=1e-12, max_iter=400)
        for cl in clusters:
            candidates.extend(recipe.back_substitute(cl.value, cl.multiplicity_estimate))
    except DegenerateParameters:
        candidates = []

    distinct = _dedupe(_polish_candidates(model, r1, r2, candidates, tol))
    if len(distinct) != model.bezout:
        for direction in ("z2", "z1"):
            try:
                extra = _direction_candidates(r1, r2, direction)
            except LensError:
                continue
            distinct = _dedupe(distinct
                               + _polish_candidates(model, r1, r2, extra, tol))
            if len(distinct) == model.bezout:
                break

    # more representatives than the Bezout bound means the dedupe radius
    # split a genuinely multiple solution; merge the closest pairs
    while len(distinct) > model.bezout:
        best = None
        for i in range(len(distinct)):
            for j in range(i + 1, len(distinct)):
                d = abs(distinct[i][0][0] - distinct[j][0][0]) + \
                    abs(distinct[i][0][1] - distinct[j][0][1])
                if best is None or d < best[0]:
                    best = (d, i, j)
        _, i, j = best
        drop = j if distinct[i][1] <= distinct[j][1] else i
        del distinct[drop]

    solutions = [_make_solution(model, pair, resid) for pair, resid in distinct]
    if len(solutions) < model.bezout:
        # a true deficit only happens when solutions coincide, i.e. on the
        # critical set; pad with the on-caustic ones so the caustic guard
        # reports the multiplet honestly
        multiples = sorted((s for s in solutions
                            if abs(s.det_jacobian) < caustic_tol),
                           key=lambda s: abs(s.det_jacobian))
        k = 0
        while len(solutions) < model.bezout and multiples:
            solutions.append(multiples[k % len(multiples)])
            k += 1

    solutions.sort(key=lambda s: (s.position[0].real, s.position[0].imag,
                                  s.position[1].real, s.position[1].imag))
    min_det = min((abs(s.det_jacobian) for s in solutions), default=0.0)
    ss = SolutionSet(
        model_id=model.id,
        params=model.params,
        y=y,
        solutions=tuple(solutions),
        complete=len(solutions) == model.bezout,
        min_abs_det=min_det,
    )
    if not ss.complete:
        raise IncompleteSolve(len(solutions), ss)
    if min_det < caustic_tol:
        raise CausticSource(min_det, ss)
    return ss


def invariant_report(ss: SolutionSet) -> InvariantReport:
    """Magnification sums over a complete multiplet."""
    if not ss.complete:
        raise Incomplete("invariant report needs a complete solution set")
    sum_all = ss.sum_all
    scale = float(sum(abs(s.magnification) for s in ss.solutions))
    return InvariantReport(
        sum_all=sum_all,
        sum_real=ss.sum_real,
        n_real=ss.n_real,
        residual_scale=scale,
        normalized_defect=abs(sum_all) / max(1.0, scale),
        caustic_proximity=ss.min_abs_det,
    )


@dataclass(frozen=True)
class SamplingBox:
    """Uniform sampling ranges for the source position and, where the model
    has one, the modulus parameter."""

    y1: tuple
    y2: tuple
    c: tuple | None = None
    p: tuple | None = None

    def as_dict(self):
        out = {"y1": list(self.y1), "y2": list(self.y2)}
        if self.c is not None:
            out["c"] = list(self.c)
        if self.p is not None:
            out["p"] = list(self.p)
        return out


# Boxes are sized so that every model shows all-real multiplets at a healthy
# rate while keeping near-caustic rejections rare.
DEFAULT_BOXES = {
    ModelId.FOLD: SamplingBox((-2.0, 2.0), (-2.0, 2.0)),
    ModelId.CUSP: SamplingBox((-2.0, 2.0), (-2.0, 2.0)),
    ModelId.SWALLOWTAIL: SamplingBox((-3.0, 3.0), (-2.0, 2.0), c=(-6.0, -2.0)),
    ModelId.ELLIPTIC_UMBILIC: SamplingBox((-3.0, 3.0), (-3.0, 3.0), c=(1.0, 3.0)),
    ModelId.HYPERBOLIC_UMBILIC: SamplingBox((-4.0, 2.0), (-4.0, 2.0), c=(0.5, 1.5)),
    ModelId.ELLIPTIC_UMBILIC_LENSING: SamplingBox((-2.0, 3.0), (-2.0, 2.0), p=(0.8, 1.4)),
    ModelId.HYPERBOLIC_UMBILIC_LENSING: SamplingBox((-2.0, 9.0), (-2.0, 9.0), p=(0.8, 1.2)),
}


@dataclass
class TrialResult:
    accepted: bool
    defect: float = 0.0
    all_real: bool = False
    real_defect: float = 0.0
    incomplete: bool = False


@dataclass
class BatchReport:
    """Monte-Carlo certification of the magnification invariant."""

    model_id: ModelId
    trials: int
    seed: int
    tol: float
    box: SamplingBox
    rng_name: str = RNG_NAME
    accepted: int = 0
    rejected_caustic: int = 0
    rejected_incomplete: int = 0
    max_defect: float = 0.0
    all_real_trials: int = 0
    all_real_within_tol: int = 0
    max_real_defect: float = 0.0

    @property
    def passed(self) -> bool:
        if self.trials == 0:
            return True
        return (self.max_defect <= self.tol
                and self.all_real_within_tol == self.all_real_trials)


def draw_params(model_id: ModelId, box: SamplingBox, rng) -> ControlParams:
    y = (float(rng.uniform(*box.y1)), float(rng.uniform(*box.y2)))
    c = float(rng.uniform(*box.c)) if box.c is not None else None
    p = float(rng.uniform(*box.p)) if box.p is not None else None
    return ControlParams(y=y, c=c, p=p)


def run_trial(model_id: ModelId, params: ControlParams, tol: float) -> TrialResult:
    model = catalog.instantiate(model_id, params)
    try:
        ss = solve_images(model)
    except CausticSource:
        return TrialResult(accepted=False)
    except IncompleteSolve:
        return TrialResult(accepted=False, incomplete=True)
    if ss.min_abs_det < REJECT_TOL:
        return TrialResult(accepted=False)
    rep = invariant_report(ss)
    out = TrialResult(accepted=True, defect=rep.normalized_defect)
    if rep.n_real == ss.bezout:
        out.all_real = True
        out.real_defect = abs(rep.sum_real) / max(1.0, rep.residual_scale)
    return out


def verify_invariant(model_id: ModelId, trials: int, seed: int = 42,
                     domain: SamplingBox | None = None,
                     tol: float = 1e-8) -> BatchReport:
    """Sample (y, c/p) from the box, reject near-caustic draws, and report
    the worst normalized magnification defect over accepted trials."""
    if not isinstance(model_id, ModelId):
        model_id = ModelId.parse(model_id)
    box = domain or DEFAULT_BOXES[model_id]
    report = BatchReport(model_id=model_id, trials=trials, seed=seed, tol=tol, box=box)
    if trials < 1:
        return report
    model_index = list(ModelId).index(model_id)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, model_index)))
    draws = [draw_params(model_id, box, rng) for _ in range(trials)]
    results = map_indexed(lambda ps: run_trial(model_id, ps, tol), draws)
    for res in results:
        if not res.accepted:
            if res.incomplete:
                report.rejected_incomplete += 1
            else:
                report.rejected_caustic += 1
            continue
        report.accepted += 1
        report.max_defect = max(report.max_defect, res.defect)
        if res.all_real:
            report.all_real_trials += 1
            report.max_real_defect = max(report.max_real_defect, res.real_defect)
            if res.real_defect <= tol:
                report.all_real_within_tol += 1
    return report
