"""Critical curves, caustics, the tangent/kernel angle, cusp detection, and
real-image counts over the source plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import catalog, imaging
from .catalog import CatastropheModel, ModelId
from .errors import CausticSource, EmptyCriticalSet, IncompleteSolve

DET_TOL = 1e-8
RANK0_TOL = 1e-8
BRANCH_GAP = 1000.0
_PARAM_GUARD = 1e-9


@dataclass(frozen=True)
class CriticalPoint:
    x: tuple                   # lens-plane point on the critical set
    caustic_y: tuple | None    # eta(x); filled by caustic_map
    tangent: tuple             # unit tangent of the critical curve
    kernel_dir: tuple          # unit kernel of J_eta (sign canonicalized)
    beta: float                # angle between tangent and kernel, in [0, pi/2]
    parameter_t: float


@dataclass(frozen=True)
class _Branch:
    point: object              # t -> (x1, x2)
    t_lo: float
    t_hi: float
    closed: bool
    offset: float = 0.0        # added to t for the reported curve parameter


def _branches(model: CatastropheModel):
    """Closed-form parametrizations of det J_eta = 0 for every model."""
    id = model.id
    if id is ModelId.FOLD:
        return [_Branch(lambda t: (t, 0.0), -3.0, 3.0, False)]
    if id is ModelId.CUSP:
        return [_Branch(lambda t: (-3.0 * t * t, t), -1.5, 1.5, False)]
    if id is ModelId.SWALLOWTAIL:
        c = float(model.params.c)
        return [_Branch(lambda t: (t, -2.0 * c * t - 4.0 * t**3), -1.5, 1.5, False)]
    if id is ModelId.ELLIPTIC_UMBILIC:
        c = float(model.params.c)
        r = abs(c) / 3.0
        if r < _PARAM_GUARD:
            raise EmptyCriticalSet("umbilic point: critical circle has zero radius")
        return [_Branch(lambda t: (r * math.cos(t), r * math.sin(t)),
                        0.0, 2.0 * math.pi, True)]
    if id is ModelId.HYPERBOLIC_UMBILIC:
        c = float(model.params.c)
        s = abs(c) / 6.0
        if s < _PARAM_GUARD:
            raise EmptyCriticalSet("umbilic point: hyperbola degenerates")
        span = math.log(6.0)
        return [
            _Branch(lambda t: (s * math.exp(t), s * math.exp(-t)), -span, span, False),
            _Branch(lambda t: (-s * math.exp(t), -s * math.exp(-t)), -span, span,
                    False, offset=BRANCH_GAP),
        ]
    if id is ModelId.ELLIPTIC_UMBILIC_LENSING:
        p = float(model.params.p)
        r = abs(p)
        if r < _PARAM_GUARD:
            raise EmptyCriticalSet("umbilic point: critical circle has zero radius")
        return [_Branch(lambda t: (p + r * math.cos(t), r * math.sin(t)),
                        0.0, 2.0 * math.pi, True)]
    if id is ModelId.HYPERBOLIC_UMBILIC_LENSING:
        p = float(model.params.p)
        s = abs(p)
        if s < _PARAM_GUARD:
            raise EmptyCriticalSet("umbilic point: hyperbola degenerates")
        span = math.log(6.0)
        return [
            _Branch(lambda t: (s * math.exp(t), s * math.exp(-t)), -span, span, False),
            _Branch(lambda t: (-s * math.exp(t), -s * math.exp(-t)), -span, span,
                    False, offset=BRANCH_GAP),
        ]
    raise EmptyCriticalSet(f"no parametrization for {id!r}")  # pragma: no cover


def _kernel_dir(model: CatastropheModel, x, ref=None):
    """Unit kernel vector of J_eta at a rank-1 critical point.

    Sign is aligned with `ref` when given, else canonicalized to make the
    first nonzero component positive.  Returns None at rank-0 points."""
    j, _ = catalog.jacobian(model, x)
    jr = j.real
    _, sv, vt = np.linalg.svd(jr)
    if sv[0] < RANK0_TOL:
        return None
    k = vt[-1]
    if ref is not None:
        if k[0] * ref[0] + k[1] * ref[1] < 0.0:
            k = -k
    elif k[0] < 0.0 or (k[0] == 0.0 and k[1] < 0.0):
        k = -k
    return (float(k[0]), float(k[1]))


def _tangent_dir(model: CatastropheModel, x):
    """Unit tangent of the critical curve from the rotated gradient of det J."""
    d1 = model.det_jac.partial(0)(x[0], x[1]).real
    d2 = model.det_jac.partial(1)(x[0], x[1]).real
    norm = math.hypot(d1, d2)
    if norm == 0.0:
        return None
    return (-d2 / norm, d1 / norm)


def _alignment(tangent, kernel) -> float:
    return tangent[0] * kernel[1] - tangent[1] * kernel[0]


def _beta_of(s: float) -> float:
    return math.asin(min(1.0, abs(s)))


def critical_curve(model: CatastropheModel, samples: int,
                   method: str = "closed-form", window=None,
                   grid: int = 512):
    """Sample the critical curve det J_eta = 0.

    The catalog models all have closed-form parametrizations; the marching
    method extracts the contour from a grid instead and polishes each vertex
    back onto the curve, for cross-validation and non-catalog use.
    """
    if samples < 1:
        return []
    if method == "marching":
        return _marching_curve(model, samples, window=window, grid=grid)
    if method != "closed-form":
        raise ValueError(f"unknown method {method!r}")
    branches = _branches(model)
    shares = _split_samples(samples, len(branches))
    points = []
    for br, n in zip(branches, shares):
        if n == 0:
            continue
        if br.closed:
            ts = np.linspace(br.t_lo, br.t_hi, n, endpoint=False)
        else:
            ts = np.linspace(br.t_lo, br.t_hi, n)
        for t in ts:
            pt = _point_at(model, br, float(t))
            if pt is not None:
                points.append(pt)
    return points


def _split_samples(samples, nbranches):
    base = samples // nbranches
    rem = samples - base * nbranches
    return [base + (1 if i < rem else 0) for i in range(nbranches)]


def _point_at(model, branch: _Branch, t: float, kernel_ref=None):
    x = branch.point(t)
    tangent = _tangent_dir(model, x)
    kernel = _kernel_dir(model, x, ref=kernel_ref)
    if tangent is None or kernel is None:
        return None
    s = _alignment(tangent, kernel)
    return CriticalPoint(
        x=(float(x[0]), float(x[1])),
        caustic_y=None,
        tangent=tangent,
        kernel_dir=kernel,
        beta=_beta_of(s),
        parameter_t=t + branch.offset,
    )


def _marching_curve(model, samples, window=None, grid=512):
    from skimage import measure

    if window is None:
        ref = critical_curve(model, 256)
        xs = [p.x[0] for p in ref]
        ys = [p.x[1] for p in ref]
        cx, cy = (max(xs) + min(xs)) / 2.0, (max(ys) + min(ys)) / 2.0
        half = 1.5 * max(max(xs) - min(xs), max(ys) - min(ys), 1e-3)
        window = (cx - half, cx + half, cy - half, cy + half)
    x1 = np.linspace(window[0], window[1], grid)
    x2 = np.linspace(window[2], window[3], grid)
    vals = np.empty((grid, grid))
    det = model.det_jac
    for i, a in enumerate(x1):
        for j, b in enumerate(x2):
            vals[i, j] = det(a, b).real
    contours = measure.find_contours(vals, 0.0)
    if not contours:
        raise EmptyCriticalSet("no zero contour of det J in the window")
    d1 = det.partial(0)
    d2 = det.partial(1)
    dx1 = (window[1] - window[0]) / (grid - 1)
    dx2 = (window[3] - window[2]) / (grid - 1)
    raw = []
    offset = 0.0
    for contour in contours:
        arc = 0.0
        prev = None
        for idx in range(len(contour)):
            a = window[0] + contour[idx, 0] * dx1
            b = window[2] + contour[idx, 1] * dx2
            # polish onto the contour along the gradient of det J
            for _ in range(4):
                v = det(a, b).real
                g1, g2 = d1(a, b).real, d2(a, b).real
                n2 = g1 * g1 + g2 * g2
                if n2 == 0.0:
                    break
                a -= v * g1 / n2
                b -= v * g2 / n2
            if prev is not None:
                arc += math.hypot(a - prev[0], b - prev[1])
            prev = (a, b)
            raw.append(((a, b), arc + offset))
        offset += arc + BRANCH_GAP
    stride = max(1, len(raw) // samples)
    picked = raw[::stride][:samples]
    points = []
    for (a, b), t in picked:
        tangent = _tangent_dir(model, (a, b))
        kernel = _kernel_dir(model, (a, b))
        if tangent is None or kernel is None:
            continue
        s = _alignment(tangent, kernel)
        points.append(CriticalPoint(
            x=(float(a), float(b)), caustic_y=None, tangent=tangent,
            kernel_dir=kernel, beta=_beta_of(s), parameter_t=float(t)))
    return points


def caustic_map(model: CatastropheModel, points):
    """Map critical points to the source plane: caustic_y = eta(x)."""
    out = []
    for p in points:
        y1 = model.eta[0](p.x[0], p.x[1]).real
        y2 = model.eta[1](p.x[0], p.x[1]).real
        out.append(replace(p, caustic_y=(y1, y2)))
    return out


def _signed_alignment_at(model, branch, t, kernel_ref):
    x = branch.point(t)
    tangent = _tangent_dir(model, x)
    kernel = _kernel_dir(model, x, ref=kernel_ref)
    if tangent is None or kernel is None:
        return None, kernel_ref
    return _alignment(tangent, kernel), kernel


def beta_cusp_detect(model: CatastropheModel, points, param_tol: float = 1e-8):
    """Parameter locations where the tangent/kernel alignment changes sign.

    The signed scalar det[tangent, kernel] is used for crossing detection
    (robust near zero, where the angle itself is noisy); each crossing is
    then refined by bisection on the closed-form parametrization.
    """
    if len(points) < 2:
        return []
    branches = {}
    for br in _branches(model):
        branches[br.offset] = br

    def branch_of(t):
        best = None
        for off, br in sorted(branches.items()):
            lo, hi = off + br.t_lo, off + br.t_hi
            dist = 0.0 if lo <= t <= hi else min(abs(t - lo), abs(t - hi))
            if best is None or dist < best[0]:
                best = (dist, off, br)
        return best[1], best[2]

    spacings = [points[i + 1].parameter_t - points[i].parameter_t
                for i in range(len(points) - 1)]
    med = sorted(spacings)[len(spacings) // 2] if spacings else 0.0

    pairs = list(zip(points[:-1], points[1:]))
    closed_single = len(branches) == 1 and next(iter(branches.values())).closed
    if closed_single:
        pairs.append((points[-1], points[0]))

    cusps = []
    for pa, pb in pairs:
        ta, tb = pa.parameter_t, pb.parameter_t
        if tb < ta:  # wrap-around pair on a closed curve
            tb += next(iter(branches.values())).t_hi
        if med > 0.0 and (tb - ta) > 10.0 * med:
            continue  # branch seam
        off, br = branch_of(ta)
        la, lb = ta - off, tb - off

        def s_at(t, ref):
            tt = t
            if br.closed:
                tt = br.t_lo + (t - br.t_lo) % (br.t_hi - br.t_lo)
            return _signed_alignment_at(model, br, tt, ref)

        sa, ka = s_at(la, None)
        if sa is None:
            continue
        sb, _ = s_at(lb, ka)
        if sb is None:
            continue
        if sa == 0.0:
            cusps.append(ta)
            continue
        if sa * sb >= 0.0:
            continue
        lo, hi, slo, ref = la, lb, sa, ka
        while hi - lo > param_tol:
            mid = 0.5 * (lo + hi)
            sm, ref = s_at(mid, ref)
            if sm is None or sm == 0.0:
                lo = hi = mid
                break
            if slo * sm < 0.0:
                hi = mid
            else:
                lo, slo = mid, sm
        cusps.append(0.5 * (lo + hi) + off)

    # merge duplicates (an exact-zero sample can also trip its neighbor pair)
    cusps.sort()
    merged = []
    gap = max(10.0 * param_tol, med / 2.0)
    for t in cusps:
        if merged and abs(t - merged[-1]) <= gap:
            continue
        merged.append(t)
    if closed_single and len(merged) >= 2:
        period = next(iter(branches.values())).t_hi
        if abs((merged[0] + period) - merged[-1]) <= gap:
            merged.pop()
    return merged


@dataclass
class ImageCountGrid:
    window: tuple              # (y1_min, y1_max, y2_min, y2_max)
    resolution: tuple          # (n1, n2)
    counts: np.ndarray         # [i2, i1] real-image count, -1 where rejected
    rejected: np.ndarray       # [i2, i1] near-caustic / unsolved cells
    real_sums: np.ndarray      # [i2, i1] sum of mu over real images
    y1_centers: np.ndarray
    y2_centers: np.ndarray


def image_count_grid(model: CatastropheModel, window, resolution) -> ImageCountGrid:
    """Real-image count at every cell center of a source-plane grid."""
    n1, n2 = int(resolution[0]), int(resolution[1])
    if n1 < 2 or n2 < 2:
        raise ValueError("resolution must be at least 2x2")
    y1c = window[0] + (np.arange(n1) + 0.5) * (window[1] - window[0]) / n1
    y2c = window[2] + (np.arange(n2) + 0.5) * (window[3] - window[2]) / n2
    cells = [(i2, i1) for i2 in range(n2) for i1 in range(n1)]

    def solve_cell(cell):
        i2, i1 = cell
        params = replace(model.params, y=(float(y1c[i1]), float(y2c[i2])))
        m = catalog.instantiate(model.id, params)
        try:
            ss = imaging.solve_images(m)
        except (CausticSource, IncompleteSolve):
            return (-1, True, 0.0)
        return (ss.n_real, False, ss.sum_real)

    results = imaging.map_indexed(solve_cell, cells)
    counts = np.empty((n2, n1), dtype=int)
    rejected = np.zeros((n2, n1), dtype=bool)
    sums = np.zeros((n2, n1), dtype=float)
    for (i2, i1), (n_real, rej, s_real) in zip(cells, results):
        counts[i2, i1] = n_real
        rejected[i2, i1] = rej
        sums[i2, i1] = s_real
    return ImageCountGrid(
        window=tuple(window), resolution=(n1, n2), counts=counts,
        rejected=rejected, real_sums=sums, y1_centers=y1c, y2_centers=y2c)
