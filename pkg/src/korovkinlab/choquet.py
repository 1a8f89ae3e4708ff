"""Choquet boundary estimation via LP feasibility.

A grid point is certified as a boundary point of a span when an LP finds a
peaking function: h in the span with h(x0) = 1, |h| <= 1 at every other
grid point, and |h| <= 1 - delta at all points farther than a chosen
radius. The complementary neighborhood-separation criterion (a function
with Re f <= 0 everywhere, Re f <= -beta off a neighborhood U, and
Re f(x0) >= -alpha) is exposed as a second, independent certificate type.

The LP backend is untrusted: every certificate is re-verified by direct
evaluation of its inequalities before it is returned. Complex modulus
constraints are handled through a polygonal outer approximation refined by
exact-phase cutting planes, so acceptances are verified and rejections are
certified by the relaxation's optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import linprog

from .errors import SolverError
from .functions import FunctionSpan
from .space import CompactSpace, Field, PointSet

PEAK_TOL = 1e-9
DEFAULT_DELTA_MIN = 1e-6
# sampling grid standing in for "every (alpha, beta)" in the separation
# criterion; detection is always relative to these parameters
DEFAULT_ALPHA_BETA_GRID = ((0.1, 1.0), (0.01, 1.0), (0.1, 10.0))
_LP_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class ChoquetParams:
    """Scan parameters; radii default to fractions of the grid diameter."""

    r_list: tuple[float, ...] | None = None
    r_factors: tuple[float, ...] = (0.05, 0.1, 0.2)
    delta_min: float = DEFAULT_DELTA_MIN
    directions: int = 16
    coeff_bound: float = 1e6

    def radii(self, space: CompactSpace) -> tuple[float, ...]:
        if self.r_list is not None:
            return tuple(float(r) for r in self.r_list)
        diam = space.diameter
        return tuple(f * diam for f in self.r_factors)


@dataclass(frozen=True)
class PeakCertificate:
    """Witness that the span peaks at x0 outside radius `radius`."""

    x0: int
    coeffs: tuple
    margin: float
    radius: float


@dataclass(frozen=True)
class LemmaBCertificate:
    """Witness separating x0 from the complement of a neighborhood U."""

    x0: int
    coeffs: tuple
    alpha: float
    beta: float
    u_indices: tuple[int, ...]


class Classification(Enum):
    BOUNDARY = "Boundary"
    NOT_DETECTED = "NotDetected"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class PointClassification:
    index: int
    label: Classification
    certificate: PeakCertificate | None
    best_delta: float
    note: str = ""


@dataclass(frozen=True, eq=False)
class BoundaryEstimate:
    span: FunctionSpan
    points: tuple[PointClassification, ...]
    r_list: tuple[float, ...]
    delta_min: float

    def boundary_point_set(self) -> PointSet:
        idx = tuple(p.index for p in self.points if p.label is Classification.BOUNDARY)
        return PointSet(self.span.space, idx)

    def counts(self) -> dict[str, int]:
        out = {c.value: 0 for c in Classification}
        for p in self.points:
            out[p.label.value] += 1
        return out


def _solve(c, A_ub, b_ub, A_eq, b_eq, bounds):
    try:
        res = linprog(
            c,
            A_ub=A_ub if A_ub is not None and len(A_ub) else None,
            b_ub=b_ub if b_ub is not None and len(b_ub) else None,
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=bounds,
            method="highs",
            options=_LP_OPTIONS,
        )
    except Exception as exc:  # scipy raises ValueError on malformed input
        raise SolverError(f"LP backend error: {exc}") from exc
    if res.status in (0, 2):
        return res
    raise SolverError(f"LP backend returned status {res.status}: {res.message}")


def _peak_lp_real(b_mat, x0, far, near, delta_cap_rows, coeff_bound):
    k = b_mat.shape[1]
    rows = []
    rhs = []
    for sign in (1.0, -1.0):
        if far.size:
            rows.append(np.column_stack([sign * b_mat[far], np.ones(far.size)]))
            rhs.append(np.ones(far.size))
        if near.size:
            rows.append(np.column_stack([sign * b_mat[near], np.zeros(near.size)]))
            rhs.append(np.full(near.size, delta_cap_rows))
    a_ub = np.vstack(rows) if rows else None
    b_ub = np.concatenate(rhs) if rows else None
    a_eq = np.concatenate([b_mat[x0], [0.0]])[None, :]
    obj = np.zeros(k + 1)
    obj[-1] = -1.0
    bounds = [(-coeff_bound, coeff_bound)] * k + [(-4.0, 1.0)]
    res = _solve(obj, a_ub, b_ub, a_eq, [1.0], bounds)
    if res.status != 0:
        return None, -np.inf
    return res.x[:k], float(res.x[k])


def _peak_lp_complex(b_mat, x0, far, near, coeff_bound, directions, far_cuts, near_cuts):
    k = b_mat.shape[1]
    theta = 2.0 * np.pi * np.arange(directions) / directions
    dirs = np.exp(-1j * theta)

    def direction_rows(idx, with_delta):
        z = dirs[:, None, None] * b_mat[idx][None, :, :]  # (K, m, k)
        gu = z.real.reshape(-1, k)
        gv = (-z.imag).reshape(-1, k)
        dcol = np.ones((gu.shape[0], 1)) if with_delta else np.zeros((gu.shape[0], 1))
        return np.hstack([gu, gv, dcol])

    def cut_rows(cuts, with_delta):
        # one exact-phase constraint Re(e^{-i phase} h(y)) (+ delta) <= 1 per cut
        out = np.empty((len(cuts), 2 * k + 1))
        for i, (y, phase) in enumerate(cuts):
            row = np.exp(-1j * phase) * b_mat[y]
            out[i, :k] = row.real
            out[i, k : 2 * k] = -row.imag
            out[i, 2 * k] = 1.0 if with_delta else 0.0
        return out

    rows = []
    rhs = []
    if far.size:
        rows.append(direction_rows(far, True))
        rhs.append(np.ones(rows[-1].shape[0]))
    if near.size:
        rows.append(direction_rows(near, False))
        rhs.append(np.ones(rows[-1].shape[0]))
    if far_cuts:
        rows.append(cut_rows(far_cuts, True))
        rhs.append(np.ones(len(far_cuts)))
    if near_cuts:
        rows.append(cut_rows(near_cuts, False))
        rhs.append(np.ones(len(near_cuts)))
    a_ub = np.vstack(rows) if rows else None
    b_ub = np.concatenate(rhs) if rows else None
    row_re = np.concatenate([b_mat[x0].real, -b_mat[x0].imag, [0.0]])
    row_im = np.concatenate([b_mat[x0].imag, b_mat[x0].real, [0.0]])
    a_eq = np.vstack([row_re, row_im])
    obj = np.zeros(2 * k + 1)
    obj[-1] = -1.0
    bounds = [(-coeff_bound, coeff_bound)] * (2 * k) + [(-4.0, 1.0)]
    res = _solve(obj, a_ub, b_ub, a_eq, [1.0, 0.0], bounds)
    if res.status != 0:
        return None, -np.inf
    coeffs = res.x[:k] + 1j * res.x[k : 2 * k]
    return coeffs, float(res.x[2 * k])


def _peak_search(
    span: FunctionSpan,
    x0: int,
    r: float,
    delta_min: float,
    directions: int,
    coeff_bound: float,
    max_rounds: int = 16,
) -> tuple[PeakCertificate | None, float]:
    """Run the peak LP at one radius.

    Returns (certificate-or-None, evidence). For a certificate the evidence
    is its exact margin; for a rejection it is the final LP optimum, which
    over-approximates the true best margin, so a value below delta_min is a
    solver-certified infeasibility verdict.

    Complex modulus constraints start from a polygonal outer approximation;
    whenever the exact modulus of the candidate violates a cap, a cutting
    plane at the violating point's exact phase is added and the LP is
    re-solved.
    """
    space = span.space
    d = space.pairwise[x0]
    far = np.nonzero(d >= r)[0]
    near = np.array([i for i in np.nonzero(d < r)[0] if i != x0], dtype=int)
    b_mat = span.value_matrix
    is_complex = space.field is Field.COMPLEX

    if not is_complex:
        coeffs, delta_lp = _peak_lp_real(b_mat, x0, far, near, 1.0, coeff_bound)
        if coeffs is None:
            return None, -np.inf
        h = b_mat @ coeffs
        pin = h[x0]
        if abs(pin - 1.0) > PEAK_TOL:
            if abs(pin) < 0.5:
                raise SolverError(f"peak pin drifted to {pin!r} at point {x0}")
            coeffs = coeffs / pin
            h = b_mat @ coeffs
        margin = 1.0 - float(np.max(np.abs(h[far]))) if far.size else 1.0
        if margin < delta_min:
            return None, delta_lp
        cert = PeakCertificate(x0=int(x0), coeffs=tuple(coeffs), margin=margin, radius=float(r))
        ok, why = verify_peak_certificate(span, cert)
        if not ok:
            raise SolverError(f"peak certificate failed re-verification: {why}")
        return cert, margin

    far_cuts: list[tuple[int, float]] = []
    near_cuts: list[tuple[int, float]] = []
    delta_lp = -np.inf
    for _ in range(max_rounds):
        coeffs, delta_lp = _peak_lp_complex(
            b_mat, x0, far, near, coeff_bound, directions, far_cuts, near_cuts
        )
        if coeffs is None:
            return None, -np.inf
        if delta_lp < delta_min:
            # the LP is an outer approximation, so its optimum bounds the
            # true best margin from above: certified rejection
            return None, delta_lp
        h = b_mat @ coeffs
        pin = h[x0]
        if abs(pin - 1.0) > PEAK_TOL:
            if abs(pin) < 0.5:
                raise SolverError(f"peak pin drifted to {pin!r} at point {x0}")
            coeffs = coeffs / pin
            h = b_mat @ coeffs
        mods = np.abs(h)
        near_viol = near[mods[near] > 1.0 + PEAK_TOL] if near.size else np.array([], dtype=int)
        if near_viol.size:
            near_cuts.extend((int(y), float(np.angle(h[y]))) for y in near_viol)
            continue
        margin = 1.0 - float(np.max(mods[far])) if far.size else 1.0
        if margin >= delta_min:
            cert = PeakCertificate(
                x0=int(x0), coeffs=tuple(coeffs), margin=margin, radius=float(r)
            )
            ok, why = verify_peak_certificate(span, cert)
            if not ok:
                raise SolverError(f"peak certificate failed re-verification: {why}")
            return cert, margin
        # exact far modulus beat the polygonal estimate: cut the violators
        # (at least the worst one) so the relaxation optimum keeps dropping;
        # None is only ever returned once that optimum falls below delta_min
        far_viol = far[mods[far] > 1.0 - delta_lp + 1e-12]
        if not far_viol.size:
            far_viol = far[[int(np.argmax(mods[far]))]]
        far_cuts.extend((int(y), float(np.angle(h[y]))) for y in far_viol)
    raise SolverError(
        f"peak search at point {x0} (radius {r}) did not settle in {max_rounds} rounds"
    )


def find_peak_function(
    span: FunctionSpan,
    x0: int,
    r: float,
    delta_min: float = DEFAULT_DELTA_MIN,
    directions: int = 16,
    coeff_bound: float = 1e6,
) -> PeakCertificate | None:
    """Search the span for a function peaking at x0.

    Maximizes the margin delta subject to h(x0) = 1, |h| <= 1 at every
    other grid point, and |h| <= 1 - delta at points with distance >= r
    from x0. Returns a re-verified certificate when the achievable margin
    is at least delta_min, otherwise None.
    """
    if r <= 0:
        raise ValueError("peak radius must be positive")
    if not span.unital:
        raise ValueError("peak search needs a unital span")
    if not span.separating:
        raise ValueError("peak search needs a separating span")
    if not 0 <= int(x0) < span.space.n_points:
        raise ValueError("peak point index out of range")
    cert, _ = _peak_search(span, int(x0), float(r), delta_min, directions, coeff_bound)
    return cert


def verify_peak_certificate(
    span: FunctionSpan, cert: PeakCertificate, tol: float = PEAK_TOL
) -> tuple[bool, str]:
    """Re-check a peak certificate by direct evaluation (solver-independent)."""
    h = span.value_matrix @ np.asarray(cert.coeffs)
    d = span.space.pairwise[cert.x0]
    if abs(h[cert.x0] - 1.0) > tol:
        return False, f"|h(x0) - 1| = {abs(h[cert.x0] - 1.0):.3e}"
    if cert.margin <= 0:
        return False, f"margin {cert.margin} is not positive"
    far = d >= cert.radius
    if far.any():
        worst = float(np.max(np.abs(h[far])))
        if worst > 1.0 - cert.margin + tol:
            return False, f"far modulus {worst:.12f} exceeds 1 - margin"
    near = d < cert.radius
    near[cert.x0] = False
    if near.any():
        worst = float(np.max(np.abs(h[near])))
        if worst > 1.0 + tol:
            return False, f"near modulus {worst:.12f} exceeds the unit cap"
    return True, "ok"


def lemma_b_feasible(
    span: FunctionSpan,
    x0: int,
    alpha: float,
    beta: float,
    u_set: PointSet,
    coeff_bound: float = 1e6,
) -> LemmaBCertificate | None:
    """Feasibility of the neighborhood-separation system at x0.

    Searches the span for f with Re f <= 0 on the grid, Re f <= -beta off
    the neighborhood u_set, and Re f(x0) >= -alpha. Returns a re-verified
    certificate, or None when the LP proves the system infeasible.
    """
    if not 0 < alpha < beta:
        raise ValueError("need 0 < alpha < beta")
    if u_set.space is not span.space:
        raise ValueError("neighborhood lives on a different grid")
    if int(x0) not in u_set:
        raise ValueError("x0 must lie inside the neighborhood U")
    space = span.space
    b_mat = span.value_matrix
    n = space.n_points
    outside = np.array(sorted(set(range(n)) - set(u_set.indices)), dtype=int)

    if space.field is Field.COMPLEX:
        re_rows = np.hstack([b_mat.real, -b_mat.imag])
    else:
        re_rows = b_mat
    nv = re_rows.shape[1]

    rows = [re_rows]
    rhs = [np.zeros(n)]
    if outside.size:
        rows.append(re_rows[outside])
        rhs.append(np.full(outside.size, -float(beta)))
    rows.append(-re_rows[int(x0)][None, :])
    rhs.append(np.array([float(alpha)]))
    a_ub = np.vstack(rows)
    b_ub = np.concatenate(rhs)
    bounds = [(-coeff_bound, coeff_bound)] * nv
    res = _solve(np.zeros(nv), a_ub, b_ub, None, None, bounds)
    if res.status != 0:
        return None
    if space.field is Field.COMPLEX:
        k = b_mat.shape[1]
        coeffs = res.x[:k] + 1j * res.x[k:]
    else:
        coeffs = res.x
    cert = LemmaBCertificate(
        x0=int(x0),
        coeffs=tuple(coeffs),
        alpha=float(alpha),
        beta=float(beta),
        u_indices=tuple(u_set.indices),
    )
    ok, why = verify_lemma_b_certificate(span, cert)
    if not ok:
        raise SolverError(f"separation certificate failed re-verification: {why}")
    return cert


def verify_lemma_b_certificate(
    span: FunctionSpan, cert: LemmaBCertificate, tol: float = PEAK_TOL
) -> tuple[bool, str]:
    """Re-check a separation certificate by direct evaluation."""
    f = span.value_matrix @ np.asarray(cert.coeffs)
    re_f = f.real if np.iscomplexobj(f) else f
    if float(re_f.max()) > tol:
        return False, f"Re f reaches {re_f.max():.3e} > 0"
    inside = set(cert.u_indices)
    outside = [i for i in range(span.space.n_points) if i not in inside]
    if outside and float(np.max(re_f[outside])) > -cert.beta + tol:
        return False, "Re f does not drop below -beta off U"
    if float(re_f[cert.x0]) < -cert.alpha - tol:
        return False, f"Re f(x0) = {re_f[cert.x0]:.3e} below -alpha"
    return True, "ok"


def lemma_b_scan(
    span: FunctionSpan,
    x0: int,
    params: ChoquetParams = ChoquetParams(),
    alpha_beta_grid=DEFAULT_ALPHA_BETA_GRID,
) -> LemmaBCertificate | None:
    """Sampled form of the separation criterion at one point.

    The criterion quantifies over every (alpha, beta) pair and every
    neighborhood; here the pairs come from a small default grid and the
    neighborhoods are the scan balls of the radius list. Returns the first
    certificate found, so a non-None result means "detected at these
    parameters" and None means no more than that.
    """
    from .space import open_ball

    for alpha, beta in alpha_beta_grid:
        for r in params.radii(span.space):
            cert = lemma_b_feasible(
                span, x0, alpha, beta, open_ball(span.space, x0, r), params.coeff_bound
            )
            if cert is not None:
                return cert
    return None


def estimate_choquet_boundary(
    span: FunctionSpan, params: ChoquetParams = ChoquetParams()
) -> BoundaryEstimate:
    """Classify every grid point by scanning peak radii.

    A point is Boundary once any radius admits a peak certificate (the
    largest-margin certificate is kept), NotDetected when the LP proves
    every radius infeasible at the margin threshold, and Indeterminate when
    the solver failed and no certificate was found.
    """
    if not span.unital:
        raise ValueError("boundary estimation needs a unital span")
    if not span.separating:
        raise ValueError("boundary estimation needs a separating span")
    radii = tuple(sorted(params.radii(span.space)))
    if not radii or radii[0] <= 0:
        raise ValueError("radius list must contain positive radii")
    b_mat = span.value_matrix
    results = []
    for i in range(span.space.n_points):
        best_cert: PeakCertificate | None = None
        best_delta = -np.inf
        solver_trouble = False
        note = ""
        d = span.space.pairwise[i]
        for r in radii:
            if best_cert is not None:
                # a peak inside a smaller radius stays one for larger radii:
                # the far set only shrinks, so re-evaluate instead of re-solving
                h = b_mat @ np.asarray(best_cert.coeffs)
                far = d >= r
                margin = 1.0 - float(np.max(np.abs(h[far]))) if far.any() else 1.0
                cand = PeakCertificate(i, best_cert.coeffs, margin, float(r))
                if margin >= params.delta_min and verify_peak_certificate(span, cand)[0]:
                    best_delta = max(best_delta, margin)
                    if margin > best_cert.margin:
                        best_cert = cand
                    continue
            try:
                cert, delta = _peak_search(
                    span, i, r, params.delta_min, params.directions, params.coeff_bound
                )
            except SolverError as exc:
                solver_trouble = True
                note = str(exc)
                continue
            best_delta = max(best_delta, delta)
            if cert is not None and (best_cert is None or cert.margin > best_cert.margin):
                best_cert = cert
        if best_cert is not None:
            label = Classification.BOUNDARY
        elif solver_trouble:
            label = Classification.INDETERMINATE
        else:
            label = Classification.NOT_DETECTED
        results.append(
            PointClassification(
                index=i,
                label=label,
                certificate=best_cert,
                best_delta=float(best_delta) if np.isfinite(best_delta) else -np.inf,
                note=note,
            )
        )
    return BoundaryEstimate(
        span=span, points=tuple(results), r_list=radii, delta_min=params.delta_min
    )


def is_boundary_for(
    span: FunctionSpan, pts: PointSet, probes, tol: float = 1e-9
) -> tuple[bool, float]:
    """Whether every probe attains its maximum modulus on the point set.

    Probes must belong to the span. Returns the flag together with the
    worst ratio max-on-subset / sup-norm over all probes.
    """
    if len(pts) == 0:
        raise ValueError("boundary check needs a nonempty point set")
    if pts.space is not span.space:
        raise ValueError("point set lives on a different grid")
    worst = np.inf
    idx = list(pts.indices)
    for f in probes:
        if not span.contains_values(f.values):
            raise ValueError(f"probe {f.name!r} is not in the span")
        full = float(np.max(np.abs(f.values)))
        if full == 0.0:
            continue
        on_set = float(np.max(np.abs(f.values[idx])))
        worst = min(worst, on_set / full)
    if not np.isfinite(worst):
        worst = 1.0
    return worst >= 1.0 - tol, worst
