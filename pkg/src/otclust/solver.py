"""Capacity-balancing solvers: drive cell masses to prescribed values.

The optimization variable is the per-site offset vector h.  The convex
energy

    E(h) = (mass-weighted sum of best scores under h) - <capacities, h>

has gradient w(h) - nu, where w are the current cell masses and nu the
prescribed capacities.  Minimizing E makes every site absorb exactly its
capacity, and the induced assignment is then the cheapest whole-sample
transport onto the sites.

Two minimizers are provided: a damped second-order method using cell
geometry (2D), and a first-order method that needs only assignments and
therefore works in any dimension.  Both keep the offset vector pinned
(last entry zero) to remove the constant-shift degeneracy, and both only
ever accept energy-decreasing steps.
"""

from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_factor, cho_solve

from otclust.diagram import (
    PowerDiagram,
    TransportPlan,
    curvature_matrix,
    empirical_facet_densities,
    power_diagram,
    uniform_facet_densities,
)
from otclust.errors import (
    DegenerateConfigurationError,
    NonConvergenceError,
    UnsupportedModeError,
)
from otclust.kernels import assign_and_masses
from otclust.measures import (
    CentroidSet,
    Domain,
    EmpiricalMeasure,
    bounding_domain,
    validate_pairing,
)

# Escalating diagonal regularization tried when the reduced curvature
# matrix is not numerically positive definite.
_JITTERS = (0.0, 1e-10, 1e-8, 1e-6)

# Fraction of the squared data diameter used as the base first-order step:
# moving a boundary across the whole domain needs an offset change of
# roughly diameter^2, and mass imbalances are at most 1.
_GD_SCALE = 0.2

# A step is "improving" if it beats the best energy seen by this margin.
_IMPROVE_RTOL = 1e-12

# Density-estimation band around facets, as a fraction of domain diameter.
_BAND_FRACTION = 0.05

# Samples whose winning score margin is below this (relative to the score
# scale) sit on a cell boundary to working precision; their assignment is a
# tie that may be re-resolved without changing the energy.
_TIE_RTOL = 1e-9

# When the line search fails, this many tied-sample flips are probed for an
# alternative one-sided descent direction, and at most this many such escape
# steps are taken per solve.  Escape probes give up after a few backtracks:
# a direction that only admits microscopic steps will not restart progress.
_ESCAPE_FLIPS = 8
_ESCAPE_TOTAL = 50
_ESCAPE_BACKTRACKS = 12


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by both solvers.

    ``epsilon`` is the mass-imbalance tolerance (infinity norm of w - nu);
    ``lam`` scales the first trial step of each iteration and is halved by
    ``backtrack_factor`` until the energy decreases, down to ``min_step``.
    ``patience`` is how many non-improving iterations are tolerated before
    a sampled-measure solve is declared converged at atom resolution.
    ``trace``, if set, receives one CSV line per iteration (a callable or
    a writable file-like object).
    """

    epsilon: float = 1e-6
    max_iter: int = 1000
    lam: float = 1.0
    backtrack_factor: float = 0.5
    min_step: float = 1e-12
    patience: int = 30
    trace: object = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"lam must be in (0, 1], got {self.lam}")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must be in (0, 1)")
        if self.min_step <= 0.0:
            raise ValueError("min_step must be positive")
        if self.patience < 1:
            raise ValueError("patience must be positive")


@dataclass(frozen=True)
class SolverState:
    """Snapshot of one iteration, attached to non-convergence errors."""

    h: np.ndarray
    w: np.ndarray
    grad: np.ndarray
    energy: float
    iteration: int
    mode: str


@dataclass(frozen=True)
class SolverResult:
    """Converged solve: offsets, mass vector, and the realized transport.

    Iterating the result yields ``(h, plan-or-diagram, w)`` so it unpacks
    like a triple; sampled solves carry a plan, uniform-density solves a
    diagram.
    """

    h: np.ndarray
    w: np.ndarray
    energy: float
    iterations: int
    mode: str
    plan: TransportPlan | None = None
    diagram: PowerDiagram | None = None
    converged: bool = True

    def __iter__(self):
        yield self.h
        yield self.plan if self.plan is not None else self.diagram
        yield self.w


def _pin(h):
    """Shift offsets so the last entry is exactly zero."""
    out = h - h[-1]
    out[-1] = 0.0
    return out


def _emit(sink, line):
    if sink is None:
        return
    write = getattr(sink, "write", None)
    (write if write is not None else sink)(line)


class _UniformProblem:
    """Uniform density over a convex 2D region; masses are scaled areas."""

    kind = "uniform"

    def __init__(self, domain, y):
        if domain.kind == "discrete":
            raise UnsupportedModeError(
                "uniform-density solve needs 2D region geometry, not a discrete domain"
            )
        self.domain = domain
        self.y = y
        self.nu = np.asarray(y.capacities, dtype=np.float64)
        self.rho = float(np.sum(self.nu)) / domain.area
        self.diameter = domain.diameter
        self.max_atom = None

    @property
    def k(self):
        return self.y.k

    def evaluate(self, h):
        diagram = power_diagram(self.y.positions, h, self.domain)
        w = diagram.areas() * self.rho
        # Integrating the best score over cell j gives
        # area_j * (<cell centroid, y_j> + h_j).
        total = 0.0
        pos = self.y.positions
        for cell in diagram.cells:
            if cell.centroid is None:
                continue
            j = cell.index
            cx, cy = cell.centroid
            total += cell.area * (cx * pos[j, 0] + cy * pos[j, 1] + h[j])
        energy = self.rho * total - float(self.nu @ h)
        return w, energy, diagram

    def diagram_at(self, h, aux):
        return aux

    def facet_densities(self, diagram):
        return uniform_facet_densities(diagram, self.rho)


class _SampledProblem:
    """Finite weighted samples; masses are sums of assigned weights."""

    kind = "sampled"

    def __init__(self, m, y):
        validate_pairing(m, y)
        self.m = m
        self.y = y
        self.nu = np.asarray(y.capacities, dtype=np.float64)
        self.max_atom = float(np.max(m.weights))
        self._domain = None

    @property
    def k(self):
        return self.y.k

    @property
    def domain(self):
        if self._domain is None:
            cloud = np.vstack([self.m.points, self.y.positions])
            self._domain = bounding_domain(cloud)
        return self._domain

    @property
    def diameter(self):
        return self.domain.diameter

    def evaluate(self, h):
        labels, w, score = assign_and_masses(
            self.m.points, self.m.weights, self.y.positions, h
        )
        energy = score - float(self.nu @ h)
        return w, energy, labels

    def diagram_at(self, h, aux):
        return power_diagram(self.y.positions, h, self.domain)

    def facet_densities(self, diagram):
        band = _BAND_FRACTION * self.diameter
        return empirical_facet_densities(diagram, self.m.points, self.m.weights, band)


def _problem_for(m, y):
    if isinstance(m, Domain):
        return _UniformProblem(m, y)
    if isinstance(m, EmpiricalMeasure):
        return _SampledProblem(m, y)
    raise TypeError(f"expected EmpiricalMeasure or Domain, got {type(m).__name__}")


def energy(h, m, y):
    """Value of the convex balancing energy at offsets ``h``."""
    hv = _check_offsets(h, y)
    return _problem_for(m, y).evaluate(hv)[1]


def gradient(h, m, y):
    """Mass residual ``w(h) - nu``; zero exactly at balanced offsets."""
    hv = _check_offsets(h, y)
    problem = _problem_for(m, y)
    w, _, _ = problem.evaluate(hv)
    return w - problem.nu


def _check_offsets(h, y):
    hv = np.ascontiguousarray(h, dtype=np.float64)
    if hv.shape != (y.k,):
        raise ValueError(f"expected {y.k} offsets, got shape {hv.shape}")
    if not np.all(np.isfinite(hv)):
        raise ValueError("offsets must be finite")
    return hv


def hessian(diagram, y, domain, measure=None, band=None):
    """Curvature of the balancing energy at the diagram's offsets.

    With no ``measure`` the density along facets is uniform (total
    capacity spread over the domain).  Passing a sampled ``measure``
    estimates facet densities from sample mass within ``band`` of each
    facet (default: 5% of the domain diameter).  The result is a weighted
    graph Laplacian: symmetric, zero row sums, positive semidefinite.
    """
    if domain is None or domain.kind == "discrete":
        raise UnsupportedModeError(
            "curvature needs 2D cell geometry; use the gradient-descent solver instead"
        )
    if measure is None:
        rho = float(np.sum(y.capacities)) / domain.area
        densities = uniform_facet_densities(diagram, rho)
    else:
        if band is None:
            band = _BAND_FRACTION * domain.diameter
        densities = empirical_facet_densities(
            diagram, measure.points, measure.weights, band
        )
    return curvature_matrix(diagram, densities)


def solve_vot(m, y, config=None, h0=None):
    """Second-order balancing solve (2D only).

    ``m`` is either a 2D :class:`Domain` (uniform density) or a 2D
    :class:`EmpiricalMeasure`.  Returns a :class:`SolverResult` that
    unpacks as ``(h, diagram-or-plan, w)``.  ``h0`` warm-starts the
    offsets (defaults to zeros).
    """
    cfg = config if config is not None else SolverConfig()
    problem = _problem_for(m, y)
    if isinstance(m, EmpiricalMeasure) and m.dim != 2:
        raise UnsupportedModeError(
            f"cell geometry is 2D only (data is {m.dim}D); use solve_vot_gd"
        )
    return _minimize(problem, cfg, "newton", h0)


def solve_vot_gd(m, y, config=None, h0=None):
    """First-order balancing solve; any dimension, sampled measures only."""
    cfg = config if config is not None else SolverConfig()
    if not isinstance(m, EmpiricalMeasure):
        raise UnsupportedModeError(
            "the gradient-descent solver works on sampled measures; "
            "use solve_vot for uniform-density domains"
        )
    return _minimize(_SampledProblem(m, y), cfg, "gd", h0)


def _minimize(problem, cfg, mode, h0=None):
    k = problem.k
    nu = problem.nu
    if h0 is None:
        h = np.zeros(k, dtype=np.float64)
    else:
        h = _pin(_check_offsets(h0, problem.y))
    w, e_val, aux = problem.evaluate(h)

    if problem.max_atom is not None:
        quant_bound = max(cfg.epsilon, 1.01 * problem.max_atom)
    else:
        quant_bound = None
    gd_base = _GD_SCALE * problem.diameter**2 * cfg.lam

    _emit(cfg.trace, "iter,energy,grad_inf_norm,step\n")
    best_e = e_val
    stalled_for = 0
    accepted = 0
    last_step = 0.0
    prev_h = None
    prev_g = None
    escapes = 0
    # A tied-assignment escape that fails to restart real progress disarms
    # further escapes until some step improves the energy again; otherwise a
    # pinned endgame would re-probe the same ties every iteration.
    escape_armed = True
    it = 0
    while True:
        g = w - nu
        ginf = float(np.max(np.abs(g)))
        _emit(cfg.trace, f"{it},{e_val:.17g},{ginf:.17g},{last_step:.17g}\n")

        if ginf < cfg.epsilon:
            return _finish(problem, h, w, e_val, accepted, mode)
        pinned = (
            quant_bound is not None
            and ginf <= quant_bound
            and stalled_for >= cfg.patience
        )
        if pinned:
            # Inside the quantization bound and the energy has stopped
            # improving: either the state is truly pinned at atom
            # resolution, or tied samples hide one more descent direction.
            fixed = None
            if escapes < _ESCAPE_TOTAL and escape_armed:
                outcome, payload = _kink_escape(problem, h, w, g, e_val, aux, cfg, gd_base)
                if outcome == "finish":
                    lab2, w2 = payload
                    return _finish(problem, h, w2, e_val, accepted, mode, labels=lab2)
                if outcome == "step":
                    escapes += 1
                    h, w, e_val, aux, last_step = payload
                    accepted += 1
                    if e_val < best_e - _IMPROVE_RTOL * (1.0 + abs(best_e)):
                        best_e = e_val
                        stalled_for = 0
                        escape_armed = True
                    else:
                        stalled_for += 1
                        escape_armed = False
                    it += 1
                    continue
                fixed = payload
            else:
                fixed = _polish_ties(problem, h, aux)
            lab_fin, w_fin = _better_labels(fixed, w, nu)
            return _finish(problem, h, w_fin, e_val, accepted, mode, labels=lab_fin)
        if it >= cfg.max_iter:
            fixed = _polish_ties(problem, h, aux)
            lab_fin, w_fin = _better_labels(fixed, w, nu)
            if quant_bound is not None and float(np.max(np.abs(w_fin - nu))) <= quant_bound:
                return _finish(problem, h, w_fin, e_val, accepted, mode, labels=lab_fin)
            raise NonConvergenceError(
                f"not balanced after {cfg.max_iter} iterations "
                f"(residual {ginf:.3e}, tolerance {cfg.epsilon:.3e})",
                state=SolverState(h, w, g, e_val, it, mode),
            )

        if mode == "newton":
            delta, start, kind = _second_order_direction(problem, h, w, g, aux, cfg, gd_base)
        else:
            start = _spectral_step(h, g, prev_h, prev_g, last_step, gd_base, cfg)
            delta, kind = g, "gd"
            prev_h, prev_g = h, g

        step = _line_search(problem, h, delta, e_val, w, cfg, start)
        if step is None and kind == "newton":
            delta, kind = g, "gd"
            step = _line_search(problem, h, delta, e_val, w, cfg, gd_base)
        was_escape = False
        if step is None:
            if (
                quant_bound is not None
                and ginf <= quant_bound
                and stalled_for >= cfg.patience
            ):
                # Stagnant, stepless, and within one atom of the targets:
                # this is the quantized endgame, not a mid-solve kink.
                fixed = _polish_ties(problem, h, aux)
                lab_fin, w_fin = _better_labels(fixed, w, nu)
                return _finish(problem, h, w_fin, e_val, accepted, mode, labels=lab_fin)
            outcome, payload = "dead", None
            if escapes < _ESCAPE_TOTAL and escape_armed:
                outcome, payload = _kink_escape(problem, h, w, g, e_val, aux, cfg, gd_base)
            if outcome == "finish":
                lab2, w2 = payload
                return _finish(problem, h, w2, e_val, accepted, mode, labels=lab2)
            if outcome == "step":
                escapes += 1
                was_escape = True
                step = payload
            else:
                fixed = payload if payload is not None else _polish_ties(problem, h, aux)
                lab_fin, w_fin = _better_labels(fixed, w, nu)
                if quant_bound is not None and float(np.max(np.abs(w_fin - nu))) <= quant_bound:
                    # No admissible move left; the imbalance is within one atom.
                    return _finish(problem, h, w_fin, e_val, accepted, mode, labels=lab_fin)
                state = SolverState(h, w, g, e_val, it, mode)
                if np.any(w <= 0.0):
                    raise DegenerateConfigurationError(
                        "empty cell with no energy-decreasing step left", state=state
                    )
                raise NonConvergenceError(
                    f"line search stalled at iteration {it} (residual {ginf:.3e})",
                    state=state,
                )

        h, w, e_val, aux, last_step = step
        accepted += 1
        if e_val < best_e - _IMPROVE_RTOL * (1.0 + abs(best_e)):
            best_e = e_val
            stalled_for = 0
            escape_armed = True
        else:
            stalled_for += 1
            if was_escape:
                escape_armed = False
        it += 1


def _finish(problem, h, w, e_val, iterations, mode, labels=None):
    if problem.kind == "sampled":
        if labels is None:
            labels, _, _ = assign_and_masses(
                problem.m.points, problem.m.weights, problem.y.positions, h
            )
        plan = TransportPlan(np.asarray(labels, dtype=np.int64), problem.k)
        return SolverResult(h=h, w=w, energy=e_val, iterations=iterations, mode=mode, plan=plan)
    diagram = power_diagram(problem.y.positions, h, problem.domain)
    return SolverResult(h=h, w=w, energy=e_val, iterations=iterations, mode=mode, diagram=diagram)


def _second_order_direction(problem, h, w, g, aux, cfg, gd_base):
    """Newton direction on the pinned subspace, or a first-order fallback.

    Falls back to the plain gradient when a cell is empty (its curvature
    row vanishes, so the reduced system is meaningless there) or when the
    factorization fails beyond repair.
    """
    if np.any(w <= 0.0):
        return g, gd_base, "gd"
    diagram = problem.diagram_at(h, aux)
    H = curvature_matrix(diagram, problem.facet_densities(diagram))
    k = H.shape[0]
    reduced = H[: k - 1, : k - 1]
    rhs = g[: k - 1]
    eye = np.eye(k - 1)
    for jitter in _JITTERS:
        matrix = reduced if jitter == 0.0 else reduced + jitter * eye
        try:
            factor = cho_factor(matrix, lower=True, check_finite=False)
        except LinAlgError:
            continue
        head = cho_solve(factor, rhs, check_finite=False)
        delta = np.append(head, 0.0)
        if float(g @ delta) > 0.0:  # descent direction for h - lam*delta
            return delta, cfg.lam, "newton"
    return g, gd_base, "gd"


def _spectral_step(h, g, prev_h, prev_g, last_step, gd_base, cfg):
    """Trial step length for the first-order direction.

    Uses the secant pair of the last two iterates (Barzilai-Borwein) to
    match the local curvature of the balancing energy; a fixed decaying
    schedule starves the endgame on large instances where imbalance has
    to diffuse across many adjacent cells.  The trial is clipped to the
    domain-scale base step and still backtracked by the caller, so the
    accepted step only ever decreases the energy.
    """
    if prev_h is None:
        return gd_base
    dh = h - prev_h
    dg = g - prev_g
    den = float(dh @ dg)
    if den <= 0.0:
        # No mass moved between the iterates (flat stretch): grow from the
        # last accepted step instead of trusting a degenerate secant.
        trial = 4.0 * last_step if last_step > 0.0 else gd_base
    else:
        trial = float(dh @ dh) / den
    return min(max(trial, cfg.min_step), gd_base)


def _tie_edges(problem, h, labels):
    """Numerically tied (sample, other-cell) pairs at the current offsets."""
    pts = problem.m.points
    scores = pts @ problem.y.positions.T + h
    n = scores.shape[0]
    lab = np.asarray(labels, dtype=np.int64)
    best = scores[np.arange(n), lab]
    tol = _TIE_RTOL * max(1.0, float(np.max(np.abs(best))))
    tied_i, tied_c = np.nonzero(best[:, None] - scores <= tol)
    off_diag = tied_c != lab[tied_i]
    return tied_i[off_diag], tied_c[off_diag]


def _polish_ties(problem, h, labels):
    """Re-resolve numerically tied assignments toward the capacity targets.

    Long first-order endgames park samples exactly on cell boundaries:
    their score gaps shrink to round-off, so either side is a faithful
    assignment.  This routine re-routes such samples along augmenting
    paths from over-full toward under-full cells, shrinking the total
    capacity surplus; the offsets and the energy are untouched.  Returns
    ``(labels, masses)`` after at least one improving chain, or ``None``
    when no tied sample can absorb any of the imbalance.
    """
    if problem.kind != "sampled" or labels is None:
        return None
    tied_i, tied_c = _tie_edges(problem, h, labels)
    if tied_i.size == 0:
        return None
    wts = problem.m.weights
    nu = problem.nu
    k = problem.k
    lab = np.array(labels, dtype=np.int64, copy=True)
    w = np.bincount(lab, weights=wts, minlength=k).astype(np.float64)
    tol_w = 1e-9 * float(np.max(wts))

    improved = False
    for _ in range(lab.size + k):
        surplus = w - nu
        worst = int(np.argmax(surplus))
        if surplus[worst] <= tol_w:
            break
        wanted = set(int(j) for j in np.flatnonzero(surplus < -tol_w))
        if not wanted:
            break
        chain = _tie_chain(tied_i, tied_c, lab, [worst], wanted)
        if chain is None:
            sources = list(np.flatnonzero(surplus > tol_w))
            chain = _tie_chain(tied_i, tied_c, lab, sources, {int(np.argmin(surplus))})
        if chain is None or not _apply_chain(lab, w, wts, nu, chain):
            break
        improved = True
    return (lab, w) if improved else None


def _better_labels(fixed, w, nu):
    """Pick the polished labels only when they tighten the residual."""
    if fixed is not None:
        lab2, w2 = fixed
        if float(np.max(np.abs(w2 - nu))) < float(np.max(np.abs(w - nu))):
            return lab2, w2
    return None, w


def _kink_escape(problem, h, w, g, e_val, aux, cfg, gd_base):
    """Try to move past a kink where the one-sided gradient stops descending.

    Samples parked exactly on a cell boundary make the mass vector — and
    with it the gradient — one-sided: a line search along the current
    residual can fail even though the offsets are not optimal, because an
    arbitrarily small step first flips the tied samples and the flipped
    configuration descends along a different direction.  Re-resolving the
    ties yields the other one-sided residuals; a step along one of them
    is still a plain first-order step and keeps the energy monotone.

    Returns ``("finish", (labels, w))`` when tie re-resolution alone
    balances the masses, ``("step", line-search-result)`` when a
    re-resolved residual direction descends, or ``("dead", polished)``
    when nothing moves (``polished`` may carry a partial improvement).
    """
    if problem.kind != "sampled":
        return "dead", None
    nu = problem.nu
    floor = gd_base * cfg.backtrack_factor**_ESCAPE_BACKTRACKS
    polished = _polish_ties(problem, h, aux)
    if polished is not None:
        lab2, w2 = polished
        if float(np.max(np.abs(w2 - nu))) < cfg.epsilon:
            return "finish", polished
        step = _line_search(problem, h, w2 - nu, e_val, w, cfg, gd_base, floor=floor)
        if step is not None:
            return "step", step
    tied_i, tied_c = _tie_edges(problem, h, aux)
    lab = np.asarray(aux)
    wts = problem.m.weights
    for count, (i, c) in enumerate(zip(tied_i, tied_c)):
        if count >= _ESCAPE_FLIPS:
            break
        g2 = g.copy()
        g2[lab[i]] -= wts[i]
        g2[c] += wts[i]
        step = _line_search(problem, h, g2, e_val, w, cfg, gd_base, floor=floor)
        if step is not None:
            return "step", step
    return "dead", polished


def _tie_chain(tied_i, tied_c, lab, sources, targets):
    """Shortest move chain over tie edges from any source cell to a target.

    Returns a list of (sample, from_cell, to_cell) moves, ordered from the
    source outward, or ``None`` when the targets are unreachable.
    """
    parent = {int(s): None for s in sources}
    frontier = list(parent)
    while frontier:
        grown = []
        for u in frontier:
            in_u = lab[tied_i] == u
            for i, v in zip(tied_i[in_u], tied_c[in_u]):
                v = int(v)
                if v in parent:
                    continue
                parent[v] = (u, int(i))
                if v in targets:
                    moves = []
                    node = v
                    while parent[node] is not None:
                        prev, atom = parent[node]
                        moves.append((atom, prev, node))
                        node = prev
                    moves.reverse()
                    return moves
                grown.append(v)
        frontier = grown
    return None


def _apply_chain(lab, w, wts, nu, chain):
    """Apply tie moves if they strictly shrink the total capacity surplus."""

    def surplus(v):
        return float(np.maximum(v - nu, 0.0).sum())

    before = surplus(w)
    for atom, src, dst in chain:
        lab[atom] = dst
        w[src] -= wts[atom]
        w[dst] += wts[atom]
    if surplus(w) < before - 1e-15:
        return True
    for atom, src, dst in reversed(chain):
        lab[atom] = src
        w[dst] -= wts[atom]
        w[src] += wts[atom]
    return False


def _line_search(problem, h, delta, e0, w0, cfg, start, floor=None):
    """Backtrack ``h - lam*delta`` until the energy strictly decreases.

    A trial is also rejected if it empties a cell that currently holds
    mass; cells that are already empty may stay empty (the gradient pulls
    them back on its own).  ``floor`` raises the smallest step tried above
    the configured minimum (used by escape probes, which only care about
    macroscopic progress).
    """
    alive = w0 > 0.0
    lam = start
    lo = cfg.min_step if floor is None else max(cfg.min_step, floor)
    while lam >= lo:
        h_try = _pin(h - lam * delta)
        w, e_try, aux = problem.evaluate(h_try)
        if e_try < e0 and not np.any(alive & (w <= 0.0)):
            return h_try, w, e_try, aux, lam
        lam *= cfg.backtrack_factor
    return None
