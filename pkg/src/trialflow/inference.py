"""Posterior-mode inference and expected utility on the reduced model.

The log-posterior is a sum of beta log-priors over the free parameters
and binomial log-likelihoods whose rates come from composing the
diagram's deterministic functions. The mode search runs damped
Newton-Raphson in logit space with an outer-product-of-scores Hessian
approximation; posterior summaries are Laplace in logit space, with
exact beta posteriors reported wherever conjugacy holds. Expected
utility per arm is one-dimensional Gauss-Legendre quadrature against
the arm parameter's marginal posterior.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .diagram import (
    Arm,
    ChanceBeta,
    Deterministic,
    DetFn,
    Evidence,
    Identity,
    InfluenceDiagram,
    Level,
    MeasurementError,
    Mixture,
    ReductionMap,
    fn_local_partials,
    fn_value,
)
from .errors import BoundaryPoint, EmptyModel, NotConverged, PendingPriors

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_X = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


@dataclass
class PriorTerm:
    index: int  # position in the free-parameter vector
    a: float
    b: float


@dataclass
class BinomialTerm:
    successes: int
    trials: int
    rate_node: int  # node whose value is the binomial rate


@dataclass
class ReducedModel:
    diagram: InfluenceDiagram
    reduction: ReductionMap
    free_ids: list[int]
    a: np.ndarray
    b: np.ndarray
    terms: list
    #: deterministic nodes to evaluate, in topological order, with
    #: parent references already rewritten through the reduction
    plan: list[tuple[int, DetFn]]
    #: free parameters never fed into a non-identity function; their
    #: posteriors are exact beta
    conjugate: set[int]

    @property
    def m(self) -> int:
        return len(self.free_ids)

    @property
    def n(self) -> int:
        return self.reduction.total_count

    def index_of(self, node_id: int) -> int:
        return self.free_ids.index(node_id)


@dataclass
class UtilitySpec:
    """Utility over an outcome rate; default is life expectancy
    ``lifespan * (1 - rate)``."""

    kind: str = "linear_life_expectancy"
    lifespan: float = 10.0
    grid: np.ndarray | None = None  # custom: tabulated values
    values: np.ndarray | None = None

    def u(self, theta: np.ndarray) -> np.ndarray:
        if self.kind == "linear_life_expectancy":
            return self.lifespan * (1.0 - theta)
        if self.kind == "custom":
            return np.interp(theta, self.grid, self.values)
        raise ValueError(f"unknown utility kind {self.kind!r}")

    @classmethod
    def from_config(cls, doc: dict | None) -> "UtilitySpec":
        if not doc:
            return cls()
        if doc.get("kind", "linear_life_expectancy") == "custom":
            return cls("custom", grid=np.asarray(doc["grid"]), values=np.asarray(doc["values"]))
        return cls(lifespan=float(doc.get("lifespan", 10.0)))


@dataclass
class ModeOptions:
    tolerance: float = 1e-6
    improvement_tol: float = 1e-10
    max_iter: int = 500
    max_backtracks: int = 60
    max_step: float = 10.0  # sup-norm cap on a Newton step, logit units
    seed: int = 0
    extra_starts: tuple = ()


@dataclass
class ParamSummary:
    param: int
    name: str
    mode: float
    sd_logit: float
    interval: tuple[float, float]
    exact_beta: tuple[float, float] | None


@dataclass
class ModeResult:
    mode: dict[int, float]
    z: np.ndarray
    log_posterior_at_mode: float
    iterations: int
    converged: bool
    hessian_condition: float
    ridge_escalations: int
    summaries: list[ParamSummary]
    m: int
    n: int


# ----------------------------------------------------------------------
# model construction


def build_reduced(diagram: InfluenceDiagram, reduce: bool = True) -> ReducedModel:
    """Assemble prior and likelihood terms from a diagram.

    With ``reduce=False`` identity chains are kept and evaluated
    node-by-node; the log-posterior must not change either way.
    """
    pending = diagram.pending_ids()
    if pending:
        names = ", ".join(diagram.nodes[p].name for p in pending)
        raise PendingPriors(f"priors not yet elicited for: {names}")
    free_ids = diagram.free_ids()
    if not free_ids:
        raise EmptyModel("model has no free parameters")

    reduction = diagram.eliminate_identical()
    rep = reduction.representative if reduce else {i: i for i in diagram.parameter_ids()}

    plan: list[tuple[int, DetFn]] = []
    for node_id in diagram.topological_order():
        kind = diagram.nodes[node_id].kind
        if not isinstance(kind, Deterministic):
            continue
        if reduce and isinstance(kind.fn, Identity):
            continue
        fn = kind.fn
        if isinstance(fn, Identity):
            fn = Identity(rep[fn.parent])
        elif isinstance(fn, Mixture):
            fn = Mixture(rep[fn.mix], rep[fn.in_part], rep[fn.out_part])
        else:
            fn = MeasurementError(rep[fn.sens], rep[fn.spec], rep[fn.source])
        plan.append((node_id, fn))

    index = {fid: i for i, fid in enumerate(free_ids)}
    a = np.array([diagram.nodes[f].kind.a for f in free_ids], dtype=float)
    b = np.array([diagram.nodes[f].kind.b for f in free_ids], dtype=float)
    terms: list = [PriorTerm(index[f], a[i], b[i]) for i, f in enumerate(free_ids)]
    for eid in diagram.evidence_ids():
        ev: Evidence = diagram.nodes[eid].kind
        terms.append(BinomialTerm(ev.successes, ev.trials, rep[ev.parent]))

    # Conjugacy: the parameter may appear only as an evidence rate.
    fed_nonidentity: set[int] = set()
    for node_id in diagram.parameter_ids():
        kind = diagram.nodes[node_id].kind
        if isinstance(kind, Deterministic) and not isinstance(kind.fn, Identity):
            for p in (
                [kind.fn.mix, kind.fn.in_part, kind.fn.out_part]
                if isinstance(kind.fn, Mixture)
                else [kind.fn.sens, kind.fn.spec, kind.fn.source]
            ):
                fed_nonidentity.add(reduction.representative[p])
    conjugate = {f for f in free_ids if f not in fed_nonidentity}

    return ReducedModel(diagram, reduction, free_ids, a, b, terms, plan, conjugate)


def node_values(model: ReducedModel, phi: np.ndarray) -> dict[int, np.ndarray]:
    """Values of every planned node; ``phi`` may carry leading axes."""
    values: dict[int, np.ndarray] = {
        fid: phi[..., i] for i, fid in enumerate(model.free_ids)
    }
    for node_id, fn in model.plan:
        values[node_id] = fn_value(fn, values)
    return values


# ----------------------------------------------------------------------
# objective, gradient, curvature


def log_posterior(model: ReducedModel, phi) -> np.ndarray:
    """Unnormalized log-posterior; additive constants dropped."""
    phi = np.asarray(phi, dtype=float)
    if not (np.all(phi > 0.0) and np.all(phi < 1.0)):
        raise BoundaryPoint("free values must lie strictly inside (0, 1)")
    values = node_values(model, phi)
    lp = np.zeros(phi.shape[:-1])
    for term in model.terms:
        if isinstance(term, PriorTerm):
            x = phi[..., term.index]
            lp = lp + (term.a - 1.0) * np.log(x) + (term.b - 1.0) * np.log1p(-x)
        else:
            p = values[term.rate_node]
            lp = lp + term.successes * np.log(p) + (term.trials - term.successes) * np.log1p(-p)
    return lp


def _node_gradients(model: ReducedModel, phi: np.ndarray) -> dict[int, np.ndarray]:
    """d(node value)/d(phi) for every planned node, by forward chain rule."""
    values = node_values(model, phi)
    m = model.m
    grads: dict[int, np.ndarray] = {}
    for i, fid in enumerate(model.free_ids):
        g = np.zeros(m)
        g[i] = 1.0
        grads[fid] = g
    for node_id, fn in model.plan:
        local = fn_local_partials(fn, values)
        g = np.zeros(m)
        for parent, w in local.items():
            g = g + w * grads[parent]
        grads[node_id] = g
    return grads


def gradient(model: ReducedModel, phi) -> tuple[np.ndarray, list[np.ndarray]]:
    """Total gradient of the log-posterior and per-term gradients, in
    the rate (phi) space."""
    phi = np.asarray(phi, dtype=float)
    if not (np.all(phi > 0.0) and np.all(phi < 1.0)):
        raise BoundaryPoint("free values must lie strictly inside (0, 1)")
    values = node_values(model, phi)
    grads = _node_gradients(model, phi)
    per_term: list[np.ndarray] = []
    for term in model.terms:
        if isinstance(term, PriorTerm):
            g = np.zeros(model.m)
            x = phi[term.index]
            g[term.index] = (term.a - 1.0) / x - (term.b - 1.0) / (1.0 - x)
        else:
            p = values[term.rate_node]
            dldp = term.successes / p - (term.trials - term.successes) / (1.0 - p)
            g = dldp * grads[term.rate_node]
        per_term.append(g)
    total = np.sum(per_term, axis=0) if per_term else np.zeros(model.m)
    return total, per_term


def _score_hessian(model: ReducedModel, phi: np.ndarray) -> np.ndarray:
    """Outer-product (BHHH) curvature approximation in logit space.

    Terms are decomposed to unit pseudo-observations: a binomial of
    (s, n) contributes s copies of the success score and n - s of the
    failure score; a Beta(a, b) prior contributes a - 1 and b - 1
    pseudo-counts. At a conjugate mode this sum reproduces the exact
    observed information.
    """
    values = node_values(model, phi)
    grads = _node_gradients(model, phi)
    dphi_dz = phi * (1.0 - phi)
    H = np.zeros((model.m, model.m))
    for term in model.terms:
        if isinstance(term, PriorTerm):
            dz = np.zeros(model.m)
            dz[term.index] = dphi_dz[term.index]
            x = phi[term.index]
            u = dz / x
            v = -dz / (1.0 - x)
            H += (term.a - 1.0) * np.outer(u, u) + (term.b - 1.0) * np.outer(v, v)
        else:
            p = values[term.rate_node]
            dpdz = grads[term.rate_node] * dphi_dz
            u = dpdz / p
            v = -dpdz / (1.0 - p)
            H += term.successes * np.outer(u, u)
            H += (term.trials - term.successes) * np.outer(v, v)
    return H


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _logit(x: np.ndarray) -> np.ndarray:
    return np.log(x) - np.log1p(-x)


def _solve_with_ridge(H: np.ndarray, g: np.ndarray):
    """Solve (H + ridge I) d = g, escalating the ridge on singularity."""
    m = H.shape[0]
    trace = float(np.trace(H))
    lam = max(1e-8 * trace / m, 1e-12)
    escalations = 0
    while True:
        try:
            delta = np.linalg.solve(H + lam * np.eye(m), g)
            if np.all(np.isfinite(delta)):
                return delta, lam, escalations
        except np.linalg.LinAlgError:
            pass
        if escalations >= 6:
            raise NotConverged("curvature matrix unusable even after ridge escalation")
        lam *= 10.0
        escalations += 1


# ----------------------------------------------------------------------
# mode search


def posterior_mode(model: ReducedModel, options: ModeOptions | None = None) -> ModeResult:
    """Damped Newton-Raphson ascent in logit space, best of all starts."""
    opts = options or ModeOptions()
    rng = np.random.default_rng(opts.seed)
    starts = [
        model.a / (model.a + model.b),
        np.full(model.m, 0.5),
        rng.uniform(0.05, 0.95, model.m),
    ]
    starts.extend(np.asarray(s, dtype=float) for s in opts.extra_starts)

    best: tuple | None = None
    total_escalations = 0
    for phi0 in starts:
        z = _logit(np.clip(phi0, 1e-12, 1.0 - 1e-12))
        lp = float(log_posterior(model, _sigmoid(z)))
        converged = False
        iterations = 0
        for iterations in range(1, opts.max_iter + 1):
            phi = _sigmoid(z)
            g_phi, _ = gradient(model, phi)
            g_z = g_phi * phi * (1.0 - phi)
            if np.max(np.abs(g_z)) < opts.tolerance:
                converged = True
                break
            H = _score_hessian(model, phi)
            try:
                delta, _, esc = _solve_with_ridge(H, g_z)
            except NotConverged:
                break
            total_escalations += esc
            # Cap the step so a degenerate curvature estimate cannot fling
            # the iterate into sigmoid saturation.
            biggest = float(np.max(np.abs(delta)))
            if biggest > opts.max_step:
                delta = delta * (opts.max_step / biggest)
            step = 1.0
            accepted = False
            for _ in range(opts.max_backtracks):
                z_new = z + step * delta
                phi_new = _sigmoid(z_new)
                if np.all(phi_new > 0.0) and np.all(phi_new < 1.0):
                    lp_new = float(log_posterior(model, phi_new))
                    if np.isfinite(lp_new) and lp_new >= lp:
                        accepted = True
                        break
                step *= 0.5
            if not accepted:
                converged = True  # no ascent direction improves: stationary
                break
            improvement = lp_new - lp
            z, lp = z_new, lp_new
            if improvement < opts.improvement_tol:
                converged = True
                break
        if best is None or lp > best[0]:
            best = (lp, z, converged, iterations)

    lp, z, converged, iterations = best
    phi = _sigmoid(z)
    H = _score_hessian(model, phi)
    delta_unused, lam, esc = _solve_with_ridge(H, np.zeros(model.m))
    cond = float(np.linalg.cond(H + lam * np.eye(model.m)))
    result = ModeResult(
        mode={fid: float(phi[i]) for i, fid in enumerate(model.free_ids)},
        z=z,
        log_posterior_at_mode=lp,
        iterations=iterations,
        converged=converged,
        hessian_condition=cond,
        ridge_escalations=total_escalations + esc,
        summaries=[],
        m=model.m,
        n=model.n,
    )
    result.summaries = laplace_summaries(model, result)
    return result


def _exact_beta_shapes(model: ReducedModel, param: int) -> tuple[float, float]:
    i = model.index_of(param)
    a, b = model.a[i], model.b[i]
    for term in model.terms:
        if isinstance(term, BinomialTerm) and term.rate_node == param:
            a += term.successes
            b += term.trials - term.successes
    return float(a), float(b)


def laplace_summaries(model: ReducedModel, result: ModeResult) -> list[ParamSummary]:
    """Per-parameter mode, logit-space spread, and 95% interval.

    The covariance is the inverse outer-product Hessian at the mode;
    conjugate parameters are additionally tagged with their exact beta
    posterior shapes.
    """
    phi = _sigmoid(result.z)
    H = _score_hessian(model, phi)
    m = model.m
    trace = float(np.trace(H))
    lam = max(1e-8 * trace / m, 1e-12)
    cov = None
    for _ in range(7):
        try:
            cov = np.linalg.inv(H + lam * np.eye(m))
            if np.all(np.isfinite(cov)) and np.all(np.diag(cov) > 0):
                break
        except np.linalg.LinAlgError:
            pass
        cov = None
        lam *= 10.0
    if cov is None:
        raise NotConverged("singular curvature at the mode; no Laplace summary")
    sd_z = np.sqrt(np.diag(cov))
    out = []
    for i, fid in enumerate(model.free_ids):
        lo = float(_sigmoid(result.z[i] - 1.96 * sd_z[i]))
        hi = float(_sigmoid(result.z[i] + 1.96 * sd_z[i]))
        exact = _exact_beta_shapes(model, fid) if fid in model.conjugate else None
        out.append(
            ParamSummary(
                param=fid,
                name=model.diagram.nodes[fid].name,
                mode=float(phi[i]),
                sd_logit=float(sd_z[i]),
                interval=(lo, hi),
                exact_beta=exact,
            )
        )
    return out


# ----------------------------------------------------------------------
# expected utility


def marginal_density(model: ReducedModel, result: ModeResult, param: int, theta: np.ndarray) -> np.ndarray:
    """Marginal posterior density of one free parameter on a grid.

    Exact beta when conjugate, else the Laplace normal in logit space
    mapped back to the rate scale.
    """
    if param in model.conjugate:
        a, b = _exact_beta_shapes(model, param)
        return stats.beta.pdf(theta, a, b)
    i = model.index_of(param)
    summary = result.summaries[i]
    z = _logit(theta)
    return stats.norm.pdf(z, loc=result.z[i], scale=summary.sd_logit) / (theta * (1.0 - theta))


def _support_window(model: ReducedModel, result: ModeResult, param: int) -> tuple[float, float]:
    """Interval carrying essentially all marginal mass, so the fixed
    quadrature rule keeps resolving sharply concentrated posteriors."""
    if param in model.conjugate:
        a, b = _exact_beta_shapes(model, param)
        lo, hi = stats.beta.ppf([1e-12, 1.0 - 1e-12], a, b)
    else:
        i = model.index_of(param)
        sd = result.summaries[i].sd_logit
        lo = _sigmoid(result.z[i] - 10.0 * sd)
        hi = _sigmoid(result.z[i] + 10.0 * sd)
    return float(max(lo, 1e-15)), float(min(hi, 1.0 - 1e-15))


def expected_utility(
    model: ReducedModel, result: ModeResult, utility: UtilitySpec | None = None
) -> dict:
    """Expected utility per arm by 64-node Gauss-Legendre quadrature
    against each arm's marginal posterior, numerically renormalized."""
    if not result.converged:
        raise NotConverged("expected utility needs a converged mode")
    utility = utility or UtilitySpec()

    arm_params: dict[str, int] = {}
    for node in model.diagram.nodes.values():
        if node.level is Level.PATIENT and node.arm in (Arm.EXP, Arm.CTL):
            rep = model.reduction.representative[node.id]
            arm_params["experimental" if node.arm is Arm.EXP else "control"] = rep
    # Fall back to the population outcome parameters directly.
    if len(arm_params) < 2:
        for node in model.diagram.nodes.values():
            if node.level is Level.POPULATION and isinstance(node.kind, ChanceBeta):
                if node.arm is Arm.EXP:
                    arm_params.setdefault("experimental", node.id)
                elif node.arm is Arm.CTL:
                    arm_params.setdefault("control", node.id)
    if set(arm_params) != {"experimental", "control"}:
        raise EmptyModel("model has no per-arm outcome parameters")

    out: dict = {}
    for arm, param in sorted(arm_params.items()):
        lo, hi = _support_window(model, result, param)
        x = lo + (hi - lo) * _GL_X
        w = (hi - lo) * _GL_W
        density = marginal_density(model, result, param, x)
        norm = float(np.sum(w * density))
        eu = float(np.sum(w * utility.u(x) * density) / norm)
        key = "experimental" if arm == "experimental" else "control"
        out[f"eu_{key}"] = eu
        out[f"normalization_{key}"] = norm
    diff = out["eu_experimental"] - out["eu_control"]
    if abs(diff) < 1e-9:
        out["recommended"] = "indifferent"
    else:
        out["recommended"] = "experimental" if diff > 0 else "control"
    return out


# ----------------------------------------------------------------------
# full report


def inference_report(diagram: InfluenceDiagram, utility: UtilitySpec | None = None,
                     options: ModeOptions | None = None) -> dict:
    """Deterministic JSON-ready report: modes, intervals, expected
    utility, and convergence diagnostics."""
    model = build_reduced(diagram)
    result = posterior_mode(model, options)
    report: dict = {
        "m": result.m,
        "n": result.n,
        "iterations": result.iterations,
        "converged": result.converged,
        "hessian_condition": result.hessian_condition,
        "ridge_escalations": result.ridge_escalations,
        "log_posterior_at_mode": result.log_posterior_at_mode,
        "parameters": [
            {
                "name": s.name,
                "mode": s.mode,
                "sd_logit": s.sd_logit,
                "interval_95": [s.interval[0], s.interval[1]],
                "exact_beta": list(s.exact_beta) if s.exact_beta else None,
            }
            for s in sorted(result.summaries, key=lambda s: s.name)
        ],
    }
    if result.converged:
        report["expected_utility"] = expected_utility(model, result, utility)
    return report
