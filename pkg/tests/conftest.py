import numpy as np
import pytest

from trialflow import Directive, DirectiveKind, Session
from trialflow.diagram import (
    Identity,
    InfluenceDiagram,
    Level,
    MeasurementError,
    Mixture,
)


DEFAULT_PRIORS = {
    "population mortality rate for experimental therapy": (2.0, 6.0),
    "population mortality rate for control therapy": (3.0, 5.0),
    "baseline population mortality rate": (3.0, 4.0),
}


def make_session(exp_count=50, ctl_count=50, priors=None, **config):
    session = Session.create(
        {"trial_name": "trial", "exp_count": exp_count, "ctl_count": ctl_count, **config}
    )
    priors = priors or DEFAULT_PRIORS
    session.set_priors(
        [(request.param, *priors[request.constructed_name]) for request in session.pending_priors]
    )
    return session


def fill_priors(session, a=2.0, b=2.0):
    if session.pending_priors:
        session.set_priors([(r.param, a, b) for r in session.pending_priors])
    return session


def attach(session, cohort_name, successes, trials):
    cohort = session.pfd.cohort_by_name(cohort_name)
    return session.apply_directive(
        Directive(
            DirectiveKind.ATTACH_EVIDENCE,
            cohort.id,
            {"successes": successes, "trials": trials},
        )
    )


@pytest.fixture
def session():
    return make_session()


def conjugate_diagram(a=2.0, b=2.0, successes=7, trials=10, chain=2):
    """One beta prior, an identity chain, one evidence node."""
    d = InfluenceDiagram()
    node = d.add_chance("theta", Level.POPULATION, a=a, b=b)
    root = node
    levels = [Level.STUDY, Level.EFFECTIVE]
    for i in range(chain):
        node = d.add_deterministic(f"link {i}", levels[min(i, 1)], Identity(node))
    d.add_evidence("observed", node, successes, trials)
    return d, root


def random_diagram(rng, n_chance=4, n_det=6, n_evidence=3):
    """Random valid diagram using all three deterministic kinds."""
    d = InfluenceDiagram()
    chance = [
        d.add_chance(f"free {i}", Level.POPULATION, a=rng.uniform(1, 5), b=rng.uniform(1, 5))
        for i in range(n_chance)
    ]
    pool = list(chance)
    for i in range(n_det):
        kind = rng.integers(0, 3)
        if kind == 0:
            fn = Identity(int(rng.choice(pool)))
        elif kind == 1:
            mix, inp, out = rng.choice(pool, 3)
            fn = Mixture(int(mix), int(inp), int(out))
        else:
            sens, spec, src = rng.choice(pool, 3)
            fn = MeasurementError(int(sens), int(spec), int(src))
        pool.append(d.add_deterministic(f"det {i}", Level.POPULATION, fn))
    targets = [p for p in pool if d.nodes[p].level is Level.POPULATION]
    study = [
        d.add_deterministic(f"study tap {i}", Level.STUDY, Identity(int(rng.choice(targets))))
        for i in range(n_evidence)
    ]
    for i, parent in enumerate(study):
        n = int(rng.integers(1, 80))
        s = int(rng.integers(0, n + 1))
        d.add_evidence(f"obs {i}", parent, s, n)
    return d


def interior_assignment(d, rng, lo=0.1, hi=0.9):
    return {f: float(rng.uniform(lo, hi)) for f in d.free_ids()}
