"""A minimal session: priors, evidence on both arms, posterior report.

Run with: python3 demos/basic_trial.py
"""

from trialflow import (
    Directive,
    DirectiveKind,
    Session,
    UtilitySpec,
    inference_report,
)


def main() -> None:
    # A 100-patient mortality trial, 50 per arm. The session opens waiting
    # for the three population-level priors it needs before modeling.
    session = Session.create(
        {"trial_name": "basic demo", "exp_count": 50, "ctl_count": 50}
    )
    print("status:", session.status.value)
    for request in session.pending_priors:
        print("  needs prior:", request.constructed_name)

    # Prior beliefs, expressed as beta shape pairs. Mean 0.25 with the
    # weight of 8 prior patients for the experimental arm, and so on.
    session.set_priors(
        [
            (request.param, a, b)
            for request, (a, b) in zip(
                session.pending_priors, [(2, 6), (3, 5), (3, 7)]
            )
        ]
    )
    print("status:", session.status.value)

    # Observed outcomes: 7 of 50 deaths on experimental, 12 of 50 on control.
    for cohort_name, successes in [("assigned experimental", 7), ("assigned control", 12)]:
        cohort = session.pfd.cohort_by_name(cohort_name)
        session.apply_directive(
            Directive(
                DirectiveKind.ATTACH_EVIDENCE,
                cohort.id,
                {"successes": successes, "trials": 50},
            )
        )
    session.apply_directive(Directive(DirectiveKind.FINISH, session.pfd.root, {}))

    report = inference_report(session.diagram, UtilitySpec(lifespan=10.0))
    print(f"\nconverged in {report['iterations']} iterations")
    for p in report["parameters"]:
        lo, hi = p["interval_95"]
        print(f"  {p['name']}: mode {p['mode']:.3f}  95% ({lo:.3f}, {hi:.3f})")
    eu = report["expected_utility"]
    print(
        f"\nexpected lifespan: experimental {eu['eu_experimental']:.2f} years, "
        f"control {eu['eu_control']:.2f} years -> recommend {eu['recommended']}"
    )


if __name__ == "__main__":
    main()
