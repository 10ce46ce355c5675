"""Modeling treatment withdrawal: how one flow directive reshapes the model.

Ten of the fifty experimental-arm patients stopped taking their assigned
therapy. Splitting that cohort turns the arm's study parameter into a
mixture weighted by a new withdrawal-rate parameter, so the observed
outcome data bears on the population effect through the dilution.

Run with: python3 demos/withdrawal_walkthrough.py
"""

from trialflow import Directive, DirectiveKind, Session, UtilitySpec, inference_report


def show_tree(session) -> None:
    def walk(cid, indent):
        cohort = session.pfd.cohort(cid)
        count = "?" if cohort.count is None else cohort.count
        print(f"{'  ' * indent}{cohort.name}  [{cohort.state.value}, n={count}]")
        for child in cohort.children:
            walk(child, indent + 1)

    walk(session.pfd.root, 1)


def main() -> None:
    session = Session.create(
        {"trial_name": "withdrawal demo", "exp_count": 50, "ctl_count": 50}
    )
    session.set_priors([(r.param, 2.0, 6.0) for r in session.pending_priors])

    print("before the split:")
    show_tree(session)
    free_before = len(session.diagram.free_ids())

    exp = session.pfd.cohort_by_name("assigned experimental")
    result = session.apply_directive(
        Directive(DirectiveKind.WITHDRAW, exp.id, {"yes_count": 10})
    )
    print("\nafter the split:")
    show_tree(session)
    print(f"\nfree parameters: {free_before} -> {len(session.diagram.free_ids())}")
    for request in result.prior_requests:
        print("new prior needed:", request.constructed_name)

    # 10 of 50 withdrew, so the elicited rate centers on 0.2.
    session.set_priors([(session.pending_priors[0].param, 2.0, 8.0)])

    # Outcomes arrive per subcohort now: the withdrawn patients look like
    # untreated ones, the compliant patients carry the treatment signal.
    for name, successes, trials in [
        ("patients who withdrew from therapy in assigned experimental", 4, 10),
        ("patients who did not withdraw from therapy in assigned experimental", 6, 40),
        ("assigned control", 12, 50),
    ]:
        cohort = session.pfd.cohort_by_name(name)
        session.apply_directive(
            Directive(
                DirectiveKind.ATTACH_EVIDENCE,
                cohort.id,
                {"successes": successes, "trials": trials},
            )
        )
    session.apply_directive(Directive(DirectiveKind.FINISH, session.pfd.root, {}))

    report = inference_report(session.diagram, UtilitySpec(lifespan=10.0))
    print("\nposterior modes:")
    for p in report["parameters"]:
        print(f"  {p['name']}: {p['mode']:.3f}")
    eu = report["expected_utility"]
    print(f"\nrecommend {eu['recommended']} "
          f"(EU {eu['eu_experimental']:.2f} vs {eu['eu_control']:.2f})")


if __name__ == "__main__":
    main()
