"""A crashed proposer costs one epoch; the next proposer in line drives the decision."""

from tendersim import AdversarySpec, Scenario, run_scenario

for variant in ("sync", "es"):
    report = run_scenario(Scenario(variant=variant, adversary=AdversarySpec.of("silent", byzantine=[0])))
    print(f"{variant}: decision epochs {report.metrics.decision_epoch_per_validator}")
    for v in report.verdicts:
        print(f"  {v.name}: {'pass' if v.passed else 'fail'}")
