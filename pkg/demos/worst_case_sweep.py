"""Worst-case orchestrator over n = 4, 7, 10, 13 with the growth fits."""

from tendersim import AdversarySpec, Scenario, fit_line, fit_power_law, measure, simulate

template = Scenario(adversary=AdversarySpec.of("worst_case"), tau_auto=True, horizon=200_000)
fs, epochs, ns, totals = [], [], [], []
for n in (4, 7, 10, 13):
    m = measure(simulate(template.with_size(n)))
    f = (n - 1) // 3
    print(f"n={n:2d} f={f} decision_epoch={m.decision_epoch} messages_total={m.messages_total} "
          f"decided_all={m.decided_all}")
    fs.append(f)
    epochs.append(m.decision_epoch)
    ns.append(n)
    totals.append(m.messages_total)

slope, _ = fit_line(fs, epochs)
k, _ = fit_power_law(ns, totals)
print(f"decision epoch vs f: slope {slope:.2f}")
print(f"total messages vs n: exponent {k:.2f}")
