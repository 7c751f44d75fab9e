"""Per-epoch message cost of the fault-free path, measured against the enumeration."""

from tendersim import Scenario, fit_power_law, measure, simulate
from tendersim.harness import happy_path_epoch_messages

ns, counts = [], []
for n in (4, 7, 10, 13):
    m = measure(simulate(Scenario().with_size(n)))
    got = m.messages_per_epoch[0]
    print(f"n={n:2d} measured={got:5d} enumerated={happy_path_epoch_messages(n):5d} "
          f"store_peak={max(m.stored_messages_peak_per_validator.values())} (4n+1={4 * n + 1})")
    ns.append(n)
    counts.append(got)
print(f"fitted exponent: {fit_power_law(ns, counts)[0]:.2f}")
