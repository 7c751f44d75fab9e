"""An equivocating proposer before GST: many seeds, agreement checked on each."""

from tendersim import AdversarySpec, Scenario, check_agreement, check_lock_safety, simulate
from tendersim.net_sim import NetworkConfig

adversary = AdversarySpec.of("equivocating", byzantine=[0], side_a=[1, 2], side_b=[3], collude=False)
base = Scenario(variant="es", adversary=adversary, horizon=5000,
                network=NetworkConfig(tau=300, pre_gst="uniform", pre_gst_max=80))

decided, safe = 0, 0
for seed in range(50):
    trace = simulate(base.with_seed(seed))
    values = {str(d.value) for d in trace.decisions()}
    decided += bool(values)
    safe += bool(check_agreement(trace)) and bool(check_lock_safety(trace, base.q))
    if seed < 5:
        print(f"seed {seed}: decided values {sorted(values)}")
print(f"runs=50 with a decision={decided} safe={safe}")
