"""Fault-free run of both variants at n=4: who decides, when, and at what cost."""

from tendersim import Scenario, measure, simulate
from tendersim.harness import happy_path_epoch_messages

for variant in ("sync", "es"):
    trace = simulate(Scenario(variant=variant, n=4, f=1))
    m = measure(trace)
    print(f"== {variant} ==")
    for d in trace.decisions():
        print(f"  validator {d.src} decided {d.value} in epoch {d.epoch} at t={d.time}")
    print(f"  messages in epoch 0: {m.messages_per_epoch[0]} (enumerated {happy_path_epoch_messages(4, variant)})")
    print(f"  store peak per validator: {m.stored_messages_peak_per_validator}")
