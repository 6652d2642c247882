"""Reading a cure fraction off the Kaplan-Meier curve.

When some subjects can never experience the event, the Kaplan-Meier curve
flattens out above zero: past the largest observed event time only censored
observations remain.  The height of that plateau estimates the overall cure
fraction, and the share of observations sitting in it is the data the
zero-tail constraint later assigns to the cured group.

Run with:  python demos/01_kaplan_meier_and_plateau.py
"""

import numpy as np

from smoothcure import kaplan_meier, make_scenario, plateau_fraction
from smoothcure.simulate import generate

# A registry scenario with roughly 20% cured subjects and 25% censoring.
scenario = make_scenario("m1/s1/c1", n=400)
ds = generate(scenario, seed=7)

km = kaplan_meier(ds.y, ds.delta)
last_event = km.times[-1]

print(f"subjects: {ds.n}, events: {int(ds.delta.sum())}, "
      f"censoring rate: {1 - ds.delta.mean():.2f}")
print(f"last observed event time: {last_event:.3f}")
print(f"Kaplan-Meier height at the last event (plateau level): {km(last_event):.3f}")
print(f"fraction of observations in the plateau: {plateau_fraction(ds):.3f}")

print("\nsurvival curve, every 10th event time:")
for t, s in list(zip(km.times, km.values))[::10]:
    bar = "#" * int(round(50 * s))
    print(f"  t={t:6.3f}  S={s:.3f}  {bar}")

# The plateau level tracks the true cure fraction of the generator.
true_cure = 1.0 - np.mean(1.0 / (1.0 + np.exp(-(ds.x @ np.array(scenario.gamma)))))
print(f"\ngenerator's average cure probability: {true_cure:.3f}")
