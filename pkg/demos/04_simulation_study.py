"""A desk-scale Monte Carlo comparison of the two estimators.

Replicates the estimation pipeline many times on a registry scenario and
reports trimmed bias, variance and mean squared error per parameter for
both methods, plus the non-convergence counters.  For speed this demo runs
60 replications; the acceptance suite runs the full desk-scale versions.

Run with:  python demos/04_simulation_study.py
"""

import time

from smoothcure import make_scenario, run_study

scenario = make_scenario("m1/s1/c1", n=200)
print(f"scenario {scenario.key}: gamma={scenario.gamma}, beta={scenario.beta}, "
      f"exponential censoring rate {scenario.lam_c}")

start = time.time()
report = run_study(scenario, reps=60, seed=2024, methods=("presmooth", "mle"))
print(f"60 replications in {time.time() - start:.0f}s\n")

header = f"{'method':>10s} {'parameter':>16s} {'bias':>8s} {'variance':>9s} {'mse':>8s}"
print(header)
print("-" * len(header))
for method, summary in report.methods.items():
    for j, name in enumerate(report.param_names):
        print(f"{method:>10s} {name:>16s} {summary.bias[j]:8.3f} "
              f"{summary.variance[j]:9.3f} {summary.mse[j]:8.3f}")
    print(f"{'':>10s} non-convergent replications: {summary.nonconverged} "
          f"(stages: {summary.stage_failures})")

print("\nThe headline pattern: both methods agree on the latency coefficient,")
print("while the two-step fit trims the variance of the incidence slope.")
