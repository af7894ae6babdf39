"""
From mutual information to error bounds
=======================================

A repetition code over a binary symmetric channel.  As the code gets
longer the exact task MI grows, the Fano lower bound on the error
probability drops, and the simulated ML error follows it down.
"""

from dtmi import (
    DMCModel,
    StateSpace,
    build_repetition_encoder,
    exact_channel_mi,
    fano_lower_tight,
    run_monte_carlo,
)

space = StateSpace.uniform(["idle", "busy"])
channel = DMCModel.bsc(0.3)

print(f"{'n':>3} {'I(X;Y)':>8} {'Fano':>8} {'ML error':>9}  95% CI")
for n in (1, 3, 5, 9, 15):
    enc = build_repetition_encoder([[0], [1]], n, 2)
    mi = exact_channel_mi(enc, channel, space.prior).total
    lower = fano_lower_tight(space.entropy_bits(), min(mi, 1.0), space.m)
    mc = run_monte_carlo(space, enc, channel, "ml", trials=20_000, seed=n)
    lo, hi = mc.ci_95
    print(f"{n:3d} {mi:8.4f} {lower:8.4f} {mc.p_e:9.4f}  [{lo:.4f}, {hi:.4f}]")

# Note that n * I(X;Y) passes H(W) = 1 bit quickly; the Fano bound is then
# vacuous (zero) and only the simulation says how good the code is.
