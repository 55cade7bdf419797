"""How much leaks when an eavesdropper sees a bit through two erasure looks.

Each look erases with probability p, so a bit survives at least once with
probability 1 - p^2. The simulation is seeded and thread-count invariant.
"""

from __future__ import annotations

import time

from wiretapnet import montecarlo
from wiretapnet.channelmath import WiretapChannel, bec, identity_channel


def main():
    for p in (0.25, 0.5, 0.75):
        cfg = montecarlo.SimConfig(200_000, seed=7)
        frac = montecarlo.double_exposure(p, cfg)
        print(f"erasure {p}: {frac:.4f} of bits seen (analytic {1 - p * p:.4f})")

    wt = WiretapChannel(identity_channel(2), bec(0.5))
    for threads in (1, 4):
        start = time.perf_counter()
        counts = montecarlo.simulate_channel(wt, montecarlo.SimConfig(1_000_000, seed=1, threads=threads))
        took = time.perf_counter() - start
        est = montecarlo.empirical_mi(counts, "xz")
        sigma = montecarlo.plugin_sigma(counts, "xz")
        print(f"{threads} thread(s): I(X;Z) = {est:.5f} +- {sigma:.5f} in {took:.2f}s")


if __name__ == "__main__":
    main()
