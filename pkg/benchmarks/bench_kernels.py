"""Time the numba kernels against the numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from drmcts import kernels
from drmcts.environments import default_mdp


def cases(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    h = 9
    pi_e = rng.uniform(0.05, 1, (n, h))
    pi_b = rng.uniform(0.05, 1, (n, h))
    rewards = rng.uniform(0, 1, (n, h))
    v_next = rng.uniform(0, 1, (n, h))
    q_hat = rng.uniform(0, 1, (n, h))
    root = rng.uniform(0, 1, n)
    mdp = default_mdp()
    trans_cum = np.cumsum(mdp.transition, axis=2)
    policy_cum = np.cumsum(np.full((mdp.n_states, mdp.n_actions), 1 / mdp.n_actions), axis=1)
    u = rng.random((2, n, mdp.horizon))
    board = np.zeros(9, dtype=np.int8)
    rollout_u = rng.random(9)
    return {
        "cumulative_ratios": lambda k: k.cumulative_ratios(pi_e, pi_b, np.inf),
        "step_is": lambda k: k.step_is(pi_e, pi_b, rewards, 1.0, np.inf),
        "dr": lambda k: k.dr(root, pi_e, pi_b, rewards, v_next, q_hat, 1.0, np.inf),
        "sample_mdp": lambda k: k.sample_mdp(trans_cum, policy_cum, mdp.initial_state, mdp.horizon, u[0], u[1]),
        "rollout x1000": lambda k: [k.rollout(board, 1, 1, 0.1, 1.0, 9, rollout_u) for _ in range(1000)],
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = [kernels.NUMPY]
    if kernels.HAVE_NUMBA:
        backends.append(kernels.NUMBA)
    print(f"{'kernel':<20}" + "".join(f"{b.name + ' ms':>14}" for b in backends))
    for name, fn in cases(args.n).items():
        times = []
        for backend in backends:
            fn(backend)  # warm up / compile
            times.append(min(timeit.repeat(lambda: fn(backend), number=1, repeat=args.repeat)) * 1e3)
        print(f"{name:<20}" + "".join(f"{t:>14.2f}" for t in times))


if __name__ == "__main__":
    main()
