"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with numba and a pure
numpy version.  ``NUMBA`` and ``NUMPY`` expose the two sets under the same
names; the module-level aliases point at whichever one ``_accel.USE_NUMBA``
selects.  Both sets consume caller-supplied uniforms instead of drawing their
own random numbers, so they produce identical samples for the same inputs.

Board encoding for Tic-Tac-Toe kernels: int8[9], 0 empty, 1 X, 2 O.
"""
from types import SimpleNamespace

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit  # noqa: F401  (re-exported)

LINES = np.array(
    [
        [0, 1, 2], [3, 4, 5], [6, 7, 8],
        [0, 3, 6], [1, 4, 7], [2, 5, 8],
        [0, 4, 8], [2, 4, 6],
    ],
    dtype=np.int64,
)
PREFERRED = np.array([4, 0, 2, 6, 8, 1, 3, 5, 7], dtype=np.int64)


# ---------------------------------------------------------------- Tic-Tac-Toe


def _winner_loop(board):
    for i in range(LINES.shape[0]):
        p = board[LINES[i, 0]]
        if p != 0 and p == board[LINES[i, 1]] and p == board[LINES[i, 2]]:
            return p
    return 0


def _rollout_loop(board, to_move, perspective, lam, gamma, max_depth, uniforms):
    """Play the smoothed heuristic policy until the game ends or max_depth.

    Returns (discounted return, steps, actions, behavior probs, rewards); the
    arrays are length 9 and only the first ``steps`` entries are meaningful.
    """
    b = board.copy()
    actions = np.full(9, -1, dtype=np.int64)
    probs = np.zeros(9, dtype=np.float64)
    rewards = np.zeros(9, dtype=np.float64)
    ret = 0.0
    disc = 1.0
    player = to_move
    steps = 0
    legal = np.empty(9, dtype=np.int64)
    w = 0
    for i in range(LINES.shape[0]):
        cell = b[LINES[i, 0]]
        if cell != 0 and cell == b[LINES[i, 1]] and cell == b[LINES[i, 2]]:
            w = cell
    while steps < max_depth and w == 0:
        n = 0
        for c in range(9):
            if b[c] == 0:
                legal[n] = c
                n += 1
        if n == 0:
            break
        preferred = -1
        for k in range(9):
            if b[PREFERRED[k]] == 0:
                preferred = PREFERRED[k]
                break
        u = uniforms[steps]
        acc = 0.0
        chosen = legal[n - 1]
        chosen_p = 0.0
        for j in range(n):
            p = lam / n
            if legal[j] == preferred:
                p += 1.0 - lam
            acc += p
            if u < acc:
                chosen = legal[j]
                chosen_p = p
                break
        if chosen_p == 0.0:
            chosen_p = lam / n
            if chosen == preferred:
                chosen_p += 1.0 - lam
        b[chosen] = player
        actions[steps] = chosen
        probs[steps] = chosen_p
        for i in range(LINES.shape[0]):
            cell = b[LINES[i, 0]]
            if cell != 0 and cell == b[LINES[i, 1]] and cell == b[LINES[i, 2]]:
                w = cell
        r = 0.0
        if w != 0:
            r = 1.0 if w == perspective else 0.0
        else:
            full = True
            for c in range(9):
                if b[c] == 0:
                    full = False
                    break
            if full:
                r = 0.5
        rewards[steps] = r
        ret += disc * r
        disc *= gamma
        player = 3 - player
        steps += 1
    return ret, steps, actions, probs, rewards


# -------------------------------------------------------- estimator batches


def _cumulative_ratios_loop(pi_e, pi_b, clip):
    n, h = pi_e.shape
    out = np.empty((n, h), dtype=np.float64)
    for i in range(n):
        rho = 1.0
        for t in range(h):
            rho *= pi_e[i, t] / pi_b[i, t]
            out[i, t] = rho if rho < clip else clip
    return out


def _step_is_loop(pi_e, pi_b, rewards, gamma, clip):
    n, h = pi_e.shape
    out = np.zeros(n, dtype=np.float64)
    for i in range(n):
        rho = 1.0
        disc = 1.0
        acc = 0.0
        for t in range(h):
            rho *= pi_e[i, t] / pi_b[i, t]
            w = rho if rho < clip else clip
            acc += disc * w * rewards[i, t]
            disc *= gamma
        out[i] = acc
    return out


def _dr_loop(v_hat_root, pi_e, pi_b, rewards, v_hat_next, q_hat, gamma, clip):
    n, h = pi_e.shape
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        rho = 1.0
        disc = 1.0
        acc = v_hat_root[i]
        for t in range(h):
            rho *= pi_e[i, t] / pi_b[i, t]
            w = rho if rho < clip else clip
            acc += disc * w * (rewards[i, t] + gamma * v_hat_next[i, t] - q_hat[i, t])
            disc *= gamma
        out[i] = acc
    return out


def _sample_mdp_loop(trans_cum, policy_cum, s0, horizon, u_action, u_next):
    n = u_action.shape[0]
    n_actions = policy_cum.shape[1]
    n_states = trans_cum.shape[2]
    states = np.empty((n, horizon + 1), dtype=np.int64)
    actions = np.empty((n, horizon), dtype=np.int64)
    for i in range(n):
        s = s0
        states[i, 0] = s
        for t in range(horizon):
            a = n_actions - 1
            for j in range(n_actions):
                if u_action[i, t] < policy_cum[s, j]:
                    a = j
                    break
            nxt = n_states - 1
            for j in range(n_states):
                if u_next[i, t] < trans_cum[s, a, j]:
                    nxt = j
                    break
            actions[i, t] = a
            s = nxt
            states[i, t + 1] = s
    return states, actions


# ------------------------------------------------------------ numpy versions


def _winner_np(board):
    vals = np.asarray(board)[LINES]
    hit = (vals[:, 0] != 0) & (vals[:, 0] == vals[:, 1]) & (vals[:, 1] == vals[:, 2])
    idx = np.flatnonzero(hit)
    return int(vals[idx[0], 0]) if idx.size else 0


def _cumulative_ratios_np(pi_e, pi_b, clip):
    return np.minimum(np.cumprod(pi_e / pi_b, axis=1), clip)


def _step_is_np(pi_e, pi_b, rewards, gamma, clip):
    h = pi_e.shape[1]
    disc = gamma ** np.arange(h)
    return (_cumulative_ratios_np(pi_e, pi_b, clip) * rewards * disc).sum(axis=1)


def _dr_np(v_hat_root, pi_e, pi_b, rewards, v_hat_next, q_hat, gamma, clip):
    h = pi_e.shape[1]
    disc = gamma ** np.arange(h)
    rho = _cumulative_ratios_np(pi_e, pi_b, clip)
    return v_hat_root + (disc * rho * (rewards + gamma * v_hat_next - q_hat)).sum(axis=1)


def _sample_mdp_np(trans_cum, policy_cum, s0, horizon, u_action, u_next):
    n = u_action.shape[0]
    n_actions = policy_cum.shape[1]
    n_states = trans_cum.shape[2]
    states = np.empty((n, horizon + 1), dtype=np.int64)
    actions = np.empty((n, horizon), dtype=np.int64)
    s = np.full(n, s0, dtype=np.int64)
    states[:, 0] = s
    for t in range(horizon):
        a = (u_action[:, t, None] >= policy_cum[s]).sum(axis=1)
        np.minimum(a, n_actions - 1, out=a)
        nxt = (u_next[:, t, None] >= trans_cum[s, a]).sum(axis=1)
        np.minimum(nxt, n_states - 1, out=nxt)
        actions[:, t] = a
        s = nxt
        states[:, t + 1] = s
    return states, actions


# --------------------------------------------------------------- dispatch

NUMPY = SimpleNamespace(
    name="numpy",
    winner=_winner_np,
    rollout=_rollout_loop,
    cumulative_ratios=_cumulative_ratios_np,
    step_is=_step_is_np,
    dr=_dr_np,
    sample_mdp=_sample_mdp_np,
)

NUMBA = SimpleNamespace(
    name="numba",
    winner=njit(_winner_loop),
    rollout=njit(_rollout_loop),
    cumulative_ratios=njit(_cumulative_ratios_loop),
    step_is=njit(_step_is_loop),
    dr=njit(_dr_loop),
    sample_mdp=njit(_sample_mdp_loop),
)

ACTIVE = NUMBA if USE_NUMBA else NUMPY
