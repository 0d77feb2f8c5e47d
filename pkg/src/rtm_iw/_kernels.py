"""Compiled inner loop for one training epoch.

Must consume random numbers in exactly the order used by
``engine.train_step``: one uniform per clause for the activation mask, then,
on Type I feedback only, ``2o`` uniforms per activated clause (ascending
clause order) for the Type Ib coin flips.
"""

import numpy as np
from numba import njit

WEIGHTS_UNITY = 0
WEIGHTS_INTEGER = 1
WEIGHTS_REAL_MULT = 2
WEIGHTS_REAL_ADD = 3


@njit(cache=True, nogil=True)
def train_epoch(states, weights, literals, targets, order, T, s_inv, n_states,
                weight_mode, alpha, decrement_requires_fire, rng):
    m, n_lit = states.shape
    top = 2 * n_states
    clause = np.empty(m, dtype=np.uint8)
    active = np.empty(m, dtype=np.uint8)
    for idx in range(order.shape[0]):
        i = order[idx]
        L = literals[i]
        raw = 0.0
        for j in range(m):
            c = 1
            for k in range(n_lit):
                if L[k] == 0 and states[j, k] > n_states:
                    c = 0
                    break
            clause[j] = c
            if c == 1:
                raw += weights[j]
        y = raw / T
        if y > 1.0:
            y = 1.0
        target = targets[i]
        if y < target:
            fb = 1
            p = target - y
        elif y > target:
            fb = 2
            p = y - target
        else:
            continue
        for j in range(m):
            active[j] = 1 if rng.random() < p else 0

        if weight_mode != WEIGHTS_UNITY:
            for j in range(m):
                if active[j] == 0:
                    continue
                w = weights[j]
                if fb == 1:
                    if clause[j] == 1:
                        if weight_mode == WEIGHTS_INTEGER:
                            w += 1.0
                        elif weight_mode == WEIGHTS_REAL_MULT:
                            w *= 1.0 + alpha
                        else:
                            w += alpha
                elif w > 0.0 and (clause[j] == 1 or not decrement_requires_fire):
                    if weight_mode == WEIGHTS_INTEGER:
                        w -= 1.0
                    elif weight_mode == WEIGHTS_REAL_MULT:
                        w *= 1.0 - alpha
                    else:
                        w = max(w - alpha, 0.0)
                weights[j] = w

        for j in range(m):
            if active[j] == 0:
                continue
            if fb == 1:
                for k in range(n_lit):
                    u = rng.random()
                    if clause[j] == 1 and L[k] == 1:
                        if states[j, k] < top:
                            states[j, k] += 1
                    elif u < s_inv:
                        if states[j, k] > 1:
                            states[j, k] -= 1
            elif clause[j] == 1:
                for k in range(n_lit):
                    if L[k] == 0 and states[j, k] < top:
                        states[j, k] += 1
