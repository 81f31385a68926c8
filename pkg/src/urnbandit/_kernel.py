"""Compiled trial loop for polynomial feedback and time-invariant impact.

This is a line-for-line transcription of :func:`urnbandit.dynamics.step` and
the decide functions in :mod:`urnbandit.policies`.  It consumes the trial's
``numpy.random.Generator`` in exactly the same order, so for the same seed it
returns the same trajectory as the pure-Python loop, bit for bit
(``tests/test_harness.py`` checks this).
"""

import numpy as np
from numba import njit

NONE, ORACLE, ALNETC, EXPLORE_ONLY, UCB_LIST = 0, 1, 2, 3, 4
POLICY_CODES = {"none": NONE, "oracle": ORACLE, "alnetc": ALNETC, "explore_only": EXPLORE_ONLY, "ucb_list": UCB_LIST}

INIT, EXPLORATION, EXPLOITATION, SELF_SUSTAINING = 0, 1, 2, 3

OK, BAD_FEEDBACK, BAD_TOTAL = 0, 1, 2


@njit(cache=True, nogil=True)
def _pick(cand, k, gen):
    if k == 1:
        return cand[0]
    return cand[int(gen.random() * k)]


@njit(cache=True, nogil=True)
def simulate(policy, means, biases, coef, alpha, g, payment, horizon, threshold, checkpoints, gen):
    m = means.size
    S = np.zeros(m, np.int64)
    N = np.zeros(m, np.int64)
    rates = np.empty(m)
    cand = np.empty(m, np.int64)
    active = np.ones(m, np.bool_)
    n_active = m
    mh = np.empty(m)
    rad = np.empty(m)

    ncp = checkpoints.size
    regret = np.empty(ncp)
    paid = np.empty(ncp)
    ci = 0

    best = 0
    for i in range(1, m):
        if means[i] > means[best]:
            best = i
    mu_star = means[best]

    if policy == ALNETC or policy == EXPLORE_ONLY:
        phase = EXPLORATION
    elif policy == UCB_LIST:
        phase = INIT
    else:
        phase = SELF_SUSTAINING
    ident = -1
    tau_first = -1
    tau_s = -1
    total_reward = 0
    total_payment = 0.0
    inc_steps = 0
    log_h = np.log(horizon)

    for t in range(horizon):
        target = -1
        forced = -1
        # ---- decide
        if policy == ORACLE:
            forced = best
        elif policy == ALNETC or policy == EXPLORE_ONLY:
            if phase == EXPLORATION:
                lo = S[0]
                for i in range(1, m):
                    if S[i] < lo:
                        lo = S[i]
                if lo >= threshold:
                    tau_first = t
                    top = -np.inf
                    for i in range(m):
                        mh[i] = S[i] / N[i] if N[i] > 0 else 0.0
                        if mh[i] > top:
                            top = mh[i]
                    k = 0
                    for i in range(m):
                        if mh[i] == top:
                            cand[k] = i
                            k += 1
                    ident = _pick(cand, k, gen)
                    if policy == ALNETC:
                        phase = EXPLOITATION
                    else:
                        phase = SELF_SUSTAINING
                        tau_s = t
                else:
                    k = 0
                    for i in range(m):
                        if S[i] == lo:
                            cand[k] = i
                            k += 1
                    target = _pick(cand, k, gen)
        elif policy == UCB_LIST:
            if phase == INIT:
                k = 0
                for i in range(m):
                    if N[i] == 0:
                        cand[k] = i
                        k += 1
                if k > 0:
                    target = _pick(cand, k, gen)
                else:
                    phase = EXPLORATION
            if phase == EXPLORATION:
                for i in range(m):
                    mh[i] = S[i] / N[i]
                    rad[i] = np.sqrt(log_h / (2 * N[i]))
                removed = True
                while removed and n_active > 1:
                    removed = False
                    for a in range(m):
                        if not active[a]:
                            continue
                        rival = -np.inf
                        for i in range(m):
                            if active[i] and i != a:
                                v = mh[i] - rad[i]
                                if v > rival:
                                    rival = v
                        if mh[a] + rad[a] <= rival:
                            active[a] = False
                            n_active -= 1
                            removed = True
                            break
                if n_active == 1:
                    for i in range(m):
                        if active[i]:
                            ident = i
                    tau_first = t
                    phase = EXPLOITATION
                else:
                    lo = -1
                    for i in range(m):
                        if active[i] and (lo < 0 or N[i] < lo):
                            lo = N[i]
                    k = 0
                    for i in range(m):
                        if active[i] and N[i] == lo:
                            cand[k] = i
                            k += 1
                    target = _pick(cand, k, gen)
        if phase == EXPLOITATION:
            rest = total_reward - S[ident]
            if S[ident] >= rest:
                phase = SELF_SUSTAINING
                tau_s = t
            else:
                target = ident

        # ---- step
        if forced >= 0:
            pulled = forced
        else:
            total = 0.0
            for i in range(m):
                w = coef * (S[i] + biases[i]) ** alpha
                if not (np.isfinite(w) and w > 0):
                    return BAD_FEEDBACK, i, regret, paid, tau_first, tau_s, ident, inc_steps
                rates[i] = w
                total += w
            if not np.isfinite(total):
                return BAD_TOTAL, 0, regret, paid, tau_first, tau_s, ident, inc_steps
            for i in range(m):
                rates[i] = rates[i] / total
            if target >= 0:
                for i in range(m):
                    if i == target:
                        rates[i] = (rates[i] + g) / (1.0 + g)
                    else:
                        rates[i] = rates[i] / (1.0 + g)
            u = gen.random()
            pulled = m - 1
            acc = 0.0
            for i in range(m):
                acc += rates[i]
                if u < acc:
                    pulled = i
                    break
        reward = 1 if gen.random() < means[pulled] else 0
        N[pulled] += 1
        S[pulled] += reward
        total_reward += reward
        if target >= 0:
            total_payment += payment
            inc_steps += 1
        if ci < ncp and checkpoints[ci] == t + 1:
            regret[ci] = mu_star * (t + 1) - total_reward
            paid[ci] = total_payment
            ci += 1

    return OK, -1, regret, paid, tau_first, tau_s, ident, inc_steps
