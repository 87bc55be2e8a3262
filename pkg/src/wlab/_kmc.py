"""Numba kernels for the event-driven exclusion dynamics (Fenwick-tree selection)."""
import numba as nb
import numpy as np

from .rng import uniform

# the bundled TBB is too old for numba; avoid the warning and fall through to OpenMP
nb.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

REBUILD_EVERY = 1 << 16


@nb.njit(cache=True)
def _bond_rate(eta, nbr, base, b, d, bond):
    s = bond // d
    j = bond - s * d
    s2 = nbr[s, j, 2]
    if eta[s] == eta[s2]:
        return 0.0
    return base[bond] * (1.0 + b * (eta[nbr[s, j, 1]] + eta[nbr[s, j, 3]]))


@nb.njit(cache=True)
def _build(tree, rate, P):
    tree[:] = 0.0
    for i in range(rate.shape[0]):
        tree[i + 1] = rate[i]
    for i in range(1, P + 1):
        p = i + (i & -i)
        if p <= P:
            tree[p] += tree[i]


@nb.njit(cache=True)
def _add(tree, i, delta, P):
    i += 1
    while i <= P:
        tree[i] += delta
        i += i & -i


@nb.njit(cache=True)
def _find(tree, target, P):
    pos = 0
    step = P
    while step > 0:
        nxt = pos + step
        if nxt <= P and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step >>= 1
    return pos


@nb.njit(cache=True)
def run_one(eta, nbr, base, b, d, key, sample_times, snaps):
    """Advance ``eta`` in place, copying it into ``snaps[m]`` at each sample time.

    Returns the number of events executed.
    """
    n_b = base.shape[0]
    P = 1
    while P < n_b:
        P <<= 1
    rate = np.zeros(n_b)
    for i in range(n_b):
        rate[i] = _bond_rate(eta, nbr, base, b, d, i)
    active = 0
    for i in range(n_b):
        if rate[i] > 0.0:
            active += 1
    tree = np.zeros(P + 1)
    _build(tree, rate, P)
    ns = sample_times.shape[0]
    counter = np.uint64(0)
    one = np.uint64(1)
    t = 0.0
    si = 0
    events = 0
    while si < ns:
        if active == 0:
            break
        total = tree[P]
        u = uniform(key, counter)
        counter += one
        t_next = t - np.log1p(-u) / total
        while si < ns and sample_times[si] < t_next:
            snaps[si, :] = eta
            si += 1
        if si == ns:
            break
        bond = n_b
        while True:
            bond = _find(tree, uniform(key, counter) * total, P)
            counter += one
            if bond < n_b and rate[bond] > 0.0:
                break
        s = bond // d
        j = bond - s * d
        s2 = nbr[s, j, 2]
        tmp = eta[s]
        eta[s] = eta[s2]
        eta[s2] = tmp
        for site in (s, s2):
            for k in range(d):
                for o in range(4):
                    # bonds (site-2e_k), (site-e_k), (site), (site+e_k)
                    if o == 2:
                        left = site
                    elif o == 3:
                        left = nbr[site, k, 2]
                    else:
                        left = nbr[site, k, o]
                    bd = left * d + k
                    new = _bond_rate(eta, nbr, base, b, d, bd)
                    if new != rate[bd]:
                        if rate[bd] == 0.0:
                            active += 1
                        elif new == 0.0:
                            active -= 1
                        _add(tree, bd, new - rate[bd], P)
                        rate[bd] = new
        t = t_next
        events += 1
        if events % REBUILD_EVERY == 0:
            _build(tree, rate, P)
    while si < ns:
        snaps[si, :] = eta
        si += 1
    return events


@nb.njit(parallel=True, cache=True)
def run_many(etas, nbr, base, b, d, keys, sample_times, snaps, events):
    for r in nb.prange(etas.shape[0]):
        eta = etas[r].copy()
        events[r] = run_one(eta, nbr, base, b, d, keys[r], sample_times, snaps[r])
