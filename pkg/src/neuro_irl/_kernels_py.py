"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` argument for argument. They are used when the
compiled extension is unavailable, and as the reference side in the
backend-equivalence tests.
"""

import numpy as np

NUM_ACTIONS = 5


def q_values(rewards, succ, d, gamma, v):
    """Q(s, a) = R(s) + gamma * E[v(s') | s, a] under the grid noise model.

    The chosen action's successor gets probability ``d`` plus its uniform
    share; every action's successor (including the chosen one) gets
    ``(1 - d) / A``.
    """
    nxt = v[succ]
    noise = (1.0 - d) / succ.shape[1]
    shared = noise * nxt.sum(axis=1)
    return rewards[:, None] + gamma * (d * nxt + shared[:, None])


def value_iteration(rewards, succ, d, gamma, tol, max_iters):
    v = np.zeros(rewards.shape[0])
    delta = np.inf
    it = 0
    while it < max_iters:
        it += 1
        v_new = q_values(rewards, succ, d, gamma, v).max(axis=1)
        delta = float(np.max(np.abs(v_new - v))) if v.size else 0.0
        v = v_new
        if delta < tol:
            break
    return v, it, delta


def lmdp_power_iteration(neg_cost, indptr, indices, log_p, tol, max_iters):
    """Log-domain power iteration for z = exp(-q) * (P z), renormalised.

    Works on v = log z with max(v) pinned at 0 after every sweep, so
    desirabilities that would underflow as z stay representable.
    """
    n = neg_cost.shape[0]
    starts = indptr[:-1]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    v = np.zeros(n)
    delta = np.inf
    it = 0
    while it < max_iters:
        it += 1
        vals = log_p + v[indices]
        row_max = np.maximum.reduceat(vals, starts)
        acc = np.add.reduceat(np.exp(vals - row_max[rows]), starts)
        v_new = neg_cost + row_max + np.log(acc)
        v_new -= v_new.max()
        delta = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta < tol:
            break
    return v, it, delta


def log_matmul(a, b):
    """C[i, j] = log sum_k exp(a[i, k] + b[k, j]); -inf entries stand for zeros."""
    n, m = a.shape
    out = np.empty((n, b.shape[1]))
    block = max(1, (1 << 20) // max(1, m * b.shape[1]))
    with np.errstate(invalid="ignore"):
        for lo in range(0, n, block):
            terms = a[lo : lo + block, :, None] + b[None, :, :]
            peak = terms.max(axis=1)
            safe = np.where(np.isfinite(peak), peak, 0.0)
            total = np.exp(terms - safe[:, None, :]).sum(axis=1)
            with np.errstate(divide="ignore"):
                out[lo : lo + block] = np.where(np.isfinite(peak), safe + np.log(total), -np.inf)
    return out


def feedforward(inputs, num_nodes, eval_nodes, is_sigmoid, indptr, src, weights, out_node):
    """Evaluate a compiled feed-forward network on a batch of input rows.

    Node slots ``0 .. num_inputs-1`` hold the inputs; ``eval_nodes`` lists
    the remaining slots in topological order with their in-edges in CSR
    form (``indptr``/``src``/``weights``).
    """
    n_rows, n_in = inputs.shape
    values = np.zeros((n_rows, num_nodes))
    values[:, :n_in] = inputs
    for k in range(eval_nodes.shape[0]):
        lo, hi = indptr[k], indptr[k + 1]
        acc = values[:, src[lo:hi]] @ weights[lo:hi]
        if is_sigmoid[k]:
            acc = 1.0 / (1.0 + np.exp(-4.9 * acc))
        values[:, eval_nodes[k]] = acc
    return values[:, out_node].copy()
