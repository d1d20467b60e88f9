"""Pure-numpy versions of the compiled inner loops in ``_core.pyx``."""

import numpy as np


def rk4_affine(a, c, x0, dt, n_steps, record_every, blowup):
    n_rec = n_steps // record_every + 1 + (1 if n_steps % record_every else 0)
    records = np.empty((n_rec,) + x0.shape)
    x = np.array(x0, dtype=float)
    records[0] = x
    r = 1
    h2 = 0.5 * dt
    for step in range(1, n_steps + 1):
        k1 = a @ x + c
        k2 = a @ (x + h2 * k1) + c
        k3 = a @ (x + h2 * k2) + c
        k4 = a @ (x + dt * k3) + c
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > blowup:
            return records, step
        if step % record_every == 0 or step == n_steps:
            records[r] = x
            r += 1
    return records, -1


def perron_power(kt, tol, max_iter):
    n = kt.shape[0]
    p = np.full(n, 1.0 / n)
    change = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        q = kt @ p
        q /= q.sum()
        change = float(np.max(np.abs(q - p)))
        p = q
        if change < tol:
            break
    return p, it, change
