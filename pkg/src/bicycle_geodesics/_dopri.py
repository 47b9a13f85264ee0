"""Dormand-Prince 5(4) kernel for the geodesic system, with constraint projection.

State layout (length 12): x[0:3], v[3:6], p[6:9], r[9:12].
The stepping loop is compiled with numba; dense output uses the standard
quartic continuous extension of DOPRI5.
"""

import numpy as np
from numba import njit

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# fifth minus fourth order weights
E = np.array(
    [71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# dense output: y(t + s h) = y + h * K^T (P @ [s, s^2, s^3, s^4])
P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

SAFETY = 0.9
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

STATUS_DONE = 0
STATUS_CHUNK_FULL = 1
STATUS_UNDERFLOW = 2


@njit(cache=True, nogil=True)
def rhs(y, out):
    vp = y[3] * y[6] + y[4] * y[7] + y[5] * y[8]
    rr = y[9] * (y[9] + y[6]) + y[10] * (y[10] + y[7]) + y[11] * (y[11] + y[8])
    for i in range(3):
        xd = y[6 + i] + y[9 + i]
        out[i] = xd
        out[3 + i] = xd - vp * y[3 + i]
        out[6 + i] = 0.0
        out[9 + i] = vp * y[9 + i] - rr * y[3 + i]


@njit(cache=True, nogil=True)
def project(y):
    """Normalize v and remove the v-component of r. Returns pre-projection
    (| |v| - 1 |, |r.v|)."""
    nv = np.sqrt(y[3] * y[3] + y[4] * y[4] + y[5] * y[5])
    dv = abs(nv - 1.0)
    for i in range(3, 6):
        y[i] /= nv
    rv = y[9] * y[3] + y[10] * y[4] + y[11] * y[5]
    for i in range(3):
        y[9 + i] -= rv * y[3 + i]
    return dv, abs(rv * nv)


@njit(cache=True, nogil=True)
def _error_norm(y, ynew, err, rtol, atol):
    s = 0.0
    for i in range(y.shape[0]):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        s += (err[i] / sc) ** 2
    return np.sqrt(s / y.shape[0])


@njit(cache=True, nogil=True)
def run_chunk(y0, t0, t_end, h, rtol, atol, capacity, err_prev):
    """Advance up to ``capacity`` accepted steps.

    Returns (status, n_steps, ts, ys, ks, drift, h_next, err_prev) where
    ys[i] is the projected state at ts[i] and ks[i] the seven stage
    derivatives of the step from ts[i] to ts[i+1].
    """
    n = y0.shape[0]
    ts = np.empty(capacity + 1)
    ys = np.empty((capacity + 1, n))
    ks = np.empty((capacity, 7, n))
    drift = np.empty((capacity, 2))
    ts[0] = t0
    ys[0] = y0
    direction = 1.0 if t_end >= t0 else -1.0
    t = t0
    y = y0.copy()
    k = np.empty((7, n))
    ytmp = np.empty(n)
    ynew = np.empty(n)
    err = np.empty(n)
    steps = 0
    rhs(y, k[0])
    while steps < capacity:
        remaining = (t_end - t) * direction
        if remaining <= 0.0:
            return STATUS_DONE, steps, ts, ys, ks, drift, h, err_prev
        hmin = 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0)
        last = False
        # a remainder below hmin is still a valid (tiny) final step
        if abs(h) >= remaining or remaining < hmin:
            h = remaining * direction
            last = True
        if abs(h) < hmin and not last:
            return STATUS_UNDERFLOW, steps, ts, ys, ks, drift, h, err_prev
        for s in range(1, 7):
            for i in range(n):
                acc = 0.0
                for j in range(s):
                    acc += A[s, j] * k[j, i]
                ytmp[i] = y[i] + h * acc
            rhs(ytmp, k[s])
        for i in range(n):
            ynew[i] = ytmp[i]  # stage 7 point equals the 5th-order solution
            acc = 0.0
            for j in range(7):
                acc += E[j] * k[j, i]
            err[i] = h * acc
        en = _error_norm(y, ynew, err, rtol, atol)
        if en <= 1.0:
            en = max(en, 1e-10)
            factor = SAFETY * en ** (-ALPHA) * err_prev ** BETA
            factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            err_prev = en
            ks[steps] = k
            t_new = t_end if last else t + h
            dv, drv = project(ynew)
            drift[steps, 0] = dv
            drift[steps, 1] = drv
            steps += 1
            ts[steps] = t_new
            ys[steps] = ynew
            t = t_new
            y[:] = ynew
            rhs(y, k[0])
            h = h * factor
        else:
            factor = SAFETY * en ** (-ALPHA)
            h = h * max(MIN_FACTOR, factor)
    return STATUS_CHUNK_FULL, steps, ts, ys, ks, drift, h, err_prev


def dense_eval(t, t_grid, y_grid, k_grid):
    """Evaluate the piecewise quartic interpolant at times ``t`` (array).

    Interpolated states are projected back onto the constraint set.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    sign = 1.0 if t_grid[-1] >= t_grid[0] else -1.0
    idx = np.searchsorted(sign * t_grid, sign * t, side="right") - 1
    idx = np.clip(idx, 0, len(t_grid) - 2)
    h = t_grid[idx + 1] - t_grid[idx]
    s = (t - t_grid[idx]) / h
    powers = np.stack([s, s * s, s ** 3, s ** 4], axis=-1)  # (N, 4)
    Q = np.einsum("nsi,sj->nij", k_grid[idx], P)  # (N, 12, 4)
    out = y_grid[idx] + h[:, None] * np.einsum("nij,nj->ni", Q, powers)
    exact = s == 0.0
    out[exact] = y_grid[idx[exact]]
    end = s == 1.0
    out[end] = y_grid[idx[end] + 1]
    for i in np.flatnonzero(~(exact | end)):
        project(out[i])
    return out
