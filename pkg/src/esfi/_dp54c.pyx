# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernel for the E-SFI vector field.

Same stepper, tableau and dense-output interpolant as the pure-Python
twin in ``esfi._dp54``; kept in lockstep so the two backends agree to
rounding error.
"""

from libc.math cimport fabs, fmax, fmin, nextafter, pow, sqrt, INFINITY

import numpy as np

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

DEF DIM = 8

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0

cdef double[6][5] A_TAB = [
    [0, 0, 0, 0, 0],
    [1.0 / 5.0, 0, 0, 0, 0],
    [3.0 / 40.0, 9.0 / 40.0, 0, 0, 0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0, 0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
]
cdef double[6] B_TAB = [
    35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0,
]
cdef double[7] E_TAB = [
    71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
    -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
]
cdef double[7][4] P_TAB = [
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
]


cdef inline void _rhs(double* y, double beta, double pp, double p0, double pm,
                      double a_pos, double a_neu, double a_neg, double* dy) nogil:
    cdef double s = y[0]
    cdef double exp_pos = beta * s * y[1]
    cdef double exp_neu = beta * s * y[2]
    cdef double exp_neg = beta * s * y[3]
    cdef double in_pos = pp * exp_pos + p0 * exp_neu + pm * exp_neg
    cdef double in_neu = p0 * exp_pos + pp * exp_neu + p0 * exp_neg
    cdef double in_neg = pm * exp_pos + p0 * exp_neu + pp * exp_neg
    dy[0] = -exp_pos - exp_neu - exp_neg
    dy[1] = in_pos - a_pos * y[1]
    dy[2] = in_neu - a_neu * y[2]
    dy[3] = in_neg - a_neg * y[3]
    dy[4] = ((1.0 - pp - pm - p0) * exp_pos
             + (1.0 - pp - 2.0 * p0) * exp_neu
             + (1.0 - pp - pm - p0) * exp_neg
             + a_pos * y[1] + a_neu * y[2] + a_neg * y[3])
    dy[5] = in_pos
    dy[6] = in_neu
    dy[7] = in_neg


cdef inline double _rms(double* v) nogil:
    cdef double acc = 0.0
    cdef int d
    for d in range(DIM):
        acc += v[d] * v[d]
    return sqrt(acc / DIM)


def integrate_dp54(rates, y0, double t_start, double[:] t_out,
                   double rtol, double atol, long max_steps,
                   double max_step=INFINITY):
    """Compiled counterpart of :func:`esfi._dp54.integrate_dp54`."""
    cdef double beta = rates[0], pp = rates[1], p0 = rates[2], pm = rates[3]
    cdef double a_pos = rates[4], a_neu = rates[5], a_neg = rates[6]

    cdef double[DIM] y
    cdef int d, i, j, p
    for d in range(DIM):
        y[d] = y0[d]

    cdef Py_ssize_t n_out = t_out.shape[0]
    out_arr = np.empty((n_out, DIM), dtype=np.float64)
    cdef double[:, :] out = out_arr

    cdef double t = t_start
    cdef Py_ssize_t out_idx = 0
    while out_idx < n_out and t_out[out_idx] <= t:
        for d in range(DIM):
            out[out_idx, d] = y[d]
        out_idx += 1
    if out_idx == n_out:
        return out_arr, STATUS_OK, t, 0

    cdef double t_bound = t_out[n_out - 1]
    cdef double[DIM] f, f_new, y_new, y_stage, scratch
    cdef double[7][DIM] K
    cdef double[DIM][4] Q
    _rhs(y, beta, pp, p0, pm, a_pos, a_neu, a_neg, f)

    # initial step size (Hairer-style heuristic)
    cdef double d0, d1, d2, h0, h1, h_abs
    for d in range(DIM):
        scratch[d] = y[d] / (atol + rtol * fabs(y[d]))
    d0 = _rms(scratch)
    for d in range(DIM):
        scratch[d] = f[d] / (atol + rtol * fabs(y[d]))
    d1 = _rms(scratch)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    for d in range(DIM):
        y_stage[d] = y[d] + h0 * f[d]
    _rhs(y_stage, beta, pp, p0, pm, a_pos, a_neu, a_neg, f_new)
    for d in range(DIM):
        scratch[d] = (f_new[d] - f[d]) / (atol + rtol * fabs(y[d]))
    d2 = _rms(scratch) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = fmax(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / fmax(d1, d2), 0.2)
    h_abs = fmin(fmin(fmin(100.0 * h0, h1), t_bound - t), max_step)

    cdef long n_steps = 0
    cdef int step_rejected
    cdef double min_step, t_new, h, aij, bi, kid, e, scale, q, err_acc, err_norm, factor
    cdef double t_req, theta, th1, th2, th3, th4, cap, exposure_rate

    while out_idx < n_out:
        if n_steps >= max_steps:
            return out_arr, STATUS_MAX_STEPS, t, n_steps
        min_step = 10.0 * fabs(nextafter(t, INFINITY) - t)
        # S decays at rate beta * (F_pos + F_neu + F_neg); keep that mode
        # inside the stability region as well (binds only when the alphas
        # are too small to dominate)
        cap = max_step
        exposure_rate = beta * (y[1] + y[2] + y[3])
        if exposure_rate > 0.0 and 2.5 / exposure_rate < cap:
            cap = 2.5 / exposure_rate
        if h_abs < min_step:
            h_abs = min_step
        elif h_abs > cap:
            h_abs = cap

        step_rejected = 0
        while True:
            if h_abs < min_step:
                return out_arr, STATUS_STEP_UNDERFLOW, t, n_steps
            t_new = t + h_abs
            if t_new > t_bound:
                t_new = t_bound
            h = t_new - t

            for d in range(DIM):
                K[0][d] = f[d]
            for i in range(1, 6):
                for d in range(DIM):
                    y_stage[d] = y[d]
                for j in range(i):
                    aij = A_TAB[i][j]
                    if aij != 0.0:
                        for d in range(DIM):
                            y_stage[d] += h * aij * K[j][d]
                _rhs(y_stage, beta, pp, p0, pm, a_pos, a_neu, a_neg, K[i])

            for d in range(DIM):
                y_new[d] = y[d]
            for i in range(6):
                bi = B_TAB[i]
                if bi != 0.0:
                    for d in range(DIM):
                        y_new[d] += h * bi * K[i][d]
            _rhs(y_new, beta, pp, p0, pm, a_pos, a_neu, a_neg, f_new)
            for d in range(DIM):
                K[6][d] = f_new[d]

            err_acc = 0.0
            for d in range(DIM):
                e = 0.0
                for i in range(7):
                    e += E_TAB[i] * K[i][d]
                e *= h
                scale = atol + rtol * fmax(fabs(y[d]), fabs(y_new[d]))
                q = e / scale
                err_acc += q * q
            err_norm = sqrt(err_acc / DIM)

            n_steps += 1
            if err_norm < 1.0:
                if err_norm == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = fmin(MAX_FACTOR, SAFETY * pow(err_norm, -0.2))
                if step_rejected:
                    factor = fmin(1.0, factor)
                break
            h_abs *= fmax(MIN_FACTOR, SAFETY * pow(err_norm, -0.2))
            step_rejected = 1
            if n_steps >= max_steps:
                return out_arr, STATUS_MAX_STEPS, t, n_steps

        if out_idx < n_out and t_out[out_idx] <= t_new:
            for d in range(DIM):
                for p in range(4):
                    Q[d][p] = 0.0
                for i in range(7):
                    kid = K[i][d]
                    if kid != 0.0:
                        for p in range(4):
                            Q[d][p] += kid * P_TAB[i][p]
            while out_idx < n_out and t_out[out_idx] <= t_new:
                t_req = t_out[out_idx]
                if t_req == t_new:
                    for d in range(DIM):
                        out[out_idx, d] = y_new[d]
                else:
                    theta = (t_req - t) / h
                    th1 = theta
                    th2 = th1 * theta
                    th3 = th2 * theta
                    th4 = th3 * theta
                    for d in range(DIM):
                        out[out_idx, d] = y[d] + h * (
                            Q[d][0] * th1 + Q[d][1] * th2 + Q[d][2] * th3 + Q[d][3] * th4
                        )
                out_idx += 1

        t = t_new
        for d in range(DIM):
            y[d] = y_new[d]
            f[d] = f_new[d]
        h_abs *= factor

    return out_arr, STATUS_OK, t, n_steps
