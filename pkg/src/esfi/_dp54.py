"""Pure-Python Dormand-Prince 5(4) kernel for the E-SFI vector field.

Reference implementation of the hot loop; ``esfi._dp54c`` is the compiled
twin with identical arithmetic.  Backend selection happens in
``esfi.backend``.  Plain floats throughout: at dimension 8 the overhead of
small-array numpy operations would dominate, so the state lives in Python
lists and only the output matrix is a numpy array.

The stepper is the classic embedded Dormand-Prince pair: six fresh stages
per step plus the first-same-as-last evaluation, fifth-order propagation,
fourth-order error estimate, and the standard quartic interpolant for dense
output at the requested times.
"""

import math

import numpy as np

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

# Butcher tableau
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
)
_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0)
# difference between 5th and 4th order weights (7 entries, FSAL stage included)
_E = (
    71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
    -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
)
# dense-output interpolant coefficients (rows = stages, cols = powers of theta)
_P = (
    (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0),
    (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0),
    (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0),
    (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0),
    (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0),
)

_DIM = 8


def _rhs(y, beta, pp, p0, pm, a_pos, a_neu, a_neg):
    s = y[0]
    exp_pos = beta * s * y[1]
    exp_neu = beta * s * y[2]
    exp_neg = beta * s * y[3]
    in_pos = pp * exp_pos + p0 * exp_neu + pm * exp_neg
    in_neu = p0 * exp_pos + pp * exp_neu + p0 * exp_neg
    in_neg = pm * exp_pos + p0 * exp_neu + pp * exp_neg
    return [
        -exp_pos - exp_neu - exp_neg,
        in_pos - a_pos * y[1],
        in_neu - a_neu * y[2],
        in_neg - a_neg * y[3],
        (1.0 - pp - pm - p0) * exp_pos
        + (1.0 - pp - 2.0 * p0) * exp_neu
        + (1.0 - pp - pm - p0) * exp_neg
        + a_pos * y[1] + a_neu * y[2] + a_neg * y[3],
        in_pos,
        in_neu,
        in_neg,
    ]


def _rms(v):
    acc = 0.0
    for x in v:
        acc += x * x
    return math.sqrt(acc / len(v))


def _initial_step(y0, f0, rates, rtol, atol, t_span, max_step):
    scale = [atol + rtol * abs(y0[d]) for d in range(_DIM)]
    d0 = _rms([y0[d] / scale[d] for d in range(_DIM)])
    d1 = _rms([f0[d] / scale[d] for d in range(_DIM)])
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = [y0[d] + h0 * f0[d] for d in range(_DIM)]
    f1 = _rhs(y1, *rates)
    d2 = _rms([(f1[d] - f0[d]) / scale[d] for d in range(_DIM)]) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, t_span, max_step)


def integrate_dp54(rates, y0, t_start, t_out, rtol, atol, max_steps, max_step=math.inf):
    """Integrate the E-SFI system and sample it at ``t_out``.

    rates      seven floats: beta, p_plus, p_zero, p_minus, alpha_pos/neu/neg
    y0         initial state vector (8 entries)
    t_out      strictly increasing times, all >= t_start
    max_steps  hard cap on accepted+rejected step attempts
    max_step   step-size ceiling; callers bound it by the stability limit of
               the linear deactivation terms so the decayed forwarding
               compartments cannot oscillate around zero

    Returns ``(out, status, last_t, n_steps)`` where ``out`` is the
    ``(len(t_out), 8)`` sample matrix, filled up to the point of failure.
    """
    beta, pp, p0, pm, a_pos, a_neu, a_neg = (float(r) for r in rates)
    rate_args = (beta, pp, p0, pm, a_pos, a_neu, a_neg)
    y = [float(v) for v in y0]
    t = float(t_start)
    n_out = len(t_out)
    out = np.empty((n_out, _DIM), dtype=float)

    out_idx = 0
    while out_idx < n_out and t_out[out_idx] <= t:
        for d in range(_DIM):
            out[out_idx, d] = y[d]
        out_idx += 1
    if out_idx == n_out:
        return out, STATUS_OK, t, 0

    t_bound = float(t_out[n_out - 1])
    f = _rhs(y, *rate_args)
    h_abs = _initial_step(y, f, rate_args, rtol, atol, t_bound - t, max_step)

    K = [[0.0] * _DIM for _ in range(7)]
    n_steps = 0
    while out_idx < n_out:
        if n_steps >= max_steps:
            return out, STATUS_MAX_STEPS, t, n_steps
        min_step = 10.0 * abs(math.nextafter(t, math.inf) - t)
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

        # attempt a step; shrink on rejection
        step_rejected = False
        while True:
            if h_abs < min_step:
                return out, STATUS_STEP_UNDERFLOW, t, n_steps
            t_new = t + h_abs
            if t_new > t_bound:
                t_new = t_bound
            h = t_new - t

            K[0] = f
            for i in range(1, 6):
                a_row = _A[i]
                y_stage = list(y)
                for j in range(i):
                    aij = a_row[j]
                    if aij != 0.0:
                        kj = K[j]
                        for d in range(_DIM):
                            y_stage[d] += h * aij * kj[d]
                K[i] = _rhs(y_stage, *rate_args)

            y_new = list(y)
            for i in range(6):
                bi = _B[i]
                if bi != 0.0:
                    ki = K[i]
                    for d in range(_DIM):
                        y_new[d] += h * bi * ki[d]
            f_new = _rhs(y_new, *rate_args)
            K[6] = f_new

            err_acc = 0.0
            for d in range(_DIM):
                e = 0.0
                for i in range(7):
                    e += _E[i] * K[i][d]
                e *= h
                scale = atol + rtol * max(abs(y[d]), abs(y_new[d]))
                q = e / scale
                err_acc += q * q
            err_norm = math.sqrt(err_acc / _DIM)

            n_steps += 1
            if err_norm < 1.0:
                if err_norm == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
                if step_rejected:
                    factor = min(1.0, factor)
                break
            h_abs *= max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
            step_rejected = True
            if n_steps >= max_steps:
                return out, STATUS_MAX_STEPS, t, n_steps

        # emit dense output for every requested time inside (t, t_new]
        if out_idx < n_out and t_out[out_idx] <= t_new:
            Q = [[0.0] * 4 for _ in range(_DIM)]
            for d in range(_DIM):
                qd = Q[d]
                for i in range(7):
                    kid = K[i][d]
                    if kid != 0.0:
                        prow = _P[i]
                        for p in range(4):
                            qd[p] += kid * prow[p]
            while out_idx < n_out and t_out[out_idx] <= t_new:
                t_req = t_out[out_idx]
                if t_req == t_new:
                    for d in range(_DIM):
                        out[out_idx, d] = y_new[d]
                else:
                    theta = (t_req - t) / h
                    th1 = theta
                    th2 = th1 * theta
                    th3 = th2 * theta
                    th4 = th3 * theta
                    for d in range(_DIM):
                        qd = Q[d]
                        out[out_idx, d] = y[d] + h * (
                            qd[0] * th1 + qd[1] * th2 + qd[2] * th3 + qd[3] * th4
                        )
                out_idx += 1

        t = t_new
        y = y_new
        f = f_new
        h_abs *= factor

    return out, STATUS_OK, t, n_steps
