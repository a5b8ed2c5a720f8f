# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Adaptive Dormand-Prince 5(4) integrator for small structured linear systems

    y'(x) = (A0 + cu(x) * Bu + cw(x) * Bw) y(x),    y(x0) = y0,

where the scalar coefficients cu, cw are piecewise-cubic tables on a uniform
grid (identically zero outside the table range).  A quartic dense interpolant
delivers the solution at a monotone list of target abscissae without
constraining the step sequence.  Tableau and interpolant are the classical
Dormand-Prince pair with Shampine's dense-output coefficients -- numerically
identical constants to scipy's RK45, so the pure-Python fallback and this
kernel are method twins and can be compared at tolerance level.

Only this narrow problem class is compiled: it is the inner loop of every
eigenfunction sweep, where a generic ODE library spends most of its time in
Python callback overhead.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, fmax, fmin, pow, sqrt

cnp.import_array()

ctypedef double complex cplx

# --- Dormand-Prince 5(4) tableau -------------------------------------------
cdef double[6] C_NODES
C_NODES = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0]

cdef double[6][5] A_TAB
A_TAB[0][:] = [0.0, 0.0, 0.0, 0.0, 0.0]
A_TAB[1][:] = [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0]
A_TAB[2][:] = [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0]
A_TAB[3][:] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0]
A_TAB[4][:] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0,
               -212.0 / 729.0, 0.0]
A_TAB[5][:] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
               49.0 / 176.0, -5103.0 / 18656.0]

cdef double[6] B_HIGH
B_HIGH = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
          -2187.0 / 6784.0, 11.0 / 84.0]

# error weights: high-order minus embedded 4th-order solution (7 stages)
cdef double[7] E_ERR
E_ERR = [-71.0 / 57600.0, 0.0, 71.0 / 16695.0, -71.0 / 1920.0,
         17253.0 / 339200.0, -22.0 / 525.0, 1.0 / 40.0]

# Shampine dense-output coefficients (7 stages x theta^1..theta^4)
cdef double[7][4] P_DENSE
P_DENSE[0][:] = [1.0, -2.8535800653862835, 3.0717434641059005, -1.1270175653862835]
P_DENSE[1][:] = [0.0, 0.0, 0.0, 0.0]
P_DENSE[2][:] = [0.0, 4.023133379230305, -6.249321565289, 2.675424484351598]
P_DENSE[3][:] = [0.0, -3.7324019615885042, 10.068970589843675, -5.685526961588504]
P_DENSE[4][:] = [0.0, 2.5548038301849423, -6.399112377351017, 3.5219323679207912]
P_DENSE[5][:] = [0.0, -1.3744241142186024, 3.272657752246729, -1.7672812570757455]
P_DENSE[6][:] = [0.0, 1.3824689317781436, -3.764937863556287, 2.382468931778144]

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double ERR_EXPONENT = -0.2  # -1 / (error_order + 1)


cdef inline double cmod(cplx z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline double table_value(double x, double lo, double h, double[:, ::1] c,
                               Py_ssize_t ni) noexcept nogil:
    """Evaluate a piecewise-cubic table; exactly zero outside its range."""
    cdef double pos, s
    cdef Py_ssize_t idx
    if ni == 0:
        return 0.0
    pos = (x - lo) / h
    if pos <= 0.0 or pos >= <double>ni:
        return 0.0
    idx = <Py_ssize_t>pos
    if idx >= ni:
        idx = ni - 1
    s = x - lo - (<double>idx) * h
    return c[idx, 0] + s * (c[idx, 1] + s * (c[idx, 2] + s * c[idx, 3]))


cdef inline void eval_rhs(double x, cplx* y, cplx* out, Py_ssize_t n,
                          cplx[:, ::1] a0, cplx[:, ::1] bu, cplx[:, ::1] bw,
                          double lo, double h, double[:, ::1] cu,
                          double[:, ::1] cw, Py_ssize_t ni) noexcept nogil:
    cdef double u = table_value(x, lo, h, cu, ni)
    cdef double w = table_value(x, lo, h, cw, ni)
    cdef Py_ssize_t i, j
    cdef cplx acc
    for i in range(n):
        acc = 0
        for j in range(n):
            acc = acc + (a0[i, j] + u * bu[i, j] + w * bw[i, j]) * y[j]
        out[i] = acc


def integrate_linear(cplx[:, ::1] a0, cplx[:, ::1] bu, cplx[:, ::1] bw,
                     double tab_lo, double tab_h,
                     double[:, ::1] cu, double[:, ::1] cw,
                     double x0, double[::1] targets, cplx[::1] y0,
                     double rtol, double atol):
    """Integrate from x0 and return the solution at each target.

    ``targets`` must be sorted monotonically away from x0 (the python
    wrapper guarantees this).  Returns an (m, n) complex array.
    """
    cdef Py_ssize_t n = y0.shape[0]
    cdef Py_ssize_t m = targets.shape[0]
    cdef Py_ssize_t ni = cu.shape[0]
    out_arr = np.empty((m, n), dtype=np.complex128)
    cdef cplx[:, ::1] out = out_arr
    if m == 0:
        return out_arr

    k_arr = np.empty((7, n), dtype=np.complex128)
    y_arr = np.empty(n, dtype=np.complex128)
    yn_arr = np.empty(n, dtype=np.complex128)
    st_arr = np.empty(n, dtype=np.complex128)
    q_arr = np.empty((n, 4), dtype=np.complex128)
    cdef cplx[:, ::1] K = k_arr
    cdef cplx[::1] y = y_arr
    cdef cplx[::1] y_new = yn_arr
    cdef cplx[::1] stage = st_arr
    cdef cplx[:, ::1] Q = q_arr

    cdef double x_end = targets[m - 1]
    cdef double direction = 1.0 if x_end >= x0 else -1.0
    cdef double t = x0, t_new, h, h_abs, theta, th_pow
    cdef double d0, d1, d2, h0, h1, err, sc, emit_tol
    cdef Py_ssize_t i, j, s, it = 0
    cdef long n_steps = 0
    cdef bint accepted
    cdef cplx acc

    for i in range(n):
        y[i] = y0[i]
    # targets sitting exactly at the start
    while it < m and targets[it] == x0:
        for i in range(n):
            out[it, i] = y[i]
        it += 1
    if it == m:
        return out_arr

    eval_rhs(t, &y[0], &K[0, 0], n, a0, bu, bw, tab_lo, tab_h, cu, cw, ni)

    # Hairer-style initial step selection on the scaled norms
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * cmod(y[i])
        d0 += (cmod(y[i]) / sc) ** 2
        d1 += (cmod(K[0, i]) / sc) ** 2
    d0 = sqrt(d0 / n)
    d1 = sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(n):
        stage[i] = y[i] + h0 * direction * K[0, i]
    eval_rhs(t + h0 * direction, &stage[0], &K[1, 0], n, a0, bu, bw,
             tab_lo, tab_h, cu, cw, ni)
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * cmod(y[i])
        d2 += (cmod(K[1, i] - K[0, i]) / sc) ** 2
    d2 = sqrt(d2 / n) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = fmax(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / fmax(d1, d2), 0.2)
    h_abs = fmin(100.0 * h0, h1)
    h_abs = fmin(h_abs, fabs(x_end - x0))

    emit_tol = 1e-13 * fmax(1.0, fmax(fabs(x0), fabs(x_end)))

    while it < m:
        n_steps += 1
        if n_steps > 20000000:
            raise RuntimeError("step limit exceeded in compiled sweep")
        if h_abs < 1e-15 * fmax(1.0, fabs(t)):
            raise RuntimeError("step size underflow in compiled sweep")
        h = h_abs * direction
        if (t + h - x_end) * direction > 0.0:
            h = x_end - t
        t_new = t + h

        # six fresh stages (K[0] holds f(t, y) via FSAL)
        for s in range(1, 6):
            for i in range(n):
                acc = 0
                for j in range(s):
                    acc = acc + A_TAB[s][j] * K[j, i]
                stage[i] = y[i] + h * acc
            eval_rhs(t + C_NODES[s] * h, &stage[0], &K[s, 0], n,
                     a0, bu, bw, tab_lo, tab_h, cu, cw, ni)
        for i in range(n):
            acc = 0
            for s in range(6):
                acc = acc + B_HIGH[s] * K[s, i]
            y_new[i] = y[i] + h * acc
        eval_rhs(t_new, &y_new[0], &K[6, 0], n, a0, bu, bw,
                 tab_lo, tab_h, cu, cw, ni)

        err = 0.0
        for i in range(n):
            acc = 0
            for s in range(7):
                acc = acc + E_ERR[s] * K[s, i]
            sc = atol + rtol * fmax(cmod(y[i]), cmod(y_new[i]))
            d0 = cmod(acc) * fabs(h) / sc
            err += d0 * d0
        err = sqrt(err / n)

        accepted = err < 1.0
        if accepted:
            if it < m and (targets[it] - t_new) * direction <= emit_tol:
                # dense coefficients Q = K^T @ P_DENSE for this step
                for i in range(n):
                    for j in range(4):
                        acc = 0
                        for s in range(7):
                            acc = acc + K[s, i] * P_DENSE[s][j]
                        Q[i, j] = acc
                while it < m and (targets[it] - t_new) * direction <= emit_tol:
                    theta = (targets[it] - t) / h
                    if theta > 1.0:
                        theta = 1.0
                    for i in range(n):
                        acc = 0
                        th_pow = theta
                        for j in range(4):
                            acc = acc + Q[i, j] * th_pow
                            th_pow *= theta
                        out[it, i] = y[i] + h * acc
                    it += 1
            t = t_new
            for i in range(n):
                y[i] = y_new[i]
                K[0, i] = K[6, i]
            if err == 0.0:
                h_abs *= MAX_FACTOR
            else:
                h_abs *= fmin(MAX_FACTOR, SAFETY * pow(err, ERR_EXPONENT))
        else:
            h_abs *= fmax(MIN_FACTOR, SAFETY * pow(err, ERR_EXPONENT))

    return out_arr


def backend_name():
    return "cython-dp5"
