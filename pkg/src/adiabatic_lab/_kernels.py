"""Compiled Dormand-Prince 5(4) stepper for ``i dpsi/dt = (h(t).sigma) psi``.

The field ``h(t)`` is evaluated inline from the integer codes and parameter
vector produced by :func:`adiabatic_lab.models.kernel_args`.
"""

import math

import numpy as np
from numba import njit

# Dormand-Prince tableau
C2, C3, C4, C5 = 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9
A21 = 1.0 / 5
A31, A32 = 3.0 / 40, 9.0 / 40
A41, A42, A43 = 44.0 / 45, -56.0 / 15, 32.0 / 9
A51, A52, A53, A54 = 19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729
A61, A62, A63, A64, A65 = 9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656
B1, B3, B4, B5, B6 = 35.0 / 384, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600,
    -71.0 / 16695,
    71.0 / 1920,
    -17253.0 / 339200,
    22.0 / 525,
    -1.0 / 40,
)

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA

OK, UNDERFLOW, BUDGET = 0, 1, 2


@njit(cache=True, nogil=True)
def field(t, codes, p):
    """Return ``(hx, hy, hz, clamped)`` at time ``t``."""
    theta = p[0]
    w0 = p[1]
    if codes[0] == 0:
        if codes[2] == 0:
            R = p[2] * t
        else:
            a = abs(t) ** p[5]
            R = p[4] * a if t >= 0.0 else -p[4] * a
        clamped = 0
        if codes[1] == 0:
            f = R
        else:
            a = abs(R)
            if a < p[7]:
                a = p[7]
                clamped = 1
            if codes[1] == 1:
                f = math.log(a)
            else:
                f = a ** (1.0 - p[3])
        s = math.sin(theta)
        return (
            -0.5 * w0 * s * math.cos(f),
            -0.5 * w0 * s * math.sin(f),
            -0.5 * w0 * math.cos(theta),
            clamped,
        )
    w = p[2]
    st = math.sin(theta)
    ct = math.cos(theta)
    v2 = w0 * w0 + w * w + 2.0 * w * w0 * ct
    varpi = math.sqrt(v2)
    ph = varpi * t
    ch = math.cos(0.5 * ph)
    sh = math.sin(0.5 * ph)
    L1 = st * (w0 * w0 + 2.0 * w * w0 * ct * ch * ch + w * w * math.cos(ph)) / v2
    L2 = (w * st / varpi) * math.sin(ph)
    L3 = ct + (2.0 * w * w0 * st * st / v2) * sh * sh
    nrm = math.sqrt(L1 * L1 + L2 * L2 + L3 * L3)
    g = p[6] * 0.5 * w0 / nrm
    return g * L1, g * L2, g * L3, 0


@njit(cache=True, nogil=True)
def _apply(hx, hy, hz, y0, y1):
    # -i (h.sigma) y
    a = hz * y0 + complex(hx, -hy) * y1
    b = complex(hx, hy) * y0 - hz * y1
    return complex(a.imag, -a.real), complex(b.imag, -b.real)


@njit(cache=True, nogil=True)
def ground_overlap(hx, hy, hz, y0, y1):
    """``|<E_ground|y>|^2 / <y|y>`` for ``H = h.sigma`` without eigenvectors."""
    n2 = y0.real * y0.real + y0.imag * y0.imag + y1.real * y1.real + y1.imag * y1.imag
    c = y0.conjugate() * y1
    sx = 2.0 * c.real
    sy = 2.0 * c.imag
    sz = abs(y0) ** 2 - abs(y1) ** 2
    hn = math.sqrt(hx * hx + hy * hy + hz * hz)
    if hn == 0.0:
        return 1.0
    return 0.5 * (1.0 - (hx * sx + hy * sy + hz * sz) / (hn * n2))


@njit(cache=True, nogil=True)
def propagate_kernel(
    codes, p, psi0, targets, rtol, atol, h_init, h_min, max_steps, renorm, fixed_h
):
    """Integrate from ``targets[0]`` through every entry of ``targets``.

    ``targets`` must be strictly monotone; its direction sets the direction of
    integration.  Each target is hit exactly by a step endpoint.

    Returns ``(psi_at, normdev_at, n_reached, status, istats, fstats,
    psi_left)`` where ``istats = [steps, rejections, clamp_hits, fevals]`` and
    ``fstats = [max_norm_dev, log_rescale, f_min, t_min, t_left, t_right]``.
    ``psi_left`` is the state at ``t_left``, the step point before the
    running fidelity minimum.
    """
    n_t = targets.shape[0]
    psi_at = np.zeros((n_t, 2), dtype=np.complex128)
    normdev_at = np.zeros(n_t)
    istats = np.zeros(4, dtype=np.int64)
    fstats = np.zeros(6)
    psi_left = np.zeros(2, dtype=np.complex128)

    t = targets[0]
    y0 = psi0[0]
    y1 = psi0[1]
    psi_at[0, 0] = y0
    psi_at[0, 1] = y1
    direction = 1.0
    if n_t > 1 and targets[n_t - 1] < targets[0]:
        direction = -1.0

    hx, hy, hz, cl = field(t, codes, p)
    istats[2] += cl
    istats[3] += 1
    k10, k11 = _apply(hx, hy, hz, y0, y1)
    f_min = ground_overlap(hx, hy, hz, y0, y1)
    t_min = t
    t_left = t
    t_right = t
    psi_left[0] = y0
    psi_left[1] = y1
    need_right = False
    max_dev = 0.0
    log_rescale = 0.0

    h = abs(h_init)
    if fixed_h > 0.0:
        h = fixed_h
    err_old = 1e-4
    steps = 0
    rejects = 0
    status = OK
    idx = 1
    while idx < n_t:
        target = targets[idx]
        while True:
            remaining = (target - t) * direction
            if remaining <= 1e-14 * max(1.0, abs(t)):
                break
            if steps + rejects >= max_steps:
                status = BUDGET
                break
            hs = min(h, remaining)
            last = hs == remaining
            dt = direction * hs

            hx, hy, hz, cl = field(t + C2 * dt, codes, p)
            istats[2] += cl
            k20, k21 = _apply(hx, hy, hz, y0 + dt * A21 * k10, y1 + dt * A21 * k11)
            hx, hy, hz, cl = field(t + C3 * dt, codes, p)
            istats[2] += cl
            k30, k31 = _apply(
                hx, hy, hz,
                y0 + dt * (A31 * k10 + A32 * k20),
                y1 + dt * (A31 * k11 + A32 * k21),
            )
            hx, hy, hz, cl = field(t + C4 * dt, codes, p)
            istats[2] += cl
            k40, k41 = _apply(
                hx, hy, hz,
                y0 + dt * (A41 * k10 + A42 * k20 + A43 * k30),
                y1 + dt * (A41 * k11 + A42 * k21 + A43 * k31),
            )
            hx, hy, hz, cl = field(t + C5 * dt, codes, p)
            istats[2] += cl
            k50, k51 = _apply(
                hx, hy, hz,
                y0 + dt * (A51 * k10 + A52 * k20 + A53 * k30 + A54 * k40),
                y1 + dt * (A51 * k11 + A52 * k21 + A53 * k31 + A54 * k41),
            )
            hx, hy, hz, cl = field(t + dt, codes, p)
            istats[2] += cl
            k60, k61 = _apply(
                hx, hy, hz,
                y0 + dt * (A61 * k10 + A62 * k20 + A63 * k30 + A64 * k40 + A65 * k50),
                y1 + dt * (A61 * k11 + A62 * k21 + A63 * k31 + A64 * k41 + A65 * k51),
            )
            n0 = y0 + dt * (B1 * k10 + B3 * k30 + B4 * k40 + B5 * k50 + B6 * k60)
            n1 = y1 + dt * (B1 * k11 + B3 * k31 + B4 * k41 + B5 * k51 + B6 * k61)
            t_new = target if last else t + dt
            hx, hy, hz, cl = field(t_new, codes, p)
            istats[2] += cl
            k70, k71 = _apply(hx, hy, hz, n0, n1)
            istats[3] += 6

            if fixed_h > 0.0:
                err = 0.0
            else:
                e0 = dt * (E1 * k10 + E3 * k30 + E4 * k40 + E5 * k50 + E6 * k60 + E7 * k70)
                e1 = dt * (E1 * k11 + E3 * k31 + E4 * k41 + E5 * k51 + E6 * k61 + E7 * k71)
                s0 = atol + rtol * max(abs(y0), abs(n0))
                s1 = atol + rtol * max(abs(y1), abs(n1))
                err = math.sqrt(0.5 * ((abs(e0) / s0) ** 2 + (abs(e1) / s1) ** 2))

            if err <= 1.0:
                steps += 1
                prev_t = t
                prev0 = y0
                prev1 = y1
                t = t_new
                y0 = n0
                y1 = n1
                k10 = k70
                k11 = k71
                n2 = y0.real * y0.real + y0.imag * y0.imag + y1.real * y1.real + y1.imag * y1.imag
                dev = abs(n2 - 1.0)
                if dev > max_dev:
                    max_dev = dev
                if renorm:
                    sc = 1.0 / math.sqrt(n2)
                    y0 *= sc
                    y1 *= sc
                    k10 *= sc
                    k11 *= sc
                    log_rescale += abs(0.5 * math.log(n2))
                fid = ground_overlap(hx, hy, hz, y0, y1)
                if need_right:
                    t_right = t
                    need_right = False
                if fid < f_min:
                    f_min = fid
                    t_min = t
                    t_left = prev_t
                    psi_left[0] = prev0
                    psi_left[1] = prev1
                    t_right = t
                    need_right = True
                if fixed_h <= 0.0:
                    fac = SAFETY * max(err, 1e-10) ** (-EXPO) * err_old**BETA
                    fac = min(FAC_MAX, max(FAC_MIN, fac))
                    err_old = max(err, 1e-4)
                    hn = hs * fac
                    # a step clipped to land on a target does not shrink the proposal
                    if last and hn < h:
                        hn = h
                    h = hn
                if last:
                    normdev_at[idx] = dev
            else:
                rejects += 1
                fac = max(FAC_MIN, SAFETY * err ** (-EXPO))
                h = hs * fac
                if h < h_min:
                    status = UNDERFLOW
                    break
        if status != OK:
            break
        psi_at[idx, 0] = y0
        psi_at[idx, 1] = y1
        idx += 1

    istats[0] = steps
    istats[1] = rejects
    fstats[0] = max_dev
    fstats[1] = log_rescale
    fstats[2] = f_min
    fstats[3] = t_min
    fstats[4] = t_left
    fstats[5] = t_right
    return psi_at, normdev_at, idx, status, istats, fstats, psi_left
