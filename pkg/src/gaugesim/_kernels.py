"""Integration kernels.

Everything here takes plain ndarrays and scalars so the functions can be
compiled with numba or run as-is under the numpy backend (see
gaugesim._backend).  The uncompiled steppers stay importable through
``RAW`` for backend-parity tests; under the numba backend their inner
right-hand-side helpers are still the compiled ones, so a fully
interpreted run requires GAUGESIM_BACKEND=numpy.

Time stepping uses an embedded Dormand-Prince 5(4) pair with FSAL and a
hard step cap; the classical equations of motion use fixed-step RK4.
Hamiltonian matrices arrive complex and contiguous; tone arrays describe
sinusoidal diagonal modulation ``amp * sin(freq * t + phase)``.
"""

import numpy as np

from ._backend import jit


def _tone_diag(t, diag0, tsite, tamp, tfreq, tphase):
    d = diag0.copy()
    for k in range(tsite.shape[0]):
        d[tsite[k]] += tamp[k] * np.sin(tfreq[k] * t + tphase[k])
    return d


def _rhs_tones(t, psi, diag0, tsite, tamp, tfreq, tphase, hoff):
    d = _tone_diag(t, diag0, tsite, tamp, tfreq, tphase)
    return -1j * (hoff @ psi + d * psi)


def _dp45_tones(diag0, tsite, tamp, tfreq, tphase, hoff, psi0, times, tol, hmax):
    # adaptive Dormand-Prince 5(4); absolute per-step error controlled
    # against tol, steps never exceed hmax
    nt = times.shape[0]
    n = psi0.shape[0]
    out = np.zeros((nt, n), dtype=np.complex128)
    out[0] = psi0
    y = psi0.copy()
    t = times[0]
    h = hmax
    k1 = _rhs_tones(t, y, diag0, tsite, tamp, tfreq, tphase, hoff)
    for m in range(1, nt):
        tgt = times[m]
        while t < tgt:
            hs = h
            if t + hs > tgt:
                hs = tgt - t
            k2 = _rhs_tones(t + hs * 0.2, y + hs * 0.2 * k1,
                            diag0, tsite, tamp, tfreq, tphase, hoff)
            k3 = _rhs_tones(t + hs * 0.3, y + hs * (0.075 * k1 + 0.225 * k2),
                            diag0, tsite, tamp, tfreq, tphase, hoff)
            k4 = _rhs_tones(t + hs * 0.8,
                            y + hs * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2
                                      + (32.0 / 9.0) * k3),
                            diag0, tsite, tamp, tfreq, tphase, hoff)
            k5 = _rhs_tones(t + hs * (8.0 / 9.0),
                            y + hs * ((19372.0 / 6561.0) * k1
                                      - (25360.0 / 2187.0) * k2
                                      + (64448.0 / 6561.0) * k3
                                      - (212.0 / 729.0) * k4),
                            diag0, tsite, tamp, tfreq, tphase, hoff)
            k6 = _rhs_tones(t + hs,
                            y + hs * ((9017.0 / 3168.0) * k1
                                      - (355.0 / 33.0) * k2
                                      + (46732.0 / 5247.0) * k3
                                      + (49.0 / 176.0) * k4
                                      - (5103.0 / 18656.0) * k5),
                            diag0, tsite, tamp, tfreq, tphase, hoff)
            y5 = y + hs * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3
                           + (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5
                           + (11.0 / 84.0) * k6)
            k7 = _rhs_tones(t + hs, y5, diag0, tsite, tamp, tfreq, tphase, hoff)
            errv = hs * ((71.0 / 57600.0) * k1 - (71.0 / 16695.0) * k3
                         + (71.0 / 1920.0) * k4 - (17253.0 / 339200.0) * k5
                         + (22.0 / 525.0) * k6 - (1.0 / 40.0) * k7)
            err = np.abs(errv).max()
            if err <= tol or hs <= hmax * 1e-12:
                t = t + hs
                y = y5
                k1 = k7
                if err < 1e-300:
                    fac = 5.0
                else:
                    fac = 0.9 * (tol / err) ** 0.2
                    if fac > 5.0:
                        fac = 5.0
                    elif fac < 0.2:
                        fac = 0.2
                h = hs * fac
                if h > hmax:
                    h = hmax
            else:
                fac = 0.9 * (tol / err) ** 0.2
                if fac < 0.2:
                    fac = 0.2
                h = hs * fac
        t = tgt
        out[m] = y
    return out


def _rhs_drift(t, psi, hbase, drift, diagv):
    ht = hbase * np.exp(-1j * (drift * t))
    return -1j * (ht @ psi + diagv * psi)


def _dp45_drift(hbase, drift, diagv, psi0, times, tol, hmax):
    # same stepper for H(t) = hbase .* exp(-i*drift*t) + diag(diagv)
    nt = times.shape[0]
    n = psi0.shape[0]
    out = np.zeros((nt, n), dtype=np.complex128)
    out[0] = psi0
    y = psi0.copy()
    t = times[0]
    h = hmax
    k1 = _rhs_drift(t, y, hbase, drift, diagv)
    for m in range(1, nt):
        tgt = times[m]
        while t < tgt:
            hs = h
            if t + hs > tgt:
                hs = tgt - t
            k2 = _rhs_drift(t + hs * 0.2, y + hs * 0.2 * k1, hbase, drift, diagv)
            k3 = _rhs_drift(t + hs * 0.3, y + hs * (0.075 * k1 + 0.225 * k2),
                            hbase, drift, diagv)
            k4 = _rhs_drift(t + hs * 0.8,
                            y + hs * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2
                                      + (32.0 / 9.0) * k3),
                            hbase, drift, diagv)
            k5 = _rhs_drift(t + hs * (8.0 / 9.0),
                            y + hs * ((19372.0 / 6561.0) * k1
                                      - (25360.0 / 2187.0) * k2
                                      + (64448.0 / 6561.0) * k3
                                      - (212.0 / 729.0) * k4),
                            hbase, drift, diagv)
            k6 = _rhs_drift(t + hs,
                            y + hs * ((9017.0 / 3168.0) * k1
                                      - (355.0 / 33.0) * k2
                                      + (46732.0 / 5247.0) * k3
                                      + (49.0 / 176.0) * k4
                                      - (5103.0 / 18656.0) * k5),
                            hbase, drift, diagv)
            y5 = y + hs * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3
                           + (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5
                           + (11.0 / 84.0) * k6)
            k7 = _rhs_drift(t + hs, y5, hbase, drift, diagv)
            errv = hs * ((71.0 / 57600.0) * k1 - (71.0 / 16695.0) * k3
                         + (71.0 / 1920.0) * k4 - (17253.0 / 339200.0) * k5
                         + (22.0 / 525.0) * k6 - (1.0 / 40.0) * k7)
            err = np.abs(errv).max()
            if err <= tol or hs <= hmax * 1e-12:
                t = t + hs
                y = y5
                k1 = k7
                if err < 1e-300:
                    fac = 5.0
                else:
                    fac = 0.9 * (tol / err) ** 0.2
                    if fac > 5.0:
                        fac = 5.0
                    elif fac < 0.2:
                        fac = 0.2
                h = hs * fac
                if h > hmax:
                    h = hmax
            else:
                fac = 0.9 * (tol / err) ** 0.2
                if fac < 0.2:
                    fac = 0.2
                h = hs * fac
        t = tgt
        out[m] = y
    return out


def _rhs_lindblad(t, rho, diag0, tsite, tamp, tfreq, tphase, hoff,
                  decay, feed, vac):
    d = _tone_diag(t, diag0, tsite, tamp, tfreq, tphase)
    n = rho.shape[0]
    hr = hoff @ rho + d.reshape(n, 1) * rho
    rh = rho @ hoff + rho * d
    out = -1j * (hr - rh) + decay * rho
    if vac >= 0:
        s = 0.0
        for i in range(n):
            if i != vac:
                s += feed[i] * rho[i, i].real
        out[vac, vac] += s
    return out


def _dp45_lindblad(diag0, tsite, tamp, tfreq, tphase, hoff, decay, feed,
                   vac, rho0, times, tol, hmax):
    nt = times.shape[0]
    n = rho0.shape[0]
    out = np.zeros((nt, n, n), dtype=np.complex128)
    out[0] = rho0
    y = rho0.copy()
    t = times[0]
    h = hmax
    k1 = _rhs_lindblad(t, y, diag0, tsite, tamp, tfreq, tphase, hoff,
                       decay, feed, vac)
    for m in range(1, nt):
        tgt = times[m]
        while t < tgt:
            hs = h
            if t + hs > tgt:
                hs = tgt - t
            k2 = _rhs_lindblad(t + hs * 0.2, y + hs * 0.2 * k1, diag0,
                               tsite, tamp, tfreq, tphase, hoff, decay, feed, vac)
            k3 = _rhs_lindblad(t + hs * 0.3, y + hs * (0.075 * k1 + 0.225 * k2),
                               diag0, tsite, tamp, tfreq, tphase, hoff,
                               decay, feed, vac)
            k4 = _rhs_lindblad(t + hs * 0.8,
                               y + hs * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2
                                         + (32.0 / 9.0) * k3),
                               diag0, tsite, tamp, tfreq, tphase, hoff,
                               decay, feed, vac)
            k5 = _rhs_lindblad(t + hs * (8.0 / 9.0),
                               y + hs * ((19372.0 / 6561.0) * k1
                                         - (25360.0 / 2187.0) * k2
                                         + (64448.0 / 6561.0) * k3
                                         - (212.0 / 729.0) * k4),
                               diag0, tsite, tamp, tfreq, tphase, hoff,
                               decay, feed, vac)
            k6 = _rhs_lindblad(t + hs,
                               y + hs * ((9017.0 / 3168.0) * k1
                                         - (355.0 / 33.0) * k2
                                         + (46732.0 / 5247.0) * k3
                                         + (49.0 / 176.0) * k4
                                         - (5103.0 / 18656.0) * k5),
                               diag0, tsite, tamp, tfreq, tphase, hoff,
                               decay, feed, vac)
            y5 = y + hs * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3
                           + (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5
                           + (11.0 / 84.0) * k6)
            k7 = _rhs_lindblad(t + hs, y5, diag0, tsite, tamp, tfreq, tphase,
                               hoff, decay, feed, vac)
            errv = hs * ((71.0 / 57600.0) * k1 - (71.0 / 16695.0) * k3
                         + (71.0 / 1920.0) * k4 - (17253.0 / 339200.0) * k5
                         + (22.0 / 525.0) * k6 - (1.0 / 40.0) * k7)
            err = np.abs(errv).max()
            if err <= tol or hs <= hmax * 1e-12:
                t = t + hs
                y = y5
                k1 = k7
                if err < 1e-300:
                    fac = 5.0
                else:
                    fac = 0.9 * (tol / err) ** 0.2
                    if fac > 5.0:
                        fac = 5.0
                    elif fac < 0.2:
                        fac = 0.2
                h = hs * fac
                if h > hmax:
                    h = hmax
            else:
                fac = 0.9 * (tol / err) ** 0.2
                if fac < 0.2:
                    fac = 0.2
                h = hs * fac
        t = tgt
        out[m] = y
    return out


def _rk4_eom_batch(kx0, ky0, ex, ey, bz, jrate, times, dt):
    # classical wave-packet equations on the square lattice:
    #   kdot = E + v x B,  v = 2 J (sin kx, sin ky),  B = bz * zhat
    # state per mode: (kx, ky, x, y); fixed-step RK4
    nmode = kx0.shape[0]
    nt = times.shape[0]
    out = np.zeros((nmode, nt, 4))
    for mm in range(nmode):
        kx = kx0[mm]
        ky = ky0[mm]
        x = 0.0
        y = 0.0
        out[mm, 0, 0] = kx
        out[mm, 0, 1] = ky
        t = times[0]
        for m in range(1, nt):
            span = times[m] - t
            nsub = int(np.ceil(span / dt))
            if nsub < 1:
                nsub = 1
            h = span / nsub
            for _ in range(nsub):
                # k1
                vx1 = 2.0 * jrate * np.sin(kx)
                vy1 = 2.0 * jrate * np.sin(ky)
                ax1 = ex + bz * vy1
                ay1 = ey - bz * vx1
                # k2
                kxa = kx + 0.5 * h * ax1
                kya = ky + 0.5 * h * ay1
                vx2 = 2.0 * jrate * np.sin(kxa)
                vy2 = 2.0 * jrate * np.sin(kya)
                ax2 = ex + bz * vy2
                ay2 = ey - bz * vx2
                # k3
                kxb = kx + 0.5 * h * ax2
                kyb = ky + 0.5 * h * ay2
                vx3 = 2.0 * jrate * np.sin(kxb)
                vy3 = 2.0 * jrate * np.sin(kyb)
                ax3 = ex + bz * vy3
                ay3 = ey - bz * vx3
                # k4
                kxc = kx + h * ax3
                kyc = ky + h * ay3
                vx4 = 2.0 * jrate * np.sin(kxc)
                vy4 = 2.0 * jrate * np.sin(kyc)
                ax4 = ex + bz * vy4
                ay4 = ey - bz * vx4
                x += h * (vx1 + 2.0 * vx2 + 2.0 * vx3 + vx4) / 6.0
                y += h * (vy1 + 2.0 * vy2 + 2.0 * vy3 + vy4) / 6.0
                kx += h * (ax1 + 2.0 * ax2 + 2.0 * ax3 + ax4) / 6.0
                ky += h * (ay1 + 2.0 * ay2 + 2.0 * ay3 + ay4) / 6.0
            t = times[m]
            out[mm, m, 0] = kx
            out[mm, m, 1] = ky
            out[mm, m, 2] = x
            out[mm, m, 3] = y
    return out


RAW = {
    "dp45_tones": _dp45_tones,
    "dp45_drift": _dp45_drift,
    "dp45_lindblad": _dp45_lindblad,
    "rk4_eom_batch": _rk4_eom_batch,
}

_tone_diag = jit(_tone_diag)
_rhs_tones = jit(_rhs_tones)
_rhs_drift = jit(_rhs_drift)
_rhs_lindblad = jit(_rhs_lindblad)

dp45_tones = jit(_dp45_tones)
dp45_drift = jit(_dp45_drift)
dp45_lindblad = jit(_dp45_lindblad)
rk4_eom_batch = jit(_rk4_eom_batch)
