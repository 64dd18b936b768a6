"""Continuum transfer-matrix oracle for layered local media.

Independent of any spatial grid: fields are propagated analytically
through each homogeneous layer with the characteristic matrix

    [[cos kd, sin(kd)/k], [-k sin kd, cos kd]],

which is even in ``k`` and therefore free of branch choices.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, newton, root

from .constants import NATURAL


def _stack(model):
    if not model.is_local:
        raise ValueError("transfer matrices require local layers")
    out = []
    z = model.layers[0].z_min if model.layers else 0.0
    for layer in model.layers:
        if layer.z_min > z:
            out.append((layer.z_min - z, None))
        out.append((layer.z_max - layer.z_min, layer))
        z = layer.z_max
    return out


def _propagate(E, Ep, k, d):
    c, s = np.cos(k * d), np.sin(k * d)
    sk = s / k if k != 0 else d
    return E * c + Ep * sk, -k * s * E + c * Ep


def _k(layer, omega, constants):
    k0 = omega / constants.c
    return k0 if layer is None else k0 * np.sqrt(complex(layer.permittivity(omega)))


def characteristic_determinant(model, omega, constants=NATURAL):
    """``D(omega)``: zero exactly at the resonances of the layered system.

    The solution outgoing on the left is propagated to the right end and
    projected onto the incoming right-hand wave.
    """
    omega = complex(omega)
    k0 = omega / constants.c
    E, Ep = 1.0 + 0j, -1j * k0
    for d, layer in _stack(model):
        E, Ep = _propagate(E, Ep, _k(layer, omega, constants), d)
    return (Ep - 1j * k0 * E) / k0


def _gain_cavity_index(model):
    idx = [i for i, l in enumerate(model.layers) if l.has_gain]
    if len(idx) != 1 or idx[0] == 0 or idx[0] == len(model.layers) - 1:
        raise ValueError("model is not a single gain layer between mirrors")
    return idx[0]


def round_trip_factor(model, omega, constants=NATURAL):
    """Round-trip amplitude factor ``r_L r_R exp(2 i k d)`` in the gain layer."""
    i = _gain_cavity_index(model)
    omega = complex(omega)
    k0 = omega / constants.c
    stack = _stack(model)
    gain = model.layers[i]
    pos = next(j for j, (d, l) in enumerate(stack) if l is gain)
    E, Ep = 1.0 + 0j, -1j * k0
    for d, layer in stack[:pos]:
        E, Ep = _propagate(E, Ep, _k(layer, omega, constants), d)
    y_left = Ep / E
    E, Ep = 1.0 + 0j, 1j * k0
    for d, layer in reversed(stack[pos + 1:]):
        E, Ep = _propagate(E, Ep, _k(layer, omega, constants), -d)
    y_right = Ep / E
    k = _k(gain, omega, constants)
    if k.real < 0:
        k = -k
    r_right = (1j * k - y_right) / (1j * k + y_right)
    r_left = (1j * k + y_left) / (1j * k - y_left)
    return r_left * r_right * np.exp(2j * k * (gain.z_max - gain.z_min))


def cavity_round_trip(model, omegas, constants=NATURAL, n=4000):
    """Largest ``|RT|`` at phase-matched real frequencies in ``omegas`` range."""
    _gain_cavity_index(model)
    lo, hi = float(np.min(omegas)), float(np.max(omegas))
    om = np.linspace(max(lo, 1e-9 * hi), hi, n)
    rt = np.array([round_trip_factor(model, w, constants) for w in om])
    best = 0.0
    for j in np.flatnonzero((np.sign(rt.imag[:-1]) != np.sign(rt.imag[1:])) & (rt.real[:-1] > 0)):
        t = rt.imag[j] / (rt.imag[j] - rt.imag[j + 1])
        best = max(best, float(abs(rt[j] + t * (rt[j + 1] - rt[j]))))
    return best


@dataclass(frozen=True)
class Threshold:
    """Gain scale factor and real frequency at which a mode reaches the axis."""

    scale: float
    omega: float


def lasing_threshold(model, window=None, constants=NATURAL, n=60, s_min=1e-3, s_max=1e3):
    """Lowest gain scale at which a cavity resonance reaches the real axis.

    Resonances with real part inside ``window`` are located for the model
    as given (scale 1) and followed by Newton continuation as the gain
    strengths are multiplied by ``s``, upwards for damped modes and
    downwards for growing ones. The crossing of the real axis is
    bracketed and then polished by solving ``D(omega, s) = 0`` for real
    ``omega`` and ``s``.
    """
    i = _gain_cavity_index(model)
    if window is None:
        osc = [o for o in model.layers[i].oscillators if o.is_gain]
        window = (min(o.resonance - 3 * o.damping for o in osc),
                  max(o.resonance + 3 * o.damping for o in osc))
    starts = []
    for w0 in np.linspace(max(window[0], 1e-9), window[1], n):
        try:
            w = resonance_near(model, w0, constants)
        except RuntimeError:
            continue
        if window[0] <= w.real <= window[1] and all(abs(w - v) > 1e-6 * abs(w) for v in starts):
            starts.append(w)
    up = np.geomspace(1.0, s_max, 181)
    down = np.geomspace(1.0, s_min, 181)
    best = None
    for w in starts:
        scales = up if w.imag < 0 else down
        prev_s, prev_w = scales[0], w
        for s in scales[1:]:
            try:
                w = resonance_near(model.with_gain_scaled(s), prev_w, constants)
            except RuntimeError:
                break
            if abs(w - prev_w) > 0.5 * (window[1] - window[0]):
                break
            if (w.imag >= 0) != (prev_w.imag >= 0):
                lo, hi = sorted((prev_s, s))
                cand = _polish(model, lo, hi, prev_w, constants)
                if cand is not None and (best is None or cand.scale < best.scale):
                    best = cand
                break
            prev_s, prev_w = s, w
    if best is None:
        raise ValueError("no lasing threshold found in window")
    return best


def _polish(model, s_lo, s_hi, w_lo, constants):
    track = {"w": w_lo}

    def im_pole(ls):
        w = resonance_near(model.with_gain_scaled(np.exp(ls)), track["w"], constants)
        track["w"] = w
        return w.imag

    ls = brentq(im_pole, np.log(s_lo), np.log(s_hi), xtol=1e-14)

    def eqs(x):
        d = characteristic_determinant(model.with_gain_scaled(np.exp(x[1])), x[0], constants)
        return [d.real, d.imag]

    sol = root(eqs, [track["w"].real, ls], tol=1e-15)
    if not sol.success:
        return None
    return Threshold(float(np.exp(sol.x[1])), float(sol.x[0]))


def resonance_near(model, omega0, constants=NATURAL):
    """Complex resonance of the layered system nearest ``omega0`` (Newton)."""
    return complex(newton(lambda w: characteristic_determinant(model, w, constants),
                          complex(omega0), tol=1e-13, maxiter=200))
