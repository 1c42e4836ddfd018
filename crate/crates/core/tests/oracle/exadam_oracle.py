#!/usr/bin/env python3
"""High-precision reference values for the EXAdam kernels.

Evaluates the debiasing terms, the gradient accelerator and full stepping
loop with mpmath at 60 significant digits. Every float input (betas, eps,
alpha, gradients) is lifted into mpmath exactly as its binary64 value so the
reference sees the same inputs as the Rust code.

Usage:
    python3 exadam_oracle.py values      # scalar reference values
    python3 exadam_oracle.py goldens     # single-step goldens (JSON)
"""
import json
import sys

from mpmath import mp, mpf, sqrt

mp.dps = 60


def f(x):
    return mpf(float(x))


def m_tilde(m, v, t, b1, b2, eps):
    return m / (1 - b1**t) * (1 + v / (v + eps) * b2**t)


def v_tilde(m, v, t, b1, b2, eps):
    return v / (1 - b2**t) * (1 + m * m / (m * m + eps) * b1**t)


def g_tilde(g, v, t, b1, b2, eps):
    return g / (1 - b1**t) * (1 + v / (v + eps) * b2**t)


def values():
    b1, b2, eps = f(0.9), f(0.999), f(1e-8)
    out = {}
    out["m_tilde(m=0.1,v=0.001,t=1)"] = m_tilde(f(0.1), f(0.001), 1, b1, b2, eps)
    out["v_tilde(m=0.1,v=0.001,t=1)"] = v_tilde(f(0.1), f(0.001), 1, b1, b2, eps)
    out["g_tilde(g=1,v=0.1,t=100)"] = g_tilde(f(1), f(0.1), 100, b1, b2, eps)
    out["g_tilde(g=1,v=0.001,t=100)"] = g_tilde(f(1), f(0.001), 100, b1, b2, eps)
    out["g_tilde(g=1,v=0.1,t=1e6)"] = g_tilde(f(1), f(0.1), 10**6, b1, b2, eps)

    # first EXAdam step from theta=0, g=1, alpha=1e-3
    alpha = f(1e-3)
    g = f(1)
    m = (1 - b1) * g
    v = (1 - b2) * g * g
    mt = m_tilde(m, v, 1, b1, b2, eps)
    vt = v_tilde(m, v, 1, b1, b2, eps)
    gt = g_tilde(g, v, 1, b1, b2, eps)
    out["first_step.m_tilde"] = mt
    out["first_step.v_tilde"] = vt
    out["first_step.g_tilde"] = gt
    out["first_step.sqrt_v_tilde"] = sqrt(vt)
    out["first_step.delta"] = -alpha * (mt + gt) / (sqrt(vt) + eps)

    # first Adam step
    mh = m / (1 - b1)
    vh = v / (1 - b2)
    out["adam_first_step.delta"] = -alpha * mh / (sqrt(vh) + eps)
    for k, val in out.items():
        print(f"{k} = {mp.nstr(val, 25)}")


# Fixed single-step inputs shared with `exadam export-goldens`.
GOLDEN_THETA0 = [0.5, -1.0, 2.0, 0.0]
GOLDEN_BASE = [1.0, -0.5, 0.25, 0.0]
GOLDEN_STEPS = [1, 2, 10, 100]
GOLDEN_ALPHA = 1e-3


def golden_gradient(k):
    scale = 1 + f((k % 4) / 4)
    return [f(b) * scale for b in GOLDEN_BASE]


def goldens():
    b1, b2, eps, alpha = f(0.9), f(0.999), f(1e-8), f(GOLDEN_ALPHA)
    n = len(GOLDEN_THETA0)
    theta = [f(x) for x in GOLDEN_THETA0]
    m = [mpf(0)] * n
    v = [mpf(0)] * n
    records = []
    for t in range(1, max(GOLDEN_STEPS) + 1):
        g = golden_gradient(t)
        m = [b1 * mi + (1 - b1) * gi for mi, gi in zip(m, g)]
        v = [b2 * vi + (1 - b2) * gi * gi for vi, gi in zip(v, g)]
        mt = [m_tilde(mi, vi, t, b1, b2, eps) for mi, vi in zip(m, v)]
        vt = [v_tilde(mi, vi, t, b1, b2, eps) for mi, vi in zip(m, v)]
        gt = [g_tilde(gi, vi, t, b1, b2, eps) for gi, vi in zip(g, v)]
        upd = [-alpha * (a + b) / (sqrt(c) + eps) for a, b, c in zip(mt, gt, vt)]
        theta = [th + u for th, u in zip(theta, upd)]
        if t in GOLDEN_STEPS:
            fl = lambda xs: [float(x) for x in xs]
            records.append(
                {
                    "t": t,
                    "gradient": fl(g),
                    "m": fl(m),
                    "v": fl(v),
                    "m_tilde": fl(mt),
                    "v_tilde": fl(vt),
                    "g_tilde": fl(gt),
                    "effective_update": fl(upd),
                    "theta": fl(theta),
                }
            )
    doc = {
        "alpha": GOLDEN_ALPHA,
        "beta1": 0.9,
        "beta2": 0.999,
        "epsilon": 1e-8,
        "theta0": GOLDEN_THETA0,
        "gradient_base": GOLDEN_BASE,
        "records": records,
    }
    json.dump(doc, sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    cmd = sys.argv[1] if len(sys.argv) > 1 else "values"
    {"values": values, "goldens": goldens}[cmd]()
