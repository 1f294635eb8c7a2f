"""Pure-Python (numpy) fallback for the compiled kernels in ``_kernels.pyx``."""

import math

import numpy as np

BACKEND = "python"


def ras_sweeps(M, u, v, r, s, history, tol, max_iter):
    M = np.asarray(M)
    r = np.asarray(r)
    s = np.asarray(s)
    u_scale = np.maximum(u, 1.0)
    v_scale = np.maximum(v, 1.0)
    res = 0.0
    for it in range(1, max_iter + 1):
        ms = M @ s
        r[:] = np.divide(u, ms, out=np.zeros_like(ms), where=ms > 0)
        mr = r @ M
        s[:] = np.divide(v, mr, out=np.zeros_like(mr), where=mr > 0)
        X = r[:, None] * M * s[None, :]
        res = max(
            float(np.max(np.abs(X.sum(axis=1) - u) / u_scale, initial=0.0)),
            float(np.max(np.abs(X.sum(axis=0) - v) / v_scale, initial=0.0)),
        )
        history[it - 1] = res
        if res <= tol:
            return it, res
    return max_iter, res


def varimax_criterion(B):
    B = np.asarray(B)
    p = B.shape[0]
    sq = B * B
    return float((p * (sq * sq).sum(axis=0) - sq.sum(axis=0) ** 2).sum() / (p * p))


def varimax_sweeps(B, T, tol, max_sweeps):
    B = np.asarray(B)
    T = np.asarray(T)
    p, k = B.shape
    prev = varimax_criterion(B)
    for sweep in range(1, max_sweeps + 1):
        for a in range(k - 1):
            for b in range(a + 1, k):
                x = B[:, a]
                y = B[:, b]
                uu = x * x - y * y
                vv = 2.0 * x * y
                A, Bs = uu.sum(), vv.sum()
                C = (uu * uu - vv * vv).sum()
                D = 2.0 * (uu * vv).sum()
                num = D - 2.0 * A * Bs / p
                den = C - (A * A - Bs * Bs) / p
                if abs(num) < 1e-15 and den >= 0.0:
                    continue
                phi = 0.25 * math.atan2(num, den)
                c, sn = math.cos(phi), math.sin(phi)
                G = np.array([[c, -sn], [sn, c]])
                B[:, [a, b]] = B[:, [a, b]] @ G
                T[:, [a, b]] = T[:, [a, b]] @ G
        cur = varimax_criterion(B)
        if cur - prev < tol:
            return sweep, cur
        prev = cur
    return max_sweeps, prev
