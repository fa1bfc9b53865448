"""Independent enumeration oracles. The printed values are frozen in the C++ tests."""
from fractions import Fraction as F
import math

import numpy as np


def gmm_four_state():
    # k=1, q=0, W in {0,1}, alpha in {-1,1}, weight 2 + W*alpha, prob 1/4 each, B0 = 0.
    states = [(w, a, F(2) + w * a, F(1, 4)) for w in (0, 1) for a in (-1, 1)]
    ea = sum(p * wt for w, a, wt, p in states)
    alpha0 = sum(p * wt * a for w, a, wt, p in states) / ea
    eps = {(w, a): a - alpha0 for w, a, _, _ in states}
    ew = sum(p * w for w, a, wt, p in states)
    cond = sum(p * wt * eps[(w, a)] * w for w, a, wt, p in states) - sum(
        p * wt * eps[(w, a)] for w, a, wt, p in states) * ew
    # weighted least squares of alpha on (1, W)
    xtx = [[F(0)] * 2 for _ in range(2)]
    xty = [F(0)] * 2
    for w, a, wt, p in states:
        x = (F(1), F(w))
        for i in range(2):
            xty[i] += p * wt * x[i] * a
            for j in range(2):
                xtx[i][j] += p * wt * x[i] * x[j]
    det = xtx[0][0] * xtx[1][1] - xtx[0][1] * xtx[1][0]
    b = (xtx[0][0] * xty[1] - xtx[1][0] * xty[0]) / det
    a = (xtx[1][1] * xty[0] - xtx[0][1] * xty[1]) / det
    print("gmm_four_state alpha0", alpha0, "condition", cond, "bias_b", b, "alpha_lim", a)


def decomposition_randomized():
    # W independent of (eps, type); sigma2(0) = 2, sigma2(1) = 2 + 3/10 * eps; eps in {-1, 2} w.p. (2/3, 1/3).
    states = []
    for w in (0, 1):
        for e, pe in ((F(-1), F(2, 3)), (F(2), F(1, 3))):
            states.append((w, e, F(2), F(2) + F(3, 10) * e, F(1, 2) * pe))
    endo, stat, total = decomposition(states)
    print("decomposition_randomized endogenous", endo, "statistical", stat, "total", total)


def decomposition(states):
    def cond_mean(f, w):
        num = sum(p * f(s) for s in states for p in [s[4]] if s[0] == w)
        den = sum(s[4] for s in states if s[0] == w)
        return num / den

    endo = cond_mean(lambda s: (s[3] - s[2]) * s[1], 1)
    stat = cond_mean(lambda s: s[2] * s[1], 1) - cond_mean(lambda s: s[2] * s[1], 0)
    total = cond_mean(lambda s: s[3] * s[1], 1) - cond_mean(lambda s: s[2] * s[1], 0)
    return endo, stat, total


def banking_fixture():
    states = [(-1, 0, F(1, 5), F(1, 2)), (1, 0, F(2, 5), F(1, 2)), (-1, 1, F(1, 2), F(1, 2)), (1, 1, F(9, 10), F(1, 2))]
    w = [pa * pb / (pa + pb) ** 2 * F(1, 4) for _, _, pa, pb in states]
    sw = sum(w)
    mu = sum(wi * s[0] for wi, s in zip(w, states)) / sw
    mw = sum(wi * s[1] for wi, s in zip(w, states)) / sw
    cov = sum(wi * (s[0] - mu) * (s[1] - mw) for wi, s in zip(w, states))
    var = sum(wi * (s[1] - mw) ** 2 for wi, s in zip(w, states))
    v = cov / var
    print("banking_fixture", v, float(v).hex(), repr(float(v)))


def bound_fixture():
    # k=1, q=0, W = 0, 1, 2; the W=2 group dropped; residual magnitudes 0.2, 0.5, 0.3.
    m = np.array([[2.0, 1.0], [1.0, 1.0]]) / 3.0
    lam = (3 - math.sqrt(5)) / 6
    assert abs(lam - np.linalg.eigvalsh(m).min()) < 1e-15
    bound = math.sqrt(1 + 4) / lam * 0.5 * (1 / 3)
    print("bound_fixture lambda_min", repr(lam), "bound", repr(bound), "closed", repr((3 * math.sqrt(5) + 5) / 4))


def hc0_fixture():
    # theta on (1, W), W = 0, 1, 2, theta = 0.1, 1.3, 1.9.
    x = np.array([[1, 0], [1, 1], [1, 2]], dtype=float)
    y = np.array([0.1, 1.3, 1.9])
    xtx_inv = np.linalg.inv(x.T @ x)
    beta = xtx_inv @ x.T @ y
    r = y - x @ beta
    meat = sum(np.outer(x[i], x[i]) * r[i] ** 2 for i in range(3))
    v = xtx_inv @ meat @ xtx_inv
    print("hc0_fixture beta", beta.tolist(), "vcov", [repr(t) for t in v.ravel()])


def composition_demo():
    sig = lambda t: 1 / (1 + math.exp(-t))
    def cell(w1):
        p = [0.5 * sig(-0.5 + 1.5 * t + w1) for t in (0, 1)]
        return sum(p), p[1] / sum(p)
    s0, s1 = cell(0)[1], cell(1)[1]
    b1 = 0 + 2 * (s1 - s0)
    probs = {(0, 0): .35, (0, 1): .15, (1, 0): .15, (1, 1): .35}
    e1 = sum(p * w[0] for w, p in probs.items())
    e2 = sum(p * w[1] for w, p in probs.items())
    cov = sum(p * (w[0] - e1) * (w[1] - e2) for w, p in probs.items())
    var2 = sum(p * (w[1] - e2) ** 2 for w, p in probs.items())
    print("composition_demo beta1_eff", repr(b1), "ovb", repr(b1 * cov / var2))


if __name__ == "__main__":
    gmm_four_state()
    decomposition_randomized()
    banking_fixture()
    bound_fixture()
    hc0_fixture()
    composition_demo()
