"""Reference values frozen into the C++ tests (run with mpmath, 30 digits)."""
from mpmath import mp, mpf, quad, gamma, exp, sqrt, pi, inf, cos, log

mp.dps = 30


def balakrishnan(s, ptf, m):
    # -s/Gamma(1-s) int_0^inf t^{-1-s} (P_t f(0) - f(0)) dt with f(0) = 1 and P_t f(0) -> m:
    # split at t = 1 and integrate the constant m - 1 on (1, inf) exactly.
    near = quad(lambda t: t ** (-1 - s) * (ptf(t) - 1), [0, mpf('1e-6'), mpf('1e-3'), 1])
    far = quad(lambda t: t ** (-1 - s) * (ptf(t) - m), [1, 10, 100, 1000, 10 ** 4, 10 ** 6, inf])
    return -s / gamma(1 - s) * (near + far + (m - 1) / s)


def heat_frac(s):
    return balakrishnan(s, lambda t: (1 + 2 * t) ** mpf(-0.5), 0)


def ou_frac(s):
    return balakrishnan(s, lambda t: (2 - exp(-2 * t)) ** mpf(-0.5), 1 / sqrt(2))


def gagliardo_fourier(s):
    # N=1, f = exp(-x^2/2): (1/2pi) int |fhat|^2 * int |e^{ih xi}-1|^2 |h|^{-1-2s} dh dxi
    # inner = |xi|^{2s} * 4 int_0^inf (1-cos u) u^{-1-2s} du
    c = 4 * quad(lambda u: (1 - cos(u)) * u ** (-1 - 2 * s), [0, 1] + [k * pi for k in range(1, 400)])
    tail = 4 * quad(lambda u: u ** (-1 - 2 * s), [399 * pi, inf])  # mean of (1-cos) is 1
    c = c + tail
    m = quad(lambda x: abs(x) ** (2 * s) * 2 * pi * exp(-x * x), [-inf, 0, inf])
    return c * m / (2 * pi)


def besov_heat_p2(s):
    g = lambda t: t ** (-s - 1) * 2 * sqrt(pi) * (1 - (1 + t) ** mpf(-0.5))
    return quad(g, [0, 1, 10, 100, 1e4, 1e6, inf])


for s in [mpf('0.1'), mpf('0.05'), mpf('0.02'), mpf('0.01'), mpf('0.5')]:
    print('heat_frac', s, heat_frac(s), 2 ** s * gamma(mpf(0.5) + s) / sqrt(pi))
for s in [mpf('0.1'), mpf('0.05'), mpf('0.02'), mpf('0.01'), mpf('0.5')]:
    print('ou_frac', s, ou_frac(s))
for s in [mpf('0.3'), mpf('0.5')]:
    print('gagliardo', s, gagliardo_fourier(s), 2 * sqrt(pi) * gamma(1 - s) / (s * 4 ** s))
for s in [mpf('0.3'), mpf('0.5')]:
    print('besov_heat_p2', s, besov_heat_p2(s), 2 * gamma(1 - s) * gamma(mpf(0.5) + s) / s)
print('far_tail trB=1 s=.5 p=2', mpf('0.5') * (2 + quad(lambda t: exp(-t) * t ** mpf(-1.5), [1, inf])))
s = mpf('0.05')
print('far tail K1 s=.05 p=2 fnorm=sqrt(pi)', sqrt(pi) * s * quad(lambda t: (1 + exp(-t)) * t ** (-s - 1), [1, 10, 100, inf]))


def resolvent_heat_ratio(lam):
    # ||lam R(lam) f||_2 / ||f||_2 for heat N=1, f = exp(-x^2/2), by Plancherel: |fhat|^2 ~ exp(-xi^2)
    num = quad(lambda x: (lam / (lam + x * x)) ** 2 * exp(-x * x), [-inf, -1, 0, 1, inf])
    return sqrt(num / sqrt(pi))


for lam in [mpf(1), mpf('0.1'), mpf('0.01')]:
    print('resolvent_heat_ratio', lam, resolvent_heat_ratio(lam))


def perimeter_heat_interval(sigma):
    # N^heat_{sigma,1}(1_[-1,1]) = int t^{-sigma/2-1} I(t) dt, I(t) = 2 int_E P(x + sqrt(2t) Z not in E) dx
    from mpmath import erfc

    def I(t):
        r = sqrt(4 * t)
        return 2 * quad(lambda x: (erfc((1 - x) / r) + erfc((1 + x) / r)) / 2, [-1, 0, 1])

    return quad(lambda t: t ** (-sigma / 2 - 1) * I(t), [0, mpf('1e-4'), mpf('0.01'), 1, 100, inf])


print('perimeter_heat_interval 0.5', perimeter_heat_interval(mpf('0.5')))


def log_det_gramian(B, Q, t, dps=600):
    # Entrywise closed form through the eigen-decomposition of B at high precision; the
    # Gramian mixes e^{2λt} and O(1) scales so double precision is not enough.
    with mp.workdps(dps):
        B, Q = mp.matrix(B), mp.matrix(Q)
        n = B.rows
        E, V = mp.eig(B)
        Vi = mp.inverse(V)
        C = Vi * Q * Vi.T
        W = mp.matrix(n, n)
        for i in range(n):
            for j in range(n):
                W[i, j] = sum(V[i, k] * C[k, l] * V[j, l] * (exp(t * (E[k] + E[l])) - 1) / (E[k] + E[l])
                              for k in range(n) for l in range(n))
        return mp.nstr(mp.re(log(mp.det(W))), 18)


for t in [mpf('0.5'), 5, 50, 100, 300]:
    print('log_det mixed 2x2', t, log_det_gramian([[0.8, 0.3], [0.2, -1.5]], [[1, 0], [0, 1]], t))
for t in [1, 20, 80]:
    print('log_det mixed 3x3', t,
          log_det_gramian([[0.5, 1, 0], [0, -0.7, 0.4], [0.3, 0, 0.1]], [[1, 0, 0], [0, 0, 0], [0, 0, 0]], t))
