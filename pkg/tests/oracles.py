"""Independent reference computations used to pin test values.

Nothing here imports the package's numerical kernels: amplitudes come from
``inv(I + c D^-1 V)`` with an explicit momentum rescale, integrals from
uniform grids or scipy's adaptive quadrature.
"""

import numpy as np
from scipy import integrate


def single_channel_transmission(E, m=1.0, g=1.0, hbar=1.0):
    """``|t|^2 = 1 / (1 + m g^2 / (2 hbar^2 E))`` for one channel."""
    return 1.0 / (1.0 + m * g**2 / (2.0 * hbar**2 * E))


def amplitudes(energies, V, E, m=1.0, g=1.0, hbar=1.0):
    """``(t_hat, r_hat)`` at scalar ``E``; closed rows/columns zero."""
    e = np.asarray(energies, float)
    n = e.size
    kin = E - e
    k = np.where(kin >= 0, np.sqrt(2 * m * np.abs(kin)) + 0j, 1j * np.sqrt(2 * m * np.abs(kin))) / hbar
    c = 1j * m * g / hbar**2
    t = np.linalg.inv(np.eye(n) + c * np.diag(1.0 / k) @ np.asarray(V, float))
    r = t - np.eye(n)
    open_ = kin > 0
    th = np.zeros((n, n), complex)
    rh = np.zeros((n, n), complex)
    for a in range(n):
        for b in range(n):
            if open_[a] and open_[b]:
                f = np.sqrt(k[a].real / k[b].real)
                th[a, b] = f * t[a, b]
                rh[a, b] = f * r[a, b]
    return th, rh


def packet_map_riemann(energies, V, p0, sigma, x0=0.0, m=1.0, g=1.0, hbar=1.0, n=10240):
    """One left-incident packet's map by a uniform midpoint sum over ``p0 +/- 8 sigma``.

    Only valid when the integrand is smooth on the window (no channel
    thresholds or partner-momentum cut-offs inside it).
    """
    e = np.asarray(energies, float)
    N = e.size
    lo, hi = p0 - 8 * sigma, p0 + 8 * sigma
    h = (hi - lo) / n
    p = lo + h * (np.arange(n) + 0.5)

    def phi(q):
        return (2 * np.pi * sigma**2) ** -0.25 * np.exp(
            -((q - p0) ** 2) / (4 * sigma**2) - 1j * q * x0 / hbar
        )

    cache = {}

    def blocks(E):
        key = E.tobytes()
        if key not in cache:
            cache[key] = [amplitudes(e, V, x, m, g, hbar) for x in E]
        return cache[key]

    out = np.zeros((N, N, N, N), complex)
    for jp in range(N):
        for j in range(N):
            d1 = e[jp] - e[j]
            for kp in range(N):
                for k in range(N):
                    delta = d1 - (e[kp] - e[k])
                    pi2 = p**2 - 2 * m * delta
                    assert np.all(pi2 > 0)
                    pi = np.sqrt(pi2)
                    b1 = blocks(p**2 / (2 * m) + e[j])
                    b2 = blocks(p**2 / (2 * m) - d1 + e[kp])
                    t1 = np.array([b[0][jp, j] for b in b1])
                    r1 = np.array([b[1][jp, j] for b in b1])
                    t2 = np.array([b[0][kp, k] for b in b2])
                    r2 = np.array([b[1][kp, k] for b in b2])
                    f = phi(p) * np.conj(phi(pi)) * np.sqrt(p / pi) * (t1 * np.conj(t2) + r1 * np.conj(r2))
                    out[jp, kp, j, k] = h * f.sum()
    return out.reshape(N * N, N * N)


def broad_diagonal_bruteforce(beta, m, sigma, p):
    """``int dp0 mu_eff(p0) (|phi_p0(p)|^2 + |phi_-p0(p)|^2) / 2`` by adaptive quadrature."""

    def gauss(q, c):
        return np.exp(-((q - c) ** 2) / (2 * sigma**2)) / np.sqrt(2 * np.pi * sigma**2)

    def integrand(p0, q):
        mu = beta * p0 / m * np.exp(-beta * p0**2 / (2 * m))
        return mu * 0.5 * (gauss(q, p0) + gauss(q, -p0))

    out = []
    for q in np.atleast_1d(p):
        val, _ = integrate.quad(integrand, 0, np.inf, args=(q,), epsabs=1e-13, epsrel=1e-12, limit=200)
        out.append(val)
    return np.array(out)
