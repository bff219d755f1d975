"""Independent reference computations used to cross-check the library.

None of these call the multiplier parametrization: relative equilibria on a
sphere come from Newton on the Lagrange system started at a dense point set,
saddle-centre multipliers from the roots of a polynomial numerator.
"""

import numpy as np
from numpy.polynomial import polynomial as P


def fibonacci_sphere(n):
    k = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * k / n)
    th = np.pi * (1 + 5**0.5) * k
    return np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], axis=1)


def lagrange_points(coeffs, alpha, j0, starts=400):
    """Critical points of ``sum a_i x_i^2 + alpha.x`` on ``|x|^2 = 2 j0``."""
    a = np.asarray(coeffs, float)
    alpha = np.asarray(alpha, float)
    r = np.sqrt(2 * j0)
    found = []
    for p in fibonacci_sphere(starts) * r:
        g = 2 * a * p + alpha
        lam = g @ p / (p @ p)
        z = np.append(p, lam)
        for _ in range(60):
            x, lam = z[:3], z[3]
            F = np.append(2 * a * x + alpha - lam * x, 0.5 * (x @ x) - j0)
            Jm = np.zeros((4, 4))
            Jm[:3, :3] = np.diag(2 * a - lam)
            Jm[:3, 3] = -x
            Jm[3, :3] = x
            try:
                dz = np.linalg.solve(Jm, -F)
            except np.linalg.LinAlgError:
                break
            z = z + dz
            if np.linalg.norm(dz) < 1e-14 * (1 + np.linalg.norm(z)):
                break
        x = z[:3]
        res = np.linalg.norm(np.append(2 * a * x + alpha - z[3] * x, 0.5 * (x @ x) - j0))
        if res < 1e-10 and not any(np.linalg.norm(x - q) < 1e-7 for q in found):
            found.append(x)
    return found


def saddle_centre_multipliers(coeffs, alpha):
    """Real roots of the numerator of ``sum alpha_i^2 / (lam - 2 a_i)^3`` between the poles."""
    poles = 2 * np.asarray(coeffs, float)
    num = np.zeros(1)
    for i in range(3):
        t = np.array([alpha[i] ** 2])
        for k in range(3):
            if k != i:
                t = P.polymul(t, P.polypow([-poles[k], 1], 3))
        num = P.polyadd(num, t)
    r = P.polyroots(num)
    r = np.sort(r[np.abs(r.imag) < 1e-9].real)
    return [float(v) for v in r if poles.min() < v < poles.max()]


def euler_rhs(coeffs, alpha, mu):
    return np.cross(mu, 2 * np.asarray(coeffs) * mu + np.asarray(alpha))


# frozen from saddle_centre_multipliers at (3,2,1)
FROZEN_SC = {
    (1.0, 1.0, 1.0): [(2.993865642090185, 1.0554419501991565), (5.006134357909624, 1.0554419501991565)],
    (1.0, 2.0, 3.0): [(3.1332108452912237, 6.227025517760221), (5.245868151745013, 2.5948002324302544)],
}
