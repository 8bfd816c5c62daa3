"""Shared test oracles, independent of the library code paths they check.

Expectation values here are evaluated by explicit operator traces with
freshly built Kronecker products, the CHSH/QBER optima by grid search
plus local refinement over Bloch directions, the Poisson mixture by
literal series summation, and the waveplate check by Jones-matrix
propagation.  None of these reuse the closed forms under test.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


def random_density_matrix(rng, rank: int = 4, dim: int = 4) -> np.ndarray:
    """Hilbert-Schmidt-style random state of the given rank."""
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unit_vector(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_single_qubit_unitary(rng) -> np.ndarray:
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def bloch_operator(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[0] * SX + x[1] * SY + x[2] * SZ


def correlation_along(rho: np.ndarray, a, b) -> float:
    """E(a, b) = Tr[rho (a.sigma (x) b.sigma)], built from scratch."""
    return np.trace(rho @ np.kron(bloch_operator(a), bloch_operator(b))).real


def _conditional_bloch(rho: np.ndarray, b) -> np.ndarray:
    return np.array([np.trace(rho @ np.kron(s, bloch_operator(b))).real for s in PAULIS])


def _sphere_grid(n_theta: int, n_phi: int) -> np.ndarray:
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    t, p = np.meshgrid(thetas, phis, indexing="ij")
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)],
                    axis=-1).reshape(-1, 3)


def _angles_of(v) -> list:
    return [math.acos(min(1.0, max(-1.0, v[2]))), math.atan2(v[1], v[0])]


def _dir_of(theta, phi) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi),
                     math.sin(theta) * math.sin(phi),
                     math.cos(theta)])


def chsh_max_brute(rho: np.ndarray, n_theta: int = 16, n_phi: int = 32) -> float:
    """Exhaustive maximization of the CHSH polynomial over Bloch directions.

    For fixed Bob directions the optimal Alice directions follow from
    Cauchy-Schwarz (a parallel to the conditional Bloch image), so only
    the (b1, b2) pair is searched: coarse grid, then Nelder-Mead.
    """
    dirs = _sphere_grid(n_theta, n_phi)
    images = np.array([_conditional_bloch(rho, b) for b in dirs])
    plus = np.linalg.norm(images[:, None, :] + images[None, :, :], axis=-1)
    minus = np.linalg.norm(images[:, None, :] - images[None, :, :], axis=-1)
    score = plus + minus
    i, j = np.unravel_index(np.argmax(score), score.shape)

    def negative(x):
        v1 = _conditional_bloch(rho, _dir_of(x[0], x[1]))
        v2 = _conditional_bloch(rho, _dir_of(x[2], x[3]))
        return -(np.linalg.norm(v1 + v2) + np.linalg.norm(v1 - v2))

    start = _angles_of(dirs[i]) + _angles_of(dirs[j])
    res = minimize(negative, start, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
    return max(float(score[i, j]), -float(res.fun))


def qber_min_brute(rho: np.ndarray, n_theta: int = 16, n_phi: int = 32) -> float:
    """Exhaustive minimization of the QBER over Bloch direction pairs.

    For a fixed second direction the optimal first one is parallel to
    the conditional Bloch image, leaving Q = (1 - |image|)/2 to be
    minimized over one sphere.
    """
    dirs = _sphere_grid(n_theta, n_phi)
    norms = np.array([np.linalg.norm(_conditional_bloch(rho, b)) for b in dirs])
    i = int(np.argmax(norms))

    def negative(x):
        return -np.linalg.norm(_conditional_bloch(rho, _dir_of(x[0], x[1])))

    res = minimize(negative, _angles_of(dirs[i]), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000})
    best = max(norms[i], -float(res.fun))
    return (1.0 - best) / 2.0


def coincidence_series(p11: float, p10: float, p01: float, p00: float,
                       n_bar: float, tail: float = 1e-15) -> float:
    """Literal Poisson-mixture sum, truncated once the tail is below ``tail``."""
    a = p10 + p00
    b = p01 + p00
    d = p00
    pmf = math.exp(-n_bar)
    cumulative = pmf
    total = 0.0  # n = 0 term vanishes
    n = 0
    while cumulative < 1.0 - tail and n < 100000:
        n += 1
        pmf *= n_bar / n
        cumulative += pmf
        total += pmf * (1.0 - a ** n - b ** n + d ** n)
    return total


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def hwp_jones(theta: float) -> np.ndarray:
    return rotation(theta) @ np.diag([1.0, -1.0]).astype(complex) @ rotation(-theta)


def qwp_jones(theta: float) -> np.ndarray:
    return rotation(theta) @ np.diag([1.0, -1.0j]) @ rotation(-theta)


def analyzer_projector(theta_q: float, theta_h: float) -> np.ndarray:
    """Projector realized by HWP -> QWP -> horizontal PBS output.

    The beam traverses the half-wave plate first, so the total Jones
    matrix is QWP(theta_q) @ HWP(theta_h); the measured projector is its
    pullback of |H><H|.
    """
    total = qwp_jones(theta_q) @ hwp_jones(theta_h)
    ket = total.conj().T @ np.array([1.0, 0.0], dtype=complex)
    return np.outer(ket, ket.conj())


def bloch_projector_direct(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (np.eye(2, dtype=complex) + bloch_operator(x)) / 2.0
