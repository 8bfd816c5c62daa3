"""Two-qubit tomography: frequency synthesis, MLE reconstruction, uncertainty.

The measurement set is the 36 ordered pairs of the six polarization
states H, V, D, A, R, L.  Pairs sharing the same Pauli axis on both
sides form 9 complementary quadruples (3 x 3 axis combinations) whose
four projectors sum to the identity; counts are treated as multinomial
within each quadruple, which is why the likelihood

    log L = sum_k c_k log C_k,     C_k = <psi_k| rho |psi_k>

needs no per-group normalization of the input: rescaling all
frequencies by a constant leaves the maximizer unchanged.

Reconstruction uses the iterative fixed-point ascent rho -> R rho R
with R = sum_k (c_k / C_k) Pi_k and trace renormalization.  If a full
step ever lowers the likelihood it is replaced by a diluted step
(I + eps R) rho (I + eps R) with eps halved until the likelihood does
not decrease, so accepted iterates are monotone by construction.

Monte-Carlo uncertainty resamples every observed count as Poisson with
the observed value as mean.  Per-sample generators are spawned from a
single master seed, so results are reproducible and independent of any
parallel scheduling of the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import metrics
from .numeric import golden_section_max
from .spdc import SourceParams, click_probabilities, coincidence_probability
from .states import (POLARIZATION_BLOCH, POLARIZATION_KETS, ket_to_dm,
                     validate_density_matrix)

try:  # optional accelerator; the numpy path below is the reference
    import numba
except ImportError:
    numba = None

PROJECTION_LABELS = ("H", "V", "D", "A", "R", "L")

_LL_FLOOR = 1e-300  # guards log of model probabilities that underflow to 0


@dataclass(frozen=True)
class TomographySettings:
    """Ordered list of the 36 projection pairs with cached projectors.

    The canonical order is row-major over (a, b) with both labels
    running through H, V, D, A, R, L; any order covering all 36 ordered
    pairs exactly once is accepted.
    """

    pairs: tuple

    def __post_init__(self):
        pairs = tuple((str(a), str(b)) for a, b in self.pairs)
        expected = {(a, b) for a in PROJECTION_LABELS for b in PROJECTION_LABELS}
        if len(pairs) != 36 or set(pairs) != expected:
            raise ValueError("settings must cover all 36 ordered projection pairs exactly once")
        object.__setattr__(self, "pairs", pairs)

        projectors = np.empty((36, 4, 4), dtype=complex)
        bloch_a = np.empty((36, 3))
        bloch_b = np.empty((36, 3))
        groups = np.empty(36, dtype=int)
        axis = {"H": 0, "V": 0, "D": 1, "A": 1, "R": 2, "L": 2}
        for k, (a, b) in enumerate(pairs):
            projectors[k] = ket_to_dm(np.kron(POLARIZATION_KETS[a], POLARIZATION_KETS[b]))
            bloch_a[k] = POLARIZATION_BLOCH[a]
            bloch_b[k] = POLARIZATION_BLOCH[b]
            groups[k] = axis[a] * 3 + axis[b]
        projectors_flat = np.ascontiguousarray(projectors.reshape(36, 16))
        for arr in (projectors, projectors_flat, bloch_a, bloch_b, groups):
            arr.flags.writeable = False
        object.__setattr__(self, "projectors", projectors)
        object.__setattr__(self, "projectors_flat", projectors_flat)
        object.__setattr__(self, "bloch_a", bloch_a)
        object.__setattr__(self, "bloch_b", bloch_b)
        object.__setattr__(self, "group_index", groups)

    @classmethod
    def canonical(cls) -> "TomographySettings":
        return cls(tuple((a, b) for a in PROJECTION_LABELS for b in PROJECTION_LABELS))

    def born_probabilities(self, rho: np.ndarray) -> np.ndarray:
        """<psi_k| rho |psi_k> for all 36 settings."""
        return np.einsum("kij,ji->k", self.projectors, rho).real


@dataclass(frozen=True)
class TomographyDataset:
    """Coincidence counts for the 36 settings plus timing information."""

    settings: TomographySettings
    counts: np.ndarray
    tau_s: float
    duration_s: float

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (36,):
            raise ValueError(f"counts must have shape (36,), got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if np.any(counts != np.floor(counts)):
            raise ValueError("counts must be integers")
        counts = counts.astype(np.int64)
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        if not self.tau_s > 0.0:
            raise ValueError(f"tau_s must be positive, got {self.tau_s}")
        if not self.duration_s > 0.0:
            raise ValueError(f"duration_s must be positive, got {self.duration_s}")
        if self.duration_s < self.tau_s:
            raise ValueError("duration_s must be at least tau_s (need N_win >= 1)")

    @property
    def n_windows(self) -> float:
        return self.duration_s / self.tau_s


@dataclass(frozen=True)
class ReconstructionResult:
    """MLE state with the achieved log-likelihood and iteration diagnostics."""

    rho: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class UncertaintyReport:
    """Monte-Carlo means and standard deviations of the key figures of merit."""

    s_mean: float
    s_std: float
    q_mean: float
    q_std: float
    r_dw_mean: float
    r_dw_std: float
    r_key_mean: float
    r_key_std: float
    samples: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "S": {"mean": self.s_mean, "std": self.s_std},
            "Q": {"mean": self.q_mean, "std": self.q_std},
            "r_dw": {"mean": self.r_dw_mean, "std": self.r_dw_std},
            "R_key": {"mean": self.r_key_mean, "std": self.r_key_std},
            "samples": self.samples,
            "seed": self.seed,
        }


def synthesize_frequencies(rho0: np.ndarray, params: SourceParams,
                           settings: TomographySettings) -> np.ndarray:
    """Model coincidence probability for every projection pair."""
    rho0 = validate_density_matrix(rho0, name="rho0")
    out = np.empty(36)
    for k in range(36):
        cp = click_probabilities(rho0, settings.bloch_a[k], settings.bloch_b[k], params)
        out[k] = coincidence_probability(cp, params.n_bar)
    return out


def _log_likelihood(c: np.ndarray, p: np.ndarray) -> float:
    mask = c > 0
    return float(np.sum(c[mask] * np.log(np.maximum(p[mask], _LL_FLOOR))))


def _fixed_point_numpy(pflat, c, rho, tol_rho, tol_ll, max_iterations,
                       on_iteration=None):
    """Reference implementation of the monotone fixed-point ascent."""
    idx = np.flatnonzero(c > 0)
    c_pos = c[idx]
    pflat_pos = pflat[idx]
    p_pos = (pflat @ rho.T.ravel()).real[idx]
    ll = float(c_pos @ np.log(np.maximum(p_pos, _LL_FLOOR)))
    identity = np.eye(4, dtype=complex)
    iterations = 0
    converged = False

    def born_pos(state):
        return (pflat @ state.T.ravel()).real[idx]

    for iterations in range(1, max_iterations + 1):
        weights = c_pos / np.maximum(p_pos, _LL_FLOOR)
        r_op = (weights @ pflat_pos).reshape(4, 4)
        new = r_op @ rho @ r_op
        new /= new.trace().real
        p_new = born_pos(new)
        ll_new = float(c_pos @ np.log(np.maximum(p_new, _LL_FLOOR)))
        if ll_new < ll:
            # full step overshot; dilute until the likelihood is monotone
            eps = 0.5
            accepted = False
            while eps > 1e-10:
                step = identity + eps * r_op
                candidate = step @ rho @ step
                candidate /= candidate.trace().real
                p_cand = born_pos(candidate)
                ll_cand = float(c_pos @ np.log(np.maximum(p_cand, _LL_FLOOR)))
                if ll_cand >= ll:
                    new, p_new, ll_new = candidate, p_cand, ll_cand
                    accepted = True
                    break
                eps /= 2.0
            if not accepted:
                converged = True  # stationary: no ascent direction left
                break
        delta = float(np.max(np.abs(new - rho)))
        gain = ll_new - ll
        rho, p_pos, ll = new, p_new, ll_new
        if on_iteration is not None:
            on_iteration(iterations, ll)
        if delta < tol_rho or gain < tol_ll:
            converged = True
            break
    return rho, ll, iterations, converged


if numba is not None:

    @numba.njit(cache=True)
    def _fixed_point_jit(pflat, c, rho_in, tol_rho, tol_ll, max_iterations):  # pragma: no cover
        n_set = pflat.shape[0]
        rho = rho_in.copy()
        floor = 1e-300
        p = np.empty(n_set)
        for k in range(n_set):
            acc = 0.0j
            for i in range(4):
                for j in range(4):
                    acc += pflat[k, 4 * i + j] * rho[j, i]
            p[k] = acc.real
        ll = 0.0
        for k in range(n_set):
            if c[k] > 0.0:
                p_k = p[k] if p[k] > floor else floor
                ll += c[k] * math.log(p_k)

        r_op = np.empty((4, 4), dtype=np.complex128)
        new = np.empty((4, 4), dtype=np.complex128)
        tmp = np.empty((4, 4), dtype=np.complex128)
        p_new = np.empty(n_set)
        iterations = 0
        converged = False
        for iterations in range(1, max_iterations + 1):
            for i in range(4):
                for j in range(4):
                    r_op[i, j] = 0.0j
            for k in range(n_set):
                if c[k] > 0.0:
                    p_k = p[k] if p[k] > floor else floor
                    w = c[k] / p_k
                    for i in range(4):
                        for j in range(4):
                            r_op[i, j] += w * pflat[k, 4 * i + j]

            for i in range(4):
                for j in range(4):
                    acc = 0.0j
                    for m in range(4):
                        acc += r_op[i, m] * rho[m, j]
                    tmp[i, j] = acc
            trace = 0.0
            for i in range(4):
                for j in range(4):
                    acc = 0.0j
                    for m in range(4):
                        acc += tmp[i, m] * r_op[m, j]
                    new[i, j] = acc
                trace += new[i, i].real
            for i in range(4):
                for j in range(4):
                    new[i, j] /= trace

            for k in range(n_set):
                acc = 0.0j
                for i in range(4):
                    for j in range(4):
                        acc += pflat[k, 4 * i + j] * new[j, i]
                p_new[k] = acc.real
            ll_new = 0.0
            for k in range(n_set):
                if c[k] > 0.0:
                    p_k = p_new[k] if p_new[k] > floor else floor
                    ll_new += c[k] * math.log(p_k)

            if ll_new < ll:
                eps = 0.5
                accepted = False
                while eps > 1e-10:
                    for i in range(4):
                        for j in range(4):
                            step = eps * r_op[i, j]
                            if i == j:
                                step += 1.0
                            tmp[i, j] = step
                    trace = 0.0
                    for i in range(4):
                        for j in range(4):
                            acc = 0.0j
                            for m in range(4):
                                for mm in range(4):
                                    acc += tmp[i, m] * rho[m, mm] * np.conj(tmp[j, mm])
                            new[i, j] = acc
                        trace += new[i, i].real
                    for i in range(4):
                        for j in range(4):
                            new[i, j] /= trace
                    for k in range(n_set):
                        acc = 0.0j
                        for i in range(4):
                            for j in range(4):
                                acc += pflat[k, 4 * i + j] * new[j, i]
                        p_new[k] = acc.real
                    ll_cand = 0.0
                    for k in range(n_set):
                        if c[k] > 0.0:
                            p_k = p_new[k] if p_new[k] > floor else floor
                            ll_cand += c[k] * math.log(p_k)
                    if ll_cand >= ll:
                        ll_new = ll_cand
                        accepted = True
                        break
                    eps /= 2.0
                if not accepted:
                    converged = True
                    break

            delta = 0.0
            for i in range(4):
                for j in range(4):
                    diff = abs(new[i, j] - rho[i, j])
                    if diff > delta:
                        delta = diff
            gain = ll_new - ll
            for i in range(4):
                for j in range(4):
                    rho[i, j] = new[i, j]
            for k in range(n_set):
                p[k] = p_new[k]
            ll = ll_new
            if delta < tol_rho or gain < tol_ll:
                converged = True
                break
        return rho, ll, iterations, converged


def mle_reconstruct(frequencies, settings: TomographySettings,
                    tol_rho: float = 1e-10, tol_ll: float = 1e-12,
                    max_iterations: int = 10000,
                    rho_start=None, on_iteration=None) -> ReconstructionResult:
    """Maximum-likelihood state from 36 coincidence frequencies or counts.

    Parameters
    ----------
    frequencies : array_like, shape (36,)
        Nonnegative counts or relative frequencies in settings order;
        any overall scale is irrelevant.
    tol_rho, tol_ll : float
        Stop when the largest element change falls below ``tol_rho`` or
        the per-unit-weight likelihood gain falls below ``tol_ll``.
    max_iterations : int
        Iteration cap; hitting it returns the best iterate flagged
        ``converged=False``.
    rho_start : array_like, optional
        Starting state (default: maximally mixed).  Any full-rank state
        converges to the same maximizer; rank-deficient starts are not
        repaired by the ascent, so prefer strictly positive ones.
    on_iteration : callable, optional
        Called as ``on_iteration(iteration, log_likelihood)`` after every
        accepted update (likelihoods are per unit weight, nondecreasing).

    Returns
    -------
    ReconstructionResult
        ``log_likelihood`` is reported on the scale of the input
        frequencies.
    """
    c = np.asarray(frequencies, dtype=float)
    if c.shape != (36,):
        raise ValueError(f"frequencies must have shape (36,), got {c.shape}")
    if np.any(c < 0):
        raise ValueError("frequencies must be nonnegative")
    total = c.sum()
    if total <= 0.0:
        raise ValueError("frequencies must not be all zero")
    c = c / total  # likelihood maximizer is scale invariant; normalize once

    if rho_start is None:
        rho = np.eye(4, dtype=complex) / 4.0
    else:
        rho = validate_density_matrix(rho_start, name="rho_start").astype(complex)
    pflat = settings.projectors_flat
    if numba is not None and on_iteration is None:
        rho, ll, iterations, converged = _fixed_point_jit(
            pflat, c, rho, tol_rho, tol_ll, max_iterations)
    else:
        rho, ll, iterations, converged = _fixed_point_numpy(
            pflat, c, rho, tol_rho, tol_ll, max_iterations, on_iteration)
    rho = (rho + rho.conj().T) / 2.0
    rho /= np.trace(rho).real
    return ReconstructionResult(rho=rho, log_likelihood=ll * total,
                                iterations=iterations, converged=converged)


def fit_kappa(frequencies, settings: TomographySettings, rho_b: np.ndarray) -> float:
    """White-noise weight maximizing the likelihood within the mixture family.

    Maximizes sum_k c_k log[(1 - kappa) B_k + kappa / 4] over
    kappa in [0, 1], where B_k are the Born probabilities of ``rho_b``;
    bracketed golden-section search to 1e-10.
    """
    c = np.asarray(frequencies, dtype=float)
    if c.shape != (36,):
        raise ValueError(f"frequencies must have shape (36,), got {c.shape}")
    if np.any(c < 0):
        raise ValueError("frequencies must be nonnegative")
    if c.sum() <= 0.0:
        raise ValueError("frequencies must not be all zero")
    rho_b = validate_density_matrix(rho_b, name="rho_b")
    born = settings.born_probabilities(rho_b)

    def objective(kappa):
        model = (1.0 - kappa) * born + kappa / 4.0
        return _log_likelihood(c, model)

    kappa = golden_section_max(objective, 0.0, 1.0, tol=1e-10)
    return float(min(max(kappa, 0.0), 1.0))


def coincidence_rate_from_counts(ds: TomographyDataset) -> float:
    """Coincidences per window from the 9 complementary quadruple sums.

    The four complementary projections of each of the 9 tomographic
    bases each sum (in expectation) to the total coincidence count, so
    the 9 quadruple sums are averaged and divided by the number of
    windows T / tau.
    """
    sums = np.zeros(9)
    np.add.at(sums, ds.settings.group_index, ds.counts.astype(float))
    n_c = sums.mean()
    return float(n_c / ds.n_windows)


def _metrics_from_counts(counts, ds: TomographyDataset, rho_start,
                         mle_kwargs: dict) -> tuple[float, float, float, float]:
    result = mle_reconstruct(counts, ds.settings, rho_start=rho_start, **mle_kwargs)
    s = metrics.chsh_max(result.rho)
    q = metrics.qber_min(result.rho)
    r_dw = metrics.devetak_winter(s, q)
    resampled = TomographyDataset(settings=ds.settings, counts=np.asarray(counts, dtype=np.int64),
                                  tau_s=ds.tau_s, duration_s=ds.duration_s)
    r_c = coincidence_rate_from_counts(resampled)
    return s, q, r_dw, metrics.key_rate(r_dw, r_c)


def monte_carlo_uncertainty(ds: TomographyDataset, samples: int, seed: int,
                            **mle_kwargs) -> UncertaintyReport:
    """Poisson-resampling uncertainty of S, Q, r_DW and R_key.

    Every count is resampled as Poisson with the observed count as its
    mean (zero counts stay zero), the reconstruction and rate extraction
    are rerun, and sample means and standard deviations (ddof=1) are
    reported.  The output is fully determined by (dataset, samples,
    seed); per-sample generators are spawned from the master seed, so a
    parallel execution would reproduce the same report.

    Reconstructions start from the base dataset's estimate softened with
    a small admixture of the maximally mixed state; any full-rank start
    reaches the same maximizer, this one just reaches it sooner.
    """
    if samples < 2:
        raise ValueError(f"need at least 2 Monte-Carlo samples, got {samples}")
    streams = np.random.SeedSequence(seed).spawn(samples)
    values = np.empty((samples, 4))
    base = ds.counts.astype(float)
    base_fit = mle_reconstruct(base, ds.settings, **mle_kwargs)
    warm_start = 0.99 * base_fit.rho + 0.01 * np.eye(4, dtype=complex) / 4.0
    for i, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        resampled = rng.poisson(base)
        values[i] = _metrics_from_counts(resampled, ds, warm_start, mle_kwargs)
    means = values.mean(axis=0)
    stds = values.std(axis=0, ddof=1)
    return UncertaintyReport(
        s_mean=float(means[0]), s_std=float(stds[0]),
        q_mean=float(means[1]), q_std=float(stds[1]),
        r_dw_mean=float(means[2]), r_dw_std=float(stds[2]),
        r_key_mean=float(means[3]), r_key_std=float(stds[3]),
        samples=samples, seed=seed)
