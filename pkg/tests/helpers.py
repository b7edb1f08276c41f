"""Shared random-sample generators for the test suite."""

import numpy as np

from harnackflow.symfun import WeingartenSample


def random_kappa(rng, n, lo=0.2, hi=5.0):
    return rng.uniform(lo, hi, size=n)


def random_spd(rng, n, jitter=0.3):
    """SPD metric close to the identity (keeps eigenproblems well conditioned)."""
    B = rng.normal(scale=jitter, size=(n, n))
    return np.eye(n) + B @ B.T


def random_sample(rng, n, lo=0.2, hi=5.0):
    """WeingartenSample with prescribed random eigenvalues in [lo, hi]."""
    g = random_spd(rng, n)
    kappa = random_kappa(rng, n, lo, hi)
    # build W g-self-adjoint with these eigenvalues: W = P diag(kappa) P^-1
    # where the columns of P are g-orthonormal
    B = rng.normal(size=(n, n))
    Q, _ = np.linalg.qr(B)
    L = np.linalg.cholesky(g)
    P = np.linalg.solve(L.T, Q)  # P^T g P = I
    W = P @ np.diag(kappa) @ np.linalg.inv(P)
    return WeingartenSample(g, W)


def random_structured_wdot(rng, sample):
    """Wdot = A W with A self-adjoint in the h = g W metric.

    Constructed in the h-orthonormal eigenbasis, where A is just a symmetric
    matrix, then pushed to the original coordinates.
    """
    n = sample.n
    S = rng.normal(size=(n, n))
    S = 0.5 * (S + S.T)
    kappa = sample.kappa
    # scale the g-orthonormal eigenbasis to the h-orthonormal one
    E = sample.P / np.sqrt(kappa)[None, :]
    Einv = np.linalg.inv(E)
    A = E @ S @ Einv
    return A @ sample.W
