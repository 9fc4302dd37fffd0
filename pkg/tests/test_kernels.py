"""The compiled and pure-Python kernels must agree."""

import numpy as np
import pytest

from rssinfer import _pykernels as py
from rssinfer.beta_rank import family

from conftest import KERNELS

cy = KERNELS["cython"]
pytestmark = pytest.mark.skipif(cy is None, reason="compiled kernels not built")


def _design(rng, k, n):
    counts = rng.multinomial(n, np.full(k, 1.0 / k)).astype(float)
    labels = np.repeat(np.arange(k), counts.astype(int))
    rng.shuffle(labels)
    return counts, labels.astype(np.int64)


@pytest.mark.parametrize("k", [1, 2, 3, 7, 20])
def test_tails_and_wtilde(k):
    coef = family(k).coef
    for p in np.concatenate([[0.0, 1e-300, 1e-9, 1.0 - 1e-9, 1.0], np.linspace(0, 1, 97)]):
        a, b = py.tails(coef, p), cy.tails(coef, p)
        np.testing.assert_allclose(a[0], b[0], atol=1e-15)
        np.testing.assert_allclose(a[1], b[1], atol=1e-15)
        np.testing.assert_allclose(py.wtilde(coef, p), cy.wtilde(coef, p), rtol=1e-12)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_plateau_builders(rng, k):
    coef = family(k).coef
    for _ in range(20):
        counts, labels = _design(rng, k, int(rng.integers(1, 60)))
        np.testing.assert_allclose(py.moment_plateaus(coef, counts), cy.moment_plateaus(coef, counts), atol=1e-13)
        np.testing.assert_allclose(py.npmle_plateaus(coef, counts, labels),
                                   cy.npmle_plateaus(coef, counts, labels), atol=1e-12)
        if np.all(counts > 0):
            np.testing.assert_allclose(py.stratified_plateaus(counts, labels),
                                       cy.stratified_plateaus(counts, labels), atol=1e-15)


@pytest.mark.parametrize("k", [2, 4])
def test_sup_batches(rng, k):
    coef = family(k).coef
    counts = np.full(k, 6.0)
    n = int(counts.sum())
    base = np.repeat(np.arange(k), 6)
    xs = np.sort(rng.random((50, n)), axis=1)
    labels = np.stack([rng.permutation(base) for _ in range(50)]).astype(np.int64)
    phi = np.arange(n + 1) / n
    np.testing.assert_allclose(py.plateau_sup_batch(phi, xs), cy.plateau_sup_batch(phi, xs), atol=1e-15)
    np.testing.assert_allclose(py.npmle_sup_batch(coef, counts, labels, xs),
                               cy.npmle_sup_batch(coef, counts, labels, xs), atol=1e-12)
    np.testing.assert_allclose(py.stratified_sup_batch(counts, labels, xs),
                               cy.stratified_sup_batch(counts, labels, xs), atol=1e-15)


def test_roots():
    coef = family(3).coef
    counts = np.array([4.0, 0.0, 2.0])
    for y in (0.5, 1.0, 3.0, 5.5):
        assert py.moment_root(coef, counts, y) == pytest.approx(cy.moment_root(coef, counts, y), abs=1e-14)
    for fr in ([0.5, 0.0, 0.5], [1.0, 0.0, 0.0], [0.25, 0.0, 1.0]):
        fr = np.array(fr)
        assert py.npmle_root(coef, counts, fr) == pytest.approx(cy.npmle_root(coef, counts, fr), abs=1e-13)
