import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import jordanlattice as jl
from jordanlattice.errors import ClassificationError, DomainError
from jordanlattice.model import from_tridiagonal
from jordanlattice.spectral import Spectrum, balanced_tridiagonal, coupling_products
from oracles import (
    closed_form,
    mp_charpoly,
    mp_eigenvalues,
    mp_real_count,
    multiset_distance,
    sigma_min_dense,
)

instances = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.text(alphabet="oe", min_size=n // 2, max_size=n // 2),
        st.floats(-0.5, 0.5, allow_nan=False).filter(lambda t: abs(t) > 1e-3),
    )
)


class TestEigenvalues:
    def test_n2_positive(self):
        ev = jl.eigenvalues(jl.build_operator(2, "o", 0.1)).eigenvalues
        assert np.allclose(ev, [-0.3, 0.3], atol=1e-15)

    def test_n2_negative(self):
        ev = jl.eigenvalues(jl.build_operator(2, "o", -0.1)).eigenvalues
        b = math.sqrt(0.11)
        assert np.allclose(ev, [-1j * b, 1j * b], atol=1e-15)
        assert b == pytest.approx(0.33166247903554)

    @pytest.mark.parametrize("n", [2, 5, 10, 30])
    def test_t0_all_zero(self, n):
        assert np.all(jl.eigenvalues(jl.build_operator(n, "o" * (n // 2), 0.0)).eigenvalues == 0)

    def test_n10_closed_form(self):
        ev = jl.eigenvalues(jl.build_operator(10, "eoooe", 0.1)).eigenvalues
        k = np.arange(1, 11)
        ref = np.sort(2 * math.sqrt(0.09) * np.cos(k * np.pi / 11))
        assert np.max(np.abs(ev - ref)) <= 1e-12

    @pytest.mark.parametrize("word", ["ooooe", "ooeee", "eoooe", "eooee"])
    def test_matches_extended_precision(self, word):
        q = jl.build_operator(10, word, -0.1)
        ours = jl.eigenvalues(q).eigenvalues
        ref = np.array(mp_eigenvalues(q.entries))
        for z in ref:
            assert np.min(np.abs(ours - z)) <= 1e-10

    @pytest.mark.parametrize("n", [10, 50, 100])
    @pytest.mark.parametrize("t", [-0.4, -0.1, -0.01, 0.3])
    def test_backward_error(self, n, t):
        rng = np.random.default_rng(n)
        word = "".join(rng.choice(["o", "e"], size=n // 2))
        q = jl.build_operator(n, word, t)
        scale = np.linalg.norm(q.entries, 2)
        for z in jl.eigenvalues(q).eigenvalues:
            assert sigma_min_dense(q.entries, z) <= 1e-10 * scale

    def test_sorted_and_scaled(self):
        s = jl.eigenvalues(jl.build_operator(10, "ooooe", -0.1))
        order = np.lexsort((s.eigenvalues.imag, s.eigenvalues.real))
        assert np.array_equal(order, np.arange(10))
        assert s.scale == pytest.approx(np.linalg.norm(jl.build_operator(10, "ooooe", -0.1).entries))

    def test_general_tridiagonal_with_mixed_signs(self):
        q = from_tridiagonal([0.5, -0.2, 0.3, 0.0], [1.0, 0.7, -0.4, 2.0])
        ev = jl.eigenvalues(q).eigenvalues
        ref = np.linalg.eigvals(q.entries)
        for z in ref:
            assert np.min(np.abs(ev - z)) <= 1e-12

    def test_balanced_form_is_similar(self):
        q = jl.build_operator(8, "oeeo", -0.2)
        b = balanced_tridiagonal(q)
        assert multiset_distance(np.linalg.eigvals(b), np.linalg.eigvals(q.entries)) <= 1e-12
        assert np.allclose(coupling_products(q), q.sub * q.sup)


@settings(max_examples=80, deadline=None)
@given(instances)
def test_spectrum_symmetries(inst):
    n, w, t = inst
    q = jl.build_operator(n, w, t)
    ev = jl.eigenvalues(q).eigenvalues
    tol = 1e-9 * max(np.linalg.norm(q.entries), 1.0)
    # conjugation closure, zero sum, q -> -q
    assert multiset_distance(ev, ev.conj()) <= tol
    assert abs(ev.sum()) <= tol
    assert multiset_distance(ev, -ev) <= tol


@settings(max_examples=80, deadline=None)
@given(instances)
def test_char_poly_vanishes_on_spectrum(inst):
    n, w, t = inst
    q = jl.build_operator(n, w, t)
    bound = 1e-8 * max(1.0, np.linalg.norm(q.entries) ** n)
    for z in jl.eigenvalues(q).eigenvalues:
        assert abs(jl.char_poly_at(q, z)) <= bound


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.floats(0.001, 0.999), st.data())
def test_word_independence_positive_t(n, t, data):
    w1 = data.draw(st.text(alphabet="oe", min_size=n // 2, max_size=n // 2))
    w2 = data.draw(st.text(alphabet="oe", min_size=n // 2, max_size=n // 2))
    a = jl.eigenvalues(jl.build_operator(n, w1, t)).eigenvalues
    b = jl.eigenvalues(jl.build_operator(n, w2, t)).eigenvalues
    assert np.max(np.abs(a - b)) <= 1e-12
    assert np.max(np.abs(a.real - closed_form(n, t))) <= 1e-10


class TestCharPoly:
    def test_examples(self):
        assert abs(jl.char_poly_at(jl.build_operator(2, "o", 0.1), 0.3)) <= 1e-15
        assert jl.char_poly_at(jl.build_operator(3, "o", 0.1), 1.0) == pytest.approx(0.82, abs=1e-15)
        z = 0.3 - 0.7j
        assert jl.char_poly_at(jl.build_operator(7, "ooe", 0.0), z) == pytest.approx(z**7, rel=1e-14)

    @pytest.mark.parametrize("z", [0.5, 0.2 + 0.3j, -1.1j, 1.4])
    def test_matches_determinant(self, z):
        q = jl.build_operator(9, "oeoe", -0.15)
        assert jl.char_poly_at(q, z) == pytest.approx(mp_charpoly(q.entries, z), rel=1e-12, abs=1e-15)


class TestClassify:
    @pytest.mark.parametrize(
        "word, t, n_real",
        [("ooooe", 0.1, 10), ("ooooe", -0.1, 2), ("ooooo", -0.1, 0), ("ooeee", -0.1, 6),
         ("eoooe", -0.1, 2), ("eoeee", -0.1, 2), ("eeeee", -0.1, 10), ("eooee", -0.1, 6)],
    )
    def test_counts(self, word, t, n_real):
        q = jl.build_operator(10, word, t)
        cls = jl.classify(jl.eigenvalues(q))
        assert cls.n_real == n_real == mp_real_count(q.entries)
        assert cls.n_ghost == 10 - n_real
        assert len(cls.ghost_pairs) == cls.n_ghost // 2
        assert all(z.imag > 0 for z in cls.ghost_pairs)
        assert cls.real_mask.sum() == n_real

    def test_tolerance(self):
        s = jl.eigenvalues(jl.build_operator(10, "ooooe", -0.1))
        cls = jl.classify(s, 1e-9, 1e-12)
        assert cls.tolerance_used == pytest.approx(1e-9 + 1e-12 * s.scale)
        assert jl.classify(s, 1e-9, 0.0, scale=5.0).tolerance_used == 1e-9

    def test_unpaired_fails(self):
        s = Spectrum(np.array([-1.0, 0.5j, 1.0]), 1.0)
        with pytest.raises(ClassificationError):
            jl.classify(s)

    def test_mismatched_pair_fails(self):
        s = Spectrum(np.array([0.1 + 0.5j, 0.3 - 0.5j]), 1.0)
        with pytest.raises(ClassificationError):
            jl.classify(s)

    def test_bad_tolerances(self):
        s = Spectrum(np.array([0.0]), 1.0)
        with pytest.raises(DomainError):
            jl.classify(s, 0.0)
        with pytest.raises(DomainError):
            jl.classify(s, 1e-9, -1.0)


class TestSweep:
    grid = np.linspace(-0.2, 0.2, 41)

    def test_n2_odd(self):
        sr = jl.sweep(2, "o", self.grid)
        t = sr.t_grid
        assert np.all(sr.real_count_per_t[t < 0] == 0)
        assert np.all(sr.real_count_per_t[t > 0] == 2)
        assert sr.defective.sum() == 1 and sr.real_count_per_t[sr.defective][0] == 2

    def test_n2_even(self):
        sr = jl.sweep(2, "e", self.grid)
        assert np.all(sr.real_count_per_t == 2)

    def test_n10_counts(self):
        sr = jl.sweep(10, "ooooe", np.linspace(-0.2, 0.2, 401))
        t = sr.t_grid
        assert np.all(sr.real_count_per_t[t < 0] == 2)
        assert np.all(sr.real_count_per_t[t >= 0] == 10)
        assert sr.trajectories.shape == (10, 401)

    def test_trajectories_continuous(self):
        sr = jl.sweep(10, "ooooe", np.linspace(0.01, 0.2, 200))
        jumps = np.abs(np.diff(sr.trajectories, axis=1))
        assert jumps.max() < 0.02
        # each path keeps its place in the closed-form ordering
        assert np.all(np.diff(sr.trajectories.real, axis=0) > 0)

    def test_low_confidence(self):
        sr = jl.sweep(4, "oe", np.array([-1e-3, -1e-7, 0.0, 1e-8, 1e-2]))
        assert list(sr.low_confidence) == [False, True, False, True, False]

    def test_threads_identical(self):
        grid = np.linspace(-0.3, 0.3, 101)
        a = jl.sweep(10, "eooee", grid)
        b = jl.sweep(10, "eooee", grid, threads=4)
        assert np.array_equal(a.trajectories, b.trajectories)
        assert np.array_equal(a.real_count_per_t, b.real_count_per_t)

    @pytest.mark.parametrize("grid", [[0.1], [0.1, 0.1], [0.2, 0.1], [[0.1, 0.2]]])
    def test_rejects_bad_grid(self, grid):
        with pytest.raises(DomainError):
            jl.sweep(4, "oe", grid)


class TestUnfolding:
    grid = np.geomspace(1e-4, 1e-2, 41)

    def test_n2(self):
        fit = jl.unfolding_fit(jl.sweep(2, "o", self.grid))
        assert fit.exponent == pytest.approx(0.5, abs=0.01)
        assert all(c == pytest.approx(1.0, abs=0.01) for c in fit.coefficients.values())

    def test_n3(self):
        fit = jl.unfolding_fit(jl.sweep(3, "o", self.grid))
        # the middle trajectory is identically zero and is left out
        assert len(fit.coefficients) == 2
        assert max(fit.coefficients.values()) == pytest.approx(math.sqrt(2), abs=0.02)

    def test_n10_subset(self):
        fit = jl.unfolding_fit(jl.sweep(10, "ooeee", self.grid), trajectory_ids={0, 9})
        assert sorted(fit.slopes) == [0, 9]
        assert fit.exponent == pytest.approx(0.5, abs=0.02)
        assert fit.fit_window == (1e-4, 1e-2)
        assert fit.residual < 0.01

    def test_rejects_nonpositive_window(self):
        sr = jl.sweep(2, "o", np.linspace(-0.01, 0.01, 21))
        with pytest.raises(DomainError):
            jl.unfolding_fit(sr, window=(-1e-3, 1e-2))

    def test_rejects_complex_trajectory(self):
        sr = jl.sweep(2, "o", -self.grid[::-1])
        with pytest.raises(DomainError):
            jl.unfolding_fit(sr, trajectory_ids={0}, window=(1e-4, 1e-2))
