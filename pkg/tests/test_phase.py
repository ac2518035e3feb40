import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import jordanlattice as jl
from jordanlattice.errors import DegenerateSpectrumError, DomainError
from jordanlattice.phase import ghost_restriction, reduced_hermitize
from oracles import dense_operator, mp_real_count, multiset_distance, projector_by_eigendecomposition

# real counts at t = -0.1 for all 32 words of length 5, index order; computed
# with 60-digit mpmath eigenvalues of the entrywise-built matrix
N10_BEFORE = [0, 2, 0, 2, 0, 2, 0, 6, 0, 2, 0, 2, 0, 2, 0, 6, 0, 2, 0, 6, 0, 2, 0, 2, 0, 6, 0, 2, 0, 6, 0, 10]

ghosty = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.text(alphabet="oe", min_size=n // 2, max_size=n // 2),
        st.sampled_from([-0.4, -0.25, -0.1, -0.05, 0.05, 0.2]),
    )
)


class TestPhaseTable:
    def test_n10_full_table(self):
        rows = jl.classify_all_words(10, 0.1)
        assert [r.index for r in rows] == list(range(32))
        assert [r.n_real_before for r in rows] == N10_BEFORE
        assert all(r.n_real_after == 10 and r.t0 == 0.1 for r in rows)

    def test_n10_spot_checks_against_extended_precision(self):
        for idx in (1, 7, 17, 19, 23, 31):
            w = jl.word_from_index(5, idx)
            assert mp_real_count(dense_operator(10, str(w), -0.1)) == N10_BEFORE[idx]

    def test_n2(self):
        rows = jl.classify_all_words(2, 0.1)
        assert [(str(r.word), r.n_real_before, r.n_real_after) for r in rows] == [("o", 0, 2), ("e", 2, 2)]

    @pytest.mark.parametrize("n, t0", [(5, 0.01), (8, 0.3), (11, 0.9)])
    def test_after_column_is_n(self, n, t0):
        assert all(r.n_real_after == n for r in jl.classify_all_words(n, t0))

    def test_threads_same_order(self):
        assert jl.classify_all_words(10, 0.1, threads=4) == jl.classify_all_words(10, 0.1)

    @pytest.mark.parametrize("n, t0", [(10, 0.0), (10, 1.0), (10, -0.1), (1, 0.1), (2.5, 0.1)])
    def test_rejects(self, n, t0):
        with pytest.raises(DomainError):
            jl.classify_all_words(n, t0)


class TestDefectiveness:
    @pytest.mark.parametrize("n", [2, 3, 7, 10])
    def test_jordan(self, n):
        c = jl.defectiveness(jl.build_operator(n, "o" * (n // 2), 0.0))
        assert (c.algebraic_multiplicity, c.geometric_multiplicity, c.rank) == (n, 1, n - 1)
        assert c.t == 0.0 and c.z == 0

    def test_zero_not_an_eigenvalue(self):
        c = jl.defectiveness(jl.build_operator(10, "ooooe", 0.1))
        assert (c.algebraic_multiplicity, c.geometric_multiplicity, c.rank) == (0, 0, 10)

    def test_n3_simple_zero(self):
        c = jl.defectiveness(jl.build_operator(3, "o", 0.1))
        assert (c.algebraic_multiplicity, c.geometric_multiplicity, c.rank) == (1, 1, 2)

    def test_nonzero_probe(self):
        z = 2 * np.sqrt(0.09) * np.cos(np.pi / 11)
        c = jl.defectiveness(jl.build_operator(10, "eeeee", 0.1), z)
        assert (c.algebraic_multiplicity, c.geometric_multiplicity) == (1, 1)


class TestProjector:
    def test_all_real(self):
        q = jl.build_operator(2, "e", -0.1)
        rm = jl.real_subspace_projector(q)
        assert rm.reduced_dim == 2
        assert np.allclose(rm.projector, np.eye(2), atol=1e-14)
        assert multiset_distance(np.linalg.eigvals(rm.q_reduced), [-0.3, 0.3]) <= 1e-14

    def test_no_real(self):
        rm = jl.real_subspace_projector(jl.build_operator(2, "o", -0.1))
        assert rm.reduced_dim == 0
        assert rm.q_reduced.shape == (0, 0) and rm.theta_reduced.shape == (0, 0)
        assert rm.metric is None
        assert np.allclose(rm.projector, 0)
        with pytest.raises(DomainError):
            reduced_hermitize(rm)

    def test_ooooe(self):
        q = jl.build_operator(10, "ooooe", -0.1)
        rm = jl.real_subspace_projector(q)
        cls = jl.classify(jl.eigenvalues(q))
        assert rm.reduced_dim == 2
        assert np.allclose(np.sort(np.linalg.eigvals(rm.q_reduced).real), cls.real_eigenvalues, atol=1e-8)
        assert np.allclose(rm.basis.conj().T @ rm.basis, np.eye(2), atol=1e-14)
        assert rm.metric.positive_definite

    def test_matches_eigendecomposition_oracle(self):
        q = jl.build_operator(10, "ooeee", -0.1)
        rm = jl.real_subspace_projector(q)
        ref, real, ghosts = projector_by_eigendecomposition(q.entries)
        assert np.linalg.norm(rm.projector - ref) <= 1e-8 * np.linalg.norm(ref)
        assert multiset_distance(rm.real_eigenvalues, real) <= 1e-10
        assert multiset_distance(rm.ghost_eigenvalues, ghosts) <= 1e-10

    def test_classification_mismatch(self):
        q = jl.build_operator(10, "ooooe", -0.1)
        other = jl.classify(jl.eigenvalues(jl.build_operator(10, "ooooe", 0.1)))
        with pytest.raises(DomainError):
            jl.real_subspace_projector(q, other)

    def test_defective_fails(self):
        with pytest.raises(DegenerateSpectrumError):
            jl.real_subspace_projector(jl.build_operator(6, "ooo", 0.0))

    def test_reproducible_basis(self):
        q = jl.build_operator(10, "ooeee", -0.1)
        a, b = jl.real_subspace_projector(q), jl.real_subspace_projector(q)
        assert np.array_equal(a.basis, b.basis) and np.array_equal(a.q_reduced, b.q_reduced)


@settings(max_examples=80, deadline=None)
@given(ghosty)
def test_projector_identities(inst):
    n, w, t = inst
    q = jl.build_operator(n, w, t)
    cls = jl.classify(jl.eigenvalues(q))
    rm = jl.real_subspace_projector(q, cls)
    p, a = rm.projector, q.entries
    pn = max(np.linalg.norm(p, 2), 1.0)
    assert np.linalg.norm(p @ p - p, 2) <= 1e-9 * pn**2
    assert np.linalg.norm(a @ p - p @ a, 2) <= 1e-9 * pn * np.linalg.norm(a, 2)
    assert abs(np.trace(p).real - cls.n_real) <= 1e-8
    assert (n - cls.n_real) % 2 == 0
    # complement: Q on range(I - P) carries exactly the ghosts
    ghosts = np.linalg.eigvals(ghost_restriction(q, rm))
    expected = jl.eigenvalues(q).eigenvalues[~cls.real_mask]
    assert multiset_distance(ghosts, expected) <= 1e-8


class TestReducedHermitize:
    def test_ooooe(self):
        q = jl.build_operator(10, "ooooe", -0.1)
        rm = jl.real_subspace_projector(q)
        h = reduced_hermitize(rm)
        assert h.q_image.shape == (2, 2)
        assert h.hermiticity_residual <= 1e-12
        assert np.allclose(np.linalg.eigvalsh(h.q_image), rm.real_eigenvalues, atol=1e-8)

    def test_scalar(self):
        q = jl.build_operator(3, "o", -0.1)
        rm = jl.real_subspace_projector(q)
        assert rm.reduced_dim == 1
        h = reduced_hermitize(rm)
        assert h.q_image.shape == (1, 1)
        assert h.q_image[0, 0] == pytest.approx(rm.real_eigenvalues[0], abs=1e-14)

    @pytest.mark.parametrize("method", ["sqrt", "cholesky"])
    def test_ooeee(self, method):
        rm = jl.real_subspace_projector(jl.build_operator(10, "ooeee", -0.1))
        h = reduced_hermitize(rm, method)
        assert h.q_image.shape == (6, 6)
        assert h.hermiticity_residual <= 1e-8 * np.linalg.norm(h.q_image)
        assert h.isospectral_residual <= 1e-8
        assert rm.metric.residual <= 1e-10 * np.linalg.norm(rm.theta_reduced)
