import numpy as np
import pytest

from invgame.errors import DimensionError
from invgame.model.packing import outer_quad_pack, packed_size, smat_pack, smat_unpack, state_quad_pack, unvec, vec


def test_identity_packs_to_diagonal_ones():
    np.testing.assert_array_equal(smat_pack(np.eye(2)), [1.0, 0.0, 1.0])


def test_off_diagonal_entries_are_doubled():
    np.testing.assert_array_equal(smat_pack([[1.0, 2.0], [2.0, 3.0]]), [1.0, 4.0, 3.0])


def test_unpack_inverts_pack():
    rng = np.random.default_rng(3)
    for n in (1, 2, 3, 5):
        M = rng.standard_normal((n, n))
        M = M + M.T
        np.testing.assert_array_equal(smat_unpack(smat_pack(M)), M)


def test_pack_rejects_asymmetric_matrix():
    with pytest.raises(ValueError):
        smat_pack([[1.0, 2.0], [0.0, 1.0]])


def test_unpack_rejects_non_triangular_length():
    with pytest.raises(DimensionError):
        smat_unpack(np.ones(4))


@pytest.mark.parametrize("x, expected", [((1.0, 0.0), (1.0, 0.0, 0.0)), ((2.0, 3.0), (4.0, 6.0, 9.0))])
def test_state_quad_pack(x, expected):
    np.testing.assert_array_equal(state_quad_pack(x), expected)


def test_packed_quadratic_form_matches_direct_form():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        x = rng.standard_normal(n)
        P = rng.standard_normal((n, n))
        P = P + P.T
        assert state_quad_pack(x) @ smat_pack(P) == pytest.approx(x @ P @ x, rel=1e-12, abs=1e-12)


def test_outer_pack_matches_state_pack_of_rank_one_product():
    x = np.array([1.5, -2.0, 0.25])
    np.testing.assert_allclose(outer_quad_pack(np.outer(x, x)), state_quad_pack(x))
    assert packed_size(3) == 3 * 4 // 2


def test_kronecker_vec_identity():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, c = rng.standard_normal(3), rng.standard_normal(2)
        M = rng.standard_normal((3, 2))
        assert np.kron(c, a) @ vec(M) == pytest.approx(a @ M @ c, abs=1e-12)
    np.testing.assert_array_equal(unvec(vec(M), 3, 2), M)
