import numpy as np
import pytest
from hypothesis import given, strategies as st

from hymkit.geometry import (Form11, Point3, adjoint_wrt, check_hermitian,
                             check_positive_definite, fd_derivative,
                             fd_mixed_second, inner, lambda_contract)


def rand_metric(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a.conj().T @ a + 0.5 * np.eye(n)


class TestLambdaContract:
    def test_single_diagonal_coefficient(self):
        # phi = i dx ^ dxbar on C^1
        c = np.zeros((1, 1), dtype=complex)
        c[0, 0] = 1.0
        assert lambda_contract(Form11(c)) == pytest.approx(2.0)

    def test_off_diagonal_contracts_to_zero(self):
        c = np.zeros((2, 2), dtype=complex)
        c[0, 1] = 1.0  # i dx ^ dybar
        assert lambda_contract(Form11(c)) == pytest.approx(0.0)

    def test_scalar_anchor_half_laplacian(self):
        # u = |x|^2 on C^3: i ddbar u has coefficient matrix diag(1, 0, 0),
        # so Lambda = 2 = (Delta u) / 2 with Delta u = 4
        c = np.diag([1.0, 0.0, 0.0]).astype(complex)
        assert lambda_contract(Form11(c)) == pytest.approx(2.0)

    def test_polynomial_anchor_with_analytic_coefficients(self):
        # u = a|x|^2 + b|y|^2 + c|z|^2 + 2 Re(d x ybar)
        rng = np.random.default_rng(3)
        a, b, c = rng.random(3) + 0.5
        d = complex(*rng.standard_normal(2))
        coeff = np.array([[a, d, 0], [np.conj(d), b, 0], [0, 0, c]],
                         dtype=complex)
        lap_over_2 = 2.0 * (a + b + c)
        assert lambda_contract(Form11(coeff)) == pytest.approx(lap_over_2, abs=1e-8)

    def test_linearity(self, rng):
        c1 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        c2 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        lhs = lambda_contract(Form11(2.0 * c1 + 3.0 * c2))
        assert lhs == pytest.approx(2 * lambda_contract(Form11(c1))
                                    + 3 * lambda_contract(Form11(c2)))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Form11(np.zeros((2, 3)))

    def test_endomorphism_valued(self, rng):
        c = rng.standard_normal((2, 2, 3, 3)) * (1 + 0j)
        out = lambda_contract(Form11(c))
        assert out.shape == (3, 3)
        np.testing.assert_allclose(out, 2.0 * (c[0, 0] + c[1, 1]))

    def test_hermitian_predicate(self):
        c = np.zeros((2, 2, 2, 2), dtype=complex)
        c[0, 1] = np.array([[1.0, 2j], [0.5, 1.0]])
        c[1, 0] = c[0, 1].conj().T
        c[0, 0] = np.eye(2)
        c[1, 1] = np.eye(2)
        assert Form11(c).is_hermitian()
        c[1, 0] = 2 * c[1, 0]
        assert not Form11(c).is_hermitian()


class TestAdjoint:
    def test_identity_with_identity_metrics(self):
        m = np.eye(3, dtype=complex)
        np.testing.assert_allclose(adjoint_wrt(m, np.eye(3), np.eye(3)), m)

    def test_printed_alpha_row(self):
        # alpha(1,0,0) of the main family with its diagonal weight
        alpha = np.array([[1.0], [0.0], [1.0], [0.0]], dtype=complex)
        h1 = np.diag([2**-0.5, 2**-0.5, 1.0, 1.0]).astype(complex)
        h0 = np.eye(1, dtype=complex)
        adag = adjoint_wrt(alpha, h0, h1)
        np.testing.assert_allclose(adag, [[2**-0.5, 0.0, 1.0, 0.0]], atol=1e-14)

    def test_printed_beta_column(self):
        beta = np.array([[0.0, 1.0, 0.0, 0.0]], dtype=complex)
        h1 = np.diag([2**-0.5, 2**-0.5, 1.0, 1.0]).astype(complex)
        h2 = np.eye(1, dtype=complex)
        bdag = adjoint_wrt(beta, h1, h2)
        np.testing.assert_allclose(bdag.ravel(), [0.0, 2**0.5, 0.0, 0.0], atol=1e-14)

    @given(seed=st.integers(0, 10**6))
    def test_adjoint_identity_random(self, seed):
        rng = np.random.default_rng(seed)
        k, m = rng.integers(1, 5, size=2)
        mat = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
        h_src, h_dst = rand_metric(rng, k), rand_metric(rng, m)
        mdag = adjoint_wrt(mat, h_src, h_dst)
        u = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        lhs = inner(mat @ u, v, h_dst)
        rhs = inner(u, mdag @ v, h_src)
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-10 * scale

    def test_singular_metric_raises(self):
        with pytest.raises(np.linalg.LinAlgError):
            adjoint_wrt(np.eye(2), np.zeros((2, 2)), np.eye(2))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            adjoint_wrt(np.eye(2), np.eye(3), np.eye(2))


class TestFiniteDifferences:
    def test_linear_holomorphic_exact(self):
        f = lambda w: w[0]
        assert fd_derivative(f, [0.3 + 0.2j, 0.0, 0.0], 0, "holo") == \
            pytest.approx(1.0, abs=1e-10)
        assert fd_derivative(f, [0.3 + 0.2j, 0.0, 0.0], 0, "anti") == \
            pytest.approx(0.0, abs=1e-10)

    def test_absolute_square(self):
        f = lambda w: abs(w[0]) ** 2
        val = fd_derivative(f, [1 + 1j, 0, 0], 0, "holo")
        assert val == pytest.approx(1 - 1j, abs=1e-6)

    def test_second_order_convergence(self):
        # smooth non-polynomial field with known Wirtinger derivative
        def f(w):
            return np.exp(w[0]) * np.conj(w[0]) ** 2

        p = np.array([0.4 + 0.3j, 0, 0])
        exact = np.exp(p[0]) * np.conj(p[0]) ** 2
        hs = np.array([1e-2, 5e-3, 2.5e-3])
        errs = [abs(fd_derivative(f, p, 0, "holo", h) - exact) for h in hs]
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.2)

    def test_mixed_second_derivative(self):
        # f = |x|^2 |y|^2: d_x dbar_y f = xbar y... check against analytic
        def f(w):
            return abs(w[0]) ** 2 * abs(w[1]) ** 2

        p = np.array([1.0 + 0.5j, 0.7 - 0.2j, 0.0])
        val = fd_mixed_second(f, p, 0, 1, h=1e-3)
        exact = np.conj(p[0]) * p[1]
        assert abs(val - exact) < 1e-6
        same = fd_mixed_second(f, p, 0, 0, h=1e-3)
        assert abs(same - abs(p[1]) ** 2) < 1e-6

    def test_bad_step_rejected(self):
        with pytest.raises(ValueError):
            fd_derivative(lambda w: w[0], [0, 0, 0], 0, "holo", h=0.0)
        with pytest.raises(ValueError):
            fd_derivative(lambda w: w[0], [0, 0, 0], 0, "sideways")


class TestPoint3:
    def test_norms(self):
        p = Point3(3 + 4j, 0, 1j)
        assert p.norm_sq == pytest.approx(26.0)
        assert p.norm == pytest.approx(np.sqrt(26.0))

    def test_norm_equals_six_real_squares(self, rng):
        vals = rng.standard_normal(6)
        p = Point3(complex(vals[0], vals[1]), complex(vals[2], vals[3]),
                   complex(vals[4], vals[5]))
        assert p.norm_sq == pytest.approx(np.sum(vals**2))

    def test_as_array_c2(self):
        p = Point3(1.0, 2.0)
        np.testing.assert_allclose(p.as_array(2), [1.0, 2.0])


def test_positive_definite_checks(rng):
    h = rand_metric(rng, 3)
    assert check_hermitian(h)
    assert check_positive_definite(h)
    assert not check_positive_definite(-h)
    assert not check_positive_definite(np.array([[1.0, 2.0], [0.0, 1.0]]))
