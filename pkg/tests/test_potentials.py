"""Spring potential, Maxwellian, quadrature, and certification tests.

Oracle values are closed forms for b=4: Z = 32/15 in d=1 and 4*pi/3 in d=2,
second moment 4/7 (d=1) and 1 (d=2), and the boundary certificate constants
135/512, 15/32, 1, 4/3.
"""

import math

import numpy as np
import pytest
import scipy.integrate

from fenesim.errors import (DomainOverflow, InvalidOrder, RejectedMatrix, Singular,
                            ValidationError)
from fenesim.potentials import (build_quadrature, certify_potential, fene_potential,
                                maxwellian_normalization, partial_maxwellian,
                                rouse_matrix, spring_force, spring_model,
                                total_maxwellian, u_prime)


class TestPotentialValues:
    def test_zero_elongation(self):
        assert fene_potential(0.0, 4.0) == 0.0
        assert u_prime(0.0, 4.0) == 1.0

    def test_closed_form_b4(self):
        # s=1 means 1 - 2s/b = 1/2, so U = (b/2) log 2
        assert fene_potential(1.0, 4.0) == pytest.approx(2.0 * math.log(2.0), rel=1e-15)
        assert u_prime(1.0, 4.0) == pytest.approx(2.0, rel=1e-15)

    def test_domain_overflow(self):
        with pytest.raises(DomainOverflow):
            fene_potential(2.0, 4.0)
        with pytest.raises(DomainOverflow):
            u_prime(2.5, 4.0)
        fene_potential(1.999999, 4.0)  # strictly inside is fine

    def test_force_scalar(self):
        assert spring_force(1.0, 4.0) == pytest.approx(4.0 / 3.0, rel=1e-15)
        assert spring_force(0.0, 4.0) == 0.0
        assert spring_force(-1.0, 4.0) == pytest.approx(-4.0 / 3.0, rel=1e-15)

    def test_force_singularity(self):
        with pytest.raises(Singular):
            spring_force(2.0, 4.0)
        with pytest.raises(Singular):
            spring_force(np.array([[0.0, 2.0]]), 4.0, axis=-1)

    def test_force_vector_axis(self):
        q = np.array([1.0, 1.0])
        f = spring_force(q, 4.0, axis=-1)
        assert f == pytest.approx(q / (1.0 - 2.0 / 4.0), rel=1e-15)

    def test_force_is_potential_gradient(self):
        qs = np.linspace(-1.5, 1.5, 11)
        h = 1e-6
        num = (fene_potential((qs + h) ** 2 / 2, 4.0)
               - fene_potential((qs - h) ** 2 / 2, 4.0)) / (2 * h)
        assert np.allclose(num, spring_force(qs, 4.0), rtol=1e-8, atol=1e-8)


class TestMaxwellian:
    def test_normalization_d1_b4(self):
        assert maxwellian_normalization(4.0, 1) == pytest.approx(32.0 / 15.0, rel=1e-14)

    def test_normalization_d2_b4(self):
        assert maxwellian_normalization(4.0, 2) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-13)

    def test_partial_maxwellian_normalized(self):
        val, err = scipy.integrate.quad(lambda q: partial_maxwellian(q, 4.0, 1), -2.0, 2.0)
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_vanishes_outside_ball(self):
        assert partial_maxwellian(2.0, 4.0, 1) == 0.0
        assert partial_maxwellian(5.0, 4.0, 1) == 0.0

    def test_total_maxwellian_product(self):
        model = spring_model(K=2, b=(4.0, 6.0))
        qs = np.array([0.5, 1.0])
        expect = partial_maxwellian(0.5, 4.0) * partial_maxwellian(1.0, 6.0)
        assert total_maxwellian(qs, model) == pytest.approx(expect, rel=1e-15)


class TestRouseMatrix:
    def test_default_k1(self):
        assert rouse_matrix(1).tolist() == [[2.0]]

    def test_default_k2_eigenvalues(self):
        eigs = np.linalg.eigvalsh(rouse_matrix(2))
        assert eigs == pytest.approx([1.0, 3.0], rel=1e-14)

    def test_override_accepted(self):
        a = rouse_matrix(2, override=np.eye(2))
        assert np.array_equal(a, np.eye(2))

    def test_rejects_asymmetric(self):
        with pytest.raises(RejectedMatrix):
            rouse_matrix(2, override=np.array([[2.0, 1.0], [0.0, 2.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(RejectedMatrix):
            rouse_matrix(2, override=np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_rejects_wrong_shape(self):
        with pytest.raises(RejectedMatrix):
            rouse_matrix(2, override=np.eye(3))

    def test_rejects_nonfinite(self):
        with pytest.raises(RejectedMatrix):
            rouse_matrix(1, override=np.array([[math.nan]]))

    def test_rejects_bad_count(self):
        with pytest.raises(ValidationError):
            rouse_matrix(0)


class TestSpringModel:
    def test_scalar_b_replicated(self):
        m = spring_model(K=3, b=4.0)
        assert m.b == (4.0, 4.0, 4.0)
        assert m.theta == (2.0, 2.0, 2.0)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValidationError):
            spring_model(d=3)

    def test_rejects_nonpositive_b(self):
        with pytest.raises(ValidationError):
            spring_model(b=-1.0)
        with pytest.raises(ValidationError):
            spring_model(b=math.inf)

    def test_rejects_wrong_b_count(self):
        with pytest.raises(ValidationError):
            spring_model(K=2, b=(4.0,))


class TestQuadrature:
    def test_rejects_low_order(self):
        m = spring_model()
        for bad in (1, 0, -3):
            with pytest.raises(InvalidOrder):
                build_quadrature(m, bad)
        with pytest.raises(InvalidOrder):
            build_quadrature(m, 2.5)

    def test_mass_normalized(self, quad_b4):
        assert quad_b4.axes[0].mweights.sum() == pytest.approx(1.0, abs=1e-14)

    def test_second_moment_b4(self, quad_b4):
        ax = quad_b4.axes[0]
        m2 = np.sum(ax.mweights * ax.nodes**2)
        assert m2 == pytest.approx(4.0 / 7.0, rel=1e-13)

    def test_force_weights_equilibrium_identity(self, quad_b4):
        # sum fweights * 1 = int M U' q^2 dq = 1 by integration by parts
        assert quad_b4.axes[0].fweights.sum() == pytest.approx(1.0, abs=1e-13)

    def test_polynomial_exactness_scaling(self, model_b4):
        # int q^4 M dq must agree between a 6-node and a 64-node rule
        small = build_quadrature(model_b4, 6).axes[0]
        big = build_quadrature(model_b4, 64).axes[0]
        v1 = np.sum(small.mweights * small.nodes**4)
        v2 = np.sum(big.mweights * big.nodes**4)
        assert v1 == pytest.approx(v2, rel=1e-13)

    def test_interfaces_bracket_nodes(self, quad_b4):
        ax = quad_b4.axes[0]
        assert ax.interfaces.shape == (ax.n + 1,)
        assert np.all(ax.interfaces[:-1] < ax.nodes)
        assert np.all(ax.nodes < ax.interfaces[1:])
        assert ax.m_ifc[0] == 0.0 and ax.m_ifc[-1] == 0.0

    def test_product_shape(self):
        m = spring_model(K=2, b=(4.0, 6.0))
        q = build_quadrature(m, 12)
        assert q.shape == (12, 12)
        assert q.nq_total == 144
        assert q.mweights_nd.sum() == pytest.approx(1.0, abs=1e-13)

    def test_disk_rule_b4(self):
        m = spring_model(K=1, b=4.0, d=2)
        ax = build_quadrature(m, 16).axes[0]
        assert ax.mweights.sum() == pytest.approx(1.0, abs=1e-13)
        r2 = np.sum(ax.nodes * ax.nodes, axis=-1)
        assert np.sum(ax.mweights * r2) == pytest.approx(1.0, rel=1e-12)
        # trace of the equilibrium Kramers identity is d
        assert ax.fweights.sum() == pytest.approx(2.0, rel=1e-12)


class TestCertification:
    @pytest.mark.parametrize("b", [2.5, 4.0, 8.0])
    def test_admissible(self, b):
        cert = certify_potential(spring_model(b=b))[0]
        assert cert.passed
        assert cert.theta == b / 2.0
        assert 0.0 < cert.c1 <= cert.c2
        assert 0.0 < cert.c3 <= cert.c4
        assert math.isfinite(cert.moment_bound)

    @pytest.mark.parametrize("b", [1.5, 2.0])
    def test_inadmissible(self, b):
        cert = certify_potential(spring_model(b=b))[0]
        assert not cert.passed
        assert math.isnan(cert.c1)

    def test_constants_b4(self):
        # M/dist^2 spans [((4-dist)/4)^2/Z] over dist in (0, 1]; with Z=32/15
        # that is [135/512, 15/32], and dist*U' = 4/(4-dist) spans [1, 4/3]
        cert = certify_potential(spring_model(b=4.0))[0]
        assert cert.c1 == pytest.approx(135.0 / 512.0, rel=1e-12)
        assert cert.c2 == pytest.approx(15.0 / 32.0, rel=1e-7)
        assert cert.c3 == pytest.approx(1.0, rel=1e-7)
        assert cert.c4 == pytest.approx(4.0 / 3.0, rel=1e-12)

    def test_moment_bound_b4(self):
        # independent adaptive-quadrature oracle for int (1 + U^2) M dq
        z = 32.0 / 15.0

        def f(q):
            return (1.0 + 4.0 * np.log1p(-q * q / 4.0) ** 2) * (1 - q * q / 4.0) ** 2 / z

        oracle, _ = scipy.integrate.quad(f, -2.0, 2.0, limit=200, epsabs=1e-13)
        cert = certify_potential(spring_model(b=4.0))[0]
        assert cert.moment_bound == pytest.approx(oracle, rel=1e-6)

    def test_chain_mixed(self):
        certs = certify_potential(spring_model(K=2, b=(4.0, 1.5)))
        assert certs[0].passed and not certs[1].passed

    def test_d2(self):
        cert = certify_potential(spring_model(b=4.0, d=2))[0]
        assert cert.passed
        assert cert.c4 == pytest.approx(4.0 / 3.0, rel=1e-12)
