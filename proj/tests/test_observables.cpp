#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsm/observables.hpp"

#include "oracles.hpp"

using namespace dsm;

namespace {

ModelParams params(int n, double lambda, double u, double delta = 1.0) {
    ModelParams p;
    p.n_atoms = n;
    p.lambda = lambda;
    p.stark_u = u;
    p.delta = delta;
    return p;
}

}  // namespace

TEST_CASE("photon number matrix reduces to diag(k) at lambda = 0") {
    const auto p = params(3, 0.0, 0.7);
    const DcsBasis basis(3, 8);
    const auto n = photon_number_matrix(basis, p);
    for (int mi = 0; mi <= 3; ++mi) {
        for (int k = 0; k <= 8; ++k) {
            CHECK(n.mat(basis.flat(mi, k), basis.flat(mi, k)) == doctest::Approx(k));
        }
    }
    Eigen::MatrixXd off = n.mat;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ground photon number and quadrature match a deep Fock solve") {
    const auto p = params(4, 0.4, 1.0);
    const int ktr = 40;
    const auto dec = eigendecompose(build_dcs_hamiltonian(p, ktr));
    const DcsBasis basis(4, ktr);
    const auto gs = dec.vectors.col(0);
    const double n_dcs = gs.dot(photon_number_matrix(basis, p).mat * gs);
    const double x_dcs = gs.dot(quadrature_matrix(basis, p).mat * gs);

    // a†a and a + a† are untouched by the spin-frame rotation, so the unrotated
    // Fock-basis ground state gives an independent reference for both.
    const FockBasis fb(4, 200);
    const auto dfs = eigendecompose(build_dfs_hamiltonian(p, 200));
    const auto fgs = dfs.vectors.col(0);
    const double n_ref = fgs.dot(fock_photon_number(fb) * fgs);
    const double x_ref = fgs.dot(fock_quadrature(fb) * fgs);

    CHECK(n_dcs == doctest::Approx(n_ref).scale(1.0).epsilon(1e-8));
    CHECK(std::abs(x_dcs) == doctest::Approx(std::abs(x_ref)).scale(1.0).epsilon(1e-8));

    const auto gp = ground_mean_photon(p);
    CHECK(gp.per_atom == doctest::Approx(n_ref / 4.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("product-basis bridging") {
    // lambda = 0: the displaced and Fock bases coincide, the bridge is the identity
    {
        const auto p = params(2, 0.0, 0.5);
        const int ktr = 6;
        const DcsBasis basis(2, ktr);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.dimension());
        c(basis.flat(1, 3)) = 1.0;
        const auto out = dcs_to_fock_product(c, p, ktr);
        CHECK(out.captured_norm == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(out.grid(1, 3) == doctest::Approx(1.0).epsilon(1e-14));
    }

    // norms are preserved for a strongly displaced eigenstate
    {
        const auto p = params(2, 0.8, 0.5);
        const int ktr = 30;
        const auto dec = eigendecompose(build_dcs_hamiltonian(p, ktr));
        const auto out = dcs_to_fock_product(dec.vectors.col(0), p, ktr);
        CHECK(out.captured_norm >= 1.0 - 1e-8);
        CHECK(out.captured_norm <= 1.0 + 1e-12);

        // photon number evaluated on the product grid agrees with the DCS matrix
        double n_grid = 0.0;
        for (int mi = 0; mi <= 2; ++mi) {
            for (int fn = 0; fn <= out.n_trunc; ++fn) {
                n_grid += fn * out.grid(mi, fn) * out.grid(mi, fn);
            }
        }
        const DcsBasis basis(2, ktr);
        const double n_dcs =
            dec.vectors.col(0).dot(photon_number_matrix(basis, p).mat * dec.vectors.col(0));
        CHECK(n_grid == doctest::Approx(n_dcs).scale(1.0).epsilon(1e-7));
    }

    CHECK_THROWS_AS(dcs_to_fock_product(Eigen::VectorXd::Zero(3), params(2, 0.1, 0.0), 6),
                    std::invalid_argument);
}

TEST_CASE("gibbs state") {
    const auto p = params(3, 0.3, 0.5);
    const auto dec = eigendecompose(build_dcs_hamiltonian(p, 25));

    const auto g0 = gibbs_state(dec, 0.0);
    CHECK(g0.retained == 1);
    CHECK(g0.weights(0) == 1.0);
    CHECK(g0.entropy() == doctest::Approx(0.0));

    double prev_entropy = -1.0;
    for (double t : {0.1, 0.3, 1.0, 3.0}) {
        const auto g = gibbs_state(dec, t);
        CHECK(g.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(g.weights.minCoeff() >= 0.0);
        CHECK(g.entropy() > prev_entropy);
        prev_entropy = g.entropy();
        // weights are non-increasing with level index
        for (int i = 1; i < g.retained; ++i) CHECK(g.weights(i) <= g.weights(i - 1) + 1e-15);
    }

    CHECK_THROWS_AS(gibbs_state(dec, -1.0), std::invalid_argument);
}

TEST_CASE("thermal quadrature correlation of a decoupled oscillator is 2") {
    // lambda = 0: the field factorizes and the quadrature correlation reduces to the
    // thermal harmonic-oscillator value <a†a†aa>/<a†a>^2 = 2.
    const auto p = params(1, 0.0, 0.0, 0.37);
    const auto dec = [&] {
        auto d = eigendecompose(build_dcs_hamiltonian(p, 100));
        d.truncation = 100;
        return d;
    }();
    for (double t : {0.5, 1.0, 2.0}) {
        const auto r = g2_zero(dec, p, t, 0, 1e-7);
        CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
    }
}

TEST_CASE("partial transpose and negativity") {
    // two qubits: Bell state (|00> + |11>)/sqrt(2) has negativity 1/2
    DensityMatrix bell;
    bell.dim_atom = 2;
    bell.dim_field = 2;
    bell.mat = Eigen::MatrixXd::Zero(4, 4);
    bell.mat(0, 0) = bell.mat(3, 3) = bell.mat(0, 3) = bell.mat(3, 0) = 0.5;
    CHECK(negativity(bell) == doctest::Approx(0.5).epsilon(1e-10));

    // product state has zero negativity
    DensityMatrix prod;
    prod.dim_atom = 2;
    prod.dim_field = 2;
    Eigen::Vector4d v(0.6, 0.0, 0.8, 0.0);  // (0.6|0> + 0.8|1>) ⊗ |0>
    prod.mat = v * v.transpose();
    CHECK(negativity(prod) == doctest::Approx(0.0).epsilon(1e-12));

    // involution, trace and hermiticity preservation
    const auto pt = partial_transpose(bell);
    CHECK(pt.mat.trace() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pt.hermiticity_defect() < 1e-14);
    const auto ptpt = partial_transpose(pt);
    CHECK((ptpt.mat - bell.mat).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("thermal product density is a valid state") {
    const auto p = params(2, 0.6, 1.0);
    auto dec = eigendecompose(build_dcs_hamiltonian(p, 30));
    dec.truncation = 30;
    const auto rho = thermal_product_density(dec, p, 0.4);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rho.hermiticity_defect() < 1e-13);
    CHECK(rho.renormalization == doctest::Approx(1.0).epsilon(1e-7));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s(rho.mat, Eigen::EigenvaluesOnly);
    CHECK(s.eigenvalues().minCoeff() > -1e-12);

    // negativity is finite and nonnegative at strong coupling and low temperature
    CHECK(negativity(rho) >= 0.0);
}

TEST_CASE("reduced atomic state routes agree") {
    const auto p = params(4, 0.5, -0.5);
    auto dec = eigendecompose(build_dcs_hamiltonian(p, 30));
    dec.truncation = 30;
    const double t = 0.3;

    const auto rho = thermal_product_density(dec, p, t);
    const auto direct = thermal_atom_density(dec, p, t);

    Eigen::MatrixXd from_full = Eigen::MatrixXd::Zero(5, 5);
    for (int ma = 0; ma < 5; ++ma) {
        for (int mb = 0; mb < 5; ++mb) {
            from_full(ma, mb) = rho.mat
                                    .block(ma * rho.dim_field, mb * rho.dim_field, rho.dim_field,
                                           rho.dim_field)
                                    .trace();
        }
    }
    CHECK((from_full - direct).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(direct.trace() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(spin_squeezing(rho, 4) ==
          doctest::Approx(spin_squeezing_from_atom(direct.cast<std::complex<double>>(), 4))
              .scale(1.0)
              .epsilon(1e-8));
}

TEST_CASE("coherent spin state has unit squeezing parameter") {
    for (int n : {2, 4, 8}) {
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n + 1, n + 1);
        rho(n, n) = 1.0;  // |m = +j>, fully polarized along z
        CHECK(spin_squeezing_from_atom(rho, n) == doctest::Approx(1.0).epsilon(1e-12));
    }

    // fully mixed state: mean spin vanishes, transverse direction undefined
    Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(3, 3) / 3.0;
    CHECK_THROWS_AS(spin_squeezing_from_atom(mixed, 2), UndefinedQuantityError);
}

TEST_CASE("frame invariance of thermal photon number") {
    for (int n : {2, 4}) {
        const auto p = params(n, 0.45, 0.8);
        auto dec = eigendecompose(build_dcs_hamiltonian(p, 35));
        dec.truncation = 35;
        const DcsBasis basis(n, 35);
        const auto nph = photon_number_matrix(basis, p);
        const double t = 0.5;
        const auto g = gibbs_state(dec, t);
        double n_dcs = 0.0;
        for (int i = 0; i < g.retained; ++i) {
            n_dcs += g.weights(i) * dec.vectors.col(i).dot(nph.mat * dec.vectors.col(i));
        }

        const FockBasis fb(n, 180);
        const auto dfs = eigendecompose(build_dfs_hamiltonian(p, 180));
        const auto gf = gibbs_state(dfs, t);
        const auto nf = fock_photon_number(fb);
        double n_ref = 0.0;
        for (int i = 0; i < gf.retained; ++i) {
            n_ref += gf.weights(i) * dfs.vectors.col(i).dot(nf * dfs.vectors.col(i));
        }
        CHECK(n_dcs == doctest::Approx(n_ref).scale(1.0).epsilon(1e-6));
    }
}
