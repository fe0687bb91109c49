#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsm/dynamics.hpp"

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

EigenDecomposition dcs_decomposition(const ModelParams& p, int ktr) {
    auto dec = eigendecompose(build_dcs_hamiltonian(p, ktr));
    dec.truncation = ktr;
    return dec;
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a - b, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

TEST_CASE("initial overlaps are complete") {
    const auto p = params(3, 0.3, 0.5);
    const auto dec = dcs_decomposition(p, 40);
    const auto ov = initial_overlaps(dec, p);
    CHECK(ov.norm_deficit < 1e-8);
    CHECK(ov.d.squaredNorm() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("initial overlaps match a direct Fock-basis projection") {
    const auto p = params(2, 0.3, 0.5);
    const auto dec = dcs_decomposition(p, 40);
    const auto ov = initial_overlaps(dec, p);

    const int ntr = 150;
    const auto href = oracle::rotated_fock_hamiltonian(p, ntr);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(href);
    const FockBasis fb(2, ntr);
    const int init = fb.flat(0, 0);  // |j, -j> |0>

    for (int n = 0; n < 12; ++n) {
        const bool degenerate =
            (n > 0 && ref.eigenvalues()(n) - ref.eigenvalues()(n - 1) < 1e-6) ||
            (ref.eigenvalues()(n + 1) - ref.eigenvalues()(n) < 1e-6);
        if (degenerate) continue;
        CHECK(dec.values(n) == doctest::Approx(ref.eigenvalues()(n)).scale(1.0).epsilon(1e-8));
        CHECK(std::abs(ov.d(n)) ==
              doctest::Approx(std::abs(ref.eigenvectors()(init, n))).scale(1.0).epsilon(1e-8));
    }
}

TEST_CASE("closed photon dynamics: vacuum start and decoupled limit") {
    const std::vector<double> times{0.0, 1.0, 5.0, 20.0};
    {
        const auto out = closed_photon_dynamics(params(4, 0.4, 1.0), times, 40);
        CHECK(std::abs(out.photon_per_atom[0]) < 1e-10);
        CHECK(out.photon_per_atom[2] > 0.0);
    }
    {
        const auto out = closed_photon_dynamics(params(4, 0.0, 1.0), times, 20);
        for (double v : out.photon_per_atom) CHECK(std::abs(v) < 1e-12);
    }
}

TEST_CASE("closed photon dynamics matches exact unitary propagation") {
    const auto p = params(2, 0.3, 0.5);
    std::vector<double> times;
    for (int i = 0; i <= 20; ++i) times.push_back(i);
    const auto out = closed_photon_dynamics(p, times, 40);

    const int ntr = 150;
    const auto href = oracle::rotated_fock_hamiltonian(p, ntr);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(href);
    const FockBasis fb(2, ntr);
    Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(fb.dimension());
    psi0(fb.flat(0, 0)) = 1.0;
    const Eigen::VectorXd d = ref.eigenvectors().transpose() * psi0;
    const Eigen::MatrixXd nop = fock_photon_number(fb);

    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        Eigen::VectorXcd amp = d.cast<std::complex<double>>();
        for (int n = 0; n < amp.size(); ++n) {
            amp(n) *= std::exp(std::complex<double>(0.0, -ref.eigenvalues()(n) * times[ti]));
        }
        const Eigen::VectorXcd psi = ref.eigenvectors() * amp;
        const double n_ref = (psi.adjoint() * nop * psi)(0, 0).real();
        CHECK(out.photon_per_atom[ti] ==
              doctest::Approx(n_ref / p.n_atoms).scale(1.0).epsilon(1e-6));
    }
}

TEST_CASE("closed-system energy is conserved under exact propagation") {
    const auto p = params(2, 0.35, 1.0);
    const int ntr = 150;
    const auto href = oracle::rotated_fock_hamiltonian(p, ntr);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(href);
    const FockBasis fb(2, ntr);
    Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(fb.dimension());
    psi0(fb.flat(0, 0)) = 1.0;
    const Eigen::VectorXd d = ref.eigenvectors().transpose() * psi0;
    const double e0 = d.cwiseAbs2().dot(ref.eigenvalues());
    for (double t : {1.0, 7.0, 31.0}) {
        Eigen::VectorXcd amp = d.cast<std::complex<double>>();
        for (int n = 0; n < amp.size(); ++n) {
            amp(n) *= std::exp(std::complex<double>(0.0, -ref.eigenvalues()(n) * t));
        }
        const Eigen::VectorXcd psi = ref.eigenvectors() * amp;
        const double e = (psi.adjoint() * href * psi)(0, 0).real();
        CHECK(e == doctest::Approx(e0).scale(1.0).epsilon(1e-8));
    }
}

TEST_CASE("dressed dissipator rates") {
    const auto p = params(2, 0.3, 1.0);
    const auto dec = dcs_decomposition(p, 30);
    BathSpec bath;
    bath.temperature = 0.5;
    const auto dis = build_dressed_dissipator(dec, bath, p, 20);
    CHECK(dis.levels == 20);
    CHECK(!dis.rates.empty());

    // detailed balance: down / up = e^{gap / T} exactly
    for (const auto& e : dis.rates) {
        if (e.up > 0.0) {
            CHECK(e.down / e.up == doctest::Approx(std::exp(e.gap / bath.temperature))
                                       .scale(1.0)
                                       .epsilon(1e-12));
        }
        CHECK(e.gap > 0.0);
        CHECK(e.down >= 0.0);
        CHECK(e.up >= 0.0);
    }

    // near-zero temperature: upward rates vanish
    BathSpec cold = bath;
    cold.temperature = 1e-4;
    const auto discold = build_dressed_dissipator(dec, cold, p, 20);
    for (const auto& e : discold.rates) {
        CHECK(e.up <= e.down * std::exp(-e.gap / cold.temperature) * (1.0 + 1e-12));
    }
    CHECK(bose_occupation(1.0, 0.0) == 0.0);
}

TEST_CASE("quadrature obeys the parity selection rule in the Fock frame") {
    const auto p = params(3, 0.4, 0.8);
    const int ntr = 60;
    const auto h = build_dfs_hamiltonian(p, ntr);
    const auto pi = parity_matrix(FockBasis(p.n_atoms, ntr));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.mat);
    const auto x = fock_quadrature(FockBasis(p.n_atoms, ntr));

    const int m = 25;
    const Eigen::MatrixXd v = es.eigenvectors().leftCols(m);
    const Eigen::MatrixXd xeig = v.transpose() * x * v;
    for (int i = 0; i < m; ++i) {
        const double pi_i = v.col(i).dot(pi.mat * v.col(i));
        for (int jj = i + 1; jj < m; ++jj) {
            const bool near_degenerate =
                std::abs(es.eigenvalues()(jj) - es.eigenvalues()(i)) < 1e-8;
            if (near_degenerate) continue;
            const double pi_j = v.col(jj).dot(pi.mat * v.col(jj));
            if (pi_i * pi_j > 0.5) {  // same definite parity
                CHECK(std::abs(xeig(i, jj)) < 1e-10);
            }
        }
    }
}

TEST_CASE("steady state equals the Gibbs distribution") {
    for (double u : {0.0, 1.0}) {
        const auto p = params(2, 0.3, u);
        const auto dec = dcs_decomposition(p, 30);
        BathSpec bath;
        bath.temperature = 0.5;
        const int m = 20;
        const auto dis = build_dressed_dissipator(dec, bath, p, m);
        const auto pop = steady_state_populations(dis);

        Eigen::VectorXd boltz(m);
        for (int i = 0; i < m; ++i) {
            boltz(i) = std::exp(-(dec.values(i) - dec.values(0)) / bath.temperature);
        }
        boltz /= boltz.sum();
        CHECK((pop - boltz).cwiseAbs().maxCoeff() < 1e-8);

        // the Gibbs state is stationary under the generator
        const auto gen = detail::make_generator(dis);
        Eigen::MatrixXcd rho = boltz.cast<std::complex<double>>().asDiagonal();
        const auto drho = gen.apply(rho);
        CHECK(drho.cwiseAbs().maxCoeff() < 1e-10 * std::max(1e-300, dis.max_rate()));
    }
}

TEST_CASE("two-level chain has the analytic relaxation profile") {
    DissipatorSpec dis;
    dis.levels = 2;
    dis.energies = Eigen::VectorXd::Zero(2);
    dis.energies << 0.0, 1.0;
    const double gamma = 0.05;
    const double occ = bose_occupation(1.0, 0.7);
    dis.rates.push_back({0, 1, 1.0, gamma * (1.0 + occ), gamma * occ,
                         BathChannel::FieldQuadrature});

    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(2, 2);
    rho0(1, 1) = 1.0;  // start fully excited
    std::vector<double> times{0.0, 2.0, 5.0, 12.0, 30.0};
    const auto traj = evolve_master(rho0, dis, times);

    const double total = gamma * (1.0 + 2.0 * occ);
    const double pinf = gamma * occ / total;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double expect = pinf + (1.0 - pinf) * std::exp(-total * times[i]);
        CHECK(traj.states[i](1, 1).real() == doctest::Approx(expect).scale(1.0).epsilon(1e-6));
    }
    CHECK(traj.max_trace_drift < 1e-9);
}

TEST_CASE("master equation relaxes a perturbed thermal state monotonically") {
    const auto p = params(2, 0.3, 1.0);
    const auto dec = dcs_decomposition(p, 25);
    BathSpec bath;
    bath.alpha = 0.05;  // fast bath: identical physics, shorter horizon
    bath.temperature = 0.5;
    const int m = 12;
    const auto dis = build_dressed_dissipator(dec, bath, p, m);

    Eigen::VectorXd boltz(m);
    for (int i = 0; i < m; ++i) {
        boltz(i) = std::exp(-(dec.values(i) - dec.values(0)) / bath.temperature);
    }
    boltz /= boltz.sum();
    Eigen::MatrixXcd target = boltz.cast<std::complex<double>>().asDiagonal();

    Eigen::MatrixXcd rho0 = target;
    rho0(0, 0) -= 0.05;
    rho0(1, 1) += 0.05;
    rho0(0, 1) = rho0(1, 0) = 0.03;

    const double horizon = 50.0 / (M_PI * bath.alpha);
    std::vector<double> times;
    for (int i = 0; i <= 10; ++i) times.push_back(horizon * i / 10.0);
    const auto traj = evolve_master(rho0, dis, times);

    double prev = 1e300;
    for (const auto& state : traj.states) {
        const double dist = trace_distance(state, target);
        CHECK(dist <= prev + 1e-9);
        prev = dist;
    }
    CHECK(trace_distance(traj.states.back(), target) < 1e-5);
    CHECK(traj.max_trace_drift < 1e-9);
    CHECK(traj.min_eigenvalue > -1e-9);
}

TEST_CASE("bath coupling rescales time but not the steady state") {
    const auto p = params(2, 0.4, 0.0);
    const auto dec = dcs_decomposition(p, 25);
    BathSpec a1, a2;
    a1.temperature = a2.temperature = 0.4;
    a1.alpha = 0.001;
    a2.alpha = 0.01;
    const auto d1 = build_dressed_dissipator(dec, a1, p, 15);
    const auto d2 = build_dressed_dissipator(dec, a2, p, 15);
    const auto p1 = steady_state_populations(d1);
    const auto p2 = steady_state_populations(d2);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-10);

    for (std::size_t i = 0; i < d1.rates.size(); ++i) {
        CHECK(d2.rates[i].down == doctest::Approx(10.0 * d1.rates[i].down).epsilon(1e-12));
    }
}
