// dynamics.hpp — closed-system photon dynamics and the dressed Lindblad master equation
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsm/common.hpp"
#include "dsm/observables.hpp"
#include "dsm/operators.hpp"
#include "dsm/params.hpp"
#include "dsm/spectrum.hpp"

namespace dsm {

// ------------------------------------------------------------ closed dynamics

struct InitialOverlaps {
    Eigen::VectorXd d;          // d_n = <psi_n | j,-j> |0>_field
    double norm_deficit{0.0};   // 1 - sum d_n^2
};

// Overlaps of the eigenstates with |j,-j>|0>_field (rotated-frame convention m = -j).
// Computed from exact displaced-vacuum amplitudes, not a printed closed form.
inline InitialOverlaps initial_overlaps(const EigenDecomposition& dec, const ModelParams& p) {
    if (dec.basis != BasisTag::Dcs) {
        throw std::invalid_argument("initial_overlaps: DCS decomposition required");
    }
    const int k_trunc = dec.truncation;
    const DcsBasis basis(p.n_atoms, k_trunc);
    const double g_low = displacement_amplitude(basis.m_of(0), p);  // m = -j block
    const Eigen::VectorXd c = vacuum_in_displaced_basis(g_low, k_trunc);

    InitialOverlaps out;
    out.d = dec.vectors.topRows(k_trunc + 1).transpose() * c;  // m = -j occupies rows 0..K
    out.norm_deficit = 1.0 - out.d.squaredNorm();
    if (out.norm_deficit > 1e-6) {
        throw ConvergenceError("initial_overlaps: truncation norm deficit " +
                               std::to_string(out.norm_deficit));
    }
    return out;
}

struct PhotonDynamics {
    std::vector<double> times;
    std::vector<double> photon_per_atom;
    double norm_deficit{0.0};
    int k_trunc{0};
};

// <a†a>(t)/N for the initial state |j,-j>|0>: double sum over eigenpairs with
// phases cos((E_l - E_n) t) and photon matrix elements precomputed once.
inline PhotonDynamics closed_photon_dynamics(const ModelParams& p,
                                             const std::vector<double>& times,
                                             int k_trunc = 50,
                                             const ConvergenceOptions& opts = {}) {
    p.validate();
    EigenDecomposition dec;
    if (k_trunc > 0) {
        dec = eigendecompose(build_dcs_hamiltonian(p, k_trunc, opts.self_test_assembly));
        dec.truncation = k_trunc;
    } else {
        dec = converged_spectrum(p, 10, 1e-6, opts).decomposition;
    }
    const auto overlaps = initial_overlaps(dec, p);
    const DcsBasis basis(p.n_atoms, dec.truncation);
    const Eigen::MatrixXd n_eig =
        dec.vectors.transpose() * photon_number_matrix(basis, p).mat * dec.vectors;

    const int dim = dec.dimension();
    const Eigen::VectorXd& d = overlaps.d;

    // collapse to (amplitude, frequency) pairs
    double constant = 0.0;
    std::vector<double> amps, freqs;
    amps.reserve(dim * (dim - 1) / 8);
    freqs.reserve(amps.capacity());
    for (int l = 0; l < dim; ++l) {
        constant += d(l) * d(l) * n_eig(l, l);
        for (int n = l + 1; n < dim; ++n) {
            const double amp = 2.0 * d(l) * d(n) * n_eig(l, n);
            if (std::abs(amp) > 1e-18) {
                amps.push_back(amp);
                freqs.push_back(dec.values(l) - dec.values(n));
            }
        }
    }

    PhotonDynamics out;
    out.times = times;
    out.norm_deficit = overlaps.norm_deficit;
    out.k_trunc = dec.truncation;
    out.photon_per_atom.resize(times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        double v = constant;
        for (std::size_t i = 0; i < amps.size(); ++i) {
            v += amps[i] * std::cos(freqs[i] * times[ti]);
        }
        out.photon_per_atom[ti] = v / p.n_atoms;
    }
    return out;
}

// --------------------------------------------------------------- dissipators

enum class BathChannel { FieldQuadrature, AtomicQuadrature };

struct BathSpec {
    double alpha{0.001};    // dimensionless Ohmic coupling, in units of omega
    double omega_c{10.0};   // cutoff, in units of omega
    double temperature{0.1};
    bool field_channel{true};
    bool atomic_channel{true};
};

struct RateEntry {
    int lower{0};       // eigenstate index j (E_j < E_k)
    int upper{0};       // eigenstate index k
    double gap{0.0};    // E_k - E_j
    double down{0.0};   // rate k -> j, Gamma (1 + n)
    double up{0.0};     // rate j -> k, Gamma n
    BathChannel channel{BathChannel::FieldQuadrature};
};

struct DissipatorSpec {
    BathSpec bath;
    int levels{0};  // eigenstate truncation M
    std::vector<RateEntry> rates;
    Eigen::VectorXd energies;  // the M retained eigenvalues

    double max_rate() const {
        double r = 0.0;
        for (const auto& e : rates) r = std::max(r, std::max(e.down, e.up));
        return r;
    }
    double max_gap() const { return levels > 1 ? energies(levels - 1) - energies(0) : 0.0; }
};

inline double bose_occupation(double gap, double temperature) {
    if (temperature <= 0.0) return 0.0;
    return 1.0 / std::expm1(gap / temperature);
}

// Ohmic spectral function gamma(D) = pi alpha D exp(-|D|/omega_c), units of omega = 1.
inline double ohmic_rate(double gap, const BathSpec& bath) {
    return M_PI * bath.alpha * gap * std::exp(-std::abs(gap) / bath.omega_c);
}

// Rate table Gamma_u^{jk} = gamma_u(D_jk) |S_u^{jk}|^2 over ordered level pairs
// of the lowest `levels` eigenstates; gaps below 1e-10 are excluded.
inline DissipatorSpec build_dressed_dissipator(const EigenDecomposition& dec,
                                               const BathSpec& bath, const ModelParams& p,
                                               int levels = 0) {
    if (dec.basis != BasisTag::Dcs) {
        throw std::invalid_argument("build_dressed_dissipator: DCS decomposition required");
    }
    if (!(bath.temperature > 0.0)) {
        throw std::invalid_argument("build_dressed_dissipator: bath temperature must be > 0");
    }
    const int dim = dec.dimension();
    const int m = (levels > 0) ? std::min(levels, dim) : dim;
    const DcsBasis basis(p.n_atoms, dec.truncation);
    const Eigen::MatrixXd v = dec.vectors.leftCols(m);

    DissipatorSpec spec;
    spec.bath = bath;
    spec.levels = m;
    spec.energies = dec.values.head(m);

    auto add_channel = [&](const Eigen::MatrixXd& op, BathChannel channel) {
        const Eigen::MatrixXd s = v.transpose() * op * v;
        for (int jj = 0; jj < m; ++jj) {
            for (int kk = jj + 1; kk < m; ++kk) {
                const double gap = spec.energies(kk) - spec.energies(jj);
                if (gap < 1e-10) continue;
                const double gamma = ohmic_rate(gap, bath) * s(jj, kk) * s(jj, kk);
                if (gamma == 0.0) continue;
                const double occ = bose_occupation(gap, bath.temperature);
                spec.rates.push_back({jj, kk, gap, gamma * (1.0 + occ), gamma * occ, channel});
            }
        }
    };

    if (bath.field_channel) add_channel(quadrature_matrix(basis, p).mat, BathChannel::FieldQuadrature);
    if (bath.atomic_channel) {
        add_channel(atomic_quadrature_matrix(basis, p).mat, BathChannel::AtomicQuadrature);
    }
    return spec;
}

// ------------------------------------------------------------ master equation

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> states;  // density matrix at each sample time
    long steps{0};
    double max_local_error{0.0};
    double max_trace_drift{0.0};
    double min_eigenvalue{0.0};
};

namespace detail {

struct MasterGenerator {
    Eigen::MatrixXcd decay;    // -i(E_a - E_b) - (gamma_a + gamma_b)/2, elementwise
    Eigen::MatrixXd transfer;  // population gain rates, transfer(a, c) = rate c -> a

    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const {
        Eigen::MatrixXcd drho = decay.cwiseProduct(rho);
        const int m = static_cast<int>(rho.rows());
        for (int a = 0; a < m; ++a) {
            std::complex<double> gain = 0.0;
            for (int c = 0; c < m; ++c) {
                if (transfer(a, c) != 0.0) gain += transfer(a, c) * rho(c, c);
            }
            drho(a, a) += gain;
        }
        return drho;
    }
};

inline MasterGenerator make_generator(const DissipatorSpec& dis) {
    const int m = dis.levels;
    Eigen::MatrixXd transfer = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : dis.rates) {
        transfer(e.lower, e.upper) += e.down;
        transfer(e.upper, e.lower) += e.up;
    }
    Eigen::VectorXd outflow = transfer.colwise().sum();

    MasterGenerator gen;
    gen.transfer = std::move(transfer);
    gen.decay.resize(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            gen.decay(a, b) = std::complex<double>(-0.5 * (outflow(a) + outflow(b)),
                                                   -(dis.energies(a) - dis.energies(b)));
        }
    }
    return gen;
}

inline Eigen::MatrixXcd rk4_step(const MasterGenerator& gen, const Eigen::MatrixXcd& rho,
                                 double h) {
    const Eigen::MatrixXcd k1 = gen.apply(rho);
    const Eigen::MatrixXcd k2 = gen.apply(rho + 0.5 * h * k1);
    const Eigen::MatrixXcd k3 = gen.apply(rho + 0.5 * h * k2);
    const Eigen::MatrixXcd k4 = gen.apply(rho + h * k3);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

struct EvolveOptions {
    double local_error_tol{1e-9};
    double positivity_abort{1e-6};
};

// Fixed-cap RK4 with step-halving error control. The base step obeys
// h <= 0.1 / (max rate + max gap); a full step is compared against two half steps
// and halved until the local error estimate meets the tolerance. Trace drift is
// recorded, never silently renormalized.
inline Trajectory evolve_master(const Eigen::MatrixXcd& rho0, const DissipatorSpec& dis,
                                const std::vector<double>& sample_times,
                                const EvolveOptions& opts = {}) {
    const int m = dis.levels;
    if (rho0.rows() != m || rho0.cols() != m) {
        throw std::invalid_argument("evolve_master: rho0 dimension mismatch with dissipator");
    }
    if (sample_times.empty()) throw std::invalid_argument("evolve_master: empty time grid");

    const auto gen = detail::make_generator(dis);
    const double h_cap = 0.1 / std::max(1e-300, dis.max_rate() + dis.max_gap());

    Trajectory traj;
    traj.min_eigenvalue = 0.0;
    Eigen::MatrixXcd rho = rho0;
    double t = sample_times.front();

    auto record = [&](double time) {
        traj.times.push_back(time);
        traj.states.push_back(rho);
        traj.max_trace_drift = std::max(traj.max_trace_drift, std::abs(rho.trace().real() - 1.0));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
        const double min_eig = es.eigenvalues().minCoeff();
        traj.min_eigenvalue = std::min(traj.min_eigenvalue, min_eig);
        if (min_eig < -opts.positivity_abort) {
            throw std::runtime_error("evolve_master: positivity violation " +
                                     std::to_string(min_eig) + " at t = " + std::to_string(time) +
                                     " after " + std::to_string(traj.steps) + " steps");
        }
    };

    record(t);
    for (std::size_t si = 1; si < sample_times.size(); ++si) {
        const double t_target = sample_times[si];
        if (t_target < t) throw std::invalid_argument("evolve_master: time grid not increasing");
        while (t < t_target - 1e-15 * std::max(1.0, std::abs(t_target))) {
            double h = std::min(h_cap, t_target - t);
            while (true) {
                const Eigen::MatrixXcd full = detail::rk4_step(gen, rho, h);
                const Eigen::MatrixXcd half =
                    detail::rk4_step(gen, detail::rk4_step(gen, rho, 0.5 * h), 0.5 * h);
                const double err = (full - half).cwiseAbs().maxCoeff() / 15.0;
                if (err <= opts.local_error_tol || h < 1e-12) {
                    rho = half + (half - full) / 15.0;  // local extrapolation
                    traj.max_local_error = std::max(traj.max_local_error, err);
                    t += h;
                    ++traj.steps;
                    break;
                }
                h *= 0.5;
            }
        }
        t = t_target;
        record(t);
    }
    return traj;
}

// ------------------------------------------------------------- steady state

// Populations decouple from coherences (the jump operators are eigenbasis dyads), so
// the steady state is the one-dimensional kernel of the population rate matrix with
// coherences zero.
inline Eigen::VectorXd steady_state_populations(const DissipatorSpec& dis) {
    const int m = dis.levels;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : dis.rates) {
        a(e.lower, e.upper) += e.down;
        a(e.upper, e.lower) += e.up;
        a(e.upper, e.upper) -= e.down;
        a(e.lower, e.lower) -= e.up;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-10 * std::max(1e-300, dis.max_rate()));
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() != 1) {
        // connectivity report: count components of the rate graph
        std::vector<int> parent(m);
        for (int i = 0; i < m; ++i) parent[i] = i;
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& e : dis.rates) {
            if (e.down > 0.0 || e.up > 0.0) parent[find(e.lower)] = find(e.upper);
        }
        int components = 0;
        for (int i = 0; i < m; ++i) {
            if (find(i) == i) ++components;
        }
        throw std::runtime_error("steady_state: rate matrix kernel dimension " +
                                 std::to_string(kernel.cols()) + ", rate graph has " +
                                 std::to_string(components) + " connected component(s)");
    }
    Eigen::VectorXd pop = kernel.col(0);
    if (pop.sum() < 0.0) pop = -pop;
    if (pop.minCoeff() < -1e-10 * pop.cwiseAbs().maxCoeff()) {
        throw std::runtime_error("steady_state: kernel vector not sign-definite");
    }
    return pop.cwiseMax(0.0) / pop.cwiseMax(0.0).sum();
}

}  // namespace dsm
