// observables.hpp — equilibrium observables: photon number, Gibbs states, G2(0),
// negativity, and spin squeezing
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dsm/basis.hpp"
#include "dsm/common.hpp"
#include "dsm/operators.hpp"
#include "dsm/params.hpp"
#include "dsm/spectrum.hpp"

namespace dsm {

// ---------------------------------------------------------------- Gibbs states

// Canonical state, diagonal in the eigenbasis of the decomposition it came from.
struct GibbsState {
    Eigen::VectorXd weights;  // length = decomposition dimension; zero beyond retained
    int retained{0};
    double temperature{0.0};

    double entropy() const {
        double s = 0.0;
        for (int i = 0; i < retained; ++i) {
            if (weights(i) > 0.0) s -= weights(i) * std::log(weights(i));
        }
        return s;
    }
};

// Boltzmann weights relative to the ground energy, retained until the cumulative
// weight reaches 1 - weight_cut, then renormalized. T = 0 returns the ground projector.
inline GibbsState gibbs_state(const EigenDecomposition& dec, double temperature,
                              double weight_cut = 1e-12) {
    if (temperature < 0.0) throw std::invalid_argument("gibbs_state: T must be >= 0");
    const int dim = dec.dimension();
    GibbsState g;
    g.temperature = temperature;
    g.weights = Eigen::VectorXd::Zero(dim);
    if (temperature == 0.0) {
        g.weights(0) = 1.0;
        g.retained = 1;
        return g;
    }
    Eigen::VectorXd w(dim);
    const double e0 = dec.values(0);
    for (int i = 0; i < dim; ++i) w(i) = std::exp(-(dec.values(i) - e0) / temperature);
    const double z = w.sum();
    double cum = 0.0;
    int retained = 0;
    for (int i = 0; i < dim; ++i) {
        cum += w(i);
        ++retained;
        if (cum >= (1.0 - weight_cut) * z) break;
    }
    const double norm = w.head(retained).sum();
    g.weights.head(retained) = w.head(retained) / norm;
    g.retained = retained;
    return g;
}

// ------------------------------------------------------- product-basis bridging

// A DCS-basis state re-expressed on the (m, n_photon) grid of the Fock product basis.
struct ProductBasisState {
    Eigen::MatrixXd grid;       // atom_dim x (n_trunc + 1)
    double captured_norm{0.0};  // never silently renormalized
    int n_trunc{0};
    int source_k_trunc{0};
};

// Expand DCS coefficients in the Fock product basis using the displacement kernel
// <n_F|k>_{A_m} = <n| exp(-g_m a + g_m a†) |k>. The photon cutoff starts at
// ceil(max g_m^2) + 4 K_tr and doubles until the captured norm reaches 1 - 1e-8.
inline ProductBasisState dcs_to_fock_product(const Eigen::VectorXd& coeffs, const ModelParams& p,
                                             int k_trunc, int n_trunc_start = -1,
                                             int n_trunc_cap = 4096) {
    p.validate();
    const DcsBasis basis(p.n_atoms, k_trunc);
    if (coeffs.size() != basis.dimension()) {
        throw std::invalid_argument("dcs_to_fock_product: coefficient length mismatch");
    }
    const double source_norm = coeffs.squaredNorm();

    double max_g2 = 0.0;
    for (int mi = 0; mi <= p.n_atoms; ++mi) {
        const double g = displacement_amplitude(basis.m_of(mi), p);
        max_g2 = std::max(max_g2, g * g);
    }
    int n_trunc = (n_trunc_start > 0)
                      ? n_trunc_start
                      : static_cast<int>(std::ceil(max_g2)) + 4 * k_trunc + 4;

    while (true) {
        ProductBasisState out;
        out.n_trunc = n_trunc;
        out.source_k_trunc = k_trunc;
        out.grid.resize(p.n_atoms + 1, n_trunc + 1);
        for (int mi = 0; mi <= p.n_atoms; ++mi) {
            const double g = displacement_amplitude(basis.m_of(mi), p);
            // |k>_{A_m} = D(g_m)†|k>  =>  <n|k>_{A_m} = <n| exp(-g a + g a†) |k>
            const Eigen::MatrixXd kernel = displacement_matrix(-g, n_trunc + 1, k_trunc + 1);
            out.grid.row(mi) =
                (kernel * coeffs.segment(mi * (k_trunc + 1), k_trunc + 1)).transpose();
        }
        out.captured_norm = out.grid.squaredNorm();
        if (out.captured_norm >= (1.0 - 1e-8) * source_norm) return out;
        if (2 * n_trunc > n_trunc_cap) {
            throw ConvergenceError("dcs_to_fock_product: photon cutoff cap " +
                                   std::to_string(n_trunc_cap) + " exceeded, captured norm " +
                                   std::to_string(out.captured_norm));
        }
        n_trunc *= 2;
    }
}

// ------------------------------------------------------------- density matrices

// Dense real density matrix in the atom ⊗ field product basis (atom-major layout).
struct DensityMatrix {
    Eigen::MatrixXd mat;
    int dim_atom{0};
    int dim_field{0};
    double renormalization{1.0};  // trace captured before the final renormalization

    double trace() const { return mat.trace(); }

    double hermiticity_defect() const { return (mat - mat.transpose()).cwiseAbs().maxCoeff(); }
};

// Thermal state of the decomposition as a product-basis density matrix,
// rho = sum_n w_n |psi_n><psi_n| with each eigenstate bridged through
// dcs_to_fock_product at a shared photon cutoff.
inline DensityMatrix thermal_product_density(const EigenDecomposition& dec, const ModelParams& p,
                                             double temperature, double weight_cut = 1e-12) {
    if (dec.basis != BasisTag::Dcs) {
        throw std::invalid_argument("thermal_product_density: DCS decomposition required");
    }
    const GibbsState g = gibbs_state(dec, temperature, weight_cut);
    const int k_trunc = dec.truncation;

    // Pick the shared cutoff from the highest retained level (the widest state).
    int n_trunc = 0;
    std::vector<ProductBasisState> states(g.retained);
    for (int n = 0; n < g.retained; ++n) {
        states[n] = dcs_to_fock_product(dec.vectors.col(n), p, k_trunc,
                                        n_trunc > 0 ? n_trunc : -1);
        n_trunc = std::max(n_trunc, states[n].n_trunc);
    }

    DensityMatrix rho;
    rho.dim_atom = p.n_atoms + 1;
    rho.dim_field = n_trunc + 1;
    const int dim = rho.dim_atom * rho.dim_field;
    rho.mat = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd flat(dim);
    for (int n = 0; n < g.retained; ++n) {
        // re-bridge at the shared cutoff if this state was expanded on a smaller one
        const ProductBasisState& s = (states[n].n_trunc == n_trunc)
                                         ? states[n]
                                         : (states[n] = dcs_to_fock_product(dec.vectors.col(n), p,
                                                                            k_trunc, n_trunc));
        for (int mi = 0; mi < rho.dim_atom; ++mi) {
            flat.segment(mi * rho.dim_field, rho.dim_field) = s.grid.row(mi).transpose();
        }
        rho.mat.selfadjointView<Eigen::Lower>().rankUpdate(flat, g.weights(n));
    }
    rho.mat.triangularView<Eigen::StrictlyUpper>() = rho.mat.transpose();
    rho.renormalization = rho.mat.trace();
    rho.mat /= rho.renormalization;  // truncation deficit recorded, not hidden
    return rho;
}

// ---------------------------------------------------------------- photon number

struct GroundPhotonResult {
    double per_atom{0.0};
    ConvergedSpectrum spectrum;
};

// Ground-state <a†a>/N from a converged DCS spectrum.
inline GroundPhotonResult ground_mean_photon(const ModelParams& p,
                                             const ConvergenceOptions& opts = {},
                                             double rel_tol = 1e-6) {
    GroundPhotonResult r;
    r.spectrum = converged_spectrum(p, 1, rel_tol, opts);
    const DcsBasis basis(p.n_atoms, r.spectrum.decomposition.truncation);
    const auto npn = photon_number_matrix(basis, p);
    const auto gs = r.spectrum.decomposition.vectors.col(0);
    r.per_atom = gs.dot(npn.mat * gs) / p.n_atoms;
    return r;
}

// --------------------------------------------------------------------- G2(0)

struct G2Result {
    double value{0.0};
    int levels_used{0};
    double rel_change{0.0};  // between the final two level counts of the doubling schedule
};

namespace detail {

inline double g2_at_levels(const Eigen::VectorXd& energies, const Eigen::MatrixXd& x_eig,
                           const Eigen::VectorXd& gibbs_weights, int m) {
    // X+ = -i sum_{k>j} (E_k - E_j) X_jk |j><k|; with R_jk = (E_k - E_j) X_jk the
    // phases cancel and both correlators are real:
    //   <X- X+>      = tr(rho R^T R)
    //   <(X-)^2 (X+)^2> = tr(rho (R^T)^2 R^2)
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
    for (int jj = 0; jj < m; ++jj) {
        for (int kk = jj + 1; kk < m; ++kk) {
            const double gap = energies(kk) - energies(jj);
            if (gap < 1e-10) continue;
            r(jj, kk) = gap * x_eig(jj, kk);
        }
    }
    Eigen::VectorXd w = gibbs_weights.head(m);
    const double wsum = w.sum();
    if (wsum <= 0.0) throw UndefinedQuantityError("g2: no thermal weight in level window");
    w /= wsum;

    const Eigen::MatrixXd r2 = r * r;
    double denom = 0.0, numer = 0.0;
    for (int a = 0; a < m; ++a) {
        denom += w(a) * r.col(a).squaredNorm();
        numer += w(a) * r2.col(a).squaredNorm();
    }
    if (denom < 1e-300) {
        throw UndefinedQuantityError("g2: <X- X+> vanishes, correlation undefined");
    }
    return numer / (denom * denom);
}

}  // namespace detail

// Generalized zero-delay two-photon correlation in the Gibbs state at temperature T.
// The level count doubles until the value changes by less than rel_tol (relative).
inline G2Result g2_zero(const EigenDecomposition& dec, const ModelParams& p, double temperature,
                        int level_start = 0, double rel_tol = 1e-4,
                        double weight_cut = 1e-12) {
    if (dec.basis != BasisTag::Dcs) throw std::invalid_argument("g2_zero: DCS decomposition required");
    const GibbsState g = gibbs_state(dec, temperature, weight_cut);
    const int dim = dec.dimension();
    const DcsBasis basis(p.n_atoms, dec.truncation);
    const auto quad = quadrature_matrix(basis, p);

    int m = (level_start > 0) ? level_start : std::max(16, 2 * g.retained);
    m = std::min(m, dim);

    G2Result result;
    double prev = 0.0;
    bool have_prev = false;
    while (true) {
        const Eigen::MatrixXd v = dec.vectors.leftCols(m);
        const Eigen::MatrixXd x_eig = v.transpose() * quad.mat * v;
        const double val = detail::g2_at_levels(dec.values, x_eig, g.weights, m);
        result.value = val;
        result.levels_used = m;
        if (have_prev) {
            result.rel_change = std::abs(val - prev) / std::max(1e-300, std::abs(val));
            if (result.rel_change < rel_tol) return result;
        }
        if (m == dim) return result;  // exhausted: certificate carries the last change
        prev = val;
        have_prev = true;
        m = std::min(2 * m, dim);
    }
}

// --------------------------------------------------- negativity (atom bipartition)

// Transpose the atom factor of a product-basis density matrix.
inline DensityMatrix partial_transpose(const DensityMatrix& rho) {
    if (rho.dim_atom <= 0 || rho.dim_field <= 0 ||
        rho.mat.rows() != static_cast<Eigen::Index>(rho.dim_atom) * rho.dim_field) {
        throw std::invalid_argument("partial_transpose: not a product-basis density matrix");
    }
    DensityMatrix out = rho;
    const int df = rho.dim_field;
    for (int ma = 0; ma < rho.dim_atom; ++ma) {
        for (int mb = 0; mb < rho.dim_atom; ++mb) {
            out.mat.block(ma * df, mb * df, df, df) = rho.mat.block(mb * df, ma * df, df, df);
        }
    }
    return out;
}

// N(rho) = (||rho^{T_A}||_1 - 1)/2, cross-checked against (1/2) sum (|e| - e).
inline double negativity(const DensityMatrix& rho) {
    const DensityMatrix pt = partial_transpose(rho);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(pt.mat, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceError("negativity: eigensolve failed");
    const Eigen::VectorXd eps = solver.eigenvalues();
    const double trace_norm_route = 0.5 * (eps.cwiseAbs().sum() - 1.0);
    const double neg_part_route = 0.5 * (eps.cwiseAbs() - eps).sum();
    if (std::abs(trace_norm_route - neg_part_route) > 1e-10) {
        throw std::runtime_error("negativity: route disagreement " +
                                 std::to_string(std::abs(trace_norm_route - neg_part_route)));
    }
    return std::max(0.0, neg_part_route);
}

// ------------------------------------------------------------- spin squeezing

struct SpinMatrices {
    Eigen::MatrixXcd sx, sy, sz;  // collective spin on the symmetric subspace, m ascending
};

inline SpinMatrices collective_spin_matrices(int n_atoms) {
    const int dim = n_atoms + 1;
    const double j = 0.5 * n_atoms;
    SpinMatrices s;
    s.sx = Eigen::MatrixXcd::Zero(dim, dim);
    s.sy = Eigen::MatrixXcd::Zero(dim, dim);
    s.sz = Eigen::MatrixXcd::Zero(dim, dim);
    for (int mi = 0; mi < dim; ++mi) {
        const double m = mi - j;
        s.sz(mi, mi) = m;
        if (mi + 1 < dim) {
            const double jp = j_plus(j, m);  // <m+1| J+ |m>
            s.sx(mi + 1, mi) = 0.5 * jp;
            s.sx(mi, mi + 1) = 0.5 * jp;
            s.sy(mi + 1, mi) = std::complex<double>(0.0, -0.5) * jp;
            s.sy(mi, mi + 1) = std::complex<double>(0.0, 0.5) * jp;
        }
    }
    return s;
}

// Kitagawa-Ueda parameter from the reduced atomic state: minimal symmetrized variance
// over directions perpendicular to the mean spin, xi^2 = 4 min var / N.
inline double spin_squeezing_from_atom(const Eigen::MatrixXcd& rho_atom, int n_atoms) {
    const SpinMatrices s = collective_spin_matrices(n_atoms);
    auto expval = [&](const Eigen::MatrixXcd& op) { return (rho_atom * op).trace().real(); };

    Eigen::Vector3d mean(expval(s.sx), expval(s.sy), expval(s.sz));
    const double len = mean.norm();
    if (len <= 1e-12) {
        throw UndefinedQuantityError("spin_squeezing: mean spin length below 1e-12, "
                                     "transverse direction undefined");
    }
    const Eigen::Vector3d dir = mean / len;
    Eigen::Vector3d seed = (std::abs(dir.x()) < 0.9) ? Eigen::Vector3d::UnitX()
                                                     : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d n1 = dir.cross(seed).normalized();
    const Eigen::Vector3d n2 = dir.cross(n1).normalized();

    auto spin_along = [&](const Eigen::Vector3d& n) -> Eigen::MatrixXcd {
        return n.x() * s.sx + n.y() * s.sy + n.z() * s.sz;
    };
    const Eigen::MatrixXcd s1 = spin_along(n1);
    const Eigen::MatrixXcd s2 = spin_along(n2);

    auto cov = [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        return 0.5 * ((rho_atom * (a * b + b * a)).trace().real()) - expval(a) * expval(b);
    };
    const double g11 = cov(s1, s1);
    const double g22 = cov(s2, s2);
    const double g12 = cov(s1, s2);
    const double min_var = 0.5 * (g11 + g22) - std::hypot(0.5 * (g11 - g22), g12);
    return 4.0 * min_var / n_atoms;
}

inline double spin_squeezing(const DensityMatrix& rho, int n_atoms) {
    if (rho.dim_atom != n_atoms + 1) throw std::invalid_argument("spin_squeezing: atom dimension mismatch");
    Eigen::MatrixXcd rho_atom = Eigen::MatrixXcd::Zero(rho.dim_atom, rho.dim_atom);
    for (int ma = 0; ma < rho.dim_atom; ++ma) {
        for (int mb = 0; mb < rho.dim_atom; ++mb) {
            rho_atom(ma, mb) =
                rho.mat.block(ma * rho.dim_field, mb * rho.dim_field, rho.dim_field, rho.dim_field)
                    .trace();
        }
    }
    return spin_squeezing_from_atom(rho_atom, n_atoms);
}

// Reduced atomic thermal state accumulated level by level; avoids materializing the
// full product-basis density matrix (needed at N = 32).
inline Eigen::MatrixXd thermal_atom_density(const EigenDecomposition& dec, const ModelParams& p,
                                            double temperature, double weight_cut = 1e-12) {
    if (dec.basis != BasisTag::Dcs) {
        throw std::invalid_argument("thermal_atom_density: DCS decomposition required");
    }
    const GibbsState g = gibbs_state(dec, temperature, weight_cut);
    Eigen::MatrixXd rho_atom = Eigen::MatrixXd::Zero(p.n_atoms + 1, p.n_atoms + 1);
    double captured = 0.0;
    int n_trunc = -1;
    for (int n = 0; n < g.retained; ++n) {
        const auto s = dcs_to_fock_product(dec.vectors.col(n), p, dec.truncation, n_trunc);
        n_trunc = s.n_trunc;
        rho_atom += g.weights(n) * (s.grid * s.grid.transpose());
        captured += g.weights(n) * s.captured_norm;
    }
    rho_atom /= captured;  // recorded truncation deficit, renormalized explicitly
    return rho_atom;
}

}  // namespace dsm
