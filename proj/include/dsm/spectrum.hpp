// spectrum.hpp — eigendecomposition with truncation-escalation convergence control
#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsm/common.hpp"
#include "dsm/hamiltonian.hpp"
#include "dsm/operators.hpp"
#include "dsm/params.hpp"

namespace dsm {

struct EigenDecomposition {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // orthonormal columns, in the tagged basis
    BasisTag basis{BasisTag::Dcs};
    double residual_bound{0.0};  // max ||H v - E v||_inf over sampled columns
    int truncation{0};
    std::uint64_t params_fingerprint{0};

    int dimension() const { return static_cast<int>(values.size()); }

    double orthonormality_defect() const {
        const auto& v = vectors;
        return (v.transpose() * v - Eigen::MatrixXd::Identity(v.cols(), v.cols()))
            .cwiseAbs()
            .maxCoeff();
    }
};

// Count of dense eigensolves performed in this process (cache-hit accounting).
inline std::atomic<long>& eigendecompose_count() {
    static std::atomic<long> count{0};
    return count;
}

struct EigendecomposeOptions {
    // Residual verification on all columns up to this dimension, sampled above it.
    int full_residual_dim = 1200;
    int residual_samples = 32;
};

inline EigenDecomposition eigendecompose(const SymmetricMatrix& h,
                                         const EigendecomposeOptions& opts = {}) {
    if (h.mat.rows() != h.mat.cols()) throw std::invalid_argument("eigendecompose: matrix not square");
    if (!h.mat.allFinite()) throw std::invalid_argument("eigendecompose: non-finite entries");
    if (h.symmetry_defect() > 1e-10 * std::max(1.0, h.mat.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("eigendecompose: matrix not symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.mat);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("eigendecompose: solver failed, matrix fingerprint " +
                               std::to_string(h.fingerprint));
    }
    eigendecompose_count()++;

    EigenDecomposition dec;
    dec.values = solver.eigenvalues();
    dec.vectors = solver.eigenvectors();
    dec.basis = h.basis;
    dec.params_fingerprint = h.fingerprint;

    // Deterministic sign convention: first component above threshold is positive.
    const int n = dec.dimension();
    for (int c = 0; c < n; ++c) {
        auto col = dec.vectors.col(c);
        const double thresh = 1e-10 * col.cwiseAbs().maxCoeff();
        for (int r = 0; r < n; ++r) {
            if (std::abs(col(r)) > thresh) {
                if (col(r) < 0.0) dec.vectors.col(c) = -col;
                break;
            }
        }
    }

    // Residual bound, full up to a size limit, sampled (including extremes) beyond it.
    double res = 0.0;
    auto column_residual = [&](int c) {
        return (h.mat * dec.vectors.col(c) - dec.values(c) * dec.vectors.col(c))
            .cwiseAbs()
            .maxCoeff();
    };
    if (n <= opts.full_residual_dim) {
        res = (h.mat * dec.vectors - dec.vectors * dec.values.asDiagonal()).cwiseAbs().maxCoeff();
    } else {
        const int samples = std::min(opts.residual_samples, n);
        for (int s = 0; s < samples; ++s) {
            const int c = static_cast<int>(static_cast<long>(s) * (n - 1) / std::max(1, samples - 1));
            res = std::max(res, column_residual(c));
        }
    }
    dec.residual_bound = res;

    const double scale = std::max(1.0, dec.values.cwiseAbs().maxCoeff());
    if (res > 1e-8 * scale) {
        throw ConvergenceError("eigendecompose: residual bound " + std::to_string(res) +
                               " exceeds tolerance, matrix fingerprint " +
                               std::to_string(h.fingerprint));
    }
    return dec;
}

// Pluggable persistence for decompositions, keyed by content hash (cli implements it).
class SpectrumStore {
public:
    virtual ~SpectrumStore() = default;
    virtual std::optional<EigenDecomposition> load(std::uint64_t key) = 0;
    virtual void store(std::uint64_t key, const EigenDecomposition& dec) = 0;
};

inline std::uint64_t decomposition_key(const ModelParams& p, BasisTag tag, int trunc) {
    return detail::matrix_fingerprint(p, tag, trunc);
}

struct ConvergedSpectrum {
    EigenDecomposition decomposition;
    int certified_k_trunc{0};        // smaller truncation of the certified pair
    double achieved_rel_error{0.0};  // eigenvalue change between the certified pair
    double ground_photon_change{0.0};  // observable-stability certificate
};

struct ConvergenceOptions {
    std::vector<int> schedule{6, 12, 25, 50, 75, 100};
    SpectrumStore* store{nullptr};
    bool self_test_assembly{true};
};

// Escalate K_tr through the schedule until the lowest n_levels eigenvalues change by
// less than rel_tol between successive truncations. Returns the decomposition at the
// larger truncation of the first certified pair (its values carry the certificate).
inline ConvergedSpectrum converged_spectrum(const ModelParams& p, int n_levels, double rel_tol,
                                            const ConvergenceOptions& opts = {}) {
    p.validate();
    if (!(rel_tol > 0.0)) throw std::invalid_argument("converged_spectrum: rel_tol must be > 0");
    if (n_levels < 1) throw std::invalid_argument("converged_spectrum: n_levels must be >= 1");

    auto decomposition_at = [&](int k) {
        const auto key = decomposition_key(p, BasisTag::Dcs, k);
        if (opts.store) {
            if (auto hit = opts.store->load(key)) return *hit;
        }
        auto dec = eigendecompose(build_dcs_hamiltonian(p, k, opts.self_test_assembly));
        dec.truncation = k;
        if (opts.store) opts.store->store(key, dec);
        return dec;
    };

    auto ground_photon = [&](const EigenDecomposition& dec, int k) {
        const DcsBasis basis(p.n_atoms, k);
        const auto npn = photon_number_matrix(basis, p);
        const auto gs = dec.vectors.col(0);
        return gs.dot(npn.mat * gs);
    };

    std::optional<EigenDecomposition> prev;
    int prev_k = -1;
    for (int k : opts.schedule) {
        auto cur = decomposition_at(k);
        if (prev) {
            const int levels = std::min<int>(n_levels, std::min(prev->dimension(), cur.dimension()));
            double err = 0.0;
            for (int i = 0; i < levels; ++i) {
                err = std::max(err, std::abs(cur.values(i) - prev->values(i)) /
                                        std::max(1.0, std::abs(cur.values(i))));
            }
            if (err < rel_tol) {
                ConvergedSpectrum result;
                result.achieved_rel_error = err;
                result.certified_k_trunc = prev_k;
                result.ground_photon_change =
                    std::abs(ground_photon(cur, k) - ground_photon(*prev, prev_k));
                result.decomposition = std::move(cur);
                return result;
            }
        }
        prev = std::move(cur);
        prev_k = k;
    }
    throw ConvergenceError("converged_spectrum: truncation schedule exhausted without convergence");
}

}  // namespace dsm
