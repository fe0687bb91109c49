// hamiltonian.hpp — Dicke-Stark Hamiltonian assembly in the DCS and Fock product bases
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "dsm/basis.hpp"
#include "dsm/common.hpp"
#include "dsm/overlap.hpp"
#include "dsm/params.hpp"

namespace dsm {

enum class BasisTag { Dcs, FockProduct };

struct SymmetricMatrix {
    Eigen::MatrixXd mat;
    BasisTag basis{BasisTag::Dcs};
    std::uint64_t fingerprint{0};

    int dimension() const { return static_cast<int>(mat.rows()); }

    double symmetry_defect() const {
        return (mat - mat.transpose()).cwiseAbs().maxCoeff();
    }
};

inline double j_plus(double j, double m) { return std::sqrt(j * (j + 1.0) - m * (m + 1.0)); }
inline double j_minus(double j, double m) { return std::sqrt(j * (j + 1.0) - m * (m - 1.0)); }

namespace detail {

inline std::uint64_t matrix_fingerprint(const ModelParams& p, BasisTag tag, int trunc) {
    Fnv1a h;
    h.feed(static_cast<std::int64_t>(p.fingerprint()));
    h.feed(static_cast<std::int64_t>(tag == BasisTag::Dcs ? 1 : 2));
    h.feed(static_cast<std::int64_t>(trunc));
    return h.value();
}

}  // namespace detail

// Rotated-frame Hamiltonian in the displaced basis {|j,m> |k>_{A_m}}.
//
// Production path assembles the diagonal plus the (m+1 <- m) blocks and mirrors
// the lower triangle; an independent assembly of the (m-1 <- m) blocks must agree
// with the mirrored entries within 1e-10 (the index bookkeeping is error-prone and
// Hermiticity is the strongest cheap check).
inline SymmetricMatrix build_dcs_hamiltonian(const ModelParams& p, int k_trunc,
                                             bool self_test = true) {
    p.validate();
    if (k_trunc < 0) throw std::invalid_argument("build_dcs_hamiltonian: k_trunc must be >= 0");

    const DcsBasis basis(p.n_atoms, k_trunc);
    const int kk = k_trunc;
    const double j = p.j();
    const double n = p.n_atoms;
    const double u2n = p.stark_u / (2.0 * n);

    // Overlaps are needed for ket indices up to k_trunc + 1 (the U-term photon hop).
    const Eigen::MatrixXd d = displaced_overlap_matrix_stable(displacement_step(p), k_trunc + 1);

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());

    for (int mi = 0; mi <= p.n_atoms; ++mi) {
        const double m = basis.m_of(mi);
        const double gm = displacement_amplitude(m, p);
        for (int k = 0; k <= kk; ++k) {
            h(basis.flat(mi, k), basis.flat(mi, k)) = p.omega * (k - gm * gm);
        }
    }

    auto upper_entry = [&](int mi, int l, int k) {
        // row (m+1, l), column (m, k); bra one displacement step above the ket
        const double m = basis.m_of(mi);
        const double gm = displacement_amplitude(m, p);
        const double jp = j_plus(j, m);
        const double bracket = 0.5 * p.delta + u2n * (k + gm * gm);
        double val = -bracket * signed_overlap(l, k, OverlapDirection::LowerToUpper, d);
        double hop = std::sqrt(k + 1.0) * signed_overlap(l, k + 1, OverlapDirection::LowerToUpper, d);
        if (k > 0) hop += std::sqrt(static_cast<double>(k)) *
                          signed_overlap(l, k - 1, OverlapDirection::LowerToUpper, d);
        val -= u2n * gm * hop;
        return jp * val;
    };

    for (int mi = 0; mi + 1 <= p.n_atoms; ++mi) {
        for (int k = 0; k <= kk; ++k) {
            for (int l = 0; l <= kk; ++l) {
                const double v = upper_entry(mi, l, k);
                h(basis.flat(mi + 1, l), basis.flat(mi, k)) = v;
                h(basis.flat(mi, k), basis.flat(mi + 1, l)) = v;
            }
        }
    }

    if (self_test) {
        // Independent assembly of the (m-1 <- m) blocks.
        double defect = 0.0;
        for (int mi = 1; mi <= p.n_atoms; ++mi) {
            const double m = basis.m_of(mi);
            const double gm = displacement_amplitude(m, p);
            const double jm = j_minus(j, m);
            for (int k = 0; k <= kk; ++k) {
                const double bracket = 0.5 * p.delta + u2n * (k + gm * gm);
                for (int l = 0; l <= kk; ++l) {
                    double val = -bracket * signed_overlap(l, k, OverlapDirection::UpperToLower, d);
                    double hop = std::sqrt(k + 1.0) *
                                 signed_overlap(l, k + 1, OverlapDirection::UpperToLower, d);
                    if (k > 0) hop += std::sqrt(static_cast<double>(k)) *
                                      signed_overlap(l, k - 1, OverlapDirection::UpperToLower, d);
                    val -= u2n * gm * hop;
                    val *= jm;
                    defect = std::max(defect, std::abs(val - h(basis.flat(mi - 1, l), basis.flat(mi, k))));
                }
            }
        }
        if (defect > 1e-10) {
            throw std::runtime_error("build_dcs_hamiltonian: triangle assemblies disagree, defect = " +
                                     std::to_string(defect));
        }
    }

    if (!h.allFinite()) throw std::overflow_error("build_dcs_hamiltonian: non-finite entries");

    return SymmetricMatrix{std::move(h), BasisTag::Dcs,
                           detail::matrix_fingerprint(p, BasisTag::Dcs, k_trunc)};
}

// Unrotated-frame Hamiltonian in the Fock product basis |j,m> |n>, used as the
// cross-validation oracle for the DCS assembly.
inline SymmetricMatrix build_dfs_hamiltonian(const ModelParams& p, int n_trunc) {
    p.validate();
    const FockBasis basis(p.n_atoms, n_trunc);
    const double j = p.j();
    const double coup = 2.0 * p.lambda / std::sqrt(static_cast<double>(p.n_atoms));

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
    for (int mi = 0; mi <= p.n_atoms; ++mi) {
        const double m = basis.m_of(mi);
        for (int fn = 0; fn <= n_trunc; ++fn) {
            h(basis.flat(mi, fn), basis.flat(mi, fn)) =
                p.omega * fn + p.delta * m + (p.stark_u / p.n_atoms) * fn * m;
        }
    }
    // (2 lambda / sqrt(N)) (a† + a) Jx, Jx = (J+ + J-)/2
    for (int mi = 0; mi + 1 <= p.n_atoms; ++mi) {
        const double m = basis.m_of(mi);
        const double half_jp = 0.5 * j_plus(j, m);
        for (int fn = 0; fn + 1 <= n_trunc; ++fn) {
            const double v = coup * std::sqrt(fn + 1.0) * half_jp;
            h(basis.flat(mi + 1, fn + 1), basis.flat(mi, fn)) = v;
            h(basis.flat(mi, fn), basis.flat(mi + 1, fn + 1)) = v;
            h(basis.flat(mi + 1, fn), basis.flat(mi, fn + 1)) = v;
            h(basis.flat(mi, fn + 1), basis.flat(mi + 1, fn)) = v;
        }
    }

    if (!h.allFinite()) throw std::overflow_error("build_dfs_hamiltonian: non-finite entries");

    return SymmetricMatrix{std::move(h), BasisTag::FockProduct,
                           detail::matrix_fingerprint(p, BasisTag::FockProduct, n_trunc)};
}

// Z2 parity exp(i pi (n + Jz + j)), diagonal with entries (-1)^(n + m + j) in the
// Fock product basis.
inline SymmetricMatrix parity_matrix(const FockBasis& basis) {
    Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
    for (int mi = 0; mi <= basis.n_atoms(); ++mi) {
        for (int fn = 0; fn <= basis.n_trunc(); ++fn) {
            const int idx = basis.flat(mi, fn);
            pi(idx, idx) = ((fn + mi) % 2 == 0) ? 1.0 : -1.0;  // m + j = m_index
        }
    }
    Fnv1a h;
    h.feed(std::int64_t{0x7061726974});  // tag
    h.feed(static_cast<std::int64_t>(basis.n_atoms()));
    h.feed(static_cast<std::int64_t>(basis.n_trunc()));
    return SymmetricMatrix{std::move(pi), BasisTag::FockProduct, h.value()};
}

}  // namespace dsm
