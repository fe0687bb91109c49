// operators.hpp — field and atomic operators as dense matrices in the DCS basis
#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "dsm/basis.hpp"
#include "dsm/hamiltonian.hpp"
#include "dsm/overlap.hpp"
#include "dsm/params.hpp"

namespace dsm {

// a†a in the displaced basis: block-diagonal in m, tridiagonal in k.
// With the adjacent-basis overlap sign convention used by signed_overlap the
// displaced mode is A = a - g_m, so a†a = A†A + g_m (A + A†) + g_m^2:
// (k + g_m^2) on the diagonal, +g_m sqrt(k+1) and +g_m sqrt(k) off it.
inline SymmetricMatrix photon_number_matrix(const DcsBasis& basis, const ModelParams& p) {
    Eigen::MatrixXd n = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
    for (int mi = 0; mi <= basis.n_atoms(); ++mi) {
        const double gm = displacement_amplitude(basis.m_of(mi), p);
        for (int k = 0; k <= basis.k_trunc(); ++k) {
            n(basis.flat(mi, k), basis.flat(mi, k)) = k + gm * gm;
            if (k + 1 <= basis.k_trunc()) {
                const double v = gm * std::sqrt(k + 1.0);
                n(basis.flat(mi, k + 1), basis.flat(mi, k)) = v;
                n(basis.flat(mi, k), basis.flat(mi, k + 1)) = v;
            }
        }
    }
    return SymmetricMatrix{std::move(n), BasisTag::Dcs,
                           detail::matrix_fingerprint(p, BasisTag::Dcs, basis.k_trunc()) ^ 0x4eull};
}

// a† + a = A† + A + 2 g_m in the displaced basis: block-diagonal in m,
// sqrt(k+1)/sqrt(k) on the off-diagonals and +2 g_m on the diagonal.
inline SymmetricMatrix quadrature_matrix(const DcsBasis& basis, const ModelParams& p) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
    for (int mi = 0; mi <= basis.n_atoms(); ++mi) {
        const double gm = displacement_amplitude(basis.m_of(mi), p);
        for (int k = 0; k <= basis.k_trunc(); ++k) {
            x(basis.flat(mi, k), basis.flat(mi, k)) = 2.0 * gm;
            if (k + 1 <= basis.k_trunc()) {
                const double v = std::sqrt(k + 1.0);
                x(basis.flat(mi, k + 1), basis.flat(mi, k)) = v;
                x(basis.flat(mi, k), basis.flat(mi, k + 1)) = v;
            }
        }
    }
    return SymmetricMatrix{std::move(x), BasisTag::Dcs,
                           detail::matrix_fingerprint(p, BasisTag::Dcs, basis.k_trunc()) ^ 0x58ull};
}

// Collective atomic quadrature (J+ + J-)/sqrt(N) in the displaced basis.
// Couples m to m±1, so field factors pick up the adjacent-basis signed overlaps.
inline SymmetricMatrix atomic_quadrature_matrix(const DcsBasis& basis, const ModelParams& p) {
    const double j = p.j();
    const double norm = 1.0 / std::sqrt(static_cast<double>(p.n_atoms));
    const Eigen::MatrixXd d = displaced_overlap_matrix_stable(displacement_step(p), basis.k_trunc());

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
    for (int mi = 0; mi + 1 <= basis.n_atoms(); ++mi) {
        const double jp = j_plus(j, basis.m_of(mi));
        for (int k = 0; k <= basis.k_trunc(); ++k) {
            for (int l = 0; l <= basis.k_trunc(); ++l) {
                const double v =
                    norm * jp * signed_overlap(l, k, OverlapDirection::LowerToUpper, d);
                x(basis.flat(mi + 1, l), basis.flat(mi, k)) = v;
                x(basis.flat(mi, k), basis.flat(mi + 1, l)) = v;
            }
        }
    }
    return SymmetricMatrix{std::move(x), BasisTag::Dcs,
                           detail::matrix_fingerprint(p, BasisTag::Dcs, basis.k_trunc()) ^ 0x4aull};
}

// Fock-product-basis counterparts, used by oracle paths and frame-invariance checks.
inline Eigen::MatrixXd fock_photon_number(const FockBasis& basis) {
    Eigen::MatrixXd n = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
    for (int mi = 0; mi <= basis.n_atoms(); ++mi) {
        for (int fn = 0; fn <= basis.n_trunc(); ++fn) {
            n(basis.flat(mi, fn), basis.flat(mi, fn)) = fn;
        }
    }
    return n;
}

inline Eigen::MatrixXd fock_quadrature(const FockBasis& basis) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
    for (int mi = 0; mi <= basis.n_atoms(); ++mi) {
        for (int fn = 0; fn + 1 <= basis.n_trunc(); ++fn) {
            const double v = std::sqrt(fn + 1.0);
            x(basis.flat(mi, fn + 1), basis.flat(mi, fn)) = v;
            x(basis.flat(mi, fn), basis.flat(mi, fn + 1)) = v;
        }
    }
    return x;
}

}  // namespace dsm
