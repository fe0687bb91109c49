// overlap.hpp — displaced-Fock overlap machinery
//
// Sign convention, fixed repository-wide: the displacement generator is
// D(g) = exp(g a - g a†), so |k>_{A_m} = D(g_m)† |k> with g_m = 2 lambda m / (omega sqrt(N)).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dsm/common.hpp"
#include "dsm/params.hpp"

namespace dsm {

// g_m = 2 lambda m / (omega sqrt(N))
inline double displacement_amplitude(double m, const ModelParams& p) {
    p.validate();
    const double j = p.j();
    if (std::abs(m) > j + 1e-12) throw std::invalid_argument("displacement_amplitude: |m| > N/2");
    const double frac = m - std::round(m - j) - j;  // m and j must differ by an integer
    if (std::abs(frac) > 1e-9) throw std::invalid_argument("displacement_amplitude: m - N/2 not an integer");
    return 2.0 * p.lambda * m / (p.omega * std::sqrt(static_cast<double>(p.n_atoms)));
}

// Adjacent-level displacement step G = g_m - g_{m-1} = 2 lambda / (omega sqrt(N))
inline double displacement_step(const ModelParams& p) {
    p.validate();
    return 2.0 * p.lambda / (p.omega * std::sqrt(static_cast<double>(p.n_atoms)));
}

// D_{l,k} = e^{-G^2/2} sum_r (-1)^r sqrt(l! k!) G^{l+k-2r} / ((l-r)! (k-r)! r!).
// Factorials accumulate in log space and are exponentiated once per term.
inline Eigen::MatrixXd displaced_overlap_matrix(double step, int k_trunc) {
    if (!std::isfinite(step)) throw std::invalid_argument("displaced_overlap_matrix: step must be finite");
    if (k_trunc < 0) throw std::invalid_argument("displaced_overlap_matrix: k_trunc must be >= 0");

    const int dim = k_trunc + 1;
    const double g2 = 0.5 * step * step;
    const double log_abs_g = (step == 0.0) ? 0.0 : std::log(std::abs(step));

    Eigen::MatrixXd d(dim, dim);
    for (int l = 0; l < dim; ++l) {
        for (int k = l; k < dim; ++k) {
            double sum = 0.0;
            for (int r = 0; r <= l; ++r) {
                const int p = l + k - 2 * r;
                if (step == 0.0 && p != 0) continue;
                double log_term = 0.5 * (log_factorial(l) + log_factorial(k)) -
                                  log_factorial(l - r) - log_factorial(k - r) - log_factorial(r) +
                                  p * log_abs_g - g2;
                if (log_term > 700.0) {
                    throw std::overflow_error("displaced_overlap_matrix: term exceeds double range");
                }
                double sign = (r % 2 == 0) ? 1.0 : -1.0;
                if (step < 0.0 && p % 2 != 0) sign = -sign;
                sum += sign * std::exp(log_term);
            }
            d(l, k) = sum;
            d(k, l) = sum;  // the defining sum is symmetric in (l, k)
        }
    }
    return d;
}

// Direction of the adjacent-basis inner product. LowerToUpper is
// _{A_n}<l|k>_{A_{n-1}} = (-1)^l D_{l,k}; UpperToLower is _{A_n}<l|k>_{A_{n+1}} = (-1)^k D_{l,k}.
enum class OverlapDirection { LowerToUpper, UpperToLower };

inline double signed_overlap(int l, int k, OverlapDirection dir, const Eigen::MatrixXd& d) {
    if (l < 0 || k < 0 || l >= d.rows() || k >= d.cols()) {
        throw std::out_of_range("signed_overlap: index outside truncation");
    }
    const int parity_index = (dir == OverlapDirection::LowerToUpper) ? l : k;
    return (parity_index % 2 == 0) ? d(l, k) : -d(l, k);
}

// <l| exp(g a - g a†) |k>, stable for large |g| and large indices.
// Evaluated through the associated Laguerre recurrence with on-the-fly rescaling,
// so no alternating-sum cancellation occurs.
inline double displacement_matrix_entry(int l, int k, double g) {
    if (l < 0 || k < 0) throw std::out_of_range("displacement_matrix_entry: negative index");
    if (g == 0.0) return (l == k) ? 1.0 : 0.0;

    // exp(g a - g a†) is the standard displacement with amplitude alpha = -g
    const double alpha = -g;
    const double x = alpha * alpha;
    const int lo = std::min(l, k);
    const int hi = std::max(l, k);
    const int diff = hi - lo;

    // prefactor sign: alpha^(l-k) for l >= k, (-alpha)^(k-l) otherwise
    const double base = (l >= k) ? alpha : -alpha;
    double sign = (diff % 2 == 1 && base < 0.0) ? -1.0 : 1.0;

    // scaled recurrence for L_lo^{(diff)}(x)
    double lm1 = 0.0;
    double lcur = 1.0;
    double log_scale = 0.0;
    for (int r = 0; r < lo; ++r) {
        const double lnext = ((2.0 * r + 1.0 + diff - x) * lcur - (r + diff) * lm1) / (r + 1.0);
        lm1 = lcur;
        lcur = lnext;
        const double mag = std::max(std::abs(lcur), std::abs(lm1));
        if (mag > 1e250) {
            lcur /= 1e250;
            lm1 /= 1e250;
            log_scale += std::log(1e250);
        }
    }
    if (lcur == 0.0) return 0.0;
    if (lcur < 0.0) sign = -sign;

    const double log_mag = 0.5 * (log_factorial(lo) - log_factorial(hi)) +
                           diff * std::log(std::abs(alpha)) - 0.5 * x +
                           std::log(std::abs(lcur)) + log_scale;
    if (log_mag > 700.0) throw std::overflow_error("displacement_matrix_entry: value exceeds double range");
    return sign * std::exp(log_mag);
}

// Dense block M(l, k) = <l| exp(g a - g a†) |k>, l = 0..rows-1, k = 0..cols-1.
inline Eigen::MatrixXd displacement_matrix(double g, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int l = 0; l < rows; ++l) {
        for (int k = 0; k < cols; ++k) {
            m(l, k) = displacement_matrix_entry(l, k, g);
        }
    }
    return m;
}

// Same matrix as displaced_overlap_matrix, evaluated through the stable recurrence
// kernel: D_{l,k} = (-1)^l <l| exp(G a - G a†) |k>. The alternating reference sum
// loses absolute accuracy once G * k_trunc gets large, the recurrence does not.
inline Eigen::MatrixXd displaced_overlap_matrix_stable(double step, int k_trunc) {
    if (!std::isfinite(step)) throw std::invalid_argument("displaced_overlap_matrix_stable: step must be finite");
    if (k_trunc < 0) throw std::invalid_argument("displaced_overlap_matrix_stable: k_trunc must be >= 0");
    Eigen::MatrixXd d(k_trunc + 1, k_trunc + 1);
    for (int l = 0; l <= k_trunc; ++l) {
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        for (int k = 0; k <= k_trunc; ++k) {
            d(l, k) = sign * displacement_matrix_entry(l, k, step);
        }
    }
    return d;
}

// Fock vacuum expanded in the displaced basis: c_k = <k|_{A} |0_F> = e^{-g^2/2} (-g)^k / sqrt(k!)
inline Eigen::VectorXd vacuum_in_displaced_basis(double g, int k_trunc) {
    if (!std::isfinite(g)) throw std::invalid_argument("vacuum_in_displaced_basis: g must be finite");
    if (k_trunc < 0) throw std::invalid_argument("vacuum_in_displaced_basis: k_trunc must be >= 0");
    Eigen::VectorXd c(k_trunc + 1);
    const double g2 = 0.5 * g * g;
    for (int k = 0; k <= k_trunc; ++k) {
        if (g == 0.0) {
            c(k) = (k == 0) ? 1.0 : 0.0;
            continue;
        }
        const double log_mag = k * std::log(std::abs(g)) - 0.5 * log_factorial(k) - g2;
        double sign = (k % 2 == 1 && -g < 0.0) ? -1.0 : 1.0;
        c(k) = sign * std::exp(log_mag);
    }
    return c;
}

}  // namespace dsm
