// meanfield.hpp — closed-form and landscape-based mean-field analysis of the SPT
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsm/common.hpp"
#include "dsm/params.hpp"

namespace dsm {

struct CriticalPoint {
    double lambda_c{0.0};
    double temperature{0.0};
    bool defined{true};  // false when the bracket under the square root is negative
    ModelParams params;
};

// Zero-temperature critical coupling lambda_c = sqrt(Delta (omega - U/2) / 4).
inline CriticalPoint critical_coupling(const ModelParams& p) {
    p.validate();
    CriticalPoint c;
    c.params = p;
    c.temperature = 0.0;
    const double bracket = p.omega - 0.5 * p.stark_u;
    if (bracket < 0.0) {
        c.defined = false;
        c.lambda_c = 0.0;
        return c;
    }
    c.lambda_c = std::sqrt(0.25 * p.delta * bracket);
    return c;
}

// Finite-temperature critical coupling lambda_c(T) = sqrt((Delta/4)[omega/tanh(Delta/2T) - U/2]).
// T = 0 uses the tanh -> 1 limit and reduces to the zero-temperature form.
inline CriticalPoint critical_coupling_thermal(const ModelParams& p, double temperature) {
    p.validate();
    if (temperature < 0.0) throw std::invalid_argument("critical_coupling_thermal: T must be >= 0");
    if (temperature == 0.0) {
        auto c = critical_coupling(p);
        return c;
    }
    CriticalPoint c;
    c.params = p;
    c.temperature = temperature;
    const double th = std::tanh(0.5 * p.delta / temperature);
    const double bracket = p.omega / th - 0.5 * p.stark_u;
    if (bracket < 0.0) {
        c.defined = false;
        c.lambda_c = 0.0;
        return c;
    }
    c.lambda_c = std::sqrt(0.25 * p.delta * bracket);
    return c;
}

// Zero-temperature vacuum energy per atom as a function of the order parameter
// phi = beta^2 / N in [0, 1]:
//   E_G/N = Delta (phi - 1/2) - 4 lambda^2 phi (1 - phi) / (omega + U (phi - 1/2)).
// The interaction numerator carries the first power of phi; this is the form whose
// curvature criterion at phi = 0 reproduces the closed-form critical coupling and the
// standard Dicke limit at U = 0.
inline double ground_energy_density(double phi, const ModelParams& p) {
    p.validate();
    if (phi < 0.0 || phi > 1.0) throw std::invalid_argument("ground_energy_density: phi outside [0,1]");
    const double denom = p.omega + p.stark_u * (phi - 0.5);
    if (std::abs(denom) < 1e-14) {
        throw UndefinedQuantityError("ground_energy_density: singular denominator at phi = " +
                                     std::to_string(phi));
    }
    return p.delta * (phi - 0.5) - 4.0 * p.lambda * p.lambda * phi * (1.0 - phi) / denom;
}

// Finite-temperature free energy per atom:
//   f(alpha) = omega alpha^2 - T ln[2 cosh(phi(alpha)/(2T))],
//   phi(alpha) = sqrt((Delta + U alpha^2)^2 + (4 lambda alpha)^2).
inline double free_energy_density(double alpha, const ModelParams& p, double temperature) {
    p.validate();
    if (!(temperature > 0.0)) throw std::invalid_argument("free_energy_density: T must be > 0");
    const double a2 = alpha * alpha;
    const double gap = std::hypot(p.delta + p.stark_u * a2, 4.0 * p.lambda * alpha);
    const double z = 0.5 * gap / temperature;
    // ln(2 cosh z) = z + log1p(e^{-2z}), stable for large z
    return p.omega * a2 - temperature * (z + std::log1p(std::exp(-2.0 * z)));
}

struct OrderParameterResult {
    double alpha{0.0};
    double free_energy{0.0};
    std::vector<double> landscape_alpha;  // filled only on bracket failure diagnostics
    std::vector<double> landscape_value;
};

// Global minimizer of f(alpha) over [0, alpha_max]: 512-point coarse scan followed by
// golden-section refinement to 1e-10. Returns 0 in the normal phase.
inline OrderParameterResult order_parameter(const ModelParams& p, double temperature) {
    p.validate();
    if (!(temperature > 0.0)) throw std::invalid_argument("order_parameter: T must be > 0");

    const double alpha_max = 2.0 * std::sqrt(p.lambda * p.lambda / (p.omega * p.omega) + 1.0);
    const int scan_points = 512;

    auto f = [&](double a) { return free_energy_density(a, p, temperature); };

    int best = 0;
    double best_val = f(0.0);
    std::vector<double> grid(scan_points + 1), val(scan_points + 1);
    for (int i = 0; i <= scan_points; ++i) {
        grid[i] = alpha_max * i / scan_points;
        val[i] = f(grid[i]);
        if (val[i] < best_val) {
            best_val = val[i];
            best = i;
        }
    }
    if (best == scan_points) {
        OrderParameterResult r;
        r.landscape_alpha = grid;
        r.landscape_value = val;
        throw UndefinedQuantityError("order_parameter: minimum at scan boundary alpha_max = " +
                                     std::to_string(alpha_max));
    }

    double lo = grid[std::max(0, best - 1)];
    double hi = grid[std::min(scan_points, best + 1)];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > 1e-10) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = f(x2);
        }
    }
    OrderParameterResult r;
    r.alpha = 0.5 * (lo + hi);
    // Snap to the symmetric phase when the refined minimum is indistinguishable from 0.
    if (r.alpha < 1e-6 && f(0.0) <= f(r.alpha) + 1e-14) r.alpha = 0.0;
    r.free_energy = f(r.alpha);
    return r;
}

}  // namespace dsm
