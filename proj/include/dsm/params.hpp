// params.hpp — physical parameters of the Dicke-Stark Hamiltonian
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "dsm/common.hpp"

namespace dsm {

// H = omega a†a + delta Jz + (2 lambda / sqrt(N)) (a† + a) Jx + (U/N) a†a Jz
struct ModelParams {
    int n_atoms{1};        // N >= 1
    double omega{1.0};     // field frequency, the energy unit
    double delta{1.0};     // qubit splitting
    double lambda{0.0};    // qubit-boson coupling, >= 0
    double stark_u{0.0};   // nonlinear Stark strength

    double j() const { return 0.5 * n_atoms; }

    void validate() const {
        if (n_atoms < 1) throw std::invalid_argument("ModelParams: n_atoms must be >= 1");
        if (!(omega > 0.0)) throw std::invalid_argument("ModelParams: omega must be > 0");
        if (lambda < 0.0) throw std::invalid_argument("ModelParams: lambda must be >= 0");
        if (!std::isfinite(omega) || !std::isfinite(delta) ||
            !std::isfinite(lambda) || !std::isfinite(stark_u)) {
            throw std::invalid_argument("ModelParams: parameters must be finite");
        }
    }

    // The zero-T mean-field critical coupling exists only when omega - U/2 > 0.
    bool meanfield_valid() const { return omega - 0.5 * stark_u > 0.0; }

    std::uint64_t fingerprint() const {
        Fnv1a h;
        h.feed(static_cast<std::int64_t>(n_atoms));
        h.feed(omega);
        h.feed(delta);
        h.feed(lambda);
        h.feed(stark_u);
        return h.value();
    }
};

}  // namespace dsm
