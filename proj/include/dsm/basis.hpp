// basis.hpp — flat index maps for the displaced-Fock (DCS) and plain Fock product bases
#pragma once

#include <stdexcept>
#include <utility>

namespace dsm {

// Atom-major layout shared by both bases: flat = m_index * (field_dim) + field_index,
// with m_index = 0..N mapping to spin projection m = m_index - N/2.

// Basis |j,m> ⊗ |k>_{A_m}, k = 0..k_trunc.
class DcsBasis {
public:
    DcsBasis(int n_atoms, int k_trunc) : n_atoms_(n_atoms), k_trunc_(k_trunc) {
        if (n_atoms < 1) throw std::invalid_argument("DcsBasis: n_atoms must be >= 1");
        if (k_trunc < 0) throw std::invalid_argument("DcsBasis: k_trunc must be >= 0");
    }

    int n_atoms() const { return n_atoms_; }
    int k_trunc() const { return k_trunc_; }
    int atom_dim() const { return n_atoms_ + 1; }
    int field_dim() const { return k_trunc_ + 1; }
    int dimension() const { return atom_dim() * field_dim(); }

    double m_of(int m_index) const { return m_index - 0.5 * n_atoms_; }

    int flat(int m_index, int k) const {
        check(m_index, k);
        return m_index * field_dim() + k;
    }
    std::pair<int, int> unflat(int idx) const {
        if (idx < 0 || idx >= dimension()) throw std::out_of_range("DcsBasis: flat index out of range");
        return {idx / field_dim(), idx % field_dim()};
    }

private:
    void check(int m_index, int k) const {
        if (m_index < 0 || m_index > n_atoms_) throw std::out_of_range("DcsBasis: m_index out of range");
        if (k < 0 || k > k_trunc_) throw std::out_of_range("DcsBasis: k out of range");
    }
    int n_atoms_;
    int k_trunc_;
};

// Basis |j,m> ⊗ |n_photon>, n = 0..n_trunc.
class FockBasis {
public:
    FockBasis(int n_atoms, int n_trunc) : n_atoms_(n_atoms), n_trunc_(n_trunc) {
        if (n_atoms < 1) throw std::invalid_argument("FockBasis: n_atoms must be >= 1");
        if (n_trunc < 0) throw std::invalid_argument("FockBasis: n_trunc must be >= 0");
    }

    int n_atoms() const { return n_atoms_; }
    int n_trunc() const { return n_trunc_; }
    int atom_dim() const { return n_atoms_ + 1; }
    int field_dim() const { return n_trunc_ + 1; }
    int dimension() const { return atom_dim() * field_dim(); }

    double m_of(int m_index) const { return m_index - 0.5 * n_atoms_; }

    int flat(int m_index, int n) const {
        if (m_index < 0 || m_index > n_atoms_) throw std::out_of_range("FockBasis: m_index out of range");
        if (n < 0 || n > n_trunc_) throw std::out_of_range("FockBasis: n out of range");
        return m_index * field_dim() + n;
    }
    std::pair<int, int> unflat(int idx) const {
        if (idx < 0 || idx >= dimension()) throw std::out_of_range("FockBasis: flat index out of range");
        return {idx / field_dim(), idx % field_dim()};
    }

private:
    int n_atoms_;
    int n_trunc_;
};

}  // namespace dsm
