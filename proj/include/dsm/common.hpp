// common.hpp — shared error types, hashing, and small numeric helpers
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace dsm {

// Escalation schedules ran out, or an eigensolver failed to converge.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// A quantity whose defining denominator or direction is numerically undefined.
class UndefinedQuantityError : public std::runtime_error {
public:
    explicit UndefinedQuantityError(const std::string& what) : std::runtime_error(what) {}
};

class CacheError : public std::runtime_error {
public:
    explicit CacheError(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a 64-bit, used for parameter fingerprints and cache keys.
class Fnv1a {
public:
    void feed_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ull;
        }
    }
    void feed(double x) { feed_bytes(&x, sizeof x); }
    void feed(std::int64_t x) { feed_bytes(&x, sizeof x); }
    void feed(const std::string& s) { feed_bytes(s.data(), s.size()); }
    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_{0xcbf29ce484222325ull};
};

inline double log_factorial(int n) {
    return std::lgamma(static_cast<double>(n) + 1.0);
}

inline bool nearly_equal(double a, double b, double tol) {
    return std::abs(a - b) <= tol;
}

}  // namespace dsm
