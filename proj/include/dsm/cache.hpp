// cache.hpp — advisory on-disk cache for eigendecompositions
//
// Blob layout (little-endian, all fields 8 bytes unless noted):
//   magic "DSMCACH1" | key | payload hash | basis tag | truncation |
//   params fingerprint | residual bound | rows | cols |
//   values (rows doubles) | vectors (rows*cols doubles, column-major)
// The payload hash covers everything after the hash field. Corrupted or
// mismatched blobs are treated as misses; deleting the directory is always safe.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "dsm/common.hpp"
#include "dsm/spectrum.hpp"

namespace dsm {

class DecompositionCache : public SpectrumStore {
public:
    explicit DecompositionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !writable_probe()) {
            degraded_ = true;
            std::fprintf(stderr, "warning: cache directory '%s' not writable, caching disabled\n",
                         dir_.string().c_str());
        }
    }

    bool degraded() const { return degraded_; }
    long hits() const { return hits_; }
    long misses() const { return misses_; }

    std::optional<EigenDecomposition> load(std::uint64_t key) override {
        if (degraded_) return std::nullopt;
        const auto path = blob_path(key);
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            ++misses_;
            return std::nullopt;
        }
        auto dec = read_blob(in, key);
        if (!dec) {
            ++misses_;
            std::fprintf(stderr, "warning: cache blob '%s' corrupt, recomputing\n",
                         path.string().c_str());
            in.close();
            std::error_code ec;
            std::filesystem::remove(path, ec);
            return std::nullopt;
        }
        ++hits_;
        return dec;
    }

    void store(std::uint64_t key, const EigenDecomposition& dec) override {
        if (degraded_) return;
        const auto tmp = blob_path(key).string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) return;
            write_blob(out, key, dec);
            if (!out) return;
        }
        std::error_code ec;
        std::filesystem::rename(tmp, blob_path(key), ec);
    }

private:
    std::filesystem::path blob_path(std::uint64_t key) const {
        char name[32];
        std::snprintf(name, sizeof name, "%016llx.dec", static_cast<unsigned long long>(key));
        return dir_ / name;
    }

    bool writable_probe() const {
        const auto probe = dir_ / ".probe";
        std::ofstream out(probe, std::ios::binary | std::ios::trunc);
        if (!out) return false;
        out << "x";
        out.close();
        std::error_code ec;
        std::filesystem::remove(probe, ec);
        return true;
    }

    static constexpr std::uint64_t kMagic = 0x3148434143'4d5344ull;  // "DSMCACH1"

    static void write_blob(std::ostream& out, std::uint64_t key, const EigenDecomposition& dec) {
        const std::int64_t rows = dec.values.size();
        const std::int64_t cols = dec.vectors.cols();
        std::vector<std::uint64_t> header = {
            static_cast<std::uint64_t>(dec.basis == BasisTag::Dcs ? 1 : 2),
            static_cast<std::uint64_t>(dec.truncation),
            dec.params_fingerprint,
        };
        Fnv1a h;
        for (auto v : header) h.feed_bytes(&v, sizeof v);
        h.feed(dec.residual_bound);
        h.feed(rows);
        h.feed(cols);
        h.feed_bytes(dec.values.data(), sizeof(double) * rows);
        h.feed_bytes(dec.vectors.data(), sizeof(double) * rows * cols);
        const std::uint64_t payload_hash = h.value();

        auto put = [&](const void* p, std::size_t n) { out.write(static_cast<const char*>(p), n); };
        put(&kMagic, 8);
        put(&key, 8);
        put(&payload_hash, 8);
        for (auto v : header) put(&v, 8);
        put(&dec.residual_bound, 8);
        put(&rows, 8);
        put(&cols, 8);
        put(dec.values.data(), sizeof(double) * rows);
        put(dec.vectors.data(), sizeof(double) * rows * cols);
    }

    static std::optional<EigenDecomposition> read_blob(std::istream& in, std::uint64_t key) {
        auto get = [&](void* p, std::size_t n) { in.read(static_cast<char*>(p), n); return bool(in); };
        std::uint64_t magic = 0, file_key = 0, payload_hash = 0, tag = 0;
        std::int64_t trunc = 0, rows = 0, cols = 0;
        std::uint64_t pfp = 0;
        double residual = 0.0;
        if (!get(&magic, 8) || magic != kMagic) return std::nullopt;
        if (!get(&file_key, 8) || file_key != key) return std::nullopt;
        if (!get(&payload_hash, 8)) return std::nullopt;
        if (!get(&tag, 8) || !get(&trunc, 8) || !get(&pfp, 8) || !get(&residual, 8) ||
            !get(&rows, 8) || !get(&cols, 8)) {
            return std::nullopt;
        }
        if (rows <= 0 || cols <= 0 || rows > (1 << 20) || cols > (1 << 20)) return std::nullopt;

        EigenDecomposition dec;
        dec.basis = (tag == 1) ? BasisTag::Dcs : BasisTag::FockProduct;
        dec.truncation = static_cast<int>(trunc);
        dec.params_fingerprint = pfp;
        dec.residual_bound = residual;
        dec.values.resize(rows);
        dec.vectors.resize(rows, cols);
        if (!get(dec.values.data(), sizeof(double) * rows)) return std::nullopt;
        if (!get(dec.vectors.data(), sizeof(double) * rows * cols)) return std::nullopt;

        Fnv1a h;
        std::uint64_t hdr[3] = {tag, static_cast<std::uint64_t>(trunc), pfp};
        for (auto v : hdr) h.feed_bytes(&v, sizeof v);
        h.feed(residual);
        h.feed(rows);
        h.feed(cols);
        h.feed_bytes(dec.values.data(), sizeof(double) * rows);
        h.feed_bytes(dec.vectors.data(), sizeof(double) * rows * cols);
        if (h.value() != payload_hash) return std::nullopt;
        return dec;
    }

    std::filesystem::path dir_;
    bool degraded_{false};
    long hits_{0};
    long misses_{0};
};

}  // namespace dsm
