#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>

#include "cimdet/errors.hpp"

namespace cimdet {

// Square M-QAM on the odd-integer lattice. Per real dimension the levels are
// {-(L-1), ..., -1, +1, ..., L-1} with L = sqrt(M); omega = L - 1 is the
// largest level. Bits are mapped per dimension with a reflected Gray code, so
// adjacent levels differ in exactly one bit.
class QamConstellation {
public:
    static QamConstellation from_order(int m) {
        switch (m) {
            case 4: return QamConstellation(m, 2);
            case 16: return QamConstellation(m, 4);
            case 64: return QamConstellation(m, 8);
            case 256: return QamConstellation(m, 16);
            default: throw ConfigError("unsupported QAM order " + std::to_string(m));
        }
    }

    int order() const { return order_; }
    int levels_per_dim() const { return levels_; }
    int omega() const { return levels_ - 1; }
    int bits_per_dim() const { return bits_per_dim_; }
    int bits_per_symbol() const { return 2 * bits_per_dim_; }

    double level(int idx) const { return static_cast<double>(2 * idx - (levels_ - 1)); }

    bool is_level(double v) const {
        const double r = std::round(v);
        if (r != v) return false;
        const long l = static_cast<long>(r);
        return (l % 2 != 0) && l >= -omega() && l <= omega();
    }

    int level_index(double v) const {
        if (!is_level(v)) throw SymbolError("value is not a constellation level");
        return (static_cast<int>(v) + levels_ - 1) / 2;
    }

    // Nearest level; exact midpoints resolve toward the larger level.
    double nearest_level(double v) const {
        int idx = static_cast<int>(std::floor((v + levels_ - 1) / 2.0 + 0.5));
        idx = std::clamp(idx, 0, levels_ - 1);
        return level(idx);
    }

    // Mean level energy per real dimension, e.g. 5 for 16-QAM.
    double dim_energy() const {
        double s = 0.0;
        for (int i = 0; i < levels_; ++i) s += level(i) * level(i);
        return s / levels_;
    }

    // Mean complex symbol energy, e.g. 10 for 16-QAM.
    double symbol_energy() const { return 2.0 * dim_energy(); }

    std::uint32_t gray_code(int idx) const { return static_cast<std::uint32_t>(idx ^ (idx >> 1)); }

private:
    QamConstellation(int order, int levels)
        : order_(order), levels_(levels), bits_per_dim_(std::countr_zero(static_cast<unsigned>(levels))) {}

    int order_;
    int levels_;
    int bits_per_dim_;
};

// Hamming distance between Gray-coded bit labels of two vectors on the real
// lattice (per-dimension labels; a complex symbol spans two dimensions).
inline long bit_error_count(std::span<const double> truth, std::span<const double> est,
                            const QamConstellation& c) {
    if (truth.size() != est.size()) throw DimensionError("bit_error_count: length mismatch");
    long errors = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const std::uint32_t gt = c.gray_code(c.level_index(truth[i]));
        const std::uint32_t ge = c.gray_code(c.level_index(est[i]));
        errors += std::popcount(gt ^ ge);
    }
    return errors;
}

}  // namespace cimdet
