#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "cimdet/constellation.hpp"
#include "cimdet/errors.hpp"
#include "cimdet/matrix.hpp"
#include "cimdet/rng.hpp"

namespace cimdet {

using cplx = std::complex<double>;

struct CMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<cplx> a;

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

    cplx& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    cplx operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

// Uplink instance in complex form: rx = channel * tx + noise. tx is the
// ground truth when known (empty for ingested observations), noise_var is
// the total noise variance per complex receive dimension.
struct ComplexMimoInstance {
    int nt = 0;
    int nr = 0;
    CMatrix channel;
    std::vector<cplx> tx;
    std::vector<cplx> rx;
    double noise_var = 0.0;
    QamConstellation constellation = QamConstellation::from_order(4);
};

// Real-expanded instance: channel is the 2Nr x 2Nt block matrix
// [[Re, -Im], [Im, Re]], vectors are stacked [Re; Im].
struct RealMimoInstance {
    int nt = 0;
    int nr = 0;
    Matrix channel;
    std::vector<double> rx;
    std::vector<double> tx;
    double noise_var = 0.0;
    QamConstellation constellation = QamConstellation::from_order(4);
};

inline RealMimoInstance real_expand(const ComplexMimoInstance& c) {
    RealMimoInstance r;
    r.nt = c.nt;
    r.nr = c.nr;
    r.noise_var = c.noise_var;
    r.constellation = c.constellation;
    r.channel = Matrix(2 * c.nr, 2 * c.nt);
    for (int i = 0; i < c.nr; ++i) {
        for (int j = 0; j < c.nt; ++j) {
            const cplx h = c.channel(i, j);
            r.channel(i, j) = h.real();
            r.channel(i, j + c.nt) = -h.imag();
            r.channel(i + c.nr, j) = h.imag();
            r.channel(i + c.nr, j + c.nt) = h.real();
        }
    }
    r.rx.resize(2 * c.nr);
    for (int i = 0; i < c.nr; ++i) {
        r.rx[i] = c.rx[i].real();
        r.rx[i + c.nr] = c.rx[i].imag();
    }
    if (!c.tx.empty()) {
        r.tx.resize(2 * c.nt);
        for (int j = 0; j < c.nt; ++j) {
            r.tx[j] = c.tx[j].real();
            r.tx[j + c.nt] = c.tx[j].imag();
        }
    }
    return r;
}

inline std::vector<cplx> to_complex_symbols(std::span<const double> x, int nt) {
    if (static_cast<int>(x.size()) != 2 * nt) throw DimensionError("to_complex_symbols: size mismatch");
    std::vector<cplx> out(nt);
    for (int j = 0; j < nt; ++j) out[j] = cplx(x[j], x[j + nt]);
    return out;
}

inline ComplexMimoInstance real_collapse(const RealMimoInstance& r) {
    ComplexMimoInstance c;
    c.nt = r.nt;
    c.nr = r.nr;
    c.noise_var = r.noise_var;
    c.constellation = r.constellation;
    c.channel = CMatrix(r.nr, r.nt);
    for (int i = 0; i < r.nr; ++i)
        for (int j = 0; j < r.nt; ++j)
            c.channel(i, j) = cplx(r.channel(i, j), r.channel(i + r.nr, j));
    c.rx.resize(r.nr);
    for (int i = 0; i < r.nr; ++i) c.rx[i] = cplx(r.rx[i], r.rx[i + r.nr]);
    if (!r.tx.empty()) c.tx = to_complex_symbols(r.tx, r.nt);
    return c;
}

// ||rx - H u||^2 over the real-expanded model.
inline double ml_objective(const RealMimoInstance& inst, std::span<const double> u) {
    if (static_cast<int>(u.size()) != 2 * inst.nt)
        throw DimensionError("ml_objective: candidate size mismatch");
    double s = 0.0;
    const int m = 2 * inst.nr;
    const int n = 2 * inst.nt;
    for (int i = 0; i < m; ++i) {
        const double* row = inst.channel.a.data() + static_cast<std::size_t>(i) * n;
        double r = inst.rx[i];
        for (int j = 0; j < n; ++j) r -= row[j] * u[j];
        s += r * r;
    }
    return s;
}

// Draws a complete instance from (channel, snr) given a channel matrix.
// Consumption order: tx symbols, then noise; channel entries are drawn first
// when the channel itself is random.
//
// SNR convention: SNR = E||H x||^2 / E||n||^2 with unit-variance channel
// entries and the unnormalized odd-integer constellation, which gives
// noise_var = Nt * Es / 10^(SNR/10) per complex dimension.
inline ComplexMimoInstance instance_from_channel(const CMatrix& channel, int nt, int nr,
                                                 const QamConstellation& constellation,
                                                 double snr_db, Rng& rng) {
    if (channel.rows != nr || channel.cols != nt)
        throw DimensionError("instance_from_channel: channel shape mismatch");
    ComplexMimoInstance inst;
    inst.nt = nt;
    inst.nr = nr;
    inst.channel = channel;
    inst.constellation = constellation;
    inst.noise_var = nt * constellation.symbol_energy() * std::pow(10.0, -snr_db / 10.0);

    const int levels = constellation.levels_per_dim();
    inst.tx.resize(nt);
    for (int j = 0; j < nt; ++j) {
        const int re = static_cast<int>(rng.next_u64() & (levels - 1));
        const int im = static_cast<int>(rng.next_u64() & (levels - 1));
        inst.tx[j] = cplx(constellation.level(re), constellation.level(im));
    }

    inst.rx.assign(nr, cplx(0.0, 0.0));
    for (int i = 0; i < nr; ++i) {
        cplx s(0.0, 0.0);
        for (int j = 0; j < nt; ++j) s += channel(i, j) * inst.tx[j];
        inst.rx[i] = s;
    }
    const double nstd = std::sqrt(inst.noise_var / 2.0);
    for (int i = 0; i < nr; ++i)
        inst.rx[i] += cplx(rng.normal(0.0, nstd), rng.normal(0.0, nstd));
    return inst;
}

// Rayleigh-fading instance: channel entries i.i.d. circularly-symmetric
// complex normal with unit variance, tx uniform over the constellation.
inline ComplexMimoInstance rayleigh_instance(RngStream stream, int nt, int nr,
                                             const QamConstellation& constellation,
                                             double snr_db) {
    if (nr < nt) throw DimensionError("rayleigh_instance: requires Nr >= Nt");
    Rng rng(stream);
    CMatrix h(nr, nt);
    const double hstd = std::sqrt(0.5);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j)
            h(i, j) = cplx(rng.normal(0.0, hstd), rng.normal(0.0, hstd));
    return instance_from_channel(h, nt, nr, constellation, snr_db, rng);
}

namespace detail {

// Depth-first enumeration over the lattice in lexicographic order with an
// incrementally maintained residual. Strict improvement keeps the first
// (lexicographically smallest) minimizer on ties.
struct MlSearch {
    const RealMimoInstance& inst;
    const int dims;
    const int m;
    const int levels;
    std::vector<double> best;
    std::vector<double> cur;
    double best_cost = 0.0;
    bool have_best = false;

    explicit MlSearch(const RealMimoInstance& in)
        : inst(in),
          dims(2 * in.nt),
          m(2 * in.nr),
          levels(in.constellation.levels_per_dim()),
          best(dims, 0.0),
          cur(dims, 0.0) {}

    void run(int depth, std::vector<double>& residual) {
        if (depth == dims - 1) {
            // closed form over the last dimension: cost(l) = ||r||^2 - 2 l (r.h) + l^2 ||h||^2
            double rr = 0.0, rh = 0.0, hh = 0.0;
            for (int i = 0; i < m; ++i) {
                const double h = inst.channel(i, depth);
                rr += residual[i] * residual[i];
                rh += residual[i] * h;
                hh += h * h;
            }
            for (int li = 0; li < levels; ++li) {
                const double l = inst.constellation.level(li);
                const double cost = rr - 2.0 * l * rh + l * l * hh;
                if (!have_best || cost < best_cost) {
                    have_best = true;
                    best_cost = cost;
                    cur[depth] = l;
                    best = cur;
                }
            }
            return;
        }
        std::vector<double> next(m);
        for (int li = 0; li < levels; ++li) {
            const double l = inst.constellation.level(li);
            for (int i = 0; i < m; ++i) next[i] = residual[i] - l * inst.channel(i, depth);
            cur[depth] = l;
            run(depth + 1, next);
        }
    }
};

}  // namespace detail

// Exhaustive maximum-likelihood solution over the constellation lattice.
// Guarded at M^Nt <= 2^24; ties break to the lexicographically smallest
// real-expanded vector.
inline std::vector<double> ml_oracle(const RealMimoInstance& inst) {
    const double log2_size = 2.0 * inst.nt * std::log2(static_cast<double>(inst.constellation.levels_per_dim()));
    if (log2_size > 24.0) throw SearchSpaceError("ml_oracle: search space exceeds 2^24 candidates");
    detail::MlSearch search(inst);
    std::vector<double> residual(inst.rx.begin(), inst.rx.end());
    search.run(0, residual);
    return search.best;
}

}  // namespace cimdet
