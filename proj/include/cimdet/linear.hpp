#pragma once

#include <span>
#include <vector>

#include "cimdet/matrix.hpp"
#include "cimdet/mimo.hpp"

namespace cimdet {

// Output of a linear detector: the unquantized estimate, its per-component
// nearest-level quantization, and the ML objective of the quantized vector.
struct LinearEstimate {
    std::vector<double> raw;
    std::vector<double> quantized;
    double objective = 0.0;
};

namespace detail {

// Regularizer of the real-expanded MMSE filter: ratio of per-real-dimension
// noise variance (noise_var/2) to per-real-dimension symbol energy.
inline double mmse_regularizer(const RealMimoInstance& inst) {
    return (inst.noise_var / 2.0) / inst.constellation.dim_energy();
}

}  // namespace detail

// Linear MMSE estimate: (H'H + rho I)^-1 H' y, quantized per component.
inline LinearEstimate mmse(const RealMimoInstance& inst) {
    const int n = 2 * inst.nt;
    Matrix g = gram(inst.channel);
    const double rho = detail::mmse_regularizer(inst);
    for (int i = 0; i < n; ++i) g(i, i) += rho;
    LinearEstimate est;
    est.raw = spd_solve(g, matvec_t(inst.channel, inst.rx));
    est.quantized.resize(n);
    for (int i = 0; i < n; ++i) est.quantized[i] = inst.constellation.nearest_level(est.raw[i]);
    est.objective = ml_objective(inst, est.quantized);
    return est;
}

// MMSE-SIC with optimal ordering over the 2Nt real streams. Each round
// detects the stream with the highest post-detection SINR (smallest diagonal
// of the regularized inverse Gram), quantizes it, cancels its contribution
// and deflates the channel.
inline LinearEstimate mmse_sic(const RealMimoInstance& inst) {
    const int n = 2 * inst.nt;
    const int m = 2 * inst.nr;
    const double rho = detail::mmse_regularizer(inst);

    std::vector<int> active(n);
    for (int i = 0; i < n; ++i) active[i] = i;
    std::vector<double> residual(inst.rx.begin(), inst.rx.end());

    LinearEstimate est;
    est.raw.assign(n, 0.0);
    est.quantized.assign(n, 0.0);

    while (!active.empty()) {
        const int k = static_cast<int>(active.size());
        Matrix g(k, k);
        for (int i = 0; i < k; ++i) {
            for (int j = i; j < k; ++j) {
                double s = 0.0;
                for (int r = 0; r < m; ++r) s += inst.channel(r, active[i]) * inst.channel(r, active[j]);
                g(i, j) = s;
                g(j, i) = s;
            }
            g(i, i) += rho;
        }
        const Matrix w = spd_inverse(g);

        int pick = 0;
        for (int i = 1; i < k; ++i)
            if (w(i, i) < w(pick, pick)) pick = i;

        // raw estimate of the picked stream: row `pick` of W H_A' residual
        std::vector<double> hty(k);
        for (int i = 0; i < k; ++i) {
            double s = 0.0;
            for (int r = 0; r < m; ++r) s += inst.channel(r, active[i]) * residual[r];
            hty[i] = s;
        }
        double raw = 0.0;
        for (int i = 0; i < k; ++i) raw += w(pick, i) * hty[i];

        const int col = active[pick];
        const double q = inst.constellation.nearest_level(raw);
        est.raw[col] = raw;
        est.quantized[col] = q;
        for (int r = 0; r < m; ++r) residual[r] -= inst.channel(r, col) * q;
        active.erase(active.begin() + pick);
    }

    est.objective = ml_objective(inst, est.quantized);
    return est;
}

}  // namespace cimdet
