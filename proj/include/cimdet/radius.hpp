#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cimdet/errors.hpp"
#include "cimdet/matrix.hpp"
#include "cimdet/mimo.hpp"

namespace cimdet {

enum class EigHeuristic { min, mean, max };

inline const char* to_string(EigHeuristic h) {
    switch (h) {
        case EigHeuristic::min: return "min";
        case EigHeuristic::mean: return "mean";
        default: return "max";
    }
}

// Search-radius estimate around a guess: Gamma = 2 ||residual' H|| / lambda,
// where lambda is the chosen eigenvalue statistic of H'H. The lambda_min
// variant is a provable bound on the Chebyshev reach of any improvement; the
// mean/max variants are the aggressive heuristics.
struct RadiusEstimate {
    double gamma = 0.0;
    EigHeuristic heuristic = EigHeuristic::min;
    int radius = 0;
    bool skipped = true;
};

// Caches the eigenvalue statistics of H'H for one channel; the channel is
// fixed across detection stages, only the residual changes.
class RadiusEstimator {
public:
    explicit RadiusEstimator(const RealMimoInstance& inst) : inst_(&inst) {
        const std::vector<double> ev = sym_eigenvalues(gram(inst.channel));
        lambda_min_ = ev.front();
        lambda_max_ = ev.back();
        double s = 0.0;
        for (double v : ev) s += v;
        lambda_mean_ = s / static_cast<double>(ev.size());
    }

    double lambda(EigHeuristic h) const {
        switch (h) {
            case EigHeuristic::min: return lambda_min_;
            case EigHeuristic::mean: return lambda_mean_;
            default: return lambda_max_;
        }
    }

    RadiusEstimate estimate(std::span<const double> guess, EigHeuristic heuristic) const {
        const RealMimoInstance& inst = *inst_;
        if (static_cast<int>(guess.size()) != 2 * inst.nt)
            throw DimensionError("estimate_radius: guess size mismatch");
        const double lam = lambda(heuristic);
        if (lam <= 1e-12) throw DegenerateChannelError("estimate_radius: eigenvalue statistic is ~0");

        std::vector<double> residual(inst.rx.begin(), inst.rx.end());
        const std::vector<double> hg = matvec(inst.channel, guess);
        for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= hg[i];
        const double g = 2.0 * norm(matvec_t(inst.channel, residual)) / lam;

        RadiusEstimate est;
        est.gamma = g;
        est.heuristic = heuristic;
        const int omega = inst.constellation.omega();
        if (2.0 * omega <= g) {
            est.radius = omega;  // full constellation span
        } else {
            // largest even 2R <= Gamma, i.e. Gamma - 2 < 2R <= Gamma, floored at 0
            est.radius = std::max(0, static_cast<int>(std::floor(g / 2.0)));
        }
        est.skipped = (est.radius == 0);
        return est;
    }

private:
    const RealMimoInstance* inst_;
    double lambda_min_ = 0.0;
    double lambda_mean_ = 0.0;
    double lambda_max_ = 0.0;
};

inline RadiusEstimate estimate_radius(const RealMimoInstance& inst, std::span<const double> guess,
                                      EigHeuristic heuristic) {
    return RadiusEstimator(inst).estimate(guess, heuristic);
}

// Test-support oracle: true iff the exhaustive optimum over the full lattice
// lies within D_radius of the guess componentwise. Shares the tractability
// guard of ml_oracle.
inline bool radius_soundness_check(const RealMimoInstance& inst, std::span<const double> guess,
                                   int radius) {
    const std::vector<double> best = ml_oracle(inst);
    for (std::size_t i = 0; i < best.size(); ++i)
        if (std::fabs(best[i] - guess[i]) > 2.0 * radius + 1e-9) return false;
    return true;
}

}  // namespace cimdet
