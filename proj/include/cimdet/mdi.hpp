#pragma once

#include <algorithm>
#include <complex>
#include <span>
#include <vector>

#include "cimdet/cim.hpp"
#include "cimdet/errors.hpp"
#include "cimdet/ising.hpp"
#include "cimdet/linear.hpp"
#include "cimdet/mimo.hpp"
#include "cimdet/radius.hpp"

namespace cimdet {

// Multi-stage detector parameters, the (N_s, heuristic, R_max, S) tuple:
// anneals per stage, eigenvalue heuristic, maximum explored Chebyshev
// radius, stage count. Total anneal budget is N_a = n_s * stages.
struct MdiConfig {
    int anneals_per_stage = 64;
    EigHeuristic heuristic = EigHeuristic::mean;
    int r_max = 3;
    int stages = 8;

    bool operator==(const MdiConfig&) const = default;
};

struct SubInstanceDiag {
    int track = 0;   // 0 = MMSE guess, 1 = MMSE-SIC guess
    int radius = 0;  // search space D_radius
    int anneals = 0;
    double best_objective = 0.0;
};

struct StageDiag {
    int r1 = 0;
    int r2 = 0;
    std::vector<SubInstanceDiag> subs;
    double track_best[2] = {0.0, 0.0};
    int anneals_used = 0;
};

struct DetectionReport {
    std::vector<cplx> symbols;
    std::vector<double> symbols_real;
    double objective = 0.0;
    std::vector<StageDiag> stages;
    long total_anneals = 0;
    bool skipped = false;
};

struct DiResult {
    std::vector<double> candidate;
    double objective = 0.0;
    int anneals_run = 0;
};

namespace detail {

// Single delta-Ising solve around a guess: build the problem in D_radius,
// run the anneals, decode every readout and keep the best objective among
// the candidates and the guess itself.
inline DiResult di_detect_impl(const RealMimoInstance& inst, const Matrix& gram_matrix,
                               std::span<const double> guess, int radius, int n_anneals,
                               const CimParams& cim, RngStream stream, TransformKind kind,
                               int workers) {
    const DeltaTransform transform = build_transform(kind, radius, inst.nt);
    const KronDeltaCoupling coupling = build_kron_coupling(gram_matrix, inst, guess, transform);

    std::vector<int> fallback = transform.zero_correction_spins();
    fallback.push_back(1);  // auxiliary spin

    DiResult out;
    out.candidate.assign(guess.begin(), guess.end());
    out.objective = ml_objective(inst, guess);
    out.anneals_run = n_anneals;

    const std::vector<AnnealResult> batch =
        run_batch(coupling, cim, n_anneals, stream, workers, fallback);
    for (const AnnealResult& r : batch) {
        const std::vector<int> s = decode_aux_spins(r.spins);
        DecodedCandidate cand = decode(guess, transform, s, inst);
        if (cand.objective < out.objective) {
            out.objective = cand.objective;
            out.candidate = std::move(cand.symbols);
        }
    }
    return out;
}

}  // namespace detail

inline DiResult di_detect(const RealMimoInstance& inst, std::span<const double> guess, int radius,
                          int n_anneals, const CimParams& cim, RngStream stream,
                          TransformKind kind = TransformKind::degenerate, int workers = 1) {
    if (radius < 1) throw DimensionError("di_detect: radius must be >= 1");
    if (n_anneals < 1) throw DimensionError("di_detect: n_anneals must be >= 1");
    return detail::di_detect_impl(inst, gram(inst.channel), guess, radius, n_anneals, cim, stream,
                                  kind, workers);
}

// Multi-stage delta-Ising MIMO detection. Two guess tracks (MMSE, MMSE-SIC)
// are refined over `stages` rounds; each round estimates per-track radii,
// spawns one sub-instance per nested search space D_1..D_R and splits the
// stage budget across them. The winner of each track (incumbent included)
// seeds the next round.
inline DetectionReport mdi_detect(const ComplexMimoInstance& cinst, const MdiConfig& cfg,
                                  const CimParams& cim, RngStream stream, int workers = 1) {
    if (cfg.anneals_per_stage < 1 || cfg.stages < 1 || cfg.r_max < 0)
        throw ConfigError("mdi_detect: invalid MdiConfig");

    const RealMimoInstance inst = real_expand(cinst);
    const Matrix gram_matrix = gram(inst.channel);
    const RadiusEstimator estimator(inst);

    std::vector<double> track[2];
    double track_obj[2];
    {
        const LinearEstimate m = mmse(inst);
        const LinearEstimate s = mmse_sic(inst);
        track[0] = m.quantized;
        track[1] = s.quantized;
        track_obj[0] = m.objective;
        track_obj[1] = s.objective;
    }

    DetectionReport report;

    for (int stage = 0; stage < cfg.stages; ++stage) {
        StageDiag diag;
        const int r1 = std::min(estimator.estimate(track[0], cfg.heuristic).radius, cfg.r_max);
        const int r2 = std::min(estimator.estimate(track[1], cfg.heuristic).radius, cfg.r_max);
        diag.r1 = r1;
        diag.r2 = r2;

        if (r1 + r2 == 0) {
            // both tracks are fixed points: later stages would repeat this
            // estimate unchanged, so detection ends here
            diag.track_best[0] = track_obj[0];
            diag.track_best[1] = track_obj[1];
            report.stages.push_back(std::move(diag));
            if (stage == 0) report.skipped = true;
            break;
        }

        // sub-instances ordered smallest radius first, ties by track
        std::vector<SubInstanceDiag> subs;
        for (int r = 1; r <= std::max(r1, r2); ++r) {
            if (r <= r1) subs.push_back({0, r, 0, 0.0});
            if (r <= r2) subs.push_back({1, r, 0, 0.0});
        }
        const int count = static_cast<int>(subs.size());
        const int base = cfg.anneals_per_stage / count;
        if (base >= 1) {
            const int leftover = cfg.anneals_per_stage - base * count;
            for (int i = 0; i < count; ++i) subs[i].anneals = base + (i < leftover ? 1 : 0);
        } else {
            // budget smaller than the sub-instance count: fund the smallest
            // radii, one anneal each, and skip the rest this stage
            for (int i = 0; i < count; ++i) subs[i].anneals = (i < cfg.anneals_per_stage) ? 1 : 0;
        }

        // every sub-instance of a stage searches around the stage-start
        // incumbents; winners replace the tracks only once the stage is done
        const std::vector<double> guess_snapshot[2] = {track[0], track[1]};
        const RngStream stage_stream = stream.child(static_cast<std::uint64_t>(stage));
        for (SubInstanceDiag& sub : subs) {
            if (sub.anneals == 0) {
                sub.best_objective = track_obj[sub.track];
                continue;
            }
            const RngStream sub_stream =
                stage_stream.child(static_cast<std::uint64_t>(sub.track)).child(static_cast<std::uint64_t>(sub.radius));
            DiResult res = detail::di_detect_impl(inst, gram_matrix, guess_snapshot[sub.track],
                                                  sub.radius, sub.anneals, cim, sub_stream,
                                                  TransformKind::degenerate, workers);
            sub.best_objective = res.objective;
            diag.anneals_used += sub.anneals;
            if (res.objective < track_obj[sub.track]) {
                track_obj[sub.track] = res.objective;
                track[sub.track] = std::move(res.candidate);
            }
        }
        diag.track_best[0] = track_obj[0];
        diag.track_best[1] = track_obj[1];
        diag.subs = std::move(subs);
        report.total_anneals += diag.anneals_used;
        report.stages.push_back(std::move(diag));
    }

    const int winner = (track_obj[1] < track_obj[0]) ? 1 : 0;
    report.symbols_real = track[winner];
    report.objective = track_obj[winner];
    report.symbols = to_complex_symbols(report.symbols_real, inst.nt);
    return report;
}

}  // namespace cimdet
