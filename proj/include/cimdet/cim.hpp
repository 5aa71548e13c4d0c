#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cimdet/errors.hpp"
#include "cimdet/matrix.hpp"
#include "cimdet/parallel.hpp"
#include "cimdet/rng.hpp"

namespace cimdet {

// Amplitude-heterogeneity-corrected CIM:
//   dx_i/dt = (1-p) x_i - x_i^3 + eps(t) e_i sum_j J_ij x_j,   eps(t) = gamma t
//   de_i/dt = -beta (x_i^2 - a) e_i
// integrated with RK4. x starts i.i.d. N(0, init_std^2), e starts folded
// N(0, init_std^2); spins are read out as sign(x).
struct CimParams {
    double p = 0.98;
    double beta = 1.0;
    double a = 2.0;
    double gamma = 1000.0 / (256.0 * 0.01);
    double dt = 0.005;
    int steps = 512;
    double init_std = 0.031622776601683791;  // sqrt(0.001)
    double j_scale = 1.0;

    bool operator==(const CimParams&) const = default;
};

// e is clamped here after every full RK4 step; exact dynamics keep it
// positive but a discrete step can overshoot.
inline constexpr double kErrorFloor = 1e-12;
// an oscillator below this amplitude at readout has an unresolved sign
inline constexpr double kAmpThreshold = 0.01;

struct AnnealResult {
    std::vector<int> spins;
    bool converged = false;
    std::vector<double> final_x;
    double energy = 0.0;
};

// One derivative evaluation; dx doubles as the J x buffer.
template <class Coupling>
void cim_derivative(const Coupling& problem, const CimParams& params, double t,
                    std::span<const double> x, std::span<const double> e,
                    std::span<double> dx, std::span<double> de) {
    const int n = static_cast<int>(x.size());
    problem.matvec(x.data(), dx.data());
    const double eps = params.gamma * t * params.j_scale;
    const double lin = 1.0 - params.p;
    for (int i = 0; i < n; ++i) {
        const double xi = x[i];
        dx[i] = lin * xi - xi * xi * xi + eps * e[i] * dx[i];
        de[i] = -params.beta * (xi * xi - params.a) * e[i];
    }
}

// In-place RK4 integration over params.steps steps; the ramped eps is
// evaluated at the exact substep times.
template <class Coupling>
void integrate_cim(const Coupling& problem, const CimParams& params,
                   std::vector<double>& x, std::vector<double>& e) {
    const int n = static_cast<int>(x.size());
    const double dt = params.dt;
    std::vector<double> k1x(n), k2x(n), k3x(n), k4x(n);
    std::vector<double> k1e(n), k2e(n), k3e(n), k4e(n);
    std::vector<double> xs(n), es(n);

    for (int step = 0; step < params.steps; ++step) {
        const double t0 = step * dt;
        cim_derivative(problem, params, t0, x, e, std::span<double>(k1x), std::span<double>(k1e));
        for (int i = 0; i < n; ++i) {
            xs[i] = x[i] + 0.5 * dt * k1x[i];
            es[i] = e[i] + 0.5 * dt * k1e[i];
        }
        cim_derivative(problem, params, t0 + 0.5 * dt, xs, es, std::span<double>(k2x), std::span<double>(k2e));
        for (int i = 0; i < n; ++i) {
            xs[i] = x[i] + 0.5 * dt * k2x[i];
            es[i] = e[i] + 0.5 * dt * k2e[i];
        }
        cim_derivative(problem, params, t0 + 0.5 * dt, xs, es, std::span<double>(k3x), std::span<double>(k3e));
        for (int i = 0; i < n; ++i) {
            xs[i] = x[i] + dt * k3x[i];
            es[i] = e[i] + dt * k3e[i];
        }
        cim_derivative(problem, params, t0 + dt, xs, es, std::span<double>(k4x), std::span<double>(k4e));
        const double w = dt / 6.0;
        for (int i = 0; i < n; ++i) {
            x[i] += w * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            double ei = e[i] + w * (k1e[i] + 2.0 * k2e[i] + 2.0 * k3e[i] + k4e[i]);
            if (!(ei > kErrorFloor)) ei = kErrorFloor;
            e[i] = ei;
        }
    }
}

// One anneal: fresh random initial conditions, full integration, sign
// readout. Non-convergence (any non-finite or sub-threshold amplitude) is
// data, not an error: the spin output is replaced by `fallback_spins` when
// one is supplied, so downstream decoding sees a zero correction.
template <class Coupling>
AnnealResult run_anneal(const Coupling& problem, const CimParams& params, RngStream stream,
                        std::span<const int> fallback_spins = {}) {
    const int n = problem.size();
    Rng rng(stream);
    std::vector<double> x(n), e(n);
    for (int i = 0; i < n; ++i) x[i] = rng.normal(0.0, params.init_std);
    for (int i = 0; i < n; ++i) e[i] = rng.folded_normal(params.init_std);

    integrate_cim(problem, params, x, e);

    AnnealResult out;
    out.final_x = x;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || std::fabs(x[i]) <= kAmpThreshold) {
            ok = false;
            break;
        }
    }
    out.converged = ok;
    out.spins.resize(n);
    for (int i = 0; i < n; ++i) out.spins[i] = (x[i] < 0.0) ? -1 : 1;
    if (!ok && !fallback_spins.empty()) {
        if (static_cast<int>(fallback_spins.size()) != n)
            throw DimensionError("run_anneal: fallback spin size mismatch");
        out.spins.assign(fallback_spins.begin(), fallback_spins.end());
    }
    out.energy = problem.energy(out.spins);
    return out;
}

// N_a independent anneals with child streams 0..n-1. Results are identical
// to the sequential loop for any worker count.
template <class Coupling>
std::vector<AnnealResult> run_batch(const Coupling& problem, const CimParams& params, int n_anneals,
                                    RngStream master, int workers = 1,
                                    std::span<const int> fallback_spins = {}) {
    if (n_anneals < 1) throw DimensionError("run_batch: n_anneals must be >= 1");
    std::vector<AnnealResult> results(n_anneals);
    parallel_for(n_anneals, workers, [&](long i) {
        results[i] = run_anneal(problem, params, master.child(static_cast<std::uint64_t>(i)), fallback_spins);
    });
    return results;
}

// Dense coupling adaptor over a zero-diagonal symmetric matrix.
class DenseCoupling {
public:
    explicit DenseCoupling(Matrix j) : j_(std::move(j)) {
        if (!j_.square()) throw DimensionError("DenseCoupling: matrix must be square");
    }

    int size() const { return j_.rows; }

    void matvec(const double* x, double* out) const {
        const int n = j_.rows;
        for (int i = 0; i < n; ++i) {
            const double* row = j_.a.data() + static_cast<std::size_t>(i) * n;
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += row[k] * x[k];
            out[i] = s;
        }
    }

    double energy(std::span<const int> s) const {
        const int n = j_.rows;
        if (static_cast<int>(s.size()) != n) throw DimensionError("DenseCoupling::energy: size mismatch");
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            const double* row = j_.a.data() + static_cast<std::size_t>(i) * n;
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += row[k] * s[k];
            e += s[i] * acc;
        }
        return -e;
    }

    const Matrix& matrix() const { return j_; }

private:
    Matrix j_;
};

}  // namespace cimdet
