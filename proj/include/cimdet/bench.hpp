#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cimdet/cim.hpp"
#include "cimdet/errors.hpp"
#include "cimdet/linear.hpp"
#include "cimdet/mdi.hpp"
#include "cimdet/mimo.hpp"
#include "cimdet/parallel.hpp"
#include "cimdet/radius.hpp"
#include "cimdet/trace.hpp"
#include "cimdet/version.hpp"

namespace cimdet {

// Experiment description: a flat key/value document with typed sections.
// Unset instance count derives from the bit budget. The canonical
// serialization (every key, fixed order) backs golden-file tests.
struct ExperimentConfig {
    int nt = 4;
    int nr = 4;
    int modulation = 16;
    std::vector<double> snr_db = {10.0, 15.0, 20.0};
    std::vector<std::string> detectors = {"mmse", "mmse-sic", "mdi"};
    long instances = 0;           // 0: derive from bits
    long bits = 1000000;          // bit budget per SNR point
    std::uint64_t seed = 1;
    int workers = 1;
    std::string channel_source = "rayleigh";  // rayleigh | trace
    std::string trace_path;
    MdiConfig mdi;
    CimParams cim;
    int di_radius = 1;
    int di_anneals = 64;
    std::string coupled_metric_a = "di";
    std::string coupled_metric_b = "di-legacy";
    int coupled_radius = 2;
    int coupled_anneals = 16;
    int coupled_sample_every = 10;
    std::vector<std::string> radius_heuristics = {"mean", "max"};

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + s + "'");
    }
}

inline long parse_long(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + s + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad unsigned value for " + key + ": '" + s + "'");
    }
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

inline std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += v[i];
    }
    return out;
}

inline EigHeuristic parse_heuristic(const std::string& s) {
    if (s == "min") return EigHeuristic::min;
    if (s == "mean") return EigHeuristic::mean;
    if (s == "max") return EigHeuristic::max;
    throw ConfigError("unknown eigenvalue heuristic '" + s + "'");
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace detail

inline void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    using namespace detail;
    if (key == "system.nt") cfg.nt = static_cast<int>(parse_long(value, key));
    else if (key == "system.nr") cfg.nr = static_cast<int>(parse_long(value, key));
    else if (key == "system.modulation") cfg.modulation = static_cast<int>(parse_long(value, key));
    else if (key == "run.snr_db") {
        cfg.snr_db.clear();
        for (const std::string& v : split_list(value)) cfg.snr_db.push_back(parse_double(v, key));
    } else if (key == "run.detectors") cfg.detectors = split_list(value);
    else if (key == "run.instances") cfg.instances = parse_long(value, key);
    else if (key == "run.bits") cfg.bits = parse_long(value, key);
    else if (key == "run.seed") cfg.seed = parse_u64(value, key);
    else if (key == "run.workers") cfg.workers = static_cast<int>(parse_long(value, key));
    else if (key == "channel.source") cfg.channel_source = value;
    else if (key == "channel.trace_path") cfg.trace_path = value;
    else if (key == "mdi.anneals_per_stage") cfg.mdi.anneals_per_stage = static_cast<int>(parse_long(value, key));
    else if (key == "mdi.heuristic") cfg.mdi.heuristic = parse_heuristic(value);
    else if (key == "mdi.r_max") cfg.mdi.r_max = static_cast<int>(parse_long(value, key));
    else if (key == "mdi.stages") cfg.mdi.stages = static_cast<int>(parse_long(value, key));
    else if (key == "cim.p") cfg.cim.p = parse_double(value, key);
    else if (key == "cim.beta") cfg.cim.beta = parse_double(value, key);
    else if (key == "cim.a") cfg.cim.a = parse_double(value, key);
    else if (key == "cim.gamma") cfg.cim.gamma = parse_double(value, key);
    else if (key == "cim.dt") cfg.cim.dt = parse_double(value, key);
    else if (key == "cim.steps") cfg.cim.steps = static_cast<int>(parse_long(value, key));
    else if (key == "cim.init_std") cfg.cim.init_std = parse_double(value, key);
    else if (key == "cim.j_scale") cfg.cim.j_scale = parse_double(value, key);
    else if (key == "di.radius") cfg.di_radius = static_cast<int>(parse_long(value, key));
    else if (key == "di.anneals") cfg.di_anneals = static_cast<int>(parse_long(value, key));
    else if (key == "coupled.metric_a") cfg.coupled_metric_a = value;
    else if (key == "coupled.metric_b") cfg.coupled_metric_b = value;
    else if (key == "coupled.radius") cfg.coupled_radius = static_cast<int>(parse_long(value, key));
    else if (key == "coupled.anneals") cfg.coupled_anneals = static_cast<int>(parse_long(value, key));
    else if (key == "coupled.sample_every") cfg.coupled_sample_every = static_cast<int>(parse_long(value, key));
    else if (key == "radius.heuristics") cfg.radius_heuristics = split_list(value);
    else throw ConfigError("unknown config key '" + key + "'");
}

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_config_key(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// `--set key=value` override.
inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: '" + assignment + "'");
    apply_config_key(cfg, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

inline std::string canonical_config(const ExperimentConfig& cfg) {
    using detail::format_double;
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    kv("system.nt", std::to_string(cfg.nt));
    kv("system.nr", std::to_string(cfg.nr));
    kv("system.modulation", std::to_string(cfg.modulation));
    {
        std::vector<std::string> v;
        for (double s : cfg.snr_db) v.push_back(format_double(s));
        kv("run.snr_db", detail::join(v));
    }
    kv("run.detectors", detail::join(cfg.detectors));
    kv("run.instances", std::to_string(cfg.instances));
    kv("run.bits", std::to_string(cfg.bits));
    kv("run.seed", std::to_string(cfg.seed));
    kv("run.workers", std::to_string(cfg.workers));
    kv("channel.source", cfg.channel_source);
    kv("channel.trace_path", cfg.trace_path);
    kv("mdi.anneals_per_stage", std::to_string(cfg.mdi.anneals_per_stage));
    kv("mdi.heuristic", to_string(cfg.mdi.heuristic));
    kv("mdi.r_max", std::to_string(cfg.mdi.r_max));
    kv("mdi.stages", std::to_string(cfg.mdi.stages));
    kv("cim.p", format_double(cfg.cim.p));
    kv("cim.beta", format_double(cfg.cim.beta));
    kv("cim.a", format_double(cfg.cim.a));
    kv("cim.gamma", format_double(cfg.cim.gamma));
    kv("cim.dt", format_double(cfg.cim.dt));
    kv("cim.steps", std::to_string(cfg.cim.steps));
    kv("cim.init_std", format_double(cfg.cim.init_std));
    kv("cim.j_scale", format_double(cfg.cim.j_scale));
    kv("di.radius", std::to_string(cfg.di_radius));
    kv("di.anneals", std::to_string(cfg.di_anneals));
    kv("coupled.metric_a", cfg.coupled_metric_a);
    kv("coupled.metric_b", cfg.coupled_metric_b);
    kv("coupled.radius", std::to_string(cfg.coupled_radius));
    kv("coupled.anneals", std::to_string(cfg.coupled_anneals));
    kv("coupled.sample_every", std::to_string(cfg.coupled_sample_every));
    kv("radius.heuristics", detail::join(cfg.radius_heuristics));
    return out;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(detail::fnv1a64(canonical_config(cfg))));
    return std::string(buf);
}

inline long bits_per_instance(const ExperimentConfig& cfg) {
    return static_cast<long>(cfg.nt) * QamConstellation::from_order(cfg.modulation).bits_per_symbol();
}

inline long resolve_instances(const ExperimentConfig& cfg) {
    if (cfg.instances > 0) return cfg.instances;
    const long per = bits_per_instance(cfg);
    return (cfg.bits + per - 1) / per;
}

inline bool oracle_tractable(const ExperimentConfig& cfg) {
    const QamConstellation c = QamConstellation::from_order(cfg.modulation);
    return 2.0 * cfg.nt * std::log2(static_cast<double>(c.levels_per_dim())) <= 24.0;
}

inline const std::vector<std::string>& known_detectors() {
    static const std::vector<std::string> names = {"mmse", "mmse-sic", "di", "di-legacy", "mdi", "oracle"};
    return names;
}

enum class RunMode { ber_sweep, coupled_plot, radius_report };

inline void validate_config(const ExperimentConfig& cfg, RunMode mode) {
    if (cfg.nt < 1) throw ConfigError("system.nt must be >= 1");
    if (cfg.nr < cfg.nt) throw ConfigError("system.nr must be >= system.nt");
    QamConstellation::from_order(cfg.modulation);  // throws on bad order
    if (cfg.snr_db.empty()) throw ConfigError("run.snr_db must be non-empty");
    if (cfg.instances < 0) throw ConfigError("run.instances must be >= 0");
    if (cfg.instances == 0 && cfg.bits < 1) throw ConfigError("run.bits must be >= 1");
    if (cfg.workers < 1) throw ConfigError("run.workers must be >= 1");
    if (cfg.mdi.anneals_per_stage < 1 || cfg.mdi.stages < 1 || cfg.mdi.r_max < 0)
        throw ConfigError("invalid mdi.* parameters");
    if (cfg.cim.dt <= 0.0 || cfg.cim.steps < 1 || cfg.cim.init_std < 0.0 || cfg.cim.p >= 1.0)
        throw ConfigError("invalid cim.* parameters");
    if (cfg.di_radius < 1 || cfg.di_anneals < 1) throw ConfigError("invalid di.* parameters");

    if (cfg.channel_source == "trace") {
        if (cfg.trace_path.empty()) throw ConfigError("channel.trace_path required for trace source");
        std::ifstream probe(cfg.trace_path);
        if (!probe) throw ConfigError("trace file does not exist: " + cfg.trace_path);
    } else if (cfg.channel_source != "rayleigh") {
        throw ConfigError("channel.source must be rayleigh or trace");
    }

    auto known = [](const std::string& n) {
        const auto& k = known_detectors();
        return std::find(k.begin(), k.end(), n) != k.end();
    };
    if (mode == RunMode::ber_sweep) {
        if (cfg.detectors.empty()) throw ConfigError("run.detectors must be non-empty");
        for (const std::string& d : cfg.detectors) {
            if (!known(d)) throw ConfigError("unknown detector '" + d + "'");
            if (d == "oracle" && !oracle_tractable(cfg))
                throw ConfigError("oracle detector exceeds the tractability guard for this system");
        }
    } else if (mode == RunMode::coupled_plot) {
        for (const std::string& m : {cfg.coupled_metric_a, cfg.coupled_metric_b}) {
            if (!known(m)) throw ConfigError("unknown coupled-plot metric '" + m + "'");
            if (m == "oracle" && !oracle_tractable(cfg))
                throw ConfigError("oracle metric exceeds the tractability guard for this system");
        }
        if (cfg.coupled_radius < 1 || cfg.coupled_anneals < 1 || cfg.coupled_sample_every < 1)
            throw ConfigError("invalid coupled.* parameters");
    } else {
        if (!oracle_tractable(cfg))
            throw ConfigError("radius-report requires an oracle-tractable system size");
        if (cfg.radius_heuristics.empty()) throw ConfigError("radius.heuristics must be non-empty");
        for (const std::string& h : cfg.radius_heuristics) detail::parse_heuristic(h);
    }
}

namespace detail {

struct ChannelSource {
    const ExperimentConfig& cfg;
    ChannelTrace trace;
    bool use_trace = false;

    ChannelSource(const ExperimentConfig& c, long needed) : cfg(c) {
        if (cfg.channel_source == "trace") {
            use_trace = true;
            trace = read_trace(cfg.trace_path);
            if (trace.nt != cfg.nt || trace.nr != cfg.nr)
                throw TraceError("trace dimensions do not match system.nt/system.nr");
            if (static_cast<long>(trace.count()) < needed)
                throw TraceError("trace exhausted: " + std::to_string(trace.count()) +
                                 " instances available, " + std::to_string(needed) + " requested");
        }
    }

    ComplexMimoInstance make(long index, double snr_db, RngStream stream,
                             const QamConstellation& constellation) const {
        if (use_trace) {
            Rng rng(stream);
            return instance_from_channel(trace.matrices[static_cast<std::size_t>(index)], cfg.nt,
                                         cfg.nr, constellation, snr_db, rng);
        }
        return rayleigh_instance(stream, cfg.nt, cfg.nr, constellation, snr_db);
    }
};

// Per-instance bit errors for one named detector. The stream is derived from
// the detector name, so identical names give identical draws.
inline long detector_bit_errors(const std::string& name, const ComplexMimoInstance& cinst,
                                const RealMimoInstance& real, const ExperimentConfig& cfg,
                                RngStream inst_stream) {
    const RngStream stream = inst_stream.child(fnv1a64(name));
    const QamConstellation& c = real.constellation;
    if (name == "mmse") return bit_error_count(real.tx, mmse(real).quantized, c);
    if (name == "mmse-sic") return bit_error_count(real.tx, mmse_sic(real).quantized, c);
    if (name == "oracle") return bit_error_count(real.tx, ml_oracle(real), c);
    if (name == "di") {
        const DiResult r = di_detect(real, mmse(real).quantized, cfg.di_radius, cfg.di_anneals,
                                     cfg.cim, stream, TransformKind::degenerate);
        return bit_error_count(real.tx, r.candidate, c);
    }
    if (name == "di-legacy") {
        const DiResult r = di_detect(real, mmse(real).quantized, cfg.di_radius, cfg.di_anneals,
                                     cfg.cim, stream, TransformKind::legacy);
        return bit_error_count(real.tx, r.candidate, c);
    }
    if (name == "mdi") {
        const DetectionReport r = mdi_detect(cinst, cfg.mdi, cfg.cim, stream);
        return bit_error_count(real.tx, r.symbols_real, c);
    }
    throw ConfigError("unknown detector '" + name + "'");
}

// Coupled-plot metrics reuse the detector dispatch, with the search radius
// and budget taken from the coupled.* section for the di variants.
inline long metric_bit_errors(const std::string& name, const ComplexMimoInstance& cinst,
                              const RealMimoInstance& real, const ExperimentConfig& cfg,
                              RngStream inst_stream) {
    ExperimentConfig local = cfg;
    local.di_radius = cfg.coupled_radius;
    local.di_anneals = cfg.coupled_anneals;
    return detector_bit_errors(name, cinst, real, local, inst_stream);
}

}  // namespace detail

// Wilson score interval at 99.9% (two-sided).
inline std::pair<double, double> wilson_interval(long errors, long n) {
    if (n <= 0) return {0.0, 1.0};
    const double z = 3.290526731491926;
    const double z2 = z * z;
    const double p = static_cast<double>(errors) / static_cast<double>(n);
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct BerRow {
    double snr_db = 0.0;
    std::string detector;
    long bits = 0;
    long errors = 0;
    double ber = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
};

inline std::vector<BerRow> run_ber_sweep(const ExperimentConfig& cfg) {
    validate_config(cfg, RunMode::ber_sweep);
    const long n_inst = resolve_instances(cfg);
    const detail::ChannelSource source(cfg, n_inst);
    const QamConstellation constellation = QamConstellation::from_order(cfg.modulation);
    const RngStream root{cfg.seed, 0};
    const long per_inst_bits = bits_per_instance(cfg);

    std::vector<BerRow> rows;
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
        const double snr = cfg.snr_db[si];
        const RngStream snr_stream = root.child(si);
        std::vector<std::vector<long>> errs(cfg.detectors.size(), std::vector<long>(n_inst, 0));

        parallel_for(n_inst, cfg.workers, [&](long i) {
            const RngStream inst_stream = snr_stream.child(static_cast<std::uint64_t>(i));
            const ComplexMimoInstance cinst =
                source.make(i, snr, inst_stream.child(0), constellation);
            const RealMimoInstance real = real_expand(cinst);
            for (std::size_t d = 0; d < cfg.detectors.size(); ++d)
                errs[d][i] = detail::detector_bit_errors(cfg.detectors[d], cinst, real, cfg, inst_stream);
        });

        for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
            BerRow row;
            row.snr_db = snr;
            row.detector = cfg.detectors[d];
            row.bits = n_inst * per_inst_bits;
            row.errors = std::accumulate(errs[d].begin(), errs[d].end(), 0L);
            row.ber = static_cast<double>(row.errors) / static_cast<double>(row.bits);
            const auto [lo, hi] = wilson_interval(row.errors, row.bits);
            row.wilson_low = lo;
            row.wilson_high = hi;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// Coupled-plot record: instances ranked by the first metric (ascending, ties
// stable by instance id); the second metric is attached to every record and
// flagged on a uniformly sampled subset for plotting.
struct CoupledPlotRecord {
    long rank = 0;
    double e1 = 0.0;
    double e2 = 0.0;
    bool sampled = false;
};

inline std::vector<CoupledPlotRecord> run_coupled_plot(const ExperimentConfig& cfg,
                                                       const std::string& metric_a,
                                                       const std::string& metric_b) {
    ExperimentConfig local = cfg;
    local.coupled_metric_a = metric_a;
    local.coupled_metric_b = metric_b;
    validate_config(local, RunMode::coupled_plot);

    const long n_inst = resolve_instances(cfg);
    const detail::ChannelSource source(cfg, n_inst);
    const QamConstellation constellation = QamConstellation::from_order(cfg.modulation);
    const double snr = cfg.snr_db.front();  // coupled plots are per SNR point
    const RngStream root{cfg.seed, 0};

    std::vector<double> e1(n_inst), e2(n_inst);
    parallel_for(n_inst, cfg.workers, [&](long i) {
        const RngStream inst_stream = root.child(0).child(static_cast<std::uint64_t>(i));
        const ComplexMimoInstance cinst = source.make(i, snr, inst_stream.child(0), constellation);
        const RealMimoInstance real = real_expand(cinst);
        e1[i] = static_cast<double>(detail::metric_bit_errors(metric_a, cinst, real, cfg, inst_stream));
        e2[i] = static_cast<double>(detail::metric_bit_errors(metric_b, cinst, real, cfg, inst_stream));
    });

    std::vector<long> order(n_inst);
    std::iota(order.begin(), order.end(), 0L);
    std::stable_sort(order.begin(), order.end(), [&](long a, long b) { return e1[a] < e1[b]; });

    std::vector<CoupledPlotRecord> records(n_inst);
    for (long r = 0; r < n_inst; ++r) {
        records[r].rank = r + 1;
        records[r].e1 = e1[order[r]];
        records[r].e2 = e2[order[r]];
        records[r].sampled = (r % cfg.coupled_sample_every) == 0;
    }
    return records;
}

struct RadiusReportRow {
    double snr_db = 0.0;
    std::string heuristic;
    long instances = 0;
    double runtime_fraction = 0.0;   // fraction of instances with R > 0
    double wrong_fraction = 0.0;     // fraction whose optimum escapes D_R
};

inline std::vector<RadiusReportRow> run_radius_report(const ExperimentConfig& cfg) {
    validate_config(cfg, RunMode::radius_report);
    const long n_inst = resolve_instances(cfg);
    const detail::ChannelSource source(cfg, n_inst);
    const QamConstellation constellation = QamConstellation::from_order(cfg.modulation);
    const RngStream root{cfg.seed, 0};

    std::vector<EigHeuristic> heuristics;
    for (const std::string& h : cfg.radius_heuristics) heuristics.push_back(detail::parse_heuristic(h));

    std::vector<RadiusReportRow> rows;
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
        const double snr = cfg.snr_db[si];
        const RngStream snr_stream = root.child(si);
        std::vector<std::vector<int>> ran(heuristics.size(), std::vector<int>(n_inst, 0));
        std::vector<std::vector<int>> wrong(heuristics.size(), std::vector<int>(n_inst, 0));

        parallel_for(n_inst, cfg.workers, [&](long i) {
            const RngStream inst_stream = snr_stream.child(static_cast<std::uint64_t>(i));
            const ComplexMimoInstance cinst =
                source.make(i, snr, inst_stream.child(0), constellation);
            const RealMimoInstance real = real_expand(cinst);
            const std::vector<double> guess = mmse_sic(real).quantized;
            const std::vector<double> best = ml_oracle(real);
            const RadiusEstimator estimator(real);
            for (std::size_t h = 0; h < heuristics.size(); ++h) {
                const RadiusEstimate est = estimator.estimate(guess, heuristics[h]);
                ran[h][i] = est.radius > 0 ? 1 : 0;
                bool sound = true;
                for (std::size_t k = 0; k < best.size(); ++k)
                    if (std::fabs(best[k] - guess[k]) > 2.0 * est.radius + 1e-9) sound = false;
                wrong[h][i] = sound ? 0 : 1;
            }
        });

        for (std::size_t h = 0; h < heuristics.size(); ++h) {
            RadiusReportRow row;
            row.snr_db = snr;
            row.heuristic = to_string(heuristics[h]);
            row.instances = n_inst;
            row.runtime_fraction =
                std::accumulate(ran[h].begin(), ran[h].end(), 0L) / static_cast<double>(n_inst);
            row.wrong_fraction =
                std::accumulate(wrong[h].begin(), wrong[h].end(), 0L) / static_cast<double>(n_inst);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace detail {

inline void write_metadata(std::ostream& out, const ExperimentConfig& cfg) {
    out << "# version=" << kVersion << '\n';
    out << "# seed=" << cfg.seed << '\n';
    out << "# config=" << config_hash(cfg) << '\n';
}

}  // namespace detail

inline void write_ber_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<BerRow>& rows) {
    detail::write_metadata(out, cfg);
    out << "snr_db,detector,bits,bit_errors,ber,wilson_low,wilson_high\n";
    for (const BerRow& r : rows)
        out << detail::format_double(r.snr_db) << ',' << r.detector << ',' << r.bits << ','
            << r.errors << ',' << detail::format_double(r.ber) << ','
            << detail::format_double(r.wilson_low) << ',' << detail::format_double(r.wilson_high)
            << '\n';
}

inline void write_coupled_csv(std::ostream& out, const ExperimentConfig& cfg,
                              const std::vector<CoupledPlotRecord>& records) {
    detail::write_metadata(out, cfg);
    out << "rank,e1,e2,sampled\n";
    for (const CoupledPlotRecord& r : records)
        out << r.rank << ',' << detail::format_double(r.e1) << ',' << detail::format_double(r.e2)
            << ',' << (r.sampled ? 1 : 0) << '\n';
}

inline void write_radius_csv(std::ostream& out, const ExperimentConfig& cfg,
                             const std::vector<RadiusReportRow>& rows) {
    detail::write_metadata(out, cfg);
    out << "snr_db,heuristic,instances,runtime_fraction,wrong_fraction\n";
    for (const RadiusReportRow& r : rows)
        out << detail::format_double(r.snr_db) << ',' << r.heuristic << ',' << r.instances << ','
            << detail::format_double(r.runtime_fraction) << ','
            << detail::format_double(r.wrong_fraction) << '\n';
}

}  // namespace cimdet
