// Benchmark CLI: SNR sweeps, coupled plots, radius-heuristic reports and
// channel-trace tooling on top of the cimdet library. Exit codes: 0 success,
// 2 configuration error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cimdet/cimdet.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    bool has_seed = false;
    std::uint64_t seed = 0;
    bool has_workers = false;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "experiment config file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--set", opts.overrides, "override config entries (key=value, repeatable)");
    cmd->add_option("--seed", opts.seed, "override run.seed")->each([&opts](const std::string&) {
        opts.has_seed = true;
    });
    cmd->add_option("--workers", opts.workers, "override run.workers")->each([&opts](const std::string&) {
        opts.has_workers = true;
    });
}

cimdet::ExperimentConfig load_config(const CommonOpts& opts) {
    cimdet::ExperimentConfig cfg = opts.config_path.empty()
                                       ? cimdet::ExperimentConfig{}
                                       : cimdet::parse_config_file(opts.config_path);
    for (const std::string& o : opts.overrides) cimdet::apply_override(cfg, o);
    if (opts.has_seed) cfg.seed = opts.seed;
    if (opts.has_workers) cfg.workers = opts.workers;
    return cfg;
}

std::ofstream open_output(const CommonOpts& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    const std::filesystem::path path = std::filesystem::path(opts.out_dir) / name;
    std::ofstream out(path);
    if (!out) throw cimdet::Error("cannot open output file " + path.string());
    std::cout << "writing " << path.string() << "\n";
    return out;
}

nlohmann::json trace_to_json(const cimdet::ChannelTrace& trace) {
    nlohmann::json j;
    j["nt"] = trace.nt;
    j["nr"] = trace.nr;
    j["count"] = trace.count();
    j["source"] = trace.source;
    nlohmann::json mats = nlohmann::json::array();
    for (const cimdet::CMatrix& m : trace.matrices) {
        nlohmann::json entries = nlohmann::json::array();
        for (const cimdet::cplx& v : m.a) entries.push_back({v.real(), v.imag()});
        mats.push_back(std::move(entries));
    }
    j["matrices"] = std::move(mats);
    return j;
}

cimdet::ChannelTrace trace_from_json(const nlohmann::json& j) {
    cimdet::ChannelTrace trace;
    try {
        trace.nt = j.at("nt").get<int>();
        trace.nr = j.at("nr").get<int>();
        trace.source = j.value("source", std::string{});
        for (const auto& entries : j.at("matrices")) {
            cimdet::CMatrix m(trace.nr, trace.nt);
            if (entries.size() != m.a.size())
                throw cimdet::TraceError("json matrix does not match nt/nr");
            for (std::size_t i = 0; i < m.a.size(); ++i)
                m.a[i] = cimdet::cplx(entries[i][0].get<double>(), entries[i][1].get<double>());
            trace.matrices.push_back(std::move(m));
        }
    } catch (const nlohmann::json::exception& e) {
        throw cimdet::TraceError(std::string("bad trace json: ") + e.what());
    }
    return trace;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ising-machine MIMO detection benchmarks"};
    app.require_subcommand(1);

    CommonOpts ber_opts, coupled_opts, radius_opts;

    auto* ber = app.add_subcommand("ber-sweep", "BER vs SNR for the selected detectors");
    add_common(ber, ber_opts, true);

    auto* coupled = app.add_subcommand("coupled-plot", "paired per-instance metric ranking");
    add_common(coupled, coupled_opts, true);
    std::string metric_a, metric_b;
    coupled->add_option("--metric-a", metric_a, "first metric (defaults to coupled.metric_a)");
    coupled->add_option("--metric-b", metric_b, "second metric (defaults to coupled.metric_b)");

    auto* radius = app.add_subcommand("radius-report", "%run-time / %wrong-prediction per heuristic");
    add_common(radius, radius_opts, true);

    auto* trace = app.add_subcommand("trace-convert", "generate or convert channel traces");
    std::string trace_in, trace_out, trace_format = "binary", trace_source = "generated";
    bool generate = false;
    int gen_nt = 4, gen_nr = 4;
    long gen_count = 100;
    std::uint64_t gen_seed = 1;
    trace->add_flag("--generate", generate, "generate a Rayleigh trace instead of converting");
    trace->add_option("--in", trace_in, "input trace (binary or json)");
    trace->add_option("--out", trace_out, "output path")->required();
    trace->add_option("--format", trace_format, "output format: binary | json")->capture_default_str();
    trace->add_option("--nt", gen_nt, "users (generate)")->capture_default_str();
    trace->add_option("--nr", gen_nr, "receive antennas (generate)")->capture_default_str();
    trace->add_option("--count", gen_count, "instances (generate)")->capture_default_str();
    trace->add_option("--seed", gen_seed, "seed (generate)")->capture_default_str();
    trace->add_option("--source", trace_source, "source label (generate)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (ber->parsed()) {
            const cimdet::ExperimentConfig cfg = load_config(ber_opts);
            const auto rows = cimdet::run_ber_sweep(cfg);
            auto out = open_output(ber_opts, "ber_sweep.csv");
            cimdet::write_ber_csv(out, cfg, rows);
        } else if (coupled->parsed()) {
            const cimdet::ExperimentConfig cfg = load_config(coupled_opts);
            const std::string a = metric_a.empty() ? cfg.coupled_metric_a : metric_a;
            const std::string b = metric_b.empty() ? cfg.coupled_metric_b : metric_b;
            const auto records = cimdet::run_coupled_plot(cfg, a, b);
            auto out = open_output(coupled_opts, "coupled_plot.csv");
            cimdet::write_coupled_csv(out, cfg, records);
        } else if (radius->parsed()) {
            const cimdet::ExperimentConfig cfg = load_config(radius_opts);
            const auto rows = cimdet::run_radius_report(cfg);
            auto out = open_output(radius_opts, "radius_report.csv");
            cimdet::write_radius_csv(out, cfg, rows);
        } else if (trace->parsed()) {
            cimdet::ChannelTrace t;
            if (generate) {
                t.nt = gen_nt;
                t.nr = gen_nr;
                t.source = trace_source;
                const cimdet::RngStream root{gen_seed, 0};
                const double hstd = std::sqrt(0.5);
                for (long i = 0; i < gen_count; ++i) {
                    cimdet::Rng rng(root.child(static_cast<std::uint64_t>(i)));
                    cimdet::CMatrix m(gen_nr, gen_nt);
                    for (auto& v : m.a)
                        v = cimdet::cplx(rng.normal(0.0, hstd), rng.normal(0.0, hstd));
                    t.matrices.push_back(std::move(m));
                }
            } else {
                if (trace_in.empty()) throw cimdet::ConfigError("trace-convert needs --in or --generate");
                std::ifstream probe(trace_in);
                if (!probe) throw cimdet::ConfigError("input trace does not exist: " + trace_in);
                // a json trace is one valid JSON document carrying "matrices";
                // a binary trace is a JSON header line followed by raw floats
                nlohmann::json whole = nlohmann::json::parse(probe, nullptr, false);
                if (!whole.is_discarded() && whole.is_object() && whole.contains("matrices"))
                    t = trace_from_json(whole);
                else
                    t = cimdet::read_trace(trace_in);
            }
            if (trace_format == "binary") {
                cimdet::write_trace(trace_out, t);
            } else if (trace_format == "json") {
                std::ofstream out(trace_out);
                if (!out) throw cimdet::Error("cannot open output file " + trace_out);
                out << trace_to_json(t).dump(2) << '\n';
            } else {
                throw cimdet::ConfigError("unknown trace format '" + trace_format + "'");
            }
            std::cout << "wrote " << t.count() << " channel instances to " << trace_out << "\n";
        }
    } catch (const cimdet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
