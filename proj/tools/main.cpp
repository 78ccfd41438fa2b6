// SPDX-License-Identifier: Apache-2.0
#include "irscc/covertness.hpp"
#include "irscc/harness.hpp"
#include "irscc/no_csi.hpp"
#include "irscc/psca.hpp"
#include "irscc/scenario.hpp"
#include "irscc/two_stage.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using irscc::harness::Algorithm;
using irscc::harness::ExperimentConfig;
using json = nlohmann::ordered_json;

struct CommonOpts {
    std::string config_path;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::string algorithms;
    std::string values;
    std::string format = "csv";
    std::string out;
    bool allow_large = false;
    bool strict = false;
    bool timings = false;
    int threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o)
{
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per sweep value");
    cmd->add_option("--seed", o.seed, "base RNG seed");
    cmd->add_option("--algorithms", o.algorithms, "comma-separated algorithm subset");
    cmd->add_option("--values", o.values, "comma-separated sweep values (overrides config)");
    cmd->add_option("--format", o.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", o.out, "output path");
    cmd->add_flag("--allow-large", o.allow_large, "run PSCA above N = 50");
    cmd->add_flag("--strict", o.strict, "exit 2 on any per-trial hard failure");
    cmd->add_flag("--timings", o.timings,
                  "record real per-algorithm wallclock (output no longer byte-stable)");
    cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
}

std::vector<double> parse_value_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(std::stod(item));
    return out;
}

ExperimentConfig load_config(const CommonOpts& o, irscc::harness::SweepKind kind)
{
    ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f)
            throw std::invalid_argument("cannot open config file: " + o.config_path);
        std::stringstream buf;
        buf << f.rdbuf();
        cfg = irscc::harness::parse_config(buf.str());
    } else {
        cfg = irscc::harness::default_config();
    }
    if (cfg.sweep.kind != kind || !o.values.empty()) {
        cfg.sweep.kind = kind;
        switch (kind) {
        case irscc::harness::SweepKind::elements:
            cfg.sweep.values = {25.0, 50.0, 75.0, 100.0};
            break;
        case irscc::harness::SweepKind::epsilon:
            cfg.sweep.values = {0.05, 0.1, 0.15, 0.2};
            break;
        case irscc::harness::SweepKind::irs_x:
            cfg.sweep.values = {10.0, 30.0, 50.0, 70.0, 90.0, 110.0};
            break;
        }
        if (!o.values.empty())
            cfg.sweep.values = parse_value_list(o.values);
    }
    if (o.trials)
        cfg.trials = *o.trials;
    if (o.seed)
        cfg.seed = *o.seed;
    if (!o.algorithms.empty()) {
        cfg.algorithms.clear();
        std::stringstream ss(o.algorithms);
        std::string name;
        while (std::getline(ss, name, ',')) {
            const auto a = irscc::harness::algorithm_from_name(name);
            if (!a)
                throw std::invalid_argument("unknown algorithm: " + name);
            cfg.algorithms.push_back(*a);
        }
    }
    cfg.allow_large = cfg.allow_large || o.allow_large;
    cfg.timings = cfg.timings || o.timings;
    if (o.threads > 0)
        cfg.threads = o.threads;
    if (!o.out.empty())
        cfg.output_path = o.out;
    return cfg;
}

int emit_and_summarize(const std::vector<irscc::harness::TrialRecord>& records,
                       const CommonOpts& o, const ExperimentConfig& cfg)
{
    const auto fmt = o.format == "json" ? irscc::harness::EmitFormat::json
                                        : irscc::harness::EmitFormat::csv;
    irscc::harness::emit_to_file(records, fmt, cfg.output_path);
    std::cout << "wrote " << records.size() << " records to " << cfg.output_path << "\n";

    std::cout << "mean over ok trials (linear-domain mean, shown in dB):\n";
    for (const auto& g : irscc::harness::aggregate(records)) {
        std::printf("  sweep=%-8g %-18s snr=%9.3f dB  p_a=%9.3f dBm  ok=%.0f%%\n",
                    g.sweep_value, irscc::harness::algorithm_name(g.algorithm),
                    g.mean_bob_snr_db, g.mean_p_a_dbm, 100.0 * g.ok_fraction);
    }

    if (o.strict) {
        for (const auto& r : records)
            if (r.status.rfind("error", 0) == 0)
                return 2;
    }
    return 0;
}

int run_solve(const CommonOpts& o)
{
    ExperimentConfig cfg = load_config(o, irscc::harness::SweepKind::elements);
    if (!o.values.empty())
        throw std::invalid_argument("solve: --values does not apply");

    const auto& params = cfg.params;
    const auto ch = irscc::scenario::sample_channels(cfg.geometry, params, cfg.seed);
    const auto [a, b] = irscc::scenario::cascade_vectors(ch);
    const auto qf = irscc::psca::build_quadratic_forms(a, b, ch.h_ab, ch.h_aw);
    const irscc::covertness::CovertnessBudget budget{params.epsilon, params.blocklength};
    const auto gains = irscc::scenario::path_gains(cfg.geometry, params.beta0);

    json result = json::array();
    auto add_design = [&](const std::string& name, const irscc::scenario::ReflectDesign& d) {
        json o2;
        o2["algorithm"] = name;
        o2["p_a_w"] = d.p_a;
        o2["p_a_dbm"] = irscc::scenario::watts_to_dbm(std::max(d.p_a, 1e-300));
        o2["bob_snr"] = d.bob_snr;
        o2["bob_snr_db"] = irscc::scenario::linear_to_db(std::max(d.bob_snr, 1e-300));
        o2["willie_gain"] = d.willie_gain;
        o2["kl_value"] = d.kl_value;
        o2["rho"] = std::vector<double>(d.rho.data(), d.rho.data() + d.rho.size());
        o2["theta"] = std::vector<double>(d.theta.data(), d.theta.data() + d.theta.size());
        result.push_back(std::move(o2));
    };

    std::optional<irscc::no_csi::NoCsiSuite> suite;
    auto get_suite = [&]() -> const irscc::no_csi::NoCsiSuite& {
        if (!suite) {
            irscc::no_csi::NoCsiInstance inst;
            inst.h_ar = ch.h_ar;
            inst.b = b;
            inst.h_ab = ch.h_ab;
            inst.chi_rw = gains.chi_rw;
            inst.chi_aw = gains.chi_aw;
            inst.eps_bar = irscc::covertness::epsilon_bar(budget);
            inst.sigma_w2 = params.sigma_w2;
            inst.sigma_b2 = params.sigma_b2;
            inst.p_max = params.p_max;
            inst.blocklength = params.blocklength;
            suite = irscc::no_csi::no_csi_suite(inst);
        }
        return *suite;
    };

    for (Algorithm alg : cfg.algorithms) {
        switch (alg) {
        case Algorithm::psca:
        case Algorithm::psca_unit_amp: {
            irscc::psca::PscaConfig pc;
            pc.unit_amplitudes = (alg == Algorithm::psca_unit_amp);
            const auto res = irscc::psca::psca_optimize(qf, budget, pc, params.sigma_w2,
                                                        params.sigma_b2, params.p_max);
            add_design(irscc::harness::algorithm_name(alg), res.design);
            break;
        }
        case Algorithm::two_stage:
            add_design("two_stage",
                       irscc::two_stage::two_stage_optimize(qf, budget, {}, params.sigma_w2,
                                                            params.sigma_b2, params.p_max));
            break;
        case Algorithm::upper_bound: {
            const double bound = irscc::psca::solve_relaxed_upper_bound(
                qf, budget, params.sigma_w2, params.sigma_b2, params.p_max);
            json o2;
            o2["algorithm"] = "upper_bound";
            o2["bob_snr"] = bound;
            o2["bob_snr_db"] = irscc::scenario::linear_to_db(std::max(bound, 1e-300));
            result.push_back(std::move(o2));
            break;
        }
        case Algorithm::no_irs:
            add_design("no_irs", irscc::two_stage::baseline_no_irs(
                                     ch.h_ab, ch.h_aw, budget, params.sigma_w2,
                                     params.sigma_b2, params.p_max,
                                     params.num_elements()));
            break;
        case Algorithm::nocsi_unit:
            add_design("nocsi_unit", get_suite().unit);
            break;
        case Algorithm::nocsi_common:
            add_design("nocsi_common", get_suite().common);
            break;
        case Algorithm::nocsi_per_element:
            add_design("nocsi_per_element", get_suite().per_element);
            break;
        }
    }
    std::cout << result.dump(2) << "\n";
    return 0;
}

int run_validate()
{
    const auto report = irscc::harness::validate();
    int fails = 0;
    for (const auto& c : report) {
        std::printf("[%s] %-32s residual=%.3e%s%s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.residual, c.detail.empty() ? "" : "  ",
                    c.detail.c_str());
        if (!c.pass)
            ++fails;
    }
    std::printf("%zu checks, %d failures\n", report.size(), fails);
    return fails == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"IRS-assisted covert communication design toolkit"};
    app.require_subcommand(1);

    CommonOpts solve_o, n_o, eps_o, loc_o;
    auto* solve_cmd = app.add_subcommand("solve", "run selected designs on one channel draw");
    add_common_flags(solve_cmd, solve_o);
    auto* n_cmd = app.add_subcommand("sweep-n", "sweep the number of IRS elements");
    add_common_flags(n_cmd, n_o);
    auto* eps_cmd = app.add_subcommand("sweep-eps", "sweep the covertness level epsilon");
    add_common_flags(eps_cmd, eps_o);
    auto* loc_cmd = app.add_subcommand("sweep-location", "sweep the IRS x-coordinate");
    add_common_flags(loc_cmd, loc_o);
    app.add_subcommand("validate", "run the self-diagnosis suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("validate"))
            return run_validate();
        if (app.got_subcommand(solve_cmd))
            return run_solve(solve_o);

        const CommonOpts& o = app.got_subcommand(n_cmd)    ? n_o
                              : app.got_subcommand(eps_cmd) ? eps_o
                                                            : loc_o;
        const auto kind = app.got_subcommand(n_cmd)    ? irscc::harness::SweepKind::elements
                          : app.got_subcommand(eps_cmd) ? irscc::harness::SweepKind::epsilon
                                                        : irscc::harness::SweepKind::irs_x;
        const ExperimentConfig cfg = load_config(o, kind);
        const auto records = irscc::harness::run_sweep(cfg);
        return emit_and_summarize(records, o, cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
