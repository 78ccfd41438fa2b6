// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irscc/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace irscc::harness {

enum class Algorithm {
    psca,
    psca_unit_amp,
    two_stage,
    upper_bound,
    no_irs,
    nocsi_unit,
    nocsi_common,
    nocsi_per_element,
};

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(const std::string& name);
std::vector<Algorithm> all_algorithms();

enum class SweepKind { elements, epsilon, irs_x };

struct SweepSpec {
    SweepKind kind = SweepKind::elements;
    std::vector<double> values;
};

struct ExperimentConfig {
    scenario::Geometry geometry;
    scenario::SystemParams params;
    SweepSpec sweep;
    int trials = 100;
    std::uint64_t seed = 1;
    std::vector<Algorithm> algorithms;
    std::string output_path = "sweep.csv";
    bool allow_large = false; // run PSCA above N = 50
    bool timings = false;     // real wallclock_ms (breaks byte-determinism)
    int threads = 0;          // 0: hardware concurrency
};

/// Default setup: Alice (0,5,5), IRS (100,0,5), Bob (70,10,0), Willie
/// (100,10,0); exponents {2.4, 4.2, 4.2, 3, 3}; beta0 -30 dB; P_max 36 dBm;
/// L = 100; noise -80 dBm; 5 x 5 IRS; Rician K 5 dB; desk-scale 100 trials.
ExperimentConfig default_config();

/// Parse a JSON config (unit-suffixed fields: p_max_dbm, sigma_w2_dbm,
/// beta0_db, rician_k_db ...) on top of the defaults. Throws
/// std::invalid_argument on malformed input.
ExperimentConfig parse_config(const std::string& json_text);

struct TrialRecord {
    double sweep_value = 0.0;
    int trial = 0;
    Algorithm algorithm = Algorithm::two_stage;
    double bob_snr_db = 0.0;
    double p_a_dbm = 0.0;
    double willie_gain_db = 0.0;
    double kl_value = 0.0;
    double wallclock_ms = 0.0;
    std::string status = "ok";
};

/// Run the configured sweep: per sweep value x trial, draw one ChannelSet
/// from the (seed, sweep-index, trial-index) substream and run every selected
/// algorithm on it. Per-trial failures are recorded, never thrown. Records
/// come back sorted by (sweep_value, trial, algorithm) so output bytes do not
/// depend on the worker count.
std::vector<TrialRecord> run_sweep(const ExperimentConfig& config);

/// Sweep the IRS x-coordinate (y, z fixed from the configured geometry).
std::vector<TrialRecord> run_location_sweep(const ExperimentConfig& config);

enum class EmitFormat { csv, json };

void emit(const std::vector<TrialRecord>& records, EmitFormat format, std::ostream& out);
void emit_to_file(const std::vector<TrialRecord>& records, EmitFormat format,
                  const std::string& path);
std::vector<TrialRecord> parse_records_json(const std::string& text);

struct Aggregate {
    double sweep_value = 0.0;
    Algorithm algorithm = Algorithm::two_stage;
    double mean_bob_snr = 0.0; // linear mean over ok trials
    double mean_bob_snr_db = 0.0;
    double mean_p_a = 0.0; // watts
    double mean_p_a_dbm = 0.0;
    double ok_fraction = 0.0;
    int n_ok = 0;
};

/// Linear-domain means over status == "ok" records, then converted to dB.
std::vector<Aggregate> aggregate(const std::vector<TrialRecord>& records);

struct CheckResult {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    std::string detail;
};

/// Self-diagnosis: oracle re-derivations, pinned constants, Monte Carlo
/// moment checks, constraint-equivalence probes and a deliberate formula
/// mutation that must be caught. Failures are report entries, not errors.
std::vector<CheckResult> validate();

} // namespace irscc::harness
