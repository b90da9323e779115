#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tlcqsc/check.hpp"
#include "tlcqsc/sim.hpp"

namespace tlcqsc {

struct ExperimentConfig {
  SimConfig sim;            // run i uses seed sim.seed + i
  std::uint32_t runs = 1;
  bool check = true;        // run the trace checker on every run
  std::string out_format = "csv";  // csv | json
  std::string out_path;            // empty: no file written
  std::string dump_trace;          // path for run 0's trace, empty: none

  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;  // canonical, embedded in outputs
};

/// One output row: what one node saw of one round in one run.
struct RoundRow {
  std::uint32_t run = 0;
  Round round = 0;
  NodeId node = 0;
  bool committed = false;
  std::int64_t rounds_to_finality = -1;  // -1: not finalized by run end
  std::uint64_t msgs_raw = 0;            // broadcasts by this node in the
  std::uint64_t msgs_ack = 0;            // round's own three-step window
  std::uint64_t msgs_cert = 0;
};

struct Summary {
  std::uint32_t nodes = 0;
  std::uint32_t runs = 0;
  Round rounds = 0;
  std::vector<double> per_node_commit_rate;
  double global_round_success_rate = 0;  // rounds where any node committed
  double mean_rounds_to_finality = 0;
  double p50_rounds_to_finality = 0;
  double p90_rounds_to_finality = 0;
  double p99_rounds_to_finality = 0;
  std::uint64_t unresolved_rounds = 0;   // (node, round) pairs never finalized
  double raw_per_step = 0, ack_per_step = 0, cert_per_step = 0;
  // failure_streaks[k] = number of (node, round) observations whose current
  // run of consecutive non-commits, ending at that round, has length k
  // (k = 0 for committed rounds); sums to nodes * runs * rounds.
  std::map<std::uint32_t, std::uint64_t> failure_streaks;
  std::uint32_t truncated_runs = 0;

  std::vector<RoundRow> rows;
};

struct ExperimentResult {
  Summary summary;
  std::vector<Violation> violations;  // first run's violations, if any
  std::optional<std::uint32_t> violating_run;

  bool ok() const { return violations.empty(); }
};

/// Executes `runs` independent simulations (seeds seed, seed+1, ...) across a
/// worker pool (TLCQSC_THREADS caps it), optionally checks every trace, and
/// folds the summary in run order. Deterministic: (config, seed) fixes every
/// output byte.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Serialize results; byte-stable for identical inputs.
std::string emit_csv(const Summary& s);
std::string emit_json(const ExperimentConfig& cfg, const Summary& s);
void write_file(const std::string& path, const std::string& content);

/// Exact one-sided binomial critical values (log-space summation, no
/// approximation).
/// Largest k with P(Bin(n,p) <= k) <= alpha; -1 if even k=0 exceeds alpha.
std::int64_t binomial_lower_critical(std::uint64_t n, double p, double alpha);
/// Smallest k with P(Bin(n,p) >= k) <= alpha; n+1 if even k=n exceeds alpha.
std::int64_t binomial_upper_critical(std::uint64_t n, double p, double alpha);

}  // namespace tlcqsc
