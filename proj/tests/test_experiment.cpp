#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <sstream>

#include "tlcqsc/experiment.hpp"

using namespace tlcqsc;

namespace {

ExperimentConfig small_experiment(std::uint64_t seed, Round rounds,
                                  std::uint32_t runs) {
  ExperimentConfig cfg;
  cfg.sim.n = 3;
  cfg.sim.seed = seed;
  cfg.sim.tlc = TlcConfig{3, 2, 2, true};
  cfg.sim.qsc.enabled = rounds > 0;
  cfg.sim.qsc.rounds = rounds;
  cfg.sim.max_step = cfg.sim.qsc.enabled ? cfg.sim.qsc.last_step() : 0;
  cfg.sim.max_events = 1'000'000;
  cfg.runs = runs;
  return cfg;
}

}  // namespace

TEST_CASE("exact binomial critical values match an independent computation") {
  // Frozen from scipy.stats.binom with the same definitions.
  CHECK(binomial_lower_critical(1000, 0.5, 0.01) == 462);
  CHECK(binomial_lower_critical(20000, 0.5, 0.01) == 9835);
  CHECK(binomial_upper_critical(12000, 1.0 / 32.0, 0.01) == 421);
  CHECK(binomial_lower_critical(10, 0.5, 0.01) == 0);
  CHECK(binomial_upper_critical(10, 0.5, 0.01) == 10);
}

TEST_CASE("zero rounds produce a header-only CSV and an all-zero summary") {
  auto cfg = small_experiment(1, 0, 1);
  auto result = run_experiment(cfg);
  CHECK(result.ok());
  CHECK(result.summary.rows.empty());
  CHECK(emit_csv(result.summary) ==
        "run,round,node,committed,rounds_to_finality,msgs_raw,msgs_ack,msgs_cert\n");
  CHECK(result.summary.global_round_success_rate == 0);
}

TEST_CASE("a two-round single-node run matches hand-computed statistics") {
  // One node, both thresholds 1: each step is one self-delivered raw plus an
  // immediately self-witnessed certificate; every round commits on its own.
  // Steps 0..6 give 7 raws and 6 certs (the final step is passive), and no
  // acks ever (the node's own broadcast is its first acknowledgment).
  ExperimentConfig cfg;
  cfg.sim.n = 1;
  cfg.sim.seed = 9;
  cfg.sim.tlc = TlcConfig{1, 1, 1, true};
  cfg.sim.qsc.enabled = true;
  cfg.sim.qsc.rounds = 2;
  cfg.sim.max_step = 6;
  cfg.sim.max_events = 1000;
  cfg.runs = 1;
  auto result = run_experiment(cfg);
  REQUIRE(result.ok());
  const Summary& s = result.summary;
  CHECK(s.per_node_commit_rate == std::vector<double>{1.0});
  CHECK(s.global_round_success_rate == 1.0);
  CHECK(s.mean_rounds_to_finality == 0.0);
  CHECK(s.unresolved_rounds == 0);
  CHECK(s.raw_per_step == doctest::Approx(7.0 / 7.0));
  CHECK(s.ack_per_step == 0.0);
  CHECK(s.cert_per_step == doctest::Approx(6.0 / 7.0));
  REQUIRE(s.rows.size() == 2);
  // Round 0 spans steps 0-2: 3 raws, 3 certs; round 1 spans 3-5 likewise.
  for (const auto& row : s.rows) {
    CHECK(row.committed);
    CHECK(row.rounds_to_finality == 0);
    CHECK(row.msgs_raw == 3);
    CHECK(row.msgs_ack == 0);
    CHECK(row.msgs_cert == 3);
  }
  auto streak0 = s.failure_streaks.find(0);
  REQUIRE(streak0 != s.failure_streaks.end());
  CHECK(streak0->second == 2);  // both observations committed
}

TEST_CASE("the streak histogram sums to all round observations") {
  auto cfg = small_experiment(5, 20, 3);
  auto result = run_experiment(cfg);
  REQUIRE(result.ok());
  std::uint64_t total = 0;
  for (const auto& [k, v] : result.summary.failure_streaks) total += v;
  CHECK(total == 3ull * 20 * 3);  // runs x rounds x nodes
}

TEST_CASE("outputs are byte-stable and csv/json agree on the numbers") {
  auto cfg = small_experiment(33, 5, 2);
  auto r1 = run_experiment(cfg);
  auto r2 = run_experiment(cfg);
  REQUIRE(r1.ok());
  std::string csv1 = emit_csv(r1.summary), csv2 = emit_csv(r2.summary);
  CHECK(csv1 == csv2);
  std::string js1 = emit_json(cfg, r1.summary), js2 = emit_json(cfg, r2.summary);
  CHECK(js1 == js2);

  // The JSON rows mirror the CSV rows value for value.
  auto j = nlohmann::json::parse(js1);
  std::istringstream csv(csv1);
  std::string line;
  std::getline(csv, line);  // header
  std::size_t idx = 0;
  while (std::getline(csv, line)) {
    std::istringstream ls(line);
    std::string field;
    std::vector<long long> vals;
    while (std::getline(ls, field, ',')) vals.push_back(std::stoll(field));
    const auto& row = j["rows"][idx++];
    CHECK(vals[0] == row[0].get<long long>());
    CHECK(vals[1] == row[1].get<long long>());
    CHECK(vals[2] == row[2].get<long long>());
    CHECK(vals[3] == row[3].get<long long>());
    CHECK(vals[4] == row[4].get<long long>());
    CHECK(vals[5] == row[5].get<long long>());
  }
  CHECK(idx == j["rows"].size());
}

TEST_CASE("a worker pool does not change the fold") {
  auto cfg = small_experiment(81, 10, 6);
  setenv("TLCQSC_THREADS", "1", 1);
  auto serial = run_experiment(cfg);
  setenv("TLCQSC_THREADS", "4", 1);
  auto parallel = run_experiment(cfg);
  unsetenv("TLCQSC_THREADS");
  CHECK(emit_csv(serial.summary) == emit_csv(parallel.summary));
  CHECK(emit_json(cfg, serial.summary) == emit_json(cfg, parallel.summary));
}

TEST_CASE("config json round-trips with flag overrides in mind") {
  auto cfg = ExperimentConfig::from_json_text(
      R"({"nodes":5,"tm":3,"tw":3,"rounds":4,"runs":2,"seed":7,)"
      R"("adversary":"oblivious","pipeline":true,"encrypt_tickets":false})");
  CHECK(cfg.sim.n == 5);
  CHECK(cfg.sim.tlc.t_m == 3);
  CHECK(cfg.sim.qsc.rounds == 4);
  CHECK(cfg.sim.qsc.pipeline);
  CHECK_FALSE(cfg.sim.qsc.encrypt_tickets);
  CHECK(cfg.sim.max_step == cfg.sim.qsc.last_step());
  auto echoed = ExperimentConfig::from_json_text(cfg.to_json_text());
  CHECK(echoed.sim.n == cfg.sim.n);
  CHECK(echoed.sim.qsc.pipeline == cfg.sim.qsc.pipeline);
  CHECK(echoed.sim.seed == cfg.sim.seed);
}

TEST_CASE("violations surface with a nonzero-run report") {
  // A healthy configuration produces no violations across a small batch.
  auto cfg = small_experiment(2, 5, 4);
  cfg.check = true;
  auto result = run_experiment(cfg);
  CHECK(result.ok());
  CHECK_FALSE(result.violating_run.has_value());
}
