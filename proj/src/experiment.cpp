#include "tlcqsc/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tlcqsc {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["nodes"] = cfg.sim.n;
  j["tm"] = cfg.sim.tlc.t_m;
  j["tw"] = cfg.sim.tlc.t_w;
  j["fd"] = cfg.sim.f_d;
  j["self_ack"] = cfg.sim.tlc.self_ack;
  j["rounds"] = cfg.sim.qsc.rounds;
  j["runs"] = cfg.runs;
  j["seed"] = cfg.sim.seed;
  j["adversary"] = cfg.sim.adversary;
  j["encrypt_tickets"] = cfg.sim.qsc.encrypt_tickets;
  j["pipeline"] = cfg.sim.qsc.pipeline;
  j["spoiler_horizon"] =
      cfg.sim.qsc.spoiler_horizon == QscConfig::Horizon::Strict ? "strict" : "eval";
  j["max_events"] = cfg.sim.max_events;
  j["check"] = cfg.check;
  j["format"] = cfg.out_format;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.sim.n = j.value("nodes", 3u);
  cfg.sim.tlc.t_m = j.value("tm", cfg.sim.n / 2 + 1);
  cfg.sim.tlc.t_w = j.value("tw", cfg.sim.n / 2 + 1);
  cfg.sim.tlc.n = cfg.sim.n;
  cfg.sim.tlc.self_ack = j.value("self_ack", true);
  cfg.sim.f_d = j.value("fd", 0u);
  cfg.sim.seed = j.value("seed", std::uint64_t{1});
  cfg.sim.adversary = j.value("adversary", std::string("oblivious"));
  cfg.sim.max_events = j.value("max_events", std::uint64_t{10'000'000});
  cfg.sim.qsc.rounds = j.value("rounds", Round{0});
  cfg.sim.qsc.pipeline = j.value("pipeline", false);
  cfg.sim.qsc.encrypt_tickets = j.value("encrypt_tickets", true);
  cfg.sim.qsc.spoiler_horizon = j.value("spoiler_horizon", std::string("eval")) ==
                                        "strict"
                                    ? QscConfig::Horizon::Strict
                                    : QscConfig::Horizon::Eval;
  cfg.runs = j.value("runs", 1u);
  cfg.check = j.value("check", true);
  cfg.out_format = j.value("format", std::string("csv"));
  cfg.out_path = j.value("out", std::string());
  cfg.dump_trace = j.value("dump_trace", std::string());

  cfg.sim.qsc.enabled = cfg.sim.qsc.rounds > 0;
  cfg.sim.max_step = cfg.sim.qsc.enabled ? cfg.sim.qsc.last_step() : 0;
  return cfg;
}

std::string ExperimentConfig::to_json_text() const {
  return config_json(*this).dump();
}

namespace {

struct RunOutput {
  std::vector<RoundRow> rows;
  std::vector<std::uint64_t> commits_per_node;
  std::vector<Violation> violations;
  bool truncated = false;
  std::uint64_t raw_total = 0, ack_total = 0, cert_total = 0;
  std::string trace_text;  // only for the dump run
};

RunOutput execute_run(const ExperimentConfig& cfg, std::uint32_t run_index) {
  SimConfig sc = cfg.sim;
  sc.seed = cfg.sim.seed + run_index;
  if (sc.adversary == "delayset" && sc.delay_schedule.empty() && sc.f_d > 0) {
    sc.delay_schedule = DelaySetPolicy::rotation(sc.n, sc.f_d, 8, sc.max_events);
  }
  bool want_trace = cfg.check || (run_index == 0 && !cfg.dump_trace.empty());
  RunResult rr = run_simulation(sc, want_trace);

  RunOutput out;
  out.truncated = rr.truncated;
  if (cfg.check) out.violations = check_all(rr.trace);
  if (run_index == 0 && !cfg.dump_trace.empty()) {
    out.trace_text = rr.trace.to_ndjson();
  }

  const auto& qcfg = sc.qsc;
  out.commits_per_node.assign(sc.n, 0);
  for (Round r = 0; r < qcfg.rounds; ++r) {
    for (NodeId i = 0; i < sc.n; ++i) {
      RoundRow row;
      row.run = run_index;
      row.round = r;
      row.node = i;
      row.committed = rr.world.qsc(i).committed(r);
      row.rounds_to_finality = rr.world.qsc(i).rounds_to_finality(r);
      for (Step s = qcfg.round_start(r); s < qcfg.round_end(r); ++s) {
        row.msgs_raw += rr.world.sends(i, s, MessageKind::Raw);
        row.msgs_ack += rr.world.sends(i, s, MessageKind::Ack);
        row.msgs_cert += rr.world.sends(i, s, MessageKind::Cert);
      }
      if (row.committed) out.commits_per_node[i]++;
      out.rows.push_back(row);
    }
  }
  for (NodeId i = 0; i < sc.n; ++i) {
    for (Step s = 0; s <= sc.max_step; ++s) {
      out.raw_total += rr.world.sends(i, s, MessageKind::Raw);
      out.ack_total += rr.world.sends(i, s, MessageKind::Ack);
      out.cert_total += rr.world.sends(i, s, MessageKind::Cert);
    }
  }
  return out;
}

std::uint32_t worker_count(std::uint32_t runs) {
  std::uint32_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TLCQSC_THREADS")) {
    unsigned long v = std::strtoul(env, nullptr, 10);
    if (v >= 1) hw = static_cast<std::uint32_t>(v);
  }
  return std::min(hw, std::max(1u, runs));
}

double percentile(std::vector<std::int64_t>& sorted, double q) {
  if (sorted.empty()) return 0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return static_cast<double>(sorted[lo]) +
         frac * static_cast<double>(sorted[hi] - sorted[lo]);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.sim.validate();
  const std::uint32_t runs = cfg.runs;
  std::vector<RunOutput> outputs(runs);

  const std::uint32_t workers = worker_count(runs);
  std::atomic<std::uint32_t> next{0};
  auto work = [&]() {
    while (true) {
      std::uint32_t i = next.fetch_add(1);
      if (i >= runs) break;
      outputs[i] = execute_run(cfg, i);
    }
  };
  if (workers <= 1 || runs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  Summary& s = result.summary;
  s.nodes = cfg.sim.n;
  s.runs = runs;
  s.rounds = cfg.sim.qsc.rounds;
  s.per_node_commit_rate.assign(cfg.sim.n, 0);

  std::vector<std::int64_t> rtf_values;
  std::vector<std::uint32_t> streak(cfg.sim.n, 0);
  const std::uint64_t total_steps =
      static_cast<std::uint64_t>(cfg.sim.max_step) + 1;

  // Deterministic fold in run-index order.
  for (std::uint32_t i = 0; i < runs; ++i) {
    RunOutput& out = outputs[i];
    if (!out.violations.empty() && result.violations.empty()) {
      result.violations = out.violations;
      result.violating_run = i;
    }
    if (out.truncated) s.truncated_runs++;
    for (NodeId k = 0; k < cfg.sim.n; ++k) {
      s.per_node_commit_rate[k] += static_cast<double>(out.commits_per_node[k]);
    }
    std::fill(streak.begin(), streak.end(), 0);
    std::uint32_t nodes = cfg.sim.n;
    std::vector<bool> round_any(s.rounds, false);
    for (const RoundRow& row : out.rows) {
      if (row.committed) {
        round_any[row.round] = true;
        streak[row.node] = 0;
      } else {
        streak[row.node]++;
      }
      s.failure_streaks[streak[row.node]]++;
      if (row.rounds_to_finality >= 0) {
        rtf_values.push_back(row.rounds_to_finality);
      } else {
        s.unresolved_rounds++;
      }
      (void)nodes;
    }
    for (Round r = 0; r < s.rounds; ++r) {
      if (round_any[r]) s.global_round_success_rate += 1;
    }
    s.raw_per_step += static_cast<double>(out.raw_total);
    s.ack_per_step += static_cast<double>(out.ack_total);
    s.cert_per_step += static_cast<double>(out.cert_total);
    s.rows.insert(s.rows.end(), out.rows.begin(), out.rows.end());
  }

  const double round_obs = static_cast<double>(runs) * s.rounds;
  if (round_obs > 0) {
    for (auto& r : s.per_node_commit_rate) r /= round_obs;
    s.global_round_success_rate /= round_obs;
  }
  const double step_obs = static_cast<double>(runs) * static_cast<double>(total_steps);
  s.raw_per_step /= step_obs;
  s.ack_per_step /= step_obs;
  s.cert_per_step /= step_obs;

  std::sort(rtf_values.begin(), rtf_values.end());
  if (!rtf_values.empty()) {
    double sum = 0;
    for (auto v : rtf_values) sum += static_cast<double>(v);
    s.mean_rounds_to_finality = sum / static_cast<double>(rtf_values.size());
    s.p50_rounds_to_finality = percentile(rtf_values, 0.50);
    s.p90_rounds_to_finality = percentile(rtf_values, 0.90);
    s.p99_rounds_to_finality = percentile(rtf_values, 0.99);
  }

  if (!cfg.dump_trace.empty() && !outputs.empty()) {
    write_file(cfg.dump_trace, outputs[0].trace_text);
  }
  if (!cfg.out_path.empty()) {
    write_file(cfg.out_path, cfg.out_format == "json" ? emit_json(cfg, s)
                                                      : emit_csv(s));
  }
  return result;
}

std::string emit_csv(const Summary& s) {
  std::ostringstream os;
  os << "run,round,node,committed,rounds_to_finality,msgs_raw,msgs_ack,msgs_cert\n";
  for (const RoundRow& r : s.rows) {
    os << r.run << ',' << r.round << ',' << r.node << ',' << (r.committed ? 1 : 0)
       << ',' << r.rounds_to_finality << ',' << r.msgs_raw << ',' << r.msgs_ack
       << ',' << r.msgs_cert << '\n';
  }
  return os.str();
}

std::string emit_json(const ExperimentConfig& cfg, const Summary& s) {
  ordered_json j;
  j["config"] = config_json(cfg);
  ordered_json sum;
  sum["nodes"] = s.nodes;
  sum["runs"] = s.runs;
  sum["rounds"] = s.rounds;
  sum["per_node_commit_rate"] = s.per_node_commit_rate;
  sum["global_round_success_rate"] = s.global_round_success_rate;
  sum["mean_rounds_to_finality"] = s.mean_rounds_to_finality;
  sum["p50_rounds_to_finality"] = s.p50_rounds_to_finality;
  sum["p90_rounds_to_finality"] = s.p90_rounds_to_finality;
  sum["p99_rounds_to_finality"] = s.p99_rounds_to_finality;
  sum["unresolved_rounds"] = s.unresolved_rounds;
  sum["raw_per_step"] = s.raw_per_step;
  sum["ack_per_step"] = s.ack_per_step;
  sum["cert_per_step"] = s.cert_per_step;
  sum["truncated_runs"] = s.truncated_runs;
  ordered_json streaks = ordered_json::object();
  for (const auto& [k, v] : s.failure_streaks) streaks[std::to_string(k)] = v;
  sum["failure_streaks"] = streaks;
  j["summary"] = sum;
  ordered_json rows = ordered_json::array();
  for (const RoundRow& r : s.rows) {
    rows.push_back({r.run, r.round, r.node, r.committed ? 1 : 0,
                    r.rounds_to_finality, r.msgs_raw, r.msgs_ack, r.msgs_cert});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

namespace {

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1) -
         std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

double binom_pmf_log(std::uint64_t n, std::uint64_t k, double p) {
  if (p <= 0) return k == 0 ? 0.0 : -INFINITY;
  if (p >= 1) return k == n ? 0.0 : -INFINITY;
  return log_choose(n, k) + static_cast<double>(k) * std::log(p) +
         static_cast<double>(n - k) * std::log1p(-p);
}

}  // namespace

std::int64_t binomial_lower_critical(std::uint64_t n, double p, double alpha) {
  double cum = 0;
  std::int64_t crit = -1;
  for (std::uint64_t k = 0; k <= n; ++k) {
    cum += std::exp(binom_pmf_log(n, k, p));
    if (cum <= alpha) {
      crit = static_cast<std::int64_t>(k);
    } else {
      break;
    }
  }
  return crit;
}

std::int64_t binomial_upper_critical(std::uint64_t n, double p, double alpha) {
  double cum = 0;
  std::int64_t crit = static_cast<std::int64_t>(n) + 1;
  for (std::uint64_t k = n + 1; k-- > 0;) {
    cum += std::exp(binom_pmf_log(n, k, p));
    if (cum <= alpha) {
      crit = static_cast<std::int64_t>(k);
    } else {
      break;
    }
  }
  return crit;
}

}  // namespace tlcqsc
