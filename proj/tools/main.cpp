#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tlcqsc/check.hpp"
#include "tlcqsc/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 2;
constexpr int kExitConfig = 3;

int cmd_run(const tlcqsc::ExperimentConfig& cfg) {
  auto result = tlcqsc::run_experiment(cfg);
  const auto& s = result.summary;
  std::cout << "runs=" << s.runs << " rounds=" << s.rounds
            << " nodes=" << s.nodes << "\n";
  for (std::size_t i = 0; i < s.per_node_commit_rate.size(); ++i) {
    std::cout << "node " << i << " commit rate: " << s.per_node_commit_rate[i]
              << "\n";
  }
  std::cout << "global round success rate: " << s.global_round_success_rate
            << "\n"
            << "mean rounds to finality: " << s.mean_rounds_to_finality << "\n"
            << "msgs/step raw=" << s.raw_per_step << " ack=" << s.ack_per_step
            << " cert=" << s.cert_per_step << "\n";
  if (s.truncated_runs > 0) {
    std::cout << "truncated runs (event budget): " << s.truncated_runs << "\n";
  }
  if (!result.ok()) {
    std::cerr << "invariant violations in run " << *result.violating_run << ":\n";
    for (const auto& v : result.violations) {
      std::cerr << "  " << tlcqsc::format_violation(v) << "\n";
    }
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_check(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    std::cerr << "cannot open " << path << "\n";
    return kExitConfig;
  }
  tlcqsc::Trace trace = tlcqsc::Trace::parse_ndjson(f);
  auto violations = tlcqsc::check_all(trace);
  if (violations.empty()) {
    std::cout << "ok: " << trace.events.size() << " events, all properties hold\n";
    return kExitOk;
  }
  for (const auto& v : violations) {
    std::cerr << tlcqsc::format_violation(v) << "\n";
  }
  return kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold logical clock + lottery consensus simulation harness"};
  app.require_subcommand(1);

  // run: flags mirror config keys one to one; --config supplies a JSON file
  // and explicit flags override its values.
  auto* run = app.add_subcommand("run", "execute a batch of simulations");
  std::string config_path;
  std::uint32_t nodes = 3, tm = 2, tw = 2, fd = 0, runs = 1, rounds = 10;
  std::uint64_t seed = 1, max_events = 10'000'000;
  std::string adversary = "oblivious", format = "csv", out, dump_trace;
  std::string spoiler = "eval";
  bool encrypt = true, pipeline = false, check = true;
  run->add_option("--config", config_path, "JSON config file");
  auto* o_nodes = run->add_option("--nodes", nodes, "group size n");
  auto* o_tm = run->add_option("--tm", tm, "message threshold");
  auto* o_tw = run->add_option("--tw", tw, "witness threshold");
  auto* o_fd = run->add_option("--fd", fd, "max indefinitely delayed nodes");
  auto* o_rounds = run->add_option("--rounds", rounds, "consensus rounds per run");
  auto* o_runs = run->add_option("--runs", runs, "independent runs");
  auto* o_seed = run->add_option("--seed", seed, "base seed (run i uses seed+i)");
  auto* o_adv = run->add_option("--adversary", adversary,
                                "oblivious | delayset | ticketaware");
  auto* o_enc = run->add_flag("--encrypt-tickets,!--plaintext-tickets", encrypt,
                              "seal ticket values from the scheduler");
  auto* o_pipe = run->add_flag("--pipeline", pipeline, "round per step");
  auto* o_check = run->add_flag("--check,!--no-check", check,
                                "verify every trace against all properties");
  auto* o_out = run->add_option("--out", out, "output file path");
  auto* o_fmt = run->add_option("--format", format, "csv | json");
  auto* o_dump = run->add_option("--dump-trace", dump_trace,
                                 "write run 0's trace as NDJSON");
  auto* o_ev = run->add_option("--max-events", max_events, "event budget per run");
  auto* o_sp = run->add_option("--spoiler-horizon", spoiler, "eval | strict");

  auto* chk = app.add_subcommand("check", "verify a recorded NDJSON trace");
  std::string trace_path;
  chk->add_option("trace", trace_path, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (chk->parsed()) return cmd_check(trace_path);

    tlcqsc::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) {
        std::cerr << "cannot open " << config_path << "\n";
        return kExitConfig;
      }
      std::stringstream ss;
      ss << f.rdbuf();
      cfg = tlcqsc::ExperimentConfig::from_json_text(ss.str());
    } else {
      cfg = tlcqsc::ExperimentConfig::from_json_text("{}");
    }
    if (*o_nodes || config_path.empty()) cfg.sim.n = nodes;
    if (*o_tm || config_path.empty()) cfg.sim.tlc.t_m = tm;
    if (*o_tw || config_path.empty()) cfg.sim.tlc.t_w = tw;
    if (*o_fd || config_path.empty()) cfg.sim.f_d = fd;
    if (*o_rounds || config_path.empty()) cfg.sim.qsc.rounds = rounds;
    if (*o_runs || config_path.empty()) cfg.runs = runs;
    if (*o_seed || config_path.empty()) cfg.sim.seed = seed;
    if (*o_adv || config_path.empty()) cfg.sim.adversary = adversary;
    if (*o_enc) cfg.sim.qsc.encrypt_tickets = encrypt;
    if (*o_pipe) cfg.sim.qsc.pipeline = pipeline;
    if (*o_check) cfg.check = check;
    if (*o_out) cfg.out_path = out;
    if (*o_fmt) cfg.out_format = format;
    if (*o_dump) cfg.dump_trace = dump_trace;
    if (*o_ev) cfg.sim.max_events = max_events;
    if (*o_sp) {
      cfg.sim.qsc.spoiler_horizon = spoiler == "strict"
                                        ? tlcqsc::QscConfig::Horizon::Strict
                                        : tlcqsc::QscConfig::Horizon::Eval;
    }
    cfg.sim.tlc.n = cfg.sim.n;
    cfg.sim.qsc.enabled = cfg.sim.qsc.rounds > 0;
    cfg.sim.max_step = cfg.sim.qsc.enabled ? cfg.sim.qsc.last_step() : 0;
    return cmd_run(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
