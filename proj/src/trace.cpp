#include "tlcqsc/trace.hpp"

#include <nlohmann/json.hpp>

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tlcqsc {

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::Raw: return "raw";
    case MessageKind::Ack: return "ack";
    case MessageKind::Cert: return "cert";
  }
  return "?";
}

const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::Config: return "config";
    case TraceKind::Send: return "send";
    case TraceKind::Cert: return "cert";
    case TraceKind::Deliver: return "deliver";
    case TraceKind::Apply: return "apply";
    case TraceKind::Advance: return "advance";
    case TraceKind::Propose: return "propose";
    case TraceKind::Resolve: return "resolve";
    case TraceKind::Reveal: return "reveal";
    case TraceKind::Commit: return "commit";
    case TraceKind::Finalize: return "finalize";
    case TraceKind::SdSet: return "sdset";
    case TraceKind::Halt: return "halt";
  }
  return "?";
}

namespace {

// Serialization is hand-rolled so field order and formatting are byte-stable
// for golden-file comparisons. Parsing goes through nlohmann::json.

template <typename T>
void num_list(std::ostringstream& os, const char* key, const std::vector<T>& v) {
  os << ",\"" << key << "\":[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << static_cast<std::uint64_t>(v[i]);
  }
  os << ']';
}

}  // namespace

std::string config_to_json(const TraceConfig& c) {
  std::ostringstream os;
  os << "{\"e\":0,\"kind\":\"config\",\"n\":" << c.n << ",\"f_d\":" << c.f_d
     << ",\"seed\":" << c.seed << ",\"adversary\":\"" << c.adversary << "\""
     << ",\"max_events\":" << c.max_events << ",\"max_step\":" << c.max_step
     << ",\"t_m\":" << c.t_m << ",\"t_w\":" << c.t_w
     << ",\"self_ack\":" << (c.self_ack ? "true" : "false")
     << ",\"qsc\":" << (c.qsc ? "true" : "false") << ",\"rounds\":" << c.rounds
     << ",\"pipeline\":" << (c.pipeline ? "true" : "false")
     << ",\"encrypt_tickets\":" << (c.encrypt_tickets ? "true" : "false")
     << ",\"spoiler_horizon\":\"" << c.spoiler_horizon << "\"}";
  return os.str();
}

std::string event_to_json(const TraceEvent& ev) {
  std::ostringstream os;
  os << "{\"e\":" << ev.e << ",\"kind\":\"" << to_string(ev.kind) << "\"";
  switch (ev.kind) {
    case TraceKind::Config:
      break;  // emitted via config_to_json
    case TraceKind::Send:
      os << ",\"node\":" << ev.node << ",\"seq\":" << ev.seq
         << ",\"step\":" << ev.step << ",\"mkind\":\"" << to_string(ev.mkind)
         << "\",\"msg\":" << ev.msg;
      if (ev.mkind == MessageKind::Ack) os << ",\"of\":" << ev.of;
      if (ev.mkind == MessageKind::Raw) num_list(os, "advanced_on", ev.basis);
      break;
    case TraceKind::Cert:
      os << ",\"node\":" << ev.node << ",\"seq\":" << ev.seq
         << ",\"step\":" << ev.step << ",\"msg\":" << ev.msg << ",\"of\":" << ev.of;
      num_list(os, "ackers", ev.ackers);
      break;
    case TraceKind::Deliver:
      os << ",\"msg\":" << ev.msg << ",\"from\":" << ev.from << ",\"to\":" << ev.to;
      break;
    case TraceKind::Apply:
      os << ",\"to\":" << ev.to << ",\"from\":" << ev.from << ",\"seq\":" << ev.seq
         << ",\"step\":" << ev.step << ",\"mkind\":\"" << to_string(ev.mkind)
         << "\",\"msg\":" << ev.msg;
      break;
    case TraceKind::Advance:
      os << ",\"node\":" << ev.node << ",\"from_step\":" << ev.from_step
         << ",\"to_step\":" << ev.to_step << ",\"via\":\""
         << (ev.via == AdvanceVia::Threshold ? "threshold" : "viral") << "\"";
      num_list(os, "basis", ev.basis);
      break;
    case TraceKind::Propose:
      os << ",\"round\":" << ev.round << ",\"node\":" << ev.node
         << ",\"msg\":" << ev.msg << ",\"parent\":" << ev.parent
         << ",\"ticket_commitment\":\"" << ev.ticket_commitment << "\"";
      break;
    case TraceKind::Resolve:
      os << ",\"round\":" << ev.round << ",\"node\":" << ev.node
         << ",\"best\":" << ev.best
         << ",\"committed\":" << (ev.committed ? "true" : "false");
      break;
    case TraceKind::Reveal:
      os << ",\"round\":" << ev.round;
      num_list(os, "nodes", ev.ticket_nodes);
      num_list(os, "tickets", ev.tickets);
      break;
    case TraceKind::Commit:
      os << ",\"round\":" << ev.round << ",\"node\":" << ev.node
         << ",\"best\":" << ev.best << ",\"block\":\"" << ev.block << "\"";
      break;
    case TraceKind::Finalize:
      os << ",\"node\":" << ev.node << ",\"round\":" << ev.round
         << ",\"head\":\"" << ev.block << "\"";
      break;
    case TraceKind::SdSet:
      num_list(os, "set", ev.sd);
      break;
    case TraceKind::Halt:
      os << ",\"reason\":\""
         << (ev.reason == HaltReason::Quiescent ? "quiescent" : "max_events") << "\"";
      num_list(os, "pending_senders", ev.pending_senders);
      break;
  }
  os << '}';
  return os.str();
}

void Trace::write_ndjson(std::ostream& os) const {
  os << config_to_json(config) << '\n';
  for (const auto& ev : events) os << event_to_json(ev) << '\n';
}

std::string Trace::to_ndjson() const {
  std::ostringstream os;
  write_ndjson(os);
  return os.str();
}

namespace {

using nlohmann::json;

template <typename T>
std::vector<T> get_list(const json& j, const char* key) {
  std::vector<T> out;
  if (j.contains(key)) {
    for (const auto& x : j.at(key)) out.push_back(x.get<T>());
  }
  return out;
}

MessageKind parse_mkind(const std::string& s) {
  if (s == "raw") return MessageKind::Raw;
  if (s == "ack") return MessageKind::Ack;
  if (s == "cert") return MessageKind::Cert;
  throw std::runtime_error("trace parse: bad mkind " + s);
}

}  // namespace

Trace Trace::parse_ndjson(std::istream& is) {
  Trace t;
  std::string line;
  bool have_config = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "config") {
      auto& c = t.config;
      c.n = j.at("n").get<std::uint32_t>();
      c.f_d = j.at("f_d").get<std::uint32_t>();
      c.seed = j.at("seed").get<std::uint64_t>();
      c.adversary = j.at("adversary").get<std::string>();
      c.max_events = j.at("max_events").get<std::uint64_t>();
      c.max_step = j.at("max_step").get<Step>();
      c.t_m = j.at("t_m").get<std::uint32_t>();
      c.t_w = j.at("t_w").get<std::uint32_t>();
      c.self_ack = j.at("self_ack").get<bool>();
      c.qsc = j.at("qsc").get<bool>();
      c.rounds = j.at("rounds").get<Round>();
      c.pipeline = j.at("pipeline").get<bool>();
      c.encrypt_tickets = j.at("encrypt_tickets").get<bool>();
      c.spoiler_horizon = j.at("spoiler_horizon").get<std::string>();
      have_config = true;
      continue;
    }
    TraceEvent ev;
    ev.e = j.at("e").get<EventIndex>();
    if (kind == "send") {
      ev.kind = TraceKind::Send;
      ev.node = j.at("node").get<NodeId>();
      ev.seq = j.at("seq").get<std::uint32_t>();
      ev.step = j.at("step").get<Step>();
      ev.mkind = parse_mkind(j.at("mkind").get<std::string>());
      ev.msg = j.at("msg").get<MsgId>();
      if (j.contains("of")) ev.of = j.at("of").get<MsgId>();
      ev.basis = get_list<MsgId>(j, "advanced_on");
    } else if (kind == "cert") {
      ev.kind = TraceKind::Cert;
      ev.node = j.at("node").get<NodeId>();
      ev.seq = j.at("seq").get<std::uint32_t>();
      ev.step = j.at("step").get<Step>();
      ev.msg = j.at("msg").get<MsgId>();
      ev.of = j.at("of").get<MsgId>();
      ev.ackers = get_list<NodeId>(j, "ackers");
      ev.mkind = MessageKind::Cert;
    } else if (kind == "deliver") {
      ev.kind = TraceKind::Deliver;
      ev.msg = j.at("msg").get<MsgId>();
      ev.from = j.at("from").get<NodeId>();
      ev.to = j.at("to").get<NodeId>();
    } else if (kind == "apply") {
      ev.kind = TraceKind::Apply;
      ev.to = j.at("to").get<NodeId>();
      ev.from = j.at("from").get<NodeId>();
      ev.seq = j.at("seq").get<std::uint32_t>();
      ev.step = j.at("step").get<Step>();
      ev.mkind = parse_mkind(j.at("mkind").get<std::string>());
      ev.msg = j.at("msg").get<MsgId>();
    } else if (kind == "advance") {
      ev.kind = TraceKind::Advance;
      ev.node = j.at("node").get<NodeId>();
      ev.from_step = j.at("from_step").get<Step>();
      ev.to_step = j.at("to_step").get<Step>();
      ev.via = j.at("via").get<std::string>() == "viral" ? AdvanceVia::Viral
                                                         : AdvanceVia::Threshold;
      ev.basis = get_list<MsgId>(j, "basis");
    } else if (kind == "propose") {
      ev.kind = TraceKind::Propose;
      ev.round = j.at("round").get<Round>();
      ev.node = j.at("node").get<NodeId>();
      ev.msg = j.at("msg").get<MsgId>();
      ev.parent = j.at("parent").get<MsgId>();
      ev.ticket_commitment = j.at("ticket_commitment").get<std::string>();
    } else if (kind == "resolve") {
      ev.kind = TraceKind::Resolve;
      ev.round = j.at("round").get<Round>();
      ev.node = j.at("node").get<NodeId>();
      ev.best = j.at("best").get<MsgId>();
      ev.committed = j.at("committed").get<bool>();
    } else if (kind == "reveal") {
      ev.kind = TraceKind::Reveal;
      ev.round = j.at("round").get<Round>();
      ev.ticket_nodes = get_list<NodeId>(j, "nodes");
      ev.tickets = get_list<TicketValue>(j, "tickets");
    } else if (kind == "commit") {
      ev.kind = TraceKind::Commit;
      ev.round = j.at("round").get<Round>();
      ev.node = j.at("node").get<NodeId>();
      ev.best = j.at("best").get<MsgId>();
      ev.block = j.at("block").get<std::string>();
    } else if (kind == "finalize") {
      ev.kind = TraceKind::Finalize;
      ev.node = j.at("node").get<NodeId>();
      ev.round = j.at("round").get<Round>();
      ev.block = j.at("head").get<std::string>();
    } else if (kind == "sdset") {
      ev.kind = TraceKind::SdSet;
      ev.sd = get_list<NodeId>(j, "set");
    } else if (kind == "halt") {
      ev.kind = TraceKind::Halt;
      ev.reason = j.at("reason").get<std::string>() == "quiescent"
                      ? HaltReason::Quiescent
                      : HaltReason::MaxEvents;
      ev.pending_senders = get_list<NodeId>(j, "pending_senders");
      if (ev.reason == HaltReason::MaxEvents) t.truncated = true;
    } else {
      throw std::runtime_error("trace parse: unknown kind " + kind);
    }
    t.events.push_back(std::move(ev));
  }
  if (!have_config) throw std::runtime_error("trace parse: missing config line");
  return t;
}

}  // namespace tlcqsc
