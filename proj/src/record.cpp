#include "tlcqsc/record.hpp"

namespace tlcqsc {

namespace {

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t x) {
  for (int b = 0; b < 8; ++b) {
    h ^= (x >> (8 * b)) & 0xFF;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t record_digest(const LogRecord& rec) {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv_mix(h, static_cast<std::uint64_t>(rec.msg.kind));
  h = fnv_mix(h, rec.msg.step);
  h = fnv_mix(h, rec.msg.of);
  for (NodeId a : rec.msg.ackers) h = fnv_mix(h, a);
  for (MsgId m : rec.msg.advanced_on) h = fnv_mix(h, m);
  for (std::uint32_t v : rec.vt.entries()) h = fnv_mix(h, v);
  if (rec.msg.proposal) {
    const Proposal& p = *rec.msg.proposal;
    h = fnv_mix(h, p.round);
    h = fnv_mix(h, p.ticket.value);
    h = fnv_mix(h, p.parent_ref);
    for (TxId t : p.txs) h = fnv_mix(h, t);
  }
  return h;
}

}  // namespace

const LogRecord& RecordStore::add(NodeId node, std::uint32_t seq, VectorClock vt,
                                  Message msg) {
  if (node >= n_) throw std::invalid_argument("RecordStore::add: bad node id");
  if (seq != logs_[node].size()) {
    throw std::logic_error("RecordStore::add: non-consecutive sequence number");
  }
  LogRecord rec;
  rec.id = msg_id_of(node, seq);
  rec.node = node;
  rec.seq = seq;
  rec.vt = std::move(vt);
  rec.msg = std::move(msg);
  logs_[node].push_back(std::move(rec));
  total_++;
  log_hash_[node] = fnv_mix(log_hash_[node], record_digest(logs_[node].back()));
  return logs_[node].back();
}

const LogRecord& RecordStore::by_id(MsgId id) const {
  const LogRecord* rec =
      id == kNoMsg ? nullptr : find(msg_id_node(id), msg_id_seq(id));
  if (rec == nullptr) throw std::out_of_range("RecordStore::by_id: unknown msg id");
  return *rec;
}

const LogRecord* RecordStore::find(NodeId node, std::uint32_t seq) const {
  if (node >= n_ || seq >= logs_[node].size()) return nullptr;
  return &logs_[node][seq];
}

std::vector<const LogRecord*> RecordStore::history_of(const VectorClock& vt) const {
  if (vt.size() != n_) throw std::invalid_argument("history_of: dimension mismatch");
  for (NodeId j = 0; j < n_; ++j) {
    if (vt[j] > logs_[j].size()) {
      throw std::logic_error("history_of: vector names records missing from store");
    }
  }
  std::vector<const LogRecord*> out;
  for (NodeId j = 0; j < n_; ++j) {
    for (const auto& rec : logs_[j]) {
      if (VectorClock::leq(rec.vt, vt)) out.push_back(&rec);
    }
  }
  return out;
}

bool HoldbackBuffer::deliverable(const LogRecord& rec) const {
  if (delivered_[rec.node] != rec.seq) return false;  // in-order per sender
  for (std::size_t j = 0; j < delivered_.size(); ++j) {
    std::uint32_t need = rec.vt[j];
    if (j == rec.node) need -= 1;  // a record covers itself
    if (delivered_[j] < need) return false;
  }
  return true;
}

std::vector<MsgId> HoldbackBuffer::offer(const RecordStore& store, MsgId id) {
  std::vector<MsgId> out;
  const LogRecord& rec = store.by_id(id);
  if (rec.seq < delivered_[rec.node]) return out;  // duplicate, already delivered
  auto key = std::make_pair(rec.node, rec.seq);
  auto it = buffer_.find(key);
  if (it != buffer_.end()) {
    if (it->second != rec.id) {
      throw std::logic_error("HoldbackBuffer: conflicting records for one (node,seq)");
    }
    return out;  // duplicate
  }
  buffer_.emplace(key, rec.id);

  // Drain everything now deliverable, in causal order.
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (auto bit = buffer_.begin(); bit != buffer_.end();) {
      const LogRecord& brec = store.by_id(bit->second);
      if (deliverable(brec)) {
        out.push_back(brec.id);
        delivered_[brec.node] += 1;
        bit = buffer_.erase(bit);
        progressed = true;
      } else {
        ++bit;
      }
    }
  }
  return out;
}

}  // namespace tlcqsc
