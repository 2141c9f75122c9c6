#include "tcw/abstraction.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "tcw/equivalence.hpp"

namespace tcw {

TimedLTS hide(const TimedLTS& lts, const std::vector<LabelId>& hidden) {
  std::set<LabelId> iset(hidden.begin(), hidden.end());
  TimedLTS out = lts;
  for (auto& edges : out.action_edges) {
    for (auto& [label, dst] : edges) {
      (void)dst;
      for (LabelId& a : label.acts)
        if (iset.count(a)) a = kTau;
      std::sort(label.acts.begin(), label.acts.end());
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  return out;
}

TimedLTS rb_minimize(const TimedLTS& lts) {
  // blocks from the reflexive branching comparison
  EquivalenceReport self = rb_step_bisim(lts, lts);
  uint32_t n = lts.num_states();
  std::vector<uint32_t> parent(n + 1);
  for (uint32_t i = 0; i <= n; ++i) parent[i] = i;
  std::function<uint32_t(uint32_t)> find = [&](uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto join = [&](uint32_t a, uint32_t b) { parent[find(a)] = find(b); };
  uint32_t sink_slot = n;
  for (auto [i, j] : self.relation) {
    uint32_t a = i == kSinkState ? sink_slot : i;
    uint32_t b = j == kSinkState ? sink_slot : j;
    join(a, b);
  }

  auto strip_or_tau = [](const StepLabel& l) {
    StepLabel s{l.stripped()};
    if (s.acts.empty()) s.acts = {kTau};
    return s;
  };

  // block signatures: non-inert moves only, stripped
  auto block_of = [&](uint32_t s) { return find(s); };
  std::map<uint32_t, std::set<std::pair<StepLabel, uint32_t>>> bmoves;
  std::map<uint32_t, std::set<uint32_t>> bticks;
  std::map<uint32_t, bool> bdead;
  for (uint32_t s = 0; s < n; ++s) {
    uint32_t b = block_of(s);
    bdead[b] = lts.deadlocked[s];
    for (const auto& [l, t] : lts.action_edges[s]) {
      uint32_t tb = t == kSinkState ? block_of(sink_slot) : block_of(t);
      if (l.pure_silent() && tb == b) continue;
      bmoves[b].insert({strip_or_tau(l), tb});
    }
    for (uint32_t t : lts.time_edges[s]) bticks[b].insert(block_of(t));
  }
  uint32_t sink_block = block_of(sink_slot);
  bool have_sink = lts.has_sink;

  // the root is unfolded so the rooted conditions survive the quotient
  std::set<std::pair<StepLabel, uint32_t>> root_moves;
  std::set<uint32_t> root_ticks;
  for (const auto& [l, t] : lts.action_edges[lts.initial])
    root_moves.insert(
        {strip_or_tau(l), t == kSinkState ? block_of(sink_slot) : block_of(t)});
  for (uint32_t t : lts.time_edges[lts.initial]) root_ticks.insert(block_of(t));
  uint32_t root_block = block_of(lts.initial);
  bool merge_root = root_moves == bmoves[root_block] &&
                    root_ticks == bticks[root_block] &&
                    (!have_sink || root_block != sink_block);

  // breadth-first numbering over blocks, starting from the root
  TimedLTS out;
  out.mode = lts.mode;
  std::map<uint32_t, uint32_t> id_of;  // block -> new state
  std::deque<uint32_t> queue;
  auto visit = [&](uint32_t b) -> uint32_t {
    if (have_sink && b == sink_block) return kSinkState;
    auto it = id_of.find(b);
    if (it != id_of.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(out.action_edges.size());
    id_of.emplace(b, id);
    out.action_edges.emplace_back();
    out.time_edges.emplace_back();
    out.deadlocked.push_back(bdead.count(b) ? bdead[b] : false);
    queue.push_back(b);
    return id;
  };

  uint32_t fresh_root = kSinkState;
  if (!merge_root) {
    fresh_root = 0;
    out.action_edges.emplace_back();
    out.time_edges.emplace_back();
    out.deadlocked.push_back(lts.deadlocked[lts.initial]);
    out.initial = 0;
  }
  uint32_t root_id = visit(root_block);
  if (merge_root) out.initial = root_id;

  while (!queue.empty()) {
    uint32_t b = queue.front();
    queue.pop_front();
    uint32_t id = id_of[b];
    for (const auto& [l, tb] : bmoves[b]) {
      uint32_t dst = visit(tb);
      out.action_edges[id].push_back({l, dst});
      if (dst == kSinkState) out.has_sink = true;
    }
    for (uint32_t tb : bticks[b]) out.time_edges[id].push_back(visit(tb));
    std::sort(out.action_edges[id].begin(), out.action_edges[id].end());
    std::sort(out.time_edges[id].begin(), out.time_edges[id].end());
  }

  if (!merge_root) {
    for (const auto& [l, tb] : root_moves) {
      uint32_t dst = visit(tb);
      out.action_edges[fresh_root].push_back({l, dst});
      if (dst == kSinkState) out.has_sink = true;
    }
    for (uint32_t tb : root_ticks) out.time_edges[fresh_root].push_back(visit(tb));
    std::sort(out.action_edges[fresh_root].begin(), out.action_edges[fresh_root].end());
    std::sort(out.time_edges[fresh_root].begin(), out.time_edges[fresh_root].end());
    // blocks discovered while wiring the root gain their edges too
    while (!queue.empty()) {
      uint32_t b = queue.front();
      queue.pop_front();
      uint32_t id = id_of[b];
      for (const auto& [l, tb] : bmoves[b]) {
        uint32_t dst = visit(tb);
        out.action_edges[id].push_back({l, dst});
        if (dst == kSinkState) out.has_sink = true;
      }
      for (uint32_t tb : bticks[b]) out.time_edges[id].push_back(visit(tb));
      std::sort(out.action_edges[id].begin(), out.action_edges[id].end());
      std::sort(out.time_edges[id].begin(), out.time_edges[id].end());
    }
  }
  return out;
}

}  // namespace tcw
