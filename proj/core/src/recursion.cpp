#include "tcw/recursion.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "tcw/equivalence.hpp"
#include "tcw/errors.hpp"
#include "tcw/rewriter.hpp"

namespace tcw {

namespace {

bool is_action_multiset(const TermPtr& t) {
  if (t->op == Op::Action) return true;
  if (t->op == Op::Parallel) {
    for (const auto& k : t->kids)
      if (k->op != Op::Action) return false;
    return true;
  }
  return false;
}

// Collects unguarded variable occurrences of a right-hand side.
void unguarded_occurrences(const TermPtr& t, Mode mode, bool guarded,
                           std::set<std::string>& out) {
  switch (t->op) {
    case Op::RecVar:
      if (!guarded) out.insert(t->var);
      return;
    case Op::RecConst: return;
    case Op::Seq: {
      bool head_guards = is_action_multiset(t->kids[0]);
      // absolute timing also guards through a delayed head
      if (mode == Mode::Dat &&
          (t->kids[0]->op == Op::AbsDelay && t->kids[0]->amount > 0))
        head_guards = true;
      unguarded_occurrences(t->kids[0], mode, guarded, out);
      unguarded_occurrences(t->kids[1], mode, guarded || head_guards, out);
      return;
    }
    case Op::RelDelay:
    case Op::AbsDelay:
      unguarded_occurrences(t->kids[0], mode, guarded || t->amount > 0, out);
      return;
    default:
      for (const auto& k : t->kids) unguarded_occurrences(k, mode, guarded, out);
      return;
  }
}

}  // namespace

GuardReport check_guarded(const RecSpecPtr& spec, const AlgebraConfig& cfg) {
  GuardReport rep;
  rep.guarded = true;
  for (const auto& [name, rhs] : spec->equations) {
    std::set<std::string> bad;
    unguarded_occurrences(rhs, cfg.mode, false, bad);
    if (!bad.empty()) {
      // the definition admits right-hand sides that can be rewritten into
      // guarded shape
      try {
        TermPtr n = normalize(rhs, cfg, RuleSet::strong(cfg.mode), 20000);
        bad.clear();
        unguarded_occurrences(n, cfg.mode, false, bad);
      } catch (const Error&) {
      }
    }
    for (const auto& v : bad) {
      rep.guarded = false;
      rep.offenders.push_back({name, v});
    }
  }
  return rep;
}

namespace {

bool linear_summand(const TermPtr& t, Mode mode) {
  if (is_action_multiset(t)) {
    // the silent step may not guard recursion in linear shape
    return true;
  }
  if (t->op == Op::Seq)
    return is_action_multiset(t->kids[0]) && t->kids[1]->op == Op::RecVar;
  Op sigma = mode == Mode::Drt ? Op::RelDelay : Op::AbsDelay;
  if (t->op == sigma && t->amount > 0)
    return linear_summand(t->kids[0], mode) || t->kids[0]->op == Op::RecVar;
  return false;
}

}  // namespace

bool is_linear(const RecSpecPtr& spec) {
  for (const auto& [name, rhs] : spec->equations) {
    (void)name;
    Mode mode = Mode::Drt;
    // detect the timing family from the equation body
    std::function<void(const TermPtr&)> sniff = [&](const TermPtr& u) {
      if (u->op == Op::AbsDelay || u->op == Op::AbsTimeout || u->op == Op::AbsInit)
        mode = Mode::Dat;
      for (const auto& k : u->kids) sniff(k);
    };
    sniff(rhs);
    const TermPtr body = canonicalize(rhs);
    if (body->op == Op::Alt) {
      for (const auto& k : body->kids)
        if (!linear_summand(k, mode)) return false;
    } else if (!linear_summand(body, mode)) {
      return false;
    }
  }
  return true;
}

TermPtr unfold(const RecSpecPtr& spec, const std::string& var, uint32_t depth) {
  if (!spec->find(var)) throw UnknownVariable(var);
  std::function<TermPtr(const std::string&, uint32_t)> expand =
      [&](const std::string& v, uint32_t d) -> TermPtr {
    if (d == 0) return rec_const(v, spec);
    const TermPtr* rhs = spec->find(v);
    if (!rhs) throw UnknownVariable(v);
    std::function<TermPtr(const TermPtr&)> subst = [&](const TermPtr& u) -> TermPtr {
      if (u->op == Op::RecVar) return expand(u->var, d - 1);
      if (u->kids.empty()) return u;
      std::vector<TermPtr> kids;
      kids.reserve(u->kids.size());
      for (const auto& k : u->kids) kids.push_back(subst(k));
      return rebuild_with_kids(u, std::move(kids));
    };
    return subst(*rhs);
  };
  return canonicalize(expand(var, depth));
}

bool rsp_check(const RecSpecPtr& spec, const std::map<std::string, TermPtr>& candidate,
               const AlgebraConfig& cfg, const Bounds& bounds) {
  for (const auto& [name, rhs] : spec->equations) {
    auto it = candidate.find(name);
    if (it == candidate.end()) throw UnknownVariable(name);
    std::function<TermPtr(const TermPtr&)> subst = [&](const TermPtr& u) -> TermPtr {
      if (u->op == Op::RecVar) {
        auto c = candidate.find(u->var);
        if (c == candidate.end()) throw UnknownVariable(u->var);
        return c->second;
      }
      if (u->kids.empty()) return u;
      std::vector<TermPtr> kids;
      kids.reserve(u->kids.size());
      for (const auto& k : u->kids) kids.push_back(subst(k));
      return rebuild_with_kids(u, std::move(kids));
    };
    TimedLTS lc = build_lts(it->second, cfg, bounds);
    TimedLTS lr = build_lts(subst(rhs), cfg, bounds);
    if (!step_bisim(lc, lr).verdict) return false;
  }
  return true;
}

TermPtr cfar_eliminate(const RecSpecPtr& spec, const std::vector<LabelId>& hidden,
                       const std::string& var, const AlgebraConfig& cfg) {
  if (!spec->find(var)) throw UnknownVariable(var);
  if (!is_linear(spec)) throw NotACluster("specification is not linear");
  std::set<LabelId> iset(hidden.begin(), hidden.end());

  struct Summand {
    TermPtr multiset;  // action multiset, possibly silent
    std::string target;  // empty: terminating exit
    bool in_i = false;
    bool delayed = false;
  };
  auto summands_of = [&](const TermPtr& rhs) {
    std::vector<Summand> out;
    TermPtr body = canonicalize(rhs);
    std::vector<TermPtr> parts =
        body->op == Op::Alt ? body->kids : std::vector<TermPtr>{body};
    for (const auto& p : parts) {
      Summand s;
      TermPtr core = p;
      if (core->op == Op::RelDelay || core->op == Op::AbsDelay) {
        s.delayed = true;
        out.push_back(s);
        continue;
      }
      if (core->op == Op::Seq) {
        s.multiset = core->kids[0];
        s.target = core->kids[1]->var;
      } else {
        s.multiset = core;
      }
      s.in_i = true;
      for (LabelId a : action_leaves(s.multiset))
        if (!iset.count(a)) s.in_i = false;
      if (action_leaves(s.multiset).count(kTau))
        throw NotACluster("silent guards are not allowed in clusters");
      out.push_back(s);
    }
    return out;
  };

  // cluster: strongly connected component of var over I-labelled edges
  std::map<std::string, std::vector<std::string>> iedges;
  for (const auto& [name, rhs] : spec->equations)
    for (const auto& s : summands_of(rhs))
      if (!s.delayed && s.in_i && !s.target.empty()) iedges[name].push_back(s.target);

  auto reach = [&](const std::string& from) {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      std::string p = stack.back();
      stack.pop_back();
      for (const auto& q : iedges[p])
        if (seen.insert(q).second) stack.push_back(q);
    }
    return seen;
  };
  std::set<std::string> fwd = reach(var);
  std::set<std::string> cluster;
  for (const auto& v : fwd)
    if (reach(v).count(var)) cluster.insert(v);

  // validate and collect exits
  std::vector<TermPtr> exits;
  for (const auto& v : cluster) {
    const TermPtr* rhs = spec->find(v);
    for (const auto& s : summands_of(*rhs)) {
      if (s.delayed) throw NotACluster("delayed summand inside the cluster");
      bool internal = !s.target.empty() && cluster.count(s.target);
      if (internal) {
        if (!s.in_i)
          throw NotACluster("cluster-internal edge with an unhidden label");
        continue;
      }
      if (s.target.empty()) exits.push_back(s.multiset);
      else exits.push_back(seq(s.multiset, rec_const(s.target, spec)));
    }
  }
  if (exits.empty()) throw NotACluster("cluster has no exits");
  std::sort(exits.begin(), exits.end(),
            [](const TermPtr& a, const TermPtr& b) { return compare(a, b) < 0; });
  exits.erase(std::unique(exits.begin(), exits.end(),
                          [](const TermPtr& a, const TermPtr& b) { return equal(a, b); }),
              exits.end());
  return seq(act(kTau), abstract_away(hidden, alt(exits), cfg));
}

}  // namespace tcw
