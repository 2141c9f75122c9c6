#include "tcw/sos.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "tcw/errors.hpp"

namespace tcw {

StepLabel merge_steps(const StepLabel& a, const StepLabel& b) {
  StepLabel out;
  out.acts.resize(a.acts.size() + b.acts.size());
  std::merge(a.acts.begin(), a.acts.end(), b.acts.begin(), b.acts.end(),
             out.acts.begin());
  return out;
}

std::string step_to_string(const StepLabel& l, const AlgebraConfig& cfg) {
  std::vector<std::string> names;
  names.reserve(l.acts.size());
  for (LabelId a : l.acts) names.push_back(cfg.name(a));
  std::sort(names.begin(), names.end());
  std::string out = "{";
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  out += '}';
  return out;
}

namespace {

TermPtr substitute_consts(const TermPtr& t, const RecSpecPtr& spec) {
  std::function<TermPtr(const TermPtr&)> walk = [&](const TermPtr& u) -> TermPtr {
    if (u->op == Op::RecVar) return rec_const(u->var, spec);
    if (u->op == Op::RecConst || u->kids.empty()) return u;
    std::vector<TermPtr> kids;
    kids.reserve(u->kids.size());
    bool changed = false;
    for (const auto& k : u->kids) {
      kids.push_back(walk(k));
      if (kids.back().get() != k.get()) changed = true;
    }
    if (!changed) return u;
    return rebuild_with_kids(u, std::move(kids));
  };
  return walk(t);
}

StepLabel relabel(const StepLabel& l, const std::function<LabelId(LabelId)>& f) {
  StepLabel out;
  out.acts.reserve(l.acts.size());
  for (LabelId a : l.acts) out.acts.push_back(f(a));
  std::sort(out.acts.begin(), out.acts.end());
  return out;
}

TermPtr fold_whole(std::vector<TermPtr> parts) {
  TermPtr acc = nullptr;
  for (auto& p : parts) acc = acc ? whole_par(acc, std::move(p)) : std::move(p);
  return acc;
}

void sort_moves(std::vector<ActionMove>& moves) {
  std::sort(moves.begin(), moves.end(), [](const ActionMove& a, const ActionMove& b) {
    if (a.label != b.label) return a.label < b.label;
    if (!a.target || !b.target) return a.target == nullptr && b.target != nullptr;
    return compare(a.target, b.target) < 0;
  });
  moves.erase(std::unique(moves.begin(), moves.end(),
                          [](const ActionMove& a, const ActionMove& b) {
                            if (a.label != b.label) return false;
                            if (!a.target || !b.target) return a.target == b.target;
                            return equal(a.target, b.target);
                          }),
              moves.end());
}

struct RelEngine {
  const AlgebraConfig& cfg;
  uint32_t fuel;

  // Deadlocked predicate; independent of the action derivation.
  bool up(const TermPtr& t, uint32_t depth) const {
    if (depth == 0) throw UnguardedRecursion(t->var);
    switch (t->op) {
      case Op::DeadlockedProc: return true;
      case Op::Action: return false;
      case Op::Alt: {
        for (const auto& k : t->kids)
          if (!up(k, depth)) return false;
        return true;
      }
      case Op::Seq: return up(t->kids[0], depth);
      case Op::RelDelay: return t->amount == 0 && up(t->kids[0], depth);
      case Op::RelTimeout: return t->amount == 0 || up(t->kids[0], depth);
      case Op::RelInit: return t->amount == 0 && up(t->kids[0], depth);
      case Op::Parallel:
      case Op::WholeParallel:
      case Op::CommMerge: {
        for (const auto& k : t->kids)
          if (up(k, depth)) return true;
        return false;
      }
      case Op::ConflictElim:
      case Op::Unless:
      case Op::Encapsulate:
      case Op::Abstract:
      case Op::Rename:
        return up(t->kids[0], depth);
      case Op::RecConst: {
        const TermPtr* rhs = t->spec->find(t->var);
        if (!rhs) throw UnknownVariable(t->var);
        return up(substitute_consts(*rhs, t->spec), depth - 1);
      }
      case Op::RecVar: throw OpenTermError(t->var);
      default: return false;
    }
  }

  Derivation go(const TermPtr& t, uint32_t depth) const {
    if (depth == 0) throw UnguardedRecursion(t->var);
    Derivation d;
    switch (t->op) {
      case Op::DeadlockedProc:
        d.deadlocked = true;
        break;
      case Op::Action:
        if (t->label != kDelta) d.actions.push_back({{{t->label}}, nullptr});
        break;
      case Op::Alt: {
        std::vector<TermPtr> tick_parts;
        d.deadlocked = true;
        for (const auto& k : t->kids) {
          Derivation dk = go(k, depth);
          for (auto& m : dk.actions) d.actions.push_back(std::move(m));
          if (dk.tick) tick_parts.push_back(dk.tick);
          d.deadlocked = d.deadlocked && dk.deadlocked;
        }
        if (!tick_parts.empty()) d.tick = canonicalize(alt(std::move(tick_parts)));
        break;
      }
      case Op::Seq: {
        Derivation dx = go(t->kids[0], depth);
        for (auto& m : dx.actions)
          d.actions.push_back({m.label, m.target ? seq(m.target, t->kids[1]) : t->kids[1]});
        if (dx.tick) d.tick = seq(dx.tick, t->kids[1]);
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::RelDelay: {
        if (t->amount == 0) return go(t->kids[0], depth);
        if (t->amount >= 2)
          d.tick = delay(Mode::Drt, t->amount - 1, t->kids[0]);
        else if (!up(t->kids[0], depth))
          d.tick = t->kids[0];
        break;
      }
      case Op::RelTimeout: {
        if (t->amount == 0) {
          d.deadlocked = true;
          break;
        }
        Derivation dx = go(t->kids[0], depth);
        d.actions = std::move(dx.actions);  // wrapper drops on action
        if (t->amount >= 2 && dx.tick)
          d.tick = timeout(Mode::Drt, t->amount - 1, dx.tick);
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::RelInit: {
        if (t->amount == 0) return go(t->kids[0], depth);
        Derivation dx = go(t->kids[0], depth);
        if (dx.tick) {
          d.tick = t->amount == 1 ? dx.tick
                                  : initialize(Mode::Drt, t->amount - 1, dx.tick);
        } else if (t->amount >= 2) {
          d.tick = initialize(Mode::Drt, t->amount - 1, deadlocked());
        }
        break;
      }
      case Op::Parallel: {
        std::vector<Derivation> ds;
        ds.reserve(t->kids.size());
        for (const auto& k : t->kids) ds.push_back(go(k, depth));
        // every component must act in the same step
        std::vector<ActionMove> combos{{StepLabel{}, nullptr}};
        std::vector<std::vector<TermPtr>> survivor_sets{{}};
        bool viable = true;
        for (const auto& dk : ds) {
          if (dk.actions.empty()) {
            viable = false;
            break;
          }
          std::vector<ActionMove> next;
          std::vector<std::vector<TermPtr>> next_survivors;
          for (size_t ci = 0; ci < combos.size(); ++ci)
            for (const auto& m : dk.actions) {
              next.push_back({merge_steps(combos[ci].label, m.label), nullptr});
              auto surv = survivor_sets[ci];
              if (m.target) surv.push_back(m.target);
              next_survivors.push_back(std::move(surv));
            }
          combos = std::move(next);
          survivor_sets = std::move(next_survivors);
        }
        if (viable)
          for (size_t i = 0; i < combos.size(); ++i)
            d.actions.push_back(
                {combos[i].label, survivor_sets[i].empty()
                                      ? nullptr
                                      : fold_whole(std::move(survivor_sets[i]))});
        bool all_tick = true;
        std::vector<TermPtr> tick_parts;
        for (const auto& dk : ds) {
          if (!dk.tick) all_tick = false;
          else tick_parts.push_back(dk.tick);
          if (dk.deadlocked) d.deadlocked = true;
        }
        if (all_tick) d.tick = par(std::move(tick_parts));
        break;
      }
      case Op::CommMerge: {
        Derivation dx = go(t->kids[0], depth);
        Derivation dy = go(t->kids[1], depth);
        for (const auto& mx : dx.actions) {
          if (mx.label.acts.size() != 1) continue;
          for (const auto& my : dy.actions) {
            if (my.label.acts.size() != 1) continue;
            auto c = cfg.gamma(mx.label.acts[0], my.label.acts[0]);
            if (!c) continue;
            TermPtr tgt;
            if (mx.target && my.target) tgt = whole_par(mx.target, my.target);
            else if (mx.target) tgt = mx.target;
            else if (my.target) tgt = my.target;
            d.actions.push_back({{{*c}}, tgt});
          }
        }
        if (dx.tick && dy.tick) d.tick = comm(dx.tick, dy.tick);
        d.deadlocked = dx.deadlocked || dy.deadlocked;
        break;
      }
      case Op::WholeParallel: {
        Derivation dx = go(t->kids[0], depth);
        Derivation dy = go(t->kids[1], depth);
        for (const auto& mx : dx.actions)
          for (const auto& my : dy.actions) {
            TermPtr tgt;
            if (mx.target && my.target) tgt = whole_par(mx.target, my.target);
            else if (mx.target) tgt = mx.target;
            else if (my.target) tgt = my.target;
            d.actions.push_back({merge_steps(mx.label, my.label), tgt});
            if (mx.label.acts.size() == 1 && my.label.acts.size() == 1) {
              auto c = cfg.gamma(mx.label.acts[0], my.label.acts[0]);
              if (c) d.actions.push_back({{{*c}}, tgt});
            }
          }
        if (dx.tick && dy.tick) d.tick = whole_par(dx.tick, dy.tick);
        d.deadlocked = dx.deadlocked || dy.deadlocked;
        break;
      }
      case Op::ConflictElim:
        return go(theta_expand(t->kids[0], cfg, nullptr, depth), depth - 1);
      case Op::Unless: {
        std::set<LabelId> syms = action_symbols(t->kids[1]);
        Derivation dx = go(t->kids[0], depth);
        for (auto& m : dx.actions) {
          StepLabel l = relabel(m.label, [&](LabelId a) {
            return cfg.silences(a, syms) ? kTau : a;
          });
          d.actions.push_back({std::move(l), m.target ? unless(m.target, t->kids[1])
                                                      : nullptr});
        }
        // idles with the left argument; a plain process on the right never
        // blocks time (deviates from the joint-idling reading, which breaks
        // the elimination theorems)
        if (dx.tick) d.tick = unless(dx.tick, t->kids[1]);
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::Encapsulate: {
        Derivation dx = go(t->kids[0], depth);
        for (auto& m : dx.actions) {
          bool blocked = false;
          for (LabelId a : m.label.acts)
            if (std::binary_search(t->label_set.begin(), t->label_set.end(), a))
              blocked = true;
          if (blocked) continue;
          d.actions.push_back(
              {m.label, m.target ? encap(t->label_set, m.target, cfg) : nullptr});
        }
        if (dx.tick) d.tick = encap(t->label_set, dx.tick, cfg);
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::Abstract: {
        Derivation dx = go(t->kids[0], depth);
        for (auto& m : dx.actions) {
          StepLabel l = relabel(m.label, [&](LabelId a) {
            return std::binary_search(t->label_set.begin(), t->label_set.end(), a)
                       ? kTau
                       : a;
          });
          d.actions.push_back(
              {std::move(l),
               m.target ? abstract_away(t->label_set, m.target, cfg) : nullptr});
        }
        if (dx.tick) d.tick = abstract_away(t->label_set, dx.tick, cfg);
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::Rename: {
        Derivation dx = go(t->kids[0], depth);
        auto apply = [&](LabelId a) {
          for (const auto& [from, to] : t->label_map)
            if (from == a) return to;
          return a;
        };
        for (auto& m : dx.actions)
          d.actions.push_back({relabel(m.label, apply),
                               m.target ? rename(t->label_map, m.target, cfg) : nullptr});
        if (dx.tick) d.tick = rename(t->label_map, dx.tick, cfg);
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::RecConst: {
        const TermPtr* rhs = t->spec->find(t->var);
        if (!rhs) throw UnknownVariable(t->var);
        return go(substitute_consts(*rhs, t->spec), depth - 1);
      }
      case Op::RecVar: throw OpenTermError(t->var);
      default: break;
    }
    return d;
  }
};

struct AbsEngine {
  const AlgebraConfig& cfg;

  bool up(const TermPtr& t, uint64_t n, uint32_t depth) const {
    if (depth == 0) throw UnguardedRecursion(t->var);
    switch (t->op) {
      case Op::DeadlockedProc: return true;
      case Op::Action: return n >= 1;
      case Op::Alt: {
        for (const auto& k : t->kids)
          if (!up(k, n, depth)) return false;
        return true;
      }
      case Op::Seq: return up(t->kids[0], n, depth);
      case Op::AbsDelay:
        return n >= t->amount && up(t->kids[0], n - t->amount, depth);
      case Op::AbsTimeout:
        return t->amount <= n || up(t->kids[0], n, depth);
      case Op::AbsInit: return t->amount <= n && up(t->kids[0], n, depth);
      case Op::Parallel:
      case Op::WholeParallel:
      case Op::CommMerge: {
        for (const auto& k : t->kids)
          if (up(k, n, depth)) return true;
        return false;
      }
      case Op::ConflictElim:
      case Op::Unless:
      case Op::Encapsulate:
      case Op::Abstract:
      case Op::Rename:
        return up(t->kids[0], n, depth);
      case Op::RecConst: {
        const TermPtr* rhs = t->spec->find(t->var);
        if (!rhs) throw UnknownVariable(t->var);
        return up(substitute_consts(*rhs, t->spec), n, depth - 1);
      }
      case Op::RecVar: throw OpenTermError(t->var);
      default: return false;
    }
  }

  DerivationAbs go(const TermPtr& t, uint64_t n, uint32_t depth) const {
    if (depth == 0) throw UnguardedRecursion(t->var);
    DerivationAbs d;
    switch (t->op) {
      case Op::DeadlockedProc:
        d.deadlocked = true;
        break;
      case Op::Action:
        if (n >= 1) {
          d.deadlocked = true;
        } else if (t->label != kDelta) {
          d.actions.push_back({{{t->label}}, nullptr});
        }
        break;
      case Op::Alt: {
        d.deadlocked = true;
        for (const auto& k : t->kids) {
          DerivationAbs dk = go(k, n, depth);
          for (auto& m : dk.actions) d.actions.push_back(std::move(m));
          d.tick = d.tick || dk.tick;
          d.deadlocked = d.deadlocked && dk.deadlocked;
        }
        break;
      }
      case Op::Seq: {
        DerivationAbs dx = go(t->kids[0], n, depth);
        for (auto& m : dx.actions)
          d.actions.push_back({m.label, m.target ? seq(m.target, t->kids[1]) : t->kids[1]});
        d.tick = dx.tick;
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::AbsDelay: {
        uint32_t k = t->amount;
        if (k == 0) return go(t->kids[0], n, depth);
        if (n >= k) {
          DerivationAbs dx = go(t->kids[0], n - k, depth);
          for (auto& m : dx.actions)
            d.actions.push_back(
                {m.label, m.target ? delay(Mode::Dat, k, m.target) : nullptr});
          d.tick = dx.tick;
          d.deadlocked = dx.deadlocked;
        } else {
          d.tick = (n + 1 < k) || !up(t->kids[0], 0, depth);
        }
        break;
      }
      case Op::AbsTimeout: {
        uint32_t k = t->amount;
        if (k <= n) {
          d.deadlocked = true;
          break;
        }
        DerivationAbs dx = go(t->kids[0], n, depth);
        d.actions = std::move(dx.actions);  // wrapper drops on action
        d.tick = dx.tick && (n + 1 < k);
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::AbsInit: {
        uint32_t k = t->amount;
        if (k <= n) {
          DerivationAbs dx = go(t->kids[0], n, depth);
          d.actions = std::move(dx.actions);
          d.tick = dx.tick;
          d.deadlocked = dx.deadlocked;
        } else {
          d.tick = (n + 1 < k) || !up(t->kids[0], k, depth);
        }
        break;
      }
      case Op::Parallel: {
        std::vector<DerivationAbs> ds;
        ds.reserve(t->kids.size());
        for (const auto& k : t->kids) ds.push_back(go(k, n, depth));
        std::vector<StepLabel> labels{StepLabel{}};
        std::vector<std::vector<TermPtr>> survivors{{}};
        bool viable = true;
        for (const auto& dk : ds) {
          if (dk.actions.empty()) {
            viable = false;
            break;
          }
          std::vector<StepLabel> nl;
          std::vector<std::vector<TermPtr>> ns;
          for (size_t ci = 0; ci < labels.size(); ++ci)
            for (const auto& m : dk.actions) {
              nl.push_back(merge_steps(labels[ci], m.label));
              auto sv = survivors[ci];
              if (m.target) sv.push_back(m.target);
              ns.push_back(std::move(sv));
            }
          labels = std::move(nl);
          survivors = std::move(ns);
        }
        if (viable)
          for (size_t i = 0; i < labels.size(); ++i)
            d.actions.push_back({labels[i], survivors[i].empty()
                                                ? nullptr
                                                : fold_whole(std::move(survivors[i]))});
        d.tick = true;
        for (const auto& dk : ds) {
          d.tick = d.tick && dk.tick;
          d.deadlocked = d.deadlocked || dk.deadlocked;
        }
        break;
      }
      case Op::CommMerge: {
        DerivationAbs dx = go(t->kids[0], n, depth);
        DerivationAbs dy = go(t->kids[1], n, depth);
        for (const auto& mx : dx.actions) {
          if (mx.label.acts.size() != 1) continue;
          for (const auto& my : dy.actions) {
            if (my.label.acts.size() != 1) continue;
            auto c = cfg.gamma(mx.label.acts[0], my.label.acts[0]);
            if (!c) continue;
            TermPtr tgt;
            if (mx.target && my.target) tgt = whole_par(mx.target, my.target);
            else if (mx.target) tgt = mx.target;
            else if (my.target) tgt = my.target;
            d.actions.push_back({{{*c}}, tgt});
          }
        }
        d.tick = dx.tick && dy.tick;
        d.deadlocked = dx.deadlocked || dy.deadlocked;
        break;
      }
      case Op::WholeParallel: {
        DerivationAbs dx = go(t->kids[0], n, depth);
        DerivationAbs dy = go(t->kids[1], n, depth);
        for (const auto& mx : dx.actions)
          for (const auto& my : dy.actions) {
            TermPtr tgt;
            if (mx.target && my.target) tgt = whole_par(mx.target, my.target);
            else if (mx.target) tgt = mx.target;
            else if (my.target) tgt = my.target;
            d.actions.push_back({merge_steps(mx.label, my.label), tgt});
            if (mx.label.acts.size() == 1 && my.label.acts.size() == 1) {
              auto c = cfg.gamma(mx.label.acts[0], my.label.acts[0]);
              if (c) d.actions.push_back({{{*c}}, tgt});
            }
          }
        d.tick = dx.tick && dy.tick;
        d.deadlocked = dx.deadlocked || dy.deadlocked;
        break;
      }
      case Op::ConflictElim:
        return go(theta_expand(t->kids[0], cfg, nullptr, depth), n, depth - 1);
      case Op::Unless: {
        std::set<LabelId> syms = action_symbols(t->kids[1]);
        DerivationAbs dx = go(t->kids[0], n, depth);
        for (auto& m : dx.actions) {
          StepLabel l = relabel(m.label, [&](LabelId a) {
            return cfg.silences(a, syms) ? kTau : a;
          });
          d.actions.push_back({std::move(l), m.target ? unless(m.target, t->kids[1])
                                                      : nullptr});
        }
        d.tick = dx.tick;
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::Encapsulate: {
        DerivationAbs dx = go(t->kids[0], n, depth);
        for (auto& m : dx.actions) {
          bool blocked = false;
          for (LabelId a : m.label.acts)
            if (std::binary_search(t->label_set.begin(), t->label_set.end(), a))
              blocked = true;
          if (blocked) continue;
          d.actions.push_back(
              {m.label, m.target ? encap(t->label_set, m.target, cfg) : nullptr});
        }
        d.tick = dx.tick;
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::Abstract: {
        DerivationAbs dx = go(t->kids[0], n, depth);
        for (auto& m : dx.actions) {
          StepLabel l = relabel(m.label, [&](LabelId a) {
            return std::binary_search(t->label_set.begin(), t->label_set.end(), a)
                       ? kTau
                       : a;
          });
          d.actions.push_back(
              {std::move(l),
               m.target ? abstract_away(t->label_set, m.target, cfg) : nullptr});
        }
        d.tick = dx.tick;
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::Rename: {
        DerivationAbs dx = go(t->kids[0], n, depth);
        auto apply = [&](LabelId a) {
          for (const auto& [from, to] : t->label_map)
            if (from == a) return to;
          return a;
        };
        for (auto& m : dx.actions)
          d.actions.push_back({relabel(m.label, apply),
                               m.target ? rename(t->label_map, m.target, cfg) : nullptr});
        d.tick = dx.tick;
        d.deadlocked = dx.deadlocked;
        break;
      }
      case Op::RecConst: {
        const TermPtr* rhs = t->spec->find(t->var);
        if (!rhs) throw UnknownVariable(t->var);
        return go(substitute_consts(*rhs, t->spec), n, depth - 1);
      }
      case Op::RecVar: throw OpenTermError(t->var);
      default: break;
    }
    return d;
  }
};

}  // namespace

Derivation derive(const TermPtr& t, const AlgebraConfig& cfg, uint32_t unfold_depth) {
  RelEngine eng{cfg, unfold_depth};
  Derivation d = eng.go(t, unfold_depth);
  for (auto& m : d.actions)
    if (m.target) m.target = state_normal(m.target);
  if (d.tick) d.tick = state_normal(d.tick);
  sort_moves(d.actions);
  return d;
}

DerivationAbs derive(const TermPtr& t, uint64_t clock, const AlgebraConfig& cfg,
                     uint32_t unfold_depth) {
  AbsEngine eng{cfg};
  DerivationAbs d = eng.go(t, clock, unfold_depth);
  for (auto& m : d.actions)
    if (m.target) m.target = state_normal(m.target);
  sort_moves(d.actions);
  return d;
}

std::vector<LabelId> silenced_against(const TermPtr& y, const AlgebraConfig& cfg) {
  std::set<LabelId> syms = action_symbols(y);
  std::vector<LabelId> out;
  for (LabelId e = kFirstUserLabel; e < cfg.end_label(); ++e)
    if (cfg.silences(e, syms)) out.push_back(e);
  return out;
}

TermPtr unless_expand(const TermPtr& x, const TermPtr& y, const AlgebraConfig& cfg) {
  return abstract_away(silenced_against(y, cfg), x, cfg);
}

TermPtr theta_expand(const TermPtr& x, const AlgebraConfig& cfg, std::string* tag,
                     uint32_t depth) {
  if (depth == 0) throw UnguardedRecursion(x->var);
  auto set_tag = [&](const char* t) {
    if (tag) *tag = t;
  };
  switch (x->op) {
    case Op::Action:
      set_tag(cfg.mode == Mode::Drt ? "CE25DR" : "CE25DA");
      return x;
    case Op::DeadlockedProc:
      set_tag(cfg.mode == Mode::Drt ? "CE26DRID" : "CE26DAID");
      return x;
    case Op::Alt: {
      set_tag("CE27");
      TermPtr first = x->kids[0];
      std::vector<TermPtr> rest_kids(x->kids.begin() + 1, x->kids.end());
      TermPtr rest = alt(rest_kids);
      return alt(unless(conflict_elim(first), rest),
                 unless(conflict_elim(rest), first));
    }
    case Op::Seq:
      set_tag("CE28");
      return seq(conflict_elim(x->kids[0]), conflict_elim(x->kids[1]));
    case Op::Parallel: {
      set_tag("CE29");
      TermPtr first = x->kids[0];
      std::vector<TermPtr> rest_kids(x->kids.begin() + 1, x->kids.end());
      TermPtr rest = par(rest_kids);
      return alt(par(unless(conflict_elim(first), rest), rest),
                 par(unless(conflict_elim(rest), first), first));
    }
    case Op::CommMerge:
      set_tag("CE30");
      return alt(comm(unless(conflict_elim(x->kids[0]), x->kids[1]), x->kids[1]),
                 comm(unless(conflict_elim(x->kids[1]), x->kids[0]), x->kids[0]));
    case Op::WholeParallel:
      set_tag("CE29x");  // via the whole-merge expansion
      return conflict_elim(alt(par(x->kids[0], x->kids[1]),
                               comm(x->kids[0], x->kids[1])));
    case Op::RelDelay:
    case Op::AbsDelay:
      set_tag(cfg.mode == Mode::Drt ? "CE28xT" : "CE28xTa");
      return delay(cfg.mode, x->amount, conflict_elim(x->kids[0]));
    case Op::RelTimeout:
    case Op::AbsTimeout:
      set_tag("CE28xTO");
      return timeout(cfg.mode, x->amount, conflict_elim(x->kids[0]));
    case Op::RelInit:
    case Op::AbsInit:
      set_tag("CE28xIN");
      return initialize(cfg.mode, x->amount, conflict_elim(x->kids[0]));
    case Op::Encapsulate:
    case Op::Abstract:
    case Op::Rename:
      // conflict elimination is inert over relabeling and blocking wrappers
      set_tag("CE25x");
      return x;
    case Op::Unless:
      set_tag("CE25xU");
      return unless_expand(x->kids[0], x->kids[1], cfg);
    case Op::ConflictElim:
      return theta_expand(theta_expand(x->kids[0], cfg, nullptr, depth - 1), cfg,
                          tag, depth - 1);
    case Op::RecConst: {
      const TermPtr* rhs = x->spec->find(x->var);
      if (!rhs) throw UnknownVariable(x->var);
      return conflict_elim(substitute_consts(*rhs, x->spec));
    }
    case Op::RecVar: throw OpenTermError(x->var);
  }
  return x;
}

TermPtr state_normal(const TermPtr& t) {
  std::function<TermPtr(const TermPtr&)> walk = [&](const TermPtr& u) -> TermPtr {
    TermPtr v = u;
    if (!u->kids.empty()) {
      std::vector<TermPtr> kids;
      kids.reserve(u->kids.size());
      bool changed = false;
      for (const auto& k : u->kids) {
        kids.push_back(walk(k));
        if (kids.back().get() != k.get()) changed = true;
      }
      if (changed) v = canonicalize(rebuild_with_kids(u, std::move(kids)));
    }
    // fold time prefixes
    if (v->op == Op::RelDelay || v->op == Op::AbsDelay) {
      if (v->amount == 0) return v->kids[0];
      const auto& inner = v->kids[0];
      if (inner->op == v->op)
        return delay(v->op == Op::RelDelay ? Mode::Drt : Mode::Dat,
                     v->amount + inner->amount, inner->kids[0]);
    }
    if ((v->op == Op::RelInit || v->op == Op::AbsInit) && v->amount == 0)
      return v->kids[0];
    return v;
  };
  return canonicalize(walk(canonicalize(t)));
}

TimedLTS build_lts(const TermPtr& t, const AlgebraConfig& cfg, const Bounds& bounds) {
  if (!is_closed(t)) throw OpenTermError(*free_vars(t).begin());
  validate_term(t, cfg);

  TimedLTS lts;
  lts.mode = cfg.mode;

  struct Key {
    TermPtr term;
    uint64_t clock;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const { return k.term->hash * 131 + k.clock; }
  };
  struct KeyEq {
    bool operator()(const Key& a, const Key& b) const {
      return a.clock == b.clock && equal(a.term, b.term);
    }
  };
  std::unordered_map<Key, uint32_t, KeyHash, KeyEq> index;
  std::deque<Key> queue;

  auto state_of = [&](const TermPtr& term, uint64_t clock) {
    Key k{state_normal(term), clock};
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    if (index.size() >= bounds.max_states) throw BoundExceeded("max_states");
    uint32_t id = static_cast<uint32_t>(index.size());
    index.emplace(k, id);
    queue.push_back(k);
    lts.action_edges.emplace_back();
    lts.time_edges.emplace_back();
    lts.deadlocked.push_back(false);
    lts.terms.push_back(k.term);
    if (cfg.mode == Mode::Dat) lts.clock.push_back(clock);
    return id;
  };

  lts.initial = state_of(t, 0);

  try {
    while (!queue.empty()) {
      Key k = queue.front();
      queue.pop_front();
      uint32_t id = index.at(k);
      if (cfg.mode == Mode::Drt) {
        Derivation d = derive(k.term, cfg, bounds.unfold_depth);
        for (const auto& m : d.actions) {
          uint32_t dst = kSinkState;
          if (m.target) dst = state_of(m.target, 0);
          else lts.has_sink = true;
          lts.action_edges[id].push_back({m.label, dst});
        }
        if (d.tick) lts.time_edges[id].push_back(state_of(d.tick, 0));
        lts.deadlocked[id] = d.deadlocked;
      } else {
        DerivationAbs d = derive(k.term, k.clock, cfg, bounds.unfold_depth);
        for (const auto& m : d.actions) {
          uint32_t dst = kSinkState;
          if (m.target) dst = state_of(m.target, k.clock);
          else lts.has_sink = true;
          lts.action_edges[id].push_back({m.label, dst});
        }
        // idling stops at the horizon: the window ends there
        if (d.tick && k.clock + 1 <= bounds.horizon)
          lts.time_edges[id].push_back(state_of(k.term, k.clock + 1));
        lts.deadlocked[id] = d.deadlocked;
      }
    }
  } catch (const UnguardedRecursion&) {
    throw BoundExceeded("unfold_depth");
  }

  return lts;
}

std::string export_lts(const TimedLTS& lts, const AlgebraConfig& cfg) {
  std::ostringstream os;
  os << "timedlts (initial=" << lts.initial << ", states=" << lts.num_states()
     << ", aedges=" << lts.num_action_edges() << ", tedges=" << lts.num_time_edges()
     << ")\n";
  for (uint32_t s = 0; s < lts.num_states(); ++s)
    for (const auto& [l, dst] : lts.action_edges[s]) {
      os << s << " \"" << step_to_string(l, cfg) << "\" ";
      if (dst == kSinkState) os << "SINK";
      else os << dst;
      os << '\n';
    }
  for (uint32_t s = 0; s < lts.num_states(); ++s)
    for (uint32_t dst : lts.time_edges[s]) os << s << " \"tick\" " << dst << '\n';
  for (uint32_t s = 0; s < lts.num_states(); ++s)
    if (lts.deadlocked[s]) os << "deadlock " << s << '\n';
  return os.str();
}

}  // namespace tcw
