#include "tcw/rewriter.hpp"

#include <algorithm>
#include <functional>

#include "tcw/errors.hpp"
#include "tcw/sos.hpp"

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

bool is_delta(const TermPtr& t) { return t->op == Op::Action && t->label == kDelta; }
bool is_tau(const TermPtr& t) { return t->op == Op::Action && t->label == kTau; }

// Undelayable summand: an action multiset, possibly with a sequel.
bool is_undelayable_summand(const TermPtr& t) {
  if (is_action_multiset(t)) return true;
  return t->op == Op::Seq && is_action_multiset(t->kids[0]);
}

// Sum of undelayable summands (or a single one).
bool is_undelayable_sum(const TermPtr& t) {
  if (t->op == Op::Alt) {
    for (const auto& k : t->kids)
      if (!is_undelayable_summand(k)) return false;
    return true;
  }
  return is_undelayable_summand(t);
}

struct Hit {
  TermPtr result;
  std::string tag;
};
using MaybeHit = std::optional<Hit>;

struct Rules {
  Mode mode;
  bool branching;
  Op sigma, ups;

  explicit Rules(Mode m, bool b) : mode(m), branching(b) {
    sigma = m == Mode::Drt ? Op::RelDelay : Op::AbsDelay;
    ups = m == Mode::Drt ? Op::RelTimeout : Op::AbsTimeout;
  }

  const char* dr(const char* d, const char* a) const {
    return mode == Mode::Drt ? d : a;
  }

  MaybeHit root(const TermPtr& t, const AlgebraConfig& cfg) const {
    switch (t->op) {
      case Op::Alt: return alt_rules(t);
      case Op::Seq: return seq_rules(t);
      case Op::RelDelay:
      case Op::AbsDelay: return sigma_rules(t);
      case Op::RelTimeout:
      case Op::AbsTimeout: return timeout_rules(t);
      case Op::RelInit:
      case Op::AbsInit: return init_rules(t);
      case Op::WholeParallel:
        return Hit{alt(par(t->kids[0], t->kids[1]), comm(t->kids[0], t->kids[1])),
                   "P1"};
      case Op::Parallel: return par_rules(t);
      case Op::CommMerge: return comm_rules(t, cfg);
      case Op::ConflictElim: return theta_rules(t, cfg);
      case Op::Unless: return unless_rules(t, cfg);
      case Op::Encapsulate: return encap_rules(t, cfg);
      case Op::Abstract: return abstract_rules(t, cfg);
      case Op::Rename: return rename_rules(t, cfg);
      default: return std::nullopt;
    }
  }

  // --- alternative composition ------------------------------------------

  MaybeHit alt_rules(const TermPtr& t) const {
    const auto& ks = t->kids;
    for (size_t i = 0; i < ks.size(); ++i)
      if (ks[i]->op == Op::DeadlockedProc) {
        std::vector<TermPtr> rest;
        for (size_t j = 0; j < ks.size(); ++j)
          if (j != i) rest.push_back(ks[j]);
        return Hit{alt(rest), "A6ID"};
      }
    for (size_t i = 0; i < ks.size(); ++i)
      if (is_delta(ks[i])) {
        std::vector<TermPtr> rest;
        for (size_t j = 0; j < ks.size(); ++j)
          if (j != i) rest.push_back(ks[j]);
        bool undelayable = true;
        for (const auto& k : rest)
          if (!is_undelayable_summand(k)) undelayable = false;
        return Hit{alt(rest), undelayable ? dr("A6DRa", "A6DAa") : dr("A6DRax", "A6DAax")};
      }
    // merge sigma summands into at most one
    int first = -1;
    for (size_t i = 0; i < ks.size(); ++i) {
      if (ks[i]->op != sigma || ks[i]->amount == 0) continue;
      if (first < 0) {
        first = static_cast<int>(i);
        continue;
      }
      const auto& a = ks[first];
      const auto& b = ks[i];
      uint32_t m = std::min(a->amount, b->amount);
      TermPtr ia = a->amount == m ? a->kids[0] : delay(mode, a->amount - m, a->kids[0]);
      TermPtr ib = b->amount == m ? b->kids[0] : delay(mode, b->amount - m, b->kids[0]);
      std::vector<TermPtr> rest;
      for (size_t j = 0; j < ks.size(); ++j)
        if (j != static_cast<size_t>(first) && j != i) rest.push_back(ks[j]);
      rest.push_back(delay(mode, m, alt(ia, ib)));
      return Hit{alt(rest), a->amount == b->amount ? dr("DRT3", "DAT3")
                                                   : dr("DRT3x", "DAT3x")};
    }
    return std::nullopt;
  }

  // --- sequential composition -------------------------------------------

  MaybeHit seq_rules(const TermPtr& t) const {
    const auto& x = t->kids[0];
    const auto& y = t->kids[1];
    if (x->op == Op::DeadlockedProc) return Hit{x, "A7ID"};
    if (is_delta(x)) return Hit{x, dr("A7DRx", "A7DAx")};
    if (x->op == Op::Alt) {
      std::vector<TermPtr> parts;
      for (const auto& k : x->kids) parts.push_back(seq(k, y));
      return Hit{alt(parts), "A4"};
    }
    if (x->op == Op::Seq) return Hit{seq(x->kids[0], seq(x->kids[1], y)), "A5"};
    if (x->op == sigma && x->amount > 0) {
      if (mode == Mode::Drt)
        return Hit{delay(mode, x->amount, seq(x->kids[0], y)), "DRT4"};
      // absolute timing: the sequel keeps its own absolute anchors
      if (x->kids[0]->op == Op::DeadlockedProc) return Hit{x, "DAT6"};
      if (y->op == ups && y->amount == x->amount)
        return Hit{delay(mode, x->amount, seq(x->kids[0], deadlocked())), "DAT4"};
      if (y->op == Op::Alt && y->kids.size() == 2) {
        for (int i = 0; i < 2; ++i) {
          const auto& u = y->kids[i];
          const auto& s = y->kids[1 - i];
          if (u->op == ups && u->amount == x->amount && s->op == sigma &&
              s->amount == x->amount)
            return Hit{delay(mode, x->amount,
                             seq(x->kids[0], initialize(mode, 0, s->kids[0]))),
                       "DAT5"};
        }
      }
      // a sequel that starts in slice 1 or later
      if (y->op == sigma && y->amount > 0) {
        uint32_t j = std::min(x->amount, y->amount);
        TermPtr ix = x->amount == j ? x->kids[0] : delay(mode, x->amount - j, x->kids[0]);
        TermPtr iy = y->amount == j ? y->kids[0] : delay(mode, y->amount - j, y->kids[0]);
        return Hit{delay(mode, j, seq(ix, iy)), "DATSEQx"};
      }
      if (y->op == Op::Alt) {
        // undelayable alternatives of the sequel are unreachable
        std::vector<TermPtr> live;
        bool dropped = false;
        for (const auto& k : y->kids) {
          if (is_undelayable_summand(k) || k->op == Op::DeadlockedProc) dropped = true;
          else live.push_back(k);
        }
        if (dropped && !live.empty()) return Hit{seq(x, alt(live)), "DATSEQx2"};
      }
      if (is_undelayable_sum(y) || y->op == Op::DeadlockedProc)
        return Hit{delay(mode, x->amount, seq(x->kids[0], deadlocked())), "DATSEQx3"};
    }
    if (branching && is_tau(y)) return Hit{x, "B1"};
    return std::nullopt;
  }

  // --- delays --------------------------------------------------------------

  MaybeHit sigma_rules(const TermPtr& t) const {
    const auto& x = t->kids[0];
    if (t->amount == 0) return Hit{x, dr("DRT1", "DAT1x")};
    if (x->op == sigma)
      return Hit{delay(mode, t->amount + x->amount, x->kids[0]), dr("DRT2", "DAT2")};
    if (x->op == Op::DeadlockedProc) {
      if (t->amount == 1) return Hit{act(kDelta), dr("DRT7", "DAT7")};
      return Hit{delay(mode, t->amount - 1, act(kDelta)), dr("DRT7x", "DAT7x")};
    }
    return std::nullopt;
  }

  // --- time-out -------------------------------------------------------------

  MaybeHit timeout_rules(const TermPtr& t) const {
    const auto& x = t->kids[0];
    uint32_t n = t->amount;
    if (n == 0) return Hit{deadlocked(), dr("DRTO1", "DATO1")};
    if (x->op == Op::DeadlockedProc) return Hit{x, dr("DRTO0", "DATO0")};
    if (x->op == Op::Action) return Hit{x, dr("DRTO2", "DATO2")};
    if (is_action_multiset(x)) return Hit{x, dr("DRTO2x", "DATO2x")};
    if (x->op == Op::Seq)
      return Hit{seq(timeout(mode, n, x->kids[0]), x->kids[1]), dr("DRTO5", "DATO5")};
    if (x->op == Op::Alt) {
      std::vector<TermPtr> parts;
      for (const auto& k : x->kids) parts.push_back(timeout(mode, n, k));
      return Hit{alt(parts), dr("DRTO4", "DATO4")};
    }
    if (x->op == sigma && x->amount > 0) {
      uint32_t s = std::min(n, x->amount);
      TermPtr inner = x->amount == s ? x->kids[0] : delay(mode, x->amount - s, x->kids[0]);
      return Hit{delay(mode, s, timeout(mode, n - s, inner)), dr("DRTO3", "DATO3")};
    }
    return std::nullopt;
  }

  // --- initialization ---------------------------------------------------------

  MaybeHit init_rules(const TermPtr& t) const {
    const auto& x = t->kids[0];
    uint32_t n = t->amount;
    if (n == 0) {
      if (mode == Mode::Dat && x->op == Op::DeadlockedProc) return Hit{x, "DAI0"};
      return Hit{x, dr("DRI1", "DAT1")};
    }
    if (x->op == Op::DeadlockedProc)
      return Hit{delay(mode, n, deadlocked()), dr("DRI0", "DAI1")};
    if (x->op == Op::Action || is_action_multiset(x)) {
      bool single = x->op == Op::Action;
      if (mode == Mode::Drt)
        return Hit{n == 1 ? act(kDelta) : delay(mode, n - 1, act(kDelta)),
                   single ? "DRI2" : "DRI2x"};
      return Hit{delay(mode, n, deadlocked()), single ? "DAI2" : "DAI2x"};
    }
    if (x->op == Op::Seq)
      return Hit{seq(initialize(mode, n, x->kids[0]), x->kids[1]), dr("DRI5", "DAI5")};
    if (x->op == Op::Alt) {
      std::vector<TermPtr> parts;
      for (const auto& k : x->kids) parts.push_back(initialize(mode, n, k));
      return Hit{alt(parts), dr("DRI4", "DAI4")};
    }
    if (x->op == sigma && x->amount > 0) {
      uint32_t s = std::min(n, x->amount);
      TermPtr inner = x->amount == s ? x->kids[0] : delay(mode, x->amount - s, x->kids[0]);
      TermPtr rest = initialize(mode, n - s, mode == Mode::Dat
                                                 ? initialize(mode, 0, inner)
                                                 : inner);
      return Hit{delay(mode, s, rest), dr("DRI3", "DAI3")};
    }
    return std::nullopt;
  }

  // --- parallel ---------------------------------------------------------------

  MaybeHit par_rules(const TermPtr& t) const {
    const auto& ks = t->kids;
    for (const auto& k : ks)
      if (k->op == Op::DeadlockedProc) return Hit{deadlocked(), "PID12"};
    for (size_t i = 0; i < ks.size(); ++i)
      if (ks[i]->op == Op::Alt) {
        std::vector<TermPtr> sum;
        for (const auto& choice : ks[i]->kids) {
          std::vector<TermPtr> comp = ks;
          comp[i] = choice;
          sum.push_back(par(comp));
        }
        return Hit{alt(sum), i == 0 ? "P7" : "P8"};
      }
    if (branching) {
      for (size_t i = 0; i < ks.size(); ++i)
        if (is_tau(ks[i]) && ks.size() >= 2) {
          bool rest_undelayable = true;
          for (size_t j = 0; j < ks.size(); ++j)
            if (j != i && !is_undelayable_summand(ks[j])) rest_undelayable = false;
          if (rest_undelayable) {
            std::vector<TermPtr> rest;
            for (size_t j = 0; j < ks.size(); ++j)
              if (j != i) rest.push_back(ks[j]);
            return Hit{par(rest), "B3"};
          }
        }
    }
    size_t sigma_at = SIZE_MAX, plain_at = SIZE_MAX, delta_at = SIZE_MAX;
    for (size_t i = 0; i < ks.size(); ++i) {
      if (ks[i]->op == sigma && ks[i]->amount > 0 && sigma_at == SIZE_MAX) sigma_at = i;
      if (is_undelayable_summand(ks[i]) && plain_at == SIZE_MAX) plain_at = i;
      if (is_delta(ks[i]) && delta_at == SIZE_MAX) delta_at = i;
    }
    if (delta_at != SIZE_MAX && ks.size() >= 2)
      return Hit{act(kDelta), dr("P9DRx", "P9DAx")};
    if (sigma_at != SIZE_MAX && plain_at != SIZE_MAX)
      return Hit{act(kDelta), sigma_at < plain_at ? dr("DRP10ID", "DAP10ID")
                                                  : dr("DRP9ID", "DAP9ID")};
    if (sigma_at != SIZE_MAX) {
      uint32_t m = UINT32_MAX;
      for (const auto& k : ks) {
        if (k->op != sigma || k->amount == 0) return std::nullopt;
        m = std::min(m, k->amount);
      }
      std::vector<TermPtr> inner;
      for (const auto& k : ks)
        inner.push_back(k->amount == m ? k->kids[0]
                                       : delay(mode, k->amount - m, k->kids[0]));
      return Hit{delay(mode, m, par(inner)), dr("DRP11", "DAP11")};
    }
    // all components undelayable: absorb one sequel pairwise
    for (size_t i = 0; i < ks.size(); ++i) {
      if (ks[i]->op != Op::Seq || !is_undelayable_summand(ks[i])) continue;
      size_t j = i == 0 ? 1 : 0;
      if (!is_undelayable_summand(ks[j])) return std::nullopt;
      const auto& a = ks[i];
      const auto& b = ks[j];
      TermPtr combined;
      const char* tag;
      if (b->op == Op::Seq) {
        combined = seq(par(a->kids[0], b->kids[0]), whole_par(a->kids[1], b->kids[1]));
        tag = dr("P6DR", "P6DA");
      } else {
        combined = seq(par(a->kids[0], b), a->kids[1]);
        tag = i < j ? dr("P5DR", "P5DA") : dr("P4DR", "P4DA");
      }
      std::vector<TermPtr> rest;
      for (size_t r = 0; r < ks.size(); ++r)
        if (r != i && r != j) rest.push_back(ks[r]);
      rest.push_back(combined);
      return Hit{par(rest), tag};
    }
    return std::nullopt;
  }

  // --- communication merge ------------------------------------------------------

  MaybeHit comm_rules(const TermPtr& t, const AlgebraConfig& cfg) const {
    const auto& x = t->kids[0];
    const auto& y = t->kids[1];
    if (x->op == Op::DeadlockedProc) return Hit{deadlocked(), "CID23"};
    if (y->op == Op::DeadlockedProc) return Hit{deadlocked(), "CID24"};
    if (x->op == Op::Alt) {
      std::vector<TermPtr> parts;
      for (const auto& k : x->kids) parts.push_back(comm(k, y));
      return Hit{alt(parts), "C18"};
    }
    if (y->op == Op::Alt) {
      std::vector<TermPtr> parts;
      for (const auto& k : y->kids) parts.push_back(comm(x, k));
      return Hit{alt(parts), "C19"};
    }
    bool xs = x->op == sigma && x->amount > 0;
    bool ysg = y->op == sigma && y->amount > 0;
    if (xs && ysg) {
      uint32_t m = std::min(x->amount, y->amount);
      TermPtr ix = x->amount == m ? x->kids[0] : delay(mode, x->amount - m, x->kids[0]);
      TermPtr iy = y->amount == m ? y->kids[0] : delay(mode, y->amount - m, y->kids[0]);
      return Hit{delay(mode, m, comm(ix, iy)), dr("DRC22", "DAC22")};
    }
    if (xs && is_undelayable_summand(y))
      return Hit{act(kDelta), dr("DRC21ID", "DAC21ID")};
    if (ysg && is_undelayable_summand(x))
      return Hit{act(kDelta), dr("DRC20ID", "DAC20ID")};
    if (is_undelayable_summand(x) && is_undelayable_summand(y)) {
      TermPtr ax = x->op == Op::Seq ? x->kids[0] : x;
      TermPtr ay = y->op == Op::Seq ? y->kids[0] : y;
      std::optional<LabelId> c;
      if (ax->op == Op::Action && ay->op == Op::Action)
        c = cfg.gamma(ax->label, ay->label);
      if (!c) return Hit{act(kDelta), dr("C14DRx", "C14DAx")};
      if (x->op == Op::Seq && y->op == Op::Seq)
        return Hit{seq(act(*c), whole_par(x->kids[1], y->kids[1])), dr("C17DR", "C17DA")};
      if (x->op == Op::Seq) return Hit{seq(act(*c), x->kids[1]), dr("C16DR", "C16DA")};
      if (y->op == Op::Seq) return Hit{seq(act(*c), y->kids[1]), dr("C15DR", "C15DA")};
      return Hit{act(*c), dr("C14DR", "C14DA")};
    }
    return std::nullopt;
  }

  // --- conflict elimination and unless -------------------------------------------

  MaybeHit theta_rules(const TermPtr& t, const AlgebraConfig& cfg) const {
    const auto& x = t->kids[0];
    if (x->op == Op::RecVar || x->op == Op::RecConst || !is_closed(x))
      return std::nullopt;
    std::string tag;
    TermPtr e = theta_expand(x, cfg, &tag);
    return Hit{e, tag.empty() ? "CE25x" : tag};
  }

  MaybeHit unless_rules(const TermPtr& t, const AlgebraConfig& cfg) const {
    const auto& x = t->kids[0];
    const auto& y = t->kids[1];
    if (!is_closed(y) || !is_closed(x)) return std::nullopt;
    if (x->op == Op::DeadlockedProc) return Hit{x, "UID44x"};
    if (x->op == Op::Action && y->op == Op::Action) {
      if (is_delta(x)) return Hit{x, dr("U35DRID", "U35DAID")};
      if (is_delta(y)) return Hit{x, dr("U34DRID", "U34DAID")};
      std::set<LabelId> s = action_symbols(y);
      if (cfg.silences(x->label, s)) {
        bool direct = cfg.in_conflict(x->label, y->label);
        return Hit{act(kTau), direct ? dr("U31DRID", "U31DAID")
                                     : dr("U33DRID", "U33DAID")};
      }
      return Hit{x, dr("U32DRID", "U32DAID")};
    }
    return Hit{unless_expand(x, y, cfg), "U44x"};
  }

  // --- encapsulation, abstraction, renaming ----------------------------------------

  MaybeHit encap_rules(const TermPtr& t, const AlgebraConfig& cfg) const {
    const auto& x = t->kids[0];
    const auto& hs = t->label_set;
    auto in_h = [&](LabelId a) { return std::binary_search(hs.begin(), hs.end(), a); };
    switch (x->op) {
      case Op::DeadlockedProc: return Hit{x, dr("D3DRID", "D3DAID")};
      case Op::Action:
        if (in_h(x->label)) return Hit{act(kDelta), dr("D2DRID", "D2DAID")};
        return Hit{x, dr("D1DRID", "D1DAID")};
      case Op::Alt: {
        std::vector<TermPtr> parts;
        for (const auto& k : x->kids) parts.push_back(encap(hs, k, cfg));
        return Hit{alt(parts), "D4"};
      }
      case Op::Seq:
        return Hit{seq(encap(hs, x->kids[0], cfg), encap(hs, x->kids[1], cfg)), "D5"};
      case Op::Parallel: {
        std::vector<TermPtr> parts;
        for (const auto& k : x->kids) parts.push_back(encap(hs, k, cfg));
        return Hit{par(parts), "D6"};
      }
      default:
        if (x->op == sigma)
          return Hit{delay(mode, x->amount, encap(hs, x->kids[0], cfg)),
                     dr("DRD7", "DAD7")};
        return std::nullopt;
    }
  }

  MaybeHit abstract_rules(const TermPtr& t, const AlgebraConfig& cfg) const {
    const auto& x = t->kids[0];
    const auto& is = t->label_set;
    auto in_i = [&](LabelId a) { return std::binary_search(is.begin(), is.end(), a); };
    switch (x->op) {
      case Op::DeadlockedProc: return Hit{x, "TI0"};
      case Op::Action:
        if (in_i(x->label)) return Hit{act(kTau), "TI2"};
        return Hit{x, "TI1"};
      case Op::Alt: {
        std::vector<TermPtr> parts;
        for (const auto& k : x->kids) parts.push_back(abstract_away(is, k, cfg));
        return Hit{alt(parts), "TI4"};
      }
      case Op::Seq:
        return Hit{seq(abstract_away(is, x->kids[0], cfg),
                       abstract_away(is, x->kids[1], cfg)),
                   "TI5"};
      case Op::Parallel: {
        std::vector<TermPtr> parts;
        for (const auto& k : x->kids) parts.push_back(abstract_away(is, k, cfg));
        return Hit{par(parts), "TI6"};
      }
      default:
        if (x->op == sigma)
          return Hit{delay(mode, x->amount, abstract_away(is, x->kids[0], cfg)),
                     dr("DRTI", "DATI")};
        return std::nullopt;
    }
  }

  MaybeHit rename_rules(const TermPtr& t, const AlgebraConfig& cfg) const {
    const auto& x = t->kids[0];
    const auto& f = t->label_map;
    auto apply = [&](LabelId a) {
      for (const auto& [from, to] : f)
        if (from == a) return to;
      return a;
    };
    switch (x->op) {
      case Op::DeadlockedProc: return Hit{x, dr("DRTRN2", "DATRN2")};
      case Op::Action:
        if (is_tau(x)) return Hit{x, dr("DRTRN3", "DATRN3")};
        return Hit{act(apply(x->label)), dr("DRTRN1", "DATRN1")};
      case Op::Alt: {
        std::vector<TermPtr> parts;
        for (const auto& k : x->kids) parts.push_back(rename(f, k, cfg));
        return Hit{alt(parts), "RN3"};
      }
      case Op::Seq:
        return Hit{seq(rename(f, x->kids[0], cfg), rename(f, x->kids[1], cfg)), "RN4"};
      case Op::Parallel: {
        std::vector<TermPtr> parts;
        for (const auto& k : x->kids) parts.push_back(rename(f, k, cfg));
        return Hit{par(parts), "RN5"};
      }
      default:
        if (x->op == sigma)
          return Hit{delay(mode, x->amount, rename(f, x->kids[0], cfg)),
                     dr("DRTRN", "DATRN")};
        return std::nullopt;
    }
  }
};

}  // namespace

// --- RuleSet ------------------------------------------------------------------

namespace {

std::vector<AxiomInfo> build_manifest(Mode mode) {
  auto D = [&](const char* d, const char* a) { return mode == Mode::Drt ? d : a; };
  std::vector<AxiomInfo> m;
  auto add = [&](const std::string& tag, RuleUse use, bool br = false) {
    m.push_back({tag, use, br});
  };
  add("A1", RuleUse::Canonicalizer);
  add("A2", RuleUse::Canonicalizer);
  add("A3", RuleUse::Canonicalizer);
  add("A4", RuleUse::Rewrite);
  add("A5", RuleUse::Rewrite);
  add("A6ID", RuleUse::Rewrite);
  add("A7ID", RuleUse::Rewrite);
  add(D("DRT1", "DAT1"), RuleUse::Rewrite);
  add(D("DRT2", "DAT2"), RuleUse::Rewrite);
  add(D("DRT3", "DAT3"), RuleUse::Rewrite);
  add(D("DRT4", "DAT4"), RuleUse::Rewrite);
  if (mode == Mode::Dat) {
    add("DAT5", RuleUse::Rewrite);
    add("DAT6", RuleUse::Rewrite);
  }
  add(D("DRT7", "DAT7"), RuleUse::Rewrite);
  add(D("A6DRa", "A6DAa"), RuleUse::Rewrite);
  for (const char* base : {"O0", "O1", "O2", "O3", "O4", "O5"})
    add((mode == Mode::Drt ? std::string("DRT") : std::string("DAT")) + base,
        RuleUse::Rewrite);
  for (const char* base : {"0", "1", "2", "3", "4", "5"})
    add((mode == Mode::Drt ? std::string("DRI") : std::string("DAI")) + base,
        RuleUse::Rewrite);
  add("P1", RuleUse::Rewrite);
  add("P2", RuleUse::Canonicalizer);
  add("P3", RuleUse::Canonicalizer);
  add(D("P4DR", "P4DA"), RuleUse::Rewrite);
  add(D("P5DR", "P5DA"), RuleUse::Rewrite);
  add(D("P6DR", "P6DA"), RuleUse::Rewrite);
  add("P7", RuleUse::Rewrite);
  add("P8", RuleUse::Rewrite);
  add(D("DRP9ID", "DAP9ID"), RuleUse::Rewrite);
  add(D("DRP10ID", "DAP10ID"), RuleUse::Rewrite);
  add(D("DRP11", "DAP11"), RuleUse::Rewrite);
  add("PID12", RuleUse::Rewrite);
  add("PID13", RuleUse::Rewrite);
  add(D("C14DR", "C14DA"), RuleUse::Rewrite);
  add(D("C15DR", "C15DA"), RuleUse::Rewrite);
  add(D("C16DR", "C16DA"), RuleUse::Rewrite);
  add(D("C17DR", "C17DA"), RuleUse::Rewrite);
  add("C18", RuleUse::Rewrite);
  add("C19", RuleUse::Rewrite);
  add(D("DRC20ID", "DAC20ID"), RuleUse::Rewrite);
  add(D("DRC21ID", "DAC21ID"), RuleUse::Rewrite);
  add(D("DRC22", "DAC22"), RuleUse::Rewrite);
  add("CID23", RuleUse::Rewrite);
  add("CID24", RuleUse::Rewrite);
  add(D("CE25DR", "CE25DA"), RuleUse::Rewrite);
  add(D("CE26DRID", "CE26DAID"), RuleUse::Rewrite);
  add("CE27", RuleUse::Rewrite);
  add("CE28", RuleUse::Rewrite);
  add("CE29", RuleUse::Rewrite);
  add("CE30", RuleUse::Rewrite);
  add(D("U31DRID", "U31DAID"), RuleUse::Rewrite);
  add(D("U32DRID", "U32DAID"), RuleUse::Rewrite);
  add(D("U33DRID", "U33DAID"), RuleUse::Rewrite);
  add(D("U34DRID", "U34DAID"), RuleUse::Rewrite);
  add(D("U35DRID", "U35DAID"), RuleUse::Rewrite);
  for (const char* u : {"U36", "U37", "U38", "U39", "U40", "U41", "U42", "U43"})
    add(u, RuleUse::EquationOnly);
  add(D("D1DRID", "D1DAID"), RuleUse::Rewrite);
  add(D("D2DRID", "D2DAID"), RuleUse::Rewrite);
  add(D("D3DRID", "D3DAID"), RuleUse::Rewrite);
  add("D4", RuleUse::Rewrite);
  add("D5", RuleUse::Rewrite);
  add("D6", RuleUse::Rewrite);
  add(D("DRD7", "DAD7"), RuleUse::Rewrite);
  add("TI0", RuleUse::Rewrite);
  add("TI1", RuleUse::Rewrite);
  add("TI2", RuleUse::Rewrite);
  add(D("DRTI", "DATI"), RuleUse::Rewrite);
  add("TI4", RuleUse::Rewrite);
  add("TI5", RuleUse::Rewrite);
  add("TI6", RuleUse::Rewrite);
  add(D("DRTB1", "DATB1"), RuleUse::EquationOnly, true);
  add(D("DRTB2", "DATB2"), RuleUse::EquationOnly, true);
  add(D("DRTB3", "DATB3"), RuleUse::EquationOnly, true);
  add("B1", RuleUse::Rewrite, true);
  add("B3", RuleUse::Rewrite, true);
  add(D("DRTRN1", "DATRN1"), RuleUse::Rewrite);
  add(D("DRTRN2", "DATRN2"), RuleUse::Rewrite);
  add(D("DRTRN3", "DATRN3"), RuleUse::Rewrite);
  add(D("DRTRN", "DATRN"), RuleUse::Rewrite);
  add("RN3", RuleUse::Rewrite);
  add("RN4", RuleUse::Rewrite);
  add("RN5", RuleUse::Rewrite);
  for (const char* aux :
       {"A6DRax", "A7DRx", "DRT3x", "DRT7x", "DRTO2x", "DRI2x", "P9DRx", "CE25x",
        "CE25xU", "CE28xT", "CE28xTO", "CE28xIN", "CE29x", "U44x", "UID44x",
        "C14DRx", "DAT1x", "DATSEQx", "DATSEQx2", "DATSEQx3"})
    add(aux, RuleUse::Auxiliary);
  return m;
}

}  // namespace

RuleSet::RuleSet(Mode m, bool b) : mode_(m), branching_(b), manifest_(build_manifest(m)) {}

const RuleSet& RuleSet::strong(Mode mode) {
  static RuleSet drt(Mode::Drt, false), dat(Mode::Dat, false);
  return mode == Mode::Drt ? drt : dat;
}

const RuleSet& RuleSet::branching(Mode mode) {
  static RuleSet drt(Mode::Drt, true), dat(Mode::Dat, true);
  return mode == Mode::Drt ? drt : dat;
}

std::optional<std::pair<TermPtr, std::string>> RuleSet::apply_root(
    const TermPtr& t, const AlgebraConfig& cfg) const {
  Rules r(mode_, branching_);
  if (auto h = r.root(t, cfg)) return std::make_pair(h->result, h->tag);
  return std::nullopt;
}

// --- strategy -------------------------------------------------------------------

namespace {

// Operands of conflict elimination and unless are opaque to the innermost
// search: those operators are expanded at their own node first so the
// expansion observes the operand as written.
std::optional<std::pair<TermPtr, std::string>> step_at(const TermPtr& t,
                                                       const RuleSet& rules,
                                                       const AlgebraConfig& cfg) {
  bool opaque = t->op == Op::ConflictElim || t->op == Op::Unless;
  if (!opaque) {
    for (size_t i = 0; i < t->kids.size(); ++i) {
      if (auto sub = step_at(t->kids[i], rules, cfg)) {
        std::vector<TermPtr> kids = t->kids;
        kids[i] = sub->first;
        return std::make_pair(rebuild_with_kids(t, std::move(kids)), sub->second);
      }
    }
  }
  if (auto h = rules.apply_root(t, cfg)) return h;
  if (opaque) {
    for (size_t i = 0; i < t->kids.size(); ++i) {
      if (auto sub = step_at(t->kids[i], rules, cfg)) {
        std::vector<TermPtr> kids = t->kids;
        kids[i] = sub->first;
        return std::make_pair(rebuild_with_kids(t, std::move(kids)), sub->second);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::pair<TermPtr, std::string>> rewrite_step(const TermPtr& t,
                                                            const RuleSet& rules,
                                                            const AlgebraConfig& cfg) {
  return step_at(canonicalize(t), rules, cfg);
}

TermPtr normalize(const TermPtr& t, const AlgebraConfig& cfg, const RuleSet& rules,
                  uint64_t budget, std::vector<RewriteTrace>* trace) {
  TermPtr cur = canonicalize(t);
  for (uint64_t i = 0; i < budget; ++i) {
    auto h = step_at(cur, rules, cfg);
    if (!h) return cur;
    TermPtr next = canonicalize(h->first);
    if (trace) trace->push_back({h->second, cur, next});
    cur = next;
  }
  throw NonTermination(budget);
}

bool prove_equal(const TermPtr& t1, const TermPtr& t2, const AlgebraConfig& cfg,
                 uint64_t budget) {
  const RuleSet& rules = RuleSet::strong(cfg.mode);
  return equal(normalize(t1, cfg, rules, budget), normalize(t2, cfg, rules, budget));
}

}  // namespace tcw
