#include "tcw/term.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "tcw/errors.hpp"

namespace tcw {

namespace {

size_t hash_combine(size_t seed, size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
}

size_t node_hash(const TermNode& n) {
  size_t h = static_cast<size_t>(n.op) * 0x9e3779b97f4a7c15ull + 1;
  h = hash_combine(h, n.label);
  h = hash_combine(h, n.amount);
  for (const auto& k : n.kids) h = hash_combine(h, k->hash);
  for (LabelId l : n.label_set) h = hash_combine(h, l + 7);
  for (const auto& [a, b] : n.label_map) h = hash_combine(h, a * 131 + b);
  h = hash_combine(h, std::hash<std::string>{}(n.var));
  if (n.spec) h = hash_combine(h, std::hash<std::string>{}(n.spec->key()));
  return h;
}

TermPtr make(TermNode n) {
  n.hash = node_hash(n);
  return std::make_shared<const TermNode>(std::move(n));
}

bool is_rel_op(Op op) {
  return op == Op::RelDelay || op == Op::RelTimeout || op == Op::RelInit;
}
bool is_abs_op(Op op) {
  return op == Op::AbsDelay || op == Op::AbsTimeout || op == Op::AbsInit;
}

// Returns the timing family used in t: 0 none, 1 rel, 2 abs; throws on mix.
int timing_family(const TermPtr& t) {
  int fam = 0;
  std::function<void(const TermPtr&)> walk = [&](const TermPtr& u) {
    int here = is_rel_op(u->op) ? 1 : is_abs_op(u->op) ? 2 : 0;
    if (here != 0) {
      if (fam != 0 && fam != here) throw ModeMixError();
      fam = here;
    }
    for (const auto& k : u->kids) walk(k);
    if (u->spec)
      for (const auto& [v, rhs] : u->spec->equations) {
        (void)v;
        walk(rhs);
      }
  };
  walk(t);
  return fam;
}

}  // namespace

const TermPtr* RecSpecData::find(const std::string& v) const {
  for (const auto& [name, rhs] : equations)
    if (name == v) return &rhs;
  return nullptr;
}

std::string RecSpecData::key() const {
  std::ostringstream os;
  std::function<void(const TermPtr&)> dump = [&](const TermPtr& t) {
    os << static_cast<int>(t->op) << ':' << t->label << ':' << t->amount << ':'
       << t->var << '(';
    for (const auto& k : t->kids) dump(k);
    os << ')';
    for (LabelId l : t->label_set) os << l << ',';
    for (const auto& [a, b] : t->label_map) os << a << '>' << b << ',';
  };
  for (const auto& [name, rhs] : equations) {
    os << name << '=';
    dump(rhs);
    os << ';';
  }
  return os.str();
}

TermPtr deadlocked() {
  TermNode n;
  n.op = Op::DeadlockedProc;
  return make(std::move(n));
}

TermPtr act(LabelId a) {
  TermNode n;
  n.op = Op::Action;
  n.label = a;
  return make(std::move(n));
}

TermPtr alt(TermPtr a, TermPtr b) { return alt(std::vector<TermPtr>{a, b}); }

TermPtr alt(std::vector<TermPtr> xs) {
  if (xs.empty()) throw Error("alternative composition needs at least one operand");
  if (xs.size() == 1) return xs[0];
  std::vector<TermPtr> flat;
  for (auto& x : xs) {
    if (x->op == Op::Alt)
      flat.insert(flat.end(), x->kids.begin(), x->kids.end());
    else
      flat.push_back(std::move(x));
  }
  TermNode n;
  n.op = Op::Alt;
  n.kids = std::move(flat);
  return make(std::move(n));
}

TermPtr seq(TermPtr a, TermPtr b) {
  TermNode n;
  n.op = Op::Seq;
  n.kids = {std::move(a), std::move(b)};
  return make(std::move(n));
}

TermPtr delay(Mode m, uint32_t cnt, TermPtr x) {
  TermNode n;
  n.op = m == Mode::Drt ? Op::RelDelay : Op::AbsDelay;
  n.amount = cnt;
  n.kids = {std::move(x)};
  return make(std::move(n));
}

TermPtr timeout(Mode m, uint32_t cnt, TermPtr x) {
  TermNode n;
  n.op = m == Mode::Drt ? Op::RelTimeout : Op::AbsTimeout;
  n.amount = cnt;
  n.kids = {std::move(x)};
  return make(std::move(n));
}

TermPtr initialize(Mode m, uint32_t cnt, TermPtr x) {
  TermNode n;
  n.op = m == Mode::Drt ? Op::RelInit : Op::AbsInit;
  n.amount = cnt;
  n.kids = {std::move(x)};
  return make(std::move(n));
}

TermPtr whole_par(TermPtr a, TermPtr b) {
  TermNode n;
  n.op = Op::WholeParallel;
  n.kids = {std::move(a), std::move(b)};
  return make(std::move(n));
}

TermPtr par(TermPtr a, TermPtr b) { return par(std::vector<TermPtr>{a, b}); }

TermPtr par(std::vector<TermPtr> xs) {
  if (xs.empty()) throw Error("parallel composition needs at least one operand");
  if (xs.size() == 1) return xs[0];
  std::vector<TermPtr> flat;
  for (auto& x : xs) {
    if (x->op == Op::Parallel)
      flat.insert(flat.end(), x->kids.begin(), x->kids.end());
    else
      flat.push_back(std::move(x));
  }
  TermNode n;
  n.op = Op::Parallel;
  n.kids = std::move(flat);
  return make(std::move(n));
}

TermPtr comm(TermPtr a, TermPtr b) {
  TermNode n;
  n.op = Op::CommMerge;
  n.kids = {std::move(a), std::move(b)};
  return make(std::move(n));
}

TermPtr conflict_elim(TermPtr x) {
  TermNode n;
  n.op = Op::ConflictElim;
  n.kids = {std::move(x)};
  return make(std::move(n));
}

TermPtr unless(TermPtr a, TermPtr b) {
  TermNode n;
  n.op = Op::Unless;
  n.kids = {std::move(a), std::move(b)};
  return make(std::move(n));
}

TermPtr encap(std::vector<LabelId> hs, TermPtr x, const AlgebraConfig& cfg) {
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  for (LabelId l : hs) {
    if (l == kTau) throw ConfigError("encapsulation", "tau may not be blocked");
    if (l >= cfg.end_label()) throw UnknownLabel(std::to_string(l));
  }
  TermNode n;
  n.op = Op::Encapsulate;
  n.label_set = std::move(hs);
  n.kids = {std::move(x)};
  return make(std::move(n));
}

TermPtr abstract_away(std::vector<LabelId> is, TermPtr x, const AlgebraConfig& cfg) {
  std::sort(is.begin(), is.end());
  is.erase(std::unique(is.begin(), is.end()), is.end());
  for (LabelId l : is) {
    if (l == kDelta) throw ConfigError("abstraction", "delta may not be hidden");
    if (l >= cfg.end_label()) throw UnknownLabel(std::to_string(l));
  }
  TermNode n;
  n.op = Op::Abstract;
  n.label_set = std::move(is);
  n.kids = {std::move(x)};
  return make(std::move(n));
}

TermPtr rename(std::vector<std::pair<LabelId, LabelId>> f, TermPtr x,
               const AlgebraConfig& cfg) {
  std::sort(f.begin(), f.end());
  for (size_t i = 0; i + 1 < f.size(); ++i)
    if (f[i].first == f[i + 1].first)
      throw InvalidRenaming("duplicate source " + cfg.name(f[i].first));
  for (const auto& [a, b] : f) {
    if (a == kTau || a == kDelta || b == kTau || b == kDelta)
      throw InvalidRenaming("tau and delta are fixed points of every renaming");
    if (a >= cfg.end_label() || b >= cfg.end_label())
      throw UnknownLabel(std::to_string(std::max(a, b)));
  }
  // Identity entries are dropped; the map is total with identity default, so
  // two maps with the same non-identity part are the same renaming.
  std::vector<std::pair<LabelId, LabelId>> packed;
  for (const auto& e : f)
    if (e.first != e.second) packed.push_back(e);
  TermNode n;
  n.op = Op::Rename;
  n.label_map = std::move(packed);
  n.kids = {std::move(x)};
  return make(std::move(n));
}

TermPtr rec_var(std::string name) {
  TermNode n;
  n.op = Op::RecVar;
  n.var = std::move(name);
  return make(std::move(n));
}

TermPtr rec_const(std::string name, RecSpecPtr spec) {
  if (!spec || !spec->find(name)) throw UnknownVariable(name);
  TermNode n;
  n.op = Op::RecConst;
  n.var = std::move(name);
  n.spec = std::move(spec);
  return make(std::move(n));
}

TermPtr rebuild_with_kids(const TermPtr& t, std::vector<TermPtr> kids) {
  TermNode n = *t;
  n.kids = std::move(kids);
  return make(std::move(n));
}

void validate_term(const TermPtr& t, const AlgebraConfig& cfg) {
  int fam = timing_family(t);
  if (fam == 1 && cfg.mode != Mode::Drt) throw ModeMixError();
  if (fam == 2 && cfg.mode != Mode::Dat) throw ModeMixError();
  std::function<void(const TermPtr&)> walk = [&](const TermPtr& u) {
    if (u->op == Op::Action && u->label >= cfg.end_label())
      throw UnknownLabel(std::to_string(u->label));
    for (const auto& k : u->kids) walk(k);
    if (u->spec)
      for (const auto& [v, rhs] : u->spec->equations) {
        (void)v;
        walk(rhs);
      }
  };
  walk(t);
}

// --- ordering ---------------------------------------------------------------

int compare(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->op != b->op) return a->op < b->op ? -1 : 1;
  if (a->label != b->label) return a->label < b->label ? -1 : 1;
  if (a->amount != b->amount) return a->amount < b->amount ? -1 : 1;
  if (a->var != b->var) return a->var < b->var ? -1 : 1;
  if (a->label_set != b->label_set) return a->label_set < b->label_set ? -1 : 1;
  if (a->label_map != b->label_map) return a->label_map < b->label_map ? -1 : 1;
  if (a->kids.size() != b->kids.size())
    return a->kids.size() < b->kids.size() ? -1 : 1;
  for (size_t i = 0; i < a->kids.size(); ++i) {
    int c = compare(a->kids[i], b->kids[i]);
    if (c != 0) return c;
  }
  if (a->spec || b->spec) {
    std::string ka = a->spec ? a->spec->key() : "";
    std::string kb = b->spec ? b->spec->key() : "";
    if (ka != kb) return ka < kb ? -1 : 1;
  }
  return 0;
}

bool equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash) return false;
  return compare(a, b) == 0;
}

TermPtr canonicalize(const TermPtr& t) {
  std::vector<TermPtr> kids;
  kids.reserve(t->kids.size());
  for (const auto& k : t->kids) kids.push_back(canonicalize(k));

  if (t->op == Op::Alt || t->op == Op::Parallel) {
    std::vector<TermPtr> flat;
    for (auto& k : kids) {
      if (k->op == t->op)
        flat.insert(flat.end(), k->kids.begin(), k->kids.end());
      else
        flat.push_back(std::move(k));
    }
    std::sort(flat.begin(), flat.end(),
              [](const TermPtr& x, const TermPtr& y) { return compare(x, y) < 0; });
    if (t->op == Op::Alt)  // A3: duplicate summands collapse
      flat.erase(std::unique(flat.begin(), flat.end(),
                             [](const TermPtr& x, const TermPtr& y) {
                               return equal(x, y);
                             }),
                 flat.end());
    if (flat.size() == 1) return flat[0];
    TermNode n;
    n.op = t->op;
    n.kids = std::move(flat);
    return make(std::move(n));
  }

  bool changed = false;
  for (size_t i = 0; i < kids.size(); ++i)
    if (kids[i].get() != t->kids[i].get()) changed = true;
  if (!changed) return t;
  TermNode n = *t;
  n.kids = std::move(kids);
  return make(std::move(n));
}

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> out;
  std::function<void(const TermPtr&)> walk = [&](const TermPtr& u) {
    if (u->op == Op::RecVar) {
      out.insert(u->var);
      return;
    }
    if (u->op == Op::RecConst) return;  // binds every variable of its spec
    for (const auto& k : u->kids) walk(k);
  };
  walk(t);
  return out;
}

bool is_closed(const TermPtr& t) { return free_vars(t).empty(); }

namespace {

// Auxiliary classification used by is_basic: a term is in B1 when it is a
// sum of undelayable summands (action multisets, possibly with tails).
bool is_action_multiset(const TermPtr& t) {
  if (t->op == Op::Action) return true;
  if (t->op == Op::Parallel) {
    for (const auto& k : t->kids)
      if (k->op != Op::Action) return false;
    return true;
  }
  return false;
}

bool in_b(const TermPtr& t, Mode mode);

bool in_b1(const TermPtr& t, Mode mode) {
  if (is_action_multiset(t)) return true;
  if (t->op == Op::Seq) {
    const auto& head = t->kids[0];
    if (!is_action_multiset(head)) return false;
    // delta has no sequel in basic form
    if (head->op == Op::Action && head->label == kDelta) return false;
    return in_b(t->kids[1], mode);
  }
  if (t->op == Op::Alt) {
    for (const auto& k : t->kids)
      if (!in_b1(k, mode)) return false;
    return true;
  }
  return false;
}

bool in_b0(const TermPtr& t, Mode mode) {
  Op sigma = mode == Mode::Drt ? Op::RelDelay : Op::AbsDelay;
  if (in_b1(t, mode)) return true;
  if (t->op == sigma) return t->amount > 0 && in_b0(t->kids[0], mode);
  if (t->op == Op::Alt) {
    // at most one sigma-guarded group, everything else undelayable
    size_t sigmas = 0;
    for (const auto& k : t->kids) {
      if (k->op == sigma) {
        sigmas++;
        if (k->amount == 0 || !in_b0(k->kids[0], mode)) return false;
      } else if (!in_b1(k, mode)) {
        return false;
      }
    }
    return sigmas <= 1 && sigmas < t->kids.size();
  }
  return false;
}

bool in_b(const TermPtr& t, Mode mode) {
  if (t->op == Op::DeadlockedProc) return true;
  return in_b0(t, mode);
}

}  // namespace

bool is_basic(const TermPtr& t, Mode mode) {
  if (!is_closed(t)) throw OpenTermError(*free_vars(t).begin());
  return in_b(canonicalize(t), mode);
}

std::set<LabelId> action_symbols(const TermPtr& t) {
  std::set<LabelId> out;
  std::set<const RecSpecData*> seen;
  std::function<void(const TermPtr&)> walk = [&](const TermPtr& u) {
    if (u->op == Op::Action && u->label != kTau && u->label != kDelta)
      out.insert(u->label);
    for (const auto& k : u->kids) walk(k);
    if (u->spec && seen.insert(u->spec.get()).second)
      for (const auto& [v, rhs] : u->spec->equations) {
        (void)v;
        walk(rhs);
      }
  };
  walk(t);
  return out;
}

std::multiset<LabelId> action_leaves(const TermPtr& t) {
  std::multiset<LabelId> out;
  std::function<void(const TermPtr&)> walk = [&](const TermPtr& u) {
    if (u->op == Op::Action) out.insert(u->label);
    for (const auto& k : u->kids) walk(k);
  };
  walk(t);
  return out;
}

namespace {

int prec(Op op) {
  switch (op) {
    case Op::Alt: return 0;
    case Op::WholeParallel: return 1;
    case Op::Parallel:
    case Op::CommMerge: return 2;
    case Op::Seq: return 3;
    default: return 4;
  }
}

void print(std::ostream& os, const TermPtr& t, const AlgebraConfig& cfg, int ctx) {
  bool paren = prec(t->op) < ctx;
  if (paren) os << '(';
  switch (t->op) {
    case Op::DeadlockedProc: os << "deadlocked"; break;
    case Op::Action:
      if (t->label == kTau)
        os << "tau";
      else if (t->label == kDelta)
        os << "deadlock";
      else
        os << cfg.name(t->label);
      break;
    case Op::Alt:
      for (size_t i = 0; i < t->kids.size(); ++i) {
        if (i) os << " + ";
        print(os, t->kids[i], cfg, 1);
      }
      break;
    case Op::WholeParallel:
      print(os, t->kids[0], cfg, 2);
      os << " >< ";
      print(os, t->kids[1], cfg, 2);
      break;
    case Op::Parallel:
      for (size_t i = 0; i < t->kids.size(); ++i) {
        if (i) os << " || ";
        print(os, t->kids[i], cfg, 3);
      }
      break;
    case Op::CommMerge:
      print(os, t->kids[0], cfg, 3);
      os << " | ";
      print(os, t->kids[1], cfg, 3);
      break;
    case Op::Seq:
      print(os, t->kids[0], cfg, 4);
      os << " . ";
      print(os, t->kids[1], cfg, 4);
      break;
    case Op::RelDelay:
    case Op::AbsDelay:
      os << "sigma[" << t->amount << "](";
      print(os, t->kids[0], cfg, 0);
      os << ')';
      break;
    case Op::RelTimeout:
    case Op::AbsTimeout:
      os << "timeout[" << t->amount << "](";
      print(os, t->kids[0], cfg, 0);
      os << ')';
      break;
    case Op::RelInit:
    case Op::AbsInit:
      os << "init[" << t->amount << "](";
      print(os, t->kids[0], cfg, 0);
      os << ')';
      break;
    case Op::ConflictElim:
      os << "theta(";
      print(os, t->kids[0], cfg, 0);
      os << ')';
      break;
    case Op::Unless:
      os << '(';
      print(os, t->kids[0], cfg, 1);
      os << " <| ";
      print(os, t->kids[1], cfg, 1);
      os << ')';
      break;
    case Op::Encapsulate:
    case Op::Abstract: {
      os << (t->op == Op::Encapsulate ? "encap{" : "abstract{");
      for (size_t i = 0; i < t->label_set.size(); ++i) {
        if (i) os << ',';
        os << cfg.name(t->label_set[i]);
      }
      os << "}(";
      print(os, t->kids[0], cfg, 0);
      os << ')';
      break;
    }
    case Op::Rename: {
      os << "rename{";
      for (size_t i = 0; i < t->label_map.size(); ++i) {
        if (i) os << ',';
        os << cfg.name(t->label_map[i].first) << "->" << cfg.name(t->label_map[i].second);
      }
      os << "}(";
      print(os, t->kids[0], cfg, 0);
      os << ')';
      break;
    }
    case Op::RecVar: os << t->var; break;
    case Op::RecConst: os << '<' << t->var << "|spec>"; break;
  }
  if (paren) os << ')';
}

}  // namespace

std::string pretty_print(const TermPtr& t, const AlgebraConfig& cfg) {
  std::ostringstream os;
  print(os, t, cfg, 0);
  return os.str();
}

}  // namespace tcw
