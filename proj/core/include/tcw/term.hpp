#ifndef TCW_TERM_HPP
#define TCW_TERM_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tcw/config.hpp"

namespace tcw {

enum class Op : uint8_t {
  DeadlockedProc,  // the process that has deadlocked before the current slice
  Action,          // undelayable action; tau and delta are reserved labels
  Alt,             // + (n-ary after canonicalization)
  Seq,             // .
  RelDelay,        // sigma^n relative
  AbsDelay,        // sigma^n absolute
  RelTimeout,      // upsilon^n relative
  AbsTimeout,      // upsilon^n absolute
  RelInit,         // initialization, relative
  AbsInit,         // initialization, absolute
  WholeParallel,   // whole merge (parallel + communication)
  Parallel,        // || (n-ary after canonicalization)
  CommMerge,       // communication merge
  ConflictElim,    // theta
  Unless,          // left unless right
  Encapsulate,     // blocks the labels in H
  Abstract,        // renames the labels in I to tau
  Rename,          // relabels by a total map
  RecVar,          // free recursion variable
  RecConst,        // <X|E>
};

struct TermNode;
using TermPtr = std::shared_ptr<const TermNode>;

struct RecSpecData {
  // Ordered equations: variable name -> right-hand side.
  std::vector<std::pair<std::string, TermPtr>> equations;
  const TermPtr* find(const std::string& var) const;
  std::string key() const;  // stable identity used in ordering/hashing
};
using RecSpecPtr = std::shared_ptr<const RecSpecData>;

struct TermNode {
  Op op;
  LabelId label = 0;                              // Action
  uint32_t amount = 0;                            // delay/timeout/init slice count
  std::vector<TermPtr> kids;                      // operands
  std::vector<LabelId> label_set;                 // Encapsulate/Abstract, sorted
  std::vector<std::pair<LabelId, LabelId>> label_map;  // Rename, sorted by source
  std::string var;                                // RecVar/RecConst
  RecSpecPtr spec;                                // RecConst
  size_t hash = 0;
};

// --- constructors (validating) -------------------------------------------

TermPtr deadlocked();
TermPtr act(LabelId a);
TermPtr alt(TermPtr a, TermPtr b);
TermPtr alt(std::vector<TermPtr> xs);  // flattens; requires nonempty
TermPtr seq(TermPtr a, TermPtr b);
TermPtr delay(Mode m, uint32_t n, TermPtr x);
TermPtr timeout(Mode m, uint32_t n, TermPtr x);
TermPtr initialize(Mode m, uint32_t n, TermPtr x);
TermPtr whole_par(TermPtr a, TermPtr b);
TermPtr par(TermPtr a, TermPtr b);
TermPtr par(std::vector<TermPtr> xs);
TermPtr comm(TermPtr a, TermPtr b);
TermPtr conflict_elim(TermPtr x);
TermPtr unless(TermPtr a, TermPtr b);
TermPtr encap(std::vector<LabelId> hs, TermPtr x, const AlgebraConfig& cfg);
TermPtr abstract_away(std::vector<LabelId> is, TermPtr x, const AlgebraConfig& cfg);
TermPtr rename(std::vector<std::pair<LabelId, LabelId>> f, TermPtr x,
               const AlgebraConfig& cfg);
TermPtr rec_var(std::string name);
TermPtr rec_const(std::string name, RecSpecPtr spec);

// Checks mode consistency and label validity of a whole term against a
// config; throws ModeMixError/UnknownLabel. Constructors validate locally,
// this validates globally.
void validate_term(const TermPtr& t, const AlgebraConfig& cfg);

// Same node with different operands (hash recomputed).
TermPtr rebuild_with_kids(const TermPtr& t, std::vector<TermPtr> kids);

// --- structure ------------------------------------------------------------

// Total order on terms; fixed once so that golden files stay stable.
int compare(const TermPtr& a, const TermPtr& b);
bool equal(const TermPtr& a, const TermPtr& b);

struct TermHash {
  size_t operator()(const TermPtr& t) const { return t->hash; }
};
struct TermEq {
  bool operator()(const TermPtr& a, const TermPtr& b) const { return equal(a, b); }
};

// AC-canonical form: + and || flattened, operands sorted, duplicate
// summands removed. Idempotent.
TermPtr canonicalize(const TermPtr& t);

std::set<std::string> free_vars(const TermPtr& t);
bool is_closed(const TermPtr& t);

// Basic-term recognition per the inductive definition for the given mode.
bool is_basic(const TermPtr& t, Mode mode);

// Action symbols occurring in a term (labels of Action leaves, tau and delta
// excluded). Recursion constants contribute the symbols of their entire
// specification.
std::set<LabelId> action_symbols(const TermPtr& t);

// Multiset of action-labelled leaves, used by canonicalization property tests.
std::multiset<LabelId> action_leaves(const TermPtr& t);

std::string pretty_print(const TermPtr& t, const AlgebraConfig& cfg);

}  // namespace tcw

#endif
