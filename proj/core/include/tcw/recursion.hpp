#ifndef TCW_RECURSION_HPP
#define TCW_RECURSION_HPP

#include <map>
#include <string>
#include <vector>

#include "tcw/sos.hpp"
#include "tcw/term.hpp"

namespace tcw {

struct GuardReport {
  bool guarded = false;
  // offending (equation, variable occurrence) pairs
  std::vector<std::pair<std::string, std::string>> offenders;
};

// Every variable occurrence must sit under an action-multiset prefix or a
// positive delay; right-hand sides are normalized first when the raw check
// fails.
GuardReport check_guarded(const RecSpecPtr& spec, const AlgebraConfig& cfg);

// Syntactic linearity: sums of action multisets, action-multiset prefixes of
// a variable, and positively delayed such summands.
bool is_linear(const RecSpecPtr& spec);

// depth-fold substitution; depth 0 yields the recursion constant itself.
TermPtr unfold(const RecSpecPtr& spec, const std::string& var, uint32_t depth);

// Executable uniqueness premise: each candidate is step-bisimilar to its
// equation's right-hand side with the candidates substituted.
bool rsp_check(const RecSpecPtr& spec, const std::map<std::string, TermPtr>& candidate,
               const AlgebraConfig& cfg, const Bounds& bounds);

// Cluster fair abstraction: collapses the silent cluster of `var` under I to
// the hidden sum of its exits.
TermPtr cfar_eliminate(const RecSpecPtr& spec, const std::vector<LabelId>& hidden,
                       const std::string& var, const AlgebraConfig& cfg);

}  // namespace tcw

#endif
