#ifndef TCW_REWRITER_HPP
#define TCW_REWRITER_HPP

#include <optional>
#include <string>
#include <vector>

#include "tcw/term.hpp"

namespace tcw {

// How an axiom row is realized.
enum class RuleUse {
  Rewrite,        // a directed rewrite rule
  Canonicalizer,  // handled by AC-canonicalization
  EquationOnly,   // kept as a sweepable equation, not used for rewriting
  Auxiliary,      // completion rule not present in the tables
};

struct AxiomInfo {
  std::string tag;
  RuleUse use;
  bool branching;  // sound modulo rooted branching equivalence only
};

class RuleSet {
public:
  // Directed rules sound modulo strong (timed) step bisimilarity.
  static const RuleSet& strong(Mode mode);
  // Strong rules plus the silent-step absorption laws.
  static const RuleSet& branching(Mode mode);

  Mode mode() const { return mode_; }
  bool has_branching_rules() const { return branching_; }
  const std::vector<AxiomInfo>& manifest() const { return manifest_; }

  // Tries the ruleset at the root of t only; returns rewritten term and tag.
  std::optional<std::pair<TermPtr, std::string>> apply_root(
      const TermPtr& t, const AlgebraConfig& cfg) const;

private:
  RuleSet(Mode m, bool b);
  Mode mode_;
  bool branching_;
  std::vector<AxiomInfo> manifest_;
};

struct RewriteTrace {
  std::string tag;
  TermPtr before;
  TermPtr after;
};

// One leftmost-innermost rewrite anywhere in t. Arguments of conflict
// elimination and of the unless operator are opaque to the search: those
// operators are expanded at their root first.
std::optional<std::pair<TermPtr, std::string>> rewrite_step(const TermPtr& t,
                                                            const RuleSet& rules,
                                                            const AlgebraConfig& cfg);

TermPtr normalize(const TermPtr& t, const AlgebraConfig& cfg, const RuleSet& rules,
                  uint64_t budget = 100000, std::vector<RewriteTrace>* trace = nullptr);

inline TermPtr normalize(const TermPtr& t, const AlgebraConfig& cfg,
                         uint64_t budget = 100000,
                         std::vector<RewriteTrace>* trace = nullptr) {
  return normalize(t, cfg, RuleSet::strong(cfg.mode), budget, trace);
}

// Equality of closed recursion-free terms by normal-form comparison.
bool prove_equal(const TermPtr& t1, const TermPtr& t2, const AlgebraConfig& cfg,
                 uint64_t budget = 100000);

}  // namespace tcw

#endif
