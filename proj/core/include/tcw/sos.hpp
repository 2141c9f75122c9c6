#ifndef TCW_SOS_HPP
#define TCW_SOS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcw/term.hpp"

namespace tcw {

// A step: nonempty multiset of simultaneously performed actions, kept sorted
// by label id.
struct StepLabel {
  std::vector<LabelId> acts;

  bool operator==(const StepLabel&) const = default;
  auto operator<=>(const StepLabel&) const = default;
  bool pure_silent() const {
    for (LabelId a : acts)
      if (a != kTau) return false;
    return !acts.empty();
  }
  // Visible content: the multiset with silent members removed.
  std::vector<LabelId> stripped() const {
    std::vector<LabelId> out;
    for (LabelId a : acts)
      if (a != kTau) out.push_back(a);
    return out;
  }
};

StepLabel merge_steps(const StepLabel& a, const StepLabel& b);
std::string step_to_string(const StepLabel& l, const AlgebraConfig& cfg);

// Target of an action transition: a term or successful termination.
struct ActionMove {
  StepLabel label;
  TermPtr target;  // nullptr means termination
};

// One state's complete derivation in relative (drt) mode.
struct Derivation {
  std::vector<ActionMove> actions;
  TermPtr tick;      // unit-time successor, nullptr if none
  bool deadlocked = false;
};

// One state's complete derivation in absolute (dat) mode; idling never
// changes the term, only the clock.
struct DerivationAbs {
  std::vector<ActionMove> actions;
  bool tick = false;
  bool deadlocked = false;
};

struct Bounds {
  uint64_t max_states = 100000;
  uint64_t horizon = 64;       // dat time window; idling stops at this clock
  uint32_t unfold_depth = 64;  // recursion unfoldings per derivation
};

Derivation derive(const TermPtr& t, const AlgebraConfig& cfg,
                  uint32_t unfold_depth = 64);
DerivationAbs derive(const TermPtr& t, uint64_t clock, const AlgebraConfig& cfg,
                     uint32_t unfold_depth = 64);

// Definitional expansion of conflict elimination over its argument's head
// operator; shared by the transition rules and the rewriter. `tag` receives
// the name of the law applied.
TermPtr theta_expand(const TermPtr& arg, const AlgebraConfig& cfg,
                     std::string* tag = nullptr, uint32_t depth = 64);

// The unless operator with a frozen right-hand side is a hiding operator
// over the silenced label set; returns that form.
TermPtr unless_expand(const TermPtr& x, const TermPtr& y, const AlgebraConfig& cfg);

// Labels of the alphabet silenced against the action symbols of y.
std::vector<LabelId> silenced_against(const TermPtr& y, const AlgebraConfig& cfg);

// State-key normalization used for deduplication: canonical form with time
// prefixes folded (zero delays erased, nested delays merged).
TermPtr state_normal(const TermPtr& t);

inline constexpr uint32_t kSinkState = UINT32_MAX;

struct TimedLTS {
  Mode mode = Mode::Drt;
  uint32_t initial = 0;
  // Per-state action edges, each list sorted canonically.
  std::vector<std::vector<std::pair<StepLabel, uint32_t>>> action_edges;
  // Per-state unit time successors (at most one for generated systems;
  // quotients may carry several).
  std::vector<std::vector<uint32_t>> time_edges;
  std::vector<bool> deadlocked;
  std::vector<uint64_t> clock;  // dat only, else empty
  bool has_sink = false;        // some edge terminates
  // Optional per-state terms for diagnostics.
  std::vector<TermPtr> terms;

  uint32_t num_states() const { return static_cast<uint32_t>(action_edges.size()); }
  uint64_t num_action_edges() const {
    uint64_t n = 0;
    for (const auto& v : action_edges) n += v.size();
    return n;
  }
  uint64_t num_time_edges() const {
    uint64_t n = 0;
    for (const auto& v : time_edges) n += v.size();
    return n;
  }
};

TimedLTS build_lts(const TermPtr& t, const AlgebraConfig& cfg, const Bounds& bounds);

std::string export_lts(const TimedLTS& lts, const AlgebraConfig& cfg);

}  // namespace tcw

#endif
