#ifndef TCW_EQUIVALENCE_HPP
#define TCW_EQUIVALENCE_HPP

#include <memory>
#include <string>
#include <vector>

#include "tcw/sos.hpp"

namespace tcw {

enum class EquivKind { Step, RootedBranchingStep, Pomset, Hp };

// A distinguishing observation: a modal formula that holds on one initial
// state and fails on the other. Replaying a counterexample means evaluating
// the formula on both systems.
struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum Kind {
    True,
    Dead,        // the state has deadlocked
    Terminated,  // the state is the termination state
    Not,
    And,
    Dia,       // after this exact bundle of steps (and/or a tick), sub holds
    RootDia,   // one direct step whose visible content matches, then sub
    UntilDia,  // a silent path through cond-states, then a move, then sub
  };
  Kind kind = True;
  // Dia: one or more consecutive step labels (a bundle); tick used instead
  // when is_tick. UntilDia/RootDia: `visible` is the stripped content; an
  // empty visible with !is_tick means a silent move; is_term means the path
  // ends in termination instead of a move.
  std::vector<StepLabel> bundle;
  std::vector<LabelId> visible;
  bool is_tick = false;
  bool is_term = false;
  std::vector<FormulaPtr> subs;  // Not: 1; And: n; Dia: 1; UntilDia: [cond, next]
};

struct EquivalenceReport {
  EquivKind kind = EquivKind::Step;
  bool verdict = false;
  // verdict true: related state pairs (left, right); kSinkState stands for
  // the termination state on either side.
  std::vector<std::pair<uint32_t, uint32_t>> relation;
  // verdict false: formula true on l1's initial state, false on l2's.
  FormulaPtr counterexample;
};

EquivalenceReport step_bisim(const TimedLTS& l1, const TimedLTS& l2);
EquivalenceReport rb_step_bisim(const TimedLTS& l1, const TimedLTS& l2);
EquivalenceReport pomset_bisim_small(const TimedLTS& l1, const TimedLTS& l2,
                                     uint32_t max_events = 8);
EquivalenceReport hp_bisim_small(const TimedLTS& l1, const TimedLTS& l2,
                                 uint32_t max_events = 6);

// Re-checks a report against the defining clauses: a true verdict's relation
// must satisfy every clause, a false verdict's formula must evaluate to
// different truth values on the two initial states.
bool validate_report(const EquivalenceReport& rep, const TimedLTS& l1,
                     const TimedLTS& l2);

std::string serialize_report(const EquivalenceReport& rep, const AlgebraConfig& cfg);

}  // namespace tcw

#endif
