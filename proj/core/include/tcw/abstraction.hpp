#ifndef TCW_ABSTRACTION_HPP
#define TCW_ABSTRACTION_HPP

#include <vector>

#include "tcw/sos.hpp"

namespace tcw {

// Renames the members of I inside every step to the silent action; time
// edges and the deadlock predicate are untouched.
TimedLTS hide(const TimedLTS& lts, const std::vector<LabelId>& hidden);

// Quotient by branching step equivalence with a root that preserves the
// rooted conditions; the result is rooted-branching-step bisimilar to the
// input and minimal among the partitioner's quotients.
TimedLTS rb_minimize(const TimedLTS& lts);

}  // namespace tcw

#endif
