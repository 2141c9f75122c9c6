#ifndef TCW_CONFIG_HPP
#define TCW_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcw/errors.hpp"

namespace tcw {

enum class Mode : uint8_t { Drt, Dat };

using LabelId = uint32_t;

// Reserved label ids. Every alphabet implicitly contains them.
inline constexpr LabelId kTau = 0;
inline constexpr LabelId kDelta = 1;
inline constexpr LabelId kFirstUserLabel = 2;

// Action alphabet plus the communication function, the conflict relation and
// the causality order on labels. Immutable once validated.
class AlgebraConfig {
public:
  AlgebraConfig() { names_ = {"tau", "delta"}; }

  Mode mode = Mode::Drt;

  LabelId intern(const std::string& name);
  std::optional<LabelId> find(const std::string& name) const;
  const std::string& name(LabelId id) const { return names_.at(id); }
  size_t alphabet_size() const { return names_.size() - kFirstUserLabel; }
  LabelId end_label() const { return static_cast<LabelId>(names_.size()); }

  void add_gamma(LabelId a, LabelId b, LabelId result);
  void add_conflict(LabelId a, LabelId b);
  void add_causality(LabelId a, LabelId b);

  std::optional<LabelId> gamma(LabelId a, LabelId b) const;
  bool in_conflict(LabelId a, LabelId b) const;
  bool causally_before(LabelId a, LabelId b) const;

  // Silencing test used by the unless operator: e is silenced against the
  // symbol set S when e conflicts with a member of S, or some causal
  // ancestor of e does.
  bool silences(LabelId e, const std::set<LabelId>& symbols) const;

  // Validates relation-level invariants; throws ConfigError.
  void validate() const;

  const std::map<std::pair<LabelId, LabelId>, LabelId>& gamma_table() const {
    return gamma_;
  }
  const std::set<std::pair<LabelId, LabelId>>& conflict_pairs() const { return conflict_; }
  const std::set<std::pair<LabelId, LabelId>>& causality_pairs() const { return causality_; }

private:
  std::vector<std::string> names_;
  std::map<std::string, LabelId> ids_;
  std::map<std::pair<LabelId, LabelId>, LabelId> gamma_;
  std::set<std::pair<LabelId, LabelId>> conflict_;
  std::set<std::pair<LabelId, LabelId>> causality_;
};

}  // namespace tcw

#endif
