#include "tcw/config.hpp"

#include <algorithm>

namespace tcw {

LabelId AlgebraConfig::intern(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  if (name == "tau") return kTau;
  if (name == "delta") return kDelta;
  LabelId id = static_cast<LabelId>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  return id;
}

std::optional<LabelId> AlgebraConfig::find(const std::string& name) const {
  if (name == "tau") return kTau;
  if (name == "delta") return kDelta;
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void AlgebraConfig::add_gamma(LabelId a, LabelId b, LabelId result) {
  gamma_[{a, b}] = result;
  gamma_[{b, a}] = result;
}

void AlgebraConfig::add_conflict(LabelId a, LabelId b) {
  conflict_.insert({a, b});
  conflict_.insert({b, a});
}

void AlgebraConfig::add_causality(LabelId a, LabelId b) { causality_.insert({a, b}); }

std::optional<LabelId> AlgebraConfig::gamma(LabelId a, LabelId b) const {
  auto it = gamma_.find({a, b});
  if (it == gamma_.end()) return std::nullopt;
  return it->second;
}

bool AlgebraConfig::in_conflict(LabelId a, LabelId b) const {
  return conflict_.count({a, b}) > 0;
}

bool AlgebraConfig::causally_before(LabelId a, LabelId b) const {
  return causality_.count({a, b}) > 0;
}

bool AlgebraConfig::silences(LabelId e, const std::set<LabelId>& symbols) const {
  if (e == kTau || e == kDelta) return false;
  for (LabelId s : symbols) {
    if (in_conflict(e, s)) return true;
    for (const auto& pr : conflict_) {
      if (pr.second == s && causally_before(pr.first, e)) return true;
    }
  }
  return false;
}

void AlgebraConfig::validate() const {
  for (const auto& [pair, res] : gamma_) {
    if (res == kTau || res == kDelta)
      throw ConfigError("gamma", "communication result may not be tau or delta");
    if (pair.first == kTau || pair.first == kDelta || pair.second == kTau ||
        pair.second == kDelta)
      throw ConfigError("gamma", "tau/delta may not communicate");
    auto sym = gamma_.find({pair.second, pair.first});
    if (sym == gamma_.end() || sym->second != res)
      throw ConfigError("gamma", "communication function is not symmetric");
    // Handshaking: results of communications do not communicate further.
    for (const auto& [p2, r2] : gamma_) {
      (void)r2;
      if (p2.first == res || p2.second == res)
        throw ConfigError("gamma", "result " + name(res) + " appears as an argument");
    }
  }
  for (const auto& pr : conflict_) {
    if (pr.first == pr.second)
      throw ConfigError("conflict", "relation must be irreflexive: " + name(pr.first));
    if (pr.first == kTau || pr.second == kTau || pr.first == kDelta ||
        pr.second == kDelta)
      throw ConfigError("conflict", "tau/delta may not occur in the conflict relation");
    if (!conflict_.count({pr.second, pr.first}))
      throw ConfigError("conflict", "relation must be symmetric");
  }
  for (const auto& pr : causality_) {
    if (pr.first == pr.second)
      throw ConfigError("causality", "order must be irreflexive: " + name(pr.first));
    if (pr.first == kTau || pr.second == kTau || pr.first == kDelta ||
        pr.second == kDelta)
      throw ConfigError("causality", "tau/delta may not occur in the causality order");
  }
  for (const auto& ab : causality_) {
    for (const auto& bc : causality_) {
      if (ab.second != bc.first) continue;
      if (ab.first == bc.second)
        throw ConfigError("causality", "order contains a cycle at " + name(ab.first));
      if (!causality_.count({ab.first, bc.second}))
        throw ConfigError("causality", "order must be transitive: missing " +
                                           name(ab.first) + " < " + name(bc.second));
    }
  }
}

}  // namespace tcw
