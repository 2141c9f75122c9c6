#ifndef TCW_PARSER_HPP
#define TCW_PARSER_HPP

#include <map>
#include <string>

#include "tcw/term.hpp"

namespace tcw {

// Named recursive specifications usable through the <X|name> syntax.
using SpecEnv = std::map<std::string, RecSpecPtr>;

TermPtr parse_term(const std::string& text, const AlgebraConfig& cfg,
                   const SpecEnv& specs = {});

RecSpecPtr parse_spec(const std::string& text, const AlgebraConfig& cfg);

AlgebraConfig load_config(const std::string& text);

}  // namespace tcw

#endif
