#include "tcw/parser.hpp"

#include <cctype>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "tcw/errors.hpp"

namespace tcw {

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  uint32_t line = 1;
  uint32_t col = 1;

  explicit Cursor(const std::string& t) : text(t) {}

  SourceSpan here(uint32_t len = 1) const { return {line, col, len}; }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return eof() ? '\0' : text[pos]; }

  void advance() {
    if (eof()) return;
    if (text[pos] == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    pos++;
  }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool try_tok(const std::string& tok) {
    skip_ws();
    if (text.compare(pos, tok.size(), tok) != 0) return false;
    // Keyword tokens must not run into a longer identifier.
    if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
      size_t after = pos + tok.size();
      if (after < text.size() &&
          (std::isalnum(static_cast<unsigned char>(text[after])) || text[after] == '_'))
        return false;
    }
    for (size_t i = 0; i < tok.size(); ++i) advance();
    return true;
  }

  void expect(const std::string& tok) {
    if (!try_tok(tok))
      throw SyntaxError("expected '" + tok + "'", here(static_cast<uint32_t>(tok.size())));
  }

  std::optional<std::string> try_ident() {
    skip_ws();
    if (eof()) return std::nullopt;
    char c = peek();
    if (!std::isalpha(static_cast<unsigned char>(c)) && c != '_') return std::nullopt;
    std::string out;
    while (!eof()) {
      c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(c);
        advance();
      } else {
        break;
      }
    }
    return out;
  }

  uint32_t expect_nat() {
    skip_ws();
    if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
      throw SyntaxError("expected a number", here());
    uint64_t v = 0;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + static_cast<uint64_t>(peek() - '0');
      if (v > 1000000) throw SyntaxError("time amount too large", here());
      advance();
    }
    return static_cast<uint32_t>(v);
  }
};

struct TermParser {
  Cursor cur;
  const AlgebraConfig& cfg;
  const SpecEnv& specs;
  // When parsing a specification the right-hand sides may mention the
  // specification's own variables.
  const std::set<std::string>* spec_vars = nullptr;

  TermParser(const std::string& text, const AlgebraConfig& c, const SpecEnv& s)
      : cur(text), cfg(c), specs(s) {}

  TermPtr parse_full() {
    TermPtr t = parse_alt();
    cur.skip_ws();
    if (!cur.eof()) throw SyntaxError("unexpected trailing input", cur.here());
    return t;
  }

  TermPtr parse_alt() {
    std::vector<TermPtr> xs{parse_whole()};
    while (cur.try_tok("+")) xs.push_back(parse_whole());
    return xs.size() == 1 ? xs[0] : alt(std::move(xs));
  }

  TermPtr parse_whole() {
    TermPtr t = parse_par();
    while (cur.try_tok("><")) t = whole_par(t, parse_par());
    return t;
  }

  TermPtr parse_par() {
    TermPtr t = parse_seq();
    for (;;) {
      if (cur.try_tok("||")) {
        t = par(t, parse_seq());
      } else {
        cur.skip_ws();
        // lone '|' must not swallow the '<X|..>' closing part or '|>'
        if (cur.peek() == '|' && cur.pos + 1 < cur.text.size() &&
            cur.text[cur.pos + 1] != '|') {
          cur.advance();
          t = comm(t, parse_seq());
        } else {
          break;
        }
      }
    }
    return t;
  }

  TermPtr parse_seq() {
    TermPtr t = parse_prefix();
    if (cur.try_tok(".")) return seq(t, parse_seq());
    return t;
  }

  std::vector<LabelId> parse_label_list(char close) {
    std::vector<LabelId> out;
    for (;;) {
      cur.skip_ws();
      if (cur.peek() == close) break;
      auto id = cur.try_ident();
      if (!id) throw SyntaxError("expected a label", cur.here());
      auto lab = cfg.find(*id);
      if (!lab) throw UnknownLabel(*id);
      out.push_back(*lab);
      cur.skip_ws();
      if (cur.peek() == ',') cur.advance();
    }
    cur.advance();  // consume close
    return out;
  }

  TermPtr parse_prefix() {
    if (cur.try_tok("sigma")) {
      cur.expect("[");
      uint32_t n = cur.expect_nat();
      cur.expect("]");
      cur.expect("(");
      TermPtr x = parse_alt();
      cur.expect(")");
      return delay(cfg.mode, n, x);
    }
    if (cur.try_tok("timeout")) {
      cur.expect("[");
      uint32_t n = cur.expect_nat();
      cur.expect("]");
      cur.expect("(");
      TermPtr x = parse_alt();
      cur.expect(")");
      return timeout(cfg.mode, n, x);
    }
    if (cur.try_tok("init")) {
      cur.expect("[");
      uint32_t n = cur.expect_nat();
      cur.expect("]");
      cur.expect("(");
      TermPtr x = parse_alt();
      cur.expect(")");
      return initialize(cfg.mode, n, x);
    }
    if (cur.try_tok("encap")) {
      cur.expect("{");
      auto hs = parse_label_list('}');
      cur.expect("(");
      TermPtr x = parse_alt();
      cur.expect(")");
      return encap(std::move(hs), x, cfg);
    }
    if (cur.try_tok("abstract")) {
      cur.expect("{");
      auto is = parse_label_list('}');
      cur.expect("(");
      TermPtr x = parse_alt();
      cur.expect(")");
      return abstract_away(std::move(is), x, cfg);
    }
    if (cur.try_tok("rename")) {
      cur.expect("{");
      std::vector<std::pair<LabelId, LabelId>> f;
      for (;;) {
        cur.skip_ws();
        if (cur.peek() == '}') {
          cur.advance();
          break;
        }
        auto a = cur.try_ident();
        if (!a) throw SyntaxError("expected a label", cur.here());
        cur.expect("->");
        auto b = cur.try_ident();
        if (!b) throw SyntaxError("expected a label", cur.here());
        auto la = cfg.find(*a);
        auto lb = cfg.find(*b);
        if (!la) throw UnknownLabel(*a);
        if (!lb) throw UnknownLabel(*b);
        f.emplace_back(*la, *lb);
        cur.skip_ws();
        if (cur.peek() == ',') cur.advance();
      }
      cur.expect("(");
      TermPtr x = parse_alt();
      cur.expect(")");
      return rename(std::move(f), x, cfg);
    }
    if (cur.try_tok("theta")) {
      cur.expect("(");
      TermPtr x = parse_alt();
      cur.expect(")");
      return conflict_elim(x);
    }
    return parse_atom();
  }

  TermPtr parse_atom() {
    cur.skip_ws();
    if (cur.try_tok("deadlocked")) return deadlocked();
    if (cur.try_tok("deadlock")) return act(kDelta);
    if (cur.try_tok("tau")) return act(kTau);
    if (cur.peek() == '(') {
      cur.advance();
      TermPtr t = parse_alt();
      if (cur.try_tok("<|")) {
        TermPtr u = parse_alt();
        cur.expect(")");
        return unless(t, u);
      }
      cur.expect(")");
      return t;
    }
    if (cur.peek() == '<') {
      SourceSpan sp = cur.here();
      cur.advance();
      auto var = cur.try_ident();
      if (!var) throw SyntaxError("expected a variable name", cur.here());
      cur.expect("|");
      cur.skip_ws();
      std::string ref;
      while (!cur.eof() && cur.peek() != '>') {
        ref.push_back(cur.peek());
        cur.advance();
      }
      cur.expect(">");
      auto it = specs.find(ref);
      if (it == specs.end())
        throw SyntaxError("unknown specification '" + ref + "'", sp);
      return rec_const(*var, it->second);
    }
    SourceSpan sp = cur.here();
    auto id = cur.try_ident();
    if (!id) throw SyntaxError("expected a term", sp);
    if (auto lab = cfg.find(*id)) return act(*lab);
    if (spec_vars && spec_vars->count(*id)) return rec_var(*id);
    if (spec_vars) throw UnboundVariable(*id);
    throw UnknownLabel(*id);
  }
};

}  // namespace

TermPtr parse_term(const std::string& text, const AlgebraConfig& cfg,
                   const SpecEnv& specs) {
  TermParser p(text, cfg, specs);
  TermPtr t = p.parse_full();
  validate_term(t, cfg);
  return t;
}

RecSpecPtr parse_spec(const std::string& text, const AlgebraConfig& cfg) {
  // First pass: collect the left-hand sides line by line.
  std::set<std::string> vars;
  std::vector<std::pair<std::string, std::string>> raw;
  std::istringstream in(text);
  std::string line;
  uint32_t lineno = 0;
  std::string pending_var;
  std::string pending_rhs;
  auto flush = [&]() {
    if (!pending_var.empty()) {
      raw.emplace_back(pending_var, pending_rhs);
      pending_var.clear();
      pending_rhs.clear();
    }
  };
  while (std::getline(in, line)) {
    lineno++;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    size_t eq = line.find('=');
    bool starts_eq = false;
    if (eq != std::string::npos) {
      std::string lhs = line.substr(0, eq);
      size_t b = lhs.find_first_not_of(" \t");
      size_t e = lhs.find_last_not_of(" \t");
      if (b != std::string::npos) {
        std::string name = lhs.substr(b, e - b + 1);
        bool ident = !name.empty();
        for (char c : name)
          if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') ident = false;
        if (ident && !std::isdigit(static_cast<unsigned char>(name[0]))) {
          flush();
          if (vars.count(name)) throw DuplicateEquation(name);
          vars.insert(name);
          pending_var = name;
          pending_rhs = line.substr(eq + 1);
          starts_eq = true;
        }
      }
    }
    if (!starts_eq && !pending_var.empty()) pending_rhs += "\n" + line;
  }
  flush();
  if (raw.empty()) throw SyntaxError("specification has no equations", {lineno, 1, 1});

  auto data = std::make_shared<RecSpecData>();
  for (auto& [name, rhs] : raw) {
    TermParser p(rhs, cfg, {});
    p.spec_vars = &vars;
    TermPtr t = p.parse_full();
    data->equations.emplace_back(name, t);
  }
  for (const auto& [name, rhs] : data->equations) {
    (void)name;
    for (const auto& v : free_vars(rhs))
      if (!vars.count(v)) throw UnboundVariable(v);
  }
  return data;
}

AlgebraConfig load_config(const std::string& text) {
  AlgebraConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  struct PendingGamma {
    std::string a, b, c;
  };
  std::vector<PendingGamma> gammas;
  std::vector<std::pair<std::string, std::string>> conflicts, causes;

  auto tokens = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string t;
    while (ss >> t) out.push_back(t);
    return out;
  };

  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto toks = tokens(line);
    if (toks.empty()) continue;
    if (toks[0].front() == '[') {
      if (toks.size() != 1 || toks[0].back() != ']')
        throw ConfigError("sections", "malformed section header: " + line);
      section = toks[0].substr(1, toks[0].size() - 2);
      continue;
    }
    if (section == "mode") {
      if (toks.size() != 1 || (toks[0] != "drt" && toks[0] != "dat"))
        throw ConfigError("mode", "expected 'drt' or 'dat'");
      cfg.mode = toks[0] == "drt" ? Mode::Drt : Mode::Dat;
    } else if (section == "alphabet") {
      for (const auto& t : toks) {
        if (t == "tau" || t == "delta")
          throw ConfigError("alphabet", "'" + t + "' is reserved");
        cfg.intern(t);
      }
    } else if (section == "gamma") {
      if (toks.size() != 4 || toks[2] != "->")
        throw ConfigError("gamma", "expected 'a b -> c'");
      gammas.push_back({toks[0], toks[1], toks[3]});
    } else if (section == "conflict") {
      if (toks.size() != 2) throw ConfigError("conflict", "expected 'a b'");
      conflicts.emplace_back(toks[0], toks[1]);
    } else if (section == "causality") {
      if (toks.size() != 2) throw ConfigError("causality", "expected 'a b'");
      causes.emplace_back(toks[0], toks[1]);
    } else if (section.empty()) {
      throw ConfigError("sections", "content before the first section header");
    } else {
      throw ConfigError("sections", "unknown section [" + section + "]");
    }
  }

  auto lookup = [&](const std::string& field, const std::string& n) {
    auto id = cfg.find(n);
    if (!id) throw ConfigError(field, "label '" + n + "' is not in the alphabet");
    return *id;
  };
  for (const auto& g : gammas)
    cfg.add_gamma(lookup("gamma", g.a), lookup("gamma", g.b), lookup("gamma", g.c));
  for (const auto& [a, b] : conflicts)
    cfg.add_conflict(lookup("conflict", a), lookup("conflict", b));
  for (const auto& [a, b] : causes)
    cfg.add_causality(lookup("causality", a), lookup("causality", b));
  cfg.validate();
  return cfg;
}

}  // namespace tcw
