#include "mtt/theory_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace mtt {

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find("--");
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words_of(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// Split "a <sep> b" on the first occurrence of sep, trimming both halves.
std::pair<std::string, std::string> split1(const std::string& s, const std::string& sep,
                                           const std::string& what, const Span& sp) {
  auto pos = s.find(sep);
  if (pos == std::string::npos)
    throw ParseError("expected '" + sep + "' in " + what + ": " + s, sp);
  return {trim(s.substr(0, pos)), trim(s.substr(pos + sep.size()))};
}

// Parse a path; a bare identity borrows its mode from `hint`.
ModalityPath parse_side(const ModeTheory& th, const std::string& text,
                        const std::optional<std::string>& hint, const Span& sp) {
  try {
    return parse_path(th, text, hint);
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()), sp);
  }
}

// Mode hints for a pair of path expressions: parse the side with generators
// first and lend its endpoints to a bare-identity partner.
std::pair<ModalityPath, ModalityPath> parse_pair(const ModeTheory& th,
                                                 const std::string& lhs,
                                                 const std::string& rhs, const Span& sp) {
  std::optional<ModalityPath> l, r;
  try {
    l = parse_path(th, lhs);
  } catch (const ParseError&) {
  }
  try {
    r = parse_path(th, rhs);
  } catch (const ParseError&) {
  }
  if (!l && r) l = parse_side(th, lhs, r->src, sp);
  if (!r && l) r = parse_side(th, rhs, l->src, sp);
  if (!l || !r) {
    // both sides bare identities: a single-mode theory still resolves them
    l = parse_side(th, lhs, std::nullopt, sp);
    r = parse_side(th, rhs, std::nullopt, sp);
  }
  return {*l, *r};
}

}  // namespace

ModeTheory parse_theory(const std::string& text, const std::string& filename) {
  ModeTheory th;
  th.enrichment = Enrichment::General;

  enum class Section { None, Modes, Gens, Cells, Eq, Leq };
  Section cur = Section::None;

  struct Item {
    std::string text;
    Span span;
  };
  std::vector<Item> gens, cells, eqs, leqs;

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    Span sp{filename, lineno, 1};
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.rfind("theory", 0) == 0 &&
        (line.size() == 6 || std::isspace(static_cast<unsigned char>(line[6])))) {
      th.name = trim(line.substr(6));
      continue;
    }
    auto section_of = [&](const std::string& kw) -> std::optional<std::string> {
      if (line.rfind(kw + ":", 0) == 0) return trim(line.substr(kw.size() + 1));
      return std::nullopt;
    };
    if (auto rest = section_of("modes")) {
      cur = Section::Modes;
      for (auto& m : words_of(*rest)) th.modes.push_back(m);
      continue;
    }
    if (auto rest = section_of("gens")) {
      cur = Section::Gens;
      if (!rest->empty()) gens.push_back({*rest, sp});
      continue;
    }
    if (auto rest = section_of("cells")) {
      cur = Section::Cells;
      if (!rest->empty()) cells.push_back({*rest, sp});
      continue;
    }
    if (auto rest = section_of("eq")) {
      cur = Section::Eq;
      if (!rest->empty()) eqs.push_back({*rest, sp});
      continue;
    }
    if (auto rest = section_of("leq")) {
      cur = Section::Leq;
      if (!rest->empty()) leqs.push_back({*rest, sp});
      continue;
    }
    switch (cur) {
      case Section::Modes:
        for (auto& m : words_of(line)) th.modes.push_back(m);
        break;
      case Section::Gens:
        gens.push_back({line, sp});
        break;
      case Section::Cells:
        cells.push_back({line, sp});
        break;
      case Section::Eq:
        eqs.push_back({line, sp});
        break;
      case Section::Leq:
        leqs.push_back({line, sp});
        break;
      case Section::None:
        throw ParseError("expected a section header (modes:/gens:/cells:/eq:/leq:), got: " +
                             line,
                         sp);
    }
  }

  if (th.modes.empty()) throw ParseError("theory declares no modes", Span{filename, 0, 0});

  for (const auto& it : gens) {
    auto [name, sig] = split1(it.text, ":", "generator declaration", it.span);
    auto [src, dst] = split1(sig, "->", "generator signature", it.span);
    if (name.empty() || src.empty() || dst.empty())
      throw ParseError("malformed generator declaration: " + it.text, it.span);
    if (!th.has_mode(src)) throw ParseError("unknown mode " + src, it.span);
    if (!th.has_mode(dst)) throw ParseError("unknown mode " + dst, it.span);
    th.one_gens.push_back({name, src, dst});
  }

  for (const auto& it : eqs) {
    auto [lhs, rhs] = split1(it.text, "=", "equation", it.span);
    auto [l, r] = parse_pair(th, lhs, rhs, it.span);
    if (l.src != r.src || l.dst != r.dst)
      throw ParseError("equation sides are not parallel: " + it.text, it.span);
    th.one_eqs.push_back({l, r});
    // Orient length-decreasing equations as rewrite rules. This only adds a
    // fast path: equality still falls back to the bidirectional closure.
    if (l.word.size() > r.word.size()) th.rewrites.push_back({l.word, r.word});
    if (r.word.size() > l.word.size()) th.rewrites.push_back({r.word, l.word});
  }

  if (!cells.empty() && !leqs.empty())
    throw ParseError("a theory declares either cells: (general) or leq: (poset), not both",
                     Span{filename, 0, 0});

  std::size_t auto_leq = 0;
  for (const auto& it : leqs) {
    std::string body = it.text, name;
    auto colon = it.text.find(':');
    if (colon != std::string::npos && it.text.find("<=") > colon) {
      name = trim(it.text.substr(0, colon));
      body = trim(it.text.substr(colon + 1));
    }
    auto [lhs, rhs] = split1(body, "<=", "inequality", it.span);
    auto [l, r] = parse_pair(th, lhs, rhs, it.span);
    if (l.src != r.src || l.dst != r.dst)
      throw ParseError("inequality sides are not parallel: " + it.text, it.span);
    if (name.empty()) name = "leq" + std::to_string(auto_leq++);
    th.two_gens.push_back({name, l, r});
  }

  for (const auto& it : cells) {
    auto [name, sig] = split1(it.text, ":", "2-cell declaration", it.span);
    auto [lhs, rhs] = split1(sig, "=>", "2-cell signature", it.span);
    auto [l, r] = parse_pair(th, lhs, rhs, it.span);
    if (l.src != r.src || l.dst != r.dst)
      throw ParseError("2-cell boundary is not parallel: " + it.text, it.span);
    if (name.empty()) throw ParseError("2-cell needs a name: " + it.text, it.span);
    th.two_gens.push_back({name, l, r});
  }

  th.enrichment = leqs.empty() && !cells.empty() ? Enrichment::General : Enrichment::Poset;
  th.rewrites_confluent = false;
  validate_theory(th);
  return th;
}

ModeTheory load_theory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open theory file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_theory(buf.str(), path);
}

std::string print_theory(const ModeTheory& th) {
  std::ostringstream out;
  if (!th.name.empty()) out << "theory " << th.name << "\n";
  out << "modes:";
  for (const auto& m : th.modes) out << " " << m;
  out << "\n";
  if (!th.one_gens.empty()) {
    out << "gens:\n";
    for (const auto& g : th.one_gens)
      out << "  " << g.name << " : " << g.src << " -> " << g.dst << "\n";
  }
  if (!th.one_eqs.empty()) {
    out << "eq:\n";
    for (const auto& [l, r] : th.one_eqs)
      out << "  " << l.str() << " = " << r.str() << "\n";
  }
  if (!th.two_gens.empty()) {
    if (th.enrichment == Enrichment::Poset) {
      out << "leq:\n";
      for (const auto& g : th.two_gens)
        out << "  " << g.name << " : " << g.src.str() << " <= " << g.dst.str() << "\n";
    } else {
      out << "cells:\n";
      for (const auto& g : th.two_gens)
        out << "  " << g.name << " : " << g.src.str() << " => " << g.dst.str() << "\n";
    }
  }
  return out.str();
}

void validate_theory(const ModeTheory& th) {
  if (th.modes.empty()) throw Error("theory declares no modes");
  std::set<std::string> seen;
  for (const auto& m : th.modes)
    if (!seen.insert(m).second) throw Error("duplicate mode " + m);
  std::set<std::string> names;
  for (const auto& g : th.one_gens) {
    if (!names.insert(g.name).second) throw Error("duplicate generator " + g.name);
    if (!th.has_mode(g.src) || !th.has_mode(g.dst))
      throw Error("generator " + g.name + " uses an undeclared mode");
  }
  for (const auto& g : th.two_gens) {
    if (!names.insert(g.name).second) throw Error("duplicate generator " + g.name);
    th.validate_path(g.src);
    th.validate_path(g.dst);
    if (g.src.src != g.dst.src || g.src.dst != g.dst.dst)
      throw Error("2-cell " + g.name + " has a non-parallel boundary");
  }
  for (const auto& [l, r] : th.one_eqs) {
    th.validate_path(l);
    th.validate_path(r);
    if (l.src != r.src || l.dst != r.dst) throw Error("equation sides are not parallel");
  }
  for (const auto& [l, r] : th.two_eqs) {
    th.validate_cell(l);
    th.validate_cell(r);
  }
}

ModeTheory resolve_theory(const std::string& name_or_path) {
  for (const auto& n : builtin_theory_names())
    if (n == name_or_path) return builtin_theory(n);
  return load_theory_file(name_or_path);
}

}  // namespace mtt
