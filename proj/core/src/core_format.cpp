#include "mtt/core_format.hpp"

#include <cctype>
#include <sstream>
#include <variant>
#include <vector>

#include "mtt/diagnostics.hpp"

namespace mtt {

// ---- printing ----------------------------------------------------------------

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

void pr_tm(std::ostream& o, const TmPtr& t);
void pr_ty(std::ostream& o, const TyPtr& a);
void pr_sub(std::ostream& o, const SubPtr& s);
void pr_ctx(std::ostream& o, const CtxPtr& g);

void pr_tm(std::ostream& o, const TmPtr& t) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TmVar>) {
          o << "(var " << n.index << " " << quote(n.cell.str()) << ")";
        } else if constexpr (std::is_same_v<T, TmTrue>) {
          o << "true";
        } else if constexpr (std::is_same_v<T, TmFalse>) {
          o << "false";
        } else if constexpr (std::is_same_v<T, TmBoolRec>) {
          o << "(boolrec ";
          pr_ty(o, n.motive);
          o << " ";
          pr_tm(o, n.on_true);
          o << " ";
          pr_tm(o, n.on_false);
          o << " ";
          pr_tm(o, n.scrut);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmRefl>) {
          o << "(refl ";
          pr_tm(o, n.tm);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmIdRec>) {
          o << "(idrec ";
          pr_ty(o, n.motive);
          o << " ";
          pr_tm(o, n.refl_case);
          o << " ";
          pr_tm(o, n.scrut);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmEnc>) {
          o << "(code ";
          pr_ty(o, n.ty);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmLam>) {
          o << "(lam " << n.mode.str() << " ";
          pr_tm(o, n.body);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmApp>) {
          o << "(app " << n.mode.str() << " ";
          pr_tm(o, n.fn);
          o << " ";
          pr_tm(o, n.arg);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmPair>) {
          o << "(pair ";
          pr_tm(o, n.fst);
          o << " ";
          pr_tm(o, n.snd);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmProj>) {
          o << (n.which == 0 ? "(fst " : "(snd ");
          pr_tm(o, n.pair);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmMkBox>) {
          o << "(box " << n.mode.str() << " ";
          pr_tm(o, n.body);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmOpen>) {
          o << "(open " << n.frame.str() << " " << n.mode.str() << " ";
          pr_ty(o, n.motive);
          o << " ";
          pr_tm(o, n.scrut);
          o << " ";
          pr_tm(o, n.branch);
          o << ")";
        } else if constexpr (std::is_same_v<T, TmAxiom>) {
          o << "(axiom " << n.name << " ";
          pr_ty(o, n.ty);
          o << ")";
        } else {
          static_assert(std::is_same_v<T, TmSub>);
          o << "(tmsub ";
          pr_tm(o, n.tm);
          o << " ";
          pr_sub(o, n.sub);
          o << ")";
        }
      },
      t->v);
}

void pr_ty(std::ostream& o, const TyPtr& a) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TyBool>) {
          o << "Bool";
        } else if constexpr (std::is_same_v<T, TyUni>) {
          o << "(U " << n.level << ")";
        } else if constexpr (std::is_same_v<T, TyDec>) {
          o << "(El ";
          pr_tm(o, n.code);
          o << ")";
        } else if constexpr (std::is_same_v<T, TyLift>) {
          o << "(Lift ";
          pr_ty(o, n.ty);
          o << ")";
        } else if constexpr (std::is_same_v<T, TyId>) {
          o << "(Id ";
          pr_ty(o, n.ty);
          o << " ";
          pr_tm(o, n.lhs);
          o << " ";
          pr_tm(o, n.rhs);
          o << ")";
        } else if constexpr (std::is_same_v<T, TyPi>) {
          o << "(Pi " << n.mode.str() << " ";
          pr_ty(o, n.dom);
          o << " ";
          pr_ty(o, n.cod);
          o << ")";
        } else if constexpr (std::is_same_v<T, TySigma>) {
          o << "(Sigma ";
          pr_ty(o, n.fst);
          o << " ";
          pr_ty(o, n.snd);
          o << ")";
        } else if constexpr (std::is_same_v<T, TyModal>) {
          o << "(Mod " << n.mode.str() << " ";
          pr_ty(o, n.ty);
          o << ")";
        } else {
          static_assert(std::is_same_v<T, TySub>);
          o << "(tysub ";
          pr_ty(o, n.ty);
          o << " ";
          pr_sub(o, n.sub);
          o << ")";
        }
      },
      a->v);
}

void pr_sub(std::ostream& o, const SubPtr& s) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SubEmp>) {
          o << "emp";
        } else if constexpr (std::is_same_v<T, SubId>) {
          o << "id";
        } else if constexpr (std::is_same_v<T, SubWk>) {
          o << "wk";
        } else if constexpr (std::is_same_v<T, SubComp>) {
          o << "(comp ";
          pr_sub(o, n.outer);
          o << " ";
          pr_sub(o, n.inner);
          o << ")";
        } else if constexpr (std::is_same_v<T, SubLock>) {
          o << "(lock " << n.mod.str() << " ";
          pr_sub(o, n.sub);
          o << ")";
        } else if constexpr (std::is_same_v<T, SubKey>) {
          o << "(key " << quote(n.cell.str());
          if (n.at) {
            o << " ";
            pr_ctx(o, n.at);
          }
          o << ")";
        } else {
          static_assert(std::is_same_v<T, SubExt>);
          o << "(ext ";
          pr_sub(o, n.base);
          o << " " << n.ann.str() << " ";
          if (n.at) {
            pr_ctx(o, n.at);
            o << " ";
          }
          pr_tm(o, n.tm);
          o << ")";
        }
      },
      s->v);
}

void pr_ctx(std::ostream& o, const CtxPtr& g) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CtxEmp>) {
          o << "(emp " << n.mode << ")";
        } else if constexpr (std::is_same_v<T, CtxLock>) {
          o << "(lock " << n.mod.str() << " ";
          pr_ctx(o, n.ctx);
          o << ")";
        } else {
          static_assert(std::is_same_v<T, CtxExtend>);
          o << "(cons " << n.ann.str() << " ";
          pr_ty(o, n.ty);
          o << " ";
          pr_ctx(o, n.ctx);
          o << ")";
        }
      },
      g->v);
}

}  // namespace

std::string print_tm(const TmPtr& t) {
  std::ostringstream o;
  pr_tm(o, t);
  return o.str();
}
std::string print_ty(const TyPtr& a) {
  std::ostringstream o;
  pr_ty(o, a);
  return o.str();
}
std::string print_sub(const SubPtr& s) {
  std::ostringstream o;
  pr_sub(o, s);
  return o.str();
}
std::string print_ctx(const CtxPtr& g) {
  std::ostringstream o;
  pr_ctx(o, g);
  return o.str();
}

// ---- parsing -----------------------------------------------------------------

namespace {

struct Sexp {
  // Exactly one of: atom text, quoted string, or a list.
  enum class Kind { Atom, Str, List };
  Kind kind;
  std::string text;
  std::vector<Sexp> items;
};

struct SexpReader {
  const std::string& src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at offset " + std::to_string(pos), Span{});
  }

  Sexp read() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of input");
    char c = src[pos];
    if (c == '(') {
      ++pos;
      Sexp list{Sexp::Kind::List, "", {}};
      while (true) {
        skip_ws();
        if (pos >= src.size()) fail("unclosed '('");
        if (src[pos] == ')') {
          ++pos;
          return list;
        }
        list.items.push_back(read());
      }
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') {
      ++pos;
      std::string out;
      while (pos < src.size() && src[pos] != '"') {
        if (src[pos] == '\\' && pos + 1 < src.size()) ++pos;
        out += src[pos++];
      }
      if (pos >= src.size()) fail("unterminated string");
      ++pos;
      return Sexp{Sexp::Kind::Str, std::move(out), {}};
    }
    std::size_t start = pos;
    while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos])) &&
           src[pos] != '(' && src[pos] != ')' && src[pos] != '"')
      ++pos;
    return Sexp{Sexp::Kind::Atom, src.substr(start, pos - start), {}};
  }
};

struct SexpParser {
  const ModeTheory& th;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, Span{});
  }

  const Sexp& item(const Sexp& s, std::size_t i) const { return s.items[i]; }

  void expect_len(const Sexp& s, std::size_t n, const std::string& what) const {
    if (s.items.size() != n)
      fail(what + " expects " + std::to_string(n - 1) + " argument(s), got " +
           std::to_string(s.items.size() - 1));
  }

  std::string atom(const Sexp& s, const std::string& what) const {
    if (s.kind != Sexp::Kind::Atom) fail("expected an atom for " + what);
    return s.text;
  }

  std::string str(const Sexp& s, const std::string& what) const {
    if (s.kind != Sexp::Kind::Str) fail("expected a quoted string for " + what);
    return s.text;
  }

  std::size_t num(const Sexp& s, const std::string& what) const {
    std::string a = atom(s, what);
    for (char c : a)
      if (!std::isdigit(static_cast<unsigned char>(c))) fail(what + " must be a number");
    if (a.empty()) fail(what + " must be a number");
    return std::stoul(a);
  }

  ModalityPath path(const Sexp& s) const {
    return parse_path(th, atom(s, "a modality path"));
  }

  CellExpr cell(const Sexp& s) const { return parse_cell(th, str(s, "a cell")); }

  const std::string& head(const Sexp& s) const {
    if (s.kind != Sexp::Kind::List || s.items.empty() ||
        s.items[0].kind != Sexp::Kind::Atom)
      fail("expected a form (head ...)");
    return s.items[0].text;
  }

  TmPtr tm(const Sexp& s) const {
    if (s.kind == Sexp::Kind::Atom) {
      if (s.text == "true") return tm_true();
      if (s.text == "false") return tm_false();
      fail("unknown term atom '" + s.text + "'");
    }
    const std::string& h = head(s);
    if (h == "var") {
      expect_len(s, 3, "var");
      return tm_var(num(item(s, 1), "variable index"), cell(item(s, 2)));
    }
    if (h == "boolrec") {
      expect_len(s, 5, "boolrec");
      return tm_boolrec(ty(item(s, 1)), tm(item(s, 2)), tm(item(s, 3)), tm(item(s, 4)));
    }
    if (h == "refl") {
      expect_len(s, 2, "refl");
      return tm_refl(tm(item(s, 1)));
    }
    if (h == "idrec") {
      expect_len(s, 4, "idrec");
      return tm_idrec(ty(item(s, 1)), tm(item(s, 2)), tm(item(s, 3)));
    }
    if (h == "code") {
      expect_len(s, 2, "code");
      return tm_enc(ty(item(s, 1)));
    }
    if (h == "lam") {
      expect_len(s, 3, "lam");
      return tm_lam(path(item(s, 1)), tm(item(s, 2)));
    }
    if (h == "app") {
      expect_len(s, 4, "app");
      return tm_app(path(item(s, 1)), tm(item(s, 2)), tm(item(s, 3)));
    }
    if (h == "pair") {
      expect_len(s, 3, "pair");
      return tm_pair(tm(item(s, 1)), tm(item(s, 2)));
    }
    if (h == "fst") {
      expect_len(s, 2, "fst");
      return tm_proj(0, tm(item(s, 1)));
    }
    if (h == "snd") {
      expect_len(s, 2, "snd");
      return tm_proj(1, tm(item(s, 1)));
    }
    if (h == "box") {
      expect_len(s, 3, "box");
      return tm_mkbox(path(item(s, 1)), tm(item(s, 2)));
    }
    if (h == "open") {
      expect_len(s, 6, "open");
      return tm_open(path(item(s, 1)), path(item(s, 2)), ty(item(s, 3)), tm(item(s, 4)),
                     tm(item(s, 5)));
    }
    if (h == "axiom") {
      expect_len(s, 3, "axiom");
      return tm_axiom(atom(item(s, 1), "axiom name"), ty(item(s, 2)));
    }
    if (h == "tmsub") {
      expect_len(s, 3, "tmsub");
      return tm_sub(tm(item(s, 1)), sub(item(s, 2)));
    }
    fail("unknown term form '" + h + "'");
  }

  TyPtr ty(const Sexp& s) const {
    if (s.kind == Sexp::Kind::Atom) {
      if (s.text == "Bool") return ty_bool();
      fail("unknown type atom '" + s.text + "'");
    }
    const std::string& h = head(s);
    if (h == "U") {
      expect_len(s, 2, "U");
      return ty_uni(static_cast<unsigned>(num(item(s, 1), "universe level")));
    }
    if (h == "El") {
      expect_len(s, 2, "El");
      return ty_dec(tm(item(s, 1)));
    }
    if (h == "Lift") {
      expect_len(s, 2, "Lift");
      return ty_lift(ty(item(s, 1)));
    }
    if (h == "Id") {
      expect_len(s, 4, "Id");
      return ty_id(ty(item(s, 1)), tm(item(s, 2)), tm(item(s, 3)));
    }
    if (h == "Pi") {
      expect_len(s, 4, "Pi");
      return ty_pi(path(item(s, 1)), ty(item(s, 2)), ty(item(s, 3)));
    }
    if (h == "Sigma") {
      expect_len(s, 3, "Sigma");
      return ty_sigma(ty(item(s, 1)), ty(item(s, 2)));
    }
    if (h == "Mod") {
      expect_len(s, 3, "Mod");
      return ty_modal(path(item(s, 1)), ty(item(s, 2)));
    }
    if (h == "tysub") {
      expect_len(s, 3, "tysub");
      return ty_sub(ty(item(s, 1)), sub(item(s, 2)));
    }
    fail("unknown type form '" + h + "'");
  }

  SubPtr sub(const Sexp& s) const {
    if (s.kind == Sexp::Kind::Atom) {
      if (s.text == "emp") return sub_emp();
      if (s.text == "id") return sub_id();
      if (s.text == "wk") return sub_wk();
      fail("unknown substitution atom '" + s.text + "'");
    }
    const std::string& h = head(s);
    if (h == "comp") {
      expect_len(s, 3, "comp");
      return sub_comp(sub(item(s, 1)), sub(item(s, 2)));
    }
    if (h == "lock") {
      expect_len(s, 3, "lock");
      return sub_lock(sub(item(s, 2)), path(item(s, 1)));
    }
    if (h == "key") {
      if (s.items.size() == 2) return sub_key(cell(item(s, 1)), nullptr);
      expect_len(s, 3, "key");
      return sub_key(cell(item(s, 1)), ctx(item(s, 2)));
    }
    if (h == "ext") {
      if (s.items.size() == 4)
        return sub_ext(sub(item(s, 1)), path(item(s, 2)), nullptr, tm(item(s, 3)));
      expect_len(s, 5, "ext");
      return sub_ext(sub(item(s, 1)), path(item(s, 2)), ctx(item(s, 3)), tm(item(s, 4)));
    }
    fail("unknown substitution form '" + h + "'");
  }

  CtxPtr ctx(const Sexp& s) const {
    const std::string& h = head(s);
    if (h == "emp") {
      expect_len(s, 2, "emp");
      std::string m = atom(item(s, 1), "a mode");
      if (!th.has_mode(m)) fail("unknown mode '" + m + "'");
      return ctx_emp(m);
    }
    if (h == "lock") {
      expect_len(s, 3, "lock");
      return ctx_lock(ctx(item(s, 2)), path(item(s, 1)));
    }
    if (h == "cons") {
      expect_len(s, 4, "cons");
      return ctx_extend(ctx(item(s, 3)), path(item(s, 1)), ty(item(s, 2)));
    }
    fail("unknown context form '" + h + "'");
  }
};

Sexp read_all(const std::string& text) {
  SexpReader r{text};
  Sexp s = r.read();
  r.skip_ws();
  if (r.pos != text.size()) r.fail("trailing input");
  return s;
}

}  // namespace

TmPtr parse_tm(const ModeTheory& th, const std::string& text) {
  return SexpParser{th}.tm(read_all(text));
}
TyPtr parse_ty(const ModeTheory& th, const std::string& text) {
  return SexpParser{th}.ty(read_all(text));
}
SubPtr parse_sub(const ModeTheory& th, const std::string& text) {
  return SexpParser{th}.sub(read_all(text));
}
CtxPtr parse_ctx(const ModeTheory& th, const std::string& text) {
  return SexpParser{th}.ctx(read_all(text));
}

}  // namespace mtt
