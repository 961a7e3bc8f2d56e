#include "mtt/mode_theory.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <tuple>

namespace mtt {

// ---------------------------------------------------------------- paths ---

std::string ModalityPath::str() const {
  if (word.empty()) return "1@" + src;
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += ".";
    out += word[i];
  }
  return out;
}

ModalityPath compose_mod(const ModalityPath& mu, const ModalityPath& nu) {
  if (mu.src != nu.dst)
    throw BoundaryMismatch("cannot compose " + mu.str() + " with " + nu.str() +
                           ": " + mu.src + " != " + nu.dst);
  ModalityPath out;
  out.src = nu.src;
  out.dst = mu.dst;
  out.word = mu.word;
  out.word.insert(out.word.end(), nu.word.begin(), nu.word.end());
  return out;
}

// ---------------------------------------------------------------- cells ---

CellExpr CellExpr::gen(std::string name, ModalityPath src, ModalityPath dst) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Gen;
  n->gen = std::move(name);
  n->src = std::move(src);
  n->dst = std::move(dst);
  return CellExpr(std::move(n));
}

CellExpr CellExpr::ident(ModalityPath path) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Ident;
  n->src = path;
  n->dst = std::move(path);
  return CellExpr(std::move(n));
}

CellExpr CellExpr::vcomp(const CellExpr& a, const CellExpr& b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::VComp;
  n->src = a.src();
  n->dst = b.dst();
  n->a = a.node_;
  n->b = b.node_;
  return CellExpr(std::move(n));
}

CellExpr CellExpr::hcomp(const CellExpr& a, const CellExpr& b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::HComp;
  n->src = compose_mod(a.src(), b.src());
  n->dst = compose_mod(a.dst(), b.dst());
  n->a = a.node_;
  n->b = b.node_;
  return CellExpr(std::move(n));
}

std::string CellExpr::str() const {
  switch (kind()) {
    case Kind::Gen:
      return gen_name();
    case Kind::Ident:
      return "1(" + src().str() + ")";
    case Kind::VComp:
      // VComp(a, b) applies a first; "x;y" denotes x∘y (y first).
      return "(" + right().str() + ";" + left().str() + ")";
    case Kind::HComp:
      return "(" + left().str() + "*" + right().str() + ")";
  }
  return "?";
}

// --------------------------------------------------------------- theory ---

bool ModeTheory::has_mode(const std::string& m) const {
  return std::find(modes.begin(), modes.end(), m) != modes.end();
}

const ModeTheory::OneGen* ModeTheory::find_one_gen(const std::string& n) const {
  for (const auto& g : one_gens)
    if (g.name == n) return &g;
  return nullptr;
}

const ModeTheory::TwoGen* ModeTheory::find_two_gen(const std::string& n) const {
  for (const auto& g : two_gens)
    if (g.name == n) return &g;
  return nullptr;
}

void ModeTheory::validate_path(const ModalityPath& p) const {
  if (!has_mode(p.src) || !has_mode(p.dst))
    throw BoundaryMismatch("unknown mode in path " + p.str());
  std::string at = p.src;  // walk right-to-left: innermost generator first
  for (auto it = p.word.rbegin(); it != p.word.rend(); ++it) {
    const OneGen* g = find_one_gen(*it);
    if (!g) throw BoundaryMismatch("unknown modality generator " + *it);
    if (g->src != at)
      throw BoundaryMismatch("path " + p.str() + " breaks at " + *it + ": needs src " +
                             at + ", generator has src " + g->src);
    at = g->dst;
  }
  if (at != p.dst)
    throw BoundaryMismatch("path " + p.str() + " ends at " + at + ", declared dst " + p.dst);
}

void ModeTheory::validate_cell(const CellExpr& c) const {
  switch (c.kind()) {
    case CellExpr::Kind::Gen: {
      const TwoGen* g = find_two_gen(c.gen_name());
      if (!g) throw BoundaryMismatch("unknown 2-cell generator " + c.gen_name());
      break;
    }
    case CellExpr::Kind::Ident:
      validate_path(c.src());
      break;
    case CellExpr::Kind::VComp:
      validate_cell(c.left());
      validate_cell(c.right());
      if (!eq_mod(*this, c.left().dst(), c.right().src()))
        throw BoundaryMismatch("vertical composite breaks: " + c.left().dst().str() +
                               " vs " + c.right().src().str());
      break;
    case CellExpr::Kind::HComp:
      validate_cell(c.left());
      validate_cell(c.right());
      break;
  }
}

// -------------------------------------------------- 1-cell word problem ---

namespace {

using Word = std::vector<std::string>;

// Boundary modes of every cut position in a valid word. modes[0] = dst,
// modes[n] = src; position i sits between word[i-1] and word[i].
std::vector<std::string> cut_modes(const ModeTheory& th, const std::string& src_mode,
                                   const Word& w) {
  std::vector<std::string> modes(w.size() + 1);
  modes[w.size()] = src_mode;
  for (std::size_t i = w.size(); i-- > 0;) {
    const auto* g = th.find_one_gen(w[i]);
    if (!g) throw BoundaryMismatch("unknown modality generator " + w[i]);
    if (g->src != modes[i + 1])
      throw BoundaryMismatch("ill-formed word at generator " + w[i]);
    modes[i] = g->dst;
  }
  return modes;
}

bool subword_at(const Word& w, std::size_t i, const Word& pat) {
  if (i + pat.size() > w.size()) return false;
  return std::equal(pat.begin(), pat.end(), w.begin() + i);
}

Word splice(const Word& w, std::size_t i, std::size_t len, const Word& repl) {
  Word out(w.begin(), w.begin() + i);
  out.insert(out.end(), repl.begin(), repl.end());
  out.insert(out.end(), w.begin() + i + len, w.end());
  return out;
}

}  // namespace

std::vector<std::string> ModeTheory::normalize_word(const std::string& src_mode,
                                                    std::vector<std::string> word) const {
  (void)src_mode;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [lhs, rhs] : rewrites) {
      for (std::size_t i = 0; i + lhs.size() <= word.size(); ++i) {
        if (subword_at(word, i, lhs)) {
          word = splice(word, i, lhs.size(), rhs);
          changed = true;
          break;
        }
      }
      if (changed) break;
    }
  }
  return word;
}

ModalityPath ModeTheory::normalize_path(const ModalityPath& p) const {
  ModalityPath out = p;
  out.word = normalize_word(p.src, p.word);
  return out;
}

bool eq_mod(const ModeTheory& th, const ModalityPath& mu, const ModalityPath& nu) {
  if (mu.src != nu.src || mu.dst != nu.dst)
    throw BoundaryMismatch("eq_mod on non-parallel 1-cells " + mu.str() + ", " + nu.str());
  if (mu.word == nu.word) return true;

  Word a = th.normalize_word(mu.src, mu.word);
  Word b = th.normalize_word(nu.src, nu.word);
  if (a == b) return true;
  if (th.rewrites_confluent) return false;

  // Bounded bidirectional closure over the declared equations.
  const std::size_t max_visited = 4096;
  const std::size_t max_len = std::max(a.size(), b.size()) + 4;
  std::set<Word> visited{a};
  std::deque<Word> frontier{a};
  bool pruned = false;
  while (!frontier.empty()) {
    Word w = frontier.front();
    frontier.pop_front();
    auto modes = cut_modes(th, mu.src, w);
    auto try_step = [&](const ModalityPath& from, const ModalityPath& to) {
      for (std::size_t i = 0; i + from.word.size() <= w.size(); ++i) {
        if (!subword_at(w, i, from.word)) continue;
        if (modes[i] != from.dst || modes[i + from.word.size()] != from.src) continue;
        Word next = splice(w, i, from.word.size(), to.word);
        if (next.size() > max_len) {
          pruned = true;
          continue;
        }
        if (next == b) return true;
        if (visited.size() >= max_visited) {
          pruned = true;
          continue;
        }
        if (visited.insert(next).second) frontier.push_back(next);
      }
      return false;
    };
    for (const auto& [l, r] : th.one_eqs) {
      if (try_step(l, r) || try_step(r, l)) return true;
    }
  }
  if (pruned) throw Undecided(max_visited);
  return false;
}

// ------------------------------------------- walking adjunction 2-cells ---
//
// 2-cells of the free adjunction are decided exactly: a pasting expression
// denotes a planar diagram whose strands connect letters of the source and
// target words, caps consume adjacent "nu mu", cups produce adjacent
// "mu nu". Two pastings are equal iff their diagrams have the same
// connectivity (the zig-zag laws are exactly the planar straightenings).

namespace {

struct AdjPoint {
  int side;  // 0 = bottom (src), 1 = top (dst)
  std::size_t idx;
  bool operator==(const AdjPoint& o) const { return side == o.side && idx == o.idx; }
};

struct AdjDiagram {
  Word bot, top;
  std::vector<AdjPoint> pb, pt;  // partner of bottom i / top i

  bool operator==(const AdjDiagram& o) const {
    auto same = [](const std::vector<AdjPoint>& x, const std::vector<AdjPoint>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] == y[i])) return false;
      return true;
    };
    return bot == o.bot && top == o.top && same(pb, o.pb) && same(pt, o.pt);
  }
};

AdjDiagram adj_ident(const Word& w) {
  AdjDiagram d;
  d.bot = d.top = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    d.pb.push_back({1, i});
    d.pt.push_back({0, i});
  }
  return d;
}

AdjDiagram adj_vcomp(const AdjDiagram& a, const AdjDiagram& b) {
  if (a.top != b.bot)
    throw BoundaryMismatch("vertical composite of adjunction cells breaks");
  AdjDiagram d;
  d.bot = a.bot;
  d.top = b.top;
  d.pb.resize(d.bot.size());
  d.pt.resize(d.top.size());
  // Trace a strand starting from a bottom point of `a` or a top point of `b`
  // through the shared middle word.
  auto trace = [&](int start_side, std::size_t start_idx) -> AdjPoint {
    int layer = start_side == 0 ? 0 : 1;  // 0: inside a, 1: inside b
    AdjPoint p = layer == 0 ? a.pb[start_idx] : b.pt[start_idx];
    std::size_t guard = 2 * (a.top.size() + d.bot.size() + d.top.size()) + 4;
    while (true) {
      if (guard-- == 0) throw Error("closed loop in adjunction diagram");
      if (layer == 0) {
        // p is a point of diagram a
        if (p.side == 0) return {0, p.idx};  // landed on the real bottom
        // p is on the middle word: continue in b from its bottom
        layer = 1;
        p = b.pb[p.idx];
      } else {
        if (p.side == 1) return {1, p.idx};  // landed on the real top
        layer = 0;
        p = a.pt[p.idx];
      }
    }
  };
  for (std::size_t i = 0; i < d.bot.size(); ++i) d.pb[i] = trace(0, i);
  for (std::size_t i = 0; i < d.top.size(); ++i) d.pt[i] = trace(1, i);
  return d;
}

AdjDiagram adj_hcomp(const AdjDiagram& a, const AdjDiagram& b) {
  AdjDiagram d;
  d.bot = a.bot;
  d.bot.insert(d.bot.end(), b.bot.begin(), b.bot.end());
  d.top = a.top;
  d.top.insert(d.top.end(), b.top.begin(), b.top.end());
  auto shift = [&](AdjPoint p, std::size_t db, std::size_t dt) -> AdjPoint {
    return {p.side, p.idx + (p.side == 0 ? db : dt)};
  };
  for (const auto& p : a.pb) d.pb.push_back(p);
  for (const auto& p : b.pb) d.pb.push_back(shift(p, a.bot.size(), a.top.size()));
  for (const auto& p : a.pt) d.pt.push_back(p);
  for (const auto& p : b.pt) d.pt.push_back(shift(p, a.bot.size(), a.top.size()));
  return d;
}

AdjDiagram adj_eval(const CellExpr& c) {
  switch (c.kind()) {
    case CellExpr::Kind::Ident:
      return adj_ident(c.src().word);
    case CellExpr::Kind::Gen: {
      AdjDiagram d;
      if (c.gen_name() == "eta") {
        d.top = {"mu", "nu"};
        d.pt = {{1, 1}, {1, 0}};
      } else if (c.gen_name() == "eps") {
        d.bot = {"nu", "mu"};
        d.pb = {{0, 1}, {0, 0}};
      } else {
        throw BoundaryMismatch("unknown adjunction 2-cell " + c.gen_name());
      }
      return d;
    }
    case CellExpr::Kind::VComp:
      return adj_vcomp(adj_eval(c.left()), adj_eval(c.right()));
    case CellExpr::Kind::HComp:
      return adj_hcomp(adj_eval(c.left()), adj_eval(c.right()));
  }
  throw Error("unreachable");
}

// ------------------------------ free pastings modulo interchange (files) --
//
// Theories loaded from files cannot declare 2-cell equations, so their
// 2-cells form the free 2-category on the declared generators: equality is
// interchange plus unit laws. We normalize to chains of whiskered
// generators and explore commutations of independent factors.

struct Whisker {
  std::size_t pre;  // letters of left whisker
  std::string gen;
  std::size_t post;  // letters of right whisker
  // Boundary words of the whole whiskered factor:
  Word src, dst;

  bool operator==(const Whisker& o) const {
    return pre == o.pre && gen == o.gen && post == o.post && src == o.src && dst == o.dst;
  }
  bool operator<(const Whisker& o) const {
    return std::tie(pre, gen, post, src, dst) < std::tie(o.pre, o.gen, o.post, o.src, o.dst);
  }
};

using Chain = std::vector<Whisker>;

void chain_of(const ModeTheory& th, const CellExpr& c, Chain& out) {
  switch (c.kind()) {
    case CellExpr::Kind::Ident:
      return;
    case CellExpr::Kind::Gen: {
      const auto* g = th.find_two_gen(c.gen_name());
      if (!g) throw BoundaryMismatch("unknown 2-cell generator " + c.gen_name());
      out.push_back({0, g->name, 0, g->src.word, g->dst.word});
      return;
    }
    case CellExpr::Kind::VComp:
      chain_of(th, c.left(), out);
      chain_of(th, c.right(), out);
      return;
    case CellExpr::Kind::HComp: {
      Chain la, lb;
      chain_of(th, c.left(), la);
      chain_of(th, c.right(), lb);
      const Word src_a = c.left().src().word, dst_a = c.left().dst().word;
      const Word src_b = c.right().src().word, dst_b = c.right().dst().word;
      // left factors first (whiskered by src of b on the right), then right
      // factors (whiskered by dst of a on the left)
      for (auto w : la) {
        w.post += src_b.size();
        w.src.insert(w.src.end(), src_b.begin(), src_b.end());
        w.dst.insert(w.dst.end(), src_b.begin(), src_b.end());
        out.push_back(std::move(w));
      }
      for (auto w : lb) {
        w.pre += dst_a.size();
        w.src.insert(w.src.begin(), dst_a.begin(), dst_a.end());
        w.dst.insert(w.dst.begin(), dst_a.begin(), dst_a.end());
        out.push_back(std::move(w));
      }
      return;
    }
  }
}

// Swap adjacent factors acting on disjoint letter zones (interchange).
std::vector<Chain> chain_neighbors(const Chain& ch, const ModeTheory& th) {
  std::vector<Chain> out;
  for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
    const Whisker& f = ch[i];
    const Whisker& s = ch[i + 1];
    const auto* gf = th.find_two_gen(f.gen);
    const auto* gs = th.find_two_gen(s.gen);
    if (!gf || !gs) continue;
    std::size_t f_lo = f.pre, f_hi_dst = f.pre + gf->dst.word.size();
    std::size_t s_lo = s.pre, s_hi_src = s.pre + gs->src.word.size();
    Chain next = ch;
    if (s_lo >= f_hi_dst) {
      // s acts strictly right of f's output zone: s can move first
      long shift = (long)gf->dst.word.size() - (long)gf->src.word.size();
      Whisker ns = s;
      Whisker nf = f;
      ns.pre = (std::size_t)((long)s.pre - shift);
      ns.src = f.src;
      ns.dst = splice(ns.src, ns.pre, gs->src.word.size(), gs->dst.word);
      ns.post = ns.src.size() - ns.pre - gs->src.word.size();
      nf.src = ns.dst;
      nf.dst = splice(nf.src, nf.pre, gf->src.word.size(), gf->dst.word);
      nf.post = nf.src.size() - nf.pre - gf->src.word.size();
      next[i] = ns;
      next[i + 1] = nf;
      out.push_back(std::move(next));
    } else if (s_hi_src <= f_lo) {
      // s acts strictly left of f's zone
      Whisker ns = s;
      Whisker nf = f;
      ns.src = f.src;
      ns.dst = splice(ns.src, ns.pre, gs->src.word.size(), gs->dst.word);
      ns.post = ns.src.size() - ns.pre - gs->src.word.size();
      long shift = (long)gs->dst.word.size() - (long)gs->src.word.size();
      nf.pre = (std::size_t)((long)f.pre + shift);
      nf.src = ns.dst;
      nf.dst = splice(nf.src, nf.pre, gf->src.word.size(), gf->dst.word);
      nf.post = nf.src.size() - nf.pre - gf->src.word.size();
      next[i] = ns;
      next[i + 1] = nf;
      out.push_back(std::move(next));
    }
  }
  return out;
}

bool chain_bfs_eq(const ModeTheory& th, const Chain& a, const Chain& b) {
  if (a.size() != b.size()) return false;
  if (a == b) return true;
  const std::size_t max_visited = 2048;
  std::set<Chain> visited{a};
  std::deque<Chain> frontier{a};
  while (!frontier.empty()) {
    Chain c = frontier.front();
    frontier.pop_front();
    for (auto& n : chain_neighbors(c, th)) {
      if (n == b) return true;
      if (visited.size() >= max_visited) throw Undecided(max_visited);
      if (visited.insert(n).second) frontier.push_back(std::move(n));
    }
  }
  return false;
}

}  // namespace

bool eq_cell(const ModeTheory& th, const CellExpr& a, const CellExpr& b) {
  if (a.empty() || b.empty()) throw Error("eq_cell on empty cell handle");
  if (!eq_mod(th, a.src(), b.src()) || !eq_mod(th, a.dst(), b.dst()))
    throw BoundaryMismatch("eq_cell on non-parallel 2-cells " + a.str() + ", " + b.str());
  if (th.enrichment == Enrichment::Poset) return true;
  if (th.name == "walking_adjunction") return adj_eval(a) == adj_eval(b);
  Chain ca, cb;
  chain_of(th, a, ca);
  chain_of(th, b, cb);
  return chain_bfs_eq(th, ca, cb);
}

// ----------------------------------------------------------- find_cell ---

FindCellResult find_cell(const ModeTheory& th, const ModalityPath& mu,
                         const ModalityPath& nu, std::size_t max_steps) {
  if (mu.src != nu.src || mu.dst != nu.dst)
    throw BoundaryMismatch("find_cell on non-parallel 1-cells " + mu.str() + ", " +
                           nu.str());
  if (eq_mod(th, mu, nu)) {
    FindCellResult r;
    r.status = FindCellResult::Status::Found;
    r.cell = CellExpr::ident(mu);
    return r;
  }

  // Reachability over words: one step applies a single whiskered 2-cell
  // generator. Every 2-cell is a vertical chain of such steps.
  struct State {
    Word word;
    CellExpr cell;  // composite mu => word
  };
  Word target = th.normalize_word(nu.src, nu.word);
  Word start = th.normalize_word(mu.src, mu.word);
  const std::size_t max_len = std::max(start.size(), target.size()) + 4;
  std::set<Word> visited{start};
  std::deque<State> frontier;
  frontier.push_back({start, CellExpr::ident(mu)});
  bool pruned = false;
  std::size_t steps = 0;

  while (!frontier.empty()) {
    State st = frontier.front();
    frontier.pop_front();
    if (++steps > max_steps) {
      pruned = true;
      break;
    }
    std::vector<std::string> modes;
    try {
      modes = cut_modes(th, mu.src, st.word);
    } catch (const BoundaryMismatch&) {
      continue;
    }
    for (const auto& g : th.two_gens) {
      Word pat = th.normalize_word(g.src.src, g.src.word);
      for (std::size_t i = 0; i + pat.size() <= st.word.size(); ++i) {
        if (!pat.empty() && !subword_at(st.word, i, pat)) continue;
        std::size_t j = i + pat.size();
        if (modes[i] != g.src.dst || modes[j] != g.src.src) continue;

        Word next = splice(st.word, i, pat.size(), g.dst.word);
        Word next_nf = th.normalize_word(mu.src, next);
        if (next_nf.size() > max_len) {
          pruned = true;
          continue;
        }
        // Whisker the generator into position: 1(prefix) * g * 1(suffix).
        CellExpr step = CellExpr::gen(g.name, g.src, g.dst);
        if (i > 0) {
          ModalityPath pre{modes[i], mu.dst, Word(st.word.begin(), st.word.begin() + i)};
          step = CellExpr::hcomp(CellExpr::ident(pre), step);
        }
        if (j < st.word.size()) {
          ModalityPath post{mu.src, modes[j], Word(st.word.begin() + j, st.word.end())};
          step = CellExpr::hcomp(step, CellExpr::ident(post));
        }
        CellExpr total =
            st.cell.is_identity_shape() ? step : CellExpr::vcomp(st.cell, step);
        if (next_nf == target) {
          FindCellResult r;
          r.status = FindCellResult::Status::Found;
          r.cell = total;
          return r;
        }
        if (visited.insert(next_nf).second) frontier.push_back({next_nf, total});
      }
    }
  }

  FindCellResult r;
  if (pruned) {
    r.status = FindCellResult::Status::Exhausted;
    r.bound = max_steps;
  } else {
    r.status = FindCellResult::Status::None;
  }
  return r;
}

// ------------------------------------------------- factor_path_suffix ---

std::optional<ModalityPath> factor_path_suffix(const ModeTheory& th,
                                               const ModalityPath& path,
                                               const ModalityPath& suffix) {
  if (path.src != suffix.src) return std::nullopt;
  const auto n = path.word.size(), m = suffix.word.size();
  if (m <= n) {
    bool literal = true;
    for (std::size_t i = 0; i < m && literal; ++i) {
      literal = path.word[n - m + i] == suffix.word[i];
    }
    if (literal) {
      ModalityPath out;
      out.src = suffix.dst;
      out.dst = path.dst;
      out.word.assign(path.word.begin(), path.word.end() - static_cast<long>(m));
      return out;
    }
  }
  for (std::size_t i = n + 1; i-- > 0;) {
    ModalityPath s;
    s.src = path.src;
    s.word.assign(path.word.end() - static_cast<long>(i), path.word.end());
    if (i == n) {
      s.dst = path.dst;
    } else {
      const auto* g = th.find_one_gen(path.word[n - i - 1]);
      if (!g) return std::nullopt;
      s.dst = g->src;
    }
    if (s.dst != suffix.dst) continue;
    bool equal = false;
    try {
      equal = eq_mod(th, s, suffix);
    } catch (const Undecided&) {
      continue;
    }
    if (!equal) continue;
    ModalityPath out;
    out.src = s.dst;
    out.dst = path.dst;
    out.word.assign(path.word.begin(), path.word.end() - static_cast<long>(i));
    return out;
  }
  return std::nullopt;
}

// ------------------------------------------------------------ builtins ---

namespace {

ModeTheory make_trivial() {
  ModeTheory th;
  th.name = "trivial";
  th.modes = {"m"};
  th.enrichment = Enrichment::Poset;
  th.rewrites_confluent = true;
  return th;
}

ModeTheory make_idempotent_comonad() {
  ModeTheory th;
  th.name = "idempotent_comonad";
  th.modes = {"m"};
  th.one_gens = {{"mu", "m", "m"}};
  ModalityPath mu{"m", "m", {"mu"}};
  ModalityPath one = ModalityPath::identity("m");
  th.one_eqs = {{compose_mod(mu, mu), mu}};
  th.rewrites = {{{"mu", "mu"}, {"mu"}}};
  th.rewrites_confluent = true;
  th.two_gens = {{"eps", mu, one}};
  th.enrichment = Enrichment::Poset;
  return th;
}

ModeTheory make_guarded() {
  ModeTheory th;
  th.name = "guarded";
  th.modes = {"t", "s"};
  th.one_gens = {{"l", "t", "t"}, {"g", "t", "s"}, {"d", "s", "t"}};
  ModalityPath l{"t", "t", {"l"}};
  ModalityPath g{"t", "s", {"g"}};
  ModalityPath d{"s", "t", {"d"}};
  ModalityPath one_t = ModalityPath::identity("t");
  ModalityPath one_s = ModalityPath::identity("s");
  th.one_eqs = {{compose_mod(g, d), one_s}, {compose_mod(g, l), g}};
  th.rewrites = {{{"g", "d"}, {}}, {{"g", "l"}, {"g"}}};
  th.rewrites_confluent = true;
  th.two_gens = {{"dg_le_one", compose_mod(d, g), one_t}, {"one_le_l", one_t, l}};
  th.enrichment = Enrichment::Poset;
  return th;
}

ModeTheory make_walking_adjunction() {
  ModeTheory th;
  th.name = "walking_adjunction";
  th.modes = {"m", "n"};
  th.one_gens = {{"mu", "n", "m"}, {"nu", "m", "n"}};
  ModalityPath mu{"n", "m", {"mu"}};
  ModalityPath nu{"m", "n", {"nu"}};
  ModalityPath one_m = ModalityPath::identity("m");
  ModalityPath one_n = ModalityPath::identity("n");
  th.two_gens = {{"eta", one_m, compose_mod(mu, nu)}, {"eps", compose_mod(nu, mu), one_n}};
  CellExpr eta = CellExpr::gen("eta", one_m, compose_mod(mu, nu));
  CellExpr eps = CellExpr::gen("eps", compose_mod(nu, mu), one_n);
  CellExpr id_mu = CellExpr::ident(mu);
  CellExpr id_nu = CellExpr::ident(nu);
  // (1mu * eps) ∘ (eta * 1mu) = 1mu   and   (eps * 1nu) ∘ (1nu * eta) = 1nu
  th.two_eqs = {
      {CellExpr::vcomp(CellExpr::hcomp(eta, id_mu), CellExpr::hcomp(id_mu, eps)), id_mu},
      {CellExpr::vcomp(CellExpr::hcomp(id_nu, eta), CellExpr::hcomp(eps, id_nu)), id_nu},
  };
  th.rewrites_confluent = true;  // free 1-cells
  th.enrichment = Enrichment::General;
  return th;
}

}  // namespace

const ModeTheory& builtin_theory(const std::string& name) {
  static const ModeTheory trivial = make_trivial();
  static const ModeTheory comonad = make_idempotent_comonad();
  static const ModeTheory guarded = make_guarded();
  static const ModeTheory adjunction = make_walking_adjunction();
  if (name == "trivial") return trivial;
  if (name == "idempotent_comonad") return comonad;
  if (name == "guarded") return guarded;
  if (name == "walking_adjunction") return adjunction;
  throw Error("unknown builtin mode theory: " + name);
}

std::vector<std::string> builtin_theory_names() {
  return {"trivial", "idempotent_comonad", "guarded", "walking_adjunction"};
}

// ------------------------------------------------------------- parsing ---

namespace {

// Unicode aliases used in papers and on the command line.
const std::map<std::string, std::string> kAliases = {
    {"γ", "g"},  {"δ", "d"},  {"ℓ", "l"},   {"μ", "mu"},
    {"ν", "nu"}, {"η", "eta"}, {"ε", "eps"},
};

std::string unalias(const std::string& s) {
  auto it = kAliases.find(s);
  return it == kAliases.end() ? s : it->second;
}

std::vector<std::string> split_tokens(const std::string& text, const std::string& seps) {
  // splits on any of `seps` single-byte separators, trimming whitespace
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace

ModalityPath parse_path(const ModeTheory& th, const std::string& text,
                        const std::optional<std::string>& mode_hint) {
  std::string t = replace_all(text, "∘", ".");
  auto raw = split_tokens(t, ".");
  if (raw.empty()) throw ParseError("empty modality path", {});

  std::vector<std::string> word;
  std::optional<std::string> id_mode;
  for (auto& tok0 : raw) {
    std::string tok = unalias(tok0);
    if (tok == "1" || tok == "id") continue;  // identity factor
    if (tok.rfind("1@", 0) == 0 || tok.rfind("id@", 0) == 0) {
      std::string m = tok.substr(tok.find('@') + 1);
      if (!th.has_mode(m)) throw ParseError("unknown mode " + m, {});
      id_mode = m;
      continue;
    }
    if (!th.find_one_gen(tok))
      throw ParseError("unknown modality generator " + tok0, {});
    word.push_back(tok);
  }
  ModalityPath p;
  if (word.empty()) {
    std::string m;
    if (id_mode) {
      m = *id_mode;
    } else if (mode_hint) {
      m = *mode_hint;
    } else if (th.modes.size() == 1) {
      m = th.modes[0];
    } else {
      throw ParseError("cannot infer the mode of an identity path; write 1@mode", {});
    }
    return ModalityPath::identity(m);
  }
  p.word = word;
  p.src = th.find_one_gen(word.back())->src;
  p.dst = th.find_one_gen(word.front())->dst;
  th.validate_path(p);
  return p;
}

namespace {

struct CellParser {
  const ModeTheory& th;
  std::string text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' ||
          static_cast<unsigned char>(c) >= 0x80) {
        ++pos;
      } else {
        break;
      }
    }
    if (start == pos) throw ParseError("expected a 2-cell name in '" + text + "'", {});
    return text.substr(start, pos - start);
  }

  CellExpr atom() {
    skip_ws();
    if (eat('(')) {
      CellExpr c = cell();
      if (!eat(')')) throw ParseError("missing ')' in cell '" + text + "'", {});
      return c;
    }
    if (peek() == '1') {
      ++pos;  // consume '1'
      if (peek() == '(') {
        eat('(');
        std::size_t depth = 1, start = pos;
        while (pos < text.size() && depth) {
          if (text[pos] == '(') ++depth;
          if (text[pos] == ')') --depth;
          ++pos;
        }
        std::string inner = text.substr(start, pos - 1 - start);
        return CellExpr::ident(parse_path(th, inner));
      }
      if (peek() == '@') {
        ++pos;
        std::string m = ident();
        if (!th.has_mode(m)) throw ParseError("unknown mode " + m, {});
        return CellExpr::ident(ModalityPath::identity(m));
      }
      // "1μ" / "1mu": identity on the immediately following path atom
      std::string p = ident();
      return CellExpr::ident(parse_path(th, p));
    }
    std::string name0 = ident();
    std::string name = unalias(name0);
    if (name == "id") {
      if (!eat('(')) throw ParseError("id needs a parenthesized path", {});
      std::size_t depth = 1, start = pos;
      while (pos < text.size() && depth) {
        if (text[pos] == '(') ++depth;
        if (text[pos] == ')') --depth;
        ++pos;
      }
      std::string inner = text.substr(start, pos - 1 - start);
      return CellExpr::ident(parse_path(th, inner));
    }
    const auto* g = th.find_two_gen(name);
    if (!g) throw ParseError("unknown 2-cell generator " + name0, {});
    return CellExpr::gen(g->name, g->src, g->dst);
  }

  CellExpr hchain() {
    CellExpr c = atom();
    while (peek() == '*') {
      eat('*');
      c = CellExpr::hcomp(c, atom());
    }
    return c;
  }

  // "a;b" denotes a∘b: b happens first.
  CellExpr cell() {
    std::vector<CellExpr> parts{hchain()};
    while (peek() == ';') {
      eat(';');
      parts.push_back(hchain());
    }
    CellExpr c = parts.back();
    for (std::size_t i = parts.size() - 1; i-- > 0;) c = CellExpr::vcomp(c, parts[i]);
    return c;
  }
};

}  // namespace

CellExpr parse_cell(const ModeTheory& th, const std::string& text) {
  CellParser p{th, text};
  CellExpr c = p.cell();
  p.skip_ws();
  if (p.pos != p.text.size())
    throw ParseError("trailing characters in cell '" + text + "'", {});
  return c;
}

}  // namespace mtt
