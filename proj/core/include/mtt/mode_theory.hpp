#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtt/diagnostics.hpp"

namespace mtt {

// A 1-cell of the mode theory: a composite of generator names between two
// modes. `word` is in composition order, outermost first: {a,b} is a∘b with
// src = src(b) and dst = dst(a). The empty word is the identity at src==dst.
struct ModalityPath {
  std::string src;
  std::string dst;
  std::vector<std::string> word;

  bool is_identity() const { return word.empty(); }
  bool operator==(const ModalityPath& o) const {
    return src == o.src && dst == o.dst && word == o.word;
  }
  std::string str() const;

  static ModalityPath identity(std::string mode) {
    return ModalityPath{mode, std::move(mode), {}};
  }
};

// mu ∘ nu: requires src(mu) == dst(nu). Result maps src(nu) -> dst(mu).
ModalityPath compose_mod(const ModalityPath& mu, const ModalityPath& nu);

// A 2-cell pasting expression with cached boundary.
//   Gen    -- a named 2-cell generator
//   Ident  -- identity 2-cell on a 1-cell
//   VComp  -- vertical composite: VComp(a, b) is "a then b" (b ∘ a),
//             requiring dst(a) = src(b)
//   HComp  -- horizontal composite a ⋆ b, boundary src(a)∘src(b) => dst(a)∘dst(b)
class CellExpr {
 public:
  enum class Kind { Gen, Ident, VComp, HComp };

  struct Node {
    Kind kind;
    std::string gen;  // Kind::Gen only
    ModalityPath src, dst;
    std::shared_ptr<const Node> a, b;
  };

  CellExpr() = default;  // empty handle; only for container defaults
  bool empty() const { return node_ == nullptr; }

  static CellExpr gen(std::string name, ModalityPath src, ModalityPath dst);
  static CellExpr ident(ModalityPath path);
  // a then b. Boundaries are recorded, not revalidated (words may differ by
  // 1-cell equations of the governing theory).
  static CellExpr vcomp(const CellExpr& a, const CellExpr& b);
  static CellExpr hcomp(const CellExpr& a, const CellExpr& b);

  Kind kind() const { return node_->kind; }
  const std::string& gen_name() const { return node_->gen; }
  const ModalityPath& src() const { return node_->src; }
  const ModalityPath& dst() const { return node_->dst; }
  CellExpr left() const { return CellExpr(node_->a); }
  CellExpr right() const { return CellExpr(node_->b); }

  bool is_identity_shape() const { return node_->kind == Kind::Ident; }
  std::string str() const;

 private:
  explicit CellExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Outcome of find_cell: either a cell, a definitive "no cell exists", or an
// inconclusive search that hit its bound.
struct FindCellResult {
  enum class Status { Found, None, Exhausted };
  Status status = Status::None;
  std::optional<CellExpr> cell;
  std::size_t bound = 0;  // Exhausted only

  bool found() const { return status == Status::Found; }
};

enum class Enrichment { General, Poset };

struct ModeTheory {
  struct OneGen {
    std::string name, src, dst;
  };
  struct TwoGen {
    std::string name;
    ModalityPath src, dst;
  };

  std::string name;  // optional tag ("trivial", "guarded", ... or "")
  std::vector<std::string> modes;
  std::vector<OneGen> one_gens;
  std::vector<TwoGen> two_gens;
  std::vector<std::pair<ModalityPath, ModalityPath>> one_eqs;
  std::vector<std::pair<CellExpr, CellExpr>> two_eqs;  // general enrichment only
  Enrichment enrichment = Enrichment::General;

  // Oriented, terminating word rewrite rules for the 1-cell word problem.
  // Builtins install curated confluent systems; theories loaded from files
  // fall back to bounded bidirectional closure over one_eqs.
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> rewrites;
  bool rewrites_confluent = false;

  bool has_mode(const std::string& m) const;
  const OneGen* find_one_gen(const std::string& n) const;
  const TwoGen* find_two_gen(const std::string& n) const;

  // Checks that `p` is a well-formed 1-cell: every generator exists and the
  // endpoints chain. Throws BoundaryMismatch otherwise.
  void validate_path(const ModalityPath& p) const;
  void validate_cell(const CellExpr& c) const;

  std::vector<std::string> normalize_word(const std::string& src_mode,
                                          std::vector<std::string> word) const;
  ModalityPath normalize_path(const ModalityPath& p) const;
};

// --- deciders ------------------------------------------------------------

// Equality of 1-cells. Throws Undecided for non-confluent theories whose
// bounded closure gives up. Throws BoundaryMismatch if endpoints differ.
bool eq_mod(const ModeTheory& th, const ModalityPath& mu, const ModalityPath& nu);

// Equality of parallel 2-cells (boundaries equal up to eq_mod — checked).
// Poset enrichment: trivially true. The walking adjunction: exact decision
// via zig-zag normal forms. Other general theories: bounded normalization
// over two_eqs; throws Undecided when the bound is hit.
bool eq_cell(const ModeTheory& th, const CellExpr& a, const CellExpr& b);

// Search for any 2-cell mu => nu. Poset theories decide; general theories
// search vertical chains of whiskered generators up to a bound.
FindCellResult find_cell(const ModeTheory& th, const ModalityPath& mu,
                         const ModalityPath& nu, std::size_t max_steps = 64);

// Factors `path` as L ∘ suffix and returns L, or nullopt when no
// factorization exists. Tries a literal word match first, then every split
// of `path` modulo the theory's 1-cell equations (longest candidate first);
// the modulo fallback matters because boundaries produced by cell search can
// be stated in collapsed form. In a poset-enriched theory any
// equation-modulo choice gives rise to the same 2-cells, since parallel
// cells are all equal.
std::optional<ModalityPath> factor_path_suffix(const ModeTheory& th,
                                               const ModalityPath& path,
                                               const ModalityPath& suffix);

// --- builtins ------------------------------------------------------------

// "trivial" | "idempotent_comonad" | "guarded" | "walking_adjunction"
const ModeTheory& builtin_theory(const std::string& name);
std::vector<std::string> builtin_theory_names();

// --- path / cell expression parsing (shared by CLI and surface) ----------

// Parses "g∘d", "g.d", "1", "1@t", unicode aliases (γ, δ, ℓ, μ, ν).
// `mode_hint` resolves the mode of a bare identity.
ModalityPath parse_path(const ModeTheory& th, const std::string& text,
                        const std::optional<std::string>& mode_hint = std::nullopt);

// Parses cells: generator names, identities "1μ" / "1(path)" / "1@mode" /
// "id(path)", vertical ";", horizontal "*", parens. ";" reads like ∘:
// "a;b" applies b first, then a — i.e. VComp(parse b, parse a).
CellExpr parse_cell(const ModeTheory& th, const std::string& text);

}  // namespace mtt
