#pragma once

#include <string>

#include "mtt/core_syntax.hpp"
#include "mtt/diagnostics.hpp"
#include "mtt/eval.hpp"
#include "mtt/mode_theory.hpp"

namespace mtt {

// Bidirectional type checker over a fixed mode theory.
//
// Introduction forms whose type is ambiguous (functions, pairs, boxes) are
// checked against a given type; eliminations, variables, literals, codes,
// axioms, and refl synthesize. Modalities are compared with eq_mod and
// variable cells are verified against their boundary obligations; the
// checker never searches for 2-cells — terms arrive with every cell
// explicit (the surface elaborator is responsible for filling holes).
//
// Universe levels are exactly {0, 1}: U itself is the universe of small
// types and lives at level 1, El(-) produces small types, and Lift embeds a
// small type wherever a large one is expected. Binder types in contexts are
// large (checked at level 1), so every small type can still annotate a
// binder via the level-polymorphic formation rules.
//
// Every rejection throws CheckFailure carrying a Diagnostic whose `rule`
// names the judgment that failed ("tm/var", "tp/uni", "conv", ...).
class Checker {
 public:
  // `fuel` bounds axiom unfolding per top-level operation; plain β-steps
  // during conversion are free.
  explicit Checker(const ModeTheory& th, AxiomTable axioms = {},
                   long long fuel = 1'000'000);

  // Context formation: the telescope bottoms out at Emp(root), every lock
  // boundary chains, and every binder type is well formed (at level 1) over
  // its locked prefix.
  void check_ctx(const CtxPtr& g, const std::string& root) const;

  // Type synthesis. Throws CheckFailure "not-inferable" on forms that only
  // check (functions, pairs, boxes).
  TyPtr infer(const CtxPtr& g, const TmPtr& t) const;

  // Type checking: t against a (assumed well formed over g).
  void check_tm(const CtxPtr& g, const TmPtr& t, const TyPtr& a) const;

  // Type formation at a universe level (0 = small, 1 = large).
  void check_ty(const CtxPtr& g, const TyPtr& a, unsigned level) const;

  // Substitution formation: s : d -> g with both endpoints given. Composite
  // substitutions need an inferable middle context (identity, weakening,
  // lock, and key shapes); otherwise a "sub/comp" diagnostic explains that
  // the middle telescope is not recoverable.
  void check_sub(const CtxPtr& d, const SubPtr& s, const CtxPtr& g) const;

  const ModeTheory& theory() const { return th_; }
  const AxiomTable& axioms() const { return ev_.axioms(); }

 private:
  [[noreturn]] void reject(std::string rule, std::string message, std::string expected = "",
                           std::string actual = "", std::string obligation = "") const;

  // eq_mod with a boundary guard: paths whose endpoints differ are simply
  // unequal rather than a malformed query.
  bool paths_equal(const ModalityPath& a, const ModalityPath& b) const;
  // validate_path wrapped into a diagnostic for the given rule.
  void require_path(const ModalityPath& p, const char* rule) const;

  // Normal form of a type over g: explicit substitutions pushed, Lift
  // erased, decodable codes decoded. Used to expose the head connective.
  TyPtr nf_ty(const CtxPtr& g, const TyPtr& a) const;
  bool ty_conv(const CtxPtr& g, const TyPtr& a, const TyPtr& b) const;
  bool tm_conv(const CtxPtr& g, const TmPtr& a, const TmPtr& b, const TyPtr& ty) const;
  // Context equality up to lock merging and type conversion.
  bool ctx_conv(const CtxPtr& a, const CtxPtr& b) const;

  // Recover the codomain of simple substitution shapes (for SubComp).
  CtxPtr synth_sub_cod(const CtxPtr& d, const SubPtr& s) const;

  const ModeTheory& th_;
  Evaluator ev_;
  long long fuel_;
};

}  // namespace mtt
