#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mtt/core_syntax.hpp"
#include "mtt/mode_theory.hpp"

namespace mtt {

// Weak-head evaluation with environments, type-directed conversion, and
// closed-term canonical evaluation.
//
// Values form the weak-head fragment: constructors are evaluated one layer
// deep (boxes and pairs eagerly, function and motive bodies as closures),
// and stuck eliminations accumulate on neutrals. A 2-cell acting on a value
// (the semantic counterpart of a key substitution) distributes through
// canonical forms, composes into bare variable heads, and marks closure
// environments; each variable head's whisker is recovered from the cell's
// own codomain boundary, so values never carry their typing context.

struct Value;
struct TyVal;
struct Neutral;
struct EnvNode;
using ValPtr = std::shared_ptr<const Value>;
using TyValPtr = std::shared_ptr<const TyVal>;
using NeutPtr = std::shared_ptr<const Neutral>;
using EnvPtr = std::shared_ptr<const EnvNode>;

// ---- environments -----------------------------------------------------------
//
// An environment is the semantic image of a substitution, read innermost-out:
// each node composes one more substitution former onto its parent. Lookup
// mirrors the syntactic resolver: lock entries accumulate the peeled path w,
// key entries rewrite the use-cell in flight (pre) or act on the resolved
// value (post), and a value entry either returns its binding (identity cell)
// or key-acts on it.

struct EnvNil {
  std::string mode;  // mode of the empty telescope
};
struct EnvVal {
  EnvPtr parent;
  ValPtr val;
};
struct EnvLock {
  EnvPtr parent;
  ModalityPath mod;
};
struct EnvShift {
  EnvPtr parent;
  std::size_t by;  // weakening: lookups add `by` before continuing
};
// Key composed *before* the parent (t[Key(cell)][parent…]): rewrites the
// variable's cell, then continues the walk.
struct EnvKeyPre {
  EnvPtr parent;
  CellExpr cell;
};
// Key acting *after* the parent (a key that hit a closure): the parent
// resolves first, then the cell acts on the resulting value.
struct EnvKeyPost {
  EnvPtr parent;
  CellExpr cell;
};

struct EnvNode {
  std::variant<EnvNil, EnvVal, EnvLock, EnvShift, EnvKeyPre, EnvKeyPost> v;
};

EnvPtr env_nil(std::string mode);
EnvPtr env_val(EnvPtr parent, ValPtr val);
EnvPtr env_lock(EnvPtr parent, ModalityPath mod);
EnvPtr env_shift(EnvPtr parent, std::size_t by);
EnvPtr env_key_pre(EnvPtr parent, CellExpr cell);
EnvPtr env_key_post(EnvPtr parent, CellExpr cell);

// ---- closures ---------------------------------------------------------------

// A suspended body under one binder. `ann` is the binder's modality
// annotation; `mode` is the mode of the context the body lives over.
struct Closure {
  TmPtr body;
  EnvPtr env;
  ModalityPath ann;
  std::string mode;
};
struct TyClosure {
  TyPtr body;
  EnvPtr env;
  ModalityPath ann;
  std::string mode;
};
// Two binders (the J motive: the free endpoint, then the path).
struct TyClosure2 {
  TyPtr body;
  EnvPtr env;
  ModalityPath ann0, ann1;
  std::string mode;
};

// ---- neutrals ---------------------------------------------------------------

// Variable heads use de Bruijn levels, stable under binders.
struct NHVar {
  std::size_t level;
  CellExpr cell;  // accumulated: binder annotation => use boundary
};
struct NHAxiom {
  std::string name;
  TyPtr ty;          // the axiom's closed type schema
  std::string mode;  // the mode the axiom is declared at
};
using NeutralHead = std::variant<NHVar, NHAxiom>;

struct SApp {
  ModalityPath mode;
  ValPtr arg;
};
struct SProj {
  int which;
};
struct SBoolRec {
  TyClosure motive;
  ValPtr on_true, on_false;
};
struct SIdRec {
  TyClosure2 motive;
  ValPtr refl_case;
};
struct SOpen {
  ModalityPath frame, mode;
  TyClosure motive;  // binder: ⟨mode|A⟩ at annotation `frame`
  Closure branch;    // binder: A at annotation frame∘mode
};
// A pending key that could not be distributed (the cell's boundary does not
// literally factor through the head's). Compared with eq_cell.
struct SKey {
  CellExpr cell;
};
using SpineEntry = std::variant<SApp, SProj, SBoolRec, SIdRec, SOpen, SKey>;

struct Neutral {
  NeutralHead head;
  std::vector<SpineEntry> spine;  // innermost elimination first
};

// ---- values -----------------------------------------------------------------

struct VTrue {};
struct VFalse {};
struct VLam {
  ModalityPath mode;
  Closure clo;
};
struct VPair {
  ValPtr fst, snd;
};
struct VMkBox {
  ModalityPath mode;
  ValPtr body;
};
struct VRefl {
  ValPtr tm;
};
struct VEnc {
  TyValPtr ty;
};
struct VNeutral {
  NeutPtr ne;
  TyValPtr ty;  // cached type when known; null otherwise
};

struct Value {
  std::variant<VTrue, VFalse, VLam, VPair, VMkBox, VRefl, VEnc, VNeutral> v;
};

// ---- type values ------------------------------------------------------------

struct TVBool {};
struct TVUni {
  unsigned level;
};
struct TVPi {
  ModalityPath mode;
  TyValPtr dom;
  TyClosure cod;
};
struct TVSigma {
  TyValPtr fst;
  TyClosure snd;
};
struct TVModal {
  ModalityPath mode;
  TyValPtr ty;
};
struct TVId {
  TyValPtr ty;
  ValPtr lhs, rhs;
};
struct TVDec {
  NeutPtr code;  // stuck decode of a neutral universe code
};

struct TyVal {
  std::variant<TVBool, TVUni, TVPi, TVSigma, TVModal, TVId, TVDec> v;
};

// ---- the engine -------------------------------------------------------------

// Evaluation budget. Only axiom unfolding consumes fuel; plain β-steps are
// free (they terminate for well-typed axiom-free terms).
struct Fuel {
  long long left;
  void burn();  // throws FuelExhausted at zero
};

// Named axioms with an optional unfolding: a closed term of the axiom's
// type, substituted for the head when (and only when) an eliminator
// scrutinizes it. One unfolding costs one unit of fuel.
struct AxiomTable {
  std::map<std::string, TmPtr> unfold;
};

class Evaluator {
 public:
  explicit Evaluator(const ModeTheory& th, AxiomTable axioms = {})
      : th_(th), axioms_(std::move(axioms)) {}

  const ModeTheory& theory() const { return th_; }
  const AxiomTable& axioms() const { return axioms_; }

  // Weak-head normal form of t under env; `mode` is the mode of t's context.
  ValPtr whnf(const TmPtr& t, const EnvPtr& env, const std::string& mode, Fuel& fuel) const;
  TyValPtr eval_ty(const TyPtr& a, const EnvPtr& env, const std::string& mode,
                   Fuel& fuel) const;

  // The environment denoting σ composed onto `env` (σ's target is the
  // context `env` itself denotes).
  EnvPtr env_of_sub(const SubPtr& s, const EnvPtr& env, const std::string& mode,
                    Fuel& fuel) const;

  // The identity environment of Γ: every binder bound to a fresh neutral
  // carrying the binder's annotation as an identity cell.
  EnvPtr identity_env(const CtxPtr& g, Fuel& fuel) const;

  // Resolve variable k used through `cell`.
  ValPtr lookup(const EnvPtr& env, std::size_t k, const CellExpr& cell,
                const std::optional<ModalityPath>& w, Fuel& fuel) const;

  // Semantic key action: the value of t[Key(cell, _)] given the value of t.
  ValPtr val_cell_act(const ValPtr& v, const CellExpr& cell, Fuel& fuel) const;
  TyValPtr ty_cell_act(const TyValPtr& a, const CellExpr& cell, Fuel& fuel) const;

  // Eliminations on values.
  ValPtr vapp(const ValPtr& f, const ModalityPath& mode, const ValPtr& arg,
              Fuel& fuel) const;
  ValPtr vproj(int which, const ValPtr& p, Fuel& fuel) const;

  ValPtr apply_closure(const Closure& c, const ValPtr& v, Fuel& fuel) const;
  TyValPtr apply_ty_closure(const TyClosure& c, const ValPtr& v, Fuel& fuel) const;
  TyValPtr apply_ty_closure2(const TyClosure2& c, const ValPtr& v0, const ValPtr& v1,
                             Fuel& fuel) const;

  // Type-directed conversion. `lvl` is the number of binders in scope (the
  // next fresh level). η at Π and Σ; no η at modal, Bool, or Id types.
  bool conv_val(const ValPtr& a, const ValPtr& b, const TyValPtr& ty, std::size_t lvl,
                Fuel& fuel) const;
  bool conv_ty(const TyValPtr& a, const TyValPtr& b, std::size_t lvl, Fuel& fuel) const;

  // Definitional equality of terms at a type, under a context.
  bool conv(const TmPtr& a, const TmPtr& b, const TyPtr& ty, const CtxPtr& ctx,
            Fuel& fuel) const;

  // Read a value back into substitution-free core syntax.
  TmPtr readback(const ValPtr& v, std::size_t lvl, Fuel& fuel) const;
  TyPtr readback_ty(const TyValPtr& a, std::size_t lvl, Fuel& fuel) const;

 private:
  // Repeatedly unfold an axiom head about to be eliminated (one fuel each).
  ValPtr force_elim(const ValPtr& v, Fuel& fuel) const;
  bool conv_neutral(const NeutPtr& a, const NeutPtr& b, std::size_t lvl, Fuel& fuel) const;
  bool conv_closure(const Closure& a, const Closure& b, std::size_t lvl, Fuel& fuel) const;
  bool conv_ty_closure(const TyClosure& a, const TyClosure& b, std::size_t lvl,
                       Fuel& fuel) const;
  ValPtr unfold_axiom(const NHAxiom& ax, Fuel& fuel) const;

  const ModeTheory& th_;
  AxiomTable axioms_;
};

// ---- closed-term evaluation ---------------------------------------------------

// Canonical form of a closed well-typed term. Closed values never contain
// variable-headed neutrals (checked); an axiom head that survives evaluation
// is reported rather than treated as canonical.
struct CanonicalReport {
  enum class Kind { Canonical, BlockedAxiom };
  Kind kind = Kind::Canonical;
  ValPtr value;
  TmPtr normal_form;            // full readback
  std::optional<bool> boolean;  // set when the type is Bool and kind is Canonical
  std::string blocking_axiom;   // BlockedAxiom only

  bool canonical() const { return kind == Kind::Canonical; }
};

CanonicalReport eval_closed(const ModeTheory& th, const TmPtr& t, const TyPtr& ty,
                            const std::string& mode, long long fuel,
                            const AxiomTable& axioms = {});

// Convenience: full normal form of t under the identity environment of ctx.
TmPtr normalize(const ModeTheory& th, const TmPtr& t, const CtxPtr& ctx, long long fuel,
                const AxiomTable& axioms = {});
TyPtr normalize_ty(const ModeTheory& th, const TyPtr& a, const CtxPtr& ctx, long long fuel,
                   const AxiomTable& axioms = {});

// Normal form of a context: adjacent locks merge into their composite,
// locks on the empty telescope vanish, and every binder type is normalized.
CtxPtr ctx_nf(const ModeTheory& th, const CtxPtr& g, long long fuel,
              const AxiomTable& axioms = {});

}  // namespace mtt
