#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "mtt/mode_theory.hpp"

namespace mtt {

struct CtxNode;
struct TyNode;
struct TmNode;
struct SubNode;
using CtxPtr = std::shared_ptr<const CtxNode>;
using TyPtr = std::shared_ptr<const TyNode>;
using TmPtr = std::shared_ptr<const TmNode>;
using SubPtr = std::shared_ptr<const SubNode>;

// ---- contexts -------------------------------------------------------------
//
// Each context lives at a mode. Lock(Γ, μ) for μ : m -> mode(Γ) moves the
// context to mode m; Extend(Γ, ρ, A) binds a variable whose type A lives in
// Lock(Γ, ρ). De Bruijn indices count Extends only.

struct CtxEmp {
  std::string mode;
};
struct CtxLock {
  CtxPtr ctx;
  ModalityPath mod;
};
struct CtxExtend {
  CtxPtr ctx;
  ModalityPath ann;
  TyPtr ty;
};

struct CtxNode {
  std::variant<CtxEmp, CtxLock, CtxExtend> v;
};

CtxPtr ctx_emp(std::string mode);
// Smart constructor: drops identity locks, merges adjacent locks
// (Γ.lock_ν.lock_μ = Γ.lock_{ν∘μ}), and erases locks on the empty context
// (the lock functors preserve the terminal context).
CtxPtr ctx_lock(const CtxPtr& g, const ModalityPath& mu);
CtxPtr ctx_extend(const CtxPtr& g, ModalityPath ann, TyPtr ty);

std::string ctx_mode(const CtxPtr& g);
std::size_t ctx_len(const CtxPtr& g);  // number of Extends

// Composite of the locks strictly above the k-th binder (counting from the
// top, 0-based), as a path mode(Γ) -> mode at that binder.
ModalityPath locks_above(const CtxPtr& g, std::size_t k);

struct VarInfo {
  ModalityPath ann;    // binder annotation ρ
  TyPtr ty;            // the declared type, over Lock(below, ρ)
  CtxPtr below;        // context underneath the binder
  ModalityPath locks;  // locks_above(Γ, k)
};
VarInfo lookup_var(const CtxPtr& g, std::size_t k);

// ---- types ----------------------------------------------------------------

struct TyBool {};
struct TyUni {
  unsigned level;  // 0 or 1
};
struct TyDec {
  TmPtr code;  // decode a universe code into a type
};
struct TyLift {
  TyPtr ty;  // a level-0 type used at level 1 (erased by evaluation)
};
struct TyId {
  TyPtr ty;
  TmPtr lhs, rhs;
};
struct TyPi {
  ModalityPath mode;  // (x :{μ} A) -> B ; A over Lock(Γ, μ), B over Γ.(μ|A)
  TyPtr dom;
  TyPtr cod;
};
struct TySigma {
  TyPtr fst;
  TyPtr snd;  // over Γ.(1|fst)
};
struct TyModal {
  ModalityPath mode;  // ⟨μ | A⟩ ; A over Lock(Γ, μ)
  TyPtr ty;
};
struct TySub {
  TyPtr ty;
  SubPtr sub;
};

struct TyNode {
  std::variant<TyBool, TyUni, TyDec, TyLift, TyId, TyPi, TySigma, TyModal, TySub> v;
};

// ---- terms ----------------------------------------------------------------

struct TmVar {
  std::size_t index;
  CellExpr cell;  // α : ann(binder) => locks_above(Γ, index)
};
struct TmTrue {};
struct TmFalse {};
struct TmBoolRec {
  TyPtr motive;  // over Γ.(1|Bool)
  TmPtr on_true, on_false, scrut;
};
struct TmRefl {
  TmPtr tm;
};
struct TmIdRec {
  TyPtr motive;  // over Γ.(1|A).(1|Id(A, a, Var0)) -- J's motive
  TmPtr refl_case;
  TmPtr scrut;
};
struct TmEnc {
  TyPtr ty;  // code of a type
};
struct TmLam {
  ModalityPath mode;
  TmPtr body;  // over Γ.(μ|A)
};
struct TmApp {
  ModalityPath mode;  // the Π annotation; the argument lives under Lock(Γ, μ)
  TmPtr fn, arg;
};
struct TmPair {
  TmPtr fst, snd;
};
struct TmProj {
  int which;  // 0 or 1
  TmPtr pair;
};
struct TmMkBox {
  ModalityPath mode;
  TmPtr body;  // over Lock(Γ, μ)
};
struct TmOpen {
  ModalityPath frame;  // ν: the frame under which the box is opened
  ModalityPath mode;   // μ: the eliminated box's modality
  TyPtr motive;        // over Γ.(ν|⟨μ|A⟩)
  TmPtr scrut;         // over Lock(Γ, ν)
  TmPtr branch;        // over Γ.(ν∘μ|A)
};
struct TmAxiom {
  std::string name;
  TyPtr ty;  // closed type at the axiom's mode
};
struct TmSub {
  TmPtr tm;
  SubPtr sub;
};

struct TmNode {
  std::variant<TmVar, TmTrue, TmFalse, TmBoolRec, TmRefl, TmIdRec, TmEnc, TmLam, TmApp,
               TmPair, TmProj, TmMkBox, TmOpen, TmAxiom, TmSub>
      v;
};

// ---- substitutions ---------------------------------------------------------

struct SubEmp {};  // ! : Δ -> Emp
struct SubId {};
struct SubWk {};  // Γ.(ρ|A) -> Γ
struct SubComp {
  SubPtr outer, inner;  // outer ∘ inner; t[outer∘inner] = t[outer][inner]
};
struct SubLock {
  SubPtr sub;
  ModalityPath mod;  // Lock_μ(σ) : Δ.lock_μ -> Γ.lock_μ
};
struct SubKey {
  CellExpr cell;  // α : μ => ν gives Key(α, Γ) : Γ.lock_ν -> Γ.lock_μ
  CtxPtr at;      // Γ; may be null only when the cell is an identity
};
struct SubExt {
  SubPtr base;        // σ : Δ -> Γ
  ModalityPath ann;   // μ: extends into Γ.(μ|A)
  CtxPtr at;          // Δ (the domain); may be null for weakening-lifts
  TmPtr tm;           // over Δ.lock_μ
};

struct SubNode {
  std::variant<SubEmp, SubId, SubWk, SubComp, SubLock, SubKey, SubExt> v;
};

// ---- constructors ----------------------------------------------------------

TyPtr ty_bool();
TyPtr ty_uni(unsigned level);
TyPtr ty_dec(TmPtr code);
TyPtr ty_lift(TyPtr ty);
TyPtr ty_id(TyPtr ty, TmPtr lhs, TmPtr rhs);
TyPtr ty_pi(ModalityPath mode, TyPtr dom, TyPtr cod);
TyPtr ty_sigma(TyPtr fst, TyPtr snd);
TyPtr ty_modal(ModalityPath mode, TyPtr ty);
TyPtr ty_sub(TyPtr ty, SubPtr sub);

TmPtr tm_var(std::size_t index, CellExpr cell);
TmPtr tm_true();
TmPtr tm_false();
TmPtr tm_boolrec(TyPtr motive, TmPtr on_true, TmPtr on_false, TmPtr scrut);
TmPtr tm_refl(TmPtr t);
TmPtr tm_idrec(TyPtr motive, TmPtr refl_case, TmPtr scrut);
TmPtr tm_enc(TyPtr ty);
TmPtr tm_lam(ModalityPath mode, TmPtr body);
TmPtr tm_app(ModalityPath mode, TmPtr fn, TmPtr arg);
TmPtr tm_pair(TmPtr fst, TmPtr snd);
TmPtr tm_proj(int which, TmPtr pair);
TmPtr tm_mkbox(ModalityPath mode, TmPtr body);
TmPtr tm_open(ModalityPath frame, ModalityPath mode, TyPtr motive, TmPtr scrut,
              TmPtr branch);
TmPtr tm_axiom(std::string name, TyPtr ty);
TmPtr tm_sub(TmPtr tm, SubPtr sub);

SubPtr sub_emp();
SubPtr sub_id();
SubPtr sub_wk();
// Smart: comp(id, σ) = comp(σ, id) = σ.
SubPtr sub_comp(SubPtr outer, SubPtr inner);
// Smart: lock by an identity path is the substitution itself; locking an
// identity substitution is the identity.
SubPtr sub_lock(SubPtr sub, const ModalityPath& mod);
// Smart: an identity-shaped cell gives the identity substitution.
SubPtr sub_key(CellExpr cell, CtxPtr at);
SubPtr sub_ext(SubPtr base, ModalityPath ann, CtxPtr at, TmPtr tm);
// δ⁺ = Ext(δ∘Wk, μ, Var(0, 1_μ)): lifts σ under a binder with annotation μ.
SubPtr sub_lift(SubPtr sub, const ModalityPath& ann);

// ---- helpers ---------------------------------------------------------------

// Shift free variables (indices >= cutoff) by `by`. Requires an
// explicit-substitution-free term; throws IllFormedSubstitution otherwise.
TmPtr shift(const TmPtr& t, std::size_t cutoff, std::size_t by);
TyPtr shift_ty(const TyPtr& t, std::size_t cutoff, std::size_t by);

// Structural equality (cells compared by printed form).
bool tm_equal(const TmPtr& a, const TmPtr& b);
bool ty_equal(const TyPtr& a, const TyPtr& b);

// Structural equality modulo the mode theory: modality annotations are
// compared with eq_mod, variable cells with eq_cell (after a boundary check).
// May propagate Undecided when the theory's cell decider gives up.
bool tm_equiv(const ModeTheory& th, const TmPtr& a, const TmPtr& b);
bool ty_equiv(const ModeTheory& th, const TyPtr& a, const TyPtr& b);

// True when the term/type contains a TmSub/TySub node anywhere.
bool has_explicit_sub(const TmPtr& t);
bool has_explicit_sub_ty(const TyPtr& t);

}  // namespace mtt
