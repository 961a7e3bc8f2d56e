#include "mtt/subst.hpp"

#include <optional>

#include "mtt/diagnostics.hpp"

namespace mtt {

namespace {

SubPtr lock_by(const SubPtr& s, const std::optional<ModalityPath>& w) {
  return w ? sub_lock(s, *w) : s;
}

// Var(k, alpha)[Lock_w(sigma)], where w is the lock path already peeled off
// the substitution (absent = none peeled). `mode` is the mode at the unpeeled
// level, i.e. of the original domain and codomain.
TmPtr resolve_var(std::size_t k, const CellExpr& alpha, const SubPtr& sigma,
                  std::optional<ModalityPath> w, const std::string& mode) {
  if (std::holds_alternative<SubId>(sigma->v)) return tm_var(k, alpha);
  if (std::holds_alternative<SubWk>(sigma->v)) return tm_var(k + 1, alpha);
  if (std::holds_alternative<SubEmp>(sigma->v))
    throw IllFormedSubstitution("variable resolved against the empty substitution");

  if (const auto* c = std::get_if<SubComp>(&sigma->v)) {
    // Lock_w(outer ∘ inner) = Lock_w(outer) ∘ Lock_w(inner).
    TmPtr mid = resolve_var(k, alpha, c->outer, w, mode);
    return push_subst(mid, lock_by(c->inner, w), mode);
  }

  if (const auto* l = std::get_if<SubLock>(&sigma->v)) {
    // Lock_w(Lock_kappa(s)) = Lock_{kappa∘w}(s).
    std::optional<ModalityPath> w2 = w ? compose_mod(l->mod, *w) : l->mod;
    return resolve_var(k, alpha, l->sub, std::move(w2), mode);
  }

  if (const auto* key = std::get_if<SubKey>(&sigma->v)) {
    // The key's cell beta : mu => nu acts on the lock the variable crosses:
    // alpha : rho => L∘mu∘w becomes vcomp(alpha, 1_L ⋆ beta ⋆ 1_w) : rho => L∘nu∘w,
    // with L the locks above binder k inside the key's own context.
    if (key->cell.is_identity_shape()) return tm_var(k, alpha);
    CellExpr mid = key->cell;
    if (key->at) {
      ModalityPath locks = locks_above(key->at, k);
      if (!locks.is_identity()) mid = CellExpr::hcomp(CellExpr::ident(locks), mid);
    } else if (k != 0) {
      throw IllFormedSubstitution(
          "key substitution without a stored context reaches variable " +
          std::to_string(k));
    }
    if (w && !w->is_identity()) mid = CellExpr::hcomp(mid, CellExpr::ident(*w));
    return tm_var(k, alpha.is_identity_shape() ? mid : CellExpr::vcomp(alpha, mid));
  }

  const auto& e = std::get<SubExt>(sigma->v);
  if (k > 0) return resolve_var(k - 1, alpha, e.base, std::move(w), mode);
  // Var(0, alpha)[Lock_w(Ext(delta, M))] = M[Key(alpha, Delta)]: by naturality
  // the peeled locks are absorbed into alpha's boundary (alpha : ann => w).
  if (alpha.is_identity_shape()) {
    if (!has_explicit_sub(e.tm)) return e.tm;
    return push_subst(e.tm, sub_id(), e.ann.src);
  }
  return push_subst(e.tm, sub_key(alpha, e.at), alpha.src().src);
}

}  // namespace

TmPtr push_subst(const TmPtr& t, const SubPtr& sigma, const std::string& mode) {
  if (std::holds_alternative<SubId>(sigma->v) && !has_explicit_sub(t)) return t;
  return std::visit(
      [&](const auto& n) -> TmPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TmVar>) {
          return resolve_var(n.index, n.cell, sigma, std::nullopt, mode);
        } else if constexpr (std::is_same_v<T, TmTrue> || std::is_same_v<T, TmFalse> ||
                             std::is_same_v<T, TmAxiom>) {
          return t;  // axioms carry closed types; nothing to substitute
        } else if constexpr (std::is_same_v<T, TmBoolRec>) {
          ModalityPath one = ModalityPath::identity(mode);
          return tm_boolrec(push_subst_ty(n.motive, sub_lift(sigma, one), mode),
                            push_subst(n.on_true, sigma, mode),
                            push_subst(n.on_false, sigma, mode),
                            push_subst(n.scrut, sigma, mode));
        } else if constexpr (std::is_same_v<T, TmRefl>) {
          return tm_refl(push_subst(n.tm, sigma, mode));
        } else if constexpr (std::is_same_v<T, TmIdRec>) {
          ModalityPath one = ModalityPath::identity(mode);
          SubPtr lifted2 = sub_lift(sub_lift(sigma, one), one);
          return tm_idrec(push_subst_ty(n.motive, lifted2, mode),
                          push_subst(n.refl_case, sigma, mode),
                          push_subst(n.scrut, sigma, mode));
        } else if constexpr (std::is_same_v<T, TmEnc>) {
          return tm_enc(push_subst_ty(n.ty, sigma, mode));
        } else if constexpr (std::is_same_v<T, TmLam>) {
          return tm_lam(n.mode, push_subst(n.body, sub_lift(sigma, n.mode), mode));
        } else if constexpr (std::is_same_v<T, TmApp>) {
          return tm_app(n.mode, push_subst(n.fn, sigma, mode),
                        push_subst(n.arg, sub_lock(sigma, n.mode), n.mode.src));
        } else if constexpr (std::is_same_v<T, TmPair>) {
          return tm_pair(push_subst(n.fst, sigma, mode), push_subst(n.snd, sigma, mode));
        } else if constexpr (std::is_same_v<T, TmProj>) {
          return tm_proj(n.which, push_subst(n.pair, sigma, mode));
        } else if constexpr (std::is_same_v<T, TmMkBox>) {
          return tm_mkbox(n.mode,
                          push_subst(n.body, sub_lock(sigma, n.mode), n.mode.src));
        } else if constexpr (std::is_same_v<T, TmOpen>) {
          ModalityPath comp = compose_mod(n.frame, n.mode);
          return tm_open(n.frame, n.mode,
                         push_subst_ty(n.motive, sub_lift(sigma, n.frame), mode),
                         push_subst(n.scrut, sub_lock(sigma, n.frame), n.frame.src),
                         push_subst(n.branch, sub_lift(sigma, comp), mode));
        } else {
          static_assert(std::is_same_v<T, TmSub>);
          return push_subst(n.tm, sub_comp(n.sub, sigma), mode);
        }
      },
      t->v);
}

TyPtr push_subst_ty(const TyPtr& a, const SubPtr& sigma, const std::string& mode) {
  if (std::holds_alternative<SubId>(sigma->v) && !has_explicit_sub_ty(a)) return a;
  return std::visit(
      [&](const auto& n) -> TyPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TyBool> || std::is_same_v<T, TyUni>) {
          return a;
        } else if constexpr (std::is_same_v<T, TyDec>) {
          return ty_dec(push_subst(n.code, sigma, mode));
        } else if constexpr (std::is_same_v<T, TyLift>) {
          return ty_lift(push_subst_ty(n.ty, sigma, mode));
        } else if constexpr (std::is_same_v<T, TyId>) {
          return ty_id(push_subst_ty(n.ty, sigma, mode), push_subst(n.lhs, sigma, mode),
                       push_subst(n.rhs, sigma, mode));
        } else if constexpr (std::is_same_v<T, TyPi>) {
          return ty_pi(n.mode, push_subst_ty(n.dom, sub_lock(sigma, n.mode), n.mode.src),
                       push_subst_ty(n.cod, sub_lift(sigma, n.mode), mode));
        } else if constexpr (std::is_same_v<T, TySigma>) {
          ModalityPath one = ModalityPath::identity(mode);
          return ty_sigma(push_subst_ty(n.fst, sigma, mode),
                          push_subst_ty(n.snd, sub_lift(sigma, one), mode));
        } else if constexpr (std::is_same_v<T, TyModal>) {
          return ty_modal(n.mode,
                          push_subst_ty(n.ty, sub_lock(sigma, n.mode), n.mode.src));
        } else {
          static_assert(std::is_same_v<T, TySub>);
          return push_subst_ty(n.ty, sub_comp(n.sub, sigma), mode);
        }
      },
      a->v);
}

TmPtr key_act(const TmPtr& t, const CellExpr& alpha, const CtxPtr& at) {
  if (alpha.empty() || alpha.is_identity_shape()) return t;
  return push_subst(t, sub_key(alpha, at), alpha.src().src);
}

TyPtr key_act_ty(const TyPtr& a, const CellExpr& alpha, const CtxPtr& at) {
  if (alpha.empty() || alpha.is_identity_shape()) return a;
  return push_subst_ty(a, sub_key(alpha, at), alpha.src().src);
}

TmPtr subst_top(const TmPtr& body, const TmPtr& m, const ModalityPath& ann,
                const std::string& mode, const CtxPtr& at) {
  return push_subst(body, sub_ext(sub_id(), ann, at, m), mode);
}

TyPtr subst_top_ty(const TyPtr& body, const TmPtr& m, const ModalityPath& ann,
                   const std::string& mode, const CtxPtr& at) {
  return push_subst_ty(body, sub_ext(sub_id(), ann, at, m), mode);
}

}  // namespace mtt
