#pragma once

#include <string>

#include "mtt/core_syntax.hpp"

namespace mtt {

// Pushes an explicit substitution through a term or type until none remain.
// `mode` is the mode of the contexts involved (the domain and codomain of
// sigma agree on it). The result never contains TmSub/TySub nodes.
TmPtr push_subst(const TmPtr& t, const SubPtr& sigma, const std::string& mode);
TyPtr push_subst_ty(const TyPtr& a, const SubPtr& sigma, const std::string& mode);

// Precomposition with Key(alpha, at): for alpha : mu => nu, transports t from
// at.lock_mu to at.lock_nu. `at` may be null only when every variable the key
// acts on is the zeroth binder with no locks above it (the shape substitution
// lifts produce); otherwise IllFormedSubstitution.
TmPtr key_act(const TmPtr& t, const CellExpr& alpha, const CtxPtr& at);
TyPtr key_act_ty(const TyPtr& a, const CellExpr& alpha, const CtxPtr& at);

// Instantiates the top binder: body lives over G.(ann|A), m over G.lock_ann,
// the result over G. Pass `at` = G when available; it is needed whenever a
// variable uses the binder through a non-identity cell.
TmPtr subst_top(const TmPtr& body, const TmPtr& m, const ModalityPath& ann,
                const std::string& mode, const CtxPtr& at = nullptr);
TyPtr subst_top_ty(const TyPtr& body, const TmPtr& m, const ModalityPath& ann,
                   const std::string& mode, const CtxPtr& at = nullptr);

}  // namespace mtt
