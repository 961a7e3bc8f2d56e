#include "mtt/core_syntax.hpp"

#include "mtt/diagnostics.hpp"

namespace mtt {

// ---- contexts ---------------------------------------------------------------

CtxPtr ctx_emp(std::string mode) {
  return std::make_shared<CtxNode>(CtxNode{CtxEmp{std::move(mode)}});
}

CtxPtr ctx_lock(const CtxPtr& g, const ModalityPath& mu) {
  if (mu.dst != ctx_mode(g))
    throw BoundaryMismatch("lock " + mu.str() + " does not reach mode " + ctx_mode(g));
  if (mu.is_identity()) return g;
  if (std::holds_alternative<CtxEmp>(g->v)) return ctx_emp(mu.src);
  if (const auto* l = std::get_if<CtxLock>(&g->v))
    return std::make_shared<CtxNode>(CtxNode{CtxLock{l->ctx, compose_mod(l->mod, mu)}});
  return std::make_shared<CtxNode>(CtxNode{CtxLock{g, mu}});
}

CtxPtr ctx_extend(const CtxPtr& g, ModalityPath ann, TyPtr ty) {
  if (ann.dst != ctx_mode(g))
    throw BoundaryMismatch("binder annotation " + ann.str() + " does not reach mode " +
                           ctx_mode(g));
  return std::make_shared<CtxNode>(CtxNode{CtxExtend{g, std::move(ann), std::move(ty)}});
}

std::string ctx_mode(const CtxPtr& g) {
  const CtxNode* n = g.get();
  while (true) {
    if (const auto* e = std::get_if<CtxEmp>(&n->v)) return e->mode;
    if (const auto* l = std::get_if<CtxLock>(&n->v)) return l->mod.src;
    n = std::get<CtxExtend>(n->v).ctx.get();
  }
}

std::size_t ctx_len(const CtxPtr& g) {
  std::size_t n = 0;
  const CtxNode* c = g.get();
  while (true) {
    if (std::holds_alternative<CtxEmp>(c->v)) return n;
    if (const auto* l = std::get_if<CtxLock>(&c->v)) {
      c = l->ctx.get();
    } else {
      ++n;
      c = std::get<CtxExtend>(c->v).ctx.get();
    }
  }
}

ModalityPath locks_above(const CtxPtr& g, std::size_t k) {
  ModalityPath acc = ModalityPath::identity(ctx_mode(g));
  const CtxNode* c = g.get();
  std::size_t remaining = k;
  while (true) {
    if (std::holds_alternative<CtxEmp>(c->v))
      throw ScopeError("variable index " + std::to_string(k) + " out of range");
    if (const auto* l = std::get_if<CtxLock>(&c->v)) {
      acc = compose_mod(l->mod, acc);
      c = l->ctx.get();
      continue;
    }
    const auto& e = std::get<CtxExtend>(c->v);
    if (remaining == 0) return acc;
    --remaining;
    c = e.ctx.get();
  }
}

VarInfo lookup_var(const CtxPtr& g, std::size_t k) {
  ModalityPath acc = ModalityPath::identity(ctx_mode(g));
  CtxPtr cur = g;
  std::size_t remaining = k;
  while (true) {
    if (std::holds_alternative<CtxEmp>(cur->v))
      throw ScopeError("variable index " + std::to_string(k) + " out of range");
    if (const auto* l = std::get_if<CtxLock>(&cur->v)) {
      acc = compose_mod(l->mod, acc);
      cur = l->ctx;
      continue;
    }
    const auto& e = std::get<CtxExtend>(cur->v);
    if (remaining == 0) return VarInfo{e.ann, e.ty, e.ctx, acc};
    --remaining;
    cur = e.ctx;
  }
}

// ---- constructors -----------------------------------------------------------

namespace {
template <typename V>
TyPtr mk_ty(V v) {
  return std::make_shared<TyNode>(TyNode{std::move(v)});
}
template <typename V>
TmPtr mk_tm(V v) {
  return std::make_shared<TmNode>(TmNode{std::move(v)});
}
template <typename V>
SubPtr mk_sub(V v) {
  return std::make_shared<SubNode>(SubNode{std::move(v)});
}
}  // namespace

TyPtr ty_bool() { return mk_ty(TyBool{}); }
TyPtr ty_uni(unsigned level) { return mk_ty(TyUni{level}); }
TyPtr ty_dec(TmPtr code) { return mk_ty(TyDec{std::move(code)}); }
TyPtr ty_lift(TyPtr ty) { return mk_ty(TyLift{std::move(ty)}); }
TyPtr ty_id(TyPtr ty, TmPtr lhs, TmPtr rhs) {
  return mk_ty(TyId{std::move(ty), std::move(lhs), std::move(rhs)});
}
TyPtr ty_pi(ModalityPath mode, TyPtr dom, TyPtr cod) {
  return mk_ty(TyPi{std::move(mode), std::move(dom), std::move(cod)});
}
TyPtr ty_sigma(TyPtr fst, TyPtr snd) {
  return mk_ty(TySigma{std::move(fst), std::move(snd)});
}
TyPtr ty_modal(ModalityPath mode, TyPtr ty) {
  return mk_ty(TyModal{std::move(mode), std::move(ty)});
}
TyPtr ty_sub(TyPtr ty, SubPtr sub) {
  return mk_ty(TySub{std::move(ty), std::move(sub)});
}

TmPtr tm_var(std::size_t index, CellExpr cell) {
  return mk_tm(TmVar{index, std::move(cell)});
}
TmPtr tm_true() { return mk_tm(TmTrue{}); }
TmPtr tm_false() { return mk_tm(TmFalse{}); }
TmPtr tm_boolrec(TyPtr motive, TmPtr on_true, TmPtr on_false, TmPtr scrut) {
  return mk_tm(TmBoolRec{std::move(motive), std::move(on_true), std::move(on_false),
                         std::move(scrut)});
}
TmPtr tm_refl(TmPtr t) { return mk_tm(TmRefl{std::move(t)}); }
TmPtr tm_idrec(TyPtr motive, TmPtr refl_case, TmPtr scrut) {
  return mk_tm(TmIdRec{std::move(motive), std::move(refl_case), std::move(scrut)});
}
TmPtr tm_enc(TyPtr ty) { return mk_tm(TmEnc{std::move(ty)}); }
TmPtr tm_lam(ModalityPath mode, TmPtr body) {
  return mk_tm(TmLam{std::move(mode), std::move(body)});
}
TmPtr tm_app(ModalityPath mode, TmPtr fn, TmPtr arg) {
  return mk_tm(TmApp{std::move(mode), std::move(fn), std::move(arg)});
}
TmPtr tm_pair(TmPtr fst, TmPtr snd) {
  return mk_tm(TmPair{std::move(fst), std::move(snd)});
}
TmPtr tm_proj(int which, TmPtr pair) { return mk_tm(TmProj{which, std::move(pair)}); }
TmPtr tm_mkbox(ModalityPath mode, TmPtr body) {
  return mk_tm(TmMkBox{std::move(mode), std::move(body)});
}
TmPtr tm_open(ModalityPath frame, ModalityPath mode, TyPtr motive, TmPtr scrut,
              TmPtr branch) {
  return mk_tm(TmOpen{std::move(frame), std::move(mode), std::move(motive),
                      std::move(scrut), std::move(branch)});
}
TmPtr tm_axiom(std::string name, TyPtr ty) {
  return mk_tm(TmAxiom{std::move(name), std::move(ty)});
}
TmPtr tm_sub(TmPtr tm, SubPtr sub) {
  return mk_tm(TmSub{std::move(tm), std::move(sub)});
}

SubPtr sub_emp() { return mk_sub(SubEmp{}); }
SubPtr sub_id() { return mk_sub(SubId{}); }
SubPtr sub_wk() { return mk_sub(SubWk{}); }

SubPtr sub_comp(SubPtr outer, SubPtr inner) {
  if (std::holds_alternative<SubId>(outer->v)) return inner;
  if (std::holds_alternative<SubId>(inner->v)) return outer;
  return mk_sub(SubComp{std::move(outer), std::move(inner)});
}

SubPtr sub_lock(SubPtr sub, const ModalityPath& mod) {
  if (mod.is_identity()) return sub;
  if (std::holds_alternative<SubId>(sub->v)) return sub;
  if (const auto* l = std::get_if<SubLock>(&sub->v))
    return mk_sub(SubLock{l->sub, compose_mod(l->mod, mod)});
  return mk_sub(SubLock{std::move(sub), mod});
}

SubPtr sub_key(CellExpr cell, CtxPtr at) {
  if (cell.is_identity_shape()) return sub_id();
  return mk_sub(SubKey{std::move(cell), std::move(at)});
}

SubPtr sub_ext(SubPtr base, ModalityPath ann, CtxPtr at, TmPtr tm) {
  return mk_sub(SubExt{std::move(base), std::move(ann), std::move(at), std::move(tm)});
}

SubPtr sub_lift(SubPtr sub, const ModalityPath& ann) {
  if (std::holds_alternative<SubId>(sub->v)) return sub;  // id⁺ = id
  return sub_ext(sub_comp(std::move(sub), sub_wk()), ann, nullptr,
                 tm_var(0, CellExpr::ident(ann)));
}

// ---- shift ------------------------------------------------------------------

namespace {

struct Shifter {
  std::size_t by;

  TmPtr tm(const TmPtr& t, std::size_t cut) {
    return std::visit(
        [&](const auto& n) -> TmPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, TmVar>) {
            return n.index >= cut ? tm_var(n.index + by, n.cell) : t;
          } else if constexpr (std::is_same_v<T, TmTrue> || std::is_same_v<T, TmFalse> ||
                               std::is_same_v<T, TmAxiom>) {
            return t;
          } else if constexpr (std::is_same_v<T, TmBoolRec>) {
            return tm_boolrec(ty(n.motive, cut + 1), tm(n.on_true, cut),
                              tm(n.on_false, cut), tm(n.scrut, cut));
          } else if constexpr (std::is_same_v<T, TmRefl>) {
            return tm_refl(tm(n.tm, cut));
          } else if constexpr (std::is_same_v<T, TmIdRec>) {
            return tm_idrec(ty(n.motive, cut + 2), tm(n.refl_case, cut), tm(n.scrut, cut));
          } else if constexpr (std::is_same_v<T, TmEnc>) {
            return tm_enc(ty(n.ty, cut));
          } else if constexpr (std::is_same_v<T, TmLam>) {
            return tm_lam(n.mode, tm(n.body, cut + 1));
          } else if constexpr (std::is_same_v<T, TmApp>) {
            return tm_app(n.mode, tm(n.fn, cut), tm(n.arg, cut));
          } else if constexpr (std::is_same_v<T, TmPair>) {
            return tm_pair(tm(n.fst, cut), tm(n.snd, cut));
          } else if constexpr (std::is_same_v<T, TmProj>) {
            return tm_proj(n.which, tm(n.pair, cut));
          } else if constexpr (std::is_same_v<T, TmMkBox>) {
            return tm_mkbox(n.mode, tm(n.body, cut));
          } else if constexpr (std::is_same_v<T, TmOpen>) {
            return tm_open(n.frame, n.mode, ty(n.motive, cut + 1), tm(n.scrut, cut),
                           tm(n.branch, cut + 1));
          } else {
            static_assert(std::is_same_v<T, TmSub>);
            throw IllFormedSubstitution("shift on a term with explicit substitutions");
          }
        },
        t->v);
  }

  TyPtr ty(const TyPtr& a, std::size_t cut) {
    return std::visit(
        [&](const auto& n) -> TyPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, TyBool> || std::is_same_v<T, TyUni>) {
            return a;
          } else if constexpr (std::is_same_v<T, TyDec>) {
            return ty_dec(tm(n.code, cut));
          } else if constexpr (std::is_same_v<T, TyLift>) {
            return ty_lift(ty(n.ty, cut));
          } else if constexpr (std::is_same_v<T, TyId>) {
            return ty_id(ty(n.ty, cut), tm(n.lhs, cut), tm(n.rhs, cut));
          } else if constexpr (std::is_same_v<T, TyPi>) {
            return ty_pi(n.mode, ty(n.dom, cut), ty(n.cod, cut + 1));
          } else if constexpr (std::is_same_v<T, TySigma>) {
            return ty_sigma(ty(n.fst, cut), ty(n.snd, cut + 1));
          } else if constexpr (std::is_same_v<T, TyModal>) {
            return ty_modal(n.mode, ty(n.ty, cut));
          } else {
            static_assert(std::is_same_v<T, TySub>);
            throw IllFormedSubstitution("shift on a type with explicit substitutions");
          }
        },
        a->v);
  }
};

}  // namespace

TmPtr shift(const TmPtr& t, std::size_t cutoff, std::size_t by) {
  if (by == 0) return t;
  return Shifter{by}.tm(t, cutoff);
}
TyPtr shift_ty(const TyPtr& t, std::size_t cutoff, std::size_t by) {
  if (by == 0) return t;
  return Shifter{by}.ty(t, cutoff);
}

// ---- structural equality ------------------------------------------------------

namespace {

// One comparison routine, two policies: plain syntactic equality, and
// equality modulo the governing mode theory.
struct SyntacticEq {
  bool path(const ModalityPath& a, const ModalityPath& b) const { return a == b; }
  bool cell(const CellExpr& a, const CellExpr& b) const {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    return a.str() == b.str();
  }
};

struct TheoryEq {
  const ModeTheory& th;
  bool path(const ModalityPath& a, const ModalityPath& b) const {
    if (a.src != b.src || a.dst != b.dst) return false;
    return eq_mod(th, a, b);
  }
  bool cell(const CellExpr& a, const CellExpr& b) const {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    if (!path(a.src(), b.src()) || !path(a.dst(), b.dst())) return false;
    return eq_cell(th, a, b);
  }
};

template <class P>
bool eq_tm(const P& p, const TmPtr& a, const TmPtr& b);
template <class P>
bool eq_ty(const P& p, const TyPtr& a, const TyPtr& b);

template <class P>
bool eq_sub(const P& p, const SubPtr& a, const SubPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->v);
        if constexpr (std::is_same_v<T, SubEmp> || std::is_same_v<T, SubId> ||
                      std::is_same_v<T, SubWk>) {
          return true;
        } else if constexpr (std::is_same_v<T, SubComp>) {
          return eq_sub(p, x.outer, y.outer) && eq_sub(p, x.inner, y.inner);
        } else if constexpr (std::is_same_v<T, SubLock>) {
          return p.path(x.mod, y.mod) && eq_sub(p, x.sub, y.sub);
        } else if constexpr (std::is_same_v<T, SubKey>) {
          return p.cell(x.cell, y.cell);
        } else {
          static_assert(std::is_same_v<T, SubExt>);
          return p.path(x.ann, y.ann) && eq_sub(p, x.base, y.base) &&
                 eq_tm(p, x.tm, y.tm);
        }
      },
      a->v);
}

template <class P>
bool eq_tm(const P& p, const TmPtr& a, const TmPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->v);
        if constexpr (std::is_same_v<T, TmVar>) {
          return x.index == y.index && p.cell(x.cell, y.cell);
        } else if constexpr (std::is_same_v<T, TmTrue> || std::is_same_v<T, TmFalse>) {
          return true;
        } else if constexpr (std::is_same_v<T, TmBoolRec>) {
          return eq_ty(p, x.motive, y.motive) && eq_tm(p, x.on_true, y.on_true) &&
                 eq_tm(p, x.on_false, y.on_false) && eq_tm(p, x.scrut, y.scrut);
        } else if constexpr (std::is_same_v<T, TmRefl>) {
          return eq_tm(p, x.tm, y.tm);
        } else if constexpr (std::is_same_v<T, TmIdRec>) {
          return eq_ty(p, x.motive, y.motive) && eq_tm(p, x.refl_case, y.refl_case) &&
                 eq_tm(p, x.scrut, y.scrut);
        } else if constexpr (std::is_same_v<T, TmEnc>) {
          return eq_ty(p, x.ty, y.ty);
        } else if constexpr (std::is_same_v<T, TmLam>) {
          return p.path(x.mode, y.mode) && eq_tm(p, x.body, y.body);
        } else if constexpr (std::is_same_v<T, TmApp>) {
          return p.path(x.mode, y.mode) && eq_tm(p, x.fn, y.fn) &&
                 eq_tm(p, x.arg, y.arg);
        } else if constexpr (std::is_same_v<T, TmPair>) {
          return eq_tm(p, x.fst, y.fst) && eq_tm(p, x.snd, y.snd);
        } else if constexpr (std::is_same_v<T, TmProj>) {
          return x.which == y.which && eq_tm(p, x.pair, y.pair);
        } else if constexpr (std::is_same_v<T, TmMkBox>) {
          return p.path(x.mode, y.mode) && eq_tm(p, x.body, y.body);
        } else if constexpr (std::is_same_v<T, TmOpen>) {
          return p.path(x.frame, y.frame) && p.path(x.mode, y.mode) &&
                 eq_ty(p, x.motive, y.motive) && eq_tm(p, x.scrut, y.scrut) &&
                 eq_tm(p, x.branch, y.branch);
        } else if constexpr (std::is_same_v<T, TmAxiom>) {
          return x.name == y.name;
        } else {
          static_assert(std::is_same_v<T, TmSub>);
          return eq_tm(p, x.tm, y.tm) && eq_sub(p, x.sub, y.sub);
        }
      },
      a->v);
}

template <class P>
bool eq_ty(const P& p, const TyPtr& a, const TyPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->v);
        if constexpr (std::is_same_v<T, TyBool>) {
          return true;
        } else if constexpr (std::is_same_v<T, TyUni>) {
          return x.level == y.level;
        } else if constexpr (std::is_same_v<T, TyDec>) {
          return eq_tm(p, x.code, y.code);
        } else if constexpr (std::is_same_v<T, TyLift>) {
          return eq_ty(p, x.ty, y.ty);
        } else if constexpr (std::is_same_v<T, TyId>) {
          return eq_ty(p, x.ty, y.ty) && eq_tm(p, x.lhs, y.lhs) &&
                 eq_tm(p, x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, TyPi>) {
          return p.path(x.mode, y.mode) && eq_ty(p, x.dom, y.dom) &&
                 eq_ty(p, x.cod, y.cod);
        } else if constexpr (std::is_same_v<T, TySigma>) {
          return eq_ty(p, x.fst, y.fst) && eq_ty(p, x.snd, y.snd);
        } else if constexpr (std::is_same_v<T, TyModal>) {
          return p.path(x.mode, y.mode) && eq_ty(p, x.ty, y.ty);
        } else {
          static_assert(std::is_same_v<T, TySub>);
          return eq_ty(p, x.ty, y.ty) && eq_sub(p, x.sub, y.sub);
        }
      },
      a->v);
}

}  // namespace

bool tm_equal(const TmPtr& a, const TmPtr& b) { return eq_tm(SyntacticEq{}, a, b); }
bool ty_equal(const TyPtr& a, const TyPtr& b) { return eq_ty(SyntacticEq{}, a, b); }
bool tm_equiv(const ModeTheory& th, const TmPtr& a, const TmPtr& b) {
  return eq_tm(TheoryEq{th}, a, b);
}
bool ty_equiv(const ModeTheory& th, const TyPtr& a, const TyPtr& b) {
  return eq_ty(TheoryEq{th}, a, b);
}

// ---- explicit-substitution detection ----------------------------------------

bool has_explicit_sub(const TmPtr& t) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TmSub>) {
          return true;
        } else if constexpr (std::is_same_v<T, TmVar> || std::is_same_v<T, TmTrue> ||
                             std::is_same_v<T, TmFalse> || std::is_same_v<T, TmAxiom>) {
          return false;
        } else if constexpr (std::is_same_v<T, TmBoolRec>) {
          return has_explicit_sub_ty(n.motive) || has_explicit_sub(n.on_true) ||
                 has_explicit_sub(n.on_false) || has_explicit_sub(n.scrut);
        } else if constexpr (std::is_same_v<T, TmRefl>) {
          return has_explicit_sub(n.tm);
        } else if constexpr (std::is_same_v<T, TmIdRec>) {
          return has_explicit_sub_ty(n.motive) || has_explicit_sub(n.refl_case) ||
                 has_explicit_sub(n.scrut);
        } else if constexpr (std::is_same_v<T, TmEnc>) {
          return has_explicit_sub_ty(n.ty);
        } else if constexpr (std::is_same_v<T, TmLam>) {
          return has_explicit_sub(n.body);
        } else if constexpr (std::is_same_v<T, TmApp>) {
          return has_explicit_sub(n.fn) || has_explicit_sub(n.arg);
        } else if constexpr (std::is_same_v<T, TmPair>) {
          return has_explicit_sub(n.fst) || has_explicit_sub(n.snd);
        } else if constexpr (std::is_same_v<T, TmProj>) {
          return has_explicit_sub(n.pair);
        } else if constexpr (std::is_same_v<T, TmMkBox>) {
          return has_explicit_sub(n.body);
        } else {
          static_assert(std::is_same_v<T, TmOpen>);
          return has_explicit_sub_ty(n.motive) || has_explicit_sub(n.scrut) ||
                 has_explicit_sub(n.branch);
        }
      },
      t->v);
}

bool has_explicit_sub_ty(const TyPtr& t) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TySub>) {
          return true;
        } else if constexpr (std::is_same_v<T, TyBool> || std::is_same_v<T, TyUni>) {
          return false;
        } else if constexpr (std::is_same_v<T, TyDec>) {
          return has_explicit_sub(n.code);
        } else if constexpr (std::is_same_v<T, TyLift>) {
          return has_explicit_sub_ty(n.ty);
        } else if constexpr (std::is_same_v<T, TyId>) {
          return has_explicit_sub_ty(n.ty) || has_explicit_sub(n.lhs) ||
                 has_explicit_sub(n.rhs);
        } else if constexpr (std::is_same_v<T, TyPi>) {
          return has_explicit_sub_ty(n.dom) || has_explicit_sub_ty(n.cod);
        } else if constexpr (std::is_same_v<T, TySigma>) {
          return has_explicit_sub_ty(n.fst) || has_explicit_sub_ty(n.snd);
        } else {
          static_assert(std::is_same_v<T, TyModal>);
          return has_explicit_sub_ty(n.ty);
        }
      },
      t->v);
}

}  // namespace mtt
