#include "mtt/checker.hpp"

#include <utility>

#include "mtt/core_format.hpp"
#include "mtt/subst.hpp"

namespace mtt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string mode_obligation(const ModalityPath& a, const ModalityPath& b) {
  return "eq_mod(" + a.str() + ", " + b.str() + ")";
}

// True when g is the empty telescope (possibly under locks; lock functors
// preserve the terminal context).
bool is_empty_ctx(const CtxPtr& g) {
  if (std::holds_alternative<CtxEmp>(g->v)) return true;
  if (const auto* l = std::get_if<CtxLock>(&g->v)) return is_empty_ctx(l->ctx);
  return false;
}

// Undoes one lock: finds g0 with ctx_lock(g0, mod) equal to g. Accounts for
// lock merging (the stored lock composite only needs to end in `mod`) and
// for the erasure of locks on the empty telescope.
std::optional<CtxPtr> peel_lock(const ModeTheory& th, const CtxPtr& g,
                                const ModalityPath& mod) {
  if (const auto* l = std::get_if<CtxLock>(&g->v)) {
    auto rest = factor_path_suffix(th, l->mod, mod);
    if (!rest) return std::nullopt;
    return ctx_lock(l->ctx, *rest);
  }
  if (is_empty_ctx(g) && ctx_mode(g) == mod.src) return ctx_emp(mod.dst);
  return std::nullopt;
}

}  // namespace

Checker::Checker(const ModeTheory& th, AxiomTable axioms, long long fuel)
    : th_(th), ev_(th, std::move(axioms)), fuel_(fuel) {}

void Checker::reject(std::string rule, std::string message, std::string expected,
                     std::string actual, std::string obligation) const {
  Diagnostic d;
  d.rule = std::move(rule);
  d.message = std::move(message);
  d.expected = std::move(expected);
  d.actual = std::move(actual);
  d.obligation = std::move(obligation);
  throw CheckFailure(std::move(d));
}

bool Checker::paths_equal(const ModalityPath& a, const ModalityPath& b) const {
  if (a.src != b.src || a.dst != b.dst) return false;
  return eq_mod(th_, a, b);
}

void Checker::require_path(const ModalityPath& p, const char* rule) const {
  try {
    th_.validate_path(p);
  } catch (const BoundaryMismatch& e) {
    reject(rule, "ill-formed modality", "", p.str(), e.what());
  }
}

TyPtr Checker::nf_ty(const CtxPtr& g, const TyPtr& a) const {
  Fuel fuel{fuel_};
  EnvPtr env = ev_.identity_env(g, fuel);
  return ev_.readback_ty(ev_.eval_ty(a, env, ctx_mode(g), fuel), ctx_len(g), fuel);
}

bool Checker::ty_conv(const CtxPtr& g, const TyPtr& a, const TyPtr& b) const {
  Fuel fuel{fuel_};
  EnvPtr env = ev_.identity_env(g, fuel);
  auto va = ev_.eval_ty(a, env, ctx_mode(g), fuel);
  auto vb = ev_.eval_ty(b, env, ctx_mode(g), fuel);
  return ev_.conv_ty(va, vb, ctx_len(g), fuel);
}

bool Checker::tm_conv(const CtxPtr& g, const TmPtr& a, const TmPtr& b,
                      const TyPtr& ty) const {
  Fuel fuel{fuel_};
  return ev_.conv(a, b, ty, g, fuel);
}

bool Checker::ctx_conv(const CtxPtr& a, const CtxPtr& b) const {
  CtxPtr na = ctx_nf(th_, a, fuel_, ev_.axioms());
  CtxPtr nb = ctx_nf(th_, b, fuel_, ev_.axioms());
  while (true) {
    if (const auto* ea = std::get_if<CtxEmp>(&na->v)) {
      const auto* eb = std::get_if<CtxEmp>(&nb->v);
      return eb && ea->mode == eb->mode;
    }
    if (const auto* la = std::get_if<CtxLock>(&na->v)) {
      const auto* lb = std::get_if<CtxLock>(&nb->v);
      if (!lb || !paths_equal(la->mod, lb->mod)) return false;
      na = la->ctx;
      nb = lb->ctx;
      continue;
    }
    const auto& xa = std::get<CtxExtend>(na->v);
    const auto* xb = std::get_if<CtxExtend>(&nb->v);
    if (!xb || !paths_equal(xa.ann, xb->ann)) return false;
    if (!ty_equiv(th_, xa.ty, xb->ty)) return false;
    na = xa.ctx;
    nb = xb->ctx;
  }
}

// ---- contexts ---------------------------------------------------------------

void Checker::check_ctx(const CtxPtr& g, const std::string& root) const {
  std::visit(
      overloaded{
          [&](const CtxEmp& e) {
            if (e.mode != root) {
              reject("cx/emp", "the empty telescope sits at the wrong mode", root,
                     e.mode);
            }
            if (!th_.has_mode(e.mode)) {
              reject("cx/emp", "unknown mode", "", e.mode);
            }
          },
          [&](const CtxLock& l) {
            require_path(l.mod, "cx/lock");
            if (l.mod.dst != ctx_mode(l.ctx)) {
              reject("cx/lock", "lock boundary does not chain onto the context",
                     ctx_mode(l.ctx), l.mod.dst);
            }
            check_ctx(l.ctx, root);
          },
          [&](const CtxExtend& x) {
            require_path(x.ann, "cx/extend");
            if (x.ann.dst != ctx_mode(x.ctx)) {
              reject("cx/extend", "binder annotation does not land in the context",
                     ctx_mode(x.ctx), x.ann.dst);
            }
            check_ctx(x.ctx, root);
            check_ty(ctx_lock(x.ctx, x.ann), x.ty, 1);
          },
      },
      g->v);
}

// ---- types ------------------------------------------------------------------

void Checker::check_ty(const CtxPtr& g, const TyPtr& a, unsigned level) const {
  const std::string mode = ctx_mode(g);
  std::visit(
      overloaded{
          [&](const TyBool&) {},
          [&](const TyUni& u) {
            if (u.level != 0) {
              reject("tp/uni", "only the universe of small types exists", "U0",
                     "U" + std::to_string(u.level));
            }
            if (level != 1) {
              reject("tp/uni", "the universe is itself a large type", "level 1",
                     "level " + std::to_string(level));
            }
          },
          [&](const TyDec& d) {
            if (level != 0) {
              reject("tp/el", "decoded types are small", "level 0",
                     "level " + std::to_string(level));
            }
            check_tm(g, d.code, ty_uni(0));
          },
          [&](const TyLift& l) {
            // Lift embeds a type of level l' <= level; try the small reading
            // first so Lift(A) is accepted wherever A itself would be.
            try {
              check_ty(g, l.ty, 0);
            } catch (const CheckFailure&) {
              if (level != 1) throw;
              check_ty(g, l.ty, 1);
            }
          },
          [&](const TyId& i) {
            check_ty(g, i.ty, level);
            check_tm(g, i.lhs, i.ty);
            check_tm(g, i.rhs, i.ty);
          },
          [&](const TyPi& p) {
            require_path(p.mode, "tp/pi");
            if (p.mode.dst != mode) {
              reject("tp/pi", "the binder modality does not land at the context's mode",
                     mode, p.mode.dst);
            }
            check_ty(ctx_lock(g, p.mode), p.dom, level);
            check_ty(ctx_extend(g, p.mode, p.dom), p.cod, level);
          },
          [&](const TySigma& s) {
            check_ty(g, s.fst, level);
            check_ty(ctx_extend(g, ModalityPath::identity(mode), s.fst), s.snd, level);
          },
          [&](const TyModal& m) {
            require_path(m.mode, "tp/modal");
            if (m.mode.dst != mode) {
              reject("tp/modal", "the box modality does not land at the context's mode",
                     mode, m.mode.dst);
            }
            check_ty(ctx_lock(g, m.mode), m.ty, level);
          },
          [&](const TySub&) {
            // Definitionally, a type under an explicit substitution is its push.
            TyPtr pushed;
            try {
              pushed = push_subst_ty(a, sub_id(), mode);
            } catch (const IllFormedSubstitution& e) {
              reject("tp/sub", "explicit substitution cannot act on this type", "",
                     print_ty(a), e.what());
            }
            check_ty(g, pushed, level);
          },
      },
      a->v);
}

// ---- synthesis ----------------------------------------------------------------

TyPtr Checker::infer(const CtxPtr& g, const TmPtr& t) const {
  const std::string mode = ctx_mode(g);
  return std::visit(
      overloaded{
          [&](const TmVar& v) -> TyPtr {
            if (v.index >= ctx_len(g)) {
              reject("tm/var", "unbound variable",
                     "index below " + std::to_string(ctx_len(g)),
                     std::to_string(v.index));
            }
            VarInfo info = lookup_var(g, v.index);
            try {
              th_.validate_cell(v.cell);
            } catch (const BoundaryMismatch& e) {
              reject("tm/var", "ill-formed 2-cell on variable", "", v.cell.str(),
                     e.what());
            }
            if (!paths_equal(v.cell.src(), info.ann)) {
              reject("tm/var", "the 2-cell does not start at the binder's annotation",
                     info.ann.str(), v.cell.src().str(),
                     mode_obligation(v.cell.src(), info.ann));
            }
            if (!paths_equal(v.cell.dst(), info.locks)) {
              reject("tm/var", "the 2-cell does not reach the locks above the binder",
                     info.locks.str(), v.cell.dst().str(),
                     mode_obligation(v.cell.dst(), info.locks));
            }
            TyPtr keyed = v.cell.is_identity_shape()
                              ? info.ty
                              : key_act_ty(info.ty, v.cell, info.below);
            return shift_ty(keyed, 0, v.index + 1);
          },
          [&](const TmTrue&) -> TyPtr { return ty_bool(); },
          [&](const TmFalse&) -> TyPtr { return ty_bool(); },
          [&](const TmEnc& e) -> TyPtr {
            check_ty(g, e.ty, 0);
            return ty_uni(0);
          },
          [&](const TmAxiom& ax) -> TyPtr {
            check_ty(ctx_emp(mode), ax.ty, 1);
            return ax.ty;
          },
          [&](const TmRefl& r) -> TyPtr {
            TyPtr a = infer(g, r.tm);
            return ty_id(a, r.tm, r.tm);
          },
          [&](const TmMkBox& b) -> TyPtr {
            // A box's type is determined by its body, so it synthesizes
            // whenever the body does (it still checks against a given boxed
            // type with the modality compared up to eq_mod).
            require_path(b.mode, "tm/modal-intro");
            if (b.mode.dst != mode) {
              reject("tm/modal-intro", "the box modality does not land at the context's mode",
                     mode, b.mode.dst);
            }
            return ty_modal(b.mode, infer(ctx_lock(g, b.mode), b.body));
          },
          [&](const TmApp& ap) -> TyPtr {
            require_path(ap.mode, "tm/app");
            if (ap.mode.dst != mode) {
              reject("tm/app", "application modality does not land at the context's mode",
                     mode, ap.mode.dst);
            }
            if (const auto* lm = std::get_if<TmLam>(&ap.fn->v)) {
              // A literal β-redex types as the let it contracts to: the
              // domain comes from the argument, the codomain from the body.
              // Without this, redexes arising from reduction traces would
              // never synthesize (the head alone does not).
              if (!paths_equal(ap.mode, lm->mode)) {
                reject("tm/app", "application modality disagrees with the function literal",
                       lm->mode.str(), ap.mode.str(),
                       mode_obligation(ap.mode, lm->mode));
              }
              TyPtr dom = infer(ctx_lock(g, ap.mode), ap.arg);
              TyPtr cod = infer(ctx_extend(g, ap.mode, dom), lm->body);
              return subst_top_ty(cod, ap.arg, ap.mode, mode, g);
            }
            TyPtr fn_ty = nf_ty(g, infer(g, ap.fn));
            const auto* pi = std::get_if<TyPi>(&fn_ty->v);
            if (!pi) {
              reject("tm/app", "applying a term whose type is not a function type",
                     "a function type", print_ty(fn_ty));
            }
            if (!paths_equal(ap.mode, pi->mode)) {
              reject("tm/app", "application modality disagrees with the function type",
                     pi->mode.str(), ap.mode.str(),
                     mode_obligation(ap.mode, pi->mode));
            }
            check_tm(ctx_lock(g, pi->mode), ap.arg, pi->dom);
            return subst_top_ty(pi->cod, ap.arg, pi->mode, mode, g);
          },
          [&](const TmProj& pr) -> TyPtr {
            if (const auto* pa = std::get_if<TmPair>(&pr.pair->v)) {
              // A literal projection redex types as its contractum.
              return infer(g, pr.which == 0 ? pa->fst : pa->snd);
            }
            TyPtr pty = nf_ty(g, infer(g, pr.pair));
            const auto* sg = std::get_if<TySigma>(&pty->v);
            if (!sg) {
              reject("tm/proj", "projecting from a term whose type is not a pair type",
                     "a pair type", print_ty(pty));
            }
            if (pr.which == 0) return sg->fst;
            return subst_top_ty(sg->snd, tm_proj(0, pr.pair),
                                ModalityPath::identity(mode), mode, g);
          },
          [&](const TmBoolRec& r) -> TyPtr {
            const ModalityPath one = ModalityPath::identity(mode);
            check_ty(ctx_extend(g, one, ty_bool()), r.motive, 1);
            check_tm(g, r.scrut, ty_bool());
            check_tm(g, r.on_true, subst_top_ty(r.motive, tm_true(), one, mode, g));
            check_tm(g, r.on_false, subst_top_ty(r.motive, tm_false(), one, mode, g));
            return subst_top_ty(r.motive, r.scrut, one, mode, g);
          },
          [&](const TmIdRec& r) -> TyPtr {
            TyPtr sty = nf_ty(g, infer(g, r.scrut));
            const auto* id = std::get_if<TyId>(&sty->v);
            if (!id) {
              reject("tm/idrec", "eliminating a term whose type is not a path type",
                     "a path type", print_ty(sty));
            }
            const ModalityPath one = ModalityPath::identity(mode);
            // Motive binds the far endpoint and the path based at the near one.
            CtxPtr g1 = ctx_extend(g, one, id->ty);
            TyPtr fam = ty_id(shift_ty(id->ty, 0, 1), shift(id->lhs, 0, 1),
                              tm_var(0, CellExpr::ident(one)));
            CtxPtr g2 = ctx_extend(g1, one, fam);
            check_ty(g2, r.motive, 1);
            SubPtr at_refl = sub_ext(sub_ext(sub_id(), one, g, id->lhs), one, g,
                                     tm_refl(id->lhs));
            check_tm(g, r.refl_case, push_subst_ty(r.motive, at_refl, mode));
            SubPtr at_scrut =
                sub_ext(sub_ext(sub_id(), one, g, id->rhs), one, g, r.scrut);
            return push_subst_ty(r.motive, at_scrut, mode);
          },
          [&](const TmOpen& o) -> TyPtr {
            require_path(o.frame, "tm/modal-elim");
            require_path(o.mode, "tm/modal-elim");
            if (o.frame.dst != mode) {
              reject("tm/modal-elim", "the frame does not land at the context's mode",
                     mode, o.frame.dst);
            }
            if (o.mode.dst != o.frame.src) {
              reject("tm/modal-elim", "the opened modality does not chain onto the frame",
                     o.frame.src, o.mode.dst);
            }
            CtxPtr locked = ctx_lock(g, o.frame);
            TyPtr sty = nf_ty(locked, infer(locked, o.scrut));
            const auto* bx = std::get_if<TyModal>(&sty->v);
            if (!bx) {
              reject("tm/modal-elim", "the scrutinee's type is not a boxed type",
                     "a boxed type", print_ty(sty));
            }
            if (!paths_equal(bx->mode, o.mode)) {
              reject("tm/modal-elim", "the scrutinee's box disagrees with the opened modality",
                     o.mode.str(), bx->mode.str(), mode_obligation(bx->mode, o.mode));
            }
            const TyPtr& body_ty = bx->ty;  // over Lock(g, frame ∘ mode)
            CtxPtr motive_ctx = ctx_extend(g, o.frame, ty_modal(o.mode, body_ty));
            check_ty(motive_ctx, o.motive, 1);
            const ModalityPath composite = compose_mod(o.frame, o.mode);
            CtxPtr branch_ctx = ctx_extend(g, composite, body_ty);
            SubPtr repack =
                sub_ext(sub_wk(), o.frame, branch_ctx,
                        tm_mkbox(o.mode, tm_var(0, CellExpr::ident(composite))));
            check_tm(branch_ctx, o.branch, push_subst_ty(o.motive, repack, mode));
            SubPtr at_scrut = sub_ext(sub_id(), o.frame, g, o.scrut);
            return push_subst_ty(o.motive, at_scrut, mode);
          },
          [&](const TmSub&) -> TyPtr {
            TmPtr pushed;
            try {
              pushed = push_subst(t, sub_id(), mode);
            } catch (const IllFormedSubstitution& e) {
              reject("tm/sub", "explicit substitution cannot act on this term", "",
                     print_tm(t), e.what());
            }
            return infer(g, pushed);
          },
          [&](const TmLam&) -> TyPtr {
            reject("not-inferable", "a function literal only checks against a given type",
                   "", print_tm(t));
          },
          [&](const TmPair&) -> TyPtr {
            reject("not-inferable", "a pair only checks against a given type", "",
                   print_tm(t));
          },
      },
      t->v);
}

// ---- checking -----------------------------------------------------------------

void Checker::check_tm(const CtxPtr& g, const TmPtr& t, const TyPtr& a) const {
  const std::string mode = ctx_mode(g);
  if (std::holds_alternative<TmSub>(t->v)) {
    TmPtr pushed;
    try {
      pushed = push_subst(t, sub_id(), mode);
    } catch (const IllFormedSubstitution& e) {
      reject("tm/sub", "explicit substitution cannot act on this term", "", print_tm(t),
             e.what());
    }
    check_tm(g, pushed, a);
    return;
  }
  if (const auto* lam = std::get_if<TmLam>(&t->v)) {
    require_path(lam->mode, "tm/lam");
    TyPtr an = nf_ty(g, a);
    const auto* pi = std::get_if<TyPi>(&an->v);
    if (!pi) {
      reject("tm/lam", "a function literal needs a function type", print_ty(an),
             print_tm(t));
    }
    if (!paths_equal(lam->mode, pi->mode)) {
      reject("tm/lam", "binder modality disagrees with the function type",
             pi->mode.str(), lam->mode.str(), mode_obligation(lam->mode, pi->mode));
    }
    check_tm(ctx_extend(g, pi->mode, pi->dom), lam->body, pi->cod);
    return;
  }
  if (const auto* pr = std::get_if<TmPair>(&t->v)) {
    TyPtr an = nf_ty(g, a);
    const auto* sg = std::get_if<TySigma>(&an->v);
    if (!sg) {
      reject("tm/pair", "a pair needs a pair type", print_ty(an), print_tm(t));
    }
    check_tm(g, pr->fst, sg->fst);
    check_tm(g, pr->snd,
             subst_top_ty(sg->snd, pr->fst, ModalityPath::identity(mode), mode, g));
    return;
  }
  if (const auto* bx = std::get_if<TmMkBox>(&t->v)) {
    require_path(bx->mode, "tm/modal-intro");
    TyPtr an = nf_ty(g, a);
    const auto* md = std::get_if<TyModal>(&an->v);
    if (!md) {
      reject("tm/modal-intro", "a box needs a boxed type", print_ty(an), print_tm(t));
    }
    if (!paths_equal(bx->mode, md->mode)) {
      reject("tm/modal-intro", "box modality disagrees with the boxed type",
             md->mode.str(), bx->mode.str(), mode_obligation(bx->mode, md->mode));
    }
    check_tm(ctx_lock(g, md->mode), bx->body, md->ty);
    return;
  }
  if (const auto* rf = std::get_if<TmRefl>(&t->v)) {
    TyPtr an = nf_ty(g, a);
    const auto* id = std::get_if<TyId>(&an->v);
    if (!id) {
      reject("tm/refl", "refl needs a path type", print_ty(an), print_tm(t));
    }
    check_tm(g, rf->tm, id->ty);
    if (!tm_conv(g, rf->tm, id->lhs, id->ty)) {
      reject("tm/refl", "refl's endpoint is not the left endpoint of the path type",
             print_tm(id->lhs), print_tm(rf->tm), "conv");
    }
    if (!tm_conv(g, rf->tm, id->rhs, id->ty)) {
      reject("tm/refl", "refl's endpoint is not the right endpoint of the path type",
             print_tm(id->rhs), print_tm(rf->tm), "conv");
    }
    return;
  }
  TyPtr b = infer(g, t);
  if (!ty_conv(g, b, a)) {
    reject("conv", "the synthesized type does not match the expected type",
           print_ty(nf_ty(g, a)), print_ty(nf_ty(g, b)));
  }
}

// ---- substitutions --------------------------------------------------------------

CtxPtr Checker::synth_sub_cod(const CtxPtr& d, const SubPtr& s) const {
  return std::visit(
      overloaded{
          [&](const SubEmp&) -> CtxPtr { return ctx_emp(ctx_mode(d)); },
          [&](const SubId&) -> CtxPtr { return d; },
          [&](const SubWk&) -> CtxPtr {
            const auto* x = std::get_if<CtxExtend>(&d->v);
            if (!x) {
              reject("sub/wk", "weakening needs a binder on top of the domain", "",
                     print_ctx(d));
            }
            return x->ctx;
          },
          [&](const SubComp& c) -> CtxPtr {
            return synth_sub_cod(synth_sub_cod(d, c.inner), c.outer);
          },
          [&](const SubLock& l) -> CtxPtr {
            if (l.mod.is_identity()) return synth_sub_cod(d, l.sub);
            auto inner = peel_lock(th_, d, l.mod);
            if (!inner) {
              reject("sub/lock", "domain locks do not end in the substitution's lock",
                     l.mod.str(), print_ctx(d));
            }
            return ctx_lock(synth_sub_cod(*inner, l.sub), l.mod);
          },
          [&](const SubKey& k) -> CtxPtr {
            if (!k.at) {
              reject("sub/key", "key substitution lacks its context annotation", "",
                     k.cell.str());
            }
            return ctx_lock(k.at, k.cell.src());
          },
          [&](const SubExt&) -> CtxPtr {
            reject("sub/comp",
                   "the middle telescope of this composite is not recoverable; check "
                   "the factors separately",
                   "", print_sub(s));
          },
      },
      s->v);
}

void Checker::check_sub(const CtxPtr& d, const SubPtr& s, const CtxPtr& g) const {
  if (ctx_mode(d) != ctx_mode(g)) {
    reject("sub/mode", "substitution endpoints sit at different modes", ctx_mode(g),
           ctx_mode(d));
  }
  std::visit(
      overloaded{
          [&](const SubEmp&) {
            if (!is_empty_ctx(g)) {
              reject("sub/emp", "the terminal substitution targets the empty telescope",
                     "an empty telescope", print_ctx(g));
            }
          },
          [&](const SubId&) {
            if (!ctx_conv(d, g)) {
              reject("sub/id", "identity substitution between unequal telescopes",
                     print_ctx(g), print_ctx(d));
            }
          },
          [&](const SubWk&) {
            const auto* x = std::get_if<CtxExtend>(&d->v);
            if (!x) {
              reject("sub/wk", "weakening needs a binder on top of the domain", "",
                     print_ctx(d));
            }
            if (!ctx_conv(x->ctx, g)) {
              reject("sub/wk", "weakening does not land in the given telescope",
                     print_ctx(g), print_ctx(x->ctx));
            }
          },
          [&](const SubComp& c) {
            CtxPtr mid = synth_sub_cod(d, c.inner);
            check_sub(d, c.inner, mid);
            check_sub(mid, c.outer, g);
          },
          [&](const SubLock& l) {
            require_path(l.mod, "sub/lock");
            if (l.mod.is_identity()) {
              check_sub(d, l.sub, g);
              return;
            }
            auto pd = peel_lock(th_, d, l.mod);
            auto pg = peel_lock(th_, g, l.mod);
            if (!pd || !pg) {
              reject("sub/lock", "endpoint locks do not end in the substitution's lock",
                     l.mod.str(), print_ctx(pd ? g : d));
            }
            check_sub(*pd, l.sub, *pg);
          },
          [&](const SubKey& k) {
            try {
              th_.validate_cell(k.cell);
            } catch (const BoundaryMismatch& e) {
              reject("sub/key", "ill-formed 2-cell", "", k.cell.str(), e.what());
            }
            if (!k.at) {
              if (k.cell.is_identity_shape()) {
                if (!ctx_conv(d, g)) {
                  reject("sub/key", "identity key between unequal telescopes",
                         print_ctx(g), print_ctx(d));
                }
                return;
              }
              reject("sub/key", "key substitution lacks its context annotation", "",
                     k.cell.str());
            }
            if (!ctx_conv(d, ctx_lock(k.at, k.cell.dst()))) {
              reject("sub/key", "key domain is not the annotated context under the codomain lock",
                     print_ctx(ctx_lock(k.at, k.cell.dst())), print_ctx(d));
            }
            if (!ctx_conv(g, ctx_lock(k.at, k.cell.src()))) {
              reject("sub/key", "key codomain is not the annotated context under the domain lock",
                     print_ctx(ctx_lock(k.at, k.cell.src())), print_ctx(g));
            }
          },
          [&](const SubExt& x) {
            const auto* gx = std::get_if<CtxExtend>(&g->v);
            if (!gx) {
              reject("sub/ext", "extended substitution targets a telescope without a top binder",
                     "a telescope with a top binder", print_ctx(g));
            }
            require_path(x.ann, "sub/ext");
            if (!paths_equal(x.ann, gx->ann)) {
              reject("sub/ext", "extension annotation disagrees with the target binder",
                     gx->ann.str(), x.ann.str(), mode_obligation(x.ann, gx->ann));
            }
            if (x.at && !ctx_conv(x.at, d)) {
              reject("sub/ext", "annotated domain disagrees with the actual domain",
                     print_ctx(d), print_ctx(x.at));
            }
            check_sub(d, x.base, gx->ctx);
            TyPtr instance = push_subst_ty(gx->ty, sub_lock(x.base, gx->ann), gx->ann.src);
            check_tm(ctx_lock(d, gx->ann), x.tm, instance);
          },
      },
      s->v);
}

}  // namespace mtt
