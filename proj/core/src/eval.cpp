#include "mtt/eval.hpp"

#include <utility>

#include "mtt/diagnostics.hpp"

namespace mtt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ValPtr mkv(Value v) { return std::make_shared<const Value>(std::move(v)); }
TyValPtr mkt(TyVal t) { return std::make_shared<const TyVal>(std::move(t)); }
NeutPtr mkn(Neutral n) { return std::make_shared<const Neutral>(std::move(n)); }
EnvPtr mke(EnvNode e) { return std::make_shared<const EnvNode>(std::move(e)); }

// Compose a cell onto a variable head's accumulated cell: the whisker on the
// left is recovered from the head cell's codomain boundary by factoring it
// as L ∘ src(act) (see factor_path_suffix).
std::optional<CellExpr> compose_into_head(const ModeTheory& th, const CellExpr& head,
                                          const CellExpr& act) {
  auto locks = factor_path_suffix(th, head.dst(), act.src());
  if (!locks) return std::nullopt;
  CellExpr whiskered =
      locks->is_identity() ? act : CellExpr::hcomp(CellExpr::ident(*locks), act);
  if (head.is_identity_shape()) return whiskered;
  return CellExpr::vcomp(head, whiskered);
}

bool literally_chains(const CellExpr& a, const CellExpr& b) {
  return a.dst() == b.src();
}

}  // namespace

// ---- environment constructors -----------------------------------------------

EnvPtr env_nil(std::string mode) { return mke({EnvNil{std::move(mode)}}); }
EnvPtr env_val(EnvPtr parent, ValPtr val) {
  return mke({EnvVal{std::move(parent), std::move(val)}});
}
EnvPtr env_lock(EnvPtr parent, ModalityPath mod) {
  if (mod.is_identity()) return parent;
  return mke({EnvLock{std::move(parent), std::move(mod)}});
}
EnvPtr env_shift(EnvPtr parent, std::size_t by) {
  if (by == 0) return parent;
  return mke({EnvShift{std::move(parent), by}});
}
EnvPtr env_key_pre(EnvPtr parent, CellExpr cell) {
  if (cell.is_identity_shape()) return parent;
  return mke({EnvKeyPre{std::move(parent), std::move(cell)}});
}
EnvPtr env_key_post(EnvPtr parent, CellExpr cell) {
  if (cell.is_identity_shape()) return parent;
  return mke({EnvKeyPost{std::move(parent), std::move(cell)}});
}

// ---- fuel ---------------------------------------------------------------------

void Fuel::burn() {
  if (left <= 0) throw FuelExhausted("axiom unfolding budget exhausted");
  --left;
}

// ---- variable lookup -----------------------------------------------------------

ValPtr Evaluator::lookup(const EnvPtr& env, std::size_t k, const CellExpr& cell,
                         const std::optional<ModalityPath>& w, Fuel& fuel) const {
  return std::visit(
      overloaded{
          [&](const EnvNil&) -> ValPtr {
            throw IllFormedSubstitution("variable resolved against the empty telescope");
          },
          [&](const EnvVal& e) -> ValPtr {
            if (k > 0) return lookup(e.parent, k - 1, cell, w, fuel);
            if (cell.is_identity_shape()) return e.val;
            return val_cell_act(e.val, cell, fuel);
          },
          [&](const EnvLock& e) -> ValPtr {
            auto w2 = w ? compose_mod(e.mod, *w) : e.mod;
            if (w2.is_identity()) return lookup(e.parent, k, cell, std::nullopt, fuel);
            return lookup(e.parent, k, cell, w2, fuel);
          },
          [&](const EnvShift& e) -> ValPtr {
            return lookup(e.parent, k + e.by, cell, w, fuel);
          },
          [&](const EnvKeyPre& e) -> ValPtr {
            CellExpr mid = e.cell;
            if (w && !w->is_identity()) mid = CellExpr::hcomp(mid, CellExpr::ident(*w));
            auto composed = compose_into_head(th_, cell, mid);
            if (!composed) {
              throw IllFormedSubstitution(
                  "key boundary does not factor the variable's boundary");
            }
            return lookup(e.parent, k, *composed, w, fuel);
          },
          [&](const EnvKeyPost& e) -> ValPtr {
            ValPtr v = lookup(e.parent, k, cell, w, fuel);
            CellExpr act = e.cell;
            if (w && !w->is_identity()) act = CellExpr::hcomp(act, CellExpr::ident(*w));
            return val_cell_act(v, act, fuel);
          },
      },
      env->v);
}

// ---- cell actions on values ----------------------------------------------------

namespace {

Closure key_post_closure(const Closure& c, const CellExpr& cell) {
  return Closure{c.body, env_key_post(c.env, cell), c.ann, c.mode};
}
TyClosure key_post_ty_closure(const TyClosure& c, const CellExpr& cell) {
  return TyClosure{c.body, env_key_post(c.env, cell), c.ann, c.mode};
}
TyClosure2 key_post_ty_closure2(const TyClosure2& c, const CellExpr& cell) {
  return TyClosure2{c.body, env_key_post(c.env, cell), c.ann0, c.ann1, c.mode};
}

}  // namespace

namespace {

// Distribute a cell action through a neutral, outermost elimination first.
// `span` is how much of the spine is covered (entries past it were already
// rebuilt by the caller).
Neutral act_neutral_rec(const Evaluator& ev, const Neutral& ne, std::size_t span,
                        const CellExpr& cell, Fuel& fuel) {
  if (span == 0) {
    return std::visit(
        overloaded{
            [&](const NHVar& h) -> Neutral {
              auto composed = compose_into_head(ev.theory(), h.cell, cell);
              if (!composed) {
                // Record the key unapplied; conversion compares such
                // entries with the theory's cell equality.
                return Neutral{h, {SpineEntry{SKey{cell}}}};
              }
              return Neutral{NHVar{h.level, *composed}, {}};
            },
            [&](const NHAxiom& h) -> Neutral {
              // Axioms carry closed types: substitutions (keys included)
              // act trivially on them.
              return Neutral{h, {}};
            },
        },
        ne.head);
  }
  const SpineEntry& last = ne.spine[span - 1];
  return std::visit(
      overloaded{
          [&](const SApp& e) -> Neutral {
            Neutral inner = act_neutral_rec(ev, ne, span - 1, cell, fuel);
            inner.spine.push_back(SpineEntry{SApp{
                e.mode,
                ev.val_cell_act(e.arg, CellExpr::hcomp(cell, CellExpr::ident(e.mode)),
                                fuel)}});
            return inner;
          },
          [&](const SProj& e) -> Neutral {
            Neutral inner = act_neutral_rec(ev, ne, span - 1, cell, fuel);
            inner.spine.push_back(SpineEntry{e});
            return inner;
          },
          [&](const SBoolRec& e) -> Neutral {
            Neutral inner = act_neutral_rec(ev, ne, span - 1, cell, fuel);
            inner.spine.push_back(SpineEntry{SBoolRec{
                key_post_ty_closure(e.motive, cell), ev.val_cell_act(e.on_true, cell, fuel),
                ev.val_cell_act(e.on_false, cell, fuel)}});
            return inner;
          },
          [&](const SIdRec& e) -> Neutral {
            Neutral inner = act_neutral_rec(ev, ne, span - 1, cell, fuel);
            inner.spine.push_back(SpineEntry{SIdRec{
                key_post_ty_closure2(e.motive, cell),
                ev.val_cell_act(e.refl_case, cell, fuel)}});
            return inner;
          },
          [&](const SOpen& e) -> Neutral {
            Neutral inner = act_neutral_rec(
                ev, ne, span - 1, CellExpr::hcomp(cell, CellExpr::ident(e.frame)), fuel);
            inner.spine.push_back(SpineEntry{
                SOpen{e.frame, e.mode, key_post_ty_closure(e.motive, cell),
                      key_post_closure(e.branch, cell)}});
            return inner;
          },
          [&](const SKey& e) -> Neutral {
            Neutral copy{ne.head, {ne.spine.begin(), ne.spine.begin() + span}};
            if (literally_chains(e.cell, cell)) {
              copy.spine.back() = SpineEntry{SKey{CellExpr::vcomp(e.cell, cell)}};
            } else {
              copy.spine.push_back(SpineEntry{SKey{cell}});
            }
            return copy;
          },
      },
      last);
}

}  // namespace

ValPtr Evaluator::val_cell_act(const ValPtr& v, const CellExpr& cell, Fuel& fuel) const {
  if (cell.empty() || cell.is_identity_shape()) return v;
  return std::visit(
      overloaded{
          [&](const VTrue&) -> ValPtr { return v; },
          [&](const VFalse&) -> ValPtr { return v; },
          [&](const VRefl& r) -> ValPtr {
            return mkv({VRefl{val_cell_act(r.tm, cell, fuel)}});
          },
          [&](const VPair& p) -> ValPtr {
            return mkv({VPair{val_cell_act(p.fst, cell, fuel),
                              val_cell_act(p.snd, cell, fuel)}});
          },
          [&](const VEnc& e) -> ValPtr {
            return mkv({VEnc{ty_cell_act(e.ty, cell, fuel)}});
          },
          [&](const VMkBox& b) -> ValPtr {
            return mkv({VMkBox{
                b.mode,
                val_cell_act(b.body, CellExpr::hcomp(cell, CellExpr::ident(b.mode)),
                             fuel)}});
          },
          [&](const VLam& l) -> ValPtr {
            return mkv({VLam{l.mode, key_post_closure(l.clo, cell)}});
          },
          [&](const VNeutral& n) -> ValPtr {
            Neutral acted = act_neutral_rec(*this, *n.ne, n.ne->spine.size(), cell, fuel);
            TyValPtr ty = n.ty ? ty_cell_act(n.ty, cell, fuel) : nullptr;
            return mkv({VNeutral{mkn(std::move(acted)), std::move(ty)}});
          },
      },
      v->v);
}

TyValPtr Evaluator::ty_cell_act(const TyValPtr& a, const CellExpr& cell,
                                Fuel& fuel) const {
  if (cell.empty() || cell.is_identity_shape()) return a;
  return std::visit(
      overloaded{
          [&](const TVBool&) -> TyValPtr { return a; },
          [&](const TVUni&) -> TyValPtr { return a; },
          [&](const TVPi& p) -> TyValPtr {
            return mkt({TVPi{
                p.mode,
                ty_cell_act(p.dom, CellExpr::hcomp(cell, CellExpr::ident(p.mode)), fuel),
                key_post_ty_closure(p.cod, cell)}});
          },
          [&](const TVSigma& s) -> TyValPtr {
            return mkt({TVSigma{ty_cell_act(s.fst, cell, fuel),
                                key_post_ty_closure(s.snd, cell)}});
          },
          [&](const TVModal& m) -> TyValPtr {
            return mkt({TVModal{
                m.mode,
                ty_cell_act(m.ty, CellExpr::hcomp(cell, CellExpr::ident(m.mode)),
                            fuel)}});
          },
          [&](const TVId& i) -> TyValPtr {
            return mkt({TVId{ty_cell_act(i.ty, cell, fuel),
                             val_cell_act(i.lhs, cell, fuel),
                             val_cell_act(i.rhs, cell, fuel)}});
          },
          [&](const TVDec& d) -> TyValPtr {
            Neutral acted = act_neutral_rec(*this, *d.code, d.code->spine.size(), cell, fuel);
            return mkt({TVDec{mkn(std::move(acted))}});
          },
      },
      a->v);
}

// ---- axiom unfolding ------------------------------------------------------------

ValPtr Evaluator::force_elim(const ValPtr& v0, Fuel& fuel) const {
  ValPtr v = v0;
  for (;;) {
    const auto* ne = std::get_if<VNeutral>(&v->v);
    if (!ne || !ne->ne->spine.empty()) return v;
    const auto* ax = std::get_if<NHAxiom>(&ne->ne->head);
    if (!ax) return v;
    auto it = axioms_.unfold.find(ax->name);
    if (it == axioms_.unfold.end()) return v;
    fuel.burn();
    v = whnf(it->second, env_nil(ax->mode), ax->mode, fuel);
  }
}

// ---- closure application ----------------------------------------------------------

ValPtr Evaluator::apply_closure(const Closure& c, const ValPtr& v, Fuel& fuel) const {
  return whnf(c.body, env_val(c.env, v), c.mode, fuel);
}
TyValPtr Evaluator::apply_ty_closure(const TyClosure& c, const ValPtr& v,
                                     Fuel& fuel) const {
  return eval_ty(c.body, env_val(c.env, v), c.mode, fuel);
}
TyValPtr Evaluator::apply_ty_closure2(const TyClosure2& c, const ValPtr& v0,
                                      const ValPtr& v1, Fuel& fuel) const {
  return eval_ty(c.body, env_val(env_val(c.env, v0), v1), c.mode, fuel);
}

// ---- eliminations -------------------------------------------------------------------

ValPtr Evaluator::vapp(const ValPtr& f0, const ModalityPath& mode, const ValPtr& arg,
                       Fuel& fuel) const {
  ValPtr f = force_elim(f0, fuel);
  if (const auto* l = std::get_if<VLam>(&f->v)) {
    return apply_closure(l->clo, arg, fuel);
  }
  if (const auto* n = std::get_if<VNeutral>(&f->v)) {
    Neutral ne = *n->ne;
    ne.spine.push_back(SpineEntry{SApp{mode, arg}});
    TyValPtr ty;
    if (n->ty) {
      if (const auto* pi = std::get_if<TVPi>(&n->ty->v)) {
        ty = apply_ty_closure(pi->cod, arg, fuel);
      }
    }
    return mkv({VNeutral{mkn(std::move(ne)), std::move(ty)}});
  }
  throw Error("application of a non-function value");
}

ValPtr Evaluator::vproj(int which, const ValPtr& p0, Fuel& fuel) const {
  ValPtr p = force_elim(p0, fuel);
  if (const auto* pr = std::get_if<VPair>(&p->v)) {
    return which == 0 ? pr->fst : pr->snd;
  }
  if (const auto* n = std::get_if<VNeutral>(&p->v)) {
    Neutral ne = *n->ne;
    ne.spine.push_back(SpineEntry{SProj{which}});
    TyValPtr ty;
    if (n->ty) {
      if (const auto* sig = std::get_if<TVSigma>(&n->ty->v)) {
        ty = which == 0 ? sig->fst
                        : apply_ty_closure(sig->snd, vproj(0, p, fuel), fuel);
      }
    }
    return mkv({VNeutral{mkn(std::move(ne)), std::move(ty)}});
  }
  throw Error("projection from a non-pair value");
}

// ---- weak-head evaluation ------------------------------------------------------------

ValPtr Evaluator::whnf(const TmPtr& t, const EnvPtr& env, const std::string& mode,
                       Fuel& fuel) const {
  return std::visit(
      overloaded{
          [&](const TmVar& x) -> ValPtr {
            return lookup(env, x.index, x.cell, std::nullopt, fuel);
          },
          [&](const TmTrue&) -> ValPtr { return mkv({VTrue{}}); },
          [&](const TmFalse&) -> ValPtr { return mkv({VFalse{}}); },
          [&](const TmLam& l) -> ValPtr {
            return mkv({VLam{l.mode, Closure{l.body, env, l.mode, mode}}});
          },
          [&](const TmApp& a) -> ValPtr {
            ValPtr f = whnf(a.fn, env, mode, fuel);
            ValPtr arg = whnf(a.arg, env_lock(env, a.mode), a.mode.src, fuel);
            return vapp(f, a.mode, arg, fuel);
          },
          [&](const TmPair& p) -> ValPtr {
            return mkv({VPair{whnf(p.fst, env, mode, fuel), whnf(p.snd, env, mode, fuel)}});
          },
          [&](const TmProj& p) -> ValPtr {
            return vproj(p.which, whnf(p.pair, env, mode, fuel), fuel);
          },
          [&](const TmMkBox& b) -> ValPtr {
            return mkv({VMkBox{
                b.mode, whnf(b.body, env_lock(env, b.mode), b.mode.src, fuel)}});
          },
          [&](const TmOpen& o) -> ValPtr {
            ValPtr s =
                force_elim(whnf(o.scrut, env_lock(env, o.frame), o.frame.src, fuel), fuel);
            if (const auto* bx = std::get_if<VMkBox>(&s->v)) {
              return whnf(o.branch, env_val(env, bx->body), mode, fuel);
            }
            if (const auto* n = std::get_if<VNeutral>(&s->v)) {
              TyClosure motive{o.motive, env, o.frame, mode};
              Closure branch{o.branch, env, compose_mod(o.frame, o.mode), mode};
              Neutral ne = *n->ne;
              ne.spine.push_back(SpineEntry{SOpen{o.frame, o.mode, motive, branch}});
              TyValPtr ty = apply_ty_closure(motive, s, fuel);
              return mkv({VNeutral{mkn(std::move(ne)), std::move(ty)}});
            }
            throw Error("modal elimination of a non-box value");
          },
          [&](const TmBoolRec& r) -> ValPtr {
            ValPtr s = force_elim(whnf(r.scrut, env, mode, fuel), fuel);
            if (std::holds_alternative<VTrue>(s->v)) return whnf(r.on_true, env, mode, fuel);
            if (std::holds_alternative<VFalse>(s->v))
              return whnf(r.on_false, env, mode, fuel);
            if (const auto* n = std::get_if<VNeutral>(&s->v)) {
              TyClosure motive{r.motive, env, ModalityPath::identity(mode), mode};
              Neutral ne = *n->ne;
              ne.spine.push_back(SpineEntry{SBoolRec{motive,
                                                     whnf(r.on_true, env, mode, fuel),
                                                     whnf(r.on_false, env, mode, fuel)}});
              TyValPtr ty = apply_ty_closure(motive, s, fuel);
              return mkv({VNeutral{mkn(std::move(ne)), std::move(ty)}});
            }
            throw Error("boolean elimination of a non-boolean value");
          },
          [&](const TmRefl& r) -> ValPtr {
            return mkv({VRefl{whnf(r.tm, env, mode, fuel)}});
          },
          [&](const TmIdRec& r) -> ValPtr {
            ValPtr s = force_elim(whnf(r.scrut, env, mode, fuel), fuel);
            if (std::holds_alternative<VRefl>(s->v)) return whnf(r.refl_case, env, mode, fuel);
            if (const auto* n = std::get_if<VNeutral>(&s->v)) {
              TyClosure2 motive{r.motive, env, ModalityPath::identity(mode),
                                ModalityPath::identity(mode), mode};
              Neutral ne = *n->ne;
              ne.spine.push_back(
                  SpineEntry{SIdRec{motive, whnf(r.refl_case, env, mode, fuel)}});
              TyValPtr ty;
              if (n->ty) {
                if (const auto* id = std::get_if<TVId>(&n->ty->v)) {
                  ty = apply_ty_closure2(motive, id->rhs, s, fuel);
                }
              }
              return mkv({VNeutral{mkn(std::move(ne)), std::move(ty)}});
            }
            throw Error("path elimination of a non-path value");
          },
          [&](const TmEnc& e) -> ValPtr {
            return mkv({VEnc{eval_ty(e.ty, env, mode, fuel)}});
          },
          [&](const TmAxiom& ax) -> ValPtr {
            return mkv({VNeutral{mkn({NHAxiom{ax.name, ax.ty, mode}, {}}),
                        eval_ty(ax.ty, env, mode, fuel)}});
          },
          [&](const TmSub& s) -> ValPtr {
            return whnf(s.tm, env_of_sub(s.sub, env, mode, fuel), mode, fuel);
          },
      },
      t->v);
}

TyValPtr Evaluator::eval_ty(const TyPtr& a, const EnvPtr& env, const std::string& mode,
                            Fuel& fuel) const {
  return std::visit(
      overloaded{
          [&](const TyBool&) -> TyValPtr { return mkt({TVBool{}}); },
          [&](const TyUni& u) -> TyValPtr { return mkt({TVUni{u.level}}); },
          [&](const TyLift& l) -> TyValPtr {
            // Lifting is definitionally transparent.
            return eval_ty(l.ty, env, mode, fuel);
          },
          [&](const TyDec& d) -> TyValPtr {
            ValPtr code = force_elim(whnf(d.code, env, mode, fuel), fuel);
            if (const auto* e = std::get_if<VEnc>(&code->v)) return e->ty;
            if (const auto* n = std::get_if<VNeutral>(&code->v)) {
              return mkt({TVDec{n->ne}});
            }
            throw Error("decoding of a non-code value");
          },
          [&](const TyId& i) -> TyValPtr {
            return mkt({TVId{eval_ty(i.ty, env, mode, fuel), whnf(i.lhs, env, mode, fuel),
                             whnf(i.rhs, env, mode, fuel)}});
          },
          [&](const TyPi& p) -> TyValPtr {
            return mkt({TVPi{p.mode,
                             eval_ty(p.dom, env_lock(env, p.mode), p.mode.src, fuel),
                             TyClosure{p.cod, env, p.mode, mode}}});
          },
          [&](const TySigma& s) -> TyValPtr {
            return mkt({TVSigma{eval_ty(s.fst, env, mode, fuel),
                                TyClosure{s.snd, env, ModalityPath::identity(mode), mode}}});
          },
          [&](const TyModal& m) -> TyValPtr {
            return mkt({TVModal{
                m.mode, eval_ty(m.ty, env_lock(env, m.mode), m.mode.src, fuel)}});
          },
          [&](const TySub& s) -> TyValPtr {
            return eval_ty(s.ty, env_of_sub(s.sub, env, mode, fuel), mode, fuel);
          },
      },
      a->v);
}

// ---- substitutions as environments ------------------------------------------------------

EnvPtr Evaluator::env_of_sub(const SubPtr& s, const EnvPtr& env, const std::string& mode,
                             Fuel& fuel) const {
  return std::visit(
      overloaded{
          [&](const SubId&) -> EnvPtr { return env; },
          [&](const SubEmp&) -> EnvPtr { return env_nil(mode); },
          [&](const SubWk&) -> EnvPtr {
            if (const auto* v = std::get_if<EnvVal>(&env->v)) return v->parent;
            return env_shift(env, 1);
          },
          [&](const SubComp& c) -> EnvPtr {
            return env_of_sub(c.outer, env_of_sub(c.inner, env, mode, fuel), mode, fuel);
          },
          [&](const SubLock& l) -> EnvPtr {
            return env_lock(env_of_sub(l.sub, env, l.mod.dst, fuel), l.mod);
          },
          [&](const SubKey& k) -> EnvPtr { return env_key_pre(env, k.cell); },
          [&](const SubExt& e) -> EnvPtr {
            return env_val(env_of_sub(e.base, env, mode, fuel),
                           whnf(e.tm, env_lock(env, e.ann), e.ann.src, fuel));
          },
      },
      s->v);
}

EnvPtr Evaluator::identity_env(const CtxPtr& g, Fuel& fuel) const {
  return std::visit(
      overloaded{
          [&](const CtxEmp& e) -> EnvPtr { return env_nil(e.mode); },
          [&](const CtxLock& l) -> EnvPtr {
            return env_lock(identity_env(l.ctx, fuel), l.mod);
          },
          [&](const CtxExtend& e) -> EnvPtr {
            EnvPtr parent = identity_env(e.ctx, fuel);
            TyValPtr ty = eval_ty(e.ty, env_lock(parent, e.ann), e.ann.src, fuel);
            ValPtr fresh = mkv({VNeutral{
                mkn({NHVar{ctx_len(e.ctx), CellExpr::ident(e.ann)}, {}}), std::move(ty)}});
            return env_val(std::move(parent), std::move(fresh));
          },
      },
      g->v);
}

}  // namespace mtt
