#include <utility>

#include "mtt/diagnostics.hpp"
#include "mtt/eval.hpp"

namespace mtt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ValPtr mkv(Value v) { return std::make_shared<const Value>(std::move(v)); }

ValPtr fresh_neutral(std::size_t lvl, const ModalityPath& ann, TyValPtr ty) {
  return mkv({VNeutral{std::make_shared<const Neutral>(
                           Neutral{NHVar{lvl, CellExpr::ident(ann)}, {}}),
                       std::move(ty)}});
}

// Cell equality guarded by boundary checks, so non-parallel cells compare
// unequal instead of raising a boundary error.
bool cells_equiv(const ModeTheory& th, const CellExpr& a, const CellExpr& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  if (!eq_mod(th, a.src(), b.src()) || !eq_mod(th, a.dst(), b.dst())) return false;
  return eq_cell(th, a, b);
}

}  // namespace

// ---- conversion -----------------------------------------------------------------

bool Evaluator::conv_closure(const Closure& a, const Closure& b, std::size_t lvl,
                             Fuel& fuel) const {
  ValPtr fresh = fresh_neutral(lvl, a.ann, nullptr);
  return conv_val(apply_closure(a, fresh, fuel), apply_closure(b, fresh, fuel), nullptr,
                  lvl + 1, fuel);
}

bool Evaluator::conv_ty_closure(const TyClosure& a, const TyClosure& b, std::size_t lvl,
                                Fuel& fuel) const {
  ValPtr fresh = fresh_neutral(lvl, a.ann, nullptr);
  return conv_ty(apply_ty_closure(a, fresh, fuel), apply_ty_closure(b, fresh, fuel),
                 lvl + 1, fuel);
}

bool Evaluator::conv_neutral(const NeutPtr& na, const NeutPtr& nb, std::size_t lvl,
                             Fuel& fuel) const {
  const Neutral& a = *na;
  const Neutral& b = *nb;
  bool heads = std::visit(
      overloaded{
          [&](const NHVar& ha, const NHVar& hb) {
            return ha.level == hb.level && cells_equiv(th_, ha.cell, hb.cell);
          },
          [&](const NHAxiom& ha, const NHAxiom& hb) { return ha.name == hb.name; },
          [](const auto&, const auto&) { return false; },
      },
      a.head, b.head);
  if (!heads) return false;
  if (a.spine.size() != b.spine.size()) return false;
  for (std::size_t i = 0; i < a.spine.size(); ++i) {
    bool ok = std::visit(
        overloaded{
            [&](const SApp& ea, const SApp& eb) {
              return eq_mod(th_, ea.mode, eb.mode) &&
                     conv_val(ea.arg, eb.arg, nullptr, lvl, fuel);
            },
            [&](const SProj& ea, const SProj& eb) { return ea.which == eb.which; },
            [&](const SBoolRec& ea, const SBoolRec& eb) {
              return conv_ty_closure(ea.motive, eb.motive, lvl, fuel) &&
                     conv_val(ea.on_true, eb.on_true, nullptr, lvl, fuel) &&
                     conv_val(ea.on_false, eb.on_false, nullptr, lvl, fuel);
            },
            [&](const SIdRec& ea, const SIdRec& eb) {
              ValPtr f0 = fresh_neutral(lvl, ea.motive.ann0, nullptr);
              ValPtr f1 = fresh_neutral(lvl + 1, ea.motive.ann1, nullptr);
              return conv_ty(apply_ty_closure2(ea.motive, f0, f1, fuel),
                             apply_ty_closure2(eb.motive, f0, f1, fuel), lvl + 2, fuel) &&
                     conv_val(ea.refl_case, eb.refl_case, nullptr, lvl, fuel);
            },
            [&](const SOpen& ea, const SOpen& eb) {
              return eq_mod(th_, ea.frame, eb.frame) && eq_mod(th_, ea.mode, eb.mode) &&
                     conv_ty_closure(ea.motive, eb.motive, lvl, fuel) &&
                     conv_closure(ea.branch, eb.branch, lvl, fuel);
            },
            [&](const SKey& ea, const SKey& eb) {
              return cells_equiv(th_, ea.cell, eb.cell);
            },
            [](const auto&, const auto&) { return false; },
        },
        a.spine[i], b.spine[i]);
    if (!ok) return false;
  }
  return true;
}

bool Evaluator::conv_ty(const TyValPtr& a, const TyValPtr& b, std::size_t lvl,
                        Fuel& fuel) const {
  if (a == b) return true;
  return std::visit(
      overloaded{
          [&](const TVBool&, const TVBool&) { return true; },
          [&](const TVUni& ua, const TVUni& ub) { return ua.level == ub.level; },
          [&](const TVPi& pa, const TVPi& pb) {
            return eq_mod(th_, pa.mode, pb.mode) && conv_ty(pa.dom, pb.dom, lvl, fuel) &&
                   conv_ty_closure(pa.cod, pb.cod, lvl, fuel);
          },
          [&](const TVSigma& sa, const TVSigma& sb) {
            return conv_ty(sa.fst, sb.fst, lvl, fuel) &&
                   conv_ty_closure(sa.snd, sb.snd, lvl, fuel);
          },
          [&](const TVModal& ma, const TVModal& mb) {
            return eq_mod(th_, ma.mode, mb.mode) && conv_ty(ma.ty, mb.ty, lvl, fuel);
          },
          [&](const TVId& ia, const TVId& ib) {
            return conv_ty(ia.ty, ib.ty, lvl, fuel) &&
                   conv_val(ia.lhs, ib.lhs, ia.ty, lvl, fuel) &&
                   conv_val(ia.rhs, ib.rhs, ia.ty, lvl, fuel);
          },
          [&](const TVDec& da, const TVDec& db) {
            return conv_neutral(da.code, db.code, lvl, fuel);
          },
          [](const auto&, const auto&) { return false; },
      },
      a->v, b->v);
}

bool Evaluator::conv_val(const ValPtr& a, const ValPtr& b, const TyValPtr& ty,
                         std::size_t lvl, Fuel& fuel) const {
  if (a == b) return true;

  // Type-directed phase: extensionality at Π and Σ.
  if (ty) {
    if (const auto* pi = std::get_if<TVPi>(&ty->v)) {
      ValPtr fresh = fresh_neutral(lvl, pi->mode, pi->dom);
      return conv_val(vapp(a, pi->mode, fresh, fuel), vapp(b, pi->mode, fresh, fuel),
                      apply_ty_closure(pi->cod, fresh, fuel), lvl + 1, fuel);
    }
    if (const auto* sig = std::get_if<TVSigma>(&ty->v)) {
      ValPtr a0 = vproj(0, a, fuel);
      ValPtr b0 = vproj(0, b, fuel);
      if (!conv_val(a0, b0, sig->fst, lvl, fuel)) return false;
      return conv_val(vproj(1, a, fuel), vproj(1, b, fuel),
                      apply_ty_closure(sig->snd, a0, fuel), lvl, fuel);
    }
  } else {
    // Untyped fallback: still extensional when one side is a canonical
    // function or pair.
    if (const auto* la = std::get_if<VLam>(&a->v)) {
      ValPtr fresh = fresh_neutral(lvl, la->mode, nullptr);
      return conv_val(vapp(a, la->mode, fresh, fuel), vapp(b, la->mode, fresh, fuel),
                      nullptr, lvl + 1, fuel);
    }
    if (const auto* lb = std::get_if<VLam>(&b->v)) {
      ValPtr fresh = fresh_neutral(lvl, lb->mode, nullptr);
      return conv_val(vapp(a, lb->mode, fresh, fuel), vapp(b, lb->mode, fresh, fuel),
                      nullptr, lvl + 1, fuel);
    }
    if (std::holds_alternative<VPair>(a->v) || std::holds_alternative<VPair>(b->v)) {
      bool a_elim = std::holds_alternative<VPair>(a->v) ||
                    std::holds_alternative<VNeutral>(a->v);
      bool b_elim = std::holds_alternative<VPair>(b->v) ||
                    std::holds_alternative<VNeutral>(b->v);
      if (a_elim && b_elim) {
        return conv_val(vproj(0, a, fuel), vproj(0, b, fuel), nullptr, lvl, fuel) &&
               conv_val(vproj(1, a, fuel), vproj(1, b, fuel), nullptr, lvl, fuel);
      }
      return false;
    }
  }

  // The code/decode retraction: a stuck decode re-encoded is the code itself.
  {
    const auto* ea = std::get_if<VEnc>(&a->v);
    const auto* eb = std::get_if<VEnc>(&b->v);
    const auto* nb = std::get_if<VNeutral>(&b->v);
    const auto* na = std::get_if<VNeutral>(&a->v);
    if (ea && nb) {
      if (const auto* dec = std::get_if<TVDec>(&ea->ty->v)) {
        return conv_neutral(dec->code, nb->ne, lvl, fuel);
      }
    }
    if (eb && na) {
      if (const auto* dec = std::get_if<TVDec>(&eb->ty->v)) {
        return conv_neutral(na->ne, dec->code, lvl, fuel);
      }
    }
  }

  // Structural phase. Mixed canonical/neutral pairs are unequal: there is
  // deliberately no extensionality at modal, boolean, or identity types.
  return std::visit(
      overloaded{
          [&](const VTrue&, const VTrue&) { return true; },
          [&](const VFalse&, const VFalse&) { return true; },
          [&](const VRefl& ra, const VRefl& rb) {
            TyValPtr inner;
            if (ty) {
              if (const auto* id = std::get_if<TVId>(&ty->v)) inner = id->ty;
            }
            return conv_val(ra.tm, rb.tm, inner, lvl, fuel);
          },
          [&](const VEnc& ea, const VEnc& eb) { return conv_ty(ea.ty, eb.ty, lvl, fuel); },
          [&](const VMkBox& ba, const VMkBox& bb) {
            if (!eq_mod(th_, ba.mode, bb.mode)) return false;
            TyValPtr inner;
            if (ty) {
              if (const auto* md = std::get_if<TVModal>(&ty->v)) inner = md->ty;
            }
            return conv_val(ba.body, bb.body, inner, lvl, fuel);
          },
          [&](const VNeutral& na2, const VNeutral& nb2) {
            return conv_neutral(na2.ne, nb2.ne, lvl, fuel);
          },
          [](const auto&, const auto&) { return false; },
      },
      a->v, b->v);
}

bool Evaluator::conv(const TmPtr& a, const TmPtr& b, const TyPtr& ty, const CtxPtr& ctx,
                     Fuel& fuel) const {
  EnvPtr env = identity_env(ctx, fuel);
  std::string mode = ctx_mode(ctx);
  ValPtr va = whnf(a, env, mode, fuel);
  ValPtr vb = whnf(b, env, mode, fuel);
  TyValPtr tv = ty ? eval_ty(ty, env, mode, fuel) : nullptr;
  return conv_val(va, vb, tv, ctx_len(ctx), fuel);
}

// ---- readback -------------------------------------------------------------------

namespace {

TmPtr readback_neutral(const Evaluator& ev, const Neutral& ne, std::size_t lvl,
                       Fuel& fuel);

ValPtr fresh_at(std::size_t lvl, const ModalityPath& ann) {
  return fresh_neutral(lvl, ann, nullptr);
}

}  // namespace

TmPtr Evaluator::readback(const ValPtr& v, std::size_t lvl, Fuel& fuel) const {
  return std::visit(
      overloaded{
          [&](const VTrue&) { return tm_true(); },
          [&](const VFalse&) { return tm_false(); },
          [&](const VRefl& r) { return tm_refl(readback(r.tm, lvl, fuel)); },
          [&](const VPair& p) {
            return tm_pair(readback(p.fst, lvl, fuel), readback(p.snd, lvl, fuel));
          },
          [&](const VEnc& e) { return tm_enc(readback_ty(e.ty, lvl, fuel)); },
          [&](const VMkBox& b) {
            return tm_mkbox(b.mode, readback(b.body, lvl, fuel));
          },
          [&](const VLam& l) {
            ValPtr fresh = fresh_at(lvl, l.mode);
            return tm_lam(l.mode, readback(apply_closure(l.clo, fresh, fuel), lvl + 1, fuel));
          },
          [&](const VNeutral& n) { return readback_neutral(*this, *n.ne, lvl, fuel); },
      },
      v->v);
}

namespace {

TmPtr readback_neutral(const Evaluator& ev, const Neutral& ne, std::size_t lvl,
                       Fuel& fuel) {
  TmPtr acc = std::visit(
      overloaded{
          [&](const NHVar& h) {
            if (h.level >= lvl) {
              throw Error("a variable escaped its scope during readback");
            }
            return tm_var(lvl - 1 - h.level, h.cell);
          },
          [&](const NHAxiom& h) { return tm_axiom(h.name, h.ty); },
      },
      ne.head);
  for (const SpineEntry& entry : ne.spine) {
    acc = std::visit(
        overloaded{
            [&](const SApp& e) {
              return tm_app(e.mode, acc, ev.readback(e.arg, lvl, fuel));
            },
            [&](const SProj& e) { return tm_proj(e.which, acc); },
            [&](const SBoolRec& e) {
              ValPtr fresh = fresh_at(lvl, e.motive.ann);
              TyPtr motive = ev.readback_ty(
                  ev.apply_ty_closure(e.motive, fresh, fuel), lvl + 1, fuel);
              return tm_boolrec(motive, ev.readback(e.on_true, lvl, fuel),
                                ev.readback(e.on_false, lvl, fuel), acc);
            },
            [&](const SIdRec& e) {
              ValPtr f0 = fresh_at(lvl, e.motive.ann0);
              ValPtr f1 = fresh_at(lvl + 1, e.motive.ann1);
              TyPtr motive = ev.readback_ty(
                  ev.apply_ty_closure2(e.motive, f0, f1, fuel), lvl + 2, fuel);
              return tm_idrec(motive, ev.readback(e.refl_case, lvl, fuel), acc);
            },
            [&](const SOpen& e) {
              ValPtr mf = fresh_at(lvl, e.frame);
              TyPtr motive =
                  ev.readback_ty(ev.apply_ty_closure(e.motive, mf, fuel), lvl + 1, fuel);
              ValPtr bf = fresh_at(lvl, e.branch.ann);
              TmPtr branch =
                  ev.readback(ev.apply_closure(e.branch, bf, fuel), lvl + 1, fuel);
              return tm_open(e.frame, e.mode, motive, acc, branch);
            },
            [&](const SKey& e) {
              // A key that could not be distributed: keep it explicit.
              return tm_sub(acc, sub_key(e.cell, nullptr));
            },
        },
        entry);
  }
  return acc;
}

}  // namespace

TyPtr Evaluator::readback_ty(const TyValPtr& a, std::size_t lvl, Fuel& fuel) const {
  return std::visit(
      overloaded{
          [&](const TVBool&) { return ty_bool(); },
          [&](const TVUni& u) { return ty_uni(u.level); },
          [&](const TVPi& p) {
            ValPtr fresh = fresh_at(lvl, p.mode);
            return ty_pi(p.mode, readback_ty(p.dom, lvl, fuel),
                         readback_ty(apply_ty_closure(p.cod, fresh, fuel), lvl + 1, fuel));
          },
          [&](const TVSigma& s) {
            ValPtr fresh = fresh_at(lvl, s.snd.ann);
            return ty_sigma(readback_ty(s.fst, lvl, fuel),
                            readback_ty(apply_ty_closure(s.snd, fresh, fuel), lvl + 1, fuel));
          },
          [&](const TVModal& m) { return ty_modal(m.mode, readback_ty(m.ty, lvl, fuel)); },
          [&](const TVId& i) {
            return ty_id(readback_ty(i.ty, lvl, fuel), readback(i.lhs, lvl, fuel),
                         readback(i.rhs, lvl, fuel));
          },
          [&](const TVDec& d) {
            return ty_dec(readback_neutral(*this, *d.code, lvl, fuel));
          },
      },
      a->v);
}

// ---- closed-term evaluation --------------------------------------------------------

CanonicalReport eval_closed(const ModeTheory& th, const TmPtr& t, const TyPtr& ty,
                            const std::string& mode, long long fuel_units,
                            const AxiomTable& axioms) {
  (void)ty;  // the type is part of the caller contract; evaluation is untyped
  Evaluator ev(th, axioms);
  Fuel fuel{fuel_units};
  ValPtr v = ev.whnf(t, env_nil(mode), mode, fuel);

  CanonicalReport rep;
  rep.value = v;
  if (const auto* n = std::get_if<VNeutral>(&v->v)) {
    if (const auto* ax = std::get_if<NHAxiom>(&n->ne->head)) {
      rep.kind = CanonicalReport::Kind::BlockedAxiom;
      rep.blocking_axiom = ax->name;
      rep.normal_form = ev.readback(v, 0, fuel);
      return rep;
    }
    throw Error("closed evaluation produced a variable-headed value");
  }
  rep.kind = CanonicalReport::Kind::Canonical;
  // Readback at level 0 re-checks that no variable head survives anywhere.
  rep.normal_form = ev.readback(v, 0, fuel);
  if (std::holds_alternative<VTrue>(v->v)) rep.boolean = true;
  if (std::holds_alternative<VFalse>(v->v)) rep.boolean = false;
  return rep;
}

TmPtr normalize(const ModeTheory& th, const TmPtr& t, const CtxPtr& ctx, long long fuel_units,
                const AxiomTable& axioms) {
  Evaluator ev(th, axioms);
  Fuel fuel{fuel_units};
  EnvPtr env = ev.identity_env(ctx, fuel);
  return ev.readback(ev.whnf(t, env, ctx_mode(ctx), fuel), ctx_len(ctx), fuel);
}

TyPtr normalize_ty(const ModeTheory& th, const TyPtr& a, const CtxPtr& ctx,
                   long long fuel_units, const AxiomTable& axioms) {
  Evaluator ev(th, axioms);
  Fuel fuel{fuel_units};
  EnvPtr env = ev.identity_env(ctx, fuel);
  return ev.readback_ty(ev.eval_ty(a, env, ctx_mode(ctx), fuel), ctx_len(ctx), fuel);
}

CtxPtr ctx_nf(const ModeTheory& th, const CtxPtr& g, long long fuel,
              const AxiomTable& axioms) {
  return std::visit(
      overloaded{
          [&](const CtxEmp& e) { return ctx_emp(e.mode); },
          [&](const CtxLock& l) {
            // The smart constructor merges adjacent locks and erases locks
            // on the empty telescope.
            return ctx_lock(ctx_nf(th, l.ctx, fuel, axioms), l.mod);
          },
          [&](const CtxExtend& e) {
            CtxPtr base = ctx_nf(th, e.ctx, fuel, axioms);
            TyPtr ty = normalize_ty(th, e.ty, ctx_lock(base, e.ann), fuel, axioms);
            return ctx_extend(base, e.ann, ty);
          },
      },
      g->v);
}

}  // namespace mtt
