#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gen.hpp"
#include "mtt/checker.hpp"
#include "mtt/core_format.hpp"
#include "mtt/core_syntax.hpp"
#include "mtt/diagnostics.hpp"
#include "mtt/eval.hpp"
#include "mtt/mode_theory.hpp"
#include "mtt/subst.hpp"

using namespace mtt;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Runs a checking thunk; returns "" on acceptance and the diagnostic's rule
// tag on rejection. Any other exception escapes and fails the test loudly.
std::string rejection(const std::function<void()>& run) {
  try {
    run();
    return "";
  } catch (const CheckFailure& f) {
    return f.diag.rule;
  }
}

ModalityPath one(const std::string& m) { return ModalityPath::identity(m); }
CellExpr ident1(const std::string& m) { return CellExpr::ident(one(m)); }

CellExpr gen_cell(const ModeTheory& th, const std::string& name) {
  const auto* tg = th.find_two_gen(name);
  REQUIRE(tg != nullptr);
  return CellExpr::gen(name, tg->src, tg->dst);
}

// Raw telescope nodes that bypass the smart constructors: no boundary checks,
// no lock merging, no erasure of locks over the empty telescope. Used to pin
// down that the checker treats split and merged lock towers alike.
CtxPtr raw_lock(CtxPtr g, ModalityPath mod) {
  return std::make_shared<const CtxNode>(CtxNode{CtxLock{std::move(g), std::move(mod)}});
}
CtxPtr raw_extend(CtxPtr g, ModalityPath ann, TyPtr ty) {
  return std::make_shared<const CtxNode>(
      CtxNode{CtxExtend{std::move(g), std::move(ann), std::move(ty)}});
}

// Every composable generator word over the theory, up to maxlen letters,
// including the identity path at every mode. Words are outermost-first, so a
// letter is appended at the source end.
std::vector<ModalityPath> paths_upto(const ModeTheory& th, int maxlen) {
  std::vector<ModalityPath> out;
  for (const auto& m : th.modes) out.push_back(one(m));
  std::vector<ModalityPath> frontier = out;
  for (int len = 1; len <= maxlen; ++len) {
    std::vector<ModalityPath> next;
    for (const auto& p : frontier) {
      for (const auto& g : th.one_gens) {
        if (g.dst != p.src) continue;
        ModalityPath q = p;
        q.word.push_back(g.name);
        q.src = g.src;
        next.push_back(q);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

// ---- cell rewriting ----------------------------------------------------------
//
// Structure-preserving traversal that applies `f` to every 2-cell in a term
// (variable annotations are the only place cells live). Used to pin down that
// the verdict depends on cells only up to the theory's 2-cell equality.

using CellFn = std::function<CellExpr(const CellExpr&)>;

TmPtr map_cells(const TmPtr& t, const CellFn& f);

TyPtr map_cells_ty(const TyPtr& a, const CellFn& f) {
  return std::visit(
      overloaded{
          [&](const TyBool&) -> TyPtr { return a; },
          [&](const TyUni&) -> TyPtr { return a; },
          [&](const TyDec& d) -> TyPtr { return ty_dec(map_cells(d.code, f)); },
          [&](const TyLift& l) -> TyPtr { return ty_lift(map_cells_ty(l.ty, f)); },
          [&](const TyId& i) -> TyPtr {
            return ty_id(map_cells_ty(i.ty, f), map_cells(i.lhs, f), map_cells(i.rhs, f));
          },
          [&](const TyPi& p) -> TyPtr {
            return ty_pi(p.mode, map_cells_ty(p.dom, f), map_cells_ty(p.cod, f));
          },
          [&](const TySigma& s) -> TyPtr {
            return ty_sigma(map_cells_ty(s.fst, f), map_cells_ty(s.snd, f));
          },
          [&](const TyModal& m) -> TyPtr { return ty_modal(m.mode, map_cells_ty(m.ty, f)); },
          [&](const TySub&) -> TyPtr { return a; },
      },
      a->v);
}

TmPtr map_cells(const TmPtr& t, const CellFn& f) {
  return std::visit(
      overloaded{
          [&](const TmVar& v) -> TmPtr { return tm_var(v.index, f(v.cell)); },
          [&](const TmTrue&) -> TmPtr { return t; },
          [&](const TmFalse&) -> TmPtr { return t; },
          [&](const TmBoolRec& r) -> TmPtr {
            return tm_boolrec(map_cells_ty(r.motive, f), map_cells(r.on_true, f),
                              map_cells(r.on_false, f), map_cells(r.scrut, f));
          },
          [&](const TmRefl& r) -> TmPtr { return tm_refl(map_cells(r.tm, f)); },
          [&](const TmIdRec& r) -> TmPtr {
            return tm_idrec(map_cells_ty(r.motive, f), map_cells(r.refl_case, f),
                            map_cells(r.scrut, f));
          },
          [&](const TmEnc& e) -> TmPtr { return tm_enc(map_cells_ty(e.ty, f)); },
          [&](const TmLam& l) -> TmPtr { return tm_lam(l.mode, map_cells(l.body, f)); },
          [&](const TmApp& ap) -> TmPtr {
            return tm_app(ap.mode, map_cells(ap.fn, f), map_cells(ap.arg, f));
          },
          [&](const TmPair& p) -> TmPtr {
            return tm_pair(map_cells(p.fst, f), map_cells(p.snd, f));
          },
          [&](const TmProj& p) -> TmPtr { return tm_proj(p.which, map_cells(p.pair, f)); },
          [&](const TmMkBox& b) -> TmPtr { return tm_mkbox(b.mode, map_cells(b.body, f)); },
          [&](const TmOpen& o) -> TmPtr {
            return tm_open(o.frame, o.mode, map_cells_ty(o.motive, f), map_cells(o.scrut, f),
                           map_cells(o.branch, f));
          },
          [&](const TmAxiom&) -> TmPtr { return t; },
          [&](const TmSub&) -> TmPtr { return t; },
      },
      t->v);
}

}  // namespace

// ---- telescope formation ------------------------------------------------------

TEST_CASE("telescope formation validates locks, binders, and modes") {
  const ModeTheory& tr = builtin_theory("trivial");
  const ModeTheory& gu = builtin_theory("guarded");
  const ModeTheory& wa = builtin_theory("walking_adjunction");
  Checker ctr(tr);
  Checker cgu(gu);
  Checker cwa(wa);

  CHECK(rejection([&] { ctr.check_ctx(ctx_emp("m"), "m"); }) == "");
  CHECK(rejection([&] { ctr.check_ctx(ctx_emp("m"), "zz"); }) == "cx/emp");
  CHECK(rejection([&] { cgu.check_ctx(ctx_emp("nope"), "nope"); }) == "cx/emp");

  // A binder whose annotation reaches across modes: n -> m in the adjunction.
  ModalityPath mu_nm{"n", "m", {"mu"}};
  CHECK(rejection([&] {
          cwa.check_ctx(ctx_extend(ctx_emp("m"), mu_nm, ty_bool()), "m");
        }) == "");

  // A lock whose boundary does not chain onto the telescope below it.
  ModalityPath g_ts{"t", "s", {"g"}};
  CtxPtr bad_lock = raw_lock(ctx_emp("t"), g_ts);  // lands at s, context sits at t
  CHECK(rejection([&] { cgu.check_ctx(bad_lock, "t"); }) == "cx/lock");

  // A binder annotation that does not land at the telescope's mode.
  CtxPtr bad_ext = raw_extend(ctx_emp("t"), g_ts, ty_bool());
  CHECK(rejection([&] { cgu.check_ctx(bad_ext, "t"); }) == "cx/extend");

  // Binder types are validated as large types.
  CtxPtr bad_ty = ctx_extend(ctx_emp("m"), one("m"), ty_uni(1));
  CHECK(rejection([&] { ctr.check_ctx(bad_ty, "m"); }) == "tp/uni");
  CtxPtr ok_uni = ctx_extend(ctx_emp("m"), one("m"), ty_uni(0));
  CHECK(rejection([&] { ctr.check_ctx(ok_uni, "m"); }) == "");

  // A dependent binder: the second type mentions the first binder.
  CtxPtr dep = ctx_extend(ctx_extend(ctx_emp("m"), one("m"), ty_bool()), one("m"),
                          ty_id(ty_bool(), tm_var(0, ident1("m")), tm_true()));
  CHECK(rejection([&] { ctr.check_ctx(dep, "m"); }) == "");
}

// ---- variables ------------------------------------------------------------------

TEST_CASE("variables synthesize through the locks their 2-cell spans") {
  const ModeTheory& tr = builtin_theory("trivial");
  Checker ctr(tr);

  CtxPtr g0 = ctx_extend(ctx_emp("m"), one("m"), ty_bool());
  TyPtr got = ctr.infer(g0, tm_var(0, ident1("m")));
  CHECK(ty_equal(got, ty_bool()));
  CHECK(rejection([&] { ctr.infer(g0, tm_var(3, ident1("m"))); }) == "tm/var");

  // The binder seen from under its own annotation's lock.
  const ModeTheory& co = builtin_theory("idempotent_comonad");
  Checker cco(co);
  ModalityPath mu{"m", "m", {"mu"}};
  CtxPtr under = ctx_lock(ctx_extend(ctx_emp("m"), mu, ty_bool()), mu);
  CHECK(ty_equal(cco.infer(under, tm_var(0, CellExpr::ident(mu))), ty_bool()));

  // Crossing a lock needs a 2-cell from the annotation to the locks above.
  const ModeTheory& gu = builtin_theory("guarded");
  Checker cgu(gu);
  ModalityPath l{"t", "t", {"l"}};
  CtxPtr locked = ctx_lock(ctx_extend(ctx_emp("t"), one("t"), ty_bool()), l);
  CellExpr one_le_l = gen_cell(gu, "one_le_l");
  TyPtr through = cgu.infer(locked, tm_var(0, one_le_l));
  CHECK(ty_equal(through, ty_bool()));

  // The identity cell does not reach across that lock.
  CHECK(rejection([&] { cgu.infer(locked, tm_var(0, ident1("t"))); }) == "tm/var");

  // The comonad has no cell 1 => mu, so the counit's direction matters.
  CtxPtr wrong_way = ctx_lock(ctx_extend(ctx_emp("m"), one("m"), ty_bool()), mu);
  CHECK(rejection([&] { cco.infer(wrong_way, tm_var(0, ident1("m"))); }) == "tm/var");

  // Keying a dependent binder type: the cell acts on the variables of the
  // type while the lookup shifts it to the ambient telescope.
  CtxPtr dep = ctx_lock(ctx_extend(ctx_extend(ctx_emp("t"), one("t"), ty_bool()), one("t"),
                                   ty_id(ty_bool(), tm_var(0, ident1("t")), tm_true())),
                        l);
  TyPtr dep_got = cgu.infer(dep, tm_var(0, one_le_l));
  TyPtr dep_want = ty_id(ty_bool(), tm_var(1, one_le_l), tm_true());
  CHECK(ty_equiv(gu, dep_got, dep_want));
  CHECK(rejection([&] { cgu.check_ty(dep, dep_got, 1); }) == "");
}

// ---- introductions and determined synthesis ------------------------------------

TEST_CASE("introduction forms check and determined forms synthesize") {
  const ModeTheory& co = builtin_theory("idempotent_comonad");
  Checker ck(co);
  ModalityPath mu{"m", "m", {"mu"}};
  CtxPtr emp = ctx_emp("m");

  CHECK(rejection([&] {
          ck.check_tm(emp, tm_mkbox(mu, tm_true()), ty_modal(mu, ty_bool()));
        }) == "");
  CHECK(rejection([&] {
          ck.check_tm(emp, tm_mkbox(one("m"), tm_true()), ty_modal(mu, ty_bool()));
        }) == "tm/modal-intro");
  CHECK(ty_equal(ck.infer(emp, tm_mkbox(mu, tm_true())), ty_modal(mu, ty_bool())));

  TyPtr bb = ty_pi(one("m"), ty_bool(), ty_bool());
  CHECK(rejection([&] {
          ck.check_tm(emp, tm_lam(one("m"), tm_var(0, ident1("m"))), bb);
        }) == "");
  CHECK(rejection([&] { ck.check_tm(emp, tm_lam(one("m"), tm_true()), ty_bool()); }) ==
        "tm/lam");
  CHECK(rejection([&] { ck.infer(emp, tm_lam(one("m"), tm_true())); }) == "not-inferable");

  TyPtr sg = ty_sigma(ty_bool(), ty_bool());
  CHECK(rejection([&] { ck.check_tm(emp, tm_pair(tm_true(), tm_false()), sg); }) == "");
  CHECK(rejection([&] { ck.check_tm(emp, tm_pair(tm_true(), tm_false()), bb); }) ==
        "tm/pair");
  CHECK(rejection([&] { ck.infer(emp, tm_pair(tm_true(), tm_false())); }) ==
        "not-inferable");

  CHECK(ty_equal(ck.infer(emp, tm_refl(tm_true())), ty_id(ty_bool(), tm_true(), tm_true())));

  // Dependent pair: the second component's type mentions the first.
  TyPtr dep_sg = ty_sigma(ty_bool(), ty_id(ty_bool(), tm_var(0, ident1("m")), tm_true()));
  CHECK(rejection([&] {
          ck.check_tm(emp, tm_pair(tm_true(), tm_refl(tm_true())), dep_sg);
        }) == "");
  CHECK(rejection([&] {
          ck.check_tm(emp, tm_pair(tm_false(), tm_refl(tm_true())), dep_sg);
        }) == "tm/refl");

  // A modal weakening combinator: unboxing along the identity frame.
  TmPtr unbox1 = tm_lam(one("m"), tm_open(one("m"), one("m"), ty_bool(),
                                          tm_var(0, ident1("m")), tm_var(0, ident1("m"))));
  CHECK(rejection([&] {
          ck.check_tm(emp, unbox1, ty_pi(one("m"), ty_modal(one("m"), ty_bool()), ty_bool()));
        }) == "");

  // A coercion along the counit: |mu| Bool -> |1| Bool.
  CellExpr eps = gen_cell(co, "eps");
  TmPtr coe = tm_lam(one("m"),
                     tm_open(one("m"), mu, ty_modal(one("m"), ty_bool()),
                             tm_var(0, ident1("m")), tm_mkbox(one("m"), tm_var(0, eps))));
  CHECK(rejection([&] {
          ck.check_tm(emp, coe,
                      ty_pi(one("m"), ty_modal(mu, ty_bool()),
                            ty_modal(one("m"), ty_bool())));
        }) == "");
}

// ---- universes ------------------------------------------------------------------

TEST_CASE("universe levels follow the two-level stratification") {
  const ModeTheory& co = builtin_theory("idempotent_comonad");
  Checker ck(co);
  CtxPtr emp = ctx_emp("m");
  ModalityPath mu{"m", "m", {"mu"}};

  CHECK(rejection([&] { ck.check_ty(emp, ty_uni(0), 1); }) == "");
  CHECK(rejection([&] { ck.check_ty(emp, ty_uni(0), 0); }) == "tp/uni");
  CHECK(rejection([&] { ck.check_ty(emp, ty_uni(1), 1); }) == "tp/uni");

  TyPtr dec = ty_dec(tm_enc(ty_bool()));
  CHECK(rejection([&] { ck.check_ty(emp, dec, 0); }) == "");
  CHECK(rejection([&] { ck.check_ty(emp, dec, 1); }) == "tp/el");
  CHECK(rejection([&] { ck.check_ty(emp, ty_lift(dec), 1); }) == "");
  CHECK(rejection([&] { ck.check_ty(emp, ty_lift(ty_bool()), 0); }) == "");
  CHECK(rejection([&] { ck.check_ty(emp, ty_dec(tm_true()), 0); }) == "conv");

  CHECK(rejection([&] { ck.check_ty(emp, ty_modal(mu, ty_bool()), 1); }) == "");
  CHECK(rejection([&] { ck.check_ty(emp, ty_modal(mu, ty_bool()), 0); }) == "");
  CHECK(rejection([&] { ck.check_ty(emp, ty_pi(one("m"), ty_uni(0), ty_uni(0)), 1); }) ==
        "");
  CHECK(rejection([&] { ck.check_ty(emp, ty_pi(one("m"), ty_uni(0), ty_uni(0)), 0); }) ==
        "tp/uni");
  CHECK(rejection([&] {
          ck.check_ty(emp, ty_id(ty_uni(0), tm_enc(ty_bool()), tm_enc(ty_bool())), 1);
        }) == "");

  CHECK(ty_equal(ck.infer(emp, tm_enc(ty_bool())), ty_uni(0)));
  CHECK(ty_equal(ck.infer(emp, tm_enc(ty_modal(mu, ty_bool()))), ty_uni(0)));
  // Codes decode to small types only, so a code of a large type is rejected.
  CHECK(rejection([&] { ck.infer(emp, tm_enc(ty_uni(0))); }) == "tp/uni");
}

// ---- modal elimination ----------------------------------------------------------

TEST_CASE("modal elimination validates frame, box type, and branch") {
  const ModeTheory& co = builtin_theory("idempotent_comonad");
  const ModeTheory& gu = builtin_theory("guarded");
  Checker cco(co);
  Checker cgu(gu);
  ModalityPath mu{"m", "m", {"mu"}};
  CtxPtr emp = ctx_emp("m");

  // Frame boundary must land at the ambient mode.
  ModalityPath g_ts{"t", "s", {"g"}};
  CHECK(rejection([&] {
          cgu.infer(ctx_emp("t"), tm_open(g_ts, one("s"), ty_bool(),
                                          tm_mkbox(one("s"), tm_true()),
                                          tm_var(0, ident1("t"))));
        }) == "tm/modal-elim");

  // The scrutinee must live in a boxed type.
  CHECK(rejection([&] {
          cco.infer(emp, tm_open(one("m"), one("m"), ty_bool(), tm_true(),
                                 tm_var(0, ident1("m"))));
        }) == "tm/modal-elim");

  // The box's modality must agree with the opened one.
  CHECK(rejection([&] {
          cco.infer(emp, tm_open(one("m"), one("m"), ty_bool(), tm_mkbox(mu, tm_true()),
                                 tm_var(0, ident1("m"))));
        }) == "tm/modal-elim");

  // Unboxing along the counit: the branch sees the contents one lock down.
  CellExpr eps = gen_cell(co, "eps");
  TmPtr unbox = tm_open(one("m"), mu, ty_bool(), tm_mkbox(mu, tm_true()), tm_var(0, eps));
  CHECK(ty_equal(cco.infer(emp, unbox), ty_bool()));

  // The guarded twin along d.g => 1.
  ModalityPath dg{"t", "t", {"d", "g"}};
  CellExpr dg_le_one = gen_cell(gu, "dg_le_one");
  TmPtr unbox_g = tm_open(one("t"), dg, ty_bool(), tm_mkbox(dg, tm_true()),
                          tm_var(0, dg_le_one));
  CHECK(ty_equal(cgu.infer(ctx_emp("t"), unbox_g), ty_bool()));

  // A dependent motive: the result type mentions the scrutinee.
  TyPtr box_bool = ty_modal(mu, ty_bool());
  TyPtr motive = ty_id(box_bool, tm_var(0, ident1("m")), tm_var(0, ident1("m")));
  TmPtr branch = tm_refl(tm_mkbox(mu, tm_var(0, CellExpr::ident(mu))));
  TmPtr scrut = tm_mkbox(mu, tm_true());
  TmPtr dep_open = tm_open(one("m"), mu, motive, scrut, branch);
  TyPtr dep_got = cco.infer(emp, dep_open);
  TyPtr dep_want = ty_id(box_bool, scrut, scrut);
  CHECK(ty_equiv(co, dep_got, dep_want));
  CHECK(rejection([&] { cco.check_ty(emp, dep_got, 1); }) == "");
}

// ---- subject reduction ----------------------------------------------------------

TEST_CASE("reducts check at the type of their redexes") {
  // Deterministic witnesses first.
  {
    const ModeTheory& tr = builtin_theory("trivial");
    Checker ck(tr);
    CtxPtr emp = ctx_emp("m");
    TmPtr redex = tm_app(one("m"), tm_lam(one("m"), tm_var(0, ident1("m"))), tm_true());
    TmPtr reduct = subst_top(tm_var(0, ident1("m")), tm_true(), one("m"), "m", emp);
    CHECK(rejection([&] { ck.check_tm(emp, redex, ty_bool()); }) == "");
    CHECK(rejection([&] { ck.check_tm(emp, reduct, ty_bool()); }) == "");
    CHECK(tm_equal(reduct, tm_true()));

    TmPtr prj = tm_proj(1, tm_pair(tm_true(), tm_false()));
    CHECK(rejection([&] { ck.check_tm(emp, prj, ty_bool()); }) == "");
    CHECK(ty_equal(ck.infer(emp, prj), ty_bool()));
  }

  // Randomized: function and pair redexes against their one-step reducts.
  int done = 0;
  for (const char* name : {"guarded", "walking_adjunction"}) {
    const ModeTheory& th = builtin_theory(name);
    gen::Gen g(th, 20260819);
    g.bidirectional = true;
    Checker ck(th);
    for (int i = 0; i < 60; ++i) {
      CtxPtr ctx = g.rand_wt_ctx(2);
      const std::string m = ctx_mode(ctx);
      ModalityPath mu = g.rand_path_into(m);
      TyPtr dom = g.coin() ? ty_bool() : ty_modal(g.rand_path_into(mu.src), ty_bool());
      TmPtr body = g.rand_wt_tm(ctx_extend(ctx, mu, dom), ty_bool(), 2);
      TmPtr arg = g.rand_wt_tm(ctx_lock(ctx, mu), dom, 2);
      TmPtr redex = tm_app(mu, tm_lam(mu, body), arg);
      TmPtr reduct = subst_top(body, arg, mu, m, ctx);
      INFO("theory: ", name, "\nctx: ", print_ctx(ctx), "\nredex: ", print_tm(redex));
      std::string r1 = rejection([&] { ck.check_tm(ctx, redex, ty_bool()); });
      std::string r2 = rejection([&] { ck.check_tm(ctx, reduct, ty_bool()); });
      CHECK(r1 == "");
      CHECK(r2 == "");

      TmPtr a0 = g.rand_wt_tm(ctx, ty_bool(), 1);
      TmPtr b0 = g.rand_wt_tm(ctx, ty_bool(), 1);
      int which = g.coin() ? 1 : 0;
      TmPtr prj = tm_proj(which, tm_pair(a0, b0));
      INFO("proj: ", print_tm(prj));
      std::string r3 = rejection([&] { ck.check_tm(ctx, prj, ty_bool()); });
      std::string r4 = rejection([&] { ck.check_tm(ctx, which ? b0 : a0, ty_bool()); });
      CHECK(r3 == "");
      CHECK(r4 == "");
      ++done;
    }
  }
  CHECK(done == 120);
}

// ---- lock towers ---------------------------------------------------------------

TEST_CASE("merged and split lock towers give identical verdicts") {
  int compared = 0;
  for (const char* name : {"trivial", "idempotent_comonad", "guarded", "walking_adjunction"}) {
    const ModeTheory& th = builtin_theory(name);
    Checker ck(th);
    std::vector<ModalityPath> paths = paths_upto(th, 3);
    for (const auto& p : paths) {
      if (p.is_identity()) continue;
      // Binder annotations: the identity and every single generator into p.dst.
      std::vector<ModalityPath> anns = {one(p.dst)};
      for (const auto& g1 : th.one_gens)
        if (g1.dst == p.dst) anns.push_back(ModalityPath{g1.src, g1.dst, {g1.name}});
      for (const auto& ann : anns) {
        CtxPtr base = ctx_extend(ctx_emp(p.dst), ann, ty_bool());
        // Non-parallel annotation/locks pairs admit no cell at all; the
        // checker must reject them on every tower without a search.
        FindCellResult found;
        if (ann.src == p.src) {
          found = find_cell(th, ann, p, 256);
          if (found.status == FindCellResult::Status::Exhausted) continue;
        }
        CellExpr cell = found.found() ? *found.cell : CellExpr::ident(ann);

        // The merged tower and every two-way split of the lock word.
        CtxPtr merged = raw_lock(base, p);
        std::vector<CtxPtr> towers = {merged};
        const std::size_t n = p.word.size();
        for (std::size_t k = 0; k <= n; ++k) {
          std::string mid;
          if (k == 0) {
            mid = p.dst;
          } else if (k == n) {
            mid = p.src;
          } else {
            mid = th.find_one_gen(p.word[k - 1])->src;
          }
          ModalityPath outer{mid, p.dst, {p.word.begin(), p.word.begin() + k}};
          ModalityPath inner{p.src, mid, {p.word.begin() + k, p.word.end()}};
          towers.push_back(raw_lock(raw_lock(base, outer), inner));
        }

        std::optional<std::string> verdict;
        for (const CtxPtr& tower : towers) {
          INFO("theory: ", name, "\ntower: ", print_ctx(tower), "\ncell: ", cell.str());
          std::string formed = rejection([&] { ck.check_ctx(tower, p.dst); });
          CHECK(formed == "");
          std::string r = rejection([&] { ck.infer(tower, tm_var(0, cell)); });
          if (found.found()) {
            TyPtr got;
            std::string r2 = rejection([&] { got = ck.infer(tower, tm_var(0, cell)); });
            CHECK(r2 == "");
            if (r2.empty()) CHECK(ty_equal(got, ty_bool()));
          }
          if (!verdict) {
            verdict = r;
          } else {
            CHECK(*verdict == r);
          }
          ++compared;
        }
        // No-cell cases must reject on every tower; found cells accept.
        if (!found.found()) CHECK(*verdict == "tm/var");
        if (found.found()) CHECK(*verdict == "");
      }
    }
  }
  CHECK(compared >= 100);
}

// ---- 2-cell reformulation --------------------------------------------------------

TEST_CASE("reformulated but equal 2-cells preserve the verdict") {
  const ModeTheory& th = builtin_theory("walking_adjunction");
  Checker ck(th);
  gen::Gen g(th, 77002);
  g.bidirectional = true;

  const auto* eta = th.find_two_gen("eta");
  REQUIRE(eta != nullptr);

  int base_ok = 0;
  int padded = 0;
  int broken = 0;
  const int iters = 300;
  for (int i = 0; i < iters; ++i) {
    CtxPtr ctx = g.rand_wt_ctx(4);
    TyPtr ty = g.rand_wt_ty(ctx_mode(ctx), 2);
    TmPtr t = g.rand_wt_tm(ctx, ty, 3);
    INFO("ctx: ", print_ctx(ctx), "\nty: ", print_ty(ty), "\ntm: ", print_tm(t));

    std::string base = rejection([&] { ck.check_tm(ctx, t, ty); });
    CHECK(base == "");
    if (!base.empty()) continue;
    ++base_ok;

    // Padding: reformulate every cell by identity laws; the verdict holds.
    int variant = i;
    TmPtr t_pad = map_cells(t, [&](const CellExpr& c) -> CellExpr {
      CellExpr out = c;
      switch (variant++ % 3) {
        case 0:
          out = CellExpr::vcomp(CellExpr::ident(c.src()), c);
          break;
        case 1:
          out = CellExpr::vcomp(c, CellExpr::ident(c.dst()));
          break;
        default:
          out = CellExpr::hcomp(c, CellExpr::ident(one(c.src().src)));
          break;
      }
      CHECK(eq_cell(th, out, c));
      ++padded;
      return out;
    });
    std::string pad = rejection([&] { ck.check_tm(ctx, t_pad, ty); });
    CHECK(pad == "");

    // Breaking: extend a cell's codomain by an eta loop where the boundary
    // allows; the 1-cell boundary changes, so the variable must be rejected.
    bool broke = false;
    TmPtr t_bad = map_cells(t, [&](const CellExpr& c) -> CellExpr {
      if (broke || c.dst().src != eta->src.dst) return c;
      broke = true;
      CellExpr loop = CellExpr::hcomp(CellExpr::ident(c.dst()),
                                      CellExpr::gen("eta", eta->src, eta->dst));
      return CellExpr::vcomp(c, loop);
    });
    if (broke) {
      ++broken;
      std::string bad = rejection([&] { ck.check_tm(ctx, t_bad, ty); });
      CHECK(bad == "tm/var");
    }
  }
  CHECK(base_ok == iters);
  CHECK(padded >= 100);
  CHECK(broken >= 25);
}

// ---- generated programs -----------------------------------------------------------

TEST_CASE("generated well-typed terms check in every builtin theory") {
  int accepted = 0;
  for (const std::string& name : builtin_theory_names()) {
    const ModeTheory& th = builtin_theory(name);
    gen::Gen g(th, 424243);
    g.bidirectional = true;
    Checker ck(th);
    for (int i = 0; i < 150; ++i) {
      CtxPtr ctx = g.rand_wt_ctx(2);
      TyPtr ty = g.rand_wt_ty(ctx_mode(ctx), 2);
      TmPtr t = g.rand_wt_tm(ctx, ty, 3);
      INFO("theory: ", name, "\nctx: ", print_ctx(ctx), "\nty: ", print_ty(ty),
           "\ntm: ", print_tm(t));
      std::string r = rejection([&] { ck.check_tm(ctx, t, ty); });
      CHECK(r == "");
      if (r.empty()) ++accepted;
    }
  }
  CHECK(accepted == 150 * static_cast<int>(builtin_theory_names().size()));
}

// ---- substitution formation --------------------------------------------------------

TEST_CASE("substitution formation follows the telescope structure") {
  const ModeTheory& tr = builtin_theory("trivial");
  const ModeTheory& co = builtin_theory("idempotent_comonad");
  const ModeTheory& gu = builtin_theory("guarded");
  Checker ctr(tr);
  Checker cco(co);
  Checker cgu(gu);

  CtxPtr emp = ctx_emp("m");
  CtxPtr g0 = ctx_extend(emp, one("m"), ty_bool());
  CtxPtr g1 = ctx_extend(g0, one("m"), ty_bool());

  CHECK(rejection([&] { ctr.check_sub(g0, sub_id(), g0); }) == "");
  CHECK(rejection([&] { ctr.check_sub(g0, sub_wk(), emp); }) == "");
  CHECK(rejection([&] { ctr.check_sub(emp, sub_emp(), emp); }) == "");
  CHECK(rejection([&] { ctr.check_sub(g0, sub_emp(), emp); }) == "");
  CHECK(rejection([&] {
          ctr.check_sub(emp, sub_ext(sub_id(), one("m"), emp, tm_true()), g0);
        }) == "");
  CHECK(rejection([&] { ctr.check_sub(g1, sub_lift(sub_wk(), one("m")), g0); }) == "");
  CHECK(rejection([&] { ctr.check_sub(g1, sub_comp(sub_wk(), sub_wk()), emp); }) == "");

  // Keys: the counit maps the telescope to itself seen under the lock.
  CellExpr eps = gen_cell(co, "eps");
  ModalityPath mu{"m", "m", {"mu"}};
  CtxPtr theta = ctx_extend(ctx_emp("m"), one("m"), ty_bool());
  CHECK(rejection([&] {
          cco.check_sub(theta, sub_key(eps, theta), ctx_lock(theta, mu));
        }) == "");

  // Lock congruence, including the erased lock over the empty telescope.
  ModalityPath l{"t", "t", {"l"}};
  CtxPtr t_emp = ctx_emp("t");
  CtxPtr t_bool = ctx_extend(t_emp, one("t"), ty_bool());
  SubPtr inst = sub_ext(sub_id(), one("t"), t_emp, tm_true());
  CHECK(rejection([&] {
          cgu.check_sub(ctx_lock(t_emp, l), sub_lock(inst, l), ctx_lock(t_bool, l));
        }) == "");

  // Negatives, one per rule.
  CHECK(rejection([&] { cgu.check_sub(ctx_emp("t"), sub_id(), ctx_emp("s")); }) ==
        "sub/mode");
  CHECK(rejection([&] { ctr.check_sub(emp, sub_emp(), g0); }) == "sub/emp");
  CHECK(rejection([&] { ctr.check_sub(emp, sub_id(), g0); }) == "sub/id");
  CHECK(rejection([&] { ctr.check_sub(emp, sub_wk(), emp); }) == "sub/wk");
  CHECK(rejection([&] { ctr.check_sub(g1, sub_wk(), g1); }) == "sub/wk");
  CHECK(rejection([&] {
          cgu.check_sub(t_emp, sub_ext(sub_id(), l, t_emp, tm_true()), t_bool);
        }) == "sub/ext");
  CHECK(rejection([&] {
          cco.check_sub(theta, std::make_shared<const SubNode>(SubNode{SubKey{eps, nullptr}}),
                        ctx_lock(theta, mu));
        }) == "sub/key");
  CHECK(rejection([&] {
          ctr.check_sub(emp, sub_comp(sub_wk(), sub_ext(sub_id(), one("m"), emp, tm_true())),
                        emp);
        }) == "sub/comp");

  // Randomized: generated substitutions check, except composites whose middle
  // telescope is not synthesizable from the written form.
  int accepted = 0;
  int total = 0;
  for (const char* name : {"guarded", "walking_adjunction"}) {
    const ModeTheory& th = builtin_theory(name);
    gen::Gen g(th, 90210);
    Checker ck(th);
    for (int i = 0; i < 120; ++i) {
      CtxPtr ctx = g.rand_wt_ctx(3);
      auto [d, s] = g.rand_wt_sub(ctx, 3);
      INFO("theory: ", name, "\ngamma: ", print_ctx(ctx), "\ndelta: ", print_ctx(d),
           "\nsub: ", print_sub(s));
      std::string r = rejection([&] { ck.check_sub(d, s, ctx); });
      CHECK((r == "" || r == "sub/comp"));
      ++total;
      if (r.empty()) ++accepted;
    }
  }
  CHECK(accepted >= total / 2);
}

// ---- explicit substitutions ---------------------------------------------------------

TEST_CASE("explicit substitutions check through their push") {
  const ModeTheory& tr = builtin_theory("trivial");
  const ModeTheory& co = builtin_theory("idempotent_comonad");
  Checker ctr(tr);
  Checker cco(co);

  CtxPtr g0 = ctx_extend(ctx_emp("m"), one("m"), ty_bool());
  CtxPtr g1 = ctx_extend(g0, one("m"), ty_bool());

  TmPtr weakened = tm_sub(tm_var(0, ident1("m")), sub_wk());
  CHECK(ty_equal(ctr.infer(g1, weakened), ty_bool()));

  TyPtr ty_w = ty_sub(ty_id(ty_bool(), tm_var(0, ident1("m")), tm_true()), sub_wk());
  CHECK(rejection([&] { ctr.check_ty(g1, ty_w, 1); }) == "");

  // A key acting on a variable: the counit composes onto its 2-cell.
  CellExpr eps = gen_cell(co, "eps");
  ModalityPath mu{"m", "m", {"mu"}};
  CtxPtr theta = ctx_extend(ctx_emp("m"), mu, ty_bool());
  TmPtr keyed = tm_sub(tm_var(0, CellExpr::ident(mu)), sub_key(eps, theta));
  CHECK(ty_equal(cco.infer(theta, keyed), ty_bool()));

  // A push that cannot be performed is a formation error.
  TmPtr stuck = tm_sub(tm_var(0, ident1("m")), sub_emp());
  CHECK(rejection([&] { ctr.check_tm(ctx_emp("m"), stuck, ty_bool()); }) == "tm/sub");
}

// ---- rejection table ----------------------------------------------------------------

TEST_CASE("curated ill-typed terms are rejected with their rules") {
  const ModeTheory& tr = builtin_theory("trivial");
  const ModeTheory& co = builtin_theory("idempotent_comonad");
  const ModeTheory& gu = builtin_theory("guarded");
  Checker ctr(tr);
  Checker cco(co);
  Checker cgu(gu);

  CtxPtr emp_m = ctx_emp("m");
  CtxPtr emp_t = ctx_emp("t");
  ModalityPath mu{"m", "m", {"mu"}};
  ModalityPath l{"t", "t", {"l"}};
  ModalityPath g_ts{"t", "s", {"g"}};
  CellExpr one_le_l = gen_cell(gu, "one_le_l");

  struct Row {
    std::string label;
    std::string want;
    std::string got;
  };
  std::vector<Row> rows;
  auto row = [&](const std::string& label, const std::string& want,
                 const std::function<void()>& run) {
    rows.push_back({label, want, rejection(run)});
  };

  row("unbound variable", "tm/var", [&] { ctr.infer(emp_m, tm_var(0, ident1("m"))); });
  row("cell starts off the annotation", "tm/var", [&] {
    cco.infer(ctx_extend(emp_m, one("m"), ty_bool()), tm_var(0, CellExpr::ident(mu)));
  });
  row("cell misses the locks", "tm/var", [&] {
    cco.infer(ctx_lock(ctx_extend(emp_m, one("m"), ty_bool()), mu),
              tm_var(0, ident1("m")));
  });
  row("cell points the wrong way", "tm/var", [&] {
    cgu.infer(ctx_extend(emp_t, l, ty_bool()), tm_var(0, one_le_l));
  });
  row("small universe is large", "tp/uni", [&] { ctr.check_ty(emp_m, ty_uni(0), 0); });
  row("no higher universes", "tp/uni", [&] { ctr.check_ty(emp_m, ty_uni(1), 1); });
  row("decoded types are small", "tp/el", [&] {
    ctr.check_ty(emp_m, ty_dec(tm_enc(ty_bool())), 1);
  });
  row("decoding needs a code", "conv", [&] { ctr.check_ty(emp_m, ty_dec(tm_true()), 0); });
  row("function type off-mode", "tp/pi", [&] {
    cgu.check_ty(emp_t, ty_pi(g_ts, ty_bool(), ty_bool()), 0);
  });
  row("boxed type off-mode", "tp/modal", [&] {
    cgu.check_ty(emp_t, ty_modal(g_ts, ty_bool()), 0);
  });
  row("boxed body off-mode", "tp/modal", [&] {
    ModalityPath d_st{"s", "t", {"d"}};
    cgu.check_ty(emp_t, ty_modal(d_st, ty_modal(d_st, ty_bool())), 0);
  });
  row("applying a non-function", "tm/app", [&] {
    ctr.infer(emp_m, tm_app(one("m"), tm_true(), tm_true()));
  });
  row("application modality mismatch", "tm/app", [&] {
    TmPtr f = tm_axiom("f", ty_pi(one("m"), ty_bool(), ty_bool()));
    cco.infer(emp_m, tm_app(mu, f, tm_true()));
  });
  row("argument type mismatch", "conv", [&] {
    TmPtr f = tm_axiom("f", ty_pi(one("m"), ty_bool(), ty_bool()));
    ctr.infer(emp_m, tm_app(one("m"), f, tm_enc(ty_bool())));
  });
  row("function literal at base type", "tm/lam", [&] {
    ctr.check_tm(emp_m, tm_lam(one("m"), tm_true()), ty_bool());
  });
  row("binder modality mismatch", "tm/lam", [&] {
    cco.check_tm(emp_m, tm_lam(mu, tm_true()), ty_pi(one("m"), ty_bool(), ty_bool()));
  });
  row("pair at function type", "tm/pair", [&] {
    ctr.check_tm(emp_m, tm_pair(tm_true(), tm_true()),
                 ty_pi(one("m"), ty_bool(), ty_bool()));
  });
  row("projection from a non-pair", "tm/proj", [&] {
    ctr.infer(emp_m, tm_proj(0, tm_true()));
  });
  row("box modality mismatch at its type", "tm/modal-intro", [&] {
    cco.check_tm(emp_m, tm_mkbox(one("m"), tm_true()), ty_modal(mu, ty_bool()));
  });
  row("box off-mode", "tm/modal-intro", [&] {
    cgu.infer(emp_t, tm_mkbox(g_ts, tm_true()));
  });
  row("frame off-mode", "tm/modal-elim", [&] {
    cgu.infer(emp_t, tm_open(g_ts, one("s"), ty_bool(), tm_mkbox(one("s"), tm_true()),
                             tm_var(0, ident1("t"))));
  });
  row("opening a non-box", "tm/modal-elim", [&] {
    ctr.infer(emp_m, tm_open(one("m"), one("m"), ty_bool(), tm_true(),
                             tm_var(0, ident1("m"))));
  });
  row("opened modality mismatch", "tm/modal-elim", [&] {
    cco.infer(emp_m, tm_open(one("m"), one("m"), ty_bool(), tm_mkbox(mu, tm_true()),
                             tm_var(0, ident1("m"))));
  });
  row("path recursion on a non-path", "tm/idrec", [&] {
    ctr.infer(emp_m, tm_idrec(ty_bool(), tm_true(), tm_true()));
  });
  row("refl at unequal endpoints", "tm/refl", [&] {
    ctr.check_tm(emp_m, tm_refl(tm_true()), ty_id(ty_bool(), tm_true(), tm_false()));
  });
  row("refl needs a path type", "tm/refl", [&] {
    ctr.check_tm(emp_m, tm_refl(tm_true()), ty_bool());
  });
  row("function literal synthesizes nothing", "not-inferable", [&] {
    ctr.infer(emp_m, tm_lam(one("m"), tm_true()));
  });
  row("pair synthesizes nothing", "not-inferable", [&] {
    ctr.infer(emp_m, tm_pair(tm_true(), tm_true()));
  });
  row("axiom types must be closed", "tm/var", [&] {
    ctr.infer(emp_m, tm_axiom("bad", ty_id(ty_bool(), tm_var(0, ident1("m")), tm_true())));
  });
  row("plain conversion mismatch", "conv", [&] {
    ctr.check_tm(emp_m, tm_true(), ty_sigma(ty_bool(), ty_bool()));
  });

  for (const Row& r : rows) {
    INFO("case: ", r.label);
    CHECK(r.got == r.want);
  }
  CHECK(rows.size() >= 25);
}

// ---- no proof of true = false ------------------------------------------------------

TEST_CASE("no builtin theory accepts a proof of true = false") {
  TyPtr absurd = ty_id(ty_bool(), tm_true(), tm_false());
  for (const std::string& name : builtin_theory_names()) {
    const ModeTheory& th = builtin_theory(name);
    Checker ck(th);
    for (const std::string& m : th.modes) {
      CtxPtr emp = ctx_emp(m);
      INFO("theory: ", name, " mode: ", m);

      CHECK(rejection([&] { ck.check_tm(emp, tm_refl(tm_true()), absurd); }) == "tm/refl");
      CHECK(rejection([&] { ck.check_tm(emp, tm_refl(tm_false()), absurd); }) == "tm/refl");

      // Computation cannot hide the mismatch behind an elimination.
      std::vector<TmPtr> attempts = {
          tm_refl(tm_boolrec(ty_bool(), tm_true(), tm_false(), tm_true())),
          tm_app(one(m), tm_lam(one(m), tm_refl(tm_true())), tm_true()),
          tm_sub(tm_refl(tm_true()), sub_id()),
          tm_proj(0, tm_pair(tm_refl(tm_true()), tm_true())),
          tm_idrec(absurd, tm_refl(tm_true()), tm_refl(tm_true())),
      };
      for (const TmPtr& t : attempts) {
        INFO("attempt: ", print_tm(t));
        CHECK(rejection([&] { ck.check_tm(emp, t, absurd); }) != "");
      }
    }
  }
}
