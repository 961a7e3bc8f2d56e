#pragma once

#include <string>

#include "mtt/core_syntax.hpp"

namespace mtt {

// S-expression syntax for kernel objects. Paths print as atoms ("g.d",
// "1@t"), cells as quoted strings in the cell-expression syntax ("(eps;1(mu))").
//
//   types  Bool | (U n) | (El M) | (Lift A) | (Id A M N) | (Pi p A B)
//          | (Sigma A B) | (Mod p A) | (tysub A S)
//   terms  true | false | (var k "cell") | (boolrec A t f s) | (refl M)
//          | (idrec A r s) | (code A) | (lam p M) | (app p M N) | (pair M N)
//          | (fst M) | (snd M) | (box p M) | (open p q A s b)
//          | (axiom name A) | (tmsub M S)
//   subs   emp | id | wk | (comp S T) | (lock p S) | (key "cell" [G])
//          | (ext S p M) | (ext S p G M)
//   ctxs   (emp m) | (lock p G) | (cons p A G)

std::string print_tm(const TmPtr& t);
std::string print_ty(const TyPtr& a);
std::string print_sub(const SubPtr& s);
std::string print_ctx(const CtxPtr& g);

TmPtr parse_tm(const ModeTheory& th, const std::string& text);
TyPtr parse_ty(const ModeTheory& th, const std::string& text);
SubPtr parse_sub(const ModeTheory& th, const std::string& text);
CtxPtr parse_ctx(const ModeTheory& th, const std::string& text);

}  // namespace mtt
