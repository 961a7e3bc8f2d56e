#pragma once

#include <string>

#include "mtt/mode_theory.hpp"

namespace mtt {

// Textual format for mode theories:
//
//   theory guarded            -- optional header line
//   modes: t s
//   gens:
//     l : t -> t
//     g : t -> s
//     d : s -> t
//   eq:
//     g.d = 1@s
//     g.l = g
//   leq:                      -- presence of leq items makes the theory a poset
//     dg_le_one : d.g <= 1@t  -- the name is optional
//     one_le_l  : 1@t <= l
//
// General (non-poset) theories declare named 2-cell generators instead:
//
//   cells:
//     eta : 1@m => mu.nu
//     eps : nu.mu => 1@n
//
// "--" starts a comment. A theory may declare leq items or cells items, not
// both. The format carries no equations between 2-cells, so a general
// theory loaded from a file has free 2-cells modulo interchange; the
// builtin walking_adjunction additionally knows its triangle identities.
ModeTheory parse_theory(const std::string& text, const std::string& filename = "<theory>");
ModeTheory load_theory_file(const std::string& path);
std::string print_theory(const ModeTheory& th);

// Well-formedness: distinct names, declared modes, chained boundaries,
// parallel equation sides. Throws BoundaryMismatch / Error.
void validate_theory(const ModeTheory& th);

// A builtin name or a path to a theory file.
ModeTheory resolve_theory(const std::string& name_or_path);

}  // namespace mtt
