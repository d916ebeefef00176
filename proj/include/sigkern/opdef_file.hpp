#pragma once

#include "sigkern/opdef.hpp"

namespace sigkern {

// Parses operator definitions from the line-oriented format:
//
//   op NAME
//     pars: a(); b(); [o]c()
//     otherpars: int max_it, float scale
//     generictypes: F,D
//     handlebad: handle
//     inplace: a c
//     reversible: true
//     p2child: true
//     defaultflow: true
//     boundscheck: true
//     code { ... }
//     badcode { ... }  backcode { ... }  badbackcode { ... }
//     equivcpoffs { ... }  redodimscode { ... }  makecomp { ... }  redodims { ... }
//   end
//
// '#' starts a comment outside kernel bodies. Kernel bodies run to the
// matching close brace (comment- and string-aware).
std::vector<OpDef> parse_opdef_text(const std::string& text);
std::vector<OpDef> parse_opdef_file(const std::string& path);

}  // namespace sigkern
