#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sigkern/dtype.hpp"

namespace sigkern {

// One active dimension of a parameter, after square-dim renaming. A dim
// name that repeats within some parameter (a "square" dim) is renamed
// n -> n0, n1, ... left to right, consistently across all parameters.
struct DimRef {
  std::string name;                      // post-renaming name (n, n0, n1, ...)
  std::optional<std::int64_t> fixed_size;  // from "n=3" in the signature
  std::optional<int> rename_index;       // set when this is a square copy
};

enum class ParamFlag { Io, Nc, O, Oca, T, Phys };

struct ParamSpec {
  std::string name;
  std::set<ParamFlag> flags;
  std::optional<Dtype> forced_dtype;
  bool plus_flag = false;  // "type+": at-least semantics
  std::vector<DimRef> active_dims;

  bool has(ParamFlag f) const { return flags.count(f) != 0; }
  bool is_output() const { return has(ParamFlag::O) || has(ParamFlag::Oca) || has(ParamFlag::Io); }
  bool is_temp() const { return has(ParamFlag::T); }
  // true when the engine must be given this parameter at call time
  bool is_input() const {
    return !is_temp() && !has(ParamFlag::O) && !has(ParamFlag::Oca);
  }
};

struct Signature {
  std::vector<ParamSpec> params;
  std::set<std::string> dim_names;  // all active-dim names after renaming

  const ParamSpec* find(const std::string& name) const;
  int index_of(const std::string& name) const;  // -1 when absent
};

// Parses the signature grammar:
//   sig   := param (';' param)* [';']
//   param := [dtype ['+']] ['[' flags ']'] name [ '(' [dim (',' dim)*] ')' ]
//   dim   := ident ['=' int]
// A parameter with no parenthesis group has zero active dims.
Signature parse_signature(const std::string& text);

// Flag exclusions, fixed-size agreement, at-least-one-non-temporary.
void validate_signature(const Signature& s);

// Canonical text form; parse_signature(format_signature(s)) is structurally
// equal to s.
std::string format_signature(const Signature& s);

const char* flag_name(ParamFlag f);

}  // namespace sigkern
