#pragma once

#include "sigkern/ndarray.hpp"

namespace sigkern {

// Textual array form: `dtype[d0,d1,...]{v v v ...}` with values in storage
// order (dim 0 fastest), `BAD` marking bad slots (sets the badflag), and the
// bare token `null`. A scalar is `dtype[]{v}`.
ArrayPtr parse_array_literal(const std::string& text);
std::string format_array(const NdArray& a);

std::string format_value(const Value& v, Dtype t);

}  // namespace sigkern
