#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "sigkern/array_io.hpp"

namespace sigkern {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Value parse_number(const std::string& tok, Dtype t) {
  if (is_float_dtype(t)) {
    if (tok == "nan" || tok == "-nan") return Value::of_float(std::nan(""));
    if (tok == "inf") return Value::of_float(HUGE_VAL);
    if (tok == "-inf") return Value::of_float(-HUGE_VAL);
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (!end || *end != '\0') {
      fail(Errc::SyntaxError, "bad numeric value '" + tok + "'");
    }
    return Value::of_float(v);
  }
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (!end || *end != '\0') {
    fail(Errc::SyntaxError, "bad integer value '" + tok + "'");
  }
  return Value::of_int(v);
}

}  // namespace

std::string format_value(const Value& v, Dtype t) {
  if (is_float_dtype(t)) return fmt_double(v.as_double());
  return std::to_string(v.as_int());
}

ArrayPtr parse_array_literal(const std::string& text) {
  std::string s = trimmed(text);
  if (s == "null") return NdArray::make_null();

  std::size_t lb = s.find('[');
  std::size_t rb = s.find(']');
  std::size_t lc = s.find('{');
  if (lb == std::string::npos || rb == std::string::npos ||
      lc == std::string::npos || s.back() != '}' || rb > lc) {
    fail(Errc::SyntaxError, "array literal wants dtype[dims]{values}");
  }
  Dtype t = dtype_from_name(trimmed(s.substr(0, lb)));

  std::vector<std::int64_t> dims;
  std::string dimtext = trimmed(s.substr(lb + 1, rb - lb - 1));
  if (!dimtext.empty()) {
    std::size_t p = 0;
    while (p < dimtext.size()) {
      std::size_t comma = dimtext.find(',', p);
      std::string d = trimmed(dimtext.substr(p, comma - p));
      char* end = nullptr;
      long long v = std::strtoll(d.c_str(), &end, 10);
      if (!end || *end != '\0' || v < 0) {
        fail(Errc::SyntaxError, "bad dim '" + d + "' in array literal");
      }
      dims.push_back(v);
      if (comma == std::string::npos) break;
      p = comma + 1;
    }
  }

  std::vector<std::string> toks;
  {
    std::string vals = s.substr(lc + 1, s.size() - lc - 2);
    std::string cur;
    for (char c : vals) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) toks.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) toks.push_back(cur);
  }

  std::int64_t want = product_of_dims(dims);
  if (static_cast<std::int64_t>(toks.size()) != want) {
    fail(Errc::CountMismatch, "array literal has " + std::to_string(toks.size()) +
                                  " values for " + std::to_string(want) + " slots");
  }

  auto a = std::make_shared<NdArray>();
  a->allocate(t, dims);
  bool any_bad = false;
  for (std::int64_t i = 0; i < want; ++i) {
    if (toks[i] == "BAD") {
      a->set_elem_bad(i);
      any_bad = true;
    } else {
      a->set_elem_unchecked(i, parse_number(toks[i], t));
    }
  }
  if (any_bad) a->set_badflag(true);
  return a;
}

std::string format_array(const NdArray& a) {
  if (a.is_null()) return "null";
  std::string out = dtype_name(a.dtype());
  out += '[';
  for (std::size_t k = 0; k < a.dims().size(); ++k) {
    if (k) out += ',';
    out += std::to_string(a.dims()[k]);
  }
  out += "]{";
  std::vector<std::int64_t> idx(a.dims().size(), 0);
  for (std::int64_t i = 0; i < a.nvals(); ++i) {
    std::int64_t off = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) off += idx[k] * a.dimincs()[k];
    if (i) out += ' ';
    if (a.badflag() && a.elem_is_bad(off)) {
      out += "BAD";
    } else {
      out += format_value(a.get_elem_unchecked(off), a.dtype());
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (++idx[k] < a.dims()[k]) break;
      idx[k] = 0;
    }
  }
  out += '}';
  return out;
}

}  // namespace sigkern
