#include "sigkern/signature.hpp"

#include <cctype>
#include <map>

namespace sigkern {

const char* flag_name(ParamFlag f) {
  switch (f) {
    case ParamFlag::Io: return "io";
    case ParamFlag::Nc: return "nc";
    case ParamFlag::O: return "o";
    case ParamFlag::Oca: return "oca";
    case ParamFlag::T: return "t";
    case ParamFlag::Phys: return "phys";
  }
  return "?";
}

const ParamSpec* Signature::find(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

int Signature::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      fail(Errc::SyntaxError, std::string("expected '") + c + "' at position " +
                                  std::to_string(pos) + " in signature");
    }
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
      ++pos;
    }
    if (pos == start) {
      fail(Errc::SyntaxError,
           "expected identifier at position " + std::to_string(pos) + " in signature");
    }
    return s.substr(start, pos - start);
  }
  std::int64_t integer() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) {
      fail(Errc::SyntaxError,
           "expected integer at position " + std::to_string(pos) + " in signature");
    }
    return std::stoll(s.substr(start, pos - start));
  }
};

bool is_dtype_name(const std::string& w) {
  static const char* names[] = {"byte", "short",    "ushort", "int",
                                "indx", "longlong", "float",  "double"};
  for (auto* n : names) {
    if (w == n) return true;
  }
  return false;
}

ParamFlag parse_flag(const std::string& w) {
  if (w == "io") return ParamFlag::Io;
  if (w == "nc") return ParamFlag::Nc;
  if (w == "o") return ParamFlag::O;
  if (w == "oca") return ParamFlag::Oca;
  if (w == "t") return ParamFlag::T;
  if (w == "phys") return ParamFlag::Phys;
  fail(Errc::UnknownFlag, "unknown parameter flag '" + w + "'");
}

void check_flags(const ParamSpec& p) {
  if (p.has(ParamFlag::T) &&
      (p.has(ParamFlag::O) || p.has(ParamFlag::Oca) || p.has(ParamFlag::Io) ||
       p.has(ParamFlag::Nc))) {
    fail(Errc::ConflictingFlags,
         "parameter '" + p.name + "': t excludes o/oca/io/nc");
  }
  if (p.has(ParamFlag::O) && p.has(ParamFlag::Oca)) {
    fail(Errc::ConflictingFlags,
         "parameter '" + p.name + "': o and oca are mutually exclusive");
  }
}

}  // namespace

Signature parse_signature(const std::string& text) {
  Cursor c{text};
  Signature sig;

  // First pass collects raw (pre-rename) dim occurrence lists per parameter.
  struct RawParam {
    ParamSpec spec;
    std::vector<std::pair<std::string, std::optional<std::int64_t>>> raw_dims;
  };
  std::vector<RawParam> raw;

  while (!c.eof()) {
    RawParam rp;
    bool have_name = false;
    // optional dtype, optional flag block, then the name
    if (c.peek() != '[') {
      std::string word = c.ident();
      if (is_dtype_name(word)) {
        rp.spec.forced_dtype = dtype_from_name(word);
        if (c.accept('+')) rp.spec.plus_flag = true;
      } else {
        rp.spec.name = word;
        have_name = true;
      }
    }
    if (!have_name && c.peek() == '[') {
      c.expect('[');
      do {
        rp.spec.flags.insert(parse_flag(c.ident()));
      } while (c.accept(','));
      c.expect(']');
    }
    if (!have_name) rp.spec.name = c.ident();
    if (c.peek() == '(') {
      c.expect('(');
      if (!c.accept(')')) {
        do {
          std::string dname = c.ident();
          std::optional<std::int64_t> fixed;
          if (c.accept('=')) {
            std::int64_t n = c.integer();
            if (n < 1) {
              fail(Errc::SyntaxError, "fixed dim size must be >= 1 in '" +
                                          rp.spec.name + "(" + dname + "=...)'");
            }
            fixed = n;
          }
          rp.raw_dims.emplace_back(dname, fixed);
        } while (c.accept(','));
        c.expect(')');
      }
    }
    raw.push_back(std::move(rp));
    if (!c.accept(';')) break;
  }
  if (!c.eof()) {
    fail(Errc::SyntaxError,
         "trailing text at position " + std::to_string(c.pos) + " in signature");
  }
  if (raw.empty()) fail(Errc::SyntaxError, "signature declares no parameters");

  // Square detection: a dim name repeated within any one parameter is
  // renamed name0, name1, ... in every parameter, left to right.
  std::set<std::string> square;
  for (const auto& rp : raw) {
    std::map<std::string, int> counts;
    for (const auto& [dname, fixed] : rp.raw_dims) counts[dname]++;
    for (const auto& [dname, n] : counts) {
      if (n > 1) square.insert(dname);
    }
  }

  for (auto& rp : raw) {
    std::map<std::string, int> seen;
    for (const auto& [dname, fixed] : rp.raw_dims) {
      DimRef d;
      d.fixed_size = fixed;
      if (square.count(dname)) {
        int k = seen[dname]++;
        d.name = dname + std::to_string(k);
        d.rename_index = k;
      } else {
        d.name = dname;
      }
      rp.spec.active_dims.push_back(std::move(d));
    }
    check_flags(rp.spec);
    for (const auto& existing : sig.params) {
      if (existing.name == rp.spec.name) {
        fail(Errc::DuplicateParam, "parameter '" + rp.spec.name + "' repeats");
      }
    }
    for (const auto& d : rp.spec.active_dims) sig.dim_names.insert(d.name);
    sig.params.push_back(std::move(rp.spec));
  }
  if (sig.params.empty()) fail(Errc::SyntaxError, "signature declares no parameters");
  return sig;
}

void validate_signature(const Signature& s) {
  std::map<std::string, std::int64_t> fixed;
  bool any_non_temp = false;
  for (const auto& p : s.params) {
    check_flags(p);
    if (!p.is_temp()) any_non_temp = true;
    if (p.plus_flag && !p.forced_dtype) {
      fail(Errc::ConflictingFlags, "'+' without a forced type on '" + p.name + "'");
    }
    std::set<std::string> names_here;
    for (const auto& d : p.active_dims) {
      if (!names_here.insert(d.name).second) {
        fail(Errc::SyntaxError,
             "dim '" + d.name + "' repeats within parameter '" + p.name + "'");
      }
      if (d.fixed_size) {
        auto [it, inserted] = fixed.emplace(d.name, *d.fixed_size);
        if (!inserted && it->second != *d.fixed_size) {
          fail(Errc::ConflictingFixedSize,
               "dim '" + d.name + "' fixed to both " + std::to_string(it->second) +
                   " and " + std::to_string(*d.fixed_size));
        }
      }
    }
  }
  if (!any_non_temp) {
    fail(Errc::AllTemporaries, "signature has only temporary parameters");
  }
}

std::string format_signature(const Signature& s) {
  std::string out;
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    const auto& p = s.params[i];
    if (i) out += "; ";
    if (p.forced_dtype) {
      out += dtype_name(*p.forced_dtype);
      if (p.plus_flag) out += '+';
      out += ' ';
    }
    if (!p.flags.empty()) {
      out += '[';
      bool first = true;
      for (ParamFlag f : p.flags) {
        if (!first) out += ',';
        out += flag_name(f);
        first = false;
      }
      out += ']';
    }
    out += p.name;
    out += '(';
    for (std::size_t k = 0; k < p.active_dims.size(); ++k) {
      const auto& d = p.active_dims[k];
      if (k) out += ',';
      // emit the pre-rename spelling so square dims round-trip
      if (d.rename_index) {
        out += d.name.substr(0, d.name.size() - std::to_string(*d.rename_index).size());
      } else {
        out += d.name;
      }
      if (d.fixed_size) out += '=' + std::to_string(*d.fixed_size);
    }
    out += ')';
  }
  return out;
}

}  // namespace sigkern
