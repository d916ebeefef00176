#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "sigkern/opdef_file.hpp"

namespace sigkern {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(Errc::SyntaxError, "'" + key + "' wants true or false, got '" + v + "'");
}

OtherParKind kind_from_word(const std::string& w) {
  if (w == "int") return OtherParKind::Int;
  if (w == "float") return OtherParKind::Float;
  if (w == "string") return OtherParKind::String;
  if (w == "ints") return OtherParKind::IntList;
  if (w == "floats") return OtherParKind::FloatList;
  fail(Errc::SyntaxError, "unknown parameter kind '" + w + "'");
}

std::vector<OtherParDecl> parse_decls(const std::string& v, const std::string& key) {
  std::vector<OtherParDecl> out;
  for (const auto& item : split(v, ',')) {
    std::istringstream is(item);
    std::string kind, name;
    is >> kind >> name;
    if (name.empty()) {
      fail(Errc::SyntaxError, "'" + key + "' entry '" + item + "' wants KIND NAME");
    }
    out.push_back({name, kind_from_word(kind)});
  }
  return out;
}

// Reads from `pos` (just past the opening brace) to the matching close brace,
// skipping braces inside comments and string literals.
std::string read_fenced(const std::string& text, std::size_t& pos) {
  std::size_t start = pos;
  int depth = 1;
  bool in_str = false, in_line = false, in_block = false;
  while (pos < text.size()) {
    char c = text[pos];
    char n = pos + 1 < text.size() ? text[pos + 1] : '\0';
    if (in_line) {
      if (c == '\n') in_line = false;
    } else if (in_block) {
      if (c == '*' && n == '/') { in_block = false; ++pos; }
    } else if (in_str) {
      if (c == '\\') ++pos;
      else if (c == '"') in_str = false;
    } else if (c == '/' && n == '/') {
      in_line = true;
      ++pos;
    } else if (c == '/' && n == '*') {
      in_block = true;
      ++pos;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) {
        std::string body = text.substr(start, pos - start);
        ++pos;
        return body;
      }
    }
    ++pos;
  }
  fail(Errc::SyntaxError, "unterminated kernel body");
}

struct RawOp {
  std::string name;
  std::map<std::string, std::string> keys;     // scalar keys
  std::map<std::string, std::string> kernels;  // fenced bodies
};

const std::set<std::string> kKernelKeys = {
    "code",     "badcode",     "backcode", "badbackcode", "equivcpoffs",
    "redodimscode", "makecomp", "redodims"};
const std::set<std::string> kScalarKeys = {
    "pars",       "otherpars", "generictypes", "handlebad", "inplace",
    "reversible", "p2child",   "defaultflow",  "boundscheck", "comp"};

std::vector<RawOp> scan(const std::string& text) {
  std::vector<RawOp> ops;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::optional<std::string> {
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string line = trim(text.substr(pos, eol - pos));
      // a kernel key's brace may open on this line; handle before advancing
      if (!line.empty() && line[0] != '#') {
        pos = pos;  // caller advances via `pos`
        return line;
      }
      pos = eol + 1;
    }
    return std::nullopt;
  };

  while (true) {
    auto lineo = next_line();
    if (!lineo) break;
    std::string line = *lineo;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();

    if (line.rfind("op ", 0) != 0) {
      fail(Errc::SyntaxError, "expected 'op NAME', got '" + line + "'");
    }
    RawOp op;
    op.name = trim(line.substr(3));
    if (op.name.empty()) fail(Errc::SyntaxError, "op with no name");
    pos = eol + 1;

    bool closed = false;
    while (true) {
      auto inner = next_line();
      if (!inner) break;
      std::string l = *inner;
      std::size_t leol = text.find('\n', pos);
      if (leol == std::string::npos) leol = text.size();

      if (l == "end") {
        pos = leol + 1;
        closed = true;
        break;
      }
      std::size_t colon = l.find(':');
      std::size_t brace = l.find('{');
      std::string key = trim(l.substr(0, std::min(colon, brace)));
      if (brace != std::string::npos && (colon == std::string::npos || brace < colon)) {
        if (!kKernelKeys.count(key)) {
          fail(Errc::SyntaxError, "unknown kernel key '" + key + "' in op '" +
                                      op.name + "'");
        }
        if (op.kernels.count(key)) {
          fail(Errc::SyntaxError, "duplicate kernel '" + key + "' in op '" +
                                      op.name + "'");
        }
        std::size_t bpos = text.find('{', pos) + 1;
        op.kernels[key] = read_fenced(text, bpos);
        pos = bpos;
        continue;
      }
      if (colon == std::string::npos) {
        fail(Errc::SyntaxError, "expected 'key: value' or 'kernel {', got '" + l +
                                    "' in op '" + op.name + "'");
      }
      if (!kScalarKeys.count(key)) {
        fail(Errc::SyntaxError, "unknown key '" + key + "' in op '" + op.name + "'");
      }
      if (op.keys.count(key)) {
        fail(Errc::SyntaxError, "duplicate key '" + key + "' in op '" + op.name + "'");
      }
      std::string value = l.substr(colon + 1);
      if (std::size_t hash = value.find('#'); hash != std::string::npos) {
        value = value.substr(0, hash);  // trailing comment
      }
      op.keys[key] = trim(value);
      pos = leol + 1;
    }
    if (!closed) fail(Errc::SyntaxError, "op '" + op.name + "' missing 'end'");
    ops.push_back(std::move(op));
  }
  return ops;
}

OpDef build(const RawOp& raw) {
  OpDef def;
  def.name = raw.name;

  auto key = [&](const char* k) -> const std::string* {
    auto it = raw.keys.find(k);
    return it == raw.keys.end() ? nullptr : &it->second;
  };

  if (const auto* v = key("p2child")) def.p2child = parse_bool(*v, "p2child");
  const auto* pars = key("pars");
  if (def.p2child) {
    if (pars) {
      fail(Errc::SyntaxError, "op '" + def.name + "': p2child replaces pars");
    }
    def.sig = parse_signature("PARENT(); [oca]CHILD()");
  } else if (pars) {
    def.sig = parse_signature(*pars);
  } else {
    fail(Errc::SyntaxError, "op '" + def.name + "' has no pars");
  }
  validate_signature(def.sig);

  if (const auto* v = key("otherpars")) def.otherpars = parse_decls(*v, "otherpars");
  if (const auto* v = key("comp")) def.comp = parse_decls(*v, "comp");
  if (const auto* v = key("generictypes")) {
    std::string letters;
    for (const auto& item : split(*v, ',')) {
      if (item.size() != 1) {
        fail(Errc::UnknownTypeLetter, "bad generictypes entry '" + item + "'");
      }
      letters += item;
    }
    def.generictypes = GenericList::from_letters(letters);
  }
  if (const auto* v = key("handlebad")) {
    if (*v == "forbid") def.handlebad = HandleBad::Forbid;
    else if (*v == "ignore") def.handlebad = HandleBad::Ignore;
    else if (*v == "handle") def.handlebad = HandleBad::Handle;
    else fail(Errc::SyntaxError, "handlebad wants forbid/ignore/handle");
  }
  if (const auto* v = key("inplace")) {
    auto parts = split(*v, v->find(',') != std::string::npos ? ',' : ' ');
    std::vector<std::string> names;
    for (const auto& p : parts) {
      if (!p.empty()) names.push_back(p);
    }
    if (names.size() != 2) {
      fail(Errc::SyntaxError, "inplace wants two parameter names");
    }
    def.inplace = std::make_pair(names[0], names[1]);
  }
  if (const auto* v = key("reversible")) def.reversible = parse_bool(*v, "reversible");
  if (const auto* v = key("defaultflow")) {
    def.defaultflow = parse_bool(*v, "defaultflow");
  }
  if (def.p2child) def.defaultflow = true;
  if (const auto* v = key("boundscheck")) {
    def.boundscheck = parse_bool(*v, "boundscheck");
  }

  std::vector<std::string> comp_names = comp_names_of(def);
  auto kern = [&](const char* k, KernelContext ctx) -> std::optional<KernelAst> {
    auto it = raw.kernels.find(k);
    if (it == raw.kernels.end()) return std::nullopt;
    return parse_kernel(it->second, def.sig, comp_names, ctx);
  };
  def.code = kern("code", KernelContext::Code);
  def.badcode = kern("badcode", KernelContext::Code);
  def.backcode = kern("backcode", KernelContext::Code);
  def.badbackcode = kern("badbackcode", KernelContext::Code);
  def.equivcpoffs = kern("equivcpoffs", KernelContext::EquivCP);
  def.redodimscode = kern("redodimscode", KernelContext::RedoDims);
  def.makecomp = kern("makecomp", KernelContext::MakeComp);
  def.redodims = kern("redodims", KernelContext::FlowRedoDims);
  return def;
}

}  // namespace

std::vector<OpDef> parse_opdef_text(const std::string& text) {
  std::vector<OpDef> defs;
  for (const auto& raw : scan(text)) defs.push_back(build(raw));
  return defs;
}

std::vector<OpDef> parse_opdef_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::SyntaxError, "cannot open definitions file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_opdef_text(ss.str());
}

}  // namespace sigkern
