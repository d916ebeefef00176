#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigkern/kernel_ast.hpp"

namespace sigkern {

enum class HandleBad { Forbid, Ignore, Handle };

enum class OtherParKind { Int, Float, String, IntList, FloatList };

struct OtherParDecl {
  std::string name;
  OtherParKind kind = OtherParKind::Int;
};

struct OtherParValue {
  std::string name;
  OtherParKind kind = OtherParKind::Int;
  std::int64_t i = 0;
  double f = 0;
  std::string s;
  std::vector<std::int64_t> il;
  std::vector<double> fl;
};

struct OpDef {
  std::string name;
  Signature sig;
  std::vector<OtherParDecl> otherpars;
  GenericList generictypes;

  std::optional<KernelAst> code;
  std::optional<KernelAst> badcode;
  HandleBad handlebad = HandleBad::Ignore;
  std::optional<std::pair<std::string, std::string>> inplace;
  std::optional<KernelAst> redodimscode;
  bool boundscheck = false;

  // dataflow
  bool defaultflow = false;
  bool p2child = false;
  bool reversible = false;
  std::optional<KernelAst> backcode;
  std::optional<KernelAst> badbackcode;
  std::optional<KernelAst> equivcpoffs;
  std::optional<KernelAst> makecomp;
  std::optional<KernelAst> redodims;
  std::vector<OtherParDecl> comp;

  // built-in affine view op (slice); bypasses kernels entirely
  bool native_affine = false;
};

std::vector<std::string> comp_names_of(const OpDef& def);

}  // namespace sigkern
