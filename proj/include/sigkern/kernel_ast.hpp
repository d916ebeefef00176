#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sigkern/signature.hpp"

namespace sigkern {

struct Expr;
struct Stmt;
using ExprPtr = std::shared_ptr<Expr>;
using StmtPtr = std::shared_ptr<Stmt>;

enum class BinOp {
  Add, Sub, Mul, Div, Mod, Pow,
  Lt, Gt, Le, Ge, Eq, Ne,
  LAnd, LOr,
  BAnd, BOr, BXor, Shl, Shr,
};

enum class UnOp { Neg, Pos, LNot, BNot };

enum class TypeSpecKind { Generic, Named };

struct TypeSpec {
  TypeSpecKind kind = TypeSpecKind::Generic;
  Dtype named = Dtype::Double;
};

// $p(d => expr, ...): one explicit dim binding
struct DimBinding {
  std::string dim;
  ExprPtr index;
};

enum class ExprKind {
  IntLit,
  FloatLit,
  NanLit,
  Ident,
  ParamAccess,  // $p(bindings)
  SizeOf,       // $SIZE(d)
  CompRef,      // $COMP(x)
  MetaRef,      // $PDL(p)->ndims / ->dims(i), $PARENT(ndims), $CHILD(dims[i]), ...
  TypeSwitch,   // $T<letters>(alt, ...)
  Call,
  Unary,
  Binary,
  Ternary,
  Assign,       // also usable as a statement; op in {=, +=, -=, *=, /=}
  IncDec,
  Cast,         // (type) expr with type in {$GENERIC(), dtype name}
  IsBad,        // $ISBAD(pa) / $ISBADVAR(v, p)
  IsGood,
  SetBadVar,    // $SETBADVAR(v, p): expression-position store of p's bad value
};

struct Expr {
  ExprKind kind;

  std::int64_t ival = 0;            // IntLit
  double fval = 0;                  // FloatLit
  std::string name;                 // Ident / param name / dim / comp / call
  std::vector<DimBinding> bindings; // ParamAccess
  std::string meta_field;           // MetaRef: ndims, dims, dimincs, datatype
  ExprPtr index;                    // MetaRef subscript
  std::string letters;              // TypeSwitch
  std::vector<ExprPtr> args;        // TypeSwitch alternatives / Call args
  UnOp unop = UnOp::Neg;
  BinOp binop = BinOp::Add;
  ExprPtr a, b, c;                  // operands; Assign: a = target, b = value
  std::string assign_op;            // Assign
  bool prefix = false;              // IncDec
  bool increment = false;           // IncDec: ++ vs --
  TypeSpec cast_type;               // Cast
  std::string var;                  // IsBad/IsGood/SetBadVar var form: C variable
};

enum class StmtKind {
  Declare,
  ExprStmt,
  If,
  For,
  While,
  DoWhile,
  Block,
  LoopOver,    // loop(d) %{ ... %}
  ThreadLoop,  // threadloop %{ ... %}
  SetBad,      // $SETBAD(pa);
  StateSetBad,   // $PDLSTATESETBAD(p);
  StateSetGood,  // $PDLSTATESETGOOD(p);
  SetNdims,    // $SETNDIMS(expr);
  SetDims,     // $SETDIMS();
  DoCompDims,  // $DOCOMPDIMS(); accepted, no effect
  Empty,
};

struct Stmt {
  StmtKind kind;

  TypeSpec decl_type;                                   // Declare
  std::vector<std::pair<std::string, ExprPtr>> decls;   // Declare
  ExprPtr e;        // ExprStmt; If/While/DoWhile cond; SetNdims arg; SetBad target
  StmtPtr init;     // For
  ExprPtr cond;     // For
  ExprPtr step;     // For
  std::vector<StmtPtr> body;
  std::vector<StmtPtr> else_body;
  std::string dim;    // LoopOver
  std::string param;  // StateSetBad/StateSetGood
};

struct KernelAst {
  std::vector<StmtPtr> statements;
  // names of C variables declared anywhere in the kernel (filled by the parser)
  std::vector<std::string> declared_vars;
};

// Which macro dialect is legal in a given code block.
enum class KernelContext {
  Code,       // Code/BadCode/BackCode: element access, loops, bad macros
  RedoDims,   // RedoDimsCode: $SIZE write-only, $PDL meta reads, no loops
  MakeComp,   // MakeComp: $COMP stores, otherpars, no element access
  FlowRedoDims,  // dataflow RedoDims: $PARENT/$CHILD meta, $SETNDIMS/$SETDIMS
  EquivCP,    // EquivCPOffsCode: $EquivCPOffs/$EquivCPTrunc pair emission
};

// Statement-position macros only valid in some contexts are additionally
// modeled as calls so one grammar serves all blocks:
//   $EquivCPOffs(pi, ci)      -> Call "EquivCPOffs"
//   $EquivCPTrunc(pi, ci, ob) -> Call "EquivCPTrunc"
KernelAst parse_kernel(const std::string& text, const Signature& sig,
                       const std::vector<std::string>& otherpars,
                       KernelContext ctx = KernelContext::Code);

// Canonical text form; parsing it back yields a structurally equal AST, and
// formatting that is byte-identical (fixed point after one round).
std::string format_kernel(const KernelAst& k);
std::string format_expr(const Expr& e);

enum class Variant { Good, Bad };

// Deterministic lowered loop-nest text for one (generic, variant) pair.
std::string expand_kernel(const KernelAst& k, const Signature& sig, Dtype generic,
                          Variant variant, bool bounds);

}  // namespace sigkern
