#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sigkern/array_io.hpp"
#include "sigkern/dataflow.hpp"
#include "sigkern/opdef_file.hpp"

using namespace sigkern;

namespace {

struct NameValue {
  std::string name;
  std::string value;
};

NameValue split_eq(const std::string& s, const char* what) {
  std::size_t eq = s.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw CLI::ValidationError(std::string(what) + " wants NAME=VALUE, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

Registry load_registry(const std::vector<std::string>& ops_files) {
  Registry r = Registry::with_corpus();
  for (const auto& path : ops_files) {
    for (auto& def : parse_opdef_file(path)) r.register_op(std::move(def));
  }
  return r;
}

OtherParValue parse_other(const OpDef& def, const std::string& name,
                          const std::string& text) {
  OtherParValue v;
  v.name = name;
  const OtherParDecl* decl = nullptr;
  for (const auto& d : def.otherpars) {
    if (d.name == name) decl = &d;
  }
  if (!decl) fail(Errc::BadOtherPar, "undeclared parameter '" + name + "'");
  v.kind = decl->kind;
  auto ints = [&](const std::string& t) { return std::stoll(t); };
  auto floats = [&](const std::string& t) { return std::stod(t); };
  switch (decl->kind) {
    case OtherParKind::Int: v.i = ints(text); break;
    case OtherParKind::Float: v.f = floats(text); break;
    case OtherParKind::String: v.s = text; break;
    case OtherParKind::IntList:
    case OtherParKind::FloatList: {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (decl->kind == OtherParKind::IntList) v.il.push_back(ints(item));
        else v.fl.push_back(floats(item));
      }
      break;
    }
  }
  return v;
}

int cmd_run(const std::vector<std::string>& ops_files, const std::string& op_name,
            const std::vector<std::string>& arg_specs,
            const std::vector<std::string>& other_specs, bool check_bounds) {
  Registry reg = load_registry(ops_files);
  const OpDef& def = reg.get(op_name);

  std::map<std::string, ArrayPtr> given;
  for (const auto& s : arg_specs) {
    auto [name, lit] = split_eq(s, "--arg");
    if (!def.sig.find(name)) {
      fail(Errc::UnknownParam, "op '" + op_name + "' has no parameter '" + name + "'");
    }
    given[name] = parse_array_literal(lit);
  }
  std::vector<OtherParValue> others;
  for (const auto& s : other_specs) {
    auto [name, text] = split_eq(s, "--other");
    others.push_back(parse_other(def, name, text));
  }

  if (def.defaultflow && !def.native_affine) {
    // dataflow op: connect the (single) input and read the child back
    ArrayPtr parent;
    std::string pname;
    for (const auto& p : def.sig.params) {
      if (!p.is_input()) continue;
      if (parent) fail(Errc::MissingInput, "dataflow run wants a single input");
      pname = p.name;
      auto it = given.find(p.name);
      if (it == given.end()) {
        fail(Errc::MissingInput, "input parameter '" + p.name + "' not supplied");
      }
      parent = it->second;
    }
    ArrayPtr child = connect(def, parent, others);
    make_physical(child);
    std::cout << format_array(*child) << "\n";
    return 0;
  }

  std::vector<ArrayPtr> args;
  for (const auto& p : def.sig.params) {
    auto it = given.find(p.name);
    args.push_back(it == given.end() ? NdArray::make_null() : it->second);
  }
  RunOptions opts;
  opts.check_bounds = check_bounds;
  auto outputs = run_op(def, args, others, opts);
  for (const auto& out : outputs) std::cout << format_array(*out) << "\n";
  return 0;
}

int cmd_expand(const std::vector<std::string>& ops_files, const std::string& op_name,
               const std::string& type_name, bool bad, bool check_bounds) {
  Registry reg = load_registry(ops_files);
  const OpDef& def = reg.get(op_name);
  Dtype t = dtype_from_name(type_name);
  if (!def.generictypes.contains(t)) {
    fail(Errc::TypeNotInGenericList, "op '" + op_name + "' is not compiled for " +
                                         type_name + " (types " +
                                         def.generictypes.to_letters() + ")");
  }
  const std::optional<KernelAst>* kernel = bad ? &def.badcode : &def.code;
  if (!kernel->has_value()) {
    fail(bad ? Errc::NoBadVariant : Errc::KernelValidationError,
         "op '" + op_name + "' has no " + (bad ? "BadCode" : "Code"));
  }
  std::cout << expand_kernel(**kernel, def.sig, t, bad ? Variant::Bad : Variant::Good,
                             check_bounds || def.boundscheck);
  return 0;
}

std::vector<std::int64_t> parse_shape(const std::string& text) {
  std::string s = text;
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    fail(Errc::SyntaxError, "shape wants [d0,d1,...], got '" + s + "'");
  }
  std::vector<std::int64_t> dims;
  std::stringstream ss(s.substr(1, s.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) dims.push_back(std::stoll(item));
  }
  return dims;
}

int cmd_plan(const std::vector<std::string>& ops_files, const std::string& op_name,
             const std::string& shapes) {
  Registry reg = load_registry(ops_files);
  const OpDef& def = reg.get(op_name);

  std::map<std::string, std::vector<std::int64_t>> shape_of;
  std::stringstream ss(shapes);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    auto [name, sh] = split_eq(item, "--shapes entry");
    if (!def.sig.find(name)) {
      fail(Errc::UnknownParam, "op '" + op_name + "' has no parameter '" + name + "'");
    }
    shape_of[name] = parse_shape(sh);
  }

  std::vector<ArrayPtr> args;
  for (const auto& p : def.sig.params) {
    auto it = shape_of.find(p.name);
    if (it == shape_of.end()) {
      args.push_back(NdArray::make_null());
    } else {
      args.push_back(NdArray::new_filled(Dtype::Double, it->second, Value::of_int(0)));
    }
  }
  BroadcastPlan plan = make_plan(def, args);

  auto shape_text = [](const std::vector<std::int64_t>& dims) {
    std::string out = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(dims[i]);
    }
    return out + "]";
  };

  std::cout << "generic: " << dtype_name(plan.generic) << "\n";
  for (const auto& [name, sz] : plan.dim_sizes) {
    std::cout << "dim " << name << " = " << sz << "\n";
  }
  std::cout << "thread dims: " << shape_text(plan.thread_dims) << "\n";
  for (std::size_t i = 0; i < def.sig.params.size(); ++i) {
    const ParamSpec& ps = def.sig.params[i];
    const ParamPlan& pp = plan.params[i];
    std::cout << (ps.is_output() ? "out " : ps.is_temp() ? "tmp " : "arg ")
              << ps.name << ": dtype " << dtype_name(pp.exec_dtype);
    if (pp.autocreate && !ps.is_input()) {
      std::cout << " dims " << shape_text(pp.create_dims);
    }
    std::cout << " strides{";
    bool first = true;
    for (const auto& [dn, st] : pp.active_strides) {
      if (!first) std::cout << " ";
      std::cout << dn << "=" << st;
      first = false;
    }
    std::cout << "} thread" << shape_text(pp.thread_strides) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signature-driven array kernel engine"};
  app.require_subcommand(1);

  std::vector<std::string> ops_files;
  std::string op_name, type_name = "double", shapes;
  std::vector<std::string> arg_specs, other_specs;
  bool bad = false, check_bounds = false;

  auto* run = app.add_subcommand("run", "run an operator on array literals");
  run->add_option("--ops", ops_files, "extra operator definition files");
  run->add_option("--op", op_name, "operator name")->required();
  run->add_option("--arg", arg_specs, "parameter value as name=LITERAL");
  run->add_option("--other", other_specs, "scalar parameter as name=VALUE");
  run->add_flag("--check-bounds", check_bounds, "enable offset bounds checks");

  auto* expand = app.add_subcommand("expand", "print the lowered kernel text");
  expand->add_option("--ops", ops_files, "extra operator definition files");
  expand->add_option("--op", op_name, "operator name")->required();
  expand->add_option("--type", type_name, "element type name");
  expand->add_flag("--bad", bad, "expand the bad-value variant");
  expand->add_flag("--check-bounds", check_bounds, "enable offset bounds checks");

  auto* plan = app.add_subcommand("plan", "print the broadcast plan for shapes");
  plan->add_option("--ops", ops_files, "extra operator definition files");
  plan->add_option("--op", op_name, "operator name")->required();
  plan->add_option("--shapes", shapes, "semicolon list of name=[d0,d1,...]")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(run)) {
      return cmd_run(ops_files, op_name, arg_specs, other_specs, check_bounds);
    }
    if (app.got_subcommand(expand)) {
      return cmd_expand(ops_files, op_name, type_name, bad, check_bounds);
    }
    return cmd_plan(ops_files, op_name, shapes);
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
