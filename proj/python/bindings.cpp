#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sigkern/array_io.hpp"
#include "sigkern/dataflow.hpp"
#include "sigkern/opdef_file.hpp"

namespace py = pybind11;
using namespace sigkern;

namespace {

Registry& reg() {
  static Registry r = Registry::with_corpus();
  return r;
}

std::vector<OtherParValue> others_from_dict(const OpDef& def, const py::dict& d) {
  std::vector<OtherParValue> out;
  for (auto item : d) {
    OtherParValue v;
    v.name = py::cast<std::string>(item.first);
    const OtherParDecl* decl = nullptr;
    for (const auto& o : def.otherpars)
      if (o.name == v.name) decl = &o;
    if (!decl) fail(Errc::BadOtherPar, "unknown scalar parameter '" + v.name + "'");
    v.kind = decl->kind;
    switch (decl->kind) {
      case OtherParKind::Int: v.i = py::cast<std::int64_t>(item.second); break;
      case OtherParKind::Float: v.f = py::cast<double>(item.second); break;
      case OtherParKind::String: v.s = py::cast<std::string>(item.second); break;
      case OtherParKind::IntList:
        v.il = py::cast<std::vector<std::int64_t>>(item.second);
        break;
      case OtherParKind::FloatList:
        v.fl = py::cast<std::vector<double>>(item.second);
        break;
    }
    out.push_back(std::move(v));
  }
  return out;
}

ArrayPtr array_from_values(const std::string& dtype,
                           const std::vector<std::int64_t>& dims,
                           const std::vector<double>& values) {
  auto a = NdArray::new_filled(dtype_from_name(dtype), dims, Value::of_int(0));
  if (static_cast<std::int64_t>(values.size()) != a->nvals()) {
    fail(Errc::CountMismatch, "got " + std::to_string(values.size()) +
                                  " values for " + std::to_string(a->nvals()) +
                                  " elements");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    a->set_elem(static_cast<std::int64_t>(i), Value::of_float(values[i]));
  }
  return a;
}

std::vector<double> array_values(const NdArray& a) {
  std::vector<double> out;
  for (std::int64_t i = 0; i < a.nvals(); ++i) {
    out.push_back(a.get_elem(i).as_double());
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_sigkern, m) {
  m.doc() = "signature-driven broadcasting array engine";

  py::register_exception<Error>(m, "EngineError");

  py::class_<NdArray, ArrayPtr>(m, "Array")
      .def_static("parse", &parse_array_literal, py::arg("literal"))
      .def_static("from_values", &array_from_values, py::arg("dtype"),
                  py::arg("dims"), py::arg("values"))
      .def_static("null", &NdArray::make_null)
      .def_property_readonly("dims", [](const NdArray& a) { return a.dims(); })
      .def_property_readonly("dtype",
                             [](const NdArray& a) { return dtype_name(a.dtype()); })
      .def_property_readonly("nvals", &NdArray::nvals)
      .def_property_readonly("badflag", &NdArray::badflag)
      .def("values", &array_values)
      .def("is_bad", &NdArray::elem_is_bad, py::arg("offset"))
      .def("get", [](const NdArray& a, std::int64_t off) {
        return a.get_elem(off).as_double();
      })
      .def("set", [](NdArray& a, std::int64_t off, double v) {
        a.set_elem(off, Value::of_float(v));
      })
      .def("__repr__", [](const NdArray& a) { return format_array(a); })
      .def("__str__", [](const NdArray& a) { return format_array(a); });

  m.def("ops", [] { return reg().names(); });

  m.def("signature_of", [](const std::string& name) {
    return format_signature(reg().get(name).sig);
  });

  m.def(
      "run",
      [](const std::string& name, const std::vector<ArrayPtr>& args,
         const py::dict& others, bool reverse, bool check_bounds) {
        const OpDef& def = reg().get(name);
        std::vector<ArrayPtr> full = args;
        while (full.size() < def.sig.params.size()) {
          full.push_back(NdArray::make_null());
        }
        RunOptions opts;
        opts.reverse_sweep = reverse;
        opts.check_bounds = check_bounds;
        return run_op(def, full, others_from_dict(def, others), opts);
      },
      py::arg("name"), py::arg("args"), py::arg("others") = py::dict(),
      py::arg("reverse") = false, py::arg("check_bounds") = false);

  m.def(
      "expand",
      [](const std::string& name, const std::string& type, bool bad, bool bounds) {
        const OpDef& def = reg().get(name);
        Dtype t = dtype_from_name(type);
        if (!def.generictypes.contains(t)) {
          fail(Errc::TypeNotInGenericList,
               "op '" + name + "' is not compiled for " + type);
        }
        const auto& kernel = bad ? def.badcode : def.code;
        if (!kernel) {
          fail(bad ? Errc::NoBadVariant : Errc::KernelValidationError,
               "op '" + name + "' has no such variant");
        }
        return expand_kernel(*kernel, def.sig, t, bad ? Variant::Bad : Variant::Good,
                             bounds || def.boundscheck);
      },
      py::arg("name"), py::arg("type") = "double", py::arg("bad") = false,
      py::arg("bounds") = false);

  m.def(
      "connect",
      [](const std::string& name, const ArrayPtr& parent, const py::dict& others) {
        const OpDef& def = reg().get(name);
        return connect(def, parent, others_from_dict(def, others));
      },
      py::arg("name"), py::arg("parent"), py::arg("others") = py::dict());

  m.def("make_physical", &make_physical, py::arg("array"));
  m.def("mark_changed", &mark_changed, py::arg("array"));
  m.def("sever", &sever, py::arg("array"));

  m.def(
      "slice",
      [](const ArrayPtr& parent,
         const std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>>&
             spec) {
        std::vector<SliceDim> dims;
        for (const auto& [start, end, step] : spec) {
          dims.push_back({start, end, step});
        }
        return slice_affine(parent, dims);
      },
      py::arg("parent"), py::arg("spec"));

  m.def("load_opdefs", [](const std::string& path) {
    std::size_t n = 0;
    for (auto& def : parse_opdef_file(path)) {
      reg().register_op(std::move(def));
      ++n;
    }
    return n;
  });
}
