#include <cmath>
#include <random>

#include "doctest.h"
#include "sigkern/dataflow.hpp"
#include "sigkern/opdef_file.hpp"

using namespace sigkern;

namespace {

ArrayPtr arr(Dtype t, const std::vector<std::int64_t>& dims,
             const std::vector<double>& vals) {
  auto a = NdArray::new_filled(t, dims, Value::of_int(0));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    a->set_elem(static_cast<std::int64_t>(i), Value::of_float(vals[i]));
  }
  return a;
}

std::vector<double> values_of(const NdArray& a) {
  std::vector<double> out;
  for (std::int64_t i = 0; i < a.nvals(); ++i) {
    out.push_back(a.get_elem(i).as_double());
  }
  return out;
}

Registry& reg() {
  static Registry r = Registry::with_corpus();
  return r;
}

}  // namespace

TEST_CASE("linscale computes a*b+c") {
  auto outs = run_op(reg().get("linscale"),
                     {arr(Dtype::Double, {3}, {1, 2, 3}), arr(Dtype::Double, {}, {2}),
                      arr(Dtype::Double, {3}, {4, 5, 6}), NdArray::make_null()});
  REQUIRE(outs.size() == 1);
  CHECK(outs[0]->dims() == std::vector<std::int64_t>{3});
  CHECK(values_of(*outs[0]) == std::vector<double>{6, 9, 12});
}

TEST_CASE("cartND collapses the active dim") {
  auto outs = run_op(reg().get("cartND"),
                     {arr(Dtype::Double, {2}, {3, 4}), NdArray::make_null()});
  CHECK(values_of(*outs[0]) == std::vector<double>{5});
  // integer input promotes into the F,D list
  auto outs2 = run_op(reg().get("cartND"),
                      {arr(Dtype::Int, {2}, {3, 4}), NdArray::make_null()});
  CHECK(outs2[0]->dtype() == Dtype::Float);
  CHECK(values_of(*outs2[0]) == std::vector<double>{5});
}

TEST_CASE("multisum produces all three averages") {
  auto outs = run_op(reg().get("multisum"),
                     {arr(Dtype::Double, {2, 2}, {1, 2, 3, 4}), NdArray::make_null(),
                      NdArray::make_null(), NdArray::make_null()});
  REQUIRE(outs.size() == 3);
  CHECK(values_of(*outs[0]) == std::vector<double>{2.5});
  CHECK(values_of(*outs[1]) == std::vector<double>{1.5, 3.5});
  CHECK(values_of(*outs[2]) == std::vector<double>{2, 3});
}

TEST_CASE("solve_quad against the quadratic formula") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> coef(-4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    double c = coef(rng), b = coef(rng), a = coef(rng);
    if (std::fabs(a) < 0.1) continue;
    auto outs = run_op(reg().get("solve_quad"),
                       {arr(Dtype::Double, {3}, {c, b, a}), NdArray::make_null(),
                        NdArray::make_null()});
    auto sols = values_of(*outs[0]);
    double disc = b * b - 4 * a * c;
    if (disc >= 0) {
      double s0 = (-b - std::sqrt(disc)) / (2 * a);
      double s1 = (-b + std::sqrt(disc)) / (2 * a);
      CHECK(sols[0] == doctest::Approx(s0).epsilon(1e-9));
      CHECK(sols[1] == doctest::Approx(s1).epsilon(1e-9));
    } else {
      CHECK(std::isnan(sols[0]));
      CHECK(std::isnan(sols[1]));
    }
  }
}

TEST_CASE("solve_quad type switch supplies the short sentinel") {
  auto outs = run_op(reg().get("solve_quad"),
                     {arr(Dtype::Short, {3}, {5, 1, 1}), NdArray::make_null(),
                      NdArray::make_null()});
  // discriminant 1-20 < 0; generic resolves to Short within F,D,S
  CHECK(outs[0]->dtype() == Dtype::Short);
  CHECK(values_of(*outs[0]) == std::vector<double>{-32768, -32768});
}

TEST_CASE("increments shapes and values") {
  auto outs = run_op(reg().get("increments"),
                     {arr(Dtype::Double, {3}, {5, 7, 4}), NdArray::make_null()});
  CHECK(outs[0]->dims() == std::vector<std::int64_t>{2});
  CHECK(values_of(*outs[0]) == std::vector<double>{2, -3});

  auto one = run_op(reg().get("increments"),
                    {arr(Dtype::Double, {1}, {9}), NdArray::make_null()});
  CHECK(one[0]->dims() == std::vector<std::int64_t>{0});
  auto empty = run_op(reg().get("increments"),
                      {arr(Dtype::Double, {0}, {}), NdArray::make_null()});
  CHECK(empty[0]->dims() == std::vector<std::int64_t>{0});
  auto scalar = run_op(reg().get("increments"),
                       {arr(Dtype::Double, {}, {9}), NdArray::make_null()});
  CHECK(scalar[0]->dims() == std::vector<std::int64_t>{0});
}

TEST_CASE("increments bad variant marks slots from either neighbor, exhaustively") {
  const OpDef& def = reg().get("increments");
  for (int mask = 0; mask < 16; ++mask) {
    auto in = arr(Dtype::Double, {4}, {10, 20, 30, 40});
    for (int i = 0; i < 4; ++i) {
      if (mask & (1 << i)) in->set_elem_bad(i);
    }
    in->set_badflag(mask != 0);
    auto outs = run_op(def, {in, NdArray::make_null()});
    for (int i = 0; i < 3; ++i) {
      bool expect_bad = (mask & (1 << i)) || (mask & (1 << (i + 1)));
      CHECK(outs[0]->elem_is_bad(i) == expect_bad);
      if (!expect_bad) CHECK(outs[0]->get_elem(i).as_double() == 10);
    }
  }
}

TEST_CASE("countbad dispatches on the flag, not the stored bits") {
  const OpDef& def = reg().get("countbad");
  auto in = arr(Dtype::Short, {4}, {1, -32768, 3, -32768});
  // flag clear: the good path runs and returns 0 even though bad-coded bits exist
  auto outs = run_op(def, {in, NdArray::make_null()});
  CHECK(values_of(*outs[0]) == std::vector<double>{0});
  // flag set: exact count
  in->set_badflag(true);
  outs = run_op(def, {in, NdArray::make_null()});
  CHECK(values_of(*outs[0]) == std::vector<double>{2});
}

TEST_CASE("countbad random lengths against a linear scan") {
  std::mt19937 rng(99);
  const OpDef& def = reg().get("countbad");
  for (int trial = 0; trial < 40; ++trial) {
    std::int64_t n = std::uniform_int_distribution<std::int64_t>(1, 16)(rng);
    auto in = NdArray::new_filled(Dtype::Int, {n}, Value::of_int(3));
    int expect = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      if (rng() & 1) {
        in->set_elem_bad(i);
        ++expect;
      }
    }
    in->set_badflag(true);
    auto outs = run_op(def, {in, NdArray::make_null()});
    CHECK(outs[0]->get_elem(0).as_int() == expect);
  }
}

TEST_CASE("recip marks 1/0 bad and raises the output flag from the good path") {
  const OpDef& def = reg().get("recip");
  auto outs = run_op(def, {arr(Dtype::Double, {3}, {2, 0, 5}), NdArray::make_null()});
  CHECK(outs[0]->badflag());
  CHECK(outs[0]->get_elem(0).as_double() == 0.5);
  CHECK(outs[0]->elem_is_bad(1));
  CHECK(outs[0]->get_elem(2).as_double() == 0.2);

  auto in = arr(Dtype::Double, {3}, {2, 0, 1});
  in->set_elem_bad(2);
  in->set_badflag(true);
  auto bad = run_op(def, {in, NdArray::make_null()});
  CHECK(bad[0]->badflag());
  CHECK(bad[0]->get_elem(0).as_double() == 0.5);
  CHECK(bad[0]->elem_is_bad(1));
  CHECK(bad[0]->elem_is_bad(2));
}

TEST_CASE("handlebad=ignore propagates the flag without special code") {
  const OpDef& def = reg().get("linscale");
  auto a = arr(Dtype::Double, {2}, {1, 2});
  a->set_badflag(true);
  auto outs = run_op(def, {a, arr(Dtype::Double, {}, {2}),
                           arr(Dtype::Double, {2}, {0, 0}), NdArray::make_null()});
  CHECK(outs[0]->badflag());
}

TEST_CASE("index threads strictly; index1d threads the index too") {
  auto src = NdArray::new_filled(Dtype::Double, {10, 20}, Value::of_int(1));
  const OpDef& ix = reg().get("index");
  const OpDef& ix1 = reg().get("index1d");

  auto out1 = run_op(ix1, {src, arr(Dtype::Indx, {}, {0}), NdArray::make_null()});
  CHECK(out1[0]->dims() == std::vector<std::int64_t>{1, 20});
  auto out2 = run_op(ix1, {src, arr(Dtype::Indx, {2}, {0, 1}), NdArray::make_null()});
  CHECK(out2[0]->dims() == std::vector<std::int64_t>{2, 20});
  CHECK_THROWS_AS(
      (void)run_op(ix, {src, arr(Dtype::Indx, {2}, {0, 1}), NdArray::make_null()}),
      Error);
  try {
    (void)run_op(ix, {src, arr(Dtype::Indx, {2}, {0, 1}), NdArray::make_null()});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ThreadDimMismatch);
  }
}

TEST_CASE("index1d gathers the right elements") {
  auto src = arr(Dtype::Double, {4}, {10, 20, 30, 40});
  auto outs = run_op(reg().get("index1d"),
                     {src, arr(Dtype::Indx, {2}, {3, 0}), NdArray::make_null()});
  CHECK(values_of(*outs[0]) == std::vector<double>{40, 10});
}

// brute-force reference for "a(); b(); [o]c()": materialize fully broadcast
// copies first, then add elementwise
namespace {

struct BruteResult {
  bool ok = false;
  std::vector<std::int64_t> dims;
  std::vector<double> vals;
};

BruteResult brute_add(const NdArray& a, const NdArray& b) {
  BruteResult r;
  std::size_t nd = std::max(a.dims().size(), b.dims().size());
  std::vector<std::int64_t> da(a.dims()), db(b.dims()), dd;
  da.resize(nd, 1);
  db.resize(nd, 1);
  for (std::size_t k = 0; k < nd; ++k) {
    if (da[k] != 1 && db[k] != 1 && da[k] != db[k]) return r;  // rule 3
    dd.push_back(da[k] == 1 ? db[k] : da[k]);
  }
  r.ok = true;
  r.dims = dd;
  std::vector<std::int64_t> idx(nd, 0);
  std::int64_t total = product_of_dims(dd);
  for (std::int64_t i = 0; i < total; ++i) {
    auto at = [&](const NdArray& x, const std::vector<std::int64_t>& xd) {
      std::int64_t off = 0, stride = 1;
      for (std::size_t k = 0; k < nd; ++k) {
        std::int64_t j = xd[k] == 1 ? 0 : idx[k];
        off += j * stride;
        stride *= xd[k];
      }
      return x.get_elem(off).as_double();
    };
    r.vals.push_back(at(a, da) + at(b, db));
    for (std::size_t k = 0; k < nd; ++k) {
      if (++idx[k] < dd[k]) break;
      idx[k] = 0;
    }
  }
  return r;
}

}  // namespace

TEST_CASE("broadcast oracle equivalence over 500 random cases") {
  OpDef addop = parse_opdef_text("op addab\n  pars: a(); b(); [o]c()\n"
                                 "  code { $c() = $a() + $b(); }\nend")[0];
  std::mt19937 rng(4242);
  std::uniform_int_distribution<int> ndims(0, 4), size(0, 4);
  int mismatches_checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto rand_arr = [&]() {
      std::vector<std::int64_t> dims;
      int n = ndims(rng);
      for (int i = 0; i < n; ++i) dims.push_back(size(rng));
      auto x = NdArray::new_filled(Dtype::Double, dims, Value::of_int(0));
      for (std::int64_t i = 0; i < x->nvals(); ++i) {
        x->set_elem(i, Value::of_int(static_cast<std::int64_t>(rng() % 100)));
      }
      return x;
    };
    auto a = rand_arr(), b = rand_arr();
    BruteResult want = brute_add(*a, *b);
    if (!want.ok) {
      ++mismatches_checked;
      CHECK_THROWS_AS((void)run_op(addop, {a, b, NdArray::make_null()}), Error);
      try {
        (void)run_op(addop, {a, b, NdArray::make_null()});
      } catch (const Error& e) {
        CHECK(e.code() == Errc::ThreadDimMismatch);
      }
      continue;
    }
    auto outs = run_op(addop, {a, b, NdArray::make_null()});
    // engine trims trailing size-1 dims it never needed; compare by value count
    CHECK(product_of_dims(outs[0]->dims()) == product_of_dims(want.dims));
    CHECK(values_of(*outs[0]) == want.vals);
  }
  CHECK(mismatches_checked > 0);  // the generator must exercise rule-3 failures
}

TEST_CASE("iteration order independence for every corpus calculation op") {
  struct Case {
    const char* op;
    std::vector<ArrayPtr> args;
    std::vector<OtherParValue> others;
  };
  auto mk_mandel_other = [] {
    OtherParValue v;
    v.name = "max_it";
    v.kind = OtherParKind::Int;
    v.i = 50;
    return std::vector<OtherParValue>{v};
  };
  std::vector<Case> cases;
  cases.push_back({"linscale",
                   {arr(Dtype::Double, {2, 3}, {1, 2, 3, 4, 5, 6}),
                    arr(Dtype::Double, {}, {2}),
                    arr(Dtype::Double, {2}, {1, 1}), NdArray::make_null()},
                   {}});
  cases.push_back({"cartND",
                   {arr(Dtype::Double, {2, 3}, {3, 4, 5, 12, 8, 15}),
                    NdArray::make_null()},
                   {}});
  cases.push_back({"multisum",
                   {arr(Dtype::Double, {2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}),
                    NdArray::make_null(), NdArray::make_null(), NdArray::make_null()},
                   {}});
  cases.push_back({"solve_quad",
                   {arr(Dtype::Double, {3, 2}, {2, -3, 1, -4, 0, 1}),
                    NdArray::make_null(), NdArray::make_null()},
                   {}});
  cases.push_back({"countbad",
                   {arr(Dtype::Double, {4, 2}, {1, 2, 3, 4, 5, 6, 7, 8}),
                    NdArray::make_null()},
                   {}});
  cases.push_back({"recip",
                   {arr(Dtype::Double, {4}, {1, 2, 4, 8}), NdArray::make_null()},
                   {}});
  cases.push_back({"increments",
                   {arr(Dtype::Double, {3, 2}, {5, 7, 4, 1, 2, 9}),
                    NdArray::make_null()},
                   {}});
  cases.push_back({"pp_mandel",
                   {arr(Dtype::Double, {2, 2, 2}, {0, 0, 2, 2, -1, 0.3, 0.3, 0.5}),
                    NdArray::make_null()},
                   mk_mandel_other()});
  cases.push_back({"index",
                   {arr(Dtype::Double, {3, 2}, {1, 2, 3, 4, 5, 6}),
                    arr(Dtype::Indx, {2}, {2, 0}), NdArray::make_null()},
                   {}});
  cases.push_back({"index1d",
                   {arr(Dtype::Double, {3, 2}, {1, 2, 3, 4, 5, 6}),
                    arr(Dtype::Indx, {2, 2}, {2, 0, 1, 1}), NdArray::make_null()},
                   {}});

  for (auto& c : cases) {
    CAPTURE(c.op);
    RunOptions fwd, rev;
    rev.reverse_sweep = true;
    auto a = run_op(reg().get(c.op), c.args, c.others, fwd);
    auto b = run_op(reg().get(c.op), c.args, c.others, rev);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i]->dims() == b[i]->dims());
      for (std::int64_t j = 0; j < a[i]->nvals(); ++j) {
        double x = a[i]->get_elem(j).as_double();
        double y = b[i]->get_elem(j).as_double();
        CHECK(((x == y) || (std::isnan(x) && std::isnan(y))));
      }
    }
  }
}

TEST_CASE("resolve_generic matches the fold-then-select rule") {
  Signature sig = parse_signature("a(); b(); [o]c()");
  GenericList all;
  CHECK(resolve_generic(sig, {Dtype::Byte, Dtype::Short, std::nullopt}, all) ==
        Dtype::Short);
  CHECK(resolve_generic(sig, {Dtype::Float, Dtype::Int, std::nullopt}, all) ==
        Dtype::Float);

  // forced types do not participate in the fold
  Signature forced = parse_signature("float+ a(); b()");
  CHECK(resolve_generic(forced, {Dtype::Double, Dtype::Byte}, all) == Dtype::Byte);
}

TEST_CASE("float+ runs the float parameter at least at float") {
  OpDef def = parse_opdef_text("op fplus\n  pars: float+ a(); [o]b()\n"
                               "  code { $b() = $a(); }\nend")[0];
  // byte input: a executes as float (promote(float, byte generic))
  auto byte_in = arr(Dtype::Byte, {2}, {3, 4});
  BroadcastPlan p1 = make_plan(def, {byte_in, nullptr});
  CHECK(p1.params[0].exec_dtype == Dtype::Float);
  // double input elsewhere: the forced param follows upward
  OpDef def2 = parse_opdef_text("op fplus2\n  pars: float+ a(); b(); [o]c()\n"
                                "  code { $c() = $a() + $b(); }\nend")[0];
  BroadcastPlan p2 =
      make_plan(def2, {arr(Dtype::Byte, {2}, {1, 2}),
                       arr(Dtype::Double, {2}, {1, 2}), nullptr});
  CHECK(p2.generic == Dtype::Double);
  CHECK(p2.params[0].exec_dtype == Dtype::Double);
  // without '+', a plain forced float stays float even for double generic
  OpDef def3 = parse_opdef_text("op ffix\n  pars: float a(); b(); [o]c()\n"
                                "  code { $c() = $a() + $b(); }\nend")[0];
  BroadcastPlan p3 =
      make_plan(def3, {arr(Dtype::Byte, {2}, {1, 2}),
                       arr(Dtype::Double, {2}, {1, 2}), nullptr});
  CHECK(p3.params[0].exec_dtype == Dtype::Float);
}

TEST_CASE("pp_mandel values on a small grid against an independent iteration") {
  const OpDef& def = reg().get("pp_mandel");
  OtherParValue mi;
  mi.name = "max_it";
  mi.kind = OtherParKind::Int;
  mi.i = 200;

  const int W = 16;
  auto c = NdArray::new_filled(Dtype::Double, {2, W, W}, Value::of_int(0));
  for (int y = 0; y < W; ++y)
    for (int x = 0; x < W; ++x) {
      double re = -2.0 + 4.0 * x / (W - 1), im = -2.0 + 4.0 * y / (W - 1);
      c->set_elem(c->offset_of({0, x, y}), Value::of_float(re));
      c->set_elem(c->offset_of({1, x, y}), Value::of_float(im));
    }
  auto outs = run_op(def, {c, NdArray::make_null()}, {mi});
  REQUIRE(outs[0]->dims() == std::vector<std::int64_t>{W, W});
  for (int y = 0; y < W; ++y)
    for (int x = 0; x < W; ++x) {
      double re = c->get_elem(c->offset_of({0, x, y})).as_double();
      double im = c->get_elem(c->offset_of({1, x, y})).as_double();
      // straightforward reference of the same iteration
      double zr = re, zi = im;
      long long i = mi.i;
      while (i && zr * zr + zi * zi < 4) {
        double nr = zr * zr - zi * zi + re;
        zi = 2 * zr * zi + im;
        zr = nr;
        --i;
      }
      CHECK(outs[0]->get_elem(outs[0]->offset_of({x, y})).as_int() == i);
    }
}

TEST_CASE("supplied outputs are reused and shape-checked") {
  const OpDef& def = reg().get("linscale");
  auto out = NdArray::new_filled(Dtype::Double, {3}, Value::of_int(-1));
  auto got = run_op(def, {arr(Dtype::Double, {3}, {1, 2, 3}),
                          arr(Dtype::Double, {}, {2}),
                          arr(Dtype::Double, {3}, {4, 5, 6}), out});
  CHECK(got[0] == out);
  CHECK(values_of(*out) == std::vector<double>{6, 9, 12});

  // wrong trailing extent collides during dim binding
  auto wrong = NdArray::new_filled(Dtype::Double, {4}, Value::of_int(0));
  try {
    (void)run_op(def, {arr(Dtype::Double, {3}, {1, 2, 3}),
                       arr(Dtype::Double, {}, {2}),
                       arr(Dtype::Double, {3}, {4, 5, 6}), wrong});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ThreadDimMismatch);
  }

  // a scalar output binds nothing, so the shape check itself must reject it
  try {
    (void)run_op(reg().get("increments"),
                 {arr(Dtype::Double, {5}, {1, 2, 3, 4, 5}),
                  NdArray::new_filled(Dtype::Double, {}, Value::of_int(0))});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OutputShapeMismatch);
  }
}

TEST_CASE("missing inputs and forbidden bad values") {
  const OpDef& def = reg().get("linscale");
  try {
    (void)run_op(def, {NdArray::make_null(), arr(Dtype::Double, {}, {2}),
                       arr(Dtype::Double, {}, {0}), NdArray::make_null()});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NullInput);
  }

  OpDef strict = parse_opdef_text("op strictadd\n  pars: a(); [o]b()\n"
                                  "  handlebad: forbid\n"
                                  "  code { $b() = $a(); }\nend")[0];
  auto a = arr(Dtype::Double, {2}, {1, 2});
  a->set_badflag(true);
  try {
    (void)run_op(strict, {a, NdArray::make_null()});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BadValuesForbidden);
  }
}

TEST_CASE("temporaries carry no state across thread tuples") {
  // parts is fully overwritten per tuple; two identical rows give identical
  // results regardless of what earlier tuples stored
  const OpDef& def = reg().get("solve_quad");
  auto outs = run_op(def, {arr(Dtype::Double, {3, 2}, {2, -3, 1, 2, -3, 1}),
                           NdArray::make_null(), NdArray::make_null()});
  auto v = values_of(*outs[0]);
  REQUIRE(v.size() == 4);
  CHECK(v[0] == v[2]);
  CHECK(v[1] == v[3]);
}

TEST_CASE("registry basics") {
  CHECK(reg().has("linscale"));
  CHECK(reg().has("slice"));
  CHECK_THROWS_AS((void)reg().get("nosuchop"), Error);
  Registry r = Registry::with_base();
  OpDef dup = native_slice_opdef();
  CHECK_THROWS_AS(r.register_op(dup), Error);
}
