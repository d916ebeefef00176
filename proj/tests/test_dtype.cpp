#include <cmath>
#include <limits>

#include "doctest.h"
#include "sigkern/dtype.hpp"

using namespace sigkern;

namespace {

// independent oracle: the ladder is a total order, so promotion is max-rank
int ladder_rank(Dtype t) {
  switch (t) {
    case Dtype::Byte: return 0;
    case Dtype::Short: return 1;
    case Dtype::UShort: return 2;
    case Dtype::Int: return 3;
    case Dtype::Indx: return 4;
    case Dtype::LongLong: return 5;
    case Dtype::Float: return 6;
    case Dtype::Double: return 7;
  }
  return -1;
}

}  // namespace

TEST_CASE("promote is max over the ladder, exhaustively") {
  for (int a = 0; a < kNumDtypes; ++a) {
    for (int b = 0; b < kNumDtypes; ++b) {
      Dtype ta = static_cast<Dtype>(a), tb = static_cast<Dtype>(b);
      Dtype expect = ladder_rank(ta) >= ladder_rank(tb) ? ta : tb;
      CHECK(promote(ta, tb) == expect);
      CHECK(promote(ta, tb) == promote(tb, ta));
    }
  }
}

TEST_CASE("letters round-trip, with the indx aliases") {
  const char letters[] = {'B', 'S', 'U', 'L', 'N', 'Q', 'F', 'D'};
  for (int i = 0; i < kNumDtypes; ++i) {
    Dtype t = static_cast<Dtype>(i);
    CHECK(letter_of(t) == letters[i]);
    CHECK(dtype_of_letter(letters[i]) == t);
  }
  CHECK(dtype_of_letter('I') == Dtype::Indx);
  CHECK(letter_matches(Dtype::Indx, 'N'));
  CHECK(letter_matches(Dtype::Indx, 'I'));
  CHECK(!letter_matches(Dtype::Int, 'N'));
  CHECK_THROWS_AS((void)dtype_of_letter('X'), Error);
}

TEST_CASE("generic list selection") {
  GenericList fd = GenericList::from_letters("F,D");
  CHECK(select_generic(Dtype::Byte, fd) == Dtype::Float);
  CHECK(select_generic(Dtype::Int, fd) == Dtype::Float);
  CHECK(select_generic(Dtype::Float, fd) == Dtype::Float);
  CHECK(select_generic(Dtype::Double, fd) == Dtype::Double);

  GenericList fds = GenericList::from_letters("F,D,S");
  CHECK(select_generic(Dtype::Byte, fds) == Dtype::Short);
  CHECK(select_generic(Dtype::Int, fds) == Dtype::Float);

  GenericList bs = GenericList::from_letters("B,S");
  // fold above every member clamps to the largest
  CHECK(select_generic(Dtype::Double, bs) == Dtype::Short);

  GenericList all;
  for (int i = 0; i < kNumDtypes; ++i) {
    Dtype t = static_cast<Dtype>(i);
    CHECK(select_generic(t, all) == t);
  }
  CHECK_THROWS_AS((void)GenericList::from_letters(""), Error);
}

TEST_CASE("default bad values") {
  CHECK(default_badvalue(Dtype::Byte).as_int() == 255);
  CHECK(default_badvalue(Dtype::Short).as_int() == -32768);
  CHECK(default_badvalue(Dtype::UShort).as_int() == 65535);
  CHECK(default_badvalue(Dtype::Int).as_int() == -2147483648LL);
  CHECK(std::isnan(default_badvalue(Dtype::Float).as_double()));
  CHECK(std::isnan(default_badvalue(Dtype::Double).as_double()));
}

TEST_CASE("float bad test is is-NaN, not equality") {
  Value nanv = Value::of_float(std::nan(""));
  CHECK(value_is_bad(nanv, Dtype::Double, default_badvalue(Dtype::Double)));
  CHECK(!value_is_bad(Value::of_float(0.0), Dtype::Double,
                      default_badvalue(Dtype::Double)));
}

TEST_CASE("cast_value wraps integers and truncates floats") {
  CHECK(cast_value(Value::of_int(256), Dtype::Byte).as_int() == 0);
  CHECK(cast_value(Value::of_int(-1), Dtype::Byte).as_int() == 255);
  CHECK(cast_value(Value::of_int(70000), Dtype::UShort).as_int() == 70000 % 65536);
  CHECK(cast_value(Value::of_float(3.9), Dtype::Int).as_int() == 3);
  CHECK(cast_value(Value::of_float(-3.9), Dtype::Int).as_int() == -3);
  CHECK(cast_value(Value::of_int(3), Dtype::Double).as_double() == 3.0);
}

TEST_CASE("truncate_to_int64 never traps") {
  CHECK(truncate_to_int64(std::nan("")) == 0);
  CHECK(truncate_to_int64(1e300) == std::numeric_limits<std::int64_t>::max());
  CHECK(truncate_to_int64(-1e300) == std::numeric_limits<std::int64_t>::min());
  CHECK(truncate_to_int64(-2.9) == -2);
}

TEST_CASE("dtype names round-trip") {
  for (int i = 0; i < kNumDtypes; ++i) {
    Dtype t = static_cast<Dtype>(i);
    CHECK(dtype_from_name(dtype_name(t)) == t);
  }
  CHECK_THROWS_AS((void)dtype_from_name("quux"), Error);
}
