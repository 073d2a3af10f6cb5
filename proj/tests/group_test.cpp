// Copyright 2026 The fenn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <vector>

#include "doctest.h"
#include "fenn/dlog.hpp"
#include "fenn/error.hpp"
#include "fenn/group.hpp"
#include "test_support.hpp"

namespace fenn {
namespace {

using testing::NaivePow;
using testing::TestGroup;

TEST_SUITE("group") {

TEST_CASE("generated parameters have the requested size and structure") {
  Rng rng(7);
  auto params = GroupGen(32, rng);
  CHECK(mpz_sizeinbase(params.order.get_mpz_t(), 2) == 32);
  CHECK(params.modulus == 2 * params.order + 1);
  CHECK(mpz_probab_prime_p(params.order.get_mpz_t(), 40) > 0);
  CHECK(mpz_probab_prime_p(params.modulus.get_mpz_t(), 40) > 0);
  CHECK(NaivePow(params.generator, params.order, params.modulus) == 1);
  CHECK(params.generator != 1);
  CHECK_NOTHROW(ValidateGroupParams(params));
}

TEST_CASE("seeded generation is reproducible") {
  Rng a(99), b(99), c(100);
  auto pa = GroupGen(64, a);
  auto pb = GroupGen(64, b);
  auto pc = GroupGen(64, c);
  CHECK(pa == pb);
  CHECK_FALSE(pa == pc);
}

TEST_CASE("validation rejects a generator outside the subgroup") {
  auto params = TestGroup()->params();
  // A quadratic non-residue has order 2p, not p.
  mpz_class bad = params.modulus - 1;
  params.generator = bad;
  CHECK_THROWS_AS(ValidateGroupParams(params), Error);
}

TEST_CASE("scalar sampling stays in range and is roughly uniform") {
  auto grp = TestGroup();
  Rng rng(3);
  mpz_class sum = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto s = grp->SampleScalar(rng);
    REQUIRE(s.value() >= 0);
    REQUIRE(s.value() < grp->order());
    sum += s.value();
  }
  mpf_class mean(sum, 256);
  mean /= n;
  mpf_class half(grp->order(), 256);
  half /= 2;
  mpf_class rel = abs(mean - half) / half;
  CHECK(rel.get_d() < 0.05);

  Rng r1(11), r2(11);
  CHECK(grp->SampleScalar(r1) == grp->SampleScalar(r2));
}

TEST_CASE("exponentiation identities") {
  auto grp = TestGroup();
  auto g = grp->Generator();
  CHECK(grp->Pow(g, std::int64_t{0}) == grp->Identity());
  CHECK(grp->Pow(g, grp->order()) == grp->Identity());
  CHECK(grp->PowG(grp->order()) == grp->Identity());
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    auto a = grp->SampleScalar(rng);
    auto b = grp->SampleScalar(rng);
    mpz_class ab = (a.value() * b.value()) % grp->order();
    CHECK(grp->Pow(grp->Pow(g, a), b) == grp->PowG(ab));
    CHECK(grp->Mul(grp->PowG(a), grp->PowG(b)) ==
          grp->PowG(mpz_class((a.value() + b.value()) % grp->order())));
  }
  for (std::int64_t e : {1, 2, 3, 17, 1000, -1, -5, -1000}) {
    CHECK(grp->Mul(grp->PowG(e), grp->PowG(-e)) == grp->Identity());
  }
}

TEST_CASE("pow agrees with naive square-and-multiply on random cases") {
  for (unsigned lambda : {64u, 256u}) {
    auto grp = TestGroup(lambda);
    Rng rng(lambda);
    for (int i = 0; i < 100; ++i) {
      auto base = grp->PowG(grp->SampleScalar(rng));
      auto e = grp->SampleScalar(rng);
      auto expect = NaivePow(base.value(), e.value(), grp->modulus());
      REQUIRE(grp->Pow(base, e).value() == expect);
      REQUIRE(grp->PowG(e).value() == NaivePow(grp->Generator().value(), e.value(), grp->modulus()));
    }
  }
}

TEST_CASE("multi-exponentiation matches the product of single powers") {
  auto grp = TestGroup();
  Rng rng(8);
  for (std::size_t n : {0u, 1u, 2u, 7u, 64u, 300u}) {
    std::vector<GroupElement> bases;
    for (std::size_t i = 0; i < n; ++i) bases.push_back(grp->PowG(grp->SampleScalar(rng)));
    auto exps = testing::RandomVector(rng, n, -70000, 70000);
    if (n > 3) exps[1] = 0;
    GroupElement expect = grp->Identity();
    for (std::size_t i = 0; i < n; ++i) {
      mpz_class e = exps[i];
      if (e < 0) e += grp->order();
      expect = GroupElement(mpz_class(expect.value() * NaivePow(bases[i].value(), e, grp->modulus()) %
                                      grp->modulus()));
    }
    CHECK(grp->MultiPow(bases, exps) == expect);
  }
}

TEST_CASE("scalar inversion") {
  auto grp = TestGroup();
  CHECK_THROWS_AS(grp->Invert(grp->ToScalar(std::int64_t{0})), Error);
  auto s = grp->ToScalar(std::int64_t{-7});
  CHECK(grp->Mul(s, grp->Invert(s)) == grp->ToScalar(std::int64_t{1}));
}

TEST_CASE("membership") {
  auto grp = TestGroup();
  CHECK(grp->Contains(grp->Generator()));
  CHECK(grp->Contains(grp->Identity()));
  CHECK_FALSE(grp->Contains(GroupElement(mpz_class(0))));
  CHECK_FALSE(grp->Contains(GroupElement(grp->modulus())));
  CHECK_FALSE(grp->Contains(GroupElement(mpz_class(grp->modulus() - 1))));
}

TEST_CASE("hex round trip") {
  mpz_class v("123456789abcdef0123", 16);
  CHECK(ToHex(v) == "123456789abcdef0123");
  CHECK(FromHex(ToHex(v)) == v);
  CHECK_THROWS_AS(FromHex("xyz"), Error);
  CHECK_THROWS_AS(FromHex(""), Error);
}

}  // TEST_SUITE

TEST_SUITE("dlog") {

TEST_CASE("small worked examples") {
  auto grp = TestGroup();
  CHECK(DlogBsgs(grp, grp->PowG(std::int64_t{5}), 10) == 5);
  CHECK(DlogBsgs(grp, grp->Identity(), 0) == 0);
  CHECK(DlogBsgs(grp, grp->PowG(std::int64_t{-3}), 10) == -3);
  CHECK(DlogBsgs(grp, grp->PowG(std::int64_t{10}), 10) == 10);
  CHECK(DlogBsgs(grp, grp->PowG(std::int64_t{-10}), 10) == -10);
}

TEST_CASE("out of range targets are rejected") {
  auto grp = TestGroup();
  try {
    DlogBsgs(grp, grp->PowG(std::int64_t{11}), 10);
    FAIL("expected NotInRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotInRange);
  }
  CHECK_THROWS_AS(DlogBsgs(grp, grp->PowG(std::int64_t{-11}), 10), Error);
  CHECK_THROWS_AS(DlogBsgs(grp, grp->PowG(std::int64_t{1} << 40), 1000), Error);
}

TEST_CASE("exhaustive range with the cached table") {
  auto grp = TestGroup();
  auto table = DlogTable::ForBound(grp, 1000);
  auto x = grp->PowG(std::int64_t{-1000});
  auto g = grp->Generator();
  for (std::int64_t z = -1000; z <= 1000; ++z) {
    REQUIRE(table->Solve(x, 1000) == z);
    x = grp->Mul(x, g);
  }
}

TEST_CASE("tiny tables exercise many giant steps") {
  auto grp = TestGroup();
  for (std::uint64_t m : {1u, 2u, 3u, 7u}) {
    DlogTable table(grp, m);
    for (std::int64_t z = -200; z <= 200; z += 13) {
      REQUIRE(table.Solve(grp->PowG(z), 200) == z);
    }
    CHECK_FALSE(table.TrySolve(grp->PowG(std::int64_t{201}), 200).has_value());
  }
}

TEST_CASE("bounds that cover the whole group are refused") {
  Rng rng(1);
  auto grp = Group::Create(GroupGen(16, rng));
  CHECK_THROWS_AS(DlogBsgs(grp, grp->Identity(), grp->order().get_ui()), Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace fenn
