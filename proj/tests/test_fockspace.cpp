#include <catch_amalgamated.hpp>

#include <set>

#include "spdc3q/fockspace.hpp"

using namespace spdc3q;

TEST_CASE("dimension is prod 2(N_i + 1)") {
  SpaceConfig c;
  CHECK(build_space(c)->dim() == 2744);
  c.set_uniform_cutoff(8);
  CHECK(build_space(c)->dim() == 5832);
  c.cutoffs = {2, 3, 1};
  CHECK(build_space(c)->dim() == 6u * 8u * 4u);
}

TEST_CASE("flat and unflat are inverse bijections") {
  SpaceConfig c;
  c.cutoffs = {2, 3, 1};
  const auto sp = build_space(c);
  std::set<std::size_t> seen;
  for (int n1 = 0; n1 <= 2; ++n1)
    for (int q1 = 0; q1 < 2; ++q1)
      for (int n2 = 0; n2 <= 3; ++n2)
        for (int q2 = 0; q2 < 2; ++q2)
          for (int n3 = 0; n3 <= 1; ++n3)
            for (int q3 = 0; q3 < 2; ++q3) {
              const BasisIndex b{{n1, n2, n3}, {q1, q2, q3}};
              const auto k = sp->flat(b);
              // hand-expanded mixed-radix index
              const std::size_t expect = ((((static_cast<std::size_t>(n1) * 2 + q1) * 4 + n2) * 2 + q2) * 2 + n3) * 2 + q3;
              CHECK(k == expect);
              CHECK(sp->unflat(k) == b);
              seen.insert(k);
            }
  CHECK(seen.size() == sp->dim());
}

TEST_CASE("vacuum is index 0 and normalised") {
  const auto sp = build_space(SpaceConfig{});
  const auto v = vacuum_state(sp);
  CHECK(sp->flat(BasisIndex{}) == 0);
  CHECK(v.norm_squared() == 1.0);
  CHECK(v.amplitude(BasisIndex{}) == cplx{1.0, 0.0});
}

TEST_CASE("out of range indices and bad configs are rejected") {
  const auto sp = build_space(SpaceConfig{});
  CHECK_THROWS_AS(sp->flat(BasisIndex{{7, 0, 0}, {0, 0, 0}}), std::out_of_range);
  CHECK_THROWS_AS(sp->flat(BasisIndex{{0, 0, 0}, {0, 2, 0}}), std::out_of_range);
  SpaceConfig bad;
  bad.cutoffs = {0, 6, 6};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  SpaceConfig neg;
  neg.mode_freqs = {1.0, -2.0, 1.0};
  CHECK_THROWS_AS(neg.validate(), ConfigError);
  CHECK_THROWS_AS(sp->cutoff(4), std::out_of_range);
}

TEST_CASE("drive frequency defaults to the sum of mode frequencies") {
  SpaceConfig c;
  CHECK(c.drive_freq() == 4.0);
  c.mode_freqs = {1.0, 3.0, 2.0};
  CHECK(c.drive_freq() == 6.0);
  c.set_drive_freq(5.5);
  CHECK(c.drive_freq() == 5.5);
}

TEST_CASE("pair parity examples") {
  CHECK(equal_pair_parity(BasisIndex{{0, 0, 0}, {0, 0, 0}}));
  CHECK(equal_pair_parity(BasisIndex{{1, 1, 1}, {0, 0, 0}}));
  CHECK(equal_pair_parity(BasisIndex{{1, 0, 0}, {0, 1, 1}}));
  CHECK(equal_pair_parity(BasisIndex{{2, 1, 0}, {1, 0, 1}}));
  CHECK_FALSE(equal_pair_parity(BasisIndex{{1, 0, 0}, {0, 1, 0}}));
  CHECK_FALSE(equal_pair_parity(BasisIndex{{1, 0, 0}, {0, 0, 0}}));
  CHECK(pair_parity(BasisIndex{{3, 2, 1}, {0, 1, 1}}) == std::array<int, 3>{1, 1, 0});
}

TEST_CASE("overlap is conjugate linear in the first argument") {
  const auto sp = build_space(SpaceConfig{});
  auto a = vacuum_state(sp);
  auto b = vacuum_state(sp);
  a.amplitudes *= cplx{0.0, 1.0};
  CHECK(std::abs(overlap(a, b) - cplx{0.0, -1.0}) < 1e-15);
}
