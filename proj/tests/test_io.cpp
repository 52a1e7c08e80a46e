#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "hjbpod/error.hpp"
#include "hjbpod/field_io.hpp"
#include "hjbpod/hjb.hpp"
#include "hjbpod/rom.hpp"
#include "hjbpod/text_io.hpp"
#include "support.hpp"

using namespace hjbpod;

namespace {

// Replace the version token in the first line.
std::string bump_version(std::string text) {
  const auto at = text.find(" v1");
  REQUIRE(at != std::string::npos);
  text.replace(at, 3, " v2");
  return text;
}

std::string truncate(const std::string& text) { return text.substr(0, text.size() * 2 / 3); }

}  // namespace

TEST_SUITE("io") {

TEST_CASE("shortest round-trip number formatting") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 4.9e-324, 1e308, 123456789.0, -0.0, 0.0}) {
    const auto s = io::format(x);
    io::TokenReader in(s, "x");
    const double y = in.number();
    CHECK(std::signbit(y) == std::signbit(x));
    CHECK(y == x);
  }
  CHECK(io::format(0.5) == "0.5");
  CHECK(io::format(4.0) == "4");
}

TEST_CASE("token reader errors name the source") {
  io::TokenReader in("HJBPOD-FIELD v1 3 x", "demo.txt");
  in.expect_header("HJBPOD-FIELD");
  CHECK(in.integer() == 3);
  try {
    in.number();
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("demo.txt") != std::string::npos);
  }
  io::TokenReader empty("", "e");
  CHECK_THROWS_AS(empty.word(), FormatError);
  io::TokenReader wrong("HJBPOD-BASIS v1", "w");
  CHECK_THROWS_AS(wrong.expect_header("HJBPOD-FIELD"), FormatError);
}

TEST_CASE("field files") {
  const auto& c = testing::small_cavity();
  const auto& s = c.spinup.states[37];
  const auto text = field_to_text(c.grid, s);
  CHECK(text.rfind("HJBPOD-FIELD v1 16 16 0.37\n", 0) == 0);
  const auto back = field_from_text(text);
  CHECK(back.grid == c.grid);
  CHECK(back.state.velocity == s.velocity);
  CHECK(back.state.pressure == s.pressure);
  CHECK(back.state.t == s.t);
  CHECK(field_to_text(back.grid, back.state) == text);

  CHECK_THROWS_AS(field_from_text(truncate(text)), FormatError);
  CHECK_THROWS_AS(field_from_text(bump_version(text)), FormatError);
  CHECK_THROWS_AS(field_from_text(text + " 1.0"), FormatError);

  const auto dir = testing::temp_dir("field");
  const auto path = (std::filesystem::path(dir) / "f.txt").string();
  save_field(path, c.grid, s);
  CHECK(load_field(path).state.velocity == s.velocity);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS_AS(load_field(dir + "/missing.txt"), IoError);
  CHECK_THROWS_AS(save_field(path + "/nested/f.txt", c.grid, s), IoError);
}

TEST_CASE("snapshot, basis and DEIM files") {
  const auto& c = testing::small_cavity();

  const auto snaps = snapshots_to_text(c.snapshots);
  const auto s2 = snapshots_from_text(snaps);
  CHECK(s2.times == c.snapshots.times);
  CHECK(s2.mean == c.snapshots.mean);
  CHECK(s2.fluctuations == c.snapshots.fluctuations);
  CHECK_THROWS_AS(snapshots_from_text(truncate(snaps)), FormatError);
  CHECK_THROWS_AS(snapshots_from_text(bump_version(snaps)), FormatError);

  const auto basis = basis_to_text(c.basis);
  const auto b2 = basis_from_text(basis);
  CHECK(b2.modes == c.basis.modes);
  CHECK(b2.singular_values == c.basis.singular_values);
  CHECK(b2.mean == c.basis.mean);
  CHECK_THROWS_AS(basis_from_text(truncate(basis)), FormatError);
  CHECK_THROWS_AS(basis_from_text(bump_version(basis)), FormatError);

  const auto deim = deim_to_text(c.deim);
  const auto d2 = deim_from_text(deim);
  CHECK(d2.indices == c.deim.indices);
  CHECK(d2.projection == c.deim.projection);
  CHECK_THROWS_AS(deim_from_text(truncate(deim)), FormatError);
  CHECK_THROWS_AS(deim_from_text(bump_version(deim)), FormatError);
}

TEST_CASE("ROM files reproduce the reduced dynamics exactly") {
  const auto& c = testing::small_cavity();
  const CavityFlow flow(c.grid, c.params, testing::shape_matrix(c.steady.velocity));
  const auto rom = assemble_rom(c.basis, flow, c.deim, 0.01, 1.0);
  const auto text = rom_to_text(rom);
  const auto back = rom_from_text(text);
  CHECK(rom_to_text(back) == text);
  for (unsigned seed : {1u, 2u}) {
    const Eigen::VectorXd w = 3.0 * testing::random_vector(3, seed);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, -1.0);
    CHECK(rom_rhs(back, w, u) == rom_rhs(rom, w, u));
    CHECK(running_cost(back, w, u) == running_cost(rom, w, u));
  }
  CHECK_THROWS_AS(rom_rhs(back, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(1), NonlinearityMode::Exact),
                  ConfigError);
  CHECK_THROWS_AS(rom_from_text(truncate(text)), FormatError);
  CHECK_THROWS_AS(rom_from_text(bump_version(text)), FormatError);
}

TEST_CASE("value and policy files") {
  ValueGrid<double> g(Eigen::Vector2d(-1.0, -0.6), Eigen::Vector2d(1.0, 0.6), 0.2, 0.04, 1.0);
  for (std::int64_t i = 0; i < g.size(); ++i) g.values()[static_cast<std::size_t>(i)] = std::exp(g.node(i).sum());
  const auto text = value_grid_to_text(g);
  const auto back = value_grid_from_text(text);
  CHECK(back.values() == g.values());
  CHECK(back.lower() == g.lower());
  CHECK(back.upper() == g.upper());
  CHECK(back.spacing() == g.spacing());
  CHECK(value_grid_to_text(back) == text);
  CHECK_THROWS_AS(value_grid_from_text(truncate(text)), FormatError);
  CHECK_THROWS_AS(value_grid_from_text(bump_version(text)), FormatError);

  FeedbackPolicy p;
  p.controls = {-1.0, 0.0, 1.0};
  for (std::int64_t i = 0; i < g.size(); ++i) p.choice.push_back(static_cast<int>(i % 3));
  const auto ptext = policy_to_text(g, p);
  const auto pb = policy_from_text(ptext);
  CHECK(pb.policy.controls == p.controls);
  CHECK(pb.policy.choice == p.choice);
  CHECK(pb.grid.counts() == g.counts());
  CHECK_THROWS_AS(policy_from_text(truncate(ptext)), FormatError);
  CHECK_THROWS_AS(policy_from_text(bump_version(ptext)), FormatError);
}

}  // TEST_SUITE
