#include <doctest.h>

#include "oracles.hpp"
#include "subfinsler/spec_io.hpp"

using namespace subfinsler;

TEST_CASE("valid documents load") {
  auto heis = parse_manifold_spec(oracle::heisenberg_json());
  CHECK(heis.dim() == 3);
  CHECK(heis.rank() == 2);
  CHECK(heis.norm().type() == MinkowskiNorm::Type::Euclidean);
  CHECK_FALSE(heis.domain().has_value());

  auto boxed = parse_manifold_spec(oracle::boxed_plane_json());
  CHECK(boxed.domain().has_value());
  CHECK(boxed.in_domain(Eigen::Vector2d(0.5, 0.5)));
  CHECK_FALSE(boxed.in_domain(Eigen::Vector2d(1.5, 0.0)));

  auto randers = parse_manifold_spec(oracle::randers_plane_json());
  CHECK(randers.norm().type() == MinkowskiNorm::Type::Randers);
}

TEST_CASE("schema errors: missing, extra, ill-typed fields") {
  CHECK_THROWS_AS(parse_manifold_spec("not json at all"), SchemaError);
  CHECK_THROWS_AS(parse_manifold_spec(R"({"frames": [["1"]], "norm": {"type":"euclidean"}})"),
                  SchemaError);  // missing dim
  CHECK_THROWS_AS(parse_manifold_spec(
                      R"({"dim": 1, "frames": [["1"]], "norm": {"type":"euclidean"}, "extra": 1})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_manifold_spec(
                      R"({"dim": 1.5, "frames": [["1"]], "norm": {"type":"euclidean"}})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_manifold_spec(
                      R"({"dim": 1, "frames": [["1"]], "norm": {"type":"euclidean", "G": []}})"),
                  SchemaError);  // euclidean takes no G
  CHECK_THROWS_AS(parse_manifold_spec(
                      R"({"dim": 1, "frames": [["1"]], "norm": {"type":"banach"}})"),
                  SchemaError);
}

TEST_CASE("validation errors: semantic problems") {
  // k = 4 > n = 3
  CHECK_THROWS_AS(parse_manifold_spec(R"({"dim": 3,
      "frames": [["1","0","0"],["0","1","0"],["0","0","1"],["1","1","1"]],
      "norm": {"type":"euclidean"}})"),
                  ValidationError);
  // wrong component count
  CHECK_THROWS_AS(parse_manifold_spec(R"({"dim": 3,
      "frames": [["1","0"],["0","1","0"]],
      "norm": {"type":"euclidean"}})"),
                  ValidationError);
  // Randers drift too large
  CHECK_THROWS_AS(parse_manifold_spec(R"({"dim": 2,
      "frames": [["1","0"],["0","1"]],
      "norm": {"type":"randers", "G": [[1,0],[0,1]], "b": [1.2, 0]}})"),
                  ValidationError);
  // non-positive-definite quadratic form
  CHECK_THROWS_AS(parse_manifold_spec(R"({"dim": 2,
      "frames": [["1","0"],["0","1"]],
      "norm": {"type":"quadratic", "G": [[1,0],[0,-1]]}})"),
                  ValidationError);
  // expression references coordinate beyond dim
  CHECK_THROWS_AS(parse_manifold_spec(R"({"dim": 2,
      "frames": [["1","x3"],["0","1"]],
      "norm": {"type":"euclidean"}})"),
                  ValidationError);
  // malformed frame expression
  CHECK_THROWS_AS(parse_manifold_spec(R"({"dim": 2,
      "frames": [["1","x +"],["0","1"]],
      "norm": {"type":"euclidean"}})"),
                  ValidationError);
  // rank-deficient frame (second column is a multiple of the first)
  CHECK_THROWS_AS(parse_manifold_spec(R"({"dim": 2,
      "frames": [["1","1"],["2","2"]],
      "norm": {"type":"euclidean"}})"),
                  ValidationError);
  // degenerate domain box
  CHECK_THROWS_AS(parse_manifold_spec(R"({"dim": 1,
      "domain": {"min": [1], "max": [1]},
      "frames": [["1"]],
      "norm": {"type":"euclidean"}})"),
                  ValidationError);
}
