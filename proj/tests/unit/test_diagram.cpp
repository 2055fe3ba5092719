#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "ephs/diagram.hpp"
#include "ephs/error.hpp"
#include "support/generators.hpp"

using namespace ephs;

namespace {

Diagram two_springs() {
  Diagram d;
  d.boxes["s1"] = Interface{"Spring", {{"pot", "disp"}}};
  d.boxes["s2"] = Interface{"Spring", {{"pot", "disp"}}};
  d.boxes["m"] = Interface{"Mass", {{"kin", "mom"}}};
  d.junction_types = {"disp", "mom"};
  d.port_junction[{"s1", "pot"}] = 0;
  d.port_junction[{"s2", "pot"}] = 0;
  d.port_junction[{"m", "kin"}] = 1;
  d.boundary.push_back(BoundaryPort{"out", "mom", 1});
  return d;
}

bool mentions(const std::vector<Violation>& vs, const std::string& text) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.message.find(text) != std::string::npos; });
}

}  // namespace

TEST_CASE("a well-formed diagram validates") {
  CHECK(validate(two_springs()).empty());
  CHECK(is_valid(Diagram{}));
}

TEST_CASE("validate reports each broken invariant") {
  Diagram d = two_springs();
  d.junction_types[0] = "mom";
  CHECK(mentions(validate(d), "type mismatch at port s1.pot"));

  d = two_springs();
  d.port_junction.erase({"s2", "pot"});
  CHECK(mentions(validate(d), "port s2.pot is not attached"));

  d = two_springs();
  d.port_junction[{"s2", "pot"}] = 7;
  CHECK(mentions(validate(d), "missing junction 7"));

  d = two_springs();
  d.junction_types.push_back("disp");
  CHECK(mentions(validate(d), "junction 2 has no incident ports"));

  d = two_springs();
  d.port_junction[{"ghost", "pot"}] = 0;
  CHECK(mentions(validate(d), "unknown box"));

  d = two_springs();
  d.boundary.push_back(BoundaryPort{"out", "mom", 1});
  CHECK(mentions(validate(d), "duplicate boundary port out"));

  d = two_springs();
  d.boundary[0].type = "disp";
  CHECK(mentions(validate(d), "boundary port out"));

  CHECK_THROWS_AS(require_valid(d, "test"), Error);
}

TEST_CASE("canonical form ignores junction numbering") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    Diagram d = testing::random_diagram(rng, "b");
    std::vector<std::size_t> perm(d.junction_count());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Diagram p = permute_junctions(d, perm);
    REQUIRE(is_valid(p));
    CHECK(canonicalize(d) == canonicalize(p));
    CHECK(is_isomorphic(d, p));
    CHECK(is_isomorphic(p, d));
  }
}

TEST_CASE("isomorphism agrees with canonical form") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    Diagram a = testing::random_diagram(rng, "b", 3, 4);
    Diagram b = testing::random_diagram(rng, "b", 3, 4);
    CHECK(is_isomorphic(a, b) == (canonicalize(a) == canonicalize(b)));
  }
}

TEST_CASE("isomorphism notices rewiring, retyping and relabeling") {
  Diagram d = two_springs();

  Diagram split = d;
  split.junction_types.push_back("disp");
  split.port_junction[{"s2", "pot"}] = 2;
  CHECK_FALSE(is_isomorphic(d, split));

  Diagram renamed = relabel_boxes(d, {{"s1", "k1"}});
  CHECK_FALSE(is_isomorphic(d, renamed));
  CHECK(is_isomorphic(relabel_boxes(renamed, {{"k1", "s1"}}), d));

  Diagram moved = d;
  moved.boundary.clear();
  CHECK_FALSE(is_isomorphic(d, moved));
}

TEST_CASE("relabeling onto an existing label collides") {
  CHECK_THROWS_AS(relabel_boxes(two_springs(), {{"s1", "s2"}}), Error);
}

TEST_CASE("canonical junction order lines up isomorphic diagrams") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    Diagram d = testing::random_diagram(rng, "b");
    std::vector<std::size_t> perm(d.junction_count());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Diagram p = permute_junctions(d, perm);
    auto od = canonical_junction_order(d);
    auto op = canonical_junction_order(p);
    for (std::size_t k = 0; k < od.size(); ++k) CHECK(d.junction_types[od[k]] == p.junction_types[op[k]]);
  }
}
