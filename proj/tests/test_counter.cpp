#include <catch2/catch_amalgamated.hpp>

#include <holant/counter.hpp>

#include "support/oracles.hpp"

#include <random>

using namespace holant;

namespace {

Circuit triangle_sfo() {
  SfoGraph g;
  g.num_vertices = 3;
  g.edges = {{0, 1, false}, {1, 2, false}, {2, 0, false}};
  return instance_to_circuit(sfo_to_instance(g));
}

Circuit even_loop() {
  Circuit c;
  c.fragment.vertex_ids = {"v"};
  c.fragment.vertex_incidences = {{"v.0", "v.1"}};
  c.fragment.internal_edges = {{"v.0", "v.1"}};
  c.constraints = {make_even(IndexSet({"v.0", "v.1"}))};
  return c;
}

// Weight of assignments with a fixed value on one edge, by enumeration.
Rational restricted_mass(const Circuit& c, std::size_t edge, int bit) {
  detail::FlatCircuit f = detail::flatten(c);
  std::size_t m = f.internal_edges.size();
  Rational total = 0;
  for (std::uint64_t word = 0; word < (std::uint64_t{1} << m); ++word) {
    if (static_cast<int>((word >> edge) & 1u) != bit) continue;
    std::vector<std::uint32_t> words(c.constraints.size(), 0);
    for (std::size_t e = 0; e < m; ++e)
      if ((word >> e) & 1u)
        for (std::size_t inc : {f.internal_edges[e].first, f.internal_edges[e].second}) {
          auto [v, b] = f.incidence_home[inc];
          words[v] |= (std::uint32_t{1} << b);
        }
    Rational w = 1;
    for (std::size_t v = 0; v < c.constraints.size(); ++v) w *= c.constraints[v].value(words[v]);
    total += w;
  }
  return total;
}

bool within_eps(const Rational& estimate, const Rational& truth, double eps) {
  double e = estimate.get_d(), t = truth.get_d();
  return e >= t * std::exp(-eps) - 1e-12 && e <= t * std::exp(eps) + 1e-12;
}

}  // namespace

TEST_CASE("pin_edge splits the mass exactly") {
  std::mt19937_64 rng(81);
  oracles::RandomCircuitSpec spec;
  spec.max_vertices = 3;
  spec.max_internal_edges = 4;
  for (int trial = 0; trial < 10; ++trial) {
    Circuit c = oracles::random_circuit(rng, spec, [](std::mt19937_64& r, const IndexSet& is) {
      return oracles::random_family_signature(r, is, oracles::Family::ParityNae);
    });
    std::size_t m = c.fragment.internal_edges.size();
    std::size_t e = rng() % m;
    for (int b = 0; b <= 1; ++b)
      CHECK(evaluate_closed(pin_edge(c, e, b)) == restricted_mass(c, e, b));
    CHECK(Rational(evaluate_closed(pin_edge(c, e, 0)) + evaluate_closed(pin_edge(c, e, 1))) ==
          evaluate_closed(c));
  }
}

TEST_CASE("pinning every edge leaves the point weight") {
  Circuit c = triangle_sfo();
  std::size_t m = c.fragment.internal_edges.size();
  auto values = find_initial_edge_values(c);
  REQUIRE(values);
  Circuit pinned = c;
  for (std::size_t e = 0; e < m; ++e) pinned = pin_edge(pinned, 0, (*values)[e]);
  CHECK(evaluate_closed(pinned) == 1);  // zero-one constraints at a support point
}

TEST_CASE("estimate_count returns exactly zero on unsatisfiable instances") {
  LabelledGraphInstance bad;
  bad.vertices = {{"a", VertexLabel::Odd}};
  bad.edges = {{"a", "a"}};
  std::mt19937_64 rng(5);
  CountOptions opt;
  opt.eps = Rational(1, 5);
  opt.practical_steps = 100;
  CHECK(estimate_count(instance_to_circuit(bad), opt, rng).estimate == 0);
}

TEST_CASE("estimate_count on tiny instances") {
  std::mt19937_64 rng(987);
  CountOptions opt;
  opt.eps = Rational(1, 5);
  opt.practical_steps = 300;

  Circuit loop = even_loop();
  REQUIRE(evaluate_closed(loop) == 2);
  CountResult r1 = estimate_count(loop, opt, rng);
  CHECK(within_eps(r1.estimate, Rational(2), 0.2));

  Circuit tri = triangle_sfo();
  REQUIRE(evaluate_closed(tri) == 2);
  CountResult r2 = estimate_count(tri, opt, rng);
  CHECK(within_eps(r2.estimate, Rational(2), 0.2));
}

TEST_CASE("telescoping identity behind the counter") {
  Circuit c = triangle_sfo();
  Rational z = evaluate_closed(c);
  for (int b = 0; b <= 1; ++b) {
    Rational zb = evaluate_closed(pin_edge(c, 0, b));
    if (zb == 0) continue;
    // Z0(c) = Z0(pin) / Pr[x_e = b] where the probability is zb / z.
    CHECK(Rational(zb / (zb / z)) == z);
  }
}
