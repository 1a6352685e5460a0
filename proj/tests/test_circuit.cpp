#include <catch2/catch_amalgamated.hpp>

#include <holant/circuit.hpp>

#include "support/oracles.hpp"

#include <random>

using namespace holant;

namespace {

// One Even_2 vertex with a self-loop.
Circuit even_loop() {
  Circuit c;
  c.fragment.vertex_ids = {"v"};
  c.fragment.vertex_incidences = {{"v.0", "v.1"}};
  c.fragment.internal_edges = {{"v.0", "v.1"}};
  c.constraints = {make_even(IndexSet({"v.0", "v.1"}))};
  return c;
}

SfoGraph triangle() {
  SfoGraph g;
  g.num_vertices = 3;
  g.edges = {{0, 1, false}, {1, 2, false}, {2, 0, false}};
  return g;
}

}  // namespace

TEST_CASE("closed evaluation basics") {
  CHECK(evaluate_closed(even_loop()) == 2);

  Circuit zero = even_loop();
  zero.constraints[0] = Signature(IndexSet({"v.0", "v.1"}), std::vector<Rational>(4, Rational(0)));
  CHECK(evaluate_closed(zero) == 0);
}

TEST_CASE("triangle with NAE vertices via the labelled-instance path") {
  LabelledGraphInstance g;
  g.vertices = {{"a", VertexLabel::Nae}, {"b", VertexLabel::Nae}, {"c", VertexLabel::Nae}};
  g.edges = {{"a", "b"}, {"b", "c"}, {"c", "a"}};
  Circuit c = instance_to_circuit(g);
  CHECK(c.fragment.vertex_ids.size() == 3);
  CHECK(c.fragment.internal_edges.size() == 3);
  for (const auto& f : c.constraints) CHECK(f.arity() == 2);
  // Arity-2 NAE is disequality, and an odd cycle has no proper 2-colouring.
  CHECK(evaluate_closed(c) == 0);

  // Self-loop on an Even vertex gives a J_v of size 2 and one internal edge.
  LabelledGraphInstance loop;
  loop.vertices = {{"a", VertexLabel::Even}};
  loop.edges = {{"a", "a"}};
  Circuit lc = instance_to_circuit(loop);
  CHECK(lc.fragment.vertex_incidences[0].size() == 2);
  CHECK(lc.fragment.internal_edges.size() == 1);
  CHECK(evaluate_closed(lc) == 2);
}

TEST_CASE("sink-free orientation reduction on the triangle") {
  SfoGraph g = triangle();
  Circuit c = instance_to_circuit(sfo_to_instance(g));
  CHECK(oracles::sfo_count(g) == 2);
  CHECK(evaluate_closed(c) == 2);
}

TEST_CASE("sfo reduction equals brute force on random multigraphs") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    SfoGraph g = oracles::random_sfo_graph(rng, 4, 5);
    Circuit c = instance_to_circuit(sfo_to_instance(g));
    Integer expected = oracles::sfo_count(g);
    CHECK(evaluate_closed(c) == Rational(expected));
  }
}

TEST_CASE("evaluate equals the by-definition enumeration") {
  std::mt19937_64 rng(99);
  oracles::RandomCircuitSpec spec;
  spec.max_vertices = 4;
  spec.max_arity = 3;
  spec.max_internal_edges = 5;
  spec.max_external = 3;
  for (int trial = 0; trial < 30; ++trial) {
    Circuit c = oracles::random_circuit(rng, spec, [](std::mt19937_64& r, const IndexSet& is) {
      return oracles::random_signature(r, is, false);
    });
    IndexSet ext = external_index_set(c);
    for (std::uint32_t x = 0; x < ext.table_size(); ++x)
      CHECK(evaluate(c, Configuration(ext, x)) == oracles::eval_by_definition(c, x));
  }
}

TEST_CASE("z_k") {
  Circuit c = even_loop();
  CHECK(z_k(c, 0) == 2);
  CHECK(z_k(c, 1) == 0);
  CHECK(z_k(c, 2) == 0);  // the two unequal configurations have weight 0

  // Partition identity: sum_k Z_k = sum over all configurations of wt.
  std::mt19937_64 rng(5);
  oracles::RandomCircuitSpec spec;
  spec.max_vertices = 3;
  spec.max_internal_edges = 4;
  for (int trial = 0; trial < 10; ++trial) {
    Circuit rc = oracles::random_circuit(rng, spec, [](std::mt19937_64& r, const IndexSet& is) {
      return oracles::random_signature(r, is, false);
    });
    std::size_t m = rc.fragment.internal_edges.size();
    Rational sum = 0, all = 0;
    for (unsigned k = 0; k <= m; ++k) {
      Rational zk = z_k(rc, k);
      CHECK(zk == oracles::z_k_by_definition(rc, k));
      CHECK(zk >= 0);
      sum += zk;
    }
    for (unsigned k = 0; k <= m; ++k) all += oracles::z_k_by_definition(rc, k);
    CHECK(sum == all);
  }
}

TEST_CASE("z_k vanishes at odd k for even-weight-supported constraints") {
  // A k-assignment has total weight of parity k, so constraints supported on
  // even-weight configurations kill every odd layer.
  std::mt19937_64 rng(17);
  oracles::RandomCircuitSpec spec;
  spec.max_vertices = 3;
  spec.max_internal_edges = 4;
  for (int trial = 0; trial < 10; ++trial) {
    Circuit rc = oracles::random_circuit(rng, spec, [](std::mt19937_64& r, const IndexSet& is) {
      Signature f = oracles::random_signature(r, is, false);
      std::vector<Rational> t = f.table();
      for (std::uint32_t x = 0; x < f.table_size(); ++x)
        if (__builtin_popcount(x) % 2 == 1) t[x] = 0;
      return Signature(is, t);
    });
    for (unsigned k = 1; k <= rc.fragment.internal_edges.size(); k += 2)
      CHECK(z_k(rc, k) == 0);
  }
}

TEST_CASE("contraction") {
  // Contracting between two Even vertices merges them into one Even vertex.
  Circuit c;
  c.fragment.vertex_ids = {"u", "v"};
  c.fragment.vertex_incidences = {{"u.0", "u.1"}, {"v.0", "v.1"}};
  c.fragment.internal_edges = {{"u.1", "v.0"}};
  c.fragment.external_edges = {"u.0", "v.1"};
  c.constraints = {make_even(IndexSet({"u.0", "u.1"})), make_even(IndexSet({"v.0", "v.1"}))};
  Circuit contracted = contract_edge(c, 0);
  CHECK(contracted.fragment.vertex_ids.size() == 1);
  CHECK(contracted.constraints[0].table() == make_even(make_index_set(2)).table());

  // Contracting a loop on Even_{i,j,rest} produces 2 * Even_rest.
  Circuit loop;
  loop.fragment.vertex_ids = {"u"};
  loop.fragment.vertex_incidences = {{"u.0", "u.1", "u.2"}};
  loop.fragment.internal_edges = {{"u.0", "u.1"}};
  loop.fragment.external_edges = {"u.2"};
  loop.constraints = {make_even(IndexSet({"u.0", "u.1", "u.2"}))};
  Circuit lc = contract_edge(loop, 0);
  CHECK(lc.constraints[0].value(0) == 2);
  CHECK(lc.constraints[0].value(1) == 0);
}

TEST_CASE("contraction preserves the signature") {
  std::mt19937_64 rng(31);
  oracles::RandomCircuitSpec spec;
  spec.max_vertices = 4;
  spec.max_internal_edges = 4;
  spec.max_external = 3;
  for (int trial = 0; trial < 20; ++trial) {
    Circuit c = oracles::random_circuit(rng, spec, [](std::mt19937_64& r, const IndexSet& is) {
      return oracles::random_signature(r, is, false);
    });
    if (c.fragment.internal_edges.empty()) continue;
    Circuit contracted = contract_edge(c, rng() % c.fragment.internal_edges.size());
    Signature before = signature_of(c);
    Signature after = signature_of(contracted);
    // The external edge order is preserved by contraction.
    CHECK(before.table() == after.table());
  }
}

TEST_CASE("evaluation agrees with a full contraction fold") {
  std::mt19937_64 rng(47);
  oracles::RandomCircuitSpec spec;
  spec.max_vertices = 4;
  spec.max_internal_edges = 5;
  for (int trial = 0; trial < 15; ++trial) {
    Circuit c = oracles::random_circuit(rng, spec, [](std::mt19937_64& r, const IndexSet& is) {
      return oracles::random_signature(r, is, false);
    });
    Rational direct = evaluate_closed(c);
    Circuit folded = c;
    while (!folded.fragment.internal_edges.empty()) folded = contract_edge(folded, 0);
    Rational product = 1;
    for (const auto& f : folded.constraints) product *= f.value(0);
    CHECK(direct == product);
  }
}

TEST_CASE("degenerate labelled vertices") {
  // A degree-0 NAE vertex makes the whole instance zero.
  LabelledGraphInstance g;
  g.vertices = {{"a", VertexLabel::Nae}, {"b", VertexLabel::Even}};
  g.edges = {{"b", "b"}};
  CHECK(evaluate_closed(instance_to_circuit(g)) == 0);
}
