#include <catch2/catch_amalgamated.hpp>

#include <holant/windability.hpp>

#include "support/oracles.hpp"

#include <random>

using namespace holant;

namespace {

Signature equality(std::size_t n) {
  IndexSet is = make_index_set(n);
  std::vector<Rational> t(is.table_size(), Rational(0));
  t[0] = 1;
  t[is.table_size() - 1] = 1;
  return Signature(is, std::move(t));
}

// Validates a refutation against the freshly rebuilt linear system.
bool refutation_checks_out(const Signature& f, const PinningRefutation& r) {
  Signature g = pin(f, r.pinning);
  LinearSystem sys = build_two_decomposition_system(product_with_complement(g));
  return verify_farkas(sys, r.farkas);
}

}  // namespace

TEST_CASE("strictly terraced spot checks") {
  for (std::size_t k = 1; k <= 4; ++k) {
    IndexSet is = make_index_set(k);
    CHECK(is_strictly_terraced(make_nae(is)));
    CHECK(is_strictly_terraced(make_even(is)));
    CHECK(is_strictly_terraced(make_odd(is)));
  }
  // Diagonal with unequal corners: the zero at (0,1) sees neighbours 2 and 1.
  Signature diag(make_index_set(2), {Rational(2), Rational(0), Rational(0), Rational(1)});
  CHECK_FALSE(is_strictly_terraced(diag));
  Signature zero(make_index_set(3), std::vector<Rational>(8, Rational(0)));
  CHECK(is_strictly_terraced(zero));
}

TEST_CASE("coindependent support") {
  Signature diseq(make_index_set(2), {Rational(0), Rational(1), Rational(1), Rational(0)});
  CHECK(has_coindependent_support(diseq));
  CHECK(has_coindependent_support(equality(2)));
  CHECK_FALSE(has_coindependent_support(equality(3)));
  Signature ones(make_index_set(3), std::vector<Rational>(8, Rational(1)));
  CHECK(has_coindependent_support(ones));

  // Strictly terraced and not identically zero forces coindependent support.
  std::mt19937_64 rng(12);
  int found = 0;
  while (found < 25) {
    Signature f = oracles::random_signature(rng, make_index_set(3), false, 0.5);
    if (!is_strictly_terraced(f) || f.is_zero()) continue;
    ++found;
    CHECK(has_coindependent_support(f));
  }
}

TEST_CASE("2-decompositions of the named families") {
  for (std::size_t n = 2; n <= 6; n += 2) {
    IndexSet is = make_index_set(n);
    CHECK(verify_two_decomposition(make_even(is), decomposition_for_parity(is, false)));
    CHECK(verify_two_decomposition(make_odd(is), decomposition_for_parity(is, true)));
    CHECK(verify_two_decomposition(make_even_nae(is), decomposition_for_even_nae(is)));
  }
  // The flip construction transports a decomposition across a flip.
  IndexSet is4 = make_index_set(4);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    Configuration z(is4, static_cast<std::uint32_t>(rng() % 16));
    TwoDecomposition d = flip_decomposition(decomposition_for_even_nae(is4), z);
    CHECK(verify_two_decomposition(flip(make_even_nae(is4), z), d));
  }
}

TEST_CASE("find_two_decomposition: solver verdicts with certificates") {
  // Parity relations and EvenNAE are feasible.
  for (std::size_t n = 2; n <= 4; n += 2) {
    IndexSet is = make_index_set(n);
    for (const Signature& h : {make_even(is), make_odd(is), make_even_nae(is)}) {
      DecompositionResult r = find_two_decomposition(h);
      REQUIRE(r.feasible);
      CHECK(verify_two_decomposition(h, r.decomposition));
    }
  }
  // Equality_2 is even with |J| = 2, hence feasible with the one-pairing
  // decomposition. Equality_4 is the small infeasible case: its lone pairing
  // orbits force all mass to zero.
  DecompositionResult eq2 = find_two_decomposition(equality(2));
  REQUIRE(eq2.feasible);
  CHECK(verify_two_decomposition(equality(2), eq2.decomposition));

  DecompositionResult eq4 = find_two_decomposition(equality(4));
  REQUIRE_FALSE(eq4.feasible);
  CHECK(verify_farkas(build_two_decomposition_system(equality(4)), eq4.farkas));

  // Odd arity with nonzero values is immediately infeasible.
  Signature odd_nonzero(make_index_set(3), std::vector<Rational>(8, Rational(1)));
  DecompositionResult odd3 = find_two_decomposition(odd_nonzero);
  REQUIRE_FALSE(odd3.feasible);
  CHECK(verify_farkas(build_two_decomposition_system(odd_nonzero), odd3.farkas));
  Signature odd_zero(make_index_set(3), std::vector<Rational>(8, Rational(0)));
  CHECK(find_two_decomposition(odd_zero).feasible);

  // A perturbed decomposition must be rejected by the verifier.
  TwoDecomposition good = decomposition_for_parity(make_index_set(4), false);
  TwoDecomposition bad = good;
  bad.values.begin()->second += 1;
  CHECK_FALSE(verify_two_decomposition(make_even(make_index_set(4)), bad));
}

TEST_CASE("even signatures of low arity are even-windable") {
  std::mt19937_64 rng(77);
  int found = 0;
  while (found < 15) {
    Signature f = oracles::random_signature(rng, make_index_set(3), false, 0.5);
    if (!f.is_even_function()) continue;
    ++found;
    EvenWindabilityResult r = is_even_windable(f);
    REQUIRE(r.windable());
    CHECK(verify_even_witness(f, *r.witness));
  }
}

TEST_CASE("parity relations are even-windable at every arity") {
  for (std::size_t k = 1; k <= 5; ++k) {
    IndexSet is = make_index_set(k);
    for (const Signature& f : {make_even(is), make_odd(is)}) {
      EvenWindabilityResult r = is_even_windable(f);
      REQUIRE(r.windable());
      CHECK(verify_even_witness(f, *r.witness));
    }
  }
}

TEST_CASE("equality_4 is not even-windable") {
  EvenWindabilityResult r = is_even_windable(equality(4));
  REQUIRE_FALSE(r.windable());
  CHECK(refutation_checks_out(equality(4), *r.refutation));
}

TEST_CASE("windability of the named families") {
  for (std::size_t k = 1; k <= 4; ++k) {
    IndexSet is = make_index_set(k);
    for (const Signature& f : {make_even(is), make_odd(is), make_nae(is)}) {
      WindabilityResult r = is_windable(f);
      REQUIRE(r.windable());
      CHECK(verify_witness(f, *r.witness));
    }
  }
  IndexSet ab = make_index_set(2);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Signature edge = make_edge(ab, oracles::random_rational(rng));
    Signature fug = make_fugacity(make_index_set(3), oracles::random_rational(rng));
    WindabilityResult re = is_windable(edge);
    REQUIRE(re.windable());
    CHECK(verify_witness(edge, *re.witness));
    WindabilityResult rf = is_windable(fug);
    REQUIRE(rf.windable());
    CHECK(verify_witness(fug, *rf.witness));
  }
}

TEST_CASE("equality_3 is not windable") {
  WindabilityResult r = is_windable(equality(3));
  REQUIRE_FALSE(r.windable());
  // The refuting pinning lives over the parity extension.
  Signature fe = parity_extend(equality(3));
  CHECK(refutation_checks_out(fe, *r.refutation));
  CHECK_FALSE(check_arity3_inequality(equality(3)));
}

TEST_CASE("arity-3 inequality spot checks") {
  // Exact-one (the perfect matching constraint): all products vanish.
  CHECK(check_arity3_inequality(make_fugacity(make_index_set(3), 0)));
  CHECK(check_arity3_inequality(make_or(make_index_set(3))));
  CHECK_THROWS_AS(check_arity3_inequality(make_or(make_index_set(2))), std::invalid_argument);
}

TEST_CASE("LP verdict matches the arity-3 inequality on a random battery") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 40; ++trial) {
    Signature f = oracles::random_signature(rng, make_index_set(3), trial % 2 == 0);
    WindabilityResult r = is_windable(f);
    CHECK(r.windable() == check_arity3_inequality(f));
    if (r.windable())
      CHECK(verify_witness(f, *r.witness));
    else
      CHECK(refutation_checks_out(parity_extend(f), *r.refutation));
  }
}

TEST_CASE("perturbed witnesses are rejected") {
  Signature f = make_nae(make_index_set(2));
  WindabilityResult r = is_windable(f);
  REQUIRE(r.windable());
  WindabilityWitness bad = *r.witness;
  REQUIRE_FALSE(bad.values.empty());
  bad.values.begin()->second.begin()->second += 1;
  CHECK_FALSE(verify_witness(f, bad));
}

TEST_CASE("witness composition") {
  // A single-vertex circuit returns the vertex's witness unchanged.
  IndexSet is = make_index_set(2);
  Signature f = make_even(is);
  Circuit single;
  single.fragment.vertex_ids = {"v"};
  single.fragment.vertex_incidences = {{"v.0", "v.1"}};
  single.fragment.external_edges = {"v.0", "v.1"};
  single.constraints = {Signature(IndexSet({"v.0", "v.1"}), f.table())};
  EvenWindabilityResult base = is_even_windable(single.constraints[0]);
  REQUIRE(base.windable());
  EvenWindabilityWitness composed = compose_witness(single, {*base.witness});
  CHECK(verify_even_witness(signature_of(single), composed));
  for (const auto& [xy, per_m] : base.witness->values)
    for (const auto& [m, v] : per_m)
      if (v != 0) CHECK(composed.value(xy.first, xy.second, m) == v);

  // Two Even_2 vertices joined by one edge compose to a witness for Even_2.
  Circuit two;
  two.fragment.vertex_ids = {"u", "v"};
  two.fragment.vertex_incidences = {{"u.0", "u.1"}, {"v.0", "v.1"}};
  two.fragment.internal_edges = {{"u.1", "v.0"}};
  two.fragment.external_edges = {"u.0", "v.1"};
  two.constraints = {make_even(IndexSet({"u.0", "u.1"})), make_even(IndexSet({"v.0", "v.1"}))};
  std::vector<EvenWindabilityWitness> parts;
  for (const auto& g : two.constraints) {
    EvenWindabilityResult r = is_even_windable(g);
    REQUIRE(r.windable());
    parts.push_back(*r.witness);
  }
  EvenWindabilityWitness w2 = compose_witness(two, parts);
  Signature sig2 = signature_of(two);
  CHECK(sig2.table() == make_even(make_index_set(2)).table());
  CHECK(verify_even_witness(sig2, w2));
}

TEST_CASE("composition on random circuits over even constraints") {
  std::mt19937_64 rng(321);
  oracles::RandomCircuitSpec spec;
  spec.min_vertices = 2;
  spec.max_vertices = 3;
  spec.max_arity = 2;
  spec.max_internal_edges = 3;
  spec.max_external = 4;
  for (int trial = 0; trial < 10; ++trial) {
    Circuit c = oracles::random_circuit(rng, spec, [](std::mt19937_64& r, const IndexSet& is) {
      // Random even functions are even-windable at arity <= 3.
      while (true) {
        Signature f = oracles::random_signature(r, is, false, 0.4);
        if (f.is_even_function()) return f;
      }
    });
    std::vector<EvenWindabilityWitness> parts;
    bool all = true;
    for (const auto& g : c.constraints) {
      EvenWindabilityResult r = is_even_windable(g);
      if (!r.windable()) {
        all = false;
        break;
      }
      parts.push_back(*r.witness);
    }
    REQUIRE(all);
    EvenWindabilityWitness w = compose_witness(c, parts);
    CHECK(verify_even_witness(signature_of(c), w));
  }
}
