#pragma once

#include <mpfr.h>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "rational.hpp"

namespace holant {

/*
 * The near-assignments chain walks configurations of all incidences of a
 * closed circuit with positive weight and zero or two violated internal
 * edges. A step proposes an ordered pair (i, j) of incidences uniformly
 * (so each unordered pair of distinct incidences has probability 2/n^2 and
 * the chain is lazy with P(x,x) >= 1/n), flips both bits, rejects moves that
 * leave the state space, and otherwise applies Metropolis acceptance with
 * the exact weight ratio.
 */
struct ChainContext {
  std::size_t n = 0;  // number of incidences
  std::size_t num_vertices = 0, num_edges = 0;
  std::vector<std::pair<std::size_t, std::size_t>> incidence_home;  // (vertex, bit)
  std::vector<std::size_t> partner;                                 // incidence -> incidence
  std::vector<std::pair<std::size_t, std::size_t>> edges;           // incidence index pairs
  std::vector<std::vector<Rational>> tables;                        // per-vertex weight tables
  std::vector<std::vector<char>> supports;                          // per-vertex support bitmaps
  bool unit_weights = true;  // every constraint value is 0 or 1
};

inline ChainContext make_chain_context(const Circuit& c) {
  if (!c.fragment.closed())
    throw std::invalid_argument("make_chain_context: circuit must be closed");
  detail::FlatCircuit f = detail::flatten(c);
  ChainContext ctx;
  ctx.n = f.num_incidences;
  if (ctx.n > 31) throw std::invalid_argument("make_chain_context: too many incidences");
  ctx.num_vertices = c.constraints.size();
  ctx.num_edges = f.internal_edges.size();
  ctx.incidence_home = f.incidence_home;
  ctx.edges = f.internal_edges;
  ctx.partner.assign(ctx.n, 0);
  for (const auto& [a, b] : f.internal_edges) {
    ctx.partner[a] = b;
    ctx.partner[b] = a;
  }
  for (const auto& sig : c.constraints) {
    ctx.tables.push_back(sig.table());
    std::vector<char> sup(sig.table_size());
    for (std::uint32_t x = 0; x < sig.table_size(); ++x) {
      sup[x] = (sig.value(x) != 0);
      if (sig.value(x) != 0 && sig.value(x) != 1) ctx.unit_weights = false;
    }
    ctx.supports.push_back(std::move(sup));
  }
  return ctx;
}

struct ChainState {
  std::uint32_t incidence_bits = 0;
  std::vector<std::uint32_t> vertex_words;
  unsigned violations = 0;
};

inline ChainState make_chain_state(const ChainContext& ctx, const std::vector<int>& edge_values) {
  if (edge_values.size() != ctx.num_edges)
    throw std::invalid_argument("make_chain_state: one value per internal edge required");
  ChainState st;
  st.vertex_words.assign(ctx.num_vertices, 0);
  for (std::size_t e = 0; e < ctx.num_edges; ++e) {
    if (edge_values[e]) {
      for (std::size_t inc : {ctx.edges[e].first, ctx.edges[e].second}) {
        st.incidence_bits |= (std::uint32_t{1} << inc);
        auto [v, b] = ctx.incidence_home[inc];
        st.vertex_words[v] |= (std::uint32_t{1} << b);
      }
    }
  }
  st.violations = 0;
  for (std::size_t v = 0; v < ctx.num_vertices; ++v)
    if (!ctx.supports[v][st.vertex_words[v]])
      throw std::invalid_argument("make_chain_state: zero-weight start state");
  return st;
}

namespace detail {
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  // Rejection sampling keeps the distribution exactly uniform.
  std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t u;
  do {
    u = rng();
  } while (u >= limit);
  return u % n;
}
}  // namespace detail

/// One Metropolis step, in place. Draws are consumed from rng only; identical
/// seeds give identical trajectories.
inline void chain_step(const ChainContext& ctx, ChainState& st, std::mt19937_64& rng) {
  std::size_t i = static_cast<std::size_t>(detail::uniform_below(rng, ctx.n));
  std::size_t j = static_cast<std::size_t>(detail::uniform_below(rng, ctx.n));
  if (i == j) return;  // lazy hold

  // Violation bookkeeping: flipping one endpoint of an edge toggles it;
  // flipping both endpoints (partner pair) leaves it alone.
  unsigned violations = st.violations;
  if (ctx.partner[i] != j) {
    std::uint32_t bits = st.incidence_bits;
    bool vi = ((bits >> i) & 1u) != ((bits >> ctx.partner[i]) & 1u);
    bool vj = ((bits >> j) & 1u) != ((bits >> ctx.partner[j]) & 1u);
    violations += (vi ? -1 : 1) + (vj ? -1 : 1);
  }
  if (violations > 2) return;

  auto [vi_idx, bi] = ctx.incidence_home[i];
  auto [vj_idx, bj] = ctx.incidence_home[j];
  std::uint32_t new_wi = st.vertex_words[vi_idx] ^ (std::uint32_t{1} << bi);
  std::uint32_t new_wj =
      (vi_idx == vj_idx ? new_wi : st.vertex_words[vj_idx]) ^ (std::uint32_t{1} << bj);
  if (vi_idx == vj_idx) {
    if (!ctx.supports[vi_idx][new_wj]) return;
  } else {
    if (!ctx.supports[vi_idx][new_wi] || !ctx.supports[vj_idx][new_wj]) return;
  }

  if (!ctx.unit_weights) {
    // Exact Metropolis ratio over the affected vertices only.
    Rational num = 1, den = 1;
    if (vi_idx == vj_idx) {
      num = ctx.tables[vi_idx][new_wj];
      den = ctx.tables[vi_idx][st.vertex_words[vi_idx]];
    } else {
      num = ctx.tables[vi_idx][new_wi] * ctx.tables[vj_idx][new_wj];
      den = ctx.tables[vi_idx][st.vertex_words[vi_idx]] *
            ctx.tables[vj_idx][st.vertex_words[vj_idx]];
    }
    if (num < den) {
      // Accept iff u / 2^64 < num/den, decided by cross-multiplication.
      Rational ratio = num / den;
      Integer u(rng());
      Integer lhs = u * ratio.get_den();
      Integer rhs;
      mpz_mul_2exp(rhs.get_mpz_t(), ratio.get_num().get_mpz_t(), 64);
      if (lhs >= rhs) return;
    }
  }

  st.incidence_bits ^= (std::uint32_t{1} << i) | (std::uint32_t{1} << j);
  st.vertex_words[vi_idx] = (vi_idx == vj_idx) ? new_wj : new_wi;
  if (vi_idx != vj_idx) st.vertex_words[vj_idx] = new_wj;
  st.violations = violations;
}

inline void chain_run(const ChainContext& ctx, ChainState& st, std::uint64_t steps,
                      std::mt19937_64& rng) {
  for (std::uint64_t s = 0; s < steps; ++s) chain_step(ctx, st, rng);
}

// ---------------------------------------------------------------------------
// Step budget.

/*
 * t = ceil( (2|E|)^4 R^2 (ln(2R/delta) + |E| ln 2) ) with R = 3 |V|^2 |E|^2.
 * Logarithms are natural and evaluated in MPFR with upward rounding, so the
 * returned budget can overshoot the formula by one ulp but never undershoot.
 */
inline Integer step_budget(std::uint64_t num_edges, std::uint64_t num_vertices,
                           const Rational& delta) {
  if (delta <= 0 || delta >= 1) throw std::invalid_argument("step_budget: delta must be in (0,1)");
  if (num_edges == 0) return Integer(1);
  Integer e(static_cast<unsigned long>(num_edges));
  Integer v(static_cast<unsigned long>(num_vertices));
  Integer r = 3 * v * v * e * e;
  Integer lead = 16 * e * e * e * e * r * r;  // (2|E|)^4 R^2

  mpfr_t arg, log_term, ln2, acc;
  mpfr_inits2(192, arg, log_term, ln2, acc, static_cast<mpfr_ptr>(nullptr));
  Rational two_r_over_delta = Rational(2 * r) / delta;
  mpfr_set_q(arg, two_r_over_delta.get_mpq_t(), MPFR_RNDU);
  mpfr_log(log_term, arg, MPFR_RNDU);
  mpfr_const_log2(ln2, MPFR_RNDU);
  mpfr_mul_ui(ln2, ln2, static_cast<unsigned long>(num_edges), MPFR_RNDU);
  mpfr_add(acc, log_term, ln2, MPFR_RNDU);
  mpfr_mul_z(acc, acc, lead.get_mpz_t(), MPFR_RNDU);
  Integer out;
  mpfr_get_z(out.get_mpz_t(), acc, MPFR_RNDU);  // ceiling via upward rounding
  mpfr_clears(arg, log_term, ln2, acc, static_cast<mpfr_ptr>(nullptr));
  return out;
}

/// ceil(2 R ln(2/delta)) rejection-sampling attempts, rounded upward.
inline Integer attempt_budget(std::uint64_t num_edges, std::uint64_t num_vertices,
                              const Rational& delta) {
  if (delta <= 0 || delta >= 1) throw std::invalid_argument("attempt_budget: delta out of range");
  Integer e(static_cast<unsigned long>(num_edges));
  Integer v(static_cast<unsigned long>(num_vertices));
  Integer r = 3 * v * v * e * e;
  mpfr_t arg, acc;
  mpfr_inits2(192, arg, acc, static_cast<mpfr_ptr>(nullptr));
  Rational two_over_delta = Rational(2) / delta;
  mpfr_set_q(arg, two_over_delta.get_mpq_t(), MPFR_RNDU);
  mpfr_log(acc, arg, MPFR_RNDU);
  Integer two_r = 2 * r;
  mpfr_mul_z(acc, acc, two_r.get_mpz_t(), MPFR_RNDU);
  Integer out;
  mpfr_get_z(out.get_mpz_t(), acc, MPFR_RNDU);
  if (out < 1) out = 1;
  mpfr_clears(arg, acc, static_cast<mpfr_ptr>(nullptr));
  return out;
}

// ---------------------------------------------------------------------------
// Initial assignments by backtracking over edge values.

/// A positive-weight assignment (one bit per internal edge), or nothing when
/// the instance is unsatisfiable. Plain depth-first search over edges in an
/// adjacency-following order, pruning any vertex whose partial assignment
/// admits no positive completion.
inline std::optional<std::vector<int>> find_initial_edge_values(const Circuit& c) {
  if (!c.fragment.closed())
    throw std::invalid_argument("find_initial_edge_values: circuit must be closed");
  detail::FlatCircuit f = detail::flatten(c);
  std::vector<std::size_t> order = detail::dfs_edge_order(f);
  std::size_t m = f.internal_edges.size();
  detail::EvalState st;
  st.mask.assign(c.constraints.size(), 0);
  st.bits.assign(c.constraints.size(), 0);
  for (std::size_t v = 0; v < c.constraints.size(); ++v)
    if (!detail::completion_possible(c.constraints[v], 0, 0)) return std::nullopt;
  std::vector<int> values(m, 0);
  std::function<bool(std::size_t)> rec = [&](std::size_t depth) -> bool {
    if (depth == m) return true;
    auto [i, j] = f.internal_edges[order[depth]];
    for (int value = 0; value <= 1; ++value) {
      detail::assign_incidence(f, st, i, value);
      detail::assign_incidence(f, st, j, value);
      std::size_t vi = f.incidence_home[i].first;
      std::size_t vj = f.incidence_home[j].first;
      bool alive = detail::completion_possible(c.constraints[vi], st.mask[vi], st.bits[vi]) &&
                   (vi == vj ||
                    detail::completion_possible(c.constraints[vj], st.mask[vj], st.bits[vj]));
      if (alive) {
        values[order[depth]] = value;
        if (rec(depth + 1)) return true;
      }
      detail::unassign_incidence(f, st, i);
      detail::unassign_incidence(f, st, j);
    }
    return false;
  };
  if (!rec(0)) return std::nullopt;
  return values;
}

// ---------------------------------------------------------------------------
// Rejection-sampling FPAUS.

enum class SampleStatus { Ok, Unsat, AllAttemptsRejected };

struct SampleOutcome {
  SampleStatus status = SampleStatus::Unsat;
  std::vector<int> edge_values;  // when status == Ok
  std::uint64_t attempts_used = 0;
  Integer steps_per_attempt;
};

/// Runs the chain for the full step budget (or an explicit override) per
/// attempt, returning the first terminal state with zero violations.
inline SampleOutcome sample_assignment(const Circuit& c, const Rational& delta,
                                       std::mt19937_64& rng,
                                       std::optional<std::uint64_t> steps_override = std::nullopt,
                                       std::optional<std::uint64_t> attempts_override = std::nullopt) {
  SampleOutcome out;
  auto initial = find_initial_edge_values(c);
  if (!initial) {
    out.status = SampleStatus::Unsat;
    return out;
  }
  ChainContext ctx = make_chain_context(c);
  Integer budget = steps_override ? Integer(static_cast<unsigned long>(*steps_override))
                                  : step_budget(ctx.num_edges, ctx.num_vertices, delta);
  out.steps_per_attempt = budget;
  if (!budget.fits_ulong_p())
    throw std::invalid_argument("sample_assignment: step budget exceeds runnable range");
  std::uint64_t steps = budget.get_ui();
  Integer attempts_z = attempts_override
                           ? Integer(static_cast<unsigned long>(*attempts_override))
                           : attempt_budget(ctx.num_edges, ctx.num_vertices, delta);
  std::uint64_t attempts =
      attempts_z.fits_ulong_p() ? attempts_z.get_ui() : UINT64_MAX;
  for (std::uint64_t a = 0; a < attempts; ++a) {
    ChainState st = make_chain_state(ctx, *initial);
    chain_run(ctx, st, steps, rng);
    ++out.attempts_used;
    if (st.violations == 0) {
      out.status = SampleStatus::Ok;
      out.edge_values.assign(ctx.num_edges, 0);
      for (std::size_t e = 0; e < ctx.num_edges; ++e)
        out.edge_values[e] = (st.incidence_bits >> ctx.edges[e].first) & 1u;
      return out;
    }
  }
  out.status = SampleStatus::AllAttemptsRejected;
  return out;
}

// ---------------------------------------------------------------------------
// Exact chain analysis for small state spaces.

struct ExactChain {
  std::size_t n = 0;
  std::vector<std::uint32_t> states;                 // configurations in the state space
  std::vector<std::size_t> violation_count;          // per state
  std::vector<std::vector<Rational>> transition;     // row-stochastic
  std::vector<Rational> stationary;                  // pi
  Rational pi_omega0;
};

inline ExactChain build_exact_chain(const ChainContext& ctx) {
  if (ctx.n > 20) throw std::invalid_argument("build_exact_chain: state space too large");
  ExactChain ec;
  ec.n = ctx.n;
  auto weight_of = [&](std::uint32_t bits) {
    Rational w = 1;
    std::vector<std::uint32_t> words(ctx.num_vertices, 0);
    for (std::size_t inc = 0; inc < ctx.n; ++inc)
      if ((bits >> inc) & 1u)
        words[ctx.incidence_home[inc].first] |= (std::uint32_t{1} << ctx.incidence_home[inc].second);
    for (std::size_t v = 0; v < ctx.num_vertices; ++v) {
      w *= ctx.tables[v][words[v]];
      if (w == 0) break;
    }
    return w;
  };
  auto violations_of = [&](std::uint32_t bits) {
    std::size_t k = 0;
    for (const auto& [a, b] : ctx.edges)
      if (((bits >> a) & 1u) != ((bits >> b) & 1u)) ++k;
    return k;
  };
  std::vector<Rational> weights;
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << ctx.n); ++bits) {
    std::size_t k = violations_of(bits);
    if (k != 0 && k != 2) continue;
    Rational w = weight_of(bits);
    if (w == 0) continue;
    ec.states.push_back(bits);
    ec.violation_count.push_back(k);
    weights.push_back(w);
  }
  std::size_t s = ec.states.size();
  Rational total = 0;
  for (const auto& w : weights) total += w;
  ec.stationary.resize(s);
  ec.pi_omega0 = 0;
  for (std::size_t i = 0; i < s; ++i) {
    ec.stationary[i] = weights[i] / total;
    if (ec.violation_count[i] == 0) ec.pi_omega0 += ec.stationary[i];
  }
  std::map<std::uint32_t, std::size_t> index_of;
  for (std::size_t i = 0; i < s; ++i) index_of[ec.states[i]] = i;
  Rational base = Rational(2) / Rational(static_cast<long>(ctx.n * ctx.n));
  ec.transition.assign(s, std::vector<Rational>(s, Rational(0)));
  for (std::size_t i = 0; i < s; ++i) {
    Rational stay = 1;
    for (std::size_t a = 0; a < ctx.n; ++a)
      for (std::size_t b = a + 1; b < ctx.n; ++b) {
        std::uint32_t y = ec.states[i] ^ (std::uint32_t{1} << a) ^ (std::uint32_t{1} << b);
        auto it = index_of.find(y);
        if (it == index_of.end()) continue;
        Rational ratio = weights[it->second] / weights[i];
        Rational p = base * (ratio < 1 ? ratio : Rational(1));
        ec.transition[i][it->second] = p;
        stay -= p;
      }
    ec.transition[i][i] = stay;
  }
  return ec;
}

}  // namespace holant
