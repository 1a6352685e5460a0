// Command-line front end: exact evaluation, approximate counting and
// sampling, class membership checks with certificates, Prat ratios,
// matchings-circuit synthesis, and the reduction to perfect matchings.
//
// Exit codes: 0 success, 1 negative verdict (not windable, unsatisfiable,
// not expressible), 2 malformed input or usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <holant/chain.hpp>
#include <holant/circuit.hpp>
#include <holant/counter.hpp>
#include <holant/io.hpp>
#include <holant/matchings.hpp>
#include <holant/prat.hpp>
#include <holant/signature.hpp>
#include <holant/windability.hpp>

namespace {

using namespace holant;

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitInput = 2;

// "0.2" -> 1/5, "3" -> 3, "1/8" -> 1/8. Exact; no floating point.
Rational parse_decimal_or_rational(const std::string& text) {
  auto dot = text.find('.');
  if (dot == std::string::npos) return parse_rational(text);
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  std::string den = "1" + std::string(text.size() - dot - 1, '0');
  return parse_rational(digits + "/" + den);
}

Circuit load_closed_circuit(const std::string& path) {
  Json j = load_json_file(path);
  switch (detect_kind(j)) {
    case FileKind::Instance:
      return instance_to_circuit(instance_from_json(j));
    case FileKind::Circuit:
      return circuit_from_json(j);
    case FileKind::Matchings:
      return compile_matchings(matchings_from_json(j));
    default:
      throw std::invalid_argument("expected a circuit, instance, or matchings circuit file");
  }
}

// Named parity/NAE tables are the constraint families the sampler and
// counter are proved for.
bool all_parity_or_nae(const Circuit& c) {
  for (const auto& f : c.constraints) {
    const IndexSet& is = f.index_set();
    if (f != make_even(is) && f != make_odd(is) && f != make_nae(is)) return false;
  }
  return true;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

int run_eval(const std::string& path) {
  Json j = load_json_file(path);
  Circuit c;
  switch (detect_kind(j)) {
    case FileKind::Instance:
      c = instance_to_circuit(instance_from_json(j));
      break;
    case FileKind::Circuit:
      c = circuit_from_json(j);
      break;
    case FileKind::Matchings:
      c = compile_matchings(matchings_from_json(j));
      break;
    case FileKind::Signature:
      throw std::invalid_argument("eval expects a circuit-like file, not a signature");
  }
  if (c.fragment.closed()) {
    std::cout << to_string(evaluate_closed(c)) << "\n";
  } else {
    std::cout << dump_canonical(signature_to_json(signature_of(c)));
  }
  return kExitOk;
}

int run_count(const std::string& path, const std::string& eps, std::optional<std::uint64_t> seed,
              std::optional<std::uint64_t> practical_steps) {
  Circuit c = load_closed_circuit(path);
  if (!c.fragment.closed()) throw std::invalid_argument("count: instance must be closed");
  if (!all_parity_or_nae(c))
    throw std::invalid_argument("count: constraints must be parity or NAE relations");
  std::uint64_t s = resolve_seed(seed);
  std::mt19937_64 rng(s);
  CountOptions opt;
  opt.eps = parse_decimal_or_rational(eps);
  opt.practical_steps = practical_steps;
  CountResult res = estimate_count(c, opt, rng);
  std::cout << "seed " << s << "\n";
  std::cout << to_string(res.estimate) << "\n";
  std::cout << "# approx " << decimal_string(res.estimate) << "\n";
  return kExitOk;
}

int run_sample(const std::string& path, const std::string& delta,
               std::optional<std::uint64_t> seed, std::uint64_t count,
               std::optional<std::uint64_t> practical_steps) {
  Circuit c = load_closed_circuit(path);
  if (!all_parity_or_nae(c))
    throw std::invalid_argument("sample: constraints must be parity or NAE relations");
  std::uint64_t s = resolve_seed(seed);
  std::mt19937_64 rng(s);
  Rational d = parse_decimal_or_rational(delta);
  std::cout << "seed " << s << "\n";
  for (std::uint64_t k = 0; k < count; ++k) {
    SampleOutcome out = sample_assignment(
        c, d, rng, practical_steps,
        practical_steps ? std::optional<std::uint64_t>(64) : std::nullopt);
    if (out.status == SampleStatus::Unsat) {
      std::cout << "UNSAT\n";
      return kExitVerdict;
    }
    if (out.status == SampleStatus::AllAttemptsRejected) {
      std::cout << "FAILED (all attempts rejected)\n";
      return kExitVerdict;
    }
    for (std::size_t e = 0; e < out.edge_values.size(); ++e) {
      if (e) std::cout << " ";
      std::cout << e << "=" << out.edge_values[e];
    }
    std::cout << "\n";
  }
  return kExitOk;
}

int run_check(const std::string& path, const std::string& klass,
              const std::string& certificate_path, int threads) {
  Signature f = signature_from_json(load_json_file(path));
  if (klass == "strictly-terraced") {
    bool ok = is_strictly_terraced(f);
    std::cout << (ok ? "strictly-terraced" : "NOT strictly-terraced") << "\n";
    return ok ? kExitOk : kExitVerdict;
  }
  if (klass == "even-windable") {
    EvenWindabilityResult r = is_even_windable(f, threads);
    if (r.windable()) {
      std::cout << "even-windable\n";
      if (!certificate_path.empty())
        write_text_file(certificate_path, dump_canonical(even_witness_to_json(*r.witness)));
      return kExitOk;
    }
    std::cout << "NOT even-windable: pinning {";
    bool first = true;
    for (const auto& [label, bit] : r.refutation->pinning) {
      if (!first) std::cout << ", ";
      first = false;
      std::cout << label << "=" << bit;
    }
    std::cout << "} has no 2-decomposition of G*Gbar\n";
    if (!certificate_path.empty())
      write_text_file(certificate_path,
                      dump_canonical(refutation_to_json(*r.refutation, f.index_set().labels())));
    return kExitVerdict;
  }
  if (klass == "windable") {
    if (f.arity() == 3 && !check_arity3_inequality(f)) {
      // Report the failing point of the product inequality.
      for (std::uint32_t x = 0; x < 8; ++x) {
        std::uint32_t xb = x ^ 7u;
        Rational lhs = f.value(x) * f.value(xb);
        Rational rhs = f.value(x ^ 4u) * f.value(xb ^ 4u) + f.value(x ^ 2u) * f.value(xb ^ 2u) +
                       f.value(x ^ 6u) * f.value(xb ^ 6u);
        if (lhs > rhs) {
          std::cout << "NOT windable: inequality fails at x=" << bits_to_string(x, 3) << " ("
                    << to_string(lhs) << " > " << to_string(rhs) << ")\n";
          break;
        }
      }
      return kExitVerdict;
    }
    WindabilityResult r = is_windable(f, threads);
    if (r.windable()) {
      std::cout << "windable\n";
      if (!certificate_path.empty())
        write_text_file(certificate_path, dump_canonical(witness_to_json(*r.witness)));
      return kExitOk;
    }
    std::cout << "NOT windable: pinning of the parity extension {";
    bool first = true;
    for (const auto& [label, bit] : r.refutation->pinning) {
      if (!first) std::cout << ", ";
      first = false;
      std::cout << label << "=" << bit;
    }
    std::cout << "} has no 2-decomposition of G*Gbar\n";
    if (!certificate_path.empty()) {
      Signature fe = parity_extend(f);
      write_text_file(certificate_path,
                      dump_canonical(refutation_to_json(*r.refutation, fe.index_set().labels())));
    }
    return kExitVerdict;
  }
  throw std::invalid_argument("unknown class '" + klass + "'");
}

int run_prat(const std::string& path) {
  Signature f = signature_from_json(load_json_file(path));
  Rational p = prat(f);
  std::cout << to_string(p) << "\n";
  std::cout << "# approx " << decimal_string(p) << "\n";
  return kExitOk;
}

int run_synth3(const std::string& path, const std::string& out_path) {
  Signature f = signature_from_json(load_json_file(path));
  if (f.arity() != 3) throw std::invalid_argument("synth3: signature must have arity 3");
  auto g = synthesize_arity3(f);
  if (!g) {
    std::cout << "NOT_WINDABLE\n";
    return kExitVerdict;
  }
  write_text_file(out_path, dump_canonical(matchings_to_json(*g)));
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

int run_reduce_pm(const std::string& path, const std::string& out_path) {
  Circuit c = load_closed_circuit(path);
  PmGraph g = reduce_to_pm(c);
  write_text_file(out_path, pm_graph_to_text(g));
  std::cout << "wrote " << out_path << " (constant " << to_string(g.constant) << ")\n";
  return kExitOk;
}

int run_hadamard(const std::string& path) {
  Signature f = signature_from_json(load_json_file(path));
  std::cout << dump_canonical(signed_signature_to_json(hadamard_unnormalized(f)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and approximate evaluation of Boolean Holant instances"};
  app.require_subcommand(1);

  int threads = 1;
  if (const char* env = std::getenv("HOLANT_THREADS")) threads = std::atoi(env);
  app.add_option("--threads", threads, "worker threads (default 1, reproducible)");

  std::string file, out_path, klass, certificate_path;
  std::string eps = "0.2", delta = "0.1";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> practical_steps;
  std::uint64_t num_samples = 1;

  auto* eval = app.add_subcommand("eval", "exact value (or signature) of a circuit file");
  eval->add_option("file", file)->required();

  auto* count = app.add_subcommand("count", "FPRAS estimate of Z0");
  count->add_option("file", file)->required();
  count->add_option("--eps", eps, "relative accuracy in (0,1]");
  count->add_option("--seed", seed, "RNG seed (printed either way)");
  count->add_option("--practical-steps", practical_steps,
                    "expert: chain steps per sample, below the proven budget");

  auto* sample = app.add_subcommand("sample", "near-uniform assignments");
  sample->add_option("file", file)->required();
  sample->add_option("--delta", delta, "total variation budget in (0,1)");
  sample->add_option("--seed", seed, "RNG seed (printed either way)");
  sample->add_option("-n", num_samples, "number of samples");
  sample->add_option("--practical-steps", practical_steps,
                     "expert: chain steps per sample, below the proven budget");

  auto* check = app.add_subcommand("check", "class membership with certificates");
  check->add_option("file", file)->required();
  check->add_option("--class", klass, "windable | even-windable | strictly-terraced")->required();
  check->add_option("--emit-certificate", certificate_path, "write the certificate JSON here");

  auto* pratc = app.add_subcommand("prat", "exact Prat ratio of a signature");
  pratc->add_option("file", file)->required();

  auto* synth = app.add_subcommand("synth3", "matchings circuit for an arity-3 signature");
  synth->add_option("file", file)->required();
  synth->add_option("-o", out_path, "output matchings-circuit JSON")->required();

  auto* reduce = app.add_subcommand("reduce-pm", "reduce a closed circuit to #PM");
  reduce->add_option("file", file)->required();
  reduce->add_option("-o", out_path, "output graph file")->required();

  auto* hada = app.add_subcommand("hadamard", "unnormalized Hadamard transform");
  hada->add_option("file", file)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) return run_eval(file);
    if (count->parsed()) return run_count(file, eps, seed, practical_steps);
    if (sample->parsed()) return run_sample(file, delta, seed, num_samples, practical_steps);
    if (check->parsed()) return run_check(file, klass, certificate_path, threads);
    if (pratc->parsed()) return run_prat(file);
    if (synth->parsed()) return run_synth3(file, out_path);
    if (reduce->parsed()) return run_reduce_pm(file, out_path);
    if (hada->parsed()) return run_hadamard(file);
  } catch (const holant::NotExpressibleError& e) {
    std::cerr << "NOT_EXPRESSIBLE: " << e.what() << "\n";
    return kExitVerdict;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
