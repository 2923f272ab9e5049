// eprlab — invariant perfect correlation toolkit.
//
// Subcommands: decompose, classify, falsify, simulate, scan. Machine
// output (JSON/CSV) goes to standard output or files; human summaries go
// to standard error. Exit codes: 0 success/certified, 1 falsified,
// 2 usage or validation error.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eprlab/channel.hpp"
#include "eprlab/correlation_graph.hpp"
#include "eprlab/invariance.hpp"
#include "eprlab/pauli.hpp"
#include "eprlab/qudit.hpp"
#include "eprlab/serialization.hpp"

#ifndef EPRLAB_VERSION
#define EPRLAB_VERSION "0.0.0"
#endif

namespace {

using namespace eprlab;

struct InputRecord {
  std::string path;
  std::uint64_t digest = 0;
};

std::string read_file(const std::string& path, std::vector<InputRecord>& inputs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::parse_error, "cannot open input file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  inputs.push_back({path, h});
  return text;
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& output_path, const std::string& command,
                    const std::vector<std::string>& argv, std::uint64_t seed,
                    const std::vector<InputRecord>& inputs) {
  JsonWriter w;
  w.begin_object();
  w.key("command").value(command);
  w.key("argv").begin_array();
  for (const auto& a : argv) w.value(a);
  w.end_array();
  w.key("seed").value(seed);
  w.key("version").value(std::string(EPRLAB_VERSION));
  w.key("inputs").begin_array();
  for (const auto& rec : inputs) {
    char digest[24];
    std::snprintf(digest, sizeof(digest), "0x%016" PRIx64, rec.digest);
    w.begin_object();
    w.key("path").value(rec.path);
    w.key("fnv1a64").value(std::string(digest));
    w.end_object();
  }
  w.end_array();
  w.key("timestamp").value(iso_timestamp());
  w.end_object();
  const std::string path = output_path + ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(errc::invalid_argument, "cannot write manifest: " + path);
  out << w.str() << "\n";
}

DensityMatrix builtin_state(const std::string& name) {
  if (name == "singlet") return singlet_projector();
  if (name == "phi-plus") return phi_plus_state().projector();
  const auto parse_dim = [&](const std::string& prefix) {
    const std::string digits = name.substr(prefix.size());
    char* end = nullptr;
    const long d = std::strtol(digits.c_str(), &end, 10);
    if (digits.empty() || *end != '\0' || d < 2 || d > 12)
      throw Error(errc::invalid_argument,
                  "built-in state dimension must be an integer in [2, 12]: " + name);
    return static_cast<int>(d);
  };
  if (name.rfind("max-entangled:", 0) == 0)
    return max_entangled_state(parse_dim("max-entangled:")).projector();
  if (name.rfind("mixed:", 0) == 0) return maximally_mixed(parse_dim("mixed:"));
  throw Error(errc::invalid_argument,
              "unknown built-in state \"" + name +
                  "\" (expected singlet, phi-plus, max-entangled:d, or mixed:d)");
}

DensityMatrix load_state(const std::string& input_path, const std::string& state_name,
                         std::vector<InputRecord>& inputs) {
  if (!input_path.empty() && !state_name.empty())
    throw Error(errc::invalid_argument, "give either an input file or --state, not both");
  if (input_path.empty() && state_name.empty())
    throw Error(errc::invalid_argument, "missing input: provide a density JSON file or --state");
  if (!state_name.empty()) return builtin_state(state_name);
  return parse_density(read_file(input_path, inputs));
}

std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed_flag) {
  if (seed_given) return seed_flag;
  if (const char* env = std::getenv("EPRLAB_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*env == '\0' || *end != '\0')
      throw Error(errc::invalid_argument,
                  std::string("EPRLAB_SEED must be a non-negative integer, got \"") + env +
                      "\"");
    return static_cast<std::uint64_t>(v);
  }
  return 0;
}

void emit(const std::string& json) { std::cout << json << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> argv_copy(argv, argv + argc);

  CLI::App app{"invariant perfect correlation toolkit"};
  app.set_version_flag("--version", EPRLAB_VERSION);
  app.require_subcommand(1);

  // decompose -----------------------------------------------------------
  auto* cmd_decompose = app.add_subcommand(
      "decompose", "Correlation-tensor decomposition of a 2x2 state");
  std::string dec_input, dec_state;
  cmd_decompose->add_option("input", dec_input, "density JSON file");
  cmd_decompose->add_option("--state", dec_state, "built-in state name");

  // classify ------------------------------------------------------------
  auto* cmd_classify = app.add_subcommand(
      "classify", "Cycle-type classification of outcome correlations");
  std::string cls_input, cls_state, cls_basis = "computational";
  double cls_tol = kPerfectionTolDefault;
  cmd_classify->add_option("input", cls_input, "density JSON file");
  cmd_classify->add_option("--state", cls_state, "built-in state name");
  cmd_classify->add_option("--basis", cls_basis,
                           "basis JSON file, \"computational\", or \"fourier\"");
  cmd_classify->add_option("--tol", cls_tol, "perfection tolerance");

  // falsify -------------------------------------------------------------
  auto* cmd_falsify = app.add_subcommand(
      "falsify", "Certify or falsify invariance of perfect correlations");
  std::string fal_input, fal_state;
  int fal_probes = 20;
  std::uint64_t fal_seed = 0;
  bool fal_refine = false;
  cmd_falsify->add_option("input", fal_input, "density JSON file");
  cmd_falsify->add_option("--state", fal_state, "built-in state name");
  cmd_falsify->add_option("--probes", fal_probes, "number of Haar candidate bases");
  auto* fal_seed_opt = cmd_falsify->add_option("--seed", fal_seed, "RNG seed");
  cmd_falsify->add_flag("--refine", fal_refine, "locally strengthen the witness");

  // simulate ------------------------------------------------------------
  auto* cmd_simulate = app.add_subcommand(
      "simulate", "Collective U (x) U channel transmission Monte Carlo");
  std::string sim_input, sim_state, sim_csv;
  long sim_trials = 1000;
  std::uint64_t sim_seed = 0;
  int sim_workers = default_workers();
  cmd_simulate->add_option("input", sim_input, "density JSON file");
  cmd_simulate->add_option("--state", sim_state, "built-in state name");
  cmd_simulate->add_option("--trials", sim_trials, "number of channel trials");
  auto* sim_seed_opt = cmd_simulate->add_option("--seed", sim_seed, "RNG seed");
  cmd_simulate->add_option("--csv", sim_csv, "write per-trial CSV to this path");
  cmd_simulate->add_option("--workers", sim_workers, "worker thread count");

  // scan ----------------------------------------------------------------
  auto* cmd_scan = app.add_subcommand(
      "scan", "Random-state sweep of the invariance defect");
  int scan_dim = 2;
  long scan_count = 100;
  int scan_probes = 100;
  std::uint64_t scan_seed = 0;
  bool scan_refine = false;
  int scan_workers = default_workers();
  cmd_scan->add_option("--dim", scan_dim, "local dimension (2..8)")->required();
  cmd_scan->add_option("--count", scan_count, "number of random states");
  cmd_scan->add_option("--probes", scan_probes, "random bases probed per state");
  auto* scan_seed_opt = cmd_scan->add_option("--seed", scan_seed, "RNG seed");
  cmd_scan->add_flag("--refine", scan_refine, "refine the argmin state locally");
  cmd_scan->add_option("--workers", scan_workers, "worker thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::vector<InputRecord> inputs;

    if (cmd_decompose->parsed()) {
      const DensityMatrix rho = load_state(dec_input, dec_state, inputs);
      if (rho.local_dim() != 2 || !rho.bipartite())
        throw Error(errc::dimension_mismatch, "decompose requires local_dim 2");
      const CorrelationTensorDecomposition dec = decompose(rho);
      emit(to_json(dec));
      const AntisymmetricSplit split = antisymmetric_split(dec.tensor);
      std::fprintf(stderr,
                   "decompose: |alpha| = %.6g, |beta| = %.6g, split sign %+d, "
                   "split residual %.6g\n",
                   dec.alpha.norm(), dec.beta.norm(), split.sign, split.residual);
      return 0;
    }

    if (cmd_classify->parsed()) {
      const DensityMatrix rho = load_state(cls_input, cls_state, inputs);
      OrthonormalBasis basis = computational_basis(rho.local_dim());
      if (cls_basis == "fourier")
        basis = fourier_basis(rho.local_dim());
      else if (cls_basis != "computational")
        basis = parse_basis(read_file(cls_basis, inputs));
      const PerfectCorrelationVerdict verdict =
          classify(joint_distribution(rho, basis), cls_tol);
      emit(to_json(verdict));
      const char* kind = verdict.perfect() ? "perfect"
                         : verdict.degenerate() ? "degenerate"
                                                : "imperfect";
      std::fprintf(stderr, "classify: %s, signature %s, leakage %.6g\n", kind,
                   verdict.signature.to_string().c_str(), verdict.leakage);
      return 0;
    }

    if (cmd_falsify->parsed()) {
      const DensityMatrix rho = load_state(fal_input, fal_state, inputs);
      FalsifyOptions opts;
      opts.seed = resolve_seed(fal_seed_opt->count() > 0, fal_seed);
      opts.haar_candidates = fal_probes;
      opts.refine = fal_refine;
      const FalsificationResult result = falsify(rho, opts);
      emit(to_json(result));
      switch (result.status) {
        case FalsifyStatus::certified_invariant:
          std::fprintf(stderr, "falsify: certified invariant\n");
          return 0;
        case FalsifyStatus::falsified:
          if (result.witness && result.witness->kind == WitnessKind::signature_mismatch)
            std::fprintf(stderr, "falsify: falsified, signature mismatch %s vs %s\n",
                         result.witness->verdict_1.signature.to_string().c_str(),
                         result.witness->verdict_2.signature.to_string().c_str());
          else
            std::fprintf(stderr, "falsify: falsified, witness kind %s, defect %.6g\n",
                         witness_kind_name(result.witness->kind), result.defect);
          return 1;
        case FalsifyStatus::inconclusive:
          break;
      }
      throw Error(errc::invalid_argument,
                  "analysis inconclusive: no verdict within the probe budget");
    }

    if (cmd_simulate->parsed()) {
      const DensityMatrix rho = load_state(sim_input, sim_state, inputs);
      const std::uint64_t seed = resolve_seed(sim_seed_opt->count() > 0, sim_seed);
      if (sim_workers < 1)
        throw Error(errc::invalid_argument, "--workers must be >= 1");
      const ChannelConfig config = make_channel_config(rho, sim_trials, seed, sim_workers);
      const ChannelStats stats = simulate(config);
      emit(to_json(stats));
      if (!sim_csv.empty()) {
        std::ofstream out(sim_csv, std::ios::binary);
        if (!out) throw Error(errc::invalid_argument, "cannot write CSV: " + sim_csv);
        out << to_csv(stats);
        out.close();
        write_manifest(sim_csv, "simulate", argv_copy, seed, inputs);
      }
      std::fprintf(stderr, "simulate: mean %.6g, min %.6g over %ld trials\n", stats.mean,
                   stats.min, stats.trials);
      return 0;
    }

    if (cmd_scan->parsed()) {
      if (scan_dim < 2 || scan_dim > 8)
        throw Error(errc::invalid_argument, "scan requires --dim in [2, 8]");
      if (scan_count < 1) throw Error(errc::invalid_argument, "--count must be >= 1");
      if (scan_workers < 1)
        throw Error(errc::invalid_argument, "--workers must be >= 1");
      const std::uint64_t seed = resolve_seed(scan_seed_opt->count() > 0, scan_seed);
      ScanOptions opts;
      opts.refine = scan_refine;
      opts.workers = scan_workers;
      const ScanReport report =
          scan_random_states(scan_dim, scan_count, scan_probes, seed, opts);
      emit(to_json(report));
      std::fprintf(stderr, "scan: min defect %.6g at state %ld of %ld\n",
                   report.min_defect, report.argmin_index + 1, report.count);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
