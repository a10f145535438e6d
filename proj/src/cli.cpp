#include "normforge/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "normforge/io.hpp"
#include "normforge/linalg.hpp"
#include "normforge/log.hpp"
#include "normforge/submodular.hpp"

#ifndef NORMFORGE_VERSION
#define NORMFORGE_VERSION "unknown"
#endif

namespace normforge::cli {

namespace {

using io::json;
using Clock = std::chrono::steady_clock;

struct Options {
  std::string instance;
  std::string samples;
  std::string weights;
  std::string matrix;
  std::string blocks;
  std::string out;
  std::string report;
  std::optional<double> p;
  std::optional<double> phat;
  std::optional<double> r;
  std::optional<double> R;
  double epsilon = 0.25;
  double q = 2.0;
  double tol = 1e-8;
  double C_M = 0.5;
  std::uint64_t seed = 1;
  Index threads = 0;
  Index count = 100;
  Index budget = 10000;
  Index probes = 10000;
  bool exact_cuts = false;
  bool exact = false;
};

class Run {
 public:
  Run(std::string command, const Options& opt, std::ostream& out)
      : command_(std::move(command)), opt_(opt), out_(out), start_(Clock::now()) {}

  // Writes text to `path`, or to stdout when path is empty.
  void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
      out_ << text;
      return;
    }
    io::write_text_file(path, text);
    artifacts_.push_back(path);
  }

  void artifact(const std::string& path) { artifacts_.push_back(path); }
  void timing(const std::string& name, double seconds) { timings_[name] = seconds; }

  void finish() {
    if (artifacts_.empty()) return;
    timings_["total"] = std::chrono::duration<double>(Clock::now() - start_).count();
    json config = {{"instance", opt_.instance}, {"samples", opt_.samples},
                   {"weights", opt_.weights},   {"matrix", opt_.matrix},
                   {"blocks", opt_.blocks},     {"epsilon", opt_.epsilon},
                   {"q", opt_.q},               {"tol", opt_.tol},
                   {"C_M", opt_.C_M},           {"threads", opt_.threads},
                   {"count", opt_.count},       {"budget", opt_.budget},
                   {"exact_cuts", opt_.exact_cuts}};
    if (opt_.p) config["p"] = *opt_.p;
    if (opt_.phat) config["phat"] = *opt_.phat;
    if (opt_.r) config["r"] = *opt_.r;
    if (opt_.R) config["R"] = *opt_.R;
    const json manifest = {{"command", command_}, {"config", config},
                           {"seed", opt_.seed},   {"timings", timings_},
                           {"artifacts", artifacts_}, {"version", NORMFORGE_VERSION}};
    io::write_text_file(artifacts_.front() + ".manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  const Options& opt_;
  std::ostream& out_;
  Clock::time_point start_;
  std::vector<std::string> artifacts_;
  std::map<std::string, double> timings_;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

SumNorm load(const Options& opt) {
  SumNorm N = io::load_instance(opt.instance);
  if (opt.p && *opt.p != N.p()) N = SumNorm(N.dim(), *opt.p, N.terms(), N.weights());
  return N;
}

SamplerConfig sampler_config(const Options& opt) {
  SamplerConfig cfg;
  cfg.seed = derive_seed(opt.seed, "sampler");
  cfg.threads = opt.threads;
  return cfg;
}

RoundedNorm rounded(const SumNorm& N, const Options& opt) {
  if (opt.r && opt.R) return RoundedNorm(N, *opt.r, *opt.R);
  const auto [lo, hi] = probe_rounding(N, 512, derive_seed(opt.seed, "rounding"));
  if (!(lo > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "instance vanishes on probed directions; pass --r and --R");
  }
  return RoundedNorm(N, opt.r.value_or(0.5 * lo), opt.R.value_or(2.0 * hi));
}

bool cut_instance(const SumNorm& N) {
  if (N.dim() > 20 || N.size() == 0) return false;
  for (const NormTerm& t : N.terms()) {
    if (!std::holds_alternative<GraphEdgeTerm>(t) && !std::holds_alternative<HyperedgeTerm>(t)) {
      return false;
    }
  }
  return true;
}

VerificationReport verify_weights(const SumNorm& N, const Vector& w, const Options& opt) {
  if (opt.exact_cuts) {
    if (!cut_instance(N)) {
      fail(ErrorKind::kInvalidArgument,
           "--exact-cuts needs an instance of graph_edge / hyperedge terms with dim <= 20");
    }
    return exact_cut_eps(cut_function_from(N), w, opt.epsilon);
  }
  ProbeOptions po;
  po.budget = opt.budget;
  po.seed = derive_seed(opt.seed, "verify");
  po.epsilon = opt.epsilon;
  return empirical_eps(N, apply_weights(N, w), po);
}

int cmd_sample(const Options& opt, Run& run) {
  const SumNorm N = load(opt);
  const double phat = opt.phat.value_or(N.phat());
  const auto t0 = Clock::now();
  const SampleBatch batch = sample_mu(rounded(N, opt), phat, opt.count, sampler_config(opt));
  run.timing("sample", seconds_since(t0));
  std::ostringstream s;
  s.precision(17);
  io::write_samples(s, batch);
  run.emit(opt.out, s.str());
  return kExitOk;
}

int cmd_weights(const Options& opt, Run& run) {
  const SumNorm N = load(opt);
  json result;
  if (opt.exact) {
    const ProbabilityVector rho = exact_leverage_probs(N);
    result = {{"rho", io::to_json(rho.rho)}, {"exact", true}};
  } else {
    SampleBatch batch;
    if (!opt.samples.empty()) {
      batch = io::read_samples(opt.samples);
      if (batch.dim() != N.dim()) fail(ErrorKind::kDimensionMismatch, "samples have the wrong dimension");
    } else {
      const Index k = tau_sample_count(N.dim(), N.size());
      batch = sample_mu(rounded(N, opt), N.phat(), k, sampler_config(opt));
    }
    const TauVector tau = estimate_tau(N, batch, N.p());
    result = {{"tau", io::to_json(tau.tau)},
              {"rho", io::to_json(to_probabilities(tau).rho)},
              {"samples", tau.samples}};
  }
  run.emit(opt.out, result.dump(2) + "\n");
  return kExitOk;
}

int cmd_sparsify(const Options& opt, Run& run) {
  const SumNorm N = load(opt);
  SparsifyConfig cfg;
  cfg.epsilon = opt.epsilon;
  cfg.C_M = opt.C_M;
  cfg.seed = opt.seed;
  cfg.sampler = sampler_config(opt);
  if (opt.r || opt.R) {
    if (!(opt.r && opt.R)) fail(ErrorKind::kInvalidArgument, "--r and --R go together");
    cfg.rounding = Rounding{*opt.r, *opt.R};
  }
  const auto t0 = Clock::now();
  const SparsifierResult result = sparsify_p_power(N, cfg);
  run.timing("sparsify", seconds_since(t0));

  const auto t1 = Clock::now();
  Options vopt = opt;
  vopt.exact_cuts = opt.exact_cuts || cut_instance(N);
  const VerificationReport report = verify_weights(N, result.weights, vopt);
  run.timing("verify", seconds_since(t1));

  if (opt.out.empty()) {
    std::ostringstream s;
    s.precision(17);
    s << io::to_json(result.weights).dump() << "\n";
    run.emit("", s.str());
  } else {
    io::write_weights(opt.out, result.weights);
    run.artifact(opt.out);
  }
  json rep = io::to_json(result);
  rep["verification"] = io::to_json(report);
  if (!opt.report.empty()) run.emit(opt.report, rep.dump(2) + "\n");
  return kExitOk;
}

int cmd_lewis(const Options& opt, Run& run) {
  const Matrix A = read_csv_matrix(opt.matrix);
  BlockStructure blocks;
  if (opt.blocks.empty()) {
    blocks = BlockStructure::uniform(A.rows(), 1, 2.0, opt.q);
  } else {
    blocks = io::blocks_from_json(io::read_json_file(opt.blocks), A.rows(), opt.q);
  }
  const auto t0 = Clock::now();
  const LewisResult result = block_lewis_fixed_point(A, blocks, opt.tol);
  run.timing("fixed_point", seconds_since(t0));
  Rng rng = make_rng(derive_seed(opt.seed, "certify"));
  const LewisCertificate cert = certify(result, A, blocks, opt.probes, rng);
  json doc = io::to_json(result);
  doc["certificate"] = io::to_json(cert);
  run.emit(opt.out, doc.dump(2) + "\n");
  if (!cert.passed) {
    log::warn("lewis: certificate failed: ", cert.failure);
    return kExitFailed;
  }
  return kExitOk;
}

int cmd_verify(const Options& opt, Run& run) {
  const SumNorm N = load(opt);
  const Vector w = io::read_weights(opt.weights, N.size());
  const VerificationReport report = verify_weights(N, w, opt);
  run.emit(opt.report.empty() ? opt.out : opt.report, io::to_json(report).dump(2) + "\n");
  return report.pass ? kExitOk : kExitFailed;
}

int cmd_bench(const Options& opt, Run& run) {
  const SumNorm N = load(opt);
  if (N.size() == 0) fail(ErrorKind::kInvalidArgument, "bench: instance has no terms");
  std::ostringstream csv;
  csv.precision(10);
  csv << "metric,value\n";

  Rng rng = make_rng(derive_seed(opt.seed, "bench"));
  const Index evals = std::max<Index>(1, 200000 / N.size());
  reset_term_evaluations();
  auto t0 = Clock::now();
  double sink = 0.0;
  for (Index i = 0; i < evals; ++i) sink += N.eval(gaussian_vector(N.dim(), rng));
  double dt = seconds_since(t0);
  csv << "terms_per_sec," << static_cast<double>(term_evaluations()) / dt << "\n";
  log::debug("bench checksum ", sink);

  t0 = Clock::now();
  const SampleBatch batch = sample_mu(rounded(N, opt), N.phat(), opt.count, sampler_config(opt));
  dt = seconds_since(t0);
  csv << "samples_per_sec," << static_cast<double>(batch.count()) / dt << "\n";

  SparsifyConfig cfg;
  cfg.epsilon = opt.epsilon;
  cfg.C_M = opt.C_M;
  cfg.seed = opt.seed;
  cfg.sampler = sampler_config(opt);
  if (opt.r && opt.R) cfg.rounding = Rounding{*opt.r, *opt.R};
  reset_term_evaluations();
  t0 = Clock::now();
  const SparsifierResult result = sparsify_p_power(N, cfg);
  csv << "sparsify_seconds," << seconds_since(t0) << "\n";
  csv << "sparsify_evaluations," << term_evaluations() << "\n";
  for (const StageRecord& s : result.stage_log) {
    csv << "stage_" << s.stage << "_seconds," << s.seconds << "\n";
    csv << "stage_" << s.stage << "_evaluations," << s.evaluations << "\n";
  }
  run.emit(opt.out, csv.str());
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparsify sums of semi-norms", "normforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NORMFORGE_VERSION);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Random seed");
    sub->add_option("--threads", opt.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  };
  auto instance = [&](CLI::App* sub) {
    sub->add_option("--instance", opt.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--p", opt.p, "Override the instance power p");
  };

  CLI::App* sample = app.add_subcommand("sample", "Draw samples from exp(-N(x)^phat)");
  instance(sample);
  common(sample);
  sample->add_option("--phat", opt.phat, "Exponent of the sampling density");
  sample->add_option("--count", opt.count, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--out", opt.out, "Output JSONL (default stdout)");
  sample->add_option("--r", opt.r, "Declared lower rounding constant");
  sample->add_option("--R", opt.R, "Declared upper rounding constant");

  CLI::App* weights = app.add_subcommand("weights", "Estimate importance scores tau and rho");
  instance(weights);
  common(weights);
  weights->add_option("--samples", opt.samples, "Samples JSONL")->check(CLI::ExistingFile);
  weights->add_flag("--exact", opt.exact, "Exact leverage scores (linear terms only)");
  weights->add_option("--out", opt.out, "Output JSON (default stdout)");

  CLI::App* sparsify = app.add_subcommand("sparsify", "Sparsify an instance");
  instance(sparsify);
  common(sparsify);
  sparsify->add_option("--epsilon", opt.epsilon, "Target accuracy in (0, 1)");
  sparsify->add_option("--C-M", opt.C_M, "Draw count constant");
  sparsify->add_option("--r", opt.r, "Declared lower rounding constant");
  sparsify->add_option("--R", opt.R, "Declared upper rounding constant");
  sparsify->add_option("--out", opt.out, "Weights output (.json or .csv)");
  sparsify->add_option("--report", opt.report, "Report JSON");
  sparsify->add_option("--budget", opt.budget, "Verifier probe budget");
  sparsify->add_flag("--exact-cuts", opt.exact_cuts, "Verify by cut enumeration");

  CLI::App* lewis = app.add_subcommand("lewis", "Block Lewis weights with certificate");
  common(lewis);
  lewis->add_option("--matrix", opt.matrix, "Row-major CSV matrix")->required()->check(CLI::ExistingFile);
  lewis->add_option("--blocks", opt.blocks, "Block structure JSON")->check(CLI::ExistingFile);
  lewis->add_option("--q", opt.q, "Outer exponent");
  lewis->add_option("--tol", opt.tol, "Fixed-point tolerance");
  lewis->add_option("--probes", opt.probes, "Certificate probes");
  lewis->add_option("--out", opt.out, "Output JSON (default stdout)");

  CLI::App* verify = app.add_subcommand("verify", "Measure the accuracy of a reweighting");
  instance(verify);
  common(verify);
  verify->add_option("--weights", opt.weights, "Weights (.json or .csv)")->required()->check(CLI::ExistingFile);
  verify->add_option("--epsilon", opt.epsilon, "Pass threshold");
  verify->add_option("--budget", opt.budget, "Probe budget");
  verify->add_flag("--exact-cuts", opt.exact_cuts, "Enumerate all cuts");
  verify->add_option("--report", opt.report, "Report JSON (default stdout)");
  verify->add_option("--out", opt.out, "Alias for --report");

  CLI::App* bench = app.add_subcommand("bench", "Timing and evaluation counts");
  instance(bench);
  common(bench);
  bench->add_option("--epsilon", opt.epsilon, "Accuracy for the sparsify pass");
  bench->add_option("--C-M", opt.C_M, "Draw count constant");
  bench->add_option("--count", opt.count, "Samples for the walk timing");
  bench->add_option("--r", opt.r, "Declared lower rounding constant");
  bench->add_option("--R", opt.R, "Declared upper rounding constant");
  bench->add_option("--out", opt.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << NORMFORGE_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Run run_state(chosen->get_name(), opt, out);
  try {
    int code = kExitUsage;
    if (chosen == sample) code = cmd_sample(opt, run_state);
    else if (chosen == weights) code = cmd_weights(opt, run_state);
    else if (chosen == sparsify) code = cmd_sparsify(opt, run_state);
    else if (chosen == lewis) code = cmd_lewis(opt, run_state);
    else if (chosen == verify) code = cmd_verify(opt, run_state);
    else if (chosen == bench) code = cmd_bench(opt, run_state);
    run_state.finish();
    return code;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kInvalidArgument:
      case ErrorKind::kDimensionMismatch:
      case ErrorKind::kIo:
        return kExitUsage;
      default:
        return kExitFailed;
    }
  }
}

}  // namespace normforge::cli
