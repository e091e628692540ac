#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wjl/detail/format.hpp"
#include "wjl/error.hpp"
#include "wjl/generators.hpp"
#include "wjl/harness/csv.hpp"
#include "wjl/harness/parallel.hpp"
#include "wjl/harness/stats.hpp"
#include "wjl/norms.hpp"
#include "wjl/projection.hpp"
#include "wjl/random.hpp"
#include "wjl/sketch.hpp"
#include "wjl/version.hpp"

namespace wjl::harness {

enum class Scale { paper, desk };

inline Scale parse_scale(std::string_view s) {
  if (s == "paper") return Scale::paper;
  if (s == "desk") return Scale::desk;
  throw InvalidArgument("unknown scale \"" + std::string(s) + "\" (expected paper or desk)");
}

inline std::string_view to_string(Scale s) { return s == Scale::paper ? "paper" : "desk"; }

/// Seed streams. Every random quantity in an experiment derives from the
/// master seed through derive_seed(master, stream, a, b), so trials can run in
/// any order on any number of threads.
enum class SeedStream : std::uint64_t { data = 1, matrix = 2, sketch = 3 };

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(master, static_cast<std::uint64_t>(stream)), a, b);
}

struct ExperimentConfig {
  std::string experiment = "fig1";  ///< fig1 | fig2 | fig3 | fig4 | sketch-eval | verify
  Scale scale = Scale::desk;
  std::size_t trials = 250;
  std::vector<std::size_t> k_list;
  SparseSpec spec;
  std::filesystem::path out_dir = ".";
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
  bool timing = false;  ///< adds a wall_time_ms column; output is then no longer reproducible

  std::vector<std::size_t> overlap_arms = {2, 10};  ///< fig3
  std::vector<std::size_t> l_arms = {10, 30, 100};  ///< fig4
  double overlap_fraction = 0.8;                    ///< fig4: l_overlap = fraction * l

  std::vector<double> epsilons;  ///< sketch-eval grid
  std::vector<double> deltas;    ///< sketch-eval grid
  std::size_t pairs = 2;         ///< sketch-eval: generated pairs per grid point

  void validate() const {
    if (trials == 0) throw InvalidArgument("config: trials must be at least 1");
    if (threads == 0) throw InvalidArgument("config: threads must be at least 1");
    const bool needs_k = experiment == "fig1" || experiment == "fig2" || experiment == "fig3" || experiment == "fig4";
    if (needs_k && k_list.empty()) throw InvalidArgument("config: k list is empty");
    for (std::size_t k : k_list)
      if (k == 0) throw InvalidArgument("config: k must be positive");
    if (experiment == "sketch-eval") {
      if (epsilons.empty() || deltas.empty()) throw InvalidArgument("config: empty epsilon/delta grid");
      if (pairs == 0) throw InvalidArgument("config: pairs must be at least 1");
    }
  }

  /// Everything that determines the output bytes. Thread count and the
  /// output directory are left out so they cannot change the CSV.
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["scale"] = std::string(to_string(scale));
    j["trials"] = trials;
    j["k_list"] = k_list;
    j["master_seed"] = master_seed;
    j["timing"] = timing;
    j["spec"] = {{"d", spec.d},           {"l_x", spec.l_x},       {"l_w", spec.l_w},
                 {"l_overlap", spec.l_overlap}, {"norm_x", spec.norm_x}};
    if (experiment == "fig3") j["overlap_arms"] = overlap_arms;
    if (experiment == "fig4") {
      j["l_arms"] = l_arms;
      j["overlap_fraction"] = overlap_fraction;
    }
    if (experiment == "sketch-eval") {
      j["epsilons"] = epsilons;
      j["deltas"] = deltas;
      j["pairs"] = pairs;
    }
    return j;
  }
};

/// Defaults for one experiment at paper scale or the reduced desk scale.
inline ExperimentConfig preset(const std::string& experiment, Scale scale) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.scale = scale;
  const bool paper = scale == Scale::paper;
  c.spec.d = paper ? 200000 : 2000;
  c.spec.l_x = c.spec.l_w = 10;
  c.spec.l_overlap = 8;
  c.spec.norm_x = 1.0;
  c.trials = paper ? 250 : 100;
  if (experiment == "fig1" || experiment == "fig2") {
    c.k_list = paper ? std::vector<std::size_t>{100, 1000, 10000, 100000} : std::vector<std::size_t>{100, 1000, 10000};
  } else if (experiment == "fig3" || experiment == "fig4") {
    c.k_list = {paper ? std::size_t{100000} : std::size_t{10000}};
  } else if (experiment == "sketch-eval") {
    c.spec.l_x = c.spec.l_w = c.spec.l_overlap = 2;  // distortion sqrt(2) <= 1.5
    c.trials = paper ? 500 : 100;
    c.epsilons = paper ? std::vector<double>{0.2, 0.3, 0.5} : std::vector<double>{0.3, 0.5};
    c.deltas = paper ? std::vector<double>{0.01, 0.05, 0.1} : std::vector<double>{0.05, 0.2};
    c.pairs = paper ? 3 : 1;
  }
  return c;
}

struct TrialRecord {
  std::string arm;
  std::size_t k = 0;
  std::size_t trial_index = 0;
  std::uint64_t matrix_seed = 0;
  double estimate = 0.0;
  double true_value = 0.0;
  std::optional<double> ratio;  ///< absent when true_value == 0
  double distortion = 0.0;      ///< NaN when the weighted norm is zero
  double wall_time_ms = 0.0;
};

/// One row of the sketch-eval table.
struct SketchEvalRecord {
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t pair = 0;
  double distortion = 0.0;
  double true_value = 0.0;
  std::string arm;  ///< "planned" or "quarter_m"
  std::size_t r = 0;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  std::size_t serialized_bytes = 0;
  std::size_t formula_bytes = 0;
  double wall_time_ms = 0.0;

  double success_rate() const { return static_cast<double>(successes) / static_cast<double>(trials); }
};

struct ExperimentResult {
  ExperimentConfig config;
  nlohmann::json metadata;
  std::vector<TrialRecord> records;
  std::vector<SketchEvalRecord> sketch_records;

  /// Estimates (or ratios) of one (arm, k) group, in trial order.
  std::vector<double> column(const std::string& arm, std::size_t k, bool ratios = false) const {
    std::vector<double> out;
    for (const auto& r : records) {
      if (r.arm != arm || r.k != k) continue;
      if (ratios) {
        if (r.ratio) out.push_back(*r.ratio);
      } else {
        out.push_back(r.estimate);
      }
    }
    return out;
  }

  std::string to_csv() const {
    using wjl::detail::format_double;
    std::ostringstream os;
    os << "# " << metadata.dump() << '\n';
    if (config.experiment == "sketch-eval") {
      os << "epsilon,delta,pair,distortion,true_value,arm,r,m,trials,successes,success_rate,serialized_bytes,"
            "formula_bytes";
      if (config.timing) os << ",wall_time_ms";
      os << '\n';
      for (const auto& r : sketch_records) {
        os << format_double(r.epsilon) << ',' << format_double(r.delta) << ',' << r.pair << ','
           << format_double(r.distortion) << ',' << format_double(r.true_value) << ',' << r.arm << ',' << r.r << ','
           << r.m << ',' << r.trials << ',' << r.successes << ',' << format_double(r.success_rate()) << ','
           << r.serialized_bytes << ',' << r.formula_bytes;
        if (config.timing) os << ',' << format_double(r.wall_time_ms);
        os << '\n';
      }
      return os.str();
    }
    os << "experiment,arm,k,trial,matrix_seed,estimate,true_value,ratio,distortion";
    if (config.timing) os << ",wall_time_ms";
    os << '\n';
    for (const auto& r : records) {
      os << config.experiment << ',' << r.arm << ',' << r.k << ',' << r.trial_index << ',' << r.matrix_seed << ','
         << format_double(r.estimate) << ',' << format_double(r.true_value) << ','
         << (r.ratio ? format_double(*r.ratio) : std::string()) << ','
         << (std::isnan(r.distortion) ? std::string() : format_double(r.distortion));
      if (config.timing) os << ',' << format_double(r.wall_time_ms);
      os << '\n';
    }
    return os.str();
  }

  std::filesystem::path write(const std::filesystem::path& out_dir) const {
    const auto path = out_dir / (config.experiment + ".csv");
    write_file(path, to_csv());
    return path;
  }
};

namespace detail {

struct PreparedPair {
  std::vector<SparseEntry> x;
  std::vector<SparseEntry> w;
  double true_value = 0.0;
  double distortion = 0.0;
};

inline PreparedPair prepare(const WeightedPair& p) {
  PreparedPair out;
  out.x = to_sparse(p.x());
  out.w = to_sparse(p.w());
  out.true_value = weighted_sq_norm(p);
  out.distortion = out.true_value > 0.0 ? wjl::distortion(p) : std::nan("");
  return out;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

/// One projection trial: fresh matrix, reduce both vectors, estimate.
inline TrialRecord projection_trial(const std::string& arm, std::size_t d, std::size_t k, std::size_t trial,
                                    std::uint64_t matrix_seed, const std::vector<SparseEntry>& x,
                                    const std::vector<SparseEntry>& w, double true_value, double dist) {
  const auto start = std::chrono::steady_clock::now();
  const auto a = sample_matrix(d, k, matrix_seed);
  TrialRecord r;
  r.arm = arm;
  r.k = k;
  r.trial_index = trial;
  r.matrix_seed = matrix_seed;
  r.estimate = rho(reduce(a, std::span<const SparseEntry>(x)), reduce(a, std::span<const SparseEntry>(w)));
  r.true_value = true_value;
  if (true_value != 0.0) r.ratio = r.estimate / true_value;
  r.distortion = dist;
  r.wall_time_ms = elapsed_ms(start);
  return r;
}

inline nlohmann::json base_metadata(const ExperimentConfig& cfg) {
  nlohmann::json meta;
  meta["config"] = cfg.to_json();
  meta["version"] = kVersion;
  return meta;
}

/// Fixed pairs (one per arm), fresh matrix per (arm, k, trial).
inline ExperimentResult run_fixed_pair_arms(const ExperimentConfig& cfg, const std::vector<std::string>& arm_names,
                                            const std::vector<SparseSpec>& arm_specs) {
  cfg.validate();
  std::vector<PreparedPair> pairs;
  for (const auto& s : arm_specs) pairs.push_back(prepare(gen_pair(s)));

  struct Task {
    std::size_t arm, k, trial;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < arm_specs.size(); ++a)
    for (std::size_t k : cfg.k_list)
      for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({a, k, t});

  ExperimentResult result;
  result.config = cfg;
  result.records.resize(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    const auto& p = pairs[task.arm];
    result.records[i] = projection_trial(arm_names[task.arm], arm_specs[task.arm].d, task.k, task.trial,
                                         derive_seed(cfg.master_seed, SeedStream::matrix, task.k, task.trial), p.x,
                                         p.w, p.true_value, p.distortion);
  });

  result.metadata = base_metadata(cfg);
  nlohmann::json arm_reference = nlohmann::json::object();
  for (std::size_t a = 0; a < arm_names.size(); ++a) {
    arm_reference[arm_names[a]] = {{"estimate", pairs[a].true_value}, {"ratio", 1.0}};
    if (!std::isnan(pairs[a].distortion)) arm_reference[arm_names[a]]["distortion"] = pairs[a].distortion;
  }
  result.metadata["arm_reference"] = arm_reference;
  if (arm_names.size() == 1) {
    result.metadata["true_value"] = pairs[0].true_value;
    result.metadata["reference"] = {{"estimate", pairs[0].true_value}, {"ratio", 1.0}};
  }
  return result;
}

}  // namespace detail

/// Concentration over matrices: one fixed (x, w), a fresh matrix per (k, trial).
inline ExperimentResult run_fig1(const ExperimentConfig& cfg) {
  SparseSpec s = cfg.spec;
  s.seed = derive_seed(cfg.master_seed, SeedStream::data, 0);
  return detail::run_fixed_pair_arms(cfg, {"main"}, {s});
}

/// Concentration over inputs: one matrix per k and one w, a fresh x per trial
/// whose support meets w's in exactly l_overlap coordinates.
inline ExperimentResult run_fig2(const ExperimentConfig& cfg) {
  cfg.validate();
  SparseSpec s = cfg.spec;
  s.seed = derive_seed(cfg.master_seed, SeedStream::data, 0);
  const WeightedPair base = gen_pair(s);
  const auto w_support = support_of(base.w());
  const auto w_sparse = to_sparse(base.w());

  std::vector<detail::PreparedPair> xs(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    const auto x = gen_x_for_support(s.d, w_support, s.l_x, s.l_overlap, s.norm_x,
                                     derive_seed(cfg.master_seed, SeedStream::data, 1, t));
    xs[t] = detail::prepare(WeightedPair(x, std::vector<double>(base.w().begin(), base.w().end())));
  });

  struct Task {
    std::size_t k, trial;
  };
  std::vector<Task> tasks;
  for (std::size_t k : cfg.k_list)
    for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({k, t});

  ExperimentResult result;
  result.config = cfg;
  result.records.resize(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t i) {
    const auto& task = tasks[i];
    const auto& p = xs[task.trial];
    result.records[i] = detail::projection_trial("main", s.d, task.k, task.trial,
                                                 derive_seed(cfg.master_seed, SeedStream::matrix, task.k, 0), p.x,
                                                 w_sparse, p.true_value, p.distortion);
  });
  result.metadata = detail::base_metadata(cfg);
  result.metadata["true_value"] = nullptr;  // varies per trial; see the true_value column
  result.metadata["reference"] = {{"ratio", 1.0}};
  return result;
}

/// Distortion via overlap: arms differ only in l_overlap; same data seed and
/// the same matrix seeds in every arm.
inline ExperimentResult run_fig3(const ExperimentConfig& cfg) {
  std::vector<std::string> names;
  std::vector<SparseSpec> specs;
  for (std::size_t o : cfg.overlap_arms) {
    SparseSpec s = cfg.spec;
    s.l_overlap = o;
    s.seed = derive_seed(cfg.master_seed, SeedStream::data, 0);
    names.push_back("overlap=" + std::to_string(o));
    specs.push_back(s);
  }
  return detail::run_fixed_pair_arms(cfg, names, specs);
}

/// Distortion via density: l_x = l_w = l, l_overlap = round(fraction * l).
inline ExperimentResult run_fig4(const ExperimentConfig& cfg) {
  std::vector<std::string> names;
  std::vector<SparseSpec> specs;
  for (std::size_t l : cfg.l_arms) {
    SparseSpec s = cfg.spec;
    s.l_x = s.l_w = l;
    s.l_overlap = static_cast<std::size_t>(std::llround(cfg.overlap_fraction * static_cast<double>(l)));
    s.seed = derive_seed(cfg.master_seed, SeedStream::data, 0);
    names.push_back("l=" + std::to_string(l));
    specs.push_back(s);
  }
  return detail::run_fixed_pair_arms(cfg, names, specs);
}

/// Empirical (epsilon, delta) success rate of planned sketches, plus a
/// deliberately undersized arm with m / 4 columns.
inline ExperimentResult run_sketch_eval(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  std::vector<detail::PreparedPair> pairs;
  for (std::size_t p = 0; p < cfg.pairs; ++p) {
    SparseSpec s = cfg.spec;
    s.seed = derive_seed(cfg.master_seed, SeedStream::data, 2, p);
    pairs.push_back(detail::prepare(gen_pair(s)));
    if (!(pairs.back().true_value > 0.0)) throw InvalidArgument("sketch-eval: generated pair has zero weighted norm");
  }
  for (double eps : cfg.epsilons) {
    for (double delta : cfg.deltas) {
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& pair = pairs[p];
        const SketchDims planned = plan_sketch(eps, delta, pair.distortion);
        const SketchDims arms[2] = {planned, {planned.r, std::max<std::size_t>(1, planned.m / 4)}};
        const char* arm_names[2] = {"planned", "quarter_m"};
        for (int a = 0; a < 2; ++a) {
          const auto start = std::chrono::steady_clock::now();
          std::vector<char> ok(cfg.trials, 0);
          parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
            const SketchConfig sc{arms[a].r, arms[a].m, derive_seed(cfg.master_seed, SeedStream::sketch, p, t),
                                  SketchMode::turnstile};
            StreamSketch sx(sc);
            auto sw = sx.sibling();
            for (const auto& e : pair.x) sx.update(e.index, e.value);
            for (const auto& e : pair.w) sw.update(e.index, e.value);
            const double est = estimate(sx, sw).value;
            ok[t] = std::abs(est - pair.true_value) <= eps * pair.true_value;
          });
          SketchEvalRecord rec;
          rec.epsilon = eps;
          rec.delta = delta;
          rec.pair = p;
          rec.distortion = pair.distortion;
          rec.true_value = pair.true_value;
          rec.arm = arm_names[a];
          rec.r = arms[a].r;
          rec.m = arms[a].m;
          rec.trials = cfg.trials;
          for (char c : ok) rec.successes += c ? 1 : 0;
          rec.formula_bytes = StreamSketch::serialized_size(rec.r, rec.m);
          {
            StreamSketch probe(SketchConfig{rec.r, rec.m, cfg.master_seed, SketchMode::turnstile});
            rec.serialized_bytes = probe.serialize().size();
          }
          rec.wall_time_ms = detail::elapsed_ms(start);
          result.sketch_records.push_back(rec);
        }
      }
    }
  }
  result.metadata = detail::base_metadata(cfg);
  nlohmann::json truths = nlohmann::json::array();
  for (const auto& p : pairs) truths.push_back({{"true_value", p.true_value}, {"distortion", p.distortion}});
  result.metadata["pairs"] = truths;
  return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "fig1") return run_fig1(cfg);
  if (cfg.experiment == "fig2") return run_fig2(cfg);
  if (cfg.experiment == "fig3") return run_fig3(cfg);
  if (cfg.experiment == "fig4") return run_fig4(cfg);
  if (cfg.experiment == "sketch-eval") return run_sketch_eval(cfg);
  throw InvalidArgument("unknown experiment \"" + cfg.experiment + "\"");
}

}  // namespace wjl::harness
