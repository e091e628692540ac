// Command-line front end: vector generation, reduction, estimation, stream
// sketching, the figure experiments, verification and plotting.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wjl/harness/csv.hpp"
#include "wjl/harness/experiments.hpp"
#include "wjl/harness/stats.hpp"
#include "wjl/harness/svg.hpp"
#include "wjl/harness/verify.hpp"
#include "wjl/wjl.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

using wjl::harness::ExperimentConfig;

struct ExperimentFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> d, trials, l, l_overlap, threads;
  std::vector<std::size_t> k;
  std::vector<double> epsilon, delta;
  std::optional<std::string> out, scale, config;
  bool timing = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--d", f.d, "Ambient dimension");
  cmd->add_option("--k", f.k, "Reduced dimensions (repeatable or comma separated)")->delimiter(',');
  cmd->add_option("--trials", f.trials, "Trials per arm and k");
  cmd->add_option("--l", f.l, "Nonzeros in x and w");
  cmd->add_option("--l-overlap", f.l_overlap, "Shared nonzero coordinates");
  cmd->add_option("--epsilon", f.epsilon, "sketch-eval accuracy grid")->delimiter(',');
  cmd->add_option("--delta", f.delta, "sketch-eval failure-probability grid")->delimiter(',');
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--scale", f.scale, "Preset: paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--threads", f.threads, "Worker threads");
  cmd->add_option("--config", f.config, "JSON file with any of the flags above");
  cmd->add_flag("--timing", f.timing, "Add a wall_time_ms column (output no longer reproducible)");
}

/// preset(scale) < JSON config file < explicit flags.
ExperimentConfig build_config(const std::string& experiment, const ExperimentFlags& f) {
  nlohmann::json file = nlohmann::json::object();
  if (f.config) {
    try {
      file = nlohmann::json::parse(wjl::harness::read_file(*f.config));
    } catch (const nlohmann::json::exception& e) {
      throw wjl::InvalidArgument(std::string("config: ") + e.what());
    }
    if (!file.is_object()) throw wjl::InvalidArgument("config: top level must be an object");
  }
  std::string scale = file.value("scale", std::string("desk"));
  if (f.scale) scale = *f.scale;
  ExperimentConfig cfg = wjl::harness::preset(experiment, wjl::harness::parse_scale(scale));

  try {
    if (file.contains("seed")) cfg.master_seed = file["seed"].get<std::uint64_t>();
    if (file.contains("d")) cfg.spec.d = file["d"].get<std::size_t>();
    if (file.contains("k")) cfg.k_list = file["k"].get<std::vector<std::size_t>>();
    if (file.contains("trials")) cfg.trials = file["trials"].get<std::size_t>();
    if (file.contains("l")) cfg.spec.l_x = cfg.spec.l_w = file["l"].get<std::size_t>();
    if (file.contains("l_overlap")) cfg.spec.l_overlap = file["l_overlap"].get<std::size_t>();
    if (file.contains("epsilon")) cfg.epsilons = file["epsilon"].get<std::vector<double>>();
    if (file.contains("delta")) cfg.deltas = file["delta"].get<std::vector<double>>();
    if (file.contains("out")) cfg.out_dir = file["out"].get<std::string>();
    if (file.contains("threads")) cfg.threads = file["threads"].get<std::size_t>();
    if (file.contains("timing")) cfg.timing = file["timing"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw wjl::InvalidArgument(std::string("config: ") + e.what());
  }

  if (f.seed) cfg.master_seed = *f.seed;
  if (f.d) cfg.spec.d = *f.d;
  if (!f.k.empty()) cfg.k_list = f.k;
  if (f.trials) cfg.trials = *f.trials;
  if (f.l) cfg.spec.l_x = cfg.spec.l_w = *f.l;
  if (f.l_overlap) cfg.spec.l_overlap = *f.l_overlap;
  if (!f.epsilon.empty()) cfg.epsilons = f.epsilon;
  if (!f.delta.empty()) cfg.deltas = f.delta;
  if (f.out) cfg.out_dir = *f.out;
  if (f.threads) cfg.threads = *f.threads;
  if (f.timing) cfg.timing = true;
  cfg.validate();
  return cfg;
}

void print_summary(const wjl::harness::ExperimentResult& result) {
  using wjl::harness::summarize;
  if (result.config.experiment == "sketch-eval") {
    for (const auto& r : result.sketch_records)
      std::cout << "eps=" << r.epsilon << " delta=" << r.delta << " pair=" << r.pair << " " << r.arm << " r=" << r.r
                << " m=" << r.m << " success=" << r.success_rate() << " bytes=" << r.serialized_bytes << '\n';
    return;
  }
  std::vector<std::pair<std::string, std::size_t>> groups;
  for (const auto& r : result.records) {
    const std::pair<std::string, std::size_t> g{r.arm, r.k};
    if (groups.empty() || groups.back() != g) groups.push_back(g);
  }
  const bool ratios = result.config.experiment == "fig2";
  for (const auto& [arm, k] : groups) {
    const auto values = result.column(arm, k, ratios);
    const auto s = summarize(values);
    std::cout << arm << " k=" << k << " n=" << s.n << (ratios ? " mean_ratio=" : " mean=") << s.mean
              << " std=" << s.stddev;
    if (!ratios) {
      for (const auto& r : result.records)
        if (r.arm == arm && r.k == k) {
          std::cout << " true=" << r.true_value;
          if (r.true_value != 0.0) std::cout << " rel_std=" << s.stddev / r.true_value;
          break;
        }
    }
    std::cout << '\n';
  }
}

std::vector<wjl::SparseEntry> read_sparse_csv(const std::string& path) {
  const auto table = wjl::harness::read_csv_file(path);
  const std::size_t ic = table.column_index("index");
  const std::size_t vc = table.column_index("value");
  std::vector<wjl::SparseEntry> out;
  for (const auto& row : table.rows)
    out.push_back({static_cast<std::size_t>(wjl::detail::parse_u64(row[ic])), wjl::detail::parse_double(row[vc])});
  return out;
}

/// Reads `key,value` lines; a non-numeric first line is treated as a header.
void feed_stream(std::istream& in, wjl::StreamSketch& sketch) {
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    const auto fields = wjl::harness::split_csv_line(line);
    try {
      if (fields.size() != 2) throw wjl::InvalidArgument("expected two fields");
      sketch.update(wjl::detail::parse_u64(fields[0]), wjl::detail::parse_double(fields[1]));
    } catch (const wjl::InvalidArgument& e) {
      if (first) {
        first = false;
        continue;
      }
      throw wjl::InvalidArgument("stream line " + std::to_string(lineno) + ": " + e.what());
    }
    first = false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimensionality reduction and streaming sketches for weighted Euclidean norms"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wjl::kVersion));

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a random sparse (x, w) pair as sparse CSVs");
  wjl::SparseSpec gen_spec;
  gen_spec.d = 2000;
  std::size_t gen_l = 10;
  std::string gen_out = ".";
  gen->add_option("--d", gen_spec.d, "Dimension");
  gen->add_option("--l", gen_l, "Nonzeros in x and in w");
  gen->add_option("--l-overlap", gen_spec.l_overlap, "Shared nonzero coordinates");
  gen->add_option("--norm-x", gen_spec.norm_x, "Euclidean norm of x");
  gen->add_option("--seed", gen_spec.seed, "Seed");
  gen->add_option("--out", gen_out, "Output directory (writes x.csv and w.csv)");

  // reduce
  auto* red = app.add_subcommand("reduce", "Reduce a sparse CSV vector to k complex dimensions");
  std::string red_in, red_out, red_csv;
  std::size_t red_d = 0, red_k = 0;
  std::uint64_t red_seed = 0;
  red->add_option("--in", red_in, "Sparse CSV (index,value)")->required();
  red->add_option("--d", red_d, "Ambient dimension")->required();
  red->add_option("--k", red_k, "Reduced dimension")->required();
  red->add_option("--seed", red_seed, "Matrix seed");
  red->add_option("--out", red_out, "Binary reduced vector (.wjlr)")->required();
  red->add_option("--csv", red_csv, "Also export index,re,im CSV");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate ||x||_w^2 (or ||x-y||_w^2) from reduced vectors or sketches");
  std::string est_x, est_w, est_y;
  est->add_option("--x", est_x, "Reduced vector or sketch of x")->required();
  est->add_option("--w", est_w, "Reduced vector or sketch of w")->required();
  est->add_option("--y", est_y, "Reduced vector of y for the pairwise estimate");

  // sketch
  auto* sk = app.add_subcommand("sketch", "Sketch a stream of `t,value` or `index,delta` lines");
  std::string sk_in = "-", sk_out, sk_mode = "timestep";
  std::optional<std::size_t> sk_r, sk_m;
  std::optional<double> sk_eps, sk_delta, sk_dist;
  std::uint64_t sk_seed = 0;
  sk->add_option("--in", sk_in, "Stream file, or - for standard input");
  sk->add_option("--out", sk_out, "Serialized sketch (.wjls)")->required();
  sk->add_option("--mode", sk_mode, "timestep or turnstile")->check(CLI::IsMember({"timestep", "turnstile"}));
  sk->add_option("--r", sk_r, "Rows (median)");
  sk->add_option("--m", sk_m, "Columns (mean)");
  sk->add_option("--epsilon", sk_eps, "Plan r, m for this accuracy");
  sk->add_option("--delta", sk_delta, "Plan r, m for this failure probability");
  sk->add_option("--distortion", sk_dist, "Distortion bound used by the planner");
  sk->add_option("--seed", sk_seed, "Hash family seed (must match between x and w)");

  // experiments
  std::map<std::string, ExperimentFlags> exp_flags;
  std::map<std::string, CLI::App*> exp_cmds;
  for (const std::string name : {"fig1", "fig2", "fig3", "fig4", "sketch-eval"}) {
    auto* cmd = app.add_subcommand(name, "Run the " + name + " experiment and write <out>/" + name + ".csv");
    add_experiment_flags(cmd, exp_flags[name]);
    exp_cmds[name] = cmd;
  }

  // verify
  auto* ver = app.add_subcommand("verify", "Check the implementation against the exact oracles");
  std::uint64_t ver_seed = 20240501;
  ver->add_option("--seed", ver_seed, "Seed for random test inputs");

  // plot
  auto* plot = app.add_subcommand("plot", "Render an SVG histogram of one CSV column");
  std::string plot_in, plot_out, plot_column = "estimate";
  std::size_t plot_bins = 30;
  std::vector<std::string> plot_filters;
  plot->add_option("--in", plot_in, "Experiment CSV")->required();
  plot->add_option("--out", plot_out, "SVG output")->required();
  plot->add_option("--column", plot_column, "Numeric column");
  plot->add_option("--bins", plot_bins, "Number of bins");
  plot->add_option("--filter", plot_filters, "Row selector column=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      gen_spec.l_x = gen_spec.l_w = gen_l;
      if (gen->count("--l-overlap") == 0) gen_spec.l_overlap = std::min<std::size_t>(gen_spec.l_overlap, gen_l);
      const auto pair = wjl::gen_pair(gen_spec);
      std::ostringstream xs, ws;
      wjl::write_sparse_csv(xs, pair.x());
      wjl::write_sparse_csv(ws, pair.w());
      wjl::harness::write_file(std::filesystem::path(gen_out) / "x.csv", xs.str());
      wjl::harness::write_file(std::filesystem::path(gen_out) / "w.csv", ws.str());
      std::cout << "weighted_sq_norm=" << wjl::weighted_sq_norm(pair) << '\n';
      return kExitOk;
    }
    if (red->parsed()) {
      const auto x = read_sparse_csv(red_in);
      const auto a = wjl::sample_matrix(red_d, red_k, red_seed);
      const auto g = wjl::reduce(a, std::span<const wjl::SparseEntry>(x));
      wjl::harness::write_file(red_out, g.serialize());
      if (!red_csv.empty()) {
        std::ostringstream os;
        g.write_csv(os);
        wjl::harness::write_file(red_csv, os.str());
      }
      return kExitOk;
    }
    if (est->parsed()) {
      const auto xb = wjl::harness::read_file(est_x);
      const auto wb = wjl::harness::read_file(est_w);
      if (xb.starts_with(wjl::StreamSketch::kMagic)) {
        if (!est_y.empty()) throw wjl::InvalidArgument("sketches are not linear; no pairwise estimate exists");
        const auto e = wjl::estimate(wjl::StreamSketch::deserialize(xb), wjl::StreamSketch::deserialize(wb));
        std::cout << wjl::detail::format_double(e.value) << '\n';
        if (e.negative()) std::cerr << "note: estimate is negative\n";
        return kExitOk;
      }
      const auto gx = wjl::ReducedVector::deserialize(xb);
      const auto gw = wjl::ReducedVector::deserialize(wb);
      const double v = est_y.empty()
                           ? wjl::rho(gx, gw)
                           : wjl::rho_pairwise(gx, wjl::ReducedVector::deserialize(wjl::harness::read_file(est_y)), gw);
      std::cout << wjl::detail::format_double(v) << '\n';
      return kExitOk;
    }
    if (sk->parsed()) {
      wjl::SketchConfig cfg;
      cfg.seed = sk_seed;
      cfg.mode = wjl::parse_sketch_mode(sk_mode);
      if (sk_eps || sk_delta || sk_dist) {
        if (!(sk_eps && sk_delta)) throw wjl::InvalidArgument("planning needs --epsilon and --delta");
        const auto dims = wjl::plan_sketch(*sk_eps, *sk_delta, sk_dist.value_or(1.0));
        cfg.r = dims.r;
        cfg.m = dims.m;
      }
      if (sk_r) cfg.r = *sk_r;
      if (sk_m) cfg.m = *sk_m;
      wjl::StreamSketch sketch(cfg);
      if (sk_in == "-") {
        feed_stream(std::cin, sketch);
      } else {
        std::ifstream in(sk_in);
        if (!in) throw wjl::IoError("cannot open " + sk_in);
        feed_stream(in, sketch);
      }
      wjl::harness::write_file(sk_out, sketch.serialize());
      std::cerr << "r=" << cfg.r << " m=" << cfg.m << " items=" << sketch.items_seen() << '\n';
      return kExitOk;
    }
    for (const auto& [name, cmd] : exp_cmds) {
      if (!cmd->parsed()) continue;
      const auto cfg = build_config(name, exp_flags[name]);
      const auto result = wjl::harness::run_experiment(cfg);
      const auto path = result.write(cfg.out_dir);
      print_summary(result);
      std::cerr << "wrote " << path.string() << '\n';
      return kExitOk;
    }
    if (ver->parsed()) return wjl::harness::run_verification(std::cout, ver_seed) ? kExitOk : kExitVerifyFailed;
    if (plot->parsed()) {
      std::vector<wjl::harness::RowFilter> filters;
      for (const auto& f : plot_filters) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) throw wjl::InvalidArgument("filter must look like column=value");
        filters.push_back({f.substr(0, eq), f.substr(eq + 1)});
      }
      wjl::harness::render_histogram(plot_in, plot_column, plot_bins, plot_out, filters);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
