#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "urerf/dataset_io.hpp"
#include "urerf/io.hpp"
#include "urerf/rng.hpp"

namespace urerf::cli {

// ---------------------------------------------------------------------------
// generate

Dataset make_dataset(const GenerateOptions& opt) {
  Dataset ds = generate(opt.dataset, opt.n, opt.seed);
  ds.data = add_noise(ds.data, {opt.noise_dims, opt.noise_var, opt.seed});
  if (opt.rescale) ds.data = rescale01(ds.data);
  return ds;
}

void cmd_generate(const GenerateOptions& opt) { write_dataset(opt.out, make_dataset(opt)); }

// ---------------------------------------------------------------------------
// fit

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

void log_fit(const Forest& forest, const BuildStats& stats, std::ostream& log) {
  double total = 0.0;
  for (std::size_t t = 0; t < stats.tree_seconds.size(); ++t) {
    log << "tree " << t << ": " << forest.trees[t].nodes.size() << " nodes, "
        << forest.trees[t].leaf_count() << " leaves, " << stats.tree_seconds[t] << " s\n";
    total += stats.tree_seconds[t];
  }
  log << "total build time " << total << " s\n";

  // Leaf sizes in power-of-two buckets [2^b, 2^(b+1)).
  std::map<std::size_t, std::size_t> buckets;
  for (const auto& tree : forest.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) continue;
      std::size_t b = 0;
      while ((std::size_t{2} << b) <= node.members.size()) ++b;
      ++buckets[b];
    }
  }
  log << "leaf size histogram:\n";
  for (const auto& [b, count] : buckets) {
    log << "  [" << (std::size_t{1} << b) << ", " << (std::size_t{2} << b) << "): " << count
        << '\n';
  }
}

}  // namespace

std::filesystem::path forest_path(const std::filesystem::path& prefix) {
  return with_suffix(prefix, ".forest.json");
}
std::filesystem::path proximity_path(const std::filesystem::path& prefix) {
  return with_suffix(prefix, ".proximity.csv");
}
std::filesystem::path triplets_path(const std::filesystem::path& prefix) {
  return with_suffix(prefix, ".proximity.triplets.csv");
}

void cmd_fit(const FitOptions& opt, std::ostream& log) {
  const DataMatrix x = read_features(opt.in);
  BuildStats stats;
  const Forest forest = build_forest(x, opt.forest, &stats);
  log_fit(forest, stats, log);
  const ProximityMatrix s = compute_proximity(forest, x);
  if (s.unsupported_pairs() > 0) {
    log << "warning: " << s.unsupported_pairs()
        << " point pairs never shared an in-bag sample; their proximity is 0\n";
  }
  {
    auto out = open_output(forest_path(opt.out));
    save_forest(forest, out);
  }
  {
    auto out = open_output(proximity_path(opt.out));
    write_proximity_csv(s, out);
    if (!out) throw IoError("failed writing '" + proximity_path(opt.out).string() + "'");
  }
  if (opt.triplets) {
    auto out = open_output(triplets_path(opt.out));
    write_proximity_triplets(s, out);
  }
}

// ---------------------------------------------------------------------------
// eval

namespace {

DataMatrix read_square(const std::filesystem::path& path, std::size_t n, const char* what) {
  if (path.empty()) {
    throw std::invalid_argument(std::string("method '") + what + "' needs its matrix file");
  }
  CsvTable t = read_csv(path);
  if (t.values.rows() != n || t.values.cols() != n) {
    throw OracleMismatch(path.string() + ": expected a " + std::to_string(n) + " x " +
                         std::to_string(n) + " matrix, found " +
                         std::to_string(t.values.rows()) + " x " +
                         std::to_string(t.values.cols()));
  }
  return std::move(t.values);
}

std::vector<PrRow> score_ranking(const std::string& method, const NeighborRanking& ranking,
                                 const GeodesicOracle& oracle, const std::vector<std::size_t>& ks) {
  std::vector<PrRow> rows;
  for (const auto& p : pr_curve(ranking, oracle, ks)) {
    rows.push_back({method, p, chance_level(oracle, p.k)});
  }
  return rows;
}

}  // namespace

std::vector<PrRow> evaluate(const Dataset& dataset, const EvalOptions& opt) {
  const std::size_t n = dataset.data.rows();
  if (dataset.oracle.size() != n) throw OracleMismatch("dataset and oracle sizes differ");
  std::vector<PrRow> rows;
  for (const auto& method : opt.methods) {
    std::vector<PrRow> part;
    if (method == "proximity") {
      const auto s = read_square(opt.proximity, n, "proximity");
      part = score_ranking(method, NeighborRanking::from_similarity(s), dataset.oracle, opt.ks);
    } else if (method == "euclidean") {
      part = score_ranking(method, euclidean_ranking(dataset.data), dataset.oracle, opt.ks);
    } else if (method == "external") {
      auto d = read_square(opt.distance, n, "external");
      part = score_ranking(method, NeighborRanking::from_distance(std::move(d)), dataset.oracle,
                           opt.ks);
    } else {
      throw std::invalid_argument("unknown method '" + method +
                                  "' (expected proximity, euclidean or external)");
    }
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

void write_pr_csv(const std::vector<PrRow>& rows, std::ostream& out) {
  out << "method,k,precision,recall,chance\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.point.k << ',' << format_double(r.point.precision) << ','
        << format_double(r.point.recall) << ',' << format_double(r.chance) << '\n';
  }
}

void cmd_eval(const EvalOptions& opt) {
  const Dataset ds = read_dataset(opt.in);
  const auto rows = evaluate(ds, opt);
  auto out = open_output(opt.out);
  write_pr_csv(rows, out);
  if (!out) throw IoError("failed writing '" + opt.out.string() + "'");
}

// ---------------------------------------------------------------------------
// sweep

std::uint64_t cell_seed(std::uint64_t master, const std::string& param, const std::string& value,
                        const std::string& dataset) {
  std::uint64_t s = derive_seed(master, param);
  s = derive_seed(s, value);
  return derive_seed(s, dataset);
}

namespace {

std::size_t parse_count(const std::string& text, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || text.front() == '-') {
    throw std::invalid_argument(std::string(what) + ": expected a non-negative integer, got '" +
                                text + "'");
  }
  return static_cast<std::size_t>(v);
}

std::size_t parse_mtry(const std::string& text) {
  return text == "auto" ? 0 : parse_count(text, "mtry");
}

void apply_param(const std::string& param, const std::string& value, GenerateOptions& gen,
                 ForestConfig& forest) {
  if (param == "noise-dims") {
    gen.noise_dims = parse_count(value, "noise-dims");
  } else if (param == "minparent") {
    forest.min_parent = parse_count(value, "minparent");
  } else if (param == "mtry") {
    forest.mtry = parse_mtry(value);
  } else if (param == "criterion") {
    forest.criterion = parse_criterion(value);
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + param +
                                "' (expected noise-dims, minparent, mtry or criterion)");
  }
}

}  // namespace

void cmd_sweep(const SweepOptions& opt, std::ostream& log) {
  {
    GenerateOptions g;
    ForestConfig f;
    if (!opt.values.empty()) apply_param(opt.param, opt.values.front(), g, f);
  }
  auto out = open_output(opt.out);
  out << "dataset,param,value,seed,method,k,precision,recall,chance,seconds\n";
  for (const auto& dataset : opt.datasets) {
    for (const auto& value : opt.values) {
      const std::uint64_t seed = cell_seed(opt.base.seed, opt.param, value, dataset);
      const std::string prefix = dataset + ',' + opt.param + ',' + value + ',' + std::to_string(seed) + ',';
      const auto start = std::chrono::steady_clock::now();
      try {
        GenerateOptions gen = opt.base;
        ForestConfig cfg = opt.forest;
        gen.dataset = dataset;
        gen.seed = seed;
        cfg.seed = seed;
        apply_param(opt.param, value, gen, cfg);
        const Dataset ds = make_dataset(gen);
        const Forest forest = build_forest(ds.data, cfg);
        const ProximityMatrix s = compute_proximity(forest, ds.data);
        auto rows = score_ranking("proximity", NeighborRanking::from_proximity(s), ds.oracle, opt.ks);
        const auto eu = score_ranking("euclidean", euclidean_ranking(ds.data), ds.oracle, opt.ks);
        rows.insert(rows.end(), eu.begin(), eu.end());
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string seconds = opt.timing ? format_double(secs) : "";
        for (const auto& r : rows) {
          out << prefix << r.method << ',' << r.point.k << ',' << format_double(r.point.precision)
              << ',' << format_double(r.point.recall) << ',' << format_double(r.chance) << ','
              << seconds << '\n';
        }
        log << dataset << ' ' << opt.param << '=' << value << " done in " << secs << " s\n";
      } catch (const std::exception& e) {
        out << prefix << "error,,,,,\n";
        log << dataset << ' ' << opt.param << '=' << value << " failed: " << e.what() << '\n';
      }
      out.flush();
    }
  }
  if (!out) throw IoError("failed writing '" + opt.out.string() + "'");
}

// ---------------------------------------------------------------------------
// argument parsing

namespace {

void add_forest_flags(CLI::App* cmd, ForestConfig& cfg, std::string& criterion,
                      std::string& subsample, std::string& mtry, std::string& mode) {
  cmd->add_option("--criterion", criterion, "Split criterion: twomeans, fastbic or embic")
      ->capture_default_str();
  cmd->add_option("--trees", cfg.num_trees, "Number of trees")->capture_default_str();
  cmd->add_option("--subsample", subsample,
                  "Points per tree: a fraction of N (e.g. 0.632) or a count")
      ->capture_default_str();
  cmd->add_option("--mtry", mtry, "Candidate projections per node, or 'auto' for ceil(sqrt(p))")
      ->capture_default_str();
  cmd->add_option("--lambda", cfg.lambda, "Projection sparsity")->capture_default_str();
  cmd->add_option("--minparent", cfg.min_parent, "Smallest splittable node")
      ->capture_default_str();
  cmd->add_option("--proximity-mode", mode, "Proximity support: all or inbag")
      ->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
}

void resolve_forest_flags(ForestConfig& cfg, const std::string& criterion,
                          const std::string& subsample, const std::string& mtry,
                          const std::string& mode) {
  cfg.criterion = parse_criterion(criterion);
  cfg.proximity_mode = parse_proximity_mode(mode);
  cfg.mtry = parse_mtry(mtry);
  if (subsample.find_first_of(".eE") != std::string::npos) {
    std::size_t pos = 0;
    double f = 0.0;
    try {
      f = std::stod(subsample, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != subsample.size() || !(f > 0.0 && f <= 1.0)) {
      throw std::invalid_argument("--subsample: fraction must lie in (0, 1], got '" + subsample + "'");
    }
    cfg.subsample_size = 0;
    cfg.subsample_fraction = f;
  } else {
    cfg.subsample_size = parse_count(subsample, "--subsample");
    if (cfg.subsample_size == 0) throw std::invalid_argument("--subsample must be >= 1");
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised randomer forests for geodesic neighbor learning"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write a benchmark dataset and its oracle sidecar");
  g->add_option("--dataset", gen.dataset, "linear, helix, sphere or gmm")->capture_default_str();
  g->add_option("--n", gen.n, "Number of points")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--noise-dims", gen.noise_dims, "Appended Gaussian noise dimensions")
      ->capture_default_str();
  g->add_option("--noise-var", gen.noise_var, "Variance of each noise dimension")
      ->capture_default_str();
  g->add_flag("--rescale", gen.rescale, "Rescale every column to [0, 1]");
  g->add_option("--out", gen.out, "Data CSV path")->capture_default_str();

  FitOptions fit;
  std::string fit_criterion = "fastbic", fit_subsample = "0.632", fit_mtry = "auto",
              fit_mode = "all";
  auto* f = app.add_subcommand("fit", "Grow a forest and write its proximity matrix");
  f->add_option("--in", fit.in, "Data CSV")->required();
  f->add_option("--out", fit.out, "Output prefix")->capture_default_str();
  f->add_option("--seed", fit.forest.seed, "Random seed")->capture_default_str();
  f->add_flag("--triplets", fit.triplets, "Also write the proximity as i,j,s triplets");
  add_forest_flags(f, fit.forest, fit_criterion, fit_subsample, fit_mtry, fit_mode);

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Geodesic precision/recall of neighbor rankings");
  e->add_option("--in", ev.in, "Data CSV with oracle")->required();
  e->add_option("--proximity", ev.proximity, "Dense proximity CSV (method proximity)");
  e->add_option("--distance", ev.distance, "Dense distance CSV (method external)");
  e->add_option("--method", ev.methods, "proximity, euclidean, external")
      ->delimiter(',')
      ->capture_default_str();
  e->add_option("--k", ev.ks, "Neighborhood sizes")->delimiter(',')->capture_default_str();
  e->add_option("--out", ev.out, "PR CSV path")->capture_default_str();

  SweepOptions sw;
  std::string sw_criterion = "fastbic", sw_subsample = "0.632", sw_mtry = "auto",
              sw_mode = "all";
  auto* s = app.add_subcommand("sweep", "Run generate, fit and eval over a parameter grid");
  s->add_option("--dataset", sw.datasets, "Datasets")->delimiter(',')->capture_default_str();
  s->add_option("--param", sw.param, "Swept parameter: noise-dims, minparent, mtry or criterion")
      ->capture_default_str();
  s->add_option("--values", sw.values, "Grid values of the swept parameter")
      ->delimiter(',')
      ->expected(0, -1);
  s->add_option("--n", sw.base.n, "Number of points")->capture_default_str();
  s->add_option("--seed", sw.base.seed, "Master seed")->capture_default_str();
  s->add_option("--noise-dims", sw.base.noise_dims, "Noise dimensions when not swept")
      ->capture_default_str();
  s->add_option("--noise-var", sw.base.noise_var, "Noise variance")->capture_default_str();
  s->add_flag("--rescale", sw.base.rescale, "Rescale every column to [0, 1]");
  s->add_option("--k", sw.ks, "Neighborhood sizes")->delimiter(',')->capture_default_str();
  s->add_flag("--timing", sw.timing, "Fill the seconds column (makes output run-dependent)");
  s->add_option("--out", sw.out, "Long-format CSV path")->capture_default_str();
  add_forest_flags(s, sw.forest, sw_criterion, sw_subsample, sw_mtry, sw_mode);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kOk : kInvalidArgument;
  }

  try {
    if (*g) {
      cmd_generate(gen);
    } else if (*f) {
      resolve_forest_flags(fit.forest, fit_criterion, fit_subsample, fit_mtry, fit_mode);
      cmd_fit(fit, err);
    } else if (*e) {
      cmd_eval(ev);
    } else if (*s) {
      resolve_forest_flags(sw.forest, sw_criterion, sw_subsample, sw_mtry, sw_mode);
      sw.values.erase(std::remove(sw.values.begin(), sw.values.end(), std::string{}),
                      sw.values.end());
      cmd_sweep(sw, err);
    }
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << '\n';
    return kIoError;
  } catch (const OracleMismatch& ex) {
    err << "error: " << ex.what() << '\n';
    return kOracleMismatch;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << '\n';
    return kInvalidArgument;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace urerf::cli
