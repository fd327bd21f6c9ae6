#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "urerf/forest.hpp"
#include "urerf/io.hpp"

namespace urerf {

namespace {

using nlohmann::json;

constexpr const char* kForestFormat = "urerf-forest";
constexpr int kForestVersion = 1;

json config_to_json(const ForestConfig& c) {
  return {
      {"trees", c.num_trees},
      {"subsample_size", c.subsample_size},
      {"subsample_fraction", c.subsample_fraction},
      {"mtry", c.mtry},
      {"lambda", c.lambda},
      {"minparent", c.min_parent},
      {"criterion", criterion_name(c.criterion)},
      {"min_leaf", c.min_leaf},
      {"seed", c.seed},
      {"proximity_mode", proximity_mode_name(c.proximity_mode)},
      {"em", {{"max_iter", c.em.max_iter}, {"tolerance", c.em.tolerance}, {"restarts", c.em.restarts}}},
  };
}

ForestConfig config_from_json(const json& j) {
  ForestConfig c;
  c.num_trees = j.at("trees").get<std::size_t>();
  c.subsample_size = j.at("subsample_size").get<std::size_t>();
  c.subsample_fraction = j.at("subsample_fraction").get<double>();
  c.mtry = j.at("mtry").get<std::size_t>();
  c.lambda = j.at("lambda").get<double>();
  c.min_parent = j.at("minparent").get<std::size_t>();
  c.criterion = parse_criterion(j.at("criterion").get<std::string>());
  c.min_leaf = j.at("min_leaf").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.proximity_mode = parse_proximity_mode(j.at("proximity_mode").get<std::string>());
  const auto& em = j.at("em");
  c.em.max_iter = em.at("max_iter").get<int>();
  c.em.tolerance = em.at("tolerance").get<double>();
  c.em.restarts = em.at("restarts").get<int>();
  return c;
}

json tree_to_json(const Tree& tree) {
  json left = json::array(), right = json::array(), threshold = json::array();
  json projection = json::array(), leaves = json::array();
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const auto& n = tree.nodes[k];
    left.push_back(n.left);
    right.push_back(n.right);
    threshold.push_back(n.threshold);
    for (std::size_t e = 0; e < n.weights.size(); ++e) {
      projection.push_back({k, n.weights.features[e], static_cast<int>(n.weights.signs[e])});
    }
    if (n.is_leaf()) leaves.push_back({{"node", k}, {"members", n.members}});
  }
  return {{"in_bag", tree.in_bag}, {"left", left},          {"right", right},
          {"threshold", threshold}, {"projection", projection}, {"leaves", leaves}};
}

Tree tree_from_json(const json& j, std::size_t input_dims) {
  Tree tree;
  tree.input_dims = input_dims;
  tree.in_bag = j.at("in_bag").get<std::vector<std::uint32_t>>();
  const auto left = j.at("left").get<std::vector<std::int32_t>>();
  const auto right = j.at("right").get<std::vector<std::int32_t>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  if (right.size() != left.size() || threshold.size() != left.size()) {
    throw std::invalid_argument("forest file: node arrays differ in length");
  }
  tree.nodes.resize(left.size());
  for (std::size_t k = 0; k < left.size(); ++k) {
    auto& n = tree.nodes[k];
    n.left = left[k];
    n.right = right[k];
    n.threshold = threshold[k];
    const auto bad = [&](std::int32_t c) {
      return c < -1 || c >= static_cast<std::int32_t>(left.size()) || c == static_cast<std::int32_t>(k);
    };
    if (bad(n.left) || bad(n.right) || ((n.left < 0) != (n.right < 0))) {
      throw std::invalid_argument("forest file: invalid child index at node " + std::to_string(k));
    }
  }
  for (const auto& t : j.at("projection")) {
    const auto node = t.at(0).get<std::size_t>();
    const auto feature = t.at(1).get<std::uint32_t>();
    const auto sign = t.at(2).get<int>();
    if (node >= tree.nodes.size() || feature >= input_dims || (sign != 1 && sign != -1)) {
      throw std::invalid_argument("forest file: invalid projection triplet");
    }
    tree.nodes[node].weights.features.push_back(feature);
    tree.nodes[node].weights.signs.push_back(static_cast<std::int8_t>(sign));
  }
  for (const auto& leaf : j.at("leaves")) {
    const auto node = leaf.at("node").get<std::size_t>();
    if (node >= tree.nodes.size()) throw std::invalid_argument("forest file: invalid leaf node");
    tree.nodes[node].members = leaf.at("members").get<std::vector<std::uint32_t>>();
  }
  return tree;
}

}  // namespace

void save_forest(const Forest& forest, std::ostream& out) {
  json trees = json::array();
  for (const auto& t : forest.trees) trees.push_back(tree_to_json(t));
  const json doc = {
      {"format", kForestFormat},
      {"version", kForestVersion},
      {"input_dims", forest.input_dims},
      {"num_points", forest.num_points},
      {"config", config_to_json(forest.config)},
      {"trees", std::move(trees)},
  };
  out << doc.dump() << '\n';
  if (!out) throw IoError("failed writing forest");
}

Forest load_forest(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("forest file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kForestFormat) {
      throw std::invalid_argument("not a forest file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kForestVersion) {
      throw std::invalid_argument("unsupported forest format version " + std::to_string(version));
    }
    Forest forest;
    forest.input_dims = doc.at("input_dims").get<std::size_t>();
    forest.num_points = doc.at("num_points").get<std::size_t>();
    forest.config = config_from_json(doc.at("config"));
    for (const auto& t : doc.at("trees")) forest.trees.push_back(tree_from_json(t, forest.input_dims));
    return forest;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed forest file: ") + e.what());
  }
}

void write_proximity_csv(const ProximityMatrix& s, std::ostream& out) {
  const std::size_t n = s.size();
  for (std::size_t j = 0; j < n; ++j) out << (j ? ",s" : "s") << j;
  out << '\n';
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = s(i, j);
    write_csv_row(out, row);
  }
}

void write_proximity_triplets(const ProximityMatrix& s, std::ostream& out) {
  out << "i,j,s\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i; j < s.size(); ++j) {
      const double v = s(i, j);
      if (v != 0.0) out << i << ',' << j << ',' << format_double(v) << '\n';
    }
  }
}

}  // namespace urerf
