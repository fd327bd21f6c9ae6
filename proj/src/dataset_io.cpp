#include "urerf/dataset_io.hpp"

#include <cmath>
#include <set>

#include "json.hpp"
#include "urerf/io.hpp"

namespace urerf {

namespace {

using nlohmann::json;

constexpr const char* kOracleFormat = "urerf-oracle";
constexpr int kOracleVersion = 1;

const std::set<std::string> kLatentColumns{"t", "u", "v", "label"};

json oracle_to_json(const Dataset& ds) {
  const auto& o = ds.oracle;
  json doc = {
      {"format", kOracleFormat},
      {"version", kOracleVersion},
      {"dataset", ds.name},
      {"kind", o.kind() == OracleKind::Continuous ? "continuous" : "discrete"},
      {"rule", rule_name(o.rule())},
      {"n", o.size()},
  };
  switch (o.rule()) {
    case GeodesicRule::Line:
      doc["direction"] = o.direction();
      doc["t"] = o.latent();
      break;
    case GeodesicRule::Helix: doc["t"] = o.latent(); break;
    case GeodesicRule::Sphere: {
      std::vector<double> u, v;
      for (std::size_t i = 0; i < o.size(); ++i) {
        u.push_back(o.latent()[2 * i]);
        v.push_back(o.latent()[2 * i + 1]);
      }
      doc["radius"] = o.radius();
      doc["u"] = u;
      doc["v"] = v;
      break;
    }
    case GeodesicRule::Components: doc["label"] = o.labels(); break;
  }
  return doc;
}

GeodesicOracle oracle_from_json(const json& doc) {
  if (doc.at("format").get<std::string>() != kOracleFormat) {
    throw OracleMismatch("sidecar is not an oracle file");
  }
  if (doc.at("version").get<int>() != kOracleVersion) {
    throw OracleMismatch("unsupported oracle file version");
  }
  switch (parse_rule(doc.at("rule").get<std::string>())) {
    case GeodesicRule::Line:
      return GeodesicOracle::line(doc.at("t").get<std::vector<double>>(),
                                  doc.at("direction").get<std::array<double, 3>>());
    case GeodesicRule::Helix: return GeodesicOracle::helix(doc.at("t").get<std::vector<double>>());
    case GeodesicRule::Sphere:
      return GeodesicOracle::sphere(doc.at("u").get<std::vector<double>>(),
                                    doc.at("v").get<std::vector<double>>(),
                                    doc.at("radius").get<double>());
    case GeodesicRule::Components:
      return GeodesicOracle::components(doc.at("label").get<std::vector<int>>());
  }
  throw OracleMismatch("unknown oracle rule");
}

}  // namespace

std::filesystem::path oracle_sidecar_path(const std::filesystem::path& data_csv) {
  auto p = data_csv;
  p.replace_extension(".oracle.json");
  return p;
}

void write_dataset(const std::filesystem::path& data_csv, const Dataset& ds) {
  const auto& x = ds.data;
  const auto& o = ds.oracle;
  if (o.size() != x.rows()) throw OracleMismatch("dataset and oracle sizes differ");

  std::vector<std::string> header;
  for (std::size_t j = 0; j < x.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  const auto latent = o.latent_names();
  header.insert(header.end(), latent.begin(), latent.end());

  auto out = open_output(data_csv);
  write_csv_header(out, header);
  std::vector<double> row(header.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    std::copy(xi.begin(), xi.end(), row.begin());
    if (o.kind() == OracleKind::Discrete) {
      row[x.cols()] = o.labels()[i];
    } else {
      for (std::size_t k = 0; k < latent.size(); ++k) {
        row[x.cols() + k] = o.latent()[i * latent.size() + k];
      }
    }
    write_csv_row(out, row);
  }
  if (!out) throw IoError("failed writing '" + data_csv.string() + "'");

  const auto sidecar = oracle_sidecar_path(data_csv);
  auto side = open_output(sidecar);
  side << oracle_to_json(ds).dump(1) << '\n';
  if (!side) throw IoError("failed writing '" + sidecar.string() + "'");
}

namespace {

DataMatrix feature_block(const CsvTable& table, const std::filesystem::path& source) {
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (!kLatentColumns.contains(table.header[j])) feature_cols.push_back(j);
  }
  if (feature_cols.empty()) throw IoError(source.string() + ": no feature columns");
  const std::size_t n = table.values.rows();
  DataMatrix x(n, feature_cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const double v = table.values(i, feature_cols[k]);
      if (!std::isfinite(v)) {
        throw IoError(source.string() + ": non-finite value in row " + std::to_string(i + 1));
      }
      x(i, k) = v;
    }
  }
  return x;
}

}  // namespace

DataMatrix read_features(const std::filesystem::path& data_csv) {
  return feature_block(read_csv(data_csv), data_csv);
}

Dataset read_dataset(const std::filesystem::path& data_csv) {
  const CsvTable table = read_csv(data_csv);
  const std::size_t n = table.values.rows();

  Dataset ds;
  ds.name = data_csv.stem().string();
  ds.data = feature_block(table, data_csv);

  const auto sidecar = oracle_sidecar_path(data_csv);
  if (std::filesystem::exists(sidecar)) {
    auto in = open_input(sidecar);
    json doc;
    try {
      doc = json::parse(in);
      ds.oracle = oracle_from_json(doc);
      if (doc.contains("dataset")) ds.name = doc.at("dataset").get<std::string>();
    } catch (const json::exception& e) {
      throw OracleMismatch(sidecar.string() + ": malformed oracle file: " + e.what());
    }
    if (ds.oracle.size() != n) {
      throw OracleMismatch(sidecar.string() + ": oracle covers " +
                           std::to_string(ds.oracle.size()) + " points, data has " +
                           std::to_string(n));
    }
    return ds;
  }

  const long label_col = table.column("label");
  if (label_col >= 0) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = table.values(i, static_cast<std::size_t>(label_col));
      if (v != std::floor(v)) throw OracleMismatch(data_csv.string() + ": non-integer label");
      labels[i] = static_cast<int>(v);
    }
    ds.oracle = GeodesicOracle::components(std::move(labels));
    return ds;
  }
  if (table.column("t") >= 0 || table.column("u") >= 0) {
    throw OracleMismatch(data_csv.string() + ": continuous latent columns need the oracle sidecar '" +
                         sidecar.string() + "'");
  }
  throw OracleMismatch(data_csv.string() + ": no oracle sidecar and no label column");
}

}  // namespace urerf
