#pragma once

// Dataset files: a CSV with header x1,...,xp followed by the latent columns
// (t | u,v | label), plus a JSON sidecar recording the oracle kind, its
// geodesic rule and the latent parameters.

#include <filesystem>

#include "urerf/synthdata.hpp"

namespace urerf {

/// data.csv -> data.oracle.json
std::filesystem::path oracle_sidecar_path(const std::filesystem::path& data_csv);

void write_dataset(const std::filesystem::path& data_csv, const Dataset& dataset);

/// Reads a dataset CSV. The oracle comes from the sidecar when present;
/// otherwise a `label` column yields a discrete oracle. Continuous latent
/// columns without a sidecar, or a sidecar that disagrees with the data,
/// raise OracleMismatch. Columns other than t, u, v and label are features.
Dataset read_dataset(const std::filesystem::path& data_csv);

/// Feature columns only; no oracle required.
DataMatrix read_features(const std::filesystem::path& data_csv);

}  // namespace urerf
