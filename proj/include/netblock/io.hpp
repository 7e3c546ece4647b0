#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "netblock/graph.hpp"
#include "netblock/types.hpp"

namespace netblock {

struct IngestOptions {
  bool drop_self_loops = false;  // zero the diagonal while loading
};

/// Edge-list layer format: header "n <n>", then one "i j" line per
/// upper-triangular edge (0-based, i <= j), sorted lexicographically, LF
/// line endings.
void write_layer(const BinaryLayer& layer, const std::filesystem::path& path);
BinaryLayer read_layer(const std::filesystem::path& path,
                       const IngestOptions& opts = {});

/// Writes the layers plus a JSON manifest (n, L, rho, layer paths, optional
/// 1-based group labels) under dir; returns the manifest path.
std::filesystem::path write_sample(const NetworkSample& sample,
                                   const std::filesystem::path& dir,
                                   const std::string& stem = "layer");

NetworkSample ingest_sample(const std::filesystem::path& manifest_path,
                            const IngestOptions& opts = {});

/// Label file: header "K <K>", then one 1-based label per line.
void write_labels(const MembershipMatrix& Z, const std::filesystem::path& path);
MembershipMatrix read_labels(const std::filesystem::path& path);

/// CSV matrix with a "# netblock-matrix v1" comment line; %.17g cells.
void write_matrix_csv(const Eigen::MatrixXd& M, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace netblock
