#include "netblock/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "netblock/errors.hpp"

namespace netblock {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ifstream open_for_read(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in)
    throw DataError(std::string(what) + ": cannot open " + path.string());
  return in;
}

}  // namespace

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write: cannot open " + path.string());
  out << content;
  if (!out) throw DataError("write: failed writing " + path.string());
}

void write_layer(const BinaryLayer& layer, const fs::path& path) {
  std::ostringstream os;
  os << "n " << layer.n() << "\n";
  for (const Edge& e : layer.edges()) os << e.i << " " << e.j << "\n";
  write_text_file(path, os.str());
}

BinaryLayer read_layer(const fs::path& path, const IngestOptions& opts) {
  std::ifstream in = open_for_read(path, "layer");
  std::string tag;
  long long n = 0;
  if (!(in >> tag >> n) || tag != "n" || n < 1)
    throw DataError("layer: malformed header in " + path.string());
  std::vector<Edge> edges;
  long long i, j;
  while (in >> i >> j) {
    if (i < 0 || j < 0 || i > j || j >= n)
      throw DataError("layer: edge (" + std::to_string(i) + "," +
                      std::to_string(j) + ") out of range in " + path.string());
    const Edge e{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    if (!edges.empty()) {
      if (edges.back() == e)
        throw DataError("layer: duplicate edge in " + path.string());
      if (e < edges.back())
        throw DataError("layer: edges not sorted in " + path.string());
    }
    if (!opts.drop_self_loops || i != j) edges.push_back(e);
  }
  if (!in.eof())
    throw DataError("layer: trailing garbage in " + path.string());
  return BinaryLayer(static_cast<int>(n), std::move(edges));
}

fs::path write_sample(const NetworkSample& sample, const fs::path& dir,
                      const std::string& stem) {
  fs::create_directories(dir);
  json manifest;
  manifest["format_version"] = 1;
  manifest["n"] = sample.n();
  manifest["L"] = sample.L();
  manifest["rho"] = sample.rho();
  std::vector<std::string> names;
  for (int l = 0; l < sample.L(); ++l) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_%04d.edges", l);
    const std::string name = stem + buf;
    write_layer(sample.layers()[l], dir / name);
    names.push_back(name);
  }
  manifest["layers"] = names;
  if (sample.group_labels()) {
    std::vector<int> one_based;
    for (int g : *sample.group_labels()) one_based.push_back(g + 1);
    manifest["group_labels"] = one_based;
  }
  const fs::path manifest_path = dir / (stem + "_manifest.json");
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

NetworkSample ingest_sample(const fs::path& manifest_path, const IngestOptions& opts) {
  std::ifstream in = open_for_read(manifest_path, "manifest");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("manifest: invalid JSON in " + manifest_path.string() + ": " +
                    e.what());
  }
  for (const char* field : {"n", "L", "rho", "layers"}) {
    if (!manifest.contains(field))
      throw DataError("manifest: missing field '" + std::string(field) + "'");
  }
  const int n = manifest["n"].get<int>();
  const int L = manifest["L"].get<int>();
  const double rho = manifest["rho"].get<double>();
  const auto& layer_names = manifest["layers"];
  if (static_cast<int>(layer_names.size()) != L)
    throw DataError("manifest: layer list length does not match L");
  const fs::path base = manifest_path.parent_path();
  std::vector<BinaryLayer> layers;
  for (const auto& name : layer_names) {
    fs::path p = name.get<std::string>();
    if (p.is_relative()) p = base / p;
    BinaryLayer layer = read_layer(p, opts);
    if (layer.n() != n)
      throw DataError("manifest: layer " + p.string() + " has n=" +
                      std::to_string(layer.n()) + ", expected " + std::to_string(n));
    layers.push_back(std::move(layer));
  }
  std::optional<std::vector<int>> groups;
  if (manifest.contains("group_labels")) {
    std::vector<int> g;
    for (const auto& v : manifest["group_labels"]) g.push_back(v.get<int>() - 1);
    groups = std::move(g);
  }
  return NetworkSample(std::move(layers), rho, std::move(groups));
}

void write_labels(const MembershipMatrix& Z, const fs::path& path) {
  std::ostringstream os;
  os << "K " << Z.K() << "\n";
  for (int g : Z.labels()) os << g + 1 << "\n";
  write_text_file(path, os.str());
}

MembershipMatrix read_labels(const fs::path& path) {
  std::ifstream in = open_for_read(path, "labels");
  std::string tag;
  int K = 0;
  if (!(in >> tag >> K) || tag != "K" || K < 1)
    throw DataError("labels: malformed header in " + path.string());
  std::vector<int> labels;
  int g;
  while (in >> g) labels.push_back(g);
  if (!in.eof()) throw DataError("labels: trailing garbage in " + path.string());
  if (labels.empty()) throw DataError("labels: no labels in " + path.string());
  return MembershipMatrix::from_one_based(labels, K);
}

void write_matrix_csv(const Eigen::MatrixXd& M, const fs::path& path) {
  std::ostringstream os;
  os << "# netblock-matrix v1\n";
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      if (j > 0) os << ",";
      os << format_double(M(i, j));
    }
    os << "\n";
  }
  write_text_file(path, os.str());
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream in = open_for_read(path, "matrix");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        throw DataError("matrix: bad cell '" + cell + "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("matrix: ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("matrix: no data in " + path.string());
  Eigen::MatrixXd M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return M;
}

}  // namespace netblock
