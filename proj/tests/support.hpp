#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "termforge/feature_space.hpp"
#include "termforge/matrix.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return TERMFORGE_TEST_DATA; }
inline std::filesystem::path mini_corpus() { return TERMFORGE_MINI_CORPUS; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline termforge::Matrix dense(const std::vector<std::vector<double>>& rows) {
  termforge::Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

inline std::vector<std::vector<double>> rows_of(const termforge::Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

// Representation with labels p00, p01, ...
inline termforge::Representation rep_of(const std::vector<std::vector<double>>& rows,
                                        termforge::Provenance p = termforge::Provenance::NpVpc) {
  termforge::Representation r;
  r.provenance = p;
  r.matrix = dense(rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    r.labels.push_back((i < 10 ? "p0" : "p") + std::to_string(i));
  }
  return r;
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("termforge_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
