// Copyright 2026 The OEL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oel/config.hpp"
#include "oel/kernels.hpp"

namespace oel {

// ---------------------------------------------------------------------------
// File formats
//
//   dense     first line `#rows,cols`, then comma-separated rows ('.' decimal)
//   sparse    first line `#dim D`, then one row per line of `index:value`
//             pairs, 0-based indices; an empty line is an all-zero row
//   bitset    first line `#dim D`, then one row per line of active label
//             indices separated by spaces
//   ranks     one permutation per line, comma-separated 1-based ranks
//   binary    8-byte magic "OELMAT01", u64 rows, u64 cols, then row-major
//             IEEE-754 doubles; all little-endian
//
// Parse errors are DataError with `file:line: reason`.
// ---------------------------------------------------------------------------

Eigen::MatrixXd read_dense(std::istream& in, const std::string& source_name);
Eigen::MatrixXd read_sparse(std::istream& in, const std::string& source_name);
Eigen::MatrixXd read_bitsets(std::istream& in, const std::string& source_name);
std::vector<Permutation> read_permutations(std::istream& in, const std::string& source_name);

// Dispatches on the header: `#dim` means sparse, `#rows,cols` means dense.
Eigen::MatrixXd read_features_file(const std::filesystem::path& path);

void write_dense(std::ostream& out, const Eigen::MatrixXd& x);
void write_dense_file(const std::filesystem::path& path, const Eigen::MatrixXd& x);

void write_matrix_binary(std::ostream& out, const Eigen::MatrixXd& x);
Eigen::MatrixXd read_matrix_binary(std::istream& in, const std::string& source_name);
void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXd& x);
Eigen::MatrixXd read_matrix_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

enum class OutputKind { dense, bitset, permutation, precomputed };

std::string_view to_string(OutputKind kind);
OutputKind parse_output_kind(std::string_view name);

/// Supervised pairs, optional unsupervised outputs, optional test pairs and
/// candidates, all as sample matrices for the configured kernels.
///
/// Output rows are feature vectors: raw vectors (dense), 0/1 indicators
/// (bitset), Kemeny embeddings (permutation) or pool indices into the
/// precomputed output Gram (precomputed). Input rows are features, or pool
/// indices when the input kernel is precomputed.
struct Dataset {
  OutputKind output_kind = OutputKind::dense;
  KernelSpec input_kernel;
  KernelSpec output_kernel;

  SampleMatrix inputs;
  SampleMatrix outputs;
  SampleMatrix unsup_outputs;
  SampleMatrix test_inputs;
  SampleMatrix test_outputs;

  SampleMatrix candidates;
  std::vector<std::string> candidate_ids;
  // Per test query; empty when every query uses the full candidate set.
  std::vector<std::vector<Eigen::Index>> query_candidates;

  Eigen::Index n() const { return inputs.rows(); }
  Eigen::Index m() const { return unsup_outputs.rows(); }
  Eigen::Index n_test() const { return test_inputs.rows(); }
  bool has_test() const { return test_inputs.rows() > 0; }

  /// Throws DataError when a Dataset invariant does not hold.
  void validate() const;
};

/// Reads the `data.*`, `input_kernel.*` and `output_kernel.*` keys.
/// Relative paths are resolved against base_dir.
Dataset load_dataset(Config& config, const std::filesystem::path& base_dir = {});

/// Candidate rows equal to each output row (exact match), or -1.
std::vector<Eigen::Index> find_rows(const SampleMatrix& haystack, const SampleMatrix& needles);

/// Stacks rows of `a` over rows of `b`.
Eigen::MatrixXd stack_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Rows of x at idx, in order.
Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx);

/// Synthetic one-dimensional regression with outputs psi(y) = (x, z):
/// x ~ N(0, var_x) is observed, z ~ N(0, var_z) is independent noise. With
/// var_z > var_x the leading principal axis of the outputs is z while the
/// conditional mean lives on the x axis. Linear kernels on both sides;
/// candidates are all generated outputs (supervised, unsupervised, test).
Dataset synth_misleading_axis(Eigen::Index n, Eigen::Index m, Eigen::Index n_test, double var_x, double var_z,
                      std::uint64_t seed);

/// Writes a dataset as dense CSV files plus a config fragment referencing them.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

enum class SplitKind { holdout, kfold, repeated_subsample };

struct SplitScheme {
  SplitKind kind = SplitKind::holdout;
  double ratio = 0.8;  // train fraction, holdout and repeated_subsample
  int folds = 5;       // kfold
  int reps = 5;        // repeated_subsample

  static SplitScheme holdout(double ratio);
  static SplitScheme kfold(int folds);
  static SplitScheme repeated_subsample(double ratio, int reps);
};

/// Index partitions of [0, n), reproducible from (scheme, seed, n). Index
/// lists are sorted. kfold gives fold sizes differing by at most one.
std::vector<Split> split(Eigen::Index n, const SplitScheme& scheme, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Model persistence
// ---------------------------------------------------------------------------

/// Key-value manifest plus named matrices.
struct ModelBundle {
  std::map<std::string, std::string> manifest;
  std::map<std::string, Eigen::MatrixXd> matrices;

  const Eigen::MatrixXd& matrix(const std::string& name) const;
  const std::string& value(const std::string& key) const;
};

inline constexpr int kBundleFormatVersion = 1;

/// Writes manifest.txt and one <name>.bin per matrix. The manifest records
/// the format version, a CRC-32 per matrix file, and a CRC-32 over its own
/// other lines.
void save_model(const ModelBundle& bundle, const std::filesystem::path& dir);

/// Throws DataError on version mismatch, checksum mismatch, or a missing matrix.
ModelBundle load_model(const std::filesystem::path& dir);

}  // namespace oel
