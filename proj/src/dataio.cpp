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

#include "oel/dataio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <zlib.h>

#include "oel/errors.hpp"
#include "oel/linalg.hpp"
#include "oel/log.hpp"
#include "oel/rng.hpp"

namespace oel {
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'O', 'E', 'L', 'M', 'A', 'T', '0', '1'};

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& reason) {
  throw DataError(source + ":" + std::to_string(line) + ": " + reason);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_exact(std::string_view text, T& value) {
  text = trim(text);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// `#dim D` header shared by sparse and bitset files.
Eigen::Index read_dim_header(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(source, 1, "empty file, expected '#dim D' header");
  const auto t = trim(line);
  Eigen::Index dim = 0;
  if (t.rfind("#dim", 0) != 0 || !parse_exact(t.substr(4), dim) || dim < 1)
    parse_fail(source, 1, "expected '#dim D' header with D >= 1");
  return dim;
}

template <typename RowFn>
Eigen::MatrixXd read_indexed_rows(std::istream& in, const std::string& source, RowFn&& fill_row) {
  const Eigen::Index dim = read_dim_header(in, source);
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(dim);
    for (auto tok : tokens(line)) fill_row(tok, row, dim, line_no);
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

bool get_u64(std::istream& in, std::uint64_t& v) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return true;
}

std::string read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset), chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::ifstream open_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Eigen::MatrixXd read_dense(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(source, 1, "empty file, expected '#rows,cols' header");
  auto header = trim(line);
  if (header.empty() || header.front() != '#') parse_fail(source, 1, "expected '#rows,cols' header");
  const auto dims = split_commas(header.substr(1));
  Eigen::Index rows = 0, cols = 0;
  if (dims.size() != 2 || !parse_exact(dims[0], rows) || !parse_exact(dims[1], cols) || rows < 0 || cols < 1)
    parse_fail(source, 1, "expected '#rows,cols' header");

  Eigen::MatrixXd out(rows, cols);
  Eigen::Index r = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (r >= rows) parse_fail(source, line_no, "more data rows than the declared " + std::to_string(rows));
    const auto fields = split_commas(line);
    if (static_cast<Eigen::Index>(fields.size()) != cols)
      parse_fail(source, line_no,
                 "expected " + std::to_string(cols) + " values, found " + std::to_string(fields.size()));
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_exact(fields[static_cast<std::size_t>(c)], v))
        parse_fail(source, line_no, "bad number '" + std::string(trim(fields[static_cast<std::size_t>(c)])) + "'");
      out(r, c) = v;
    }
    ++r;
  }
  if (r != rows)
    parse_fail(source, line_no, "declared " + std::to_string(rows) + " rows, found " + std::to_string(r));
  return out;
}

Eigen::MatrixXd read_sparse(std::istream& in, const std::string& source) {
  return read_indexed_rows(in, source, [&](std::string_view tok, Eigen::VectorXd& row, Eigen::Index dim,
                                           std::size_t line_no) {
    const auto colon = tok.find(':');
    Eigen::Index idx = 0;
    double v = 0.0;
    if (colon == std::string_view::npos || !parse_exact(tok.substr(0, colon), idx) ||
        !parse_exact(tok.substr(colon + 1), v))
      parse_fail(source, line_no, "expected index:value, got '" + std::string(tok) + "'");
    if (idx < 0 || idx >= dim)
      parse_fail(source, line_no, "index " + std::to_string(idx) + " outside declared dimension " + std::to_string(dim));
    row(idx) = v;
  });
}

Eigen::MatrixXd read_bitsets(std::istream& in, const std::string& source) {
  return read_indexed_rows(in, source, [&](std::string_view tok, Eigen::VectorXd& row, Eigen::Index dim,
                                           std::size_t line_no) {
    Eigen::Index idx = 0;
    if (!parse_exact(tok, idx)) parse_fail(source, line_no, "expected a label index, got '" + std::string(tok) + "'");
    if (idx < 0 || idx >= dim)
      parse_fail(source, line_no, "label " + std::to_string(idx) + " outside declared dimension " + std::to_string(dim));
    row(idx) = 1.0;
  });
}

std::vector<Permutation> read_permutations(std::istream& in, const std::string& source) {
  std::vector<Permutation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<int> ranks;
    for (auto field : split_commas(line)) {
      int r = 0;
      if (!parse_exact(field, r)) parse_fail(source, line_no, "bad rank '" + std::string(trim(field)) + "'");
      ranks.push_back(r);
    }
    if (!out.empty() && static_cast<int>(ranks.size()) != out.front().size())
      parse_fail(source, line_no, "permutation length differs from the first line");
    try {
      out.emplace_back(std::move(ranks));
    } catch (const std::invalid_argument& e) {
      parse_fail(source, line_no, e.what());
    }
  }
  return out;
}

Eigen::MatrixXd read_features_file(const fs::path& path) {
  auto in = open_text(path);
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  if (trim(first).rfind("#dim", 0) == 0) return read_sparse(in, path.string());
  return read_dense(in, path.string());
}

void write_dense(std::ostream& out, const Eigen::MatrixXd& x) {
  out << '#' << x.rows() << ',' << x.cols() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x(i, j));
      if (j) out << ',';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

void write_dense_file(const fs::path& path, const Eigen::MatrixXd& x) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_dense(out, x);
}

void write_matrix_binary(std::ostream& out, const Eigen::MatrixXd& x) {
  out.write(kMagic, sizeof kMagic);
  put_u64(out, static_cast<std::uint64_t>(x.rows()));
  put_u64(out, static_cast<std::uint64_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(x(i, j)));
}

Eigen::MatrixXd read_matrix_binary(std::istream& in, const std::string& source) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw DataError(source + ": not a matrix file (bad magic)");
  std::uint64_t rows = 0, cols = 0;
  if (!get_u64(in, rows) || !get_u64(in, cols)) throw DataError(source + ": truncated header");
  if (rows > (1ULL << 32) || cols > (1ULL << 32)) throw DataError(source + ": implausible dimensions");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      std::uint64_t bits = 0;
      if (!get_u64(in, bits)) throw DataError(source + ": truncated data");
      out(i, j) = std::bit_cast<double>(bits);
    }
  return out;
}

void write_matrix_file(const fs::path& path, const Eigen::MatrixXd& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_matrix_binary(out, x);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Eigen::MatrixXd read_matrix_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_matrix_binary(in, path.string());
}

std::string_view to_string(OutputKind kind) {
  switch (kind) {
    case OutputKind::dense: return "dense";
    case OutputKind::bitset: return "bitset";
    case OutputKind::permutation: return "permutation";
    case OutputKind::precomputed: return "precomputed";
  }
  return "unknown";
}

OutputKind parse_output_kind(std::string_view name) {
  for (auto kind : {OutputKind::dense, OutputKind::bitset, OutputKind::permutation, OutputKind::precomputed})
    if (name == to_string(kind)) return kind;
  throw DataError("unknown output kind '" + std::string(name) + "'");
}

void Dataset::validate() const {
  if (n() < 1) throw DataError("dataset: no supervised examples");
  if (outputs.rows() != n())
    throw DataError("dataset: " + std::to_string(n()) + " inputs but " + std::to_string(outputs.rows()) + " outputs");
  if (test_outputs.rows() > 0 && test_outputs.rows() != test_inputs.rows())
    throw DataError("dataset: " + std::to_string(test_inputs.rows()) + " test inputs but " +
                    std::to_string(test_outputs.rows()) + " test outputs");
  const Eigen::Index d = outputs.cols();
  auto check_cols = [&](const SampleMatrix& y, const char* what) {
    if (y.rows() > 0 && y.cols() != d)
      throw DataError(std::string("dataset: ") + what + " have " + std::to_string(y.cols()) +
                      " columns, supervised outputs have " + std::to_string(d));
  };
  check_cols(unsup_outputs, "unsupervised outputs");
  check_cols(test_outputs, "test outputs");
  check_cols(candidates, "candidates");
  if (test_inputs.rows() > 0 && test_inputs.cols() != inputs.cols())
    throw DataError("dataset: test inputs and training inputs differ in dimension");
  if (static_cast<Eigen::Index>(candidate_ids.size()) != candidates.rows())
    throw DataError("dataset: candidate id count does not match candidate rows");
  if (!query_candidates.empty()) {
    if (static_cast<Eigen::Index>(query_candidates.size()) != n_test())
      throw DataError("dataset: candidate lists cover " + std::to_string(query_candidates.size()) + " queries, have " +
                      std::to_string(n_test()) + " test inputs");
    for (const auto& list : query_candidates)
      for (auto c : list)
        if (c < 0 || c >= candidates.rows()) throw DataError("dataset: candidate list references a missing candidate");
  }
}

namespace {

KernelSpec kernel_from_config(Config& cfg, const std::string& prefix, const std::string& default_kind,
                              const fs::path& base) {
  KernelSpec spec;
  try {
    spec.kind = parse_kernel_kind(cfg.get_string(prefix + ".kind", default_kind));
  } catch (const std::invalid_argument& e) {
    throw UsageError(prefix + ".kind: " + e.what());
  }
  if (spec.kind == KernelKind::gaussian || spec.kind == KernelKind::gaussian_tanimoto)
    spec.sigma2 = cfg.get_double(prefix + ".sigma2", 1.0);
  if (spec.kind == KernelKind::precomputed) spec.path = (base / cfg.require(prefix + ".path")).string();
  if (spec.kind != KernelKind::precomputed && spec.kind != KernelKind::linear && !(spec.sigma2 > 0.0))
    throw UsageError(prefix + ".sigma2 must be positive");
  return spec;
}

std::pair<Eigen::Index, Eigen::Index> parse_range(const std::string& key, const std::string& text, Eigen::Index n) {
  const auto colon = text.find(':');
  Eigen::Index lo = 0, hi = 0;
  if (colon == std::string::npos || !parse_exact(std::string_view(text).substr(0, colon), lo) ||
      !parse_exact(std::string_view(text).substr(colon + 1), hi))
    throw UsageError(key + ": expected 'begin:end', got '" + text + "'");
  if (lo < 0 || hi > n || lo >= hi)
    throw DataError(key + ": range " + text + " is empty or exceeds " + std::to_string(n) + " rows");
  return {lo, hi};
}

Eigen::MatrixXd read_outputs_file(OutputKind kind, const fs::path& path) {
  auto in = open_text(path);
  switch (kind) {
    case OutputKind::dense:
    case OutputKind::precomputed:
      return read_dense(in, path.string());
    case OutputKind::bitset:
      return read_bitsets(in, path.string());
    case OutputKind::permutation: {
      const auto perms = read_permutations(in, path.string());
      if (perms.empty()) return {};
      const int k = perms.front().size();
      if (k < 2) throw DataError(path.string() + ": permutations need at least two items");
      Eigen::MatrixXd out(static_cast<Eigen::Index>(perms.size()), k * (k - 1) / 2);
      for (std::size_t i = 0; i < perms.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = kemeny_embed(perms[i]).transpose();
      return out;
    }
  }
  throw DataError("unknown output kind");
}

Eigen::MatrixXd index_column(Eigen::Index begin, Eigen::Index count) {
  return Eigen::VectorXd::LinSpaced(count, static_cast<double>(begin), static_cast<double>(begin + count - 1));
}

}  // namespace

Dataset load_dataset(Config& cfg, const fs::path& base) {
  Dataset d;
  d.output_kind = parse_output_kind(cfg.get_string("data.output_kind", "dense"));
  d.input_kernel = kernel_from_config(cfg, "input_kernel", "gaussian", base);
  d.output_kernel = kernel_from_config(cfg, "output_kernel",
                                       d.output_kind == OutputKind::precomputed ? "precomputed" : "linear", base);
  if ((d.output_kind == OutputKind::precomputed) != (d.output_kernel.kind == KernelKind::precomputed))
    throw UsageError("output kind 'precomputed' and output_kernel.kind 'precomputed' must be used together");

  auto path_of = [&](const std::string& key) { return base / cfg.require(key); };
  auto optional_path = [&](const std::string& key) -> std::optional<fs::path> {
    if (auto v = cfg.find(key); v && !v->empty()) return base / *v;
    return std::nullopt;
  };

  // Inputs.
  if (d.input_kernel.kind == KernelKind::precomputed) {
    const Eigen::MatrixXd train = read_matrix_file(d.input_kernel.path);
    if (train.rows() != train.cols()) throw DataError(d.input_kernel.path + ": input Gram must be square");
    if (symmetry_defect(train) > 1e-10) throw DataError(d.input_kernel.path + ": input Gram is not symmetric");
    Eigen::MatrixXd test_block;
    if (auto p = optional_path("data.test_input_gram")) {
      test_block = read_matrix_file(*p);
      if (test_block.cols() != train.rows())
        throw DataError(p->string() + ": test block must have one column per training input");
    }
    const Eigen::Index n_all = train.rows();
    const Eigen::Index t = test_block.rows();
    auto pool = std::make_shared<Eigen::MatrixXd>(n_all + t, n_all + t);
    pool->setConstant(std::numeric_limits<double>::quiet_NaN());
    pool->topLeftCorner(n_all, n_all) = train;
    if (t > 0) {
      pool->bottomLeftCorner(t, n_all) = test_block;
      pool->topRightCorner(n_all, t) = test_block.transpose();
    }
    d.input_kernel.source = std::move(pool);
    d.inputs = index_column(0, n_all);
    if (t > 0) d.test_inputs = index_column(n_all, t);
  } else {
    d.inputs = read_features_file(path_of("data.train_inputs"));
    if (auto p = optional_path("data.test_inputs")) d.test_inputs = read_features_file(*p);
  }

  if (d.output_kernel.kind == KernelKind::precomputed) {
    auto gram = std::make_shared<Eigen::MatrixXd>(read_matrix_file(d.output_kernel.path));
    if (gram->rows() != gram->cols()) throw DataError(d.output_kernel.path + ": output Gram must be square");
    if (symmetry_defect(*gram) > 1e-10) throw DataError(d.output_kernel.path + ": output Gram is not symmetric");
    d.output_kernel.source = std::move(gram);
  }

  d.outputs = read_outputs_file(d.output_kind, path_of("data.train_outputs"));
  if (d.outputs.rows() != d.inputs.rows())
    throw DataError(path_of("data.train_outputs").string() + ": " + std::to_string(d.outputs.rows()) +
                    " outputs for " + std::to_string(d.inputs.rows()) + " inputs");
  if (auto r = cfg.find("data.train_range")) {
    const auto [lo, hi] = parse_range("data.train_range", *r, d.inputs.rows());
    d.inputs = d.inputs.middleRows(lo, hi - lo).eval();
    d.outputs = d.outputs.middleRows(lo, hi - lo).eval();
  }
  if (auto p = optional_path("data.unsup_outputs")) {
    d.unsup_outputs = read_outputs_file(d.output_kind, *p);
    if (auto r = cfg.find("data.unsup_range")) {
      const auto [lo, hi] = parse_range("data.unsup_range", *r, d.unsup_outputs.rows());
      d.unsup_outputs = d.unsup_outputs.middleRows(lo, hi - lo).eval();
    }
  } else {
    d.unsup_outputs.resize(0, d.outputs.cols());
  }
  if (auto p = optional_path("data.test_outputs")) d.test_outputs = read_outputs_file(d.output_kind, *p);

  if (auto p = optional_path("data.candidates")) {
    d.candidates = read_outputs_file(d.output_kind, *p);
  } else {
    d.candidates = stack_rows(d.outputs, d.unsup_outputs);
  }
  d.candidate_ids.reserve(static_cast<std::size_t>(d.candidates.rows()));
  for (Eigen::Index i = 0; i < d.candidates.rows(); ++i) d.candidate_ids.push_back(std::to_string(i));

  if (auto p = optional_path("data.candidate_lists")) {
    auto in = open_text(*p);
    d.query_candidates.assign(static_cast<std::size_t>(d.n_test()), {});
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto toks = tokens(line);
      if (toks.empty()) continue;
      Eigen::Index q = 0, c = 0;
      if (toks.size() != 2 || !parse_exact(toks[0], q) || !parse_exact(toks[1], c))
        parse_fail(p->string(), line_no, "expected 'query_id candidate_row'");
      if (q < 0 || q >= d.n_test()) parse_fail(p->string(), line_no, "query id out of range");
      if (c < 0 || c >= d.candidates.rows()) parse_fail(p->string(), line_no, "candidate row out of range");
      d.query_candidates[static_cast<std::size_t>(q)].push_back(c);
    }
  }
  d.validate();
  return d;
}

std::vector<Eigen::Index> find_rows(const SampleMatrix& haystack, const SampleMatrix& needles) {
  auto key = [](const SampleMatrix& x, Eigen::Index i) {
    std::string bytes(static_cast<std::size_t>(x.cols()) * sizeof(double), '\0');
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double v = x(i, j) == 0.0 ? 0.0 : x(i, j);  // fold -0.0
      std::memcpy(bytes.data() + j * sizeof(double), &v, sizeof(double));
    }
    return bytes;
  };
  std::unordered_map<std::string, Eigen::Index> index;
  for (Eigen::Index i = 0; i < haystack.rows(); ++i) index.emplace(key(haystack, i), i);
  std::vector<Eigen::Index> out(static_cast<std::size_t>(needles.rows()), -1);
  if (needles.cols() != haystack.cols()) return out;
  for (Eigen::Index i = 0; i < needles.rows(); ++i) {
    const auto it = index.find(key(needles, i));
    if (it != index.end()) out[static_cast<std::size_t>(i)] = it->second;
  }
  return out;
}

Eigen::MatrixXd stack_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  if (a.cols() != b.cols()) throw DataError("stack_rows: column counts differ");
  Eigen::MatrixXd out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

Dataset synth_misleading_axis(Eigen::Index n, Eigen::Index m, Eigen::Index n_test, double var_x, double var_z,
                      std::uint64_t seed) {
  if (!(var_x > 0.0) || !(var_z >= 0.0)) throw std::invalid_argument("synth_misleading_axis: variances must be positive");
  if (n < 1 || m < 0 || n_test < 0) throw std::invalid_argument("synth_misleading_axis: sample sizes must be nonnegative, n >= 1");
  if (!(var_z > var_x)) log_warning("synth_misleading_axis: var_z <= var_x, outside the regime where supervision helps");

  Rng rng = make_rng(seed, "synth");
  std::normal_distribution<double> nx(0.0, std::sqrt(var_x));
  std::normal_distribution<double> nz(0.0, std::sqrt(var_z));
  auto draw = [&](Eigen::Index count, Eigen::MatrixXd& y) {
    y.resize(count, 2);
    for (Eigen::Index i = 0; i < count; ++i) {
      y(i, 0) = nx(rng);
      y(i, 1) = var_z > 0.0 ? nz(rng) : 0.0;
    }
  };

  Dataset d;
  d.output_kind = OutputKind::dense;
  d.input_kernel = KernelSpec::linear();
  d.output_kernel = KernelSpec::linear();
  draw(n, d.outputs);
  draw(m, d.unsup_outputs);
  draw(n_test, d.test_outputs);
  d.inputs = d.outputs.col(0);
  d.test_inputs = d.test_outputs.col(0);
  d.candidates = stack_rows(stack_rows(d.outputs, d.unsup_outputs), d.test_outputs);
  for (Eigen::Index i = 0; i < d.candidates.rows(); ++i) d.candidate_ids.push_back(std::to_string(i));
  d.validate();
  return d;
}

void write_dataset(const Dataset& d, const fs::path& dir) {
  if (d.output_kind != OutputKind::dense || d.input_kernel.kind == KernelKind::precomputed)
    throw UsageError("write_dataset: only dense feature datasets can be written");
  fs::create_directories(dir);
  Config cfg;
  cfg.set("data.output_kind", "dense");
  cfg.set("input_kernel.kind", std::string(to_string(d.input_kernel.kind)));
  cfg.set("output_kernel.kind", std::string(to_string(d.output_kernel.kind)));
  write_dense_file(dir / "train_inputs.csv", d.inputs);
  write_dense_file(dir / "train_outputs.csv", d.outputs);
  cfg.set("data.train_inputs", "train_inputs.csv");
  cfg.set("data.train_outputs", "train_outputs.csv");
  if (d.m() > 0) {
    write_dense_file(dir / "unsup_outputs.csv", d.unsup_outputs);
    cfg.set("data.unsup_outputs", "unsup_outputs.csv");
  }
  if (d.has_test()) {
    write_dense_file(dir / "test_inputs.csv", d.test_inputs);
    cfg.set("data.test_inputs", "test_inputs.csv");
    if (d.test_outputs.rows() > 0) {
      write_dense_file(dir / "test_outputs.csv", d.test_outputs);
      cfg.set("data.test_outputs", "test_outputs.csv");
    }
  }
  write_dense_file(dir / "candidates.csv", d.candidates);
  cfg.set("data.candidates", "candidates.csv");
  std::ofstream out(dir / "data.conf");
  out << "# dataset written by `oel synth`; paths are relative to this file\n";
  cfg.write(out);
}

SplitScheme SplitScheme::holdout(double ratio) { return {SplitKind::holdout, ratio, 5, 1}; }
SplitScheme SplitScheme::kfold(int folds) { return {SplitKind::kfold, 0.8, folds, 1}; }
SplitScheme SplitScheme::repeated_subsample(double ratio, int reps) {
  return {SplitKind::repeated_subsample, ratio, 5, reps};
}

std::vector<Split> split(Eigen::Index n, const SplitScheme& scheme, std::uint64_t seed) {
  Rng rng = make_rng(seed, "splits");
  auto shuffled = [&] {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (Eigen::Index i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<Eigen::Index> pick(0, i);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    return perm;
  };
  auto ratio_split = [&](double ratio) {
    const auto n_train = static_cast<Eigen::Index>(std::llround(ratio * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n)
      throw std::invalid_argument("split: ratio " + std::to_string(ratio) + " leaves an empty side for n=" +
                                  std::to_string(n));
    auto perm = shuffled();
    Split s;
    s.train.assign(perm.begin(), perm.begin() + n_train);
    s.test.assign(perm.begin() + n_train, perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
  };

  std::vector<Split> out;
  switch (scheme.kind) {
    case SplitKind::holdout:
      out.push_back(ratio_split(scheme.ratio));
      break;
    case SplitKind::repeated_subsample:
      if (scheme.reps < 1) throw std::invalid_argument("split: reps must be at least 1");
      for (int r = 0; r < scheme.reps; ++r) out.push_back(ratio_split(scheme.ratio));
      break;
    case SplitKind::kfold: {
      if (scheme.folds < 2) throw std::invalid_argument("split: kfold needs at least 2 folds");
      if (scheme.folds > n)
        throw std::invalid_argument("split: " + std::to_string(scheme.folds) + " folds for n=" + std::to_string(n));
      const auto perm = shuffled();
      std::vector<int> fold_of(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i)
        fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
            static_cast<int>(i * scheme.folds / n);
      for (int f = 0; f < scheme.folds; ++f) {
        Split s;
        for (Eigen::Index i = 0; i < n; ++i) (fold_of[static_cast<std::size_t>(i)] == f ? s.test : s.train).push_back(i);
        out.push_back(std::move(s));
      }
      break;
    }
  }
  return out;
}

const Eigen::MatrixXd& ModelBundle::matrix(const std::string& name) const {
  const auto it = matrices.find(name);
  if (it == matrices.end()) throw DataError("model bundle: missing matrix '" + name + "'");
  return it->second;
}

const std::string& ModelBundle::value(const std::string& key) const {
  const auto it = manifest.find(key);
  if (it == manifest.end()) throw DataError("model bundle: manifest has no key '" + key + "'");
  return it->second;
}

namespace {

std::string manifest_body(const std::map<std::string, std::string>& entries) {
  std::ostringstream out;
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace

void save_model(const ModelBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  std::map<std::string, std::string> entries = bundle.manifest;
  entries["format_version"] = std::to_string(kBundleFormatVersion);
  for (const auto& [name, mat] : bundle.matrices) {
    std::ostringstream bytes(std::ios::binary);
    write_matrix_binary(bytes, mat);
    const std::string data = bytes.str();
    std::ofstream out(dir / (name + ".bin"), std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError("cannot write matrix '" + name + "' to " + dir.string());
    entries["matrix." + name + ".crc32"] = std::to_string(crc32_of(data));
  }
  const std::string body = manifest_body(entries);
  std::ofstream out(dir / "manifest.txt");
  out << body << "checksum = " << crc32_of(body) << '\n';
  if (!out) throw DataError("cannot write manifest to " + dir.string());
}

ModelBundle load_model(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.txt";
  std::istringstream in(read_file_bytes(manifest_path));
  std::map<std::string, std::string> entries;
  std::string line, checksum;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw DataError(manifest_path.string() + ": malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "checksum")
      checksum = value;
    else
      entries[key] = value;
  }
  if (checksum.empty() || checksum != std::to_string(crc32_of(manifest_body(entries))))
    throw DataError(manifest_path.string() + ": checksum mismatch");
  if (entries["format_version"] != std::to_string(kBundleFormatVersion))
    throw DataError(manifest_path.string() + ": format version " + entries["format_version"] + ", expected " +
                    std::to_string(kBundleFormatVersion));

  ModelBundle bundle;
  for (const auto& [key, value] : entries) {
    if (key.rfind("matrix.", 0) == 0 && key.size() > 13 && key.compare(key.size() - 6, 6, ".crc32") == 0) {
      const std::string name = key.substr(7, key.size() - 13);
      const fs::path file = dir / (name + ".bin");
      if (!fs::exists(file)) throw DataError("model bundle: missing matrix file " + file.string());
      const std::string data = read_file_bytes(file);
      if (std::to_string(crc32_of(data)) != value) throw DataError("model bundle: checksum mismatch for " + file.string());
      std::istringstream bytes(data, std::ios::binary);
      bundle.matrices[name] = read_matrix_binary(bytes, file.string());
    } else if (key != "format_version") {
      bundle.manifest[key] = value;
    }
  }
  return bundle;
}

}  // namespace oel
