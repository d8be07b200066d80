// Copyright 2026 The LSMI-Sinkhorn Authors
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

#include "lsmi/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace lsmi {

namespace {

// Stream tags for the independent draws of one synthetic dataset.
constexpr std::uint64_t kPairedStream = 0x7061;
constexpr std::uint64_t kPoolXStream = 0x7078;
constexpr std::uint64_t kPoolYStream = 0x7079;
constexpr std::uint64_t kSharedStream = 0x7073;

SampleMatrix standard_normal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SampleMatrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

SampleMatrix add_noise(SampleMatrix y, double sd, std::mt19937_64& rng) {
  if (sd == 0.0) return y;
  return y + sd * standard_normal(y.rows(), y.cols(), rng);
}

// Response for latent inputs x, drawing any noise from rng. pca responses
// are the centred scores on `direction`.
SampleMatrix respond(const SyntheticSpec& spec, const SampleMatrix& x,
                     const Vector& centre, const Vector& direction,
                     std::mt19937_64& rng) {
  const double sd = spec.resolved_noise_sd();
  switch (spec.kind) {
    case SyntheticKind::kRandom:
      return standard_normal(x.rows(), x.cols(), rng);
    case SyntheticKind::kLinear:
      return add_noise(0.5 * x, sd, rng);
    case SyntheticKind::kNonlinear:
      return add_noise(x.array().sin().matrix(), sd, rng);
    case SyntheticKind::kPca: {
      SampleMatrix scores = (x.rowwise() - centre.transpose()) * direction;
      return add_noise(std::move(scores), sd, rng);
    }
  }
  throw_input("unknown synthetic kind");
}

// Leading eigenvector of the sample covariance; sign fixed so the largest
// magnitude component is positive.
Vector top_component(const SampleMatrix& x, const Vector& centre) {
  const SampleMatrix centred = x.rowwise() - centre.transpose();
  const Matrix cov = centred.transpose() * centred /
                     static_cast<double>(std::max<Index>(x.rows(), 1));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw_numerical("covariance eigensolve failed");
  Vector v = eig.eigenvectors().col(cov.rows() - 1);
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
  return v;
}

SampleMatrix take_rows(const SampleMatrix& m, const std::vector<Index>& rows) {
  SampleMatrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return res.ec == std::errc() && res.ptr == cell.data() + cell.size();
}

std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  if (delim == ' ') {
    std::size_t pos = 0;
    while (pos < line.size()) {
      pos = line.find_first_not_of(" \t", pos);
      if (pos == std::string_view::npos) break;
      auto end = line.find_first_of(" \t", pos);
      if (end == std::string_view::npos) end = line.size();
      cells.push_back(line.substr(pos, end - pos));
      pos = end;
    }
    return cells;
  }
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(delim, start);
    if (end == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return cells;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_input("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "random") return SyntheticKind::kRandom;
  if (name == "linear") return SyntheticKind::kLinear;
  if (name == "nonlinear") return SyntheticKind::kNonlinear;
  if (name == "pca") return SyntheticKind::kPca;
  throw_input("unknown synthetic kind: " + std::string(name));
}

const char* synthetic_kind_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kRandom: return "random";
    case SyntheticKind::kLinear: return "linear";
    case SyntheticKind::kNonlinear: return "nonlinear";
    case SyntheticKind::kPca: return "pca";
  }
  return "unknown";
}

Index SyntheticSpec::resolved_dim() const {
  if (dim > 0) return dim;
  return kind == SyntheticKind::kPca ? 2 : 1;
}

double SyntheticSpec::resolved_noise_sd() const {
  if (noise_sd) return *noise_sd;
  return kind == SyntheticKind::kLinear ? 0.1 : 0.0;
}

void SyntheticSpec::validate() const {
  if (n < 0 || n_x < 0 || n_y < 0) throw_input("sample counts must be nonnegative");
  if (dim < 0) throw_input("dimension must be nonnegative");
  if (noise_sd && !(*noise_sd >= 0.0 && std::isfinite(*noise_sd))) {
    throw_input("noise_sd must be nonnegative");
  }
  if (shared_unpaired_draws && n_x != n_y) {
    throw_input("shared unpaired draws need n_x == n_y");
  }
  if (static_cast<int>(kind) < 0 || static_cast<int>(kind) > 3) {
    throw_input("unknown synthetic kind");
  }
}

SampleSet generate(const SyntheticSpec& spec) {
  spec.validate();
  const Index d = spec.resolved_dim();
  std::mt19937_64 paired_rng(derive_seed(spec.seed, kPairedStream));
  std::mt19937_64 pool_x_rng(derive_seed(spec.seed, kPoolXStream));
  std::mt19937_64 pool_y_rng(derive_seed(spec.seed, kPoolYStream));
  std::mt19937_64 shared_rng(derive_seed(spec.seed, kSharedStream));

  SampleSet out;
  out.paired_x = standard_normal(spec.n, d, paired_rng);
  SampleMatrix latent_y;
  if (spec.shared_unpaired_draws) {
    out.unpaired_x = standard_normal(spec.n_x, d, shared_rng);
  } else {
    out.unpaired_x = standard_normal(spec.n_x, d, pool_x_rng);
    latent_y = standard_normal(spec.n_y, d, pool_y_rng);
  }

  Vector centre = Vector::Zero(d);
  Vector direction = Vector::Zero(d);
  if (spec.kind == SyntheticKind::kPca) {
    SampleMatrix pool(out.paired_x.rows() + out.unpaired_x.rows(), d);
    pool << out.paired_x, out.unpaired_x;
    if (pool.rows() == 0) pool = latent_y;
    if (pool.rows() > 0) {
      centre = pool.colwise().mean().transpose();
      direction = top_component(pool, centre);
    }
  }

  out.paired_y = respond(spec, out.paired_x, centre, direction, paired_rng);
  if (spec.shared_unpaired_draws) {
    out.unpaired_y = respond(spec, out.unpaired_x, centre, direction, shared_rng);
  } else {
    out.unpaired_y = respond(spec, latent_y, centre, direction, pool_y_rng);
  }
  return out;
}

Table parse_table(std::string_view text, const TableOptions& options) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    if (!line.empty() && line.front() != '#') lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw_input("table is empty");

  char delim = options.delimiter;
  if (delim == 0) {
    delim = ' ';
    const std::size_t probes = std::min<std::size_t>(lines.size(), 2);
    for (char candidate : {',', ';', '\t'}) {
      const bool seen = std::any_of(lines.begin(), lines.begin() + probes, [&](auto l) {
        return l.find(candidate) != std::string_view::npos;
      });
      if (seen) {
        delim = candidate;
        break;
      }
    }
  }

  Table table;
  std::size_t first = 0;
  const auto head = split_line(lines[0], delim);
  bool header = false;
  if (options.has_header) {
    header = *options.has_header;
  } else {
    double ignored = 0.0;
    header = std::any_of(head.begin(), head.end(), [&](std::string_view c) {
      return !parse_double(c, ignored);
    });
  }
  if (header) {
    for (auto cell : head) table.header.emplace_back(trim(cell));
    first = 1;
  }

  const Index rows = static_cast<Index>(lines.size() - first);
  const Index cols = rows > 0 ? static_cast<Index>(split_line(lines[first], delim).size())
                              : static_cast<Index>(table.header.size());
  if (header && cols != static_cast<Index>(table.header.size())) {
    throw_input("header width does not match data");
  }
  table.values.resize(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto cells = split_line(lines[first + static_cast<std::size_t>(r)], delim);
    if (static_cast<Index>(cells.size()) != cols) {
      throw_input("ragged table at data row " + std::to_string(r));
    }
    for (Index c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_double(cells[static_cast<std::size_t>(c)], v)) {
        throw_input("non-numeric cell at data row " + std::to_string(r) +
                    ", column " + std::to_string(c));
      }
      table.values(r, c) = v;
    }
  }
  return table;
}

Table read_table(const std::string& path, const TableOptions& options) {
  return parse_table(slurp(path), options);
}

void write_table(std::ostream& out, const SampleMatrix& values,
                 const std::vector<std::string>& header, char delimiter) {
  char buf[32];
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) out << delimiter;
      out << header[c];
    }
    out << '\n';
  }
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      if (c) out << delimiter;
      const auto res = std::to_chars(buf, buf + sizeof buf, values(r, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

std::vector<IndexPair> parse_index_pairs(std::string_view text) {
  const Table table = parse_table(text);
  if (table.values.cols() != 2) throw_input("index file must have two columns");
  std::vector<IndexPair> pairs;
  for (Index r = 0; r < table.values.rows(); ++r) {
    const double a = table.values(r, 0);
    const double b = table.values(r, 1);
    if (a < 0 || b < 0 || a != std::floor(a) || b != std::floor(b)) {
      throw_input("index file holds a non-index value at row " + std::to_string(r));
    }
    pairs.emplace_back(static_cast<Index>(a), static_cast<Index>(b));
  }
  return pairs;
}

std::vector<IndexPair> read_index_pairs(const std::string& path) {
  return parse_index_pairs(slurp(path));
}

FeatureSplit split_features(const SampleMatrix& table, Index d_x) {
  const Index total = table.cols();
  if (total < 2) throw_input("table needs at least 2 columns");
  if (d_x < 1 || d_x >= total) throw_input("d_x must lie in [1, columns)");
  if (table.rows() < 2) throw_input("table needs at least 2 rows");
  const Index d_y = total - d_x;

  FeatureSplit split;
  const SampleMatrix centred = table.rowwise() - table.colwise().mean();
  Vector sd(total);
  for (Index c = 0; c < total; ++c) {
    sd(c) = centred.col(c).norm();
    if (sd(c) == 0.0) {
      split.warnings.push_back("column " + std::to_string(c) +
                               " is constant; correlation taken as 0");
    }
  }

  struct Candidate {
    double corr;
    Index i;
    Index j;
  };
  std::vector<Candidate> candidates;
  for (Index i = 0; i < total; ++i) {
    for (Index j = i + 1; j < total; ++j) {
      if (sd(i) == 0.0 || sd(j) == 0.0) continue;
      const double r = std::abs(centred.col(i).dot(centred.col(j)) / (sd(i) * sd(j)));
      if (r > 1e-12) candidates.push_back({r, i, j});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.corr > b.corr; });

  std::vector<int> side(static_cast<std::size_t>(total), -1);  // 0: x, 1: y
  Index nx = 0;
  Index ny = 0;
  for (const auto& c : candidates) {
    if (nx == d_x || ny == d_y) break;
    if (side[c.i] != -1 || side[c.j] != -1) continue;
    side[c.i] = 0;
    side[c.j] = 1;
    ++nx;
    ++ny;
  }
  for (Index c = 0; c < total; ++c) {
    if (side[c] != -1) continue;
    if (nx < d_x) {
      side[c] = 0;
      ++nx;
    } else {
      side[c] = 1;
      ++ny;
    }
  }
  for (Index c = 0; c < total; ++c) {
    (side[c] == 0 ? split.x_columns : split.y_columns).push_back(c);
  }
  split.x = table(Eigen::all, split.x_columns);
  split.y = table(Eigen::all, split.y_columns);
  return split;
}

std::vector<IndexPair> IndexedSampleSet::unpaired_truth() const {
  std::unordered_map<Index, Index> y_pos;
  for (std::size_t j = 0; j < y_rows.size(); ++j) {
    y_pos.emplace(y_rows[j], static_cast<Index>(j));
  }
  std::vector<IndexPair> truth;
  for (std::size_t i = 0; i < x_rows.size(); ++i) {
    const auto it = y_pos.find(x_rows[i]);
    if (it != y_pos.end()) truth.emplace_back(static_cast<Index>(i), it->second);
  }
  return truth;
}

IndexedSampleSet make_semi_supervised(const SampleMatrix& x, const SampleMatrix& y,
                                      Index n, Index n_x, Index n_y,
                                      std::uint64_t seed) {
  if (x.rows() != y.rows()) throw_input("x and y row counts differ");
  if (n < 0 || n_x < 0 || n_y < 0) throw_input("counts must be nonnegative");
  const Index rows = x.rows();
  const Index block = std::max(n_x, n_y);
  if (n + block > rows) throw_input("insufficient rows for the requested split");

  std::vector<Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(derive_seed(seed, 0x7368));
  std::shuffle(order.begin(), order.end(), rng);

  IndexedSampleSet out;
  out.paired_rows.assign(order.begin(), order.begin() + n);
  out.paired_y_rows = out.paired_rows;
  std::vector<Index> pool(order.begin() + n, order.begin() + n + block);
  out.x_rows.assign(pool.begin(), pool.begin() + n_x);
  std::mt19937_64 y_rng(derive_seed(seed, 0x7379));
  std::shuffle(pool.begin(), pool.end(), y_rng);
  out.y_rows.assign(pool.begin(), pool.begin() + n_y);

  out.data.paired_x = take_rows(x, out.paired_rows);
  out.data.paired_y = take_rows(y, out.paired_rows);
  out.data.unpaired_x = take_rows(x, out.x_rows);
  out.data.unpaired_y = take_rows(y, out.y_rows);
  return out;
}

IndexedSampleSet from_index_pairs(const SampleMatrix& x, const SampleMatrix& y,
                                  const std::vector<IndexPair>& pairs) {
  std::vector<char> x_used(static_cast<std::size_t>(x.rows()), 0);
  std::vector<char> y_used(static_cast<std::size_t>(y.rows()), 0);
  IndexedSampleSet out;
  for (const auto& [i, j] : pairs) {
    if (i < 0 || i >= x.rows() || j < 0 || j >= y.rows()) {
      throw_input("paired index out of range");
    }
    if (x_used[i] || y_used[j]) throw_input("row listed in two pairs");
    x_used[i] = y_used[j] = 1;
    out.paired_rows.push_back(i);
    out.paired_y_rows.push_back(j);
  }
  for (Index i = 0; i < x.rows(); ++i) {
    if (!x_used[i]) out.x_rows.push_back(i);
  }
  for (Index j = 0; j < y.rows(); ++j) {
    if (!y_used[j]) out.y_rows.push_back(j);
  }
  out.data.paired_x = take_rows(x, out.paired_rows);
  out.data.paired_y = take_rows(y, out.paired_y_rows);
  out.data.unpaired_x = take_rows(x, out.x_rows);
  out.data.unpaired_y = take_rows(y, out.y_rows);
  return out;
}

}  // namespace lsmi
