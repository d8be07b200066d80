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

// lsmi command-line front end. Talks to the library only through lsmi.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lsmi/lsmi.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail_input(const std::string& message) {
  throw Failure{kExitInput, message};
}

void check(lsmi_status status) {
  if (status == LSMI_OK) return;
  const int code = status == LSMI_ERR_NUMERICAL ? kExitNumerical
                   : status == LSMI_ERR_INPUT   ? kExitInput
                                                : kExitFailure;
  throw Failure{code, lsmi_last_error()};
}

template <typename T>
using Handle = std::unique_ptr<T, void (*)(T*)>;

Handle<lsmi_table> own(lsmi_table* t) { return {t, lsmi_table_free}; }
Handle<lsmi_dataset> own(lsmi_dataset* d) { return {d, lsmi_dataset_free}; }
Handle<lsmi_fit> own(lsmi_fit* f) { return {f, lsmi_fit_free}; }
Handle<lsmi_cv_report> own(lsmi_cv_report* r) { return {r, lsmi_cv_report_free}; }
Handle<lsmi_layout> own(lsmi_layout* l) { return {l, lsmi_layout_free}; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fnv1a64(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_input("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

struct Dense {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> values;

  double at(std::int64_t r, std::int64_t c) const { return values[r * cols + c]; }
};

Dense fetch(const lsmi_table* table) {
  Dense d;
  check(lsmi_table_shape(table, &d.rows, &d.cols));
  d.values.resize(static_cast<std::size_t>(d.rows * d.cols));
  check(lsmi_table_data(table, d.values.data(), d.values.size()));
  return d;
}

Handle<lsmi_table> make_table(const Dense& d) {
  lsmi_table* t = nullptr;
  check(lsmi_table_create(d.values.data(), d.rows, d.cols, &t));
  return own(t);
}

Dense column_block(const Dense& d, std::int64_t first, std::int64_t count) {
  Dense out{d.rows, count, {}};
  out.values.reserve(static_cast<std::size_t>(d.rows * count));
  for (std::int64_t r = 0; r < d.rows; ++r) {
    for (std::int64_t c = first; c < first + count; ++c) out.values.push_back(d.at(r, c));
  }
  return out;
}

// Everything a run records about itself.
class Run {
 public:
  Run(std::string command, std::vector<std::string> argv, fs::path out_dir)
      : command_(std::move(command)), argv_(std::move(argv)), out_(std::move(out_dir)) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) fail_input("cannot create output directory " + out_.string());
  }

  json& config() { return config_; }
  json& seeds() { return seeds_; }

  void input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"fnv1a64", fnv1a64(path)}});
  }

  void time(const std::string& phase, double seconds) { timings_[phase] = seconds; }

  fs::path path(const std::string& name) const { return out_ / name; }

  void write(const std::string& name, const std::string& content,
             bool deterministic = true) {
    const fs::path p = path(name);
    std::ofstream file(p, std::ios::binary);
    file << content;
    file.close();
    if (!file) fail_input("write failed: " + p.string());
    record(name, deterministic);
  }

  void record(const std::string& name, bool deterministic = true) {
    outputs_.push_back({{"file", name},
                        {"fnv1a64", fnv1a64(path(name))},
                        {"deterministic", deterministic}});
  }

  void finish() {
    json manifest = {{"tool", "lsmi"},
                     {"version", lsmi_version()},
                     {"command", command_},
                     {"argv", argv_},
                     {"cwd", fs::current_path().string()},
                     {"config", config_},
                     {"seeds", seeds_},
                     {"inputs", inputs_},
                     {"outputs", outputs_},
                     {"timings_seconds", timings_}};
    std::ofstream file(path("run_manifest.json"));
    file << manifest.dump(2) << '\n';
    if (!file) fail_input("cannot write run manifest");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  fs::path out_;
  json config_ = json::object();
  json seeds_ = json::object();
  json inputs_ = json::array();
  json outputs_ = json::array();
  json timings_ = json::object();
};

// "key: value" lines.
class Record {
 public:
  void add(const std::string& key, const std::string& value) {
    text_ += key + ": " + value + "\n";
  }
  void add(const std::string& key, double value) { add(key, num(value)); }
  void add(const std::string& key, std::int64_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

struct EstimatorFlags {
  std::int64_t b = 200;
  double epsilon = 0.3;
  std::optional<double> lambda;
  std::optional<double> beta;
  std::int64_t max_outer_iters = 20;
  double eta = 1e-9;
  std::int64_t sinkhorn_iters = 1000;
  double sinkhorn_tol = 1e-12;
  bool cv = false;
  double holdout = 0.5;

  void attach(CLI::App* cmd) {
    cmd->add_option("--b", b, "Number of basis functions")->capture_default_str();
    cmd->add_option("--epsilon", epsilon, "Entropic regularisation")->capture_default_str();
    cmd->add_option("--lambda", lambda, "Ridge parameter (skips its CV grid)");
    cmd->add_option("--beta", beta, "Paired/unpaired mixing weight (skips its CV grid)");
    cmd->add_option("--max-iters", max_outer_iters, "Outer iteration cap")->capture_default_str();
    cmd->add_option("--eta", eta, "Plan change tolerance")->capture_default_str();
    cmd->add_option("--sinkhorn-iters", sinkhorn_iters, "Inner iteration cap")->capture_default_str();
    cmd->add_option("--sinkhorn-tol", sinkhorn_tol, "Marginal tolerance")->capture_default_str();
    cmd->add_flag("--cv", cv, "Force cross-validation over the unset hyperparameters");
    cmd->add_option("--holdout", holdout, "Hold-out fraction for CV")->capture_default_str();
  }

  bool wants_cv() const { return cv || !lambda || !beta; }

  lsmi_config config(std::uint64_t seed) const {
    lsmi_config c;
    lsmi_config_default(&c);
    c.b = b;
    c.epsilon = epsilon;
    if (lambda) c.lambda = *lambda;
    if (beta) c.beta = *beta;
    c.max_outer_iters = max_outer_iters;
    c.eta = eta;
    c.seed = seed;
    c.sinkhorn_max_iters = sinkhorn_iters;
    c.sinkhorn_tol = sinkhorn_tol;
    return c;
  }
};

json config_json(const lsmi_config& c) {
  return {{"b", c.b},
          {"epsilon", c.epsilon},
          {"lambda", c.lambda},
          {"beta", c.beta},
          {"max_outer_iters", c.max_outer_iters},
          {"eta", c.eta},
          {"seed", c.seed},
          {"sinkhorn_max_iters", c.sinkhorn_max_iters},
          {"sinkhorn_tol", c.sinkhorn_tol}};
}

struct DataFlags {
  std::string synthetic;
  std::string paired;
  std::string x;
  std::string y;
  std::string table;
  std::int64_t dx = 0;
  std::int64_t n = 50;
  std::int64_t nx = 500;
  std::int64_t ny = 500;
  std::int64_t dim = 0;
  double noise = -1.0;
  bool shared = false;

  void attach_synthetic(CLI::App* cmd) {
    cmd->add_option("--synthetic", synthetic, "Generator: random, linear, nonlinear, pca");
    cmd->add_option("--n", n, "Paired sample count")->capture_default_str();
    cmd->add_option("--nx", nx, "Unpaired x count")->capture_default_str();
    cmd->add_option("--ny", ny, "Unpaired y count")->capture_default_str();
    cmd->add_option("--dim", dim, "Input dimension (0: generator default)");
    cmd->add_option("--noise", noise, "Noise standard deviation (negative: default)");
    cmd->add_flag("--shared-unpaired", shared, "Draw both pools from the same joint draws");
  }

  void attach_files(CLI::App* cmd) {
    cmd->add_option("--paired", paired, "Paired table; first --dx columns are x");
    cmd->add_option("--x", x, "x table (unpaired pool with --paired, else row-aligned with --y)");
    cmd->add_option("--y", y, "y table");
    cmd->add_option("--table", table, "Joint table split into x/y by correlation");
    cmd->add_option("--dx", dx, "Number of x columns for --paired or --table");
  }

  lsmi_synthetic_spec spec(std::uint64_t seed) const {
    lsmi_synthetic_spec s;
    lsmi_synthetic_default(&s);
    s.kind = synthetic.c_str();
    s.n = n;
    s.n_x = nx;
    s.n_y = ny;
    s.dim = dim;
    s.noise_sd = noise;
    s.seed = seed;
    s.shared_unpaired_draws = shared ? 1 : 0;
    return s;
  }
};

Handle<lsmi_table> read_table(Run& run, const std::string& path) {
  lsmi_table* t = nullptr;
  check(lsmi_table_read(path.c_str(), &t));
  run.input(path);
  return own(t);
}

Handle<lsmi_dataset> load_dataset(Run& run, const DataFlags& f, std::uint64_t seed) {
  lsmi_dataset* ds = nullptr;
  if (!f.synthetic.empty()) {
    const lsmi_synthetic_spec spec = f.spec(seed);
    check(lsmi_dataset_generate(&spec, &ds));
    run.config()["data"] = {{"synthetic", f.synthetic}, {"n", f.n}, {"n_x", f.nx},
                            {"n_y", f.ny}, {"dim", f.dim}, {"noise_sd", f.noise},
                            {"shared_unpaired", f.shared}};
    run.seeds()["data"] = seed;
    return own(ds);
  }
  if (!f.paired.empty()) {
    const Dense joint = fetch(read_table(run, f.paired).get());
    if (f.dx < 1 || f.dx >= joint.cols) fail_input("--dx must lie in [1, columns of --paired)");
    auto px = make_table(column_block(joint, 0, f.dx));
    auto py = make_table(column_block(joint, f.dx, joint.cols - f.dx));
    if (f.x.empty() != f.y.empty()) fail_input("give both --x and --y or neither");
    if (!f.x.empty()) {
      auto ux = read_table(run, f.x);
      auto uy = read_table(run, f.y);
      check(lsmi_dataset_from_tables(px.get(), py.get(), ux.get(), uy.get(), &ds));
    } else {
      check(lsmi_dataset_from_tables(px.get(), py.get(), nullptr, nullptr, &ds));
    }
    run.config()["data"] = {{"paired", f.paired}, {"dx", f.dx}, {"x", f.x}, {"y", f.y}};
    return own(ds);
  }

  Handle<lsmi_table> x = own(static_cast<lsmi_table*>(nullptr));
  Handle<lsmi_table> y = own(static_cast<lsmi_table*>(nullptr));
  if (!f.table.empty()) {
    auto joint = read_table(run, f.table);
    std::int64_t cols = 0;
    check(lsmi_table_shape(joint.get(), nullptr, &cols));
    lsmi_table* tx = nullptr;
    lsmi_table* ty = nullptr;
    std::size_t warnings = 0;
    check(lsmi_split_features(joint.get(), f.dx, &tx, &ty, nullptr, nullptr, 0, &warnings));
    x = own(tx);
    y = own(ty);
    if (warnings > 0) {
      std::cerr << "lsmi: warning: " << warnings
                << " constant column(s) treated as uncorrelated\n";
    }
  } else if (!f.x.empty() && !f.y.empty()) {
    x = read_table(run, f.x);
    y = read_table(run, f.y);
  } else {
    fail_input("no input: give --synthetic, --paired, --table, or --x with --y");
  }
  check(lsmi_dataset_semi_supervised(x.get(), y.get(), f.n, f.nx, f.ny, seed, &ds));
  run.config()["data"] = {{"table", f.table}, {"x", f.x}, {"y", f.y}, {"dx", f.dx},
                          {"n", f.n}, {"n_x", f.nx}, {"n_y", f.ny}};
  run.seeds()["split"] = seed;
  return own(ds);
}

struct Counts {
  std::int64_t n = 0, n_x = 0, n_y = 0, dim_x = 0, dim_y = 0;
};

Counts counts_of(const lsmi_dataset* ds) {
  Counts c;
  check(lsmi_dataset_counts(ds, &c.n, &c.n_x, &c.n_y, &c.dim_x, &c.dim_y));
  return c;
}

struct Selection {
  lsmi_config config;
  bool ran_cv = false;
  double cv_score = 0.0;
  std::string scores_csv;
};

// Cross-validates the hyperparameters not fixed by flags.
Selection select_hyperparameters(Run& run, const lsmi_dataset* ds,
                                 const EstimatorFlags& flags, std::uint64_t seed) {
  Selection sel{flags.config(seed), false, 0.0, {}};
  if (!flags.wants_cv()) return sel;
  const Counts c = counts_of(ds);
  std::vector<double> lambdas, betas;
  if (flags.lambda) lambdas = {*flags.lambda};
  if (flags.beta) betas = {*flags.beta};
  if (c.n_x == 0) betas = {1.0};

  lsmi_cv_report* raw = nullptr;
  const auto start = Clock::now();
  check(lsmi_cross_validate(ds, &sel.config, lambdas.empty() ? nullptr : lambdas.data(),
                            lambdas.size(), betas.empty() ? nullptr : betas.data(),
                            betas.size(), flags.holdout, seed, &raw));
  auto report = own(raw);
  run.time("cross_validation", seconds_since(start));
  run.seeds()["cv_split"] = seed;
  check(lsmi_cv_best(report.get(), &sel.config.lambda, &sel.config.beta, &sel.cv_score));
  std::size_t count = 0;
  lsmi_cv_scores(report.get(), nullptr, 0, &count);
  std::vector<lsmi_cv_score> scores(count);
  check(lsmi_cv_scores(report.get(), scores.data(), scores.size(), &count));
  sel.scores_csv = "lambda,beta,holdout_error\n";
  for (const auto& s : scores) {
    sel.scores_csv += num(s.lambda) + "," + num(s.beta) + "," + num(s.score) + "\n";
  }
  sel.ran_cv = true;
  return sel;
}

struct Fitted {
  Handle<lsmi_fit> fit = own(static_cast<lsmi_fit*>(nullptr));
  lsmi_fit_summary summary{};
  std::vector<double> trace;
};

Fitted run_fit(Run& run, const lsmi_dataset* ds, const lsmi_config& config) {
  Fitted f;
  lsmi_fit* raw = nullptr;
  const auto start = Clock::now();
  check(lsmi_fit_run(ds, &config, &raw));
  run.time("fit", seconds_since(start));
  f.fit = own(raw);
  check(lsmi_fit_get_summary(f.fit.get(), &f.summary));
  std::size_t count = 0;
  lsmi_fit_trace(f.fit.get(), nullptr, 0, &count);
  f.trace.resize(count);
  check(lsmi_fit_trace(f.fit.get(), f.trace.data(), f.trace.size(), &count));
  run.seeds()["basis"] = config.seed;
  run.config()["estimator"] = config_json(config);
  return f;
}

std::string plan_csv(const Fitted& f) {
  const auto rows = f.summary.plan_rows;
  const auto cols = f.summary.plan_cols;
  std::vector<double> pi(static_cast<std::size_t>(rows * cols));
  check(lsmi_fit_plan(f.fit.get(), pi.data(), pi.size()));
  std::string out;
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      if (c) out += ',';
      out += num(pi[r * cols + c]);
    }
    out += '\n';
  }
  return out;
}

void add_fit_fields(Record& rec, const Fitted& f, const Selection& sel) {
  rec.add("lambda", sel.config.lambda);
  rec.add("beta", sel.config.beta);
  rec.add("cross_validated", sel.ran_cv);
  if (sel.ran_cv) rec.add("cv_holdout_error", sel.cv_score);
  rec.add("iterations", f.summary.iterations_run);
  rec.add("converged", f.summary.converged != 0);
  rec.add("sinkhorn_warnings", f.summary.sinkhorn_warnings);
  rec.add("max_marginal_violation", f.summary.max_marginal_violation);
  std::string trace;
  for (std::size_t i = 0; i < f.trace.size(); ++i) {
    if (i) trace += ' ';
    trace += num(f.trace[i]);
  }
  rec.add("objective_trace", trace);
}

void emit(Run& run, const Record& rec, bool deterministic = true) {
  run.write("result.txt", rec.text(), deterministic);
  std::cout << rec.text();
}

// ---- estimate -------------------------------------------------------------

struct EstimateOptions {
  DataFlags data;
  EstimatorFlags est;
  std::uint64_t seed = 0;
  std::string out = "lsmi_out";
  bool save_plan = false;
};

int cmd_estimate(const EstimateOptions& o, const std::vector<std::string>& argv) {
  Run run("estimate", argv, o.out);
  run.seeds()["seed"] = o.seed;
  auto ds = load_dataset(run, o.data, o.seed);
  const Counts c = counts_of(ds.get());
  const Selection sel = select_hyperparameters(run, ds.get(), o.est, o.seed);
  const Fitted f = run_fit(run, ds.get(), sel.config);

  double smi = 0.0;
  check(lsmi_fit_smi(f.fit.get(), ds.get(), &smi));
  double smi_paired = 0.0;
  const bool paired_form = c.n > 0 || sel.config.beta == 0.0;
  if (paired_form) {
    check(lsmi_fit_smi_paired(f.fit.get(), ds.get(), sel.config.beta, &smi_paired));
  }

  Record rec;
  rec.add("command", std::string("estimate"));
  rec.add("smi", smi);
  if (paired_form) rec.add("smi_plan_weighted", smi_paired);
  rec.add("n", c.n);
  rec.add("n_x", c.n_x);
  rec.add("n_y", c.n_y);
  rec.add("dim_x", c.dim_x);
  rec.add("dim_y", c.dim_y);
  rec.add("basis_size", f.summary.basis_size);
  add_fit_fields(rec, f, sel);
  if (sel.ran_cv) run.write("cv_scores.csv", sel.scores_csv);
  if (o.save_plan) run.write("plan.csv", plan_csv(f));
  emit(run, rec);
  run.finish();
  return kExitOk;
}

// ---- match ----------------------------------------------------------------

struct MatchOptions {
  std::string x;
  std::string y;
  std::string pairs;
  std::string truth;
  std::string x_labels;
  std::string y_labels;
  std::string method = "optimal";
  EstimatorFlags est;
  std::uint64_t seed = 0;
  std::string out = "lsmi_out";
  bool save_plan = false;
};

std::vector<std::int64_t> source_rows(const lsmi_dataset* ds, lsmi_part part) {
  std::size_t count = 0;
  lsmi_dataset_source_rows(ds, part, nullptr, 0, &count);
  std::vector<std::int64_t> rows(count);
  check(lsmi_dataset_source_rows(ds, part, rows.data(), rows.size(), &count));
  return rows;
}

std::vector<std::int64_t> read_pairs(Run& run, const std::string& path) {
  std::size_t count = 0;
  lsmi_index_pairs_read(path.c_str(), nullptr, 0, &count);
  std::vector<std::int64_t> pairs(2 * count);
  check(lsmi_index_pairs_read(path.c_str(), pairs.data(), count, &count));
  run.input(path);
  return pairs;
}

std::vector<double> read_labels(Run& run, const std::string& path, std::int64_t rows) {
  const Dense d = fetch(read_table(run, path).get());
  if (d.cols != 1 || d.rows != rows) {
    fail_input("label file " + path + " must hold one column with one row per sample");
  }
  return d.values;
}

int cmd_match(const MatchOptions& o, const std::vector<std::string>& argv) {
  Run run("match", argv, o.out);
  run.seeds()["seed"] = o.seed;
  if (o.method != "optimal" && o.method != "greedy") fail_input("--method must be optimal or greedy");
  auto x = read_table(run, o.x);
  auto y = read_table(run, o.y);
  const auto given = read_pairs(run, o.pairs);
  lsmi_dataset* raw = nullptr;
  check(lsmi_dataset_from_pairs(x.get(), y.get(), given.data(), given.size() / 2, &raw));
  auto ds = own(raw);
  run.config()["data"] = {{"x", o.x}, {"y", o.y}, {"paired", o.pairs}};

  const Selection sel = select_hyperparameters(run, ds.get(), o.est, o.seed);
  const Fitted f = run_fit(run, ds.get(), sel.config);
  const auto x_rows = source_rows(ds.get(), LSMI_UNPAIRED_X);
  const auto y_rows = source_rows(ds.get(), LSMI_UNPAIRED_Y);

  const auto method = o.method == "greedy" ? LSMI_ASSIGN_GREEDY : LSMI_ASSIGN_OPTIMAL;
  std::size_t count = 0;
  lsmi_fit_assign(f.fit.get(), method, nullptr, 0, &count);
  std::vector<std::int64_t> assigned(2 * count);
  check(lsmi_fit_assign(f.fit.get(), method, assigned.data(), count, &count));
  std::string csv = "x_row,y_row\n";
  for (std::size_t k = 0; k < count; ++k) {
    csv += std::to_string(x_rows[assigned[2 * k]]) + "," +
           std::to_string(y_rows[assigned[2 * k + 1]]) + "\n";
  }
  run.write("assignment.csv", csv);

  Record rec;
  rec.add("command", std::string("match"));
  rec.add("n", static_cast<std::int64_t>(given.size() / 2));
  rec.add("n_x", static_cast<std::int64_t>(x_rows.size()));
  rec.add("n_y", static_cast<std::int64_t>(y_rows.size()));
  rec.add("method", o.method);
  rec.add("assigned_pairs", static_cast<std::int64_t>(count));
  add_fit_fields(rec, f, sel);

  if (!o.truth.empty()) {
    // Truth is given in source rows; keep the pairs whose rows are unpaired.
    std::map<std::int64_t, std::int64_t> x_pos, y_pos;
    for (std::size_t i = 0; i < x_rows.size(); ++i) x_pos[x_rows[i]] = static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < y_rows.size(); ++j) y_pos[y_rows[j]] = static_cast<std::int64_t>(j);
    const auto truth = read_pairs(run, o.truth);
    std::vector<std::int64_t> mapped;
    for (std::size_t k = 0; k + 1 < truth.size(); k += 2) {
      const auto xi = x_pos.find(truth[k]);
      const auto yj = y_pos.find(truth[k + 1]);
      if (xi == x_pos.end() || yj == y_pos.end()) continue;
      mapped.push_back(xi->second);
      mapped.push_back(yj->second);
    }
    const std::size_t usable = mapped.size() / 2;
    rec.add("truth_pairs", static_cast<std::int64_t>(usable));
    if (usable > 0) {
      double top1 = 0.0, top2 = 0.0;
      check(lsmi_fit_topk(f.fit.get(), mapped.data(), usable, 1, &top1));
      check(lsmi_fit_topk(f.fit.get(), mapped.data(), usable, 2, &top2));
      rec.add("top1_accuracy", top1);
      rec.add("top2_accuracy", top2);
    }
  }
  if (!o.x_labels.empty() || !o.y_labels.empty()) {
    if (o.x_labels.empty() || o.y_labels.empty()) fail_input("give both --x-labels and --y-labels");
    std::int64_t nx = 0, ny = 0;
    check(lsmi_table_shape(x.get(), &nx, nullptr));
    check(lsmi_table_shape(y.get(), &ny, nullptr));
    const auto lx = read_labels(run, o.x_labels, nx);
    const auto ly = read_labels(run, o.y_labels, ny);
    std::size_t same = 0;
    for (std::size_t k = 0; k < count; ++k) {
      if (lx[x_rows[assigned[2 * k]]] == ly[y_rows[assigned[2 * k + 1]]]) ++same;
    }
    rec.add("class_accuracy", count ? static_cast<double>(same) / static_cast<double>(count) : 0.0);
  }
  if (o.save_plan) run.write("plan.csv", plan_csv(f));
  emit(run, rec);
  run.finish();
  return kExitOk;
}

// ---- summarize ------------------------------------------------------------

struct SummarizeOptions {
  std::string features;
  std::string grid;
  std::string grid_file;
  std::string anchors;
  EstimatorFlags est;
  std::uint64_t seed = 0;
  std::string out = "lsmi_out";
};

Handle<lsmi_table> load_positions(Run& run, const SummarizeOptions& o) {
  lsmi_table* t = nullptr;
  if (!o.grid.empty()) {
    long long rows = 0, cols = 0;
    char tail = 0;
    if (std::sscanf(o.grid.c_str(), "%lldx%lld%c", &rows, &cols, &tail) != 2) {
      fail_input("--grid expects RxC, e.g. 16x20");
    }
    check(lsmi_grid_positions(rows, cols, &t));
    return own(t);
  }
  if (o.grid_file.empty()) fail_input("give --grid RxC or --grid-file FILE");
  run.input(o.grid_file);
  // A two-column numeric table is a coordinate list; anything else is a mask.
  if (lsmi_table_read(o.grid_file.c_str(), &t) == LSMI_OK) {
    auto coords = own(t);
    std::int64_t cols = 0;
    check(lsmi_table_shape(coords.get(), nullptr, &cols));
    if (cols == 2) return coords;
  }
  std::ifstream in(o.grid_file, std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();
  check(lsmi_mask_positions(text.str().c_str(), &t));
  return own(t);
}

int cmd_summarize(const SummarizeOptions& o, const std::vector<std::string>& argv) {
  Run run("summarize", argv, o.out);
  run.seeds()["seed"] = o.seed;
  auto features = read_table(run, o.features);
  auto positions = load_positions(run, o);
  std::vector<std::int64_t> anchors;
  if (!o.anchors.empty()) anchors = read_pairs(run, o.anchors);
  const std::size_t n_anchors = anchors.size() / 2;
  run.config()["data"] = {{"features", o.features}, {"grid", o.grid},
                          {"grid_file", o.grid_file}, {"anchors", o.anchors}};

  // Without --cv the flag values (or defaults) are used directly.
  EstimatorFlags est = o.est;
  if (!est.cv) {
    if (!est.lambda) est.lambda = est.config(o.seed).lambda;
    if (!est.beta) est.beta = est.config(o.seed).beta;
  }
  Selection sel{est.config(o.seed), false, 0.0, {}};
  if (est.cv) {
    lsmi_dataset* raw = nullptr;
    check(lsmi_summarize_dataset(features.get(), positions.get(), anchors.data(),
                                 n_anchors, &raw));
    auto ds = own(raw);
    sel = select_hyperparameters(run, ds.get(), est, o.seed);
  }
  if (n_anchors == 0) sel.config.beta = 0.0;

  lsmi_layout* raw_layout = nullptr;
  const auto start = Clock::now();
  check(lsmi_summarize(features.get(), positions.get(), anchors.data(), n_anchors,
                       &sel.config, &raw_layout));
  run.time("summarize", seconds_since(start));
  auto layout = own(raw_layout);
  run.config()["estimator"] = config_json(sel.config);
  run.seeds()["basis"] = sel.config.seed;

  std::size_t placed = 0, unplaced = 0, empty = 0;
  check(lsmi_layout_counts(layout.get(), &placed, &unplaced, &empty));
  std::vector<std::int64_t> pairs(2 * placed), left(unplaced), holes(empty);
  check(lsmi_layout_placements(layout.get(), pairs.data(), placed));
  check(lsmi_layout_unplaced(layout.get(), left.data(), unplaced));
  check(lsmi_layout_empty(layout.get(), holes.data(), empty));
  const Dense coords = fetch(positions.get());

  std::string csv = "position,row,col,item\n";
  for (std::size_t k = 0; k < placed; ++k) {
    const auto pos = pairs[2 * k + 1];
    csv += std::to_string(pos) + "," + num(coords.at(pos, 0)) + "," +
           num(coords.at(pos, 1)) + "," + std::to_string(pairs[2 * k]) + "\n";
  }
  run.write("placements.csv", csv);
  std::string rest = "item\n";
  for (auto item : left) rest += std::to_string(item) + "\n";
  run.write("unplaced.csv", rest);

  Record rec;
  rec.add("command", std::string("summarize"));
  rec.add("positions", coords.rows);
  rec.add("anchors", static_cast<std::int64_t>(n_anchors));
  rec.add("placed", static_cast<std::int64_t>(placed));
  rec.add("unplaced_items", static_cast<std::int64_t>(unplaced));
  rec.add("empty_positions", static_cast<std::int64_t>(empty));
  rec.add("lambda", sel.config.lambda);
  rec.add("beta", sel.config.beta);
  rec.add("cross_validated", sel.ran_cv);
  if (sel.ran_cv) run.write("cv_scores.csv", sel.scores_csv);
  emit(run, rec);
  run.finish();
  return kExitOk;
}

// ---- generate -------------------------------------------------------------

struct GenerateOptions {
  DataFlags data;
  std::uint64_t seed = 0;
  std::string out = "lsmi_out";
};

int cmd_generate(const GenerateOptions& o, const std::vector<std::string>& argv) {
  Run run("generate", argv, o.out);
  run.seeds()["seed"] = o.seed;
  if (o.data.synthetic.empty()) fail_input("--synthetic is required");
  auto ds = load_dataset(run, o.data, o.seed);
  const std::pair<lsmi_part, const char*> parts[] = {
      {LSMI_PAIRED_X, "paired_x.csv"},
      {LSMI_PAIRED_Y, "paired_y.csv"},
      {LSMI_UNPAIRED_X, "unpaired_x.csv"},
      {LSMI_UNPAIRED_Y, "unpaired_y.csv"}};
  for (const auto& [part, name] : parts) {
    lsmi_table* t = nullptr;
    check(lsmi_dataset_part(ds.get(), part, &t));
    auto table = own(t);
    check(lsmi_table_write(table.get(), run.path(name).string().c_str()));
    run.record(name);
  }
  const Counts c = counts_of(ds.get());
  Record rec;
  rec.add("command", std::string("generate"));
  rec.add("kind", o.data.synthetic);
  rec.add("n", c.n);
  rec.add("n_x", c.n_x);
  rec.add("n_y", c.n_y);
  rec.add("dim_x", c.dim_x);
  rec.add("dim_y", c.dim_y);
  emit(run, rec);
  run.finish();
  return kExitOk;
}

// ---- benchmark ------------------------------------------------------------

struct BenchmarkOptions {
  std::string synthetic = "linear";
  std::vector<std::int64_t> sizes{100, 200, 400, 800};
  std::int64_t n = 50;
  std::int64_t repeats = 3;
  EstimatorFlags est;
  std::uint64_t seed = 0;
  std::string out = "lsmi_out";
};

// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

int cmd_benchmark(const BenchmarkOptions& o, const std::vector<std::string>& argv) {
  Run run("benchmark", argv, o.out);
  run.seeds()["seed"] = o.seed;
  if (o.sizes.empty()) fail_input("--sizes is empty");
  if (o.repeats < 1) fail_input("--repeats must be at least 1");
  EstimatorFlags est = o.est;
  lsmi_config config = est.config(o.seed);
  run.config()["estimator"] = config_json(config);
  run.config()["benchmark"] = {{"synthetic", o.synthetic}, {"sizes", o.sizes},
                               {"n", o.n}, {"repeats", o.repeats}};

  std::string csv =
      "n_x,n_y,n,b,iterations,setup_seconds,alpha_seconds,cost_seconds,"
      "sinkhorn_seconds,h_seconds,per_iteration_seconds,fit_seconds\n";
  std::vector<double> xs, per_iter, totals;
  for (const auto size : o.sizes) {
    if (size < 2) fail_input("benchmark sizes must be at least 2");
    DataFlags data;
    data.synthetic = o.synthetic;
    data.n = o.n;
    data.nx = data.ny = size;
    const lsmi_synthetic_spec spec = data.spec(o.seed);
    lsmi_dataset* raw = nullptr;
    check(lsmi_dataset_generate(&spec, &raw));
    auto ds = own(raw);

    // Fastest of the repeats; the fits are identical so only timing varies.
    double best = INFINITY, best_fit = INFINITY;
    lsmi_fit_summary summary{};
    lsmi_timing phase{};
    for (std::int64_t r = 0; r < o.repeats; ++r) {
      lsmi_fit* f_raw = nullptr;
      const auto start = Clock::now();
      check(lsmi_fit_run(ds.get(), &config, &f_raw));
      const double fit_seconds = seconds_since(start);
      auto f = own(f_raw);
      check(lsmi_fit_get_summary(f.get(), &summary));
      std::size_t count = 0;
      lsmi_fit_timings(f.get(), nullptr, 0, &count);
      std::vector<lsmi_timing> timings(count);
      check(lsmi_fit_timings(f.get(), timings.data(), count, &count));
      lsmi_timing sum{};
      for (const auto& t : timings) {
        sum.alpha_seconds += t.alpha_seconds;
        sum.cost_seconds += t.cost_seconds;
        sum.sinkhorn_seconds += t.sinkhorn_seconds;
        sum.h_seconds += t.h_seconds;
        sum.sinkhorn_iterations += t.sinkhorn_iterations;
      }
      // The per-iteration phase is everything in an outer step that touches
      // the n_x x n_y plan; the b x b solve does not depend on the sizes.
      const double per =
          (sum.cost_seconds + sum.sinkhorn_seconds + sum.h_seconds) /
          static_cast<double>(std::max<std::size_t>(count, 1));
      if (per < best) {
        best = per;
        phase = sum;
      }
      best_fit = std::min(best_fit, fit_seconds);
    }
    xs.push_back(static_cast<double>(size));
    per_iter.push_back(best);
    totals.push_back(best_fit);
    csv += std::to_string(size) + "," + std::to_string(size) + "," + std::to_string(o.n) +
           "," + std::to_string(config.b) + "," + std::to_string(summary.iterations_run) +
           "," + num(summary.setup_seconds) + "," + num(phase.alpha_seconds) + "," +
           num(phase.cost_seconds) + "," + num(phase.sinkhorn_seconds) + "," +
           num(phase.h_seconds) + "," + num(best) + "," + num(best_fit) + "\n";
  }
  run.write("benchmark.csv", csv, false);

  Record rec;
  rec.add("command", std::string("benchmark"));
  rec.add("sizes", static_cast<std::int64_t>(o.sizes.size()));
  if (xs.size() >= 2) {
    rec.add("slope_per_iteration", loglog_slope(xs, per_iter));
    rec.add("slope_fit", loglog_slope(xs, totals));
  }
  emit(run, rec, false);
  run.finish();
  return kExitOk;
}

// ---- replay ---------------------------------------------------------------

int run_cli(const std::vector<std::string>& args);

int cmd_replay(const std::string& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) fail_input("cannot open " + manifest_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    fail_input(std::string("invalid manifest: ") + e.what());
  }
  if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
    fail_input("manifest has no argv");
  }
  auto argv = manifest["argv"].get<std::vector<std::string>>();
  if (!argv.empty() && argv.front() == "replay") fail_input("cannot replay a replay");

  // Point the rerun at a fresh directory.
  const fs::path target = out.empty() ? fs::path(manifest_path).parent_path() / "replay"
                                      : fs::path(out);
  bool replaced = false;
  for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
    if (argv[i] == "--out") {
      argv[i + 1] = target.string();
      replaced = true;
    }
  }
  if (!replaced) {
    argv.push_back("--out");
    argv.push_back(target.string());
  }
  const int code = run_cli(argv);
  if (code != kExitOk) return code;

  std::ifstream again(target / "run_manifest.json");
  json fresh;
  again >> fresh;
  std::map<std::string, std::string> now;
  for (const auto& o : fresh["outputs"]) now[o["file"]] = o["fnv1a64"];
  std::size_t compared = 0, differing = 0;
  for (const auto& o : manifest["outputs"]) {
    if (!o.value("deterministic", true)) continue;
    ++compared;
    const std::string file = o["file"];
    if (now[file] != o["fnv1a64"].get<std::string>()) {
      ++differing;
      std::cerr << "lsmi: replay: " << file << " differs\n";
    }
  }
  std::cout << "replay_compared: " << compared << "\nreplay_differing: " << differing
            << "\nreplay_identical: " << (differing == 0 ? "true" : "false") << "\n";
  return differing == 0 ? kExitOk : kExitFailure;
}

// ---- dispatch -------------------------------------------------------------

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Semi-supervised squared-loss mutual information estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lsmi_version());

  EstimateOptions est;
  auto* c_est = app.add_subcommand("estimate", "Estimate SMI, cross-validating unset hyperparameters");
  est.data.attach_synthetic(c_est);
  est.data.attach_files(c_est);
  est.est.attach(c_est);
  c_est->add_option("--seed", est.seed, "Seed for every random choice");
  c_est->add_option("--out", est.out, "Output directory")->capture_default_str();
  c_est->add_flag("--save-plan", est.save_plan, "Write the plan as dense CSV");

  MatchOptions mat;
  auto* c_mat = app.add_subcommand("match", "Match unpaired rows of two feature tables");
  c_mat->add_option("--x", mat.x, "x feature table")->required();
  c_mat->add_option("--y", mat.y, "y feature table")->required();
  c_mat->add_option("--paired", mat.pairs, "Known (x_row, y_row) pairs")->required();
  c_mat->add_option("--truth", mat.truth, "True (x_row, y_row) pairs for accuracy");
  c_mat->add_option("--x-labels", mat.x_labels, "Class label per x row");
  c_mat->add_option("--y-labels", mat.y_labels, "Class label per y row");
  c_mat->add_option("--method", mat.method, "optimal or greedy")->capture_default_str();
  mat.est.attach(c_mat);
  c_mat->add_option("--seed", mat.seed, "Seed for every random choice");
  c_mat->add_option("--out", mat.out, "Output directory")->capture_default_str();
  c_mat->add_flag("--save-plan", mat.save_plan, "Write the plan as dense CSV");

  SummarizeOptions sum;
  auto* c_sum = app.add_subcommand("summarize", "Lay items out on a grid");
  c_sum->add_option("--x,--features", sum.features, "Item feature table")->required();
  c_sum->add_option("--grid", sum.grid, "Grid size RxC");
  c_sum->add_option("--grid-file", sum.grid_file, "Coordinate table or text mask");
  c_sum->add_option("--anchors", sum.anchors, "Fixed (item, position) pairs");
  sum.est.attach(c_sum);
  c_sum->add_option("--seed", sum.seed, "Seed for every random choice");
  c_sum->add_option("--out", sum.out, "Output directory")->capture_default_str();

  GenerateOptions gen;
  auto* c_gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen.data.attach_synthetic(c_gen);
  c_gen->add_option("--seed", gen.seed, "Seed for every random choice");
  c_gen->add_option("--out", gen.out, "Output directory")->capture_default_str();

  BenchmarkOptions bench;
  auto* c_bench = app.add_subcommand("benchmark", "Time fits over a size sweep");
  c_bench->add_option("--synthetic", bench.synthetic, "Generator")->capture_default_str();
  c_bench->add_option("--sizes", bench.sizes, "n_x = n_y values")->delimiter(',')->capture_default_str();
  c_bench->add_option("--n", bench.n, "Paired sample count")->capture_default_str();
  c_bench->add_option("--repeats", bench.repeats, "Fits per size; the fastest is kept")->capture_default_str();
  bench.est.attach(c_bench);
  c_bench->add_option("--seed", bench.seed, "Seed for every random choice");
  c_bench->add_option("--out", bench.out, "Output directory")->capture_default_str();

  std::string manifest;
  std::string replay_out;
  auto* c_replay = app.add_subcommand("replay", "Rerun a recorded command and compare outputs");
  c_replay->add_option("manifest", manifest, "run_manifest.json of an earlier run")->required();
  c_replay->add_option("--out", replay_out, "Output directory for the rerun");

  std::vector<std::string> storage{"lsmi"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> raw;
  for (auto& s : storage) raw.push_back(s.data());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*c_est) return cmd_estimate(est, args);
    if (*c_mat) return cmd_match(mat, args);
    if (*c_sum) return cmd_summarize(sum, args);
    if (*c_gen) return cmd_generate(gen, args);
    if (*c_bench) return cmd_benchmark(bench, args);
    if (*c_replay) return cmd_replay(manifest, replay_out);
  } catch (const Failure& f) {
    std::cerr << "lsmi: error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "lsmi: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
