#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kuraduel/dynamics.hpp"
#include "kuraduel/graph.hpp"

namespace kuraduel {

inline constexpr std::string_view tool_version = "0.1.0";

// ---------------------------------------------------------------------------
// Experiment config: `[section]` headers and `key = value` lines, '#' comments.
// The grammar is documented in docs/config-format.md.

/// Either a uniform range `lo:hi:count` or an explicit list.
struct Grid {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;      // > 0 for the range form
  std::vector<double> list;   // explicit form
  std::vector<double> points() const;
  bool operator==(const Grid&) const = default;
};

/// `lo:hi:count` or comma-separated values; numbers may carry a `pi` suffix.
Grid parse_grid(std::string_view text);
std::string print_grid(const Grid& g);

struct NetworkSpec {
  std::string generator = "tree";  // tree | erdos_renyi | edge_list | edges
  int branching = 4;
  int depth = 2;
  std::size_t nodes = 21;
  double p = 0.4;
  std::uint64_t seed = 1;
  bool connected = true;
  std::string file;                // edge_list: path relative to the config file
  std::vector<Edge> edges;         // edges: inline list
  bool operator==(const NetworkSpec&) const = default;
};

struct CrossSpec {
  std::string kind = "leaf_matching";  // leaf_matching | links
  bool symmetric = true;
  std::vector<Edge> br;  // (blue, red) pairs: Red acts on that Blue node
  std::vector<Edge> rb;  // (red, blue) pairs; ignored when symmetric
  bool operator==(const CrossSpec&) const = default;
};

struct FrequencySpec {
  std::string mode = "uniform";  // uniform | explicit
  std::uint64_t seed = 1;
  double low = 0.0, high = 1.0;
  std::vector<double> omega, nu;
  bool operator==(const FrequencySpec&) const = default;
};

struct IntegrationSpec {
  double t_end = 2000.0;
  double dt = 0.01;
  int sample_every = 100;
  std::string initial = "zeros";  // zeros | random
  std::uint64_t initial_seed = 0;
  bool operator==(const IntegrationSpec&) const = default;
};

struct AnalysisSpec {
  bool two_cluster = true;
  bool three_cluster = false;
  double window_fraction = 0.1;
  double slope_tol = 1e-3;
  int wind_tol = 0;
  double locked = 0.99;
  double splay = 0.3;
  bool operator==(const AnalysisSpec&) const = default;
};

struct SweepSpec {
  std::optional<Grid> phi;    // optimize
  std::optional<Grid> alpha;  // spectrum
  std::optional<Grid> zeta;   // fragmentation
  std::vector<double> spot_phi;  // optimize: simulated overlay points
  double zeta_tol = 0.02;        // fragmentation: lock-loss bisection width
  bool operator==(const SweepSpec&) const = default;
};

struct ExperimentConfig {
  double sigma_b = 8.0, sigma_r = 0.5;
  double zeta_br = 0.4, zeta_rb = 0.4;
  double phi = 0.0, psi = 0.0;
  NetworkSpec blue;
  NetworkSpec red = [] {
    NetworkSpec n;
    n.generator = "erdos_renyi";
    return n;
  }();
  CrossSpec cross;
  FrequencySpec frequencies;
  IntegrationSpec integration;
  AnalysisSpec analysis;
  SweepSpec sweep;
  std::string output_dir = "out";
  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError naming the line and key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every field, explicitly; parse_config(print_config(c)) == c.
std::string print_config(const ExperimentConfig& cfg);

/// Generates networks and frequencies. Relative edge-list paths are taken from
/// base_dir. Throws ConfigError for inconsistent specs.
ModelConfig build_model(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {});

/// Copy with realized frequencies inlined and file-based networks turned into
/// inline edge lists, so the result no longer depends on seeds or files.
ExperimentConfig freeze(const ExperimentConfig& cfg, const ModelConfig& model);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

// ---------------------------------------------------------------------------
// Run manifest

class Manifest {
public:
  Manifest() = default;
  explicit Manifest(std::filesystem::path path) : path_(std::move(path)) {}

  nlohmann::json& data() noexcept { return data_; }
  const nlohmann::json& data() const noexcept { return data_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  /// Records the file's checksum under "outputs".
  void add_output(const std::filesystem::path& file);
  void set_status(std::string_view status, std::string_view error = {});
  void write() const;

  static Manifest load(const std::filesystem::path& path);
  /// Throws ChecksumError when the config or any output no longer matches.
  void verify() const;

private:
  std::filesystem::path path_;
  nlohmann::json data_ = nlohmann::json::object();
};

nlohmann::json networks_json(const ModelConfig& model);

// ---------------------------------------------------------------------------
// Worker pool

/// Calls fn(i) for i in [0, count) on up to `jobs` threads (0 = hardware
/// concurrency) and returns results in index order. The first exception (by
/// index) is rethrown after all workers finish.
template <class F>
auto parallel_map(std::size_t count, unsigned jobs, F&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads = std::min<std::size_t>(jobs, count);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out;          // empty: the config's output dir
  unsigned jobs = 0;
  std::optional<std::string> grid;    // overrides the command's sweep grid
  std::optional<std::uint64_t> seed;  // overrides the frequency seed
};

/// Each command writes resolved.cfg and manifest.json (status "incomplete")
/// before any result, then its CSV outputs, then marks the manifest complete.
/// Returns the summary stored in the manifest.
nlohmann::json cmd_simulate(const RunOptions& opt);
nlohmann::json cmd_spectrum(const RunOptions& opt);
nlohmann::json cmd_optimize(const RunOptions& opt);
nlohmann::json cmd_fragmentation(const RunOptions& opt);
/// Verifies the manifest, reruns its command from the stored resolved config
/// into `out` and checks that every output hash matches.
nlohmann::json cmd_rerun(const std::filesystem::path& manifest, const std::filesystem::path& out, unsigned jobs = 0);

/// 0 ok, 2 config or checksum error, 3 numerical error, 4 infeasible or degenerate.
int exit_code_for(const std::exception& e);

int cli_main(int argc, char** argv);

} // namespace kuraduel
