#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "kuraduel/errors.hpp"
#include "kuraduel/expcli.hpp"
#include "kuraduel/fixedpoint.hpp"
#include "kuraduel/format.hpp"

namespace kuraduel {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

// Accepts "x", "xpi", "x*pi", "pi", "-pi".
std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double scale = 1.0;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    scale = pi;
    s.remove_suffix(2);
    if (!s.empty() && s.back() == '*') s.remove_suffix(1);
    if (s.empty() || s == "+") return pi;
    if (s == "-") return -pi;
  }
  auto v = parse_double(s);
  if (!v || !std::isfinite(*v)) return std::nullopt;
  return *v * scale;
}

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

class Reader {
public:
  Reader(Sections& s, std::string section) : sections_(s), section_(std::move(section)) {}

  template <class T, class Fn>
  void get(const char* key, T& target, Fn&& convert) {
    auto sec = sections_.find(section_);
    if (sec == sections_.end()) return;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return;
    it->second.used = true;
    try {
      target = convert(std::string_view(it->second.value));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(it->second.line) + ": [" + section_ + "] " + key + ": " + e.what());
    }
  }

  void number(const char* key, double& t) { get(key, t, to_number); }
  void boolean(const char* key, bool& t) { get(key, t, to_bool); }
  void text(const char* key, std::string& t) { get(key, t, [](std::string_view v) { return std::string(v); }); }
  void list(const char* key, std::vector<double>& t) { get(key, t, to_list); }
  void edges(const char* key, std::vector<Edge>& t) { get(key, t, to_edges); }
  void grid(const char* key, std::optional<Grid>& t) {
    get(key, t, [](std::string_view v) -> std::optional<Grid> {
      if (trim(v).empty()) return std::nullopt;
      return parse_grid(v);
    });
  }
  template <class Int>
  void integer(const char* key, Int& t) {
    get(key, t, [](std::string_view v) {
      Int x{};
      const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
      if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError("expected an integer, got '" + std::string(v) + "'");
      return x;
    });
  }

  static double to_number(std::string_view v) {
    const auto x = parse_number(v);
    if (!x) throw ConfigError("expected a number, got '" + std::string(v) + "'");
    return *x;
  }
  static bool to_bool(std::string_view v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("expected true or false, got '" + std::string(v) + "'");
  }
  static std::vector<double> to_list(std::string_view v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    for (auto part : split(v, ',')) out.push_back(to_number(part));
    return out;
  }
  static std::vector<Edge> to_edges(std::string_view v) {
    std::vector<Edge> out;
    for (auto tok : tokens(v)) {
      const auto dash = tok.find('-');
      int a = -1, b = -1;
      bool ok = dash != std::string_view::npos && dash > 0;
      if (ok) {
        auto ra = std::from_chars(tok.data(), tok.data() + dash, a);
        auto rb = std::from_chars(tok.data() + dash + 1, tok.data() + tok.size(), b);
        ok = ra.ec == std::errc() && ra.ptr == tok.data() + dash && rb.ec == std::errc() &&
             rb.ptr == tok.data() + tok.size() && a >= 0 && b >= 0;
      }
      if (!ok) throw ConfigError("expected pairs like 3-7, got '" + std::string(tok) + "'");
      out.emplace_back(a, b);
    }
    return out;
  }

private:
  Sections& sections_;
  std::string section_;
};

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> k = {
      {"model", {"sigma_b", "sigma_r", "zeta_br", "zeta_rb", "phi", "psi"}},
      {"blue", {"generator", "branching", "depth", "nodes", "p", "seed", "connected", "file", "edges"}},
      {"red", {"generator", "branching", "depth", "nodes", "p", "seed", "connected", "file", "edges"}},
      {"cross", {"kind", "symmetric", "br", "rb"}},
      {"frequencies", {"mode", "seed", "low", "high", "omega", "nu"}},
      {"integration", {"t_end", "dt", "sample_every", "initial", "initial_seed"}},
      {"analysis", {"two_cluster", "three_cluster", "window_fraction", "slope_tol", "wind_tol", "locked", "splay"}},
      {"sweep", {"phi", "alpha", "zeta", "spot_phi", "zeta_tol"}},
      {"output", {"dir"}},
  };
  return k;
}

void read_network(Sections& s, const std::string& name, NetworkSpec& n) {
  Reader r(s, name);
  r.text("generator", n.generator);
  r.integer("branching", n.branching);
  r.integer("depth", n.depth);
  r.integer("nodes", n.nodes);
  r.number("p", n.p);
  r.integer("seed", n.seed);
  r.boolean("connected", n.connected);
  r.text("file", n.file);
  r.edges("edges", n.edges);
  static const std::vector<std::string> gens = {"tree", "erdos_renyi", "edge_list", "edges"};
  if (std::find(gens.begin(), gens.end(), n.generator) == gens.end())
    throw ConfigError("[" + name + "] generator: unknown generator '" + n.generator + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

std::string join(const std::vector<Edge>& e) {
  std::string out;
  for (std::size_t i = 0; i < e.size(); ++i)
    out += (i ? " " : "") + std::to_string(e[i].first) + "-" + std::to_string(e[i].second);
  return out;
}

const char* yes(bool b) { return b ? "true" : "false"; }

void print_network(std::ostringstream& o, const char* name, const NetworkSpec& n) {
  o << "\n[" << name << "]\n";
  o << "generator = " << n.generator << '\n';
  o << "branching = " << n.branching << '\n';
  o << "depth = " << n.depth << '\n';
  o << "nodes = " << n.nodes << '\n';
  o << "p = " << format_double(n.p) << '\n';
  o << "seed = " << n.seed << '\n';
  o << "connected = " << yes(n.connected) << '\n';
  o << "file = " << n.file << '\n';
  o << "edges = " << join(n.edges) << '\n';
}

Graph build_network(const NetworkSpec& n, const fs::path& base, const char* name) {
  try {
    if (n.generator == "tree") return complete_kary_tree(n.branching, n.depth);
    if (n.generator == "erdos_renyi") return erdos_renyi(n.nodes, n.p, n.seed, n.connected);
    if (n.generator == "edge_list") {
      if (n.file.empty()) throw ConfigError("file is required for generator edge_list");
      const fs::path path = fs::path(n.file).is_absolute() ? fs::path(n.file) : base / n.file;
      return read_edge_list(read_text(path));
    }
    return Graph(n.nodes, n.edges);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[") + name + "] " + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("[") + name + "] " + e.what());
  }
}

Matrix link_matrix(const std::vector<Edge>& links, std::size_t rows, std::size_t cols, const char* key) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (auto [i, j] : links) {
    if (static_cast<std::size_t>(i) >= rows || static_cast<std::size_t>(j) >= cols)
      throw ConfigError(std::string("[cross] ") + key + ": link " + std::to_string(i) + "-" + std::to_string(j) +
                        " is outside the networks");
    a(i, j) = 1.0;
  }
  return a;
}

} // namespace

std::vector<double> Grid::points() const {
  if (count > 0) return linear_grid(lo, hi, count);
  return list;
}

Grid parse_grid(std::string_view text) {
  text = trim(text);
  Grid g;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("grid range must be lo:hi:count, got '" + std::string(text) + "'");
    g.lo = Reader::to_number(parts[0]);
    g.hi = Reader::to_number(parts[1]);
    const auto c = parts[2];
    const auto r = std::from_chars(c.data(), c.data() + c.size(), g.count);
    if (r.ec != std::errc() || r.ptr != c.data() + c.size() || g.count == 0)
      throw ConfigError("grid count must be a positive integer, got '" + std::string(c) + "'");
    if (g.count == 1 && g.lo != g.hi) throw ConfigError("a one-point grid needs lo == hi");
    return g;
  }
  g.list = Reader::to_list(text);
  if (g.list.empty()) throw ConfigError("empty grid");
  return g;
}

std::string print_grid(const Grid& g) {
  if (g.count > 0) return format_double(g.lo) + ":" + format_double(g.hi) + ":" + std::to_string(g.count);
  return join(g.list);
}

ExperimentConfig parse_config(std::string_view text) {
  Sections sections;
  std::string current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_keys().count(current)) throw ConfigError(where + "unknown section [" + current + "]");
      if (sections.count(current)) throw ConfigError(where + "section [" + current + "] appears twice");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (current.empty()) throw ConfigError(where + "key '" + key + "' outside any section");
    const auto& keys = known_keys().at(current);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(where + "unknown key '" + key + "' in [" + current + "]");
    auto& sec = sections[current];
    if (sec.count(key)) throw ConfigError(where + "key '" + key + "' repeated in [" + current + "]");
    sec[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no, false};
  }

  ExperimentConfig c;
  {
    Reader r(sections, "model");
    r.number("sigma_b", c.sigma_b);
    r.number("sigma_r", c.sigma_r);
    r.number("zeta_br", c.zeta_br);
    r.number("zeta_rb", c.zeta_rb);
    r.number("phi", c.phi);
    r.number("psi", c.psi);
  }
  read_network(sections, "blue", c.blue);
  read_network(sections, "red", c.red);
  {
    Reader r(sections, "cross");
    r.text("kind", c.cross.kind);
    r.boolean("symmetric", c.cross.symmetric);
    r.edges("br", c.cross.br);
    r.edges("rb", c.cross.rb);
    if (c.cross.kind != "leaf_matching" && c.cross.kind != "links")
      throw ConfigError("[cross] kind: unknown kind '" + c.cross.kind + "'");
  }
  {
    Reader r(sections, "frequencies");
    r.text("mode", c.frequencies.mode);
    r.integer("seed", c.frequencies.seed);
    r.number("low", c.frequencies.low);
    r.number("high", c.frequencies.high);
    r.list("omega", c.frequencies.omega);
    r.list("nu", c.frequencies.nu);
    if (c.frequencies.mode != "uniform" && c.frequencies.mode != "explicit")
      throw ConfigError("[frequencies] mode: unknown mode '" + c.frequencies.mode + "'");
  }
  {
    Reader r(sections, "integration");
    r.number("t_end", c.integration.t_end);
    r.number("dt", c.integration.dt);
    r.integer("sample_every", c.integration.sample_every);
    r.text("initial", c.integration.initial);
    r.integer("initial_seed", c.integration.initial_seed);
    if (c.integration.initial != "zeros" && c.integration.initial != "random")
      throw ConfigError("[integration] initial: expected zeros or random");
    if (!(c.integration.dt > 0.0) || !(c.integration.t_end > 0.0) || c.integration.sample_every < 1)
      throw ConfigError("[integration] dt and t_end must be positive and sample_every >= 1");
  }
  {
    Reader r(sections, "analysis");
    r.boolean("two_cluster", c.analysis.two_cluster);
    r.boolean("three_cluster", c.analysis.three_cluster);
    r.number("window_fraction", c.analysis.window_fraction);
    r.number("slope_tol", c.analysis.slope_tol);
    r.integer("wind_tol", c.analysis.wind_tol);
    r.number("locked", c.analysis.locked);
    r.number("splay", c.analysis.splay);
  }
  {
    Reader r(sections, "sweep");
    r.grid("phi", c.sweep.phi);
    r.grid("alpha", c.sweep.alpha);
    r.grid("zeta", c.sweep.zeta);
    r.list("spot_phi", c.sweep.spot_phi);
    r.number("zeta_tol", c.sweep.zeta_tol);
  }
  {
    Reader r(sections, "output");
    r.text("dir", c.output_dir);
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  try {
    return parse_config(read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string print_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[model]\n";
  o << "sigma_b = " << format_double(c.sigma_b) << '\n';
  o << "sigma_r = " << format_double(c.sigma_r) << '\n';
  o << "zeta_br = " << format_double(c.zeta_br) << '\n';
  o << "zeta_rb = " << format_double(c.zeta_rb) << '\n';
  o << "phi = " << format_double(c.phi) << '\n';
  o << "psi = " << format_double(c.psi) << '\n';
  print_network(o, "blue", c.blue);
  print_network(o, "red", c.red);
  o << "\n[cross]\n";
  o << "kind = " << c.cross.kind << '\n';
  o << "symmetric = " << yes(c.cross.symmetric) << '\n';
  o << "br = " << join(c.cross.br) << '\n';
  o << "rb = " << join(c.cross.rb) << '\n';
  o << "\n[frequencies]\n";
  o << "mode = " << c.frequencies.mode << '\n';
  o << "seed = " << c.frequencies.seed << '\n';
  o << "low = " << format_double(c.frequencies.low) << '\n';
  o << "high = " << format_double(c.frequencies.high) << '\n';
  o << "omega = " << join(c.frequencies.omega) << '\n';
  o << "nu = " << join(c.frequencies.nu) << '\n';
  o << "\n[integration]\n";
  o << "t_end = " << format_double(c.integration.t_end) << '\n';
  o << "dt = " << format_double(c.integration.dt) << '\n';
  o << "sample_every = " << c.integration.sample_every << '\n';
  o << "initial = " << c.integration.initial << '\n';
  o << "initial_seed = " << c.integration.initial_seed << '\n';
  o << "\n[analysis]\n";
  o << "two_cluster = " << yes(c.analysis.two_cluster) << '\n';
  o << "three_cluster = " << yes(c.analysis.three_cluster) << '\n';
  o << "window_fraction = " << format_double(c.analysis.window_fraction) << '\n';
  o << "slope_tol = " << format_double(c.analysis.slope_tol) << '\n';
  o << "wind_tol = " << c.analysis.wind_tol << '\n';
  o << "locked = " << format_double(c.analysis.locked) << '\n';
  o << "splay = " << format_double(c.analysis.splay) << '\n';
  o << "\n[sweep]\n";
  o << "phi = " << (c.sweep.phi ? print_grid(*c.sweep.phi) : "") << '\n';
  o << "alpha = " << (c.sweep.alpha ? print_grid(*c.sweep.alpha) : "") << '\n';
  o << "zeta = " << (c.sweep.zeta ? print_grid(*c.sweep.zeta) : "") << '\n';
  o << "spot_phi = " << join(c.sweep.spot_phi) << '\n';
  o << "zeta_tol = " << format_double(c.sweep.zeta_tol) << '\n';
  o << "\n[output]\n";
  o << "dir = " << c.output_dir << '\n';
  return o.str();
}

ModelConfig build_model(const ExperimentConfig& c, const fs::path& base_dir) {
  ModelConfig m;
  m.blue = build_network(c.blue, base_dir, "blue");
  m.red = build_network(c.red, base_dir, "red");
  const std::size_t n = m.blue.size(), mm = m.red.size();
  if (c.cross.kind == "leaf_matching") {
    try {
      m.cross = leaf_matching_cross(m.blue, m.red, c.cross.symmetric);
    } catch (const Error& e) {
      throw ConfigError(std::string("[cross] ") + e.what());
    }
  } else {
    Matrix br = link_matrix(c.cross.br, n, mm, "br");
    if (c.cross.symmetric) {
      m.cross = CrossNetwork::symmetric(br);
    } else {
      m.cross = CrossNetwork(br, link_matrix(c.cross.rb, mm, n, "rb"));
    }
  }
  m.sigma_b = c.sigma_b;
  m.sigma_r = c.sigma_r;
  m.zeta_br = c.zeta_br;
  m.zeta_rb = c.zeta_rb;
  m.phi = wrap_angle(c.phi);
  m.psi = wrap_angle(c.psi);
  if (c.frequencies.mode == "uniform") {
    if (!(c.frequencies.high > c.frequencies.low)) throw ConfigError("[frequencies] high must exceed low");
    auto [omega, nu] = draw_uniform_frequencies(n, mm, c.frequencies.seed, c.frequencies.low, c.frequencies.high);
    m.omega = omega;
    m.nu = nu;
  } else {
    if (c.frequencies.omega.size() != n || c.frequencies.nu.size() != mm)
      throw ConfigError("[frequencies] explicit omega/nu need " + std::to_string(n) + " and " + std::to_string(mm) +
                        " values, got " + std::to_string(c.frequencies.omega.size()) + " and " +
                        std::to_string(c.frequencies.nu.size()));
    m.omega = Eigen::Map<const Vector>(c.frequencies.omega.data(), static_cast<Eigen::Index>(n));
    m.nu = Eigen::Map<const Vector>(c.frequencies.nu.data(), static_cast<Eigen::Index>(mm));
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return m;
}

ExperimentConfig freeze(const ExperimentConfig& c, const ModelConfig& m) {
  ExperimentConfig out = c;
  out.frequencies.mode = "explicit";
  out.frequencies.omega.assign(m.omega.data(), m.omega.data() + m.omega.size());
  out.frequencies.nu.assign(m.nu.data(), m.nu.data() + m.nu.size());
  auto inline_net = [](NetworkSpec& spec, const Graph& g) {
    if (spec.generator != "edge_list") return;
    spec.generator = "edges";
    spec.file.clear();
    spec.nodes = g.size();
    spec.edges = g.edges();
  };
  inline_net(out.blue, m.blue);
  inline_net(out.red, m.red);
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_text(path)); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

} // namespace kuraduel
