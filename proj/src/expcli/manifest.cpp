#include "kuraduel/errors.hpp"
#include "kuraduel/expcli.hpp"

namespace kuraduel {

namespace fs = std::filesystem;
using nlohmann::json;

void Manifest::add_output(const fs::path& file) { data_["outputs"][file.filename().string()] = file_sha256(file); }

void Manifest::set_status(std::string_view status, std::string_view error) {
  data_["status"] = status;
  if (error.empty())
    data_.erase("error");
  else
    data_["error"] = error;
}

void Manifest::write() const { write_text(path_, data_.dump(2) + "\n"); }

Manifest Manifest::load(const fs::path& path) {
  Manifest m(path);
  try {
    m.data_ = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ChecksumError("unreadable manifest " + path.string() + ": " + e.what());
  }
  if (!m.data_.is_object() || !m.data_.contains("config_sha256") || !m.data_.contains("command"))
    throw ChecksumError("manifest " + path.string() + " lacks config_sha256 or command");
  return m;
}

void Manifest::verify() const {
  const fs::path dir = path_.parent_path();
  const fs::path cfg = dir / data_.value("config_file", std::string("resolved.cfg"));
  if (!fs::exists(cfg)) throw ChecksumError("missing " + cfg.string());
  if (file_sha256(cfg) != data_.at("config_sha256").get<std::string>())
    throw ChecksumError(cfg.string() + " does not match the manifest checksum");
  if (data_.contains("outputs")) {
    for (const auto& [name, hash] : data_.at("outputs").items()) {
      const fs::path f = dir / name;
      if (!fs::exists(f)) throw ChecksumError("missing output " + f.string());
      if (file_sha256(f) != hash.get<std::string>()) throw ChecksumError(f.string() + " does not match the manifest checksum");
    }
  }
}

json networks_json(const ModelConfig& m) {
  auto edges = [](const Graph& g) {
    json e = json::array();
    for (auto [i, j] : g.edges()) e.push_back({i, j});
    return e;
  };
  auto links = [](const Matrix& a) {
    json e = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (a(i, j) != 0.0) e.push_back({i, j});
    return e;
  };
  return json{{"blue", {{"nodes", m.blue.size()}, {"edges", edges(m.blue)}}},
              {"red", {{"nodes", m.red.size()}, {"edges", edges(m.red)}}},
              {"cross", {{"br", links(m.cross.a_br())}, {"rb", links(m.cross.a_rb())}}}};
}

} // namespace kuraduel
