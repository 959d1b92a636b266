#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kuraduel/errors.hpp"
#include "kuraduel/graph.hpp"

namespace kuraduel {

namespace {

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

long parse_index(std::string_view s, int line) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(s) + "'");
  if (v < 0) throw ParseError(line, "negative node index " + std::string(s));
  return v;
}

} // namespace

EdgeListDocument parse_edge_list(std::string_view text) {
  EdgeListDocument doc;
  std::optional<long> declared;
  std::vector<Edge> edges;
  std::set<Edge> seen;
  long max_index = -1;
  bool any_edge = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = tokens(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (tok[0] == "nodes") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'nodes K'");
      if (declared) throw ParseError(line_no, "repeated 'nodes' header");
      if (any_edge) throw ParseError(line_no, "'nodes' header after the first edge");
      declared = parse_index(tok[1], line_no);
      if (static_cast<std::size_t>(*declared) > max_dense_nodes)
        throw ParseError(line_no, "node count exceeds " + std::to_string(max_dense_nodes));
    } else if (tok[0] == "population") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'population blue|red'");
      if (doc.population) throw ParseError(line_no, "repeated 'population' header");
      if (any_edge) throw ParseError(line_no, "'population' header after the first edge");
      if (tok[1] == "blue") doc.population = Population::blue;
      else if (tok[1] == "red") doc.population = Population::red;
      else throw ParseError(line_no, "unknown population '" + std::string(tok[1]) + "'");
    } else {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'u v'");
      const long u = parse_index(tok[0], line_no);
      const long v = parse_index(tok[1], line_no);
      if (declared && (u >= *declared || v >= *declared))
        throw ParseError(line_no, "node index out of range for nodes " + std::to_string(*declared));
      if (u == v) throw ParseError(line_no, "self-loop at node " + std::to_string(u));
      if (static_cast<std::size_t>(std::max(u, v)) >= max_dense_nodes)
        throw ParseError(line_no, "node index exceeds " + std::to_string(max_dense_nodes));
      const Edge e{static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v))};
      if (!seen.insert(e).second)
        throw ParseError(line_no, "duplicate edge " + std::to_string(e.first) + " " + std::to_string(e.second));
      edges.push_back(e);
      max_index = std::max(max_index, std::max(u, v));
      any_edge = true;
    }
    if (end == text.size()) break;
  }

  const std::size_t n = declared ? static_cast<std::size_t>(*declared) : static_cast<std::size_t>(max_index + 1);
  doc.graph = Graph(n, edges);
  return doc;
}

Graph read_edge_list(std::string_view text) { return parse_edge_list(text).graph; }

std::string write_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "nodes " << g.size();
  for (const auto& [u, v] : g.edges()) out << '\n' << u << ' ' << v;
  return out.str();
}

std::string write_edge_list(const Graph& g, Population population) {
  return "population " + std::string(to_string(population)) + "\n" + write_edge_list(g);
}

} // namespace kuraduel
