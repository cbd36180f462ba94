#include "semlearn/io.hpp"

#include <unistd.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "semlearn/errors.hpp"

namespace semlearn {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::parse_error, "malformed JSON");
  return j;
}

int as_index(const json& j, int p, const char* what) {
  if (!j.is_number_integer())
    throw Error(ErrorCode::parse_error, std::string(what) + " must be an integer");
  const int v = j.get<int>();
  if (v < 1 || v > p)
    throw Error(ErrorCode::parse_error,
                std::string(what) + " " + std::to_string(v) + " out of range [1, " +
                    std::to_string(p) + "]");
  return v - 1;
}

std::string format_double(double v) {
  std::array<char, 40> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

std::string sem_to_json(const Sem& sem) {
  json j;
  j["p"] = sem.p();
  json edges = json::array(), weights = json::array();
  for (const auto& [i, k] : sem.dag.edges) {
    edges.push_back({i + 1, k + 1});
    weights.push_back({i + 1, k + 1, sem.B(i, k)});
  }
  j["edges"] = std::move(edges);
  j["weights"] = std::move(weights);
  json sigma2 = json::array();
  for (int v = 0; v < sem.p(); ++v) sigma2.push_back(sem.sigma2[v]);
  j["sigma2"] = std::move(sigma2);
  return j.dump(2) + "\n";
}

Sem sem_from_json(const std::string& text) {
  json j = parse_json(text);
  if (!j.is_object() || !j.contains("p") || !j.contains("edges") ||
      !j.contains("weights") || !j.contains("sigma2"))
    throw Error(ErrorCode::parse_error,
                "model JSON needs fields p, edges, weights, sigma2");
  if (!j["p"].is_number_integer() || j["p"].get<int>() < 1)
    throw Error(ErrorCode::parse_error, "p must be a positive integer");
  const int p = j["p"].get<int>();

  EdgeSet edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2)
      throw Error(ErrorCode::parse_error, "each edge must be a pair [i, j]");
    edges.insert({as_index(e[0], p, "edge endpoint"), as_index(e[1], p, "edge endpoint")});
  }
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
  EdgeSet weight_support;
  for (const auto& w : j["weights"]) {
    if (!w.is_array() || w.size() != 3 || !w[2].is_number())
      throw Error(ErrorCode::parse_error, "each weight must be a triple [i, j, value]");
    const int i = as_index(w[0], p, "weight endpoint");
    const int k = as_index(w[1], p, "weight endpoint");
    B(i, k) = w[2].get<double>();
    weight_support.insert({i, k});
  }
  if (weight_support != edges)
    throw Error(ErrorCode::parse_error, "weights and edges disagree on the support");
  if (!j["sigma2"].is_array() || static_cast<int>(j["sigma2"].size()) != p)
    throw Error(ErrorCode::parse_error, "sigma2 must be an array of length p");
  Eigen::VectorXd sigma2(p);
  for (int v = 0; v < p; ++v) {
    if (!j["sigma2"][v].is_number())
      throw Error(ErrorCode::parse_error, "sigma2 entries must be numbers");
    sigma2[v] = j["sigma2"][v].get<double>();
  }
  try {
    return make_sem(validate_dag(p, edges), std::move(B), std::move(sigma2));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::cycle_detected || e.code() == ErrorCode::invalid_vertex)
      throw;
    throw Error(ErrorCode::parse_error, e.what());
  }
}

std::string matrix_to_json(const Eigen::MatrixXd& m) {
  json j;
  j["rows"] = static_cast<int>(m.rows());
  j["cols"] = static_cast<int>(m.cols());
  json data = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j.dump(2) + "\n";
}

Eigen::MatrixXd matrix_from_json(const std::string& text) {
  json j = parse_json(text);
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw Error(ErrorCode::parse_error, "matrix JSON needs fields rows, cols, data");
  if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer())
    throw Error(ErrorCode::parse_error, "rows/cols must be integers");
  const int rows = j["rows"].get<int>(), cols = j["cols"].get<int>();
  if (rows < 1 || cols < 1)
    throw Error(ErrorCode::parse_error, "rows/cols must be positive");
  if (!j["data"].is_array() || static_cast<long>(j["data"].size()) != 1L * rows * cols)
    throw Error(ErrorCode::parse_error, "data must hold rows*cols numbers (row-major)");
  Eigen::MatrixXd m(rows, cols);
  long idx = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++idx) {
      if (!j["data"][idx].is_number())
        throw Error(ErrorCode::parse_error, "data entries must be numbers");
      m(r, c) = j["data"][idx].get<double>();
    }
  return m;
}

std::string learn_result_to_json(const LearnResult& result) {
  json j;
  json edges = json::array();
  for (const auto& [i, k] : result.G_hat.edges)
    edges.push_back({i + 1, k + 1, result.B_hat(i, k)});
  j["edges"] = std::move(edges);
  json order = json::array();
  for (int v : result.elimination_order) order.push_back(v + 1);
  j["elimination_order"] = std::move(order);
  json diags = json::array();
  for (const auto& d : result.diagnostics) {
    json item;
    item["vertex"] = d.vertex + 1;
    item["min_score"] = d.min_score;
    item["runner_up"] = std::isnan(d.runner_up) ? json(nullptr) : json(d.runner_up);
    item["gap"] = std::isnan(d.gap) ? json(nullptr) : json(d.gap);
    diags.push_back(std::move(item));
  }
  j["diagnostics"] = std::move(diags);
  return j.dump(2) + "\n";
}

std::string learn_result_to_dot(const LearnResult& result) {
  std::ostringstream out;
  out << "digraph learned {\n";
  for (int v = 0; v < result.G_hat.p; ++v) out << "  " << (v + 1) << ";\n";
  char label[64];
  for (const auto& [i, k] : result.G_hat.edges) {
    std::snprintf(label, sizeof(label), "%.4f", result.B_hat(i, k));
    out << "  " << (k + 1) << " -> " << (i + 1) << " [label=\"" << label << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string report_to_json(const IdentifiabilityReport& report) {
  json j;
  j["satisfied"] = report.satisfied;
  j["worst_margin"] = std::isfinite(report.worst_margin)
                          ? json(report.worst_margin)
                          : json(nullptr);
  if (report.witness) {
    json w;
    json vertices = json::array();
    for (int v : report.witness->vertices) vertices.push_back(v + 1);
    w["vertices"] = std::move(vertices);
    w["terminal"] = report.witness->terminal >= 0 ? json(report.witness->terminal + 1)
                                                  : json(nullptr);
    w["non_terminal"] = report.witness->non_terminal + 1;
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  j["subsets_checked"] = report.subsets_checked;
  return j.dump(2) + "\n";
}

std::string data_to_csv(const DataMatrix& data) {
  std::string out;
  out.reserve(static_cast<size_t>(data.n) * data.p * 12);
  for (int r = 0; r < data.n; ++r) {
    for (int c = 0; c < data.p; ++c) {
      if (c) out += ',';
      out += format_double(data.values(r, c));
    }
    out += '\n';
  }
  return out;
}

DataMatrix data_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    if (line.empty()) continue;
    std::vector<double> row;
    size_t f = 0;
    while (true) {
      size_t comma = line.find(',', f);
      std::string_view field =
          line.substr(f, comma == std::string_view::npos ? line.size() - f
                                                         : comma - f);
      double value = 0.0;
      auto res = std::from_chars(field.data(), field.data() + field.size(), value);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw Error(ErrorCode::parse_error,
                    "line " + std::to_string(line_no) + ": bad number '" +
                        std::string(field) + "'");
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      f = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(rows.front().size()) + " fields, got " +
                      std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::parse_error, "empty data file");
  DataMatrix data{static_cast<int>(rows.size()), static_cast<int>(rows.front().size()),
                  Eigen::MatrixXd(rows.size(), rows.front().size())};
  for (int r = 0; r < data.n; ++r)
    for (int c = 0; c < data.p; ++c) data.values(r, c) = rows[r][c];
  return data;
}

Eigen::VectorXd vector_from_json(const std::string& text) {
  json j = parse_json(text);
  const json* arr = nullptr;
  if (j.is_array()) {
    arr = &j;
  } else if (j.is_object() && j.contains("d_diag") && j["d_diag"].is_array()) {
    arr = &j["d_diag"];
  } else {
    throw Error(ErrorCode::parse_error,
                "expected a JSON array or an object with a d_diag array");
  }
  Eigen::VectorXd v(arr->size());
  for (size_t k = 0; k < arr->size(); ++k) {
    if (!(*arr)[k].is_number())
      throw Error(ErrorCode::parse_error, "vector entries must be numbers");
    v[static_cast<int>(k)] = (*arr)[k].get<double>();
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io_error, "read failed for " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  fs::path tmp = dir / (target.filename().string() + ".tmp." +
                        std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot create " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::io_error, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::io_error, "rename failed for " + path);
  }
}

}  // namespace semlearn
