#include "qos/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qos {

std::string format_number(double v) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument("result values must be finite");
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::sort(rows.begin(), rows.end());
}

namespace {

void check_field(const std::string& s) {
  if (s.empty() || s.find_first_of(",\"\n") != std::string::npos) {
    throw std::invalid_argument("field not CSV-safe: '" + s + "'");
  }
}

std::string client_label(int client) {
  return client == 0 ? "all" : std::to_string(client);
}

}  // namespace

std::string render_results(std::vector<ResultRow> rows, ResultFormat format) {
  sort_rows(rows);
  std::ostringstream os;
  if (format == ResultFormat::Csv) {
    os << "scenario,seed,client,metric,value\n";
    for (const ResultRow& r : rows) {
      check_field(r.scenario);
      check_field(r.metric);
      os << r.scenario << ',' << r.seed << ',' << client_label(r.client) << ','
         << r.metric << ',' << format_number(r.value) << '\n';
    }
  } else {
    os << "[\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const ResultRow& r = rows[k];
      check_field(r.scenario);
      check_field(r.metric);
      os << "  {\"scenario\":\"" << r.scenario << "\",\"seed\":" << r.seed
         << ",\"client\":";
      if (r.client == 0) {
        os << "\"all\"";
      } else {
        os << r.client;
      }
      os << ",\"metric\":\"" << r.metric
         << "\",\"value\":" << format_number(r.value) << '}'
         << (k + 1 < rows.size() ? ",\n" : "\n");
    }
    os << "]\n";
  }
  return os.str();
}

void emit_results(const std::vector<ResultRow>& rows, ResultFormat format,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output path: " + path);
  }
  out << render_results(rows, format);
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::vector<ResultRow> rows;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      if (line != "scenario,seed,client,metric,value") {
        throw std::invalid_argument("unexpected CSV header: " + line);
      }
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 5) {
      throw std::invalid_argument("malformed CSV row: " + line);
    }
    ResultRow r;
    r.scenario = fields[0];
    r.seed = std::stoull(fields[1]);
    r.client = fields[2] == "all" ? 0 : std::stoi(fields[2]);
    r.metric = fields[3];
    r.value = std::stod(fields[4]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> parse_results_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (!doc.is_array()) {
    throw std::invalid_argument("JSON results must be an array");
  }
  std::vector<ResultRow> rows;
  rows.reserve(doc.size());
  for (const auto& item : doc) {
    ResultRow r;
    r.scenario = item.at("scenario").get<std::string>();
    r.seed = item.at("seed").get<std::uint64_t>();
    const auto& client = item.at("client");
    r.client = client.is_string() ? 0 : client.get<int>();
    r.metric = item.at("metric").get<std::string>();
    r.value = item.at("value").get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace qos
