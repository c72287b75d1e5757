// SPDX-License-Identifier: Apache-2.0
#include "evoboss/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "evoboss/errors.hpp"

namespace evoboss {

double RunTrace::best_at(std::size_t count) const {
  if (records.empty() || count == 0) return 0.0;
  return records[std::min(count, records.size()) - 1].best;
}

std::string to_jsonl(const RunTrace& trace) {
  std::string out;
  nlohmann::ordered_json header = {{"config", trace.config}, {"seed", trace.seed}};
  out += header.dump();
  out += '\n';
  for (const auto& r : trace.records) {
    nlohmann::ordered_json line = nlohmann::ordered_json::object();
    line["step"] = r.step;
    line["variant"] = r.variant.word();
    line["fitness"] = r.fitness;
    line["best"] = r.best;
    line["theta"] = r.theta ? nlohmann::ordered_json(*r.theta) : nlohmann::ordered_json(nullptr);
    out += line.dump();
    out += '\n';
  }
  return out;
}

RunTrace from_jsonl(std::string_view text) {
  RunTrace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::ordered_json::exception& e) {
      throw DataError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      if (header) {
        header = false;
        if (j.contains("config")) {
          trace.config = j.at("config");
          trace.seed = j.value("seed", std::uint64_t{0});
          continue;
        }
      }
      TraceRecord r;
      r.step = j.at("step").get<int>();
      r.variant = Variant::from_word(j.at("variant").get<std::string>());
      r.fitness = j.at("fitness").get<double>();
      r.best = j.at("best").get<double>();
      if (j.contains("theta") && !j.at("theta").is_null()) r.theta = j.at("theta").get<double>();
      trace.records.push_back(std::move(r));
    } catch (const nlohmann::ordered_json::exception& e) {
      throw DataError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

void write_trace(const std::filesystem::path& path, const RunTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_jsonl(trace);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RunTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_jsonl(ss.str());
}

std::vector<RunTrace> read_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunTrace> traces;
  traces.reserve(files.size());
  for (const auto& f : files) traces.push_back(read_trace(f));
  return traces;
}

}  // namespace evoboss
