// SPDX-License-Identifier: Apache-2.0
#include "evoboss/landscape.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "evoboss/errors.hpp"

namespace evoboss {

int residue_rank(char residue) {
  auto pos = kAlphabet.find(residue);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

std::uint64_t space_size(int n) {
  if (n < 1 || n > kMaxVariantLength) throw std::invalid_argument("variant length out of range");
  std::uint64_t size = 1;
  for (int i = 0; i < n; ++i) size *= kAlphabetSize;
  return size;
}

Variant Variant::from_word(std::string_view word) {
  if (word.empty() || word.size() > static_cast<std::size_t>(kMaxVariantLength)) {
    throw DataError("invalid variant length: '" + std::string(word) + "'");
  }
  Variant v;
  v.word_.assign(word);
  for (char c : word) {
    int rank = residue_rank(c);
    if (rank < 0) throw DataError("illegal residue letter in '" + std::string(word) + "'");
    v.index_ = v.index_ * kAlphabetSize + static_cast<std::uint64_t>(rank);
  }
  return v;
}

Variant Variant::from_index(std::uint64_t index, int n) {
  if (index >= space_size(n)) throw std::out_of_range("variant index out of range");
  Variant v;
  v.index_ = index;
  v.word_.assign(static_cast<std::size_t>(n), 'A');
  for (int p = n - 1; p >= 0; --p) {
    v.word_[static_cast<std::size_t>(p)] = kAlphabet[index % kAlphabetSize];
    index /= kAlphabetSize;
  }
  return v;
}

Variant Variant::with_residue(int position, char residue) const {
  std::string w = word_;
  w.at(static_cast<std::size_t>(position)) = residue;
  return from_word(w);
}

int hamming(const Variant& a, const Variant& b) {
  if (a.length() != b.length()) throw std::invalid_argument("hamming: length mismatch");
  int d = 0;
  for (int i = 0; i < a.length(); ++i) d += a[i] != b[i];
  return d;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

LandscapeMeta load_meta(const std::filesystem::path& path) {
  LandscapeMeta meta;
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    auto key = trim(body.substr(0, eq));
    auto value = std::string(trim(body.substr(eq + 1)));
    if (key == "name") {
      meta.name = value;
    } else if (key == "n") {
      meta.n = std::atoi(value.c_str());
    } else if (key == "positions") {
      meta.position_labels = value.empty() ? std::vector<std::string>{} : split(value, ',');
    } else if (key == "wild_type") {
      meta.wild_type = value;
    }
  }
  if (meta.n <= 0 && !meta.wild_type.empty()) meta.n = static_cast<int>(meta.wild_type.size());
  if (meta.n <= 0) throw DataError(path.string() + ": missing n");
  if (!meta.position_labels.empty() && static_cast<int>(meta.position_labels.size()) != meta.n) {
    throw DataError(path.string() + ": positions count does not match n");
  }
  if (!meta.wild_type.empty() && static_cast<int>(meta.wild_type.size()) != meta.n) {
    throw DataError(path.string() + ": wild_type length does not match n");
  }
  return meta;
}

void write_meta(const std::filesystem::path& path, const LandscapeMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "name=" << meta.name << "\n" << "n=" << meta.n << "\n" << "positions=";
  for (std::size_t i = 0; i < meta.position_labels.size(); ++i) {
    out << (i ? "," : "") << meta.position_labels[i];
  }
  out << "\n" << "wild_type=" << meta.wild_type << "\n";
}

Landscape::Landscape(std::string name, int n, std::vector<std::string> position_labels,
                     Variant wild_type, std::unordered_map<std::uint64_t, double> measured)
    : name_(std::move(name)),
      n_(n),
      position_labels_(std::move(position_labels)),
      wild_type_(std::move(wild_type)),
      measured_(std::move(measured)) {
  if (n_ < 1 || n_ > kMaxVariantLength) throw DataError("landscape n out of range");
  if (wild_type_.length() != n_) throw DataError("wild type length does not match n");
  if (position_labels_.empty()) {
    for (int i = 1; i <= n_; ++i) position_labels_.push_back(std::to_string(i));
  }
  if (static_cast<int>(position_labels_.size()) != n_) throw DataError("position label count != n");
  std::uint64_t size = evoboss::space_size(n_);
  for (const auto& [index, y] : measured_) {
    if (index >= size) throw DataError("measured variant outside the sequence space");
    if (!(y >= 0.0) || !std::isfinite(y)) throw DataError("fitness must be finite and non-negative");
    fitness_max_ = std::max(fitness_max_, y);
  }
}

std::uint64_t Landscape::space_size() const { return evoboss::space_size(n_); }

double Landscape::fitness(const Variant& v) const {
  if (v.length() != n_) throw std::invalid_argument("variant length does not match landscape");
  auto it = measured_.find(v.index());
  return it == measured_.end() ? 0.0 : it->second;
}

bool Landscape::is_measured(const Variant& v) const {
  return v.length() == n_ && measured_.contains(v.index());
}

std::vector<std::pair<Variant, double>> Landscape::measured_sorted() const {
  std::vector<std::pair<Variant, double>> rows;
  rows.reserve(measured_.size());
  for (const auto& [index, y] : measured_) rows.emplace_back(Variant::from_index(index, n_), y);
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first.index() < b.first.index(); });
  return rows;
}

Landscape parse_landscape_csv(std::string_view text, int n, const std::optional<LandscapeMeta>& meta,
                              const std::string& default_name) {
  if (n < 1 || n > kMaxVariantLength) throw DataError("n out of range");
  std::unordered_map<std::uint64_t, double> measured;
  std::optional<Variant> first;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    auto line = trim(text.substr(start, end == std::string_view::npos ? text.npos : end - start));
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++lineno;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
      header_seen = true;
      if (line == "variant,fitness") continue;
      // Header-less files are accepted when the first line already parses as data.
    }
    auto where = "line " + std::to_string(lineno);
    auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw DataError(where + ": expected 'variant,fitness'");
    }
    auto word = trim(line.substr(0, comma));
    auto value = trim(line.substr(comma + 1));
    if (static_cast<int>(word.size()) != n) {
      throw DataError(where + ": variant '" + std::string(word) + "' has wrong length");
    }
    Variant v;
    try {
      v = Variant::from_word(word);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    double y = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), y);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(y)) {
      throw DataError(where + ": non-numeric fitness '" + std::string(value) + "'");
    }
    if (y < 0.0) throw DataError(where + ": negative fitness");
    if (!measured.emplace(v.index(), y).second) {
      throw DataError(where + ": duplicate variant " + v.word());
    }
    if (!first) first = v;
  }
  if (measured.empty()) throw DataError("landscape file has no data rows");

  if (meta) {
    if (meta->n != n) throw DataError("metadata n does not match");
    Variant wt = meta->wild_type.empty() ? *first : Variant::from_word(meta->wild_type);
    return Landscape(meta->name.empty() ? default_name : meta->name, n, meta->position_labels, wt,
                     std::move(measured));
  }
  return Landscape(default_name, n, {}, *first, std::move(measured));
}

Landscape load_landscape(const std::filesystem::path& csv_path, int n,
                         const std::optional<LandscapeMeta>& meta) {
  return parse_landscape_csv(read_file(csv_path), n, meta, csv_path.stem().string());
}

Landscape load_landscape(const std::filesystem::path& csv_path, const LandscapeMeta& meta) {
  return load_landscape(csv_path, meta.n, meta);
}

std::string to_csv(const Landscape& landscape) {
  std::string out = "variant,fitness\n";
  for (const auto& [v, y] : landscape.measured_sorted()) {
    out += v.word();
    out += ',';
    out += format_real(y);
    out += '\n';
  }
  return out;
}

void write_landscape(const std::filesystem::path& csv_path, const Landscape& landscape) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw DataError("cannot write " + csv_path.string());
  out << to_csv(landscape);
}

std::vector<Variant> enumerate_variants(int n) {
  if (n < 1 || n > 7) throw std::invalid_argument("enumerate_variants: n must be in [1, 7]");
  std::uint64_t size = space_size(n);
  std::vector<Variant> out;
  out.reserve(size);
  for (std::uint64_t i = 0; i < size; ++i) out.push_back(Variant::from_index(i, n));
  return out;
}

std::vector<Variant> single_mutants(const Variant& v, int position) {
  if (position < 0 || position >= v.length()) {
    throw std::out_of_range("single_mutants: position out of range");
  }
  std::vector<Variant> out;
  out.reserve(kAlphabetSize - 1);
  for (char residue : kAlphabet) {
    if (residue != v[static_cast<std::size_t>(position)]) out.push_back(v.with_residue(position, residue));
  }
  return out;
}

// ---------------------------------------------------------------------------

ScreeningSession::ScreeningSession(const Landscape& landscape, int budget)
    : landscape_(&landscape), budget_(budget) {
  if (budget < 1) throw std::invalid_argument("budget must be positive");
}

double ScreeningSession::screen(const Variant& v, std::optional<double> theta) {
  if (exhausted()) throw BudgetExhausted();
  if (screened_.contains(v.index())) throw DuplicateScreen(v.word());
  double y = landscape_->fitness(v);
  screened_.insert(v.index());
  double best = trace_.records.empty() ? y : std::max(trace_.records.back().best, y);
  trace_.records.push_back(TraceRecord{count() + 1, v, y, best, theta});
  return y;
}

}  // namespace evoboss
