#include "gailpen/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gailpen/errors.hpp"
#include "gailpen/rng.hpp"

namespace gailpen {
namespace {

using nlohmann::json;

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

bool parse_number(const std::string& token, double* out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  *out = std::strtod(begin, &end);
  return end == begin + token.size() && std::isfinite(*out);
}

// Label of a .SEGMENT line: the last double-quoted token if any, otherwise
// the last whitespace token after the keyword.
std::string segment_label(const std::string& line) {
  const auto last_quote = line.rfind('"');
  if (last_quote != std::string::npos && last_quote > 0) {
    const auto open = line.rfind('"', last_quote - 1);
    if (open != std::string::npos) {
      return line.substr(open + 1, last_quote - open - 1);
    }
  }
  const auto tokens = tokenize(line);
  return tokens.size() > 1 ? tokens.back() : std::string{};
}

void append_fixed(std::string& out, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  out += buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void append_pair_array(std::string& out, std::span<const Point> points) {
  out += '[';
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out += ',';
    out += '[';
    append_fixed(out, points[i].x);
    out += ',';
    append_fixed(out, points[i].y);
    out += ']';
  }
  out += ']';
}

const json& require_key(const json& record, const char* key,
                        std::size_t line_no) {
  const auto it = record.find(key);
  if (it == record.end()) {
    throw parse_error(line_no, std::string("missing key \"") + key + "\"");
  }
  return *it;
}

Point parse_pair(const json& pair, std::size_t line_no) {
  if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
      !pair[1].is_number()) {
    throw parse_error(line_no, "coordinate pair must be [x, y]");
  }
  return {pair[0].get<double>(), pair[1].get<double>()};
}

json parse_record(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw parse_error(line_no, std::string("malformed record: ") + e.what());
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path.string(), "cannot open for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path.string(), "cannot open for reading");
  return in;
}

}  // namespace

ParseResult parse_unipen_subset(std::istream& text) {
  enum class Pen { none, down, up };

  ParseResult result;
  Pen pen = Pen::none;
  bool in_segment = false;
  RawSample current;
  std::size_t segment_index = 0;

  auto close_segment = [&] {
    if (!in_segment) return;
    std::erase_if(current.strokes,
                  [](const std::vector<Point>& s) { return s.empty(); });
    if (current.strokes.empty()) {
      ++result.skipped_segments;
    } else {
      result.samples.push_back(std::move(current));
    }
    current = RawSample{};
    in_segment = false;
  };

  auto open_segment = [&](std::string label) {
    close_segment();
    current.id = "seg" + std::to_string(segment_index++);
    current.label = std::move(label);
    in_segment = true;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(text, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;

    if (line[0] == '.') {
      const std::string keyword = tokenize(line).front();
      if (keyword == ".SEGMENT") {
        open_segment(segment_label(line));
        pen = Pen::none;
      } else if (keyword == ".PEN_DOWN") {
        if (!in_segment) open_segment("");
        current.strokes.emplace_back();
        pen = Pen::down;
      } else if (keyword == ".PEN_UP") {
        pen = Pen::up;
      }
      // other declarations are passed over
      continue;
    }

    const auto tokens = tokenize(line);
    std::vector<double> values(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!parse_number(tokens[i], &values[i])) {
        throw parse_error(line_no,
                          "non-numeric coordinate token \"" + tokens[i] + "\"");
      }
    }
    if (pen == Pen::none) {
      throw parse_error(line_no, "coordinate line outside any .PEN_DOWN block");
    }
    if (pen == Pen::up) continue;  // pen-up trace is discarded
    if (values.size() < 2) {
      throw parse_error(line_no, "coordinate line needs at least x and y");
    }
    current.strokes.back().push_back({values[0], values[1]});
  }
  close_segment();
  return result;
}

void write_canonical(std::span<const RawSample> samples,
                     const std::filesystem::path& destination) {
  auto out = open_output(destination);
  std::string line;
  for (const RawSample& sample : samples) {
    line.clear();
    line += "{\"id\":\"" + json_escape(sample.id) + "\",\"label\":\"" +
            json_escape(sample.label) + "\",\"strokes\":[";
    for (std::size_t i = 0; i < sample.strokes.size(); ++i) {
      if (i) line += ',';
      append_pair_array(line, sample.strokes[i]);
    }
    line += "]}\n";
    out << line;
  }
  if (!out) throw io_error(destination.string(), "write failed");
}

std::vector<RawSample> load_canonical(const std::filesystem::path& source) {
  auto in = open_input(source);
  std::vector<RawSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json record = parse_record(line, line_no);
    RawSample sample;
    sample.id = require_key(record, "id", line_no).get<std::string>();
    sample.label = require_key(record, "label", line_no).get<std::string>();
    const json& strokes = require_key(record, "strokes", line_no);
    if (!strokes.is_array()) {
      throw parse_error(line_no, "\"strokes\" must be an array");
    }
    for (const json& stroke : strokes) {
      if (!stroke.is_array()) {
        throw parse_error(line_no, "stroke must be an array of [x, y] pairs");
      }
      std::vector<Point> points;
      points.reserve(stroke.size());
      for (const json& pair : stroke) points.push_back(parse_pair(pair, line_no));
      sample.strokes.push_back(std::move(points));
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

BuildResult build_dataset(std::span<const RawSample> raw, int horizon,
                          double train_fraction, std::uint64_t seed) {
  if (raw.empty()) {
    throw std::invalid_argument("build_dataset: no input samples");
  }
  if (horizon < 2) {
    throw std::invalid_argument("build_dataset: horizon must be >= 2");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument(
        "build_dataset: train_fraction must lie in (0, 1)");
  }

  BuildResult result;
  std::vector<Trajectory> processed;
  processed.reserve(raw.size());
  for (const RawSample& sample : raw) {
    std::vector<Point> joined;
    for (const auto& stroke : sample.strokes) {
      joined.insert(joined.end(), stroke.begin(), stroke.end());
    }
    if (joined.empty()) {
      ++result.dropped;
      continue;
    }
    auto points = resample_uniform(normalize_unit_square(joined), horizon);
    for (Point& p : points) {  // guard against interpolation rounding
      p.x = std::clamp(p.x, 0.0, 1.0);
      p.y = std::clamp(p.y, 0.0, 1.0);
    }
    processed.push_back({std::move(points), sample.label, sample.id});
  }
  if (processed.empty()) {
    throw std::invalid_argument("build_dataset: every sample was empty");
  }

  std::vector<std::size_t> order(processed.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(processed.size())));
  result.train = {horizon, Split::train, seed, {}};
  result.test = {horizon, Split::test, seed, {}};
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& bucket = i < n_train ? result.train.samples : result.test.samples;
    bucket.push_back(std::move(processed[order[i]]));
  }
  return result;
}

void write_dataset(const Dataset& dataset,
                   const std::filesystem::path& destination) {
  auto out = open_output(destination);
  std::string line = "{\"count\":" + std::to_string(dataset.samples.size()) +
                     ",\"horizon\":" + std::to_string(dataset.horizon) +
                     ",\"seed\":" + std::to_string(dataset.seed) +
                     ",\"split\":\"" +
                     (dataset.split == Split::train ? "train" : "test") +
                     "\"}\n";
  out << line;
  for (const Trajectory& traj : dataset.samples) {
    line = "{\"id\":\"" + json_escape(traj.id) + "\",\"label\":\"" +
           json_escape(traj.label) + "\",\"points\":";
    append_pair_array(line, traj.points);
    line += "}\n";
    out << line;
  }
  if (!out) throw io_error(destination.string(), "write failed");
}

Dataset load_dataset(const std::filesystem::path& source) {
  auto in = open_input(source);
  std::string line;
  std::size_t line_no = 0;

  Dataset dataset;
  bool have_header = false;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json record = parse_record(line, line_no);
    if (!have_header) {
      expected = require_key(record, "count", line_no).get<std::size_t>();
      dataset.horizon = require_key(record, "horizon", line_no).get<int>();
      dataset.seed =
          require_key(record, "seed", line_no).get<std::uint64_t>();
      const auto split =
          require_key(record, "split", line_no).get<std::string>();
      if (split != "train" && split != "test") {
        throw parse_error(line_no, "split must be \"train\" or \"test\"");
      }
      dataset.split = split == "train" ? Split::train : Split::test;
      if (dataset.horizon < 1) {
        throw parse_error(line_no, "horizon must be positive");
      }
      have_header = true;
      continue;
    }
    Trajectory traj;
    traj.id = require_key(record, "id", line_no).get<std::string>();
    traj.label = require_key(record, "label", line_no).get<std::string>();
    const json& points = require_key(record, "points", line_no);
    if (!points.is_array() ||
        points.size() != static_cast<std::size_t>(dataset.horizon)) {
      throw parse_error(line_no, "\"points\" must hold exactly horizon pairs");
    }
    traj.points.reserve(points.size());
    for (const json& pair : points) {
      const Point p = parse_pair(pair, line_no);
      if (!in_unit_square(p)) {
        throw parse_error(line_no, "coordinate outside the unit square");
      }
      traj.points.push_back(p);
    }
    dataset.samples.push_back(std::move(traj));
  }
  if (!have_header) {
    throw parse_error(1, "missing dataset header record");
  }
  if (dataset.samples.size() != expected) {
    throw parse_error(line_no, "header count " + std::to_string(expected) +
                                   " does not match " +
                                   std::to_string(dataset.samples.size()) +
                                   " records");
  }
  return dataset;
}

std::uint64_t fingerprint_bytes(std::span<const unsigned char> bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::uint64_t fingerprint_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001B3ULL;
    }
  }
  return hash;
}

}  // namespace gailpen
