#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "metacausal/datagen.hpp"
#include "metacausal/errors.hpp"

namespace metacausal::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_field(std::string_view field, std::size_t line_no, const char* name) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw IoError("line " + std::to_string(line_no) + ": malformed " + name +
                  " value '" + std::string(field) + "'");
  return value;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const bool labeled = data.labels.has_value();
  out << (labeled ? "x,y,label\n" : "x,y\n");
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    out << format_double(data.points[i].x) << ',' << format_double(data.points[i].y);
    if (labeled) out << ',' << (*data.labels)[i];
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw IoError("dataset CSV is empty");
  ++line_no;
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "x" || header[1] != "y" ||
      (header.size() == 3 && header[2] != "label") || header.size() > 3)
    throw IoError("line 1: expected header 'x,y' or 'x,y,label'");
  const bool labeled = header.size() == 3;
  Dataset data;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    Point p{parse_field<double>(fields[0], line_no, "x"),
            parse_field<double>(fields[1], line_no, "y")};
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw IoError("line " + std::to_string(line_no) + ": non-finite value");
    data.points.push_back(p);
    if (labeled) labels.push_back(parse_field<int>(fields[2], line_no, "label"));
  }
  if (labeled) data.labels = std::move(labels);
  return data;
}

std::string generator_to_json(const GeneratorInfo& g) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json mechs = nlohmann::ordered_json::array();
  for (const auto& m : g.mechanisms)
    mechs.push_back({{"alpha", m.alpha},
                     {"beta", m.beta},
                     {"b", m.b},
                     {"direction", std::string(to_string(m.direction))}});
  j["mechanisms"] = std::move(mechs);
  j["class_probs"] = g.class_probs;
  j["seed"] = g.seed;
  return j.dump(2);
}

GeneratorInfo generator_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    GeneratorInfo g;
    for (const auto& m : j.at("mechanisms"))
      g.mechanisms.push_back({m.at("alpha").get<double>(), m.at("beta").get<double>(),
                              m.at("b").get<double>(),
                              direction_from_string(m.at("direction").get<std::string>())});
    g.class_probs = j.at("class_probs").get<std::vector<double>>();
    g.seed = j.value("seed", std::uint64_t{0});
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("generator metadata: ") + e.what());
  }
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out) throw IoError("write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace metacausal::io
