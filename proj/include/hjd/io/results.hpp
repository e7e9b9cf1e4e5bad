#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "hjd/core/errors.hpp"
#include "hjd/functionals/image_grid.hpp"
#include "hjd/io/pgm.hpp"

namespace hjd {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

inline Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + ": expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidInput(what + ": expected an array of numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  require_finite(v, what.c_str());
  return v;
}

inline Json grid_to_json(const ImageGrid& g) {
  return Json{{"rows", g.rows()}, {"cols", g.cols()}, {"values", vector_to_json(g.values())}};
}

inline ImageGrid grid_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("values"))
    throw InvalidInput("grid json: needs rows, cols and values");
  return ImageGrid(j.at("rows").get<Index>(), j.at("cols").get<Index>(), vector_from_json(j.at("values"), "grid"));
}

inline Json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path, 0);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError(path + ": " + e.what(), e.byte);
  }
}

// Two-space indentation and a trailing newline; object keys come out sorted,
// so equal content gives equal bytes.
inline void write_json(const Json& j, const std::string& path) {
  const std::string s = j.dump(2) + "\n";
  write_file_bytes(path, std::vector<unsigned char>(s.begin(), s.end()));
}

// .json holds a grid object; anything else is read as PGM.
inline ImageGrid read_image(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".json") return grid_from_json(read_json(path));
  return read_pgm(path);
}

// Shortest decimal that reads back to the same double; '.' separator in
// every locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { add(header); }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_double(v));
    add(cells);
  }

  void row(const std::vector<std::string>& cells) { add(cells); }

  const std::string& str() const noexcept { return text_; }

  void write(const std::string& path) const {
    write_file_bytes(path, std::vector<unsigned char>(text_.begin(), text_.end()));
  }

 private:
  void add(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw InvalidInput("csv: row width differs from the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t width_;
  std::string text_;
};

// Everything needed to repeat a run. Solvers are deterministic, so a rerun
// reproduces result.json byte for byte.
struct RunManifest {
  std::string command;
  std::string model;
  std::map<std::string, double> parameters;
  std::map<std::string, std::string> settings;  // command-specific flags
  std::vector<std::string> inputs;
  std::string out;
  double tol = 1e-6;
  std::optional<std::uint64_t> seed;
  std::string tv = "verbatim";
  std::string version = kToolVersion;

  Json to_json() const {
    Json j{{"command", command},   {"model", model},     {"parameters", parameters},
           {"settings", settings}, {"inputs", inputs},   {"out", out},
           {"tol", tol},           {"tv", tv},           {"tool_version", version}};
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    return j;
  }

  static RunManifest from_json(const Json& j) {
    RunManifest m;
    try {
      m.command = j.at("command").get<std::string>();
      m.model = j.value("model", std::string());
      m.parameters = j.value("parameters", std::map<std::string, double>{});
      m.settings = j.value("settings", std::map<std::string, std::string>{});
      m.inputs = j.value("inputs", std::vector<std::string>{});
      m.out = j.value("out", std::string());
      m.tol = j.value("tol", 1e-6);
      m.tv = j.value("tv", std::string("verbatim"));
      m.version = j.value("tool_version", std::string(kToolVersion));
      if (j.contains("seed") && !j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
    } catch (const Json::exception& e) {
      throw InvalidInput(std::string("manifest: ") + e.what());
    }
    if (m.command.empty()) throw InvalidInput("manifest: command missing");
    return m;
  }
};

}  // namespace hjd
