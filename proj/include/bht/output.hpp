#pragma once

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <unistd.h>
#include <vector>

#include "bht/error.hpp"

#ifndef BHT_VERSION
#define BHT_VERSION "0.1.0"
#endif

namespace bht {

inline constexpr std::string_view version = BHT_VERSION;

/// Shortest round-trip-safe text for a double: 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC 4180: quote fields holding a comma, quote, CR or LF; double inner quotes.
inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& operator<<(double v) { return add(format_double(v)); }
    Row& operator<<(int v) { return add(std::to_string(v)); }
    Row& operator<<(long v) { return add(std::to_string(v)); }
    Row& operator<<(std::size_t v) { return add(std::to_string(v)); }
    Row& operator<<(bool v) { return add(v ? "1" : "0"); }
    Row& operator<<(std::string_view v) { return add(std::string(v)); }
    Row& operator<<(const char* v) { return add(v); }

   private:
    friend class CsvTable;
    Row& add(std::string s) {
      fields_.push_back(std::move(s));
      return *this;
    }
    std::vector<std::string> fields_;
  };

  Row& row() {
    rows_.emplace_back();
    return rows_.back();
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& f) {
      if (f.size() != header_.size())
        throw Error(ErrorKind::invalid_argument, "CSV row has " + std::to_string(f.size()) + " fields, header has " +
                                                     std::to_string(header_.size()));
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(f[i]);
      }
      out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r.fields_);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

/// Writes into a temporary sibling and renames it over `path`, so readers see
/// either the old file or the complete new one.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorKind::io, "write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot rename onto '" + path.string() + "'");
  }
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string command;
  std::string config_snapshot;  ///< serialized config, enough to rerun
  std::uint64_t seed = 0;
  int threads = 1;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<std::string> files;
  std::string verdict;  ///< "pass" or "fail"
  nlohmann::json summary = nlohmann::json::object();

  nlohmann::json to_json() const {
    return {{"command", command},
            {"version", std::string(version)},
            {"seed", seed},
            {"threads", threads},
            {"started", utc_timestamp(started)},
            {"finished", utc_timestamp(finished)},
            {"files", files},
            {"verdict", verdict},
            {"summary", summary},
            {"config", config_snapshot}};
  }
};

}  // namespace bht
