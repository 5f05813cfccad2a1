#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace varlab::io {

/// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

/// Write via a temp file + rename so interrupted runs never leave a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Row-oriented CSV builder; every cell already formatted.
class Csv {
  public:
    explicit Csv(const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return buf_; }
    void write(const std::filesystem::path& path) const { write_file_atomic(path, buf_); }

  private:
    void append(const std::vector<std::string>& cells);
    std::string buf_;
    std::size_t width_;
};

struct RunManifest {
    std::string subcommand;
    nlohmann::json parameters;
    std::uint64_t master_seed = 0;
    std::string artifact_version = "1.0.0";
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;

    nlohmann::json to_json() const;
    void write(const std::filesystem::path& path) const;
};

}  // namespace varlab::io
