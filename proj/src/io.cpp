#include "varlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace varlab::io {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Csv::Csv(const std::vector<std::string>& header) : width_(header.size()) { append(header); }

void Csv::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::invalid_argument("Csv: column count mismatch");
    append(cells);
}

void Csv::append(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += cells[i];
    }
    buf_ += '\n';
}

nlohmann::json RunManifest::to_json() const {
    return nlohmann::json{{"subcommand", subcommand},
                          {"parameters", parameters},
                          {"master_seed", master_seed},
                          {"artifact_version", artifact_version},
                          {"outputs", outputs},
                          {"duration_seconds", duration_seconds}};
}

void RunManifest::write(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json().dump(2) + "\n");
}

}  // namespace varlab::io
