#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace orbitlab {

// Round-trip-safe rendering: 17 significant digits.
std::string format_double(double v);

/// Line-oriented CSV accumulator.  Content is built fully in memory so that a
/// run's bytes can be compared across thread counts before touching disk.
class CsvBuilder {
public:
    void comment(const std::string& text);         // "# text"
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(std::uint64_t v) { return std::to_string(v); }
    const std::string& str() const { return data_; }

private:
    std::string data_;
};

std::string sha256_hex(const std::string& bytes);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

/// Every run writes a manifest next to its outputs: the full configuration,
/// tool version, base seed and a content hash per data file.  Reruns from the
/// same manifest must reproduce each file byte for byte.
struct Manifest {
    std::string tool_version;
    std::string config_json;   // canonical config text
    std::string config_hash;
    std::map<std::string, std::string> file_hashes; // filename -> sha256

    std::string to_json() const;
};

void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);

/// Minimal SVG polyline chart; data CSVs stay the source of truth.
struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
};

std::string render_svg_chart(const std::string& title, const std::vector<SvgSeries>& series, bool log_x, bool log_y);

extern const char* kToolVersion;

} // namespace orbitlab
