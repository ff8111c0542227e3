#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fgrlab {

inline constexpr const char* kToolVersion = "1.0.0";

// %.17g with '.' decimal separator regardless of locale
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
// header line then one line per row, '\n' endings
std::string csv_string(const CsvTable& t);

struct SvgSeries {
    std::vector<double> x, y;
    std::string label;
};
// polyline chart with axes, tick labels and a title
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series, bool log_y = false);

std::string sha256_hex(const std::string& data);

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::size_t bytes = 0;
};

// files written below one directory, hashed as they are written
class RunManifest {
public:
    RunManifest(std::string out_dir, std::string command, nlohmann::json config);
    const std::string& dir() const { return dir_; }
    void write(const std::string& rel_path, const std::string& content);
    void anomaly(const std::string& note);
    const std::vector<ManifestEntry>& files() const { return files_; }
    const std::vector<std::string>& anomalies() const { return anomalies_; }
    nlohmann::json to_json(double wall_seconds) const;
    // writes manifest.json (not listed in itself)
    void finish(double wall_seconds) const;

private:
    std::string dir_, command_;
    nlohmann::json config_;
    std::vector<ManifestEntry> files_;
    std::vector<std::string> anomalies_;
};

}  // namespace fgrlab
