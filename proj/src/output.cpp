#include "fgrlab/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fgrlab/grid.hpp"

namespace fgrlab {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::string csv_string(const CsvTable& t) {
    std::string s;
    for (std::size_t i = 0; i < t.header.size(); ++i) s += (i ? "," : "") + t.header[i];
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            s += format_double(row[i]);
        }
        s += '\n';
    }
    return s;
}

namespace {

std::string escape_xml(const std::string& in) {
    std::string out;
    for (char c : in) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series, bool log_y) {
    const double W = 640, H = 420, ml = 80, mr = 20, mt = 40, mb = 60;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x0 < x1)) x0 -= 0.5, x1 += 0.5;
    if (!(y0 < y1)) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (ty(y) - y0) / (y1 - y0) * (H - mt - mb); };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape_xml(title)
      << "</text>\n";
    o << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        const double xp = ml + (W - ml - mr) * i / 4.0, yp = H - mb - (H - mt - mb) * i / 4.0;
        o << "<text x=\"" << xp << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << tick(xv) << "</text>\n";
        o << "<text x=\"" << ml - 6 << "\" y=\"" << yp + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
          << (log_y ? "1e" + tick(yv) : tick(yv)) << "</text>\n";
    }
    o << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << escape_xml(xlabel) << "</text>\n";
    o << "<text x=\"18\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << H / 2 << ")\">" << escape_xml(ylabel) << "</text>\n";
    if (y0 < 0 && y1 > 0 && !log_y)
        o << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << W - mr << "\" y2=\"" << py(0)
          << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (std::size_t k = 0; k < series.size(); ++k) {
        o << "<polyline fill=\"none\" stroke=\"" << colors[k % 4] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[k].x.size(); ++i) {
            if (!std::isfinite(series[k].x[i]) || !std::isfinite(series[k].y[i])) continue;
            o << tick(px(series[k].x[i])) << ',' << tick(py(series[k].y[i])) << ' ';
        }
        o << "\"/>\n";
        if (!series[k].label.empty())
            o << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 14 * (k + 1) << "\" text-anchor=\"end\" fill=\""
              << colors[k % 4] << "\" font-size=\"12\">" << escape_xml(series[k].label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::Data, "sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

RunManifest::RunManifest(std::string out_dir, std::string command, nlohmann::json config)
    : dir_(std::move(out_dir)), command_(std::move(command)), config_(std::move(config)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Usage, "cannot create output directory " + dir_ + ": " + ec.message());
}

void RunManifest::write(const std::string& rel_path, const std::string& content) {
    const fs::path full = fs::path(dir_) / rel_path;
    if (full.has_parent_path()) fs::create_directories(full.parent_path());
    std::ofstream f(full, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorKind::Data, "cannot write " + full.string());
    files_.push_back({rel_path, sha256_hex(content), content.size()});
}

void RunManifest::anomaly(const std::string& note) { anomalies_.push_back(note); }

nlohmann::json RunManifest::to_json(double wall_seconds) const {
    nlohmann::json j;
    j["tool"] = "fgrlab";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["config"] = config_;
    j["wall_clock_seconds"] = wall_seconds;
    j["files"] = nlohmann::json::array();
    for (const auto& e : files_) j["files"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    j["anomalies"] = anomalies_;
    return j;
}

void RunManifest::finish(double wall_seconds) const {
    std::ofstream f(fs::path(dir_) / "manifest.json", std::ios::binary);
    f << to_json(wall_seconds).dump(2) << '\n';
}

}  // namespace fgrlab
