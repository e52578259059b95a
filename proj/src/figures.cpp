#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bfmix/calibration.hpp"

namespace bfmix {

namespace fs = std::filesystem;

std::string format_g9(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot rename into " + path.string());
    }
}

std::string fig1_csv(const std::vector<Fig1Record>& records) {
    std::string out = kFig1CsvHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.n) + ',' + std::to_string(r.replica) + ',' + format_g9(r.a0) + ',' +
               format_g9(r.mean_alpha) + ',' + format_g9(r.median_alpha) + ',' + format_g9(r.post_prob_alt) +
               ',' + format_g9(r.ess_alpha) + ',' + format_g9(r.accept_alpha) + ',' +
               format_g9(r.accept_mu) + ',' + r.status + '\n';
    }
    return out;
}

std::vector<Fig1Record> parse_fig1_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kFig1CsvHeader) {
        throw std::runtime_error("not a fig1 records CSV (unexpected header)");
    }
    std::vector<Fig1Record> records;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (int i = 0; i < 9; ++i) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                throw std::runtime_error("fig1 CSV line " + std::to_string(lineno) + ": too few fields");
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        cells.push_back(line.substr(start));
        try {
            Fig1Record r;
            r.n = std::stoi(cells[0]);
            r.replica = std::stoi(cells[1]);
            r.a0 = std::stod(cells[2]);
            r.mean_alpha = std::stod(cells[3]);
            r.median_alpha = std::stod(cells[4]);
            r.post_prob_alt = std::stod(cells[5]);
            r.ess_alpha = std::stod(cells[6]);
            r.accept_alpha = std::stod(cells[7]);
            r.accept_mu = std::stod(cells[8]);
            r.status = cells[9];
            records.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw std::runtime_error("fig1 CSV line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return records;
}

namespace {

constexpr const char* kWheat = "#f5deb3";
constexpr const char* kDarkWheat = "#cdaa7d";
constexpr const char* kBlue = "#4f81bd";

struct Panel {
    double width = 720, height = 420, left = 60, right = 20, top = 40, bottom = 50;
    double x0() const { return left; }
    double x1() const { return width - right; }
    double y_of(double v) const { return top + (1.0 - v) * (height - top - bottom); }
};

std::string svg_open(const Panel& p, const std::string& title) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << p.width << "\" height=\"" << p.height
      << "\" viewBox=\"0 0 " << p.width << ' ' << p.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << p.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = k / 4.0;
        s << "<line x1=\"" << p.x0() << "\" x2=\"" << p.x1() << "\" y1=\"" << p.y_of(v) << "\" y2=\""
          << p.y_of(v) << "\" stroke=\"#dddddd\"/>\n"
          << "<text x=\"" << p.x0() - 8 << "\" y=\"" << p.y_of(v) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << format_g9(v) << "</text>\n";
    }
    return s.str();
}

struct BoxStats {
    double lo_whisker, q1, median, q3, hi_whisker;
    std::vector<double> outliers;
};

BoxStats box_stats(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    BoxStats b{};
    b.q1 = sorted_quantile(v, 0.25);
    b.median = sorted_quantile(v, 0.5);
    b.q3 = sorted_quantile(v, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
    b.lo_whisker = b.q1;
    b.hi_whisker = b.q3;
    for (double x : v) {
        if (x < lo_fence || x > hi_fence) {
            b.outliers.push_back(x);
        } else {
            b.lo_whisker = std::min(b.lo_whisker, x);
            b.hi_whisker = std::max(b.hi_whisker, x);
        }
    }
    return b;
}

void draw_box(std::ostringstream& s, const Panel& p, double cx, double w, const BoxStats& b,
              const char* fill, const char* series) {
    s << "<g class=\"box\" data-series=\"" << series << "\">\n"
      << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << p.y_of(b.lo_whisker) << "\" y2=\""
      << p.y_of(b.hi_whisker) << "\" stroke=\"black\"/>\n"
      << "<rect x=\"" << cx - w / 2 << "\" y=\"" << p.y_of(b.q3) << "\" width=\"" << w << "\" height=\""
      << std::max(0.5, p.y_of(b.q1) - p.y_of(b.q3)) << "\" fill=\"" << fill << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << cx - w / 2 << "\" x2=\"" << cx + w / 2 << "\" y1=\"" << p.y_of(b.median)
      << "\" y2=\"" << p.y_of(b.median) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double o : b.outliers) {
        s << "<circle cx=\"" << cx << "\" cy=\"" << p.y_of(o) << "\" r=\"2\" fill=\"none\" stroke=\"black\"/>\n";
    }
    s << "</g>\n";
}

std::vector<int> sizes_of(const std::vector<Fig1Record>& records) {
    std::vector<int> sizes;
    for (const auto& r : records) sizes.push_back(r.n);
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    return sizes;
}

std::string boxplot_svg(const std::vector<Fig1Record>& records, double a0) {
    const std::vector<int> sizes = sizes_of(records);
    Panel p;
    std::ostringstream s;
    s << svg_open(p, "posterior mean / median of alpha and P(N(mu,1) | x), a0 = " + format_g9(a0));
    const double group_w = (p.x1() - p.x0()) / static_cast<double>(sizes.size());
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        std::vector<double> means, medians, probs;
        for (const auto& r : records) {
            if (r.n != sizes[g] || r.a0 != a0 || !r.ok()) continue;
            means.push_back(r.mean_alpha);
            medians.push_back(r.median_alpha);
            probs.push_back(r.post_prob_alt);
        }
        const double cx = p.x0() + (g + 0.5) * group_w;
        s << "<g class=\"abscissa\" data-n=\"" << sizes[g] << "\">\n";
        if (!means.empty()) {
            const double bw = group_w / 5.0;
            draw_box(s, p, cx - bw * 1.2, bw, box_stats(means), kWheat, "mean_alpha");
            draw_box(s, p, cx, bw, box_stats(medians), kDarkWheat, "median_alpha");
            draw_box(s, p, cx + bw * 1.2, bw, box_stats(probs), kBlue, "post_prob_alt");
        }
        s << "<text x=\"" << cx << "\" y=\"" << p.height - p.bottom + 18
          << "\" text-anchor=\"middle\" font-size=\"12\">n=" << sizes[g] << "</text>\n</g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string trend_svg(const std::vector<Fig1Record>& records, const std::vector<double>& a0s) {
    const std::vector<int> sizes = sizes_of(records);
    Panel p;
    std::ostringstream s;
    s << svg_open(p, "averages across sample sizes");
    const double step = sizes.size() > 1 ? (p.x1() - p.x0() - 40.0) / static_cast<double>(sizes.size() - 1) : 0.0;
    auto x_of = [&](std::size_t g) { return p.x0() + 20.0 + g * step; };
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        s << "<g class=\"abscissa\" data-n=\"" << sizes[g] << "\"><text x=\"" << x_of(g) << "\" y=\""
          << p.height - p.bottom + 18 << "\" text-anchor=\"middle\" font-size=\"12\">n=" << sizes[g]
          << "</text></g>\n";
    }
    auto average = [&](int n, double a0, double Fig1Record::*field) {
        double sum = 0.0;
        int count = 0;
        for (const auto& r : records) {
            if (r.n == n && r.a0 == a0 && r.ok()) {
                sum += r.*field;
                ++count;
            }
        }
        return count ? sum / count : std::nan("");
    };
    auto polyline = [&](double a0, double Fig1Record::*field, const char* colour, const char* dash,
                        const std::string& series) {
        s << "<polyline class=\"trend\" data-series=\"" << series << "\" fill=\"none\" stroke=\"" << colour
          << "\" stroke-width=\"2\"" << dash << " points=\"";
        for (std::size_t g = 0; g < sizes.size(); ++g) {
            const double v = average(sizes[g], a0, field);
            if (std::isfinite(v)) s << x_of(g) << ',' << p.y_of(v) << ' ';
        }
        s << "\"/>\n";
    };
    const char* palette[] = {"#8b4513", "#d2691e", "#daa520", "#a0522d", "#cd853f"};
    double legend_y = p.top + 10;
    for (std::size_t i = 0; i < a0s.size(); ++i) {
        const char* colour = palette[i % 5];
        polyline(a0s[i], &Fig1Record::mean_alpha, colour, "", "mean_alpha a0=" + format_g9(a0s[i]));
        polyline(a0s[i], &Fig1Record::median_alpha, colour, " stroke-dasharray=\"6,4\"",
                 "median_alpha a0=" + format_g9(a0s[i]));
        s << "<text x=\"" << p.x1() - 170 << "\" y=\"" << legend_y << "\" font-size=\"11\" fill=\"" << colour
          << "\">alpha mean (solid) / median (dashed), a0=" << format_g9(a0s[i]) << "</text>\n";
        legend_y += 14;
    }
    if (!a0s.empty()) polyline(a0s.front(), &Fig1Record::post_prob_alt, kBlue, "", "post_prob_alt");
    s << "<text x=\"" << p.x1() - 170 << "\" y=\"" << legend_y << "\" font-size=\"11\" fill=\"" << kBlue
      << "\">P(N(mu,1) | x)</text>\n</svg>\n";
    return s.str();
}

}  // namespace

std::vector<fs::path> emit_fig1_outputs(const std::vector<Fig1Record>& records, const fs::path& out_dir) {
    if (records.empty()) throw std::domain_error("no fig1 records to write");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw std::runtime_error("cannot create output directory " + out_dir.string());

    std::vector<double> a0s;
    for (const auto& r : records) {
        if (std::find(a0s.begin(), a0s.end(), r.a0) == a0s.end()) a0s.push_back(r.a0);
    }
    std::sort(a0s.begin(), a0s.end());

    std::vector<fs::path> written;
    const fs::path csv = out_dir / "records.csv";
    write_file_atomic(csv, fig1_csv(records));
    written.push_back(csv);
    for (double a0 : a0s) {
        const fs::path box = out_dir / ("boxplot_a0_" + format_g9(a0) + ".svg");
        write_file_atomic(box, boxplot_svg(records, a0));
        written.push_back(box);
    }
    const fs::path trend = out_dir / "trend.svg";
    write_file_atomic(trend, trend_svg(records, a0s));
    written.push_back(trend);
    return written;
}

}  // namespace bfmix
