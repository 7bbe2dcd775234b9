#include "hebb/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace hebb::harness {

namespace {

// ---- tiny SVG writer ----

class svg_canvas {
public:
    svg_canvas(double width, double height) : w_(width), h_(height)
    {
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
            << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none")
    {
        os_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
            << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke = "black",
              double width = 1.0)
    {
        os_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
            << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke)
    {
        os_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts)
            os_ << x << ',' << y << ' ';
        os_ << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 11,
              const std::string& anchor = "start")
    {
        os_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
            << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
    }

    void save(const fs::path& path)
    {
        os_ << "</svg>\n";
        std::ofstream f(path);
        f << os_.str();
    }

private:
    double w_, h_;
    std::ostringstream os_;
};

std::string heat_color(double v)
{
    // 0 -> dark blue, 1 -> yellow
    v = std::clamp(v, 0.0, 1.0);
    const int r = int(30 + 225 * v);
    const int g = int(30 + 200 * v);
    const int b = int(120 * (1.0 - v) + 40);
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

const char* line_colors[] = { "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf" };

json load_manifest(const std::string& results_dir)
{
    const fs::path path = fs::path(results_dir) / "manifest.json";
    if (!fs::exists(path))
        throw std::runtime_error("no manifest.json in " + results_dir);
    json doc;
    std::ifstream f(path);
    f >> doc;
    return doc;
}

struct stage3_row {
    int hidden;
    double eta;
    json cell;
};

std::vector<stage3_row> stage3_rows(const json& doc)
{
    std::vector<stage3_row> rows;
    for (const auto& [id, cell] : doc["cells"].items()) {
        if (id.rfind("stage3:", 0) != 0 || cell.value("status", "") == "failed")
            continue;
        rows.push_back({ cell["hidden_layers"].get<int>(),
                         std::stod(cell["learning_rate"].get<std::string>()), cell });
    }
    std::sort(rows.begin(), rows.end(), [](const stage3_row& a, const stage3_row& b) {
        if (a.hidden != b.hidden)
            return a.hidden < b.hidden;
        return a.eta > b.eta;
    });
    return rows;
}

// reference learning rate for the per-label figure: 1e-7 when present,
// otherwise the smallest swept rate
double figure4_eta(const std::vector<stage3_row>& rows)
{
    double best = -1.0;
    for (const auto& r : rows) {
        if (std::fabs(r.eta - 1e-7) < 1e-12)
            return r.eta;
        if (best < 0.0 || r.eta < best)
            best = r.eta;
    }
    if (best < 0.0)
        throw std::runtime_error("no stage3 cells available");
    return best;
}

void figure_1(const json& doc, const std::string& which, const fs::path& dir)
{
    struct row {
        int hidden;
        double eta;
        json cell;
    };
    std::vector<row> rows;
    for (const auto& [id, cell] : doc["cells"].items()) {
        if (id.rfind("stage1:", 0) != 0 || cell.value("status", "") == "failed")
            continue;
        rows.push_back({ cell["hidden_layers"].get<int>(),
                         std::stod(cell["learning_rate"].get<std::string>()), cell });
    }
    if (rows.empty())
        throw std::runtime_error("no stage1 cells available");

    if (which == "1a") {
        // accuracy vs depth: Hebbian at the reference rate against the eta=0 baseline
        double ref_eta = -1.0;
        for (const auto& r : rows)
            if (r.eta > 0.0 && (std::fabs(r.eta - 1e-7) < 1e-12 || ref_eta < 0.0))
                ref_eta = r.eta;
        std::map<int, std::array<double, 4>> series; // H -> {heb_euc, heb_cos, base_euc, base_cos}
        std::set<int> have;
        for (const auto& r : rows) {
            if (std::fabs(r.eta - ref_eta) < 1e-18 && ref_eta > 0.0) {
                series[r.hidden][0] = r.cell["accuracy_euclidean"].get<double>();
                series[r.hidden][1] = r.cell["accuracy_cosine"].get<double>();
                have.insert(r.hidden);
            } else if (r.eta == 0.0) {
                series[r.hidden][2] = r.cell["accuracy_euclidean"].get<double>();
                series[r.hidden][3] = r.cell["accuracy_cosine"].get<double>();
            }
        }
        std::ofstream f(dir / "figure1a.csv");
        f << "hidden_layers,variant,metric,accuracy\n";
        for (const auto& [h, v] : series) {
            if (have.count(h))
                f << h << ",hebbian,euclidean," << format_accuracy(v[0]) << '\n'
                  << h << ",hebbian,cosine," << format_accuracy(v[1]) << '\n';
            f << h << ",baseline,euclidean," << format_accuracy(v[2]) << '\n'
              << h << ",baseline,cosine," << format_accuracy(v[3]) << '\n';
        }

        svg_canvas svg(520, 360);
        const double x0 = 60, y0 = 310, pw = 420, ph = 260;
        svg.line(x0, y0, x0 + pw, y0);
        svg.line(x0, y0, x0, y0 - ph);
        svg.text(260, 345, "hidden layers", 12, "middle");
        svg.text(15, 180, "accuracy", 12, "middle");
        int hmin = series.begin()->first, hmax = series.rbegin()->first;
        auto sx = [&](int h) {
            return hmax == hmin ? x0 + pw / 2 : x0 + pw * double(h - hmin) / (hmax - hmin);
        };
        auto sy = [&](double a) { return y0 - ph * a; };
        for (int s = 0; s < 4; ++s) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& [h, v] : series)
                if (s >= 2 || have.count(h))
                    pts.push_back({ sx(h), sy(v[s]) });
            svg.polyline(pts, line_colors[s]);
        }
        svg.text(x0 + 5, 30, "hebbian euclidean", 10);
        svg.rect(x0 - 12, 22, 8, 8, line_colors[0]);
        svg.text(x0 + 5, 45, "hebbian cosine", 10);
        svg.rect(x0 - 12, 37, 8, 8, line_colors[1]);
        svg.text(x0 + 5, 60, "baseline euclidean", 10);
        svg.rect(x0 - 12, 52, 8, 8, line_colors[2]);
        svg.text(x0 + 5, 75, "baseline cosine", 10);
        svg.rect(x0 - 12, 67, 8, 8, line_colors[3]);
        for (const auto& [h, v] : series)
            svg.text(sx(h), y0 + 14, std::to_string(h), 10, "middle");
        svg.save(dir / "figure1a.svg");
    } else {
        // accuracy vs learning rate at fixed depth (logarithmic rate axis)
        int ref_h = rows.front().hidden;
        for (const auto& r : rows)
            if (r.hidden == 3)
                ref_h = 3;
        std::map<double, std::array<double, 2>, std::greater<double>> series;
        for (const auto& r : rows)
            if (r.hidden == ref_h && r.eta > 0.0)
                series[r.eta] = { r.cell["accuracy_euclidean"].get<double>(),
                                  r.cell["accuracy_cosine"].get<double>() };
        if (series.empty())
            throw std::runtime_error("no nonzero-rate stage1 cells for figure 1b");
        std::ofstream f(dir / "figure1b.csv");
        f << "learning_rate,metric,accuracy\n";
        for (const auto& [eta, v] : series)
            f << format_eta(eta) << ",euclidean," << format_accuracy(v[0]) << '\n'
              << format_eta(eta) << ",cosine," << format_accuracy(v[1]) << '\n';

        svg_canvas svg(520, 360);
        const double x0 = 60, y0 = 310, pw = 420, ph = 260;
        svg.line(x0, y0, x0 + pw, y0);
        svg.line(x0, y0, x0, y0 - ph);
        svg.text(260, 345, "learning rate (log scale)", 12, "middle");
        const double lmin = std::log10(series.begin()->first);  // largest eta
        const double lmax = std::log10(series.rbegin()->first); // smallest eta
        auto sx = [&](double eta) {
            const double l = std::log10(eta);
            return lmin == lmax ? x0 + pw / 2 : x0 + pw * (lmin - l) / (lmin - lmax);
        };
        auto sy = [&](double a) { return y0 - ph * a; };
        for (int s = 0; s < 2; ++s) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& [eta, v] : series)
                pts.push_back({ sx(eta), sy(v[s]) });
            svg.polyline(pts, line_colors[s]);
        }
        for (const auto& [eta, v] : series)
            svg.text(sx(eta), y0 + 14, format_eta(eta), 9, "middle");
        svg.text(x0 + 5, 30, "euclidean", 10);
        svg.rect(x0 - 12, 22, 8, 8, line_colors[0]);
        svg.text(x0 + 5, 45, "cosine", 10);
        svg.rect(x0 - 12, 37, 8, 8, line_colors[1]);
        svg.save(dir / "figure1b.svg");
    }
}

void figure_2(const json& doc, const fs::path& dir)
{
    json comparisons;
    for (const auto& [id, cell] : doc["cells"].items())
        if (id.rfind("stage2:", 0) == 0 && cell.contains("comparisons"))
            comparisons = cell["comparisons"];
    if (comparisons.is_null())
        throw std::runtime_error("no stage2 cells available");

    std::ofstream f(dir / "figure2.csv");
    f << "probe_label,opponent,wins,losses,ties\n";
    for (const auto& row : comparisons)
        f << row["probe_label"].get<int>() << ',' << row["opponent"].get<std::string>() << ','
          << row["wins"].get<size_t>() << ',' << row["losses"].get<size_t>() << ','
          << row["ties"].get<size_t>() << '\n';

    // one band per probe label, one bar per opponent, bar height = win fraction
    svg_canvas svg(760, 1050);
    for (int probe = 0; probe < 10; ++probe) {
        const double band_y = 30 + probe * 100;
        svg.text(10, band_y + 50, "label " + std::to_string(probe), 11);
        int slot = 0;
        for (const auto& row : comparisons) {
            if (row["probe_label"].get<int>() != probe)
                continue;
            const double wins = double(row["wins"].get<size_t>());
            const double total = wins + double(row["losses"].get<size_t>()) +
                                 double(row["ties"].get<size_t>());
            const double frac = total > 0 ? wins / total : 0.0;
            const double x = 90 + slot * 54;
            svg.rect(x, band_y + 80 - 70 * frac, 36, 70 * frac, "#4c78a8");
            svg.line(x - 4, band_y + 80 - 35, x + 40, band_y + 80 - 35, "#cccccc", 0.5);
            svg.text(x + 18, band_y + 93, row["opponent"].get<std::string>(), 8, "middle");
            ++slot;
        }
    }
    svg.save(dir / "figure2.svg");
}

void figure_3(const json& doc, const fs::path& dir)
{
    const auto rows = stage3_rows(doc);
    if (rows.empty())
        throw std::runtime_error("no stage3 cells available");

    std::ofstream f(dir / "figure3.csv");
    f << "hidden_layers,learning_rate,accuracy,diverged\n";
    for (const auto& r : rows)
        f << r.hidden << ',' << r.cell["learning_rate"].get<std::string>() << ','
          << format_accuracy(r.cell["accuracy"].get<double>()) << ','
          << (r.cell["diverged"].get<bool>() ? 1 : 0) << '\n';

    std::set<int> hs;
    std::set<double, std::greater<double>> etas; // large rate at the top
    for (const auto& r : rows) {
        hs.insert(r.hidden);
        etas.insert(r.eta);
    }
    const double cell_w = 46, cell_h = 34, x0 = 80, y0 = 40;
    svg_canvas svg(x0 + cell_w * hs.size() + 40, y0 + cell_h * etas.size() + 60);
    for (const auto& r : rows) {
        const int col = int(std::distance(hs.begin(), hs.find(r.hidden)));
        const int row_i = int(std::distance(etas.begin(), etas.find(r.eta)));
        const double acc = r.cell["accuracy"].get<double>();
        svg.rect(x0 + col * cell_w, y0 + row_i * cell_h, cell_w - 1, cell_h - 1, heat_color(acc));
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.2f", acc);
        svg.text(x0 + col * cell_w + cell_w / 2, y0 + row_i * cell_h + cell_h / 2 + 4, buf, 9,
                 "middle");
    }
    int col = 0;
    for (int h : hs)
        svg.text(x0 + (col++) * cell_w + cell_w / 2, y0 - 8, std::to_string(h), 10, "middle");
    int row_i = 0;
    for (double e : etas)
        svg.text(x0 - 8, y0 + (row_i++) * cell_h + cell_h / 2 + 4, format_eta(e), 10, "end");
    svg.text(x0 + cell_w * hs.size() / 2, y0 + cell_h * etas.size() + 30, "hidden layers", 11,
             "middle");
    svg.save(dir / "figure3.svg");
}

void figure_4(const json& doc, const fs::path& dir)
{
    const auto rows = stage3_rows(doc);
    if (rows.empty())
        throw std::runtime_error("no stage3 cells available");
    const double eta = figure4_eta(rows);

    std::ofstream f(dir / "figure4.csv");
    f << "hidden_layers,label,accuracy\n";
    std::vector<const stage3_row*> picked;
    for (const auto& r : rows)
        if (r.eta == eta)
            picked.push_back(&r);
    for (const auto* r : picked)
        for (int label = 0; label < 10; ++label)
            f << r->hidden << ',' << label << ','
              << format_accuracy(r->cell["per_label"][label].get<double>()) << '\n';

    // grouped bars: one group per depth, one bar per label
    const double group_w = 10 * 11 + 20, x0 = 50, y0 = 260, ph = 200;
    svg_canvas svg(x0 + group_w * picked.size() + 20, 320);
    for (size_t g = 0; g < picked.size(); ++g) {
        const double gx = x0 + g * group_w;
        for (int label = 0; label < 10; ++label) {
            const double acc = picked[g]->cell["per_label"][label].get<double>();
            svg.rect(gx + label * 11, y0 - ph * acc, 9, ph * acc, line_colors[label]);
        }
        svg.text(gx + 55, y0 + 16, "H=" + std::to_string(picked[g]->hidden), 10, "middle");
    }
    svg.line(x0 - 5, y0, x0 + group_w * picked.size(), y0);
    for (int label = 0; label < 10; ++label) {
        svg.rect(x0 + label * 60.0, 285, 8, 8, line_colors[label]);
        svg.text(x0 + label * 60.0 + 12, 293, std::to_string(label), 10);
    }
    svg.save(dir / "figure4.svg");
}

} // namespace

int emit_figure_data(const std::string& results_dir, const std::string& figure)
{
    try {
        const json doc = load_manifest(results_dir);
        const fs::path dir(results_dir);
        if (figure == "1a" || figure == "1b")
            figure_1(doc, figure, dir);
        else if (figure == "2")
            figure_2(doc, dir);
        else if (figure == "3")
            figure_3(doc, dir);
        else if (figure == "4")
            figure_4(doc, dir);
        else {
            std::fprintf(stderr, "unknown figure id: %s (expected 1a, 1b, 2, 3 or 4)\n",
                         figure.c_str());
            return exit_config_error;
        }
        return exit_ok;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_missing_results;
    }
}

} // namespace hebb::harness
