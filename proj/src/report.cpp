#include "cloudshift/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cloudshift/errors.hpp"

namespace cloudshift::report {

using bench::AggregateReport;
using bench::EfficiencyRow;
using nlohmann::json;

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.push_back("");
    }
    return out;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(s, &used);
        if (used != s.size()) {
            raise(ErrorKind::parse, what + " '" + s + "' is not an integer");
        }
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        raise(ErrorKind::parse, what + " '" + s + "' is not an integer");
    }
}

}  // namespace

void write_efficiency_csv(const std::string& path, const std::vector<EfficiencyRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        raise(ErrorKind::io, "cannot write CSV '" + path + "'");
    }
    out << kEfficiencyCsvHeader << "\n";
    for (const EfficiencyRow& row : rows) {
        out << row.item_id << ',' << row.save_eff_ms << ',' << row.transfer_eff_ms << ','
            << row.total_eff_ms << "\n";
    }
    if (!out) {
        raise(ErrorKind::io, "write failure on CSV '" + path + "'");
    }
}

std::vector<EfficiencyRow> read_efficiency_csv(const std::string& path,
                                               engine::Category category) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorKind::io, "cannot open CSV '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        raise(ErrorKind::parse, "CSV '" + path + "' is empty (missing header)");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kEfficiencyCsvHeader) {
        raise(ErrorKind::parse, "CSV '" + path + "' must carry the header '" +
                                    std::string(kEfficiencyCsvHeader) + "', found '" + line + "'");
    }
    std::vector<EfficiencyRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != 4) {
            raise(ErrorKind::parse, "CSV '" + path + "' line " + std::to_string(line_no) +
                                        " has " + std::to_string(fields.size()) +
                                        " fields, expected 4");
        }
        EfficiencyRow row;
        row.item_id = fields[0];
        row.category = category;
        row.save_eff_ms = parse_int(fields[1], "STE");
        row.transfer_eff_ms = parse_int(fields[2], "TTE");
        row.total_eff_ms = parse_int(fields[3], "TTTE");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string aggregate_to_json(const AggregateReport& report, int indent) {
    json per_category = json::object();
    for (const auto& [category, counts] : report.per_category) {
        per_category[engine::to_string(category)] =
            json{{"success", counts.success}, {"failure", counts.failure}};
    }
    return json{{"per_category", per_category},
                {"success_rate", report.success_rate},
                {"total_items", report.total_items()},
                {"total_success", report.total_success()}}
        .dump(indent);
}

void write_aggregate_json(const std::string& path, const AggregateReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        raise(ErrorKind::io, "cannot write '" + path + "'");
    }
    out << aggregate_to_json(report) << "\n";
}

std::string aggregate_to_svg(const AggregateReport& report) {
    constexpr int width = 720;
    constexpr int height = 400;
    constexpr int margin_left = 60;
    constexpr int margin_bottom = 70;
    constexpr int margin_top = 40;
    const int plot_h = height - margin_top - margin_bottom;

    std::uint64_t max_count = 1;
    for (const auto& [category, counts] : report.per_category) {
        max_count = std::max({max_count, counts.success, counts.failure});
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "  <text x=\"" << width / 2
        << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << "Successful and failed cases per category</text>\n";

    const std::size_t groups = std::max<std::size_t>(1, report.per_category.size());
    const int group_w = (width - margin_left - 20) / static_cast<int>(groups);
    const int bar_w = std::max(12, group_w / 3);

    // y axis
    svg << "  <line x1=\"" << margin_left << "\" y1=\"" << margin_top << "\" x2=\"" << margin_left
        << "\" y2=\"" << margin_top + plot_h << "\" stroke=\"#444\"/>\n";
    svg << "  <line x1=\"" << margin_left << "\" y1=\"" << margin_top + plot_h << "\" x2=\""
        << width - 20 << "\" y2=\"" << margin_top + plot_h << "\" stroke=\"#444\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const std::uint64_t value = max_count * static_cast<std::uint64_t>(tick) / 4;
        const int y = margin_top + plot_h - static_cast<int>(plot_h * tick / 4);
        svg << "  <text x=\"" << margin_left - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << value
            << "</text>\n";
    }

    int group_index = 0;
    for (const auto& [category, counts] : report.per_category) {
        const int x0 = margin_left + group_index * group_w + group_w / 2 - bar_w;
        auto bar = [&](int x, std::uint64_t value, const char* fill, const char* label) {
            const int h = static_cast<int>(static_cast<double>(plot_h) *
                                           static_cast<double>(value) /
                                           static_cast<double>(max_count));
            const int y = margin_top + plot_h - h;
            svg << "  <rect class=\"" << label << "\" x=\"" << x << "\" y=\"" << y << "\" width=\""
                << bar_w << "\" height=\"" << h << "\" fill=\"" << fill << "\"/>\n";
            svg << "  <text x=\"" << x + bar_w / 2 << "\" y=\"" << y - 4
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
                << value << "</text>\n";
        };
        bar(x0, counts.success, "#2e7d32", "success");
        bar(x0 + bar_w + 4, counts.failure, "#c62828", "failure");
        svg << "  <text x=\"" << x0 + bar_w << "\" y=\"" << margin_top + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << engine::to_string(category) << "</text>\n";
        ++group_index;
    }

    // legend
    svg << "  <rect x=\"" << margin_left << "\" y=\"" << height - 34
        << "\" width=\"14\" height=\"14\" fill=\"#2e7d32\"/>\n";
    svg << "  <text x=\"" << margin_left + 20 << "\" y=\"" << height - 22
        << "\" font-family=\"sans-serif\" font-size=\"12\">success</text>\n";
    svg << "  <rect x=\"" << margin_left + 90 << "\" y=\"" << height - 34
        << "\" width=\"14\" height=\"14\" fill=\"#c62828\"/>\n";
    svg << "  <text x=\"" << margin_left + 110 << "\" y=\"" << height - 22
        << "\" font-family=\"sans-serif\" font-size=\"12\">failure</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_aggregate_svg(const std::string& path, const AggregateReport& report) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        raise(ErrorKind::io, "cannot write '" + path + "'");
    }
    out << aggregate_to_svg(report);
}

std::string render_top_rows(const std::vector<EfficiencyRow>& rows, std::size_t top_n) {
    std::vector<const EfficiencyRow*> sorted;
    sorted.reserve(rows.size());
    for (const EfficiencyRow& row : rows) sorted.push_back(&row);
    std::stable_sort(sorted.begin(), sorted.end(), [](const EfficiencyRow* a,
                                                      const EfficiencyRow* b) {
        return a->total_eff_ms > b->total_eff_ms;
    });
    if (sorted.size() > top_n) sorted.resize(top_n);

    std::ostringstream out;
    out << "item_id                 STE (ms)    TTE (ms)   TTTE (ms)\n";
    out << "--------------------  ----------  ----------  ----------\n";
    for (const EfficiencyRow* row : sorted) {
        std::ostringstream line;
        line.setf(std::ios::left);
        line.width(22);
        line << row->item_id.substr(0, 20);
        line.unsetf(std::ios::left);
        line.width(10);
        line << row->save_eff_ms;
        line << "  ";
        line.width(10);
        line << row->transfer_eff_ms;
        line << "  ";
        line.width(10);
        line << row->total_eff_ms;
        out << line.str() << "\n";
    }
    return out.str();
}

std::string render_aggregate(const AggregateReport& report) {
    std::ostringstream out;
    out << "category      success  failure\n";
    out << "------------  -------  -------\n";
    for (const auto& [category, counts] : report.per_category) {
        std::ostringstream line;
        line.setf(std::ios::left);
        line.width(14);
        line << engine::to_string(category);
        line.unsetf(std::ios::left);
        line.width(7);
        line << counts.success;
        line << "  ";
        line.width(7);
        line << counts.failure;
        out << line.str() << "\n";
    }
    out << "\noverall success rate: " << report.success_rate * 100.0 << "% ("
        << report.total_success() << "/" << report.total_items() << ")\n";
    return out.str();
}

}  // namespace cloudshift::report
