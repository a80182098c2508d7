#pragma once

/// Report emission: efficiency CSVs (item_id, STE, TTE, TTTE), the
/// aggregate JSON/SVG outputs, and plain-text summary tables.

#include <string>
#include <vector>

#include "cloudshift/bench.hpp"

namespace cloudshift::report {

inline constexpr const char* kEfficiencyCsvHeader = "item_id,STE,TTE,TTTE";

void write_efficiency_csv(const std::string& path, const std::vector<bench::EfficiencyRow>& rows);

/// Throws Error{parse} when the header or a row does not match the schema.
std::vector<bench::EfficiencyRow> read_efficiency_csv(const std::string& path,
                                                      engine::Category category);

void write_aggregate_json(const std::string& path, const bench::AggregateReport& report);
std::string aggregate_to_json(const bench::AggregateReport& report, int indent = 2);

/// Grouped success/failure bar chart, one group per category.
void write_aggregate_svg(const std::string& path, const bench::AggregateReport& report);
std::string aggregate_to_svg(const bench::AggregateReport& report);

/// The top rows by total efficiency, as a fixed-width table.
std::string render_top_rows(const std::vector<bench::EfficiencyRow>& rows, std::size_t top_n = 10);

std::string render_aggregate(const bench::AggregateReport& report);

}  // namespace cloudshift::report
