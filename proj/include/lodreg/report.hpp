#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lodreg/gof.hpp"
#include "lodreg/sim.hpp"

namespace lodreg {

// Shortest decimal round-trip formatting so identical runs give identical
// bytes.
std::string fmt(double v);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// '# key = value' comment header: tool version, config echo, seed.
std::string comment_header(const KeyValues& config);

// key = value metadata body (same content, no leading '#').
std::string meta_body(const KeyValues& config);

std::string plot_table_csv(const PlotTable& table);

std::string mc_report_csv(const MonteCarloReport& report);

// Aligned text table: per-method bias/var rows plus the bootstrap and
// coverage rows for the two-stage arm.
std::string mc_report_table(const MonteCarloReport& report);

// Writes content to path via a temporary file and rename, so failed runs
// leave no partial output behind.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace lodreg
