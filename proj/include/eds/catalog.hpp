#pragma once

#include <functional>

#include "eds/sysdef.hpp"

namespace eds {

struct CatalogEntry {
    std::string name;
    std::string summary;
    std::vector<std::string> systems;  // system-definition texts
    // Checks that need several charts at once; may be empty.
    std::function<void(const RunOptions&, Report&)> extra;
};

const std::vector<CatalogEntry>& catalog();
// Throws Error for an unknown name.
const CatalogEntry& find_entry(const std::string& name);

// Runs every system of the entry and its cross-chart checks. Check names
// carry the system name when the entry has more than one system.
Report run_entry(const std::string& name, const RunOptions& opt);

}  // namespace eds
