#include "eds/report.hpp"

#include <sstream>

namespace eds {

bool Report::pass() const {
    for (const Check& c : checks)
        if (!c.pass) return false;
    return true;
}

Check& Report::add(std::string name, bool ok, std::string ref) {
    checks.push_back(Check{std::move(name), ok, Json::object(), {}, std::move(ref)});
    return checks.back();
}

void Report::merge(const Report& other) {
    for (const auto& [k, v] : other.facts.items())
        if (!facts.contains(k)) facts[k] = v;
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

Json Report::json() const {
    Json out;
    out["system"] = system;
    out["seed"] = seed;
    for (const auto& [k, v] : facts.items()) out[k] = v;
    Json cs = Json::array();
    for (const Check& c : checks)
        cs.push_back({{"name", c.name}, {"pass", c.pass}, {"ranks", c.ranks}, {"witnesses", c.witnesses}, {"paper_ref", c.paper_ref}});
    out["checks"] = cs;
    out["pass"] = pass();
    return out;
}

std::string Report::text() const {
    std::ostringstream os;
    os << system << " (seed " << seed << ")\n";
    for (const Check& c : checks) {
        os << "  " << (c.pass ? "pass" : "FAIL") << "  " << c.name;
        if (!c.ranks.empty()) os << "  " << c.ranks.dump();
        os << "\n";
        for (const std::string& w : c.witnesses) os << "        " << w << "\n";
    }
    int failed = 0;
    for (const Check& c : checks) failed += c.pass ? 0 : 1;
    os << (failed ? std::to_string(failed) + " of " + std::to_string(checks.size()) + " checks failed"
                  : "all " + std::to_string(checks.size()) + " checks passed")
       << "\n";
    return os.str();
}

}  // namespace eds
