#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eds {

using Json = nlohmann::ordered_json;

struct Check {
    std::string name;
    bool pass = false;
    Json ranks = Json::object();
    std::vector<std::string> witnesses;
    std::string paper_ref;
};

struct Report {
    std::string system;
    std::uint64_t seed = 42;
    Json facts = Json::object();  // top-level summary values, e.g. "q"
    std::vector<Check> checks;

    bool pass() const;
    Check& add(std::string name, bool pass, std::string ref = {});
    void merge(const Report& other);
    Json json() const;
    std::string text() const;
};

}  // namespace eds
