#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kprobe/model.hpp"

namespace kprobe {

struct CatalogEntry {
    std::string name;
    std::string description;
    nlohmann::json spec;
};

/// Built-in models: closed-form synthetic profiles, geometric factors, and
/// the two control models that violate the hyperbolic or center conditions.
const std::vector<CatalogEntry>& model_catalog();

const CatalogEntry& catalog_entry(std::string_view name);
SystemModel catalog_model(std::string_view name);

}  // namespace kprobe
