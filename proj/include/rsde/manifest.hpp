#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rsde {

inline constexpr const char* RSDE_VERSION = "0.1.0";

// Full reproducibility record of one run: the configuration snapshot (every
// default made explicit), the seed, the kernel backend and the digests of each
// output file. The run id hashes only the reproducibility-relevant parts, so
// timestamps and thread counts never change it.
struct ExperimentManifest {
    std::string tool_version = RSDE_VERSION;
    std::string subcommand;
    nlohmann::json config; // includes master_seed
    std::string kernel_backend;
    unsigned threads = 1;
    std::string started_at;
    std::string finished_at;
    std::vector<std::pair<std::string, std::string>> outputs; // (name, sha256)

    std::string run_id() const;
    nlohmann::json to_json() const;
    static ExperimentManifest from_json(const nlohmann::json& j);

    void add_output(const std::string& dir, const std::string& name);
    void save(const std::string& dir) const;
    static ExperimentManifest load(const std::string& path);
};

std::string iso_timestamp_now();

} // namespace rsde
