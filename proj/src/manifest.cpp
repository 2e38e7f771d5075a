#include "rsde/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "rsde/sha256.hpp"

namespace rsde {

std::string iso_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string ExperimentManifest::run_id() const {
    nlohmann::json id;
    id["tool_version"] = tool_version;
    id["subcommand"] = subcommand;
    id["config"] = config;
    return sha256_hex(id.dump());
}

nlohmann::json ExperimentManifest::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool_version"] = tool_version;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["run_id"] = run_id();
    j["kernel_backend"] = kernel_backend;
    j["threads"] = threads;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [name, digest] : outputs)
        outs.push_back({{"file", name}, {"sha256", digest}});
    j["outputs"] = outs;
    return j;
}

ExperimentManifest ExperimentManifest::from_json(const nlohmann::json& j) {
    ExperimentManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config = j.at("config");
    if (j.contains("kernel_backend"))
        m.kernel_backend = j["kernel_backend"].get<std::string>();
    if (j.contains("threads"))
        m.threads = j["threads"].get<unsigned>();
    return m;
}

void ExperimentManifest::add_output(const std::string& dir, const std::string& name) {
    outputs.emplace_back(name, sha256_file(dir + "/" + name));
}

void ExperimentManifest::save(const std::string& dir) const {
    std::ofstream out(dir + "/manifest.json");
    if (!out)
        throw std::runtime_error("cannot write manifest to " + dir);
    out << to_json().dump(2) << "\n";
}

ExperimentManifest ExperimentManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read manifest " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

} // namespace rsde
