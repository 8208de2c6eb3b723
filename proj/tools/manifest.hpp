#pragma once

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace carma_hawkes::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_text(const std::string& text);

std::string utc_now_iso();

/// Per-run record written as manifest.json beside the outputs.
class RunManifest {
public:
    RunManifest(std::string command, std::string version);

    void add_input(const std::filesystem::path& path);
    void set_config(std::string text) { config_ = std::move(text); }
    void set_seed(std::uint64_t seed) { seed_ = seed; }
    void add_output(const std::string& name) { outputs_.push_back(name); }

    /// Short digest of all inputs (or of the config when there are none),
    /// used to name default output directories.
    [[nodiscard]] std::string short_digest() const;

    void write(const std::filesystem::path& dir) const;

private:
    std::string command_;
    std::string version_;
    std::string config_;
    std::uint64_t seed_{0};
    std::string started_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::string> outputs_;
};

}  // namespace carma_hawkes::cli
