#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <ctime>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace carma_hawkes::cli {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("SHA-256 initialisation failed");
        }
    }
    void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (unsigned i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 15];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string sha256_text(const std::string& text) {
    Sha256 h;
    h.update(text.data(), text.size());
    return h.hex();
}

std::string utc_now_iso() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunManifest::RunManifest(std::string command, std::string version)
    : command_(std::move(command)), version_(std::move(version)), started_(utc_now_iso()) {}

void RunManifest::add_input(const std::filesystem::path& path) { inputs_.emplace_back(path.string(), sha256_file(path)); }

std::string RunManifest::short_digest() const {
    std::string all;
    for (const auto& [path, digest] : inputs_) all += digest;
    if (all.empty()) all = config_;
    return sha256_text(command_ + all).substr(0, 8);
}

void RunManifest::write(const std::filesystem::path& dir) const {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["tool_version"] = version_;
    j["seed"] = seed_;
    j["config"] = config_;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
    for (const auto& [path, digest] : inputs_) inputs.push_back({{"path", path}, {"sha256", digest}});
    j["inputs"] = std::move(inputs);
    j["outputs"] = outputs_;
    j["start_time"] = started_;
    j["end_time"] = utc_now_iso();
    std::ofstream out(dir / "manifest.json");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
}

}  // namespace carma_hawkes::cli
