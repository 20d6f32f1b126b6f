#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace ifslab {

inline constexpr const char* kArtifactVersion = "0.1.0";

std::string sha256_hex(std::string_view data);

// Locale-independent, 17 significant digits.
std::string format_g17(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

struct RunManifest {
    std::string config_echo;  // canonical config text, re-parses to an equal config
    std::uint64_t master_seed = 0;
    std::string version = kArtifactVersion;
    std::string command;
    std::map<std::string, std::string> file_digests;  // filename -> sha256

    void record(const std::string& filename, const std::string& content);
    std::string to_json() const;
};

}  // namespace ifslab
