#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stapulse {

inline constexpr const char* kToolVersion = "stapulse 1.0.0";

// FIPS 180-4 SHA-256 over the exact bytes given; lowercase hex.
std::string sha256_hex(std::string_view data);

// Digest of a file's bytes; throws std::runtime_error when unreadable.
std::string sha256_file(const std::string& path);

// Reproducibility sidecar written next to every command's outputs.  The
// digests pin the exact input bytes, so two manifests with equal digests,
// seed, and parameters describe runs whose result files are byte-identical.
// Wall time is informational and excluded from that promise.
struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    // (path, sha256 of content) for every input file the command read.
    std::vector<std::pair<std::string, std::string>> config_digests;
    bool seeded = false;
    std::uint64_t seed = 0;
    // Echo of the effective settings, flag spellings as keys.
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;
};

// JSON document, "format" field first ("run-manifest v1"), keys in
// declaration order.
void write_manifest(const std::string& path, const RunManifest& m);

}  // namespace stapulse
