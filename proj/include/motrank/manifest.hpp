#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace motrank {

inline constexpr const char* kToolName = "motrank";
inline constexpr const char* kToolVersion = "0.1.0";

struct FileDigest {
    std::string path; ///< as recorded, not resolved
    std::uintmax_t bytes = 0;
    std::string digest; ///< FNV-1a 64 over file contents, hex
};

/// Digests the file at `path`, recording `label` (defaults to the filename so
/// manifests do not depend on where the run directory lives).
FileDigest digest_file(const std::filesystem::path& path, std::string label = {});

/// Reproducibility record written by every CLI run. Contains no timestamps
/// or host details: identical config and inputs give identical bytes.
struct Manifest {
    std::string command;
    std::string config_json; ///< logical parameters only, no output paths
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
};

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

} // namespace motrank
