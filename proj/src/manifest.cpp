#include "motrank/manifest.hpp"

#include "motrank/dataset.hpp"
#include "motrank/error.hpp"

#include <fstream>
#include <vector>

#include <json.hpp>

namespace motrank {

using nlohmann::json;

FileDigest digest_file(const std::filesystem::path& path, std::string label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot read file for digest: " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    FileDigest fd;
    fd.path = label.empty() ? path.filename().string() : std::move(label);
    fd.bytes = bytes.size();
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
    fd.digest = hex;
    return fd;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["command"] = manifest.command;
    json cfg = json::parse(manifest.config_json, nullptr, false);
    if (cfg.is_discarded()) throw Error("manifest config is not valid JSON");
    j["config"] = cfg;

    auto digests = [](const std::vector<FileDigest>& files) {
        json arr = json::array();
        for (const auto& f : files)
            arr.push_back({{"path", f.path}, {"bytes", f.bytes}, {"digest", f.digest}});
        return arr;
    };
    j["inputs"] = digests(manifest.inputs);
    j["outputs"] = digests(manifest.outputs);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw UserError("failed writing manifest: " + path.string());
}

} // namespace motrank
