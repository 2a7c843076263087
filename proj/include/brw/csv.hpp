#pragma once

#include <string>
#include <utility>
#include <vector>

namespace brw {

/// CSV writer with a '#'-prefixed metadata header. Only result-determining
/// metadata belongs in the header: outputs must be byte-identical across
/// reruns and worker counts. Execution details (timestamp, workers) go into
/// the sidecar manifest instead.
class CsvWriter {
public:
    void meta(const std::string& key, const std::string& value);
    void meta(const std::string& key, double value);
    void meta(const std::string& key, long long value);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);

    const std::string& text() const { return body_; }
    void write_file(const std::string& path) const;

    static std::string num(double v);  // shortest round-trip formatting

private:
    std::string body_;
};

struct ManifestEntry {
    std::string key, value;
};

/// Sidecar reproduction record: <out>.manifest next to every CSV.
void write_manifest(const std::string& csv_path, const std::vector<ManifestEntry>& entries);

}  // namespace brw
