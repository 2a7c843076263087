#include "brw/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "brw/errors.hpp"

namespace brw {

std::string CsvWriter::num(double v) {
    // Shortest decimal that round-trips; keeps 2^-10 printing as 0.0009765625.
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v || (std::isnan(back) && std::isnan(v))) break;
    }
    return buf;
}

void CsvWriter::meta(const std::string& key, const std::string& value) {
    body_ += "# " + key + " " + value + "\n";
}
void CsvWriter::meta(const std::string& key, double value) { meta(key, num(value)); }
void CsvWriter::meta(const std::string& key, long long value) {
    meta(key, std::to_string(value));
}

void CsvWriter::header(const std::vector<std::string>& columns) { row(columns); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) body_ += ',';
        body_ += cells[i];
    }
    body_ += '\n';
}

void CsvWriter::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path);
    out << body_;
}

void write_manifest(const std::string& csv_path, const std::vector<ManifestEntry>& entries) {
    const std::string path = csv_path + ".manifest";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path);
    for (const auto& e : entries) out << e.key << " " << e.value << "\n";
}

}  // namespace brw
