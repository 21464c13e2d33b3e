#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "lfm/series.hpp"

namespace lfm {

/// One CSV file feeding one (role, frequency) series.
struct SourceSpec {
    std::string path;  ///< relative paths resolve against the manifest directory
    std::string role;  ///< LF, UE, DGDP or CPI
    Frequency frequency = Frequency::Annual;
    Unit unit = Unit::RatePerYear;
    std::string column_period = "period";
    std::string column_value = "value";
    double scale = 1.0;  ///< e.g. 1000 for thousands of persons, 0.01 for percent
};

struct KnownBreak {
    Period period;
    std::string note;
};

struct DataManifest {
    std::string country;
    std::vector<SourceSpec> sources;
    std::vector<KnownBreak> known_breaks;
    std::filesystem::path base_dir;  ///< not serialized

    void validate() const;
};

[[nodiscard]] DataManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
[[nodiscard]] DataManifest load_manifest(const std::filesystem::path& path);
void to_json(nlohmann::json& j, const DataManifest& m);

struct SourceProvenance {
    std::string path;  ///< as written in the manifest
    std::string sha256;
    std::size_t rows = 0;
};

using SeriesKey = std::pair<std::string, Frequency>;

struct Dataset {
    std::string country;
    std::map<SeriesKey, Series> series;
    std::vector<KnownBreak> known_breaks;
    std::vector<SourceProvenance> provenance;

    [[nodiscard]] bool has(const std::string& role, Frequency f) const;
    /// Throws MissingSeries.
    [[nodiscard]] const Series& get(const std::string& role, Frequency f) const;
};

/// Reads every source. Rows are sorted by period and gaps become missing values.
[[nodiscard]] Dataset load(const DataManifest& manifest);

/// Parses CSV text under `spec` (path is used only in messages).
[[nodiscard]] Series parse_series_csv(std::string_view text, const SourceSpec& spec);

/// Writes `period,<value_column>` rows at full precision; missing values are empty cells.
[[nodiscard]] std::string format_series_csv(const Series& s, std::string_view value_column = "value");

/// Pointwise a - b over the common range.
[[nodiscard]] Series compare_sources(const Series& a, const Series& b);

/// Drops the part of `s` before `from`.
[[nodiscard]] Series clip_reliable(const Series& s, const Period& from);

[[nodiscard]] std::string sha256_hex(std::string_view bytes);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace lfm
