#include "lfm/ingest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lfm/error.hpp"

namespace lfm {

namespace {

const std::set<std::string> kRoles{"LF", "UE", "DGDP", "CPI"};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Splits one CSV record; double quotes group commas and "" escapes a quote.
std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    out.push_back(trim(cell));
    return out;
}

bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "." || s == "..";
}

std::string where(const SourceSpec& spec, std::size_t line, const std::string& column) {
    return spec.path + ":" + std::to_string(line) + " column '" + column + "'";
}

}  // namespace

void DataManifest::validate() const {
    std::set<SeriesKey> seen;
    for (const auto& s : sources) {
        if (s.path.empty()) fail(ErrorCode::InvalidManifest, "source without a path");
        if (!kRoles.contains(s.role)) {
            fail(ErrorCode::InvalidManifest, "unknown role '" + s.role + "' (expected LF, UE, DGDP or CPI)");
        }
        if (!(s.scale > 0.0) || !std::isfinite(s.scale)) {
            fail(ErrorCode::InvalidManifest, "scale must be positive for " + s.path);
        }
        if (!seen.insert({s.role, s.frequency}).second) {
            fail(ErrorCode::InvalidManifest, "duplicate source for " + s.role + "/" + std::string(to_string(s.frequency)));
        }
    }
}

DataManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    DataManifest m;
    m.base_dir = base_dir;
    try {
        m.country = j.value("country", std::string());
        for (const auto& s : j.at("sources")) {
            SourceSpec spec;
            spec.path = s.at("path").get<std::string>();
            spec.role = s.at("role").get<std::string>();
            spec.frequency = parse_frequency(s.at("frequency").get<std::string>());
            spec.unit = parse_unit(s.at("unit").get<std::string>());
            spec.column_period = s.value("column_period", std::string("period"));
            spec.column_value = s.value("column_value", std::string("value"));
            spec.scale = s.value("scale", 1.0);
            m.sources.push_back(std::move(spec));
        }
        if (j.contains("known_breaks")) {
            for (const auto& b : j.at("known_breaks")) {
                m.known_breaks.push_back({Period::parse(b.at("period").get<std::string>()), b.value("note", std::string())});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidManifest, std::string("malformed manifest: ") + e.what());
    } catch (const Error& e) {
        fail(ErrorCode::InvalidManifest, std::string("malformed manifest: ") + e.what());
    }
    m.validate();
    return m;
}

DataManifest load_manifest(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidManifest, path.string() + ": " + e.what());
    }
    return manifest_from_json(j, path.parent_path());
}

void to_json(nlohmann::json& j, const DataManifest& m) {
    j = nlohmann::json::object();
    j["country"] = m.country;
    auto sources = nlohmann::json::array();
    for (const auto& s : m.sources) {
        sources.push_back({{"path", s.path},
                           {"role", s.role},
                           {"frequency", std::string(to_string(s.frequency))},
                           {"unit", std::string(to_string(s.unit))},
                           {"column_period", s.column_period},
                           {"column_value", s.column_value},
                           {"scale", s.scale}});
    }
    j["sources"] = std::move(sources);
    auto breaks = nlohmann::json::array();
    for (const auto& b : m.known_breaks) breaks.push_back({{"period", b.period.to_string()}, {"note", b.note}});
    j["known_breaks"] = std::move(breaks);
}

bool Dataset::has(const std::string& role, Frequency f) const { return series.contains({role, f}); }

const Series& Dataset::get(const std::string& role, Frequency f) const {
    const auto it = series.find({role, f});
    if (it == series.end()) {
        fail(ErrorCode::MissingSeries, "dataset has no " + role + " series at " + std::string(to_string(f)) + " frequency");
    }
    return it->second;
}

Series parse_series_csv(std::string_view text, const SourceSpec& spec) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv(line);
            break;
        }
    }
    if (header.empty()) fail(ErrorCode::ParseError, spec.path + ": missing header line");
    const auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) fail(ErrorCode::ParseError, spec.path + ": no column named '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ip = col(spec.column_period);
    const std::size_t iv = col(spec.column_value);

    std::map<std::int64_t, double> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() <= std::max(ip, iv)) {
            fail(ErrorCode::ParseError, spec.path + ":" + std::to_string(line_no) + ": expected at least " +
                                            std::to_string(std::max(ip, iv) + 1) + " columns");
        }
        Period period(spec.frequency, 2000, 1);
        try {
            period = Period::parse(cells[ip], spec.frequency);
        } catch (const Error& e) {
            fail(ErrorCode::ParseError, where(spec, line_no, spec.column_period) + ": " + e.what());
        }
        double value = kMissing;
        const std::string& raw = cells[iv];
        if (!is_missing_token(raw)) {
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(raw.c_str(), &end);
            if (end == raw.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
                fail(ErrorCode::ParseError, where(spec, line_no, spec.column_value) + ": '" + raw + "' is not a number");
            }
            value = v * spec.scale;
            if (spec.unit == Unit::Persons && value < 0.0) {
                fail(ErrorCode::UnitMismatch, where(spec, line_no, spec.column_value) + ": negative person count");
            }
            if (spec.unit == Unit::RatePerYear && spec.scale == 1.0 && std::fabs(value) > 1.5) {
                fail(ErrorCode::UnitMismatch, where(spec, line_no, spec.column_value) + ": rate " + raw +
                                                  " looks like a percentage; declare scale 0.01");
            }
        }
        if (!rows.emplace(period.ordinal(), value).second) {
            fail(ErrorCode::DuplicatePeriod, spec.path + ": period " + period.to_string() + " appears more than once");
        }
    }
    if (rows.empty()) fail(ErrorCode::ParseError, spec.path + ": no data rows");

    const std::int64_t first = rows.begin()->first;
    const std::int64_t last = rows.rbegin()->first;
    std::vector<double> values(static_cast<std::size_t>(last - first + 1), kMissing);
    for (const auto& [ord, v] : rows) values[static_cast<std::size_t>(ord - first)] = v;
    return Series(Period::from_ordinal(spec.frequency, first), std::move(values), spec.unit, spec.role);
}

Dataset load(const DataManifest& manifest) {
    manifest.validate();
    Dataset ds;
    ds.country = manifest.country;
    ds.known_breaks = manifest.known_breaks;
    for (const auto& spec : manifest.sources) {
        const std::filesystem::path p = std::filesystem::path(spec.path).is_absolute()
                                            ? std::filesystem::path(spec.path)
                                            : manifest.base_dir / spec.path;
        const std::string text = read_file(p);
        Series s = parse_series_csv(text, spec);
        ds.provenance.push_back({spec.path, sha256_hex(text), s.size()});
        ds.series.emplace(SeriesKey{spec.role, spec.frequency}, std::move(s));
    }
    return ds;
}

std::string format_series_csv(const Series& s, std::string_view value_column) {
    std::string out = "period," + std::string(value_column) + "\n";
    char buf[64];
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += s.period_at(i).to_string();
        out += ',';
        if (!is_missing(s[i])) {
            std::snprintf(buf, sizeof buf, "%.17g", s[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

Series compare_sources(const Series& a, const Series& b) {
    const auto [x, y] = align(a, b, 0);
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
    return Series(x.start(), std::move(diff), a.unit() == Unit::Persons ? Unit::Index : a.unit(), a.role());
}

Series clip_reliable(const Series& s, const Period& from) {
    if (from.frequency() != s.frequency()) fail(ErrorCode::FrequencyMismatch, "clip period frequency differs from series");
    if (s.empty() || from > s.end()) {
        fail(ErrorCode::EmptyResult, "clipping at " + from.to_string() + " leaves no data");
    }
    return s.slice(std::max(from, s.start()), s.end());
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorCode::IoError, "SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[md[i] >> 4];
        out += kHex[md[i] & 0xF];
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace lfm
