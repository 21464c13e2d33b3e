#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "lfm/error.hpp"
#include "lfm/ingest.hpp"

using namespace lfm;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an lfm::Error");
    return ErrorCode::InvalidArgument;
}

std::string message_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

SourceSpec persons(double scale = 1.0) {
    SourceSpec s;
    s.path = "lf.csv";
    s.role = "LF";
    s.frequency = Frequency::Annual;
    s.unit = Unit::Persons;
    s.scale = scale;
    return s;
}

SourceSpec rate(Frequency f = Frequency::Annual, double scale = 1.0) {
    SourceSpec s;
    s.path = "ue.csv";
    s.role = "UE";
    s.frequency = f;
    s.unit = Unit::RatePerYear;
    s.scale = scale;
    return s;
}

fs::path temp_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("lfm_ingest_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("scaling thousands of persons") {
    const Series s = parse_series_csv("period,value\n1990,100\n1991,102\n", persons(1000));
    CHECK(s.start() == Period(Frequency::Annual, 1990));
    CHECK(s[0] == 100000.0);
    CHECK(s[1] == 102000.0);
    CHECK(s.unit() == Unit::Persons);
    CHECK(s.role() == "LF");
}

TEST_CASE("rows are sorted and gaps become missing") {
    const Series s = parse_series_csv("period,value\n1992,3\n1990,1\n1994,5\n", persons());
    REQUIRE(s.size() == 5);
    CHECK(s[0] == 1.0);
    CHECK(is_missing(s[1]));
    CHECK(s[2] == 3.0);
    CHECK(is_missing(s[3]));
    CHECK(s[4] == 5.0);
    const Series na = parse_series_csv("period,value\n1990,1\n1991,NA\n1992,\n1993,4\n", persons());
    CHECK(is_missing(na[1]));
    CHECK(is_missing(na[2]));
}

TEST_CASE("extra columns, quotes and selectable column names") {
    SourceSpec spec = rate(Frequency::Quarterly, 0.01);
    spec.column_period = "date";
    spec.column_value = "rate";
    const Series s = parse_series_csv("note,date,rate\n\"a, b\",1990-Q1,5.5\nx,1990-Q2,6\n", spec);
    CHECK(s.size() == 2);
    CHECK(s[0] == doctest::Approx(0.055));
    CHECK(s[1] == doctest::Approx(0.06));
}

TEST_CASE("parse errors") {
    CHECK(code_of([] { (void)parse_series_csv("period,value\n1990,1\n1990,2\n", persons()); }) ==
          ErrorCode::DuplicatePeriod);
    CHECK(message_of([] { (void)parse_series_csv("period,value\n1990,1\n1990,2\n", persons()); }).find("1990") !=
          std::string::npos);

    const std::string bad = message_of([] { (void)parse_series_csv("period,value\n1990,1\n1991,abc\n", persons()); });
    CHECK(bad.find("lf.csv:3") != std::string::npos);
    CHECK(bad.find("value") != std::string::npos);
    CHECK(code_of([] { (void)parse_series_csv("period,value\n1990,abc\n", persons()); }) == ErrorCode::ParseError);
    CHECK(code_of([] { (void)parse_series_csv("period,value\n1990-13,1\n", rate(Frequency::Monthly)); }) ==
          ErrorCode::ParseError);
    CHECK(code_of([] { (void)parse_series_csv("year,value\n1990,1\n", persons()); }) == ErrorCode::ParseError);
    CHECK(code_of([] { (void)parse_series_csv("", persons()); }) == ErrorCode::ParseError);
    CHECK(code_of([] { (void)parse_series_csv("period,value\n", persons()); }) == ErrorCode::ParseError);
}

TEST_CASE("unit checks") {
    // A percent figure read without the 0.01 scale.
    CHECK(code_of([] { (void)parse_series_csv("period,value\n1990,5.6\n", rate()); }) == ErrorCode::UnitMismatch);
    CHECK(parse_series_csv("period,value\n1990,5.6\n", rate(Frequency::Annual, 0.01))[0] == doctest::Approx(0.056));
    CHECK(code_of([] { (void)parse_series_csv("period,value\n1990,-5\n", persons()); }) == ErrorCode::UnitMismatch);
}

TEST_CASE("manifest validation") {
    const auto base = nlohmann::json::parse(R"({
        "country": "AU",
        "sources": [
            {"path": "lf.csv", "role": "LF", "frequency": "ANNUAL", "unit": "PERSONS", "scale": 1000},
            {"path": "ue.csv", "role": "UE", "frequency": "ANNUAL", "unit": "RATE_PER_YEAR", "scale": 0.01}
        ],
        "known_breaks": [{"period": "2001", "note": "survey change"}]
    })");
    const DataManifest m = manifest_from_json(base);
    CHECK(m.country == "AU");
    CHECK(m.sources.size() == 2);
    CHECK(m.sources[0].scale == 1000);
    CHECK(m.known_breaks[0].period == Period(Frequency::Annual, 2001));
    const nlohmann::json again = m;
    CHECK(manifest_from_json(again).sources[1].unit == Unit::RatePerYear);

    auto broken = base;
    broken["sources"][1]["role"] = "GDP";
    CHECK(code_of([&] { (void)manifest_from_json(broken); }) == ErrorCode::InvalidManifest);
    broken = base;
    broken["sources"][1]["scale"] = 0;
    CHECK(code_of([&] { (void)manifest_from_json(broken); }) == ErrorCode::InvalidManifest);
    broken = base;
    broken["sources"][1]["role"] = "LF";
    CHECK(code_of([&] { (void)manifest_from_json(broken); }) == ErrorCode::InvalidManifest);
    broken = base;
    broken["sources"][0].erase("path");
    CHECK(code_of([&] { (void)manifest_from_json(broken); }) == ErrorCode::InvalidManifest);
    CHECK(code_of([] { (void)load_manifest("/nonexistent/manifest.json"); }) == ErrorCode::IoError);
}

TEST_CASE("compare_sources") {
    const Series a(Period(Frequency::Annual, 1990), {100000, 101000, 102000}, Unit::Persons, "LF");
    const Series b(Period(Frequency::Annual, 1991), {56000, 57000, 58000}, Unit::Persons, "LF");
    const Series same = compare_sources(a, a);
    for (const double v : same.values()) CHECK(v == 0.0);
    const Series d = compare_sources(a, b);
    CHECK(d.start() == Period(Frequency::Annual, 1991));
    CHECK(d.size() == 2);
    CHECK(d[0] == 45000.0);
    CHECK(d[1] == 45000.0);
    const Series far(Period(Frequency::Annual, 2010), {1.0}, Unit::Persons);
    CHECK(code_of([&] { (void)compare_sources(a, far); }) == ErrorCode::EmptyOverlap);
}

TEST_CASE("clip_reliable") {
    const Series s(Period(Frequency::Monthly, 1978, 1), std::vector<double>(24, 0.05), Unit::RatePerYear);
    const Series c = clip_reliable(s, Period(Frequency::Monthly, 1978, 7));
    CHECK(c.start() == Period(Frequency::Monthly, 1978, 7));
    CHECK(c.size() == 18);
    CHECK(clip_reliable(s, Period(Frequency::Monthly, 1970, 1)).size() == 24);
    CHECK(code_of([&] { (void)clip_reliable(s, Period(Frequency::Monthly, 1980, 1)); }) == ErrorCode::EmptyResult);
    CHECK(code_of([&] { (void)clip_reliable(s, Period(Frequency::Annual, 1978)); }) == ErrorCode::FrequencyMismatch);
}

TEST_CASE("CSV round trip") {
    std::mt19937_64 eng(1);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    std::vector<double> v(40);
    for (auto& x : v) x = u(eng);
    v[7] = kMissing;
    const Series s(Period(Frequency::Quarterly, 1980, 2), v, Unit::RatePerYear, "UE");
    const Series back = parse_series_csv(format_series_csv(s), rate(Frequency::Quarterly));
    REQUIRE(back.size() == s.size());
    CHECK(back.start() == s.start());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == 7) {
            CHECK(is_missing(back[i]));
        } else {
            CHECK(back[i] == s[i]);
        }
    }
}

TEST_CASE("load resolves paths against the manifest and is deterministic") {
    const fs::path dir = temp_dir("load");
    write(dir / "lf.csv", "period,value\n1990,8000\n1991,8100\n1992,8200\n");
    write(dir / "ue.csv", "period,value\n1991,6.9\n1992,9.6\n");
    write(dir / "manifest.json", R"({"country": "AU", "sources": [
        {"path": "lf.csv", "role": "LF", "frequency": "ANNUAL", "unit": "PERSONS", "scale": 1000},
        {"path": "ue.csv", "role": "UE", "frequency": "ANNUAL", "unit": "RATE_PER_YEAR", "scale": 0.01}]})");
    const DataManifest m = load_manifest(dir / "manifest.json");
    const Dataset a = load(m);
    const Dataset b = load(m);
    CHECK(a.has("LF", Frequency::Annual));
    CHECK(!a.has("LF", Frequency::Monthly));
    CHECK(a.get("LF", Frequency::Annual)[2] == 8200000.0);
    CHECK(a.get("UE", Frequency::Annual)[1] == doctest::Approx(0.096));
    CHECK(code_of([&] { (void)a.get("CPI", Frequency::Annual); }) == ErrorCode::MissingSeries);
    REQUIRE(a.provenance.size() == 2);
    CHECK(a.provenance[0].path == "lf.csv");
    CHECK(a.provenance[0].rows == 3);
    CHECK(a.provenance[0].sha256 == sha256_hex(read_file(dir / "lf.csv")));
    for (std::size_t i = 0; i < 2; ++i) CHECK(a.provenance[i].sha256 == b.provenance[i].sha256);
    CHECK(code_of([&] { (void)read_file(dir / "missing.csv"); }) == ErrorCode::IoError);
    fs::remove_all(dir);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
