#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "torcan/family.hpp"
#include "torcan/hunter.hpp"
#include "torcan/singular.hpp"

using namespace torcan;

TEST_CASE("family file save/load round trip") {
    const auto fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, family::SegmentLadder::fixture(1));
    const auto path = std::filesystem::temp_directory_path() / "torcan_test_family.json";
    family::save_family(fam, path.string());
    const auto fam2 = family::load_family(path.string());
    CHECK(family::family_to_json(fam) == family::family_to_json(fam2));
    std::filesystem::remove(path);
}

TEST_CASE("load of a missing file is a domain error") {
    CHECK_THROWS_AS(family::load_family("/nonexistent/torcan.json"), DomainError);
}

TEST_CASE("beta csv has the documented columns") {
    const auto fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, family::SegmentLadder::fixture(1));
    singular::ReleaseMap rmap(fam.lambda_minus, fam.lambda_plus, fam.sections);
    const auto csv = hunter::beta_csv(rmap, 32);
    CHECK(csv.rfind("y,beta,beta_prime\n", 0) == 0);
    int lines = 0;
    for (char ch : csv) {
        if (ch == '\n') ++lines;
    }
    CHECK(lines >= 30);
}

TEST_CASE("prediction json lists inclusions and cycles") {
    const auto fam =
        family::build_family(curve::SlowCurveModel{}, curve::SectionSet{}, family::SegmentLadder::fixture(1));
    singular::ReleaseMap rmap(fam.lambda_minus, fam.lambda_plus, fam.sections);
    const auto pred = singular::predict(rmap, fam.ladder);
    const auto json = hunter::prediction_json(pred);
    CHECK(json.find("\"cycle_count\": 3") != std::string::npos);
    CHECK(json.find("omega_a_2") != std::string::npos);
    CHECK(json.find("margin_lo") != std::string::npos);
}
