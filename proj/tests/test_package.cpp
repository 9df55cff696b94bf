#include <doctest.h>

#include <fstream>
#include <string>

#include <json.hpp>

#include "dockmeta/package.hpp"
#include "dockmeta/registry.hpp"
#include "support/corpus_builder.hpp"

using namespace dockmeta;
using nlohmann::ordered_json;

TEST_CASE("url pattern fixture table classifies with zero errors") {
    std::ifstream in(testsupport::fixture_path("url_patterns.json"));
    REQUIRE(in.good());
    ordered_json doc;
    in >> doc;
    REQUIRE(doc.at("cases").size() >= 30);
    for (const auto& entry : doc.at("cases")) {
        std::string url = entry.at("url").get<std::string>();
        CAPTURE(url);
        auto ref = match_github_url(url);
        if (entry.at("expect").is_null()) {
            CHECK_FALSE(ref.has_value());
            continue;
        }
        REQUIRE(ref.has_value());
        const auto& expect = entry.at("expect");
        CHECK(ref->identity.full() == expect.at("package").get<std::string>());
        CHECK(ref->tag == expect.at("tag").get<std::string>());
        CHECK(std::string(to_string(ref->pattern)) ==
              expect.at("pattern").get<std::string>());
        if (expect.contains("asset_file")) {
            REQUIRE(ref->asset_file.has_value());
            CHECK(*ref->asset_file ==
                  expect.at("asset_file").get<std::string>());
        } else {
            CHECK_FALSE(ref->asset_file.has_value());
        }
    }
}

TEST_CASE("identity parse and normalization") {
    auto id = PackageIdentity::parse("Acme/LibFoo");
    REQUIRE(id);
    CHECK(id->owner == "acme");
    CHECK(id->repo == "libfoo");
    CHECK(id->full() == "acme/libfoo");
    CHECK_FALSE(PackageIdentity::parse("nosls").has_value());
    CHECK_FALSE(PackageIdentity::parse("/x").has_value());
    CHECK_FALSE(PackageIdentity::parse("x/").has_value());
    CHECK_FALSE(PackageIdentity::parse("a/b/c").has_value());
}

TEST_CASE("query strip emits a diagnostic") {
    Diagnostics diags;
    auto ref = match_github_url(
        "https://github.com/a/b/archive/v1.tar.gz?download=1", &diags);
    REQUIRE(ref);
    CHECK(ref->tag == "v1");
    CHECK(diags.size() == 1);
}

TEST_CASE("validation against the registry snapshot") {
    RegistrySnapshot registry =
        RegistrySnapshot::load_file(testsupport::fixture_path("registry.json"));

    auto archive_ok =
        match_github_url("https://github.com/acme/libfoo/archive/v1.2.tar.gz");
    REQUIRE(archive_ok);
    CHECK(validate(*archive_ok, registry) == ValidationStatus::valid);

    auto archive_bad_tag =
        match_github_url("https://github.com/acme/libfoo/archive/v9.9.tar.gz");
    REQUIRE(archive_bad_tag);
    CHECK(validate(*archive_bad_tag, registry) == ValidationStatus::invalid);

    // Tag comparison is case-sensitive: V1.2 is not a known tag.
    auto archive_case =
        match_github_url("https://github.com/acme/libfoo/archive/V1.2.tar.gz");
    REQUIRE(archive_case);
    CHECK(validate(*archive_case, registry) == ValidationStatus::invalid);

    auto release_ok = match_github_url(
        "https://github.com/acme/tools/releases/download/0.2/tools-0.2.tar.gz");
    REQUIRE(release_ok);
    CHECK(validate(*release_ok, registry) == ValidationStatus::valid);

    // Known tag but an asset name the registry never served.
    auto release_bad_asset = match_github_url(
        "https://github.com/acme/tools/releases/download/0.2/other.tar.gz");
    REQUIRE(release_bad_asset);
    CHECK(validate(*release_bad_asset, registry) ==
          ValidationStatus::invalid);

    auto unknown =
        match_github_url("https://github.com/nobody/nothing/archive/v1.zip");
    REQUIRE(unknown);
    CHECK(validate(*unknown, registry) == ValidationStatus::unknown_package);
}
