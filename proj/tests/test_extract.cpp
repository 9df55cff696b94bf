#include <doctest.h>

#include <string>

#include "dockmeta/extract.hpp"

using namespace dockmeta;

namespace {

ExtractionResult extract_from(const std::string& text,
                              const ParseOptions& opts = {}) {
    DockerfileAst ast = parse_dockerfile(text, "Dockerfile", opts);
    VarEnv env = build_env(ast);
    return extract_urls(ast, env);
}

} // namespace

TEST_CASE("wget URL with ENV variable substituted") {
    const std::string text =
        "FROM ubuntu:14.04\n"
        "ENV zookeeperVersion 3.4.13\n"
        "RUN wget -q https://archive.apache.org/dist/zookeeper/"
        "zookeeper-$zookeeperVersion/zookeeper-$zookeeperVersion.tar.gz\n";
    ExtractionResult result = extract_from(text);
    REQUIRE(result.urls.size() == 1);
    CHECK(result.urls[0].url ==
          "https://archive.apache.org/dist/zookeeper/zookeeper-3.4.13/"
          "zookeeper-3.4.13.tar.gz");
    CHECK(result.urls[0].kind == ExtractedUrl::SourceKind::wget);
    CHECK(result.urls[0].fully_resolved);
    CHECK(result.urls[0].var_names ==
          std::vector<std::string>{"zookeeperVersion"});
}

TEST_CASE("curl URL with = form ENV variable substituted") {
    const std::string text =
        "FROM debian:jessie\n"
        "ENV PG_VERSION=9.3.4\n"
        "RUN curl -SL https://example.com/postgres-$PG_VERSION.tar.xz | "
        "tar -xJC /usr/src/postgres\n";
    ExtractionResult result = extract_from(text);
    REQUIRE(result.urls.size() == 1);
    CHECK(result.urls[0].url == "https://example.com/postgres-9.3.4.tar.xz");
    CHECK(result.urls[0].kind == ExtractedUrl::SourceKind::curl);
    CHECK(result.urls[0].fully_resolved);
}

TEST_CASE("ARG default feeds the substitution") {
    const std::string text =
        "FROM alpine\n"
        "ARG V=1.2.3\n"
        "RUN wget https://example.com/pkg-${V}.tar.gz\n";
    ExtractionResult result = extract_from(text);
    REQUIRE(result.urls.size() == 1);
    CHECK(result.urls[0].url == "https://example.com/pkg-1.2.3.tar.gz");
}

TEST_CASE("shell assignment inside RUN feeds later commands") {
    const std::string text =
        "FROM alpine\n"
        "RUN V=2.0 && wget https://example.com/a-$V.zip\n";
    ExtractionResult result = extract_from(text);
    REQUIRE(result.urls.size() == 1);
    CHECK(result.urls[0].url == "https://example.com/a-2.0.zip");
}

TEST_CASE("transitive ENV substitution") {
    const std::string text =
        "FROM alpine\n"
        "ENV A=1\n"
        "ENV B=$A.2\n"
        "RUN wget https://example.com/x-$B.tar.gz\n";
    ExtractionResult result = extract_from(text);
    REQUIRE(result.urls.size() == 1);
    CHECK(result.urls[0].url == "https://example.com/x-1.2.tar.gz");
}

TEST_CASE("unbound variable keeps sentinel and clears fully_resolved") {
    const std::string text =
        "FROM alpine\n"
        "RUN wget https://example.com/pkg-${UNSET_VER}.tar.gz\n";
    ExtractionResult result = extract_from(text);
    REQUIRE(result.urls.size() == 1);
    CHECK_FALSE(result.urls[0].fully_resolved);
    CHECK(result.urls[0].url.find("${UNRESOLVED:UNSET_VER}") !=
          std::string::npos);
    CHECK(result.urls[0].var_names == std::vector<std::string>{"UNSET_VER"});
}

TEST_CASE("ADD first source is checked, flag-consuming tokens are not") {
    const std::string text =
        "FROM alpine\n"
        "ADD https://example.com/one.tar.gz /opt/\n"
        "RUN curl -o out.bin\n"
        "RUN wget -O /tmp/two https://example.com/two.tar.gz\n"
        "RUN curl -H 'X-Auth: https://evil.example.com' "
        "https://example.com/three.zip\n";
    ExtractionResult result = extract_from(text);
    REQUIRE(result.urls.size() == 3);
    CHECK(result.urls[0].url == "https://example.com/one.tar.gz");
    CHECK(result.urls[0].kind == ExtractedUrl::SourceKind::add);
    CHECK(result.urls[1].url == "https://example.com/two.tar.gz");
    CHECK(result.urls[2].url == "https://example.com/three.zip");
}

TEST_CASE("tokens starting with dash are never URLs") {
    ExtractionResult result = extract_from(
        "FROM alpine\nRUN curl --retry 3 https://example.com/a.bin\n");
    REQUIRE(result.urls.size() == 1);
    CHECK(result.urls[0].url == "https://example.com/a.bin");
}

TEST_CASE("sudo prefix is skipped before command lookup") {
    ExtractionResult result = extract_from(
        "FROM alpine\nRUN sudo wget https://example.com/a.bin\n");
    REQUIRE(result.urls.size() == 1);
}

TEST_CASE("non-download commands contribute nothing") {
    ExtractionResult result = extract_from(
        "FROM alpine\nRUN echo https://example.com/a.bin\n");
    CHECK(result.urls.empty());
}

TEST_CASE("build_env records both ENV forms and ARG defaults in order") {
    const std::string text =
        "FROM alpine\n"
        "ARG A=argval\n"
        "ENV B legacy value\n"
        "ENV C=assigned D=other\n"
        "ENV B=overridden\n";
    DockerfileAst ast = parse_dockerfile(text, "Dockerfile");
    VarEnv env = build_env(ast);
    REQUIRE(env.find("A"));
    CHECK(env.find("A")->value == "argval");
    REQUIRE(env.find("B"));
    CHECK(env.find("B")->value == "overridden");
    REQUIRE(env.find("C"));
    CHECK(env.find("C")->value == "assigned");
    REQUIRE(env.find("D"));
    CHECK(env.find("D")->value == "other");
    CHECK(env.find("MISSING") == nullptr);
}

TEST_CASE("ARG without default resolves to empty string in env use") {
    const std::string text =
        "FROM alpine\n"
        "ARG V\n"
        "ENV PATH_SUFFIX=pkg-$V\n";
    DockerfileAst ast = parse_dockerfile(text, "Dockerfile");
    VarEnv env = build_env(ast);
    REQUIRE(env.find("PATH_SUFFIX"));
    CHECK(env.find("PATH_SUFFIX")->value == "pkg-");
}

TEST_CASE("url_host strips scheme, userinfo, port and lowercases") {
    CHECK(url_host("https://Example.COM/path") == "example.com");
    CHECK(url_host("http://user:pw@host.io:8080/x") == "host.io");
    CHECK(url_host("https://github.com") == "github.com");
    CHECK_FALSE(url_host("not a url").has_value());
}

TEST_CASE("domain histogram counts repositories once per domain") {
    std::vector<std::pair<std::string, std::string>> repo_urls = {
        {"r1", "https://github.com/a/b/archive/v1.tar.gz"},
        {"r1", "https://github.com/c/d/archive/v2.tar.gz"},
        {"r1", "https://example.com/x.bin"},
        {"r2", "https://github.com/a/b/archive/v1.tar.gz"},
    };
    auto histogram = domain_histogram(repo_urls);
    CHECK(histogram.at("github.com") == 2);
    CHECK(histogram.at("example.com") == 1);
    CHECK(histogram.size() == 2);
}
