#include <doctest.h>

#include <random>
#include <string>

#include "dockmeta/shell.hpp"

using namespace dockmeta;

TEST_CASE("wget command with variable reference") {
    ShellList list = parse_shell(
        "wget -q https://archive.apache.org/dist/zookeeper/"
        "zookeeper-$zookeeperVersion.tar.gz");
    REQUIRE(list.commands.size() == 1);
    const ShellCommand& cmd = list.commands[0];
    REQUIRE(cmd.argv.size() == 3);
    CHECK(cmd.argv[0].literal_text() == "wget");
    CHECK(cmd.argv[1].literal_text() == "-q");
    CHECK(cmd.argv[2].has_var_ref());
    bool found = false;
    for (const auto& part : cmd.argv[2].parts)
        if (part.kind == WordPart::Kind::var_ref &&
            part.text == "zookeeperVersion")
            found = true;
    CHECK(found);
}

TEST_CASE("two commands joined by &&") {
    ShellList list = parse_shell("apt-get update && apt-get -y install git");
    REQUIRE(list.commands.size() == 2);
    REQUIRE(list.connectors.size() == 1);
    CHECK(list.connectors[0] == Connector::and_and);
    CHECK(list.commands[0].argv[0].literal_text() == "apt-get");
    CHECK(list.commands[1].argv.size() == 4);
}

TEST_CASE("assignment prefix plus command") {
    ShellList list = parse_shell("PG=9.3 curl $PG");
    REQUIRE(list.commands.size() == 1);
    const ShellCommand& cmd = list.commands[0];
    REQUIRE(cmd.assignments.size() == 1);
    CHECK(cmd.assignments[0].name == "PG");
    CHECK(cmd.assignments[0].value.literal_text() == "9.3");
    REQUIRE(cmd.argv.size() == 2);
    CHECK(cmd.argv[1].has_var_ref());
}

TEST_CASE("collect_assignments sees prefixes, standalone and export") {
    ShellList list = parse_shell(
        "A=1 make && B=2 && export C=3 D=4 && echo done");
    auto assignments = collect_assignments(list);
    REQUIRE(assignments.size() == 4);
    CHECK(assignments[0].name == "A");
    CHECK(assignments[1].name == "B");
    CHECK(assignments[2].name == "C");
    CHECK(assignments[3].name == "D");
    CHECK(assignments[3].value.literal_text() == "4");
}

TEST_CASE("quotes group words and suppress expansion in single quotes") {
    ShellList list = parse_shell("echo 'a $X b' \"c $Y\"");
    REQUIRE(list.commands.size() == 1);
    const ShellCommand& cmd = list.commands[0];
    REQUIRE(cmd.argv.size() == 3);
    CHECK(cmd.argv[1].literal_text() == "a $X b");
    CHECK_FALSE(cmd.argv[1].has_var_ref());
    CHECK(cmd.argv[2].has_var_ref()); // $Y expands inside double quotes
}

TEST_CASE("pipe splits commands") {
    ShellList list = parse_shell(
        "curl -SL https://example.com/p.tar.xz | tar -xJC /usr/src");
    REQUIRE(list.commands.size() == 2);
    CHECK(list.connectors[0] == Connector::pipe);
    CHECK(list.commands[0].argv[0].literal_text() == "curl");
    CHECK(list.commands[1].argv[0].literal_text() == "tar");
}

TEST_CASE("braced variable with default value") {
    ShellList list = parse_shell("wget ${URL:-https://fallback.example.com}");
    const ShellWord& word = list.commands[0].argv[1];
    REQUIRE(word.parts.size() == 1);
    CHECK(word.parts[0].kind == WordPart::Kind::var_ref);
    CHECK(word.parts[0].text == "URL");
    REQUIRE(word.parts[0].default_value.has_value());
    CHECK(*word.parts[0].default_value == "https://fallback.example.com");
}

TEST_CASE("unsupported constructs degrade instead of failing") {
    ShellList list = parse_shell("if [ -f x ]; then echo y; fi");
    CHECK(list.degraded);
    CHECK(!list.commands.empty());
}

TEST_CASE("unterminated quote yields best-effort command and diagnostic") {
    ShellList list = parse_shell("echo \"unterminated");
    CHECK(!list.commands.empty());
    CHECK(!list.diagnostics.empty());
}

TEST_CASE("scan_variable_segments splits ENV-style values") {
    auto parts = scan_variable_segments("pre-$A-mid-${B}-post");
    REQUIRE(parts.size() == 5);
    CHECK(parts[0].text == "pre-");
    CHECK(parts[1].kind == WordPart::Kind::var_ref);
    CHECK(parts[1].text == "A");
    CHECK(parts[3].kind == WordPart::Kind::var_ref);
    CHECK(parts[3].text == "B");
    CHECK(parts[4].text == "-post");
}

TEST_CASE("split_words_simple handles quotes without operators") {
    auto words = split_words_simple("NAME=\"a b\" plain $V");
    REQUIRE(words.size() == 3);
    CHECK(words[0].literal_text() == "NAME=a b");
    CHECK(words[1].literal_text() == "plain");
    CHECK(words[2].has_var_ref());
}

TEST_CASE("shell parser is total over random bytes") {
    std::mt19937 rng(987654);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> len(0, 200);
    for (int i = 0; i < 500; ++i) {
        std::string text;
        int n = len(rng);
        for (int j = 0; j < n; ++j)
            text.push_back(static_cast<char>(byte(rng)));
        ShellList list = parse_shell(text);
        if (!list.commands.empty() || text.empty()) continue;
    }
    CHECK(true);
}
