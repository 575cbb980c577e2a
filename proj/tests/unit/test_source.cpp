#include <doctest.h>

#include "oracles.hpp"

#include <solaudit/error.hpp>
#include <solaudit/lexer.hpp>
#include <solaudit/source.hpp>

#include <fstream>
#include <random>
#include <sstream>

using namespace solaudit;

namespace {

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(SOLAUDIT_FIXTURE_DIR) + "/" + name);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int count_outside_code(const std::string& text, char c) {
    const auto lexed = lex::lex_source(text);
    return static_cast<int>(std::count(lexed.code.begin(), lexed.code.end(), c));
}

}  // namespace

TEST_SUITE("solidity_source") {

TEST_CASE("lexer masks comments and string contents") {
    const std::string text = "a = \"x // y\"; // tail\n/* b\n c */ d;";
    const auto lexed = lex::lex_source(text);
    CHECK(lexed.code.size() == text.size());
    CHECK(lexed.comments.size() == 2);
    CHECK(lexed.code.find("//") == std::string::npos);
    CHECK(lexed.code.find('y') == std::string::npos);
    CHECK(std::count(lexed.code.begin(), lexed.code.end(), '\n') == 2);
    CHECK(lexed.comments[1].block);
    CHECK(lexed.comments[1].first_line == 2);
    CHECK(lexed.comments[1].last_line == 3);
    CHECK(lex::strip_comments("x // c\ny") .find('c') == std::string::npos);
}

TEST_CASE("Proxy listing parses into its two contracts") {
    const auto text = fixture("proxy.sol");
    const auto units = parse_all(text, "proxy.sol");
    REQUIRE(units.size() == 2);
    const auto& proxy = units[0];
    CHECK(proxy.contract_name == "Proxy");
    REQUIRE(proxy.functions.size() == 2);
    CHECK(proxy.functions[0].kind == FunctionKind::Constructor);
    CHECK(proxy.functions[1].name == "forward");
    CHECK(proxy.functions[1].visibility == Visibility::Public);
    CHECK(proxy.functions[1].start_line == 6);
    CHECK(proxy.functions[1].end_line == 8);
    REQUIRE(proxy.state_vars.size() == 1);
    CHECK(proxy.state_vars[0].name == "owner");
    CHECK(proxy.state_vars[0].declared_type == "address");

    const auto& fixed = units[1];
    CHECK(fixed.contract_name == "Proxy_fixed");
    REQUIRE(fixed.find_function("onlyOwner") != nullptr);
    CHECK(fixed.find_function("onlyOwner")->kind == FunctionKind::Modifier);
    CHECK(fixed.functions.size() == 4);
    CHECK(parse_source(text, "proxy.sol").contract_name == "Proxy");
    CHECK(parse_source(text, "proxy.sol", "Proxy_fixed").contract_name == "Proxy_fixed");
}

TEST_CASE("empty contract") {
    const auto unit = parse_source("contract A { }", "a.sol");
    CHECK(unit.contract_name == "A");
    CHECK(unit.functions.empty());
    CHECK(unit.state_vars.empty());
}

TEST_CASE("nested blocks end at the outer brace") {
    const std::string text =
        "contract N {\n"                 // 1
        "  uint x;\n"                    // 2
        "  function f(uint a) public {\n"// 3
        "    if (a > 1) {\n"             // 4
        "      x = a;\n"                 // 5
        "    } else {\n"                 // 6
        "      x = 0;\n"                 // 7
        "    }\n"                        // 8
        "  }\n"                          // 9
        "}\n";                           // 10
    const auto unit = parse_source(text, "n.sol");
    REQUIRE(unit.functions.size() == 1);
    CHECK(unit.functions[0].start_line == 3);
    CHECK(unit.functions[0].end_line == 9);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_all("", "e.sol"), Error);
    try {
        parse_all("contract A { function f() public { ", "e.sol");
        FAIL("expected UnbalancedBraces");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnbalancedBraces);
    }
    try {
        parse_all("   \n\t", "e.sol");
        FAIL("expected EmptySource");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptySource);
    }
}

TEST_CASE("function bodies are brace balanced and inside their line span") {
    for (const char* name : {"proxy.sol", "test_token.sol", "vault.sol", "kb_corpus/bank.sol",
                             "kb_corpus/lottery.sol"}) {
        const auto text = fixture(name);
        for (const auto& unit : parse_all(text, name)) {
            for (const auto& fn : unit.functions) {
                CHECK(count_outside_code(fn.body_text, '{') == count_outside_code(fn.body_text, '}'));
                std::string span;
                for (int l = fn.start_line; l <= fn.end_line; ++l) span += unit.raw_lines[l - 1] + "\n";
                CHECK(span.find(fn.body_text) != std::string::npos);
            }
            CHECK(parse_all(text, name) == parse_all(text, name));
        }
    }
}

TEST_CASE("annotation grammar") {
    auto a = extract_annotations("uint x;\n// SWC-107: L15-20\n");
    REQUIRE(a.size() == 1);
    CHECK(a[0].swc_id == "SWC-107");
    CHECK(a[0].start_line == 15);
    CHECK(a[0].end_line == 20);
    CHECK(a[0].comment_line == 2);

    a = extract_annotations("// SWC-101: L7");
    REQUIRE(a.size() == 1);
    CHECK(a[0].start_line == 7);
    CHECK(a[0].end_line == 7);

    CHECK(extract_annotations("contract A { }").empty());
    CHECK(extract_annotations("// swc-101: L7\n// SWC-: L1\n// SWC-12345: L1").empty());
    a = extract_annotations("//SWC-112 :  L3 - L5");
    REQUIRE(a.size() == 1);
    CHECK(a[0].end_line == 5);
    CHECK(is_swc_id("SWC-112"));
    CHECK_FALSE(is_swc_id("SWC-"));
}

TEST_CASE("tagging by line-range intersection") {
    SourceUnit unit;
    FunctionUnit f;
    f.name = "f";
    f.start_line = 14;
    f.end_line = 22;
    FunctionUnit g = f;
    g.name = "g";
    g.start_line = 23;
    g.end_line = 30;
    unit.functions = {f, g};

    auto r = tag_functions(unit, {{"SWC-107", 15, 20, 1}});
    CHECK(r.unit.functions[0].swc_tags == std::set<std::string>{"SWC-107"});
    CHECK(r.unit.functions[1].swc_tags.empty());
    CHECK(r.orphaned.empty());

    r = tag_functions(unit, {{"SWC-101", 100, 110, 1}});
    CHECK(r.orphaned.size() == 1);
    CHECK(r.unit.functions[0].swc_tags.empty());

    r = tag_functions(unit, {{"SWC-104", 21, 24, 1}});
    CHECK(r.unit.functions[0].swc_tags.count("SWC-104") == 1);
    CHECK(r.unit.functions[1].swc_tags.count("SWC-104") == 1);
}

TEST_CASE("tagging matches the interval oracle and is monotone") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> line(1, 60);
    for (int round = 0; round < 200; ++round) {
        SourceUnit unit;
        int cursor = 1;
        for (int i = 0; i < 5; ++i) {
            FunctionUnit fn;
            fn.name = "f" + std::to_string(i);
            fn.start_line = cursor;
            fn.end_line = cursor + line(rng) % 8;
            cursor = fn.end_line + 1 + line(rng) % 3;
            unit.functions.push_back(fn);
        }
        std::vector<SwcAnnotation> anns;
        for (int i = 0; i < 3; ++i) {
            int s = line(rng);
            int e = s + line(rng) % 6;
            anns.push_back({"SWC-1" + std::to_string(10 + i), s, e, 1});
        }
        const auto tagged = tag_functions(unit, anns).unit;
        for (const auto& fn : tagged.functions) {
            std::set<std::string> expected;
            for (const auto& a : anns) {
                if (oracle::intersects(fn.start_line, fn.end_line, a.start_line, a.end_line)) {
                    expected.insert(a.swc_id);
                }
            }
            CHECK(fn.swc_tags == expected);
        }
        auto fewer = anns;
        fewer.pop_back();
        const auto partial = tag_functions(unit, fewer).unit;
        for (std::size_t i = 0; i < partial.functions.size(); ++i) {
            for (const auto& t : partial.functions[i].swc_tags) {
                CHECK(tagged.functions[i].swc_tags.count(t) == 1);
            }
        }
    }
}

}  // TEST_SUITE
